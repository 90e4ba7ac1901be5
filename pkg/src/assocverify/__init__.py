"""Verification of LLM-generated biomedical associations.

Terms are checked against OBO ontologies by name and synonym, and the
associations themselves by co-occurrence in abstract corpora split into
publication periods. A small harness drives generation against any
chat-completion endpoint.
"""

__version__ = "0.1.0"
