"""Turn HTML API documentation pages into OpenAPI 3.0 documents, and score the results."""

__version__ = "0.1.0"
