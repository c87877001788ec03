"""Citation-network embeddings and interdisciplinary citation prediction."""
__version__ = "0.1.0"
