"""Movie collaboration networks: catalog, graph, embeddings and rating-bucket models."""

__version__ = "0.1.0"
