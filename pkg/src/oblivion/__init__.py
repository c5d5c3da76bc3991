"""Multi-user homomorphic computation protocols with server-oblivious ABAC."""

__version__ = "0.1.0"
