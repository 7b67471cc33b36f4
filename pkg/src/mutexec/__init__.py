"""Program generation, mutation, and execution-reasoning evaluation toolkit."""

__version__ = "0.1.0"
