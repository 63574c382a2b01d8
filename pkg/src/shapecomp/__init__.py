"""Shape composition by convex relaxation: dictionaries, solvers and certificates."""

__version__ = "0.1.0"
