"""Exact weight-truncated computer algebra for meromorphic open-string
vertex algebras, their bimodules, and the associated cochain complex and
cohomology, with a classical Hochschild oracle for the degenerate case.
"""

__version__ = "0.1.0"
