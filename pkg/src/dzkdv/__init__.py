"""Exact symbolic engine for KdV free energies and universal identities of
Dubrovin-Zhang hierarchies."""

__version__ = "0.1.0"
