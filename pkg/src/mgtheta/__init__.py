"""Classical, Lovasz-theta and multigraph-hierarchy bounds for exclusivity (multi)graphs."""

__version__ = "0.1.0"
