"""qrbmkit: annealing-trained RBMs for balancing imbalanced tabular data."""

__version__ = "0.1.0"
