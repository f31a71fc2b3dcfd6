"""Distance-weighted citation indices over time-sliced collaboration networks."""

__version__ = "0.1.0"
