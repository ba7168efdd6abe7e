"""sepforge: mine, detect and apply dependence-graph-based systematic edit patterns."""

__version__ = "0.1.0"
