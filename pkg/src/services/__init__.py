"""Storage of levels, traces and evaluation results."""
