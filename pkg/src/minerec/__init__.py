"""Process discovery recommender: feature extraction, per-algorithm quality
prediction, portfolio ranking, mining and Shapley explanations."""

__version__ = "0.1.0"
