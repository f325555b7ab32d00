"""Word-box preprocessing toolkit: profile normalization, synthetic data,
augmentation, dataset manifests and recognizer-agnostic scoring."""

__version__ = "0.1.0"
