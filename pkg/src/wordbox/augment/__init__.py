"""Camera-style degradations and the seeded policy engine that applies them."""
from .kernels import (brightness_contrast, crop_jitter, dilate, erode, gaussian_blur, gaussian_noise,
                      invert, motion_blur, perspective, resolution_drop, rotate, salt_pepper,
                      sheet_bend, shadow_gradient)
from .policy import (KINDS, AugmentationPolicy, AugmentationSpec, PolicyError, apply_policy,
                     augment_dataset, load_policy)

__all__ = [
    "AugmentationPolicy", "AugmentationSpec", "KINDS", "PolicyError", "apply_policy",
    "augment_dataset", "load_policy", "brightness_contrast", "crop_jitter", "dilate", "erode",
    "gaussian_blur", "gaussian_noise", "invert", "motion_blur", "perspective", "resolution_drop",
    "rotate", "salt_pepper", "sheet_bend", "shadow_gradient",
]
