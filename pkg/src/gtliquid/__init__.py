"""Liquid-region geometry for uniformly random interlaced particle systems."""

from .density import DensitySpec, builtin, support_atlas, validate

__all__ = ["DensitySpec", "builtin", "support_atlas", "validate"]
