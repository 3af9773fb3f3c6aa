"""Polytropic elastic balls: constitutive family, static and homologous
self-gravitating solutions, phase-plane analysis and parameter atlases."""

from ._backend import BACKEND
from .constitutive import Material, StrainState

__version__ = "0.1.0"

__all__ = ["BACKEND", "Material", "StrainState", "__version__"]
