"""Exact and certified tools for group actions on the real line."""

from aplab.errors import AplabError
from aplab.group_action import GroupAction
from aplab.kernels import BACKEND
from aplab.pl_homeo import PLHomeo, affine, compose, identity, inverse, translation

__version__ = "0.1.0"

__all__ = [
    "AplabError",
    "BACKEND",
    "GroupAction",
    "PLHomeo",
    "affine",
    "compose",
    "identity",
    "inverse",
    "translation",
]
