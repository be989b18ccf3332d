"""Rauzy-Veech renormalization of generalized interval exchange maps."""

from .combinatorics import CombinatorialPair, genus, omega_matrix, rauzy_class, rauzy_move
from .cocycle import CocyclePath, theta_matrix
from .induction import ConnectionDetected, renormalize, rv_step
from .maps import Giem, make_affine_iem, make_standard_iem

__version__ = "0.1.0"

__all__ = [
    "CombinatorialPair", "genus", "omega_matrix", "rauzy_class", "rauzy_move",
    "CocyclePath", "theta_matrix",
    "ConnectionDetected", "renormalize", "rv_step",
    "Giem", "make_affine_iem", "make_standard_iem",
]
