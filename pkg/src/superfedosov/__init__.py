"""Graded (super) connections on the supermanifold (M, Omega(M)) of differential forms."""

from .base import Base, VForm, base_preset, check_fedosov_base, random_fedosov_base, torus_family
from .curv import curv_basic, curv_direct, ricci, scalar
from .sconn import (
    GConn,
    TensorPack,
    canonical_L,
    check_L_condition,
    is_fedosov,
    is_symmetric,
    make_L_connection,
    make_symmetric_fedosov,
    pack_preset,
)
from .sfields import SVec, bracket, omega_H, pair
from .symalg import Form, Poly

__version__ = "0.1.0"

__all__ = [
    "Base", "VForm", "base_preset", "check_fedosov_base", "random_fedosov_base", "torus_family",
    "curv_basic", "curv_direct", "ricci", "scalar",
    "GConn", "TensorPack", "canonical_L", "check_L_condition", "is_fedosov", "is_symmetric",
    "make_L_connection", "make_symmetric_fedosov", "pack_preset",
    "SVec", "bracket", "omega_H", "pair", "Form", "Poly",
]
