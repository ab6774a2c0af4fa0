"""Helpers for navigating MATLAB struct arrays loaded by scipy.io."""

from __future__ import annotations

import numpy as np


def unwrap(x):
    """Descend through singleton object/cell wrappers."""
    a = np.asarray(x)
    while a.dtype == object and a.size == 1:
        a = np.asarray(a.reshape(-1)[0])
    return a


def mat_str(x) -> str:
    a = unwrap(x).squeeze()
    if a.ndim == 0:
        return str(a.item())
    return str(a)


def mat_vec(x) -> np.ndarray:
    return np.asarray(unwrap(x), dtype=np.float64).reshape(-1)


def mat_structs(x):
    """Iterate the entries of a (possibly wrapped) MATLAB struct array."""
    a = unwrap(x)
    return list(a.reshape(-1))
