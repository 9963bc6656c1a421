"""Closed-form capacities for channels with state known at the encoder.

Two reference channels bracket what side information can buy:

* the Gaussian dirty-paper channel ``Y = X + S + Z`` with power constraint
  ``P``, interference variance ``sigma_s_sq`` and noise variance ``sigma_z_sq``;
* the binary memory with stuck-at cells (probability ``epsilon``) and a
  binary symmetric crossover ``p`` on the remaining cells.

The ``c_min`` figures assume the state is unknown to both ends and the
``c_max`` figures assume it is fully known to the encoder. All values are in
bits per channel use.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.special import entr

__all__ = ["DefectCapacities", "DpcCapacities", "binary_entropy", "defect_capacities", "dpc_capacities"]

_LN2 = np.log(2.0)


class DpcCapacities(NamedTuple):
    c_min: float
    c_max: float


class DefectCapacities(NamedTuple):
    c_min_plus: float
    c_max_plus: float


def binary_entropy(x):
    """h(x) in bits, with h(0) = h(1) = 0."""
    x = np.asarray(x, dtype=np.float64)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("probability outside [0, 1]")
    h = (entr(x) + entr(1.0 - x)) / _LN2
    return float(h) if h.ndim == 0 else h


def dpc_capacities(P: float, sigma_s_sq: float, sigma_z_sq: float) -> DpcCapacities:
    """Capacity without and with encoder knowledge of the Gaussian interference."""
    if not sigma_z_sq > 0:
        raise ValueError("noise variance must be positive")
    if P < 0 or sigma_s_sq < 0:
        raise ValueError("power and interference variance must be non-negative")
    c_min = 0.5 * np.log2(1.0 + P / (sigma_s_sq + sigma_z_sq))
    c_max = 0.5 * np.log2(1.0 + P / sigma_z_sq)
    return DpcCapacities(float(c_min), float(c_max))


def defect_capacities(epsilon: float, p: float) -> DefectCapacities:
    """Capacity of a stuck-at memory without and with encoder knowledge of the defects.

    Without knowledge a stuck cell looks like a fair coin, so the channel is a
    BSC with crossover ``(1 - epsilon) p + epsilon / 2``. With knowledge the
    stuck cells cost only their own fraction of the rate.
    """
    if not 0 <= epsilon <= 1:
        raise ValueError("epsilon must lie in [0, 1]")
    if not 0 <= p <= 0.5:
        raise ValueError("p must lie in [0, 1/2]")
    p_tilde = (1.0 - epsilon) * p + epsilon / 2.0
    c_min_plus = 1.0 - binary_entropy(p_tilde)
    c_max_plus = (1.0 - epsilon) * (1.0 - binary_entropy(p))
    return DefectCapacities(float(c_min_plus), float(c_max_plus))
