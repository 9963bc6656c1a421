"""SLC NAND wordline simulator: erase, ISPP program, inter-cell interference, reads.

Block arrays have shape ``(..., wordlines, bitlines)``; any leading axes are
independent blocks simulated in lockstep.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .codec import NORMAL, STUCK1

__all__ = [
    "NEIGHBOR_ORDER",
    "ChannelParams",
    "FlashBlock",
    "erase_block",
    "hard_read",
    "ici_shift",
    "ispp_program",
    "pre_read",
    "read_wordline",
    "write_wordline",
]

# Order of the 8 neighbour shifts accepted by ici_shift; (i, j) is the victim.
NEIGHBOR_ORDER = (
    "left",        # (i, j-1)
    "right",       # (i, j+1)
    "prev",        # (i-1, j)
    "next",        # (i+1, j)
    "prev_left",   # (i-1, j-1)
    "prev_right",  # (i-1, j+1)
    "next_left",   # (i+1, j-1)
    "next_right",  # (i+1, j+1)
)


@dataclass(frozen=True)
class ChannelParams:
    """Device and read settings. Defaults are the SLC operating point at alpha = 0.6."""

    init_mean: float = -3.0
    init_std: float = 1.0
    v_verify_s1: float = 1.0
    delta_vpp: float = 1.0
    gamma_base: tuple[float, float, float] = (0.08, 0.1, 0.006)
    alpha: float = 0.6
    sigma_read: float = 0.1
    eta: float = 0.0
    eta_pre: float = 0.0

    def __post_init__(self):
        if not self.init_std > 0:
            raise ValueError("init_std must be positive")
        if not self.delta_vpp > 0:
            raise ValueError("delta_vpp must be positive")
        if len(self.gamma_base) != 3 or min(self.gamma_base) < 0:
            raise ValueError("gamma_base must be three non-negative coupling ratios")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.sigma_read < 0:
            raise ValueError("sigma_read must be non-negative")
        if self.eta_pre > self.eta:
            raise ValueError(f"pre-read level {self.eta_pre} above read level {self.eta}")
        object.__setattr__(self, "gamma_base", tuple(float(g) for g in self.gamma_base))

    @property
    def gammas(self) -> tuple[float, float, float]:
        """Scaled coupling ratios ``alpha * (gx, gy, gxy)``."""
        gx, gy, gxy = self.gamma_base
        return self.alpha * gx, self.alpha * gy, self.alpha * gxy


@dataclass
class FlashBlock:
    vth: np.ndarray
    programmed: np.ndarray
    delta_v: np.ndarray
    last_written: int = -1
    n_wordlines: int = field(init=False)

    def __post_init__(self):
        self.n_wordlines = self.vth.shape[-2]

    def copy(self) -> "FlashBlock":
        return FlashBlock(self.vth.copy(), self.programmed.copy(), self.delta_v.copy(), self.last_written)


def erase_block(params: ChannelParams, wordlines: int, bitlines: int, rng: np.random.Generator,
                batch: tuple[int, ...] = ()) -> FlashBlock:
    """Fresh block: every cell drawn from the erase distribution, nothing programmed."""
    if wordlines < 1 or bitlines < 1:
        raise ValueError("block dimensions must be >= 1")
    shape = tuple(batch) + (wordlines, bitlines)
    vth = params.init_mean + params.init_std * rng.standard_normal(shape)
    return block_from_vth(vth)


def block_from_vth(vth: np.ndarray) -> FlashBlock:
    vth = np.asarray(vth, dtype=np.float64)
    return FlashBlock(vth, np.zeros(vth.shape, dtype=bool), np.zeros(vth.shape))


def ispp_program(params: ChannelParams, v_current):
    """Staircase program-and-verify from ``v_current``.

    Returns ``(v_final, delta_v)`` where ``v_final = v_current + K * delta_vpp``
    for the smallest ``K >= 0`` reaching the verify level.
    """
    v = np.asarray(v_current, dtype=np.float64)
    step, target = params.delta_vpp, params.v_verify_s1
    k = np.maximum(np.ceil((target - v) / step), 0.0)
    v_final = v + k * step
    # guard the ceil against rounding on exact staircase points
    short = v_final < target
    if np.any(short):
        k = np.where(short, k + 1, k)
        v_final = v + k * step
    over = (k > 0) & (v + (k - 1) * step >= target)
    if np.any(over):
        k = np.where(over, k - 1, k)
        v_final = v + k * step
    return v_final, v_final - v


def _ici(params: ChannelParams, x_sum=None, y_sum=None, xy_sum=None):
    out = 0.0
    for g, term in zip(params.gammas, (x_sum, y_sum, xy_sum)):
        if term is not None:
            out = out + g * term
    return out


def ici_shift(params: ChannelParams, neighbor_shifts) -> np.ndarray:
    """Threshold shift of a victim cell from its neighbours' program shifts.

    ``neighbor_shifts`` has a trailing axis of 8 in ``NEIGHBOR_ORDER``;
    missing neighbours are passed as 0.
    """
    d = np.asarray(neighbor_shifts, dtype=np.float64)
    if d.shape[-1] != 8:
        raise ValueError("need 8 neighbour shifts")
    if np.any(d < 0):
        raise ValueError("program shifts are non-negative")
    return _ici(params, d[..., 0] + d[..., 1], d[..., 2] + d[..., 3], d[..., 4:].sum(axis=-1))


@numba.njit(cache=True)
def _write_kernel(vth, wl, data, step, target, gx, gy, gxy, dv):
    nb, nwl, n = vth.shape
    for b in range(nb):
        for j in range(n):
            if data[b, j]:
                v = vth[b, wl, j]
                k = max(np.ceil((target - v) / step), 0.0)
                if v + k * step < target:
                    k += 1.0
                elif k > 0 and v + (k - 1.0) * step >= target:
                    k -= 1.0
                dv[b, j] = (v + k * step) - v
            else:
                dv[b, j] = 0.0
        for j in range(n):
            side = 0.0
            if j > 0:
                side += dv[b, j - 1]
            if j < n - 1:
                side += dv[b, j + 1]
            if data[b, j]:
                vth[b, wl, j] += dv[b, j]
            else:
                vth[b, wl, j] += gx * side
            coupled = gy * dv[b, j] + gxy * side
            if wl > 0:
                vth[b, wl - 1, j] += coupled
            if wl < nwl - 1:
                vth[b, wl + 1, j] += coupled


def write_wordline(block: FlashBlock, wl: int, data, params: ChannelParams) -> FlashBlock:
    """Program one wordline in place and apply the interference it causes.

    Cells storing 1 are ISPP-programmed from their present voltage, so any
    interference received earlier is absorbed by verify. Erased cells on the
    same wordline then pick up the x-direction shift of their programmed
    neighbours. Both adjacent wordlines receive the y and diagonal shifts.
    ``block.delta_v`` records each programmed cell's own shift.
    """
    if not 0 <= wl < block.n_wordlines:
        raise ValueError(f"wordline {wl} out of range")
    if wl <= block.last_written:
        raise ValueError(f"wordline {wl} written after wordline {block.last_written}")
    prog = np.asarray(data).astype(bool)
    if prog.shape != block.vth.shape[:-2] + block.vth.shape[-1:]:
        raise ValueError(f"data shape {prog.shape} does not match the wordline")

    nwl, n = block.vth.shape[-2:]
    vth = np.ascontiguousarray(block.vth).reshape(-1, nwl, n)
    dv = np.empty((vth.shape[0], n))
    gx, gy, gxy = params.gammas
    _write_kernel(vth, wl, prog.reshape(-1, n), params.delta_vpp, params.v_verify_s1, gx, gy, gxy, dv)
    block.vth = vth.reshape(block.vth.shape)
    block.programmed[..., wl, :] = prog
    block.delta_v[..., wl, :] = dv.reshape(prog.shape)
    block.last_written = wl
    return block


def pre_read(block: FlashBlock, wl: int, params: ChannelParams) -> np.ndarray:
    """Defect vector of a not-yet-written wordline: stuck-at-1 above ``eta_pre``."""
    if wl <= block.last_written:
        raise ValueError(f"wordline {wl} has already been written")
    high = block.vth[..., wl, :] > params.eta_pre
    return np.where(high, STUCK1, NORMAL).astype(np.int8)


def hard_read(vth, params: ChannelParams, noise) -> np.ndarray:
    """Binary decision ``vth + sigma_read * noise > eta`` for standard-normal ``noise``."""
    return (np.asarray(vth) + params.sigma_read * np.asarray(noise) > params.eta).astype(np.uint8)


def read_wordline(block: FlashBlock, wl: int, params: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    """Read one wordline with fresh Gaussian read noise."""
    vth = block.vth[..., wl, :]
    return hard_read(vth, params, rng.standard_normal(vth.shape))
