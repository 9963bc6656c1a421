"""Monte Carlo harness: decoding-failure sweeps and threshold-voltage histograms.

One trial writes a three-wordline block in the order WL0 (random data),
pre-read WL1, encode and write WL1, WL2 (random data), then reads WL1 with
fresh noise and decodes it.

Randomness
----------
Trial ``i`` of master seed ``s`` draws from ``Generator(Philox(key=s,
counter=(0, 0, 0, i)))`` (see :func:`trial_rng`). Each trial therefore
depends on ``(s, i)`` only: batches can be split or reordered freely, and
every grid point and allocation sees the same erase, data, message and noise
draws for a given trial index (common random numbers).

Within a trial the draws are taken in a fixed order: erase voltages
``(3, n)``, WL0 data ``(n,)``, message ``(k,)``, WL2 data ``(n,)``, read
noise ``(n,)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from . import codec
from .channel import (
    ChannelParams,
    block_from_vth,
    erase_block,
    hard_read,
    pre_read,
    read_wordline,
    write_wordline,
)
from .codec import NORMAL, PBCHCode

__all__ = [
    "DEFAULT_ALPHAS",
    "DEFAULT_ETA_PRE",
    "HistogramResult",
    "SweepPoint",
    "SweepResult",
    "TrialRecord",
    "emit_histogram",
    "run_grid",
    "run_trial",
    "run_trials",
    "sweep_allocation",
    "sweep_preread",
    "trial_rng",
]

DEFAULT_ALPHAS = (0.4, 0.5, 0.6, 0.7, 0.8)
DEFAULT_ETA_PRE = (0.0, -1.0, -2.0)
WORDLINES = 3
CODED_WL = 1


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent, counter-addressed stream for one trial."""
    if seed < 0 or index < 0:
        raise ValueError("seed and trial index must be non-negative")
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, index]))


@dataclass(frozen=True)
class TrialRecord:
    l: int
    r: int
    alpha: float
    sigma_read: float
    eta_pre: float
    defect_count: int
    unmasked_count: int
    raw_errors: int
    failure: bool


def run_trial(code: PBCHCode, params: ChannelParams, rng: np.random.Generator) -> TrialRecord:
    """One end-to-end write/read/decode of a coded wordline."""
    n, k = code.n, code.k
    block = erase_block(params, WORDLINES, n, rng)
    write_wordline(block, 0, rng.integers(0, 2, n, dtype=np.uint8), params)
    s_plus = pre_read(block, CODED_WL, params)
    message = rng.integers(0, 2, k, dtype=np.uint8)
    enc = codec.encode(code, message, s_plus)
    write_wordline(block, CODED_WL, enc.codeword, params)
    write_wordline(block, 2, rng.integers(0, 2, n, dtype=np.uint8), params)
    y = read_wordline(block, CODED_WL, params, rng)
    dec = codec.decode(code, y)
    failure = dec.failed or not np.array_equal(dec.message, message)
    return TrialRecord(
        l=code.l,
        r=code.r,
        alpha=params.alpha,
        sigma_read=params.sigma_read,
        eta_pre=params.eta_pre,
        defect_count=int(np.count_nonzero(s_plus != NORMAL)),
        unmasked_count=enc.unmasked_count,
        raw_errors=int(np.count_nonzero(y ^ enc.codeword)),
        failure=bool(failure),
    )


@dataclass
class _Draws:
    erase: np.ndarray
    wl0: np.ndarray
    message: np.ndarray
    wl2: np.ndarray
    noise: np.ndarray


def _draw(seed: int, start: int, count: int, n: int, k: int) -> _Draws:
    erase = np.empty((count, WORDLINES, n))
    wl0 = np.empty((count, n), dtype=np.uint8)
    message = np.empty((count, k), dtype=np.uint8)
    wl2 = np.empty((count, n), dtype=np.uint8)
    noise = np.empty((count, n))
    for b in range(count):
        rng = trial_rng(seed, start + b)
        erase[b] = rng.standard_normal((WORDLINES, n))
        wl0[b] = rng.integers(0, 2, n, dtype=np.uint8)
        message[b] = rng.integers(0, 2, k, dtype=np.uint8)
        wl2[b] = rng.integers(0, 2, n, dtype=np.uint8)
        noise[b] = rng.standard_normal(n)
    return _Draws(erase, wl0, message, wl2, noise)


@dataclass
class _BatchOutcome:
    defect_count: np.ndarray
    unmasked_count: np.ndarray
    raw_errors: np.ndarray
    failure: np.ndarray
    vth: np.ndarray | None = None
    stored: np.ndarray | None = None


def _simulate(codes: Sequence[PBCHCode], params: ChannelParams, draws: _Draws,
              keep_vth: bool = False) -> list[_BatchOutcome]:
    """Run a batch of trials for several codes sharing the same draws."""
    base = block_from_vth(params.init_mean + params.init_std * draws.erase)
    write_wordline(base, 0, draws.wl0, params)
    s_plus = pre_read(base, CODED_WL, params)
    defect_count = np.count_nonzero(s_plus != NORMAL, axis=1)
    out = []
    for code in codes:
        c, _, unmasked = codec.encode_batch(code, draws.message, s_plus)
        block = base.copy()
        write_wordline(block, CODED_WL, c, params)
        write_wordline(block, 2, draws.wl2, params)
        vth = block.vth[:, CODED_WL, :]
        y = hard_read(vth, params, draws.noise)
        m_hat, failed = codec.decode_batch(code, y)
        failure = failed | np.any(m_hat != draws.message, axis=1)
        out.append(_BatchOutcome(
            defect_count=defect_count,
            unmasked_count=unmasked,
            raw_errors=np.count_nonzero(y ^ c, axis=1),
            failure=failure,
            vth=vth.copy() if keep_vth else None,
            stored=c if keep_vth else None,
        ))
    return out


def run_trials(code: PBCHCode, params: ChannelParams, seed: int, trials: int,
               start: int = 0, batch_size: int = 500) -> list[TrialRecord]:
    """Batched equivalent of calling :func:`run_trial` with ``trial_rng(seed, i)``."""
    records = []
    for lo in range(start, start + trials, batch_size):
        count = min(batch_size, start + trials - lo)
        (res,) = _simulate([code], params, _draw(seed, lo, count, code.n, code.k))
        for b in range(count):
            records.append(TrialRecord(
                l=code.l, r=code.r, alpha=params.alpha, sigma_read=params.sigma_read,
                eta_pre=params.eta_pre, defect_count=int(res.defect_count[b]),
                unmasked_count=int(res.unmasked_count[b]), raw_errors=int(res.raw_errors[b]),
                failure=bool(res.failure[b]),
            ))
    return records


# -- sweeps -----------------------------------------------------------------

@dataclass(frozen=True)
class SweepPoint:
    alpha: float
    sigma_read: float
    eta_pre: float
    l: int
    r: int
    trials: int
    failures: int

    @property
    def p_fail(self) -> float:
        return self.failures / self.trials if self.trials else float("nan")

    @property
    def stderr(self) -> float:
        if not self.trials:
            return float("nan")
        p = self.p_fail
        return math.sqrt(p * (1.0 - p) / self.trials)


SWEEP_COLUMNS = ("alpha", "sigma_read", "eta_pre", "l", "r", "trials", "failures", "p_fail", "stderr")


@dataclass
class SweepResult:
    points: list[SweepPoint] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.points)

    def select(self, **kw) -> list[SweepPoint]:
        return [p for p in self.points if all(getattr(p, key) == val for key, val in kw.items())]

    def get(self, **kw) -> SweepPoint:
        (point,) = self.select(**kw)
        return point

    def argmin(self, **kw) -> SweepPoint:
        """Lowest-``p_fail`` point among those matching ``kw`` (ties go to smaller ``l``)."""
        return min(self.select(**kw), key=lambda p: (p.p_fail, p.l))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for p in self.points:
            w.writerow([
                f"{p.alpha:.6f}", f"{p.sigma_read:.6f}", f"{p.eta_pre:.6f}", p.l, p.r,
                p.trials, p.failures, f"{p.p_fail:.6f}", f"{p.stderr:.6f}",
            ])
        return buf.getvalue()


def run_grid(params: ChannelParams, grid: Iterable[tuple[float, float, float]],
             allocations: Sequence[tuple[int, int]], trials: int, seed: int,
             min_failures: int | None = None, batch_size: int = 500,
             progress=None) -> SweepResult:
    """Estimate ``P(decoding failure)`` on every ``(alpha, sigma_read, eta_pre)`` x allocation.

    Trials run in batches of ``batch_size``; an allocation stops early at a
    batch boundary once it has ``min_failures`` failures. Rows come out sorted
    by grid point then ``l``.
    """
    result = SweepResult()
    if trials <= 0:
        return result
    codes = [_allocation_code(a) for a in allocations]
    grid = sorted(set(grid))
    for alpha, sigma, eta_pre in grid:
        p = replace(params, alpha=alpha, sigma_read=sigma, eta_pre=eta_pre)
        done = {c.l: 0 for c in codes}
        fails = {c.l: 0 for c in codes}
        for lo in range(0, trials, batch_size):
            active = [c for c in codes if min_failures is None or fails[c.l] < min_failures]
            if not active:
                break
            count = min(batch_size, trials - lo)
            draws = _draw(seed, lo, count, active[0].n, active[0].k)
            for c, res in zip(active, _simulate(active, p, draws)):
                done[c.l] += count
                fails[c.l] += int(res.failure.sum())
            if progress is not None:
                progress(alpha, sigma, eta_pre, lo + count)
        for c in sorted(codes, key=lambda c: c.l):
            result.points.append(SweepPoint(alpha, sigma, eta_pre, c.l, c.r, done[c.l], fails[c.l]))
    return result


def _allocation_code(allocation: tuple[int, int]) -> PBCHCode:
    l, r = allocation
    if (l, r) not in codec.ALLOCATIONS:
        raise ValueError(f"allocation {(l, r)} is not one of {codec.ALLOCATIONS}")
    return codec.allocation_code(l)


def sweep_allocation(params: ChannelParams, allocations=codec.ALLOCATIONS,
                     trials: int = 100_000, seed: int = 0, alphas=DEFAULT_ALPHAS,
                     min_failures: int | None = 100, **kw) -> SweepResult:
    """Failure probability versus ICI strength for each allocation, at ``params``' noise and pre-read level."""
    grid = [(a, params.sigma_read, params.eta_pre) for a in alphas]
    return run_grid(params, grid, allocations, trials, seed, min_failures, **kw)


def sweep_preread(params: ChannelParams, eta_pre_list=DEFAULT_ETA_PRE,
                  allocations=codec.ALLOCATIONS, trials: int = 100_000, seed: int = 0,
                  min_failures: int | None = 100, **kw) -> SweepResult:
    """Failure probability versus pre-read level for each allocation."""
    for e in eta_pre_list:
        if e > params.eta:
            raise ValueError(f"pre-read level {e} above read level {params.eta}")
    grid = [(params.alpha, params.sigma_read, e) for e in eta_pre_list]
    return run_grid(params, grid, allocations, trials, seed, min_failures, **kw)


# -- histograms -------------------------------------------------------------

HISTOGRAM_COLUMNS = ("bin_lo", "bin_hi", "count_bit0", "count_bit1")


@dataclass
class HistogramResult:
    """Final coded-wordline voltages (before read noise), split by stored bit.

    Values outside the bin range are counted in the outermost bins. The
    dead-zone tallies count bit-0 cells strictly between the read level and
    the verify level.
    """

    edges: np.ndarray
    count_bit0: np.ndarray
    count_bit1: np.ndarray
    dead_zone_bit0: int
    total_bit0: int

    @property
    def dead_zone_fraction(self) -> float:
        return self.dead_zone_bit0 / self.total_bit0 if self.total_bit0 else float("nan")

    @property
    def dead_zone_stderr(self) -> float:
        p = self.dead_zone_fraction
        return math.sqrt(p * (1 - p) / self.total_bit0) if self.total_bit0 else float("nan")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(HISTOGRAM_COLUMNS)
        for lo, hi, c0, c1 in zip(self.edges[:-1], self.edges[1:], self.count_bit0, self.count_bit1):
            w.writerow([f"{lo:.6f}", f"{hi:.6f}", int(c0), int(c1)])
        return buf.getvalue()


def emit_histogram(params: ChannelParams, allocation=(100, 0), trials: int = 1000, bins: int = 100,
                   seed: int = 0, v_range: tuple[float, float] = (-7.0, 5.0),
                   batch_size: int = 500) -> HistogramResult:
    """Histogram the coded wordline's final threshold voltages over ``trials`` blocks."""
    code = _allocation_code(tuple(allocation))
    edges = np.linspace(v_range[0], v_range[1], bins + 1)
    c0 = np.zeros(bins, dtype=np.int64)
    c1 = np.zeros(bins, dtype=np.int64)
    dead = total0 = 0
    lo_clip = np.nextafter(v_range[0], np.inf)
    hi_clip = np.nextafter(v_range[1], -np.inf)
    for lo in range(0, trials, batch_size):
        count = min(batch_size, trials - lo)
        (res,) = _simulate([code], params, _draw(seed, lo, count, code.n, code.k), keep_vth=True)
        v = np.clip(res.vth, lo_clip, hi_clip)
        bit1 = res.stored.astype(bool)
        c0 += np.histogram(v[~bit1], edges)[0]
        c1 += np.histogram(v[bit1], edges)[0]
        v0 = res.vth[~bit1]
        dead += int(np.count_nonzero((v0 > params.eta) & (v0 < params.v_verify_s1)))
        total0 += v0.size
    return HistogramResult(edges, c0, c1, dead, total0)
