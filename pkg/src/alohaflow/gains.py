"""Randomness-gain functionals and their maximizing distributions.

Randomizing the geometry around a fixed mean helps the per-flow
throughput.  For hop densities the benefit is multiplicative and
measured by E[N]*E[1/N] (>= 1 by Jensen, = 1 only for a point mass);
for the hop count it is additive and measured by log(E[K]) - E[log K]
(>= 0 likewise).  With both the mean and the maximum support value
fixed, each gain is maximized by a two-point law sitting on the
extremes of the support; an exhaustive vertex enumeration of the
underlying two-constraint linear program serves as an independent
check of those closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dist import DiscretePmf, Family, PmfKind, make_catalog_pmf, two_point
from .errors import PreconditionError


def gain_n(pmf: DiscretePmf) -> float:
    """Multiplicative density randomness gain E[N]*E[1/N]."""
    if pmf.kind is not PmfKind.DENSITY:
        raise PreconditionError("gain_n requires a density law")
    return pmf.mean() * pmf.mean_reciprocal()


def gain_k(pmf: DiscretePmf) -> float:
    """Additive hop-count randomness gain log(E[K]) - E[log K]."""
    if pmf.kind is not PmfKind.HOP_COUNT:
        raise PreconditionError("gain_k requires a hop-count law")
    return math.log(pmf.mean()) - pmf.mean_log()


# ---------------------------------------------------------------------
# Closed-form two-point maximizers
# ---------------------------------------------------------------------

def gain_max_density(n: int, mean: float) -> DiscretePmf:
    """Density law on {2, n} maximizing E[N]*E[1/N] at fixed mean and
    maximum: P(2) = (n - mean)/(n - 2), P(n) = (mean - 2)/(n - 2)."""
    if n < 3:
        raise PreconditionError(f"need n >= 3, got {n}")
    if not 2.0 <= mean <= n:
        raise PreconditionError(
            f"mean {mean} infeasible for support {{2..{n}}}"
        )
    return two_point(2, n, (n - mean) / (n - 2.0), PmfKind.DENSITY)


def gain_max_hops(k: int, mean: float) -> DiscretePmf:
    """Hop-count law on {1, k} maximizing log(E[K]) - E[log K] at fixed
    mean and maximum: P(1) = (k - mean)/(k - 1), P(k) = (mean - 1)/(k - 1)."""
    if k < 2:
        raise PreconditionError(f"need k >= 2, got {k}")
    if not 1.0 <= mean <= k:
        raise PreconditionError(
            f"mean {mean} infeasible for support {{1..{k}}}"
        )
    return two_point(1, k, (k - mean) / (k - 1.0), PmfKind.HOP_COUNT)


# ---------------------------------------------------------------------
# LP vertex-enumeration oracles
# ---------------------------------------------------------------------

def _two_point_enumerate(lo: int, hi: int, mean: float,
                         score: Sequence[float],
                         maximize: bool) -> tuple[float, int, int, float]:
    """Optimize sum(score[v]*pi_v) s.t. fixed mean over {lo..hi}.

    With two equality constraints (total mass, mean) every basic
    feasible solution of the LP has at most two nonzero atoms, so
    enumerating value pairs {i, j} with i <= mean <= j is exact.
    Returns (optimum, i, j, mass_i).
    """
    sign = 1.0 if maximize else -1.0
    best = -math.inf
    best_pair = (lo, lo, 1.0)
    for i in range(lo, hi + 1):
        if i > mean:
            break
        for j in range(max(i, math.ceil(mean - 1e-12)), hi + 1):
            if i == j:
                mass_i = 1.0
                if abs(i - mean) > 1e-12:
                    continue
            else:
                mass_i = (j - mean) / (j - i)
            value = mass_i * score[i - lo] + (1.0 - mass_i) * score[j - lo]
            if sign * value > best:
                best = sign * value
                best_pair = (i, j, mass_i)
    i, j, mass_i = best_pair
    return sign * best, i, j, mass_i


def lp_oracle_density(n: int, mean: float) -> tuple[float, DiscretePmf]:
    """Exhaustively maximize E[1/N] at fixed mean over laws on {2..n}.

    Independent check for :func:`gain_max_density`: returns the best
    achievable E[1/N] and one attaining law.
    """
    if n < 3:
        raise PreconditionError(f"need n >= 3, got {n}")
    if not 2.0 <= mean <= n:
        raise PreconditionError(
            f"mean {mean} infeasible for support {{2..{n}}}"
        )
    score = [1.0 / v for v in range(2, n + 1)]
    optimum, i, j, mass_i = _two_point_enumerate(2, n, mean, score, True)
    return optimum, two_point(i, j, mass_i, PmfKind.DENSITY)


def lp_oracle_hops(k: int, mean: float) -> tuple[float, DiscretePmf]:
    """Exhaustively minimize E[log K] at fixed mean over laws on {1..k}.

    Independent check for :func:`gain_max_hops`: the gain of the
    returned law equals log(mean) minus the optimum.
    """
    if k < 2:
        raise PreconditionError(f"need k >= 2, got {k}")
    if not 1.0 <= mean <= k:
        raise PreconditionError(
            f"mean {mean} infeasible for support {{1..{k}}}"
        )
    score = [math.log(v) for v in range(1, k + 1)]
    optimum, i, j, mass_i = _two_point_enumerate(1, k, mean, score, False)
    return optimum, two_point(i, j, mass_i, PmfKind.HOP_COUNT)


# ---------------------------------------------------------------------
# Catalog gain reports
# ---------------------------------------------------------------------

#: Catalog families covered by the standard reports.
REPORT_FAMILIES: tuple[Family, ...] = (
    Family.GAIN_MAX_N,
    Family.UNIFORM,
    Family.BINOMIAL,
    Family.HARMONIC_SPARSE,
    Family.HARMONIC_DENSE,
    Family.HEAVY_TAIL_SPARSE,
    Family.HEAVY_TAIL_DENSE,
    Family.SUBEXP_SPARSE,
    Family.SUBEXP_DENSE,
    Family.GEOM_SPARSE,
    Family.GEOM_DENSE,
)


@dataclass(frozen=True)
class GainReport:
    """Density-law gain row: moments, gain, and the ratio gain(2n)/gain(n)
    used as a scaling diagnostic."""

    family: str
    n: int
    mean_n: float
    mean_inv_n: float
    gain: float
    doubling_ratio: float


@dataclass(frozen=True)
class HopGainReport:
    """Hop-count analogue of :class:`GainReport`."""

    family: str
    k: int
    mean_k: float
    mean_log_k: float
    gain: float
    doubling_ratio: float


def _family_params(family: Family, n: int, geom_a: float, binom_r: float,
                   mean_frac: float) -> dict:
    if family is Family.GAIN_MAX_N:
        return {"mean": mean_frac * n}
    if family in (Family.GEOM_SPARSE, Family.GEOM_DENSE):
        return {"a": geom_a}
    if family is Family.BINOMIAL:
        return {"r": binom_r}
    return {}


def catalog_gain_report(n_grid: Iterable[int],
                        families: Sequence[Family | str] | None = None, *,
                        geom_a: float = 0.5, binom_r: float = 0.5,
                        gain_max_mean_frac: float = 0.5) -> list[GainReport]:
    """Gains of the catalog density families over a grid of maxima.

    For each family and each n the row reports E[N], E[1/N], the gain,
    and gain(2n)/gain(n) (the family rebuilt at twice the maximum, the
    two-point maximizer keeping its mean at the same fraction of n).
    """
    fams = [Family.from_name(f) if isinstance(f, str) else f
            for f in (families or REPORT_FAMILIES)]
    rows = []
    for family in fams:
        for n in n_grid:
            if n < 4:
                raise PreconditionError(f"report needs n >= 4, got {n}")
            pmf = make_catalog_pmf(
                family, n,
                _family_params(family, n, geom_a, binom_r,
                               gain_max_mean_frac))
            doubled = make_catalog_pmf(
                family, 2 * n,
                _family_params(family, 2 * n, geom_a, binom_r,
                               gain_max_mean_frac))
            g = gain_n(pmf)
            rows.append(GainReport(family.value, n, pmf.mean(),
                                   pmf.mean_reciprocal(), g,
                                   gain_n(doubled) / g))
    return rows


def hop_catalog_gain_report(k_grid: Iterable[int],
                            families: Sequence[Family | str] | None = None,
                            *, geom_a: float = 0.5, binom_r: float = 0.5,
                            gain_max_mean_frac: float = 0.5,
                            ) -> list[HopGainReport]:
    """Hop-count analogue of :func:`catalog_gain_report` (supports start
    at 1 instead of 2)."""
    fams = [Family.from_name(f) if isinstance(f, str) else f
            for f in (families or REPORT_FAMILIES)]
    rows = []
    for family in fams:
        for k in k_grid:
            if k < 4:
                raise PreconditionError(f"report needs k >= 4, got {k}")
            pmf = make_catalog_pmf(
                family, k,
                _family_params(family, k, geom_a, binom_r,
                               gain_max_mean_frac),
                kind=PmfKind.HOP_COUNT)
            doubled = make_catalog_pmf(
                family, 2 * k,
                _family_params(family, 2 * k, geom_a, binom_r,
                               gain_max_mean_frac),
                kind=PmfKind.HOP_COUNT)
            g = gain_k(pmf)
            rows.append(HopGainReport(family.value, k, pmf.mean(),
                                      pmf.mean_log(), g,
                                      gain_k(doubled) / g))
    return rows
