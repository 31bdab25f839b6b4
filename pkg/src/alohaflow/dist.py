"""Finite discrete probability laws for hop densities and hop counts.

A path through the network is described by two integer-valued random
variables: the per-hop interference-set size (the "density", at least 2
because no node on the path is isolated) and the number of hops (at
least 1).  Both live on finite supports.  This module provides the
probability-mass-function container, its moments, and a catalog of
named distribution families used throughout the gain analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidPmfError, PreconditionError

MASS_SUM_TOL = 1e-12


class PmfKind(Enum):
    DENSITY = "density"
    HOP_COUNT = "hop_count"


@dataclass(frozen=True, eq=False)
class DiscretePmf:
    """Probability mass function on a contiguous integer support.

    Index ``i`` of ``masses`` carries the probability of the value
    ``support_min + i``.  Masses must be non-negative and sum to one
    within ``MASS_SUM_TOL``.  Density laws start at 2 or above,
    hop-count laws at 1 or above.  Instances are immutable.
    """

    support_min: int
    masses: np.ndarray
    kind: PmfKind

    def __post_init__(self) -> None:
        masses = np.asarray(self.masses, dtype=np.float64).copy()
        if masses.ndim != 1 or masses.size == 0:
            raise InvalidPmfError("masses must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(masses)):
            raise InvalidPmfError("masses must be finite")
        if np.any(masses < 0.0):
            raise InvalidPmfError("masses must be non-negative")
        total = float(masses.sum())
        if abs(total - 1.0) > MASS_SUM_TOL:
            raise InvalidPmfError(
                f"masses sum to {total!r}, expected 1 within {MASS_SUM_TOL}"
            )
        if self.support_min != int(self.support_min):
            raise InvalidPmfError("support_min must be an integer")
        object.__setattr__(self, "support_min", int(self.support_min))
        if self.kind is PmfKind.DENSITY and self.support_min < 2:
            raise InvalidPmfError("density laws need support_min >= 2")
        if self.kind is PmfKind.HOP_COUNT and self.support_min < 1:
            raise InvalidPmfError("hop-count laws need support_min >= 1")
        masses.flags.writeable = False
        object.__setattr__(self, "masses", masses)

    # -- structure ----------------------------------------------------

    @property
    def values(self) -> np.ndarray:
        """Support values aligned with ``masses``."""
        return np.arange(self.support_min, self.support_min + self.masses.size)

    @property
    def max_value(self) -> int:
        """Largest support value (masses may include zeros below it)."""
        return self.support_min + self.masses.size - 1

    def __len__(self) -> int:
        return self.masses.size

    def __repr__(self) -> str:
        return (
            f"DiscretePmf({self.kind.value}, support "
            f"{self.support_min}..{self.max_value})"
        )

    # -- moments ------------------------------------------------------

    def mean(self) -> float:
        """First moment over the support."""
        return float(np.dot(self.values, self.masses))

    def mean_reciprocal(self) -> float:
        """Expectation of 1/value; defined for density laws only."""
        if self.kind is not PmfKind.DENSITY:
            raise PreconditionError("mean_reciprocal requires a density law")
        return float(np.dot(1.0 / self.values, self.masses))

    def mean_log(self) -> float:
        """Expectation of the natural log; defined for hop-count laws only."""
        if self.kind is not PmfKind.HOP_COUNT:
            raise PreconditionError("mean_log requires a hop-count law")
        return float(np.dot(np.log(self.values), self.masses))


def point_mass(value: int, kind: PmfKind) -> DiscretePmf:
    """Degenerate law concentrated on a single value."""
    return DiscretePmf(value, np.ones(1), kind)


def from_weights(support_min: int, weights: Sequence[float] | np.ndarray,
                 kind: PmfKind) -> DiscretePmf:
    """Normalize non-negative weights into a pmf on a contiguous support."""
    w = np.asarray(weights, dtype=np.float64)
    if w.size == 0 or np.any(w < 0.0) or not np.all(np.isfinite(w)):
        raise InvalidPmfError("weights must be non-negative, finite, non-empty")
    total = w.sum()
    if total <= 0.0:
        raise InvalidPmfError("weights must have positive total")
    return DiscretePmf(support_min, w / total, kind)


def two_point(lo: int, hi: int, mass_lo: float, kind: PmfKind) -> DiscretePmf:
    """Law on {lo, hi} with P(lo) = mass_lo; collapses to a point mass at
    the boundaries so zero atoms never pad the support."""
    if hi < lo:
        raise InvalidPmfError("two_point needs lo <= hi")
    if mass_lo >= 1.0:
        return point_mass(lo, kind)
    if mass_lo <= 0.0:
        return point_mass(hi, kind)
    masses = np.zeros(hi - lo + 1)
    masses[0] = mass_lo
    masses[-1] = 1.0 - mass_lo
    return DiscretePmf(lo, masses, kind)


# ---------------------------------------------------------------------
# Distribution catalog
# ---------------------------------------------------------------------

class Family(Enum):
    """Named density/hop-count families used by the randomness-gain study.

    "Sparse" variants put large weight on small values, "dense" variants
    on values near the top of the support.
    """

    UNIFORM = "uniform"
    BINOMIAL = "binomial"
    HARMONIC_SPARSE = "harmonic_sparse"      # weight 1/l
    HARMONIC_DENSE = "harmonic_dense"        # weight 1/(n-l)
    HEAVY_TAIL_SPARSE = "heavy_tail_sparse"  # weight 1/l^2
    HEAVY_TAIL_DENSE = "heavy_tail_dense"    # weight 1/(n-l)^2
    SUBEXP_SPARSE = "subexp_sparse"          # weight 1/l^3
    SUBEXP_DENSE = "subexp_dense"            # weight 1/(n-l)^3
    GEOM_SPARSE = "geom_sparse"              # weight a^l
    GEOM_DENSE = "geom_dense"                # weight a^(n-l)
    GAIN_MAX_N = "gain_max_n"                # two-point gain maximizer

    @classmethod
    def from_name(cls, name: str) -> "Family":
        try:
            return cls(name)
        except ValueError:
            raise InvalidPmfError(f"unknown family {name!r}") from None


_DENSE_FAMILIES = {
    Family.HARMONIC_DENSE,
    Family.HEAVY_TAIL_DENSE,
    Family.SUBEXP_DENSE,
}

_SPARSE_EXPONENT = {
    Family.HARMONIC_SPARSE: 1,
    Family.HEAVY_TAIL_SPARSE: 2,
    Family.SUBEXP_SPARSE: 3,
}

_DENSE_EXPONENT = {
    Family.HARMONIC_DENSE: 1,
    Family.HEAVY_TAIL_DENSE: 2,
    Family.SUBEXP_DENSE: 3,
}


def _log_factorials(n: int) -> np.ndarray:
    return np.array([math.lgamma(i + 1.0) for i in range(n + 1)])


def make_catalog_pmf(family: Family | str, n: int,
                     params: Mapping[str, float] | None = None,
                     kind: PmfKind = PmfKind.DENSITY) -> DiscretePmf:
    """Build a catalog law with maximum support value ``n``.

    Supports are chosen so every weight is finite: families weighted by
    powers of the value itself live on the full support, families
    weighted by powers of ``n - l`` stop one short of ``n``, and the
    geometric "dense" family ``a**(n-l)`` reaches ``n``.  Density laws
    start at 2, hop-count laws at 1.  Any constant factor in a weight
    formula folds into one normalization pass.

    ``params``: ``a`` in (0,1) for geometric families (default 0.5),
    ``r`` for the binomial success parameter (default 0.5), ``mean``
    for the two-point gain maximizer (required).
    """
    family = Family.from_name(family) if isinstance(family, str) else family
    params = dict(params or {})
    lo = 2 if kind is PmfKind.DENSITY else 1

    if family in _DENSE_FAMILIES or family is Family.GEOM_DENSE:
        if n < lo + 1:
            raise PreconditionError(
                f"{family.value} needs n >= {lo + 1}, got {n}"
            )
    elif n < lo:
        raise PreconditionError(f"{family.value} needs n >= {lo}, got {n}")

    if family is Family.GAIN_MAX_N:
        mean = params.get("mean")
        if mean is None:
            raise PreconditionError("gain_max_n requires params['mean']")
        if kind is PmfKind.DENSITY:
            from .gains import gain_max_density
            return gain_max_density(n, float(mean))
        from .gains import gain_max_hops
        return gain_max_hops(n, float(mean))

    if family is Family.UNIFORM:
        values = np.arange(lo, n + 1)
        weights = np.ones_like(values, dtype=np.float64)
        return from_weights(lo, weights, kind)

    if family is Family.BINOMIAL:
        r = float(params.get("r", 0.5))
        if not 0.0 < r < 1.0:
            raise PreconditionError("binomial needs 0 < r < 1")
        values = np.arange(lo, n + 1)
        lf = _log_factorials(n)
        log_w = (lf[n] - lf[values] - lf[n - values]
                 + values * math.log(r) + (n - values) * math.log1p(-r))
        weights = np.exp(log_w - log_w.max())
        return from_weights(lo, weights, kind)

    if family in _SPARSE_EXPONENT:
        values = np.arange(lo, n + 1, dtype=np.float64)
        weights = values ** (-_SPARSE_EXPONENT[family])
        return from_weights(lo, weights, kind)

    if family in _DENSE_EXPONENT:
        values = np.arange(lo, n, dtype=np.float64)  # stop at n-1
        weights = (n - values) ** (-_DENSE_EXPONENT[family])
        return from_weights(lo, weights, kind)

    a = float(params.get("a", 0.5))
    if not 0.0 < a < 1.0:
        raise PreconditionError("geometric families need 0 < a < 1")
    values = np.arange(lo, n + 1, dtype=np.float64)
    if family is Family.GEOM_SPARSE:
        log_w = values * math.log(a)
    else:  # GEOM_DENSE
        log_w = (n - values) * math.log(a)
    weights = np.exp(log_w - log_w.max())
    return from_weights(lo, weights, kind)


# ---------------------------------------------------------------------
# JSON literal format (config files)
# ---------------------------------------------------------------------

def pmf_from_dict(obj: Mapping, kind: PmfKind) -> DiscretePmf:
    """Parse the config-file pmf literal.

    Two forms are accepted: an explicit literal
    ``{"support_min": int, "masses": [...], "kind": "density"|"hop_count"}``
    (the kind must match the surrounding context) or a family spec
    ``{"family": name, "n": int, "params": {...}}``.
    """
    if "family" in obj:
        extra = set(obj) - {"family", "n", "params"}
        if extra:
            raise InvalidPmfError(f"unknown pmf keys {sorted(extra)}")
        if "n" not in obj:
            raise InvalidPmfError("family pmf spec needs 'n'")
        return make_catalog_pmf(str(obj["family"]), int(obj["n"]),
                                obj.get("params"), kind)
    extra = set(obj) - {"support_min", "masses", "kind"}
    if extra:
        raise InvalidPmfError(f"unknown pmf keys {sorted(extra)}")
    if "support_min" not in obj or "masses" not in obj:
        raise InvalidPmfError("pmf literal needs 'support_min' and 'masses'")
    declared = obj.get("kind")
    if declared is not None and PmfKind(declared) is not kind:
        raise InvalidPmfError(
            f"pmf literal kind {declared!r} does not match context "
            f"{kind.value!r}"
        )
    return DiscretePmf(int(obj["support_min"]),
                       np.asarray(obj["masses"], dtype=np.float64), kind)


def pmf_to_dict(pmf: DiscretePmf) -> dict:
    """Canonical literal form: explicit support and masses."""
    return {
        "support_min": pmf.support_min,
        "masses": [float(m) for m in pmf.masses],
        "kind": pmf.kind.value,
    }
