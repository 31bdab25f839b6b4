"""Per-flow capacity bounds for a saturated multi-hop slotted-Aloha path.

The per-slot failure of a hop with density ``l`` has the collision
probability ``q_l = 1 - p (1-p)**(l-1)``: the transmitter must be the
only station of the interference set on air.  Averaging over the
density law gives ``q``, and the virtual interfering process (the count
of failed slots) has the moment generating function ``(1 + q*(e**theta
- 1))**t``.  A Chernoff/union argument across hops, with a Hoelder step
absorbing any correlation among up to ``gamma`` consecutive hop
densities, yields explicit transient lower and upper bounds on the
end-to-end throughput rate at violation probability ``epsilon``:

    lower(t) = sup_theta  1 - log(b(gamma*theta))/(gamma*theta)
                          + (log(eps) - c(t)) / (t*theta)
    upper(t) = inf_theta  1 + log(b(-gamma*theta))/(gamma*theta)
                          - log(eps) / (t*theta)

where ``b(x) = 1 + q*(e**x - 1)`` and ``c(t)`` is the expected
log-count of ways to split ``t`` slots across the hops.  Both bounds
pinch onto the asymptotic capacity ``1 - q`` as ``t`` grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Sequence, Union

import numpy as np

from .dist import DiscretePmf, PmfKind, point_mass
from .errors import InvalidPmfError, PreconditionError

DEFAULT_THETA_LOW = 1e-8
DEFAULT_THETA_HIGH = 50.0


# ---------------------------------------------------------------------
# Configuration types
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class FixedP:
    """All stations transmit with the same probability ``p`` each slot.

    ``p`` in {0, 1} is degenerate (zero capacity) and is accepted here
    only so the simulator can exercise those corner cases; config-file
    ingestion restricts ``p`` to the open interval.
    """

    p: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise PreconditionError(f"transmission probability {self.p} "
                                    "outside [0, 1]")


@dataclass(frozen=True)
class NeighborAware:
    """Each station transmits with probability 1/density of its hop."""


MacMode = Union[FixedP, NeighborAware]


@dataclass(frozen=True)
class NetworkConfig:
    """MAC mode, geometry laws, and the dependency parameter.

    ``gamma`` is the maximal number of consecutive hops whose densities
    may be statistically dependent; 1 means fully independent, the
    hop-law maximum means the whole path may be correlated.
    """

    mac: MacMode
    density_law: DiscretePmf
    hop_law: DiscretePmf
    gamma: int = 1

    def __post_init__(self) -> None:
        if self.density_law.kind is not PmfKind.DENSITY:
            raise PreconditionError("density_law must have kind 'density'")
        if self.hop_law.kind is not PmfKind.HOP_COUNT:
            raise PreconditionError("hop_law must have kind 'hop_count'")
        if not 1 <= self.gamma <= self.hop_law.max_value:
            raise PreconditionError(
                f"gamma {self.gamma} outside [1, k_max="
                f"{self.hop_law.max_value}]"
            )


@dataclass(frozen=True)
class ThetaSearch:
    """Bracket and stopping rule for the scalar optimizations in theta.

    The bracket endpoints are stored in log space; golden-section runs
    on log(theta) within ``multistart_points`` equal sub-brackets to
    guard against flat stretches of the objective.
    """

    log_bracket_low: float = math.log(DEFAULT_THETA_LOW)
    log_bracket_high: float = math.log(DEFAULT_THETA_HIGH)
    tolerance: float = 1e-10
    multistart_points: int = 8

    def __post_init__(self) -> None:
        if not self.log_bracket_low < self.log_bracket_high:
            raise PreconditionError("theta bracket is empty")
        if self.tolerance <= 0.0:
            raise PreconditionError("theta tolerance must be positive")
        if self.multistart_points < 1:
            raise PreconditionError("multistart_points must be >= 1")


@dataclass(frozen=True)
class BoundQuery:
    """Horizon, violation probability, and optimizer settings."""

    t: int
    epsilon: float
    theta_search: ThetaSearch = field(default_factory=ThetaSearch)

    def __post_init__(self) -> None:
        if self.t < 1:
            raise PreconditionError(f"t must be a positive slot count, got "
                                    f"{self.t}")
        if not 0.0 < self.epsilon < 1.0:
            raise PreconditionError(
                f"epsilon must lie in (0, 1), got {self.epsilon}"
            )


@dataclass(frozen=True)
class CapacityBounds:
    """Transient bounds plus the asymptotic rate they converge to.

    ``lower_raw`` may be negative (no positive rate certifiable at this
    horizon); ``lower`` is its clamp to [0, 1].
    """

    lower_raw: float
    lower: float
    upper: float
    asymptotic: float
    theta_star_lower: float
    theta_star_upper: float


# ---------------------------------------------------------------------
# Collision probability and MGF base
# ---------------------------------------------------------------------

def collision_prob_given_density(config: NetworkConfig, l: int) -> float:
    """Probability that a hop of density ``l`` wastes a slot.

    The transmitter succeeds only when it is on air and all ``l - 1``
    interferers are silent.
    """
    if l < 2:
        raise PreconditionError(f"density must be >= 2, got {l}")
    p = 1.0 / l if isinstance(config.mac, NeighborAware) else config.mac.p
    return 1.0 - p * (1.0 - p) ** (l - 1)


def q_bar(config: NetworkConfig) -> float:
    """Collision probability averaged over the density law."""
    values = config.density_law.values
    if isinstance(config.mac, NeighborAware):
        success = (1.0 / values) * (1.0 - 1.0 / values) ** (values - 1)
    else:
        p = config.mac.p
        success = p * (1.0 - p) ** (values - 1)
    return float(np.dot(1.0 - success, config.density_law.masses))


def log_mgf_base(config: NetworkConfig, theta: float) -> float:
    """log(1 + q*(e**theta - 1)), stable for any real theta.

    For large positive theta the direct expression overflows, so the
    identity b = q*e**theta * (1 + (1-q)*e**(-theta)/q) is used.
    """
    return _log_base(q_bar(config), theta)


def _log_base(q: float, x: float) -> float:
    if x > 30.0:
        # q >= 3/4 whenever densities are >= 2, so log(q) is safe
        return math.log(q) + x + math.log1p((1.0 - q) * math.exp(-x) / q)
    return math.log1p(q * math.expm1(x))


def mgf_base(config: NetworkConfig, theta: float) -> float:
    """Per-slot MGF base b = 1 + q*(e**theta - 1) of the interfering
    process; the t-slot MGF is b**t.  Strictly positive for all real
    theta, but overflows float64 near theta ~ 700: callers in that
    regime must use :func:`log_mgf_base`."""
    lv = log_mgf_base(config, theta)
    if lv > 700.0:
        raise OverflowError(
            f"mgf base exceeds float64 at theta={theta}; work in log space"
        )
    return math.exp(lv)


def c_k_term(hop_law: DiscretePmf, t: int) -> float:
    """Expected log-count of slot splits across the hops.

    A path of k hops partitions the horizon into k ordered segments;
    the number of such splits is C(t+k-1, k-1).  Evaluated through
    log-gamma so large horizons never touch a factorial.
    """
    if hop_law.kind is not PmfKind.HOP_COUNT:
        raise PreconditionError("c_k_term requires a hop-count law")
    if t < hop_law.max_value:
        raise PreconditionError(
            f"t must be at least k_max ({hop_law.max_value}), got {t}"
        )
    total = 0.0
    for k, mass in zip(hop_law.values, hop_law.masses):
        if mass == 0.0:
            continue
        log_binom = (math.lgamma(t + k) - math.lgamma(k)
                     - math.lgamma(t + 1.0))
        total += mass * log_binom
    return total


# ---------------------------------------------------------------------
# Scalar optimization (golden section with multistart)
# ---------------------------------------------------------------------

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(f: Callable[[float], float], a: float, b: float,
                tol: float) -> tuple[float, float]:
    """Maximize a scalar function on [a, b] by golden-section search."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _multistart_max(f: Callable[[float], float],
                    search: ThetaSearch) -> tuple[float, float]:
    """Best golden-section result over equal sub-brackets of log(theta).

    Returns (theta_star, value).  Bracket endpoints are also evaluated
    directly so extrema pinned to an edge are reported exactly.
    """
    lo, hi = search.log_bracket_low, search.log_bracket_high
    edges = np.linspace(lo, hi, search.multistart_points + 1)
    g = lambda y: f(math.exp(y))
    best_y, best_v = lo, g(lo)
    for a, b in zip(edges[:-1], edges[1:]):
        y, v = _golden_max(g, a, b, search.tolerance)
        if v > best_v:
            best_y, best_v = y, v
        vb = g(b)
        if vb > best_v:
            best_y, best_v = b, vb
    return math.exp(best_y), best_v


# ---------------------------------------------------------------------
# Bounds
# ---------------------------------------------------------------------

def lower_bound(config: NetworkConfig,
                query: BoundQuery) -> tuple[float, float]:
    """Optimized transient lower bound on the throughput rate.

    Returns ``(value, theta_star)``.  The value may be negative when
    the horizon is too short to certify any positive rate; it is
    reported unclamped here and clamped inside :func:`compute_bounds`.
    Requires ``t >= k_max`` so every hop can be crossed at least once.
    """
    k_max = config.hop_law.max_value
    if query.t < k_max:
        raise PreconditionError(
            f"t must be at least k_max ({k_max}), got {query.t}"
        )
    q = q_bar(config)
    gamma = float(config.gamma)
    t = float(query.t)
    penalty = math.log(query.epsilon) - c_k_term(config.hop_law, query.t)

    def objective(theta: float) -> float:
        x = gamma * theta
        return 1.0 - _log_base(q, x) / x + penalty / (t * theta)

    theta_star, value = _multistart_max(objective, query.theta_search)
    return value, theta_star


def upper_bound(config: NetworkConfig,
                query: BoundQuery) -> tuple[float, float]:
    """Optimized transient upper bound on the throughput rate.

    Returns ``(value, theta_star)``.  No horizon restriction applies.
    The infimum over all theta never exceeds the unit slot rate (one
    data unit per slot is the hard service ceiling), so the searched
    value is capped at 1.
    """
    q = q_bar(config)
    gamma = float(config.gamma)
    t = float(query.t)
    log_eps = math.log(query.epsilon)

    def objective(theta: float) -> float:
        x = gamma * theta
        return 1.0 + _log_base(q, -x) / x - log_eps / (t * theta)

    theta_star, neg_value = _multistart_max(
        lambda th: -objective(th), query.theta_search
    )
    return min(-neg_value, 1.0), theta_star


def asymptotic_capacity(config: NetworkConfig) -> float:
    """Long-run throughput rate 1 - q; with neighbor-aware transmission
    this equals the density-law average of (1/l)(1 - 1/l)**(l-1)."""
    return 1.0 - q_bar(config)


def compute_bounds(config: NetworkConfig, query: BoundQuery) -> CapacityBounds:
    """Evaluate both transient bounds and the asymptotic rate."""
    raw, theta_l = lower_bound(config, query)
    upper, theta_u = upper_bound(config, query)
    return CapacityBounds(
        lower_raw=raw,
        lower=min(max(raw, 0.0), 1.0),
        upper=upper,
        asymptotic=asymptotic_capacity(config),
        theta_star_lower=theta_l,
        theta_star_upper=theta_u,
    )


def optimize_fixed_p(density_law: DiscretePmf,
                     tol: float = 1e-10) -> tuple[float, float]:
    """Best fixed transmission probability against a density law.

    Maximizes the asymptotic rate sum_l pi_l * p * (1-p)**(l-1) over
    p in (0, 1) with a coarse grid followed by golden-section
    refinement.  For a single-atom law at density n the maximizer is
    exactly 1/n.
    """
    if density_law.kind is not PmfKind.DENSITY:
        raise PreconditionError("optimize_fixed_p requires a density law")
    values = density_law.values
    masses = density_law.masses

    def rate(p: float) -> float:
        return float(np.dot(masses, p * (1.0 - p) ** (values - 1)))

    grid = np.linspace(0.0, 1.0, 514)[1:-1]
    best = int(np.argmax([rate(p) for p in grid]))
    lo = grid[best - 1] if best > 0 else grid[0] / 2.0
    hi = grid[best + 1] if best < grid.size - 1 else 0.5 + grid[-1] / 2.0
    p_star, lam_star = _golden_max(rate, lo, hi, tol)
    return p_star, lam_star


# ---------------------------------------------------------------------
# Parameter sweeps
# ---------------------------------------------------------------------

class SweepVariable(Enum):
    T = "t"
    GAMMA = "gamma"
    MEAN_K = "mean_K"
    MEAN_N = "mean_N"


@dataclass(frozen=True)
class SweepRow:
    """One grid point of a sweep.

    For the mean sweeps ``variant`` distinguishes the randomized
    two-point law ("random") from the point mass with the same mean
    ("static"); for t/gamma sweeps it is empty.  Failed grid points
    carry the error message instead of bounds.
    """

    variable: str
    value: float
    variant: str
    bounds: CapacityBounds | None
    error: str | None = None


def _try_row(variable: str, value: float, variant: str,
             config: NetworkConfig, query: BoundQuery) -> SweepRow:
    try:
        return SweepRow(variable, value, variant,
                        compute_bounds(config, query))
    except (PreconditionError, InvalidPmfError) as exc:
        return SweepRow(variable, value, variant, None, str(exc))


def sweep(config: NetworkConfig, query: BoundQuery,
          variable: SweepVariable | str, grid: Sequence[float], *,
          zeta: float = 0.5, couple_gamma: bool = False) -> list[SweepRow]:
    """Bounds along a grid of one varied parameter.

    ``t`` and ``gamma`` vary the query/config directly.  ``mean_K``
    replaces the hop law per grid mean m (integer): the "static"
    variant is the point mass at m, the "random" variant the two-point
    gain-maximizing law on {1, 2m}; the horizon is coupled to the mean
    as t = ceil(m**(1+zeta)), and ``couple_gamma`` additionally sets
    gamma = m.  ``mean_N`` replaces the density law analogously with
    the two-point law on {2, 2m}, leaving t and gamma untouched.
    """
    variable = (SweepVariable(variable) if isinstance(variable, str)
                else variable)
    from .gains import gain_max_density, gain_max_hops

    rows: list[SweepRow] = []
    for value in grid:
        if variable is SweepVariable.T:
            rows.append(_try_row("t", value, "", config,
                                 replace(query, t=int(value))))
        elif variable is SweepVariable.GAMMA:
            try:
                cfg = replace(config, gamma=int(value))
            except PreconditionError as exc:
                rows.append(SweepRow("gamma", value, "", None, str(exc)))
                continue
            rows.append(_try_row("gamma", value, "", cfg, query))
        elif variable is SweepVariable.MEAN_K:
            m = int(value)
            t_row = math.ceil(m ** (1.0 + zeta))
            gamma_row = m if couple_gamma else config.gamma
            for variant in ("static", "random"):
                try:
                    law = (point_mass(m, PmfKind.HOP_COUNT)
                           if variant == "static"
                           else gain_max_hops(2 * m, float(m)))
                    cfg = replace(config, hop_law=law, gamma=gamma_row)
                    qry = replace(query, t=t_row)
                except (PreconditionError, InvalidPmfError) as exc:
                    rows.append(SweepRow("mean_K", value, variant, None,
                                         str(exc)))
                    continue
                rows.append(_try_row("mean_K", value, variant, cfg, qry))
        else:
            m = int(value)
            for variant in ("static", "random"):
                try:
                    law = (point_mass(m, PmfKind.DENSITY)
                           if variant == "static"
                           else gain_max_density(2 * m, float(m)))
                    cfg = replace(config, density_law=law)
                except (PreconditionError, InvalidPmfError) as exc:
                    rows.append(SweepRow("mean_N", value, variant, None,
                                         str(exc)))
                    continue
                rows.append(_try_row("mean_N", value, variant, cfg, query))
    return rows
