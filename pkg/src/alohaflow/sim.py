"""Slot-level Monte Carlo simulator for the multi-hop Aloha path.

A replication draws one geometry (hop count, per-hop densities with the
block correlation model), then runs the saturated tandem of hops slot
by slot: the source always has data, relays forward at most one unit
per slot and only units already backlogged when the slot starts, so a
unit never crosses two hops within one slot.  Per-slot success at a hop
is the event that the hop's transmitter is the only station of the
interference set on air; every station's coin is drawn individually so
a recorded trajectory exposes the whole interference field.

Departure counting uses the exact min-plus representation of a single
hop: with cumulative service C and lagged arrivals A, the cumulative
departures are C + running_min(A - C), which is the closed form of the
queue recursion D(u) = min(A(u), D(u-1) + s(u)).  The equivalence is
exercised directly by :func:`single_hop_convolution_check` and by the
slot-loop reference in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .bounds import (BoundQuery, FixedP, NeighborAware, NetworkConfig,
                     compute_bounds)
from .dist import DiscretePmf
from .errors import PreconditionError

_CHUNK = 1 << 16


# ---------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class GeometryRealization:
    """One sampled path: hop count and per-hop interference densities."""

    k: int
    densities: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.k < 1 or len(self.densities) != self.k:
            raise PreconditionError("densities must have length k >= 1")
        if any(d < 2 for d in self.densities):
            raise PreconditionError("every density must be >= 2")


def sample_geometry(network: NetworkConfig,
                    rng: np.random.Generator) -> GeometryRealization:
    """Draw a path: the hop count from the hop law, then one density per
    block of ``gamma`` consecutive hops (the last block may be shorter).

    Densities are identical within a block and independent across
    blocks, so hops at least ``gamma`` apart are independent.
    """
    hop_values = network.hop_law.values
    k = int(rng.choice(hop_values, p=network.hop_law.masses))
    n_blocks = -(-k // network.gamma)
    block_densities = rng.choice(network.density_law.values,
                                 p=network.density_law.masses,
                                 size=n_blocks)
    densities = np.repeat(block_densities, network.gamma)[:k]
    return GeometryRealization(k, tuple(int(d) for d in densities))


# ---------------------------------------------------------------------
# Per-slot success draws
# ---------------------------------------------------------------------

def _transmit_prob(mac, density: int) -> float:
    return 1.0 / density if isinstance(mac, NeighborAware) else mac.p


def hop_success_draw(density: int, mac, rng: np.random.Generator) -> int:
    """One slot of one hop: 1 iff the transmitter is on air and all
    ``density - 1`` interferers are silent.  Every station's coin is an
    individual Bernoulli draw."""
    if density < 2:
        raise PreconditionError(f"density must be >= 2, got {density}")
    p = _transmit_prob(mac, density)
    coins = rng.random(density) < p
    return int(coins[0] and not coins[1:].any())


def _draw_hop_bits(rng: np.random.Generator, t: int, density: int,
                   p: float) -> np.ndarray:
    """Vectorized success bits for one hop over t slots (chunked so the
    per-station coin matrix stays small)."""
    out = np.empty(t, dtype=bool)
    for lo in range(0, t, _CHUNK):
        hi = min(lo + _CHUNK, t)
        coins = rng.random((hi - lo, density)) < p
        out[lo:hi] = coins[:, 0] & ~coins[:, 1:].any(axis=1)
    return out


def _draw_success_bits(geometry: GeometryRealization, network: NetworkConfig,
                       t: int, rng: np.random.Generator) -> np.ndarray:
    """(k, t) matrix of success bits, hops drawn in path order."""
    bits = np.empty((geometry.k, t), dtype=bool)
    for j, density in enumerate(geometry.densities):
        bits[j] = _draw_hop_bits(rng, t, density,
                                 _transmit_prob(network.mac, density))
    return bits


# ---------------------------------------------------------------------
# Saturated tandem dynamics
# ---------------------------------------------------------------------

def _cumulative(bits_row: np.ndarray) -> np.ndarray:
    out = np.zeros(bits_row.size + 1, dtype=np.int64)
    np.cumsum(bits_row, dtype=np.int64, out=out[1:])
    return out


def _hop_departures(bits: np.ndarray) -> np.ndarray:
    """Cumulative crossings per hop, shape (k, t+1).

    Hop 1 drains the saturated source, so it forwards on every success.
    Hop j >= 2 sees the previous hop's departures lagged by one slot
    (units become forwardable the slot after they arrive) and follows
    the queue recursion in its min-plus closed form.
    """
    k, t = bits.shape
    deps = np.empty((k, t + 1), dtype=np.int64)
    deps[0] = _cumulative(bits[0])
    for j in range(1, k):
        c = _cumulative(bits[j])
        arrivals = np.empty(t + 1, dtype=np.int64)
        arrivals[0] = 0
        arrivals[1:] = deps[j - 1, :-1]
        deps[j] = c + np.minimum.accumulate(arrivals - c)
    return deps


@dataclass(frozen=True)
class PathTrace:
    """Full record of one replication.

    ``hop_cumulative[j, u]`` counts units that crossed hop j+1 by the
    end of slot u; ``departures`` is the destination row.
    """

    success_bits: np.ndarray
    hop_cumulative: np.ndarray

    @property
    def departures(self) -> np.ndarray:
        return self.hop_cumulative[-1]

    def backlog(self, hop: int, slot: int) -> int:
        """Start-of-slot backlog of the transmitter of ``hop`` (1-based);
        -1 encodes the saturated source's infinite supply."""
        if hop == 1:
            return -1
        return int(self.hop_cumulative[hop - 2, slot - 1]
                   - self.hop_cumulative[hop - 1, slot - 1])

    def rows(self) -> Iterator[tuple[int, int, int, int]]:
        """(slot, hop, success_bit, backlog) rows for the trace dump."""
        k, t = self.success_bits.shape
        for u in range(1, t + 1):
            for j in range(1, k + 1):
                yield u, j, int(self.success_bits[j - 1, u - 1]), \
                    self.backlog(j, u)


def trace_path(geometry: GeometryRealization, network: NetworkConfig,
               t: int, rng: np.random.Generator) -> PathTrace:
    """Simulate one replication and keep the full per-hop record."""
    if t < 1:
        raise PreconditionError("t must be >= 1")
    bits = _draw_success_bits(geometry, network, t, rng)
    return PathTrace(bits, _hop_departures(bits))


def simulate_path(geometry: GeometryRealization, network: NetworkConfig,
                  t: int, rng: np.random.Generator) -> np.ndarray:
    """Cumulative destination departures D(u), u = 0..t, for one
    replication with the given frozen geometry."""
    return trace_path(geometry, network, t, rng).departures


# ---------------------------------------------------------------------
# Exact single-hop service representation
# ---------------------------------------------------------------------

def single_hop_convolution_check(
        arrivals: Sequence[int], success_bits: Sequence[int],
) -> tuple[np.ndarray, np.ndarray, bool]:
    """Departures of one hop computed two independent ways.

    The queue route runs the recursion D(u) = min(A(u), D(u-1) + s(u))
    slot by slot; the convolution route evaluates the min-plus formula
    D(u) = min over v <= u of A(v) + (u - v) - V(v, u), with V counting
    failed slots.  The two must agree exactly on every sample path.
    Returns (queue route, convolution route, exact-equality flag).
    """
    a = np.asarray(arrivals, dtype=np.int64)
    s = np.asarray(success_bits, dtype=np.int64)
    if a.ndim != 1 or s.ndim != 1 or a.size != s.size + 1:
        raise PreconditionError("need arrivals of length t+1, bits of "
                                "length t")
    if a[0] != 0 or np.any(np.diff(a) < 0):
        raise PreconditionError("arrivals must be cumulative with A(0)=0")
    if np.any((s != 0) & (s != 1)):
        raise PreconditionError("success bits must be 0/1")
    t = s.size

    d_queue = np.zeros(t + 1, dtype=np.int64)
    for u in range(1, t + 1):
        d_queue[u] = min(a[u], d_queue[u - 1] + s[u - 1])

    c = np.zeros(t + 1, dtype=np.int64)
    np.cumsum(s, out=c[1:])
    d_conv = c + np.minimum.accumulate(a - c)

    return d_queue, d_conv, bool(np.array_equal(d_queue, d_conv))


# ---------------------------------------------------------------------
# Bound validation by replication
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class SimConfig:
    """Replication plan: horizon, count, master seed, trace switch."""

    t: int
    replications: int
    seed: int
    record_trajectory: bool = False

    def __post_init__(self) -> None:
        if self.t < 1:
            raise PreconditionError("sim t must be >= 1")
        if self.replications < 1:
            raise PreconditionError("replications must be >= 1")


@dataclass(frozen=True)
class SimReport:
    """Replication outcomes against the analytic bounds.

    Violations use the inclusive events D(t) <= lower*t and
    D(t) >= upper*t whose probabilities the bounds cap at epsilon.
    ``trajectory`` holds the first replication's trace rows when
    recording was requested (None otherwise) and is omitted from the
    JSON form.
    """

    t: int
    replications: int
    seed: int
    lambda_l: float
    lambda_u: float
    departures: tuple[int, ...]
    mean_throughput: float
    ci95_half_width: float
    lower_violations: int
    upper_violations: int
    trajectory: tuple[tuple[int, int, int, int], ...] | None = None

    def to_json_dict(self) -> dict:
        return {
            "t": self.t,
            "replications": self.replications,
            "seed": self.seed,
            "lambda_L": self.lambda_l,
            "lambda_U": self.lambda_u,
            "departures": list(self.departures),
            "mean_throughput": self.mean_throughput,
            "ci95_half_width": self.ci95_half_width,
            "lower_violations": self.lower_violations,
            "upper_violations": self.upper_violations,
        }


def replication_rng(seed: int, index: int) -> np.random.Generator:
    """Independent counter-based stream for one replication.

    Spawned from the master seed so any subset of replications can be
    reproduced, in any order or in parallel.
    """
    child = np.random.SeedSequence(seed).spawn(index + 1)[index]
    return np.random.Generator(np.random.Philox(child))


def validate_bounds(network: NetworkConfig, query: BoundQuery,
                    sim: SimConfig) -> SimReport:
    """Monte Carlo check of the bound guarantees.

    Each replication draws a fresh geometry and fresh success coins;
    the saturated source makes D(t) a pure measurement of service.
    The replication count of D(t) at or below lower*t (respectively at
    or above upper*t) estimates the violation probability that the
    bounds promise to keep at or below epsilon.
    """
    if sim.t != query.t:
        raise PreconditionError(
            f"sim horizon {sim.t} differs from query horizon {query.t}"
        )
    cb = compute_bounds(network, query)
    departures = np.empty(sim.replications, dtype=np.int64)
    trajectory = None
    for r in range(sim.replications):
        rng = replication_rng(sim.seed, r)
        geometry = sample_geometry(network, rng)
        if sim.record_trajectory and r == 0:
            trace = trace_path(geometry, network, sim.t, rng)
            departures[r] = trace.departures[-1]
            trajectory = tuple(trace.rows())
        else:
            departures[r] = simulate_path(geometry, network, sim.t,
                                          rng)[-1]

    rates = departures / float(sim.t)
    mean = float(rates.mean())
    if sim.replications > 1:
        half = float(1.959963984540054 * rates.std(ddof=1)
                     / np.sqrt(sim.replications))
    else:
        half = 0.0
    return SimReport(
        t=sim.t,
        replications=sim.replications,
        seed=sim.seed,
        lambda_l=cb.lower,
        lambda_u=cb.upper,
        departures=tuple(int(d) for d in departures),
        mean_throughput=mean,
        ci95_half_width=half,
        lower_violations=int((departures <= cb.lower * sim.t).sum()),
        upper_violations=int((departures >= cb.upper * sim.t).sum()),
        trajectory=trajectory,
    )
