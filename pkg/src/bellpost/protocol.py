"""The three-party post-selection task.

Alice and Bob each draw a basis bit (uniform) and a state bit (from per-basis
priors), send the corresponding single-qubit preparation to Charlie, and keep
their bits.  Charlie measures the pair against the maximally entangled state
and announces c = 1 on that outcome; only announced trials are tallied.  From
the tally come conditional probabilities p(x, y | a, b), correlations E(a, b),
and the CHSH combination S = E(0,0) + E(0,1) + E(1,0) - E(1,1).

This module provides both the sampling path (seeded Monte Carlo feeding a
``Tally``) and the exact path (closed-form post-selected statistics), plus the
basis-independence check that makes the task nontrivial and bootstrap error
bars for sampled runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qcore import (
    EXACT_TOL,
    DensityMatrix,
    Projector,
    PureState,
    canonical_angle,
    born_prob,
    ket_theta,
    mixture_density,
    phi_plus,
    tensor,
    trace_distance,
)
from .rng import trial_uniforms

PI = math.pi


class EmptyCellError(Exception):
    """A basis pair has zero selected incidents, so E(a, b) is undefined."""

    def __init__(self, a: int, b: int):
        self.a = int(a)
        self.b = int(b)
        super().__init__(f"no selected incidents for basis pair (a={self.a}, b={self.b})")


@dataclass(frozen=True)
class PreparationScheme:
    """Per-basis pair of single-qubit preparations with state priors.

    ``angles[a, x]`` is the meridian angle of the state sent when basis ``a``
    draws state index ``x``; ``priors[a, x]`` is the probability of ``x`` given
    ``a``.  The two bases themselves are always drawn with probability 1/2
    each; only the state priors are configurable.
    """

    angles: np.ndarray
    priors: np.ndarray

    def __post_init__(self) -> None:
        angles = np.array(self.angles, dtype=np.float64)
        priors = np.array(self.priors, dtype=np.float64)
        if angles.shape != (2, 2) or priors.shape != (2, 2):
            raise ValueError("scheme requires 2x2 angle and prior tables (basis x state)")
        angles = np.vectorize(canonical_angle)(angles)
        if np.any(priors < 0.0):
            raise ValueError("state priors must be nonnegative")
        sums = priors.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > EXACT_TOL):
            raise ValueError(f"state priors must sum to 1 per basis, got row sums {sums.tolist()}")
        angles.setflags(write=False)
        priors.setflags(write=False)
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "priors", priors)

    @classmethod
    def uniform(cls, angles) -> "PreparationScheme":
        """Scheme with the given angles and priors 1/2 for every state."""
        return cls(np.array(angles, dtype=np.float64), np.full((2, 2), 0.5))

    def state(self, a: int, x: int) -> PureState:
        return ket_theta(float(self.angles[a, x]))

    def basis_mixture(self, a: int) -> DensityMatrix:
        """The ensemble an observer sees when basis ``a`` was drawn."""
        return mixture_density([(float(self.priors[a, x]), self.state(a, x)) for x in (0, 1)])


def canonical_schemes() -> tuple[PreparationScheme, PreparationScheme]:
    """The scheme pair attaining the maximal post-selected CHSH value 2*sqrt(2).

    Alice sends |0>, |1> in basis 0 and |+>, |-> in basis 1.  Bob sends the
    pi/4-rotated pairs, with the basis-1 state labelled y = 0 placed at
    7*pi/4.  With Bob's basis-1 labels exchanged (``bob_labels_swapped``)
    the printed CHSH combination evaluates to 0 instead of 2*sqrt(2); the
    assignment frozen here is the one validated against the exact
    post-selected statistics.
    """
    alice = PreparationScheme.uniform([[0.0, PI], [PI / 2, 3 * PI / 2]])
    bob = PreparationScheme.uniform([[PI / 4, 5 * PI / 4], [7 * PI / 4, 3 * PI / 4]])
    return alice, bob


def bob_labels_swapped() -> tuple[PreparationScheme, PreparationScheme]:
    """Canonical pair with Bob's basis-1 state labels exchanged (S = 0)."""
    alice = PreparationScheme.uniform([[0.0, PI], [PI / 2, 3 * PI / 2]])
    bob = PreparationScheme.uniform([[PI / 4, 5 * PI / 4], [3 * PI / 4, 7 * PI / 4]])
    return alice, bob


@dataclass(frozen=True)
class TrialRecord:
    """One completed trial: bases, states, and Charlie's announcement."""

    a: int
    b: int
    x: int
    y: int
    c: int

    def __post_init__(self) -> None:
        for name in ("a", "b", "x", "y", "c"):
            if getattr(self, name) not in (0, 1):
                raise ValueError(f"trial field {name} must be a bit")


@dataclass(frozen=True)
class Tally:
    """Post-selected joint counts; ``counts[a, b, x, y]`` is n(x, y; a, b)."""

    counts: np.ndarray
    n_total: int

    def __post_init__(self) -> None:
        counts = np.array(self.counts, dtype=np.int64)
        if counts.shape != (2, 2, 2, 2):
            raise ValueError(f"tally counts must have shape (2,2,2,2), got {counts.shape}")
        if np.any(counts < 0):
            raise ValueError("tally counts must be nonnegative")
        if int(counts.sum()) > self.n_total:
            raise ValueError(
                f"selected count {int(counts.sum())} exceeds total trials {self.n_total}"
            )
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "n_total", int(self.n_total))

    @property
    def n_selected(self) -> int:
        return int(self.counts.sum())


def tally_from_records(records, n_total: int) -> Tally:
    """Accumulate selected trial records into a Tally (reference path)."""
    counts = np.zeros((2, 2, 2, 2), dtype=np.int64)
    for r in records:
        if r.c == 1:
            counts[r.a, r.b, r.x, r.y] += 1
    return Tally(counts, n_total)


@dataclass(frozen=True)
class CondProbTable:
    """Conditional probabilities; ``probs[a, b, x, y]`` is p(x, y | a, b)."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=np.float64)
        if probs.shape != (2, 2, 2, 2):
            raise ValueError(f"probability table must have shape (2,2,2,2), got {probs.shape}")
        if np.any(probs < 0.0):
            raise ValueError("conditional probabilities must be nonnegative")
        sums = probs.sum(axis=(2, 3))
        if np.any(np.abs(sums - 1.0) > EXACT_TOL):
            raise ValueError(f"p(x,y|a,b) must sum to 1 per basis pair, got {sums.tolist()}")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)


def conditional_probs(t: Tally) -> CondProbTable:
    """Normalize tallied counts per basis pair; raises EmptyCellError on zeros."""
    totals = t.counts.sum(axis=(2, 3))
    for a in (0, 1):
        for b in (0, 1):
            if totals[a, b] == 0:
                raise EmptyCellError(a, b)
    return CondProbTable(t.counts / totals[:, :, None, None])


def correlation(p: CondProbTable, a: int, b: int) -> float:
    """E(a, b) with outcome values 1 - 2x and 1 - 2y."""
    cell = p.probs[a, b]
    return float(cell[0, 0] + cell[1, 1] - cell[0, 1] - cell[1, 0])


def bell_s(e00: float, e01: float, e10: float, e11: float) -> float:
    """The CHSH combination E(0,0) + E(0,1) + E(1,0) - E(1,1), no absolute value."""
    for name, e in (("E(0,0)", e00), ("E(0,1)", e01), ("E(1,0)", e10), ("E(1,1)", e11)):
        if abs(e) > 1.0 + EXACT_TOL:
            raise ValueError(f"{name} = {e!r} outside [-1, 1]")
    return float(e00 + e01 + e10 - e11)


_PHI_PLUS_PROJ = Projector.onto(phi_plus())


def selection_probability_table(
    scheme_a: PreparationScheme, scheme_b: PreparationScheme
) -> np.ndarray:
    """Charlie's acceptance probability for each (a, b, x, y) preparation pair."""
    table = np.zeros((2, 2, 2, 2))
    for a in (0, 1):
        for b in (0, 1):
            for x in (0, 1):
                for y in (0, 1):
                    pair = tensor(scheme_a.state(a, x), scheme_b.state(b, y))
                    table[a, b, x, y] = born_prob(pair, _PHI_PLUS_PROJ)
    return table


def exact_postselected(
    scheme_a: PreparationScheme, scheme_b: PreparationScheme
) -> tuple[CondProbTable, np.ndarray]:
    """Closed-form post-selected statistics, no sampling.

    Returns the exact conditional table and the per-(a, b) selection rates
    (probability that a trial with that basis pair is announced).  Rates at
    rounding-noise level (below 1e-12) count as empty: they are zero up to the
    precision of the underlying Born probabilities.
    """
    sel = selection_probability_table(scheme_a, scheme_b)
    weights = scheme_a.priors[:, None, :, None] * scheme_b.priors[None, :, None, :] * sel
    rates = weights.sum(axis=(2, 3))
    for a in (0, 1):
        for b in (0, 1):
            if rates[a, b] <= EXACT_TOL:
                raise EmptyCellError(a, b)
    return CondProbTable(weights / rates[:, :, None, None]), rates


def exact_s(scheme_a: PreparationScheme, scheme_b: PreparationScheme) -> float:
    """The exact post-selected CHSH value for a scheme pair."""
    table, _ = exact_postselected(scheme_a, scheme_b)
    return bell_s(*(correlation(table, a, b) for a, b in ((0, 0), (0, 1), (1, 0), (1, 1))))


def check_basis_independence(scheme: PreparationScheme, tol: float) -> tuple[float, bool]:
    """Trace distance between the two basis ensembles, and whether it passes tol."""
    if tol <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tol!r}")
    distance = trace_distance(scheme.basis_mixture(0), scheme.basis_mixture(1))
    return distance, distance <= tol


# Column layout of the per-trial uniform row (see rng.DRAWS_PER_TRIAL):
# 0 -> a, 1 -> b, 2 -> x, 3 -> y, 4 -> Charlie's acceptance.  Columns 5-7 are
# reserved so all samplers share one row width.
_COL_A, _COL_B, _COL_X, _COL_Y, _COL_C = range(5)


def run_quantum_mc(
    scheme_a: PreparationScheme, scheme_b: PreparationScheme, n_trials: int, seed: int
) -> Tally:
    """Sample the quantum task; deterministic in (schemes, n_trials, seed).

    Each trial draws from its own substream (rng module), so the tally is
    independent of how the trial range is executed or partitioned.
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    sel = selection_probability_table(scheme_a, scheme_b)
    u = trial_uniforms(seed, n_trials)
    a = (u[:, _COL_A] >= 0.5).astype(np.int64)
    b = (u[:, _COL_B] >= 0.5).astype(np.int64)
    x = (u[:, _COL_X] >= scheme_a.priors[a, 0]).astype(np.int64)
    y = (u[:, _COL_Y] >= scheme_b.priors[b, 0]).astype(np.int64)
    c = u[:, _COL_C] < sel[a, b, x, y]
    flat = ((a * 2 + b) * 2 + x) * 2 + y
    counts = np.bincount(flat[c], minlength=16).reshape(2, 2, 2, 2)
    return Tally(counts, n_trials)


@dataclass(frozen=True)
class BellReport:
    """Correlations, the CHSH value, and bootstrap standard errors.

    ``se_e`` / ``se_s`` are None when error estimation was not requested
    (bootstrap_resamples = 0).
    """

    e: np.ndarray
    s: float
    se_e: np.ndarray | None
    se_s: float | None
    n_total: int
    n_selected: int

    def __post_init__(self) -> None:
        e = np.array(self.e, dtype=np.float64)
        if e.shape != (2, 2):
            raise ValueError(f"correlation table must have shape (2,2), got {e.shape}")
        if np.any(np.abs(e) > 1.0 + EXACT_TOL):
            raise ValueError("correlations must lie in [-1, 1]")
        if self.s != bell_s(e[0, 0], e[0, 1], e[1, 0], e[1, 1]):
            raise ValueError("stored S does not equal the CHSH combination of stored E values")
        e.setflags(write=False)
        object.__setattr__(self, "e", e)
        if self.se_e is not None:
            se_e = np.array(self.se_e, dtype=np.float64)
            se_e.setflags(write=False)
            object.__setattr__(self, "se_e", se_e)


def bell_report(t: Tally, bootstrap_resamples: int = 1000, seed: int = 0) -> BellReport:
    """Point estimates from a tally plus nonparametric bootstrap errors.

    Counts are resampled multinomially per basis pair, holding each pair's
    selected count fixed; the standard errors are the sample deviations of the
    resampled statistics.
    """
    if bootstrap_resamples < 0:
        raise ValueError(f"bootstrap_resamples must be >= 0, got {bootstrap_resamples}")
    table = conditional_probs(t)
    e = np.array([[correlation(table, a, b) for b in (0, 1)] for a in (0, 1)])
    s = bell_s(e[0, 0], e[0, 1], e[1, 0], e[1, 1])
    if bootstrap_resamples == 0:
        return BellReport(e, s, None, None, t.n_total, t.n_selected)
    rng = np.random.default_rng(seed)
    reps = np.zeros((bootstrap_resamples, 2, 2))
    for a in (0, 1):
        for b in (0, 1):
            m = int(t.counts[a, b].sum())
            draws = rng.multinomial(m, t.counts[a, b].ravel() / m, size=bootstrap_resamples)
            reps[:, a, b] = (draws[:, 0] + draws[:, 3] - draws[:, 1] - draws[:, 2]) / m
    s_reps = reps[:, 0, 0] + reps[:, 0, 1] + reps[:, 1, 0] - reps[:, 1, 1]
    ddof = 1 if bootstrap_resamples > 1 else 0
    return BellReport(
        e,
        s,
        reps.std(axis=0, ddof=ddof),
        float(s_reps.std(ddof=ddof)),
        t.n_total,
        t.n_selected,
    )
