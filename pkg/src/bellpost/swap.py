"""Entanglement-swapping realization of the three-party task.

Each party keeps one half of a maximally entangled pair and sends the other
half toward Charlie; measuring the kept half remotely prepares the in-flight
qubit.  Because the kept half's measurement cannot signal, the ensemble
Charlie sees is exactly basis-independent for any measurement choice — noisy
or not — which is the whole point of this realization.

Register order is (alpha, beta, alpha', beta') = qubits (0, 1, 2, 3): Alice
measures alpha, Bob measures alpha', and Charlie's selection acts on
(beta, beta').  Alice's local measurement is the (possibly jittered) Z- or
X-like pair; Bob's is rotated so that the remotely prepared states realize the
canonical scheme — measuring the kept half with projectors onto the scheme's
own (real-amplitude) states collapses the in-flight qubit onto exactly those
states, each with probability 1/2.  A uniformly rotated initial pair cannot
reproduce the canonical assignment (it yields the label-swapped variant whose
CHSH value is 0), so rotated local measurement is the realization used here.

All property-style quantities (joint distributions, CHSH sweeps) are computed
by exact density-matrix evolution; sampling is used only to produce tallies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .qcore import (
    EXACT_TOL,
    STRUCTURAL_TOL,
    DensityMatrix,
    NumericsError,
    Projector,
    PureState,
    ket_theta,
    partial_trace,
    phi_plus,
    tensor,
)
from .protocol import (
    CondProbTable,
    EmptyCellError,
    PreparationScheme,
    Tally,
    bell_s,
    canonical_schemes,
    correlation,
)
from .rng import trial_uniforms

ORDERS = ("parties-first", "charlie-first")

_I2 = np.eye(2, dtype=np.complex128)
_PAULIS = (
    _I2,
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)


@dataclass(frozen=True)
class NoiseParams:
    """Imperfection knobs for the swap realization.

    Depolarizing strengths act on each Charlie-bound qubit; jitters are
    deterministic angle offsets on the local measurements; charlie_mix blends
    Charlie's selection effect toward the trivial one,
    (1 - eps)|phi+><phi+| + eps I/4.
    """

    depol_alice: float = 0.0
    depol_bob: float = 0.0
    jitter_alice: float = 0.0
    jitter_bob: float = 0.0
    charlie_mix: float = 0.0

    def __post_init__(self) -> None:
        for name in ("depol_alice", "depol_bob", "charlie_mix"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} = {v!r} outside [0, 1]")
            object.__setattr__(self, name, v)
        for name in ("jitter_alice", "jitter_bob"):
            v = float(getattr(self, name))
            if v < 0.0:
                raise ValueError(f"{name} must be >= 0, got {v!r}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class SwapConfig:
    """One swap run: trial count, noise, seed, and measurement ordering."""

    n_trials: int
    noise: NoiseParams = field(default_factory=NoiseParams)
    seed: int = 0
    order: str = "parties-first"

    def __post_init__(self) -> None:
        if self.n_trials < 1:
            raise ValueError(f"n_trials must be >= 1, got {self.n_trials}")
        if self.order not in ORDERS:
            raise ValueError(f"order must be one of {ORDERS}, got {self.order!r}")


def build_initial() -> PureState:
    """Two maximally entangled pairs, qubit order (alpha, beta, alpha', beta')."""
    return tensor(phi_plus(), phi_plus())


def local_projectors(basis: int, jitter: float) -> tuple[Projector, Projector]:
    """Z-like (basis 0) or X-like (basis 1) measurement, offset by jitter.

    Outcome index equals the party's state value: outcome x projects onto the
    state at angle x*pi (basis 0) or pi/2 + x*pi (basis 1), plus the jitter.
    """
    base = 0.0 if basis == 0 else math.pi / 2
    return (
        Projector.onto(ket_theta(base + jitter)),
        Projector.onto(ket_theta(base + math.pi + jitter)),
    )


def scheme_projectors(
    scheme: PreparationScheme, basis: int, jitter: float
) -> tuple[Projector, Projector]:
    """Measurement whose outcome x projects onto the scheme's state (basis, x).

    Valid only when the scheme's two states in this basis are antipodal
    (angles differing by pi), so the projectors resolve the identity.
    """
    p0 = Projector.onto(ket_theta(float(scheme.angles[basis, 0]) + jitter))
    p1 = Projector.onto(ket_theta(float(scheme.angles[basis, 1]) + jitter))
    if not np.allclose(p0.mat + p1.mat, _I2, rtol=0.0, atol=STRUCTURAL_TOL):
        raise ValueError(f"scheme basis {basis} states are not orthogonal")
    return p0, p1


def _embed(op: np.ndarray, targets: tuple[int, ...], n: int) -> np.ndarray:
    """Lift an operator on the listed qubits to the full n-qubit register."""
    rest = [q for q in range(n) if q not in targets]
    big = np.kron(op, np.eye(1 << len(rest), dtype=np.complex128))
    order = list(targets) + rest
    pos = [order.index(q) for q in range(n)]
    t = big.reshape([2] * (2 * n))
    return t.transpose(pos + [p + n for p in pos]).reshape(1 << n, 1 << n)


def _depolarize_qubit(mat: np.ndarray, qubit: int, p: float, n: int) -> np.ndarray:
    """Depolarizing channel on one qubit of an n-qubit operator."""
    if p == 0.0:
        return mat
    paulis = [_embed(sigma, (qubit,), n) for sigma in _PAULIS]
    twirl = sum(pp @ mat @ pp for pp in paulis) / 4.0
    return (1.0 - p) * mat + p * twirl


def _sqrtm_psd(mat: np.ndarray) -> np.ndarray:
    """Hermitian square root of a positive-semidefinite matrix."""
    eigvals, eigvecs = np.linalg.eigh(mat)
    eigvals = np.clip(eigvals, 0.0, None)
    return (eigvecs * np.sqrt(eigvals)) @ eigvecs.conj().T


def _charlie_effect(charlie_mix: float) -> np.ndarray:
    phi = phi_plus().amps
    return (1.0 - charlie_mix) * np.outer(phi, phi.conj()) + (charlie_mix / 4.0) * np.eye(
        4, dtype=np.complex128
    )


def _party_projectors(noise: NoiseParams) -> tuple[list, list]:
    """Embedded local projectors for Alice (qubit 0) and Bob (qubit 2), per basis."""
    alice_scheme, bob_scheme = canonical_schemes()
    alice = [
        [
            _embed(p.mat, (0,), 4)
            for p in scheme_projectors(alice_scheme, a, noise.jitter_alice)
        ]
        for a in (0, 1)
    ]
    bob = [
        [_embed(p.mat, (2,), 4) for p in scheme_projectors(bob_scheme, b, noise.jitter_bob)]
        for b in (0, 1)
    ]
    return alice, bob


def joint_distribution(noise: NoiseParams, order: str) -> np.ndarray:
    """Exact p(x, y, c | a, b) as an array indexed [a, b, x, y, c].

    ``parties-first`` applies the local measurements, then channel noise, then
    Charlie's selection effect; ``charlie-first`` applies noise, performs
    Charlie's (generalized) measurement, and measures the parties on the
    post-selection state.  The two agree because all three act on disjoint
    subsystems.
    """
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}, got {order!r}")
    rho0 = np.outer(build_initial().amps, build_initial().amps.conj())
    alice, bob = _party_projectors(noise)
    effect1 = _embed(_charlie_effect(noise.charlie_mix), (1, 3), 4)
    effect0 = np.eye(16, dtype=np.complex128) - effect1
    joint = np.zeros((2, 2, 2, 2, 2))
    if order == "parties-first":
        for a in (0, 1):
            for b in (0, 1):
                for x in (0, 1):
                    for y in (0, 1):
                        m = alice[a][x] @ bob[b][y]
                        rho = m @ rho0 @ m
                        rho = _depolarize_qubit(rho, 1, noise.depol_alice, 4)
                        rho = _depolarize_qubit(rho, 3, noise.depol_bob, 4)
                        joint[a, b, x, y, 1] = float(np.real(np.trace(effect1 @ rho)))
                        joint[a, b, x, y, 0] = float(np.real(np.trace(effect0 @ rho)))
    else:
        rho = _depolarize_qubit(rho0, 1, noise.depol_alice, 4)
        rho = _depolarize_qubit(rho, 3, noise.depol_bob, 4)
        for c, effect in ((0, effect0), (1, effect1)):
            sq = _sqrtm_psd(effect)
            rho_c = sq @ rho @ sq
            for a in (0, 1):
                for b in (0, 1):
                    for x in (0, 1):
                        for y in (0, 1):
                            m = alice[a][x] @ bob[b][y]
                            joint[a, b, x, y, c] = float(np.real(np.trace(m @ rho_c)))
    return joint


def order_invariance(cfg: SwapConfig) -> float:
    """Maximum entrywise gap between the two measurement orderings' joints."""
    pf = joint_distribution(cfg.noise, "parties-first")
    cf = joint_distribution(cfg.noise, "charlie-first")
    return float(np.max(np.abs(pf - cf)))


def exact_postselected_swap(noise: NoiseParams) -> tuple[CondProbTable, np.ndarray]:
    """Exact post-selected table and per-(a, b) selection rates for the swap."""
    selected = joint_distribution(noise, "parties-first")[..., 1]
    if float(selected.min()) < -EXACT_TOL:
        raise NumericsError(f"negative selection weight {float(selected.min())!r}")
    selected = np.clip(selected, 0.0, None)
    rates = selected.sum(axis=(2, 3))
    for a in (0, 1):
        for b in (0, 1):
            if rates[a, b] <= EXACT_TOL:
                raise EmptyCellError(a, b)
    return CondProbTable(selected / rates[:, :, None, None]), rates


def exact_swap_s(noise: NoiseParams) -> float:
    """Exact post-selected CHSH value of the (possibly noisy) swap realization."""
    table, _ = exact_postselected_swap(noise)
    return bell_s(*(correlation(table, a, b) for a, b in ((0, 0), (0, 1), (1, 0), (1, 1))))


def depolarizing_sweep(p_values) -> list[tuple[float, float]]:
    """Exact CHSH value under symmetric depolarizing strength, one row per p."""
    rows = []
    for p in p_values:
        p = float(p)
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"depolarizing strength {p!r} outside [0, 1]")
        rows.append((p, exact_swap_s(NoiseParams(depol_alice=p, depol_bob=p))))
    return rows


def remote_state_check(basis: int, jitter: float) -> DensityMatrix:
    """Outcome-averaged state remotely prepared by a local measurement.

    Measures one half of a maximally entangled pair with
    ``local_projectors(basis, jitter)`` and averages the post-measurement
    reduced states of the other half; the result is I/2 for every basis and
    jitter, which is the no-signaling guarantee the realization relies on.
    """
    rho = np.outer(phi_plus().amps, phi_plus().amps.conj())
    acc = np.zeros((4, 4), dtype=np.complex128)
    for p in local_projectors(basis, jitter):
        m = _embed(p.mat, (0,), 2)
        acc += m @ rho @ m
    return partial_trace(DensityMatrix(acc), (1,))


# Per-trial uniform row layout: 0 -> a, 1 -> b, 2 -> x, 3 -> y, 4 -> acceptance.
_COL_A, _COL_B, _COL_X, _COL_Y, _COL_C = range(5)


def run_swap(cfg: SwapConfig) -> Tally:
    """Sample the swap realization into a tally.

    The per-trial outcome distribution is the exact joint for the configured
    ordering; local outcomes are unbiased coins (the kept halves are maximally
    mixed), and Charlie's announcement follows the conditional acceptance
    probability given (a, b, x, y).
    """
    joint = joint_distribution(cfg.noise, cfg.order)
    accept = np.clip(joint[..., 1] * 4.0, 0.0, 1.0)  # p(x,y|a,b) = 1/4 exactly
    u = trial_uniforms(cfg.seed, cfg.n_trials)
    a = (u[:, _COL_A] >= 0.5).astype(np.int64)
    b = (u[:, _COL_B] >= 0.5).astype(np.int64)
    x = (u[:, _COL_X] >= 0.5).astype(np.int64)
    y = (u[:, _COL_Y] >= 0.5).astype(np.int64)
    c = u[:, _COL_C] < accept[a, b, x, y]
    flat = ((a * 2 + b) * 2 + x) * 2 + y
    counts = np.bincount(flat[c], minlength=16).reshape(2, 2, 2, 2)
    return Tally(counts, cfg.n_trials)
