"""Exact quantum mechanics for registers of one to four qubits.

Everything is dense complex128: the largest object is 16x16, so there is no
need for sparsity or factored representations.  States, density matrices and
projectors validate their defining invariants on construction and are
read-only afterwards.  All operations are pure except ``measure_projective``,
which consumes an explicitly passed ``numpy.random.Generator``.

Conventions:
  * Qubit 0 is the leftmost tensor factor and the most significant bit of the
    amplitude index.
  * Real-amplitude single-qubit states are parameterized by an angle theta as
    cos(theta/2)|0> + sin(theta/2)|1>, reduced to [0, 2*pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 4

# Structural checks (hermiticity, trace, idempotence, positivity) use the
# loose tolerance; equalities between analytically exact quantities use the
# tight one.  Looser values would mask bugs: every quantity here is simple.
STRUCTURAL_TOL = 1e-9
EXACT_TOL = 1e-12

TWO_PI = 2.0 * math.pi


class NumericsError(RuntimeError):
    """An internally computed quantity violated its numerical contract."""


def canonical_angle(theta: float) -> float:
    """Reduce an angle in radians to the canonical range [0, 2*pi)."""
    t = math.fmod(float(theta), TWO_PI)
    if t < 0.0:
        t += TWO_PI
    return 0.0 if t >= TWO_PI else t


def _clamp_probability(value: float) -> float:
    # Rounding may push a probability past a boundary by ~machine epsilon;
    # anything farther out than EXACT_TOL is a logic bug, not rounding.
    if value < -EXACT_TOL or value > 1.0 + EXACT_TOL:
        raise NumericsError(f"probability {value!r} outside [0, 1] beyond rounding tolerance")
    return min(max(value, 0.0), 1.0)


def _check_register_dim(dim: int, what: str) -> int:
    """Return the qubit count for a dimension, or raise if out of range."""
    n = dim.bit_length() - 1
    if dim < 2 or dim != 1 << n or n > MAX_QUBITS:
        raise ValueError(f"{what} of dimension {dim} is not a 1-{MAX_QUBITS} qubit register")
    return n


@dataclass(frozen=True)
class PureState:
    """Normalized complex amplitude vector of a 1-4 qubit register."""

    amps: np.ndarray

    def __post_init__(self) -> None:
        amps = np.array(self.amps, dtype=np.complex128).reshape(-1)
        _check_register_dim(amps.size, "amplitude vector")
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > EXACT_TOL:
            raise ValueError(f"state is not normalized: sum |amp|^2 = {norm_sq!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def n_qubits(self) -> int:
        return self.amps.size.bit_length() - 1

    def density(self) -> "DensityMatrix":
        """The rank-one density matrix |psi><psi|."""
        return DensityMatrix(np.outer(self.amps, self.amps.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite operator on 1-4 qubits."""

    mat: np.ndarray

    def __post_init__(self) -> None:
        mat = np.array(self.mat, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {mat.shape}")
        _check_register_dim(mat.shape[0], "density matrix")
        if not np.allclose(mat, mat.conj().T, rtol=0.0, atol=STRUCTURAL_TOL):
            raise ValueError("density matrix is not Hermitian")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > STRUCTURAL_TOL:
            raise ValueError(f"density matrix trace {tr!r} != 1")
        eigmin = float(np.linalg.eigvalsh(mat)[0])
        if eigmin < -STRUCTURAL_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {eigmin!r}")
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    @property
    def n_qubits(self) -> int:
        return self.mat.shape[0].bit_length() - 1


@dataclass(frozen=True)
class Projector:
    """Hermitian idempotent operator (orthogonal projector)."""

    mat: np.ndarray

    def __post_init__(self) -> None:
        mat = np.array(self.mat, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"projector must be square, got shape {mat.shape}")
        _check_register_dim(mat.shape[0], "projector")
        if not np.allclose(mat, mat.conj().T, rtol=0.0, atol=STRUCTURAL_TOL):
            raise ValueError("projector is not Hermitian")
        if not np.allclose(mat @ mat, mat, rtol=0.0, atol=STRUCTURAL_TOL):
            raise ValueError("projector is not idempotent")
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    @classmethod
    def onto(cls, state: PureState) -> "Projector":
        """Rank-one projector |psi><psi|."""
        return cls(np.outer(state.amps, state.amps.conj()))

    @property
    def n_qubits(self) -> int:
        return self.mat.shape[0].bit_length() - 1


def ket_theta(theta: float) -> PureState:
    """Single-qubit state cos(theta/2)|0> + sin(theta/2)|1>."""
    half = canonical_angle(theta) / 2.0
    return PureState(np.array([math.cos(half), math.sin(half)], dtype=np.complex128))


def tensor(u: PureState, v: PureState) -> PureState:
    """Kronecker product u (x) v, with u occupying the leftmost qubits."""
    if u.n_qubits + v.n_qubits > MAX_QUBITS:
        raise ValueError(
            f"tensor product would have {u.n_qubits + v.n_qubits} qubits (max {MAX_QUBITS})"
        )
    return PureState(np.kron(u.amps, v.amps))


def phi_plus() -> PureState:
    """The maximally entangled two-qubit state (|00> + |11>)/sqrt(2)."""
    inv = 1.0 / math.sqrt(2.0)
    return PureState(np.array([inv, 0.0, 0.0, inv], dtype=np.complex128))


def born_prob(state: PureState, p: Projector) -> float:
    """<psi|P|psi>, clamped to [0, 1] within rounding tolerance."""
    if p.mat.shape[0] != state.amps.size:
        raise ValueError(
            f"projector dimension {p.mat.shape[0]} does not match state dimension {state.amps.size}"
        )
    return _clamp_probability(float(np.real(np.vdot(state.amps, p.mat @ state.amps))))


def mixture_density(components: list[tuple[float, PureState]]) -> DensityMatrix:
    """Statistical mixture sum_i p_i |psi_i><psi_i|."""
    if not components:
        raise ValueError("mixture requires at least one component")
    probs = [float(p) for p, _ in components]
    if any(p < 0.0 for p in probs):
        raise ValueError(f"mixture probabilities must be nonnegative, got {probs}")
    total = sum(probs)
    if abs(total - 1.0) > EXACT_TOL:
        raise ValueError(f"mixture probabilities sum to {total!r}, expected 1")
    dim = components[0][1].amps.size
    if any(s.amps.size != dim for _, s in components):
        raise ValueError("mixture components must share one register dimension")
    mat = np.zeros((dim, dim), dtype=np.complex128)
    for p, s in components:
        mat += p * np.outer(s.amps, s.amps.conj())
    return DensityMatrix(mat)


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Half the sum of absolute eigenvalues of rho - sigma."""
    if rho.mat.shape != sigma.mat.shape:
        raise ValueError(f"dimension mismatch: {rho.mat.shape} vs {sigma.mat.shape}")
    eigs = np.linalg.eigvalsh(rho.mat - sigma.mat)
    return 0.5 * float(np.sum(np.abs(eigs)))


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced density matrix over the kept qubit indices (ascending order)."""
    n = rho.n_qubits
    kept = sorted(set(int(q) for q in keep))
    if not kept or any(q < 0 or q >= n for q in kept):
        raise ValueError(f"keep set {sorted(keep)!r} is not a nonempty subset of qubits 0..{n - 1}")
    if len(kept) == n:
        return DensityMatrix(rho.mat)
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = letters[:n]
    cols = [letters[n + q] if q in kept else rows[q] for q in range(n)]
    out = "".join(rows[q] for q in kept) + "".join(letters[n + q] for q in kept)
    t = rho.mat.reshape([2] * (2 * n))
    reduced = np.einsum(f"{rows}{''.join(cols)}->{out}", t)
    dim = 1 << len(kept)
    return DensityMatrix(reduced.reshape(dim, dim))


def depolarize(rho: DensityMatrix, p: float) -> DensityMatrix:
    """Mix toward the maximally mixed state: (1-p) rho + p I/2^n."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing strength {p!r} outside [0, 1]")
    dim = rho.mat.shape[0]
    return DensityMatrix((1.0 - p) * rho.mat + (p / dim) * np.eye(dim))


def measure_projective(
    state: PureState, projectors: list[Projector], rng: np.random.Generator
) -> tuple[int, PureState]:
    """Sample a complete orthogonal projective measurement.

    Returns the outcome index k, drawn with probability <psi|P_k|psi>, together
    with the renormalized post-measurement state P_k|psi>.
    """
    dim = state.amps.size
    if any(p.mat.shape[0] != dim for p in projectors):
        raise ValueError("projector dimensions do not match the state")
    total = np.zeros((dim, dim), dtype=np.complex128)
    for p in projectors:
        total += p.mat
    if not np.allclose(total, np.eye(dim), rtol=0.0, atol=STRUCTURAL_TOL):
        raise ValueError("projectors do not sum to the identity")
    for i in range(len(projectors)):
        for j in range(i + 1, len(projectors)):
            if not np.allclose(
                projectors[i].mat @ projectors[j].mat, 0.0, rtol=0.0, atol=STRUCTURAL_TOL
            ):
                raise ValueError(f"projectors {i} and {j} are not orthogonal")
    probs = np.array([born_prob(state, p) for p in projectors])
    cum = np.cumsum(probs)
    k = int(np.searchsorted(cum, rng.random(), side="right"))
    k = min(k, len(projectors) - 1)
    post = projectors[k].mat @ state.amps
    norm = float(np.linalg.norm(post))
    if norm < math.sqrt(EXACT_TOL):
        raise NumericsError(f"sampled outcome {k} has vanishing probability {probs[k]!r}")
    return k, PureState(post / norm)
