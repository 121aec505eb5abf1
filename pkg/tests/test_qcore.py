"""Unit and property tests for the exact quantum kernel."""

import math

import numpy as np
import pytest

from bellpost import qcore
from bellpost.qcore import (
    DensityMatrix,
    NumericsError,
    Projector,
    PureState,
    born_prob,
    canonical_angle,
    depolarize,
    ket_theta,
    measure_projective,
    mixture_density,
    partial_trace,
    phi_plus,
    tensor,
    trace_distance,
)


def overlap_prob_oracle(theta_a: float, theta_b: float) -> float:
    """Independent oracle: |<phi+|psi>|^2 via the raw four-amplitude inner product."""
    amps = [
        math.cos(theta_a / 2) * math.cos(theta_b / 2),
        math.cos(theta_a / 2) * math.sin(theta_b / 2),
        math.sin(theta_a / 2) * math.cos(theta_b / 2),
        math.sin(theta_a / 2) * math.sin(theta_b / 2),
    ]
    inner = (amps[0] + amps[3]) / math.sqrt(2)
    return inner * inner


class TestCanonicalAngle:
    def test_in_range_unchanged(self):
        assert canonical_angle(1.25) == 1.25

    def test_wraps_negative(self):
        assert canonical_angle(-0.1) == pytest.approx(2 * math.pi - 0.1, abs=1e-15)

    def test_result_always_in_range(self):
        rng = np.random.default_rng(0)
        for theta in rng.uniform(-50, 50, size=200):
            t = canonical_angle(theta)
            assert 0.0 <= t < 2 * math.pi


class TestKetTheta:
    def test_theta_zero_is_ket0(self):
        np.testing.assert_allclose(ket_theta(0.0).amps, [1, 0], atol=1e-12)

    def test_theta_pi_is_ket1(self):
        np.testing.assert_allclose(ket_theta(math.pi).amps, [0, 1], atol=1e-12)

    def test_theta_half_pi_is_plus(self):
        inv = 1 / math.sqrt(2)
        np.testing.assert_allclose(ket_theta(math.pi / 2).amps, [inv, inv], atol=1e-12)

    def test_unit_norm_for_random_angles(self):
        rng = np.random.default_rng(1)
        for theta in rng.uniform(-10, 10, size=50):
            s = ket_theta(theta)
            assert np.sum(np.abs(s.amps) ** 2) == pytest.approx(1.0, abs=1e-12)


class TestTensor:
    def test_basis_products(self):
        k0, k1 = ket_theta(0.0), ket_theta(math.pi)
        np.testing.assert_allclose(tensor(k0, k1).amps, [0, 1, 0, 0], atol=1e-12)
        np.testing.assert_allclose(tensor(k0, k0).amps, [1, 0, 0, 0], atol=1e-12)

    def test_plus_plus_is_uniform(self):
        p = ket_theta(math.pi / 2)
        np.testing.assert_allclose(tensor(p, p).amps, [0.5] * 4, atol=1e-12)

    def test_dimension_overflow_rejected(self):
        four = tensor(phi_plus(), phi_plus())
        with pytest.raises(ValueError, match="qubits"):
            tensor(four, ket_theta(0.0))


class TestPhiPlus:
    def test_amplitudes(self):
        inv = 1 / math.sqrt(2)
        np.testing.assert_allclose(phi_plus().amps, [inv, 0, 0, inv], atol=1e-12)

    def test_projects_onto_itself(self):
        assert born_prob(phi_plus(), Projector.onto(phi_plus())) == pytest.approx(1.0, abs=1e-12)

    def test_both_marginals_maximally_mixed(self):
        rho = phi_plus().density()
        for keep in ((0,), (1,)):
            np.testing.assert_allclose(partial_trace(rho, keep).mat, np.eye(2) / 2, atol=1e-12)


class TestBornProb:
    def test_equal_angles_give_half(self):
        proj = Projector.onto(phi_plus())
        for a in (0.0, 0.3, 2.2, 5.9):
            pair = tensor(ket_theta(a), ket_theta(a))
            assert born_prob(pair, proj) == pytest.approx(0.5, abs=1e-12)

    def test_opposite_angles_give_zero(self):
        proj = Projector.onto(phi_plus())
        pair = tensor(ket_theta(0.7), ket_theta(0.7 + math.pi))
        assert born_prob(pair, proj) == pytest.approx(0.0, abs=1e-12)

    def test_quarter_turn_gives_quarter(self):
        # Frozen from overlap_prob_oracle(0.4, 0.4 + pi/2) = 0.25.
        proj = Projector.onto(phi_plus())
        pair = tensor(ket_theta(0.4), ket_theta(0.4 + math.pi / 2))
        assert overlap_prob_oracle(0.4, 0.4 + math.pi / 2) == pytest.approx(0.25, abs=1e-12)
        assert born_prob(pair, proj) == pytest.approx(0.25, abs=1e-12)

    def test_matches_half_cos_squared_law(self):
        # The acceptance-rate law p = cos(delta/2)^2 / 2, against the raw
        # inner-product oracle, over 100 random angle pairs.
        proj = Projector.onto(phi_plus())
        rng = np.random.default_rng(2)
        for _ in range(100):
            a = rng.uniform(0, 2 * math.pi)
            d = rng.uniform(-2 * math.pi, 2 * math.pi)
            got = born_prob(tensor(ket_theta(a), ket_theta(a + d)), proj)
            assert got == pytest.approx(0.5 * math.cos(d / 2) ** 2, abs=1e-12)
            assert got == pytest.approx(overlap_prob_oracle(a, a + d), abs=1e-12)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError, match="dimension"):
            born_prob(ket_theta(0.0), Projector.onto(phi_plus()))


class TestMixtureDensity:
    def test_z_pair_gives_maximally_mixed(self):
        rho = mixture_density([(0.5, ket_theta(0.0)), (0.5, ket_theta(math.pi))])
        np.testing.assert_allclose(rho.mat, np.eye(2) / 2, atol=1e-12)

    def test_x_pair_gives_maximally_mixed(self):
        rho = mixture_density(
            [(0.5, ket_theta(math.pi / 2)), (0.5, ket_theta(3 * math.pi / 2))]
        )
        np.testing.assert_allclose(rho.mat, np.eye(2) / 2, atol=1e-12)

    def test_single_component_is_pure(self):
        psi = ket_theta(1.1)
        rho = mixture_density([(1.0, psi)])
        np.testing.assert_allclose(rho.mat, np.outer(psi.amps, psi.amps.conj()), atol=1e-12)

    def test_unnormalized_probs_rejected(self):
        with pytest.raises(ValueError, match="sum"):
            mixture_density([(0.7, ket_theta(0.0)), (0.2, ket_theta(math.pi))])


class TestTraceDistance:
    def test_identical_states(self):
        rho = ket_theta(0.4).density()
        assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_pure_states(self):
        d = trace_distance(ket_theta(0.0).density(), ket_theta(math.pi).density())
        assert d == pytest.approx(1.0, abs=1e-12)

    def test_z_and_x_ensembles_indistinguishable(self):
        rho0 = mixture_density([(0.5, ket_theta(0.0)), (0.5, ket_theta(math.pi))])
        rho1 = mixture_density(
            [(0.5, ket_theta(math.pi / 2)), (0.5, ket_theta(3 * math.pi / 2))]
        )
        assert trace_distance(rho0, rho1) == pytest.approx(0.0, abs=1e-12)

    def test_symmetry_and_triangle_inequality(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            rhos = [_random_density(rng, 2) for _ in range(3)]
            dab = trace_distance(rhos[0], rhos[1])
            dba = trace_distance(rhos[1], rhos[0])
            dac = trace_distance(rhos[0], rhos[2])
            dcb = trace_distance(rhos[2], rhos[1])
            assert dab == pytest.approx(dba, abs=1e-9)
            assert dab <= dac + dcb + 1e-9

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError, match="mismatch"):
            trace_distance(ket_theta(0.0).density(), phi_plus().density())


class TestPartialTrace:
    def test_entangled_marginal(self):
        np.testing.assert_allclose(
            partial_trace(phi_plus().density(), (0,)).mat, np.eye(2) / 2, atol=1e-12
        )

    def test_product_state_keep_second(self):
        plus = ket_theta(math.pi / 2)
        rho = tensor(ket_theta(0.0), plus).density()
        np.testing.assert_allclose(
            partial_trace(rho, (1,)).mat, np.outer(plus.amps, plus.amps.conj()), atol=1e-12
        )

    def test_trace_preserved_on_random_inputs(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            rho = _random_density(rng, 8)  # three qubits
            for keep in ((0,), (1, 2), (0, 2)):
                reduced = partial_trace(rho, keep)
                assert np.trace(reduced.mat).real == pytest.approx(1.0, abs=1e-9)

    def test_invalid_index_set_rejected(self):
        with pytest.raises(ValueError, match="subset"):
            partial_trace(phi_plus().density(), (2,))
        with pytest.raises(ValueError, match="subset"):
            partial_trace(phi_plus().density(), ())


class TestDepolarize:
    def test_zero_strength_is_identity(self):
        rho = ket_theta(0.9).density()
        np.testing.assert_allclose(depolarize(rho, 0.0).mat, rho.mat, atol=1e-12)

    def test_full_strength_is_maximally_mixed(self):
        rho = depolarize(phi_plus().density(), 1.0)
        np.testing.assert_allclose(rho.mat, np.eye(4) / 4, atol=1e-12)

    def test_half_strength_on_ket0(self):
        rho = depolarize(ket_theta(0.0).density(), 0.5)
        np.testing.assert_allclose(rho.mat, np.diag([0.75, 0.25]), atol=1e-12)

    def test_affine_in_the_state(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            r1, r2 = _random_density(rng, 2), _random_density(rng, 2)
            t = rng.uniform()
            p = rng.uniform()
            mixed = DensityMatrix(t * r1.mat + (1 - t) * r2.mat)
            lhs = depolarize(mixed, p).mat
            rhs = t * depolarize(r1, p).mat + (1 - t) * depolarize(r2, p).mat
            np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="0, 1"):
            depolarize(ket_theta(0.0).density(), 1.5)


class TestMeasureProjective:
    def _z_pair(self):
        return [Projector.onto(ket_theta(0.0)), Projector.onto(ket_theta(math.pi))]

    def test_eigenstate_is_deterministic(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            k, post = measure_projective(ket_theta(0.0), self._z_pair(), rng)
            assert k == 0
            np.testing.assert_allclose(post.amps, [1, 0], atol=1e-12)

    def test_plus_state_frequencies(self):
        rng = np.random.default_rng(7)
        n = 100_000
        ones = sum(
            measure_projective(ket_theta(math.pi / 2), self._z_pair(), rng)[0]
            for _ in range(n)
        )
        sigma = math.sqrt(n * 0.25)
        assert abs(ones - n / 2) < 5 * sigma

    def test_phi_plus_always_selected(self):
        proj = Projector.onto(phi_plus())
        comp = Projector(np.eye(4) - proj.mat)
        rng = np.random.default_rng(8)
        for _ in range(20):
            k, _ = measure_projective(phi_plus(), [proj, comp], rng)
            assert k == 0

    def test_incomplete_set_rejected(self):
        rng = np.random.default_rng(9)
        with pytest.raises(ValueError, match="identity"):
            measure_projective(ket_theta(0.0), [Projector.onto(ket_theta(0.0))], rng)

    def test_non_orthogonal_set_rejected(self):
        rng = np.random.default_rng(10)
        p = Projector.onto(ket_theta(0.0))
        q = Projector(np.eye(2) - p.mat)
        tilted = Projector.onto(ket_theta(0.3))
        comp = Projector(np.eye(2) - tilted.mat)
        with pytest.raises(ValueError):
            measure_projective(ket_theta(0.0), [p, q, tilted, comp], rng)


class TestCompleteness:
    def test_born_probs_sum_to_one_for_random_complete_sets(self):
        rng = np.random.default_rng(11)
        for n_qubits in (1, 2):
            dim = 2**n_qubits
            for _ in range(20):
                basis = _random_unitary(rng, dim)
                projs = [Projector.onto(PureState(basis[:, k])) for k in range(dim)]
                state = _random_state(rng, dim)
                total = sum(born_prob(state, p) for p in projs)
                assert total == pytest.approx(1.0, abs=1e-12)


class TestTypeInvariants:
    def test_unnormalized_state_rejected(self):
        with pytest.raises(ValueError, match="normalized"):
            PureState(np.array([1.0, 1.0]))

    def test_bad_register_size_rejected(self):
        with pytest.raises(ValueError):
            PureState(np.ones(3) / math.sqrt(3))
        with pytest.raises(ValueError):
            PureState(np.ones(32) / math.sqrt(32))

    def test_non_hermitian_density_rejected(self):
        with pytest.raises(ValueError, match="Hermitian"):
            DensityMatrix(np.array([[0.5, 0.5], [0.0, 0.5]]))

    def test_wrong_trace_rejected(self):
        with pytest.raises(ValueError, match="trace"):
            DensityMatrix(np.eye(2))

    def test_negative_eigenvalue_rejected(self):
        with pytest.raises(ValueError, match="eigenvalue"):
            DensityMatrix(np.diag([1.5, -0.5]))

    def test_non_idempotent_projector_rejected(self):
        with pytest.raises(ValueError, match="idempotent"):
            Projector(np.eye(2) / 2)

    def test_probability_clamp_rejects_logic_bugs(self):
        with pytest.raises(NumericsError):
            qcore._clamp_probability(1.001)
        assert qcore._clamp_probability(1.0 + 1e-13) == 1.0
        assert qcore._clamp_probability(-1e-13) == 0.0

    def test_values_immutable_after_construction(self):
        s = ket_theta(0.3)
        with pytest.raises(ValueError):
            s.amps[0] = 0.0


def _random_state(rng: np.random.Generator, dim: int) -> PureState:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return PureState(v / np.linalg.norm(v))


def _random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _random_density(rng: np.random.Generator, dim: int) -> DensityMatrix:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    mat = m @ m.conj().T
    return DensityMatrix(mat / np.trace(mat))
