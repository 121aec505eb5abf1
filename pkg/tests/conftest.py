"""Shared builders for randomized property tests."""

import numpy as np

from bellpost import lhv


def random_deterministic_model(rng: np.random.Generator) -> lhv.LhvSimModel:
    """Random finite LHV model with point-mass responses and nonzero selection."""
    n = int(rng.integers(1, 5))
    m = int(rng.integers(1, 5))
    return lhv.LhvSimModel(
        lambda_values=np.sort(rng.uniform(0, 1, size=n)),
        lambda_probs=rng.dirichlet(np.ones(n)),
        lambda_prime_values=np.sort(rng.uniform(0, 1, size=m)),
        lambda_prime_probs=rng.dirichlet(np.ones(m)),
        response_a=rng.integers(0, 2, size=(2, n)).astype(float),
        response_b=rng.integers(0, 2, size=(2, m)).astype(float),
        select=rng.uniform(0.2, 1.0, size=(n, m)),
    )


def random_stochastic_model(rng: np.random.Generator) -> lhv.LhvSimModel:
    """Random finite LHV model with arbitrary response probabilities."""
    n = int(rng.integers(1, 5))
    m = int(rng.integers(1, 5))
    return lhv.LhvSimModel(
        lambda_values=np.sort(rng.uniform(0, 1, size=n)),
        lambda_probs=rng.dirichlet(np.ones(n)),
        lambda_prime_values=np.sort(rng.uniform(0, 1, size=m)),
        lambda_prime_probs=rng.dirichlet(np.ones(m)),
        response_a=rng.uniform(0, 1, size=(2, n)),
        response_b=rng.uniform(0, 1, size=(2, m)),
        select=rng.uniform(0.2, 1.0, size=(n, m)),
    )


def random_response_model(rng: np.random.Generator) -> lhv.ResponseModel:
    n = int(rng.integers(1, 6))
    vals = rng.uniform(-1.0, 1.0, size=(4, n))
    return lhv.ResponseModel(rng.dirichlet(np.ones(n)), vals[0], vals[1], vals[2], vals[3])


def exact_s_of_sim_model(m: lhv.LhvSimModel) -> float:
    """Full-expectation CHSH oracle over the finite (lambda, lambda', a, b) grid.

    Written independently of the library path: conditional correlations are
    accumulated term by term from the model's raw probabilities.
    """
    e = {}
    for a in (0, 1):
        for b in (0, 1):
            num = 0.0
            den = 0.0
            for i in range(m.lambda_probs.size):
                for j in range(m.lambda_prime_probs.size):
                    w = m.lambda_probs[i] * m.lambda_prime_probs[j] * m.select[i, j]
                    f = 1.0 - 2.0 * m.response_a[a, i]  # average of 1-2x
                    g = 1.0 - 2.0 * m.response_b[b, j]
                    num += w * f * g
                    den += w
            e[(a, b)] = num / den
    return e[(0, 0)] + e[(0, 1)] + e[(1, 0)] - e[(1, 1)]
