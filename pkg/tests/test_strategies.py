import math

import numpy as np
import pytest

from app.core.errors import NotPsdError, ShapeError, SizingError
from app.quantum import linalg as la
from app.quantum.games import chsh, deterministic_correlation, is_nonsignaling, score
from app.quantum.instances import random_strategy
from app.quantum.strategies import (
    PovmFamily,
    Strategy,
    achieved_correlation,
    chsh_optimal_strategy,
    coin_strategy,
    deterministic_strategy,
    naimark_projectors,
    povm_residuals,
    projectivize,
    second_player_states,
)

COS2 = math.cos(math.pi / 8) ** 2


def test_chsh_optimal_score():
    s = chsh_optimal_strategy()
    p = achieved_correlation(s)
    assert score(chsh(), p) == pytest.approx(0.8535533906, abs=1e-7)
    assert is_nonsignaling(p).ok
    assert s.alice.is_projective


def test_chsh_optimal_correlation_entries():
    p = achieved_correlation(chsh_optimal_strategy()).p
    for a in range(2):
        for b in range(2):
            agree = p[a, b, 0, 0] + p[a, b, 1, 1]
            expected = 1.0 - COS2 if (a, b) == (1, 1) else COS2
            assert agree == pytest.approx(expected, abs=1e-12)


def test_deterministic_strategy_gives_deterministic_correlation():
    s = deterministic_strategy((1, 0), (0, 1), 2, 2)
    assert np.allclose(achieved_correlation(s).p, deterministic_correlation((1, 0), (0, 1), 2, 2).p)


def test_coin_strategy_uniform_in_x():
    p = achieved_correlation(coin_strategy(2, 2, 3, 2)).p
    assert np.allclose(p.sum(axis=3), 1.0 / 3.0)


def test_second_player_traces_match_correlation(rng):
    for projective in (True, False):
        s = random_strategy(2, 3, 2, 3, 3, 2, rng, projective=projective)
        sps = second_player_states(s)
        p = achieved_correlation(s).p
        assert np.max(np.abs(sps.traces() - p)) <= 1e-9
        assert np.allclose(sps.traces().sum(axis=(2, 3)), 1.0, atol=1e-9)


def test_second_player_sum_over_y_in_trace(rng):
    s = random_strategy(2, 2, 3, 2, 2, 3, rng, projective=False)
    sps = second_player_states(s)
    tr_pre = np.real(np.einsum("axii->ax", sps.rho_pre))
    summed = sps.traces().sum(axis=3)  # (a, b, x)
    for b in range(2):
        assert np.max(np.abs(summed[:, b, :] - tr_pre)) <= 1e-9


def test_second_player_product_state(rng):
    s0 = random_strategy(2, 2, 2, 2, 2, 2, rng, projective=True)
    rho_d = np.diag([0.3, 0.7])
    rho_e = np.diag([0.6, 0.4]).astype(complex)
    s = Strategy(s0.alice, s0.bob, np.kron(rho_d, rho_e))
    sps = second_player_states(s)
    for a, b, x, y in np.ndindex(2, 2, 2, 2):
        sq = la.psd_sqrt(s.bob.elements[b, y])
        base = sq @ rho_e @ sq
        weight = float(np.real(np.trace(s.alice.elements[a, x] @ rho_d)))
        assert np.max(np.abs(sps.rho[a, b, x, y] - weight * base)) <= 1e-9


def test_chsh_optimal_states_proportional():
    sps = second_player_states(chsh_optimal_strategy())
    for a, b, y in np.ndindex(2, 2, 2):
        r0, r1 = sps.instance(a, b, y)
        resid = r0 * np.trace(r1).real - r1 * np.trace(r0).real
        assert np.max(np.abs(resid)) <= 1e-9


def test_naimark_projectors_reproduce_povm(rng):
    from app.quantum.instances import random_povm
    povm = random_povm(2, 3, rng)
    proj = naimark_projectors(povm)
    rho = np.diag([0.8, 0.2]).astype(complex)
    anc = np.zeros((3, 3))
    anc[0, 0] = 1.0
    for x in range(3):
        assert la.is_projector(proj[x], 1e-9)
        lhs = np.trace(proj[x] @ np.kron(rho, anc)).real
        assert lhs == pytest.approx(np.trace(povm[x] @ rho).real, abs=1e-10)


def test_projectivize_preserves_correlation(rng):
    for _ in range(5):
        s = random_strategy(2, 2, 2, 3, 2, 2, rng, projective=False)
        sp = projectivize(s)
        assert sp.alice.is_projective
        assert sp.dD == s.dD * 2 ** 2
        assert sp.dE == s.dE
        assert np.max(np.abs(achieved_correlation(sp).p - achieved_correlation(s).p)) <= 1e-8


def test_projectivize_three_outcomes(rng):
    s = random_strategy(3, 2, 3, 2, 2, 2, rng, projective=False)
    sp = projectivize(s)
    assert sp.dD == 2 * 3 ** 3
    assert np.max(np.abs(achieved_correlation(sp).p - achieved_correlation(s).p)) <= 1e-8


def test_projectivize_already_projective():
    s = chsh_optimal_strategy()
    sp = projectivize(s)
    assert np.max(np.abs(achieved_correlation(sp).p - achieved_correlation(s).p)) <= 1e-10


def test_projectivize_coin_flip():
    s = coin_strategy(1, 1, 2, 2)
    sp = projectivize(s)
    assert sp.alice.is_projective
    assert np.allclose(achieved_correlation(sp).p.sum(axis=3), 0.5)


def test_projectivize_budget():
    with pytest.raises(SizingError):
        projectivize(coin_strategy(3, 2, 3, 2), max_dim=64)


def test_povm_validation():
    with pytest.raises(ShapeError):
        PovmFamily(np.stack([np.stack([np.eye(2), np.eye(2)])]))
    bad = np.stack([np.stack([np.diag([1.5, 1.0]), np.diag([-0.5, 0.0])])])
    with pytest.raises(NotPsdError):
        PovmFamily(bad)


def test_strategy_gamma_dimension():
    s = chsh_optimal_strategy()
    with pytest.raises(ShapeError):
        Strategy(s.alice, s.bob, np.eye(2) / 2)


def test_residuals_after_constructors(rng):
    for s in (chsh_optimal_strategy(), coin_strategy(2, 2, 2, 2),
              projectivize(random_strategy(2, 2, 2, 2, 2, 2, rng, projective=False))):
        r = povm_residuals(s)
        assert r["alice_completeness"] <= 1e-9
        assert r["alice_positivity"] <= 1e-9
        assert r["bob_completeness"] <= 1e-9
        assert r["bob_positivity"] <= 1e-9
