import math

import numpy as np
import pytest

from app.core.errors import CompleteSupportError, NotProjectiveError, ShapeError, SizingError
from app.quantum import linalg as la
from app.quantum.certify import (
    c_g,
    copy_out,
    declassicalize,
    epsilon_commutativity,
    guess_bound,
    guessing_epsilon,
    is_classical_on,
    measurement_disturbance,
    pinching,
    score_shift_check,
    theorem_gap_check,
    uniform_delta,
    weighted_declassical_distance,
)
from app.quantum.games import Game, chsh, classical_value, score
from app.quantum.instances import (
    random_classical_register_instance,
    random_density,
    random_disturbance_instance,
    random_game,
    random_projective,
    random_strategy,
)
from app.quantum.strategies import (
    achieved_correlation,
    chsh_optimal_strategy,
    coin_strategy,
    deterministic_strategy,
)

COS2 = math.cos(math.pi / 8) ** 2
EPS_OPT = 1.0 - COS2
PLUS = la.ket_projector(np.array([1.0, 1.0]) / math.sqrt(2))
COMPUTATIONAL = np.stack([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]).astype(complex)


# ───────── константы игры ─────────
def test_c_g_chsh():
    assert abs(c_g(chsh()) - 3.0) <= 1e-12


def test_c_g_single_input():
    g = Game(q=np.array([[1.0]]), H=np.ones((1, 1, 2, 2)))
    assert c_g(g) == pytest.approx(1.5, abs=1e-12)


def test_c_g_requires_complete_support():
    g = Game(q=np.array([[0.5, 0.0], [0.25, 0.25]]), H=np.ones((2, 2, 2, 2)))
    with pytest.raises(CompleteSupportError):
        c_g(g)
    with pytest.raises(CompleteSupportError):
        guess_bound(g, 0.9)


def test_guess_bound_modes():
    g = chsh()
    assert guess_bound(g, COS2, mode="theorem") == pytest.approx(0.998809, abs=1e-6)
    assert guess_bound(g, COS2, mode="literal") == pytest.approx(1 - (COS2 - 0.75) ** 2 / 3, abs=1e-12)
    assert guess_bound(g, 0.7) == 1.0
    assert guess_bound(g, 0.75) == 1.0
    with pytest.raises(ValueError):
        guess_bound(g, 1.5)
    with pytest.raises(ValueError):
        guess_bound(g, 0.9, mode="other")


# ───────── ε и δ ─────────
def test_guessing_epsilon_chsh_optimal():
    ga = guessing_epsilon(chsh(), chsh_optimal_strategy())
    assert ga.epsilon == pytest.approx(EPS_OPT, abs=1e-5)
    assert ga.certified
    assert ga.dist_gap_budget <= 1e-6
    assert np.allclose(ga.per_input_delta, EPS_OPT, atol=1e-5)


def test_uniform_delta_chsh_optimal():
    assert uniform_delta(chsh_optimal_strategy()) == pytest.approx(EPS_OPT, abs=1e-5)


def test_epsilon_equals_delta_under_uniform_q(rng):
    g = chsh()
    for _ in range(10):
        d = int(rng.integers(2, 4))
        s = random_strategy(2, 2, 2, 2, d, d, rng, projective=bool(rng.integers(0, 2)))
        assert guessing_epsilon(g, s).epsilon == pytest.approx(uniform_delta(s), abs=1e-12)


def test_epsilon_zero_for_deterministic():
    assert abs(guessing_epsilon(chsh(), deterministic_strategy((0, 1), (1, 0), 2, 2)).epsilon) <= 1e-9


def test_epsilon_coin_strategy():
    # Алиса бросает монету, Боб ничего не знает: угадывание 1/2
    ga = guessing_epsilon(chsh(), coin_strategy(2, 2, 2, 2))
    assert ga.epsilon == pytest.approx(0.5, abs=1e-9)


def test_guessing_epsilon_alphabet_mismatch():
    g = Game.uniform(np.ones((2, 2, 3, 2)))
    with pytest.raises(ShapeError):
        guessing_epsilon(g, chsh_optimal_strategy())


# ───────── ε-коммутативность, копирование ─────────
def test_pinching_distance_of_plus():
    assert epsilon_commutativity(pinching(COMPUTATIONAL), PLUS) == pytest.approx(1.0, abs=1e-12)
    assert epsilon_commutativity(pinching(COMPUTATIONAL), np.diag([0.3, 0.7])) == pytest.approx(0.0, abs=1e-12)


def test_epsilon_commutativity_triangle(rng):
    for _ in range(100):
        d = int(rng.integers(2, 5))
        beta = random_density(d, rng)
        phi1 = pinching(random_projective(d, int(rng.integers(2, d + 1)), rng))
        phi2 = pinching(random_projective(d, int(rng.integers(2, d + 1)), rng))
        both = epsilon_commutativity(lambda x: phi2(phi1(x)), beta)
        assert both <= epsilon_commutativity(phi1, beta) + epsilon_commutativity(phi2, beta) + 1e-12


def test_copy_out_dephases_source(rng):
    lam = np.kron(PLUS, random_density(2, rng))
    out = copy_out(lam, [2, 2], register=0)
    assert abs(np.trace(out).real - 1.0) <= 1e-12
    reduced = la.partial_trace(out, [2, 2, 2], keep=[0, 1])
    assert np.max(np.abs(reduced - pinching([np.kron(p, np.eye(2)) for p in COMPUTATIONAL])(lam))) <= 1e-12
    assert is_classical_on(reduced, [2, 2], 0)
    assert not is_classical_on(lam, [2, 2], 0)


# ───────── возмущение измерением ─────────
def test_disturbance_product_state():
    sigma = np.diag([0.6, 0.4]).astype(complex)
    r = measurement_disturbance(np.kron(PLUS, sigma), COMPUTATIONAL)
    assert r.delta == pytest.approx(0.5, abs=1e-9)
    assert r.disturbance == pytest.approx(1.0, abs=1e-9)
    assert r.bound == pytest.approx(2 * math.sqrt(0.5) + 0.5, abs=1e-6)
    assert r.bound_holds


def test_disturbance_halved_rhs_fails():
    sigma = np.diag([0.6, 0.4]).astype(complex)
    r = measurement_disturbance(np.kron(PLUS, sigma), COMPUTATIONAL, rhs_scale=0.5)
    assert not r.bound_holds


def test_disturbance_zero_for_perfect_correlation():
    ket = np.zeros(4)
    ket[0] = ket[3] = 1 / math.sqrt(2)
    r = measurement_disturbance(la.ket_projector(ket), COMPUTATIONAL)
    assert r.delta == pytest.approx(0.0, abs=1e-9)
    assert r.disturbance == pytest.approx(0.0, abs=1e-9)
    assert r.bound_holds


def test_disturbance_random_instances(rng):
    for _ in range(1000):
        lam, f = random_disturbance_instance(rng, max_local_dim=4)
        r = measurement_disturbance(lam, f)
        assert r.bound_holds, r


def test_disturbance_with_classical_register(rng):
    for _ in range(20):
        lam, f, dc = random_classical_register_instance(rng, max_local_dim=3)
        r = measurement_disturbance(lam, f, register_dim=dc)
        assert r.bound_holds, r


def test_disturbance_rejects_bad_inputs():
    lam = np.kron(PLUS, np.eye(2) / 2)
    with pytest.raises(NotProjectiveError):
        measurement_disturbance(lam, np.stack([np.eye(2) / 2, np.eye(2) / 2]))
    with pytest.raises(ShapeError):
        measurement_disturbance(np.kron(np.eye(2) / 2, PLUS), COMPUTATIONAL, register_dim=2)
    with pytest.raises(ShapeError):
        measurement_disturbance(np.eye(3) / 3, COMPUTATIONAL)


# ───────── деклассикализация ─────────
def test_declassicalize_chsh_optimal():
    g = chsh()
    r = declassicalize(g, chsh_optimal_strategy())
    assert r.bound == pytest.approx(math.sqrt(3 * EPS_OPT) * 2, abs=1e-4)
    assert r.bound_holds
    assert r.distance <= r.bound
    assert score(g, r.pbar) <= 0.75 + 1e-9


def test_declassicalize_explicit_matches_sequential(rng):
    g = chsh()
    for s in (chsh_optimal_strategy(), random_strategy(2, 2, 2, 2, 2, 2, rng, projective=True)):
        seq = declassicalize(g, s, explicit=False)
        exp = declassicalize(g, s, explicit=True)
        assert np.max(np.abs(seq.pbar.p - exp.pbar.p)) <= 1e-10


def test_declassicalize_deterministic_is_identity():
    s = deterministic_strategy((1, 0), (0, 0), 2, 2)
    r = declassicalize(chsh(), s)
    assert np.allclose(r.pbar.p, achieved_correlation(s).p)
    assert r.distance == pytest.approx(0.0, abs=1e-12)


def test_declassicalize_random_projective(rng):
    g = chsh()
    omega = classical_value(g).omega_c
    for _ in range(500):
        d = int(rng.integers(2, 5))
        s = random_strategy(2, 2, 2, 2, d, d, rng, projective=True)
        r = declassicalize(g, s)
        assert r.bound_holds
        assert score(g, r.pbar) <= omega + 1e-9


def test_declassicalize_errors(rng):
    s = random_strategy(2, 2, 2, 2, 2, 2, rng, projective=False)
    with pytest.raises(NotProjectiveError):
        declassicalize(chsh(), s)
    with pytest.raises(SizingError):
        declassicalize(chsh(), chsh_optimal_strategy(), max_dim=8)


def test_weighted_distance_and_score_shift(rng):
    g = chsh()
    s = random_strategy(2, 2, 2, 2, 2, 2, rng, projective=True)
    p = achieved_correlation(s)
    pbar = declassicalize(g, s).pbar
    wd = weighted_declassical_distance(g, p, pbar)
    shift, ok = score_shift_check(g, p, pbar)
    assert ok
    assert shift <= 0.5 * wd + 1e-12


# ───────── сводный отчёт ─────────
def test_theorem_report_chsh_optimal():
    rep = theorem_gap_check(chsh(), chsh_optimal_strategy(), seed=7)
    assert rep.score == pytest.approx(0.853553, abs=1e-6)
    assert rep.omega_c == 0.75
    assert rep.c_g == pytest.approx(3.0, abs=1e-12)
    assert rep.epsilon == pytest.approx(EPS_OPT, abs=1e-5)
    assert rep.theorem_rhs == pytest.approx(3 * math.sqrt(EPS_OPT), abs=1e-4)
    assert rep.theorem_bound_holds
    assert rep.declassical_ran
    assert rep.all_hold
    d = rep.to_dict()
    assert d["all_hold"] is True
    assert d["seed"] == 7


def test_theorem_report_deterministic():
    rep = theorem_gap_check(chsh(), deterministic_strategy((0, 0), (0, 0), 2, 2))
    assert abs(rep.epsilon) <= 1e-9
    assert rep.score - rep.omega_c <= 1e-12
    assert rep.all_hold


def test_theorem_report_projectivizes_povm(rng):
    s = random_strategy(2, 2, 2, 2, 2, 2, rng, projective=False)
    rep = theorem_gap_check(chsh(), s)
    assert rep.declassical_ran
    assert rep.all_hold


def test_theorem_report_skips_declassical_over_budget(rng):
    s = random_strategy(2, 2, 2, 2, 3, 3, rng, projective=True)
    rep = theorem_gap_check(chsh(), s, max_dim=16)
    assert not rep.declassical_ran
    assert rep.declassical_distance is None
    assert rep.theorem_bound_holds


def test_theorem_bound_random_strategies(rng):
    for _ in range(200):
        d = int(rng.integers(2, 5))
        s = random_strategy(2, 2, 2, 2, d, d, rng, projective=bool(rng.integers(0, 2)))
        rep = theorem_gap_check(chsh(), s, run_declassical=False)
        assert rep.theorem_bound_holds


def test_theorem_bound_random_games(rng):
    for _ in range(5):
        g = random_game(2, 2, 2, 2, rng)
        s = random_strategy(2, 2, 2, 2, 2, 2, rng, projective=True)
        rep = theorem_gap_check(g, s)
        assert rep.all_hold


def test_scaled_rhs_fails_bounds_on_chsh_optimal():
    # зазор 0.1036 и Σq|p − p̄| ≥ 0.207 не пролезают под 1% правых частей
    rep = theorem_gap_check(chsh(), chsh_optimal_strategy(), rhs_scale=0.01)
    assert rep.declassical_ran
    assert not rep.theorem_bound_holds
    assert not rep.declassical_bound_holds
    assert not rep.weighted_bound_holds
    assert rep.score_shift_holds
    assert not rep.all_hold
