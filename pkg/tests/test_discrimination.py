import math

import numpy as np
import pytest

from app.core.errors import DegenerateInstanceError, ShapeError
from app.quantum import linalg as la
from app.quantum.discrimination import DiscriminationInstance, check_dual, dist, pgm_lower_bound
from app.quantum.instances import random_density, random_pure

ZERO = la.ket_projector([1.0, 0.0])
ONE = la.ket_projector([0.0, 1.0])
PLUS = la.ket_projector(np.array([1.0, 1.0]) / math.sqrt(2))


def _trine():
    kets = [np.array([math.cos(2 * math.pi * k / 3), math.sin(2 * math.pi * k / 3)]) for k in range(3)]
    return DiscriminationInstance.of([la.ket_projector(v) / 3 for v in kets])


def _assert_valid(inst, res, tol=1e-7):
    assert np.max(np.abs(res.povm.sum(axis=0) - np.eye(inst.dim))) <= 1e-8
    for t in res.povm:
        assert la.min_eigenvalue(t) >= -1e-8
    assert check_dual(inst, res.dual_certificate).ok
    assert res.value <= res.upper_bound + 1e-12
    assert res.primal_dual_gap >= -1e-12
    assert res.primal_dual_gap <= tol * max(1.0, inst.total_trace)


def test_dist_examples(rng):
    inst = DiscriminationInstance.of([ZERO / 2, ONE / 2])
    assert dist(inst).value == pytest.approx(1.0, abs=1e-12)

    rho = random_density(3, rng)
    assert dist(DiscriminationInstance.of([rho / 2, rho / 2])).value == pytest.approx(0.5, abs=1e-9)

    inst = DiscriminationInstance.of([ZERO / 2, PLUS / 2])
    res = dist(inst)
    assert res.value == pytest.approx(0.5 + math.sqrt(2) / 4, abs=1e-12)
    assert res.method == "helstrom"
    _assert_valid(inst, res)


def test_dist_trine_fixed_point():
    inst = _trine()
    res = dist(inst)
    assert res.method == "fixed_point"
    assert res.value == pytest.approx(2.0 / 3.0, abs=1e-9)
    assert res.certified
    _assert_valid(inst, res)


def test_helstrom_matches_fixed_point(rng):
    # 500 кубитных пар и 100 пар в размерности 3
    for t in range(600):
        d = 3 if t % 6 == 5 else 2
        inst = DiscriminationInstance.of([random_density(d, rng) / 2, random_density(d, rng) / 2])
        closed = dist(inst, method="helstrom")
        iterative = dist(inst, method="fixed_point")
        assert closed.certified
        assert abs(closed.value - iterative.value) <= 1e-6
        assert check_dual(inst, iterative.dual_certificate).ok
        assert iterative.certified
        assert iterative.primal_dual_gap <= 1e-7


def test_dist_bounds_random_triples(rng):
    for _ in range(10):
        w = rng.dirichlet(np.ones(3))
        inst = DiscriminationInstance.of([w[i] * random_density(2, rng) for i in range(3)])
        res = dist(inst)
        assert res.certified
        assert max(inst.traces) - 1e-7 <= res.value
        assert res.value <= min(inst.total_trace, res.upper_bound) + 1e-9
        assert pgm_lower_bound(inst).value <= res.value + 1e-7
        assert check_dual(inst, res.dual_certificate).ok


def test_zero_trace_states_get_zero_element():
    inst = DiscriminationInstance.of([ZERO / 2, np.zeros((2, 2)), PLUS / 2])
    res = dist(inst)
    assert np.allclose(res.povm[1], 0.0)
    assert res.value == pytest.approx(0.5 + math.sqrt(2) / 4, abs=1e-12)
    _assert_valid(inst, res)


def test_all_zero_instance():
    inst = DiscriminationInstance.of([np.zeros((2, 2)), np.zeros((2, 2))])
    res = dist(inst)
    assert res.value == 0.0
    assert res.certified
    with pytest.raises(DegenerateInstanceError):
        pgm_lower_bound(inst)


def test_single_state():
    rho = np.diag([0.3, 0.1]).astype(complex)
    res = dist(DiscriminationInstance.of([rho]))
    assert res.value == pytest.approx(0.4, abs=1e-12)


def test_dist_argument_errors():
    inst = _trine()
    with pytest.raises(ValueError):
        dist(inst, tol=0.0)
    with pytest.raises(ShapeError):
        dist(inst, method="helstrom")
    with pytest.raises(ValueError):
        dist(inst, method="sdp")


def test_pgm_examples(rng):
    assert pgm_lower_bound(DiscriminationInstance.of([ZERO / 2, ONE / 2])).value == pytest.approx(1.0)
    rho = random_density(2, rng)
    assert pgm_lower_bound(DiscriminationInstance.of([rho / 4] * 4)).value == pytest.approx(0.25, abs=1e-9)
    assert pgm_lower_bound(_trine()).value == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_check_dual_examples(rng):
    states = [0.5 * random_pure(3, rng), 0.5 * random_density(3, rng)]
    inst = DiscriminationInstance.of(states)
    crude = check_dual(inst, sum(states))
    assert crude.ok
    assert not check_dual(inst, np.zeros((3, 3))).ok
    with pytest.raises(ShapeError):
        check_dual(inst, np.eye(2))
