# app/quantum/instances.py
"""
Генераторы случайных экземпляров (numpy.random.Generator, детерминированы по seed):
унитарные через QR гауссовой матрицы, плотности через нормированный Уишарт,
проективные измерения через сопряжённые координатные проекторы.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from app.quantum import linalg as la
from app.quantum.games import Game
from app.quantum.strategies import PovmFamily, Strategy


def ginibre(d: int, k: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))) / np.sqrt(2.0)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(ginibre(d, d, rng))
    # фазы диагонали R, иначе распределение не хааровское
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph[None, :]


def random_density(d: int, rng: np.random.Generator, rank: Optional[int] = None) -> np.ndarray:
    k = d if rank is None else int(rank)
    g = ginibre(d, k, rng)
    w = g @ la.dag(g)
    return la.hermitize(w / np.trace(w).real)


def random_pure(d: int, rng: np.random.Generator) -> np.ndarray:
    v = ginibre(d, 1, rng)[:, 0]
    return la.ket_projector(v / np.linalg.norm(v))


def random_projective(d: int, n_out: int, rng: np.random.Generator) -> np.ndarray:
    """n_out проекторов U P_k U†; координаты распределяются по исходам случайно (пустые исходы допустимы)."""
    u = random_unitary(d, rng)
    labels = rng.integers(0, n_out, size=d)
    # гарантируем хотя бы два непустых исхода, если d ≥ 2
    if d >= 2 and n_out >= 2 and len(set(labels.tolist())) < 2:
        labels[0], labels[1] = 0, 1
    out = np.zeros((n_out, d, d), dtype=np.complex128)
    for x in range(n_out):
        cols = u[:, labels == x]
        out[x] = la.hermitize(cols @ la.dag(cols))
    return out


def random_povm(d: int, n_out: int, rng: np.random.Generator) -> np.ndarray:
    """E_x = S^{-1/2} G_x S^{-1/2}, G_x — уишартовские, S = Σ G_x."""
    gs = []
    for _ in range(n_out):
        g = ginibre(d, d, rng)
        gs.append(g @ la.dag(g))
    s = sum(gs)
    inv, _ = la.psd_inv_sqrt(s)
    return np.stack([la.hermitize(inv @ g @ inv) for g in gs])


def random_strategy(
    nA: int,
    nB: int,
    nX: int,
    nY: int,
    dD: int,
    dE: int,
    rng: np.random.Generator,
    *,
    projective: bool = True,
    pure: bool = False,
) -> Strategy:
    make_alice = random_projective if projective else random_povm
    alice = PovmFamily(np.stack([make_alice(dD, nX, rng) for _ in range(nA)]))
    bob = PovmFamily(np.stack([random_projective(dE, nY, rng) if projective else random_povm(dE, nY, rng)
                               for _ in range(nB)]))
    gamma = random_pure(dD * dE, rng) if pure else random_density(dD * dE, rng, rank=int(rng.integers(1, dD * dE + 1)))
    return Strategy(alice, bob, gamma, name="random")


def random_disturbance_instance(rng: np.random.Generator, max_local_dim: int = 4, max_outcomes: int = 4):
    """(Λ на A⊗B, {F_i} на A): треть экземпляров — произведение чистых состояний."""
    dA = int(rng.integers(2, max_local_dim + 1))
    dB = int(rng.integers(2, max_local_dim + 1))
    n_out = int(rng.integers(2, max_outcomes + 1))
    kind = int(rng.integers(0, 3))
    if kind == 0:
        lam = np.kron(random_pure(dA, rng), random_pure(dB, rng))
    elif kind == 1:
        lam = random_pure(dA * dB, rng)
    else:
        lam = random_density(dA * dB, rng, rank=int(rng.integers(1, dA * dB + 1)))
    return la.hermitize(lam), random_projective(dA, n_out, rng)


def random_classical_register_instance(rng: np.random.Generator, max_local_dim: int = 3):
    """Λ = Σ_k p_k Λ_k ⊗ |k⟩⟨k| на A⊗B⊗C и проективное {F_i} на A."""
    dA = int(rng.integers(2, max_local_dim + 1))
    dB = int(rng.integers(2, max_local_dim + 1))
    dC = int(rng.integers(2, max_local_dim + 1))
    probs = rng.dirichlet(np.ones(dC))
    lam = np.zeros((dA * dB * dC, dA * dB * dC), dtype=np.complex128)
    for k in range(dC):
        ek = np.zeros((dC, dC))
        ek[k, k] = 1.0
        lam += probs[k] * np.kron(random_density(dA * dB, rng, rank=int(rng.integers(1, 3))), ek)
    f = random_projective(dA, int(rng.integers(2, dA + 1)), rng)
    return la.hermitize(lam), f, dC


def random_game(nA: int, nB: int, nX: int, nY: int, rng: np.random.Generator) -> Game:
    q = rng.dirichlet(np.ones(nA * nB)).reshape(nA, nB)
    # сумма ровно 1 с точностью до 1e-12
    q = q / q.sum()
    return Game(q=q, H=rng.random((nA, nB, nX, nY)), name="random")
