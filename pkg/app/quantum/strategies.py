# app/quantum/strategies.py
"""
Квантовые стратегии двух игроков: семейства POVM, общее состояние γ на D⊗E,
достигаемая корреляция, состояния второго игрока и проективизация (Наймарк).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from app.core.config import settings
from app.core.errors import ShapeError, SizingError
from app.quantum import linalg as la
from app.quantum.games import Correlation

log = logging.getLogger("strategies")


@dataclass
class PovmFamily:
    """elements[s, o] — элемент POVM для настройки s и исхода o, shape (S, O, d, d)."""
    elements: np.ndarray

    def __post_init__(self) -> None:
        el = np.asarray(self.elements, dtype=np.complex128)
        if el.ndim != 4 or el.shape[2] != el.shape[3] or min(el.shape) < 1:
            raise ShapeError(f"POVM: ожидается массив S×O×d×d, получено shape={el.shape}")
        if not np.all(np.isfinite(el)):
            raise ShapeError("POVM: есть NaN/Inf")
        S, O, d, _ = el.shape
        herm = np.empty_like(el)
        for s in range(S):
            for o in range(O):
                herm[s, o] = la.ensure_psd(el[s, o], f"POVM[{s}][{o}]")
        self.elements = herm
        res = self.completeness_residual()
        if res > settings.tol("povm_tol"):
            raise ShapeError(f"POVM: Σ_o E[s][o] ≠ I (невязка {res:.3e})")

    @property
    def n_settings(self) -> int:
        return int(self.elements.shape[0])

    @property
    def n_outcomes(self) -> int:
        return int(self.elements.shape[1])

    @property
    def dim(self) -> int:
        return int(self.elements.shape[2])

    def completeness_residual(self) -> float:
        total = self.elements.sum(axis=1)
        return float(np.max(np.abs(total - np.eye(self.dim)[None, :, :])))

    def positivity_residual(self) -> float:
        """max(0, −λ_min) по всем элементам."""
        worst = 0.0
        for s in range(self.n_settings):
            for o in range(self.n_outcomes):
                worst = max(worst, -la.min_eigenvalue(self.elements[s, o]))
        return worst

    @property
    def is_projective(self) -> bool:
        tol = settings.tol("projective_tol")
        for s in range(self.n_settings):
            for o in range(self.n_outcomes):
                e = self.elements[s, o]
                if not la.is_projector(e, tol):
                    return False
                for o2 in range(o + 1, self.n_outcomes):
                    if float(np.max(np.abs(e @ self.elements[s, o2]))) > tol:
                        return False
        return True

    def sqrt_elements(self) -> np.ndarray:
        out = np.empty_like(self.elements)
        for s in range(self.n_settings):
            for o in range(self.n_outcomes):
                out[s, o] = la.psd_sqrt(self.elements[s, o])
        return out


@dataclass
class Strategy:
    """Γ = (D, E, {R_a^x}, {S_b^y}, γ)."""
    alice: PovmFamily
    bob: PovmFamily
    gamma: np.ndarray
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        d = self.alice.dim * self.bob.dim
        g = la.ensure_density(self.gamma, "gamma")
        if g.shape[0] != d:
            raise ShapeError(f"gamma: размерность {g.shape[0]} ≠ dD·dE = {d}")
        self.gamma = g

    @property
    def dD(self) -> int:
        return self.alice.dim

    @property
    def dE(self) -> int:
        return self.bob.dim

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.alice.n_settings, self.bob.n_settings, self.alice.n_outcomes, self.bob.n_outcomes)

    def gamma_tensor(self) -> np.ndarray:
        """γ как тензор G[i, j, k, l] = ⟨i j|γ|k l⟩, i,k ∈ D; j,l ∈ E."""
        return self.gamma.reshape(self.dD, self.dE, self.dD, self.dE)


@dataclass
class SecondPlayerStates:
    rho: np.ndarray        # (a, b, x, y, dE, dE) — ρ_ab^xy, субнормированные
    rho_pre: np.ndarray    # (a, x, dE, dE) — ρ_a^x (S_b^y заменён на I)

    def instance(self, a: int, b: int, y: int) -> list[np.ndarray]:
        """{ρ_ab^xy | x ∈ X} для фиксированных (a, b, y)."""
        return [self.rho[a, b, x, y] for x in range(self.rho.shape[2])]

    def traces(self) -> np.ndarray:
        return np.real(np.einsum("abxyii->abxy", self.rho))


# ─────────────────────────────────────────────────────────────────────────────
# Операции
# ─────────────────────────────────────────────────────────────────────────────
def achieved_correlation(s: Strategy) -> Correlation:
    """p_ab^xy = Tr[(R_a^x ⊗ S_b^y) γ]."""
    G = s.gamma_tensor()
    p = np.einsum("axki,bylj,ijkl->abxy", s.alice.elements, s.bob.elements, G)
    p = np.real(p)
    # представленческий шум около нуля
    p = np.where(np.abs(p) < 1e-15, 0.0, p)
    return Correlation(p, name=f"p[{s.name}]" if s.name else "")


def second_player_states(s: Strategy) -> SecondPlayerStates:
    """
    ρ_ab^xy = Tr_D[√(R⊗S) γ √(R⊗S)] = √S_b^y · Tr_D[(R_a^x ⊗ I) γ] · √S_b^y
    (√(R⊗S) = √R⊗√S, а √R под Tr_D сворачивается циклически).
    """
    G = s.gamma_tensor()
    pre = np.einsum("axki,ijkl->axjl", s.alice.elements, G)
    pre = (pre + np.conj(np.swapaxes(pre, -1, -2))) / 2
    sS = s.bob.sqrt_elements()
    rho = np.einsum("byjm,axmn,bynl->abxyjl", sS, pre, sS)
    rho = (rho + np.conj(np.swapaxes(rho, -1, -2))) / 2
    return SecondPlayerStates(rho=rho, rho_pre=pre)


def _complete_isometry(v: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """
    Достраивает столбцы изометрии v до унитарной матрицы Грамом–Шмидтом
    по стандартному базису (в порядке индексов). Столбцы v сохраняются как есть.
    """
    n, k = v.shape
    cols = [v[:, i] for i in range(k)]
    for j in range(n):
        if len(cols) == n:
            break
        e = np.zeros(n, dtype=np.complex128)
        e[j] = 1.0
        # два прохода ГШ
        for _ in range(2):
            for c in cols:
                e = e - c * np.vdot(c, e)
        nrm = float(np.linalg.norm(e))
        if nrm > tol:
            cols.append(e / nrm)
    if len(cols) != n:
        raise ShapeError(f"не удалось достроить изометрию {n}×{k} до унитарной")
    return np.stack(cols, axis=1)


def naimark_projectors(povm_setting: np.ndarray) -> np.ndarray:
    """
    Для одной настройки {E_x} на C^d: проекторы P_x на C^d ⊗ C^{nX} такие, что
    Tr[P_x (ρ ⊗ |0⟩⟨0|)] = Tr[E_x ρ]. Изометрия V|ψ⟩ = Σ_x (√E_x|ψ⟩)|x⟩.
    """
    n_out, d, _ = povm_setting.shape
    roots = [la.psd_sqrt(e) for e in povm_setting]
    # столбцы V индексируются i ∈ D, строки — (i', x) в порядке D ⊗ K
    V = np.zeros((d * n_out, d), dtype=np.complex128)
    for x, r in enumerate(roots):
        V[x::n_out, :] = r
    # U|i⟩|0⟩ = V|i⟩, остальные столбцы — дополнение
    comp = _complete_isometry(V)
    U = np.zeros((d * n_out, d * n_out), dtype=np.complex128)
    zero_cols = [i * n_out for i in range(d)]
    other_cols = [c for c in range(d * n_out) if c not in set(zero_cols)]
    U[:, zero_cols] = comp[:, :d]
    U[:, other_cols] = comp[:, d:]
    out = np.empty((n_out, d * n_out, d * n_out), dtype=np.complex128)
    for x in range(n_out):
        kx = np.zeros((n_out, n_out))
        kx[x, x] = 1.0
        out[x] = la.hermitize(la.dag(U) @ np.kron(np.eye(d), kx) @ U)
    return out


def projectivize(s: Strategy, *, max_dim: Optional[int] = None) -> Strategy:
    """
    Дилатация Наймарка для Алисы: D' = D ⊗ K_1 ⊗ … ⊗ K_nA, K_a = C^{nX},
    анциллы в |0⟩. Боб не трогается; корреляция сохраняется.
    """
    nA, nX, dD, dE = s.alice.n_settings, s.alice.n_outcomes, s.dD, s.dE
    dD_new = dD * nX ** nA
    la.check_dim(dD_new * dE, max_dim, "projectivize")

    dims = [dD] + [nX] * nA
    elements = np.empty((nA, nX, dD_new, dD_new), dtype=np.complex128)
    for a in range(nA):
        proj = naimark_projectors(s.alice.elements[a])
        for x in range(nX):
            elements[a, x] = la.embed(proj[x], dims, [0, 1 + a])

    # W|i⟩|j⟩ = |i⟩|0…0⟩|j⟩
    n_anc = nX ** nA
    W = np.zeros((dD * n_anc * dE, dD * dE), dtype=np.complex128)
    for i in range(dD):
        for j in range(dE):
            W[(i * n_anc) * dE + j, i * dE + j] = 1.0
    gamma = la.hermitize(W @ s.gamma @ la.dag(W))

    log.debug("projectivize %s: dD %d -> %d", s.name or "?", dD, dD_new)
    return Strategy(
        alice=PovmFamily(elements),
        bob=s.bob,
        gamma=gamma,
        name=f"{s.name}+naimark" if s.name else "naimark",
        meta={**s.meta, "dilated_from_dD": dD},
    )


# ─────────────────────────────────────────────────────────────────────────────
# Конструкторы
# ─────────────────────────────────────────────────────────────────────────────
def basis_projectors(theta: float) -> np.ndarray:
    """Проекторы на cos θ|0⟩ + sin θ|1⟩ (исход 0) и его ортодополнение (исход 1)."""
    v0 = np.array([math.cos(theta), math.sin(theta)])
    v1 = np.array([-math.sin(theta), math.cos(theta)])
    return np.stack([la.ket_projector(v0), la.ket_projector(v1)])


def phi_plus() -> np.ndarray:
    ket = np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2.0)
    return la.ket_projector(ket)


def chsh_optimal_strategy() -> Strategy:
    alice = PovmFamily(np.stack([basis_projectors(0.0), basis_projectors(math.pi / 4)]))
    bob = PovmFamily(np.stack([basis_projectors(math.pi / 8), basis_projectors(-math.pi / 8)]))
    return Strategy(alice=alice, bob=bob, gamma=phi_plus(), name="chsh_optimal")


def _shift_projectors(n_settings: int, n_out: int, outputs: Sequence[int]) -> np.ndarray:
    # на |0⟩ проектор |x − f(a) mod n⟩ даёт исход f(a)
    el = np.zeros((n_settings, n_out, n_out, n_out), dtype=np.complex128)
    for s in range(n_settings):
        for x in range(n_out):
            k = (x - int(outputs[s])) % n_out
            el[s, x, k, k] = 1.0
    return el


def deterministic_strategy(f: Sequence[int], g: Sequence[int], nX: int, nY: int) -> Strategy:
    """γ = |00⟩⟨00|, проективные измерения в вычислительном базисе."""
    alice = PovmFamily(_shift_projectors(len(f), nX, f))
    bob = PovmFamily(_shift_projectors(len(g), nY, g))
    gamma = np.zeros((nX * nY, nX * nY), dtype=np.complex128)
    gamma[0, 0] = 1.0
    return Strategy(alice, bob, gamma, name="deterministic", meta={"alice": tuple(f), "bob": tuple(g)})


def coin_strategy(nA: int, nB: int, nX: int, nY: int, dD: int = 2, dE: int = 2) -> Strategy:
    """Алиса выдаёт равномерный случайный x (R_a^x = I/nX), Боб — детерминированно 0."""
    alice = PovmFamily(np.tile(np.eye(dD)[None, None] / nX, (nA, nX, 1, 1)))
    bob_el = np.zeros((nB, nY, dE, dE), dtype=np.complex128)
    bob_el[:, 0] = np.eye(dE)
    rho_d = np.eye(dD) / dD
    rho_e = np.zeros((dE, dE))
    rho_e[0, 0] = 1.0
    return Strategy(alice, PovmFamily(bob_el), np.kron(rho_d, rho_e), name="alice_coin")


def povm_residuals(s: Strategy) -> dict:
    """Невязки полноты/положительности — печатаются при загрузке файла."""
    return {
        "alice_completeness": s.alice.completeness_residual(),
        "alice_positivity": s.alice.positivity_residual(),
        "bob_completeness": s.bob.completeness_residual(),
        "bob_positivity": s.bob.positivity_residual(),
        "alice_projective": s.alice.is_projective,
        "bob_projective": s.bob.is_projective,
    }


def check_budget(s: Strategy, extra: int = 1, *, max_dim: Optional[int] = None) -> None:
    d = s.dD * s.dE * extra
    try:
        la.check_dim(d, max_dim, s.name or "strategy")
    except SizingError:
        log.warning("strategy %s exceeds dimension budget (%d)", s.name or "?", d)
        raise
