# app/quantum/discrimination.py
"""
Различение субнормированных состояний с минимальной ошибкой:

    Dist{ρ_i} = max_{POVM {T_i}} Σ_i Tr(T_i ρ_i).

n = 2 — замкнутая форма Хелстрома; n ≥ 3 — итерация неподвижной точки
T_i ← L^{-1/2} ρ_i T_i ρ_i L^{-1/2}, L = Σ_j ρ_j T_j ρ_j, стартующая с PGM.
Любой результат сопровождается двойственным сертификатом Y (Y ≥ ρ_i),
так что Tr Y — гарантированная верхняя оценка.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from app.core.config import settings
from app.core.errors import DegenerateInstanceError, ShapeError
from app.quantum import linalg as la

log = logging.getLogger("discrimination")

# операторы со следом не больше этого считаются нулевыми и в решатель не идут
ZERO_TRACE = 1e-13
DUAL_TOL = 1e-8
# как часто (в итерациях) считать двойственный зазор
_GAP_EVERY = 10


@dataclass
class DiscriminationInstance:
    states: np.ndarray  # (n, d, d)

    def __post_init__(self) -> None:
        st = np.asarray(self.states, dtype=np.complex128)
        if st.ndim == 2:
            st = st[None]
        if st.ndim != 3 or st.shape[0] < 1 or st.shape[1] != st.shape[2]:
            raise ShapeError(f"instance: ожидается n×d×d, получено shape={st.shape}")
        self.states = np.stack([la.ensure_psd(s, f"state[{i}]") for i, s in enumerate(st)])

    @classmethod
    def of(cls, states: Sequence) -> "DiscriminationInstance":
        return cls(np.stack([np.asarray(s, dtype=np.complex128) for s in states]))

    @property
    def n(self) -> int:
        return int(self.states.shape[0])

    @property
    def dim(self) -> int:
        return int(self.states.shape[1])

    @property
    def traces(self) -> np.ndarray:
        return np.real(np.einsum("nii->n", self.states))

    @property
    def total_trace(self) -> float:
        return float(self.traces.sum())


@dataclass
class DiscriminationResult:
    value: float
    povm: np.ndarray              # (n, d, d)
    dual_certificate: np.ndarray  # (d, d)
    primal_dual_gap: float
    certified: bool = True
    method: str = ""
    iterations: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def upper_bound(self) -> float:
        return float(np.trace(self.dual_certificate).real)


class DualCheck(NamedTuple):
    ok: bool
    violation: float


class PgmResult(NamedTuple):
    value: float
    povm: np.ndarray


# ─────────────────────────────────────────────────────────────────────────────
# Вспомогательное
# ─────────────────────────────────────────────────────────────────────────────
def _primal(states: np.ndarray, povm: np.ndarray) -> float:
    return float(np.real(np.einsum("nij,nji->", povm, states)))


def _dual_violation(states: np.ndarray, y: np.ndarray) -> float:
    worst = 0.0
    for s in states:
        worst = max(worst, -la.min_eigenvalue(y - s))
    return worst


def _inflate(states: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Y + max(0, −λ_min(Y − ρ_i))·I — делает Y допустимым; прибавка входит в зазор."""
    y = la.hermitize(y)
    viol = _dual_violation(states, y)
    if viol > 0.0:
        # небольшой запас против округления в λ_min
        y = y + (viol * (1.0 + 1e-12) + 1e-15) * np.eye(y.shape[0])
    return y


def _finalize(
    inst: DiscriminationInstance,
    povm: np.ndarray,
    candidates: List[np.ndarray],
    tol: float,
    *,
    method: str,
    iterations: int = 0,
) -> DiscriminationResult:
    value = _primal(inst.states, povm)
    best_y = None
    best_ub = np.inf
    for y in candidates:
        y = _inflate(inst.states, y)
        ub = float(np.trace(y).real)
        if ub < best_ub:
            best_y, best_ub = y, ub
    gap = max(best_ub - value, 0.0)
    certified = gap <= tol * max(1.0, inst.total_trace)
    return DiscriminationResult(
        value=value,
        povm=povm,
        dual_certificate=best_y,
        primal_dual_gap=gap,
        certified=certified,
        method=method,
        iterations=iterations,
    )


def _pgm_povm(states: np.ndarray) -> np.ndarray:
    s = states.sum(axis=0)
    inv, proj = la.psd_inv_sqrt(s)
    povm = np.stack([la.hermitize(inv @ r @ inv) for r in states])
    # остаток вне носителя — исходу 0
    povm[0] = povm[0] + (np.eye(s.shape[0]) - proj)
    return povm


# ─────────────────────────────────────────────────────────────────────────────
# Операции
# ─────────────────────────────────────────────────────────────────────────────
def check_dual(inst: DiscriminationInstance, y) -> DualCheck:
    """y − ρ_i ⪰ 0 для всех i (с допуском 1e-8) ⇒ Tr y ≥ Dist."""
    y = la.ensure_hermitian(y, "dual", tol=1e-8)
    if y.shape[0] != inst.dim:
        raise ShapeError(f"dual: размерность {y.shape[0]} ≠ {inst.dim}")
    viol = _dual_violation(inst.states, y)
    return DualCheck(viol <= DUAL_TOL, viol)


def pgm_lower_bound(inst: DiscriminationInstance) -> PgmResult:
    if inst.total_trace <= ZERO_TRACE:
        raise DegenerateInstanceError("pgm: все операторы нулевые")
    povm = _pgm_povm(inst.states)
    return PgmResult(_primal(inst.states, povm), povm)


def _helstrom(inst: DiscriminationInstance, tol: float) -> DiscriminationResult:
    r1, r2 = inst.states
    p_plus, _ = la.positive_part(r1 - r2)
    povm = np.stack([p_plus, la.hermitize(np.eye(inst.dim) - p_plus)])
    # Y = ρ2 + (ρ1 − ρ2)_+ = (ρ1 + ρ2 + |ρ1 − ρ2|)/2
    y = r2 + p_plus @ (r1 - r2) @ p_plus
    return _finalize(inst, povm, [y], tol, method="helstrom")


def _fixed_point(inst: DiscriminationInstance, tol: float, max_iters: int) -> DiscriminationResult:
    states = inst.states
    d = inst.dim
    eye = np.eye(d)
    povm = _pgm_povm(states)
    best = None
    it = 0
    for it in range(1, max_iters + 1):
        L = la.hermitize((states @ povm @ states).sum(axis=0))
        inv, proj = la.psd_inv_sqrt(L)
        if it % _GAP_EVERY == 1 or it == max_iters:
            # сертификаты по текущему T: Σ T_i ρ_i (симм.) и L^{1/2}
            y1 = la.hermitize(np.einsum("nij,njk->ik", povm, states))
            y2 = la.psd_sqrt(L)
            res = _finalize(inst, povm, [y1, y2], tol, method="fixed_point", iterations=it)
            if best is None or res.primal_dual_gap < best.primal_dual_gap:
                best = res
            log.debug("fixed_point it=%d value=%.12f gap=%.3e", it, res.value, res.primal_dual_gap)
            if res.certified:
                return res
        new = inv[None] @ states @ povm @ states @ inv[None]
        new = (new + np.conj(np.swapaxes(new, -1, -2))) / 2
        new[0] = new[0] + (eye - proj)
        povm = new
    assert best is not None
    return best


def dist(
    inst: DiscriminationInstance,
    tol: Optional[float] = None,
    *,
    max_iters: Optional[int] = None,
    method: str = "auto",
) -> DiscriminationResult:
    """
    method: "auto" (n=2 → helstrom, иначе fixed_point), "helstrom", "fixed_point".
    Если зазор не достиг tol·max(1, Σ Tr ρ_i) — результат с certified=False.
    """
    tol = float(settings.discrimination["tol"]) if tol is None else float(tol)
    if tol <= 0:
        raise ValueError(f"dist: tol должен быть > 0 (получено {tol})")
    max_iters = int(settings.discrimination["max_iters"]) if max_iters is None else int(max_iters)

    traces = inst.traces
    live = [i for i in range(inst.n) if traces[i] > ZERO_TRACE]
    d = inst.dim

    if not live:
        povm = np.zeros((inst.n, d, d), dtype=np.complex128)
        povm[0] = np.eye(d)
        return _finalize(inst, povm, [np.zeros((d, d))], tol, method="trivial")

    # нулевые состояния сохраняем в ответе с элементом POVM = 0
    sub = DiscriminationInstance(inst.states[live]) if len(live) < inst.n else inst
    if sub.n == 1:
        res = _finalize(sub, np.eye(d)[None].astype(np.complex128), [sub.states[0]], tol, method="single")
    elif method == "helstrom" or (method == "auto" and sub.n == 2):
        if sub.n != 2:
            raise ShapeError(f"helstrom: нужно ровно 2 ненулевых состояния, получено {sub.n}")
        res = _helstrom(sub, tol)
    elif method in ("auto", "fixed_point"):
        res = _fixed_point(sub, tol, max_iters)
    else:
        raise ValueError(f"dist: неизвестный метод {method!r}")

    if sub is not inst:
        povm = np.zeros((inst.n, d, d), dtype=np.complex128)
        povm[live] = res.povm
        res = _finalize(inst, povm, [res.dual_certificate], tol, method=res.method, iterations=res.iterations)

    if not res.certified:
        log.warning(
            "dist not certified after %d iterations: value=%.9f gap=%.3e (tol %.1e)",
            res.iterations, res.value, res.primal_dual_gap, tol,
        )
    return res
