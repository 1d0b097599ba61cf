# app/quantum/games.py
"""
Конечные нелокальные игры G = (q, H) и корреляции p[a, b, x, y].

Порядок осей везде один и тот же: (a, b, x, y) — входы Алисы и Боба,
затем их выходы. Входной алфавит Алисы упорядочен так, как задан в файле;
от этого порядка зависит конструкция declassicalize.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple

import numpy as np

from app.core.config import settings
from app.core.errors import CompleteSupportError, EnumerationError, ShapeError

log = logging.getLogger("games")

# блок перебора функций Алисы за один векторизованный шаг
_ENUM_CHUNK = 1 << 15


@dataclass
class Game:
    q: np.ndarray   # shape (nA, nB)
    H: np.ndarray   # shape (nA, nB, nX, nY), значения в [0, 1]
    name: str = ""

    def __post_init__(self) -> None:
        self.q = np.asarray(self.q, dtype=float)
        self.H = np.asarray(self.H, dtype=float)
        if self.q.ndim != 2:
            raise ShapeError(f"q: ожидается массив nA×nB, получено shape={self.q.shape}")
        if self.H.ndim != 4 or self.H.shape[:2] != self.q.shape:
            raise ShapeError(f"H: ожидается nA×nB×nX×nY с nA×nB={self.q.shape}, получено {self.H.shape}")
        if min(self.H.shape) < 1:
            raise ShapeError("алфавиты должны быть непустыми")
        if not (np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.H))):
            raise ShapeError("q/H: есть NaN/Inf")
        if np.any(self.q < 0):
            raise ShapeError("q: отрицательные вероятности")
        if abs(float(self.q.sum()) - 1.0) > 1e-12:
            raise ShapeError(f"q: сумма {float(self.q.sum())!r} ≠ 1")
        if np.any(self.H < 0) or np.any(self.H > 1):
            raise ShapeError("H: значения должны лежать в [0, 1]")

    # ───────── размеры ─────────
    @property
    def shape(self) -> Tuple[int, int, int, int]:
        return tuple(int(s) for s in self.H.shape)  # type: ignore[return-value]

    @property
    def nA(self) -> int:
        return self.shape[0]

    @property
    def nB(self) -> int:
        return self.shape[1]

    @property
    def nX(self) -> int:
        return self.shape[2]

    @property
    def nY(self) -> int:
        return self.shape[3]

    @property
    def complete_support(self) -> bool:
        return bool(np.min(self.q) > 0)

    # ───────── маргиналы распределения входов ─────────
    @property
    def q_alice(self) -> np.ndarray:
        return self.q.sum(axis=1)

    @property
    def q_bob(self) -> np.ndarray:
        return self.q.sum(axis=0)

    def conditional_a_given_b(self) -> np.ndarray:
        """P_q(a|b) = q(a,b)/q(b); требует полного носителя."""
        self.require_complete_support()
        return self.q / self.q_bob[None, :]

    def require_complete_support(self) -> None:
        if not self.complete_support:
            a, b = np.unravel_index(int(np.argmin(self.q)), self.q.shape)
            raise CompleteSupportError(f"игра {self.name or '?'}: q({a},{b}) = 0, нужен полный носитель")

    @classmethod
    def uniform(cls, H, name: str = "") -> "Game":
        H = np.asarray(H, dtype=float)
        nA, nB = H.shape[:2]
        return cls(q=np.full((nA, nB), 1.0 / (nA * nB)), H=H, name=name)


@dataclass
class Correlation:
    p: np.ndarray   # shape (nA, nB, nX, nY)
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.p = np.asarray(self.p, dtype=float)
        if self.p.ndim != 4 or min(self.p.shape) < 1:
            raise ShapeError(f"p: ожидается nA×nB×nX×nY, получено shape={self.p.shape}")
        if not np.all(np.isfinite(self.p)):
            raise ShapeError("p: есть NaN/Inf")
        if np.any(self.p < -1e-12):
            raise ShapeError(f"p: отрицательные элементы (min={float(self.p.min()):.3e})")
        sums = self.p.sum(axis=(2, 3))
        bad = np.abs(sums - 1.0)
        if np.any(bad > 1e-9):
            a, b = np.unravel_index(int(np.argmax(bad)), bad.shape)
            raise ShapeError(f"p: Σ_xy p[{a},{b}] = {float(sums[a, b])!r} ≠ 1")

    @property
    def shape(self) -> Tuple[int, int, int, int]:
        return tuple(int(s) for s in self.p.shape)  # type: ignore[return-value]


class SignalingCheck(NamedTuple):
    ok: bool
    violation: float


class ClassicalValue(NamedTuple):
    omega_c: float
    alice: Tuple[int, ...]   # f: a -> x
    bob: Tuple[int, ...]     # g: b -> y


def _check_match(g: Game, c: Correlation) -> None:
    if g.shape != c.shape:
        raise ShapeError(f"алфавиты не совпадают: игра {g.shape}, корреляция {c.shape}")


# ─────────────────────────────────────────────────────────────────────────────
# Операции
# ─────────────────────────────────────────────────────────────────────────────
def score(g: Game, c: Correlation) -> float:
    _check_match(g, c)
    return float(np.einsum("ab,abxy,abxy->", g.q, g.H, c.p))


def marginals(c: Correlation) -> Tuple[np.ndarray, np.ndarray]:
    """(p_a^x, p_b^y), усреднённые по входу другого игрока."""
    alice = c.p.sum(axis=3).mean(axis=1)   # (a, x)
    bob = c.p.sum(axis=2).mean(axis=0)     # (b, y)
    return alice, bob


def is_nonsignaling(c: Correlation, tol: Optional[float] = None) -> SignalingCheck:
    tol = settings.tol("nonsignaling_tol") if tol is None else tol
    alice = c.p.sum(axis=3)   # (a, b, x)
    bob = c.p.sum(axis=2)     # (a, b, y)
    # max |Σ_y p_ab^xy − Σ_y p_ab'^xy| = размах по оси b
    v_alice = float(np.max(alice.max(axis=1) - alice.min(axis=1)))
    v_bob = float(np.max(bob.max(axis=0) - bob.min(axis=0)))
    violation = max(v_alice, v_bob)
    return SignalingCheck(violation <= tol, violation)


def deterministic_correlation(f, g_map, nX: int, nY: int) -> Correlation:
    f = tuple(int(x) for x in f)
    g_map = tuple(int(y) for y in g_map)
    p = np.zeros((len(f), len(g_map), nX, nY))
    for a, x in enumerate(f):
        for b, y in enumerate(g_map):
            p[a, b, x, y] = 1.0
    return Correlation(p, name="deterministic", meta={"alice": f, "bob": g_map})


def classical_value(g: Game, *, budget: Optional[int] = None) -> ClassicalValue:
    """
    Точный максимум score по детерминированным парам (f: A→X, g: B→Y).
    При фиксированном f оптимальное g выбирается поточечно по b,
    поэтому перебираются только функции Алисы (блоками).
    Ничьи — лексикографически наименьшая пара (f, g).
    """
    budget = int(settings.games["enumeration_budget"]) if budget is None else int(budget)
    nA, nB, nX, nY = g.shape
    total = nX ** nA * nY ** nB
    if total > budget:
        raise EnumerationError(
            f"перебор {nX}^{nA}·{nY}^{nB} = {total} превышает бюджет {budget}; уменьшите алфавиты"
        )

    w = g.q[:, :, None, None] * g.H   # (a, b, x, y)
    a_idx = np.arange(nA)
    best_val = -np.inf
    best_f: Tuple[int, ...] = ()
    best_g: Tuple[int, ...] = ()

    it = itertools.product(range(nX), repeat=nA)
    n_f = nX ** nA
    done = 0
    while done < n_f:
        block = np.array(list(itertools.islice(it, _ENUM_CHUNK)), dtype=np.intp).reshape(-1, nA)
        done += block.shape[0]
        # t[k, b, y] = Σ_a w[a, b, f_k(a), y]
        t = w[a_idx[None, :], :, block, :].sum(axis=1)
        per_b = t.max(axis=2)               # (k, b)
        vals = per_b.sum(axis=1)            # (k,)
        k = int(np.argmax(vals))            # первый максимум — наименьший f в блоке
        if vals[k] > best_val + 1e-14:
            best_val = float(vals[k])
            best_f = tuple(int(x) for x in block[k])
            best_g = tuple(int(y) for y in np.argmax(t[k], axis=1))

    log.debug("classical_value %s: omega_c=%.12f f=%s g=%s", g.name or "?", best_val, best_f, best_g)
    return ClassicalValue(best_val, best_f, best_g)


# ─────────────────────────────────────────────────────────────────────────────
# Канонические примеры
# ─────────────────────────────────────────────────────────────────────────────
def chsh() -> Game:
    H = np.zeros((2, 2, 2, 2))
    for a, b, x, y in itertools.product(range(2), repeat=4):
        H[a, b, x, y] = 1.0 if (x ^ y) == (a & b) else 0.0
    return Game.uniform(H, name="chsh")


def pr_box() -> Correlation:
    p = np.zeros((2, 2, 2, 2))
    for a, b, x, y in itertools.product(range(2), repeat=4):
        if (x ^ y) == (a & b):
            p[a, b, x, y] = 0.5
    return Correlation(p, name="pr_box")


def constant_game(nA: int, nB: int, nX: int, nY: int, value: float) -> Game:
    return Game.uniform(np.full((nA, nB, nX, nY), float(value)), name=f"constant_{value:g}")
