# app/quantum/certify.py
"""
Сертифицируемые величины локальной случайности и проверки неравенств:

  - c_g, guess_bound — константа игры и обратная оценка вероятности угадывания;
  - guessing_epsilon / uniform_delta — ε и δ через Dist на состояниях Боба;
  - measurement_disturbance — возмущение проективным измерением против 2√δ + δ;
  - declassicalize — копирование исходов Алисы в классические регистры;
  - theorem_gap_check — сводный отчёт.

Все проверки «граница выполняется» добавляют к правой части бюджет зазоров
решателя Dist и допуск check_tol. Параметр rhs_scale (по умолчанию 1.0)
масштабирует правую часть; меньше единицы — только для мутационного самотеста.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, NamedTuple, Optional, Sequence

import numpy as np

from app.core.config import settings
from app.core.errors import NotProjectiveError, ShapeError, SizingError
from app.quantum import linalg as la
from app.quantum.discrimination import DiscriminationInstance, dist
from app.quantum.games import Correlation, Game, classical_value, is_nonsignaling, score
from app.quantum.strategies import (
    Strategy,
    achieved_correlation,
    projectivize,
    second_player_states,
)

log = logging.getLogger("certify")

Channel = Callable[[np.ndarray], np.ndarray]


# ─────────────────────────────────────────────────────────────────────────────
# Типы результатов
# ─────────────────────────────────────────────────────────────────────────────
@dataclass
class GuessingAnalysis:
    epsilon: float
    per_input_delta: np.ndarray   # (nA, nB): δ_ab = 1 − Σ_y Dist{ρ_ab^xy}_x
    dist_gap_budget: float        # Σ_ab q(a,b) Σ_y зазор решателя
    dist_values: np.ndarray       # (nA, nB, nY)
    dist_gaps: np.ndarray         # (nA, nB, nY)
    certified: bool = True


class DisturbanceCheck(NamedTuple):
    delta: float
    disturbance: float
    bound: float
    bound_holds: bool
    gap: float


class DeclassicalResult(NamedTuple):
    pbar: Correlation
    distance: float
    bound: float
    bound_holds: bool
    delta: float
    gap_budget: float


@dataclass
class CertificationReport:
    game: str
    strategy: str
    score: float
    omega_c: float
    c_g: float
    epsilon: float
    gap_budget: float
    theorem_rhs: float
    theorem_bound_holds: bool
    guess_bound: float
    fg_mode: str
    per_input_delta: list
    dist_certified: bool
    nonsignaling_violation: float
    # declassicalize (None, если не запускался — например, превышен бюджет)
    declassical_ran: bool = False
    declassical_distance: Optional[float] = None
    declassical_bound: Optional[float] = None
    declassical_bound_holds: Optional[bool] = None
    declassical_score: Optional[float] = None
    pbar_classical_holds: Optional[bool] = None
    weighted_distance: Optional[float] = None
    weighted_bound: Optional[float] = None
    weighted_bound_holds: Optional[bool] = None
    score_shift: Optional[float] = None
    score_shift_holds: Optional[bool] = None
    pbar: Optional[list] = None
    tolerances: Dict[str, float] = field(default_factory=dict)
    seed: Optional[int] = None

    @property
    def all_hold(self) -> bool:
        checks = [self.theorem_bound_holds]
        if self.declassical_ran:
            checks += [
                bool(self.declassical_bound_holds),
                bool(self.pbar_classical_holds),
                bool(self.weighted_bound_holds),
                bool(self.score_shift_holds),
            ]
        return all(checks)

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["all_hold"] = self.all_hold
        return d


# ─────────────────────────────────────────────────────────────────────────────
# Константы игры
# ─────────────────────────────────────────────────────────────────────────────
def c_g(g: Game) -> float:
    """C_G = (3/2)·√(Σ_ab q(b) / P_q(a|b)), P_q(a|b) = q(a,b)/q(b)."""
    g.require_complete_support()
    cond = g.conditional_a_given_b()
    return 1.5 * math.sqrt(float(np.sum(g.q_bob[None, :] / cond)))


def guess_bound(g: Game, w: float, *, mode: Optional[str] = None, omega_c: Optional[float] = None) -> float:
    """
    f_G(w): 1, если w < ω_c; иначе 1 − ((w − ω_c)/C_G)² (mode="theorem")
    или буквальное 1 − (w − ω_c)²/C_G (mode="literal").
    """
    mode = (mode or settings.certify["fg_mode"]).lower()
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"guess_bound: w должно лежать в [0, 1] (получено {w})")
    g.require_complete_support()
    om = classical_value(g).omega_c if omega_c is None else float(omega_c)
    if w < om:
        return 1.0
    cg = c_g(g)
    if mode == "theorem":
        return 1.0 - ((w - om) / cg) ** 2
    if mode == "literal":
        return 1.0 - (w - om) ** 2 / cg
    raise ValueError(f"guess_bound: неизвестный режим {mode!r}")


# ─────────────────────────────────────────────────────────────────────────────
# ε и δ
# ─────────────────────────────────────────────────────────────────────────────
def _check_alphabets(g: Game, s: Strategy) -> None:
    if g.shape != s.shape:
        raise ShapeError(f"алфавиты игры {g.shape} и стратегии {s.shape} не совпадают")


def dist_table(s: Strategy, tol: Optional[float] = None):
    """Dist{ρ_ab^xy | x} и зазоры для всех (a, b, y)."""
    nA, nB, nX, nY = s.shape
    sps = second_player_states(s)
    values = np.zeros((nA, nB, nY))
    gaps = np.zeros((nA, nB, nY))
    certified = True
    for a in range(nA):
        for b in range(nB):
            for y in range(nY):
                res = dist(DiscriminationInstance.of(sps.instance(a, b, y)), tol)
                values[a, b, y] = res.value
                gaps[a, b, y] = res.primal_dual_gap
                certified = certified and res.certified
    return values, gaps, certified


def _analysis(weights: np.ndarray, values: np.ndarray, gaps: np.ndarray, certified: bool) -> GuessingAnalysis:
    delta = 1.0 - values.sum(axis=2)
    eps = 1.0 - float(np.sum(weights * values.sum(axis=2)))
    budget = float(np.sum(weights * gaps.sum(axis=2)))
    return GuessingAnalysis(
        epsilon=eps,
        per_input_delta=delta,
        dist_gap_budget=budget,
        dist_values=values,
        dist_gaps=gaps,
        certified=certified,
    )


def guessing_epsilon(g: Game, s: Strategy, tol: Optional[float] = None) -> GuessingAnalysis:
    """ε = 1 − Σ_ab q(a,b) Σ_y Dist{ρ_ab^xy | x ∈ X}."""
    g.require_complete_support()
    _check_alphabets(g, s)
    values, gaps, certified = dist_table(s, tol)
    res = _analysis(g.q, values, gaps, certified)
    log.debug("guessing_epsilon %s/%s: eps=%.9f budget=%.3e", g.name or "?", s.name or "?",
              res.epsilon, res.dist_gap_budget)
    return res


def uniform_analysis(s: Strategy, tol: Optional[float] = None) -> GuessingAnalysis:
    nA, nB = s.shape[:2]
    values, gaps, certified = dist_table(s, tol)
    return _analysis(np.full((nA, nB), 1.0 / (nA * nB)), values, gaps, certified)


def uniform_delta(s: Strategy, tol: Optional[float] = None) -> float:
    """δ = 1 − (1/|A||B|) Σ_aby Dist{ρ_ab^xy | x ∈ X}."""
    return uniform_analysis(s, tol).epsilon


# ─────────────────────────────────────────────────────────────────────────────
# ε-коммутативность и возмущение измерением
# ─────────────────────────────────────────────────────────────────────────────
def pinching(projectors: Sequence[np.ndarray]) -> Channel:
    """X ↦ Σ_i F_i X F_i."""
    ops = [np.asarray(f, dtype=np.complex128) for f in projectors]

    def channel(x: np.ndarray) -> np.ndarray:
        return sum(f @ x @ f for f in ops)

    return channel


def epsilon_commutativity(channel: Channel, beta) -> float:
    """‖Φ(β) − β‖₁ — наименьшее ε, при котором Φ ε-коммутативен с β."""
    beta = la.ensure_hermitian(beta, "beta")
    return la.trace_norm(la.hermitize(channel(beta) - beta))


def copy_out(lam, dims: Sequence[int], register: int) -> np.ndarray:
    """
    Копирование регистра по стандартному базису |c⟩ ↦ |c c̄⟩;
    копия C̄ добавляется последним фактором.
    """
    lam = la.as_matrix(lam, "lambda")
    dims = [int(d) for d in dims]
    dc = dims[register]
    D = lam.shape[0]
    if math.prod(dims) != D:
        raise ShapeError(f"copy_out: dims={dims} не согласованы с размерностью {D}")
    W = np.zeros((D * dc, D), dtype=np.complex128)
    for c in range(dc):
        proj = np.zeros((dc, dc))
        proj[c, c] = 1.0
        ket = np.zeros((dc, 1))
        ket[c, 0] = 1.0
        W += np.kron(la.embed(proj, dims, [register]), ket)
    return la.hermitize(W @ lam @ la.dag(W))


def is_classical_on(lam, dims: Sequence[int], register: int, tol: float = 1e-9) -> bool:
    """Λ = Σ_k Λ_k ⊗ |k⟩⟨k| на регистре register: недиагональные блоки равны нулю."""
    dims = [int(d) for d in dims]
    dc = dims[register]
    lam = np.asarray(lam, dtype=np.complex128)
    pinched = pinching([la.embed(np.diag(np.eye(dc)[c]), dims, [register]) for c in range(dc)])(lam)
    return float(np.max(np.abs(pinched - lam))) <= tol


def _require_projective(f: np.ndarray, name: str) -> None:
    tol = settings.tol("projective_tol")
    total = f.sum(axis=0)
    if float(np.max(np.abs(total - np.eye(f.shape[1])))) > settings.tol("povm_tol"):
        raise NotProjectiveError(f"{name}: элементы не суммируются в I")
    for i in range(f.shape[0]):
        if not la.is_projector(f[i], tol):
            raise NotProjectiveError(f"{name}: элемент {i} не проектор")


def measurement_disturbance(
    lam,
    f,
    tol: Optional[float] = None,
    *,
    register_dim: int = 1,
    rhs_scale: float = 1.0,
) -> DisturbanceCheck:
    """
    Λ на A ⊗ B (⊗ C при register_dim > 1, классическое на C), {F_i} — проективное на A.
    δ = 1 − Dist{Tr_A((F_i ⊗ I)Λ(F_i ⊗ I))}, возмущение ‖Σ F_i Λ^A F_i − Λ^A‖₁
    (с регистром: F_i ⊗ I_C на Λ^{AC}, угадывает BC совместно).
    """
    lam = la.ensure_density(lam, "lambda")
    f = np.asarray(f, dtype=np.complex128)
    if f.ndim != 3 or f.shape[1] != f.shape[2]:
        raise ShapeError(f"F: ожидается n×dA×dA, получено shape={f.shape}")
    _require_projective(f, "F")
    dA, dC = f.shape[1], int(register_dim)
    D = lam.shape[0]
    if D % (dA * dC):
        raise ShapeError(f"lambda: размерность {D} не делится на dA·dC = {dA * dC}")
    dB = D // (dA * dC)
    dims = [dA, dB, dC]
    if dC > 1 and not is_classical_on(lam, dims, 2):
        raise ShapeError("lambda: состояние не классическое на регистре C")
    check_tol = settings.tol("check_tol")

    induced = []
    for fi in f:
        op = la.embed(fi, dims, [0])
        induced.append(la.partial_trace(op @ lam @ op, dims, keep=[1, 2]))
    res = dist(DiscriminationInstance.of(induced), tol)
    delta = 1.0 - res.value

    lam_ac = la.partial_trace(lam, dims, keep=[0, 2])
    chan = pinching([np.kron(fi, np.eye(dC)) for fi in f])
    disturbance = epsilon_commutativity(chan, lam_ac)

    d_eff = max(delta + res.primal_dual_gap, 0.0)
    bound = 2.0 * math.sqrt(d_eff) + d_eff
    holds = disturbance <= rhs_scale * bound + check_tol
    if not holds:
        log.warning("disturbance bound violated: %.9f > %.9f (delta=%.9f)", disturbance, rhs_scale * bound, delta)
    return DisturbanceCheck(delta, disturbance, bound, holds, res.primal_dual_gap)


# ─────────────────────────────────────────────────────────────────────────────
# Деклассикализация
# ─────────────────────────────────────────────────────────────────────────────
def _declassical_sequential(s: Strategy) -> np.ndarray:
    """p̄ через последовательную дефазировку D: γ_{a+1} = Σ_x (R_a^x⊗I) γ_a (R_a^x⊗I)."""
    nA, nB, nX, nY = s.shape
    dD, dE = s.dD, s.dE
    pbar = np.zeros((nA, nB, nX, nY))
    gam = s.gamma
    for a in range(nA):
        G = gam.reshape(dD, dE, dD, dE)
        pbar[a] = np.real(np.einsum("xki,bylj,ijkl->bxy", s.alice.elements[a], s.bob.elements, G))
        ops = [np.kron(r, np.eye(dE)) for r in s.alice.elements[a]]
        gam = la.hermitize(sum(o @ gam @ o for o in ops))
    return pbar


def _declassical_explicit(s: Strategy, max_dim: Optional[int] = None) -> np.ndarray:
    """
    Явное Λ на V_1 ⊗ … ⊗ V_n ⊗ D ⊗ E: регистры стартуют в |0⟩, Φ_a записывает x в V_a.
    p̄_ab^xy читается из V_a и измерения Боба на E.
    """
    nA, nB, nX, nY = s.shape
    dD, dE = s.dD, s.dE
    dims = [nX] * nA + [dD, dE]
    reg0 = np.zeros((nX, nX))
    reg0[0, 0] = 1.0
    lam = la.tensor_all([reg0] * nA + [s.gamma], max_dim=max_dim)
    for a in range(nA):
        out = np.zeros_like(lam)
        for x in range(nX):
            shift = np.zeros((nX, nX))
            shift[x, 0] = 1.0
            k = la.embed(np.kron(shift, s.alice.elements[a, x]), dims, [a, nA])
            out += k @ lam @ la.dag(k)
        lam = la.hermitize(out)
    pbar = np.zeros((nA, nB, nX, nY))
    for a in range(nA):
        for x in range(nX):
            px = np.zeros((nX, nX))
            px[x, x] = 1.0
            for b in range(nB):
                for y in range(nY):
                    op = la.embed(np.kron(px, s.bob.elements[b, y]), dims, [a, nA + 1])
                    pbar[a, b, x, y] = float(np.real(np.trace(op @ lam)))
    return pbar


def declassicalize(
    g: Game,
    s: Strategy,
    tol: Optional[float] = None,
    *,
    explicit: Optional[bool] = None,
    max_dim: Optional[int] = None,
    rhs_scale: float = 1.0,
    analysis: Optional[GuessingAnalysis] = None,
) -> DeclassicalResult:
    """
    Классическая корреляция p̄ рядом с p: (1/|A||B|) Σ|p − p̄| ≤ √(3δ)·|A|.
    Алиса должна быть проективной (иначе сначала projectivize).
    Порядок копирования — порядок входов Алисы в игре.
    """
    _check_alphabets(g, s)
    if not s.alice.is_projective:
        raise NotProjectiveError("declassicalize: измерения Алисы не проективны; сначала projectivize")
    nA, nB, nX, nY = s.shape
    la.check_dim(nX ** nA * s.dD * s.dE, max_dim, "declassicalize")
    explicit = bool(settings.certify["explicit_declassicalize"]) if explicit is None else explicit

    pbar = _declassical_explicit(s, max_dim) if explicit else _declassical_sequential(s)
    pbar = np.where(np.abs(pbar) < 1e-15, 0.0, pbar)
    pbar_corr = Correlation(pbar, name="pbar")
    p = achieved_correlation(s).p

    ua = uniform_analysis(s, tol) if analysis is None else analysis
    distance = float(np.abs(p - pbar).sum()) / (nA * nB)
    d_eff = max(ua.epsilon + ua.dist_gap_budget, 0.0)
    bound = math.sqrt(3.0 * d_eff) * nA
    holds = distance <= rhs_scale * bound + settings.tol("check_tol")
    if not holds:
        log.warning("declassical bound violated: %.9f > %.9f", distance, rhs_scale * bound)
    return DeclassicalResult(pbar_corr, distance, bound, holds, ua.epsilon, ua.dist_gap_budget)


def weighted_declassical_distance(g: Game, p: Correlation, pbar: Correlation) -> float:
    """Σ_abxy q(a,b)|p − p̄|."""
    return float(np.einsum("ab,abxy->", g.q, np.abs(p.p - pbar.p)))


def score_shift_check(g: Game, p: Correlation, pbar: Correlation) -> tuple[float, bool]:
    """|score(p) − score(p̄)| ≤ ½ Σ q|p − p̄| (H ∈ [0,1])."""
    shift = abs(score(g, p) - score(g, pbar))
    return shift, shift <= 0.5 * weighted_declassical_distance(g, p, pbar) + 1e-12


# ─────────────────────────────────────────────────────────────────────────────
# Сводный отчёт
# ─────────────────────────────────────────────────────────────────────────────
def theorem_gap_check(
    g: Game,
    s: Strategy,
    tol: Optional[float] = None,
    *,
    fg_mode: Optional[str] = None,
    run_declassical: bool = True,
    max_dim: Optional[int] = None,
    rhs_scale: float = 1.0,
    seed: Optional[int] = None,
) -> CertificationReport:
    g.require_complete_support()
    _check_alphabets(g, s)
    check_tol = settings.tol("check_tol")
    fg_mode = (fg_mode or settings.certify["fg_mode"]).lower()

    p = achieved_correlation(s)
    sc = score(g, p)
    omega = classical_value(g).omega_c
    cg = c_g(g)
    ga = guessing_epsilon(g, s, tol)
    eps_eff = max(ga.epsilon + ga.dist_gap_budget, 0.0)
    rhs = cg * math.sqrt(eps_eff)
    holds = sc - omega <= rhs_scale * rhs + check_tol
    if not holds:
        log.warning("theorem bound violated for %s: gap=%.9f rhs=%.9f", s.name or "?", sc - omega, rhs_scale * rhs)

    report = CertificationReport(
        game=g.name,
        strategy=s.name,
        score=sc,
        omega_c=omega,
        c_g=cg,
        epsilon=ga.epsilon,
        gap_budget=ga.dist_gap_budget,
        theorem_rhs=rhs,
        theorem_bound_holds=bool(holds),
        guess_bound=guess_bound(g, min(max(sc, 0.0), 1.0), mode=fg_mode, omega_c=omega),
        fg_mode=fg_mode,
        per_input_delta=ga.per_input_delta.tolist(),
        dist_certified=ga.certified,
        nonsignaling_violation=is_nonsignaling(p).violation,
        tolerances={
            "dist_tol": float(settings.discrimination["tol"]) if tol is None else float(tol),
            "check_tol": check_tol,
            "nonsignaling_tol": settings.tol("nonsignaling_tol"),
        },
        seed=seed,
    )

    if run_declassical:
        try:
            sp = s if s.alice.is_projective else projectivize(s, max_dim=max_dim)
            nA, nB = g.nA, g.nB
            dr = declassicalize(
                g, sp, tol, max_dim=max_dim, rhs_scale=rhs_scale,
                # δ_ab сохраняются при проективизации; равномерное усреднение берём из таблицы
                analysis=_analysis(np.full((nA, nB), 1.0 / (nA * nB)), ga.dist_values, ga.dist_gaps, ga.certified),
            )
        except SizingError as e:
            log.warning("declassicalize skipped: %s", e)
            return report

        wd = weighted_declassical_distance(g, p, dr.pbar)
        wb = 2.0 * cg * math.sqrt(eps_eff)
        shift, shift_ok = score_shift_check(g, p, dr.pbar)
        pbar_score = score(g, dr.pbar)
        report.declassical_ran = True
        report.declassical_distance = dr.distance
        report.declassical_bound = dr.bound
        report.declassical_bound_holds = bool(dr.bound_holds)
        report.declassical_score = pbar_score
        report.pbar_classical_holds = bool(pbar_score <= omega + 1e-9)
        report.weighted_distance = wd
        report.weighted_bound = wb
        report.weighted_bound_holds = bool(wd <= rhs_scale * wb + check_tol)
        report.score_shift = shift
        report.score_shift_holds = bool(shift_ok)
        report.pbar = dr.pbar.p.tolist()
    return report
