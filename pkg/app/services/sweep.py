# app/services/sweep.py
"""
Рандомизированные проверки неравенств на сериях экземпляров.

Использование:
  from app.services.sweep import run_sweep
  summary = run_sweep("disturbance", trials=1000, seed=7)

Примечания:
- Серия детерминирована по seed: один numpy.random.Generator на всю серию.
- margin = (правая часть × rhs_scale + допуск) − левая часть; < 0 — контрпример.
- Каждый контрпример пишется отдельным JSON в out_dir.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from app.core.config import settings
from app.core.jsonio import encode_matrix, strategy_to_dict, write_json
from app.quantum import instances
from app.quantum.certify import declassicalize, measurement_disturbance, theorem_gap_check
from app.quantum.games import chsh, classical_value, score

_log = logging.getLogger("sweep")

CHECKS = ("disturbance", "classical", "declassical", "theorem", "weighted")


@dataclass
class SweepSummary:
    check: str
    trials: int
    seed: int
    rhs_scale: float
    passed: int = 0
    failed: int = 0
    worst_margin: Optional[float] = None
    worst_trial: Optional[int] = None
    counterexamples: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "check": self.check,
            "trials": self.trials,
            "seed": self.seed,
            "rhs_scale": self.rhs_scale,
            "passed": self.passed,
            "failed": self.failed,
            "worst_margin": self.worst_margin,
            "worst_trial": self.worst_trial,
            "counterexamples": list(self.counterexamples),
            "ok": self.ok,
        }


# trial -> (margin, данные для сериализации)
Trial = Callable[[np.random.Generator, Tuple[int, int], float], Tuple[float, Dict[str, Any]]]


def _trial_disturbance(rng, dims, rhs_scale):
    lam, f = instances.random_disturbance_instance(rng, max_local_dim=dims[1])
    r = measurement_disturbance(lam, f, rhs_scale=rhs_scale)
    margin = rhs_scale * r.bound + settings.tol("check_tol") - r.disturbance
    return margin, {
        "lambda": encode_matrix(lam),
        "F": [encode_matrix(x) for x in f],
        "delta": r.delta,
        "disturbance": r.disturbance,
        "bound": r.bound,
    }


def _trial_classical_register(rng, dims, rhs_scale):
    lam, f, dc = instances.random_classical_register_instance(rng, max_local_dim=min(dims[1], 3))
    r = measurement_disturbance(lam, f, register_dim=dc, rhs_scale=rhs_scale)
    margin = rhs_scale * r.bound + settings.tol("check_tol") - r.disturbance
    return margin, {
        "lambda": encode_matrix(lam),
        "F": [encode_matrix(x) for x in f],
        "register_dim": dc,
        "delta": r.delta,
        "disturbance": r.disturbance,
        "bound": r.bound,
    }


def _random_chsh_strategy(rng, dims, projective: bool):
    lo, hi = dims
    dD = int(rng.integers(lo, hi + 1))
    dE = int(rng.integers(lo, hi + 1))
    return instances.random_strategy(2, 2, 2, 2, dD, dE, rng, projective=projective,
                                     pure=bool(rng.integers(0, 2)))


def _trial_declassical(rng, dims, rhs_scale):
    g = chsh()
    s = _random_chsh_strategy(rng, dims, projective=True)
    r = declassicalize(g, s, rhs_scale=rhs_scale)
    omega = classical_value(g).omega_c
    pbar_score = score(g, r.pbar)
    margin = rhs_scale * r.bound + settings.tol("check_tol") - r.distance
    # p̄ обязан быть классическим
    margin = min(margin, omega + 1e-9 - pbar_score)
    return margin, {
        "strategy": strategy_to_dict(s),
        "distance": r.distance,
        "bound": r.bound,
        "delta": r.delta,
        "pbar_score": pbar_score,
        "omega_c": omega,
    }


def _trial_theorem(rng, dims, rhs_scale):
    g = chsh()
    s = _random_chsh_strategy(rng, dims, projective=bool(rng.integers(0, 2)))
    rep = theorem_gap_check(g, s, run_declassical=False, rhs_scale=rhs_scale)
    margin = rhs_scale * rep.theorem_rhs + settings.tol("check_tol") - (rep.score - rep.omega_c)
    return margin, {"strategy": strategy_to_dict(s), "report": rep.to_dict()}


def _trial_weighted(rng, dims, rhs_scale):
    g = chsh()
    s = _random_chsh_strategy(rng, dims, projective=True)
    rep = theorem_gap_check(g, s, rhs_scale=rhs_scale)
    if not rep.declassical_ran:
        # вне бюджета размерности — проверять нечего
        return 0.0, {"skipped": True}
    margin = rhs_scale * rep.weighted_bound + settings.tol("check_tol") - rep.weighted_distance
    return margin, {"strategy": strategy_to_dict(s), "report": rep.to_dict()}


_TRIALS: Dict[str, Trial] = {
    "disturbance": _trial_disturbance,
    "classical": _trial_classical_register,
    "declassical": _trial_declassical,
    "theorem": _trial_theorem,
    "weighted": _trial_weighted,
}


def parse_dims(spec: str) -> Tuple[int, int]:
    """'2:4' → (2, 4); '3' → (2, 3)."""
    try:
        if ":" in spec:
            lo, hi = (int(v) for v in spec.split(":", 1))
        else:
            lo, hi = 2, int(spec)
    except ValueError as e:
        raise ValueError(f"--dims: ожидается MIN:MAX или MAX, получено {spec!r}") from e
    if lo < 1 or hi < lo:
        raise ValueError(f"--dims: некорректный диапазон {lo}:{hi}")
    return lo, hi


def run_sweep(
    check: str,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    *,
    dims: Optional[Tuple[int, int]] = None,
    rhs_scale: float = 1.0,
    out_dir: Optional[str | Path] = None,
) -> SweepSummary:
    if check not in _TRIALS:
        raise ValueError(f"неизвестная проверка {check!r}; допустимо {CHECKS}")
    cfg = settings.sweep
    trials = int(cfg["trials"]) if trials is None else int(trials)
    seed = int(cfg["seed"]) if seed is None else int(seed)
    out_dir = Path(cfg["counterexample_dir"] if out_dir is None else out_dir)
    dims = (2, int(cfg["max_local_dim"])) if dims is None else dims

    summary = SweepSummary(check=check, trials=trials, seed=seed, rhs_scale=rhs_scale)
    if trials <= 0:
        _log.warning("sweep %s: 0 trials, nothing checked", check)
        return summary

    rng = np.random.default_rng(seed)
    trial_fn = _TRIALS[check]
    for t in range(trials):
        margin, data = trial_fn(rng, dims, rhs_scale)
        if summary.worst_margin is None or margin < summary.worst_margin:
            summary.worst_margin = float(margin)
            summary.worst_trial = t
        if margin >= 0:
            summary.passed += 1
            continue
        summary.failed += 1
        path = out_dir / f"{check}-seed{seed}-trial{t}.json"
        write_json(path, {"check": check, "seed": seed, "trial": t, "rhs_scale": rhs_scale,
                          "margin": float(margin), "instance": data})
        summary.counterexamples.append(str(path))
        _log.warning("sweep %s: counterexample at trial %d (margin %.3e) -> %s", check, t, margin, path)

    _log.info("sweep %s: %d/%d passed, worst margin %.3e", check, summary.passed, trials,
              summary.worst_margin if summary.worst_margin is not None else float("nan"))
    return summary
