# app/cli/main.py
from __future__ import annotations

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from app.core.config import settings
from app.core.errors import EXIT_BOUND_FAILED, EXIT_OK, EXIT_PARSE, NumericalError
from app.core import jsonio
from app.quantum.certify import declassicalize, theorem_gap_check
from app.quantum.discrimination import ZERO_TRACE, dist, pgm_lower_bound
from app.quantum.games import classical_value, is_nonsignaling, score
from app.quantum.strategies import check_budget, povm_residuals, projectivize
from app.services.sweep import CHECKS, parse_dims, run_sweep

log = logging.getLogger("cli")

LOG_FORMAT = "%(asctime)s.%(msecs)03d | +%(relativeCreated)dms | %(levelname)s | %(name)s | %(message)s"


def setup_logging(level: str) -> None:
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO),
                        format=LOG_FORMAT,
                        datefmt="%Y-%m-%d %H:%M:%S",
                        stream=sys.stderr,
                        force=True,
                        )


def _emit(obj: Dict[str, Any], out: Optional[str]) -> None:
    if out:
        jsonio.write_json(out, obj)
        log.info("written %s", out)
    else:
        sys.stdout.write(jsonio.dumps(obj))


# ─────────────────────────────────────────────────────────────────────────────
# Команды
# ─────────────────────────────────────────────────────────────────────────────
def cmd_classical_value(args: argparse.Namespace) -> int:
    g = jsonio.load_game(args.game)
    cv = classical_value(g, budget=args.budget)
    print(f"omega_c = {cv.omega_c:.17g}")
    print(f"argmax alice f(a) = {list(cv.alice)}")
    print(f"argmax bob   g(b) = {list(cv.bob)}")
    return EXIT_OK


def cmd_score(args: argparse.Namespace) -> int:
    g = jsonio.load_game(args.game)
    c = jsonio.load_correlation(args.correlation)
    chk = is_nonsignaling(c)
    print(f"score = {score(g, c):.17g}")
    print(f"omega_c = {classical_value(g).omega_c:.17g}")
    print(f"nonsignaling = {str(chk.ok).lower()} (violation {chk.violation:.3e})")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    g = jsonio.load_game(args.game)
    s = jsonio.load_strategy(args.strategy)
    check_budget(s, max_dim=args.max_dim)
    residuals = povm_residuals(s)
    log.info("strategy %s loaded: %s", s.name or args.strategy, residuals)

    report = theorem_gap_check(
        g, s, args.tol,
        fg_mode=args.fg_mode,
        run_declassical=not args.no_declassical,
        max_dim=args.max_dim,
        seed=args.seed,
    )
    data = report.to_dict()
    data["povm_residuals"] = residuals
    _emit(data, args.out)
    if not report.all_hold:
        log.warning("analyze: at least one bound check failed")
        return EXIT_BOUND_FAILED
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    summary = run_sweep(
        args.check,
        args.trials,
        args.seed,
        dims=parse_dims(args.dims) if args.dims else None,
        rhs_scale=args.mutate,
        out_dir=args.out,
    )
    if summary.trials <= 0:
        print(f"WARNING: 0 trials, check '{summary.check}' passes vacuously")
    print(f"check = {summary.check}")
    print(f"passed = {summary.passed}/{summary.trials}")
    if summary.worst_margin is not None:
        print(f"worst_margin = {summary.worst_margin:.6e} (trial {summary.worst_trial})")
    for path in summary.counterexamples:
        print(f"counterexample: {path}")
    return EXIT_OK if summary.ok else EXIT_BOUND_FAILED


def cmd_declassicalize(args: argparse.Namespace) -> int:
    g = jsonio.load_game(args.game)
    s = jsonio.load_strategy(args.strategy)
    if not s.alice.is_projective:
        log.info("alice measurements are not projective, applying Naimark dilation")
        s = projectivize(s, max_dim=args.max_dim)
    r = declassicalize(g, s, args.tol, explicit=args.explicit, max_dim=args.max_dim)
    omega = classical_value(g).omega_c
    out = {
        "pbar": jsonio.correlation_to_dict(r.pbar),
        "distance": r.distance,
        "bound": r.bound,
        "bound_holds": r.bound_holds,
        "delta": r.delta,
        "gap_budget": r.gap_budget,
        "pbar_score": score(g, r.pbar),
        "omega_c": omega,
    }
    _emit(out, args.out)
    return EXIT_OK if r.bound_holds else EXIT_BOUND_FAILED


def cmd_dist(args: argparse.Namespace) -> int:
    inst = jsonio.load_instance(args.instance)
    res = dist(inst, args.tol, method=args.method)
    out: Dict[str, Any] = {
        "value": res.value,
        "upper_bound": res.upper_bound,
        "primal_dual_gap": res.primal_dual_gap,
        "certified": res.certified,
        "method": res.method,
        "iterations": res.iterations,
        "povm": [jsonio.encode_matrix(t) for t in res.povm],
        "dual_certificate": jsonio.encode_matrix(res.dual_certificate),
    }
    if inst.total_trace > ZERO_TRACE:
        out["pgm_value"] = pgm_lower_bound(inst).value
    _emit(out, args.out)
    return EXIT_OK


# ─────────────────────────────────────────────────────────────────────────────
# Разбор аргументов
# ─────────────────────────────────────────────────────────────────────────────
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=settings.app_name,
                                description="Nonlocal games: certified local randomness checks")
    p.add_argument("--config", default=None, help="YAML с числовыми настройками (по умолчанию CONFIG_FILE)")
    p.add_argument("--log-level", default=None, help="DEBUG/INFO/WARNING/ERROR")
    p.add_argument("--tol", type=float, default=None, help="допуск решателя Dist (по умолчанию 1e-7)")
    p.add_argument("--max-dim", type=int, default=None, help="бюджет размерности (по умолчанию 4096)")
    p.add_argument("--fg-mode", choices=["theorem", "literal"], default=None)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classical-value", help="ω_c и оптимальная детерминированная пара")
    c.add_argument("game")
    c.add_argument("--budget", type=int, default=None)
    c.set_defaults(func=cmd_classical_value)

    k = sub.add_parser("score", help="выигрыш корреляции из файла и проверка no-signaling")
    k.add_argument("game")
    k.add_argument("correlation")
    k.set_defaults(func=cmd_score)

    a = sub.add_parser("analyze", help="полный отчёт по игре и стратегии")
    a.add_argument("game")
    a.add_argument("strategy")
    a.add_argument("--seed", type=int, default=None)
    a.add_argument("--out", default=None)
    a.add_argument("--no-declassical", action="store_true")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sweep", help="рандомизированная проверка неравенства")
    s.add_argument("--check", choices=CHECKS, required=True)
    s.add_argument("--trials", type=int, default=None)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--dims", default=None, help="диапазон локальных размерностей MIN:MAX (по умолчанию 2:sweep.max_local_dim)")
    s.add_argument("--mutate", type=float, default=1.0,
                   help="множитель правой части (0.5 — мутационный самотест)")
    s.add_argument("--out", default=None, help="каталог для контрпримеров")
    s.set_defaults(func=cmd_sweep)

    d = sub.add_parser("declassicalize", help="классическая корреляция p̄ и её расстояние до p")
    d.add_argument("game")
    d.add_argument("strategy")
    d.add_argument("--explicit", action="store_true", default=None, help="явное Λ с регистрами V_a")
    d.add_argument("--out", default=None)
    d.set_defaults(func=cmd_declassicalize)

    x = sub.add_parser("dist", help="Dist для экземпляра из файла")
    x.add_argument("instance")
    x.add_argument("--method", choices=["auto", "helstrom", "fixed_point"], default="auto")
    x.add_argument("--out", default=None)
    x.set_defaults(func=cmd_dist)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings.load_yaml_config(args.config)
        settings.override("discrimination", tol=args.tol)
        settings.override("linalg", max_dim=args.max_dim)
        settings.override("certify", fg_mode=args.fg_mode)
    except ValueError as e:
        setup_logging("INFO")
        log.error("config error: %s", e)
        return EXIT_PARSE
    setup_logging(args.log_level or settings.log_level)

    try:
        return int(args.func(args))
    except (ValueError, NumericalError) as e:
        code = getattr(e, "exit_code", EXIT_PARSE)
        log.error("%s: %s", type(e).__name__, e)
        return code


if __name__ == "__main__":
    sys.exit(main())
