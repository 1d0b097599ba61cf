# app/core/validate_cfg.py
from __future__ import annotations
from typing import Dict, Any, Optional

ALLOWED_EIG_METHODS = {"lapack", "jacobi"}
ALLOWED_FG_MODES    = {"theorem", "literal"}
ALLOWED_LOG_LEVELS  = {"DEBUG", "INFO", "WARNING", "ERROR"}

TOLERANCE_KEYS = (
    "hermitian_tol", "psd_tol", "trace_tol", "eig_tol",
    "nonsignaling_tol", "povm_tol", "projective_tol", "check_tol",
)


def _as_int(v, name, min_: Optional[int] = None, max_: Optional[int] = None) -> int:
    if isinstance(v, bool):
        raise ValueError(f"{name}: ожидается целое, получено {v!r}")
    try:
        fv = float(v)
        iv = int(fv)
    except Exception:
        raise ValueError(f"{name}: ожидается целое, получено {v!r}")
    if iv != fv:
        raise ValueError(f"{name}: ожидается целое, получено {v!r}")
    if min_ is not None and iv < min_:
        raise ValueError(f"{name}: должно быть ≥ {min_} (получено {iv})")
    if max_ is not None and iv > max_:
        raise ValueError(f"{name}: должно быть ≤ {max_} (получено {iv})")
    return iv


def _as_float(v, name, min_: Optional[float] = None, *, strict: bool = False) -> float:
    if isinstance(v, bool):
        raise ValueError(f"{name}: ожидается число, получено {v!r}")
    try:
        fv = float(v)
    except Exception:
        raise ValueError(f"{name}: ожидается число, получено {v!r}")
    if min_ is not None and (fv <= min_ if strict else fv < min_):
        sign = ">" if strict else "≥"
        raise ValueError(f"{name}: должно быть {sign} {min_} (получено {fv})")
    return fv


def _as_bool(v, name) -> bool:
    if isinstance(v, bool):
        return v
    # допускаем 'true'/'false'/1/0 из yaml
    if isinstance(v, (int, float)) and v in (0, 1):
        return bool(v)
    if isinstance(v, str) and v.lower() in ("true", "false"):
        return v.lower() == "true"
    raise ValueError(f"{name}: должен быть true/false")


def _section(cfg: Dict[str, Any], key: str) -> Dict[str, Any]:
    sec = cfg.get(key, {})
    if sec is None:
        return {}
    if not isinstance(sec, dict):
        raise ValueError(f"{key}: должен быть объектом")
    return sec


def validate_cfg(cfg: Dict[str, Any]) -> None:
    """Бросает ValueError с понятным текстом, если конфиг некорректен."""
    if not isinstance(cfg, dict):
        raise ValueError("корневой YAML должен быть объектом")

    # ─── tolerances ───
    tol = _section(cfg, "tolerances")
    for k in tol:
        if k not in TOLERANCE_KEYS:
            raise ValueError(f"tolerances.{k}: неизвестный допуск (ожидалось одно из {TOLERANCE_KEYS})")
        _as_float(tol[k], f"tolerances.{k}", 0.0, strict=True)

    # ─── linalg ───
    la = _section(cfg, "linalg")
    if "max_dim" in la:
        _as_int(la["max_dim"], "linalg.max_dim", 1)
    if "max_sweeps" in la:
        _as_int(la["max_sweeps"], "linalg.max_sweeps", 1)
    if "eig_method" in la:
        m = str(la["eig_method"]).strip().lower()
        if m not in ALLOWED_EIG_METHODS:
            raise ValueError(f"linalg.eig_method: допустимо {ALLOWED_EIG_METHODS}")

    # ─── games ───
    gm = _section(cfg, "games")
    if "enumeration_budget" in gm:
        _as_int(gm["enumeration_budget"], "games.enumeration_budget", 1)

    # ─── discrimination ───
    ds = _section(cfg, "discrimination")
    if "tol" in ds:
        _as_float(ds["tol"], "discrimination.tol", 0.0, strict=True)
    if "max_iters" in ds:
        _as_int(ds["max_iters"], "discrimination.max_iters", 1)

    # ─── certify ───
    ce = _section(cfg, "certify")
    if "fg_mode" in ce:
        m = str(ce["fg_mode"]).strip().lower()
        if m not in ALLOWED_FG_MODES:
            raise ValueError(f"certify.fg_mode: допустимо {ALLOWED_FG_MODES}")
    if "explicit_declassicalize" in ce:
        _as_bool(ce["explicit_declassicalize"], "certify.explicit_declassicalize")

    # ─── sweep ───
    sw = _section(cfg, "sweep")
    if "trials" in sw:
        _as_int(sw["trials"], "sweep.trials", 0)
    if "seed" in sw:
        _as_int(sw["seed"], "sweep.seed", 0)
    if "max_local_dim" in sw:
        _as_int(sw["max_local_dim"], "sweep.max_local_dim", 2)
    if "counterexample_dir" in sw and not isinstance(sw["counterexample_dir"], str):
        raise ValueError("sweep.counterexample_dir: должен быть строкой")

    # ─── logging ───
    lg = _section(cfg, "logging")
    if "level" in lg:
        lvl = str(lg["level"]).strip().upper()
        if lvl not in ALLOWED_LOG_LEVELS:
            raise ValueError(f"logging.level: допустимо {ALLOWED_LOG_LEVELS}")
