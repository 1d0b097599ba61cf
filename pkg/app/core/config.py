# app/core/config.py
from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import Field, PrivateAttr
from pydantic_settings import BaseSettings

from app.core.validate_cfg import validate_cfg

# дефолты секций YAML (значения из требований; YAML их только переопределяет)
DEFAULTS: Dict[str, Dict[str, Any]] = {
    "tolerances": {
        "hermitian_tol": 1e-10,
        "psd_tol": 1e-9,
        "trace_tol": 1e-9,
        "eig_tol": 1e-9,
        "nonsignaling_tol": 1e-9,
        "povm_tol": 1e-9,
        "projective_tol": 1e-8,
        "check_tol": 1e-6,
    },
    "linalg": {
        "max_dim": 4096,
        "max_sweeps": 100,
        "eig_method": "lapack",
    },
    "games": {
        "enumeration_budget": 10**8,
    },
    "discrimination": {
        "tol": 1e-7,
        "max_iters": 5000,
    },
    "certify": {
        "fg_mode": "theorem",
        "explicit_declassicalize": False,
    },
    "sweep": {
        "trials": 1000,
        "seed": 0,
        "max_local_dim": 4,
        "counterexample_dir": "./counterexamples",
    },
    "logging": {
        "level": "INFO",
    },
}


class Settings(BaseSettings):
    # имя и версия приложения
    app_name: str = Field(default="nlgcert", validation_alias="APP_NAME")
    app_version: str = Field(default="0.3.0", validation_alias="APP_VERSION")

    # путь к YAML с числовыми настройками (можно переопределить переменной окружения CONFIG_FILE)
    config_file: str = Field(default="config.yaml", validation_alias="CONFIG_FILE")

    # внутреннее хранилище загруженного YAML
    _cfg: Dict[str, Any] = PrivateAttr(default_factory=dict)
    _config_path: Path | None = PrivateAttr(default=None)

    # ───────── пути ─────────
    @property
    def config_path(self) -> Path:
        if self._config_path is None:
            p = Path(self.config_file)
            if not p.is_absolute():
                p = Path.cwd() / p
            self._config_path = p
        return self._config_path

    # ───────── YAML cfg ─────────
    @property
    def cfg(self) -> Dict[str, Any]:
        return self._cfg

    def set_cfg(self, data: Optional[Dict[str, Any]]) -> None:
        data = data or {}
        validate_cfg(data)
        self._cfg = data

    def load_yaml_config(self, path: str | Path | None = None) -> None:
        if path is not None:
            self._config_path = Path(path).resolve()
        p = self.config_path
        if p.exists():
            with open(p, "r", encoding="utf-8") as f:
                self.set_cfg(yaml.safe_load(f) or {})  # выбросит ValueError, если что-то не так
        else:
            self._cfg = {}

    def override(self, section: str, **values: Any) -> None:
        """Точечное переопределение (флаги CLI). None игнорируется."""
        cfg = {k: dict(v) for k, v in self._cfg.items() if isinstance(v, dict)}
        sec = cfg.setdefault(section, {})
        sec.update({k: v for k, v in values.items() if v is not None})
        self.set_cfg(cfg)

    def _merged(self, section: str) -> Dict[str, Any]:
        out = dict(DEFAULTS[section])
        out.update(self._cfg.get(section) or {})
        return out

    # ───────── удобные секции ─────────
    @property
    def tolerances(self) -> Dict[str, float]:
        return {k: float(v) for k, v in self._merged("tolerances").items()}

    @property
    def linalg(self) -> Dict[str, Any]:
        return self._merged("linalg")

    @property
    def games(self) -> Dict[str, Any]:
        return self._merged("games")

    @property
    def discrimination(self) -> Dict[str, Any]:
        return self._merged("discrimination")

    @property
    def certify(self) -> Dict[str, Any]:
        return self._merged("certify")

    @property
    def sweep(self) -> Dict[str, Any]:
        return self._merged("sweep")

    @property
    def log_level(self) -> str:
        return str(self._merged("logging")["level"]).upper()

    def tol(self, name: str) -> float:
        return self.tolerances[name]


settings = Settings()
