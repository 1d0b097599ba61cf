# app/core/jsonio.py
"""
JSON-файлы игр, стратегий, корреляций и экземпляров Dist.

Комплексные числа — пары [re, im]. Каноническая запись: ключи отсортированы,
вещественные числа — 17 значащих цифр, так что dump(load(file)) побайтно
воспроизводим.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Dict

import numpy as np

from app.core.errors import ParseError
from app.quantum.discrimination import DiscriminationInstance
from app.quantum.games import Correlation, Game
from app.quantum.strategies import PovmFamily, Strategy

SIZE_KEYS = ("A", "B", "X", "Y")


# ─────────────────────────────────────────────────────────────────────────────
# Каноническая сериализация
# ─────────────────────────────────────────────────────────────────────────────
def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"нельзя сериализовать {x!r}")
    s = format(x, ".17g")
    # целые значения пишем как 1.0, чтобы тип не терялся
    if all(ch not in s for ch in ".eEn"):
        s += ".0"
    return s


def _emit(obj: Any, indent: int, level: int) -> str:
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        pad = " " * (indent * (level + 1))
        items = [f"{pad}{json.dumps(str(k))}: {_emit(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + " " * (indent * level) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_emit(v, indent, level) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return _emit(obj.tolist(), indent, level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    raise TypeError(f"не сериализуется: {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    return _emit(obj, indent, 0) + "\n"


def write_json(path: str | Path, obj: Any) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    tmp = p.with_suffix(p.suffix + ".tmp")
    tmp.write_text(dumps(obj), encoding="utf-8")
    tmp.replace(p)


def read_json(path: str | Path) -> Dict[str, Any]:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"{path}: не удалось прочитать ({e})") from e
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: некорректный JSON ({e})") from e
    if not isinstance(data, dict):
        raise ParseError(f"{path}: корень должен быть объектом")
    return data


# ─────────────────────────────────────────────────────────────────────────────
# Матрицы
# ─────────────────────────────────────────────────────────────────────────────
def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(obj, name: str) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as e:
        raise ParseError(f"{name}: ожидается матрица из пар [re, im]") from e
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ParseError(f"{name}: ожидается матрица из пар [re, im], получено shape={arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _real_array(obj, name: str, ndim: int) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as e:
        raise ParseError(f"{name}: ожидается вложенный массив чисел") from e
    if arr.ndim != ndim:
        raise ParseError(f"{name}: ожидается {ndim}-мерный массив, получено shape={arr.shape}")
    return arr


def _require(data: Dict[str, Any], key: str, where: str) -> Any:
    if key not in data:
        raise ParseError(f"{where}: нет обязательного поля '{key}'")
    return data[key]


# ─────────────────────────────────────────────────────────────────────────────
# Игры и корреляции
# ─────────────────────────────────────────────────────────────────────────────
def _sizes(data: Dict[str, Any], where: str) -> Dict[str, int]:
    sizes = data.get("sizes")
    labels = data.get("labels")
    out: Dict[str, int] = {}
    for k in SIZE_KEYS:
        if isinstance(sizes, dict) and k in sizes:
            v = sizes[k]
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ParseError(f"{where}.sizes.{k}: ожидается положительное целое")
            out[k] = v
        elif isinstance(labels, dict) and isinstance(labels.get(k), list) and labels[k]:
            out[k] = len(labels[k])
        else:
            raise ParseError(f"{where}: размер алфавита {k} не задан (sizes или labels)")
    return out


def game_from_dict(data: Dict[str, Any], where: str = "game") -> Game:
    n = _sizes(data, where)
    q = _real_array(_require(data, "q", where), f"{where}.q", 2)
    H = _real_array(_require(data, "H", where), f"{where}.H", 4)
    if q.shape != (n["A"], n["B"]) or H.shape != (n["A"], n["B"], n["X"], n["Y"]):
        raise ParseError(f"{where}: формы q{q.shape}/H{H.shape} не совпадают с размерами {n}")
    if np.any(q < 0):
        raise ParseError(f"{where}.q: отрицательные вероятности")
    if np.any(H < 0) or np.any(H > 1):
        raise ParseError(f"{where}.H: значения вне [0, 1]")
    try:
        return Game(q=q, H=H, name=str(data.get("name", "")))
    except ValueError as e:
        raise ParseError(f"{where}: {e}") from e


def game_to_dict(g: Game) -> Dict[str, Any]:
    return {
        "name": g.name,
        "sizes": dict(zip(SIZE_KEYS, g.shape)),
        "q": g.q.tolist(),
        "H": g.H.tolist(),
    }


def correlation_from_dict(data: Dict[str, Any], where: str = "correlation") -> Correlation:
    p = _real_array(_require(data, "p", where), f"{where}.p", 4)
    try:
        return Correlation(p, name=str(data.get("name", "")))
    except ValueError as e:
        raise ParseError(f"{where}: {e}") from e


def correlation_to_dict(c: Correlation) -> Dict[str, Any]:
    return {"name": c.name, "sizes": dict(zip(SIZE_KEYS, c.shape)), "p": c.p.tolist()}


# ─────────────────────────────────────────────────────────────────────────────
# Стратегии
# ─────────────────────────────────────────────────────────────────────────────
def _povm_family(obj, name: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(s, list) and s for s in obj):
        raise ParseError(f"{name}: ожидается непустой список настроек со списками матриц")
    n_out = len(obj[0])
    if any(len(s) != n_out for s in obj):
        raise ParseError(f"{name}: у настроек разное число исходов")
    return np.stack([np.stack([decode_matrix(m, f"{name}[{i}][{j}]") for j, m in enumerate(s)])
                     for i, s in enumerate(obj)])


def strategy_from_dict(data: Dict[str, Any], where: str = "strategy") -> Strategy:
    dD = _require(data, "dD", where)
    dE = _require(data, "dE", where)
    for k, v in (("dD", dD), ("dE", dE)):
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ParseError(f"{where}.{k}: ожидается положительное целое")
    R = _povm_family(_require(data, "R", where), f"{where}.R")
    S = _povm_family(_require(data, "S", where), f"{where}.S")
    gamma = decode_matrix(_require(data, "gamma", where), f"{where}.gamma")
    if R.shape[2] != dD or S.shape[2] != dE:
        raise ParseError(f"{where}: размер матриц R/S не совпадает с dD={dD}/dE={dE}")
    try:
        return Strategy(PovmFamily(R), PovmFamily(S), gamma, name=str(data.get("name", "")))
    except ValueError as e:
        raise ParseError(f"{where}: {e}") from e


def strategy_to_dict(s: Strategy) -> Dict[str, Any]:
    return {
        "name": s.name,
        "dD": s.dD,
        "dE": s.dE,
        "R": [[encode_matrix(e) for e in setting] for setting in s.alice.elements],
        "S": [[encode_matrix(e) for e in setting] for setting in s.bob.elements],
        "gamma": encode_matrix(s.gamma),
    }


def instance_from_dict(data: Dict[str, Any], where: str = "instance") -> DiscriminationInstance:
    states = _require(data, "states", where)
    if not isinstance(states, list) or not states:
        raise ParseError(f"{where}.states: ожидается непустой список матриц")
    mats = [decode_matrix(m, f"{where}.states[{i}]") for i, m in enumerate(states)]
    if len({m.shape for m in mats}) != 1:
        raise ParseError(f"{where}.states: матрицы разных размеров")
    try:
        return DiscriminationInstance(np.stack(mats))
    except ValueError as e:
        raise ParseError(f"{where}: {e}") from e


# ───────── загрузка по пути ─────────
def load_game(path: str | Path) -> Game:
    return game_from_dict(read_json(path), str(path))


def load_strategy(path: str | Path) -> Strategy:
    return strategy_from_dict(read_json(path), str(path))


def load_correlation(path: str | Path) -> Correlation:
    return correlation_from_dict(read_json(path), str(path))


def load_instance(path: str | Path) -> DiscriminationInstance:
    return instance_from_dict(read_json(path), str(path))
