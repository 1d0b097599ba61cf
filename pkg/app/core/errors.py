# app/core/errors.py
from __future__ import annotations

from typing import Optional

# коды выхода CLI
EXIT_OK = 0
EXIT_BOUND_FAILED = 1
EXIT_PARSE = 2
EXIT_SHAPE = 3
EXIT_BUDGET = 4


class ShapeError(ValueError):
    """Размеры массивов/алфавитов не согласованы."""
    exit_code = EXIT_SHAPE


class SizingError(ValueError):
    """Превышен бюджет по размерности (max_dim)."""
    exit_code = EXIT_BUDGET


class EnumerationError(SizingError):
    """Перебор детерминированных стратегий слишком велик."""


class NotPsdError(ValueError):
    """Оператор не положительно полуопределён (с учётом psd_tol)."""
    exit_code = EXIT_SHAPE

    def __init__(self, message: str, min_eig: Optional[float] = None) -> None:
        super().__init__(message)
        self.min_eig = min_eig


class NotProjectiveError(ValueError):
    exit_code = EXIT_SHAPE


class CompleteSupportError(ValueError):
    """Игра без полного носителя: q(a,b) = 0 хотя бы для одной пары."""
    exit_code = EXIT_SHAPE


class ParseError(ValueError):
    """Файл игры/стратегии/экземпляра не соответствует схеме."""
    exit_code = EXIT_PARSE


class NumericalError(ArithmeticError):
    """Итерационный метод не сошёлся; residual — достигнутая невязка."""
    exit_code = EXIT_SHAPE

    def __init__(self, message: str, residual: float) -> None:
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class DegenerateInstanceError(ValueError):
    """Экземпляр различения из одних нулевых операторов."""
    exit_code = EXIT_SHAPE
