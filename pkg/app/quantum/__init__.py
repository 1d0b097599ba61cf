# app/quantum/__init__.py
"""
Численное ядро: нелокальные игры, стратегии и сертификация локальной случайности.

Состав:
  - linalg.py         → тензоры, частичные следы, спектр, корни, следовая норма
  - games.py          → игры, корреляции, классическое значение
  - strategies.py     → POVM, стратегии, состояния Боба, дилатация Наймарка
  - discrimination.py → Dist: Хелстром, итерация неподвижной точки, PGM
  - certify.py        → ε, δ, C_G, f_G, возмущение, деклассикализация, отчёт
  - instances.py      → случайные экземпляры для проверок
"""
from .games import Game, Correlation, chsh, pr_box, classical_value, score
from .strategies import PovmFamily, Strategy, chsh_optimal_strategy
from .discrimination import DiscriminationInstance, dist
from .certify import CertificationReport, theorem_gap_check

__all__ = [
    "Game",
    "Correlation",
    "chsh",
    "pr_box",
    "classical_value",
    "score",
    "PovmFamily",
    "Strategy",
    "chsh_optimal_strategy",
    "DiscriminationInstance",
    "dist",
    "CertificationReport",
    "theorem_gap_check",
]
