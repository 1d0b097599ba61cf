# app/services/__init__.py
"""
Состав:
  - sweep.py → рандомизированные серии проверок неравенств с записью контрпримеров
"""
from .sweep import CHECKS, SweepSummary, run_sweep

__all__ = ["CHECKS", "SweepSummary", "run_sweep"]
