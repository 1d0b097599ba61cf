# app/cli/__init__.py
"""
Командная строка.

Состав:
  - main.py → argparse: classical-value, score, analyze, sweep, declassicalize, dist

Файловые форматы — app/core/jsonio.py.
Точка входа: python run.py <команда> ... (или python -m app.cli.main).
"""
