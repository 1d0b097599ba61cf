# app/quantum/linalg.py
"""
Плотное комплексное ядро: тензорные произведения, частичные следы,
спектральное разложение эрмитовых матриц, корни из PSD и следовая норма.

Соглашение Кронекера строковое (row-major): индекс a⊗b = i_a·dim_b + i_b.
Все функции чистые: входы не модифицируются.
"""
from __future__ import annotations

import logging
import math
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from app.core.config import settings
from app.core.errors import NotPsdError, NumericalError, ShapeError, SizingError

log = logging.getLogger("linalg")

ComplexMatrix = npt.NDArray[np.complex128]
# эрмитовы и плотностные операторы — те же массивы, но прошедшие ensure_*
HermitianOperator = ComplexMatrix
DensityOperator = ComplexMatrix


# ─────────────────────────────────────────────────────────────────────────────
# Проверки инвариантов
# ─────────────────────────────────────────────────────────────────────────────
def as_matrix(m, name: str = "matrix") -> ComplexMatrix:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name}: ожидается двумерная матрица, получено shape={arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ShapeError(f"{name}: есть NaN/Inf")
    return arr


def dag(m: ComplexMatrix) -> ComplexMatrix:
    return np.conj(m).T


def hermitize(m: ComplexMatrix) -> ComplexMatrix:
    return (m + dag(m)) / 2


def ensure_hermitian(m, name: str = "operator", tol: Optional[float] = None) -> HermitianOperator:
    arr = as_matrix(m, name)
    if arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"{name}: ожидается квадратная матрица, получено {arr.shape}")
    tol = settings.tol("hermitian_tol") if tol is None else tol
    err = float(np.max(np.abs(arr - dag(arr))))
    if err > tol:
        raise ShapeError(f"{name}: не эрмитова (‖M − M†‖_max = {err:.3e} > {tol:.1e})")
    # убираем представленческий шум, чтобы дальше eigh работал с точно эрмитовой матрицей
    return hermitize(arr)


def min_eigenvalue(h: HermitianOperator) -> float:
    return float(np.linalg.eigvalsh(hermitize(np.asarray(h, dtype=np.complex128)))[0])


def ensure_psd(m, name: str = "operator", tol: Optional[float] = None) -> HermitianOperator:
    h = ensure_hermitian(m, name)
    tol = settings.tol("psd_tol") if tol is None else tol
    lam = min_eigenvalue(h)
    if lam < -tol:
        raise NotPsdError(f"{name}: минимальное собственное значение {lam:.3e} < −{tol:.1e}", lam)
    return h


def ensure_density(m, name: str = "density", tol: Optional[float] = None) -> DensityOperator:
    h = ensure_psd(m, name)
    tol = settings.tol("trace_tol") if tol is None else tol
    tr = float(np.trace(h).real)
    if abs(tr - 1.0) > tol:
        raise ShapeError(f"{name}: след {tr:.12f} ≠ 1 (допуск {tol:.1e})")
    return h


def check_dim(d: int, max_dim: Optional[int] = None, what: str = "dimension") -> int:
    max_dim = int(settings.linalg["max_dim"]) if max_dim is None else int(max_dim)
    if d > max_dim:
        raise SizingError(f"{what}: размерность {d} превышает max_dim={max_dim}; уменьшите экземпляр")
    return d


# ─────────────────────────────────────────────────────────────────────────────
# Тензоры и частичные следы
# ─────────────────────────────────────────────────────────────────────────────
def tensor(a, b, *, max_dim: Optional[int] = None) -> ComplexMatrix:
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    check_dim(a.shape[0] * b.shape[0], max_dim, "tensor rows")
    check_dim(a.shape[1] * b.shape[1], max_dim, "tensor cols")
    return np.kron(a, b)


def tensor_all(mats: Iterable, *, max_dim: Optional[int] = None) -> ComplexMatrix:
    out: Optional[ComplexMatrix] = None
    for m in mats:
        out = as_matrix(m) if out is None else tensor(out, m, max_dim=max_dim)
    if out is None:
        return np.ones((1, 1), dtype=np.complex128)
    return out


def _check_dims(m: ComplexMatrix, dims: Sequence[int]) -> list[int]:
    dims = [int(d) for d in dims]
    if not dims or any(d < 1 for d in dims):
        raise ShapeError(f"dims: ожидается непустой список положительных целых, получено {dims}")
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"ожидается квадратная матрица, получено {m.shape}")
    if math.prod(dims) != m.shape[0]:
        raise ShapeError(f"dims={dims}: произведение {math.prod(dims)} ≠ размерности {m.shape[0]}")
    return dims


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> ComplexMatrix:
    m = as_matrix(m)
    dims = _check_dims(m, dims)
    n = len(dims)
    keep_set = set(int(k) for k in keep)
    if any(k < 0 or k >= n for k in keep_set):
        raise ShapeError(f"keep={sorted(keep_set)}: индексы вне диапазона 0..{n - 1}")

    t = m.reshape(dims + dims)
    # идём с конца, чтобы номера осей младших факторов не сдвигались
    for i in reversed(range(n)):
        if i not in keep_set:
            t = np.trace(t, axis1=i, axis2=i + t.ndim // 2)
    d = math.prod(dims[k] for k in sorted(keep_set))
    return t.reshape(d, d)


def embed(op, dims: Sequence[int], targets: Sequence[int]) -> ComplexMatrix:
    """
    Оператор op на факторах targets (в указанном порядке), тождественный на остальных.
    Факторы не обязаны быть соседними.
    """
    dims = [int(d) for d in dims]
    targets = [int(t) for t in targets]
    n = len(dims)
    if len(set(targets)) != len(targets) or any(t < 0 or t >= n for t in targets):
        raise ShapeError(f"targets={targets}: некорректные индексы факторов для dims={dims}")
    op = as_matrix(op, "op")
    d_op = math.prod(dims[t] for t in targets)
    if op.shape != (d_op, d_op):
        raise ShapeError(f"op shape {op.shape} не совпадает с произведением размерностей {d_op}")

    rest = [i for i in range(n) if i not in targets]
    order = targets + rest
    full = np.kron(op, np.eye(math.prod(dims[i] for i in rest)))
    t = full.reshape([dims[i] for i in order] * 2)
    inv = list(np.argsort(order))
    t = t.transpose(inv + [n + j for j in inv])
    d = math.prod(dims)
    return t.reshape(d, d)


# ─────────────────────────────────────────────────────────────────────────────
# Спектральное разложение
# ─────────────────────────────────────────────────────────────────────────────
def _jacobi_eig(h: ComplexMatrix, tol: float, max_sweeps: int) -> Tuple[np.ndarray, ComplexMatrix]:
    """Циклический метод Якоби для комплексных эрмитовых матриц."""
    a = np.array(h, dtype=np.complex128, copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    fro = max(float(np.linalg.norm(a)), 1.0)
    thresh = min(tol, 1e-12) * fro

    def off_norm() -> float:
        return float(np.sqrt(max(np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2), 0.0)))

    off = off_norm()
    sweeps = 0
    while off > thresh:
        if sweeps >= max_sweeps:
            raise NumericalError(f"jacobi: нет сходимости за {max_sweeps} проходов", off)
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r
                theta = (a[q, q].real - a[p, p].real) / (2.0 * r)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                elif theta == 0.0:
                    t = 1.0
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # фазовый сдвиг делает a_pq вещественным, затем обычный поворот
                g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=np.complex128)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = dag(g) @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ g
        off = off_norm()
    log.debug("jacobi: n=%d converged in %d sweeps, off=%.3e", n, sweeps, off)

    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def herm_eig(
    h,
    *,
    method: Optional[str] = None,
    tol: Optional[float] = None,
    max_sweeps: Optional[int] = None,
) -> Tuple[np.ndarray, ComplexMatrix]:
    """
    Собственные значения (по возрастанию) и унитарная матрица собственных векторов.
    method: "lapack" (numpy.linalg.eigh) или "jacobi".
    """
    h = ensure_hermitian(h, "h")
    method = (method or settings.linalg["eig_method"]).lower()
    tol = settings.tol("eig_tol") if tol is None else tol
    if method == "jacobi":
        sweeps = int(settings.linalg["max_sweeps"]) if max_sweeps is None else int(max_sweeps)
        w, v = _jacobi_eig(h, tol, sweeps)
    elif method == "lapack":
        try:
            w, v = np.linalg.eigh(h)
        except np.linalg.LinAlgError as e:
            raise NumericalError(f"eigh: {e}", float("nan")) from e
    else:
        raise ValueError(f"herm_eig: неизвестный метод {method!r}")
    return np.asarray(w, dtype=float), np.asarray(v, dtype=np.complex128)


# ─────────────────────────────────────────────────────────────────────────────
# Функции от эрмитовых операторов
# ─────────────────────────────────────────────────────────────────────────────
def _clamped_spectrum(p, psd_tol: Optional[float]) -> Tuple[np.ndarray, ComplexMatrix]:
    psd_tol = settings.tol("psd_tol") if psd_tol is None else psd_tol
    w, v = herm_eig(p)
    if w.size and w[0] < -psd_tol:
        raise NotPsdError(f"psd_sqrt: собственное значение {w[0]:.3e} < −{psd_tol:.1e}", float(w[0]))
    return np.clip(w, 0.0, None), v


def psd_sqrt(p, *, psd_tol: Optional[float] = None) -> HermitianOperator:
    w, v = _clamped_spectrum(p, psd_tol)
    return hermitize((v * np.sqrt(w)) @ dag(v))


def psd_inv_sqrt(p, *, psd_tol: Optional[float] = None, cutoff: float = 1e-12) -> Tuple[HermitianOperator, HermitianOperator]:
    """
    Псевдообратный корень на носителе и проектор на носитель.
    Собственные значения ≤ cutoff·max(1, λ_max) считаются нулевыми.
    """
    w, v = _clamped_spectrum(p, psd_tol)
    top = float(w[-1]) if w.size else 0.0
    support = w > cutoff * max(1.0, top)
    inv = np.zeros_like(w)
    inv[support] = 1.0 / np.sqrt(w[support])
    proj = (v[:, support]) @ dag(v[:, support])
    return hermitize((v * inv) @ dag(v)), hermitize(proj)


def positive_part(h) -> Tuple[HermitianOperator, HermitianOperator]:
    """Проекторы на неотрицательное и отрицательное собственные подпространства."""
    w, v = herm_eig(h)
    pos = w >= 0.0
    p_plus = v[:, pos] @ dag(v[:, pos])
    p_minus = v[:, ~pos] @ dag(v[:, ~pos])
    return hermitize(p_plus), hermitize(p_minus)


def trace_norm(h) -> float:
    w, _ = herm_eig(h)
    return float(np.sum(np.abs(w)))


def is_projector(e, tol: Optional[float] = None) -> bool:
    tol = settings.tol("projective_tol") if tol is None else tol
    e = np.asarray(e, dtype=np.complex128)
    return float(np.max(np.abs(e @ e - e))) <= tol


def ket_projector(ket) -> HermitianOperator:
    ket = np.asarray(ket, dtype=np.complex128).reshape(-1, 1)
    return ket @ dag(ket)
