"""Backend selection for the batched Hermitian eigensolver.

The Monte Carlo oracle spends essentially all of its time computing the
eigenvalues of s x s Hermitian Gram matrices (s <= 12, millions of
matrices).  Both backends implement the same cyclic Jacobi iteration with
complex rotations:

- ``numba``: scalar loops JIT-compiled per matrix (default when numba
  imports cleanly);
- ``numpy``: the identical rotation sequence applied to the whole batch
  with array ops.

Select explicitly with the environment variable ``NCWISHART_BACKEND``
(``numba`` | ``numpy``); anything else (or unset) means "numba if
available".  ``scripts/benchmark_backends.py`` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["active_backend", "eig_descending", "jacobi_eigvals_numpy"]

_SWEEPS = 30
_TOL = 1e-30  # on |a_pq|^2 relative to the diagonal scale, i.e. ~1e-15 in value

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    _HAVE_NUMBA = False


def active_backend(override: str | None = None) -> str:
    """Resolve the backend name ('numba' or 'numpy')."""
    choice = (override or os.environ.get("NCWISHART_BACKEND", "auto")).lower()
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not _HAVE_NUMBA:
            raise RuntimeError("NCWISHART_BACKEND=numba but numba is not importable")
        return "numba"
    return "numba" if _HAVE_NUMBA else "numpy"


def eig_descending(mats: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Eigenvalues of a batch (nb, s, s) of Hermitian matrices, sorted
    descending per matrix."""
    mats = np.ascontiguousarray(mats, dtype=np.complex128)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise ValueError(f"expected (nb, s, s), got {mats.shape}")
    if mats.shape[1] == 1:
        return mats[:, 0, 0].real.copy().reshape(-1, 1)
    if active_backend(backend) == "numba":
        return _jacobi_numba(mats.copy())
    return jacobi_eigvals_numpy(mats.copy())


# ---------------------------------------------------------------------------
# numpy backend: batched rotations
# ---------------------------------------------------------------------------

def jacobi_eigvals_numpy(A: np.ndarray) -> np.ndarray:
    """Cyclic Jacobi on a batch of Hermitian matrices (modifies A)."""
    nb, s, _ = A.shape
    for _ in range(_SWEEPS):
        off = 0.0
        for p in range(s - 1):
            for q in range(p + 1, s):
                w = A[:, p, q]
                absw = np.abs(w)
                diag = np.sqrt(np.abs(A[:, p, p].real * A[:, q, q].real)) + 1e-300
                act = absw * absw > _TOL * diag * diag
                if not np.any(act):
                    continue
                off = max(off, float(np.max(absw * absw / (diag * diag))))
                safe = np.where(absw > 0, absw, 1.0)
                u = np.where(absw > 0, w / safe, 1.0 + 0j)
                tau = (A[:, q, q].real - A[:, p, p].real) / (2.0 * safe)
                tt = np.sign(tau) + (tau == 0)
                t = tt / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                sn = t * c
                c = np.where(act, c, 1.0)
                sn = np.where(act, sn, 0.0)
                su = sn * u
                # column update (A <- A J)
                colp = A[:, :, p].copy()
                colq = A[:, :, q].copy()
                A[:, :, p] = c[:, None] * colp - np.conj(su)[:, None] * colq
                A[:, :, q] = su[:, None] * colp + c[:, None] * colq
                # row update (A <- J^H A)
                rowp = A[:, p, :].copy()
                rowq = A[:, q, :].copy()
                A[:, p, :] = c[:, None] * rowp - su[:, None] * rowq
                A[:, q, :] = np.conj(su)[:, None] * rowp + c[:, None] * rowq
        if off <= _TOL:
            break
    vals = np.real(A[:, np.arange(s), np.arange(s)])
    vals.sort(axis=1)
    return vals[:, ::-1]


# ---------------------------------------------------------------------------
# numba backend: scalar loops, same rotation sequence
# ---------------------------------------------------------------------------

if _HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _jacobi_kernel(A, out):  # pragma: no cover - compiled
        nb, s, _ = A.shape
        for b in range(nb):
            for _ in range(_SWEEPS):
                off = 0.0
                for p in range(s - 1):
                    for q in range(p + 1, s):
                        w = A[b, p, q]
                        absw2 = w.real * w.real + w.imag * w.imag
                        dpp = A[b, p, p].real
                        dqq = A[b, q, q].real
                        diag2 = abs(dpp * dqq) + 1e-300
                        if absw2 <= _TOL * diag2:
                            continue
                        ratio = absw2 / diag2
                        if ratio > off:
                            off = ratio
                        absw = np.sqrt(absw2)
                        u = w / absw
                        tau = (dqq - dpp) / (2.0 * absw)
                        if tau >= 0.0:
                            t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                        else:
                            t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                        c = 1.0 / np.sqrt(1.0 + t * t)
                        sn = t * c
                        su = sn * u
                        suc = np.conj(su)
                        for r in range(s):
                            xp = A[b, r, p]
                            xq = A[b, r, q]
                            A[b, r, p] = c * xp - suc * xq
                            A[b, r, q] = su * xp + c * xq
                        for r in range(s):
                            xp = A[b, p, r]
                            xq = A[b, q, r]
                            A[b, p, r] = c * xp - su * xq
                            A[b, q, r] = suc * xp + c * xq
                if off <= _TOL:
                    break
            for i in range(s):
                out[b, i] = A[b, i, i].real
            # insertion sort, descending
            for i in range(1, s):
                key = out[b, i]
                j = i - 1
                while j >= 0 and out[b, j] < key:
                    out[b, j + 1] = out[b, j]
                    j -= 1
                out[b, j + 1] = key

    def _jacobi_numba(A: np.ndarray) -> np.ndarray:
        out = np.empty((A.shape[0], A.shape[1]), dtype=np.float64)
        _jacobi_kernel(A, out)
        return out

else:  # pragma: no cover

    def _jacobi_numba(A: np.ndarray) -> np.ndarray:
        raise RuntimeError("numba backend requested but numba is unavailable")
