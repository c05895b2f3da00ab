"""Dense complex linear-algebra and transform kernels shared across the package.

Everything here operates on tiny matrices (4x4 two-qubit states, at most 8x8)
or 1D sample grids of ~1e4 points, so these are thin, defensively checked
wrappers around numpy's LAPACK and FFT bindings.
"""

from __future__ import annotations

import numpy as np

__all__ = ["hermitian_eigen", "dft", "idft"]


def hermitian_eigen(a, rtol: float = 1e-12):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Parameters
    ----------
    a : array_like, shape (n, n)
        Hermitian matrix.  A deviation ``|a - a^dag|`` beyond ``rtol`` times
        the matrix scale raises ``ValueError``.

    Returns
    -------
    w : ndarray, shape (n,)
        Real eigenvalues sorted in descending order.
    v : ndarray, shape (n, n)
        Orthonormal eigenvectors as columns, ``v[:, k]`` belonging to ``w[k]``.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(a - a.conj().T).max() > rtol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(a)
    return w[::-1], v[:, ::-1]


def dft(x):
    """Unitary-normalized discrete Fourier transform of a complex series."""
    return np.fft.fft(np.asarray(x, dtype=complex), norm="ortho")


def idft(x):
    """Inverse of :func:`dft`; ``idft(dft(x)) == x`` to machine precision."""
    return np.fft.ifft(np.asarray(x, dtype=complex), norm="ortho")
