import numpy as np

from utils.errors import SingularK

COND_GUARD = 1e12


def mat2(a11, a12, a21, a22) -> np.ndarray:
    return np.array([[a11, a12], [a21, a22]], dtype=complex)


def det2(m: np.ndarray) -> complex:
    return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


def inv2(m: np.ndarray, cond_guard: float = COND_GUARD, error=SingularK) -> np.ndarray:
    """Inverse of a 2x2 matrix by the cofactor formula, guarded by its condition number."""
    m = np.asarray(m, dtype=complex)
    cond = np.linalg.cond(m)
    det = det2(m)
    if det == 0 or not np.isfinite(cond) or cond > cond_guard:
        raise error(f"2x2 matrix is ill-conditioned (cond = {cond:.3e}).")
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=complex) / det


def adjoint(m: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(m, dtype=complex)).T


def imag_part(m: np.ndarray) -> np.ndarray:
    """Hermitian imaginary part (M - M*)/(2i)."""
    m = np.asarray(m, dtype=complex)
    return (m - adjoint(m)) / 2j
