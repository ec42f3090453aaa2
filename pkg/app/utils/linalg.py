import numpy as np


def max_abs(m) -> float:
    a = np.asarray(m)
    return float(np.max(np.abs(a))) if a.size else 0.0


def min_singular_value(m: np.ndarray) -> float:
    return float(np.linalg.svd(np.asarray(m, dtype=float), compute_uv=False)[-1])


def signature(m: np.ndarray, threshold: float = 0.0) -> tuple[int, int]:
    """
    (positive, negative) eigenvalue counts of a real symmetric matrix.
    Eigenvalues within `threshold` of zero count as neither.
    """
    eigenvalues = np.linalg.eigvalsh(np.asarray(m, dtype=float))
    return int(np.sum(eigenvalues > threshold)), int(np.sum(eigenvalues < -threshold))


def asymmetry(m: np.ndarray) -> float:
    return max_abs(m - m.T)


def symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def block(a: np.ndarray, b: np.ndarray, c: np.ndarray, d: np.ndarray) -> np.ndarray:
    """[[a, b], [c, d]]"""
    return np.block([[a, b], [c, d]])


def standard_symplectic(n: int) -> np.ndarray:
    """[[0, I], [-I, 0]]"""
    eye, zero = np.eye(n), np.zeros((n, n))
    return block(zero, eye, -eye, zero)
