"""Closed-form 2x2 operator algebra.

Every operator is a plain ``(2, 2)`` complex numpy array.  Channels are
represented on the Bloch/Pauli coordinates ``v_i = Tr(sigma_i rho)`` with
``sigma_0 = I``, so a CPTP map is a real 4x4 matrix whose first row is
``(1, 0, 0, 0)``.
"""

from __future__ import annotations

import contextlib
import os

import numpy as np

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
# sigma_- = (sigma_x - i sigma_y)/2 lowers |0> (sigma_z = +1) to |1>
SM = (SX - 1j * SY) / 2
SP = (SX + 1j * SY) / 2
PAULI = (I2, SX, SY, SZ)

_SMALL = 1e-6
_VALIDATE = os.environ.get("OTTO_VALIDATE", "0") not in ("", "0", "false")


class NotHermitian(ValueError):
    pass


class InvalidDensityMatrix(ValueError):
    pass


def validation_enabled() -> bool:
    return _VALIDATE


def set_validation(enabled: bool) -> None:
    global _VALIDATE
    _VALIDATE = bool(enabled)


@contextlib.contextmanager
def validation(enabled: bool = True):
    """Temporarily switch the density-matrix invariant checks on or off."""
    global _VALIDATE
    old = _VALIDATE
    _VALIDATE = bool(enabled)
    try:
        yield
    finally:
        _VALIDATE = old


def pauli_coefficients(a: np.ndarray) -> tuple[complex, np.ndarray]:
    """Return ``(a0, (ax, ay, az))`` with ``a = a0 I + a . sigma``."""
    a0 = (a[0, 0] + a[1, 1]) / 2
    ax = (a[0, 1] + a[1, 0]) / 2
    ay = (a[1, 0] - a[0, 1]) / 2j
    az = (a[0, 0] - a[1, 1]) / 2
    return a0, np.array([ax, ay, az])


def from_pauli(a0: complex, vec) -> np.ndarray:
    ax, ay, az = vec
    return np.array([[a0 + az, ax - 1j * ay], [ax + 1j * ay, a0 - az]], dtype=complex)


def mat_exp(a: np.ndarray) -> np.ndarray:
    """Exact exponential of a 2x2 matrix.

    Uses ``exp(a0 I + a.sigma) = e^{a0} (cosh s I + sinh(s)/s a.sigma)`` with
    ``s^2 = a.a`` (complex, not the modulus).
    """
    a0, vec = pauli_coefficients(np.asarray(a, dtype=complex))
    s2 = vec @ vec
    s = np.sqrt(s2)
    if abs(s) < _SMALL:
        # series keep the result exact to double precision near s = 0
        c = 1 + s2 / 2 + s2 * s2 / 24
        sh = 1 + s2 / 6 + s2 * s2 / 120
    else:
        c = np.cosh(s)
        sh = np.sinh(s) / s
    return np.exp(a0) * from_pauli(c, sh * vec)


def mat_exp_batch(a0: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Vectorised ``mat_exp`` for ``a0`` of shape (n,) and ``vec`` of shape (n, 3)."""
    a0 = np.asarray(a0, dtype=complex)
    vec = np.asarray(vec, dtype=complex)
    s2 = np.einsum("ij,ij->i", vec, vec)
    s = np.sqrt(s2)
    small = np.abs(s) < _SMALL
    safe = np.where(small, 1.0, s)
    c = np.where(small, 1 + s2 / 2 + s2 * s2 / 24, np.cosh(safe))
    sh = np.where(small, 1 + s2 / 6 + s2 * s2 / 120, np.sinh(safe) / safe)
    pre = np.exp(a0)
    out = np.empty((len(a0), 2, 2), dtype=complex)
    bx, by, bz = (sh[:, None] * vec).T
    out[:, 0, 0] = pre * (c + bz)
    out[:, 0, 1] = pre * (bx - 1j * by)
    out[:, 1, 0] = pre * (bx + 1j * by)
    out[:, 1, 1] = pre * (c - bz)
    return out


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def eig_herm(a: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form eigendecomposition of a Hermitian 2x2 matrix.

    Returns ascending eigenvalues and a matrix whose columns are the
    corresponding orthonormal eigenvectors (ground state first).  Phases are
    fixed so that the first non-negligible component of each vector is real
    and positive.
    """
    a = np.asarray(a, dtype=complex)
    if np.max(np.abs(a - dagger(a))) > tol:
        raise NotHermitian(f"matrix is not Hermitian to {tol:g}")
    a0, vec = pauli_coefficients(a)
    a0 = a0.real
    x, y, z = vec.real
    norm = np.sqrt(x * x + y * y + z * z)
    if norm == 0.0:
        return np.array([a0, a0]), I2.copy()
    # |+> along the Bloch vector; pick the better-conditioned of two forms
    if z >= 0:
        vp = np.array([z + norm, x + 1j * y])
    else:
        vp = np.array([x - 1j * y, norm - z])
    vp = vp / np.linalg.norm(vp)
    vm = np.array([-np.conj(vp[1]), np.conj(vp[0])])
    vecs = np.column_stack([_fix_phase(vm), _fix_phase(vp)])
    return np.array([a0 - norm, a0 + norm]), vecs


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = 0 if abs(v[0]) > 1e-12 else 1
    return v * (abs(v[k]) / v[k])


def is_density_matrix(rho: np.ndarray, tol: float = 1e-12) -> bool:
    rho = np.asarray(rho)
    if rho.shape != (2, 2) or not np.all(np.isfinite(rho)):
        return False
    if np.max(np.abs(rho - dagger(rho))) > tol:
        return False
    if abs(np.trace(rho) - 1) > tol:
        return False
    return bool(np.linalg.eigvalsh((rho + dagger(rho)) / 2).min() >= -tol)


def check_density_matrix(rho: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Raise InvalidDensityMatrix when validation is on and ``rho`` is not a state."""
    if _VALIDATE and not is_density_matrix(rho, tol):
        raise InvalidDensityMatrix(f"not a valid density matrix:\n{rho}")
    return rho


def _herm_eigvals(rho: np.ndarray) -> np.ndarray:
    a0, vec = pauli_coefficients(rho)
    n = np.linalg.norm(vec.real)
    return np.array([a0.real - n, a0.real + n])


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """(1/2)||rho - sigma||_1; for traceless Hermitian 2x2 differences this is the Bloch-vector gap."""
    _, vec = pauli_coefficients(np.asarray(rho) - np.asarray(sigma))
    return float(np.linalg.norm(vec))


def _xlogx(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, None)
    return np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """S(rho) = -Tr rho ln rho in nats."""
    return float(-np.sum(_xlogx(_herm_eigvals(rho))))


def shannon_entropy(p) -> float:
    return float(-np.sum(_xlogx(np.asarray(p, dtype=float))))


def matrix_log(sigma: np.ndarray) -> np.ndarray:
    vals, vecs = eig_herm(sigma)
    if vals.min() <= 0:
        raise InvalidDensityMatrix("matrix log needs a full-rank operator")
    return vecs @ np.diag(np.log(vals)) @ dagger(vecs)


def relative_entropy(rho: np.ndarray, sigma: np.ndarray) -> float:
    """D(rho || sigma) = Tr rho (ln rho - ln sigma), with sigma full rank."""
    vals, vecs = eig_herm((rho + dagger(rho)) / 2, tol=1e-8)
    log_sigma = matrix_log((sigma + dagger(sigma)) / 2)
    cross = sum(vals[k] * (np.conj(vecs[:, k]) @ log_sigma @ vecs[:, k]).real for k in range(2) if vals[k] > 0)
    return float(np.sum(_xlogx(vals)) - cross)


# --- Bloch / superoperator helpers -----------------------------------------


def to_bloch(rho: np.ndarray) -> np.ndarray:
    """(1, x, y, z) with x = Tr(sigma_x rho) etc."""
    return np.array([np.trace(p @ rho).real for p in PAULI])


def from_bloch(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return 0.5 * (v[0] * I2 + v[1] * SX + v[2] * SY + v[3] * SZ)


def superop(fn) -> np.ndarray:
    """Real 4x4 Pauli-basis matrix of a linear map ``fn`` on 2x2 operators."""
    out = np.empty((4, 4))
    for j, pj in enumerate(PAULI):
        image = fn(pj)
        for i, pi in enumerate(PAULI):
            out[i, j] = 0.5 * np.trace(pi @ image).real
    return out


def unitary_superop(u: np.ndarray) -> np.ndarray:
    ud = dagger(u)
    return superop(lambda x: u @ x @ ud)


def apply_superop(t: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return from_bloch(t @ to_bloch(rho))


def choi_matrix(t: np.ndarray) -> np.ndarray:
    """Choi matrix sum_ij E(|i><j|) (x) |i><j| of a Pauli-basis superoperator."""
    choi = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            eij = np.zeros((2, 2), dtype=complex)
            eij[i, j] = 1.0
            coeffs = np.array([np.trace(p @ eij) for p in PAULI])
            image = 0.5 * sum((t @ coeffs)[k] * PAULI[k] for k in range(4))
            choi += np.kron(image, eij)
    return choi


def polar_unitary(a: np.ndarray) -> np.ndarray:
    """Nearest unitary to ``a`` in Frobenius norm."""
    w, _, vh = np.linalg.svd(a)
    return w @ vh
