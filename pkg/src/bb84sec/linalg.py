"""Dense complex linear algebra on numpy arrays.

Kets are 1-d ``complex128`` arrays, operators are 2-d ``complex128`` arrays.
Eigenvalues of Hermitian operators come from a cyclic complex Jacobi solver
implemented here; numpy is only used for storage and elementwise arithmetic.
"""

from __future__ import annotations

import math

import numpy as np

#: Largest dimension any tensor product or operator may reach.
MAX_DIM = 2 ** 12

EIG_TOL = 1e-12
EIG_MAX_SWEEPS = 100
HERMITIAN_TOL = 1e-10


class LinalgError(Exception):
    pass


class CapacityError(LinalgError):
    pass


class ShapeError(LinalgError):
    pass


class NotHermitianError(LinalgError):
    pass


class ConvergenceError(LinalgError):
    pass


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-d operator, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise LinalgError("operator has non-finite entries")
    return a


def ket(amplitudes, normalized: bool = False) -> np.ndarray:
    """Build a state vector; ``normalized=True`` enforces unit norm within 1e-12."""
    v = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    if v.size == 0:
        raise ShapeError("state vector must have dim >= 1")
    if normalized and abs(np.vdot(v, v).real - 1.0) > 1e-12:
        raise LinalgError("state vector flagged normalized has norm != 1")
    return v


def basis_ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    return np.outer(v, v.conj())


def dagger(m) -> np.ndarray:
    return np.conj(np.transpose(m))


def kron(a, b) -> np.ndarray:
    """Tensor product, blocks ordered by the first factor's indices."""
    a = as_matrix(a)
    b = as_matrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows > MAX_DIM or cols > MAX_DIM:
        raise CapacityError(f"tensor product of size {rows}x{cols} exceeds cap {MAX_DIM}")
    out = a[:, None, :, None] * b[None, :, None, :]
    return out.reshape(rows, cols)


def kron_all(*factors) -> np.ndarray:
    out = np.ones((1, 1), dtype=np.complex128)
    for f in factors:
        out = kron(out, f)
    return out


def partial_trace(m, dims: tuple[int, int], keep: str = "first") -> np.ndarray:
    """Trace out one factor of a bipartite operator on a ``d1*d2`` space."""
    m = as_matrix(m)
    d1, d2 = dims
    if m.shape != (d1 * d2, d1 * d2):
        raise ShapeError(f"operator of shape {m.shape} is not {d1}*{d2} square")
    t = m.reshape(d1, d2, d1, d2)
    if keep == "first":
        return np.einsum("ijkj->ik", t)
    if keep == "second":
        return np.einsum("ijil->jl", t)
    raise ValueError(f"keep must be 'first' or 'second', not {keep!r}")


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m - dagger(m)), initial=0.0) <= tol)


def _check_hermitian(m: np.ndarray) -> None:
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"operator of shape {m.shape} is not square")
    if m.shape[0] > MAX_DIM:
        raise CapacityError(f"dimension {m.shape[0]} exceeds cap {MAX_DIM}")
    scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
    resid = float(np.max(np.abs(m - dagger(m)), initial=0.0))
    if resid > HERMITIAN_TOL * scale:
        raise NotHermitianError(f"operator is not Hermitian (residual {resid:.3e})")


def _jacobi(a: np.ndarray, want_vectors: bool):
    """Cyclic complex Jacobi sweeps on a Hermitian block (copied, not modified)."""
    n = a.shape[0]
    a = a.copy()
    v = np.eye(n, dtype=np.complex128) if want_vectors else None
    if n == 1:
        return np.array([a[0, 0].real]), v
    norm = math.sqrt(float(np.sum(np.abs(a) ** 2)))
    if norm == 0.0:
        return np.zeros(n), v
    target = EIG_TOL * norm
    for _ in range(EIG_MAX_SWEEPS):
        off = np.abs(a) ** 2
        np.fill_diagonal(off, 0.0)
        if math.sqrt(float(off.sum())) <= target:
            return np.real(np.diag(a)).copy(), v
        # rotations below this size cannot move the off-diagonal norm
        skip = 1e-3 * target / n
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= skip:
                    continue
                phase = apq / mag
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                if theta == 0.0:
                    t = 1.0
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # G = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                if v is not None:
                    v[:, idx] = v[:, idx] @ g
    raise ConvergenceError(f"Jacobi did not converge in {EIG_MAX_SWEEPS} sweeps")


def _components(m: np.ndarray, drop_tol: float) -> list[np.ndarray]:
    """Index sets of the connected components of the sparsity graph of ``m``."""
    n = m.shape[0]
    cutoff = drop_tol * float(np.max(np.abs(m), initial=0.0))
    adj = np.abs(m) > cutoff
    seen = np.zeros(n, dtype=bool)
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = True
        stack = [start]
        members = [start]
        while stack:
            i = stack.pop()
            for j in np.flatnonzero(adj[i] & ~seen):
                seen[j] = True
                stack.append(int(j))
                members.append(int(j))
        comps.append(np.array(sorted(members)))
    return comps


def hermitian_eigh(m, drop_tol: float = 1e-14) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvectors (columns).

    The operator is first split into the connected components of its
    nonzero pattern; entries smaller than ``drop_tol`` times the largest
    entry do not connect components. Each block is diagonalized by cyclic
    Jacobi rotations until its off-diagonal Frobenius norm falls below
    ``1e-12`` times the block norm.
    """
    m = as_matrix(m)
    _check_hermitian(m)
    m = 0.5 * (m + dagger(m))
    n = m.shape[0]
    vals = np.empty(n)
    vecs = np.zeros((n, n), dtype=np.complex128)
    col = 0
    for comp in _components(m, drop_tol):
        w, u = _jacobi(m[np.ix_(comp, comp)], want_vectors=True)
        k = len(comp)
        vals[col:col + k] = w
        vecs[comp, col:col + k] = u
        col += k
    order = np.argsort(-vals, kind="stable")
    return vals[order], vecs[:, order]


def hermitian_eigenvalues(m, drop_tol: float = 1e-14) -> np.ndarray:
    """All eigenvalues of a Hermitian operator, in descending order."""
    m = as_matrix(m)
    _check_hermitian(m)
    m = 0.5 * (m + dagger(m))
    vals = np.concatenate(
        [_jacobi(m[np.ix_(c, c)], want_vectors=False)[0] for c in _components(m, drop_tol)]
    )
    return np.sort(vals)[::-1]


def trace_norm(m) -> float:
    """Sum of absolute eigenvalues of a Hermitian operator."""
    return float(np.sum(np.abs(hermitian_eigenvalues(m))))


def is_density(m, tol: float = 1e-10) -> bool:
    m = np.asarray(m, dtype=np.complex128)
    if not is_hermitian(m, tol):
        return False
    if abs(np.trace(m).real - 1.0) > tol:
        return False
    return bool(hermitian_eigenvalues(m)[-1] >= -tol)
