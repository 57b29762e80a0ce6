"""Shannon distinguishability of two equiprobable states or distributions.

All logarithms are base 2, so information is in bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import qmc

from . import linalg
from .linalg import ShapeError

PROB_FLOOR = 1e-15
SUM_TOL = 1e-10


class DomainError(ValueError):
    pass


class UnsupportedError(ValueError):
    pass


def binary_entropy_info(p: float) -> float:
    """``I_2(p) = 1 + p log p + (1-p) log (1-p)``, with ``0 log 0 = 0``."""
    if p < -1e-12 or p > 1 + 1e-12:
        raise DomainError(f"probability {p} outside [0, 1]")
    p = min(max(p, 0.0), 1.0)
    out = 1.0
    for q in (p, 1.0 - p):
        if q > 0.0:
            out += q * np.log2(q)
    return float(min(max(out, 0.0), 1.0))


@dataclass(frozen=True)
class BinaryChannelDist:
    """Conditional outcome distributions ``p0(x)``, ``p1(x)`` for input bits 0 and 1."""

    p0: np.ndarray
    p1: np.ndarray

    def __post_init__(self):
        p0 = np.asarray(self.p0, dtype=float).reshape(-1)
        p1 = np.asarray(self.p1, dtype=float).reshape(-1)
        if p0.shape != p1.shape:
            raise ShapeError("p0 and p1 must have the same number of outcomes")
        if np.any(p0 < -1e-12) or np.any(p1 < -1e-12):
            raise DomainError("negative probability")
        p0 = np.where(p0 < PROB_FLOOR, 0.0, p0)
        p1 = np.where(p1 < PROB_FLOOR, 0.0, p1)
        for name, p in (("p0", p0), ("p1", p1)):
            if abs(p.sum() - 1.0) > SUM_TOL:
                raise DomainError(f"{name} sums to {p.sum():.15g}, not 1")
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "p1", p1)

    @classmethod
    def from_outcomes(cls, outcomes: Sequence[tuple[float, float]]) -> "BinaryChannelDist":
        arr = np.asarray(outcomes, dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])


def sd_distributions(d: BinaryChannelDist) -> float:
    """Mutual information between an equiprobable bit and the outcome."""
    total = d.p0 + d.p1
    mask = total > 0
    px = 0.5 * total[mask]
    post0 = d.p0[mask] / total[mask]
    info = sum(float(w) * binary_entropy_info(float(q)) for w, q in zip(px, post0))
    return min(max(info, 0.0), 1.0)


@dataclass(frozen=True)
class Povm:
    elements: tuple[np.ndarray, ...]

    def __post_init__(self):
        elems = tuple(linalg.as_matrix(e) for e in self.elements)
        if not elems:
            raise ShapeError("a POVM needs at least one element")
        d = elems[0].shape[0]
        for e in elems:
            if e.shape != (d, d):
                raise ShapeError("POVM elements must all be d x d")
            if not linalg.is_hermitian(e):
                raise DomainError("POVM element is not Hermitian")
            # E + tol*I positive definite <=> min eigenvalue > -tol
            try:
                np.linalg.cholesky(e + 2e-10 * np.eye(d))
            except np.linalg.LinAlgError:
                raise DomainError("POVM element has a negative eigenvalue") from None
        resid = np.max(np.abs(sum(elems) - np.eye(d)))
        if resid > SUM_TOL:
            raise DomainError(f"POVM elements do not sum to identity (residual {resid:.3e})")
        object.__setattr__(self, "elements", elems)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @classmethod
    def computational(cls, d: int) -> "Povm":
        return cls(tuple(linalg.projector(linalg.basis_ket(i, d)) for i in range(d)))

    @classmethod
    def random(cls, d: int, outcomes: int, rng: np.random.Generator) -> "Povm":
        """``E_x = V_x^dag V_x`` for the blocks ``V_x`` of a random isometry."""
        g = rng.normal(size=(outcomes * d, d)) + 1j * rng.normal(size=(outcomes * d, d))
        q, _ = np.linalg.qr(g)
        blocks = q.reshape(outcomes, d, d)
        elems = [b.conj().T @ b for b in blocks]
        elems = [0.5 * (e + e.conj().T) for e in elems]
        return cls(tuple(elems))


def outcome_probabilities(rho, e: Povm) -> np.ndarray:
    rho = linalg.as_matrix(rho)
    if rho.shape != (e.dim, e.dim):
        raise ShapeError(f"state of shape {rho.shape} vs POVM of dim {e.dim}")
    # Tr(rho E) = sum_ij rho_ij E_ji
    return np.array([np.sum(rho * el.T).real for el in e.elements])


def _renormalize(p: np.ndarray) -> np.ndarray:
    p = np.where(p < PROB_FLOOR, 0.0, p)
    return p / p.sum()


def sd_for_measurement(rho0, rho1, e: Povm) -> float:
    """Distinguishability of two states when measured with ``e``."""
    p0 = outcome_probabilities(rho0, e)
    p1 = outcome_probabilities(rho1, e)
    return sd_distributions(BinaryChannelDist(_renormalize(p0), _renormalize(p1)))


def _check_pair(rho0, rho1) -> tuple[np.ndarray, np.ndarray]:
    rho0 = linalg.as_matrix(rho0)
    rho1 = linalg.as_matrix(rho1)
    if rho0.shape != rho1.shape:
        raise ShapeError(f"states of shapes {rho0.shape} and {rho1.shape}")
    return rho0, rho1


def sd_trace_bound(rho0, rho1) -> float:
    """Upper bound ``Tr|rho0 - rho1| / 2`` on the optimal distinguishability."""
    rho0, rho1 = _check_pair(rho0, rho1)
    return 0.5 * linalg.trace_norm(rho0 - rho1)


def lift_povm(e: Povm, d2: int) -> Povm:
    """``E_x (x) Id_d2`` for every element."""
    ident = np.eye(d2, dtype=np.complex128)
    return Povm(tuple(linalg.kron(el, ident) for el in e.elements))


def _unit_vectors(d: int, resolution: int) -> np.ndarray:
    """First ``resolution`` points of a Halton sequence mapped to unit vectors in C^d.

    Prefixes of the sequence are nested, so a larger resolution only adds
    candidates.
    """
    if resolution <= 0 or d == 1:
        return np.ones((min(resolution, 1), d), dtype=np.complex128)
    dims = 2 * d - 2
    u = qmc.Halton(d=dims, scramble=False).random(resolution + 1)[1:]
    # magnitudes: hyperspherical angles in [0, pi/2]; phases in [0, 2 pi)
    angles = u[:, : d - 1] * (np.pi / 2)
    phases = u[:, d - 1:] * (2 * np.pi)
    mags = np.ones((resolution, d))
    for k in range(d - 1):
        mags[:, k] *= np.cos(angles[:, k])
        mags[:, k + 1:] *= np.sin(angles[:, k])[:, None]
    vecs = mags.astype(np.complex128)
    vecs[:, 1:] *= np.exp(1j * phases)
    return vecs


def sd_optimize_small(rho0, rho1, resolution: int = 1000) -> float:
    """Best distinguishability over two-outcome rank-1 projective measurements.

    Candidates are ``{|phi><phi|, I - |phi><phi|}`` with ``phi`` drawn from
    the eigenvectors of ``rho0 - rho1`` followed by a deterministic
    quasi-random grid of ``resolution`` unit vectors. The result is a lower
    bound on the optimal value and never decreases as ``resolution`` grows.
    """
    rho0, rho1 = _check_pair(rho0, rho1)
    d = rho0.shape[0]
    if d > 4:
        raise UnsupportedError(f"grid search supports dimension <= 4, got {d}")
    _, eigvecs = linalg.hermitian_eigh(rho0 - rho1)
    cands = np.vstack([eigvecs.T, _unit_vectors(d, resolution)])
    # <phi|rho|phi> for each candidate row phi
    q0 = np.einsum("ki,ij,kj->k", cands.conj(), rho0, cands).real
    q1 = np.einsum("ki,ij,kj->k", cands.conj(), rho1, cands).real
    return float(np.max(_sd_two_outcome(np.clip(q0, 0.0, 1.0), np.clip(q1, 0.0, 1.0))))


def _xlog2x(p: np.ndarray) -> np.ndarray:
    safe = np.where(p > PROB_FLOOR, p, 1.0)
    return np.where(p > PROB_FLOOR, p * np.log2(safe), 0.0)


def _sd_two_outcome(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vectorized SD of the distributions ``(a, 1-a)`` and ``(b, 1-b)``."""
    out = np.zeros_like(a)
    for p0, p1 in ((a, b), (1.0 - a, 1.0 - b)):
        tot = p0 + p1
        safe = np.where(tot > 0, tot, 1.0)
        post = np.clip(p0 / safe, 0.0, 1.0)
        i2 = 1.0 + _xlog2x(post) + _xlog2x(1.0 - post)
        out += np.where(tot > 0, 0.5 * tot * i2, 0.0)
    return np.clip(out, 0.0, 1.0)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """``G G^dag / Tr`` for a complex Gaussian ``d x rank`` matrix ``G``."""
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
