"""Collective attacks described by Eve's four probe states.

Eve's unitary maps ``|E>|0>`` to ``|e00>|0> + |e01>|1>`` and ``|E>|1>`` to
``|e10>|0> + |e11>|1>`` (z basis). Composite kets are ordered probe first,
qubit second, so the probe index is the slow one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg

VALID_TOL = 1e-10
ROUTE_TOL = 1e-8


class AttackError(ValueError):
    pass


class ConsistencyError(AttackError):
    pass


@dataclass(frozen=True)
class AttackSpec:
    probe_dim: int
    e00: np.ndarray
    e01: np.ndarray
    e10: np.ndarray
    e11: np.ndarray

    def __post_init__(self):
        for name in ("e00", "e01", "e10", "e11"):
            vec = linalg.ket(getattr(self, name))
            if vec.shape != (self.probe_dim,):
                raise AttackError(f"{name} has dim {vec.size}, expected probe_dim={self.probe_dim}")
            if not np.all(np.isfinite(vec)):
                raise AttackError(f"{name} has non-finite amplitudes")
            object.__setattr__(self, name, vec)

    def vectors(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return self.e00, self.e01, self.e10, self.e11

    def unitary_columns(self) -> np.ndarray:
        """Images of ``|E>|0>`` and ``|E>|1>`` as columns (probe-major layout)."""
        phi0 = np.column_stack([self.e00, self.e01]).reshape(-1)
        phi1 = np.column_stack([self.e10, self.e11]).reshape(-1)
        return np.column_stack([phi0, phi1])

    def to_dict(self) -> dict:
        def enc(v):
            return [[float(z.real), float(z.imag)] for z in v]

        return {
            "probe_dim": self.probe_dim,
            "e00": enc(self.e00),
            "e01": enc(self.e01),
            "e10": enc(self.e10),
            "e11": enc(self.e11),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AttackSpec":
        try:
            probe_dim = int(d["probe_dim"])
            vecs = {}
            for name in ("e00", "e01", "e10", "e11"):
                pairs = d[name]
                vecs[name] = np.array([complex(float(re), float(im)) for re, im in pairs])
        except KeyError as exc:
            raise AttackError(f"attack is missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise AttackError(f"malformed attack: {exc}") from None
        return cls(probe_dim, **vecs)


def identity_attack(probe_dim: int = 1) -> AttackSpec:
    e = linalg.basis_ket(0, probe_dim)
    zero = np.zeros(probe_dim, dtype=np.complex128)
    return AttackSpec(probe_dim, e, zero, zero, e)


def cnot_attack() -> AttackSpec:
    """Eve copies the z value into a two-level probe."""
    zero = np.zeros(2, dtype=np.complex128)
    return AttackSpec(2, linalg.basis_ket(0, 2), zero, zero, linalg.basis_ket(1, 2))


def symmetric_attack(theta: float) -> AttackSpec:
    """Error-free in z, with ``<e00|e11> = cos 2 theta``."""
    zero = np.zeros(2, dtype=np.complex128)
    e00 = np.array([math.cos(theta), math.sin(theta)], dtype=np.complex128)
    e11 = np.array([math.cos(theta), -math.sin(theta)], dtype=np.complex128)
    return AttackSpec(2, e00, zero, zero, e11)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR factorization of a Ginibre matrix."""
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def random_attack(probe_dim: int, rng: np.random.Generator) -> AttackSpec:
    """Apply a random unitary on probe (x) qubit to ``|0>|0>`` and ``|0>|1>``."""
    u = random_unitary(2 * probe_dim, rng)
    phi0 = u[:, 0].reshape(probe_dim, 2)
    phi1 = u[:, 1].reshape(probe_dim, 2)
    return AttackSpec(probe_dim, phi0[:, 0], phi0[:, 1], phi1[:, 0], phi1[:, 1])


@dataclass(frozen=True)
class Violation:
    invariant: str
    residual: float


def validate(a: AttackSpec, tol: float = VALID_TOL) -> list[Violation]:
    """Violated invariants of ``a``; an empty list means the spec is valid."""
    e00, e01, e10, e11 = a.vectors()
    checks = [
        ("row 0 norm: <e00|e00> + <e01|e01> = 1", abs(np.vdot(e00, e00).real + np.vdot(e01, e01).real - 1.0)),
        ("row 1 norm: <e10|e10> + <e11|e11> = 1", abs(np.vdot(e10, e10).real + np.vdot(e11, e11).real - 1.0)),
        ("orthogonality: <e00|e10> + <e01|e11> = 0", abs(np.vdot(e00, e10) + np.vdot(e01, e11))),
    ]
    return [Violation(name, float(res)) for name, res in checks if res > tol]


def _require_valid(a: AttackSpec) -> None:
    bad = validate(a)
    if bad:
        raise AttackError("invalid attack: " + "; ".join(f"{v.invariant} (residual {v.residual:.3e})" for v in bad))


def to_x_basis(a: AttackSpec) -> AttackSpec:
    """Re-express the attack with Alice and Bob both using the x basis."""
    _require_valid(a)
    e00, e01, e10, e11 = a.vectors()
    return AttackSpec(
        a.probe_dim,
        0.5 * ((e00 + e11) + (e10 + e01)),
        0.5 * ((e00 - e11) + (e10 - e01)),
        0.5 * ((e00 - e11) - (e10 - e01)),
        0.5 * ((e00 + e11) - (e10 + e01)),
    )


@dataclass(frozen=True)
class ErrorRates:
    pe_z: float
    pe_x: float

    @property
    def pe(self) -> float:
        return 0.5 * (self.pe_z + self.pe_x)

    def to_dict(self) -> dict:
        return {"pe_z": self.pe_z, "pe_x": self.pe_x, "pe": self.pe}


def _direct_error(a: AttackSpec) -> float:
    return 0.5 * float(np.vdot(a.e01, a.e01).real + np.vdot(a.e10, a.e10).real)


def error_rates(a: AttackSpec) -> ErrorRates:
    """Bob's error probabilities in each basis and overall.

    The x-basis rate is computed twice: from the z-basis inner products and
    directly from the x-basis probe states. The routes must agree.
    """
    _require_valid(a)
    pe_z = _direct_error(a)
    pe_x = 0.5 * (1.0 - float((np.vdot(a.e00, a.e11) + np.vdot(a.e10, a.e01)).real))
    pe_x_direct = _direct_error(to_x_basis(a))
    if abs(pe_x - pe_x_direct) > ROUTE_TOL:
        raise ConsistencyError(f"x-basis error routes disagree: {pe_x!r} vs {pe_x_direct!r}")
    clip = lambda p: min(max(p, 0.0), 1.0)  # noqa: E731
    return ErrorRates(clip(pe_z), clip(pe_x))


@dataclass(frozen=True)
class PurifiedPair:
    """Two unit vectors ``cos a |0> +- sin a |1>`` at overlap ``cos 2a``."""

    alpha: float

    def states(self) -> tuple[np.ndarray, np.ndarray]:
        c, s = math.cos(self.alpha), math.sin(self.alpha)
        return np.array([c, s], dtype=np.complex128), np.array([c, -s], dtype=np.complex128)

    @property
    def overlap(self) -> float:
        return math.cos(2 * self.alpha)


def purifications(a: AttackSpec) -> tuple[np.ndarray, np.ndarray]:
    """``|psi_0> = |e00>|0> + |e01>|1>`` and ``|psi_1> = |e11>|0> + |e10>|1>``."""
    psi0 = np.column_stack([a.e00, a.e01]).reshape(-1)
    psi1 = np.column_stack([a.e11, a.e10]).reshape(-1)
    return psi0, psi1


def disturbance_angle(a: AttackSpec, basis: str = "z") -> PurifiedPair:
    """Angle between Eve's two purified states for the given basis."""
    if basis == "x":
        a = to_x_basis(a)
    elif basis != "z":
        raise ValueError(f"basis must be 'z' or 'x', not {basis!r}")
    _require_valid(a)
    overlap = abs(np.vdot(a.e00, a.e11) + np.vdot(a.e01, a.e10))
    return PurifiedPair(0.5 * math.acos(min(1.0, overlap)))


def eve_view(a: AttackSpec, bit: int) -> np.ndarray:
    """Eve's reduced state when Alice sent ``bit`` in the z basis."""
    if bit == 0:
        return linalg.projector(a.e00) + linalg.projector(a.e01)
    return linalg.projector(a.e10) + linalg.projector(a.e11)


def per_bit_noise_from_attacks(attacks: Sequence[AttackSpec]):
    """Per-position disturbance angles and error rates.

    The angle is the larger of the z and x angles, and the error
    probability is the basis average ``pe``.
    """
    from .security import PerBitNoise

    alphas, ps = [], []
    for a in attacks:
        alphas.append(max(disturbance_angle(a, "z").alpha, disturbance_angle(a, "x").alpha))
        ps.append(error_rates(a).pe)
    return PerBitNoise(alphas, ps)
