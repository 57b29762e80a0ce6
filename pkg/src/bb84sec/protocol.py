"""BB84 sifting and error-rate testing driven by attack-induced error rates.

Randomness comes from numpy's ``PCG64`` bit generator (PCG XSL RR 128/64)
seeded with the config's 64-bit ``rng_seed``. Draws happen in a fixed
order (Alice's bits, Alice's bases, Bob's bases, Bob's flip uniforms,
Bob's guesses on mismatched rounds, the test shuffle), so a seed fully
determines a transcript.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence, Union

import numpy as np
from scipy.stats import binom

from .attack import AttackSpec, error_rates
from .security import hoeffding_tail


class ProtocolError(ValueError):
    pass


class ProtocolAbort(ProtocolError):
    pass


@dataclass(frozen=True)
class ProtocolConfig:
    n_raw: int
    p_allowed: float
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_raw < 4:
            raise ProtocolError(f"n_raw must be >= 4, got {self.n_raw}")
        if not 0.0 <= self.p_allowed <= 1.0:
            raise ProtocolError(f"p_allowed must be in [0, 1], got {self.p_allowed}")
        if not 0 <= self.rng_seed < 2 ** 64:
            raise ProtocolError("rng_seed must be a 64-bit unsigned integer")

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.rng_seed))


@dataclass
class Transcript:
    alice_bits: list[int]
    alice_bases: list[int]   # 0 = z, 1 = x
    bob_bases: list[int]
    bob_bits: list[int]
    sifted_indices: list[int]
    test_indices: list[int]
    key_indices: list[int]
    p_test: float
    accepted: bool

    @property
    def n_sifted(self) -> int:
        return len(self.test_indices) + len(self.key_indices)

    def to_dict(self) -> dict:
        return asdict(self)


ErrorModel = Union[Sequence[float], AttackSpec, Sequence[AttackSpec]]


def matched_error_probs(n_raw: int, bases: np.ndarray, model: ErrorModel) -> np.ndarray:
    """Error probability of each raw round when Bob measures in Alice's basis."""
    if isinstance(model, AttackSpec):
        rates = error_rates(model)
        return np.where(bases == 0, rates.pe_z, rates.pe_x)
    items = list(model)
    if len(items) != n_raw:
        raise ProtocolError(f"per-bit error model has {len(items)} entries for {n_raw} rounds")
    if items and isinstance(items[0], AttackSpec):
        rz = np.array([error_rates(a).pe_z for a in items])
        rx = np.array([error_rates(a).pe_x for a in items])
        return np.where(bases == 0, rz, rx)
    probs = np.asarray(items, dtype=float)
    if np.any(probs < 0) or np.any(probs > 1):
        raise ProtocolError("per-bit error probabilities must lie in [0, 1]")
    return probs


def run_protocol(cfg: ProtocolConfig, per_bit_error: ErrorModel) -> Transcript:
    """Simulate one run: encode, sift, sample half the sifted bits for testing."""
    rng = cfg.rng()
    n = cfg.n_raw
    alice_bits = rng.integers(0, 2, size=n)
    alice_bases = rng.integers(0, 2, size=n)
    bob_bases = rng.integers(0, 2, size=n)
    flip_u = rng.random(size=n)
    guesses = rng.integers(0, 2, size=n)

    perr = matched_error_probs(n, alice_bases, per_bit_error)
    matched = alice_bases == bob_bases
    flips = (flip_u < perr).astype(np.int64)
    bob_bits = np.where(matched, alice_bits ^ flips, guesses)

    sifted = np.flatnonzero(matched)
    if sifted.size == 0 or sifted.size == 1:
        raise ProtocolAbort("no usable sifted bits")
    if sifted.size % 2:
        sifted = sifted[:-1]
    order = rng.permutation(sifted.size)
    n_test = sifted.size // 2
    test = np.sort(sifted[order[:n_test]])
    key = np.sort(sifted[order[n_test:]])
    p_test = float(np.mean(alice_bits[test] != bob_bits[test]))
    return Transcript(
        alice_bits=alice_bits.tolist(),
        alice_bases=alice_bases.tolist(),
        bob_bases=bob_bases.tolist(),
        bob_bits=bob_bits.tolist(),
        sifted_indices=np.flatnonzero(matched).tolist(),
        test_indices=test.tolist(),
        key_indices=key.tolist(),
        p_test=p_test,
        accepted=p_test <= cfg.p_allowed,
    )


@dataclass
class HoeffdingResult:
    n_sifted: int
    n_test: int
    delta: float
    trials: int
    violations: int
    empirical_rate: float
    bound: float
    exact_tail: float | None
    three_sigma_limit: float
    within_bound: bool

    def to_dict(self) -> dict:
        return asdict(self)


def hoeffding_monte_carlo(cfg: ProtocolConfig, per_bit_error: Sequence[float], delta: float, trials: int) -> HoeffdingResult:
    """Monte-Carlo frequency of ``mean(p_i) > p_test + 2 delta``.

    ``per_bit_error`` holds the error probabilities of the ``n'`` sifted
    bits (one is dropped if ``n'`` is odd). Each trial draws Bob's errors,
    picks ``n'/2`` test positions uniformly without replacement and records
    whether the fixed mean ``mean(p_i)`` exceeds the trial's ``p_test`` by
    more than ``2 delta``. ``exact_tail`` is the exact binomial probability
    of that event when all ``p_i`` are equal.
    """
    if trials < 1:
        raise ProtocolError("trials must be >= 1")
    if not delta > 0:
        raise ProtocolError("delta must be > 0")
    p = np.asarray(per_bit_error, dtype=float)
    if p.size % 2:
        p = p[:-1]
    if p.size < 2:
        raise ProtocolError("need at least two sifted bits")
    if np.any(p < 0) or np.any(p > 1):
        raise ProtocolError("per-bit error probabilities must lie in [0, 1]")
    n_sifted = p.size
    n_test = n_sifted // 2
    mean_p = float(p.mean())
    rng = cfg.rng()

    violations = 0
    chunk = max(1, 2_000_000 // n_sifted)
    done = 0
    while done < trials:
        k = min(chunk, trials - done)
        errors = rng.random(size=(k, n_sifted)) < p
        test_pos = np.argsort(rng.random(size=(k, n_sifted)), axis=1)[:, :n_test]
        p_test = np.take_along_axis(errors, test_pos, axis=1).mean(axis=1)
        violations += int(np.count_nonzero(mean_p > p_test + 2 * delta))
        done += k

    rate = violations / trials
    bound = hoeffding_tail(n_test, delta)
    capped = min(bound, 1.0)
    limit = capped + 3.0 * math.sqrt(capped * (1.0 - capped) / trials)
    exact = None
    if np.all(p == p[0]):
        # P[errors < n_test (p - 2 delta)], strict inequality
        thresh = n_test * (mean_p - 2 * delta)
        k_max = math.ceil(thresh) - 1
        exact = float(binom.cdf(k_max, n_test, p[0])) if k_max >= 0 else 0.0
    return HoeffdingResult(
        n_sifted=n_sifted,
        n_test=n_test,
        delta=delta,
        trials=trials,
        violations=violations,
        empirical_rate=rate,
        bound=bound,
        exact_tail=exact,
        three_sigma_limit=limit,
        within_bound=rate <= limit,
    )
