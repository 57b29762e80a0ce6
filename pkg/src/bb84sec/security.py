"""Eve's lifted states for a one-bit parity key and bounds on her information.

Basis index convention: the bit string ``j = j_1 ... j_n`` labels the ket
at index ``sum(j_i * 2**(n-i))``; bit 1 is the most significant.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import gf2, infotheory, linalg
from .gf2 import BitString, ParityCode

ANGLE_TOL = 1e-10
BRUTE_MAX_N = 10


class SecurityError(ValueError):
    pass


class DomainError(SecurityError):
    pass


@dataclass(frozen=True)
class PerBitNoise:
    """Disturbance angles and Bob's error probabilities for each key bit.

    When ``ps`` is omitted it is set to ``sin(alpha)**2 / 2``, the smallest
    error probability consistent with each angle; ``worst_case_consistent``
    records that this happened.
    """

    alphas: tuple[float, ...]
    ps: tuple[float, ...] | None = None
    worst_case_consistent: bool = field(default=False, compare=False)

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        if not alphas:
            raise DomainError("need at least one bit")
        for a in alphas:
            if not -ANGLE_TOL <= a <= math.pi / 4 + ANGLE_TOL:
                raise DomainError(f"angle {a} outside [0, pi/4]")
        if self.ps is None:
            ps = tuple(math.sin(a) ** 2 / 2 for a in alphas)
            object.__setattr__(self, "worst_case_consistent", True)
        else:
            ps = tuple(float(p) for p in self.ps)
        if len(ps) != len(alphas):
            raise DomainError(f"{len(alphas)} angles but {len(ps)} error probabilities")
        for a, p in zip(alphas, ps):
            if not 0.0 <= p <= 1.0:
                raise DomainError(f"error probability {p} outside [0, 1]")
            if math.sin(a) > math.sqrt(2 * p) + ANGLE_TOL:
                raise DomainError(f"sin({a}) exceeds sqrt(2 * {p})")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "ps", ps)

    @property
    def n(self) -> int:
        return len(self.alphas)

    @classmethod
    def uniform(cls, n: int, alpha: float) -> "PerBitNoise":
        return cls((alpha,) * n)


def _check_len(n: int, noise: PerBitNoise) -> None:
    if n != noise.n:
        raise gf2.LengthMismatch(f"string of length {n} vs noise for {noise.n} bits")


def coefficient_d(j: BitString, noise: PerBitNoise) -> float:
    """``prod_i (cos a_i if j_i == 0 else sin a_i)``."""
    _check_len(j.n, noise)
    out = 1.0
    for bit, a in zip(j.bits(), noise.alphas):
        out *= math.sin(a) if bit else math.cos(a)
    return out


def _d_vector(noise: PerBitNoise) -> np.ndarray:
    """All ``d_j`` indexed by basis index."""
    d = np.ones(1)
    for a in noise.alphas:
        d = np.kron(d, [math.cos(a), math.sin(a)])
    return d


def _check_capacity(n: int) -> None:
    if 2 ** n > linalg.MAX_DIM:
        raise linalg.CapacityError(f"2^{n} exceeds dimension cap {linalg.MAX_DIM}")


def build_psi_x(x: BitString, noise: PerBitNoise) -> np.ndarray:
    """Product state ``(x)_i (cos a_i |0> + (-1)^x_i sin a_i |1>)``."""
    _check_len(x.n, noise)
    _check_capacity(x.n)
    psi = np.ones(1)
    for bit, a in zip(x.bits(), noise.alphas):
        psi = np.kron(psi, [math.cos(a), -math.sin(a) if bit else math.sin(a)])
    return psi.astype(np.complex128)


def _psi_rows(xs: Sequence[BitString], noise: PerBitNoise) -> np.ndarray:
    n = noise.n
    idx = np.arange(2 ** n)
    d = _d_vector(noise)
    rows = np.empty((len(xs), 2 ** n))
    for k, x in enumerate(xs):
        parity = np.array([bin(x.value & j).count("1") & 1 for j in idx])
        rows[k] = d * (1 - 2 * parity)
    return rows


def mixture_rho(code: ParityCode, key_bit: int, noise: PerBitNoise) -> np.ndarray:
    """Equal mixture of ``|Psi_x><Psi_x|`` over all ``x`` consistent with the key bit and checks."""
    _check_len(code.n, noise)
    _check_capacity(code.n)
    xs = gf2.enumerate_solutions(code, key_bit)
    rows = _psi_rows(xs, noise)
    return (rows.T @ rows / len(xs)).astype(np.complex128)


def delta_analytic(code: ParityCode, noise: PerBitNoise) -> np.ndarray:
    """Closed form of ``mixture_rho(code, 0) - mixture_rho(code, 1)``.

    Only entries ``(j, j ^ v ^ v_s)`` survive, each equal to
    ``2 d_j d_{j ^ v ^ v_s} (-1)^{s.b}``.
    """
    _check_len(code.n, noise)
    _check_capacity(code.n)
    d = _d_vector(noise)
    idx = np.arange(2 ** code.n)
    out = np.zeros((2 ** code.n, 2 ** code.n))
    cw = gf2.coset_weights(code)
    for k, off in zip(cw.selectors, cw.offsets):
        sign = -1.0 if gf2.selector_parity(k, code.r, code.ecc_bits) else 1.0
        partner = idx ^ off.value
        out[idx, partner] += 2.0 * sign * d * d[partner]
    return out.astype(np.complex128)


def coset_trace_terms(code: ParityCode, noise: PerBitNoise) -> list[float]:
    """``2 prod_{i in v ^ v_s} sin(2 a_i)`` for every coset ``s``."""
    _check_len(code.n, noise)
    sines = np.sin(2 * np.asarray(noise.alphas))
    terms = []
    for off in gf2.coset_weights(code).offsets:
        terms.append(2.0 * float(np.prod(sines[off.support()])))
    return terms


def trace_norm_bound(code: ParityCode, noise: PerBitNoise) -> tuple[float, list[float]]:
    """Upper bound on ``Tr|Delta|`` and its per-coset terms; exact when r == 0."""
    terms = coset_trace_terms(code, noise)
    return float(sum(terms)), terms


def sd_upper_bound(code: ParityCode, noise: PerBitNoise) -> float:
    """``min(1, Tr-bound / 2)``: the trace-norm bound with its factor one half."""
    bound, _ = trace_norm_bound(code, noise)
    return min(1.0, 0.5 * bound)


def hoeffding_tail(n_test: int, delta: float) -> float:
    """``2 exp(-2 n_test delta^2)``."""
    if n_test < 1:
        raise DomainError(f"n_test must be >= 1, got {n_test}")
    if not delta > 0:
        raise DomainError(f"delta must be > 0, got {delta}")
    return 2.0 * math.exp(-2.0 * n_test * delta * delta)


def log2_hoeffding_tail(n_test: int, delta: float) -> float:
    hoeffding_tail(n_test, delta)  # domain checks
    return 1.0 - 2.0 * n_test * delta * delta / math.log(2.0)


@dataclass
class BoundReport:
    """Evaluated bounds for one parameter point.

    ``total_info_bound`` and ``sd_bound_loose`` bound the distinguishability
    by the full trace norm of the difference; ``total_info_bound_tight`` and
    ``sd_bound`` use half of it, the sharper valid constant. ``log2_*``
    fields stay finite when the linear values underflow.
    """

    n: int
    r: int
    alpha: float
    delta: float
    p_test: float
    mode: str
    per_coset_terms: list[float]
    hoeffding_tail: float
    total_info_bound: float
    total_info_bound_tight: float
    log2_first_term: float
    log2_hoeffding_tail: float
    log2_total_info_bound: float
    tr_delta_bound: float | None = None
    sd_bound: float | None = None
    sd_bound_loose: float | None = None
    noise_worst_case_consistent: bool | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _logsumexp2(values: Sequence[float]) -> float:
    if not values:
        return -math.inf
    m = max(values)
    if m == -math.inf:
        return m
    return m + math.log2(sum(2.0 ** (v - m) for v in values))


def _log2_coset_term(n: int, weight: int, p_test: float, delta: float) -> float:
    """log2 of ``2 [(16 n / w)(p_test + 2 delta)]^(w/2)``."""
    base = (16.0 * n / weight) * (p_test + 2 * delta)
    if base == 0.0:
        return -math.inf
    return 1.0 + 0.5 * weight * math.log2(base)


def total_info_bound(
    n: int,
    r: int,
    alpha_frac: float,
    p_test: float,
    delta: float,
    mode: str = "uniform",
    weights: Sequence[int] | None = None,
) -> BoundReport:
    """Bound on Eve's information about the key bit, including the sampling failure.

    ``uniform`` mode uses ``2^(r+1) [(16/alpha)(p_test + 2 delta)]^(alpha n/2)``;
    ``per_coset`` mode sums ``2 [(16 n/w_s)(p_test + 2 delta)]^(w_s/2)`` over
    the given coset weights. Both add ``2 exp(-2 n delta^2)`` and clamp at 1.
    """
    n, r = int(n), int(r)
    alpha_frac, p_test, delta = float(alpha_frac), float(p_test), float(delta)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if not 0 <= r < n:
        raise DomainError(f"r must satisfy 0 <= r < n, got r={r}, n={n}")
    if not 0 < alpha_frac <= 1:
        raise DomainError(f"alpha must be in (0, 1], got {alpha_frac}")
    if p_test < 0:
        raise DomainError(f"p_test must be >= 0, got {p_test}")
    if not delta > 0:
        raise DomainError(f"delta must be > 0, got {delta}")
    if mode == "uniform":
        base = (16.0 / alpha_frac) * (p_test + 2 * delta)
        exponent = alpha_frac * n / 2
        if base == 0.0:
            log2_first = -math.inf
        else:
            log2_first = (r + 1) + exponent * math.log2(base)
        log2_terms = [log2_first - r] * (2 ** r) if r <= 20 else []
        log2_coset_sum = log2_first
    elif mode == "per_coset":
        if weights is None or len(weights) != 2 ** r:
            raise DomainError(f"per_coset mode needs 2^r = {2 ** r} coset weights")
        if any(w < 1 or w > n for w in weights):
            raise DomainError("coset weights must lie in [1, n]")
        log2_terms = [_log2_coset_term(n, w, p_test, delta) for w in weights]
        log2_coset_sum = _logsumexp2(log2_terms)
    else:
        raise DomainError(f"mode must be 'uniform' or 'per_coset', not {mode!r}")
    log2_tail = log2_hoeffding_tail(n, delta)
    log2_total = min(0.0, _logsumexp2([log2_coset_sum, log2_tail]))
    log2_total_t2 = min(0.0, _logsumexp2([log2_coset_sum - 1.0, log2_tail]))
    return BoundReport(
        n=n,
        r=r,
        alpha=alpha_frac,
        delta=delta,
        p_test=p_test,
        mode=mode,
        per_coset_terms=[2.0 ** t for t in log2_terms],
        hoeffding_tail=hoeffding_tail(n, delta),
        total_info_bound=float(2.0 ** log2_total),
        total_info_bound_tight=float(2.0 ** log2_total_t2),
        log2_first_term=float(log2_coset_sum),
        log2_hoeffding_tail=float(log2_tail),
        log2_total_info_bound=float(log2_total),
    )


def bounds_for_code(code: ParityCode, noise: PerBitNoise, p_test: float, delta: float, mode: str = "per_coset") -> BoundReport:
    """Evaluate the sampling bound using the code's own coset weights, plus the exact trace-norm bound."""
    cw = gf2.coset_weights(code)
    report = total_info_bound(
        code.n, code.r, cw.alpha(), p_test, delta, mode=mode, weights=cw.weights
    )
    tr, _ = trace_norm_bound(code, noise)
    report.tr_delta_bound = tr
    report.sd_bound = min(1.0, 0.5 * tr)
    report.sd_bound_loose = min(1.0, tr)
    report.noise_worst_case_consistent = noise.worst_case_consistent
    return report


@dataclass
class BruteForceReport:
    n: int
    r: int
    max_abs_delta_diff: float
    trace_norm_brute: float
    trace_norm_bound: float
    bound_is_tight: bool | None
    povm_trials: int
    max_sd_minus_half_trace: float
    passed: bool
    mismatches: list[str]

    def to_dict(self) -> dict:
        return asdict(self)


def brute_force_check(
    code: ParityCode,
    noise: PerBitNoise,
    rng: np.random.Generator | None = None,
    povm_trials: int = 100,
    delta_tol: float = 1e-10,
    norm_tol: float = 1e-9,
) -> BruteForceReport:
    """Check the closed forms against explicit enumeration.

    Builds both mixtures from the solution sets, compares their difference
    with :func:`delta_analytic`, compares its trace norm with
    :func:`trace_norm_bound` (equality required when ``r == 0``), and checks
    that random measurements never beat half the trace norm.
    """
    if code.n > BRUTE_MAX_N:
        raise linalg.CapacityError(f"brute-force check supports n <= {BRUTE_MAX_N}, got {code.n}")
    rng = np.random.default_rng(0) if rng is None else rng
    rho0 = mixture_rho(code, 0, noise)
    rho1 = mixture_rho(code, 1, noise)
    brute = rho0 - rho1
    analytic = delta_analytic(code, noise)
    mismatches = []

    diff = float(np.max(np.abs(brute - analytic)))
    if diff > delta_tol:
        mismatches.append(f"analytic Delta differs from enumeration by {diff:.3e} > {delta_tol:g}")

    tn = linalg.trace_norm(brute)
    bound, _ = trace_norm_bound(code, noise)
    tight = None
    if tn > bound + norm_tol:
        mismatches.append(f"trace norm {tn!r} exceeds bound {bound!r}")
    if code.r == 0:
        tight = abs(tn - bound) <= norm_tol
        if not tight:
            mismatches.append(f"r = 0 trace norm {tn!r} differs from product formula {bound!r}")

    dim = 2 ** code.n
    worst = -math.inf
    half = 0.5 * tn
    for _ in range(povm_trials):
        outcomes = int(rng.integers(2, 9)) if dim <= 256 else 2
        e = infotheory.Povm.random(dim, outcomes, rng)
        worst = max(worst, infotheory.sd_for_measurement(rho0, rho1, e) - half)
    if povm_trials and worst > 1e-10:
        mismatches.append(f"a measurement beat half the trace norm by {worst:.3e}")

    return BruteForceReport(
        n=code.n,
        r=code.r,
        max_abs_delta_diff=diff,
        trace_norm_brute=tn,
        trace_norm_bound=bound,
        bound_is_tight=tight,
        povm_trials=povm_trials,
        max_sd_minus_half_trace=worst if povm_trials else 0.0,
        passed=not mismatches,
        mismatches=mismatches,
    )


def find_witness(
    p_test: float = 0.02,
    target_log2: float = -100.0,
    r_frac: float = 0.2,
    alphas: Sequence[float] = tuple(round(0.50 + 0.05 * k, 2) for k in range(10)),
    deltas: Sequence[float] = tuple(round(0.001 * k, 3) for k in range(1, 21)),
) -> BoundReport | None:
    """Smallest ``n`` on an ``(alpha, delta)`` grid whose uniform bound reaches ``2**target_log2``.

    ``r`` is tied to ``n`` as ``floor(r_frac * n)`` and must stay ``<= alpha n``.
    """
    best = None
    for alpha in alphas:
        if r_frac > alpha:
            continue
        for delta in deltas:
            base = (16.0 / alpha) * (p_test + 2 * delta)
            if base >= 1.0:
                continue
            n = _min_n(alpha, delta, p_test, r_frac, target_log2)
            if n is None:
                continue
            if best is None or n < best.n:
                best = total_info_bound(n, int(r_frac * n), alpha, p_test, delta)
    return best


def _min_n(alpha, delta, p_test, r_frac, target_log2, n_max=10 ** 9) -> int | None:
    def ok(n):
        rep = total_info_bound(n, int(r_frac * n), alpha, p_test, delta)
        return rep.log2_total_info_bound <= target_log2

    hi = 16
    while not ok(hi):
        hi *= 2
        if hi > n_max:
            return None
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def verify_uniform_bound_mp(report: BoundReport, digits: int = 60) -> float:
    """Re-evaluate the uniform-mode closed form in ``digits``-digit arithmetic.

    Returns log2 of the unclamped total. Independent of the float path:
    nothing is shared except the input parameters.
    """
    import mpmath

    with mpmath.workdps(digits):
        alpha = mpmath.mpf(report.alpha)
        p = mpmath.mpf(report.p_test)
        delta = mpmath.mpf(report.delta)
        n = mpmath.mpf(report.n)
        first = mpmath.power(2, report.r + 1) * mpmath.power(16 / alpha * (p + 2 * delta), alpha * n / 2)
        tail = 2 * mpmath.exp(-2 * n * delta ** 2)
        return float(mpmath.log(first + tail, 2))
