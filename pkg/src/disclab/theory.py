"""Closed-form exponents, bounds, and parameter constructions.

Everything here is exact arithmetic on the first-moment machinery for
tuple counts of low-discrepancy / perceptron solutions: base-2 counting
exponents, Gaussian box-probability bounds, equicorrelated covariance
analysis, Berry-Esseen anti-concentration constants, and the parameter
recipes that make the exponents negative.  No sampling happens in this
module except for the explicitly Monte Carlo verification oracle
``mc_box_probability``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy import integrate

from . import philox
from .errors import ParameterError

_LOG2_2PI = math.log2(2.0 * math.pi)
_PD_TOL = 1e-12


def prob_abs_z_le(kappa: float) -> float:
    """P[|Z| <= kappa] for standard normal Z, via erf (abs error ~1e-16)."""
    return math.erf(kappa / math.sqrt(2.0))


def alpha_c(kappa: float) -> float:
    """Critical constraint density -1 / log2 P[|Z| <= kappa]."""
    if not kappa > 0:
        raise ParameterError(f"kappa must be positive, got {kappa}")
    return -1.0 / math.log2(prob_abs_z_le(kappa))


def binary_entropy(p: float) -> float:
    """h_b(p) = -p log2 p - (1-p) log2 (1-p), with 0 log 0 = 0."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"entropy argument must lie in [0,1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def _hb_inverse_lower(target: float, tol: float = 1e-12) -> float:
    """The root x in (0, 1/2] of h_b(x) = target (h_b is increasing there)."""
    if not 0.0 < target <= 1.0:
        raise ParameterError(f"entropy target must lie in (0,1], got {target}")
    lo, hi = 0.0, 0.5
    while hi - lo > tol * 0.1:
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ExponentReport:
    """A base-2 exponent with its additive breakdown.

    ``scale`` records whether ``value`` is per unit n ("per_n") or an
    absolute exponent ("absolute").  ``value`` is the exact sum of
    ``terms`` (fsum), and ``verdict`` is its sign.
    """

    value: float
    terms: dict[str, float]
    params: dict[str, float]
    verdict: str
    scale: str


def _report(terms: dict[str, float], params: dict, scale: str) -> ExponentReport:
    value = math.fsum(terms.values())
    verdict = "negative" if value < 0 else "nonnegative"
    return ExponentReport(value=value, terms=terms, params=params,
                          verdict=verdict, scale=scale)


def psi_sbp(delta: float, m: int, alpha: float, kappa: float) -> ExponentReport:
    """Per-n exponent of the expected count of prefix-locked solution m-tuples.

    Counting term: 1 + m*delta (choices of the shared prefix and the m
    free suffixes, per unit n).  Probability terms: the per-row bound for
    the equicorrelated Gaussian vector with off-diagonal 1-delta, whose
    spectrum is {delta (m-1 times), delta + (1-delta)m}.
    """
    if not 0.0 < delta < 0.5:
        raise ParameterError(f"delta must lie in (0, 1/2), got {delta}")
    if m < 1:
        raise ParameterError(f"tuple size m must be >= 1, got {m}")
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if not kappa > 0:
        raise ParameterError(f"kappa must be positive, got {kappa}")
    terms = {
        "counting": 1.0 + m * delta,
        "normalization": -(alpha * m / 2.0) * _LOG2_2PI,
        "box_volume": alpha * m * math.log2(2.0 * kappa),
        "small_eigenvalues": -(alpha * (m - 1) / 2.0) * math.log2(delta),
        "top_eigenvalue": -(alpha / 2.0) * math.log2(delta + (1.0 - delta) * m),
    }
    params = {"delta": delta, "m": m, "alpha": alpha, "kappa": kappa}
    return _report(terms, params, "per_n")


def upsilon(delta: float, alpha: float, kappa: float) -> float:
    """The m-free part of the prefix-locked exponent (per tuple member)."""
    if not 0.0 < delta < 0.5:
        raise ParameterError(f"delta must lie in (0, 1/2), got {delta}")
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if not kappa > 0:
        raise ParameterError(f"kappa must be positive, got {kappa}")
    return (delta - (alpha / 2.0) * _LOG2_2PI + alpha * math.log2(2.0 * kappa)
            - (alpha / 2.0) * math.log2(delta))


def psi_disc(m: int, beta: float, eta: float, c: float, n: float, M: float,
             K: float, entropy_factor: str = "m") -> ExponentReport:
    """Absolute exponent of the expected count of overlap-window m-tuples
    of discrepancy-K solutions over an angle grid of log2-size c*n.

    ``entropy_factor`` selects the weight of the overlap-entropy term:
    "m" (default) or "m-1" (the pure tuple-counting weight; one factor
    less because the first vector is already counted by the n term).
    """
    if not 0.0 < eta < beta < 1.0:
        raise ParameterError(f"need 0 < eta < beta < 1, got eta={eta}, beta={beta}")
    if m < 2:
        raise ParameterError(f"tuple size m must be >= 2, got {m}")
    if not (n > 0 and M > 0 and K > 0):
        raise ParameterError(f"n, M, K must be positive, got {n}, {M}, {K}")
    if entropy_factor not in ("m", "m-1"):
        raise ParameterError(f"entropy_factor must be 'm' or 'm-1', got {entropy_factor!r}")
    mu = m if entropy_factor == "m" else m - 1
    terms = {
        "first_vector": float(n),
        "overlap_entropy": mu * n * binary_entropy((1.0 - beta + eta) / 2.0),
        "angle_grid": c * m * n,
        "box_bound": (m * M / 2.0) * math.log2(4.0 * K * K / (math.pi * (1.0 - beta))),
        "scaling": -(M * m / 2.0) * math.log2(n),
    }
    params = {"m": m, "beta": beta, "eta": eta, "c": c, "n": n, "M": M, "K": K,
              "entropy_factor": entropy_factor}
    return _report(terms, params, "absolute")


@dataclass(frozen=True)
class OgpParams:
    m: int
    beta: float
    eta: float
    c: float


def find_ogp_params(C1: float, c2: float, K: float) -> OgpParams:
    """Tuple-size / overlap-window parameters that force psi_disc < 0
    throughout c2 * M log2 M <= n <= C1 * M log2 M.

    m = max(2, ceil(16 C1)); beta > 1/2 solves
    h_b(1 - beta) = min(1/(4 C1), 1/2) by bisection; eta = (1-beta)/(2m)
    (which keeps every admissible covariance positive definite) and
    c = 1/m.
    """
    if not (C1 > c2 > 0):
        raise ParameterError(f"need C1 > c2 > 0, got C1={C1}, c2={c2}")
    if not K > 0:
        raise ParameterError(f"K must be positive, got {K}")
    m = max(2, math.ceil(16.0 * C1))
    target = min(1.0 / (4.0 * C1), 0.5)
    x = _hb_inverse_lower(target)          # x = 1 - beta, in (0, 1/2]
    beta = 1.0 - x
    return OgpParams(m=m, beta=beta, eta=x / (2.0 * m), c=1.0 / m)


# ---------------------------------------------------------------------------
# Covariance analysis for overlap-window tuples
# ---------------------------------------------------------------------------

def build_covariance(m: int, beta: float, eta_vec: Sequence[float]) -> np.ndarray:
    """Unit-diagonal symmetric matrix with off-diagonals beta - eta_ij.

    ``eta_vec`` holds the upper triangle row-major: (1,2), (1,3), ...,
    (m-1,m).
    """
    npairs = m * (m - 1) // 2
    vec = np.asarray(eta_vec, dtype=np.float64)
    if vec.shape != (npairs,):
        raise ParameterError(f"eta_vec must have length {npairs} for m={m}, got {vec.shape}")
    cov = np.eye(m)
    iu = np.triu_indices(m, k=1)
    cov[iu] = beta - vec
    cov[(iu[1], iu[0])] = beta - vec
    return cov


@dataclass(frozen=True)
class CovarianceSpec:
    """Overlap covariance description: off-diagonal beta - eta_ij with
    0 <= eta_ij <= eta."""

    m: int
    beta: float
    eta: float
    eta_vec: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.m < 1:
            raise ParameterError(f"m must be >= 1, got {self.m}")
        if not 0.0 < self.beta < 1.0:
            raise ParameterError(f"beta must lie in (0,1), got {self.beta}")
        if self.eta < 0.0:
            raise ParameterError(f"eta must be nonnegative, got {self.eta}")
        npairs = self.m * (self.m - 1) // 2
        vec = self.eta_vec if self.eta_vec else tuple(0.0 for _ in range(npairs))
        if len(vec) != npairs:
            raise ParameterError(f"eta_vec must have length {npairs}, got {len(vec)}")
        if any(not 0.0 <= e <= self.eta for e in vec):
            raise ParameterError("every eta_ij must lie in [0, eta]")
        object.__setattr__(self, "eta_vec", tuple(float(e) for e in vec))

    def materialize(self) -> np.ndarray:
        return build_covariance(self.m, self.beta, self.eta_vec)


@dataclass(frozen=True)
class CovarianceReport:
    pd: bool
    det: float
    det_lower_bound: float            # ((1-beta)/2)^m, valid when eta <= (1-beta)/(2m)
    eigenvalues: np.ndarray


def covariance_analysis(spec: CovarianceSpec) -> CovarianceReport:
    cov = spec.materialize()
    eigs = np.linalg.eigvalsh(cov)
    det = float(np.linalg.det(cov))
    bound = ((1.0 - spec.beta) / 2.0) ** spec.m
    return CovarianceReport(pd=bool(eigs[0] > _PD_TOL), det=det,
                            det_lower_bound=bound, eigenvalues=eigs)


def gaussian_box_bound(m: int, beta: float, eta: Union[float, Sequence[float]],
                       K: float, n: float) -> float:
    """Analytic upper bound (2pi)^(-m/2) det(Sigma)^(-1/2) (2K/sqrt(n))^m
    on P[max_i |Z_i| <= K/sqrt(n)] for Z ~ N(0, Sigma(eta)).

    Correlation scalings between 0 and 1 only increase the box
    probability, so evaluating the bound at the unscaled covariance
    covers every angle choice.
    """
    if np.isscalar(eta):
        eta_vec = [float(eta)] * (m * (m - 1) // 2)
    else:
        eta_vec = eta
    cov = build_covariance(m, beta, eta_vec)
    eigs = np.linalg.eigvalsh(cov)
    if eigs[0] <= _PD_TOL:
        raise ParameterError("covariance is not positive definite")
    det = float(np.prod(eigs))
    return float((2.0 * math.pi) ** (-m / 2.0) * det ** -0.5
                 * (2.0 * K / math.sqrt(n)) ** m)


# ---------------------------------------------------------------------------
# Box probabilities: Monte Carlo oracle and deterministic quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class McEstimate:
    estimate: float
    std_error: float
    samples: int


def mc_box_probability(covariance, half_width: float, samples: int,
                       seed: int) -> McEstimate:
    """Monte Carlo estimate of P[max_i |Z_i| <= half_width], Z ~ N(0, cov).

    Draws are indexed by (sample, dimension) counters, so the estimate is
    independent of any chunking of the sample loop.  Degenerate (singular
    but PSD) covariances such as perfectly coupled coordinates are
    accepted via an eigenvalue factorization; indefinite input is an
    error.
    """
    if isinstance(covariance, CovarianceSpec):
        covariance = covariance.materialize()
    cov = np.asarray(covariance, dtype=np.float64)
    if samples < 10_000:
        raise ParameterError(f"need at least 1e4 samples, got {samples}")
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        w, v = np.linalg.eigh(cov)
        if w.min() < -_PD_TOL:
            raise ParameterError("covariance is not positive semidefinite") from exc
        chol = v * np.sqrt(np.clip(w, 0.0, None))
    m = cov.shape[0]
    hits = 0
    chunk = 1 << 18
    for start in range(0, samples, chunk):
        stop = min(samples, start + chunk)
        idx = np.arange(start, stop, dtype=np.uint64)[:, None]
        dim = np.arange(m, dtype=np.uint64)[None, :]
        z = philox.gaussians(seed, idx, dim, 4)
        x = z @ chol.T
        hits += int(np.count_nonzero(np.max(np.abs(x), axis=1) <= half_width))
    p = hits / samples
    se = math.sqrt(p * (1.0 - p) / samples)
    return McEstimate(estimate=p, std_error=se, samples=samples)


def _phi(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def _interval_prob(lo: float, hi: float) -> float:
    return max(0.0, _phi(hi) - _phi(lo))


def equicorrelated_box_probability(m: int, rho: float, half_width: float) -> float:
    """P[max_i |Z_i| <= half_width] for unit-variance equicorrelated Z
    with off-diagonal rho in [0, 1], by one-dimensional quadrature.

    Z_i = sqrt(rho) W + sqrt(1-rho) V_i with a shared W, so conditioning
    on W reduces the box to a product of univariate intervals.
    """
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    if not 0.0 <= rho <= 1.0:
        raise ParameterError(f"equicorrelation must lie in [0,1], got {rho}")
    if half_width <= 0:
        return 0.0
    single = _interval_prob(-half_width, half_width)
    if m == 1 or rho == 1.0:
        return single
    if rho == 0.0:
        return single ** m
    sr, sv = math.sqrt(rho), math.sqrt(1.0 - rho)

    def integrand(w):
        return (math.exp(-0.5 * w * w) / math.sqrt(2.0 * math.pi)
                * _interval_prob((-half_width - sr * w) / sv,
                                 (half_width - sr * w) / sv) ** m)

    val, _ = integrate.quad(integrand, -np.inf, np.inf, epsabs=1e-13, epsrel=1e-12,
                            limit=200)
    return min(1.0, max(0.0, val))


def _bivariate_rectangle(a1, b1, a2, b2, rho):
    # P[a1 <= Z1 <= b1, a2 <= Z2 <= b2] for unit normals with correlation rho
    s = math.sqrt(max(1e-300, 1.0 - rho * rho))

    def integrand(z):
        return (math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
                * _interval_prob((a2 - rho * z) / s, (b2 - rho * z) / s))

    val, _ = integrate.quad(integrand, a1, b1, epsabs=1e-12, epsrel=1e-11, limit=200)
    return val


def box_probability_quadrature(covariance, half_width: float) -> float:
    """Deterministic box probability for m <= 3 and a general covariance."""
    if isinstance(covariance, CovarianceSpec):
        covariance = covariance.materialize()
    cov = np.asarray(covariance, dtype=np.float64)
    m = cov.shape[0]
    sd = np.sqrt(np.diag(cov))
    t = half_width / sd                       # per-dimension half widths
    corr = cov / np.outer(sd, sd)
    eigs = np.linalg.eigvalsh(corr)
    if eigs[0] <= _PD_TOL:
        raise ParameterError("covariance is not positive definite")
    if m == 1:
        return _interval_prob(-t[0], t[0])
    if m == 2:
        return _bivariate_rectangle(-t[0], t[0], -t[1], t[1], corr[0, 1])
    if m == 3:
        r12, r13, r23 = corr[0, 1], corr[0, 2], corr[1, 2]
        s2 = math.sqrt(1.0 - r12 * r12)
        s3 = math.sqrt(1.0 - r13 * r13)
        rc = (r23 - r12 * r13) / (s2 * s3)

        def integrand(z):
            return (math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
                    * _bivariate_rectangle((-t[1] - r12 * z) / s2, (t[1] - r12 * z) / s2,
                                           (-t[2] - r13 * z) / s3, (t[2] - r13 * z) / s3,
                                           rc))

        val, _ = integrate.quad(integrand, -t[0], t[0], epsabs=1e-10, epsrel=1e-9,
                                limit=100)
        return val
    raise ParameterError(f"deterministic quadrature supports m <= 3, got m={m}")


# ---------------------------------------------------------------------------
# Anti-concentration and expected tuple counts
# ---------------------------------------------------------------------------

def berry_esseen_bound(interval_length: float, M: int,
                       p: Optional[float] = None) -> float:
    """Upper bound on P[signed sum of M binary variables lands in a fixed
    interval I]: 3|I|/sqrt(M) for Rademacher summands, 3|I|/sqrt(M(p-p^2))
    for Bernoulli(p).  Valid once |I| grows with M; may exceed 1.
    """
    if M < 1:
        raise ParameterError(f"M must be >= 1, got {M}")
    if interval_length < 0:
        raise ParameterError(f"interval length must be nonnegative, got {interval_length}")
    if p is None:
        return 3.0 * interval_length / math.sqrt(M)
    if not 0.0 < p < 1.0:
        raise ParameterError(f"Bernoulli p must lie in (0,1), got {p}")
    return 3.0 * interval_length / math.sqrt(M * (p - p * p))


def expected_xi_count(n: int, M: int, k: int, m: int, kappa: float) -> float:
    """Exact E[#{prefix-locked satisfying m-tuples}] for the suffix-resampled
    gaussian ensemble: 2^(n + k(m-1)) * P_box^M.

    Every tuple sharing the first n-k coordinates has per-row overlap
    vector with the same equicorrelated covariance (off-diagonal 1 - k/n),
    so the first moment is the exact product of the tuple count and the
    common row probability.
    """
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got k={k}, n={n}")
    if m < 1 or M < 1:
        raise ParameterError(f"need m >= 1 and M >= 1, got m={m}, M={M}")
    if not kappa > 0:
        raise ParameterError(f"kappa must be positive, got {kappa}")
    rho = 1.0 - k / n
    p_box = equicorrelated_box_probability(m, rho, kappa)
    log2_count = n + k * (m - 1)
    return float(2.0 ** (log2_count + M * math.log2(p_box)))


@dataclass(frozen=True)
class TupleCountEstimate:
    """First-moment value for equidistant tuples at fixed Hamming distance.

    The counting factor is the entropy upper bound exp2(n + n(m-1)
    h_b(delta/n)); the probability factor is exact for the equicorrelated
    overlap pattern.  The product is therefore an upper-bound-style
    estimate, not an exact expectation.
    """

    value: float
    log2_value: float
    log2_counting: float
    row_probability: float
    kind: str = "upper_bound_estimate"


def expected_tuple_count_general(n: int, M: int, m: int, hamming_delta: int,
                                 K: float, mc_samples: int = 1_000_000,
                                 mc_seed: int = 0x5EED) -> TupleCountEstimate:
    """First-moment estimate for m-tuples at pairwise Hamming distance
    ``hamming_delta`` with every member of discrepancy at most K.

    The pairwise overlap is 1 - 2 delta/n; negative overlaps with m > 3
    fall back to the Monte Carlo oracle (deterministic given mc_seed).
    """
    if not 0 <= hamming_delta <= n:
        raise ParameterError(f"hamming distance must lie in [0, n], got {hamming_delta}")
    if m < 1 or M < 1:
        raise ParameterError(f"need m >= 1 and M >= 1, got m={m}, M={M}")
    if not K > 0:
        raise ParameterError(f"K must be positive, got {K}")
    rho = 1.0 - 2.0 * hamming_delta / n
    hw = K / math.sqrt(n)
    if hamming_delta == 0 or m == 1 or (rho == -1.0 and m == 2):
        # perfectly coupled coordinates: the box event is a single interval
        p_row = _interval_prob(-hw, hw)
    else:
        top, small = 1.0 + (m - 1) * rho, 1.0 - rho
        if min(top, small) <= _PD_TOL:
            raise ParameterError(
                f"equicorrelated covariance with off-diagonal {rho} is not positive "
                f"definite for m={m} (needs 1 + (m-1)rho > 0)")
        if rho >= 0.0:
            p_row = equicorrelated_box_probability(m, rho, hw)
        elif m <= 3:
            p_row = box_probability_quadrature(
                build_covariance(m, rho, [0.0] * (m * (m - 1) // 2)), hw)
        else:
            est = mc_box_probability(
                build_covariance(m, rho, [0.0] * (m * (m - 1) // 2)), hw,
                mc_samples, mc_seed)
            p_row = est.estimate
    log2_counting = n + n * (m - 1) * binary_entropy(hamming_delta / n)
    log2_value = log2_counting + (M * math.log2(p_row) if p_row > 0 else -math.inf)
    return TupleCountEstimate(value=float(2.0 ** log2_value), log2_value=log2_value,
                              log2_counting=log2_counting, row_probability=p_row)


@dataclass(frozen=True)
class StableConstants:
    """Constants of the stability barrier; T is reported as log2 log2 T
    because it is a double exponential."""

    C: float
    Q: float
    log2_log2_T: float


def stable_constants(eta: float, L: float, m: int) -> StableConstants:
    """C = eta^2/1600, Q = 4800 L pi / eta^2, log2 log2 T = 4 m Q log2 Q."""
    if not 0.0 < eta < 1.0:
        raise ParameterError(f"eta must lie in (0,1), got {eta}")
    if not L > 0:
        raise ParameterError(f"L must be positive, got {L}")
    if m < 2:
        raise ParameterError(f"m must be >= 2, got {m}")
    C = eta * eta / 1600.0
    Q = 4800.0 * L * math.pi / (eta * eta)
    return StableConstants(C=C, Q=Q, log2_log2_T=4.0 * m * Q * math.log2(Q))
