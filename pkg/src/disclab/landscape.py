"""Empirical solution-space geometry: overlap statistics, exhaustive
searches for forbidden solution tuples over correlated ensembles, and an
input-stability probe for algorithms.

At desk scale the forbidden tuple sets may well be non-empty; searches
therefore return a witness certificate (or None), never an emptiness
claim.

Lexicographic code convention used by the searches: a sign vector maps to
the integer whose bit (n-1-j) is 0 for sigma(j) = +1 and 1 for -1, with
coordinate 1 most significant; ascending codes order Sigma_n
lexicographically with +1 < -1.  "First certificate" always means first
in this order (prefix first, then member suffixes / members in turn).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import philox
from .discrepancy import disc_value, enumerate_below
from .errors import CapacityError, ParameterError, UnsupportedDisorderError
from .instances import Instance, generate, interpolate
from .online import run_online

XI_MAX_N = 22
OGP_MAX_N_PAIR = 18
OGP_MAX_N_TRIPLE = 14

_INTEGER_DISORDERS = ("rademacher", "bernoulli")


# ---------------------------------------------------------------------------
# Overlap histogram
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray       # length bins+1, spanning [-1, 1]
    counts: np.ndarray          # length bins


def pairwise_overlaps(solutions: np.ndarray) -> np.ndarray:
    """Normalized overlaps 1 - 2 d_H / n for all unordered pairs."""
    sols = np.asarray(solutions, dtype=np.int32)
    s, n = sols.shape
    out = []
    for start in range(0, s, 2048):
        block = sols[start:start + 2048]
        gram = block @ sols.T                     # integer inner products
        d = (n - gram) // 2
        for i in range(block.shape[0]):
            row = d[i, start + i + 1:]
            out.append(1.0 - 2.0 * row / n)
    return np.concatenate(out) if out else np.empty(0)


def overlap_histogram(solutions, bins: int) -> Histogram:
    sols = np.asarray(solutions)
    if sols.ndim != 2 or sols.shape[0] < 2:
        raise ParameterError("need at least 2 solutions of equal length")
    if bins < 1:
        raise ParameterError(f"bins must be >= 1, got {bins}")
    overlaps = pairwise_overlaps(sols)
    counts, edges = np.histogram(overlaps, bins=bins, range=(-1.0, 1.0))
    return Histogram(bin_edges=edges, counts=counts)


# ---------------------------------------------------------------------------
# Tuple certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TupleCertificate:
    """Witness that a searched tuple set is non-empty.

    ``overlaps`` lists the pairs (1,2), (1,3), ..., (m-1,m) row-major;
    each equals 1 - 2 d_H / n for the corresponding member pair.
    """

    members: np.ndarray          # (m, n) int8 sign vectors
    overlaps: np.ndarray         # (m(m-1)/2,)
    disc_values: np.ndarray      # per-member ||M_i sigma_i||_inf
    tau_or_delta: dict
    threshold: float


def _overlap_vector(members: np.ndarray) -> np.ndarray:
    m, n = members.shape
    out = []
    for i in range(m):
        for j in range(i + 1, m):
            d = int(np.count_nonzero(members[i] != members[j]))
            out.append(1.0 - 2.0 * d / n)
    return np.array(out)


def verify_certificate(cert: TupleCertificate, instances: Sequence[Instance],
                       window: Optional[tuple[float, float]] = None) -> bool:
    """Recompute overlaps and discrepancies directly from the members,
    through routes independent of the search engine's tables."""
    m, n = cert.members.shape
    if len(instances) != m:
        return False
    for i, inst in enumerate(instances):
        sums = np.asarray(inst.entries, dtype=np.float64) @ cert.members[i].astype(np.float64)
        val = float(np.max(np.abs(sums)))
        if val > cert.threshold + 1e-9 * max(1.0, cert.threshold):
            return False
        if abs(val - float(cert.disc_values[i])) > 1e-9 * max(1.0, val):
            return False
    overlaps = []
    for i in range(m):
        for j in range(i + 1, m):
            gram = int(cert.members[i].astype(np.int32) @ cert.members[j].astype(np.int32))
            overlaps.append(1.0 - 2.0 * ((n - gram) // 2) / n)
    overlaps = np.asarray(overlaps)
    if not np.array_equal(overlaps, np.asarray(cert.overlaps, dtype=float)):
        return False
    if window is not None:
        lo, hi = window
        if np.any(overlaps < lo) or np.any(overlaps > hi):
            return False
    return True


# ---------------------------------------------------------------------------
# Shared-prefix searches (suffix-resampled ensembles)
# ---------------------------------------------------------------------------

def _lex_signs(codes: np.ndarray, n: int) -> np.ndarray:
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint64)
    bits = (np.asarray(codes, dtype=np.uint64)[:, None] >> shifts[None, :]) & np.uint64(1)
    return (1 - 2 * bits.astype(np.int8))


def lex_codes(signs: np.ndarray) -> np.ndarray:
    """Inverse of the code convention: (count, n) signs -> uint64 codes."""
    signs = np.asarray(signs)
    n = signs.shape[1]
    weights = (np.uint64(1) << np.arange(n - 1, -1, -1, dtype=np.uint64))
    bits = (signs < 0).astype(np.uint64)
    return bits @ weights


def _check_shared_prefix(members: Sequence[Instance], k: int) -> None:
    n = members[0].cols
    for mem in members[1:]:
        if mem.shape != members[0].shape or mem.disorder != members[0].disorder:
            raise ParameterError("ensemble members must share shape and disorder")
        if not np.array_equal(mem.entries[:, : n - k], members[0].entries[:, : n - k]):
            raise ParameterError(f"members do not share the first n-k={n - k} columns")


def _search_shared_prefix(members: Sequence[Instance], k: int,
                          threshold: float) -> Optional[tuple[int, list[int]]]:
    """First (prefix, per-member suffix) with every member satisfying
    ||M_i sigma_i||_inf <= threshold, or None."""
    n = members[0].cols
    n_pref = n - k
    work = [np.asarray(mem.entries,
                       dtype=np.int64 if mem.disorder in _INTEGER_DISORDERS else np.float64)
            for mem in members]
    m_rows = members[0].rows
    suffix_signs = _lex_signs(np.arange(1 << k, dtype=np.uint64), k).astype(work[0].dtype)
    suffix_sums = [suffix_signs @ w[:, n_pref:].T for w in work]     # (2^k, M) each
    if n_pref == 0:
        prefix_codes = np.zeros(1, dtype=np.uint64)
    else:
        prefix_codes = np.arange(1 << n_pref, dtype=np.uint64)
    chunk = max(1, (1 << 22) // ((1 << k) * m_rows))
    prefix_cols = work[0][:, :n_pref]
    for start in range(0, prefix_codes.shape[0], chunk):
        codes = prefix_codes[start:start + chunk]
        if n_pref:
            psums = _lex_signs(codes, n_pref).astype(work[0].dtype) @ prefix_cols.T
        else:
            psums = np.zeros((1, m_rows), dtype=work[0].dtype)
        ok = np.ones(codes.shape[0], dtype=bool)
        for ss in suffix_sums:
            cand = psums[:, None, :] + ss[None, :, :]
            ok &= np.any(np.all(np.abs(cand) <= threshold, axis=2), axis=1)
            if not ok.any():
                break
        if ok.any():
            local = int(np.argmax(ok))
            suffixes = []
            for ss in suffix_sums:
                feas = np.all(np.abs(psums[local][None, :] + ss) <= threshold, axis=1)
                suffixes.append(int(np.argmax(feas)))
            return start + local, suffixes
    return None


def _prefix_certificate(members: Sequence[Instance], k: int, threshold: float,
                        hit: tuple[int, list[int]]) -> TupleCertificate:
    n = members[0].cols
    p, suffixes = hit
    codes = np.array([(p << k) | s for s in suffixes], dtype=np.uint64)
    sigma = _lex_signs(codes, n)
    disc = np.array([disc_value(mem, sigma[i]).value for i, mem in enumerate(members)],
                    dtype=float)
    return TupleCertificate(members=sigma, overlaps=_overlap_vector(sigma),
                            disc_values=disc,
                            tau_or_delta={"mode": "suffix_resample", "k": k},
                            threshold=float(threshold))


def search_xi_sbp(members: Sequence[Instance], k: int, kappa: float,
                  max_n: int = XI_MAX_N) -> Optional[TupleCertificate]:
    """First m-tuple of perceptron solutions agreeing on the shared prefix
    of a suffix-resampled gaussian ensemble, or None.

    Exhausts the 2^(n-k) common prefixes crossed with per-member suffix
    completions; threshold kappa * sqrt(n), inclusive.
    """
    if members[0].disorder != "gaussian":
        raise UnsupportedDisorderError("perceptron tuple search needs gaussian disorder")
    if not kappa > 0:
        raise ParameterError(f"kappa must be positive, got {kappa}")
    n = members[0].cols
    if n > max_n:
        raise CapacityError(f"tuple search for n={n} exceeds max_n={max_n}")
    if len(members) < 2:
        raise ParameterError("need at least 2 ensemble members")
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got k={k}")
    _check_shared_prefix(members, k)
    threshold = kappa * math.sqrt(n)
    hit = _search_shared_prefix(members, k, threshold)
    return None if hit is None else _prefix_certificate(members, k, threshold, hit)


def search_xi_disc(members: Sequence[Instance], k: int, c_u: float,
                   max_n: int = XI_MAX_N) -> Optional[TupleCertificate]:
    """Shared-prefix tuple search at discrepancy threshold c_u * sqrt(M)
    for integer (rademacher / bernoulli) disorder; comparisons are exact
    integer arithmetic against the float threshold."""
    if members[0].disorder not in _INTEGER_DISORDERS:
        raise UnsupportedDisorderError("discrepancy tuple search needs integer disorder")
    if not c_u > 0:
        raise ParameterError(f"c_u must be positive, got {c_u}")
    n = members[0].cols
    if n > max_n:
        raise CapacityError(f"tuple search for n={n} exceeds max_n={max_n}")
    if len(members) < 2:
        raise ParameterError("need at least 2 ensemble members")
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got k={k}")
    _check_shared_prefix(members, k)
    threshold = c_u * math.sqrt(members[0].rows)
    hit = _search_shared_prefix(members, k, threshold)
    return None if hit is None else _prefix_certificate(members, k, threshold, hit)


# ---------------------------------------------------------------------------
# Overlap-window tuples over interpolated ensembles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OgpWindow:
    """Forbidden-overlap window [beta - eta, beta] with tuple size m.

    ``bound`` is the absolute discrepancy threshold K in "disc" mode, or
    kappa (scaled by sqrt(n) at search time) in "sbp" mode.
    """

    beta: float
    eta: float
    bound: float
    m: int
    mode: str = "disc"

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ParameterError(f"beta must lie in (0,1), got {self.beta}")
        if not 0.0 < self.eta < self.beta:
            raise ParameterError(f"eta must lie in (0, beta), got {self.eta}")
        if self.m < 2:
            raise ParameterError(f"tuple size m must be >= 2, got {self.m}")
        if self.mode not in ("disc", "sbp"):
            raise ParameterError(f"mode must be 'disc' or 'sbp', got {self.mode!r}")
        if not self.bound > 0:
            raise ParameterError(f"bound must be positive, got {self.bound}")

    @property
    def interval(self) -> tuple[float, float]:
        return self.beta - self.eta, self.beta


def _window_filter(codes: np.ndarray, ref_code: np.uint64, n: int,
                   lo: float, hi: float) -> np.ndarray:
    d = np.bitwise_count(codes ^ ref_code).astype(np.float64)
    o = 1.0 - 2.0 * d / n
    return codes[(o >= lo) & (o <= hi)]


def search_ogp_tuples(base: Instance, fresh: Sequence[Instance], angles: Sequence[float],
                      window, max_n: Optional[int] = None) -> Optional[TupleCertificate]:
    """First m-tuple (lexicographic) of solutions of the interpolated
    instances cos(tau_i) * base + sin(tau_i) * fresh_i whose pairwise
    overlaps all land in the window.

    ``window`` is an OgpWindow, or a raw (lo, hi, bound, m) tuple for
    degenerate windows outside the OgpWindow invariants.  Each member's
    candidate set is the union over the angle grid of its solution sets;
    the recorded angle is the first witness in grid order.
    """
    if isinstance(window, OgpWindow):
        lo, hi = window.interval
        m = window.m
        threshold = window.bound if window.mode == "disc" else window.bound * math.sqrt(base.cols)
    else:
        lo, hi, threshold, m = window
        threshold = float(threshold)
    if len(fresh) != m:
        raise ParameterError(f"need {m} fresh instances, got {len(fresh)}")
    if len(angles) == 0:
        raise ParameterError("angle grid must be nonempty")
    n = base.cols
    cap = max_n if max_n is not None else (OGP_MAX_N_PAIR if m == 2 else OGP_MAX_N_TRIPLE)
    if n > cap:
        raise CapacityError(f"tuple search for n={n} exceeds max_n={cap}")

    member_codes: list[np.ndarray] = []
    witnesses: list[dict[int, int]] = []
    for i in range(m):
        wit: dict[int, int] = {}
        for ai, tau in enumerate(angles):
            inst_tau = interpolate(base, fresh[i], tau)
            sols = enumerate_below(inst_tau, threshold, max_n=n)
            for code in lex_codes(sols):
                wit.setdefault(int(code), ai)
        member_codes.append(np.array(sorted(wit), dtype=np.uint64))
        witnesses.append(wit)

    chosen: list[int] = []

    def extend(depth: int) -> bool:
        if depth == m:
            return True
        cands = member_codes[depth]
        for prev in chosen:
            cands = _window_filter(cands, np.uint64(prev), n, lo, hi)
            if cands.size == 0:
                return False
        for code in cands:
            chosen.append(int(code))
            if extend(depth + 1):
                return True
            chosen.pop()
        return False

    if not extend(0):
        return None
    sigma = _lex_signs(np.array(chosen, dtype=np.uint64), n)
    taus = [angles[witnesses[i][chosen[i]]] for i in range(m)]
    disc = np.array([disc_value(interpolate(base, fresh[i], taus[i]), sigma[i]).value
                     for i in range(m)], dtype=float)
    return TupleCertificate(members=sigma, overlaps=_overlap_vector(sigma),
                            disc_values=disc,
                            tau_or_delta={"mode": "interpolate", "angles": list(taus)},
                            threshold=float(threshold))


def default_angle_grid(Q: int) -> np.ndarray:
    """The grid {j pi / (2Q) : 0 <= j <= Q}."""
    if Q < 1:
        raise ParameterError(f"grid resolution must be >= 1, got {Q}")
    return np.arange(Q + 1) * (math.pi / (2 * Q))


# ---------------------------------------------------------------------------
# Stability probe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StabilityReport:
    rho: float
    trials: int
    n: int
    rows: int
    threshold: float
    d_hamming: np.ndarray          # per-trial output distance
    frobenius: np.ndarray          # per-trial ||M - Mbar||_F
    success_rate: float            # P[disc <= threshold] on the base instance
    success_rate_perturbed: float
    quantiles: dict[str, float]    # d_H quantiles at 0, .25, .5, .75, 1
    fit_f: float                   # least-squares d_H ~ fit_f + fit_L * frobenius
    fit_L: float


def stability_probe(alg, rho: float, trials: int, n: int, rows: int,
                    threshold: float, seed: int = 0) -> StabilityReport:
    """Distribution of output Hamming distance over rho-correlated gaussian
    instance pairs, with the algorithm's auxiliary randomness shared
    within each pair.

    The correlation is realized by interpolation with cos(tau) = rho; the
    per-trial pair is (M, cos(tau) M + sin(tau) M') for an independent M'.
    """
    if not 0.0 <= rho <= 1.0:
        raise ParameterError(f"rho must lie in [0,1], got {rho}")
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    tau = math.acos(rho)
    d_h = np.empty(trials, dtype=np.int64)
    fro = np.empty(trials, dtype=np.float64)
    ok_a = np.empty(trials, dtype=bool)
    ok_b = np.empty(trials, dtype=bool)
    for t in range(trials):
        base = generate(rows, n, "gaussian", philox.derive_seed(seed, t, 0))
        freshen = generate(rows, n, "gaussian", philox.derive_seed(seed, t, 1))
        omega = philox.derive_seed(seed, t, 2)
        pert = interpolate(base, freshen, tau)
        ra = run_online(alg, base, omega=omega)
        rb = run_online(alg, pert, omega=omega)
        d_h[t] = int(np.count_nonzero(ra.sigma != rb.sigma))
        fro[t] = float(np.linalg.norm(base.entries - pert.entries))
        ok_a[t] = ra.value <= threshold
        ok_b[t] = rb.value <= threshold
    qs = np.quantile(d_h, [0.0, 0.25, 0.5, 0.75, 1.0])
    quantiles = {f"q{int(q * 100):03d}": float(v)
                 for q, v in zip((0.0, 0.25, 0.5, 0.75, 1.0), qs)}
    if float(np.std(fro)) < 1e-12:
        fit_l, fit_f = 0.0, float(np.mean(d_h))
    else:
        fit_l, fit_f = np.polyfit(fro, d_h.astype(float), 1)
    return StabilityReport(rho=rho, trials=trials, n=n, rows=rows,
                           threshold=threshold, d_hamming=d_h, frobenius=fro,
                           success_rate=float(np.mean(ok_a)),
                           success_rate_perturbed=float(np.mean(ok_b)),
                           quantiles=quantiles, fit_f=float(fit_f), fit_L=float(fit_l))
