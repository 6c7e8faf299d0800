"""Discrepancy evaluation and exact minimization over sign vectors.

The exact solver fixes sigma(1) = +1 (global sign flips preserve the
max-row-sum norm) and walks the remaining 2^(n-1) sign vectors in
binary-reflected Gray-code order, so consecutive candidates differ in one
coordinate and the row-sum vector is updated at O(M) cost per step.

Enumeration convention (documented so ties are reproducible): free
coordinates are columns 2..n; bit b of the Gray code corresponds to
column b+2, bit value 1 meaning sign -1.  Candidate index i visits code
g = i XOR (i >> 1) for i = 0, 1, ...; the walk starts at the all-plus
vector and flips column 2 most often.  The argmin reported is the first
minimizer in this order.  For speed the walk is blocked: the low q Gray
bits are expanded into a 2^q-row delta table and each run of 2^q
consecutive candidates is evaluated in one vectorized pass; within a
block the visiting order is the table order for even blocks and relies
on the reflection identity gray(2^q-1-r) = gray(r) XOR 2^(q-1) for odd
blocks, so the global visiting order is preserved exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import CapacityError, ParameterError, UnsupportedDisorderError
from .instances import Instance

EXACT_MAX_N = 30
ENUMERATE_MAX_N = 26

_BLOCK_BITS = 12


def as_sign_vector(sigma, n: int | None = None) -> np.ndarray:
    """Validate and return a +-1 vector as int8."""
    arr = np.asarray(sigma)
    if arr.ndim != 1:
        raise ParameterError(f"sign vector must be 1-d, got shape {arr.shape}")
    if not np.all(np.abs(arr) == 1):
        raise ParameterError("sign vector coordinates must be exactly -1 or +1")
    if n is not None and arr.shape[0] != n:
        raise ParameterError(f"sign vector has length {arr.shape[0]}, expected {n}")
    return arr.astype(np.int8)


def sign_string(sigma) -> str:
    return "".join("+" if s > 0 else "-" for s in np.asarray(sigma))


def parse_sign_string(s: str) -> np.ndarray:
    if not s or any(ch not in "+-" for ch in s):
        raise ParameterError(f"sign string must be nonempty over '+-', got {s!r}")
    return np.array([1 if ch == "+" else -1 for ch in s], dtype=np.int8)


@dataclass(frozen=True)
class DiscrepancyResult:
    value: Union[int, float]        # max_i |row_sums_i|
    argmin: np.ndarray              # sign vector achieving value
    row_sums: np.ndarray            # M * sigma for that vector


def _work_entries(inst: Instance) -> np.ndarray:
    # int64 keeps rademacher/bernoulli arithmetic exact
    if inst.disorder == "gaussian":
        return np.asarray(inst.entries, dtype=np.float64)
    return np.asarray(inst.entries, dtype=np.int64)


def _native_value(x):
    return float(x) if isinstance(x, (float, np.floating)) else int(x)


def disc_value(inst: Instance, sigma) -> DiscrepancyResult:
    """Row sums M*sigma and their max absolute value for one sign vector."""
    sig = as_sign_vector(sigma, inst.cols)
    entries = _work_entries(inst)
    row_sums = entries @ sig.astype(entries.dtype)
    value = _native_value(np.max(np.abs(row_sums)))
    return DiscrepancyResult(value=value, argmin=sig, row_sums=row_sums)


def _signs_from_codes(codes: np.ndarray, n: int) -> np.ndarray:
    """Halved-walk codes -> (len(codes), n) int8 sign matrix, sigma(1) = +1."""
    out = np.ones((codes.shape[0], n), dtype=np.int8)
    if n > 1:
        bits = (codes[:, None] >> np.arange(n - 1, dtype=np.uint64)[None, :]) & np.uint64(1)
        out[:, 1:] = 1 - 2 * bits.astype(np.int8)
    return out


class _GrayScan:
    """Blocked halved Gray-code walk over row-sum vectors."""

    def __init__(self, entries: np.ndarray):
        m, n = entries.shape
        self.n = n
        self.entries = entries
        self.q = min(_BLOCK_BITS, n - 1)
        b = 1 << self.q
        self.n_blocks = 1 << (n - 1 - self.q)
        r = np.arange(b, dtype=np.uint64)
        gray = r ^ (r >> np.uint64(1))
        if self.q:
            bits = ((gray[:, None] >> np.arange(self.q, dtype=np.uint64)[None, :])
                    & np.uint64(1)).astype(entries.dtype)
            suffix_even = bits @ (-2 * entries[:, 1:1 + self.q]).T   # (b, M)
            low_even = gray
            low_odd = gray ^ np.uint64(b >> 1)
            suffix_odd = suffix_even[::-1]   # gray(b-1-r) = gray(r) ^ (b>>1)
        else:
            suffix_even = suffix_odd = np.zeros((1, m), dtype=entries.dtype)
            low_even = low_odd = gray
        self.low = (low_even, low_odd)
        self.suffix = (suffix_even, suffix_odd)
        self.base = entries.sum(axis=1)

    def blocks(self):
        """Yield (parity, gray_high, candidate_row_sums of shape (2^q, M))."""
        cur = self.base.copy()
        gray_high = 0
        for j in range(self.n_blocks):
            if j:
                bit = (j & -j).bit_length() - 1
                col = self.entries[:, 1 + self.q + bit]
                if (gray_high >> bit) & 1:
                    cur += 2 * col
                    gray_high ^= 1 << bit
                else:
                    cur -= 2 * col
                    gray_high |= 1 << bit
            par = j & 1
            yield par, gray_high, cur[None, :] + self.suffix[par]

    def codes(self, parity: int, gray_high: int, rs) -> np.ndarray:
        """Walk codes of within-block candidate positions ``rs``."""
        return np.uint64(gray_high << self.q) | self.low[parity][rs]


def exact_discrepancy(inst: Instance, max_n: int = EXACT_MAX_N) -> DiscrepancyResult:
    """Global minimum of max_i |(M sigma)_i| over all sign vectors."""
    n = inst.cols
    if n > max_n:
        raise CapacityError(f"exact solve for n={n} exceeds max_n={max_n}")
    scan = _GrayScan(_work_entries(inst))
    best = np.inf
    best_code = np.uint64(0)
    best_sums = None
    for par, gh, cand in scan.blocks():
        vals = np.abs(cand).max(axis=1)
        r = int(np.argmin(vals))
        if vals[r] < best:
            best = vals[r]
            best_code = scan.codes(par, gh, r)
            best_sums = cand[r].copy()
    argmin = _signs_from_codes(np.array([best_code], dtype=np.uint64), n)[0]
    return DiscrepancyResult(value=_native_value(best), argmin=argmin, row_sums=best_sums)


def enumerate_below(inst: Instance, threshold: float,
                    max_n: int = ENUMERATE_MAX_N) -> np.ndarray:
    """All sign vectors with max_i |(M sigma)_i| <= threshold (inclusive).

    Returns a (count, n) int8 matrix, closed under global flip: first the
    solutions with sigma(1) = +1 in walk order, then their negations in
    the same order.
    """
    n = inst.cols
    if n > max_n:
        raise CapacityError(f"enumeration for n={n} exceeds max_n={max_n}")
    scan = _GrayScan(_work_entries(inst))
    found = []
    for par, gh, cand in scan.blocks():
        hits = np.nonzero(np.abs(cand).max(axis=1) <= threshold)[0]
        if hits.size:
            found.append(scan.codes(par, gh, hits))
    if not found:
        return np.empty((0, n), dtype=np.int8)
    half = _signs_from_codes(np.concatenate(found), n)
    return np.concatenate([half, -half], axis=0)


def sbp_membership(inst: Instance, sigma, kappa: float) -> bool:
    """max_i |<row_i, sigma>| <= kappa * sqrt(n), inclusive, no epsilon."""
    if inst.disorder != "gaussian":
        raise UnsupportedDisorderError(
            f"perceptron membership is defined for gaussian disorder, got {inst.disorder!r}")
    if not kappa > 0:
        raise ParameterError(f"kappa must be positive, got {kappa}")
    res = disc_value(inst, sigma)
    return bool(res.value <= kappa * np.sqrt(inst.cols))


def enumerate_solutions(inst: Instance, kappa: float,
                        max_n: int = ENUMERATE_MAX_N) -> np.ndarray:
    """The full solution set {sigma : ||M sigma||_inf <= kappa sqrt(n)}."""
    if not kappa > 0:
        raise ParameterError(f"kappa must be positive, got {kappa}")
    return enumerate_below(inst, kappa * np.sqrt(inst.cols), max_n=max_n)
