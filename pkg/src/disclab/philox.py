"""Counter-based random number generation (Philox4x32-10).

Every random entry used in this package is a pure function of a 64-bit
seed and a small tuple of counter words, so any single matrix entry (or
Monte Carlo sample) can be computed without streaming through a generator
state.  This is what makes instance generation reproducible, order
independent, and safely parallel.

Layout used by the callers in this package:

    key     = (seed low 32 bits, seed high 32 bits)
    counter = (c0, c1, c2, c3)  -- e.g. (row, col, stream, 0)

One Philox block yields four 32-bit words; ``uniforms01`` folds them into
two open-interval (0,1) doubles and ``gaussians`` applies Box-Muller to
those two, producing one standard normal per block.
"""

from __future__ import annotations

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)  # Weyl increments for the key schedule
_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_ROUNDS = 10

_TWO_PI = 2.0 * np.pi
_INV_2_53 = 1.0 / 9007199254740992.0  # 2^-53


def philox4x32(c0, c1, c2, c3, k0, k1):
    """Philox4x32-10 block function on broadcastable uint64 arrays.

    Counter and key inputs broadcast against each other and are taken
    mod 2^32; returns four uint64 arrays holding 32-bit words.
    """
    c0 = np.asarray(c0, dtype=np.uint64) & _MASK32
    c1 = np.asarray(c1, dtype=np.uint64) & _MASK32
    c2 = np.asarray(c2, dtype=np.uint64) & _MASK32
    c3 = np.asarray(c3, dtype=np.uint64) & _MASK32
    k0 = np.asarray(k0, dtype=np.uint64) & _MASK32
    k1 = np.asarray(k1, dtype=np.uint64) & _MASK32
    c0, c1, c2, c3, k0, k1 = np.broadcast_arrays(c0, c1, c2, c3, k0, k1)
    c0, c1, c2, c3, k0, k1 = (np.array(x) for x in (c0, c1, c2, c3, k0, k1))
    for _ in range(_ROUNDS):
        p0 = _M0 * c0  # 32x32 -> 64 bit product, exact in uint64
        p1 = _M1 * c2
        hi0, lo0 = p0 >> np.uint64(32), p0 & _MASK32
        hi1, lo1 = p1 >> np.uint64(32), p1 & _MASK32
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
        k0 = (k0 + _W0) & _MASK32
        k1 = (k1 + _W1) & _MASK32
    return c0, c1, c2, c3


def split_key(seed) -> tuple[np.uint64, np.uint64]:
    """64-bit seed (scalar or array) -> (low, high) 32-bit key words."""
    if np.isscalar(seed) and not isinstance(seed, np.ndarray):
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned value, got {seed}")
        s = np.uint64(seed)
    else:
        s = np.asarray(seed, dtype=np.uint64)
    return s & _MASK32, s >> np.uint64(32)


def _to_unit_open(hi32, lo32):
    # 64 bits -> double in (0, 1): 53-bit mantissa offset by half an ulp
    u64 = (hi32 << np.uint64(32)) | lo32
    return ((u64 >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53


def uniforms01(seed: int, c0, c1, c2=0, c3=0):
    """Two independent (0,1) uniforms per counter block."""
    k0, k1 = split_key(seed)
    o0, o1, o2, o3 = philox4x32(c0, c1, c2, c3, k0, k1)
    return _to_unit_open(o0, o1), _to_unit_open(o2, o3)


def gaussians(seed: int, c0, c1, c2=0, c3=0):
    """One standard normal per counter block via Box-Muller."""
    u1, u2 = uniforms01(seed, c0, c1, c2, c3)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)


def signs(seed: int, c0, c1, c2=0, c3=0):
    """One uniform sign in {-1, +1} per counter block (int64)."""
    k0, k1 = split_key(seed)
    o0, _, _, _ = philox4x32(c0, c1, c2, c3, k0, k1)
    return 1 - 2 * (o0 & np.uint64(1)).astype(np.int64)


def bernoullis(seed: int, p: float, c0, c1, c2=0, c3=0):
    """One Bernoulli(p) draw in {0, 1} per counter block (int64)."""
    u1, _ = uniforms01(seed, c0, c1, c2, c3)
    return (u1 < p).astype(np.int64)


def derive_seed(seed: int, a: int, b: int = 0) -> int:
    """A fresh 64-bit seed from (seed, a, b); used to fan out sub-streams."""
    k0, k1 = split_key(seed)
    o0, o1, _, _ = philox4x32(a, b, 7, 0, k0, k1)
    return int((np.uint64(o0) << np.uint64(32)) | np.uint64(o1))


def philox4x32_scalar(counter, key, rounds: int = _ROUNDS):
    """Plain-integer reference implementation (for tests)."""
    c = [x & 0xFFFFFFFF for x in counter]
    k0, k1 = key[0] & 0xFFFFFFFF, key[1] & 0xFFFFFFFF
    for _ in range(rounds):
        p0 = 0xD2511F53 * c[0]
        p1 = 0xCD9E8D57 * c[2]
        c = [
            ((p1 >> 32) ^ c[1] ^ k0) & 0xFFFFFFFF,
            p1 & 0xFFFFFFFF,
            ((p0 >> 32) ^ c[3] ^ k1) & 0xFFFFFFFF,
            p0 & 0xFFFFFFFF,
        ]
        k0 = (k0 + 0x9E3779B9) & 0xFFFFFFFF
        k1 = (k1 + 0xBB67AE85) & 0xFFFFFFFF
    return tuple(c)
