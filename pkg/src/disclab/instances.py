"""Random instance generation and correlated ensembles.

An instance is an M x n matrix with one of three disorder families:
gaussian N(0,1), rademacher {-1,+1}, or bernoulli(p) {0,1}.  Entry (i, j)
of a generated instance is ``philox(key=seed, counter=(i, j, tag, 0))``
pushed through the family's transform, so generation is deterministic,
coordinate-parallel, and independent of evaluation order.

Correlated ensembles come in two flavours:

* suffix resampling -- members share the first n-k columns of a base
  instance exactly and redraw the last k columns from per-member seeds;
* angular interpolation -- cos(tau) * base + sin(tau) * fresh, defined
  for gaussian disorder only (it preserves the N(0,1) marginals).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import philox
from .errors import ParameterError, UnsupportedDisorderError

DISORDERS = ("gaussian", "rademacher", "bernoulli")

# stream tags keep the per-family bit streams disjoint for one seed
_STREAM_TAG = {"gaussian": 0, "rademacher": 1, "bernoulli": 2}


@dataclass(frozen=True)
class Instance:
    """A realized random matrix plus the description that produced it.

    ``seed`` is None for derived instances (interpolations), whose entries
    are functions of their parents rather than of a single seed.  For
    suffix-resampled ensemble members ``seed`` is the member seed; only
    the resampled columns are determined by it.
    """

    rows: int
    cols: int
    disorder: str
    seed: Optional[int]
    entries: np.ndarray = field(repr=False)
    p: Optional[float] = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols


def _check_dims(rows: int, cols: int) -> None:
    if rows < 1 or cols < 1:
        raise ParameterError(f"dimensions must be positive, got {rows}x{cols}")


def _check_disorder(disorder: str, p: Optional[float]) -> None:
    if disorder not in DISORDERS:
        raise ParameterError(f"unknown disorder {disorder!r}, expected one of {DISORDERS}")
    if disorder == "bernoulli":
        if p is None or not 0.0 < p < 1.0:
            raise ParameterError(f"bernoulli disorder needs p in (0,1), got {p}")
    elif p is not None:
        raise ParameterError(f"p is only meaningful for bernoulli disorder, got p={p}")


def _entries_block(seed: int, disorder: str, p: Optional[float],
                   row_idx: np.ndarray, col_idx: np.ndarray) -> np.ndarray:
    """Entries at the given (broadcast) coordinate grids."""
    tag = _STREAM_TAG[disorder]
    if disorder == "gaussian":
        return philox.gaussians(seed, row_idx, col_idx, tag)
    if disorder == "rademacher":
        return philox.signs(seed, row_idx, col_idx, tag)
    return philox.bernoullis(seed, p, row_idx, col_idx, tag)


def _entry_grid(rows: int, cols: int, col_offset: int = 0):
    r = np.arange(rows, dtype=np.uint64)[:, None]
    c = np.arange(col_offset, col_offset + cols, dtype=np.uint64)[None, :]
    return r, c


def generate(rows: int, cols: int, disorder: str, seed: int,
             p: Optional[float] = None) -> Instance:
    """Generate a fresh instance; identical arguments give identical entries."""
    _check_dims(rows, cols)
    _check_disorder(disorder, p)
    r, c = _entry_grid(rows, cols)
    entries = _entries_block(seed, disorder, p, r, c)
    entries.setflags(write=False)
    return Instance(rows, cols, disorder, seed, entries, p)


def suffix_width(cols: int, fraction: float) -> int:
    """Resampled-column count for a fractional width: floor(fraction * n),
    clamped to at least 1.  The exact k should be recorded alongside any
    ensemble built from a fraction."""
    if not 0.0 < fraction <= 1.0:
        raise ParameterError(f"fraction must lie in (0, 1], got {fraction}")
    return max(1, int(math.floor(fraction * cols)))


def generate_batch(rows: int, cols: int, disorder: str, seeds,
                   p: Optional[float] = None, col_offset: int = 0) -> np.ndarray:
    """Entries for many seeds at once: (len(seeds), rows, cols).

    Equals np.stack([generate(rows, cols, disorder, s, p).entries for s
    in seeds]) entry for entry; ``col_offset`` shifts the column counter
    (used to redraw suffix blocks in ensemble batches).
    """
    _check_dims(rows, cols)
    _check_disorder(disorder, p)
    key = np.asarray(seeds, dtype=np.uint64)[:, None, None]
    r = np.arange(rows, dtype=np.uint64)[None, :, None]
    c = np.arange(col_offset, col_offset + cols, dtype=np.uint64)[None, None, :]
    tag = _STREAM_TAG[disorder]
    if disorder == "gaussian":
        return philox.gaussians(key, r, c, tag)
    if disorder == "rademacher":
        return philox.signs(key, r, c, tag)
    return philox.bernoullis(key, p, r, c, tag)


def resample_suffix(base: Instance, k: int, m: int,
                    seeds: Sequence[int]) -> list[Instance]:
    """m correlated copies of ``base`` sharing the first n-k columns.

    The first member is ``base`` itself; members 2..m redraw the last k
    columns (global column indices n-k..n-1) from the corresponding entry
    of ``seeds`` (length m-1), keeping the base disorder.
    """
    n = base.cols
    if not 1 <= k <= n:
        raise ParameterError(f"resample width k={k} must satisfy 1 <= k <= n={n}")
    if m < 2:
        raise ParameterError(f"ensemble size m={m} must be >= 2")
    if len(seeds) != m - 1:
        raise ParameterError(f"need {m - 1} member seeds for m={m}, got {len(seeds)}")
    members = [base]
    prefix = base.entries[:, : n - k]
    r, c = _entry_grid(base.rows, k, col_offset=n - k)
    for s in seeds:
        suffix = _entries_block(s, base.disorder, base.p, r, c)
        entries = np.concatenate([prefix, suffix], axis=1)
        entries.setflags(write=False)
        members.append(Instance(base.rows, n, base.disorder, int(s), entries, base.p))
    return members


def interpolate(base: Instance, fresh: Instance, tau: float) -> Instance:
    """cos(tau) * base + sin(tau) * fresh, entrywise (gaussian only).

    The endpoint angles 0 and pi/2 (the float math.pi/2) reproduce base
    and fresh exactly; float cos(pi/2) is otherwise a stray 6e-17.
    """
    if base.disorder != "gaussian" or fresh.disorder != "gaussian":
        raise UnsupportedDisorderError(
            "interpolation is defined for gaussian disorder only, got "
            f"{base.disorder!r} and {fresh.disorder!r}")
    if base.shape != fresh.shape:
        raise ParameterError(f"shape mismatch: {base.shape} vs {fresh.shape}")
    if not 0.0 <= tau <= np.pi / 2:
        raise ParameterError(f"interpolation angle must lie in [0, pi/2], got {tau}")
    if tau == np.pi / 2:
        c, s = 0.0, 1.0
    else:
        c, s = np.cos(tau), np.sin(tau)
    entries = c * base.entries + s * fresh.entries
    entries.setflags(write=False)
    return Instance(base.rows, base.cols, "gaussian", None, entries)


@dataclass(frozen=True)
class EnsembleSpec:
    """Reproducible description of a correlated ensemble.

    mode "suffix_resample": ``k`` columns redrawn per member, m members,
    member_seeds of length m-1 (the first member is the base).
    mode "interpolate": per-member angles in [0, pi/2]; member_seeds of
    length m seed the fresh matrices mixed into the base.
    """

    base_rows: int
    base_cols: int
    disorder: str
    base_seed: int
    mode: str
    m: int
    member_seeds: tuple[int, ...]
    k: Optional[int] = None
    angles: Optional[tuple[float, ...]] = None
    p: Optional[float] = None

    def __post_init__(self):
        if self.mode not in ("suffix_resample", "interpolate"):
            raise ParameterError(f"unknown ensemble mode {self.mode!r}")
        if self.m < 1:
            raise ParameterError("ensemble needs m >= 1 members")
        if self.mode == "suffix_resample":
            if self.k is None or not 0 < self.k <= self.base_cols:
                raise ParameterError(f"suffix_resample needs 0 < k <= n, got k={self.k}")
            if len(self.member_seeds) != self.m - 1:
                raise ParameterError("suffix_resample needs m-1 member seeds")
        else:
            if self.disorder != "gaussian":
                raise UnsupportedDisorderError("interpolate ensembles are gaussian only")
            if self.angles is None or len(self.angles) != self.m:
                raise ParameterError("interpolate needs one angle per member")
            if any(not 0.0 <= t <= np.pi / 2 for t in self.angles):
                raise ParameterError("angles must lie in [0, pi/2]")
            if len(self.member_seeds) != self.m:
                raise ParameterError("interpolate needs m member seeds")

    def realize(self) -> list[Instance]:
        base = generate(self.base_rows, self.base_cols, self.disorder,
                        self.base_seed, self.p)
        if self.mode == "suffix_resample":
            return resample_suffix(base, self.k, self.m, self.member_seeds)
        members = []
        for tau, s in zip(self.angles, self.member_seeds):
            fresh = generate(self.base_rows, self.base_cols, "gaussian", s)
            members.append(interpolate(base, fresh, tau))
        return members


# ---------------------------------------------------------------------------
# Instance files: one JSON header line, then a CSV or raw float64-LE body.
# ---------------------------------------------------------------------------

def save_instance(inst: Instance, path, body: str = "csv") -> None:
    if body not in ("csv", "raw"):
        raise ParameterError(f"body format must be 'csv' or 'raw', got {body!r}")
    header = {"rows": inst.rows, "cols": inst.cols, "disorder": inst.disorder}
    if inst.p is not None:
        header["p"] = inst.p
    header["seed"] = inst.seed
    header["body"] = body
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("ascii") + b"\n")
        if body == "raw":
            fh.write(np.ascontiguousarray(inst.entries, dtype="<f8").tobytes())
        else:
            integer = inst.disorder in ("rademacher", "bernoulli")
            for row in inst.entries:
                if integer:
                    line = ",".join(str(int(v)) for v in row)
                else:
                    line = ",".join(format(v, ".17g") for v in row)
                fh.write(line.encode("ascii") + b"\n")


def load_instance(path) -> Instance:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("ascii"))
        rows, cols = header["rows"], header["cols"]
        disorder = header["disorder"]
        if header["body"] == "raw":
            buf = fh.read(rows * cols * 8)
            entries = np.frombuffer(buf, dtype="<f8").reshape(rows, cols).copy()
            if disorder in ("rademacher", "bernoulli"):
                entries = entries.astype(np.int64)
        else:
            text = fh.read().decode("ascii").strip().splitlines()
            if disorder in ("rademacher", "bernoulli"):
                entries = np.array([[int(v) for v in line.split(",")] for line in text],
                                   dtype=np.int64)
            else:
                entries = np.array([[float(v) for v in line.split(",")] for line in text],
                                   dtype=np.float64)
    entries.setflags(write=False)
    return Instance(rows, cols, disorder, header.get("seed"), entries, header.get("p"))
