"""Truncated signature transform of piecewise-linear paths.

The signature of a path is the collection of its iterated integrals; the
truncated transform keeps levels 0..m and stores them as one flat coefficient
vector in lexicographic tensor-index order (level 0 first, always equal 1).
Two facts make it cheap here: a linear segment's signature is the tensor
exponential of its increment, and signatures of concatenated paths combine
through the truncated tensor product (Chen's identity), so a running
signature advances by one product per new observation event instead of being
recomputed from scratch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .obs_path import InterpolatedPath

MAX_COEFFS = 100_000_000


def sig_dim(d: int, m: int) -> int:
    """Number of coefficients of a level-m signature in dimension d."""
    if d < 1:
        raise ValueError("path dimension must be >= 1")
    if m < 0:
        raise ValueError("truncation level must be >= 0")
    n = m + 1 if d == 1 else (d ** (m + 1) - 1) // (d - 1)
    if n > MAX_COEFFS:
        max_m = m
        while max_m > 0 and sig_dim(d, max_m - 1) > MAX_COEFFS:
            max_m -= 1
        raise OverflowError(
            f"signature would need {n} coefficients; "
            f"largest usable level for dimension {d} is {max_m - 1}"
        )
    return n


def _level_slices(d: int, m: int):
    """Slice of the flat coefficient vector occupied by each level."""
    out = []
    lo = 0
    for k in range(m + 1):
        width = d**k
        out.append(slice(lo, lo + width))
        lo += width
    return out


@dataclass
class TruncatedSignature:
    dim: int
    level: int
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if len(self.coeffs) != sig_dim(self.dim, self.level):
            raise ValueError("coefficient vector has the wrong length")

    def level_block(self, k: int) -> np.ndarray:
        return self.coeffs[_level_slices(self.dim, self.level)[k]]


def identity_signature(d: int, m: int) -> TruncatedSignature:
    coeffs = np.zeros(sig_dim(d, m))
    coeffs[0] = 1.0
    return TruncatedSignature(d, m, coeffs)


def signature_of_segment(increment, m: int) -> TruncatedSignature:
    """Signature of a single linear segment: level k is increment^(x k)/k!."""
    inc = np.asarray(increment, dtype=np.float64)
    if not np.all(np.isfinite(inc)):
        raise ValueError("non-finite increment")
    d = len(inc)
    blocks = [np.ones(1)]
    for k in range(1, m + 1):
        blocks.append(np.kron(blocks[-1], inc) / k)
    return TruncatedSignature(d, m, np.concatenate(blocks))


def chen_concat(s1: TruncatedSignature, s2: TruncatedSignature) -> TruncatedSignature:
    """Signature of the concatenated path via the truncated tensor product."""
    if s1.dim != s2.dim:
        raise ValueError(f"dimension mismatch: {s1.dim} vs {s2.dim}")
    if s1.level != s2.level:
        raise ValueError(f"level mismatch: {s1.level} vs {s2.level}")
    d, m = s1.dim, s1.level
    a = [s1.level_block(k) for k in range(m + 1)]
    b = [s2.level_block(k) for k in range(m + 1)]
    out = []
    for k in range(m + 1):
        acc = np.zeros(d**k)
        for i in range(k + 1):
            acc += np.kron(a[i], b[k - i])
        out.append(acc)
    return TruncatedSignature(d, m, np.concatenate(out))


def segment_blocks_batch(incs: np.ndarray, m: int):
    """Per-level blocks of the tensor exponential for a batch of increments."""
    n = incs.shape[0]
    blocks = [np.ones((n, 1))]
    for k in range(1, m + 1):
        nxt = (blocks[-1][:, :, None] * incs[:, None, :]).reshape(n, -1) / k
        blocks.append(nxt)
    return blocks


def extend_batch(sigs: np.ndarray, incs: np.ndarray, dim: int, level: int) -> np.ndarray:
    """Advance a batch of running signatures by one linear segment each.

    sigs: (n, sig_dim(dim, level)) flat coefficients; incs: (n, dim).
    Returns the updated flat coefficients without touching the input.
    """
    n = sigs.shape[0]
    slices = _level_slices(dim, level)
    seg = segment_blocks_batch(incs, level)
    out = np.empty_like(sigs)
    for k in range(level + 1):
        acc = np.zeros((n, dim**k))
        for i in range(k + 1):
            a = sigs[:, slices[i]]
            b = seg[k - i]
            acc += (a[:, :, None] * b[:, None, :]).reshape(n, -1)
        out[:, slices[k]] = acc
    return out


def path_signature(
    p: InterpolatedPath, m: int, time_augment: bool = True
) -> TruncatedSignature:
    """Truncated signature of the interpolated path up to its cutoff.

    The path is basepoint-shifted (value at time 0 subtracted) and, with
    time_augment set, extended by time as leading coordinate so that the
    monotone component removes tree-like ambiguity.  Computed by folding the
    concatenation product over the linear segments of the union skeleton.
    """
    times, vals = p.skeleton()
    vals = vals - vals[0]
    if time_augment:
        x = np.concatenate([times[:, None] - times[0], vals], axis=1)
    else:
        x = vals
    d = x.shape[1]
    sig = identity_signature(d, m)
    for k in range(len(times) - 1):
        sig = chen_concat(sig, signature_of_segment(x[k + 1] - x[k], m))
    return sig
