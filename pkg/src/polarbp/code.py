"""
Polar code construction, encoding and parity checking.

Indices are 0-based throughout. The generator is ``G = F^{(x)m}`` with
``F = [[1, 0], [1, 1]]`` in natural order (no bit reversal), so encoding is
its own inverse over GF(2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

DEFAULT_ERASURE = 0.3

_KERNEL = np.array([[1, 0], [1, 1]], dtype=np.uint8)


@dataclass(frozen=True)
class PolarCode:
    """An (n, k) polar code described by its frozen mask.

    ``frozen_mask[i]`` is True when message position ``i`` is frozen to 0.
    """

    frozen_mask: np.ndarray
    design_erasure: float = DEFAULT_ERASURE
    n: int = field(init=False)
    m: int = field(init=False)
    k: int = field(init=False)

    def __post_init__(self):
        mask = np.asarray(self.frozen_mask, dtype=bool).copy()
        if mask.ndim != 1:
            raise ValueError("frozen mask must be one-dimensional")
        n = mask.size
        if n < 2 or n & (n - 1):
            raise ValueError(f"code length must be a power of two >= 2, got {n}")
        k = int(n - mask.sum())
        if not 0 < k < n:
            raise ValueError(f"information count must be in (0, {n}), got {k}")
        mask.flags.writeable = False
        object.__setattr__(self, "frozen_mask", mask)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", n.bit_length() - 1)
        object.__setattr__(self, "k", k)

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def info_positions(self) -> np.ndarray:
        return np.flatnonzero(~self.frozen_mask)

    @property
    def frozen_positions(self) -> np.ndarray:
        return np.flatnonzero(self.frozen_mask)

    def __eq__(self, other):
        if not isinstance(other, PolarCode):
            return NotImplemented
        return np.array_equal(self.frozen_mask, other.frozen_mask)

    def __hash__(self):
        return hash(self.frozen_mask.tobytes())

    def __repr__(self):
        return f"PolarCode(n={self.n}, k={self.k}, design_erasure={self.design_erasure})"


def bhattacharyya(n: int, design_erasure: float = DEFAULT_ERASURE) -> np.ndarray:
    """Bhattacharyya parameters of the n synthetic channels of a BEC.

    The bits of each index are consumed most significant first; a 0 bit takes
    the degraded branch ``2z - z**2`` and a 1 bit the upgraded branch ``z**2``.
    """
    _check_length(n)
    if not 0.0 < design_erasure < 1.0:
        raise ValueError(f"design erasure must lie in (0, 1), got {design_erasure}")
    z = np.array([design_erasure], dtype=np.float64)
    while z.size < n:
        nxt = np.empty(2 * z.size)
        nxt[0::2] = 2 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return z


def construct_frozen_set(n: int, k: int, design_erasure: float = DEFAULT_ERASURE) -> PolarCode:
    """Freeze the ``n - k`` least reliable positions of a BEC-designed code.

    Ties in the Bhattacharyya parameter freeze the lower index first.
    """
    _check_length(n)
    if not 0 < k < n:
        raise ValueError(f"k must satisfy 0 < k < n, got k={k}, n={n}")
    z = bhattacharyya(n, design_erasure)
    order = np.lexsort((np.arange(n), -z))
    mask = np.zeros(n, dtype=bool)
    mask[order[: n - k]] = True
    return PolarCode(mask, design_erasure)


def polar_transform(bits: np.ndarray) -> np.ndarray:
    """Multiply by ``F^{(x)m}`` over GF(2) along the last axis.

    Uses m in-place butterfly stages. Leading axes are treated as a batch.
    """
    x = np.array(bits, dtype=np.uint8, copy=True)
    n = x.shape[-1]
    _check_length(n)
    lead = x.shape[:-1]
    o = 1
    while o < n:
        v = x.reshape(*lead, n // (2 * o), 2, o)
        v[..., 0, :] ^= v[..., 1, :]
        o *= 2
    return x


def encode(code: PolarCode, u) -> np.ndarray:
    """Encode a length-n message (frozen positions must be zero)."""
    u = _as_bits(u, code.n)
    if u[..., code.frozen_mask].any():
        raise ValueError("message has nonzero bits at frozen positions")
    return polar_transform(u)


def embed(code: PolarCode, info_bits) -> np.ndarray:
    """Place k information bits into a zero-frozen length-n message."""
    info = np.asarray(info_bits, dtype=np.uint8)
    if info.shape[-1] != code.k:
        raise ValueError(f"expected {code.k} information bits, got {info.shape[-1]}")
    u = np.zeros(info.shape[:-1] + (code.n,), dtype=np.uint8)
    u[..., code.info_positions] = info
    return u


def recover_message(code: PolarCode, x) -> np.ndarray:
    """Return the k information bits of ``u = x F^{(x)m}``."""
    x = _as_bits(x, code.n)
    return polar_transform(x)[..., code.info_positions]


def generator_matrix(n: int) -> np.ndarray:
    _check_length(n)
    m = n.bit_length() - 1
    return reduce(np.kron, [_KERNEL] * m).astype(np.uint8)


def parity_check_matrix(code: PolarCode) -> np.ndarray:
    """The n x (n - k) matrix H with ``x H = 0`` exactly for codewords.

    Since the generator is self-inverse, the frozen columns of G serve as H.
    """
    return generator_matrix(code.n)[:, code.frozen_mask].copy()


def check_codeword(x, H: np.ndarray) -> bool:
    x = np.asarray(x, dtype=np.int64)
    if x.shape[-1] != H.shape[0]:
        raise ValueError(f"word length {x.shape[-1]} does not match H with {H.shape[0]} rows")
    return not ((x @ H) % 2).any()


def syndrome_ok(code: PolarCode, x: np.ndarray) -> np.ndarray:
    """Batched codeword test via the transform; True where every frozen bit of xG is 0."""
    return ~polar_transform(x)[..., code.frozen_mask].any(axis=-1)


def mask_to_str(code: PolarCode) -> str:
    return "".join("1" if f else "0" for f in code.frozen_mask)


def parse_mask(text: str, design_erasure: float = DEFAULT_ERASURE) -> PolarCode:
    """Parse a mask line of '0' (information) / '1' (frozen) characters."""
    s = text.strip()
    if not s or set(s) - {"0", "1"}:
        raise ValueError("mask must be a non-empty string of '0'/'1' characters")
    return PolarCode(np.frombuffer(s.encode(), dtype=np.uint8) == ord("1"), design_erasure)


def _check_length(n: int) -> None:
    if n < 2 or n & (n - 1):
        raise ValueError(f"code length must be a power of two >= 2, got {n}")


def _as_bits(bits, n: int) -> np.ndarray:
    b = np.asarray(bits)
    if b.shape[-1] != n:
        raise ValueError(f"expected length {n}, got {b.shape[-1]}")
    if ((b != 0) & (b != 1)).any():
        raise ValueError("bit vectors may contain only 0 and 1")
    return b.astype(np.uint8)
