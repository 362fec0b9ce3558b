"""
Factor-graph message lattice and min-sum processing elements.

Columns are 0-based: column 0 holds the message leaves, column ``m`` the
codeword. The processing element at stage ``s`` joins columns ``s`` and
``s + 1`` and pairs rows ``i`` and ``i + 2**s`` (``i`` has bit ``s`` clear).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .code import PolarCode

# finite stand-in for an infinite LLR
SAT = 1e30

DEFAULT_ALPHA = 0.9375

Kernel = Callable[[np.ndarray, np.ndarray], np.ndarray]


def saturate(x):
    return np.clip(x, -SAT, SAT)


def sat_add(x, y):
    return np.clip(np.add(x, y), -SAT, SAT)


def g_minsum(x, y):
    """sign(x) sign(y) min(|x|, |y|), with sign(0) taken as +1."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    mag = np.minimum(np.abs(x), np.abs(y))
    out = saturate(np.where((x < 0) != (y < 0), -mag, mag))
    return out if out.ndim else float(out)


def g_scaled(x, y, alpha: float = DEFAULT_ALPHA):
    _check_alpha(alpha)
    return alpha * g_minsum(x, y)


def make_kernel(kind: str = "ms", alpha: float = DEFAULT_ALPHA) -> Kernel:
    """Return the check-node function for ``"ms"`` or ``"sms"``."""
    if kind == "ms":
        return _g_fast
    if kind == "sms":
        _check_alpha(alpha)

        def scaled(x, y):
            out = _g_fast(x, y)
            out *= alpha
            return out

        return scaled
    raise ValueError(f"unknown kernel {kind!r}; expected 'ms' or 'sms'")


def _g_fast(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # array-only variant of g_minsum used on the hot path
    out = np.minimum(np.abs(x), np.abs(y))
    np.negative(out, out=out, where=(x < 0) != (y < 0))
    return out


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"scale factor must lie in (0, 1], got {alpha}")


class PEIndex(NamedTuple):
    stage: int
    top: int

    @property
    def offset(self) -> int:
        return 1 << self.stage

    @property
    def bottom(self) -> int:
        return self.top + self.offset


def stage_pes(n: int, stage: int) -> list[PEIndex]:
    o = 1 << stage
    return [PEIndex(stage, i) for i in range(n) if not i & o]


@dataclass
class MessageState:
    """L and R messages over the (m + 1) x n lattice of a single frame."""

    code: PolarCode
    L: np.ndarray
    R: np.ndarray
    pruned: bool = False


class PrunedStateError(RuntimeError):
    """Raised when a quantity is requested that a pruned decoder never computes."""


def init_messages(code: PolarCode, channel_llrs) -> MessageState:
    llr = np.asarray(channel_llrs, dtype=np.float64)
    if llr.shape != (code.n,):
        raise ValueError(f"expected {code.n} channel LLRs, got shape {llr.shape}")
    if not np.isfinite(llr).all():
        raise ValueError("channel LLRs must be finite")
    L = np.zeros((code.m + 1, code.n))
    R = np.zeros((code.m + 1, code.n))
    L[code.m] = saturate(llr)
    R[0, code.frozen_mask] = SAT
    return MessageState(code, L, R)


def update_left(pe: PEIndex, state: MessageState, kernel: Kernel = g_minsum) -> None:
    s, i, j = pe.stage, pe.top, pe.bottom
    L, R = state.L, state.R
    a, b = L[s + 1, i], L[s + 1, j]
    L[s, i] = kernel(a, sat_add(b, R[s, j]))
    L[s, j] = sat_add(kernel(R[s, i], a), b)


def update_right(pe: PEIndex, state: MessageState, kernel: Kernel = g_minsum) -> None:
    s, i, j = pe.stage, pe.top, pe.bottom
    L, R = state.L, state.R
    rt, rb = R[s, i], R[s, j]
    R[s + 1, i] = kernel(rt, sat_add(L[s + 1, j], rb))
    R[s + 1, j] = sat_add(kernel(rt, L[s + 1, i]), rb)


def posterior_codeword_llr(state: MessageState) -> np.ndarray:
    m = state.code.m
    return sat_add(state.R[m], state.L[m])


def posterior_message_llr(state: MessageState) -> np.ndarray:
    if state.pruned:
        raise PrunedStateError("message LLRs are not computed by the pruned decoder")
    return state.L[0].copy()


class Stage:
    """Vectorised access to the processing elements of one stage.

    Operates on batched columns of shape ``(batch, n)``. With ``tops=None``
    every PE of the stage is active and strided views are used; otherwise
    only the PEs with the given top rows are touched.
    """

    def __init__(self, n: int, stage: int, tops: np.ndarray | None = None):
        self.n = n
        self.stage = stage
        self.offset = 1 << stage
        self.tops = tops
        self.bottoms = None if tops is None else tops + self.offset

    @property
    def size(self) -> int:
        return self.n // 2 if self.tops is None else int(self.tops.size)

    def split(self, col: np.ndarray):
        if self.tops is None:
            v = col.reshape(col.shape[0], self.n // (2 * self.offset), 2, self.offset)
            return v[:, :, 0, :], v[:, :, 1, :]
        return col[:, self.tops], col[:, self.bottoms]

    def assign(self, col: np.ndarray, top, bottom) -> None:
        if self.tops is None:
            v = col.reshape(col.shape[0], self.n // (2 * self.offset), 2, self.offset)
            v[:, :, 0, :] = top
            v[:, :, 1, :] = bottom
        else:
            col[:, self.tops] = top
            col[:, self.bottoms] = bottom

    def left(self, L: np.ndarray, R: np.ndarray, kernel: Kernel) -> None:
        s = self.stage
        a, b = self.split(L[s + 1])
        rt, rb = self.split(R[s])
        top = kernel(a, _clip(b + rb))
        bottom = _clip(kernel(rt, a) + b)
        self.assign(L[s], top, bottom)

    def right(self, L: np.ndarray, R: np.ndarray, kernel: Kernel) -> None:
        s = self.stage
        a, b = self.split(L[s + 1])
        rt, rb = self.split(R[s])
        top = kernel(rt, _clip(b + rb))
        bottom = _clip(kernel(rt, a) + rb)
        self.assign(R[s + 1], top, bottom)

    def both(self, L: np.ndarray, R: np.ndarray, kernel: Kernel) -> None:
        # reads and writes are on disjoint columns, so the order is immaterial
        s = self.stage
        a, b = self.split(L[s + 1])
        rt, rb = self.split(R[s])
        shared = _clip(b + rb)
        cross = kernel(rt, a)
        ltop = kernel(a, shared)
        lbot = _clip(cross + b)
        rtop = kernel(rt, shared)
        rbot = _clip(cross + rb)
        self.assign(L[s], ltop, lbot)
        self.assign(R[s + 1], rtop, rbot)


def _clip(x: np.ndarray) -> np.ndarray:
    return np.clip(x, -SAT, SAT, out=x)
