"""
Constituent-code classification and the closed-form REP / SPC updates.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .code import PolarCode
from .graph import SAT


class Kind(str, enum.Enum):
    N0 = "N0"
    N1 = "N1"
    REP = "REP"
    SPC = "SPC"
    PLAIN = "PLAIN"


CENSUS_KINDS = (Kind.N0, Kind.N1, Kind.REP, Kind.SPC)


@dataclass(frozen=True)
class ConstituentNode:
    kind: Kind
    start: int
    size: int

    @property
    def stage(self) -> int:
        """Lattice column (0-based) holding this subtree's root messages."""
        return self.size.bit_length() - 1

    @property
    def stop(self) -> int:
        return self.start + self.size


@dataclass(frozen=True)
class ConstituentTree:
    nodes: tuple[ConstituentNode, ...]

    def census(self, min_size: int = 1) -> Counter:
        """Counts keyed by ``(kind, size)``, excluding PLAIN leaves."""
        return Counter(
            (nd.kind, nd.size) for nd in self.nodes if nd.kind is not Kind.PLAIN and nd.size >= min_size
        )

    def totals(self, min_size: int = 1) -> dict[Kind, int]:
        c = self.census(min_size)
        return {kind: sum(v for (k, _), v in c.items() if k is kind) for kind in CENSUS_KINDS}

    def of_kind(self, kind: Kind) -> list[ConstituentNode]:
        return [nd for nd in self.nodes if nd.kind is kind]

    def cover_sizes(self, n: int) -> np.ndarray:
        """For each leaf, the size of the constituent node containing it."""
        out = np.empty(n, dtype=np.int64)
        for nd in self.nodes:
            out[nd.start : nd.stop] = nd.size
        return out


def node_kind(frozen: np.ndarray) -> Kind:
    """Kind of a single leaf range, tested in the order N0, N1, REP, SPC."""
    if frozen.size < 2:
        return Kind.PLAIN
    if frozen.all():
        return Kind.N0
    if not frozen.any():
        return Kind.N1
    if frozen[:-1].all() and not frozen[-1]:
        return Kind.REP
    if frozen[0] and not frozen[1:].any():
        return Kind.SPC
    return Kind.PLAIN


def classify(code: PolarCode | np.ndarray) -> ConstituentTree:
    """Split the leaf range into maximal N0 / N1 / REP / SPC subtrees.

    Ranges matching none of the four kinds are halved; single leaves that
    remain are reported as PLAIN nodes of size 1.
    """
    mask = code.frozen_mask if isinstance(code, PolarCode) else np.asarray(code, dtype=bool)
    nodes: list[ConstituentNode] = []
    stack = [(0, mask.size)]
    while stack:
        start, size = stack.pop()
        kind = node_kind(mask[start : start + size])
        if kind is not Kind.PLAIN or size == 1:
            nodes.append(ConstituentNode(kind, start, size))
        else:
            half = size // 2
            stack.append((start + half, half))
            stack.append((start, half))
    return ConstituentTree(tuple(nodes))


def rep_update(llrs) -> np.ndarray:
    """Repetition-code extrinsic rule: each output is the sum of the other inputs.

    Works along the last axis. Exclusive prefix and suffix sums are used
    rather than total-minus-self so a saturated input cannot cancel out.
    """
    x = np.asarray(llrs, dtype=np.float64)
    if x.shape[-1] < 2:
        raise ValueError("repetition update needs at least two inputs")
    prefix = np.cumsum(x, axis=-1)
    suffix = np.cumsum(x[..., ::-1], axis=-1)[..., ::-1]
    out = np.zeros_like(x)
    out[..., 1:] += prefix[..., :-1]
    out[..., :-1] += suffix[..., 1:]
    return np.clip(out, -SAT, SAT, out=out)


def spc_update(llrs) -> np.ndarray:
    """Single-parity-check min-sum rule along the last axis.

    Output i carries the sign product and the minimum magnitude of all other
    inputs, found from the overall sign and the two smallest magnitudes.
    """
    x = np.asarray(llrs, dtype=np.float64)
    l = x.shape[-1]
    if l < 2:
        raise ValueError("parity-check update needs at least two inputs")
    neg = x < 0
    parity = np.logical_xor.reduce(neg, axis=-1, keepdims=True)
    mag = np.abs(x)
    first = np.argmin(mag, axis=-1)[..., None]
    min1 = np.take_along_axis(mag, first, axis=-1)
    rest = mag.copy()
    np.put_along_axis(rest, first, np.inf, axis=-1)
    min2 = rest.min(axis=-1, keepdims=True)
    out = np.where(np.arange(l) == first, min2, min1)
    np.negative(out, out=out, where=parity ^ neg)
    return out
