"""
Belief-propagation decoders for polar codes.

Three variants share one engine:

* ``conventional``: each iteration sweeps the stages left to right and every
  processing element updates both message directions.
* ``roundtrip``: each iteration is a right-to-left pass over L followed by a
  left-to-right pass over R.
* ``xjbp``: the round-trip schedule on a graph pruned at constituent-code
  roots, where REP and SPC roots use their closed-form updates and N0 / N1
  roots are pinned.

All variants stop early once the hard decision satisfies every frozen-bit
parity check.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .code import PolarCode, recover_message, syndrome_ok
from .constituent import ConstituentTree, Kind, classify, rep_update, spc_update
from .graph import (
    DEFAULT_ALPHA,
    SAT,
    MessageState,
    Stage,
    init_messages,
    make_kernel,
)


class Schedule(str, enum.Enum):
    CONVENTIONAL = "conventional"
    ROUND_TRIP = "roundtrip"


class Variant(str, enum.Enum):
    CONVENTIONAL = "conventional"
    ROUND_TRIP = "roundtrip"
    XJBP = "xjbp"


@dataclass(frozen=True)
class DecodeOptions:
    max_iters: int = 60
    kernel: str = "ms"
    alpha: float = DEFAULT_ALPHA
    schedule: Schedule = Schedule.ROUND_TRIP
    pruning: bool = False
    early_termination: bool = True
    # charge one extra unit per scaled message when kernel == "sms"
    count_scaling: bool = False

    def __post_init__(self):
        object.__setattr__(self, "schedule", Schedule(self.schedule))
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.kernel not in ("ms", "sms"):
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.pruning and self.schedule is not Schedule.ROUND_TRIP:
            raise ValueError("pruning requires the round-trip schedule")

    @property
    def variant(self) -> Variant:
        if self.pruning:
            return Variant.XJBP
        return Variant(self.schedule.value)


PRESETS: dict[str, DecodeOptions] = {
    "conventional": DecodeOptions(schedule=Schedule.CONVENTIONAL),
    "roundtrip": DecodeOptions(schedule=Schedule.ROUND_TRIP),
    "xjbp": DecodeOptions(schedule=Schedule.ROUND_TRIP, pruning=True),
    "sms": DecodeOptions(schedule=Schedule.CONVENTIONAL, kernel="sms"),
}


@dataclass
class DecodeResult:
    codeword: np.ndarray
    info_bits: np.ndarray
    iterations: int
    converged: bool
    op_units: int


@dataclass
class BatchResult:
    codewords: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    op_units: np.ndarray


def hard_decision(llrs) -> np.ndarray:
    """Bit 0 where the LLR is strictly positive, otherwise 1."""
    return (np.asarray(llrs) <= 0).astype(np.uint8)


def constituent_units(size: int) -> int:
    # two-input additions / comparisons for one REP or SPC root of this size
    return 2 * size - 1


def _active_tops(code: PolarCode, tree: ConstituentTree) -> list[np.ndarray]:
    cover = tree.cover_sizes(code.n)
    rows = np.arange(code.n)
    tops = []
    for s in range(code.m):
        o = 1 << s
        tops.append(rows[((rows & o) == 0) & (cover <= o)])
    return tops


def count_units_per_iteration(
    code: PolarCode,
    variant: Variant | str,
    kernel: str = "ms",
    count_scaling: bool = False,
) -> int:
    """Operation units spent by one decoding iteration.

    One unit per directed message computed by a processing element, so an
    unpruned iteration costs ``2 n m``. The pruned variant adds ``2l - 1``
    per REP / SPC root of size ``l`` and nothing for N0 / N1 roots. With
    ``count_scaling`` an SMS kernel is charged one more unit per PE message.
    """
    variant = Variant(variant)
    if variant is Variant.XJBP:
        tree = classify(code)
        pe_messages = 4 * sum(t.size for t in _active_tops(code, tree))
        roots = sum(
            constituent_units(nd.size) for nd in tree.nodes if nd.kind in (Kind.REP, Kind.SPC)
        )
    else:
        pe_messages = 2 * code.n * code.m
        roots = 0
    scaling = pe_messages if (kernel == "sms" and count_scaling) else 0
    return pe_messages + roots + scaling


class BPDecoder:
    """Batched BP decoder for one code and one set of options.

    Holds only immutable plan data, so an instance may be shared between
    threads; every call allocates its own message arrays.
    """

    def __init__(self, code: PolarCode, options: DecodeOptions = DecodeOptions()):
        self.code = code
        self.options = options
        self.kernel = make_kernel(options.kernel, options.alpha)
        n, m = code.n, code.m
        self.rep_groups: list[tuple[int, np.ndarray]] = []
        self.spc_groups: list[tuple[int, np.ndarray]] = []
        self.pins: list[tuple[int, int, int]] = []
        if options.pruning:
            self.tree = classify(code)
            self.stages = []
            for s, tops in enumerate(_active_tops(code, self.tree)):
                if tops.size == n // 2:
                    self.stages.append(Stage(n, s))
                elif tops.size:
                    self.stages.append(Stage(n, s, tops))
            for kind, groups in ((Kind.REP, self.rep_groups), (Kind.SPC, self.spc_groups)):
                by_size: dict[int, list[int]] = {}
                for nd in self.tree.of_kind(kind):
                    by_size.setdefault(nd.size, []).append(nd.start)
                for size, starts in sorted(by_size.items()):
                    idx = np.asarray(starts)[:, None] + np.arange(size)
                    groups.append((size.bit_length() - 1, idx))
            self.pins = [(nd.stage, nd.start, nd.stop) for nd in self.tree.of_kind(Kind.N0)]
        else:
            self.tree = None
            self.stages = [Stage(n, s) for s in range(m)]
        self.units_per_iteration = count_units_per_iteration(
            code, options.variant, options.kernel, options.count_scaling
        )

    def init_arrays(self, llrs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Message arrays of shape ``(m + 1, batch, n)`` for a batch of frames."""
        code = self.code
        batch = llrs.shape[0]
        L = np.zeros((code.m + 1, batch, code.n))
        R = np.zeros((code.m + 1, batch, code.n))
        L[code.m] = np.clip(llrs, -SAT, SAT)
        R[0][:, code.frozen_mask] = SAT
        for col, start, stop in self.pins:
            R[col][:, start:stop] = SAT
        return L, R

    def init_state(self, channel_llrs) -> MessageState:
        state = init_messages(self.code, channel_llrs)
        for col, start, stop in self.pins:
            state.R[col, start:stop] = SAT
        state.pruned = self.options.pruning
        return state

    def iterate(self, L: np.ndarray, R: np.ndarray) -> None:
        g = self.kernel
        if self.options.schedule is Schedule.CONVENTIONAL:
            for st in self.stages:
                st.both(L, R, g)
            return
        for st in reversed(self.stages):
            st.left(L, R, g)
        for col, idx in self.rep_groups:
            R[col][:, idx] = rep_update(L[col][:, idx])
        for col, idx in self.spc_groups:
            R[col][:, idx] = spc_update(L[col][:, idx])
        for st in self.stages:
            st.right(L, R, g)

    def step(self, state: MessageState) -> None:
        """Run one iteration in place on a single-frame state."""
        self.iterate(state.L[:, None, :], state.R[:, None, :])

    def decode_batch(self, llrs) -> BatchResult:
        llrs = np.atleast_2d(np.asarray(llrs, dtype=np.float64))
        code, opts = self.code, self.options
        if llrs.shape[1] != code.n:
            raise ValueError(f"expected frames of length {code.n}, got {llrs.shape[1]}")
        if not np.isfinite(llrs).all():
            raise ValueError("channel LLRs must be finite")
        batch = llrs.shape[0]
        codewords = np.zeros((batch, code.n), dtype=np.uint8)
        iterations = np.zeros(batch, dtype=np.int64)
        converged = np.zeros(batch, dtype=bool)
        L, R = self.init_arrays(llrs)
        live = np.arange(batch)
        m = code.m
        for it in range(1, opts.max_iters + 1):
            self.iterate(L, R)
            xhat = hard_decision(L[m] + R[m])
            if opts.early_termination:
                ok = syndrome_ok(code, xhat)
            else:
                ok = np.zeros(live.size, dtype=bool)
            done = ok.copy() if it < opts.max_iters else np.ones(live.size, dtype=bool)
            if done.any():
                rows = live[done]
                codewords[rows] = xhat[done]
                iterations[rows] = it
                converged[rows] = ok[done]
                keep = ~done
                if not keep.any():
                    break
                L, R, live = L[:, keep], R[:, keep], live[keep]
        return BatchResult(codewords, iterations, converged, iterations * self.units_per_iteration)

    def decode(self, channel_llrs) -> DecodeResult:
        llr = np.asarray(channel_llrs, dtype=np.float64)
        if llr.shape != (self.code.n,):
            raise ValueError(f"expected {self.code.n} channel LLRs, got shape {llr.shape}")
        res = self.decode_batch(llr[None, :])
        cw = res.codewords[0]
        return DecodeResult(
            codeword=cw,
            info_bits=recover_message(self.code, cw),
            iterations=int(res.iterations[0]),
            converged=bool(res.converged[0]),
            op_units=int(res.op_units[0]),
        )


@lru_cache(maxsize=32)
def get_decoder(code: PolarCode, options: DecodeOptions) -> BPDecoder:
    return BPDecoder(code, options)


def decode(code: PolarCode, channel_llrs, options: DecodeOptions = DecodeOptions()) -> DecodeResult:
    return get_decoder(code, options).decode(channel_llrs)


def decode_conventional(code: PolarCode, channel_llrs, options: DecodeOptions | None = None) -> DecodeResult:
    options = options or PRESETS["conventional"]
    if options.schedule is not Schedule.CONVENTIONAL or options.pruning:
        raise ValueError("decode_conventional needs the conventional schedule without pruning")
    return decode(code, channel_llrs, options)


def decode_roundtrip(code: PolarCode, channel_llrs, options: DecodeOptions | None = None) -> DecodeResult:
    options = options or PRESETS["roundtrip"]
    if options.schedule is not Schedule.ROUND_TRIP or options.pruning:
        raise ValueError("decode_roundtrip needs the round-trip schedule without pruning")
    return decode(code, channel_llrs, options)


def decode_xjbp(code: PolarCode, channel_llrs, options: DecodeOptions | None = None) -> DecodeResult:
    options = options or PRESETS["xjbp"]
    if not options.pruning:
        raise ValueError("decode_xjbp needs pruning enabled")
    return decode(code, channel_llrs, options)
