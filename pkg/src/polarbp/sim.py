"""
BPSK / AWGN channel and Monte Carlo campaigns.

Every frame draws its message and noise from its own generator, seeded from
``(base_seed, variant, ebno, frame)``. Aggregates therefore do not depend on
batch size or thread count.
"""

from __future__ import annotations

import json
import logging
import struct
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import binomtest

from .code import PolarCode, embed, encode, mask_to_str, recover_message
from .decoder import PRESETS, DecodeOptions, get_decoder

log = logging.getLogger(__name__)

CSV_FIELDS = (
    "variant",
    "ebno_db",
    "frames",
    "bit_errors",
    "frame_errors",
    "ber",
    "fer",
    "mean_iters",
    "mean_op_units",
)


@dataclass(frozen=True)
class ChannelParams:
    ebno_db: float
    rate: float

    @property
    def sigma2(self) -> float:
        """Noise variance for unit-energy BPSK at this Eb/N0 and code rate."""
        return 1.0 / (2.0 * self.rate * 10.0 ** (self.ebno_db / 10.0))


def frame_rng(base_seed: int, variant: str, ebno_db: float, frame: int) -> np.random.Generator:
    if base_seed < 0 or frame < 0:
        raise ValueError("seeds and frame indices must be non-negative")
    (ebno_bits,) = struct.unpack("<Q", struct.pack("<d", float(ebno_db)))
    entropy = [base_seed, zlib.crc32(variant.encode()), ebno_bits, frame]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def transmit(x, params: ChannelParams, rng_seed: int | np.random.Generator) -> np.ndarray:
    """BPSK-modulate ``x``, add Gaussian noise and return channel LLRs ``2y / sigma2``."""
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    s = 1.0 - 2.0 * np.asarray(x, dtype=np.float64)
    sigma2 = params.sigma2
    y = s + np.sqrt(sigma2) * rng.standard_normal(s.shape)
    return 2.0 * y / sigma2


@dataclass
class StatsRow:
    variant: str
    ebno_db: float
    frames: int
    bit_errors: int
    frame_errors: int
    ber: float
    fer: float
    mean_iters: float
    mean_op_units: float
    wall_seconds: float = 0.0

    def fer_interval(self, confidence: float = 0.95) -> tuple[float, float]:
        """Exact (Clopper-Pearson) confidence interval on the frame error rate."""
        ci = binomtest(self.frame_errors, self.frames).proportion_ci(confidence, method="exact")
        return ci.low, ci.high

    def csv_values(self) -> list[str]:
        return [_fmt(getattr(self, f)) for f in CSV_FIELDS]


@dataclass
class StatsReport:
    rows: list[StatsRow]
    config: dict = field(default_factory=dict)

    def row(self, variant: str, ebno_db: float) -> StatsRow:
        for r in self.rows:
            if r.variant == variant and r.ebno_db == ebno_db:
                return r
        raise KeyError((variant, ebno_db))

    def to_csv(self) -> str:
        lines = [",".join(CSV_FIELDS)]
        lines += [",".join(r.csv_values()) for r in self.rows]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        rows = [{f: getattr(r, f) for f in CSV_FIELDS} for r in self.rows]
        return json.dumps({"config": self.config, "rows": rows}, indent=2) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass
class _Chunk:
    bit_errors: np.ndarray
    frame_errors: np.ndarray
    iterations: np.ndarray
    op_units: np.ndarray


def simulate_frames(
    code: PolarCode,
    variant: str,
    options: DecodeOptions,
    ebno_db: float,
    frames: range,
    base_seed: int = 0,
) -> _Chunk:
    """Simulate a contiguous block of frames and return per-frame outcomes."""
    params = ChannelParams(ebno_db, code.rate)
    info = np.empty((len(frames), code.k), dtype=np.uint8)
    noise = np.empty((len(frames), code.n))
    for row, f in enumerate(frames):
        rng = frame_rng(base_seed, variant, ebno_db, f)
        info[row] = rng.integers(0, 2, code.k, dtype=np.uint8)
        noise[row] = rng.standard_normal(code.n)
    x = encode(code, embed(code, info))
    sigma2 = params.sigma2
    llrs = 2.0 * ((1.0 - 2.0 * x) + np.sqrt(sigma2) * noise) / sigma2
    res = get_decoder(code, options).decode_batch(llrs)
    info_hat = recover_message(code, res.codewords)
    return _Chunk(
        bit_errors=(info_hat != info).sum(axis=1),
        frame_errors=(res.codewords != x).any(axis=1),
        iterations=res.iterations,
        op_units=res.op_units,
    )


def run_point(
    code: PolarCode,
    variant: str,
    options: DecodeOptions,
    ebno_db: float,
    max_frames: int = 10_000,
    min_frame_errors: int | None = 100,
    base_seed: int = 0,
    threads: int = 1,
    chunk_size: int = 250,
) -> StatsRow:
    """Run one (variant, Eb/N0) point until either stopping rule triggers.

    The stop is applied frame by frame in index order, so the outcome is the
    same for any ``threads`` or ``chunk_size``.
    """
    if max_frames < 1:
        raise ValueError("max_frames must be >= 1")
    t0 = time.perf_counter()
    frames = bit_errors = frame_errors = iters = units = 0
    starts = list(range(0, max_frames, chunk_size))
    wave = max(1, threads)
    done = False
    with ThreadPoolExecutor(max_workers=wave) as pool:
        for w in range(0, len(starts), wave):
            blocks = [range(s, min(s + chunk_size, max_frames)) for s in starts[w : w + wave]]
            results = pool.map(
                lambda b: simulate_frames(code, variant, options, ebno_db, b, base_seed), blocks
            )
            for chunk in results:
                take = chunk.frame_errors.size
                if min_frame_errors:
                    cum = frame_errors + np.cumsum(chunk.frame_errors)
                    hit = np.flatnonzero(cum >= min_frame_errors)
                    if hit.size:
                        take = int(hit[0]) + 1
                        done = True
                frames += take
                bit_errors += int(chunk.bit_errors[:take].sum())
                frame_errors += int(chunk.frame_errors[:take].sum())
                iters += int(chunk.iterations[:take].sum())
                units += int(chunk.op_units[:take].sum())
                if done:
                    break
            if done:
                break
    row = StatsRow(
        variant=variant,
        ebno_db=float(ebno_db),
        frames=frames,
        bit_errors=bit_errors,
        frame_errors=frame_errors,
        ber=bit_errors / (frames * code.k),
        fer=frame_errors / frames,
        mean_iters=iters / frames,
        mean_op_units=units / frames,
        wall_seconds=time.perf_counter() - t0,
    )
    log.info("%s @ %.2f dB: %d frames, fer=%.3g, iters=%.2f", variant, ebno_db, frames, row.fer, row.mean_iters)
    return row


def run_campaign(
    code: PolarCode,
    variants: Sequence[str | tuple[str, DecodeOptions]],
    ebno_list: Sequence[float],
    max_frames: int = 10_000,
    min_frame_errors: int | None = 100,
    base_seed: int = 0,
    threads: int = 1,
) -> StatsReport:
    """Simulate every (variant, Eb/N0) pair.

    ``variants`` holds preset names or ``(name, DecodeOptions)`` pairs. Rows
    follow the variant order given, with Eb/N0 ascending inside each variant.
    """
    if not variants or not ebno_list:
        raise ValueError("need at least one variant and one Eb/N0 point")
    named = [(v, PRESETS[v]) if isinstance(v, str) else v for v in variants]
    rows = [
        run_point(code, name, opts, e, max_frames, min_frame_errors, base_seed, threads)
        for name, opts in named
        for e in sorted(float(x) for x in ebno_list)
    ]
    config = {
        "n": code.n,
        "k": code.k,
        "design_erasure": code.design_erasure,
        "mask": mask_to_str(code),
        "variants": {name: _options_dict(opts) for name, opts in named},
        "ebno_db": sorted(float(x) for x in ebno_list),
        "max_frames": max_frames,
        "min_frame_errors": min_frame_errors,
        "seed": base_seed,
    }
    return StatsReport(rows, config)


def _options_dict(opts: DecodeOptions) -> dict:
    d = asdict(opts)
    d["schedule"] = opts.schedule.value
    return d
