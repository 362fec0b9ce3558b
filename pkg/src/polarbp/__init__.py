"""Belief-propagation decoding of polar codes with constituent-code pruning."""

from .code import (
    PolarCode,
    check_codeword,
    construct_frozen_set,
    embed,
    encode,
    parity_check_matrix,
    recover_message,
)
from .constituent import Kind, classify, rep_update, spc_update
from .decoder import (
    PRESETS,
    BPDecoder,
    DecodeOptions,
    DecodeResult,
    Schedule,
    Variant,
    count_units_per_iteration,
    decode,
    decode_conventional,
    decode_roundtrip,
    decode_xjbp,
    hard_decision,
)
from .graph import SAT, g_minsum, g_scaled
from .sim import ChannelParams, StatsReport, run_campaign, transmit

__version__ = "0.1.0"
