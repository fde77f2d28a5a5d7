"""Memory-accelerated signal processing: tabled Viterbi decoding, tabled
oscillators, and the table-aggregation planner with its analytics."""

from memaccel.trellis import CodeSpec, DVBT_CODE, encode, transition
from memaccel.viterbi_ref import DecoderConfig, DecoderState, decode
from memaccel.viterbi_ma import MaDecoder, decode_ma

__version__ = "0.1.0"

__all__ = [
    "CodeSpec",
    "DVBT_CODE",
    "DecoderConfig",
    "DecoderState",
    "MaDecoder",
    "decode",
    "decode_ma",
    "encode",
    "transition",
]
