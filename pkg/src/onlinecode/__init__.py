"""Online (causal) analog error-correcting codes with weighted-l1 decoding."""

from .codec import CodeParams, DecodeError, DecodeResult, EncoderState, decode, encode, encode_step
from .estimator import OnlineCode
from .matrix_ensemble import EnsembleParams, LotMatrix, code_matrix, sample_M, systematic_C, to_B
from .weighted_norms import NormParams, dagger_norm, star_norm, tf, weight_diagonals

__version__ = "0.1.0"

__all__ = [
    "CodeParams", "DecodeError", "DecodeResult", "EncoderState", "EnsembleParams",
    "LotMatrix", "NormParams", "OnlineCode", "code_matrix", "dagger_norm", "decode",
    "encode", "encode_step", "sample_M", "star_norm", "systematic_C", "tf", "to_B",
    "weight_diagonals",
]
