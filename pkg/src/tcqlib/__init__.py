"""Trellis-coded quantization built on maximum-Hamming-distance rate-1/2 codes."""

from .convcode import ConvCode, Trellis, build_trellis, code_table, free_distance, parse_code
from .labeling import (
    Z2Z2,
    Z4,
    Labeling,
    Partition,
    distance_preserving_labeling_z2z2,
    distance_preserving_labeling_z4,
    get_labeling,
    is_distance_preserving,
    ungerboeck_labeling_z2z2,
    ungerboeck_labeling_z4,
)
from .codebook import (
    FiniteAlphabet,
    LatticeCodebook,
    init_alphabet,
    nearest_in_coset_lattice,
    nearest_in_subset_finite,
    optimize_alphabet,
)
from .tcq import TCQ, EncodeResult, decode, encode, encode_batch

__version__ = "0.1.0"
