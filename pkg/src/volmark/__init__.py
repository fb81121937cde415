"""Reversible-zero watermarking for 3D volume data.

Pipeline: an integer 3D wavelet transform exposes the low-frequency band,
cubic difference expansion reversibly embeds a keyed ownership share into
its 2x2x2 cubes, and verification combines an exact integrity check with a
right-tailed binomial ownership test. Attack simulation and a CLI wrap the
pieces into a benchmark harness.
"""

from .bits import BitVector, read_bits, write_bits
from .cde import (
    EmbedResult,
    LocationMap,
    embed,
    embed_cube,
    extract,
    extract_cube,
    read_location_map,
    write_location_map,
)
from .errors import VolmarkError
from .features import (
    FeatureVector,
    OwnershipShare,
    extract_features_baseline,
    load_external_features,
    make_ownership_share,
    recover_watermark,
)
from .keystream import (
    HenonState,
    binarize_chaotic,
    derive_initial_state,
    henon_sequence,
    keystream,
)
from .lifting import SubBands, forward_iwt3, inverse_iwt3, local_inverse_block
from .verify import VerificationReport, ber, binomial_p, nc, psnr, verify
from .volume import Volume, crop_to_original, pad_to_multiple, read_volume, write_volume

__version__ = "0.1.0"

__all__ = [
    "BitVector",
    "EmbedResult",
    "FeatureVector",
    "HenonState",
    "LocationMap",
    "OwnershipShare",
    "SubBands",
    "VerificationReport",
    "Volume",
    "VolmarkError",
    "ber",
    "binarize_chaotic",
    "binomial_p",
    "crop_to_original",
    "derive_initial_state",
    "embed",
    "embed_cube",
    "extract",
    "extract_cube",
    "extract_features_baseline",
    "forward_iwt3",
    "henon_sequence",
    "inverse_iwt3",
    "keystream",
    "load_external_features",
    "local_inverse_block",
    "make_ownership_share",
    "nc",
    "pad_to_multiple",
    "psnr",
    "read_bits",
    "read_location_map",
    "read_volume",
    "recover_watermark",
    "verify",
    "write_bits",
    "write_location_map",
    "write_volume",
]
