"""Exception taxonomy for volmark.

Every domain error raised by the package derives from VolmarkError so the
CLI can map the whole family onto one exit code.
"""


class VolmarkError(Exception):
    """Base class for all volmark errors."""


# --- volume containers and ingestion ---

class UnknownFormat(VolmarkError):
    """File is not a recognized or supported volume format."""


class CorruptHeader(VolmarkError):
    """Header fields are inconsistent with each other or with the payload."""


class ValueOutOfRange(VolmarkError):
    """A voxel value exceeds the declared bit depth."""


class MissingComponentIndex(VolmarkError):
    """A 4D source needs an explicit component index."""


class MissingOriginalDims(VolmarkError):
    """crop_to_original called on a volume that records no original dims."""


class IoFailure(VolmarkError):
    """Underlying filesystem write failed."""


# --- integer wavelet transform ---

class OddDimension(VolmarkError):
    """Forward transform requires even extents on every axis."""


class InconsistentBands(VolmarkError):
    """The eight sub-band arrays do not share a common shape."""


class OutOfBounds(VolmarkError):
    """Coefficient block coordinates fall outside the band grid."""


# --- keystream ---

class EmptyKey(VolmarkError):
    """Key material must be non-empty."""


class Diverged(VolmarkError):
    """Chaotic iteration left the attractor basin (|x| > 2)."""


class InsufficientValues(VolmarkError):
    """Not enough chaotic values supplied to emit the requested bits."""


# --- bit vectors and side-information files ---

class LengthMismatch(VolmarkError):
    """Bit vectors (or a file's declared length) disagree on length."""


class CorruptFile(VolmarkError):
    """File structure or checksum is invalid."""


class MapVersionUnsupported(VolmarkError):
    """Location map file carries an unsupported format version."""


# --- embedding / extraction ---

class InsufficientCapacity(VolmarkError):
    """Fewer overflow-free cubes than payload bits."""


class DimsNotAligned(VolmarkError):
    """Embedding requires every dimension to be a multiple of 4."""


class DimsMismatch(VolmarkError):
    """Volume dimensions disagree with the side information."""


# --- features and verification ---

class NTooLarge(VolmarkError):
    """Requested feature length exceeds the extractor's coefficient budget."""


class EmptyVector(VolmarkError):
    """Metric undefined on zero-length vectors."""


class DegenerateReference(VolmarkError):
    """Normalized correlation undefined for an all-zero reference."""


class OutOfRange(VolmarkError):
    """Test statistic arguments outside the supported domain."""


# --- attack simulation ---

class BadParameter(VolmarkError):
    """Attack parameter outside its documented range."""


class EmptyRoi(VolmarkError):
    """Random cropping needs at least one non-zero voxel."""
