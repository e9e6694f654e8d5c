"""Exception types shared across the package.

Everything raised on purpose derives from LabelForgeError so callers can
catch pipeline failures without swallowing programming errors.
"""


class LabelForgeError(Exception):
    """Base class for all labelforge errors."""


class DimensionMismatch(LabelForgeError):
    """Two rasters (or a mask and its declared size) disagree on shape."""


class RunSumMismatch(DimensionMismatch):
    """Run lengths do not sum to width * height.

    Subclasses DimensionMismatch: a bad run sum is a shape disagreement
    between the encoded payload and the declared raster size.
    """


class NonCanonical(LabelForgeError):
    """Run-length encoding violates canonical form (zero run after position 0)."""


class ParseError(LabelForgeError):
    """Malformed document, config, or text payload."""


class DuplicateId(LabelForgeError):
    """An identifier that must be unique appears more than once."""


class ImageIdMismatch(LabelForgeError):
    """Two documents that must describe the same image do not."""


class MissingClassification(LabelForgeError):
    """A proposal has no matching classification result."""


class EmptyInput(LabelForgeError):
    """An aggregate was requested over zero items."""


class NoProposals(LabelForgeError):
    """An image has no usable proposals."""


class MissingArtifact(LabelForgeError):
    """A file the manifest or pipeline requires does not exist."""


class MissingPair(LabelForgeError):
    """Evaluation found a prediction without ground truth, or vice versa."""


class InsufficientIds(LabelForgeError):
    """Fewer ids than the requested split sizes."""


class InsufficientCandidates(LabelForgeError):
    """Candidate list too small for the requested pool size."""


class UnknownId(LabelForgeError):
    """Manifest entry id not present."""


class UnknownKind(LabelForgeError):
    """Artifact kind is not one of the supported kinds."""


class SchemaVersionMismatch(LabelForgeError):
    """Manifest schema_version is not the supported version."""


class DegenerateRoad(LabelForgeError):
    """Scene road polygon rasterizes to zero area or lies outside the image."""
