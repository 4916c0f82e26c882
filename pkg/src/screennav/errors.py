"""Exception types shared across the engine."""


class ScreenNavError(Exception):
    """Base class for every error raised by this package."""


class EmptySpecError(ScreenNavError):
    """Branching spec has no levels."""


class NonTerminatedSpecError(ScreenNavError):
    """Branching spec does not end in a zero level."""


class UnreachableError(ScreenNavError):
    """No directed path between the requested nodes."""


class LengthMismatchError(ScreenNavError):
    """Subtree role assignment does not match the root's child count."""


class UnknownNodeError(ScreenNavError):
    """Node id not present in the environment."""


class LayoutOverflowError(ScreenNavError):
    """Could not place all icons on the canvas without overlap."""


class BundleIOError(ScreenNavError):
    """Bundle directory could not be read or written."""


class SchemaVersionError(ScreenNavError):
    """Persisted metadata carries an unsupported schema version."""


class ActionTextError(ScreenNavError):
    """Raised while parsing agent output; carries the offending text.

    Episodes absorb these as no-op steps rather than crashing, so the
    raw text is kept for the trace.
    """

    def __init__(self, message: str, text: str):
        super().__init__(message)
        self.text = text


class FormatError(ActionTextError):
    """Agent output does not match the action grammar."""


class CoordRangeError(ActionTextError):
    """Click coordinates fall outside the canvas coordinate system."""


class EpisodeFinishedError(ScreenNavError):
    """step() called on an episode that already terminated."""


class MissingTargetIconError(ScreenNavError):
    """Click reference step lacks a target bounding box."""


class DatasetFormatError(ScreenNavError):
    """Dataset file is corrupt; message names the offending line."""


class VariantError(ScreenNavError):
    """Variant transform applied to an ineligible bundle."""


class DivergenceError(ScreenNavError):
    """Value table blew up; hyperparameters are unusable."""
