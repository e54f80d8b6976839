"""Exception types shared across the package."""


class EsmilesError(ValueError):
    """Base class for all toolkit errors."""


class EmptyInputError(EsmilesError):
    """Raised when an empty string is handed to a parser."""


class SmilesSyntaxError(EsmilesError):
    """Malformed SMILES or extension markup.

    Carries the character offset of the problem when known.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)
        self.offset = offset


class ValenceError(EsmilesError):
    """An atom exceeds its allowed valence (strict parse mode only)."""


class AnnotationIndexError(EsmilesError):
    """An extension annotation points at a nonexistent atom or ring."""


class UnknownCharacterError(EsmilesError):
    """Tokenizer met a character outside the vocabulary."""

    def __init__(self, char, offset):
        super().__init__(f"unknown character {char!r} at offset {offset}")
        self.char = char
        self.offset = offset


class ParamMismatchError(EsmilesError):
    """Fingerprints built with different parameters cannot be compared."""


class TooFewPredictionsError(EsmilesError):
    """Confidence scoring needs at least two candidate predictions."""


class ImageTooSmallError(EsmilesError):
    """Image is below the minimum size for perceptual hashing."""


class IllegalTransitionError(EsmilesError):
    """Annotation task received an event its current state forbids."""


class SelfReviewError(EsmilesError):
    """A user tried to review their own annotation version."""


class DuplicateReviewerError(EsmilesError):
    """The same user tried to review one annotation version twice."""


class DuplicateGoldIdError(EsmilesError):
    """Gold dataset contains a repeated record id."""


class NoSubstitutableSiteError(EsmilesError):
    """Molecule offers no position where a variable group could be placed."""
