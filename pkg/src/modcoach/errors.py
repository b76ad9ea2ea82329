"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition or invariant."""


class AudioFormatError(ValueError):
    """Audio bytes are not RIFF/PCM16/mono as required."""


class DuplicateTalkError(ValueError):
    """A talk with this id is already in the corpus."""


class SessionStateError(RuntimeError):
    """Operation not valid for the practice session's current state."""
