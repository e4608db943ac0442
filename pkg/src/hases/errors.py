"""Exception types shared across the package."""


class HasesError(Exception):
    """Base class for package-specific failures."""


class EpochExhausted(HasesError):
    """The signer has used all of its configured signing epochs."""


class EpochDesync(HasesError):
    """The two component signers of a hybrid state disagree on the epoch."""


class UnknownSigner(HasesError):
    """The requested identity is not registered with the key store."""


class EpochOutOfRange(HasesError):
    """Requested epoch lies outside [1, J]."""


class MalformedFrame(HasesError):
    """A wire frame or request body could not be parsed."""


class CcoRequestError(HasesError):
    """The commitment service answered with a non-OK status byte."""

    def __init__(self, status: int, message: str = ""):
        super().__init__(message or f"service returned status {status:#04x}")
        self.status = status
