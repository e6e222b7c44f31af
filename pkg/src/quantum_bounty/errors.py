"""Exception hierarchy shared by every protocol component.

``InputError`` covers malformed arguments (CLI exit code 2) and
``ProtocolRejection`` covers well-formed calls the protocol refuses
(exit code 3).
"""


class BountyError(Exception):
    """Base class for all errors raised by this package."""


class InputError(BountyError, ValueError):
    pass


class ProtocolRejection(BountyError):
    pass


# numeric core
class ZeroModulus(InputError):
    pass


class BothZero(InputError):
    pass


class InvalidInput(InputError):
    pass


# lock generation
class OutOfRange(InputError):
    pass


class AlreadyComplete(ProtocolRejection):
    pass


class Incomplete(ProtocolRejection):
    pass


class ExhaustedEntropy(ProtocolRejection):
    pass


# bounty contract
class ZeroAmount(InputError):
    pass


class UnknownLock(InputError):
    pass


class AlreadySolved(ProtocolRejection):
    pass


class GenerationIncomplete(ProtocolRejection):
    pass


class LockAlreadySolved(ProtocolRejection):
    pass


class NoCommitment(ProtocolRejection):
    pass


class RevealTooEarly(ProtocolRejection):
    pass


class DigestMismatch(ProtocolRejection):
    pass


class VerificationFailed(ProtocolRejection):
    def __init__(self, reason: str, detail: str | None = None):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)


# fallback account
class KeyReuse(ProtocolRejection):
    pass


class WrongCredentialKind(ProtocolRejection):
    pass


# state files
class StateExists(InputError):
    pass


class StateCorrupt(BountyError):
    pass
