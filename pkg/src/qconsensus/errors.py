"""Exception hierarchy shared by all modules."""


class QConsensusError(Exception):
    """Base class for package errors."""


class DomainError(QConsensusError, ValueError):
    """Input outside the mathematical domain of an operation."""


class EmptyInputError(DomainError):
    pass


class ParameterError(DomainError):
    """Topology parameters that do not give a connected simple graph."""


class ParseError(QConsensusError, ValueError):
    """Malformed serialized document."""


class UnsupportedError(QConsensusError):
    """Request outside the closed-form catalog or supported inputs."""


class UnsupportedClosedFormError(UnsupportedError):
    pass


class ResourceError(QConsensusError):
    """Problem size exceeds a desk-scale guard."""


class CertificateUnavailableError(QConsensusError):
    """No usable eigenspace to build an optimality certificate on."""
