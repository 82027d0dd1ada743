EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED_CERTIFICATE = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4
EXIT_NUMERICAL = 5


class CertificationError(Exception):
    """
    Base class for every failure raised by the certification services.
    The CLI maps each subclass to its own exit code.
    """
    exit_code: int = EXIT_NUMERICAL


class QuadratureError(CertificationError):
    """Adaptive quadrature could not reach the requested tolerance."""


class NormCertificationError(CertificationError):
    """A sup-norm grid could not be refined down to the requested gap."""


class SignChangeIsolationError(CertificationError):
    """Too many sign changes were found while scanning a Fourier profile."""


class HypothesisViolationError(CertificationError):
    """A network does not satisfy the hypothesis of the oscillation lemma."""
    exit_code = EXIT_USAGE


class DomainError(CertificationError, ValueError):
    """A parameter lies outside the range where a bound is established."""
    exit_code = EXIT_INFEASIBLE


class SearchExhaustedError(CertificationError):
    """No truncation order up to the search cap satisfies the tail condition."""
    exit_code = EXIT_INFEASIBLE


class UsageError(CertificationError):
    exit_code = EXIT_USAGE


class ArtifactWriteError(CertificationError):
    exit_code = EXIT_IO
