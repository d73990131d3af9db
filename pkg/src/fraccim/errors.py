"""Exception hierarchy shared by all fraccim modules."""


class CimError(Exception):
    """Base class for every error raised by fraccim."""

    exit_code = 1


class NonPositiveStrip(CimError):
    """The analyticity strip around the contour has non-positive width."""


class DomainError(CimError, ValueError):
    """A scalar formula was evaluated outside its domain."""


class SingularPoint(CimError, ValueError):
    """The Laplace symbol was evaluated at its branch point z = 0."""


class ResolventSingular(CimError):
    """The scalar resolvent denominator m(z) + 1 vanished."""


class BadMeshSize(CimError, ValueError):
    """Mesh size is not the reciprocal of a positive integer."""


class SolveFailure(CimError):
    """A shifted linear solve failed or produced non-finite values."""

    exit_code = 3

    def __init__(self, message, k=None, z=None):
        if k is not None:
            message = f"{message} (node k={k}, z={z!r})"
        super().__init__(message)
        self.k = k
        self.z = z


class OutOfWindow(CimError, ValueError):
    """Evaluation time lies outside the calibrated window [t0, lambda*t0]."""


class MissingReference(CimError):
    """No ground truth is available for an error computation."""


class CacheCorrupt(CimError):
    """A reference cache file is malformed or has the wrong content hash."""

    exit_code = 4


class UsageError(CimError):
    """Bad command-line or configuration input."""

    exit_code = 2
