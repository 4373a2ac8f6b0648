"""Error taxonomy shared across the package.

Three families, matching the exit codes of the command line front end:
bad inputs or schema violations (2), failed certificates (3), exhausted
resource budgets (4).
"""


class PreconditionError(ValueError):
    """An argument violates a documented precondition or schema."""

    def __init__(self, message, field=None):
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field


class CertificateError(RuntimeError):
    """A certified inequality failed.  Carries both sides."""

    def __init__(self, name, lhs, rhs, message=None):
        self.name = name
        self.lhs = lhs
        self.rhs = rhs
        super().__init__(
            message or f"certificate '{name}' failed: lhs={lhs!r} rhs={rhs!r}"
        )


class ResourceError(RuntimeError):
    """A computation would exceed a configured budget."""

    def __init__(self, message, budget=None, required=None):
        self.budget = budget
        self.required = required
        super().__init__(message)
