"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class BVFormsError(Exception):
    """Base class; the CLI maps it to exit status 1."""

    exit_code = 1


class FormError(BVFormsError, ValueError):
    """Invalid quadratic form, discriminant or unimodular matrix."""


class FieldError(BVFormsError, ValueError):
    """Input outside the scope of the imaginary quadratic field arithmetic."""


class ConfigError(BVFormsError, ValueError):
    exit_code = 2


class CostGuardError(BVFormsError, RuntimeError):
    """A computation would exceed its configured work budget."""

    exit_code = 3


class AdmissibilityError(BVFormsError, ValueError):
    def __init__(self, message, prime=None):
        super().__init__(message)
        self.prime = prime


class ConvergenceError(BVFormsError, RuntimeError):
    pass
