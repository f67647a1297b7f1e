"""Exception hierarchy shared by every module."""


class BLFormError(ValueError):
    """Base class for all input and precondition failures."""


class MalformedInputError(BLFormError):
    """Input violates a structural invariant (bad family, bad exponent, ...)."""


class DimensionMismatchError(BLFormError):
    pass


class PreconditionError(BLFormError):
    """An operation was called outside its documented domain."""


class SchemaError(BLFormError):
    """JSON document does not match the expected schema.

    ``path`` is a JSON pointer to the offending value.
    """

    def __init__(self, path, message):
        self.path = path or "/"
        super().__init__(f"{self.path}: {message}")


class DivergentIntegralError(BLFormError):
    pass


class UnboundedSupportError(BLFormError):
    pass
