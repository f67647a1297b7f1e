"""Exact condition checkers, index reduction certificates and numerical
experiments for Brascamp-Lieb forms in power-weighted Lorentz spaces."""

from .errors import (
    BLFormError,
    DimensionMismatchError,
    DivergentIntegralError,
    MalformedInputError,
    PreconditionError,
    SchemaError,
    UnboundedSupportError,
)
from .indices import (
    Classification,
    ConditionVerdict,
    IndexPoint,
    VectorFamily,
    check_necessary,
    check_subspace_condition,
    check_sufficient,
    classify,
)
from .mlfi import MlfiIndexPoint, compare_condition_sets, evaluate_set
from .reduction import ReductionCertificate, reduce, verify_certificate

__version__ = "0.1.0"
