"""Primes represented by binary quadratic forms: equidistribution and bounded gaps."""

from .forms import QuadForm, class_number, discriminant, evaluate, sl2_transform, validate_paper_conditions
from .idealarith import FieldContext, nu, nu_bruteforce, ray_class_size, split_type

__all__ = [
    "QuadForm",
    "FieldContext",
    "class_number",
    "discriminant",
    "evaluate",
    "nu",
    "nu_bruteforce",
    "ray_class_size",
    "sl2_transform",
    "split_type",
    "validate_paper_conditions",
]

__version__ = "0.1.0"
