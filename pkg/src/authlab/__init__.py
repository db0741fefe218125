"""ECC-based SIP mutual authentication and the offline guessing attack on it."""

from .ecc import P256, TOY17, CurveParams, resolve_curve
from .errors import AuthLabError

__version__ = "0.1.0"

__all__ = ["AuthLabError", "CurveParams", "P256", "TOY17", "resolve_curve"]
