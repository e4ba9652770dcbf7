"""Exceptions, warnings and input-validation helpers shared by all modules."""

import numbers

import numpy as np


class SchottkyError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(SchottkyError, ValueError):
    pass


class SurfaceError(SchottkyError, ValueError):
    """Schottky parameters outside the disjoint-circle domain.

    Attributes
    ----------
    violations : list of tuple
        ``(a, b, separation, radius_sum)`` for every offending circle pair.
    """

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class PoleError(SchottkyError, ValueError):
    pass


class DomainError(SchottkyError, ValueError):
    """Input outside the mathematical domain of an operation."""


class FactorizationError(SchottkyError, ArithmeticError):
    pass


class ConvergenceError(SchottkyError, ArithmeticError):
    """Truncation escalation failed to settle.

    Attributes
    ----------
    last_values : tuple
        The last two values produced during escalation.
    """

    def __init__(self, message, last_values=()):
        super().__init__(message)
        self.last_values = tuple(last_values)


class BranchWarning(UserWarning):
    """A multivalued function was evaluated close to (or across) its cut."""


class DomainWarning(UserWarning):
    """A point lies inside a sewing circle, outside the fundamental domain."""


class DivergenceWarning(UserWarning):
    """A series is being evaluated outside its region of convergence."""


def as_complex(value):
    """Coerce a scalar, ``[re, im]`` pair or complex-like to ``complex``."""
    if isinstance(value, numbers.Complex):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        re, im = value
        return complex(float(re), float(im))
    arr = np.asarray(value)
    if arr.shape == ():
        return complex(arr)
    raise TypeError(f"cannot interpret {value!r} as a complex number")


def as_complex_vector(values):
    """Coerce a sequence of complex-likes (or ``[re, im]`` pairs) to a 1-d array."""
    if isinstance(values, np.ndarray) and values.ndim == 1:
        return values.astype(complex)
    return np.array([as_complex(v) for v in values], dtype=complex)


def check_matrix(M, square=False, name="matrix"):
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise DimensionError(f"{name} must be 2-d, got shape {M.shape}")
    if square and M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def check_vector(v, length, name="vector"):
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.shape[0] != length:
        raise DimensionError(f"{name} has length {v.shape[0]}, expected {length}")
    return v


def check_positive(value, name):
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value!r}")
    return value
