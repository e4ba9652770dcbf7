"""Estimator-style facade: fit a surface once, then evaluate forms at many points."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_complex_vector, check_positive
from .forms import nu, period_matrix
from .io import surface_from_dict
from .moments import MomentSystem, auto_moment_system
from .schottky import SchottkySurface, validate_surface


def _coerce_surface(X):
    if isinstance(X, SchottkySurface):
        return X
    if isinstance(X, dict):
        return surface_from_dict(X)
    arr = np.asarray(X, dtype=complex)
    if arr.ndim == 2 and arr.shape[1] == 3:
        return validate_surface(list(arr[:, 0]), list(arr[:, 1]), list(arr[:, 2]))
    return validate_surface(list(as_complex_vector(arr.reshape(-1))))


class SchottkyForms(BaseEstimator, TransformerMixin):
    """Moment system and period matrix of a Schottky surface.

    Parameters
    ----------
    K : int or "auto", default="auto"
        Truncation; ``"auto"`` doubles from 8 until ``det(I - A)`` settles.
    tol : float, default=1e-12
        Relative settling tolerance for ``"auto"``.

    Attributes
    ----------
    surface_ : SchottkySurface
    system_ : MomentSystem
    K_used_ : int
    det_ : complex
    period_matrix_ : ndarray of shape (g, g)

    Examples
    --------
    >>> est = SchottkyForms().fit([[1, -1, 0.04]])
    >>> est.transform([0.5j, 2.0]).shape
    (2, 1)
    """

    def __init__(self, K="auto", tol=1e-12):
        self.K = K
        self.tol = tol

    def fit(self, X, y=None):
        """`X` is a surface, a surface dict, a ``(g, 3)`` array of ``(w_a, w_-a, rho_a)``
        rows, or a flat ``3g`` parameter list."""
        check_positive(self.tol, "tol")
        surface = _coerce_surface(X)
        if self.K == "auto":
            system = auto_moment_system(surface, 8, self.tol)
        else:
            system = MomentSystem(surface, int(self.K))
        self.surface_ = surface
        self.system_ = system
        self.K_used_ = system.K
        self.det_ = system.det
        self.period_matrix_ = period_matrix(system)
        return self

    def transform(self, X):
        """Values ``nu_b(x)`` for each point, shape ``(n_points, g)``."""
        check_is_fitted(self, "system_")
        x = as_complex_vector(np.atleast_1d(X))
        cols = [np.atleast_1d(nu(self.system_, b, x)) for b in range(1, self.surface_.genus + 1)]
        return np.column_stack(cols)
