import numpy as np

from utils.constants import DEGENERATE_VARIANCE
from utils.errors import DegenerateVariableError, DimensionError


class Dataset(object):
    """N x p matrix of observations with column names and centering state.

    The kernels carry no intercept, so discovery always works on a centered copy
    obtained from prepare(); the raw matrix stays untouched for serialization.

    :params:
        + values    - array-like (N, p) of finite reals
        + names     - column names, default x1..xp
        + centered  - True if every column has mean zero
        + scaled    - True if every column has unit mean square
    """
    def __init__(self, values, names=None, centered=False, scaled=False):
        values = np.array(values, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2:
            raise DimensionError(f"Dataset needs a 2-D matrix, got shape {values.shape}")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise DimensionError(f"Dataset needs at least one row and column, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("Dataset contains non-finite values")
        if names is None:
            names = [f"x{i + 1}" for i in range(values.shape[1])]
        names = [str(name) for name in names]
        if len(names) != values.shape[1]:
            raise DimensionError(f"{len(names)} names for {values.shape[1]} columns")
        values.setflags(write=False)
        self._values = values
        self._names = tuple(names)
        self._centered = centered
        self._scaled = scaled

    @property
    def values(self):
        return self._values

    @property
    def names(self):
        return self._names

    @property
    def n(self):
        return self._values.shape[0]

    @property
    def p(self):
        return self._values.shape[1]

    @property
    def centered(self):
        return self._centered

    @property
    def scaled(self):
        return self._scaled

    def column(self, k):
        return self._values[:, k]

    def columns(self, index):
        return self._values[:, list(index)]

    def prepare(self, scale=False):
        """Return a mean-centered copy, optionally scaled to unit mean square per column.
        Columns that are constant after centering raise DegenerateVariableError when scaling.
        """
        if self._centered and (self._scaled or not scale):
            return self
        centered = self._values - self._values.mean(axis=0)
        if scale:
            second_moment = np.mean(centered ** 2, axis=0)
            for k in np.flatnonzero(second_moment <= DEGENERATE_VARIANCE):
                raise DegenerateVariableError(int(k))
            centered = centered / np.sqrt(second_moment)
        return Dataset(centered, self._names, centered=True, scaled=scale)

    def check_column(self, k):
        """Raise DegenerateVariableError if column k has (numerically) zero variance"""
        col = self._values[:, k]
        if np.mean((col - col.mean()) ** 2) <= DEGENERATE_VARIANCE:
            raise DegenerateVariableError(k)

    def __repr__(self):
        return f"Dataset(n={self.n}, p={self.p}, centered={self._centered}, scaled={self._scaled})"
