"""
Gaussian and additive Gaussian kernels, 1/N-scaled Gram matrices with their
symmetric eigendecomposition, and closed-form kernel ridge regression.

Every Gram built here is G[a, b] = (1/N) * sum_{j in S} K_j(x_aj, x_bj), so a
single Gaussian kernel has trace 1 and an additive kernel over d columns has
trace d. The ridge base learner is S = G (G + lambda I)^-1 with lambda constant in N.
"""

import math
import threading
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.spatial.distance import cdist

from utils.constants import NEGATIVE_EIGEN_TOL
from utils.errors import DimensionError, EigenSolverError
from utils.parameter_validation import check_positive


@dataclass(frozen=True)
class KernelSpec:
    """Gaussian kernel exp(-(x - x')^2 / (2 * bandwidth)) on one predictor"""
    bandwidth: float = 1.0

    def __post_init__(self):
        check_positive(self.bandwidth, "bandwidth")


@dataclass(frozen=True, eq=False)
class EigenGram:
    gram: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    predictor_columns: tuple
    training_points: np.ndarray
    bandwidths: tuple

    @property
    def n(self):
        return self.gram.shape[0]

    def project(self, targets):
        """Coordinates of targets in the eigenbasis, U^T y"""
        return self.eigenvectors.T @ targets

    def apply_spectrum(self, factors, targets):
        """U diag(factors) U^T targets"""
        return self.eigenvectors @ (factors * self.project(targets))


@dataclass(frozen=True, eq=False)
class RidgeFit:
    coefficients: np.ndarray
    penalty: float
    fitted: np.ndarray
    predictor_columns: tuple
    training_points: np.ndarray = field(repr=False)
    bandwidths: tuple


def gaussian_kernel(x, x_prime, spec=KernelSpec()):
    return math.exp(-((x - x_prime) ** 2) / (2.0 * spec.bandwidth))


def gaussian_gram_block(a, b, bandwidth):
    """Kernel matrix K(a_i, b_j) between two 1-d samples"""
    sq = cdist(np.reshape(a, (-1, 1)), np.reshape(b, (-1, 1)), "sqeuclidean")
    return np.exp(-sq / (2.0 * bandwidth))


def resolve_specs(columns, specs=None):
    """Bandwidth per column from None (all 1.0), one KernelSpec, a dict keyed by column or a sequence aligned with columns"""
    if specs is None:
        return tuple(1.0 for _ in columns)
    if isinstance(specs, KernelSpec):
        return tuple(specs.bandwidth for _ in columns)
    if isinstance(specs, dict):
        return tuple(specs.get(c, KernelSpec()).bandwidth for c in columns)
    specs = list(specs)
    if len(specs) != len(columns):
        raise DimensionError(f"{len(specs)} kernel specs for {len(columns)} columns")
    return tuple(s.bandwidth for s in specs)


def eigen_decompose(gram, columns, training_points, bandwidths):
    """Symmetric eigendecomposition sorted non-increasing, small negative eigenvalues clamped at 0"""
    gram = 0.5 * (gram + gram.T)
    try:
        eigenvalues, eigenvectors = scipy.linalg.eigh(gram)
    except (scipy.linalg.LinAlgError, ValueError) as err:
        raise EigenSolverError(columns, err) from err
    eigenvalues = eigenvalues[::-1].copy()
    eigenvectors = np.ascontiguousarray(eigenvectors[:, ::-1])
    top = max(eigenvalues[0], 0.0)
    if eigenvalues[-1] < -NEGATIVE_EIGEN_TOL * top:
        raise EigenSolverError(columns, f"eigenvalue {eigenvalues[-1]:.3e} below tolerance")
    np.clip(eigenvalues, 0.0, None, out=eigenvalues)
    for arr in (gram, eigenvalues, eigenvectors):
        arr.setflags(write=False)
    return EigenGram(gram, eigenvalues, eigenvectors, tuple(columns), training_points, tuple(bandwidths))


def build_eigen_gram(data, columns, specs=None):
    """Additive Gaussian Gram over a column set, with its eigendecomposition
    :params:
        + data      - Dataset (use a centered one for discovery)
        + columns   - nonempty index set S
        + specs     - kernel specs, see resolve_specs
    Returns
        EigenGram with gram[a, b] = (1/N) sum_{j in S} K_j(x_aj, x_bj)
    """
    columns = tuple(int(c) for c in columns)
    if not columns:
        raise DimensionError("build_eigen_gram needs at least one predictor column")
    n = data.n
    if n < 2:
        raise DimensionError(f"build_eigen_gram needs N >= 2, got {n}")
    bandwidths = resolve_specs(columns, specs)
    points = np.array(data.columns(columns))
    points.setflags(write=False)
    gram = np.zeros((n, n))
    for idx, bandwidth in enumerate(bandwidths):
        gram += gaussian_gram_block(points[:, idx], points[:, idx], bandwidth)
    gram /= n
    return eigen_decompose(gram, columns, points, bandwidths)


class GramCache(object):
    """Per-dataset memo of EigenGrams keyed by (column set, bandwidths); one factorization per key"""
    def __init__(self, data, specs=None):
        self.data = data
        self.specs = specs
        self._grams = {}
        self._lock = threading.Lock()
        self._key_locks = {}

    def get(self, columns):
        columns = tuple(sorted(int(c) for c in columns))
        with self._lock:
            cached = self._grams.get(columns)
            if cached is not None:
                return cached
            key_lock = self._key_locks.setdefault(columns, threading.Lock())
        with key_lock:
            cached = self._grams.get(columns)
            if cached is None:
                cached = build_eigen_gram(self.data, columns, self.specs)
                with self._lock:
                    self._grams[columns] = cached
        return cached

    def __len__(self):
        return len(self._grams)


def _check_targets(eg, targets):
    targets = np.asarray(targets, dtype=float)
    if targets.shape != (eg.n,):
        raise DimensionError(f"targets must have shape ({eg.n},), got {targets.shape}")
    return targets


def ridge_solve(eg, penalty, targets):
    """Kernel ridge regression on a fixed EigenGram, solved in the eigenbasis
    :params:
        + eg        - EigenGram of the predictors
        + penalty   - lambda > 0
        + targets   - length-N response
    Returns
        RidgeFit with coefficients (G + lambda I)^-1 y and fitted G (G + lambda I)^-1 y
    """
    penalty = check_positive(penalty, "penalty")
    targets = _check_targets(eg, targets)
    proj = eg.project(targets)
    inverse = 1.0 / (eg.eigenvalues + penalty)
    coefficients = eg.eigenvectors @ (inverse * proj)
    fitted = eg.eigenvectors @ (eg.eigenvalues * inverse * proj)
    return RidgeFit(coefficients, penalty, fitted, eg.predictor_columns, eg.training_points, eg.bandwidths)


def kernel_row(training_points, query, bandwidths):
    """Vector of sum_j K_j(query_j, x_lj) over the training rows l"""
    row = np.zeros(training_points.shape[0])
    for idx, bandwidth in enumerate(bandwidths):
        row += np.exp(-((training_points[:, idx] - query[idx]) ** 2) / (2.0 * bandwidth))
    return row


def predict(fit, query):
    """Evaluate f(x*) = sum_l b_l (1/N) sum_{j in S} K_j(x*_j, x_lj)"""
    query = np.atleast_1d(np.asarray(query, dtype=float)).ravel()
    if query.size != len(fit.predictor_columns):
        raise DimensionError(
            f"query has {query.size} values for {len(fit.predictor_columns)} predictor columns")
    n = fit.training_points.shape[0]
    return float(kernel_row(fit.training_points, query, fit.bandwidths) @ fit.coefficients / n)
