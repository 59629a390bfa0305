"""
Early-stopped L2-boosting with a kernel ridge base learner on a fixed EigenGram.

After m steps of size v the fit operator is B(m) = I - (I - vS)^m. S shares the
eigenvectors of the Gram matrix, so B(m) acts on eigendirection l by the factor
1 - (1 - v d_l)^m with d_l = mu_l / (mu_l + lambda); everything here is computed
in that basis instead of iterating.
"""

from enum import Enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from kernels.kernel import KernelSpec
from utils.constants import ZERO_EIGENVALUE
from utils.errors import ConfigError, DimensionError, NumericalBreakdownError
from utils.logger import log_debug, log_warning
from utils.parameter_validation import (check_choice, check_in_range, check_positive,
                                        validate_integer)


class Stopping(str, Enum):
    AIC = "aic"
    FIXED_RATE = "fixed_rate"
    FIXED_COUNT = "fixed_count"


class EdgeSelection(str, Enum):
    LOSS = "loss"
    SCORE = "score"


class DagCriterion(str, Enum):
    LOGLIK = "loglik"
    RAW = "raw"


@dataclass(frozen=True)
class DecayConstants:
    """Envelope constants C_u < C_d of the eigenvalue decay exp(-C k)"""
    c_upper: float
    c_lower: float

    def __post_init__(self):
        if not (self.c_lower > self.c_upper > 0):
            raise ConfigError(
                f"decay constants need C_d > C_u > 0, got C_u={self.c_upper}, C_d={self.c_lower}")


@dataclass(frozen=True)
class BoostConfig:
    """Hyperparameters shared by single-target boosting and DAGBoost
    :params:
        + step_size       - v in (0, 1]
        + penalty         - ridge lambda > 0
        + max_iterations  - cap on boosting steps
        + stopping        - Stopping rule (AIC, FIXED_RATE, FIXED_COUNT)
        + fixed_count     - m for FIXED_COUNT
        + decay           - DecayConstants for FIXED_RATE; estimated from the spectrum when None
        + patience        - extra AIC increases DAGBoost tolerates before stopping
        + bandwidth       - Gaussian bandwidth used for every column
        + edge_selection  - DAGBoost ranking: LOSS (drop of sum_k log RSS_k) or SCORE (raw log SSE)
        + dag_criterion   - DAGBoost stopping criterion: LOGLIK (sum_k N log(RSS_k / N) + w tr B_k)
                            or RAW (sum_k RSS_k + tr B_k)
        + trace_weight    - w of LOGLIK; log N when None
    """
    step_size: float = 0.3
    penalty: float = 0.01
    max_iterations: int = 1000
    stopping: Stopping = Stopping.AIC
    fixed_count: int = 100
    decay: Optional[DecayConstants] = None
    patience: int = 0
    bandwidth: float = 1.0
    edge_selection: EdgeSelection = EdgeSelection.LOSS
    dag_criterion: DagCriterion = DagCriterion.LOGLIK
    trace_weight: Optional[float] = None

    def __post_init__(self):
        check_in_range(self.step_size, 0.0, 1.0, "step_size")
        check_positive(self.penalty, "penalty")
        validate_integer(self.max_iterations, 1, None, "max_iterations")
        validate_integer(self.fixed_count, 0, None, "fixed_count")
        validate_integer(self.patience, 0, None, "patience")
        check_positive(self.bandwidth, "bandwidth")
        stopping = self.stopping
        if not isinstance(stopping, Stopping):
            stopping = Stopping(check_choice(str(stopping).lower(), {s.value for s in Stopping}, "stopping"))
            object.__setattr__(self, "stopping", stopping)
        for name, kind in (("edge_selection", EdgeSelection), ("dag_criterion", DagCriterion)):
            value = getattr(self, name)
            if not isinstance(value, kind):
                object.__setattr__(self, name, kind(check_choice(str(value).lower(), {v.value for v in kind}, name)))
        if self.trace_weight is not None:
            object.__setattr__(self, "trace_weight", check_positive(self.trace_weight, "trace_weight"))

    @classmethod
    def from_params(cls, section):
        """Build from the [boosting] section of utils.params / the INI file"""
        return cls(step_size=float(section["step_size"]), penalty=float(section["penalty"]),
                   max_iterations=int(section["max_iterations"]), stopping=section["stopping"],
                   fixed_count=int(section.get("fixed_count", 100)),
                   patience=int(section.get("patience", 0)),
                   bandwidth=float(section.get("bandwidth", 1.0)),
                   edge_selection=section.get("edge_selection", EdgeSelection.LOSS),
                   dag_criterion=section.get("dag_criterion", DagCriterion.LOGLIK),
                   trace_weight=section.get("trace_weight"))

    @property
    def kernel_spec(self):
        return KernelSpec(self.bandwidth)


@dataclass(frozen=True, eq=False)
class BoostFit:
    iterations: int
    shrinkage: np.ndarray
    fitted: np.ndarray
    coefficients: np.ndarray
    trace: float
    residual_ss: float
    converged: bool = True
    aic_path: tuple = ()


def base_spectrum(eg, penalty):
    """Eigenvalues d_l = mu_l / (mu_l + lambda) of the ridge base learner"""
    penalty = check_positive(penalty, "penalty")
    return eg.eigenvalues / (eg.eigenvalues + penalty)


def _targets(eg, targets):
    targets = np.asarray(targets, dtype=float)
    if targets.shape != (eg.n,):
        raise DimensionError(f"targets must have shape ({eg.n},), got {targets.shape}")
    return targets


def _shrinkage(d, step_size, m):
    return 1.0 - (1.0 - step_size * d) ** m


def _coefficient_ratio(shrinkage, eigenvalues, power=1):
    """shrinkage^power / mu, defined as 0 on (numerically) zero eigenvalues"""
    ratio = np.zeros_like(shrinkage)
    usable = eigenvalues > ZERO_EIGENVALUE
    ratio[usable] = shrinkage[usable] ** power / eigenvalues[usable]
    return ratio


def _assemble(eg, targets, proj, shrinkage, m, converged=True, aic_path=()):
    fitted = eg.eigenvectors @ (shrinkage * proj)
    coefficients = eg.eigenvectors @ (_coefficient_ratio(shrinkage, eg.eigenvalues) * proj)
    residual_ss = float(np.mean((targets - fitted) ** 2))
    return BoostFit(int(m), shrinkage, fitted, coefficients, float(shrinkage.sum()),
                    residual_ss, converged, tuple(aic_path))


def boost_fixed(eg, targets, cfg, m):
    """Boosting fit after exactly m steps
    :params:
        + eg      - EigenGram of the predictors
        + targets - length-N response
        + cfg     - BoostConfig (step size and penalty)
        + m       - number of steps, m >= 0
    Returns
        BoostFit with fitted = U diag(1 - (1 - v d)^m) U^T y
    """
    m = validate_integer(m, 0, None, "m")
    targets = _targets(eg, targets)
    d = base_spectrum(eg, cfg.penalty)
    shrinkage = _shrinkage(d, cfg.step_size, m)
    return _assemble(eg, targets, eg.project(targets), shrinkage, m)


def boost_aic(eg, targets, cfg):
    """Boosting stopped at the first increase of AIC(m) = RSS(m) + tr(B(m)).

    RSS is the raw residual sum of squares. The scan compares m + 1 against m
    for m = 1, 2, ... and returns the fit at the last m before the first increase.
    Reaching max_iterations without an increase returns that fit flagged
    converged=False.
    """
    targets = _targets(eg, targets)
    proj = eg.project(targets)
    proj_sq = proj ** 2
    factor = 1.0 - cfg.step_size * base_spectrum(eg, cfg.penalty)

    decay = np.ones_like(factor)
    path = []
    m_stop = None
    for m in range(1, cfg.max_iterations + 1):
        decay = decay * factor
        # full orthonormal basis: ||y - B y||^2 = sum (1 - v d)^(2m) proj^2
        aic = float(np.sum(decay ** 2 * proj_sq) + np.sum(1.0 - decay))
        path.append(aic)
        if m > 1 and aic > path[-2]:
            m_stop = m - 1
            break

    converged = m_stop is not None
    if not converged:
        m_stop = cfg.max_iterations
        log_warning("AIC did not increase within ", cfg.max_iterations, " iterations")
    log_debug("boost_aic stopped at m=", m_stop)
    shrinkage = _shrinkage(base_spectrum(eg, cfg.penalty), cfg.step_size, m_stop)
    return _assemble(eg, targets, proj, shrinkage, m_stop, converged, path)


def theoretical_mstop(n, dc):
    """Stopping iteration N^((1/4)(C_u + C_d + 1/2)/(C_d + 1)), rounded, at least 1"""
    n = validate_integer(n, 1, None, "n")
    if not isinstance(dc, DecayConstants):
        raise ConfigError(f"expected DecayConstants, got {type(dc).__name__}")
    DecayConstants(dc.c_upper, dc.c_lower)
    exponent = 0.25 * (dc.c_upper + dc.c_lower + 0.5) / (dc.c_lower + 1.0)
    return max(1, int(round(n ** exponent)))


def estimate_decay_constants(eg):
    """Fit log mu_k ~ a - C k over the non-zero eigenvalues; C_u = C, C_d = 2 C"""
    if eg.n < 10:
        raise DimensionError(f"decay estimation needs N >= 10, got {eg.n}")
    k = np.arange(1, eg.n + 1, dtype=float)
    usable = eg.eigenvalues > ZERO_EIGENVALUE
    if np.count_nonzero(usable) < 3:
        raise NumericalBreakdownError("fewer than 3 usable eigenvalues for decay estimation")
    slope = np.polyfit(k[usable], np.log(eg.eigenvalues[usable]), 1)[0]
    c_upper = -float(slope)
    if c_upper <= 1e-10:
        raise NumericalBreakdownError(f"non-decaying spectrum (slope {slope:.3e})")
    return DecayConstants(c_upper, 2.0 * c_upper)


def rkhs_norm_diag(eg, targets, cfg, m):
    """Squared RKHS norm of the m-step boosting estimate,
    (1/N) y^T U (I - (I - vD)^m)^2 Lambda^-1 U^T y; zero eigenvalues contribute 0.
    """
    m = validate_integer(m, 0, None, "m")
    targets = _targets(eg, targets)
    shrinkage = _shrinkage(base_spectrum(eg, cfg.penalty), cfg.step_size, m)
    ratio = _coefficient_ratio(shrinkage, eg.eigenvalues, power=2)
    return float(np.sum(ratio * eg.project(targets) ** 2) / eg.n)


def boost(eg, targets, cfg):
    """Dispatch on cfg.stopping"""
    if cfg.stopping is Stopping.AIC:
        return boost_aic(eg, targets, cfg)
    if cfg.stopping is Stopping.FIXED_COUNT:
        return boost_fixed(eg, targets, cfg, cfg.fixed_count)
    decay = cfg.decay if cfg.decay is not None else estimate_decay_constants(eg)
    return boost_fixed(eg, targets, cfg, theoretical_mstop(eg.n, decay))
