"""Gaussian density primitives.

Every model in this package trades in nonsingular Gaussians, so the density
type enforces strict positive definiteness at construction and keeps the
lower Cholesky factor around for sampling, conditioning, and log-density
evaluation.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import DimensionMismatch, EmptyFreeBlock, NotPositiveDefinite

DEFAULT_SYM_TOL = 1e-9

_LOG_2PI = float(np.log(2.0 * np.pi))


def symmetrize(mat: np.ndarray) -> np.ndarray:
    """Average a matrix with its transpose."""
    return 0.5 * (mat + mat.T)


def spd_cholesky(cov, sym_tol: float = DEFAULT_SYM_TOL, name: str = "covariance"):
    """Validate, symmetrize, and factor a symmetric positive definite matrix.

    Returns the symmetrized matrix together with its lower Cholesky factor.
    Raises NotPositiveDefinite if the matrix is asymmetric beyond ``sym_tol``
    or fails the factorization, and DimensionMismatch if it is not square.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {cov.shape}")
    if cov.size and float(np.max(np.abs(cov - cov.T))) > sym_tol:
        raise NotPositiveDefinite(f"{name} is asymmetric beyond tolerance {sym_tol:g}")
    sym = symmetrize(cov)
    try:
        chol = np.linalg.cholesky(sym)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"{name} is not positive definite") from exc
    return sym, chol


class GaussianDensity:
    """Nonsingular Gaussian with a cached lower Cholesky factor of its covariance."""

    def __init__(self, mean, cov, sym_tol: float = DEFAULT_SYM_TOL):
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        if mean.ndim != 1:
            raise DimensionMismatch(f"mean must be a vector, got shape {mean.shape}")
        cov = np.asarray(cov, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise DimensionMismatch(
                f"covariance shape {cov.shape} does not match mean dimension {mean.size}"
            )
        self.mean = mean
        self.cov, self.chol = spd_cholesky(cov, sym_tol=sym_tol)

    @property
    def dim(self) -> int:
        return self.mean.size

    def __repr__(self) -> str:
        return f"GaussianDensity(dim={self.dim})"


def make_gaussian(mean, cov, sym_tol: float = DEFAULT_SYM_TOL) -> GaussianDensity:
    """Validated density with a symmetrized covariance."""
    return GaussianDensity(mean, cov, sym_tol=sym_tol)


def sample(density: GaussianDensity, rng: np.random.Generator, size: int | None = None):
    """Draw from the density as mean + L z with L the stored Cholesky factor.

    With ``size=None`` one draw is returned as a vector; with an integer a
    (size, dim) array of independent draws. Deterministic given the
    generator state.
    """
    if size is None:
        z = rng.standard_normal(density.dim)
        return density.mean + density.chol @ z
    z = rng.standard_normal((int(size), density.dim))
    return density.mean + z @ density.chol.T


def condition(joint: GaussianDensity, observed_indices, observed_value) -> GaussianDensity:
    """Exact Gaussian conditional of the free dimensions given the observed ones.

    Args:
        joint: the joint density.
        observed_indices: integer indices of the observed dimensions; the
            remaining dimensions form the free block, kept in ascending order.
        observed_value: values for the observed dimensions, matching order.

    Returns:
        The conditional density of the free block (Schur complement form).

    Raises:
        DimensionMismatch: indices are malformed or the value has the wrong size.
        EmptyFreeBlock: every dimension was marked observed.
        NotPositiveDefinite: the observed sub-covariance is singular.
    """
    obs = np.atleast_1d(np.asarray(observed_indices, dtype=int))
    if obs.ndim != 1:
        raise DimensionMismatch("observed indices must be one-dimensional")
    dim = joint.dim
    if obs.size != np.unique(obs).size:
        raise DimensionMismatch("observed indices contain duplicates")
    if obs.size and (obs.min() < 0 or obs.max() >= dim):
        raise DimensionMismatch(f"observed indices must lie in [0, {dim})")
    value = np.atleast_1d(np.asarray(observed_value, dtype=float))
    if value.shape != (obs.size,):
        raise DimensionMismatch(
            f"observed value shape {value.shape} does not match {obs.size} indices"
        )
    if obs.size == 0:
        return joint
    if obs.size == dim:
        raise EmptyFreeBlock("conditioning on every dimension leaves no free block")

    free = np.setdiff1d(np.arange(dim), obs)
    cov = joint.cov
    c_oo = cov[np.ix_(obs, obs)]
    c_fo = cov[np.ix_(free, obs)]
    c_ff = cov[np.ix_(free, free)]
    try:
        l_oo = np.linalg.cholesky(symmetrize(c_oo))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("observed-block covariance is singular") from exc
    rhs = np.column_stack([value - joint.mean[obs], c_fo.T])
    sol = cho_solve((l_oo, True), rhs)
    mean = joint.mean[free] + c_fo @ sol[:, 0]
    new_cov = c_ff - c_fo @ sol[:, 1:]
    return GaussianDensity(mean, symmetrize(new_cov))


def log_density(density: GaussianDensity, x) -> float:
    """Log of the density evaluated at ``x``, via the cached Cholesky factor."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (density.dim,):
        raise DimensionMismatch(
            f"point shape {x.shape} does not match density dimension {density.dim}"
        )
    z = solve_triangular(density.chol, x - density.mean, lower=True)
    half_logdet = float(np.sum(np.log(np.diag(density.chol))))
    return float(-0.5 * (z @ z) - half_logdet - 0.5 * density.dim * _LOG_2PI)
