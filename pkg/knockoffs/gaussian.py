"""
Second-order Gaussian model-X knockoffs.

Knockoff rows are drawn from the Gaussian conditional of X~ given X so
that the joint second moments of [X, X~] are invariant under swapping any
factor with its knockoff:

    G = [[Sigma, Sigma - diag(s)], [Sigma - diag(s), Sigma]]
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from config import KnockoffConfig
from errors import DomainError
from knockoffs.moments import MomentEstimate
from utils.seeding import rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KnockoffSample:
    """Original factors, their knockoffs and the decoupling vector used."""
    originals: np.ndarray
    knockoffs: np.ndarray
    s: np.ndarray
    seed: int


def solve_s_equi(covariance: np.ndarray) -> np.ndarray:
    """
    Equicorrelated decoupling vector: s_j = min(2 lambda_min(C), 1) on the
    correlation matrix C, rescaled back to covariance units.
    """
    covariance = np.atleast_2d(np.asarray(covariance, dtype=float))
    _check_spd(covariance)
    scale = np.sqrt(np.diag(covariance))
    correlation = covariance / np.outer(scale, scale)
    correlation = (correlation + correlation.T) / 2.0
    lambda_min = np.linalg.eigvalsh(correlation)[0]
    s_corr = min(2.0 * lambda_min, 1.0)
    return s_corr * scale ** 2


def sample_knockoffs(X: np.ndarray, moments: MomentEstimate, s: np.ndarray, seed: int) -> KnockoffSample:
    """
    Draw each knockoff row from
        N(x - diag(s) Sigma^-1 (x - mu), 2 diag(s) - diag(s) Sigma^-1 diag(s)).
    """
    X = np.asarray(X, dtype=float)
    s = np.asarray(s, dtype=float)
    sigma = moments.covariance
    n_features = sigma.shape[0]
    if X.ndim != 2 or X.shape[1] != n_features or s.shape != (n_features,):
        raise DomainError(f"shape mismatch: X {X.shape}, Sigma {sigma.shape}, s {s.shape}")
    if (s < 0).any():
        raise DomainError("decoupling vector s must be non-negative")

    factor = linalg.cho_factor(sigma, lower=True)
    sigma_inv_s = linalg.cho_solve(factor, np.diag(s))          # Sigma^-1 diag(s)
    conditional_mean = X - (X - moments.mean) @ sigma_inv_s
    conditional_cov = 2.0 * np.diag(s) - np.diag(s) @ sigma_inv_s
    conditional_cov = (conditional_cov + conditional_cov.T) / 2.0

    eigenvalues, eigenvectors = np.linalg.eigh(conditional_cov)
    if eigenvalues[0] < KnockoffConfig.PSD_TOLERANCE:
        raise DomainError(f"conditional covariance not PSD (min eigenvalue {eigenvalues[0]:.3g}); "
                          "s is too large for Sigma")
    root = eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))

    noise = rng(seed).standard_normal(X.shape)
    knockoffs = conditional_mean + noise @ root.T
    return KnockoffSample(originals=X, knockoffs=knockoffs, s=s, seed=int(seed))


def joint_gram(covariance: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Target second-moment matrix of [X, X~]."""
    off = covariance - np.diag(s)
    return np.block([[covariance, off], [off, covariance]])


def _check_spd(matrix: np.ndarray):
    if matrix.shape[0] != matrix.shape[1]:
        raise DomainError(f"covariance must be square, got {matrix.shape}")
    if not np.allclose(matrix, matrix.T, atol=KnockoffConfig.SYMMETRY_TOLERANCE, rtol=0.0):
        raise DomainError("covariance is not symmetric")
    if np.linalg.eigvalsh((matrix + matrix.T) / 2.0)[0] <= 0.0:
        raise DomainError("covariance is not positive definite")
