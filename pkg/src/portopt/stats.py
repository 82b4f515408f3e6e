"""Moment estimation for a complete panel: mean vector, covariance, correlation.

The covariance uses the n-1 denominator and is symmetrized on construction so
downstream eigen/solver code never sees round-off asymmetry.  psd_check and
psd_repair certify and, if needed, restore positive semidefiniteness before a
matrix reaches the solver.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateVariance,
    EmptyPanel,
    IncompletePanel,
    InsufficientData,
    NumericError,
)
from .panel import PricePanel


@dataclass
class MomentEstimate:
    """Per-symbol mean vector and covariance matrix from n_obs panel rows."""

    symbols: list[str]
    mean: np.ndarray
    cov: np.ndarray
    n_obs: int

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        self.cov = np.asarray(self.cov, dtype=float)
        n = len(self.symbols)
        if self.mean.shape != (n,):
            raise ValueError(f"mean has shape {self.mean.shape}, expected ({n},)")
        if self.cov.shape != (n, n):
            raise ValueError(f"cov has shape {self.cov.shape}, expected ({n}, {n})")
        if self.n_obs < 2:
            raise ValueError("n_obs must be >= 2")
        self.cov = 0.5 * (self.cov + self.cov.T)

    @property
    def volatilities(self) -> np.ndarray:
        """Per-symbol standard deviations (sqrt of the covariance diagonal)."""
        return np.sqrt(np.maximum(np.diag(self.cov), 0.0))


@dataclass
class CorrelationMatrix:
    symbols: list[str]
    rho: np.ndarray

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        n = len(self.symbols)
        if self.rho.shape != (n, n):
            raise ValueError(f"rho has shape {self.rho.shape}, expected ({n}, {n})")


@dataclass
class PsdReport:
    min_eigenvalue: float
    is_psd: bool
    tol: float


def estimate_moments(p: PricePanel) -> MomentEstimate:
    """Column means and sample covariance (n-1 denominator) of a complete panel."""
    if p.n_symbols < 1:
        raise EmptyPanel("panel has no symbols")
    if p.has_missing():
        raise IncompletePanel("panel has missing cells; run complete_cases first")
    if p.n_dates < 2:
        raise InsufficientData(f"need >= 2 rows, have {p.n_dates}")

    x = p.values
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (p.n_dates - 1)
    return MomentEstimate(symbols=list(p.symbols), mean=mean, cov=cov, n_obs=p.n_dates)


def to_correlation(m: MomentEstimate) -> CorrelationMatrix:
    """Normalize the covariance to correlations; diagonal forced to exactly 1."""
    var = np.diag(m.cov)
    for j, v in enumerate(var):
        if v <= 0.0:
            raise DegenerateVariance(
                f"{m.symbols[j]} has zero variance; correlation undefined"
            )
    sigma = np.sqrt(var)
    rho = m.cov / np.outer(sigma, sigma)
    np.fill_diagonal(rho, 1.0)
    return CorrelationMatrix(symbols=list(m.symbols), rho=rho)


def psd_check(m: MomentEstimate, tol: float | None = None) -> PsdReport:
    """Certify positive semidefiniteness via a symmetric eigen-decomposition.

    is_psd holds iff the smallest eigenvalue is >= -tol.  The default tol is
    1e-10 times the largest diagonal entry.
    """
    if not np.isfinite(m.cov).all():
        raise NumericError("covariance contains non-finite entries")
    if tol is None:
        tol = 1e-10 * max(float(np.max(np.diag(m.cov))), 0.0)
    if tol < 0:
        raise ValueError("tol must be >= 0")
    eigenvalues = np.linalg.eigvalsh(m.cov)
    min_eig = float(eigenvalues[0])
    return PsdReport(min_eigenvalue=min_eig, is_psd=min_eig >= -tol, tol=tol)


def psd_repair(m: MomentEstimate, floor: float = 0.0) -> MomentEstimate:
    """Clip eigenvalues at floor and reassemble; no-op when already PSD.

    The no-op path returns the input object unchanged, so a PSD estimate is
    bitwise stable across repair.
    """
    if floor < 0:
        raise ValueError("floor must be >= 0")
    report = psd_check(m)
    if report.is_psd and report.min_eigenvalue >= floor - report.tol:
        return m
    eigenvalues, vectors = np.linalg.eigh(m.cov)
    clipped = np.maximum(eigenvalues, floor)
    repaired = (vectors * clipped) @ vectors.T
    return MomentEstimate(symbols=list(m.symbols), mean=m.mean.copy(),
                          cov=repaired, n_obs=m.n_obs)


def write_moments_csv(m: MomentEstimate, path) -> None:
    """MEAN row then the square covariance block; first column is the symbol."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["symbol"] + list(m.symbols))
        w.writerow(["MEAN"] + [f"{v:.12g}" for v in m.mean])
        for i, sym in enumerate(m.symbols):
            w.writerow([sym] + [f"{v:.12g}" for v in m.cov[i]])
