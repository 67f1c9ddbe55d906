"""Fisher information and Cramer-Rao bounds for the multipath channel.

The parameter vector stacks the per-path elevations, azimuths, and the real
and imaginary parts of the gains, xi = [theta; phi; beta_R; beta_I] of length
4L. For the single-snapshot training model u = h(psi) + n with circular white
noise of power sigma^2, block (a, b) of the Fisher matrix is
(2 / sigma^2) Re{ D_a^H D_b } where D_a stacks the channel derivatives with
respect to parameter family a.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import PathSet, manifold_derivatives, path_factors
from .errors import OptimizationError, PatternBoundaryError, SingularFisherError
from .geometry import ArrayConfig, FlexModel, flex_geometry
from .radiation import PatternSpec, pattern_derivatives

FISHER_COND_MAX = 1e12


@dataclass
class FisherMatrix:
    """Fisher information of the 4L channel parameters at one flex angle."""

    matrix: np.ndarray
    sigma2: float
    n_paths: int

    def inverse(self) -> np.ndarray:
        """Inverse Fisher matrix; raises SingularFisherError when ill conditioned."""
        cond = np.linalg.cond(self.matrix)
        if not np.isfinite(cond) or cond > FISHER_COND_MAX:
            raise SingularFisherError(cond)
        return np.linalg.inv(self.matrix)


def _derivative_stack(model: FlexModel, cfg: ArrayConfig, spec: PatternSpec,
                      paths: PathSet, psi: float, mount: float) -> np.ndarray:
    """Channel derivatives for all parameters, columns (N, 4L) ordered
    [theta_1..L, phi_1..L, beta_R_1..L, beta_I_1..L]."""
    geometry = flex_geometry(model, cfg, psi, mount)
    offsets = geometry.orientation_offsets
    theta = paths.theta[:, None]
    local_phi = paths.phi[:, None] - offsets[None, :]

    pattern, manifold = path_factors(geometry, spec, paths, cfg.wavelength)
    d_pat_theta, d_pat_phi = pattern_derivatives(spec, theta, local_phi)
    d_man_theta, d_man_phi = manifold_derivatives(
        geometry.positions, theta, paths.phi[:, None], cfg.wavelength)

    scale = np.sqrt(1.0 / paths.n_paths)
    beta = paths.beta[:, None]
    d_theta = scale * beta * (d_pat_theta * manifold + d_man_theta * pattern)
    d_phi = scale * beta * (d_pat_phi * manifold + d_man_phi * pattern)
    d_beta_r = scale * pattern * manifold
    d_beta_i = 1j * d_beta_r
    return np.hstack([d_theta.T, d_phi.T, d_beta_r.T, d_beta_i.T])


def stack_parameters(paths: PathSet) -> np.ndarray:
    """Channel parameters as one real vector [theta; phi; beta_R; beta_I] of
    length 4L, in the ordering used by the Fisher matrix and CRB indices."""
    return np.concatenate([paths.theta, paths.phi, paths.beta.real, paths.beta.imag])


def channel_param_derivatives(model: FlexModel, cfg: ArrayConfig, spec: PatternSpec,
                              paths: PathSet, psi: float, mount: float, path_index: int):
    """Derivatives of the channel with respect to path ``path_index``'s four
    parameters: (d/d theta_l, d/d phi_l, d/d beta_R_l, d/d beta_I_l)."""
    n_paths = paths.n_paths
    if not 0 <= path_index < n_paths:
        raise IndexError(f"path index {path_index} outside 0..{n_paths - 1}")
    stack = _derivative_stack(model, cfg, spec, paths, psi, mount)
    return tuple(stack[:, family * n_paths + path_index] for family in range(4))


def fisher_matrix(model: FlexModel, cfg: ArrayConfig, spec: PatternSpec,
                  paths: PathSet, psi: float, mount: float, sigma2: float) -> FisherMatrix:
    """Assemble the 4L x 4L Fisher matrix; symmetric by construction."""
    if sigma2 <= 0:
        raise ValueError("noise power sigma2 must be positive")
    stack = _derivative_stack(model, cfg, spec, paths, psi, mount)
    j = (2.0 / sigma2) * np.real(stack.conj().T @ stack)
    j = 0.5 * (j + j.T)
    return FisherMatrix(matrix=j, sigma2=float(sigma2), n_paths=paths.n_paths)


def crb(fisher: FisherMatrix, index: int) -> float:
    """Cramer-Rao bound of one parameter, a diagonal entry of the inverse
    Fisher matrix. ``index`` is 0-based over the 4L stacked parameters."""
    size = fisher.matrix.shape[0]
    if not 0 <= index < size:
        raise IndexError(f"parameter index {index} outside 0..{size - 1}")
    return float(fisher.inverse()[index, index])


def mean_angle_crb(fisher: FisherMatrix) -> float:
    """Average CRB over all elevation and azimuth parameters (first 2L)."""
    inv = fisher.inverse()
    return float(np.mean(np.diag(inv)[: 2 * fisher.n_paths]))


def optimal_psi_for_crb(model: FlexModel, cfg: ArrayConfig, spec: PatternSpec,
                        paths: PathSet, mount: float, sigma2: float,
                        psi_range: tuple, grid_size: int = 181):
    """Grid search for the flex angle minimizing the mean angle CRB.

    Grid points that hit a singular Fisher matrix or a pattern support edge
    are skipped. Ties (the CRB is even in psi for symmetric scenarios) are
    broken toward the non-negative half, then toward smaller |psi|. Returns
    (psi_star, crb_star); raises OptimizationError when every point fails.
    """
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    lo, hi = float(psi_range[0]), float(psi_range[1])
    evaluated = []
    for psi in np.linspace(lo, hi, grid_size):
        try:
            value = mean_angle_crb(fisher_matrix(model, cfg, spec, paths, psi, mount, sigma2))
        except (SingularFisherError, PatternBoundaryError):
            continue
        evaluated.append((float(psi), value))
    if not evaluated:
        raise OptimizationError("mean angle CRB failed at every grid point")
    best_value = min(value for _, value in evaluated)
    ties = [(psi, value) for psi, value in evaluated
            if value <= best_value * (1.0 + 1e-12)]
    psi_star, crb_star = min(ties, key=lambda item: (item[0] < 0.0, abs(item[0])))
    return psi_star, crb_star
