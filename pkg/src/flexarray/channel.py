"""Multipath channel synthesis for flexible arrays.

A link is described by L plane-wave paths (elevation, azimuth, complex gain).
The channel of a deformed array is

    h(psi) = sqrt(1/L) * sum_l beta_l * e(theta_l, phi_l, psi) (.) g(theta_l, phi_l, psi)

where e stacks the per-element pattern coefficients under the deformation's
boresight offsets, g is the far-field planar-wave array manifold at the
deformed element positions, and (.) is the elementwise product. Path angles
are global; mounting an array rotates its geometry, not the path set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .geometry import ArrayConfig, ArrayGeometry, FlexModel, flex_geometry
from .radiation import PatternSpec, pattern_coefficient

if TYPE_CHECKING:  # pragma: no cover
    from .harness import Scenario


@dataclass
class PathSet:
    """Plane-wave path parameters of a single link.

    Arrays share length L: elevations in [0, pi], azimuths in radians, and
    unitless complex gains. Gains are stored unnormalized; the sqrt(1/L)
    factor is applied once inside :func:`flexible_channel`.
    """

    theta: np.ndarray
    phi: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        self.theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        self.phi = np.atleast_1d(np.asarray(self.phi, dtype=float))
        self.beta = np.atleast_1d(np.asarray(self.beta, dtype=complex))
        if not (self.theta.shape == self.phi.shape == self.beta.shape) or self.theta.ndim != 1:
            raise ValueError("theta, phi and beta must be 1-D arrays of equal length")
        if self.theta.size == 0:
            raise ValueError("a path set needs at least one path")
        if np.any(self.theta < 0.0) or np.any(self.theta > np.pi):
            raise ValueError("path elevations must lie in [0, pi]")

    @property
    def n_paths(self) -> int:
        return self.theta.size


@dataclass
class MultiSectorChannel:
    """3 x 3 grid of N x K blocks; block (m, m') couples array m to sector m' users."""

    blocks: list

    def __post_init__(self):
        shape = self.blocks[0][0].shape
        for row in self.blocks:
            for block in row:
                if block.shape != shape:
                    raise ValueError("all channel blocks must share the same shape")

    def stacked(self) -> np.ndarray:
        """Full (3N, 3K) matrix in sector order."""
        return np.block(self.blocks)


def array_manifold(positions: np.ndarray, theta, phi, wavelength: float) -> np.ndarray:
    """Far-field array manifold; unit-modulus phase response of each element.

    ``theta``/``phi`` may be scalars (returns shape (N,)) or broadcastable
    arrays such as (L, 1) against N positions (returns (L, N)).
    """
    positions = np.asarray(positions, dtype=float)
    x, y, z = positions[..., 0], positions[..., 1], positions[..., 2]
    arg = (x * np.sin(theta) * np.cos(phi)
           + y * np.sin(theta) * np.sin(phi)
           + z * np.cos(theta))
    return np.exp(-2j * np.pi / wavelength * arg)


def manifold_derivatives(positions: np.ndarray, theta, phi, wavelength: float):
    """Partials of the manifold with respect to elevation and azimuth."""
    positions = np.asarray(positions, dtype=float)
    x, y, z = positions[..., 0], positions[..., 1], positions[..., 2]
    g = array_manifold(positions, theta, phi, wavelength)
    k = 2.0 * np.pi / wavelength
    d_arg_theta = (x * np.cos(theta) * np.cos(phi)
                   + y * np.cos(theta) * np.sin(phi)
                   - z * np.sin(theta))
    d_arg_phi = -x * np.sin(theta) * np.sin(phi) + y * np.sin(theta) * np.cos(phi)
    return -1j * k * d_arg_theta * g, -1j * k * d_arg_phi * g


def path_factors(geometry: ArrayGeometry, spec: PatternSpec, paths: PathSet, wavelength: float):
    """Pattern and manifold factors of every path, both shaped (L, N)."""
    offsets = geometry.orientation_offsets
    pattern = pattern_coefficient(spec, paths.theta[:, None], paths.phi[:, None] - offsets[None, :])
    manifold = array_manifold(geometry.positions, paths.theta[:, None], paths.phi[:, None], wavelength)
    return pattern, manifold


def flexible_channel(model: FlexModel, cfg: ArrayConfig, spec: PatternSpec,
                     paths: PathSet, psi: float, mount: float = 0.0) -> np.ndarray:
    """Channel vector of one link for an array deformed to ``psi``, shape (N,)."""
    geometry = flex_geometry(model, cfg, psi, mount)
    pattern, manifold = path_factors(geometry, spec, paths, cfg.wavelength)
    weighted = paths.beta[:, None] * pattern * manifold
    return np.sqrt(1.0 / paths.n_paths) * weighted.sum(axis=0)


def channel_power(h: np.ndarray) -> float:
    """Squared Euclidean norm h^H h of a channel vector."""
    h = np.asarray(h)
    return float(np.vdot(h, h).real)


def channel_power_expansion(model: FlexModel, cfg: ArrayConfig, spec: PatternSpec,
                            paths: PathSet, psi: float, mount: float = 0.0) -> float:
    """Channel power via its per-path expansion.

    Sums the per-path norms and the pairwise real cross terms explicitly;
    agrees with ``channel_power(flexible_channel(...))`` and serves as an
    independent route for testing.
    """
    geometry = flex_geometry(model, cfg, psi, mount)
    pattern, manifold = path_factors(geometry, spec, paths, cfg.wavelength)
    vectors = pattern * manifold  # (L, N)
    beta = paths.beta
    n_paths = paths.n_paths
    diag = np.sum(np.abs(beta) ** 2 * np.sum(np.abs(vectors) ** 2, axis=1))
    cross = 0.0
    for l2 in range(n_paths):
        for l1 in range(l2 + 1, n_paths):
            inner = np.sum(pattern[l2] * pattern[l1] * np.conj(manifold[l2]) * manifold[l1])
            cross += 2.0 * np.real(beta[l1] * np.conj(beta[l2]) * inner)
    return float((diag + cross) / n_paths)


def sector_block(scenario: "Scenario", geometry: ArrayGeometry, faa: int, sector: int) -> np.ndarray:
    """Channels from one already-built array geometry to a sector's users,
    shape (N, K), vectorized over users and paths."""
    path_sets = [scenario.path_sets[(faa, sector, k)] for k in range(scenario.k_users)]
    theta = np.stack([p.theta for p in path_sets])[:, :, None]  # (K, L, 1)
    phi = np.stack([p.phi for p in path_sets])[:, :, None]
    beta = np.stack([p.beta for p in path_sets])[:, :, None]
    pattern = pattern_coefficient(scenario.pattern, theta,
                                  phi - geometry.orientation_offsets)
    manifold = array_manifold(geometry.positions, theta, phi, scenario.cfg.wavelength)
    columns = np.sqrt(1.0 / theta.shape[1]) * (beta * pattern * manifold).sum(axis=1)
    return columns.T


def sector_channel_matrix(scenario: "Scenario", faa: int, sector: int, psi: float) -> np.ndarray:
    """Stack the channels from array ``faa`` to all users of ``sector``, shape (N, K).

    Scenario path sets carry azimuths local to each array's frame (the mount
    is already subtracted), so the channel is built with a zero mount; by
    mount covariance this equals the global-frame construction.
    """
    geometry = flex_geometry(scenario.flex_model, scenario.cfg, psi)
    return sector_block(scenario, geometry, faa, sector)


def full_channel(scenario: "Scenario", psi: Sequence[float]) -> MultiSectorChannel:
    """All nine sector blocks at the per-array flex angles ``psi`` (3 values)."""
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (3,):
        raise ValueError("psi must hold one flex angle per array (3 values)")
    geometries = [flex_geometry(scenario.flex_model, scenario.cfg, p) for p in psi]
    blocks = [[sector_block(scenario, geometries[m], m, mp) for mp in range(3)]
              for m in range(3)]
    return MultiSectorChannel(blocks)
