"""Element radiation patterns and their analytic derivatives.

Two element patterns are supported: an omnidirectional pattern with unit gain
everywhere, and a directional cosine pattern

    G(theta, phi) = 2 (1 + kappa) sin^kappa(theta) cos^kappa(phi)

on the front half-space phi in [-pi/2, pi/2] (zero behind), whose
normalization constant makes the gain integrate to 4 pi over the sphere for
any sharpness kappa >= 1. Amplitude coefficients are the square roots of the
gains. Azimuth arguments are always wrapped to (-pi, pi] first, since
per-element boresight offsets can push them outside the principal range.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import PatternBoundaryError

BOUNDARY_EPS = 1e-6
"""Half-width of the band around the cosine support edge where derivatives
are refused; the amplitude slope is unbounded there for kappa = 1."""


class PatternKind(enum.Enum):
    OMNI = "omni"
    COSINE = "cosine"


@dataclass(frozen=True)
class PatternSpec:
    """Element pattern selector; ``kappa`` is only used by the cosine kind."""

    kind: PatternKind
    kappa: float = 1.0

    def __post_init__(self):
        if self.kind is PatternKind.COSINE and self.kappa < 1.0:
            raise ValueError(f"cosine sharpness kappa must be >= 1, got {self.kappa}")

    @property
    def peak_gain(self) -> float:
        """Gain at boresight: 1 for omni, 2(1 + kappa) for cosine."""
        if self.kind is PatternKind.OMNI:
            return 1.0
        return 2.0 * (1.0 + self.kappa)


OMNI = PatternSpec(PatternKind.OMNI)


def wrap_angle(phi):
    """Wrap azimuth angle(s) to the principal range (-pi, pi]."""
    phi = np.asarray(phi, dtype=float)
    wrapped = phi - 2.0 * np.pi * np.ceil((phi - np.pi) / (2.0 * np.pi))
    return float(wrapped) if wrapped.ndim == 0 else wrapped


def _check_theta(theta: np.ndarray) -> None:
    if np.any(theta < 0.0) or np.any(theta > np.pi):
        raise ValueError("elevation theta must lie in [0, pi]")


def pattern_gain(spec: PatternSpec, theta, phi):
    """Radiated power of one element toward (theta, phi).

    Scalar or broadcastable array arguments are accepted; scalars in, scalar
    out. Raises ValueError when theta leaves [0, pi].
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    _check_theta(theta)
    if spec.kind is PatternKind.OMNI:
        gain = np.ones(np.broadcast(theta, phi).shape)
    else:
        w = wrap_angle(phi)
        front = np.abs(w) <= np.pi / 2
        cos_part = np.where(front, np.clip(np.cos(w), 0.0, None), 0.0)
        gain = spec.peak_gain * np.sin(theta) ** spec.kappa * cos_part**spec.kappa
    return float(gain) if gain.ndim == 0 else gain


def pattern_coefficient(spec: PatternSpec, theta, phi):
    """Amplitude coefficient, the square root of :func:`pattern_gain`."""
    return np.sqrt(pattern_gain(spec, theta, phi))


def element_pattern_vector(spec: PatternSpec, geometry, theta, phi) -> np.ndarray:
    """Per-element amplitude coefficients for a deformed array, shape (N,).

    Entry n is the coefficient at (theta, phi - offset_n) where offset_n is the
    element's boresight azimuth; ordering matches the geometry vectorization.
    """
    return pattern_coefficient(spec, theta, phi - geometry.orientation_offsets)


def pattern_derivatives(spec: PatternSpec, theta, phi):
    """Partial derivatives (dA/dtheta, dA/dphi) of the amplitude coefficient.

    On the open cosine support these are (kappa/2) A cot(theta) and
    -(kappa/2) A tan(phi); outside the support both vanish identically. Any
    point within BOUNDARY_EPS of a support edge raises PatternBoundaryError
    rather than returning a clamped value, since a silently large derivative
    would corrupt downstream Fisher matrices.
    """
    theta, phi = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))
    _check_theta(theta)
    if spec.kind is PatternKind.OMNI:
        zeros = np.zeros(theta.shape)
        if zeros.ndim == 0:
            return 0.0, 0.0
        return zeros, zeros.copy()

    w = wrap_angle(phi)
    half_pi = np.pi / 2
    if np.any(np.abs(np.abs(w) - half_pi) < BOUNDARY_EPS):
        raise PatternBoundaryError("azimuth within 1e-6 of the cosine support edge")
    interior = np.abs(w) < half_pi
    if np.any(interior & ((theta < BOUNDARY_EPS) | (theta > np.pi - BOUNDARY_EPS))):
        raise PatternBoundaryError("elevation within 1e-6 of the cosine support edge")

    half_kappa = spec.kappa / 2.0
    cos_safe = np.where(interior, np.cos(w), 1.0)  # cos > 0 on the open support
    amp = np.where(interior,
                   np.sqrt(spec.peak_gain) * np.sin(theta) ** half_kappa * cos_safe**half_kappa,
                   0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        d_theta = np.where(interior, half_kappa * amp * np.cos(theta) / np.sin(theta), 0.0)
        d_phi = np.where(interior, -half_kappa * amp * np.tan(w), 0.0)
    if d_theta.ndim == 0:
        return float(d_theta), float(d_phi)
    return d_theta, d_phi


def normalization_integral(spec: PatternSpec, n_theta: int = 720, n_phi: int = 1440) -> float:
    """Quadrature of the gain over the sphere; 4 pi for a normalized pattern.

    Midpoint rule on a tensor grid; the integrand is smooth except for the
    corner at the cosine support edge, and the default resolution keeps the
    error far below 1e-3 relative.
    """
    d_theta = np.pi / n_theta
    d_phi = 2.0 * np.pi / n_phi
    theta = (np.arange(n_theta) + 0.5) * d_theta
    phi = -np.pi + (np.arange(n_phi) + 0.5) * d_phi
    gain = pattern_gain(spec, theta[:, None], phi[None, :])
    return float(np.sum(gain * np.sin(theta)[:, None]) * d_theta * d_phi)
