"""Uniform linear array geometry, steering vectors and beam gains."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .beamforming import Beamformer


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform linear array.

    Parameters
    ----------
    num_antennas : int
        Number of elements, at least 2.
    spacing : float
        Element separation in carrier wavelengths (0.5 is half-wavelength).
    """

    num_antennas: int = 100
    spacing: float = 0.5

    def __post_init__(self):
        if int(self.num_antennas) != self.num_antennas or self.num_antennas < 2:
            raise ValueError(f"num_antennas must be an integer >= 2, got {self.num_antennas!r}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing!r}")


def check_direction(theta: float) -> float:
    """Return ``theta`` as a float, raising if it is outside (0, pi)."""
    theta = float(theta)
    if not 0.0 < theta < np.pi:
        raise ValueError(f"direction must lie in the open interval (0, pi), got {theta!r}")
    return theta


def phase_cycles(indices, spacing: float, theta) -> np.ndarray:
    """Phase of antenna ``indices`` for direction(s) ``theta``, in cycles.

    Returns ``n * d * cos(theta)`` reduced modulo 1; with a 1-D ``theta``
    the result has shape ``(len(indices), len(theta))``. The reduction is
    exact in floating point and keeps the trigonometric arguments small for
    companion indices in the millions. Every gain in the package goes
    through this helper so that the search and the evaluation paths round
    identically.
    """
    indices = np.asarray(indices, dtype=float)
    per_index = spacing * np.cos(np.asarray(theta, dtype=float))
    if per_index.ndim == 0:
        cycles = indices * per_index
    else:
        cycles = np.multiply.outer(indices, per_index)
    return cycles - np.floor(cycles)


def manifold(spacing: float, theta, indices) -> np.ndarray:
    """Steering vector entries at the given antenna ``indices`` only.

    Used instead of :func:`steering_vector` when the support is sparse or,
    in virtual-array mode, lies beyond the physical aperture.
    """
    return np.exp(2j * np.pi * phase_cycles(indices, spacing, theta))


def steering_vector(cfg: ArrayConfig, theta: float) -> np.ndarray:
    """Array manifold ``h(theta)`` with entries ``exp(2j*pi*d*n*cos(theta))``.

    Antenna 0 is the phase reference, so ``h[0] == 1``.
    """
    theta = check_direction(theta)
    return manifold(cfg.spacing, theta, np.arange(cfg.num_antennas))


def beam_gain(w: Beamformer, h: np.ndarray) -> float:
    """Power gain ``|w^H h|^2`` evaluated over the support of ``w``."""
    h = np.asarray(h)
    if w.support.size and w.support[-1] >= h.size:
        raise ValueError(
            f"beamformer support reaches antenna {w.support[-1]} but h has {h.size} entries"
        )
    return float(np.abs(np.vdot(w.weights, h[w.support])) ** 2)


def gain_at(spacing: float, w: Beamformer, theta) -> np.ndarray | float:
    """``|w^H h(theta)|^2`` for scalar or array ``theta`` without building full vectors."""
    theta_arr = np.atleast_1d(np.asarray(theta, dtype=float))
    h = manifold(spacing, theta_arr, w.support)  # (support, theta)
    gains = np.abs(w.weights.conj() @ h) ** 2
    return float(gains[0]) if np.ndim(theta) == 0 else gains


def beampattern(cfg: ArrayConfig, w: Beamformer, grid_size: int) -> list[tuple[float, float]]:
    """Sample the beam pattern of ``w`` on a uniform grid inside (0, pi).

    The grid is the set of cell midpoints ``pi*(k + 1/2)/grid_size``, so it
    never touches the endpoints and contains pi/2 whenever ``grid_size`` is
    odd.

    Returns
    -------
    list of (theta, gain)
        Ordered by increasing theta.
    """
    if int(grid_size) != grid_size or grid_size < 2:
        raise ValueError(f"grid_size must be an integer >= 2, got {grid_size!r}")
    if w.support.size and w.support[-1] >= cfg.num_antennas:
        raise ValueError("beamformer support exceeds the array")
    thetas = np.pi * (np.arange(grid_size) + 0.5) / grid_size
    gains = gain_at(cfg.spacing, w, thetas)
    return list(zip(thetas.tolist(), gains.tolist()))
