"""Receive weights on a fixed antenna support and their SINR."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .array_model import ArrayConfig, manifold
from .scenario import Scenario


@dataclass(frozen=True, eq=False)
class Beamformer:
    """Sparse complex weight vector.

    Parameters
    ----------
    support : array_like of int
        Distinct antenna indices, stored sorted.
    weights : array_like of complex
        One weight per support entry, in the same order as ``support``.
    """

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.int64).ravel()
        weights = np.asarray(self.weights, dtype=complex).ravel()
        if support.size == 0 or support.size != weights.size:
            raise ValueError("support and weights must be non-empty and of equal length")
        if support.size > 1 and not (support[1:] > support[:-1]).all():
            order = np.argsort(support, kind="stable")
            support, weights = support[order], weights[order]
            if not (support[1:] > support[:-1]).all():
                raise ValueError("support indices must be distinct")
        if support[0] < 0:
            raise ValueError("antenna indices must be non-negative")
        if not weights.any():
            raise ValueError("at least one weight must be nonzero")
        support.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)

    def scaled(self, c: complex) -> Beamformer:
        return Beamformer(self.support, c * self.weights)

    def dense(self, num_antennas: int) -> np.ndarray:
        """Full-length weight vector with zeros off the support."""
        w = np.zeros(num_antennas, dtype=complex)
        w[self.support] = self.weights
        return w


def support_of(sel) -> np.ndarray:
    """Sorted antenna indices of a SelectionSet, Beamformer or index sequence."""
    support = getattr(sel, "support", sel)
    support = np.unique(np.asarray(support, dtype=np.int64))
    if support.size == 0:
        raise ValueError("empty support")
    return support


@lru_cache(maxsize=4096)
def two_element(n: int) -> Beamformer:
    """Reference antenna plus antenna ``n``, equal weights ``1/sqrt(2)``.

    Its gain is ``1 + cos(2*pi*d*n*cos(theta))``: the pair forms an
    ambiguous array whose nulls sit wherever ``d*n*cos(theta)`` is a
    half-integer.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"companion index must be an integer >= 1, got {n!r}")
    return Beamformer(np.array([0, int(n)]), np.full(2, 1 / np.sqrt(2)))


def _other_sources(s: Scenario, user: int) -> np.ndarray:
    if not 0 <= user < s.num_desired:
        raise IndexError(f"user {user} is not a desired user (have {s.num_desired})")
    return np.array([k for k in range(s.num_sources) if k != user], dtype=np.int64)


def interference_covariance(
    cfg: ArrayConfig, s: Scenario, sel, excluded_user: int
) -> np.ndarray:
    """Interference-plus-noise covariance seen on the selected antennas.

    Every source other than ``excluded_user`` contributes, including the
    remaining desired users, so each stream is received with the others
    treated as noise.

    Returns
    -------
    ndarray, shape (r, r)
        ``sum_j P_j a_j a_j^H + sigma^2 I`` with ``a_j`` the steering vector
        of source ``j`` restricted to the support.
    """
    support = support_of(sel)
    others = _other_sources(s, excluded_user)
    A = manifold(cfg.spacing, s.directions[others], support)  # (r, J)
    R = (A * s.powers[others]) @ A.conj().T
    R += s.noise_var * np.eye(support.size)
    # exact Hermitian symmetry; the product is only symmetric to rounding
    return 0.5 * (R + R.conj().T)


def covariance_beamformer(cfg: ArrayConfig, s: Scenario, sel, user: int) -> Beamformer:
    """Weights ``R_n^{-1} a_user`` on the selection support (unnormalized).

    For a known interference covariance this maximizes the SINR over all
    weights with that support.
    """
    support = support_of(sel)
    R = interference_covariance(cfg, s, support, user)
    a = manifold(cfg.spacing, s.directions[user], support)
    w = np.linalg.solve(R, a)
    return Beamformer(support, w)


def sinr(cfg: ArrayConfig, s: Scenario, w: Beamformer, user: int) -> float:
    """Output SINR of desired ``user`` for weights ``w``.

    ``P |w^H h_user|^2 / (sum_{j != user} P_j |w^H h_j|^2 + sigma^2 ||w||^2)``
    with the sum running over every other source, desired or not.
    """
    others = _other_sources(s, user)
    H = manifold(cfg.spacing, s.directions, w.support)  # (support, K)
    responses = np.abs(w.weights.conj() @ H) ** 2
    signal = s.powers[user] * responses[user]
    interference = float(np.dot(s.powers[others], responses[others]))
    noise = s.noise_var * float(np.vdot(w.weights, w.weights).real)
    return float(signal / (interference + noise))


def mvdr_sinr_batch(
    cfg: ArrayConfig, s: Scenario, supports: np.ndarray, user: int
) -> np.ndarray:
    """Optimal (covariance beamformer) SINR for many supports at once.

    ``supports`` has shape (B, m). Uses ``SINR = P a^H R_n^{-1} a``, which
    holds at ``w = R_n^{-1} a``.
    """
    supports = np.asarray(supports, dtype=np.int64)
    others = _other_sources(s, user)
    m = supports.shape[1]
    H = manifold(cfg.spacing, s.directions, supports)  # (B, m, K)
    A = H[:, :, others]
    R = np.einsum("bij,j,bkj->bik", A, s.powers[others], A.conj())
    R += s.noise_var * np.eye(m)
    a = H[:, :, user]
    x = np.linalg.solve(R, a[..., None])[..., 0]
    quad = np.einsum("bi,bi->b", a.conj(), x).real
    return s.powers[user] * quad
