"""Rates, the desired-user effective channel and the sum-rate sandwich."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .array_model import ArrayConfig, manifold
from .beamforming import Beamformer, sinr
from .scenario import Scenario

PSD_TOL = 1e-10


@dataclass(frozen=True)
class EffectiveChannel:
    """``Q = Ht Ht^H`` where ``Ht[k, j] = w_k^H h(theta_j)`` over desired users.

    ``offdiag_max`` measures the distance of ``Q`` from identity: the
    largest of ``|Q_ii - 1|`` and ``|Q_ij|`` for ``i != j``. When built with
    ``normalize=True`` each beamformer is rescaled so that ``Q_ii = 1``;
    ``raw_diagonal`` always holds the unscaled diagonal.
    """

    q_matrix: np.ndarray
    offdiag_max: float
    raw_diagonal: np.ndarray = field(default=None)


@dataclass(frozen=True)
class RateReport:
    """Per-user and sum rates in bits per channel use, plus Q diagnostics.

    Only the rate fields are filled by :func:`per_user_rates`;
    :func:`rate_report` adds the log-det rate, bounds and Gershgorin
    interval.
    """

    per_user_rate: tuple[float, ...]
    sum_rate: float
    logdet_rate: float | None = None
    r_min_bound: float | None = None
    r_max_bound: float | None = None
    gershgorin_lo: float | None = None
    gershgorin_hi: float | None = None
    sinr: tuple[float, ...] = ()


@dataclass(frozen=True)
class TheoremCheck:
    precondition_ok: bool
    r_min: float
    r_max: float
    logdet_rate: float
    in_sandwich: bool
    target: float
    meets_target: bool
    margin_low: float
    margin_high: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.precondition_ok and self.in_sandwich and self.meets_target


def rates_from_sinr(sinrs) -> tuple[tuple[float, ...], float]:
    """``log2(1 + SINR)`` per user and their sum, accumulated left to right."""
    rates = tuple(math.log2(1.0 + float(x)) for x in sinrs)
    total = 0.0
    for x in rates:
        total += x
    return rates, total


def per_user_rates(cfg: ArrayConfig, s: Scenario, beamformers) -> RateReport:
    """Single-user-decoding rates ``log2(1 + SINR_k)`` for each desired user."""
    beamformers = list(beamformers)
    if len(beamformers) != s.num_desired:
        raise ValueError(f"need {s.num_desired} beamformers, got {len(beamformers)}")
    sinrs = tuple(sinr(cfg, s, w, k) for k, w in enumerate(beamformers))
    rates, total = rates_from_sinr(sinrs)
    return RateReport(per_user_rate=rates, sum_rate=total, sinr=sinrs)


def effective_channel(
    cfg: ArrayConfig, s: Scenario, W, normalize: bool = False
) -> EffectiveChannel:
    W = list(W)
    if len(W) != s.num_desired:
        raise ValueError(f"need {s.num_desired} beamformers, got {len(W)}")
    desired = s.directions[: s.num_desired]
    Ht = np.empty((len(W), len(W)), dtype=complex)
    for k, w in enumerate(W):
        Ht[k] = w.weights.conj() @ manifold(cfg.spacing, desired, w.support)
    raw_diag = np.sum(np.abs(Ht) ** 2, axis=1)
    if normalize:
        Ht = Ht / np.sqrt(raw_diag)[:, None]
    return effective_channel_from(Ht, raw_diag)


def effective_channel_from(Ht: np.ndarray, raw_diagonal=None) -> EffectiveChannel:
    """Build the effective channel from an explicit ``Ht`` matrix."""
    Ht = np.asarray(Ht, dtype=complex)
    Q = Ht @ Ht.conj().T
    dev = np.abs(Q - np.eye(Q.shape[0]))
    if raw_diagonal is None:
        raw_diagonal = np.diag(Q).real.copy()
    return EffectiveChannel(Q, float(dev.max()), np.asarray(raw_diagonal))


def gershgorin_bounds(Q) -> tuple[float, float]:
    """Interval containing every eigenvalue of a Hermitian ``Q``.

    The union of the Gershgorin discs ``|z - Q_ii| <= sum_{j != i} |Q_ij|``
    intersected with the real line.
    """
    Q = np.asarray(Q)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValueError("Q must be square")
    centers = np.diag(Q).real
    radii = np.abs(Q).sum(axis=1) - np.abs(np.diag(Q))
    return float(np.min(centers - radii)), float(np.max(centers + radii))


def logdet_rate(Q, p_over_sigma2: float) -> float:
    """``log2 det(I + (P/sigma^2) Q)`` through a Cholesky factor.

    Raises
    ------
    ValueError
        If ``Q`` is not Hermitian positive semidefinite to within
        ``1e-10`` relative to its norm.
    """
    Q = np.asarray(Q, dtype=complex)
    scale = max(1.0, float(np.abs(Q).max(initial=0.0)))
    if np.abs(Q - Q.conj().T).max(initial=0.0) > PSD_TOL * scale:
        raise ValueError("Q is not Hermitian")
    Q = 0.5 * (Q + Q.conj().T)
    if Q.size and la.eigvalsh(Q)[0] < -PSD_TOL * scale:
        raise ValueError("Q is not positive semidefinite")
    if p_over_sigma2 < 0:
        raise ValueError("p_over_sigma2 must be non-negative")
    L = la.cholesky(np.eye(Q.shape[0]) + p_over_sigma2 * Q, lower=True)
    return float(2.0 * np.sum(np.log2(np.diag(L).real)))


def rate_bounds(delta: float, K: int, r: int, p_over_sigma2: float) -> tuple[float, float]:
    """Lower and upper sum-rate bounds for a ``delta``-nulling selection.

    ``R_min = (r-1) log2(1 + rho (1 - K delta))`` and
    ``R_max = (r-1) log2(1 + rho r/(r-1))``.
    """
    r_min = (r - 1) * math.log2(1.0 + p_over_sigma2 * (1.0 - K * delta))
    r_max = (r - 1) * math.log2(1.0 + r / (r - 1) * p_over_sigma2)
    return r_min, r_max


def rate_report(
    cfg: ArrayConfig,
    s: Scenario,
    beamformers,
    delta: float | None = None,
    r: int | None = None,
) -> RateReport:
    """Rates plus the normalized-Q analysis for one set of beamformers."""
    beamformers = list(beamformers)
    base = per_user_rates(cfg, s, beamformers)
    eff = effective_channel(cfg, s, beamformers, normalize=True)
    lo, hi = gershgorin_bounds(eff.q_matrix)
    ld = logdet_rate(eff.q_matrix, s.snr)
    r = s.num_desired + 1 if r is None else r
    r_min = r_max = None
    if delta is not None and 0 < delta < 1 / (2 * s.num_sources):
        r_min, r_max = rate_bounds(delta, s.num_sources, r, s.snr)
    return RateReport(
        per_user_rate=base.per_user_rate,
        sum_rate=base.sum_rate,
        logdet_rate=ld,
        r_min_bound=r_min,
        r_max_bound=r_max,
        gershgorin_lo=lo,
        gershgorin_hi=hi,
        sinr=base.sinr,
    )


def main_theorem_check(
    report: RateReport,
    epsilon: float,
    delta: float,
    K: int,
    r: int,
    p_over_sigma2: float,
) -> TheoremCheck:
    """Compare a rate report with the guaranteed sum-rate interval.

    Checks ``R_min <= logdet_rate <= R_max`` and
    ``sum_rate >= (r-1) log2(1 + rho) - epsilon``. When
    ``delta >= 1/(2K)`` the guarantee does not apply and the result has
    ``precondition_ok=False``.
    """
    target = (r - 1) * math.log2(1.0 + p_over_sigma2) - epsilon
    meets = report.sum_rate >= target
    ld = report.logdet_rate if report.logdet_rate is not None else math.nan
    if not 0 < delta < 1 / (2 * K):
        return TheoremCheck(
            False, math.nan, math.nan, ld, False, target, meets, math.nan, math.nan,
            detail=f"delta={delta:g} is not below 1/(2K)={1 / (2 * K):g}",
        )
    r_min, r_max = rate_bounds(delta, K, r, p_over_sigma2)
    slack = 1e-12 * max(1.0, abs(r_max))
    inside = r_min - slack <= ld <= r_max + slack
    return TheoremCheck(
        True, r_min, r_max, ld, inside, target, meets, ld - r_min, r_max - ld,
    )
