"""Choosing which antennas feed the receive chains."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, islice

import numpy as np

from .array_model import ArrayConfig, phase_cycles
from .beamforming import mvdr_sinr_batch
from .scenario import Scenario

DEFAULT_N_MAX = 100_000
ENUMERATION_CAP = 1_000_000
# relative slack under which two scores count as tied (smaller index wins)
TIE_RTOL = 1e-12

_FIRST_CHUNK = 4096
_MAX_CHUNK = 1 << 16


class SelectionError(RuntimeError):
    """Raised when no admissible antenna set exists for the request."""


@dataclass(frozen=True)
class SelectionSet:
    """Reference antenna plus one companion per desired user."""

    reference: int
    companions: tuple[int, ...]

    def __post_init__(self):
        companions = tuple(int(n) for n in self.companions)
        object.__setattr__(self, "companions", companions)
        object.__setattr__(self, "reference", int(self.reference))
        indices = (self.reference,) + companions
        if min(indices) < 0:
            raise ValueError("antenna indices must be non-negative")
        if len(set(indices)) != len(indices):
            raise ValueError(f"selection indices must be distinct, got {indices}")

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted((self.reference,) + self.companions))

    @property
    def size(self) -> int:
        return 1 + len(self.companions)

    def check_within(self, limit: int) -> None:
        if max(self.support) >= limit:
            raise ValueError(f"selection {self.support} exceeds antenna range 0..{limit - 1}")

    def to_dict(self) -> dict:
        return {"reference": self.reference, "companions": list(self.companions)}


@dataclass(frozen=True)
class SearchOutcome:
    """Result of scanning companion spacings for one desired user.

    ``achieved_delta`` is the worst violation of the nulling design: the
    largest gain toward any other source or the shortfall of the desired
    gain below 1, whichever is larger. ``displaced_from`` records the
    companion the user originally wanted when another user already held it.
    """

    companion: int
    achieved_delta: float
    satisfied: bool
    displaced_from: int | None = None

    def to_dict(self) -> dict:
        out = {
            "companion": self.companion,
            "achieved_delta": self.achieved_delta,
            "satisfied": self.satisfied,
        }
        if self.displaced_from is not None:
            out["displaced_from"] = self.displaced_from
        return out


def _violation(cycles: np.ndarray, desired_index: int) -> np.ndarray:
    # cycles: (m, K) fractional phases of antenna n toward every source.
    # g = 1 + cos(2*pi*f) = 1 - cos(2*pi*|f - 1/2|) grows with |f - 1/2|,
    # so the worst leakage is found before taking any cosine.
    shortfall = -np.cos(2 * np.pi * cycles[:, desired_index])
    if cycles.shape[1] == 1:
        return shortfall
    offset = np.abs(np.delete(cycles, desired_index, axis=1) - 0.5).max(axis=1)
    leakage = 1.0 - np.cos(2 * np.pi * offset)
    return np.maximum(leakage, shortfall)


def achieved_delta(cfg: ArrayConfig, s: Scenario, desired_index: int, n: int) -> float:
    """Nulling violation of the two-element beamformer on ``{0, n}``."""
    cycles = phase_cycles(np.array([n]), cfg.spacing, s.directions)
    return float(_violation(cycles, desired_index)[0])


def ergodic_search(
    cfg: ArrayConfig,
    s: Scenario,
    desired_index: int,
    delta: float,
    n_max: int,
    exclude=(),
) -> SearchOutcome:
    """Find a companion antenna ``n`` that nulls everybody but one user.

    Scans ``n = 1..n_max`` and evaluates ``g_k = 1 + cos(2*pi*d*n*cos(theta_k))``
    for every source. Returns the first ``n`` with ``g_k < delta`` for all
    ``k != desired_index`` and ``g_desired > 1 - delta``; if none exists the
    ``n`` with the smallest violation (first one on ties) is returned with
    ``satisfied=False``. Indices in ``exclude`` are skipped.

    The fractional parts of ``n*d*cos(theta_k)`` are equidistributed when
    the cosines are rationally independent, so the scan succeeds for any
    ``delta`` once ``n_max`` is large enough. The array size is not
    consulted; callers cap ``n_max`` for physical arrays.
    """
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
    if int(n_max) != n_max or n_max < 1:
        raise ValueError(f"n_max must be an integer >= 1, got {n_max!r}")
    if not 0 <= desired_index < s.num_desired:
        raise IndexError(f"desired_index {desired_index} out of range")
    n_max = int(n_max)
    excluded = np.array(sorted({int(n) for n in exclude if 1 <= n <= n_max}), dtype=np.int64)

    best_n, best_v = -1, math.inf
    start, chunk = 1, _FIRST_CHUNK
    while start <= n_max:
        stop = min(start + chunk - 1, n_max)
        n = np.arange(start, stop + 1)
        v = _violation(phase_cycles(n, cfg.spacing, s.directions), desired_index)
        if excluded.size:
            hit = excluded[(excluded >= start) & (excluded <= stop)]
            v[hit - start] = math.inf
        ok = np.flatnonzero(v < delta)
        if ok.size:
            k = ok[0]
            return SearchOutcome(int(n[k]), float(v[k]), True)
        k = int(np.argmin(v))
        if v[k] < best_v:
            best_n, best_v = int(n[k]), float(v[k])
        start = stop + 1
        chunk = min(2 * chunk, _MAX_CHUNK)

    if best_n < 0:
        raise SelectionError(f"every companion in 1..{n_max} is excluded")
    return SearchOutcome(best_n, best_v, False)


def build_selection(
    cfg: ArrayConfig,
    s: Scenario,
    delta: float,
    n_max: int = DEFAULT_N_MAX,
    virtual: bool = False,
) -> tuple[SelectionSet, list[SearchOutcome]]:
    """Common reference antenna 0 plus one ergodic companion per desired user.

    Users are served in order. When a user's best companion is already
    taken, the search is repeated with the taken antennas excluded and the
    original choice is kept in ``displaced_from``. In physical mode the
    scan stops at the last antenna of the array.
    """
    if not virtual:
        n_max = min(int(n_max), cfg.num_antennas - 1)
    taken: list[int] = []
    outcomes = []
    for i in range(s.num_desired):
        out = ergodic_search(cfg, s, i, delta, n_max)
        if out.companion in taken:
            wanted = out.companion
            try:
                out = ergodic_search(cfg, s, i, delta, n_max, exclude=taken)
            except SelectionError:
                raise SelectionError(
                    f"no distinct companion for user {i} within n_max={n_max}"
                ) from None
            out = SearchOutcome(out.companion, out.achieved_delta, out.satisfied, wanted)
        taken.append(out.companion)
        outcomes.append(out)
    return SelectionSet(0, tuple(taken)), outcomes


def _argmax_first(scores: np.ndarray) -> int:
    top = scores.max()
    return int(np.flatnonzero(scores >= top - TIE_RTOL * abs(top))[0])


def pairwise_select(
    cfg: ArrayConfig,
    s: Scenario,
    desired_index: int,
    candidate_limit: int,
    exclude=(),
) -> tuple[int, float]:
    """Best companion for one user when only the pair ``{0, n}`` is combined.

    Each candidate ``n = 1..candidate_limit`` gets its SINR-optimal weights
    on ``{0, n}``; the candidate with the largest SINR is returned, scores
    within a relative ``1e-12`` of the best count as ties and go to the
    smaller ``n``.
    """
    if int(candidate_limit) != candidate_limit or not 1 <= candidate_limit <= cfg.num_antennas - 1:
        raise ValueError(
            f"candidate_limit must be in 1..{cfg.num_antennas - 1}, got {candidate_limit!r}"
        )
    candidates = np.arange(1, int(candidate_limit) + 1)
    if exclude:
        candidates = candidates[~np.isin(candidates, list(exclude))]
    if candidates.size == 0:
        raise SelectionError("no candidate companions left")
    supports = np.column_stack([np.zeros_like(candidates), candidates])
    scores = mvdr_sinr_batch(cfg, s, supports, desired_index)
    k = _argmax_first(scores)
    return int(candidates[k]), float(scores[k])


def pairwise_selection(
    cfg: ArrayConfig, s: Scenario, candidate_limit: int | None = None
) -> tuple[SelectionSet, list[float]]:
    """Run :func:`pairwise_select` for every desired user with distinct companions.

    Collisions are resolved the same way as in :func:`build_selection`: a
    later user takes its best companion among those still free.
    """
    if candidate_limit is None:
        candidate_limit = cfg.num_antennas - 1
    taken: list[int] = []
    sinrs = []
    for i in range(s.num_desired):
        n, value = pairwise_select(cfg, s, i, candidate_limit, exclude=taken)
        taken.append(n)
        sinrs.append(value)
    return SelectionSet(0, tuple(taken)), sinrs


def exhaustive_oracle(
    cfg: ArrayConfig,
    s: Scenario,
    r: int,
    cap: int = ENUMERATION_CAP,
    batch: int = 20_000,
) -> tuple[SelectionSet, list[float]]:
    """Best ``r``-antenna subset for joint covariance beamforming.

    Enumerates every subset in lexicographic order, scores it by
    ``sum_k log2(1 + SINR_k)`` with each desired user's optimal weights on
    that subset and keeps the first best one. The smallest index of the
    winning subset is reported as the reference.
    """
    total = math.comb(cfg.num_antennas, r)
    if total > cap:
        raise SelectionError(f"C({cfg.num_antennas}, {r}) = {total} subsets exceeds cap {cap}")
    if r < 1:
        raise ValueError("r must be positive")
    best_score, best_subset, best_sinrs = -math.inf, None, None
    it = combinations(range(cfg.num_antennas), r)
    while True:
        block = np.array(list(islice(it, batch)), dtype=np.int64)
        if block.size == 0:
            break
        per_user = np.stack(
            [mvdr_sinr_batch(cfg, s, block, i) for i in range(s.num_desired)], axis=1
        )
        scores = np.log2(1.0 + per_user).sum(axis=1)
        k = _argmax_first(scores)
        if best_subset is None or scores[k] > best_score + TIE_RTOL * abs(best_score):
            best_score, best_subset, best_sinrs = scores[k], block[k], per_user[k]
    sel = SelectionSet(int(best_subset[0]), tuple(int(n) for n in best_subset[1:]))
    return sel, [float(x) for x in best_sinrs]

