"""Multi-user line-of-sight scenarios: directions, powers and noise."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from .array_model import check_direction

DEFAULT_SEPARATION_TOL = 1e-3
MAX_REDRAWS = 100


class ScenarioError(ValueError):
    """Raised for inconsistent scenarios or when generation cannot succeed."""


@dataclass(frozen=True)
class Scenario:
    """Desired users and interferers seen by the base station.

    Directions are in radians. Sources are ordered desired-first everywhere
    in the package, so source ``k < num_desired`` is desired user ``k``.
    """

    desired: tuple[float, ...]
    interferers: tuple[float, ...] = ()
    power_desired: float = 1.0
    powers_interf: tuple[float, ...] = ()
    noise_var: float = 1.0
    _directions: np.ndarray = field(init=False, repr=False, compare=False)
    _powers: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        desired = tuple(check_direction(t) for t in self.desired)
        interferers = tuple(check_direction(t) for t in self.interferers)
        powers_interf = tuple(float(p) for p in self.powers_interf)
        if not desired:
            raise ScenarioError("a scenario needs at least one desired user")
        if len(powers_interf) != len(interferers):
            raise ScenarioError(
                f"{len(interferers)} interferers but {len(powers_interf)} interferer powers"
            )
        if not self.power_desired > 0 or any(not p > 0 for p in powers_interf):
            raise ScenarioError("all powers must be positive")
        if not self.noise_var > 0:
            raise ScenarioError("noise_var must be positive")
        object.__setattr__(self, "desired", desired)
        object.__setattr__(self, "interferers", interferers)
        object.__setattr__(self, "powers_interf", powers_interf)
        object.__setattr__(self, "power_desired", float(self.power_desired))
        object.__setattr__(self, "noise_var", float(self.noise_var))
        directions = np.array(desired + interferers)
        powers = np.array((self.power_desired,) * len(desired) + powers_interf)
        directions.flags.writeable = False
        powers.flags.writeable = False
        object.__setattr__(self, "_directions", directions)
        object.__setattr__(self, "_powers", powers)

    @property
    def num_desired(self) -> int:
        return len(self.desired)

    @property
    def num_sources(self) -> int:
        """Total number of transmitters ``K``."""
        return len(self.desired) + len(self.interferers)

    @property
    def directions(self) -> np.ndarray:
        return self._directions

    @property
    def powers(self) -> np.ndarray:
        return self._powers

    @property
    def snr(self) -> float:
        """Desired power over noise variance, ``P / sigma^2``."""
        return self.power_desired / self.noise_var

    def to_dict(self) -> dict:
        return {
            "desired_deg": [float(np.degrees(t)) for t in self.desired],
            "interferers_deg": [float(np.degrees(t)) for t in self.interferers],
            "power_desired": self.power_desired,
            "powers_interf": list(self.powers_interf),
            "noise_var": self.noise_var,
        }

    @classmethod
    def from_dict(cls, data: dict) -> Scenario:
        try:
            return cls(
                desired=tuple(np.radians(data["desired_deg"])),
                interferers=tuple(np.radians(data.get("interferers_deg", []))),
                power_desired=data.get("power_desired", 1.0),
                powers_interf=tuple(data.get("powers_interf", [])),
                noise_var=data["noise_var"],
            )
        except KeyError as exc:
            raise ScenarioError(f"scenario document is missing key {exc.args[0]!r}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> Scenario:
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> Scenario:
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class Violation:
    """A pair of sources whose cosines are too close to tell apart."""

    first: int
    second: int
    cos_gap: float


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()
    problems: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations and not self.problems


def validate(
    s: Scenario,
    separation_tol: float = DEFAULT_SEPARATION_TOL,
    power_max: float | None = None,
) -> ValidationReport:
    """Check a scenario against the nulling preconditions.

    Rational independence of the direction cosines cannot be observed in
    floating point; a minimum gap between every pair of cosines stands in
    for it. Every offending pair is reported, indices follow the
    desired-first source order.
    """
    cosines = np.cos(s.directions)
    violations = []
    for i, j in combinations(range(s.num_sources), 2):
        gap = abs(cosines[i] - cosines[j])
        if gap <= separation_tol:
            violations.append(Violation(i, j, float(gap)))
    problems = []
    if power_max is not None:
        for k, p in enumerate(s.powers):
            if p > power_max:
                problems.append(f"source {k} power {p:g} exceeds bound {power_max:g}")
    return ValidationReport(tuple(violations), tuple(problems))


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Independent PCG64 stream for one trial.

    The stream is keyed by ``(seed, trial_index)`` through numpy's
    SeedSequence spawn key, so trials can be generated in any order or in
    parallel.
    """
    if seed < 0 or trial_index < 0:
        raise ValueError("seed and trial_index must be non-negative")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(trial_index),))
    return np.random.Generator(np.random.PCG64(ss))


def random_scenario(
    seed: int,
    trial_index: int,
    r: int,
    K: int,
    snr_db: float,
    sir_db: float,
    separation_tol: float = DEFAULT_SEPARATION_TOL,
    max_redraws: int = MAX_REDRAWS,
) -> Scenario:
    """Draw a scenario with ``r - 1`` desired users and ``K - r + 1`` interferers.

    All ``K`` directions are i.i.d. uniform on (0, pi). The desired power is
    1, ``noise_var = 10**(-snr_db/10)`` and the total interference power
    ``10**(-sir_db/10)`` is split equally between interferers. Draws that
    fail :func:`validate` are rejected and redrawn from the same stream.
    """
    if r < 2 or K < r - 1:
        raise ScenarioError(f"need r >= 2 and K >= r - 1, got r={r}, K={K}")
    num_desired = r - 1
    num_interf = K - num_desired
    noise_var = 10.0 ** (-snr_db / 10.0)
    if num_interf:
        each = 10.0 ** (-sir_db / 10.0) / num_interf
        powers_interf = (each,) * num_interf
    else:
        powers_interf = ()

    rng = trial_rng(seed, trial_index)
    for _ in range(max_redraws):
        thetas = rng.uniform(0.0, np.pi, size=K)
        if np.any(thetas <= 0.0):
            continue
        s = Scenario(
            desired=tuple(thetas[:num_desired]),
            interferers=tuple(thetas[num_desired:]),
            power_desired=1.0,
            powers_interf=powers_interf,
            noise_var=noise_var,
        )
        if validate(s, separation_tol).ok:
            return s
    raise ScenarioError(
        f"no valid scenario after {max_redraws} draws (separation_tol={separation_tol:g})"
    )
