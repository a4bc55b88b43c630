"""Antenna selection and interference nulling for line-of-sight MU-MIMO.

A uniform linear array of many antennas is digitized through only ``r``
receive chains. Choosing a reference antenna plus one well-spaced companion
per desired user yields sparse (ambiguous) beamformers whose grating nulls
can be placed on any number of interferers.
"""

from .array_model import ArrayConfig, beam_gain, beampattern, steering_vector
from .beamforming import (
    Beamformer,
    covariance_beamformer,
    interference_covariance,
    sinr,
    two_element,
)
from .metrics import (
    EffectiveChannel,
    RateReport,
    effective_channel,
    gershgorin_bounds,
    logdet_rate,
    main_theorem_check,
    per_user_rates,
)
from .scenario import Scenario, random_scenario, validate
from .selection import (
    SearchOutcome,
    SelectionError,
    SelectionSet,
    build_selection,
    ergodic_search,
    exhaustive_oracle,
    pairwise_select,
)

__version__ = "0.1.0"

__all__ = [
    "ArrayConfig",
    "Beamformer",
    "EffectiveChannel",
    "RateReport",
    "Scenario",
    "SearchOutcome",
    "SelectionError",
    "SelectionSet",
    "beam_gain",
    "beampattern",
    "build_selection",
    "covariance_beamformer",
    "effective_channel",
    "ergodic_search",
    "exhaustive_oracle",
    "gershgorin_bounds",
    "interference_covariance",
    "logdet_rate",
    "main_theorem_check",
    "pairwise_select",
    "per_user_rates",
    "random_scenario",
    "sinr",
    "steering_vector",
    "two_element",
    "validate",
]
