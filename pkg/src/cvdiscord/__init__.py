"""Gaussian and non-Gaussian quantum discord for two-mode Gaussian states.

Covers squeezed thermal states (STS) and mixed thermal states (MTS), with
local measurements on mode B in the number, squeezed-number and
displaced-number bases, compared against the optimal Gaussian (heterodyne)
measurement.
"""

from .covariance import (
    MeasurementCM,
    StandardFormCM,
    SymplecticData,
    TwoModeState,
    gaussian_discord,
    gaussian_geometric_discord,
    h_entropy,
    mutual_information,
    standard_form,
    symplectic_data,
)
from .fock import FockCutoff, FockMatrix, MeasurementBasis, choose_cutoff
from .measurement import (
    ConditionalEnsemble,
    DiscordResult,
    conditional_states,
    non_gaussian_discord,
    non_gaussian_geometric_discord,
)

__version__ = "0.1.0"

__all__ = [
    "ConditionalEnsemble",
    "DiscordResult",
    "FockCutoff",
    "FockMatrix",
    "MeasurementBasis",
    "MeasurementCM",
    "StandardFormCM",
    "SymplecticData",
    "TwoModeState",
    "choose_cutoff",
    "conditional_states",
    "gaussian_discord",
    "gaussian_geometric_discord",
    "h_entropy",
    "mutual_information",
    "non_gaussian_discord",
    "non_gaussian_geometric_discord",
    "standard_form",
    "symplectic_data",
]
