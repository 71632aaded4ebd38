"""Single-photon non-reciprocity in a Zeeman-resolved cold-atom EIT medium.

Rates are in units of the excited-state decay rate Gamma, times in 1/Gamma.
"""

from .atomic import AtomSpec, cg_weight, transition_tables
from .channel import QubitState, fidelity, nraq_apply, transmission_rate
from .errors import CalibrationError, ConfigError, DomainError, GridError, NumericalError
from .storage import make_pulse, make_timeline, simulate_eit_storage, storage_efficiency
from .susceptibility import (
    CouplingParams,
    MediumParams,
    ProbeParams,
    calibrate_gamma_gs,
    chi_backward,
    chi_forward,
    contrast_eta,
    isolation_db,
    scan_od,
    scan_spectrum,
    transmission,
)
from .tomography import BasisCounts, expected_counts, mc_uncertainty, reconstruct

__version__ = "0.1.0"

__all__ = [
    "AtomSpec", "BasisCounts", "CalibrationError", "ConfigError", "CouplingParams", "DomainError",
    "GridError", "MediumParams", "NumericalError", "ProbeParams", "QubitState",
    "calibrate_gamma_gs", "cg_weight", "chi_backward", "chi_forward", "contrast_eta",
    "expected_counts", "fidelity", "isolation_db", "make_pulse", "make_timeline", "mc_uncertainty",
    "nraq_apply", "reconstruct", "scan_od", "scan_spectrum", "simulate_eit_storage",
    "storage_efficiency", "transition_tables", "transmission", "transmission_rate",
]
