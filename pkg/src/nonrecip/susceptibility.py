"""Direction-dependent susceptibility, transmission and contrast metrics.

Susceptibilities are kept in absorption-normalised units: the intensity
transmission through a medium of optical depth ``od`` is

    T = exp(-od * gamma_ge * Im(chi))

so a bare two-level resonance with unit relative dipole has
``chi = -1 / (delta_p + 1j*gamma_ge)`` and ``T = exp(-od)`` on resonance.
All rates are in units of Gamma.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .atomic import DIRECTIONS, AtomSpec, transition_tables
from .errors import CalibrationError, DomainError


@dataclass(frozen=True)
class ProbeParams:
    delta_p: float = 0.0
    direction: str = "forward"
    rabi_p: float = 0.0
    delta_2: float | None = None  # defaults to delta_p - coupling.delta_c

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise DomainError(f"direction must be one of {DIRECTIONS}")
        if self.rabi_p < 0:
            raise DomainError("rabi_p must be non-negative")


@dataclass(frozen=True)
class CouplingParams:
    rabi_c: float = 2.5
    delta_c: float = 0.0

    def __post_init__(self):
        if self.rabi_c < 0:
            raise DomainError("rabi_c must be non-negative")


@dataclass(frozen=True)
class MediumParams:
    od: float = 19.0
    gamma_ge: float = 0.5
    gamma_gs: float = 0.0

    def __post_init__(self):
        if self.od < 0:
            raise DomainError("od must be non-negative")
        if not self.gamma_ge > 0:
            raise DomainError("gamma_ge must be positive")
        if self.gamma_gs < 0:
            raise DomainError("gamma_gs must be non-negative")


@dataclass(frozen=True)
class ChiResult:
    chi: complex
    direction: str
    delta_p: float = 0.0
    delta_2: float = 0.0


@dataclass
class SpectrumTable:
    direction: str
    delta_p: np.ndarray
    transmission: np.ndarray
    chi: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.delta_p) <= 0):
            raise DomainError("detuning grid must be strictly increasing")

    @property
    def rows(self):
        return list(zip(self.delta_p.tolist(), self.transmission.tolist(), self.chi.tolist()))


@dataclass
class ODScanTable:
    od: np.ndarray
    T_fw: np.ndarray
    T_bw: np.ndarray
    eta: np.ndarray = field(init=False)

    def __post_init__(self):
        self.eta = (self.T_fw - self.T_bw) / (self.T_fw + self.T_bw)


def _default_table(direction, table=None, convention="stretched"):
    if table is not None:
        if table.direction != direction:
            raise DomainError(
                f"transition table is for {table.direction!r}, expected {direction!r}"
            )
        return table
    fw, bw = transition_tables(AtomSpec(), convention)
    return fw if direction == "forward" else bw


def chi_links(table, delta_p, delta_2, rabi_c, gamma_ge, gamma_gs):
    """Population-weighted sum of per-link susceptibilities (vectorised).

    Paired links contribute the lambda-EIT form, orphans the bare two-level
    Lorentzian. ``delta_p`` and ``delta_2`` broadcast against each other.
    """
    dp = np.asarray(delta_p, dtype=float)
    d2 = np.asarray(delta_2, dtype=float)
    one = dp + 1j * gamma_ge
    two = d2 + 1j * gamma_gs
    chi = np.zeros(np.broadcast(dp, d2).shape, dtype=complex)
    for link in table.links:
        oc2 = 0.0 if link.is_orphan else rabi_c**2 * link.coupling_weight
        if oc2 == 0.0:
            chi = chi - link.weight / one
        else:
            chi = chi + 4.0 * link.weight * two / (oc2 - 4.0 * two * one)
    return chi * table.population


def _chi(direction, probe, coupling, medium, table):
    if probe.direction != direction:
        raise DomainError(f"probe direction is {probe.direction!r}, expected {direction!r}")
    table = _default_table(direction, table)
    d2 = probe.delta_2 if probe.delta_2 is not None else probe.delta_p - coupling.delta_c
    chi = chi_links(table, probe.delta_p, d2, coupling.rabi_c, medium.gamma_ge, medium.gamma_gs)
    return ChiResult(complex(chi), direction, probe.delta_p, d2)


def chi_forward(probe, coupling, medium, table=None) -> ChiResult:
    """Closed-form forward (sigma+) susceptibility: every probe link is EIT-paired."""
    return _chi("forward", probe, coupling, medium, table)


def chi_backward(probe, coupling, medium, table=None) -> ChiResult:
    """Closed-form backward (sigma-) susceptibility.

    Paired links give EIT terms; the orphan ``g-2 -> e-3`` adds
    ``-w / (delta_p + 1j*gamma_ge)``, whose imaginary part is positive.
    """
    return _chi("backward", probe, coupling, medium, table)


def chi(probe, coupling, medium, table=None) -> ChiResult:
    if probe.direction == "forward":
        return chi_forward(probe, coupling, medium, table)
    return chi_backward(probe, coupling, medium, table)


def transmission(chi, medium):
    """Intensity transmission ``exp(-od * gamma_ge * Im chi)``; accepts arrays."""
    c = chi.chi if isinstance(chi, ChiResult) else chi
    return np.exp(-medium.od * medium.gamma_ge * np.imag(c))


def amplitude(chi, medium):
    """Complex field transmission, the square root of :func:`transmission` with phase."""
    c = chi.chi if isinstance(chi, ChiResult) else chi
    return np.exp(0.5j * medium.od * medium.gamma_ge * np.asarray(c))


def _dir_chi(direction, delta_p, coupling, medium, table):
    table = _default_table(direction, table)
    dp = np.asarray(delta_p, dtype=float)
    return chi_links(
        table, dp, dp - coupling.delta_c, coupling.rabi_c, medium.gamma_ge, medium.gamma_gs
    )


def resonant_transmission(direction, coupling, medium, table=None) -> float:
    return float(transmission(_dir_chi(direction, 0.0, coupling, medium, table), medium))


def scan_spectrum(direction, delta_grid, coupling, medium, table=None) -> SpectrumTable:
    grid = np.asarray(delta_grid, dtype=float)
    c = _dir_chi(direction, grid, coupling, medium, table)
    return SpectrumTable(direction, grid, transmission(c, medium), c)


def scan_od(od_grid, coupling, medium, tables=None, pulse=None) -> ODScanTable:
    """Forward/backward transmissions and contrast versus optical depth.

    With ``pulse`` (complex envelope ``amp`` sampled at spacing ``dt``, any
    object with ``amp`` and ``dt`` attributes), transmissions are
    pulse-integrated energy ratios instead of resonant values.
    """
    fw, bw = tables if tables is not None else transition_tables()
    ods = np.asarray(od_grid, dtype=float)
    if np.any(ods < 0):
        raise DomainError("od grid must be non-negative")
    T_fw, T_bw = np.empty_like(ods), np.empty_like(ods)
    for k, od in enumerate(ods):
        m = MediumParams(od, medium.gamma_ge, medium.gamma_gs)
        if pulse is None:
            T_fw[k] = resonant_transmission("forward", coupling, m, fw)
            T_bw[k] = resonant_transmission("backward", coupling, m, bw)
        else:
            T_fw[k] = pulse_transmission(pulse.amp, pulse.dt, "forward", coupling, m, fw)
            T_bw[k] = pulse_transmission(pulse.amp, pulse.dt, "backward", coupling, m, bw)
    return ODScanTable(ods, T_fw, T_bw)


def spectral_detunings(n, dt, delta_p=0.0):
    """Probe detuning of each FFT bin for an envelope sampled at spacing ``dt``.

    A component ``exp(-1j*nu*t)`` of the envelope sits at detuning
    ``delta_p + nu``; numpy's FFT bin ``f`` carries ``exp(+2j*pi*f*t)``.
    """
    return delta_p - 2.0 * np.pi * np.fft.fftfreq(n, dt)


def propagate_envelope(amp, dt, direction, coupling, medium, table=None, delta_p=0.0):
    """Linear propagation of a complex envelope through the medium.

    Each spectral component is multiplied by :func:`amplitude` at its own
    detuning; the coupling field is constant.
    """
    amp = np.asarray(amp, dtype=complex)
    nu = spectral_detunings(amp.size, dt, delta_p)
    t = amplitude(_dir_chi(direction, nu, coupling, medium, table), medium)
    return np.fft.ifft(np.fft.fft(amp) * t)


def pulse_transmission(amp, dt, direction, coupling, medium, table=None, delta_p=0.0) -> float:
    amp = np.asarray(amp, dtype=complex)
    power = np.abs(np.fft.fft(amp)) ** 2
    if power.sum() <= 0:
        raise DomainError("pulse has zero energy")
    nu = spectral_detunings(amp.size, dt, delta_p)
    T = transmission(_dir_chi(direction, nu, coupling, medium, table), medium)
    return float(np.sum(power * T) / np.sum(power))


def group_delay(coupling, medium, table=None, direction="forward", h=1e-5) -> float:
    """Slow-light delay ``d(phase)/d(delta)`` at resonance, in units of 1/Gamma.

    For a single link with ``gamma_gs = 0`` this is ``2 * od * gamma_ge * w / Omega_c^2``.
    """
    c = _dir_chi(direction, np.array([-h, h]), coupling, medium, table)
    return float(0.5 * medium.od * medium.gamma_ge * (c[1].real - c[0].real) / (2 * h))


def contrast_eta(cc_fw, cc_bw) -> float:
    """``(cc_fw - cc_bw) / (cc_fw + cc_bw)``."""
    if cc_fw < 0 or cc_bw < 0:
        raise DomainError("counts must be non-negative")
    total = cc_fw + cc_bw
    if total <= 0:
        raise DomainError("contrast undefined when both counts are zero")
    return (cc_fw - cc_bw) / total


def isolation_db(cc_in, cc_bw) -> float:
    """``10 log10(cc_in / cc_bw)``; returns ``inf`` with a warning if ``cc_bw == 0``."""
    if cc_in <= 0:
        raise DomainError("input counts must be positive")
    if cc_bw < 0:
        raise DomainError("counts must be non-negative")
    if cc_bw == 0:
        warnings.warn("no backward counts: isolation unbounded", RuntimeWarning, stacklevel=2)
        return math.inf
    return 10.0 * math.log10(cc_in / cc_bw)


def calibrate_gamma_gs(
    target_T_fw=0.929,
    od=19.0,
    rabi_c=2.5,
    gamma_ge=0.5,
    table=None,
    upper=1.0,
) -> float:
    """Ground-coherence dephasing giving the target resonant forward transmission.

    Raises
    ------
    CalibrationError
        If no root exists in ``(0, upper)``.
    """
    if not 0.0 < target_T_fw <= 1.0:
        raise DomainError("target transmission must lie in (0, 1]")
    table = _default_table("forward", table)
    coupling = CouplingParams(rabi_c)

    def T(g):
        return resonant_transmission("forward", coupling, MediumParams(od, gamma_ge, g), table)

    if target_T_fw == 1.0 or T(0.0) <= target_T_fw:
        if math.isclose(T(0.0), target_T_fw, rel_tol=0, abs_tol=1e-15):
            return 0.0
        if target_T_fw == 1.0:
            raise CalibrationError(f"T(gamma_gs=0) = {T(0.0):.6g} < 1; target unreachable")
        raise CalibrationError(f"target {target_T_fw} above T(gamma_gs=0) = {T(0.0):.6g}")
    if T(upper) > target_T_fw:
        raise CalibrationError(f"no root in (0, {upper}): T({upper}) = {T(upper):.6g}")
    return brentq(lambda g: T(g) - target_T_fw, 0.0, upper, xtol=1e-15, rtol=1e-14)
