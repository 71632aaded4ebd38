"""Dual-rail interferometer around the atomic cloud as a channel on polarization qubits.

The H component travels the L rail and the V component the R rail. Both rails
are converted to the same circular polarization before the cloud, so in the
ideal apparatus they pick up the same complex amplitude and the channel is a
scalar times a relative phase.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .susceptibility import CouplingParams, MediumParams, _dir_chi, amplitude

TRACE_TOL = 1e-12
EIG_TOL = 1e-10


@dataclass(frozen=True)
class QubitState:
    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.shape != (2, 2):
            raise DomainError("density matrix must be 2x2")
        if not np.allclose(rho, rho.conj().T, atol=1e-12, rtol=0):
            raise DomainError("density matrix must be Hermitian")
        if abs(np.trace(rho).real - 1.0) > TRACE_TOL:
            raise DomainError(f"trace {np.trace(rho).real!r} differs from 1")
        if np.linalg.eigvalsh(rho).min() < -EIG_TOL:
            raise DomainError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "rho", rho)

    @classmethod
    def from_ket(cls, ket):
        v = np.asarray(ket, dtype=complex)
        n = np.linalg.norm(v)
        if v.shape != (2,) or n == 0:
            raise DomainError("ket must be a non-zero 2-vector")
        v = v / n
        return cls(np.outer(v, v.conj()))

    @classmethod
    def from_angles(cls, theta, phi):
        """``cos(theta/2)|H> + exp(i phi) sin(theta/2)|V>``."""
        return cls.from_ket([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])

    @classmethod
    def named(cls, name: str):
        try:
            return cls.from_ket(NAMED_KETS[name.upper()])
        except KeyError:
            raise DomainError(f"unknown state {name!r}; choose from {sorted(NAMED_KETS)}") from None

    @property
    def stokes(self):
        r = self.rho
        return np.array([2 * r[0, 1].real, -2 * r[0, 1].imag, (r[0, 0] - r[1, 1]).real])


_S = 1 / math.sqrt(2)
NAMED_KETS = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([_S, _S], dtype=complex),
    "A": np.array([_S, -_S], dtype=complex),
    "R": np.array([_S, -1j * _S], dtype=complex),
    "L": np.array([_S, 1j * _S], dtype=complex),
}


@dataclass(frozen=True)
class ChannelResult:
    transmission: float
    rho_out: QubitState | None
    raw_amplitudes: tuple[complex, complex]
    isolated: bool = False


def rail_operator(direction, coupling: CouplingParams, medium: MediumParams, phase_LR=0.0,
                  rail_loss=(1.0, 1.0), table=None, delta_p=0.0):
    """Kraus operator ``diag(t_L, t_R exp(i phase_LR))`` in the {H, V} basis."""
    chi = _dir_chi(direction, delta_p, coupling, medium, table)
    t = complex(amplitude(chi, medium))
    tl = t * rail_loss[0]
    tr = t * rail_loss[1] * np.exp(1j * phase_LR)
    return np.diag([tl, tr]), (tl, tr)


def nraq_apply(
    state: QubitState,
    direction: str,
    coupling: CouplingParams | None = None,
    medium: MediumParams | None = None,
    phase_LR: float = 0.0,
    rail_loss=(1.0, 1.0),
    table=None,
    delta_p: float = 0.0,
) -> ChannelResult:
    """Send ``state`` through the interferometer in ``direction``.

    ``rail_loss`` gives real per-rail amplitude factors for optics losses and
    imbalance. On total absorption the result is flagged ``isolated`` and
    ``rho_out`` is ``None``.
    """
    coupling = coupling or CouplingParams()
    medium = medium or MediumParams()
    for a in rail_loss:
        if not 0.0 <= a <= 1.0:
            raise DomainError("rail amplitude factors must lie in [0, 1]")
    K, amps = rail_operator(direction, coupling, medium, phase_LR, rail_loss, table, delta_p)
    out = K @ state.rho @ K.conj().T
    tr = float(np.trace(out).real)
    if tr <= 1e-300:
        return ChannelResult(0.0, None, amps, isolated=True)
    out = out / tr
    out = 0.5 * (out + out.conj().T)
    return ChannelResult(tr, QubitState(out), amps)


def fidelity(rho, rho_ideal) -> float:
    """Uhlmann fidelity ``Tr(sqrt(sqrt(rho) sigma sqrt(rho)))**2``.

    For qubits this equals ``Tr(rho sigma) + 2 sqrt(det rho det sigma)``, which
    avoids square roots of near-zero eigenvalues. Accepts :class:`QubitState`
    or raw matrices; raw matrices are validated.
    """
    a = rho if isinstance(rho, QubitState) else QubitState(rho)
    b = rho_ideal if isinstance(rho_ideal, QubitState) else QubitState(rho_ideal)
    overlap = float(np.real(np.trace(a.rho @ b.rho)))
    dets = max(float(np.linalg.det(a.rho).real), 0.0) * max(float(np.linalg.det(b.rho).real), 0.0)
    f = overlap + 2.0 * math.sqrt(dets)
    return min(max(f, 0.0), 1.0)


def transmission_rate(cc_fw, cc_in) -> float:
    """``cc_fw / cc_in``; a ratio above 1 is returned as is with a warning."""
    if cc_in <= 0:
        raise DomainError("input counts must be positive")
    if cc_fw < 0:
        raise DomainError("counts must be non-negative")
    r = cc_fw / cc_in
    if r > 1.0:
        warnings.warn(f"transmission {r:.4g} exceeds 1 (counting fluctuation)", RuntimeWarning,
                      stacklevel=2)
    return r
