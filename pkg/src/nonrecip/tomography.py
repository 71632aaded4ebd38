"""Qubit state reconstruction from four projective count sets.

Projectors are |H>, |V>, |D> = (|H>+|V>)/sqrt2 and the dual of |R>, namely
(|H>+i|V>)/sqrt2, which registers no counts for |R> = (|H>-i|V>)/sqrt2.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .channel import QubitState, fidelity
from .errors import DomainError

_S = 1 / np.sqrt(2)
PROJECTORS = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([_S, _S], dtype=complex),
    "R": np.array([_S, 1j * _S], dtype=complex),
}
PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class BasisCounts:
    n_H: float
    n_V: float
    n_D: float
    n_R: float

    def __post_init__(self):
        for k, v in self.as_dict().items():
            if v < 0 or not np.isfinite(v):
                raise DomainError(f"count {k} must be finite and non-negative, got {v!r}")

    def as_dict(self):
        return {"H": self.n_H, "V": self.n_V, "D": self.n_D, "R": self.n_R}

    def as_array(self):
        return np.array([self.n_H, self.n_V, self.n_D, self.n_R], dtype=float)


@dataclass(frozen=True)
class ReconResult:
    rho: QubitState
    fidelity_vs_target: float | None = None
    sigma_fidelity: float | None = None
    projected: bool = False


def expected_counts(rho: QubitState, n_total) -> BasisCounts:
    """Noise-free counts; H and V share ``n_total``, D and R each get ``n_total``."""
    if not n_total > 0:
        raise DomainError("n_total must be positive")
    r = rho.rho
    vals = [n_total * float(np.real(v.conj() @ r @ v)) for v in PROJECTORS.values()]
    return BasisCounts(*vals)


def project_psd(rho):
    """Nearest unit-trace PSD matrix in Frobenius norm.

    Hermitian part first, then eigenvalues projected onto the probability simplex.
    """
    h = 0.5 * (np.asarray(rho, dtype=complex) + np.asarray(rho, dtype=complex).conj().T)
    w, v = np.linalg.eigh(h)
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, u.size + 1)
    r = np.flatnonzero(u - css / k > 0)[-1]
    lam = np.clip(w - css[r] / (r + 1), 0.0, None)
    return (v * lam) @ v.conj().T


def stokes_from_counts(counts: BasisCounts):
    n = counts.n_H + counts.n_V
    if n <= 0:
        raise DomainError("n_H + n_V must be positive for reconstruction")
    s3 = (counts.n_H - counts.n_V) / n
    s1 = 2.0 * counts.n_D / n - 1.0
    s2 = 2.0 * counts.n_R / n - 1.0
    return np.array([s1, s2, s3])


def reconstruct(counts: BasisCounts, target: QubitState | None = None) -> ReconResult:
    """Linear Stokes inversion followed by projection onto physical states if needed."""
    s = stokes_from_counts(counts)
    rho = 0.5 * (np.eye(2) + sum(c * p for c, p in zip(s, PAULI)))
    projected = bool(np.linalg.eigvalsh(rho).min() < 0)
    if projected:
        rho = project_psd(rho)
    st = QubitState(rho)
    f = fidelity(st, target) if target is not None else None
    return ReconResult(st, f, None, projected)


def mc_uncertainty(counts: BasisCounts, trials: int, target: QubitState, rng=None, seed=None) -> float:
    """Sample standard deviation of fidelity under Poisson resampling of every count.

    Parameters
    ----------
    counts : BasisCounts
        Observed counts, used as Poisson means.
    trials : int
        Number of resamples; below 100 a warning is issued, and a single trial
        gives 0.
    target : QubitState
        Reference state for the fidelity.
    rng, seed
        A ``numpy.random.Generator`` or a seed for a fresh one.
    """
    if trials < 1:
        raise DomainError("trials must be at least 1")
    if trials < 100:
        warnings.warn(f"only {trials} Monte-Carlo trials", RuntimeWarning, stacklevel=2)
    if trials == 1:
        return 0.0
    rng = rng if rng is not None else np.random.default_rng(seed)
    lam = counts.as_array()
    draws = rng.poisson(lam, size=(trials, 4))
    fids = np.empty(trials)
    for i, d in enumerate(draws):
        c = BasisCounts(*d)
        if c.n_H + c.n_V == 0:
            fids[i] = np.nan
            continue
        fids[i] = reconstruct(c, target).fidelity_vs_target
    fids = fids[np.isfinite(fids)]
    if fids.size < 2:
        return 0.0
    return float(np.std(fids, ddof=1))


def tomography_report(counts: BasisCounts, target: QubitState | None = None, trials=1000, rng=None):
    res = reconstruct(counts, target)
    sigma = None
    if target is not None:
        sigma = mc_uncertainty(counts, trials, target, rng=rng)
    return ReconResult(res.rho, res.fidelity_vs_target, sigma, res.projected)
