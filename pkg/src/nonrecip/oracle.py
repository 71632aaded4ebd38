"""Master-equation route to the susceptibility.

Builds the Lindblad generator over every Zeeman sublevel of g, s and e: the
interaction Hamiltonian for the chosen direction, spontaneous emission from
each excited sublevel with Clebsch-Gordan branching into g and s, and
dephasing that sets the optical and ground coherence decay rates. The weak
probe steady state is solved to first order about the uniformly populated g
manifold, and the susceptibility is assembled from the optical coherences.

This module deliberately shares nothing with the closed-form evaluation in
:mod:`nonrecip.susceptibility` beyond the transition table.
"""

from __future__ import annotations

import warnings

import numpy as np

from .atomic import AtomSpec, TransitionTable, cg_coefficient, coupling_reference, transition_tables
from .errors import DomainError, NumericalError
from .susceptibility import ChiResult, CouplingParams, MediumParams, ProbeParams


class LevelIndex:
    """Maps Zeeman states to basis indices, ordered g, s, e."""

    def __init__(self, atom: AtomSpec):
        self.atom = atom
        self.labels = []
        for man in ("g", "s", "e"):
            for st in atom.sublevels(man):
                self.labels.append((man, st.m))
        self._idx = {lab: k for k, lab in enumerate(self.labels)}
        self.n = len(self.labels)

    def __call__(self, manifold, m):
        return self._idx[(manifold, m)]

    def manifold(self, man):
        return [k for k, lab in enumerate(self.labels) if lab[0] == man]

    def projector(self, man):
        P = np.zeros((self.n, self.n))
        for k in self.manifold(man):
            P[k, k] = 1.0
        return P


def hamiltonian(idx: LevelIndex, table: TransitionTable, rabi_p, rabi_c, delta_p, delta_2):
    """Rotating-frame interaction Hamiltonian (hbar = 1, units of Gamma)."""
    atom = idx.atom
    H = np.zeros((idx.n, idx.n), dtype=complex)
    for link in table.links:
        e, g = idx("e", link.excited.m), idx("g", link.ground.m)
        om = rabi_p * np.sqrt(link.weight)
        H[e, g] += -0.5 * om
        H[g, e] += -0.5 * np.conj(om)
    # sigma+ coupling drives every s_m -> e_{m+1} it can reach
    cref = coupling_reference(atom)
    for st in atom.sublevels("s"):
        m_e = st.m + 1
        if abs(m_e) > atom.F_e:
            continue
        c2 = cg_coefficient(atom.F_s, st.m, 1, 1, atom.F_e, m_e) ** 2
        if c2 == 0.0:
            continue
        om = rabi_c * np.sqrt(c2 / cref)
        e, s = idx("e", m_e), idx("s", st.m)
        H[e, s] += -0.5 * om
        H[s, e] += -0.5 * np.conj(om)
    for k in idx.manifold("e"):
        H[k, k] -= delta_p
    for k in idx.manifold("s"):
        H[k, k] -= delta_2
    return H


def jump_operators(idx: LevelIndex, medium: MediumParams):
    atom = idx.atom
    ops = []
    for man, branch in (("g", atom.branch_to_g), ("s", 1.0 - atom.branch_to_g)):
        F = atom.F(man)
        if branch == 0.0:
            continue
        for q in (-1, 0, 1):
            L = np.zeros((idx.n, idx.n))
            for st in atom.sublevels(man):
                m_e = st.m + q
                if abs(m_e) <= atom.F_e:
                    L[idx(man, st.m), idx("e", m_e)] = cg_coefficient(F, st.m, 1, q, atom.F_e, m_e)
            ops.append(np.sqrt(atom.Gamma * branch) * L)
    radiative = 0.5 * atom.Gamma
    extra = medium.gamma_ge - radiative
    if extra < -1e-12:
        raise DomainError(
            f"gamma_ge={medium.gamma_ge} is below the radiative limit {radiative}; "
            "not representable as a Lindblad model"
        )
    if extra > 0:
        ops.append(np.sqrt(2.0 * extra) * idx.projector("e"))
    if medium.gamma_gs > 0:
        ops.append(np.sqrt(2.0 * medium.gamma_gs) * idx.projector("s"))
    return ops


def liouvillian(H, jumps):
    """Row-major vectorised Lindblad generator: vec(A rho B) = (A kron B.T) vec(rho)."""
    n = H.shape[0]
    eye = np.eye(n)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    for J in jumps:
        JdJ = J.conj().T @ J
        L += np.kron(J, J.conj()) - 0.5 * np.kron(JdJ, eye) - 0.5 * np.kron(eye, JdJ.T)
    return L


def _reachable(L, seed):
    """Smallest coordinate set containing ``seed`` that ``L`` maps into itself."""
    reach = np.zeros(L.shape[0], dtype=bool)
    reach[seed] = True
    while True:
        grown = reach | np.any(np.abs(L[:, reach]) > 0, axis=1)
        if grown.sum() == reach.sum():
            return np.flatnonzero(reach)
        reach = grown


def chi_oracle(direction, probe: ProbeParams, coupling: CouplingParams, medium: MediumParams,
               atom: AtomSpec | None = None, table: TransitionTable | None = None,
               convention: str = "stretched", cond_limit: float = 1e12) -> ChiResult:
    """Susceptibility from the weak-probe steady state of the master equation.

    ``rho = rho0 + rho1`` with ``rho0`` the uniform mixture over g, which is
    stationary without the probe. The first-order part solves
    ``L0 rho1 = -L1 rho0`` on the optical-coherence block, which ``L0`` leaves
    invariant; only coordinates reachable from the probe source enter the
    solve, so undriven, undamped coherences do not make it singular. Then
    ``chi = 2 * sum_i (w_i / Omega_pi) * rho1[e_i, g_i]``.
    """
    atom = atom or AtomSpec()
    if table is None:
        fw, bw = transition_tables(atom, convention)
        table = fw if direction == "forward" else bw
    if table.direction != direction or probe.direction != direction:
        raise DomainError("direction mismatch between probe, table and request")
    rabi_p = probe.rabi_p if probe.rabi_p > 0 else 1e-3
    wmax = max(table.weights)
    if rabi_p**2 * wmax / medium.gamma_ge**2 > 1e-3:
        warnings.warn(
            f"probe Rabi frequency {rabi_p} is not weak; linear response may not hold",
            RuntimeWarning,
            stacklevel=2,
        )
    d2 = probe.delta_2 if probe.delta_2 is not None else probe.delta_p - coupling.delta_c

    idx = LevelIndex(atom)
    n = idx.n
    jumps = jump_operators(idx, medium)
    H0 = hamiltonian(idx, table, 0.0, coupling.rabi_c, probe.delta_p, d2)
    H = hamiltonian(idx, table, rabi_p, coupling.rabi_c, probe.delta_p, d2)
    L0 = liouvillian(H0, jumps)
    L1 = liouvillian(H, jumps) - L0

    rho0 = idx.projector("g") / atom.n_ground
    v0 = rho0.reshape(-1).astype(complex)
    if np.max(np.abs(L0 @ v0)) > 1e-12:
        raise NumericalError("uniform ground mixture is not stationary without the probe")
    src = -(L1 @ v0)

    g = set(idx.manifold("g"))
    coh = np.array([a * n + b for a in range(n) for b in range(n) if (a in g) != (b in g)])
    outside = np.setdiff1d(np.arange(n * n), coh)
    leak = np.max(np.abs(L0[np.ix_(outside, coh)])) if outside.size else 0.0
    if leak > 1e-12 or np.max(np.abs(src[outside])) > 1e-12:
        raise NumericalError(f"optical-coherence block not invariant (leak {leak:.3g})")
    block = _reachable(L0, np.flatnonzero(np.abs(src) > 0))
    A = L0[np.ix_(block, block)]
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > cond_limit:
        raise NumericalError(
            f"steady-state system singular (condition number {cond:.3g}); "
            "check that gamma_ge > 0 and detunings are finite"
        )
    x = np.linalg.solve(A, src[block])
    rho1 = np.zeros(n * n, dtype=complex)
    rho1[block] = x
    rho1 = rho1.reshape(n, n)

    chi = 0j
    for link in table.links:
        if link.weight == 0.0:
            continue
        om = rabi_p * np.sqrt(link.weight)
        chi += 2.0 * link.weight / om * rho1[idx("e", link.excited.m), idx("g", link.ground.m)]
    return ChiResult(complex(chi), direction, probe.delta_p, d2)
