"""Zeeman-resolved level structure and direction-dependent transition tables.

The probe couples ``|g, m> -> |e, m + q>`` with ``q = +1`` (sigma+, forward
propagation) or ``q = -1`` (sigma-, backward propagation). The coupling laser
is always sigma+ on ``|s, m> -> |e, m + 1>``. A probe link whose excited state
has no coupling partner is an *orphan*: it sees bare two-level absorption.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

from .errors import DomainError

Direction = Literal["forward", "backward"]
DIRECTIONS = ("forward", "backward")

# Fraction of F'=3 spontaneous decay into F=2 on the 85Rb D1 line (6j factor).
RB85_D1_BRANCH_TO_G = 5.0 / 9.0


@dataclass(frozen=True)
class AtomSpec:
    F_g: int = 2
    F_s: int = 3
    F_e: int = 3
    Gamma: float = 1.0
    branch_to_g: float = RB85_D1_BRANCH_TO_G

    def __post_init__(self):
        for name in ("F_g", "F_s", "F_e"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise DomainError(f"{name} must be a non-negative integer, got {v!r}")
        if not self.Gamma > 0:
            raise DomainError(f"Gamma must be positive, got {self.Gamma!r}")
        if not 0.0 <= self.branch_to_g <= 1.0:
            raise DomainError("branch_to_g must lie in [0, 1]")

    def F(self, manifold: str) -> int:
        return {"g": self.F_g, "s": self.F_s, "e": self.F_e}[manifold]

    def sublevels(self, manifold: str) -> list[ZeemanState]:
        F = self.F(manifold)
        return [ZeemanState(manifold, m) for m in range(-F, F + 1)]

    @property
    def n_ground(self) -> int:
        return 2 * self.F_g + 1


@dataclass(frozen=True, order=True)
class ZeemanState:
    manifold: str
    m: int

    def __post_init__(self):
        if self.manifold not in ("g", "s", "e"):
            raise DomainError(f"unknown manifold {self.manifold!r}")

    def __str__(self):
        return f"{self.manifold}{self.m:+d}"


@dataclass(frozen=True)
class ProbeLink:
    """One probe transition plus its coupling-laser partner, if any.

    ``weight`` is the squared relative probe dipole; ``coupling_weight`` is the
    squared coupling Rabi frequency of the partner link in units of the
    effective coupling Rabi frequency squared (0 for orphans).
    """

    ground: ZeemanState
    excited: ZeemanState
    q: int
    weight: float
    partner: ZeemanState | None = None
    coupling_weight: float = 0.0

    @property
    def is_orphan(self) -> bool:
        return self.partner is None


@dataclass(frozen=True)
class TransitionTable:
    direction: Direction
    atom: AtomSpec
    links: tuple[ProbeLink, ...]
    normalization: str = "raw"

    @property
    def orphans(self) -> tuple[ProbeLink, ...]:
        return tuple(l for l in self.links if l.is_orphan)

    @property
    def paired(self) -> tuple[ProbeLink, ...]:
        return tuple(l for l in self.links if not l.is_orphan)

    @property
    def weights(self) -> list[float]:
        return [l.weight for l in self.links]

    @property
    def population(self) -> float:
        """Population per ground sublevel (uniform)."""
        return 1.0 / self.atom.n_ground


def _racah_terms(j1, m1, j2, m2, J, M):
    """Squared prefactor and alternating sum of the Racah closed form."""
    if m1 + m2 != M or not (abs(j1 - j2) <= J <= j1 + j2):
        return Fraction(0), Fraction(0)
    f = math.factorial
    pref = Fraction(
        (2 * J + 1) * f(J + j1 - j2) * f(J - j1 + j2) * f(j1 + j2 - J),
        f(j1 + j2 + J + 1),
    ) * (f(J + M) * f(J - M) * f(j1 - m1) * f(j1 + m1) * f(j2 - m2) * f(j2 + m2))
    kmin = max(0, j2 - J - m1, j1 - J + m2)
    kmax = min(j1 + j2 - J, j1 - m1, j2 + m2)
    s = Fraction(0)
    for k in range(kmin, kmax + 1):
        s += Fraction(
            (-1) ** k,
            f(k) * f(j1 + j2 - J - k) * f(j1 - m1 - k) * f(j2 + m2 - k)
            * f(J - j2 + m1 + k) * f(J - j1 - m2 + k),
        )
    return pref, s


def _racah_cg_squared(j1, m1, j2, m2, J, M) -> Fraction:
    pref, s = _racah_terms(j1, m1, j2, m2, J, M)
    return pref * s * s


def cg_coefficient(j1: int, m1: int, j2: int, m2: int, J: int, M: int) -> float:
    """Signed Clebsch-Gordan coefficient ``<j1 m1; j2 m2 | J M>`` (integer spins)."""
    pref, s = _racah_terms(j1, m1, j2, m2, J, M)
    if s == 0:
        return 0.0
    return math.copysign(math.sqrt(pref * s * s), s)


def cg_weight(F_g: int, m_g: int, q: int, F_e: int, m_e: int) -> float:
    """Squared Clebsch-Gordan coefficient ``|<F_g m_g; 1 q | F_e m_e>|^2``.

    Evaluated exactly in rational arithmetic with the Racah sum. Returns 0 when
    ``m_e != m_g + q`` or the triangle rule fails.

    Raises
    ------
    DomainError
        If ``q`` is not in {-1, 0, 1} or a magnetic number exceeds its F.
    """
    for name, v in (("F_g", F_g), ("F_e", F_e), ("m_g", m_g), ("m_e", m_e), ("q", q)):
        if int(v) != v:
            raise DomainError(f"{name} must be an integer, got {v!r}")
    if F_g < 0 or F_e < 0:
        raise DomainError("F must be non-negative")
    if q not in (-1, 0, 1):
        raise DomainError(f"q must be -1, 0 or +1, got {q}")
    if abs(m_g) > F_g or abs(m_e) > F_e:
        raise DomainError(f"|m| exceeds F: m_g={m_g} (F_g={F_g}), m_e={m_e} (F_e={F_e})")
    return float(_racah_cg_squared(int(F_g), int(m_g), 1, int(q), int(F_e), int(m_e)))


def coupling_reference(atom: AtomSpec) -> float:
    """Mean squared coupling CG factor over the forward-paired coupling links.

    The quoted coupling Rabi frequency is taken as the CG-averaged value over
    these links, so ``|Omega_ci|^2 = Omega_c^2 * cg_i / coupling_reference``.
    """
    vals = []
    for m_g in range(-atom.F_g, atom.F_g + 1):
        m_e = m_g + 1
        m_s = m_e - 1
        if abs(m_e) <= atom.F_e and abs(m_s) <= atom.F_s:
            vals.append(cg_weight(atom.F_s, m_s, 1, atom.F_e, m_e))
    vals = [v for v in vals if v > 0]
    if not vals:
        return 1.0
    return sum(vals) / len(vals)


def build_transition_table(atom: AtomSpec, direction: Direction) -> TransitionTable:
    """Probe links for one propagation direction with raw squared CG weights."""
    if direction not in DIRECTIONS:
        raise DomainError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    q = 1 if direction == "forward" else -1
    cref = coupling_reference(atom)
    links = []
    for m_g in range(-atom.F_g, atom.F_g + 1):
        m_e = m_g + q
        if abs(m_e) > atom.F_e:
            continue
        w = cg_weight(atom.F_g, m_g, q, atom.F_e, m_e)
        m_s = m_e - 1  # sigma+ coupling partner
        partner, cw = None, 0.0
        if abs(m_s) <= atom.F_s:
            c = cg_weight(atom.F_s, m_s, 1, atom.F_e, m_e)
            if c > 0:
                partner, cw = ZeemanState("s", m_s), c / cref
        links.append(ProbeLink(ZeemanState("g", m_g), ZeemanState("e", m_e), q, w, partner, cw))
    return TransitionTable(direction, atom, tuple(links))


def normalization_factor(table: TransitionTable, convention: str = "stretched") -> float:
    """Common factor applied to all raw weights of ``table``.

    ``"stretched"``
        Weights relative to the strongest (stretched, cycling) probe dipole, so
        the optical depth refers to that transition.
    ``"average"``
        Population-averaged weight equals one, so a uniformly populated medium
        absorbs like a two-level atom with the effective dipole.
    """
    w = table.weights
    if not w or max(w) <= 0.0:
        raise DomainError("cannot normalise an all-zero transition table")
    if convention == "stretched":
        return 1.0 / max(w)
    if convention == "average":
        return table.atom.n_ground / sum(w)
    raise DomainError(f"unknown normalisation convention {convention!r}")


def normalize_weights(
    table: TransitionTable,
    convention: str = "stretched",
    reference: TransitionTable | None = None,
) -> TransitionTable:
    """Rescale weights by a single factor fixed by ``reference`` (default: ``table``)."""
    if not table.links:
        raise DomainError("empty transition table")
    k = normalization_factor(reference if reference is not None else table, convention)
    if max(table.weights) <= 0.0:
        raise DomainError("cannot normalise an all-zero transition table")
    links = tuple(dataclasses.replace(l, weight=l.weight * k) for l in table.links)
    return dataclasses.replace(table, links=links, normalization=convention)


def transition_tables(atom: AtomSpec | None = None, convention: str = "stretched"):
    """Forward and backward tables normalised with the forward table's factor."""
    atom = atom or AtomSpec()
    fw = build_transition_table(atom, "forward")
    bw = build_transition_table(atom, "backward")
    return (
        normalize_weights(fw, convention, reference=fw),
        normalize_weights(bw, convention, reference=fw),
    )
