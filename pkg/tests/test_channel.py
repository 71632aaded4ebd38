import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonrecip.channel import QubitState, fidelity, nraq_apply, transmission_rate
from nonrecip.errors import DomainError
from nonrecip.susceptibility import CouplingParams, MediumParams, contrast_eta

NAMES = ["H", "V", "D", "R"]
angles = st.tuples(st.floats(0, math.pi), st.floats(0, 2 * math.pi))


def test_named_states():
    R = QubitState.named("R").rho
    # |R> = (|H> - i|V>)/sqrt2
    assert R[0, 1] == pytest.approx(0.5j)
    assert QubitState.from_angles(math.pi / 2, 0).rho == pytest.approx(QubitState.named("D").rho)
    assert QubitState.from_angles(math.pi / 2, -math.pi / 2).rho == pytest.approx(R)
    with pytest.raises(DomainError):
        QubitState.named("Q")


def test_state_validation():
    with pytest.raises(DomainError):
        QubitState(np.diag([0.6, 0.6]))
    with pytest.raises(DomainError):
        QubitState(np.diag([1.2, -0.2]))
    with pytest.raises(DomainError):
        QubitState(np.array([[0.5, 0.5], [0.1, 0.5]]))
    with pytest.raises(DomainError):
        QubitState.from_ket([0, 0])


def test_fidelity_examples():
    H, V, D = (QubitState.named(n) for n in "HVD")
    assert fidelity(H, H) == pytest.approx(1.0)
    assert fidelity(H, V) == pytest.approx(0.0, abs=1e-15)
    assert fidelity(H, D) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        fidelity(np.diag([1.5, -0.5]), H)


@settings(max_examples=50, deadline=None)
@given(a=angles, b=angles, p=st.floats(0, 1))
def test_fidelity_symmetric_and_matches_pure_overlap(a, b, p):
    x = QubitState.from_angles(*a)
    y = QubitState.from_angles(*b)
    f = fidelity(x, y)
    assert f == pytest.approx(fidelity(y, x), abs=1e-9)
    overlap = abs(np.trace(x.rho @ y.rho))
    assert f == pytest.approx(overlap, abs=1e-9)
    mixed = QubitState(p * x.rho + (1 - p) * np.eye(2) / 2)
    assert 0.0 <= fidelity(mixed, y) <= 1.0


def test_identity_channel_without_medium():
    m = MediumParams(0.0, 0.5, 0.0)
    for n in NAMES:
        s = QubitState.named(n)
        r = nraq_apply(s, "forward", CouplingParams(), m)
        assert r.transmission == pytest.approx(1.0)
        assert np.allclose(r.rho_out.rho, s.rho)


@settings(max_examples=30, deadline=None)
@given(a=angles)
def test_forward_preserves_pure_states(a, medium, coupling):
    s = QubitState.from_angles(*a)
    r = nraq_apply(s, "forward", coupling, medium)
    assert fidelity(r.rho_out, s) >= 1 - 1e-10
    assert r.transmission == pytest.approx(0.929, abs=1e-9)


def test_backward_isolation_state_independent(medium, coupling):
    ts = [nraq_apply(QubitState.named(n), "backward", coupling, medium).transmission for n in NAMES]
    assert max(ts) <= 0.04
    assert np.ptp(ts) < 1e-12


def test_linearity(medium, coupling):
    a, b = QubitState.named("H"), QubitState.named("R")
    alpha = 0.3
    mix = QubitState(alpha * a.rho + (1 - alpha) * b.rho)
    ra, rb, rm = (nraq_apply(s, "forward", coupling, medium, phase_LR=0.4, rail_loss=(1.0, 0.8))
                  for s in (a, b, mix))
    unnorm = lambda r: r.transmission * r.rho_out.rho  # noqa: E731
    assert np.allclose(unnorm(rm), alpha * unnorm(ra) + (1 - alpha) * unnorm(rb), atol=1e-14)


def test_phase_and_imbalance_reduce_fidelity(medium, coupling):
    D = QubitState.named("D")
    r = nraq_apply(D, "forward", coupling, medium, phase_LR=0.2)
    assert fidelity(r.rho_out, D) == pytest.approx(math.cos(0.1) ** 2, abs=1e-12)
    r = nraq_apply(D, "forward", coupling, medium, rail_loss=(1.0, 0.9))
    assert fidelity(r.rho_out, D) < 1.0
    with pytest.raises(DomainError):
        nraq_apply(D, "forward", coupling, medium, rail_loss=(1.2, 1.0))


def test_total_absorption_is_flagged(coupling):
    r = nraq_apply(QubitState.named("H"), "backward", coupling, MediumParams(1e5, 0.5, 0.0))
    assert r.isolated and r.rho_out is None and r.transmission == 0.0


def test_contrast_state_independent(medium, coupling):
    etas = []
    for n in NAMES:
        s = QubitState.named(n)
        fw = nraq_apply(s, "forward", coupling, medium).transmission
        bw = nraq_apply(s, "backward", coupling, medium).transmission
        etas.append(contrast_eta(fw, bw))
    assert np.ptp(etas) < 1e-12
    assert 0.9 <= etas[0] <= 1.0


def test_transmission_rate():
    assert transmission_rate(929, 1000) == pytest.approx(0.929)
    assert transmission_rate(0, 50) == 0.0
    assert transmission_rate(50, 50) == 1.0
    with pytest.warns(RuntimeWarning):
        assert transmission_rate(51, 50) == pytest.approx(1.02)
    with pytest.raises(DomainError):
        transmission_rate(1, 0)


def test_fidelity_matches_matrix_sqrt_definition(rng):
    from scipy.linalg import sqrtm

    for _ in range(20):
        mats = []
        for _ in range(2):
            a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            r = a @ a.conj().T
            mats.append(r / np.trace(r).real)
        s = sqrtm(mats[0])
        ref = np.real(np.trace(sqrtm(s @ mats[1] @ s))) ** 2
        assert fidelity(*mats) == pytest.approx(ref, abs=1e-10)
