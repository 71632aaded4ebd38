import time

import numpy as np
import pytest

from nonrecip.coincidence import (
    Histogram,
    TimeTagStream,
    cross_correlate,
    integrate_counts,
    poisson_tags,
    synthetic_heralded_tags,
)
from nonrecip.errors import DomainError
from nonrecip.storage import make_pulse, uniform_grid
from nonrecip.susceptibility import contrast_eta, propagate_envelope
from nonrecip.units import mhz_to_gamma, tau_to_seconds


def test_offset_peak(rng):
    s1 = poisson_tags(rng, 1e3, 10.0)
    h = cross_correlate(TimeTagStream(s1, s1 + 8000), 1.6e-9, 100e-9)
    k = h.bin_of(8e-9)
    assert h.counts[k] == s1.size
    assert h.counts.sum() - h.counts[k] < 20  # accidentals only
    lo, hi = h.edges[h.bin_of(8e-9)], h.edges[h.bin_of(8e-9) + 1]
    assert lo <= 8e-9 < hi


def test_uncorrelated_flat(rng):
    a = poisson_tags(rng, 2e5, 2.5)
    b = poisson_tags(rng, 2e5, 2.5)
    h = cross_correlate(TimeTagStream(a, b), 1.6e-9, 200e-9)
    mu = a.size * b.size / 2.5 * 1.6e-9
    assert np.all(np.abs(h.counts - mu) < 5 * np.sqrt(mu))


def test_million_tags_fast(rng):
    a = poisson_tags(rng, 1e5, 5.0)
    b = poisson_tags(rng, 1e5, 5.0)
    t0 = time.perf_counter()
    cross_correlate(TimeTagStream(a, b), 1.6e-9, 100e-9)
    assert time.perf_counter() - t0 < 5.0
    assert a.size + b.size > 9e5


def test_empty_channel_flag():
    h = cross_correlate(TimeTagStream([], [1, 2, 3]))
    assert h.empty_channel and h.counts.sum() == 0


def test_stream_validation(tmp_path):
    with pytest.raises(DomainError):
        TimeTagStream([3, 1], [])
    with pytest.raises(DomainError):
        TimeTagStream.from_events([("S3", 1)])
    s = TimeTagStream.from_events([("S2", 5), ("S1", 1), ("S1", 4)])
    p = tmp_path / "tags.csv"
    s.write_csv(p)
    assert p.read_text().splitlines()[0] == "channel,timestamp_ps"
    back = TimeTagStream.read_csv(p)
    assert back.s1.tolist() == [1, 4] and back.s2.tolist() == [5]
    with pytest.raises(DomainError):
        cross_correlate(s, 0.0, 1e-9)
    with pytest.raises(DomainError):
        cross_correlate(s, 2e-9, 1e-9)


def test_integrate_counts():
    h = Histogram(1.0, -2.0, np.array([1, 2, 3, 4]))
    assert integrate_counts(h, (-2.0, 2.0)) == 10
    assert integrate_counts(h, (-1.5, 2.0)) == 9  # partial first bin excluded
    with pytest.warns(RuntimeWarning):
        assert integrate_counts(h, (10.0, 20.0)) == 0
    with pytest.warns(RuntimeWarning):
        assert integrate_counts(h, (1.0, 1.0)) == 0
    with pytest.raises(DomainError):
        Histogram(0.0, 0.0, [1])


def test_gated_eta_matches_susceptibility(medium, coupling, rng):
    t = uniform_grid(200.0, 0.01)
    p = make_pulse(mhz_to_gamma(1.6), "gaussian", t, t0=100.0)
    cc, T = {}, {}
    for d in ("forward", "backward"):
        out = np.abs(propagate_envelope(p.amp, p.dt, d, coupling, medium)) ** 2
        T[d] = out.sum() * p.dt
        stream = synthetic_heralded_tags(rng, 400_000, 400.0, 1e-6, (tau_to_seconds(t - 100.0), out),
                                         T[d], 0.3e-9)
        h = cross_correlate(stream, 1.6e-9, 2e-6)
        cc[d] = integrate_counts(h, (-2e-6, 2e-6))
    assert contrast_eta(cc["forward"], cc["backward"]) == pytest.approx(
        contrast_eta(T["forward"], T["backward"]), abs=0.01)
