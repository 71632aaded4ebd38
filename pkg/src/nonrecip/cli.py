"""Command-line entry point: ``nonrecip <subcommand> --config FILE --out FILE [--seed N]``.

Exit status 0 on success, 2 for configuration or input errors, 3 for numerical
failures.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .atomic import AtomSpec, transition_tables
from .channel import QubitState, fidelity, nraq_apply
from .coincidence import (
    TimeTagStream,
    cross_correlate,
    integrate_counts,
    synthetic_heralded_tags,
)
from .errors import CalibrationError, ConfigError, DomainError, NumericalError
from .storage import make_pulse, make_timeline, peak_delay, simulate_eit_storage, uniform_grid
from .susceptibility import (
    CouplingParams,
    MediumParams,
    calibrate_gamma_gs,
    contrast_eta,
    isolation_db,
    propagate_envelope,
    scan_od,
    scan_spectrum,
)
from .tomography import BasisCounts, expected_counts, mc_uncertainty, reconstruct
from .units import tau_to_ns, tau_to_seconds

SUBCOMMANDS = ("spectrum", "odscan", "qubit", "tomo", "storage", "coincidence")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _fmt(x):
    return repr(float(x))


def _write(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])


def _sibling(out, suffix):
    out = Path(out)
    return out.with_name(f"{out.stem}_{suffix}{out.suffix or '.csv'}")


class Context:
    """Objects derived once from a config: atom, tables, coupling, medium, pulse."""

    def __init__(self, cfg):
        self.cfg = cfg
        a = cfg["atom"]
        self.gamma_mhz = a["gamma_MHz"]
        self.atom = AtomSpec(a["F_g"], a["F_s"], a["F_e"], 1.0, a["branch_to_g"])
        self.tables = transition_tables(self.atom, a["normalization"])
        c = cfg["coupling"]
        self.coupling = CouplingParams(c["rabi_c"], c["delta_c"])
        m = cfg["medium"]
        gs = m["gamma_gs"]
        if gs == "calibrate":
            gs = calibrate_gamma_gs(m["target_T_fw"], m["od"], c["rabi_c"], m["gamma_ge"],
                                    self.tables[0])
        self.medium = MediumParams(m["od"], m["gamma_ge"], gs)

    def table(self, direction):
        return self.tables[0] if direction == "forward" else self.tables[1]

    def pulse(self, lead=None):
        p = self.cfg["pulse"]
        bw = p["bandwidth"]
        sigma = 2.0 * math.sqrt(math.log(2.0)) / bw
        span = 16.0 * sigma if p["shape"] == "gaussian" else 24.0 / bw
        t = uniform_grid(span, p["dt"])
        t0 = 8.0 * sigma if p["shape"] == "gaussian" else 0.0
        return make_pulse(bw, p["shape"], t, t0=t0 if lead is None else lead)


def _directions(choice):
    return ("forward", "backward") if choice == "both" else (choice,)


def cmd_spectrum(ctx, out, rng):
    p = ctx.cfg["probe"]
    grid = np.linspace(p["detuning_min"], p["detuning_max"], p["points"])
    rows = []
    for d in _directions(p["direction"]):
        s = scan_spectrum(d, grid, ctx.coupling, ctx.medium, ctx.table(d))
        for x, T, c in zip(s.delta_p, s.transmission, s.chi):
            rows.append((d, x * ctx.gamma_mhz, T, c.real, c.imag))
    _write(out, ["direction", "detuning_MHz", "T", "Re_chi", "Im_chi"], rows)


def cmd_odscan(ctx, out, rng):
    s = ctx.cfg["odscan"]
    n = int(math.floor((s["od_max"] - s["od_min"]) / s["od_step"] + 1e-9)) + 1
    ods = s["od_min"] + s["od_step"] * np.arange(n)
    pulse = ctx.pulse() if s["pulse_integrated"] else None
    res = scan_od(ods, ctx.coupling, ctx.medium, ctx.tables, pulse)
    _write(out, ["od", "T_fw", "T_bw", "eta"], zip(res.od, res.T_fw, res.T_bw, res.eta))


def cmd_qubit(ctx, out, rng):
    q = ctx.cfg["qubit"]
    rows = []
    for name in q["states"]:
        st = QubitState.named(name)
        kw = dict(phase_LR=q["phase_LR"], rail_loss=tuple(q["rail_loss"]))
        fw = nraq_apply(st, "forward", ctx.coupling, ctx.medium, table=ctx.tables[0], **kw)
        bw = nraq_apply(st, "backward", ctx.coupling, ctx.medium, table=ctx.tables[1], **kw)
        eta = contrast_eta(fw.transmission, bw.transmission)
        iso = isolation_db(1.0, bw.transmission) if bw.transmission > 0 else math.inf
        f = fidelity(fw.rho_out, st) if fw.rho_out is not None else float("nan")
        rows.append((name, fw.transmission, bw.transmission, eta, iso, f))
    _write(out, ["state", "T_fw", "T_bw", "eta", "isolation_dB", "fidelity_fw"], rows)


def cmd_tomo(ctx, out, rng):
    t = ctx.cfg["tomography"]
    target = QubitState.named(t["state"])
    if t["counts"] is not None:
        c = t["counts"]
        counts = BasisCounts(c["H"], c["V"], c["D"], c["R"])
    else:
        res = nraq_apply(target, t["direction"], ctx.coupling, ctx.medium,
                         table=ctx.table(t["direction"]))
        if res.isolated:
            raise NumericalError("channel output fully absorbed; nothing to reconstruct")
        n_eff = t["n_total"] * res.transmission
        mean = expected_counts(res.rho_out, n_eff)
        if t["poisson"]:
            counts = BasisCounts(*rng.poisson(mean.as_array()))
        else:
            counts = mean
    rec = reconstruct(counts, target)
    sigma = mc_uncertainty(counts, t["trials"], target, rng=rng)
    r = rec.rho.rho
    rows = [
        ("n_H", counts.n_H), ("n_V", counts.n_V), ("n_D", counts.n_D), ("n_R", counts.n_R),
        ("rho_HH_re", r[0, 0].real), ("rho_HH_im", r[0, 0].imag),
        ("rho_HV_re", r[0, 1].real), ("rho_HV_im", r[0, 1].imag),
        ("rho_VH_re", r[1, 0].real), ("rho_VH_im", r[1, 0].imag),
        ("rho_VV_re", r[1, 1].real), ("rho_VV_im", r[1, 1].imag),
        ("fidelity", rec.fidelity_vs_target), ("sigma_fidelity", sigma),
        ("projected", int(rec.projected)),
    ]
    _write(out, ["quantity", "value"],
           [(k, float(v)) if not isinstance(v, int) else (k, v) for k, v in rows])


def cmd_storage(ctx, out, rng):
    s = ctx.cfg["storage"]
    p = ctx.cfg["pulse"]
    medium = MediumParams(s["od"], ctx.medium.gamma_ge, ctx.medium.gamma_gs)
    lead, tail = 20.0, 60.0
    span = lead + tail + (2 * s["ramp"] + s["hold"] if s["store"] else 0.0)
    t = uniform_grid(span, p["dt"])
    pulse = make_pulse(p["bandwidth"], p["shape"], t, t0=lead)
    tl = make_timeline(t, ctx.coupling.rabi_c, lead if s["store"] else None, s["ramp"], s["hold"])
    rows = []
    for d in _directions(s["direction"]):
        r = simulate_eit_storage(pulse, tl, medium, d, s["z_points"], ctx.table(d),
                                 delta_c=ctx.coupling.delta_c)
        delay = peak_delay(pulse, r) if not s["store"] else float("nan")
        rows.append((d, r.efficiency, r.leaked_fraction, r.absorbed_fraction,
                     r.residual_fraction, r.energy_error, tau_to_ns(delay, ctx.gamma_mhz)))
        o = r.output
        _write(_sibling(out, f"{d}_waveform"), ["t_ns", "re", "im"],
               zip(tau_to_ns(o.t, ctx.gamma_mhz), o.amp.real, o.amp.imag))
    _write(_sibling(out, "input_waveform"), ["t_ns", "re", "im"],
           zip(tau_to_ns(pulse.t, ctx.gamma_mhz), pulse.amp.real, pulse.amp.imag))
    _write(out, ["direction", "efficiency", "leaked", "absorbed", "residual", "energy_error",
                 "peak_delay_ns"], rows)


def _wavepacket(ctx, direction):
    """Output photon time density for one direction, from spectral propagation."""
    pulse = ctx.pulse()
    amp = propagate_envelope(pulse.amp, pulse.dt, direction, ctx.coupling, ctx.medium,
                             ctx.table(direction))
    dens = np.abs(amp) ** 2
    t0 = pulse.t[np.argmax(np.abs(pulse.amp))]
    return tau_to_seconds(pulse.t - t0, ctx.gamma_mhz), dens, float(dens.sum() * pulse.dt)


def cmd_coincidence(ctx, out, rng):
    co = ctx.cfg["coincidence"]
    g = ctx.gamma_mhz
    bin_s = tau_to_seconds(co["bin_width"], g)
    win_s = tau_to_seconds(co["window"], g)
    if co["tags"] is not None:
        try:
            stream = TimeTagStream.read_csv(co["tags"])
        except OSError as exc:
            raise ConfigError(f"cannot read tag file: {exc.strerror}",
                              ctx.cfg.line("coincidence", "tags")) from None
        h = cross_correlate(stream, bin_s, win_s)
        _write(out, ["tau_ns", "counts"], zip(h.centers * 1e9, h.counts.tolist()))
        return
    dur = tau_to_seconds(co["duration"], g)
    off = tau_to_seconds(co["offset"], g)
    jit = tau_to_seconds(co["jitter"], g)
    hists, cc = {}, {}
    lo = -win_s if co["gate_min"] is None else tau_to_seconds(co["gate_min"], g)
    hi = win_s if co["gate_max"] is None else tau_to_seconds(co["gate_max"], g)
    for d in ("forward", "backward"):
        t, dens, T = _wavepacket(ctx, d)
        stream = synthetic_heralded_tags(rng, co["pairs"], dur, off, (t, dens), min(T, 1.0), jit)
        hists[d] = cross_correlate(stream, bin_s, win_s)
        cc[d] = integrate_counts(hists[d], (lo, hi))
    rows = zip(hists["forward"].centers * 1e9, hists["forward"].counts.tolist(),
               hists["backward"].counts.tolist())
    _write(out, ["tau_ns", "counts_fw", "counts_bw"], rows)
    eta = contrast_eta(cc["forward"], cc["backward"]) if cc["forward"] + cc["backward"] else math.nan
    _write(_sibling(out, "summary"), ["cc_fw", "cc_bw", "eta"],
           [(cc["forward"], cc["backward"], float(eta))])


COMMANDS = {
    "spectrum": cmd_spectrum,
    "odscan": cmd_odscan,
    "qubit": cmd_qubit,
    "tomo": cmd_tomo,
    "storage": cmd_storage,
    "coincidence": cmd_coincidence,
}


def run_subcommand(name, config, out_path, seed=0) -> int:
    """Run one pipeline; ``config`` is a :class:`~nonrecip.config.Config` or a path."""
    try:
        cfg = config if isinstance(config, cfgmod.Config) else cfgmod.load(config)
        ctx = Context(cfg)
        COMMANDS[name](ctx, out_path, np.random.default_rng(seed))
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, CalibrationError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="nonrecip", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="YAML config file (defaults used if omitted)")
    ap.add_argument("--out", required=True, help="output CSV path")
    ap.add_argument("--seed", type=int, default=0, help="seed for all random sampling")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = args.config if args.config else cfgmod.defaults()
    return run_subcommand(args.subcommand, config, args.out, args.seed)


if __name__ == "__main__":
    sys.exit(main())
