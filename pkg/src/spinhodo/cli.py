"""Command-line front end: figure presets, free-form simulation runs,
closed-trajectory search, and CSV/JSON/plot-script export.

Artifacts per run: trajectory.csv (state + per-sample diagnostics),
geometry.csv (diagnostics only), report.json (observed ranges, events,
caption comparison), plot.gp (gnuplot script over the CSVs).  All numbers
are emitted with 17 significant digits; runs are fully deterministic.
"""

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .elliptic import complete_k
from .geometry import (count_torsion_sign_changes, detect_cusps, detect_loops,
                       frenet_geometry)
from .integrator import IntegratorConfig, resample_uniform
from .presets import PRESETS, check_caption_value
from .qubit import (DampingParams, FieldMode, FieldParams, InitialAngles,
                    analytic_elliptic_resonance, analytic_rabi_general,
                    closed_trajectory_amplitude_qubit, field_at,
                    make_bloch_rhs)
from .qutrit import (AnisotropyParams, analytic_qutrit_resonance,
                     bloch8_from_density, closed_trajectory_amplitude_qutrit,
                     density_to_real, evolve_density, initial_density_north,
                     make_qutrit_rhs_real, polarization_series,
                     qutrit_hamiltonian)

__all__ = ["run_preset", "simulate", "closure_search", "main", "UnsupportedAnalytic"]


class UnsupportedAnalytic(ValueError):
    """Requested --analytic outside the validity domain of the closed forms."""


def default_config():
    """Default tolerances, overridable through SPINHODO_TOL."""
    tol = os.environ.get("SPINHODO_TOL")
    if tol:
        rel = float(tol)
        return IntegratorConfig(rel_tol=rel, abs_tol=rel * 1e-2)
    return IntegratorConfig()


# ----------------------------------------------------------------- running

def _simulate_qubit(fp, dp, init, duration, cfg, n_out):
    rhs = make_bloch_rhs(fp, dp)
    traj = resample_uniform(rhs, n_out, y0=init.bloch(), t_span=(0.0, duration), cfg=cfg)
    R = traj.states
    lengths = np.linalg.norm(R, axis=1)
    if np.min(lengths) < 1e-12:
        raise RuntimeError("coherence vector collapsed to zero; no direction")
    p = R / lengths[:, None]
    fields = np.array([field_at(t, fp) for t in traj.times])
    energy = 0.5 * np.einsum("ij,ij->i", fields, R)
    return {
        "times": traj.times, "R": R, "p": p, "energy": energy,
        "flip_probability": (1.0 - R[:, 2]) / 2.0,
        "bloch_length": lengths, "fields": fields, "traj": traj,
    }


def _simulate_qutrit(fp, ap, duration, cfg, n_out):
    times, rhos, traj = evolve_density(fp, ap, initial_density_north(), duration,
                                       cfg=cfg, n_out=n_out)
    qs = np.array([bloch8_from_density(r) for r in rhos])
    p = polarization_series(qs)
    if np.any(~np.isfinite(p)):
        raise RuntimeError("polarization direction undefined on the grid "
                           "(spin part of q vanished)")
    r6q3 = math.sqrt(6.0) * qs[:, 2]
    r2q6 = math.sqrt(2.0) * qs[:, 5]
    pops = np.stack([(2.0 + r6q3 + r2q6) / 6.0,
                     (1.0 - r2q6) / 3.0,
                     (2.0 - r6q3 + r2q6) / 6.0], axis=1)
    energy = np.array([np.real(np.trace(rhos[i] @ qutrit_hamiltonian(times[i], fp, ap)))
                       for i in range(len(times))])
    fields = np.array([field_at(t, fp) for t in times])
    return {
        "times": times, "q": qs, "p": p, "energy": energy,
        "populations": pops, "q_length": np.linalg.norm(qs, axis=1),
        "fields": fields, "rhos": rhos, "traj": traj,
    }


def _observed_ranges(sim, series):
    ok = series.valid
    ang = ~series.pole
    obs = {
        "speed": [float(np.min(series.speed)), float(np.max(series.speed))],
        "curvature": [float(np.nanmin(series.curvature[ok])),
                      float(np.nanmax(series.curvature[ok]))],
        "torsion": [float(np.nanmin(series.torsion[ok])),
                    float(np.nanmax(series.torsion[ok]))],
        "theta_dot": [float(np.nanmin(series.theta_dot[ang])),
                      float(np.nanmax(series.theta_dot[ang]))],
        "phi_dot": [float(np.nanmin(series.phi_dot[ang])),
                    float(np.nanmax(series.phi_dot[ang]))],
        "arc_length": float(series.arc_length[-1]),
        "energy": [float(np.min(sim["energy"])), float(np.max(sim["energy"]))],
    }
    if "flip_probability" in sim:
        P = sim["flip_probability"]
        obs["flip_probability"] = [float(np.min(P)), float(np.max(P))]
        obs["bloch_length"] = [float(np.min(sim["bloch_length"])),
                               float(np.max(sim["bloch_length"]))]
    else:
        pops = sim["populations"]
        obs["populations"] = {
            "p_plus": [float(np.min(pops[:, 0])), float(np.max(pops[:, 0]))],
            "p_zero": [float(np.min(pops[:, 1])), float(np.max(pops[:, 1]))],
            "p_minus": [float(np.min(pops[:, 2])), float(np.max(pops[:, 2]))],
        }
        obs["q_length"] = [float(np.min(sim["q_length"])), float(np.max(sim["q_length"]))]
    return obs


def _events(sim, series):
    cusps = detect_cusps(series)
    loops = detect_loops(sim["times"], sim["p"])
    flips = count_torsion_sign_changes(series.torsion[series.valid])
    return {
        "cusps": [{"t": c.t, "speed": c.speed, "curvature": c.curvature} for c in cusps],
        "loop_count": len(loops),
        "loop_pairs": [[e.t_a, e.t_b] for e in loops[:32]],
        "torsion_sign_changes": flips,
    }


def _caption_checks(expected, obs, events):
    checks = []
    for quantity, cap in expected.items():
        if quantity == "torsion_sign_changes":
            observed = events["torsion_sign_changes"]
        elif quantity == "arc_length":
            observed = obs["arc_length"]
        else:
            observed = tuple(obs[quantity])
        passed, detail = check_caption_value(quantity, cap, observed)
        checks.append({"quantity": quantity, "passed": bool(passed), **detail})
    return checks


def _analyze(sim, expected=None):
    series = frenet_geometry(sim["times"], sim["p"])
    obs = _observed_ranges(sim, series)
    ev = _events(sim, series)
    checks = _caption_checks(expected, obs, ev) if expected else None
    return series, obs, ev, checks


# ----------------------------------------------------------------- artifacts

def _fmt(x):
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return format(float(x), ".17g")


def _write_csv(path, header, columns):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        n = len(columns[0])
        for i in range(n):
            fh.write(",".join(_fmt(col[i]) for col in columns) + "\n")


def write_artifacts(out_dir, sim, series, report, system):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    geo_cols = [series.times, series.theta, series.phi, series.theta_dot,
                series.phi_dot, series.curvature, series.torsion, series.speed,
                series.arc_length, series.valid.astype(float), series.pole.astype(float)]
    geo_hdr = ["t", "theta", "phi", "theta_dot", "phi_dot", "curvature",
               "torsion", "speed", "arc_length", "valid", "pole"]
    _write_csv(out / "geometry.csv", geo_hdr, geo_cols)

    p = sim["p"]
    shared = [series.theta, series.phi, series.theta_dot, series.phi_dot,
              series.curvature, series.torsion, series.speed, series.arc_length]
    shared_hdr = ["theta", "phi", "theta_dot", "phi_dot", "curvature",
                  "torsion", "speed", "arc_length"]
    fld = sim["fields"]
    if system == "qubit":
        R = sim["R"]
        cols = [sim["times"], R[:, 0], R[:, 1], R[:, 2], p[:, 0], p[:, 1], p[:, 2],
                *shared, sim["flip_probability"], sim["energy"],
                fld[:, 0], fld[:, 1], fld[:, 2]]
        hdr = ["t", "R1", "R2", "R3", "p1", "p2", "p3", *shared_hdr, "P", "E",
               "h1", "h2", "h3"]
    else:
        q = sim["q"]
        pops = sim["populations"]
        cols = [sim["times"], *[q[:, i] for i in range(8)],
                p[:, 0], p[:, 1], p[:, 2], *shared,
                pops[:, 0], pops[:, 1], pops[:, 2], sim["energy"],
                fld[:, 0], fld[:, 1], fld[:, 2]]
        hdr = ["t", *[f"q{i+1}" for i in range(8)], "p1", "p2", "p3",
               *shared_hdr, "P_plus", "P_zero", "P_minus", "E",
               "h1", "h2", "h3"]
    _write_csv(out / "trajectory.csv", hdr, cols)

    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, indent=2)

    script = f"""# gnuplot script emitted by spinhodo {__version__}
set datafile separator comma
set key autotitle columnhead noenhanced

set terminal pngcairo size 900,800
set output 'hodograph.png'
set view equal xyz
set xyplane at -1
splot 'trajectory.csv' using 'p1':'p2':'p3' with lines lw 1.5 title 'apex'

set output 'geometry.png'
set logscale y
plot 'geometry.csv' using 't':'curvature' with lines title 'curvature', \\
     'geometry.csv' using 't':'speed' with lines title 'speed'
unset logscale y

set output 'rates.png'
plot 'geometry.csv' using 't':'theta_dot' with lines title 'nutation rate', \\
     'geometry.csv' using 't':'phi_dot' with lines title 'precession rate', \\
     'geometry.csv' using 't':'torsion' with lines title 'torsion'
"""
    (out / "plot.gp").write_text(script)


# ----------------------------------------------------------------- commands

def run_preset(name, out_dir=None, cfg=None):
    """Run a figure preset; returns the report dict (and writes artifacts)."""
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    preset = PRESETS[name]
    cfg = cfg or default_config()

    if preset.system == "qubit":
        sim = _simulate_qubit(preset.fieldp, preset.damping, preset.init,
                              preset.duration, cfg, preset.n_output)
    else:
        sim = _simulate_qutrit(preset.fieldp, preset.aniso, preset.duration,
                               cfg, preset.n_output)
    series, obs, ev, checks = _analyze(sim, preset.expected)

    report = {
        "tool": f"spinhodo {__version__}",
        "preset": name,
        "system": preset.system,
        "parameters": _param_record(preset.fieldp, preset.damping, preset.init,
                                    preset.aniso),
        "duration": preset.duration,
        "n_samples": len(sim["times"]),
        "integrator": {
            "rel_tol": cfg.rel_tol, "abs_tol": cfg.abs_tol,
            "max_local_error": sim["traj"].max_error_estimate,
            "n_steps": sim["traj"].n_steps,
            "n_rejected": sim["traj"].n_rejected,
        },
        "observed": obs,
        "events": ev,
        "caption_checks": checks,
    }
    if out_dir is not None:
        write_artifacts(out_dir, sim, series, report, preset.system)
    return report


def _param_record(fp, dp, init, ap):
    rec = {
        "mode": fp.mode.value, "h1": fp.h1, "h2": fp.h2, "H": fp.H,
        "omega": fp.omega, "modulus": fp.k,
        "gamma1": dp.gamma1, "gamma2": dp.gamma2, "r_eq": dp.r_eq,
    }
    if init is not None:
        rec["theta0"] = init.theta0
        rec["phi0"] = init.phi0
    if ap is not None:
        rec["Q"] = ap.Q
        rec["d"] = ap.d
    return rec


def _analytic_reference(system, fp, dp, init, ap, times):
    """Closed-form states on `times`, or raise UnsupportedAnalytic."""
    if system == "qubit":
        if not dp.is_uniform:
            raise UnsupportedAnalytic("closed forms cover uniform damping "
                                      "(gamma1 = gamma2, r_eq = 0) only")
        gamma = dp.gamma1
        if fp.mode is FieldMode.CIRCULAR:
            return analytic_rabi_general(times, init, fp.h1, fp.H, fp.omega, gamma)
        if fp.mode is FieldMode.ELLIPTIC:
            if fp.detuning != 0.0 or init.theta0 != 0.0:
                raise UnsupportedAnalytic("elliptic-field closed form needs "
                                          "resonance and a north-pole start")
            return analytic_elliptic_resonance(times, fp.h1, fp.omega, fp.k, gamma)
        raise UnsupportedAnalytic("no closed form for a linearly polarized field")
    # qutrit
    if ap.d != 0.0:
        raise UnsupportedAnalytic("qutrit closed form requires d = 0")
    if fp.H != fp.omega:
        raise UnsupportedAnalytic("qutrit closed form requires resonance (H = omega)")
    if fp.mode is not FieldMode.CIRCULAR:
        raise UnsupportedAnalytic("qutrit closed form requires a circular field")
    return analytic_qutrit_resonance(times, fp.h1, ap.Q, fp.omega)


def simulate(system, fp, duration, out_dir=None, dp=None, init=None, ap=None,
             cfg=None, n_out=None, analytic=False):
    """Free-parameter run with the same artifact set as run_preset."""
    cfg = cfg or default_config()
    dp = dp or DampingParams()
    init = init or InitialAngles()
    if n_out is None:
        n_out = cfg.output_points_per_period + 1

    if system == "qubit":
        sim = _simulate_qubit(fp, dp, init, duration, cfg, n_out)
    elif system == "qutrit":
        ap = ap or AnisotropyParams()
        sim = _simulate_qutrit(fp, ap, duration, cfg, n_out)
    else:
        raise ValueError(f"unknown system {system!r}")

    deviation = None
    if analytic:
        ref = _analytic_reference(system, fp, dp, init, ap, sim["times"])
        numeric = sim["R"] if system == "qubit" else sim["q"]
        deviation = float(np.max(np.abs(ref - numeric)))

    series, obs, ev, _ = _analyze(sim)
    report = {
        "tool": f"spinhodo {__version__}",
        "preset": None,
        "system": system,
        "parameters": _param_record(fp, dp, init if system == "qubit" else None,
                                    ap if system == "qutrit" else None),
        "duration": duration,
        "n_samples": len(sim["times"]),
        "integrator": {
            "rel_tol": cfg.rel_tol, "abs_tol": cfg.abs_tol,
            "max_local_error": sim["traj"].max_error_estimate,
            "n_steps": sim["traj"].n_steps,
            "n_rejected": sim["traj"].n_rejected,
        },
        "observed": obs,
        "events": ev,
        "caption_checks": None,
        "analytic_max_deviation": deviation,
    }
    if out_dir is not None:
        write_artifacts(out_dir, sim, series, report, system)
    return report


def closure_search(system, x_max, y_max, omega=0.0, H=0.0, Q=1.0, d=0.0,
                   init=None, cfg=None, points_per_period=300):
    """Enumerate commensurate pairs, compute the closing amplitude, integrate
    one common period, and report the endpoint-start distance."""
    cfg = cfg or default_config()
    rows = []
    for x in range(1, x_max + 1):
        for y in range(1, y_max + 1):
            if system == "qubit":
                if omega == 0.0:
                    raise ValueError("qubit closure search needs a nonzero drive frequency")
                h = closed_trajectory_amplitude_qubit(x, y, omega, H)
                if h is None:
                    rows.append({"x": x, "y": y, "h": None, "residual": None,
                                 "feasible": False})
                    continue
                period = 2.0 * math.pi * x / abs(omega)
                fp = FieldParams.circular(h, H, omega)
                rhs = make_bloch_rhs(fp, DampingParams())
                y0 = (init or InitialAngles(math.acos(1.0 / math.sqrt(3.0)), 0.0)).bloch()
                n = max(64, int(points_per_period * x)) + 1
                traj = resample_uniform(rhs, n, y0=y0, t_span=(0.0, period), cfg=cfg)
                residual = float(np.linalg.norm(traj.states[-1] - traj.states[0]))
            else:
                try:
                    h = closed_trajectory_amplitude_qutrit(x, y, Q, d)
                except ValueError:
                    rows.append({"x": x, "y": y, "h": None, "residual": None,
                                 "feasible": False})
                    continue
                period = 4.0 * math.pi * x / abs(Q)
                fp = FieldParams.circular(h, 0.0, 0.0)
                ap = AnisotropyParams(Q=Q, d=d)
                n = max(64, int(points_per_period * x)) + 1
                rhs = make_qutrit_rhs_real(fp, ap)
                traj = resample_uniform(rhs, n, y0=density_to_real(initial_density_north()),
                                        t_span=(0.0, period), cfg=cfg)
                residual = float(np.linalg.norm(traj.states[-1] - traj.states[0]))
            rows.append({"x": x, "y": y, "h": h, "residual": residual,
                         "feasible": True, "period": period})
    return rows


# ----------------------------------------------------------------- parsing

def _build_parser():
    ap = argparse.ArgumentParser(prog="spinhodo",
                                 description="spin magnetic-resonance hodograph laboratory")
    ap.add_argument("--version", action="version", version=f"spinhodo {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preset", help="run a published-figure preset")
    p.add_argument("name", choices=sorted(PRESETS, key=lambda s: int(s[3:])))
    p.add_argument("--out", required=True, help="output directory")

    s = sub.add_parser("simulate", help="run arbitrary parameters")
    s.add_argument("--system", choices=["qubit", "qutrit"], required=True)
    s.add_argument("--mode", choices=["circular", "linear", "elliptic"],
                   default="circular")
    s.add_argument("--h", type=float, default=0.5, help="transverse amplitude")
    s.add_argument("--H", type=float, default=0.0, help="longitudinal amplitude")
    s.add_argument("--omega", type=float, default=1.0, help="drive frequency")
    s.add_argument("--modulus", type=float, default=0.0, help="elliptic modulus k")
    s.add_argument("--gamma1", type=float, default=0.0)
    s.add_argument("--gamma2", type=float, default=0.0)
    s.add_argument("--req", type=float, default=0.0, help="equilibrium population difference")
    s.add_argument("--Q", type=float, default=0.0, help="axial anisotropy")
    s.add_argument("--d", type=float, default=0.0, help="transverse anisotropy")
    s.add_argument("--theta0", type=float, default=0.0)
    s.add_argument("--phi0", type=float, default=0.0)
    s.add_argument("--periods", type=float, default=1.0,
                   help="duration in natural periods")
    s.add_argument("--duration", type=float, default=None,
                   help="absolute duration (overrides --periods)")
    s.add_argument("--analytic", action="store_true",
                   help="compare against the closed-form solution")
    s.add_argument("--out", required=True)

    c = sub.add_parser("closure", help="closed-trajectory search")
    c.add_argument("--system", choices=["qubit", "qutrit"], required=True)
    c.add_argument("--xmax", type=int, default=4)
    c.add_argument("--ymax", type=int, default=4)
    c.add_argument("--omega", type=float, default=1.0)
    c.add_argument("--H", type=float, default=1.0)
    c.add_argument("--Q", type=float, default=1.0)
    c.add_argument("--d", type=float, default=0.0)
    c.add_argument("--out", default=None)
    return ap


def _natural_period(args, fp, ap):
    if args.system == "qubit":
        if fp.mode is FieldMode.ELLIPTIC and fp.k > 0.0:
            return 4.0 * complete_k(fp.k) / abs(fp.omega)
        Om = math.hypot(fp.H - fp.omega, args.h)
        if Om == 0.0:
            raise ValueError("degenerate parameters: specify --duration explicitly")
        return 2.0 * math.pi / Om
    f = math.hypot(2.0 * args.h, ap.Q)
    if f == 0.0:
        raise ValueError("degenerate parameters: specify --duration explicitly")
    return 2.0 * math.pi / f


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "preset":
            report = run_preset(args.name, args.out)
            checks = report["caption_checks"] or []
            for c in checks:
                mark = "ok  " if c["passed"] else "FAIL"
                print(f"[{mark}] {args.name} {c['quantity']}: expected {c['expected']}, "
                      f"observed {c['observed']}")
            print(f"wrote {args.out}/trajectory.csv geometry.csv report.json plot.gp")
        elif args.command == "simulate":
            mode = FieldMode(args.mode)
            if mode is FieldMode.CIRCULAR:
                fp = FieldParams.circular(args.h, args.H, args.omega)
            elif mode is FieldMode.LINEAR:
                fp = FieldParams.linear(args.h, args.H, args.omega)
            else:
                fp = FieldParams.elliptic(args.h, args.H, args.omega, args.modulus)
            dp = DampingParams(args.gamma1, args.gamma2, args.req)
            ap_ = AnisotropyParams(args.Q, args.d)
            init = InitialAngles(args.theta0, args.phi0)
            duration = args.duration
            if duration is None:
                duration = args.periods * _natural_period(args, fp, ap_)
            cfg = default_config()
            n_out = int(cfg.output_points_per_period * max(1.0, args.periods)) + 1
            report = simulate(args.system, fp, duration, out_dir=args.out, dp=dp,
                              init=init, ap=ap_, cfg=cfg, n_out=n_out,
                              analytic=args.analytic)
            if report["analytic_max_deviation"] is not None:
                print(f"analytic vs numeric max deviation: "
                      f"{report['analytic_max_deviation']:.3e}")
            print(f"wrote {args.out}/trajectory.csv geometry.csv report.json plot.gp")
        else:
            rows = closure_search(args.system, args.xmax, args.ymax,
                                  omega=args.omega, H=args.H, Q=args.Q, d=args.d)
            print(f"{'x':>3} {'y':>3} {'amplitude':>22} {'closure residual':>18}")
            for r in rows:
                if not r["feasible"]:
                    print(f"{r['x']:>3} {r['y']:>3} {'infeasible':>22}")
                else:
                    print(f"{r['x']:>3} {r['y']:>3} {r['h']:>22.15g} {r['residual']:>18.3e}")
            if args.out:
                Path(args.out).mkdir(parents=True, exist_ok=True)
                with open(Path(args.out) / "closure.json", "w") as fh:
                    json.dump(rows, fh, indent=2)
    except (ValueError, UnsupportedAnalytic, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
