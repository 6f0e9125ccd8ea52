"""Command line front end.

Each subcommand writes one CSV or JSON file and prints a one-line summary.
Lengths are given in units of ``--w0`` (default 1).  Exit status is 1 for
bad arguments and 2 when a quadrature fails to converge.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .engineering import (
    AmplitudeSource,
    NoSupportedModesError,
    RcfSpec,
    build_filtered_state,
    diagonal_diagram,
    state_schmidt,
)
from .entanglement import concentration_fraction, full_slice, schmidt_scan
from .modes import ModeKind, RadialMode, normalize
from .spdc import (
    DEFAULT_RING_RADIUS,
    GAUSSIAN_COMPARISON_WIDTH,
    OPTIMAL_PUMP_WIDTH,
    PumpFamily,
    PumpSpec,
    SignalGeometry,
    joint_spectrum,
    overlap_amplitude,
    peak_pump_width,
    scan_pump_width,
)
from .special_math import QuadratureError

SIG_DIGITS = 12

COLUMNS = {
    "fig3": ["w_p", "ampsq_pv_opt", "ampsq_pv_057", "ampsq_gauss"],
    "fig4": ["ell1", "p_l0", "p_l3", "p_lm3", "p_l12", "p_lm12"],
    "fig5a": ["ell1", "p_pv", "p_gauss"],
    "fig5b": ["ell_max", "d", "K_pv", "K_gauss"],
    "spectrum": ["pump_ell", "ell1", "ell2", "amplitude", "prob", "prob_rel"],
    "state": ["ell1", "ell2", "re", "im", "prob"],
    "schmidt": ["ell_max", "d", "K"],
    "diagram": ["ell1", "ell2", "occupied"],
}

_HELP = {
    "fig3": ("|A(0,0,0)|^2 against pump width for the three pump families",
             "w_p: pump width; ampsq_pv_opt: PV pump with ring radius r_r; "
             "ampsq_pv_057: PV pump with ring radius --rrp (default 2); "
             "ampsq_gauss: gaussian pump"),
    "fig4": ("spectra for PV pumps with OAM 0, +-3, +-12, relative to |A(0,0,0)|^2",
             "ell1; p_l<L>: |A(ell1, L-ell1, L)|^2 / |A(0,0,0)|^2 (lm = minus)"),
    "fig5a": ("normalised spectra for the optimal PV and the gaussian pump",
              "ell1; p_pv, p_gauss: |A|^2 / sum over the full spectrum"),
    "fig5b": ("Schmidt number against truncation for the same two pumps",
              "ell_max; d = 2 ell_max + 1; K_pv, K_gauss: Schmidt numbers"),
    "spectrum": ("joint spectrum for a custom pump",
                 "pump_ell; ell1; ell2; amplitude A; prob |A|^2; "
                 "prob_rel |A|^2 / |A(0,0,0)|^2"),
    "state": ("fibre-filtered two-photon state for a pump superposition",
              "ell1; ell2; re, im: coefficient; prob: |coefficient|^2"),
    "schmidt": ("Schmidt number scan for a single-OAM pump",
                "ell_max; d = 2 ell_max + 1; K"),
    "diagram": ("allowed (ell1, ell2) cells inside the fibre square",
                "ell1; ell2; occupied: 1 if the pair is produced and transmitted"),
}


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


_PUMP_TERM = re.compile(
    r"^\s*(?P<ell>[+-]?\d+)\s*:\s*(?P<val>[^,]+?)\s*$")


def parse_pump(text: str) -> dict[int, complex]:
    """Parse ``"ell:re[+im i]"`` pairs, e.g. ``"12:0.7071,-12:0.7071"`` or ``"3:1+2i"``."""
    out: dict[int, complex] = {}
    for chunk in text.split(","):
        m = _PUMP_TERM.match(chunk)
        if not m:
            raise CliError(f"bad pump term {chunk!r}; expected ell:coeff")
        ell = int(m["ell"])
        if ell in out:
            raise CliError(f"pump OAM {ell} given twice")
        val = m["val"].replace(" ", "").replace("i", "j")
        try:
            out[ell] = complex(val)
        except ValueError:
            raise CliError(f"bad pump coefficient {m['val']!r}") from None
    if all(c == 0 for c in out.values()):
        raise CliError("pump coefficients are all zero")
    return out


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(f"{float(v):.{SIG_DIGITS}g}")


def _csv_cell(v):
    v = _fmt(v)
    return str(v) if isinstance(v, int) else f"{v:.{SIG_DIGITS}g}"


def write_output(path: Path, fmt: str, command: str, columns: dict[str, list],
                 params: dict, summary: dict) -> None:
    names = list(columns)
    n = len(columns[names[0]]) if names else 0
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(names)
            for i in range(n):
                w.writerow([_csv_cell(columns[c][i]) for c in names])
    else:
        doc = {
            "command": command,
            "parameters": params,
            "columns": {c: [_fmt(v) for v in columns[c]] for c in names},
            "summary": {k: (_fmt(v) if isinstance(v, (int, float, np.number)) else v)
                        for k, v in summary.items()},
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1, sort_keys=False)
            fh.write("\n")


def _pos(name):
    def conv(s):
        try:
            v = float(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number") from None
        if not v > 0 or not math.isfinite(v):
            raise argparse.ArgumentTypeError(f"{name} must be positive")
        return v
    return conv


def _nonneg_float(s):
    v = float(s)
    if not v >= 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _nonneg_int(s):
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("geometry (units of w0)")
    g.add_argument("--rr", type=_nonneg_float, default=DEFAULT_RING_RADIUS,
                   help="down-converted PV ring radius (default %(default)s)")
    g.add_argument("--w0", type=_pos("--w0"), default=1.0,
                   help="down-converted PV width; sets the length unit (default 1)")
    g.add_argument("--wp", type=_pos("--wp"), default=None, help="pump width")
    g.add_argument("--rrp", type=_nonneg_float, default=None, help="pump ring radius")
    o = common.add_argument_group("output")
    o.add_argument("--out", type=Path, default=None,
                   help="output file (default <command>.<format>)")
    o.add_argument("--format", choices=("csv", "json"), default="csv")

    parser = _Parser(prog="pvspdc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    subs = {}
    for name, (desc, cols) in _HELP.items():
        subs[name] = sub.add_parser(
            name, parents=[common], help=desc, description=desc,
            epilog=f"CSV columns: {', '.join(COLUMNS[name])}.  {cols}.")

    subs["fig3"].add_argument("--wp-min", type=_pos("--wp-min"), default=0.1)
    subs["fig3"].add_argument("--wp-max", type=_pos("--wp-max"), default=4.0)
    subs["fig3"].add_argument("--wp-step", type=_pos("--wp-step"), default=0.02)
    subs["fig4"].add_argument("--lmax", type=_nonneg_int, default=40,
                              help="tabulate ell1 in [-lmax, lmax] (default 40)")
    subs["fig5a"].add_argument("--lmax", type=_nonneg_int, default=60,
                               help="tabulate ell1 in [-lmax, lmax] (default 60)")
    for name in ("fig5a", "fig5b"):
        subs[name].add_argument("--gauss-wp", type=_pos("--gauss-wp"),
                                default=GAUSSIAN_COMPARISON_WIDTH,
                                help="gaussian pump width (default %(default)s)")
    subs["fig5a"].add_argument("--band", type=_nonneg_int, action="append",
                               help="report the probability share with |ell1| <= band "
                                    "(repeatable; default 6 and 15)")
    subs["fig5b"].add_argument("--lmax", type=_nonneg_int, default=150,
                               help="largest truncation (default 150)")
    subs["spectrum"].add_argument("--pump", default="0:1",
                                  help="ell:coeff pairs, or 'gaussian' (default 0:1)")
    subs["spectrum"].add_argument("--lmax", type=_nonneg_int, default=40,
                                  help="ell1 in [-lmax, lmax] (default 40)")
    subs["state"].add_argument("--pump", required=True,
                               help="ell:re[+im i] pairs, e.g. '12:0.7071,-12:0.7071'")
    subs["state"].add_argument("--lmax", type=_nonneg_int, default=6,
                               help="fibre supports |ell| <= lmax (default 6)")
    subs["state"].add_argument("--source", choices=("limited", "exact"), default="limited",
                               help="amplitude model (default limited)")
    subs["schmidt"].add_argument("--pump", default="0:1",
                                 help="single OAM as 'ell:1', or 'gaussian' (default 0:1)")
    subs["schmidt"].add_argument("--lmax", type=_nonneg_int, default=60,
                                 help="largest truncation (default 60)")
    subs["diagram"].add_argument("--pump", default="0:1", help="ell:coeff pairs")
    subs["diagram"].add_argument("--lmax", type=_nonneg_int, default=6,
                                 help="fibre supports |ell| <= lmax (default 6)")
    return parser


def _signal(args) -> SignalGeometry:
    return SignalGeometry(args.rr * args.w0, args.w0)


def _pump_from(args, text: str) -> PumpSpec:
    w0 = args.w0
    if text.strip().lower() in ("gauss", "gaussian"):
        wp = args.wp if args.wp is not None else GAUSSIAN_COMPARISON_WIDTH
        return PumpSpec.gaussian(wp * w0)
    wp = args.wp if args.wp is not None else OPTIMAL_PUMP_WIDTH
    rrp = args.rrp if args.rrp is not None else args.rr
    return PumpSpec.superposition(parse_pump(text), rrp * w0, wp * w0)


def _params(args) -> dict:
    skip = {"out", "format", "command"}
    return {k: (str(v) if isinstance(v, Path) else v)
            for k, v in sorted(vars(args).items()) if k not in skip}


def cmd_fig3(args):
    sig = _signal(args)
    if args.wp_max < args.wp_min:
        raise CliError("--wp-max must not be below --wp-min")
    n = int(math.floor((args.wp_max - args.wp_min) / args.wp_step + 1e-9)) + 1
    grid = [round(args.wp_min + i * args.wp_step, 12) for i in range(n)]
    phys = [w * args.w0 for w in grid]
    cols = {"w_p": grid}
    rrp057 = (args.rrp if args.rrp is not None else 2.0) * args.w0
    curves = {}
    for fam, col in ((PumpFamily.PV_OPT, "ampsq_pv_opt"), (PumpFamily.PV_057, "ampsq_pv_057"),
                     (PumpFamily.GAUSSIAN, "ampsq_gauss")):
        if fam is PumpFamily.PV_057:
            curves[col] = [a for _, a in _scan_ring(rrp057, phys, sig)]
        else:
            curves[col] = [a for _, a in scan_pump_width(fam, phys, sig)]
        cols[col] = curves[col]
    i_opt = int(np.argmax(curves["ampsq_pv_opt"]))
    w_opt, a_opt = peak_pump_width(PumpFamily.PV_OPT, (0.1 * args.w0, 12.0 * args.w0), sig)
    w_g, a_g = peak_pump_width(PumpFamily.GAUSSIAN, (0.1 * args.w0, 12.0 * args.w0), sig)
    summary = {
        "grid_argmax_pv_opt": grid[i_opt],
        "peak_width_pv_opt": w_opt / args.w0,
        "peak_ampsq_pv_opt": a_opt,
        "peak_width_gauss": w_g / args.w0,
        "peak_ampsq_gauss": a_g,
        "peak_ratio": a_opt / a_g,
    }
    line = (f"fig3: PV-optimal peak at w_p={w_opt / args.w0:.4f} (grid {grid[i_opt]:.2f}), "
            f"gaussian peak at w_p={w_g / args.w0:.3f}, peak ratio {a_opt / a_g:.3f}")
    return cols, summary, line


def _scan_ring(ring, widths, sig):
    exact = SignalGeometry(sig.ring_radius, sig.width, ModeKind.PV_EXACT)
    out = []
    for w in widths:
        pm = normalize(RadialMode(ModeKind.PV_APPROX, 0, ring, w))
        a = overlap_amplitude(0, 0, (0, pm), exact)
        out.append((w, a * a))
    return out


def _pv_pump(args, ell=0) -> PumpSpec:
    wp = (args.wp if args.wp is not None else OPTIMAL_PUMP_WIDTH) * args.w0
    rrp = (args.rrp if args.rrp is not None else args.rr) * args.w0
    return PumpSpec.pv(ell, rrp, wp)


def cmd_fig4(args):
    sig = _signal(args)
    ells = [0, 3, -3, 12, -12]
    names = ["p_l0", "p_l3", "p_lm3", "p_l12", "p_lm12"]
    rng = (-args.lmax - 12, args.lmax + 12)
    cols = {"ell1": list(range(-args.lmax, args.lmax + 1))}
    ref = None
    summary = {}
    for ell, name in zip(ells, names):
        js = joint_spectrum(_pv_pump(args, ell), rng, sig)
        ref = js.ref_amp_sq
        rel = js.normalized(ell)
        cols[name] = [rel[l] for l in cols["ell1"]]
        # curves are symmetric about ell/2, so the centroid lands there
        summary[f"centroid_{name[2:]}"] = sum(l * p for l, p in rel.items()) / sum(rel.values()) + 0.0
    band = range(-min(6, args.lmax), min(6, args.lmax) + 1)
    flat = min(cols["p_l0"][args.lmax + l] for l in band)
    summary = {"ref_amp_sq": ref, "min_rel_prob_abs_ell1_le_6": flat, **summary}
    line = (f"fig4: |A(0,0,0)|^2={ref:.6g}; pump ell=0 spectrum >= {flat:.4f} of peak "
            f"for |ell1|<=6; centroids at ell/2: "
            + ", ".join(f"{k[9:]}={v:.3f}" for k, v in summary.items() if k.startswith("centroid")))
    return cols, summary, line


def cmd_fig5a(args):
    sig = _signal(args)
    bands = args.band or [6, 15]
    pv, _ = full_slice(_pv_pump(args, 0), 0, sig)
    ga, _ = full_slice(PumpSpec.gaussian(args.gauss_wp * args.w0), 0, sig)
    tot_pv, tot_ga = sum(pv.probs.values()), sum(ga.probs.values())
    ell1 = list(range(-args.lmax, args.lmax + 1))
    cols = {"ell1": ell1,
            "p_pv": [pv.probs.get(l, 0.0) / tot_pv for l in ell1],
            "p_gauss": [ga.probs.get(l, 0.0) / tot_ga for l in ell1]}
    summary = {}
    parts = []
    for b in bands:
        fp, fg = concentration_fraction(pv, b), concentration_fraction(ga, b)
        summary[f"fraction_pv_band_{b}"] = fp
        summary[f"fraction_gauss_band_{b}"] = fg
        parts.append(f"|ell1|<={b}: PV {fp:.3f} vs gaussian {fg:.3f}")
    return cols, summary, "fig5a: " + "; ".join(parts)


def cmd_fig5b(args):
    sig = _signal(args)
    pv, _ = full_slice(_pv_pump(args, 0), 0, sig)
    ga, _ = full_slice(PumpSpec.gaussian(args.gauss_wp * args.w0), 0, sig)
    grid = list(range(0, args.lmax + 1))
    kp = schmidt_scan(pv, grid)
    kg = schmidt_scan(ga, grid)
    cols = {"ell_max": grid, "d": [r[2] for r in kp],
            "K_pv": [r[1] for r in kp], "K_gauss": [r[1] for r in kg]}
    summary = {"K_pv_at_lmax": kp[-1][1], "K_gauss_at_lmax": kg[-1][1]}
    line = (f"fig5b: at ell_max={args.lmax} K_pv={kp[-1][1]:.2f}, "
            f"K_gauss={kg[-1][1]:.2f} (d={kp[-1][2]})")
    return cols, summary, line


def cmd_spectrum(args):
    sig = _signal(args)
    pump = _pump_from(args, args.pump)
    js = joint_spectrum(pump, (-args.lmax, args.lmax), sig)
    rows = sorted(js.entries.items(), key=lambda kv: (kv[0][0] + kv[0][1], kv[0][0]))
    cols = {"pump_ell": [a + b for (a, b), _ in rows],
            "ell1": [a for (a, _), _ in rows],
            "ell2": [b for (_, b), _ in rows],
            "amplitude": [v for _, v in rows],
            "prob": [v * v for _, v in rows],
            "prob_rel": [v * v / js.ref_amp_sq for _, v in rows]}
    summary = {"ref_amp_sq": js.ref_amp_sq, "entries": len(rows)}
    return cols, summary, f"spectrum: {len(rows)} entries, |A(0,0,0)|^2={js.ref_amp_sq:.6g}"


def cmd_state(args):
    pump = _pump_from(args, args.pump)
    fiber = RcfSpec.symmetric(args.lmax, args.rr * args.w0, args.w0)
    source = AmplitudeSource(args.source)
    state = build_filtered_state(pump, fiber, source)
    k, lam = state_schmidt(state)
    cols = {"ell1": [t[0] for t in state.terms], "ell2": [t[1] for t in state.terms],
            "re": [t[2].real for t in state.terms], "im": [t[2].imag for t in state.terms],
            "prob": [abs(t[2]) ** 2 for t in state.terms]}
    summary = {"schmidt_number": k, "schmidt_coefficients": [_fmt(v) for v in lam],
               "terms": len(state.terms)}
    if state.transmitted is not None:
        summary["transmitted_fraction"] = state.transmitted
    return cols, summary, f"state: {len(state.terms)} terms, K={k:.6f}"


def cmd_schmidt(args):
    sig = _signal(args)
    pump = _pump_from(args, args.pump)
    if len(pump.ells) != 1:
        raise CliError("schmidt needs a single-OAM pump")
    sl, _ = full_slice(pump, pump.ells[0], sig)
    rows = schmidt_scan(sl, range(0, args.lmax + 1))
    cols = {"ell_max": [r[0] for r in rows], "d": [r[2] for r in rows], "K": [r[1] for r in rows]}
    summary = {"K_at_lmax": rows[-1][1]}
    return cols, summary, f"schmidt: K={rows[-1][1]:.3f} at ell_max={args.lmax}"


def cmd_diagram(args):
    pump = _pump_from(args, args.pump)
    fiber = RcfSpec.symmetric(args.lmax, args.rr * args.w0, args.w0)
    dia = diagonal_diagram(pump, fiber)
    ell1, ell2, occ = [], [], []
    for i, a in enumerate(dia.ell1):
        for j, b in enumerate(dia.ell2):
            ell1.append(a)
            ell2.append(b)
            occ.append(int(dia.occupied[i, j]))
    cols = {"ell1": ell1, "ell2": ell2, "occupied": occ}
    return cols, {"occupied_cells": dia.count}, f"diagram: {dia.count} occupied cells"


COMMANDS = {
    "fig3": cmd_fig3, "fig4": cmd_fig4, "fig5a": cmd_fig5a, "fig5b": cmd_fig5b,
    "spectrum": cmd_spectrum, "state": cmd_state, "schmidt": cmd_schmidt,
    "diagram": cmd_diagram,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = args.out or Path(f"{args.command}.{args.format}")
    try:
        cols, summary, line = COMMANDS[args.command](args)
    except (CliError, NoSupportedModesError, ValueError) as exc:
        print(f"pvspdc {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except QuadratureError as exc:
        print(f"pvspdc {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 2
    write_output(out, args.format, args.command, cols, _params(args), summary)
    print(line)
    return 0


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
