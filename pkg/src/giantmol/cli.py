"""Command-line front end.

Subcommands:

* ``spectrum``  - sweep the detuning grid and write a CSV/JSON table.
* ``map``       - two-axis reflection map (delta x theta0 or delta x g).
* ``peaks``     - analytic peak/dip report as JSON (constant phase or
  delayed, chosen by --tau).
* ``fano``      - two-Lorentzian decomposition report as JSON.
* ``verify``    - randomized cross-check of the closed forms against
  the real-space solver.

Exit codes: 0 success, 1 usage or parameter error, 2 verification
failure, 3 I/O error.  Output files start with a ``#``-prefixed
metadata header that round-trips: parsing it back yields a descriptor
that reproduces the file byte for byte.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__, closedform, realspace
from .analysis import (
    NotApplicable,
    PeakReport,
    fano_components,
    fano_decomposition_residual,
    markovian_peaks,
    narrow_resonance,
    nonmarkovian_extrema,
)
from .closedform import DEN_GUARD, FormulaVariant, default_variant, sweep
from .model import (
    Configuration,
    GiantmolError,
    GridSpec,
    PhaseModel,
    SystemParams,
    phase_shift,
)

OK = 0
USAGE = 1
VERIFY_FAIL = 2
IO_ERROR = 3


def _fmt(value: float) -> str:
    return "%.17g" % float(value)


def _fmt_grid(grid: GridSpec) -> str:
    return f"{_fmt(grid.delta_min)}:{_fmt(grid.delta_max)}:{grid.steps}"


def _parse_grid(text: str) -> GridSpec:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"grid must be min:max:steps, got {text!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"grid must be min:max:steps with numeric fields, got {text!r}")
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise argparse.ArgumentTypeError(f"grid needs finite min < max, got {text!r}")
    if not 2 <= steps <= 10_000_000:
        raise argparse.ArgumentTypeError(f"grid steps must lie in [2, 1e7], got {steps}")
    return GridSpec(lo, hi, steps)


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures remapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunDescriptor:
    """Everything needed to reproduce one command's output."""

    command: str
    config: str | None = None
    gamma1: float = 1.0
    gamma2: float = 1.0
    g: float = 0.0
    kappa: float = 0.0
    theta0_pi: float | None = None
    theta0_rad: float | None = None
    tau: float = 0.0
    variant: str = "equal"
    delta: GridSpec | None = None
    axis2: str | None = None
    axis2_grid: GridSpec | None = None
    fmt: str = "csv"

    def theta0_over_pi(self) -> float:
        if self.theta0_rad is not None:
            return (self.theta0_rad % (2 * math.pi)) / math.pi
        return (self.theta0_pi or 0.0) % 2.0 if (self.theta0_pi or 0.0) < 0.0 \
            else (self.theta0_pi or 0.0)

    def system_params(self) -> SystemParams:
        phase = PhaseModel(theta0_over_pi=self.theta0_over_pi(), tau=self.tau,
                           markovian=self.tau == 0.0)
        return SystemParams(gamma1=self.gamma1, gamma2=self.gamma2, g=self.g,
                            kappa=self.kappa, phase=phase)

    def configuration(self) -> Configuration:
        if self.config is None:
            raise GiantmolError("descriptor has no configuration")
        return Configuration.from_name(self.config)

    def formula_variant(self) -> FormulaVariant:
        return FormulaVariant(self.variant)

    def metadata_pairs(self) -> list[tuple[str, str]]:
        pairs = [("version", __version__), ("command", self.command)]
        if self.config is not None:
            pairs.append(("config", self.config))
        pairs += [("gamma1", _fmt(self.gamma1)), ("gamma2", _fmt(self.gamma2)),
                  ("g", _fmt(self.g)), ("kappa", _fmt(self.kappa))]
        if self.theta0_rad is not None:
            pairs.append(("theta0_rad", _fmt(self.theta0_rad)))
        else:
            pairs.append(("theta0_pi", _fmt(self.theta0_pi or 0.0)))
        pairs += [("tau", _fmt(self.tau)),
                  ("markovian", "true" if self.tau == 0.0 else "false"),
                  ("variant", self.variant)]
        if self.delta is not None:
            pairs.append(("delta_grid", _fmt_grid(self.delta)))
        if self.axis2 is not None and self.axis2_grid is not None:
            pairs.append(("axis2", self.axis2))
            pairs.append(("axis2_grid", _fmt_grid(self.axis2_grid)))
        pairs.append(("format", self.fmt))
        return pairs

    def to_args(self) -> list[str]:
        """Command-line argument vector reproducing this run."""
        args = [self.command]
        if self.config is not None:
            args += ["--config", self.config]
        args += ["--gamma1", _fmt(self.gamma1), "--gamma2", _fmt(self.gamma2),
                 "--kappa", _fmt(self.kappa), "--tau", _fmt(self.tau),
                 "--variant", self.variant]
        if self.axis2 == "g":
            args += ["--g", _fmt_grid(self.axis2_grid)]
        else:
            args += ["--g", _fmt(self.g)]
        if self.theta0_rad is not None:
            args += ["--theta0-rad", _fmt(self.theta0_rad)]
        elif self.axis2 == "theta0_pi":
            args += ["--theta0-pi", _fmt_grid(self.axis2_grid)]
        else:
            args += ["--theta0-pi", _fmt(self.theta0_pi or 0.0)]
        if self.delta is not None:
            args += ["--delta", _fmt_grid(self.delta)]
        if self.command in ("spectrum", "map"):
            args += ["--format", self.fmt]
        return args

    @classmethod
    def from_metadata(cls, text: str) -> "RunDescriptor":
        """Rebuild a descriptor from a written output file."""
        if text.lstrip().startswith("{"):
            meta = json.loads(text)["metadata"]
        else:
            meta = {}
            for line in text.splitlines():
                if not line.startswith("#"):
                    break
                body = line[1:].strip()
                if ":" not in body:
                    continue
                key, value = body.split(":", 1)
                meta[key.strip()] = value.strip()
        desc = cls(command=meta["command"])
        desc.config = meta.get("config")
        desc.gamma1 = float(meta.get("gamma1", 1.0))
        desc.gamma2 = float(meta.get("gamma2", 1.0))
        desc.g = float(meta.get("g", 0.0))
        desc.kappa = float(meta.get("kappa", 0.0))
        if "theta0_rad" in meta:
            desc.theta0_rad = float(meta["theta0_rad"])
        else:
            desc.theta0_pi = float(meta.get("theta0_pi", 0.0))
        desc.tau = float(meta.get("tau", 0.0))
        desc.variant = meta.get("variant", "equal")
        if "delta_grid" in meta:
            desc.delta = _parse_grid(meta["delta_grid"])
        if "axis2" in meta:
            desc.axis2 = meta["axis2"]
            desc.axis2_grid = _parse_grid(meta["axis2_grid"])
        desc.fmt = meta.get("format", "csv")
        return desc


def _write_output(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)


def _metadata_header(desc: RunDescriptor, extra: list[tuple[str, str]]) -> str:
    lines = ["# giantmol output"]
    for key, value in desc.metadata_pairs() + extra:
        lines.append(f"# {key}: {value}")
    return "\n".join(lines) + "\n"


def _json_document(desc: RunDescriptor, extra: list[tuple[str, str]],
                   payload: dict) -> str:
    doc = {"metadata": dict(desc.metadata_pairs() + extra)}
    doc.update(payload)
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Argument plumbing
# ---------------------------------------------------------------------------

_CONFIG_NAMES = ("separated", "braided", "nested")

# Flags whose value may legitimately start with '-' (negative numbers or
# grids like -10:10:2001).  argparse would otherwise read the value as a
# new option, so these get glued into --flag=value form up front.
_VALUE_FLAGS = {"--delta", "--theta0-pi", "--theta0-rad", "--g", "--gamma1",
                "--gamma2", "--kappa", "--tau", "--max-rel-err"}


def _preprocess(argv: list[str]) -> list[str]:
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (tok in _VALUE_FLAGS and i + 1 < len(argv)
                and len(argv[i + 1]) > 1 and argv[i + 1][0] == "-"
                and (argv[i + 1][1].isdigit() or argv[i + 1][1] == ".")):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def _add_system_args(parser: _Parser, axis_flags: bool = False) -> None:
    parser.add_argument("--config", required=True, choices=_CONFIG_NAMES,
                        help="coupling-point layout")
    parser.add_argument("--gamma1", type=float, default=1.0,
                        help="decay rate of atom a (units of the reference rate)")
    parser.add_argument("--gamma2", type=float, default=1.0,
                        help="decay rate of atom b")
    g_kwargs = {"type": str} if axis_flags else {"type": float}
    parser.add_argument("--g", default="0" if axis_flags else 0.0,
                        help="inter-atom coupling" + (" (scalar or grid)" if axis_flags else ""),
                        **g_kwargs)
    parser.add_argument("--kappa", type=float, default=0.0,
                        help="intrinsic loss rate")
    group = parser.add_mutually_exclusive_group()
    th_kwargs = {"type": str} if axis_flags else {"type": float}
    group.add_argument("--theta0-pi", dest="theta0_pi",
                       default="0" if axis_flags else 0.0,
                       help="phase offset in multiples of pi"
                            + (" (scalar or grid)" if axis_flags else ""),
                       **th_kwargs)
    group.add_argument("--theta0-rad", dest="theta0_rad", type=float, default=None,
                       help="phase offset in radians")
    parser.add_argument("--tau", type=float, default=0.0,
                        help="propagation delay between coupling points; "
                             "0 selects the constant-phase model")
    parser.add_argument("--variant", choices=("auto", "equal", "general"),
                        default="auto", help="formula family to evaluate")


def _resolve_variant(args, params: SystemParams) -> FormulaVariant:
    if args.variant == "auto":
        return default_variant(params)
    return FormulaVariant("general" if args.variant == "general" else "equal")


def _descriptor(command: str, args, *, delta: GridSpec | None,
                axis2: str | None = None, axis2_grid: GridSpec | None = None,
                g_value: float | None = None,
                theta0_pi_value: float | None = None) -> RunDescriptor:
    desc = RunDescriptor(command=command)
    desc.config = args.config
    desc.gamma1 = args.gamma1
    desc.gamma2 = args.gamma2
    desc.g = args.g if g_value is None and not isinstance(args.g, str) else (g_value or 0.0)
    desc.kappa = args.kappa
    if args.theta0_rad is not None:
        desc.theta0_rad = args.theta0_rad
    else:
        raw = args.theta0_pi
        desc.theta0_pi = theta0_pi_value if isinstance(raw, str) else raw
        if desc.theta0_pi is None:
            desc.theta0_pi = 0.0
    desc.tau = args.tau
    desc.delta = delta
    desc.axis2 = axis2
    desc.axis2_grid = axis2_grid
    desc.fmt = getattr(args, "format", "csv")
    params = desc.system_params()
    desc.variant = _resolve_variant(args, params).value
    return desc


_PLOT_SPECTRUM = '''#!/usr/bin/env python3
"""Plot transmission and reflection from a giantmol spectrum CSV."""
import matplotlib.pyplot as plt
import numpy as np

data = np.genfromtxt({path!r}, delimiter=",", comments="#", names=True)
fig, ax = plt.subplots()
ax.plot(data["delta"], data["R"], label="R")
ax.plot(data["delta"], data["T"], label="T")
ax.set_xlabel("detuning (units of the reference rate)")
ax.set_ylabel("coefficient")
ax.set_ylim(-0.02, 1.02)
ax.legend()
fig.tight_layout()
plt.show()
'''

_PLOT_MAP = '''#!/usr/bin/env python3
"""Plot a giantmol two-axis reflection map CSV."""
import matplotlib.pyplot as plt
import numpy as np

data = np.genfromtxt({path!r}, delimiter=",", comments="#", names=True)
axis1 = np.unique(data[data.dtype.names[0]])
axis2 = np.unique(data[data.dtype.names[1]])
grid = data["R"].reshape(axis1.size, axis2.size)
fig, ax = plt.subplots()
mesh = ax.pcolormesh(axis1, axis2, grid.T, shading="nearest", vmin=0.0, vmax=1.0)
ax.set_xlabel(data.dtype.names[0])
ax.set_ylabel(data.dtype.names[1])
fig.colorbar(mesh, label="R")
fig.tight_layout()
plt.show()
'''


def _emit_plot_script(args, template: str) -> None:
    if not getattr(args, "emit_plot_script", False):
        return
    if args.output == "-":
        raise GiantmolError("--emit-plot-script needs a file output, not stdout")
    script_path = args.output + ".plot.py"
    with open(script_path, "w", encoding="utf-8") as handle:
        handle.write(template.format(path=args.output))


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------


def cmd_spectrum(args) -> int:
    desc = _descriptor("spectrum", args, delta=args.delta)
    config = desc.configuration()
    params = desc.system_params()
    spectrum = sweep(config, params, args.delta, desc.formula_variant())

    thetas = np.asarray(phase_shift(params, spectrum.deltas), dtype=float)
    extra = [("backend", spectrum.metadata.backend),
             ("threads", str(spectrum.metadata.threads)),
             ("guard_notes", str(len(spectrum.metadata.notes)))]
    extra += [("note", note) for note in spectrum.metadata.notes]

    if desc.fmt == "csv":
        rows = ["delta,re_t,im_t,re_r,im_r,T,R,theta"]
        for point, theta in zip(spectrum.points, thetas):
            rows.append(",".join(_fmt(v) for v in (
                point.delta, point.t.real, point.t.imag,
                point.r.real, point.r.imag, point.T, point.R, theta)))
        text = _metadata_header(desc, extra) + "\n".join(rows) + "\n"
    else:
        payload = {
            "columns": ["delta", "re_t", "im_t", "re_r", "im_r", "T", "R", "theta"],
            "rows": [[p.delta, p.t.real, p.t.imag, p.r.real, p.r.imag, p.T, p.R,
                      float(th)] for p, th in zip(spectrum.points, thetas)],
        }
        text = _json_document(desc, extra, payload)

    _write_output(args.output, text)
    _emit_plot_script(args, _PLOT_SPECTRUM)
    return OK


def cmd_map(args) -> int:
    g_is_grid = isinstance(args.g, str) and ":" in args.g
    th_is_grid = isinstance(args.theta0_pi, str) and ":" in args.theta0_pi
    if args.theta0_rad is not None and th_is_grid:
        raise GiantmolError("the swept phase axis must use --theta0-pi")
    if g_is_grid == th_is_grid:
        raise GiantmolError("map needs exactly one swept axis: give a grid "
                            "min:max:steps for either --theta0-pi or --g")

    if g_is_grid:
        axis2_name = "g"
        axis2_grid = _parse_grid(args.g)
        theta0_scalar = float(args.theta0_pi) if args.theta0_rad is None else None
        g_scalar = None
    else:
        axis2_name = "theta0_pi"
        axis2_grid = _parse_grid(args.theta0_pi)
        theta0_scalar = None
        g_scalar = float(args.g)

    desc = _descriptor("map", args, delta=args.delta, axis2=axis2_name,
                       axis2_grid=axis2_grid, g_value=g_scalar,
                       theta0_pi_value=theta0_scalar)
    config = desc.configuration()

    axis2_values = axis2_grid.deltas()
    reflections = []
    notes: list[str] = []
    for value in axis2_values:
        point_desc = RunDescriptor(**{**desc.__dict__})
        if axis2_name == "g":
            point_desc.g = float(value)
        else:
            point_desc.theta0_pi = float(value)
            point_desc.theta0_rad = None
        params = point_desc.system_params()
        spectrum = sweep(config, params, args.delta, desc.formula_variant())
        reflections.append(spectrum.reflection)
        notes += [f"{axis2_name}={_fmt(value)}: {note}"
                  for note in spectrum.metadata.notes]

    extra = [("guard_notes", str(len(notes)))] + [("note", n) for n in notes]
    deltas = args.delta.deltas()

    if desc.fmt == "csv":
        rows = [f"delta,{axis2_name},R"]
        for i, delta in enumerate(deltas):
            for j, value in enumerate(axis2_values):
                rows.append(f"{_fmt(delta)},{_fmt(value)},{_fmt(reflections[j][i])}")
        text = _metadata_header(desc, extra) + "\n".join(rows) + "\n"
    else:
        payload = {
            "columns": ["delta", axis2_name, "R"],
            "rows": [[float(deltas[i]), float(axis2_values[j]),
                      float(reflections[j][i])]
                     for i in range(deltas.size) for j in range(axis2_values.size)],
        }
        text = _json_document(desc, extra, payload)

    _write_output(args.output, text)
    _emit_plot_script(args, _PLOT_MAP)
    return OK


def _report_payload(report: PeakReport) -> dict:
    def ext(e):
        return {"delta": e.delta, "R": e.R_at, "verified": e.verified}

    return {"report": {
        "condition_met": report.condition_met,
        "center": report.center,
        "radicand": report.radicand,
        "peaks": [ext(p) for p in report.peaks],
        "dips": [ext(d) for d in report.dips],
        "dip": ext(report.dip) if report.dip is not None else None,
        "separation": report.separation,
        "scan_max_R": report.scan_max_R,
    }}


def cmd_peaks(args) -> int:
    desc = _descriptor("peaks", args, delta=args.delta)
    config = desc.configuration()
    params = desc.system_params()
    if params.phase.markovian:
        report = markovian_peaks(config, params)
    else:
        report = nonmarkovian_extrema(config, params,
                                      args.delta.delta_min, args.delta.delta_max,
                                      scan_points=args.delta.steps,
                                      root_tol=args.root_tol)
    _write_output(args.output, _json_document(desc, [], _report_payload(report)))
    return OK


def cmd_fano(args) -> int:
    desc = _descriptor("fano", args, delta=args.delta)
    config = desc.configuration()
    params = desc.system_params()
    comps = fano_components(config, params)
    lam_n, gam_n, center = narrow_resonance(config, params)
    residual = fano_decomposition_residual(config, params, args.delta)
    payload = {"fano": {
        "lambda_plus": comps.lambda_plus,
        "lambda_minus": comps.lambda_minus,
        "gamma_plus": comps.gamma_plus,
        "gamma_minus": comps.gamma_minus,
        "q_plus": comps.q_plus,
        "q_minus": comps.q_minus,
        "c_plus": comps.c_plus,
        "c_minus": comps.c_minus,
        "width_ratio": comps.width_ratio,
        "narrow_branch": comps.narrow_branch,
        "narrow_lambda": lam_n,
        "narrow_gamma": gam_n,
        "narrow_center": center,
        "decomposition_residual": residual,
    }}
    _write_output(args.output, _json_document(desc, [], payload))
    return OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _compare_routes(config: Configuration, params: SystemParams,
                    delta: float) -> tuple[float, dict]:
    """Relative disagreement between the closed form and the solver."""
    attempt_delta = delta
    for attempt in range(2):
        try:
            num_t, num_r, den = closedform.raw_terms(config, params, attempt_delta,
                                                     FormulaVariant.GENERAL_GAMMA)
            if abs(den) < DEN_GUARD:
                raise realspace.SingularSystem("degenerate closed form")
            t_c, r_c = num_t / den, num_r / den
            t_o, r_o = realspace.amplitudes(config, params, attempt_delta)
            break
        except realspace.SingularSystem:
            if attempt == 1:
                return math.inf, {"delta": attempt_delta, "note": "degenerate twice"}
            attempt_delta = delta + closedform.NUDGE
    scale = max(1.0, abs(t_o), abs(r_o))
    err = max(abs(t_c - t_o), abs(r_c - r_o)) / scale
    detail = {
        "delta": attempt_delta,
        "closedform": {"t": [t_c.real, t_c.imag], "r": [r_c.real, r_c.imag]},
        "realspace": {"t": [t_o.real, t_o.imag], "r": [r_o.real, r_o.imag]},
    }
    return err, detail


def _probe_dict_to_inputs(probe: dict) -> tuple[Configuration, SystemParams, float]:
    missing = {"config", "delta"} - set(probe)
    if missing:
        raise GiantmolError(f"--probe is missing keys: {sorted(missing)}")
    config = Configuration.from_name(str(probe["config"]))
    tau = float(probe.get("tau", 0.0))
    phase = PhaseModel(theta0_over_pi=float(probe.get("theta0_pi", 0.0)),
                       tau=tau, markovian=tau == 0.0)
    params = SystemParams(gamma1=float(probe.get("gamma1", 1.0)),
                          gamma2=float(probe.get("gamma2", 1.0)),
                          g=float(probe.get("g", 0.0)),
                          kappa=float(probe.get("kappa", 0.0)),
                          phase=phase)
    return config, params, float(probe["delta"])


def cmd_verify(args) -> int:
    tolerance = args.max_rel_err

    if args.probe is not None:
        try:
            probe = json.loads(args.probe)
        except json.JSONDecodeError as exc:
            raise GiantmolError(f"--probe is not valid JSON: {exc}")
        config, params, delta = _probe_dict_to_inputs(probe)
        err, detail = _compare_routes(config, params, delta)
        print(json.dumps({"probe": probe, "rel_err": err, **detail}, indent=2))
        if err <= tolerance:
            print(f"PASS (tolerance {tolerance:g})")
            return OK
        print(f"FAIL: relative error {err:.3e} exceeds {tolerance:g}")
        return VERIFY_FAIL

    if args.samples < 1:
        raise GiantmolError(f"--samples must be >= 1, got {args.samples}")

    rng = np.random.default_rng(args.seed)
    worst = 0.0
    worst_probe: dict | None = None
    for _ in range(args.samples):
        gamma2 = float(rng.uniform(0.2, 5.0))
        g = float(rng.uniform(0.0, 5.0))
        theta0_pi = float(rng.uniform(0.0, 2.0))
        tau = args.tau if args.tau is not None else float(rng.choice([0.0, 2.0]))
        delta = float(rng.uniform(-10.0, 10.0))
        phase = PhaseModel(theta0_over_pi=theta0_pi, tau=tau, markovian=tau == 0.0)
        params = SystemParams(gamma1=1.0, gamma2=gamma2, g=g, kappa=0.0, phase=phase)
        for name in _CONFIG_NAMES:
            config = Configuration.from_name(name)
            err, _ = _compare_routes(config, params, delta)
            if err > worst:
                worst = err
                worst_probe = {"config": name, "gamma1": 1.0, "gamma2": gamma2,
                               "g": g, "kappa": 0.0, "theta0_pi": theta0_pi,
                               "tau": tau, "delta": delta}

    print(f"configs: {', '.join(_CONFIG_NAMES)}")
    print(f"samples: {args.samples} per config (seed {args.seed})")
    print(f"max relative error: {worst:.3e}")
    if worst <= tolerance:
        print(f"PASS (tolerance {tolerance:g})")
        return OK
    print(f"FAIL: max relative error {worst:.3e} exceeds {tolerance:g}")
    if worst_probe is not None:
        print("reproduce: giantmol verify --probe "
              f"'{json.dumps(worst_probe)}'")
    return VERIFY_FAIL


# ---------------------------------------------------------------------------
# Parser assembly and entry point
# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="giantmol",
                     description="Single-photon scattering spectra of two "
                                 "coupled giant atoms on a 1D waveguide.")
    parser.add_argument("--version", action="version",
                        version=f"giantmol {__version__}")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p_spec = sub.add_parser("spectrum", help="sweep a detuning grid")
    _add_system_args(p_spec)
    p_spec.add_argument("--delta", type=_parse_grid, default=_parse_grid("-10:10:2001"),
                        help="detuning grid min:max:steps")
    p_spec.add_argument("--format", choices=("csv", "json"), default="csv")
    p_spec.add_argument("-o", "--output", default="-",
                        help="output path, or - for stdout")
    p_spec.add_argument("--emit-plot-script", action="store_true",
                        help="also write <output>.plot.py")
    p_spec.set_defaults(func=cmd_spectrum)

    p_map = sub.add_parser("map", help="two-axis reflection map")
    _add_system_args(p_map, axis_flags=True)
    p_map.add_argument("--delta", type=_parse_grid, default=_parse_grid("-10:10:201"),
                       help="detuning grid min:max:steps")
    p_map.add_argument("--format", choices=("csv", "json"), default="csv")
    p_map.add_argument("-o", "--output", default="-")
    p_map.add_argument("--emit-plot-script", action="store_true")
    p_map.set_defaults(func=cmd_map)

    p_peaks = sub.add_parser("peaks", help="peak/dip report (JSON)")
    _add_system_args(p_peaks)
    p_peaks.add_argument("--delta", type=_parse_grid, default=_parse_grid("-10:10:2000"),
                         help="scan range and point count for delayed spectra")
    p_peaks.add_argument("--root-tol", type=float, default=1e-10,
                         help="bisection tolerance on the peak condition")
    p_peaks.add_argument("-o", "--output", default="-")
    p_peaks.set_defaults(func=cmd_peaks)

    p_fano = sub.add_parser("fano", help="two-Lorentzian decomposition (JSON)")
    _add_system_args(p_fano)
    p_fano.add_argument("--delta", type=_parse_grid, default=_parse_grid("-10:10:1001"),
                        help="grid for the decomposition residual check")
    p_fano.add_argument("-o", "--output", default="-")
    p_fano.set_defaults(func=cmd_fano)

    p_verify = sub.add_parser("verify",
                              help="cross-check closed forms against the solver")
    p_verify.add_argument("--samples", type=int, default=1000)
    p_verify.add_argument("--seed", type=int, default=42)
    p_verify.add_argument("--tau", type=float, default=None,
                          help="fix the delay instead of drawing from {0, 2}")
    p_verify.add_argument("--max-rel-err", dest="max_rel_err", type=float,
                          default=1e-9)
    p_verify.add_argument("--probe", default=None,
                          help="JSON parameter set for a single comparison")
    p_verify.set_defaults(func=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(_preprocess(list(argv)))
    try:
        return args.func(args)
    except OSError as exc:
        print(f"giantmol: i/o error: {exc}", file=sys.stderr)
        return IO_ERROR
    except GiantmolError as exc:
        print(f"giantmol: error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
