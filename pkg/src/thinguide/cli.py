"""Command-line front end: ``thinguide <subcommand> --config cfg.json --out dir``.

Exit codes: 0 success, 1 malformed input or violated hypothesis, 2 the input
is not resonant although the config requires it.
"""
import argparse
import json
import math
import os
import sys
import time

import numpy as np
from jsonschema import Draft202012Validator

from . import __version__
from .geometry import (HypothesisError, curvature_from_dict, switchback_curvature, reconstruct_curve,
                       self_intersects)
from .lowenergy import detect_resonance
from .oracle import constants_from_plateaus, scan_margin, shoot_zero_energy
from .output import write_csv, write_json
from .pointlimit import (DIRICHLET, PointInteraction, evolve, gaussian_packet, scattering_matrix,
                         symmetric_grid, transmission_probability)
from .potential import (potential_from_curvature, potential_from_dict, single_well, triple_well)
from .schemas import SCHEMAS

EXIT_OK, EXIT_INPUT, EXIT_NOT_RESONANT = 0, 1, 2


class InputError(Exception):
    """Malformed or schema-violating configuration."""


class NotResonant(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # keep exit code 2 for the non-resonant verdict
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _location(path):
    out = "$"
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def load_config(path, command):
    """Read and validate a config; raises :class:`InputError` with the offending location."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    validator = Draft202012Validator(SCHEMAS[command])
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise InputError(f"{path}: schema violation at {_location(e.absolute_path)}: {e.message}")
    return cfg


def _potential(cfg):
    if "potential" in cfg:
        return potential_from_dict(cfg["potential"])
    return potential_from_curvature(curvature_from_dict(cfg["curvature"]))


def _unit(c1, c2):
    n = math.hypot(c1, c2)
    return c1 / n, c2 / n


def limit_from_analysis(potential, N=1601):
    """Limit interaction and supporting data from the Nyström test and the shooting oracle.

    Constants come from the oracle plateaus when the shooting confirms the
    resonance and from the Nyström null vector otherwise; they are reported
    normalized to unit length.
    """
    rep = detect_resonance(potential, N)
    shot = shoot_zero_energy(potential)
    info = {"nystrom": rep.to_dict(), "threshold": rep.threshold,
            "oracle": {"A": shot.A, "B": shot.B, "dB": shot.dB, "resonant": shot.is_resonant()}}
    if not rep.resonant:
        return DIRICHLET, rep, info
    if shot.is_resonant():
        c1, c2 = constants_from_plateaus(shot.A, shot.B)
        info["constants_source"] = "oracle"
    else:
        c1, c2 = rep.c1, rep.c2
        info["constants_source"] = "nystrom"
    return PointInteraction.resonant(*_unit(c1, c2)), rep, info


def cmd_resonance(cfg, out, args):
    pot = _potential(cfg)
    N = cfg.get("N", 1601)
    op, rep, info = limit_from_analysis(pot, N)
    report = {"schema": 1, **rep.to_dict(), "threshold": rep.threshold, "oracle": info["oracle"],
              "limit": op.to_dict(), "potential": pot.to_dict()}
    write_json(os.path.join(out, "report.json"), report)
    if cfg.get("write_phi", True) and rep.phi0 is not None:
        write_csv(os.path.join(out, "phi0.csv"), ["t", "phi0"], zip(rep.t, np.real(rep.phi0)))
    print(f"resonant={rep.resonant} sigma_min={rep.sigma_min:.6e} c1={rep.c1:.6g} c2={rep.c2:.6g}")
    if cfg.get("require_resonant") and not rep.resonant:
        raise NotResonant("potential has no zero-energy resonance")


def _family(spec):
    kind = spec["kind"]
    if kind == "well_depth":
        b = spec.get("b", 1.0)
        return lambda p: single_well(p, b)
    if kind == "well_width":
        a = spec.get("a", 1.0)
        return lambda p: single_well(a, p)
    if kind == "triple_well_a1":
        a2, a3 = spec["a2"], spec["a3"]
        b1, b2, b3 = spec["beta"]
        return lambda p: triple_well(p, a2, a3, b1 / p, b2 / a2, b3 / a3)
    if kind == "bump_amplitude":
        from .geometry import BumpCurvature
        lo, hi, par = spec.get("from", -1.0), spec.get("to", 1.0), spec.get("parity", "even")
        return lambda p: potential_from_curvature(BumpCurvature(p, lo, hi, par))
    raise InputError(f"unknown family {kind!r}")


def cmd_scan(cfg, out, args):
    family = _family(cfg["family"])
    lo, hi = cfg["range"]
    values = np.linspace(lo, hi, cfg["points"])
    steps = cfg.get("steps", 4000)
    if cfg.get("refine", True):
        margins, roots = scan_margin(family, values, steps)
    else:
        margins = np.array([shoot_zero_energy(family(p), steps).dB for p in values])
        roots = []
    flags = [shoot_zero_energy(family(p), steps).is_resonant() for p in values]
    header, cols = ["param", "margin", "resonant_flag"], [values, margins, flags]
    if cfg.get("sigma_min", False):
        N = cfg.get("N", 801)
        cols.append(np.array([detect_resonance(family(p), N).sigma_min for p in values]))
        header.append("sigma_min")
    write_csv(os.path.join(out, "scan.csv"), header, zip(*cols))
    write_json(os.path.join(out, "roots.json"), {"schema": 1, "family": cfg["family"], "roots": roots})
    print(f"{len(roots)} root(s): " + ", ".join(f"{r:.15g}" for r in roots))


def cmd_limit_op(cfg, out, args):
    pot = _potential(cfg)
    op, rep, info = limit_from_analysis(pot, cfg.get("N", 1601))
    write_json(os.path.join(out, "limit.json"),
               {"schema": 1, **op.to_dict(), "sigma_min": rep.sigma_min,
                "constants_source": info.get("constants_source")})
    sd = scattering_matrix(op)
    # energy independent by construction: every momentum row is identical
    write_csv(os.path.join(out, "scattering.csv"), ["p", "ReT", "ImT", "R_plus", "R_minus"],
              [(p, sd.T, 0.0, sd.R_plus, sd.R_minus) for p in (0.5, 1.0, 2.0, 5.0)])
    print(json.dumps(op.to_dict()))
    if cfg.get("require_resonant") and not op.is_resonant:
        raise NotResonant("limit is Dirichlet decoupling (no zero-energy resonance)")


def _k(cfg):
    re, im = cfg.get("k", [0.0, 1.0])
    if not im > 0:
        raise InputError("schema violation at $.k[1]: Im k must be positive")
    return complex(re, im)


def _limit(cfg, potential):
    spec = cfg.get("limit", "auto")
    if spec == "auto":
        op, _, _ = limit_from_analysis(potential)
        return op
    return PointInteraction.from_dict(spec)


def _check_decreasing(eps_list):
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise InputError("schema violation at $.eps_list: values must be strictly decreasing")


def _wrong_limit(op):
    return [DIRICHLET] if op.is_resonant else [PointInteraction.resonant(1.0, 0.0)]


def cmd_converge_1d(cfg, out, args):
    from .scaled1d import convergence_study_1d, default_grid

    pot = _potential(cfg)
    _check_decreasing(cfg["eps_list"])
    op = _limit(cfg, pot)
    if cfg.get("require_resonant") and not op.is_resonant:
        raise NotResonant("limit is Dirichlet decoupling (no zero-energy resonance)")
    grid = cfg.get("grid", {})
    x = default_grid(grid.get("half_width", 10.0), grid.get("step", 1e-3))
    controls = _wrong_limit(op) if cfg.get("controls", True) else []
    t0 = time.perf_counter()
    table = convergence_study_1d(pot, op, _k(cfg), cfg["eps_list"], x=x, N=cfg.get("N", 801),
                                 workers=args.threads, controls=controls)
    write_csv(os.path.join(out, "convergence_1d.csv"), ["eps", "error"], table.rows())
    summary = {"schema": 1, "limit": op.to_dict(), **table.summary()}
    if controls:
        ctrl = next(iter(summary["controls"].values()))
        summary["control_plateau"] = bool(ctrl[-1] >= 0.5 * ctrl[0])
    write_json(os.path.join(out, "summary_1d.json"), summary)
    for e, r in table.rows():
        print(f"eps={e:g} error={r:.6e}")
    print(f"slope={table.slope:.4f} monotone={table.monotone} time={time.perf_counter() - t0:.2f}s")


def cmd_converge_2d(cfg, out, args):
    from .strip2d import GridPolicy, LPolicy, convergence_study_2d, default_curvature

    _check_decreasing(cfg["eps_list"])
    curv = default_curvature() if cfg["curvature"] == "default" else curvature_from_dict(cfg["curvature"])
    pot = potential_from_curvature(curv)
    op = _limit(cfg, pot)
    if cfg.get("require_resonant") and not op.is_resonant:
        raise NotResonant("limit is Dirichlet decoupling (no zero-energy resonance)")
    controls = _wrong_limit(op) if cfg.get("controls", True) else []
    policy = GridPolicy(**cfg.get("grid_policy", {}))
    lpol = LPolicy(**cfg.get("L_policy", {}))
    progress = lambda msg: print(msg, flush=True)
    study = convergence_study_2d(curv, op, cfg.get("alpha", 3.0), cfg.get("d", 1.0), _k(cfg),
                                 cfg["eps_list"], controls, policy, lpol, args.threads, progress,
                                 cfg.get("refine", True))
    write_csv(os.path.join(out, "diagonal.csv"), ["eps", "error"], study.diagonal.rows())
    write_csv(os.path.join(out, "off_diagonal.csv"), ["eps", "norm"], study.off_diagonal.rows())
    summary = {"schema": 1, "limit": op.to_dict(), "curvature": curv.to_dict(), **study.summary()}
    summary.pop("wall_times")
    checks = {"diagonal_monotone": study.diagonal.monotone,
              "off_diagonal_halved": study.off_diagonal_drop >= 2.0,
              "refinement_ok": study.refinement_ok}
    if controls:
        ctrl = next(iter(study.diagonal.extra["controls"].values()))
        checks["control_plateau"] = bool(ctrl[-1] >= 0.5 * ctrl[0])
    summary["checks"] = checks
    write_json(os.path.join(out, "summary_2d.json"), summary)
    print(f"slope={study.diagonal.slope:.4f} off_drop={study.off_diagonal_drop:.3g} "
          f"total_time={sum(study.wall_times):.2f}s checks={checks}")


def cmd_curve(cfg, out, args):
    step = cfg.get("step", 1e-3)
    pad = cfg.get("pad", 3.0)
    if "switchback" in cfg:
        ex = cfg["switchback"]
        a, b = ex["a"], ex["b"]
        rows = []
        for x in ex["x"]:
            prof = switchback_curvature(a, b, x)
            hit, _ = self_intersects(reconstruct_curve(prof, -pad, b + pad, step))
            rows.append((x, prof.total_angle(), 2 * a * (2 * x - b), hit))
        write_csv(os.path.join(out, "theta.csv"), ["x", "theta", "expected", "self_intersects"], rows)
        for r in rows:
            print(f"x={r[0]:g} theta={r[1]:.15g} self_intersects={r[3]}")
        return
    prof = curvature_from_dict(cfg["curvature"])
    lo, hi = cfg.get("t_range", [prof.support[0] - pad, prof.support[1] + pad])
    curve = reconstruct_curve(prof, lo, hi, step)
    hit, pair = self_intersects(curve)
    write_csv(os.path.join(out, "curve.csv"), ["t", "x", "y", "angle"],
              zip(curve.t, curve.x, curve.y, curve.angle))
    write_json(os.path.join(out, "curve.json"),
               {"schema": 1, "total_angle": prof.total_angle(), "self_intersects": hit,
                "segments": list(pair) if pair else None})
    print(f"theta={prof.total_angle():.15g} self_intersects={hit}")


def cmd_evolve(cfg, out, args):
    op = PointInteraction.from_dict(cfg["interaction"])
    g, pk = cfg["grid"], cfg["packet"]
    x = symmetric_grid(g["half_width"], g["step"])
    psi0 = gaussian_packet(x, pk["x0"], pk["p0"], pk["width"])
    snaps = evolve(op, x, psi0, cfg["times"])
    n0 = snaps[0].norm if cfg["times"][0] == 0 else float(np.sqrt((x[1] - x[0]) * np.sum(np.abs(psi0) ** 2)))
    rows = []
    for i, sn in enumerate(snaps):
        write_csv(os.path.join(out, f"snapshot_{i:03d}.csv"), ["x", "density"],
                  zip(x, np.abs(sn.psi) ** 2))
        rows.append({"time": sn.time, "norm": sn.norm, "drift": sn.norm - n0,
                     "transmission": transmission_probability(x, sn.psi)})
    write_json(os.path.join(out, "evolve.json"), {"schema": 1, "interaction": op.to_dict(),
                                                  "snapshots": rows})
    worst = max(abs(r["drift"]) for r in rows)
    print(f"{len(rows)} snapshot(s), max norm drift {worst:.3e}")


COMMANDS = {"resonance": cmd_resonance, "scan": cmd_scan, "limit-op": cmd_limit_op,
            "converge-1d": cmd_converge_1d, "converge-2d": cmd_converge_2d, "curve": cmd_curve,
            "evolve": cmd_evolve}


def build_parser():
    parser = _Parser(prog="thinguide", description="Thin curved waveguide limits and 1D resonances.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config (schema version 1)")
        p.add_argument("--out", default=".", help="output directory (created if missing)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for independent points")
        p.add_argument("--seed", type=int, default=0, help="reserved; every algorithm is deterministic")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        cfg = load_config(args.config, args.command)
        out = os.path.abspath(args.out)
        os.makedirs(out, exist_ok=True)
        COMMANDS[args.command](cfg, out, args)
    except (InputError, HypothesisError) as exc:
        label = "hypothesis violated" if isinstance(exc, HypothesisError) else "input error"
        print(f"{label}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NotResonant as exc:
        print(f"not resonant: {exc}", file=sys.stderr)
        return EXIT_NOT_RESONANT
    except (ValueError, MemoryError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
