"""Command-line entry point.

Subcommands: validate-coeffs, ellipticity-scan, ls-check, simulate,
symbol-eig, energy-eval.  All numeric CSV output uses 17 significant digits
so identical configs and seeds reproduce byte-identical files.  Exit codes:
0 success, 1 validation failure, 2 numerical degeneracy, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import plotting
from .coefficients import (
    FrankCoefficients,
    LeslieCoefficients,
    frank_from_mapping,
    leslie_from_mapping,
    validate_consistency,
    validate_ericksen_inequalities,
    validate_frank,
    validate_positivity,
)
from .energy import dpsi_dd, dpsi_dgradd, psi, psi_tilde
from .ericksen import compatibility_check
from .fields import DirectorField, Grid, write_snapshot
from .lopatinskii import (
    HalfLineProblem,
    StableDimensionError,
    compact_test_set,
    coupled_ls_check,
    director_ls_check,
)
from .simulator import InitialDataError, SimulationConfig, run
from .symbols import (
    DegeneratePointError,
    SphereSampler,
    certify_strong_ellipticity,
    symmetric_eigs,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_DEGENERATE = 2
EXIT_IO = 3


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _threads() -> int:
    raw = os.environ.get("NEMATIC_KIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_maybe_parallel(fn, items):
    n = _threads()
    if n <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise SystemExit(_io_error(f"cannot read config {path}: {exc}"))
    except json.JSONDecodeError as exc:
        print(f"config parse error in {path}: line {exc.lineno} column {exc.colno}: {exc.msg}",
              file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)


def _io_error(msg: str) -> int:
    print(msg, file=sys.stderr)
    return EXIT_IO


def _grid_from_config(section: dict) -> Grid:
    extents = tuple(section.get("extents", (32, 32, 32)))
    wall_axis = section.get("wall_axis")
    length = float(section.get("length", 2.0 * np.pi))
    if "spacing" in section:
        spacing = tuple(float(h) for h in section["spacing"])
        topology = ["periodic"] * 3
        if wall_axis is not None:
            topology[int(wall_axis)] = "wall"
        return Grid(extents, spacing, tuple(topology))  # type: ignore[arg-type]
    if wall_axis is None:
        spacing = tuple(length / n for n in extents)
        return Grid(extents, spacing)
    topology = ["periodic"] * 3
    topology[int(wall_axis)] = "wall"
    spacing = [length / n for n in extents]
    spacing[int(wall_axis)] = length / (extents[int(wall_axis)] - 1)
    return Grid(extents, tuple(spacing), tuple(topology))  # type: ignore[arg-type]


def _coefficients(config: dict) -> tuple[FrankCoefficients, LeslieCoefficients]:
    section = config.get("coefficients", {})
    try:
        return frank_from_mapping(section), leslie_from_mapping(section)
    except (KeyError, ValueError) as exc:
        print(f"coefficient section invalid: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)


def _initial_fields(config: dict, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    sim = config.get("simulation", {})
    init = sim.get("initial", {"type": "constant"})
    kind = init.get("type", "constant")
    if kind == "constant":
        direction = np.asarray(init.get("direction", (0.0, 0.0, 1.0)), dtype=float)
        direction = direction / np.linalg.norm(direction)
        d0 = np.broadcast_to(direction, grid.extents + (3,)).copy()
    elif kind == "smooth_director":
        eps = float(init.get("epsilon", 0.05))
        X, Y, Z = grid.meshgrid()
        d0 = np.zeros(grid.extents + (3,))
        d0[..., 0] = eps * np.sin(X) * np.cos(Y)
        d0[..., 1] = eps * np.sin(Y) * np.cos(Z)
        d0[..., 2] = 1.0
        d0 /= np.linalg.norm(d0, axis=-1, keepdims=True)
    elif kind == "tangential_twist":
        # Depends only on tangential coordinates: Neumann-compatible on a slab.
        amp = float(init.get("amplitude", 0.3))
        X, Y, _ = grid.meshgrid()
        angle = amp * np.sin(X) * np.cos(Y)
        d0 = np.zeros(grid.extents + (3,))
        d0[..., 0] = np.sin(angle)
        d0[..., 2] = np.cos(angle)
    else:
        print(f"unknown initial director type {kind!r}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)

    vel = sim.get("velocity", {"type": "zero"})
    vkind = vel.get("type", "zero")
    u0 = np.zeros(grid.extents + (3,))
    if vkind == "taylor_green":
        amp = float(vel.get("amplitude", 0.1))
        X, Y, Z = grid.meshgrid()
        u0[..., 0] = amp * np.sin(X) * np.cos(Y)
        u0[..., 1] = -amp * np.cos(X) * np.sin(Y)
    elif vkind != "zero":
        print(f"unknown initial velocity type {vkind!r}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)
    return u0, d0


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> int:
    config = _load_config(args.config)
    frank, leslie = _coefficients(config)
    reports = [
        validate_frank(frank),
        validate_ericksen_inequalities(frank),
        validate_consistency(leslie),
        validate_positivity(leslie),
    ]
    compat = None
    bc_mode = config.get("bc", {}).get("mode", "periodic")
    if bc_mode == "slab-nonlinear" and "grid" in config:
        grid = _grid_from_config(config["grid"])
        _, d0 = _initial_fields(config, grid)
        residual, ok = compatibility_check(
            DirectorField(grid, d0, norm_tol=None), frank,
            float(config.get("simulation", {}).get("compatibility_tol", 1e-6)),
        )
        compat = {"check": "compatibility", "passed": ok, "residual": residual}

    overall = all(r.passed for r in reports) and (compat is None or compat["passed"])
    for r in reports:
        status = "pass" if r.passed else "FAIL"
        print(f"[{status}] {r.check}")
        for clause in r.clauses:
            mark = "ok " if clause.passed else "BAD"
            print(f"    {mark} {clause.name}: {clause.detail}")
    if compat is not None:
        status = "pass" if compat["passed"] else "FAIL"
        print(f"[{status}] compatibility: wall residual {compat['residual']:.3e}")

    if args.json:
        payload = {"passed": overall, "reports": [r.as_dict() for r in reports]}
        if compat is not None:
            payload["compatibility"] = compat
        Path(args.json).write_text(json.dumps(payload, indent=2))
    return EXIT_OK if overall else EXIT_VALIDATION


def _axis_values(spec_value) -> list[float]:
    if isinstance(spec_value, dict):
        return list(
            np.linspace(float(spec_value["start"]), float(spec_value["stop"]),
                        int(spec_value["count"]))
        )
    return [float(spec_value)]


def cmd_ellipticity_scan(args) -> int:
    config = _load_config(args.config)
    scan = config.get("scan", {})
    sampler_cfg = scan.get("sampler", {})
    sampler = SphereSampler(
        grid_theta=int(sampler_cfg.get("grid_theta", 64)),
        grid_phi=int(sampler_cfg.get("grid_phi", 64)),
        random_samples=int(sampler_cfg.get("random_samples", 10_000)),
        seed=int(sampler_cfg.get("seed", 42)),
    )
    alpha_fraction = float(scan.get("alpha_fraction", 0.5))
    rows = []
    for k1 in _axis_values(scan.get("k1", 1.0)):
        for k2 in _axis_values(scan.get("k2", 1.0)):
            for k3 in _axis_values(scan.get("k3", 1.0)):
                alpha = alpha_fraction * min(k1, k2, k3)
                c = FrankCoefficients(k1=k1, k2=k2, k3=k3, alpha=alpha)
                cert = certify_strong_ellipticity(c, sampler)
                rows.append(
                    {
                        "k1": k1, "k2": k2, "k3": k3, "alpha": alpha,
                        "c_min": cert.c_min, "witness_z": cert.witness_z,
                        "witness_theta": cert.witness_theta, "pass": cert.passed,
                    }
                )
    out = Path(args.output)
    try:
        with open(out, "w") as fh:
            fh.write("k1,k2,k3,alpha,c_min,witness_z,witness_theta,pass\n")
            for r in rows:
                fh.write(
                    ",".join(
                        [_fmt(r["k1"]), _fmt(r["k2"]), _fmt(r["k3"]), _fmt(r["alpha"]),
                         _fmt(r["c_min"]), _fmt(r["witness_z"]), _fmt(r["witness_theta"]),
                         "1" if r["pass"] else "0"]
                    )
                    + "\n"
                )
    except OSError as exc:
        return _io_error(f"cannot write {out}: {exc}")
    if args.plots:
        plotting.render_ellipticity_scan(rows, out.with_suffix(".png"))
    print(f"wrote {len(rows)} scan rows to {out}")
    return EXIT_OK


def cmd_ls_check(args) -> int:
    config = _load_config(args.config)
    frank, leslie = _coefficients(config)
    if not (validate_frank(frank).passed and validate_positivity(leslie).passed):
        print("coefficients fail the admissibility assumptions", file=sys.stderr)
        return EXIT_VALIDATION
    ls_cfg = config.get("ls", {})
    nu = np.asarray(ls_cfg.get("nu", (0.0, 0.0, 1.0)), dtype=float)
    nu = nu / np.linalg.norm(nu)
    points = compact_test_set(
        nu,
        n_lambda=int(ls_cfg.get("n_lambda", 12)),
        n_xi=int(ls_cfg.get("n_xi", 24)),
        n_d=int(ls_cfg.get("n_d", 24)),
        seed=int(ls_cfg.get("seed", 42)),
    )
    threshold = float(ls_cfg.get("min_sv_threshold", 0.0))
    include_coupled = bool(ls_cfg.get("coupled", True))

    def evaluate(point):
        lam, xi, d = point
        p = HalfLineProblem(lam, xi, nu, d, frank, leslie)
        out = [(p, director_ls_check(p))]
        if include_coupled:
            out.append((p, coupled_ls_check(p)))
        return out

    try:
        results = _map_maybe_parallel(evaluate, points)
    except (DegeneratePointError, StableDimensionError) as exc:
        print(f"degenerate test point: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE

    out = Path(args.output)
    failures = 0
    try:
        with open(out, "w") as fh:
            fh.write("re_lambda,im_lambda,xi1,xi2,xi3,det_modulus,min_sv,stable_dim,pass\n")
            rows = []
            for pairs in results:
                for p, rep in pairs:
                    ok = rep.min_singular_value > threshold
                    failures += not ok
                    rows.append({"det_modulus": rep.lopatinskii_det_modulus,
                                 "min_sv": rep.min_singular_value})
                    fh.write(
                        ",".join(
                            [_fmt(p.lam.real), _fmt(p.lam.imag), _fmt(p.xi[0]), _fmt(p.xi[1]),
                             _fmt(p.xi[2]), _fmt(rep.lopatinskii_det_modulus),
                             _fmt(rep.min_singular_value), str(rep.stable_dimension),
                             "1" if ok else "0"]
                        )
                        + "\n"
                    )
    except OSError as exc:
        return _io_error(f"cannot write {out}: {exc}")
    if args.plots:
        plotting.render_ls_scan(rows, out.with_suffix(".png"))
    print(f"checked {len(points)} points ({failures} failures) -> {out}")
    return EXIT_OK if failures == 0 else EXIT_VALIDATION


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    frank, leslie = _coefficients(config)
    grid = _grid_from_config(config.get("grid", {}))
    time_cfg = config.get("time", {})
    sim_cfg = config.get("simulation", {})
    bc_mode = config.get("bc", {}).get("mode", "periodic")
    out_dir = Path(args.output_dir or config.get("output", {}).get("directory", "nematic-out"))
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        return _io_error(f"cannot create {out_dir}: {exc}")

    try:
        sconfig = SimulationConfig(
            grid=grid,
            frank=frank,
            leslie=leslie,
            dt=float(time_cfg.get("dt", 1e-3)),
            t_end=float(time_cfg.get("t_end", 0.0)),
            bc_mode=bc_mode,
            director_evolution=sim_cfg.get("director_evolution", "coupled"),
            renormalize=sim_cfg.get("renormalize", "monitor-only"),
            cadence=int(time_cfg.get("cadence", 10)),
            compatibility_tol=float(sim_cfg.get("compatibility_tol", 1e-6)),
        )
    except ValueError as exc:
        print(f"invalid simulation config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    u0, d0 = _initial_fields(config, grid)

    snapshots = bool(config.get("output", {}).get("snapshots", True))

    def dump(state):
        if snapshots:
            tag = f"{state.step_index:06d}"
            write_snapshot(out_dir / f"d_{tag}.nlck", state.d)
            write_snapshot(out_dir / f"u_{tag}.nlck", state.u)

    try:
        result = run(sconfig, u0, d0, on_cadence=dump)
    except InitialDataError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # divergence / projection failures
        print(f"simulation aborted: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE

    dump(result.states[0])
    csv_path = out_dir / "diagnostics.csv"
    try:
        with open(csv_path, "w") as fh:
            fh.write("t,energy,kinetic,norm_drift,phi_residual,div_u_max\n")
            for row in result.diagnostics:
                fh.write(
                    ",".join(
                        _fmt(row[k])
                        for k in ("t", "energy", "kinetic", "norm_drift", "phi_residual",
                                  "div_u_max")
                    )
                    + "\n"
                )
    except OSError as exc:
        return _io_error(f"cannot write {csv_path}: {exc}")
    if args.plots and result.diagnostics:
        plotting.render_diagnostics(result.diagnostics, out_dir / "diagnostics.png")
    print(f"simulated {result.final_state.step_index} steps to t = {result.final_state.t:.6g}; "
          f"artifacts in {out_dir}")
    return EXIT_OK


def cmd_symbol_eig(args) -> int:
    c = FrankCoefficients(k1=args.k1, k2=args.k2, k3=args.k3, alpha=args.alpha)
    xi = np.asarray(args.xi, dtype=float)
    d = np.asarray(args.d, dtype=float)
    d = d / np.linalg.norm(d)
    try:
        report = symmetric_eigs(xi, d, c)
    except (ValueError, DegeneratePointError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_DEGENERATE
    z = float(np.dot(d, xi / np.linalg.norm(xi)))
    print(f"z = (d|zeta) = {_fmt(z)}")
    print("numeric eigenvalues (symmetric part):")
    for v in report.eigenvalues:
        print(f"    {_fmt(v.real)}")
    lp, lm, tr = report.closed_form
    print("closed form:")
    print(f"    lambda_plus  = {_fmt(lp)}")
    print(f"    lambda_minus = {_fmt(lm)}")
    print(f"    transverse   = {_fmt(tr)}")
    print(f"min rayleigh = {_fmt(report.min_rayleigh)}")
    print(f"normally elliptic (diagnostic): {report.normally_elliptic}")
    return EXIT_OK if report.min_rayleigh > 0 else EXIT_VALIDATION


def cmd_energy_eval(args) -> int:
    c = FrankCoefficients(k1=args.k1, k2=args.k2, k3=args.k3, alpha=args.alpha)
    d = np.asarray(args.d, dtype=float)
    d = d / np.linalg.norm(d)
    G = np.asarray(args.grad, dtype=float).reshape(3, 3)
    breakdown = psi(d, G, c)
    print(f"splay        = {_fmt(float(breakdown.splay))}")
    print(f"twist        = {_fmt(float(breakdown.twist))}")
    print(f"bend         = {_fmt(float(breakdown.bend))}")
    print(f"saddle_splay = {_fmt(float(breakdown.saddle_splay))}")
    print(f"total        = {_fmt(float(breakdown.total))}")
    print(f"psi_tilde    = {_fmt(float(psi_tilde(d, G, c)))}")
    print("dpsi/dgrad:")
    for row in dpsi_dgradd(d, G, c):
        print("    " + "  ".join(_fmt(v) for v in row))
    print("dpsi/dd: " + "  ".join(_fmt(v) for v in dpsi_dd(d, G, c)))
    return EXIT_OK


def _vec3(text: str) -> list[float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated numbers")
    return parts


def _vec9(text: str) -> list[float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 9:
        raise argparse.ArgumentTypeError("expected nine comma-separated numbers (row-major)")
    return parts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nematic-kit",
        description="Ericksen-Leslie toolkit: coefficient validation, ellipticity "
        "certification, boundary-condition checks and desk-scale simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-coeffs", help="validate a coefficient section")
    p.add_argument("--config", required=True)
    p.add_argument("--json", help="also write a JSON report to this path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("ellipticity-scan", help="sampled ellipticity certificates over a k-grid")
    p.add_argument("--config", required=True)
    p.add_argument("--output", default="ellipticity.csv")
    p.add_argument("--plots", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_ellipticity_scan)

    p = sub.add_parser("ls-check", help="half-line boundary-compatibility sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--output", default="ls-check.csv")
    p.add_argument("--plots", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_ls_check)

    p = sub.add_parser("simulate", help="time-integrate the coupled system")
    p.add_argument("--config", required=True)
    p.add_argument("--output-dir", default=None)
    p.add_argument("--plots", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("symbol-eig", help="spectrum of the director symbol at one point")
    p.add_argument("--k1", type=float, default=1.0)
    p.add_argument("--k2", type=float, default=1.0)
    p.add_argument("--k3", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--xi", type=_vec3, required=True)
    p.add_argument("--d", type=_vec3, required=True)
    p.set_defaults(func=cmd_symbol_eig)

    p = sub.add_parser("energy-eval", help="pointwise energy breakdown for debugging")
    p.add_argument("--k1", type=float, default=1.0)
    p.add_argument("--k2", type=float, default=1.0)
    p.add_argument("--k3", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--d", type=_vec3, required=True)
    p.add_argument("--grad", type=_vec9, required=True)
    p.set_defaults(func=cmd_energy_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
