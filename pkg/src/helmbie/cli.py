"""Command-line front end: wavenumber sweep experiments emitting
machine-readable CSV/JSON tables.

Subcommands: sweep, sharpness, poles, mie, billiards, gmres-bench,
coercivity.  Configuration comes from flags plus an optional JSON file
(--config); flags override file values.  Exit codes: 0 success, 2 invalid
configuration, 3 numerical failure in every row.  Re-running a command
with the same configuration and seed is byte-identical.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys

import numpy as np

from . import billiards, disk_oracle, geom, linalg, operators

__all__ = ["main", "SweepRow"]

_FLOAT_FMT = "%.12e"


@dataclasses.dataclass
class SweepRow:
    k: float | None = None
    eta_model: str | None = None
    geometry: str | None = None
    N: int | None = None
    norm_A: float | None = None
    norm_Ainv: float | None = None
    cond: float | None = None
    alpha_coercivity: float | None = None
    gmres_iters_plus: int | None = None
    gmres_iters_minus: int | None = None
    dtn_ratio: float | None = None
    ntd_ratio: float | None = None
    resA: float | None = None
    resB: float | None = None
    error: str | None = None


def _format_value(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _FLOAT_FMT % float(v)
    return str(v)


def _emit(rows: list[dict], fieldnames: list[str], summary: dict, args) -> None:
    """Write the table; complex values are split into _re/_im columns."""
    expanded = []
    for name in fieldnames:
        if any(isinstance(r.get(name), complex) for r in rows):
            expanded += [name + "_re", name + "_im"]
        else:
            expanded.append(name)
    if args.format == "json":
        payload = {"rows": rows, "summary": summary}
        text = json.dumps(payload, default=_json_default, indent=2, sort_keys=True)
    else:
        lines = [",".join(expanded)]
        for r in rows:
            cells = []
            for name in fieldnames:
                v = r.get(name)
                if name + "_re" in expanded:
                    v = complex(v) if v is not None else None
                    cells.append(_format_value(v.real if v is not None else None))
                    cells.append(_format_value(v.imag if v is not None else None))
                else:
                    cells.append(_format_value(v))
            lines.append(",".join(cells))
        for key in sorted(summary):
            lines.append(f"# {key} = {_format_value(summary[key])}")
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_default(v):
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"unserializable {type(v)}")


class ConfigError(Exception):
    pass


def _parse_k_list(text: str) -> list[float]:
    if not text.strip():
        return []
    vals = [float(v) for v in text.split(",") if v.strip()]
    if any(v <= 0 for v in vals):
        raise ConfigError("k values must be positive")
    return vals


def _make_geometry(name: str, params: str):
    kwargs = {}
    if params:
        for item in params.split(","):
            key, _, val = item.partition("=")
            if not _:
                raise ConfigError(f"geometry parameter {item!r} is not key=value")
            kwargs[key.strip()] = float(val)
    if name == "smooth_star" and "m" in kwargs:
        kwargs["m"] = int(kwargs["m"])
    try:
        return geom.make_curve(name, **kwargs)
    except geom.InvalidCurveParameterError as exc:
        raise ConfigError(str(exc)) from exc


def _matrix_N(k: float, override: int | None) -> int:
    if override:
        return override
    n = max(256, int(math.ceil(10.0 * k)))
    return n + (n % 2)


def _row_dict(row: SweepRow) -> dict:
    return dataclasses.asdict(row)


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------


def _cmd_sweep(args) -> int:
    ks = _parse_k_list(args.k_list)
    eta_model = f"a={args.eta_a:g},b={args.eta_b:g}"
    rows: list[SweepRow] = []
    failures = 0
    for k in ks:
        row = SweepRow(k=k, eta_model=eta_model, geometry=args.geometry)
        try:
            if args.path == "modes":
                if args.geometry != "circle":
                    raise ConfigError("the modes path requires circle geometry")
                radius = _geometry_radius(args)
                eta_c = args.eta_a * k + 1j * args.eta_b
                norms = disk_oracle.mode_norms(k, radius, eta_c)
                res = disk_oracle.mode_decomposition_residuals(k, radius, eta_c)
                sweep = disk_oracle.sharpness_sweep([k], radius)
                row.norm_A = norms["norm_A"]
                row.norm_Ainv = norms["norm_Ainv"]
                row.cond = norms["cond"]
                row.dtn_ratio = float(sweep.dtn_ratio[0])
                row.ntd_ratio = float(sweep.ntd_ratio[0])
                row.resA = res["resA"]
                row.resB = res["resB"]
            else:
                curve = _make_geometry(args.geometry, args.geometry_params)
                N = _matrix_N(k, args.N)
                row.N = N
                grid = geom.boundary_grid(curve, N)
                ops = None
                eta = operators.EtaSpec.constant(args.eta_a, args.eta_b)
                A = operators.build_combined_A(k, eta, grid)
                from .assembly import l2_operator_norm

                row.norm_A = l2_operator_norm(A)
                row.cond = linalg.condition_number(A)
                row.norm_Ainv = row.cond / row.norm_A
                res = operators.decomposition_residuals(k, eta, grid)
                row.resA = res["resA"]
                row.resB = res["resB"]
                if args.coercivity:
                    row.alpha_coercivity = linalg.coercivity_constant(A)
                if args.gmres:
                    row.gmres_iters_plus, row.gmres_iters_minus = _gmres_pair(
                        k, grid, args.tol
                    )
        except Exception as exc:  # per-row failures recorded, run continues
            row.error = f"{type(exc).__name__}: {exc}"
            failures += 1
        rows.append(row)

    summary = {}
    for col in ("norm_Ainv", "cond", "dtn_ratio", "ntd_ratio"):
        vals = [(r.k, getattr(r, col)) for r in rows if getattr(r, col)]
        if len(vals) >= 3 and len({v[0] for v in vals}) >= 2:
            fit = linalg.fit_power_law(vals)
            summary[f"exponent_{col}"] = fit.exponent
            summary[f"r_squared_{col}"] = fit.r_squared
    _emit([_row_dict(r) for r in rows], _sweep_fields(), summary, args)
    if ks and failures == len(ks):
        return 3
    return 0


def _geometry_radius(args) -> float:
    for item in (args.geometry_params or "").split(","):
        key, _, val = item.partition("=")
        if key.strip() == "radius":
            return float(val)
    return 1.0


def _sweep_fields() -> list[str]:
    return [f.name for f in dataclasses.fields(SweepRow)]


def _gmres_pair(k, grid, tol) -> tuple[int, int]:
    from .assembly import BoundaryFunction

    rng = np.random.default_rng(1234)
    b = BoundaryFunction(
        rng.standard_normal(grid.N) + 1j * rng.standard_normal(grid.N), grid
    )
    iters = []
    for sign in (+1.0, -1.0):
        eta = operators.EtaSpec.constant(sign, 0.0)
        A = operators.build_combined_A(k, eta, grid)
        rep = linalg.gmres(A, b, tol=tol, max_iterations=2000)
        iters.append(rep.iterations)
    return iters[0], iters[1]


def _cmd_sharpness(args) -> int:
    ks = _parse_k_list(args.k_list)
    sweep = disk_oracle.sharpness_sweep(ks, radius=args.radius)
    rows = []
    for i, k in enumerate(sweep.k):
        rows.append(
            {
                "k": float(k),
                "n_max": int(sweep.n_max[i]),
                "dtn_ratio": float(sweep.dtn_ratio[i]),
                "ntd_ratio": float(sweep.ntd_ratio[i]),
                "dtn_half": float(sweep.dtn_half[i]),
                "ntd_half": float(sweep.ntd_half[i]),
            }
        )
    summary = {}
    if len(ks) >= 3:
        for col in ("dtn_ratio", "ntd_ratio"):
            fit = linalg.fit_power_law([(r["k"], r[col]) for r in rows])
            summary[f"exponent_{col}"] = fit.exponent
    _emit(rows, ["k", "n_max", "dtn_ratio", "ntd_ratio", "dtn_half", "ntd_half"], summary, args)
    return 0


def _cmd_poles(args) -> int:
    scan = disk_oracle.impedance_pole_scan(
        args.a,
        args.b,
        re_window=(args.re_min, args.re_max),
        im_window=(args.im_min, args.im_max),
        grid_density=args.density,
        n_max=args.n_max,
    )
    rows = [
        {
            "re_k": z.k.real,
            "im_k": z.k.imag,
            "mode": z.mode,
            "converged": z.converged,
            "residual": z.residual,
        }
        for z in scan.zeros
    ]
    summary = {
        "strip_width": scan.strip_width,
        "upper_half_zeros": len(scan.upper_half_zeros),
        "n_max": scan.n_max,
    }
    _emit(rows, ["re_k", "im_k", "mode", "converged", "residual"], summary, args)
    return 0


def _cmd_mie(args) -> int:
    sol = disk_oracle.mie_dirichlet(args.k, radius=args.radius)
    theta = np.linspace(0.0, 2.0 * np.pi, args.angles, endpoint=False)
    ff = sol.far_field(theta)
    rows = [
        {"theta": float(t), "far_field": complex(v)} for t, v in zip(theta, ff)
    ]
    sigma = sol.total_cross_section()
    sigma_opt = sol.optical_theorem_cross_section()
    summary = {
        "total_cross_section": sigma,
        "optical_theorem_cross_section": sigma_opt,
        "optical_theorem_residual": abs(sigma - sigma_opt),
        "n_max": sol.n_max,
    }
    _emit(rows, ["theta", "far_field"], summary, args)
    return 0


def _scene_from_config(cfg: dict) -> tuple[billiards.Scene, dict]:
    obstacles = []
    for spec in cfg.get("obstacles", []):
        if "vertices" in spec:
            obstacles.append(billiards.Polygon(np.asarray(spec["vertices"], float)))
        else:
            family = spec.get("family")
            params = {
                key: val
                for key, val in spec.items()
                if key not in ("family",)
            }
            if "center" in params:
                params["center"] = tuple(params["center"])
            if "m" in params:
                params["m"] = int(params["m"])
            obstacles.append(geom.make_curve(family, **params))
    scene = billiards.Scene(obstacles=obstacles, R=float(cfg.get("R", 5.0)))
    run = {
        "samples": int(cfg.get("samples", 10000)),
        "budget": float(cfg.get("budget", 200.0)),
        "seed": int(cfg.get("seed", 0)),
    }
    return scene, run


def _cmd_billiards(args) -> int:
    if args.scene_file:
        with open(args.scene_file) as fh:
            cfg = json.load(fh)
    elif args.scene_json:
        cfg = json.loads(args.scene_json)
    else:
        raise ConfigError("billiards needs --scene-file or --scene-json")
    if args.samples:
        cfg["samples"] = args.samples
    if args.budget:
        cfg["budget"] = args.budget
    if args.seed is not None:
        cfg["seed"] = args.seed
    scene, run = _scene_from_config(cfg)
    stats = billiards.escape_statistics(scene, run["samples"], run["budget"], run["seed"])
    rows = [dataclasses.asdict(stats)]
    _emit(rows, list(rows[0].keys()), {}, args)
    return 0


def _cmd_gmres_bench(args) -> int:
    curve = _make_geometry(args.geometry, args.geometry_params)
    grid = geom.boundary_grid(curve, _matrix_N(args.k, args.N))
    plus, minus = _gmres_pair(args.k, grid, args.tol)
    rows = [
        {"k": args.k, "N": grid.N, "eta_sign": "+k", "iterations": plus},
        {"k": args.k, "N": grid.N, "eta_sign": "-k", "iterations": minus},
    ]
    _emit(rows, ["k", "N", "eta_sign", "iterations"], {}, args)
    return 0


def _cmd_coercivity(args) -> int:
    ks = _parse_k_list(args.k_list)
    curve = _make_geometry(args.geometry, args.geometry_params)
    rows = []
    failures = 0
    for k in ks:
        row = {"k": k, "N": None, "alpha_plus": None, "alpha_minus": None, "error": None}
        try:
            grid = geom.boundary_grid(curve, _matrix_N(k, args.N))
            row["N"] = grid.N
            for sign, col in ((+1.0, "alpha_plus"), (-1.0, "alpha_minus")):
                A = operators.build_combined_A(
                    k, operators.EtaSpec.constant(sign, 0.0), grid
                )
                row[col] = linalg.coercivity_constant(A, args.theta_samples)
        except Exception as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
            failures += 1
        rows.append(row)
    _emit(rows, ["k", "N", "alpha_plus", "alpha_minus", "error"], {}, args)
    return 3 if ks and failures == len(ks) else 0


# ----------------------------------------------------------------------
# Argument parsing
# ----------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--config", default=None, help="JSON config file; flags override")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="helmbie")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sweep", help="wavenumber sweep of operator norms")
    _add_common(sp)
    sp.add_argument("--geometry", default="circle")
    sp.add_argument("--geometry-params", default="")
    sp.add_argument("--k-list", default="20,40,80,160,320,640,1280")
    sp.add_argument("--eta-a", type=float, default=1.0)
    sp.add_argument("--eta-b", type=float, default=0.0)
    sp.add_argument("--path", choices=("modes", "matrix"), default="modes")
    sp.add_argument("--N", type=int, default=None, help="override N = max(256, 10k)")
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--gmres", action="store_true")
    sp.add_argument("--coercivity", action="store_true")
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("sharpness", help="DtN/NtD sharpness constants on the circle")
    _add_common(sp)
    sp.add_argument("--k-list", default="20,40,80,160,320,640,1280")
    sp.add_argument("--radius", type=float, default=1.0)
    sp.set_defaults(func=_cmd_sharpness)

    sp = sub.add_parser("poles", help="complex-k impedance pole scan on the disk")
    _add_common(sp)
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--re-min", type=float, default=1.0)
    sp.add_argument("--re-max", type=float, default=40.0)
    sp.add_argument("--im-min", type=float, default=-2.0)
    sp.add_argument("--im-max", type=float, default=0.5)
    sp.add_argument("--density", type=float, default=8.0)
    sp.add_argument("--n-max", type=int, default=None)
    sp.set_defaults(func=_cmd_poles)

    sp = sub.add_parser("mie", help="sound-soft circle scattering reference")
    _add_common(sp)
    sp.add_argument("--k", type=float, default=10.0)
    sp.add_argument("--radius", type=float, default=1.0)
    sp.add_argument("--angles", type=int, default=360)
    sp.set_defaults(func=_cmd_mie)

    sp = sub.add_parser("billiards", help="escape-time trapping classification")
    _add_common(sp)
    sp.add_argument("--scene-file", default=None)
    sp.add_argument("--scene-json", default=None)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--budget", type=float, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.set_defaults(func=_cmd_billiards)

    sp = sub.add_parser("gmres-bench", help="GMRES iteration counts for eta = +/- k")
    _add_common(sp)
    sp.add_argument("--geometry", default="kite")
    sp.add_argument("--geometry-params", default="")
    sp.add_argument("--k", type=float, default=40.0)
    sp.add_argument("--N", type=int, default=None)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.set_defaults(func=_cmd_gmres_bench)

    sp = sub.add_parser("coercivity", help="numerical-range coercivity estimates")
    _add_common(sp)
    sp.add_argument("--geometry", default="circle")
    sp.add_argument("--geometry-params", default="")
    sp.add_argument("--k-list", default="5,10,20")
    sp.add_argument("--N", type=int, default=None)
    sp.add_argument("--theta-samples", type=int, default=720)
    sp.set_defaults(func=_cmd_coercivity)
    return p


def _apply_config_file(args: argparse.Namespace, parser: argparse.ArgumentParser):
    """Fill in values from --config JSON for flags left at their defaults."""
    if not getattr(args, "config", None):
        return args
    with open(args.config) as fh:
        cfg = json.load(fh)
    defaults = {}
    for action in parser._actions:
        if action.dest != argparse.SUPPRESS:
            defaults[action.dest] = action.default
    for key, val in cfg.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise ConfigError(f"unknown config key {key!r}")
        if getattr(args, dest) == defaults.get(dest):
            setattr(args, dest, val)
    return args


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    subparser = None
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            subparser = action.choices[args.command]
    try:
        args = _apply_config_file(args, subparser or parser)
        return args.func(args)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numerical failure everywhere
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
