"""Command line front end.

Every run resolves its configuration from (defaults < config file < flags),
echoes the resolved configuration in the report header, and emits a JSON or
CSV artifact.  Exit codes: 0 success, 2 inadmissible parameters (with the
failed relations serialized), 1 numerical failure (truncation / contraction /
calibration errors, serialized).  Reports carry no timestamps, so a fixed
seed reproduces them byte for byte.  ``--plot`` renders a matplotlib figure
next to the artifact; numeric tables remain the primary output.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np

from . import __version__
from . import hardy as hardy_mod
from . import inequalities as ineq_mod
from . import kernels as kernels_mod
from . import reporting
from . import spherical as sph
from . import wave as wave_mod
from .spaces import SpaceModel, make_product

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_INADMISSIBLE = 2


class ConfigError(click.UsageError):
    pass


@dataclass
class RunConfig:
    """Fully-resolved run configuration; ``values`` is a flat key-value map."""

    command: str
    values: dict

    def echo_dict(self) -> dict:
        out = {"command": self.command}
        out.update(self.values)
        return out


# per-command parameter schemas: key -> (caster, default)
_COMMON = {
    "factors": (str, "3"),
    "seed": (int, 0),
    "out": (str, ""),
    "format": (str, "json"),
    "plot": (bool, False),
    "n_radial": (int, 0),       # 0 means module default
    "n_spectral": (int, 0),
    "r_max": (float, 0.0),
    "lam_max": (float, 0.0),
}

SCHEMAS: dict[str, dict] = {
    "space_info": {},
    "spherical_eval": {"lam": (str, "1.0"), "r": (str, "0.5,1.0,2.0")},
    "transform_roundtrip": {},
    "kernel_table": {"sigma": (float, None), "xi": (float, 0.0)},
    "kernel_asym": {"sigma": (float, None), "xi": (float, 0.0)},
    "hardy_check": {
        "p": (float, 2.0),
        "q": (float, 2.0),
        "u_pow": (float, 0.0),
        "u_growth": (float, math.nan),
        "v_pow": (float, 0.0),
        "v_growth": (float, math.nan),
        "s": (float, 0.0),
        "trials": (int, 100),
        "adjoint": (bool, False),
        "refine": (bool, False),
    },
    "ineq_run": {
        "kind": (str, None),
        "params": (str, None),
        "family": (str, "dilated"),
        "count": (int, 10),
        "budget": (int, 200),
        "optimize": (bool, True),
    },
    "wave_linear": {
        "b": (float, 2.0),
        "m": (float, 2.0),
        "T": (float, 20.0),
        "dt_out": (float, 0.25),
        "eps": (float, 0.01),
    },
    "wave_semilinear": {
        "b": (float, 2.0),
        "m": (float, 2.0),
        "p": (float, 2.0),
        "mu": (float, 1.0),
        "eps": (float, 0.01),
        "T": (float, 20.0),
        "dt": (float, 0.01),
    },
}
for schema in SCHEMAS.values():
    schema.update(_COMMON)


def _cast(command: str, key: str, value):
    schema = SCHEMAS[command]
    if key not in schema:
        raise ConfigError(f"unknown key {key!r} for command {command!r}")
    caster, _ = schema[key]
    try:
        if caster is bool and isinstance(value, str):
            if value.lower() in ("1", "true", "yes", "on"):
                return True
            if value.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        return caster(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r}: {value!r} ({exc})") from exc


def _read_config_file(path: str) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return json.loads(text)
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line is not key=value: {line!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def parse(command: str, cli_values: dict, cli_explicit: set, config_path: str | None) -> RunConfig:
    """Resolve defaults < config file < explicitly-passed flags."""
    if command not in SCHEMAS:
        raise ConfigError(f"unknown command {command!r}")
    schema = SCHEMAS[command]
    values = {}
    for key, (caster, default) in schema.items():
        values[key] = default
    if config_path:
        for key, raw in _read_config_file(config_path).items():
            values[key] = _cast(command, key, raw)
    for key, val in cli_values.items():
        if key in cli_explicit or values.get(key) is None:
            values[key] = _cast(command, key, val) if val is not None else values.get(key)
    missing = [k for k, v in values.items() if v is None]
    if missing:
        raise ConfigError(f"missing required parameters for {command}: {missing}")
    return RunConfig(command, values)


def _space_from(values: dict) -> SpaceModel:
    dims = [int(x) for x in str(values["factors"]).split(",") if x != ""]
    return make_product(dims)


def _transform_from(space, values):
    kwargs = {}
    if values.get("n_radial"):
        kwargs["n"] = values["n_radial"]
    if values.get("n_spectral"):
        kwargs["m"] = values["n_spectral"]
    if values.get("r_max"):
        kwargs["r_max"] = values["r_max"]
    if values.get("lam_max"):
        kwargs["lam_max"] = values["lam_max"]
    return sph.get_transform(space, **kwargs)


def _parse_params(text: str) -> dict:
    out = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ConfigError(f"--params entries must be key=value, got {item!r}")
        key, _, val = item.partition("=")
        out[key.strip()] = float(val)
    return out


# ---------------------------------------------------------------------------
# command implementations: each returns (exit_code, results, csv_spec|None)
# ---------------------------------------------------------------------------


def _run_space_info(cfg: RunConfig):
    space = _space_from(cfg.values)
    return EXIT_OK, space.describe(), None


def _run_spherical_eval(cfg: RunConfig):
    space = _space_from(cfg.values)
    lam = np.array([float(x) for x in str(cfg.values["lam"]).split(",")])
    if lam.size == 1 and space.rank > 1:
        lam = np.full(space.rank, lam[0])
    radii = [float(x) for x in str(cfg.values["r"]).split(",")]
    direction = np.ones(space.rank) / math.sqrt(space.rank)
    rows = []
    for rv in radii:
        H = direction * rv
        rows.append(
            {
                "r": rv,
                "phi_lam": sph.spherical_function(space, lam, H),
                "phi_0": sph.ground_spherical(space, H),
                "envelope": sph.ground_envelope(space, H),
            }
        )
    return EXIT_OK, {"lam": lam.tolist(), "rows": rows}, ("r", ["r", "phi_lam", "phi_0", "envelope"], rows)


def _smooth_suite(r: np.ndarray) -> list[np.ndarray]:
    suite = [
        np.exp(-(r**2)),
        np.exp(-0.3 * r**2),
        r**2 * np.exp(-(r**2)),
        np.exp(-((r - 1) ** 2)) + np.exp(-((r + 1) ** 2)),
        np.exp(-((r - 2.5) ** 2) / 2) + np.exp(-((r + 2.5) ** 2) / 2),
        np.exp(-(r**4) / 4),
        np.cos(2 * r) * np.exp(-(r**2) / 2),
        (1 + r**2) * np.exp(-1.2 * r**2),
        np.exp(-(r**2)) * np.sin(r) / np.where(r == 0, 1.0, r),
        np.exp(-2 * (r - 0.5) ** 2) + np.exp(-2 * (r + 0.5) ** 2),
    ]
    return suite


def _run_transform_roundtrip(cfg: RunConfig):
    space = _space_from(cfg.values)
    tr = _transform_from(space, cfg.values)
    if space.rank == 1:
        r = tr.rgrid.nodes
        suite = _smooth_suite(r)
    else:
        rad = tr.rgrid.radius_tensor()
        suite = [np.exp(-(rad**2)), np.exp(-0.5 * rad**2), rad**2 * np.exp(-(rad**2))]
    rows = []
    for i, vals in enumerate(suite):
        f = sph.RadialFunction(tr.rgrid, vals)
        fh = tr.forward(f, check=False)
        back = tr.inverse(fh, check=False)
        err = float(np.max(np.abs(back.values - vals)) / np.max(np.abs(vals)))
        l2r = f.lp_norm(2)
        plerr = abs(l2r - tr.l2_spectral(fh)) / l2r
        rows.append({"function": i, "roundtrip_rel_err": err, "plancherel_rel_err": float(plerr)})
    results = {"suite": rows, "kappa": list(tr.sgrid.kappa)}
    if space.factors == (3,):
        t = 0.5
        r = tr.rgrid.nodes
        heat = sph.RadialFunction(tr.rgrid, sph.heat_kernel_h3(t, r, shifted=False))
        fh = tr.forward(heat, check=False)
        exact = np.exp(-t * (tr.sgrid.lam_nodes**2 + 1))
        fwd_err = float(np.max(np.abs(fh.values - exact)) / exact.max())
        back = tr.inverse(sph.SpectralFunction(tr.sgrid, exact), check=False)
        inv_err = float(np.max(np.abs(back.values - heat.values)) / np.max(heat.values))
        results["heat_pair"] = {"t": t, "forward_rel_err": fwd_err, "inverse_rel_err": inv_err}
    worst = max(row["roundtrip_rel_err"] for row in rows)
    code = EXIT_OK if worst < 1e-5 else EXIT_NUMERICAL
    return code, results, ("function", ["function", "roundtrip_rel_err", "plancherel_rel_err"], rows)


def _kernel_spec(cfg: RunConfig):
    space = _space_from(cfg.values)
    xi = cfg.values["xi"] or kernels_mod.XI_MIN_FACTOR * space.rho_norm
    return kernels_mod.KernelSpec(space, xi, cfg.values["sigma"], enforce_xi_min=False)


def _run_kernel_table(cfg: RunConfig):
    spec = _kernel_spec(cfg)
    grid_kwargs = {}
    if cfg.values.get("n_radial"):
        grid_kwargs["n"] = cfg.values["n_radial"]
    if cfg.values.get("r_max"):
        grid_kwargs["r_max"] = cfg.values["r_max"]
    grid = sph.make_radial_grid(spec.space, kind="graded" if spec.space.rank == 1 else "uniform",
                                **grid_kwargs)
    table = kernels_mod.bgr_kernel(spec, grid)
    if spec.space.rank == 1:
        rows = [{"r": float(r), "value": float(v)} for r, v in zip(grid.nodes, table.values)]
    else:
        rows = _product_table_rows(grid, table)
    results = {"sigma": spec.sigma, "xi": spec.xi, "n_rows": len(rows)}
    cols = ["r", "value"] if spec.space.rank == 1 else ["r1", "r2", "r", "value"]
    return EXIT_OK, results, ("kernel", cols, rows)


def _product_table_rows(grid, table):
    rows = []
    stride = max(1, len(grid.axes[0]) // 64)
    for i in range(0, len(grid.axes[0]), stride):
        for j in range(0, len(grid.axes[1]), stride):
            r1, r2 = float(grid.axes[0][i]), float(grid.axes[1][j])
            rows.append({"r1": r1, "r2": r2, "r": math.hypot(r1, r2),
                         "value": float(table.values[i, j])})
    return rows


def _run_kernel_asym(cfg: RunConfig):
    spec = _kernel_spec(cfg)
    return EXIT_OK, kernels_mod.kernel_asymptotics(spec), None


def _run_hardy_check(cfg: RunConfig):
    space = _space_from(cfg.values)
    v = cfg.values
    p, q = v["p"], v["q"]
    two_rho = 2 * space.rho_norm
    u_growth = v["u_growth"]
    if math.isnan(u_growth):
        u_growth = -(two_rho + 1.0)  # default: integrable away from the origin
    v_growth = v["v_growth"]
    if math.isnan(v_growth):
        v_growth = two_rho * (p - 1.0) + 1.0  # default: v^{1-p'} decays
    uw = hardy_mod.WeightSpec(gamma=v["u_pow"], growth=u_growth)
    vw = hardy_mod.WeightSpec(gamma=v["v_pow"], growth=v_growth)
    s = v["s"] if v["s"] > 0 else None
    try:
        report = hardy_mod.d_conditions(
            space, uw, vw, p, q, s=s, adjoint=v["adjoint"], refine=v["refine"]
        )
        test = hardy_mod.test_integral_hardy(
            space, uw, vw, p, q, trials=v["trials"], seed=v["seed"], adjoint=v["adjoint"], s=s
        )
    except hardy_mod.WeightPreconditionError as exc:
        return EXIT_INADMISSIBLE, {"error": str(exc), "type": "precondition"}, None
    results = {
        "weights": {"u_pow": v["u_pow"], "u_growth": u_growth, "v_pow": v["v_pow"], "v_growth": v_growth},
        "conditions": report.to_dict(),
        "inequality_test": test,
    }
    code = EXIT_OK if (report.bracket_ok and test["violations"] == 0) else EXIT_NUMERICAL
    return code, results, None


def _run_ineq(cfg: RunConfig):
    space = _space_from(cfg.values)
    params = _parse_params(cfg.values["params"])
    spec = ineq_mod.IneqSpec(cfg.values["kind"], space, params)
    verdict = ineq_mod.admissible_check(spec)
    if not verdict["admissible"]:
        return EXIT_INADMISSIBLE, {"admissible": verdict}, None
    family = ineq_mod.TestFamily(
        kind=cfg.values["family"], count=cfg.values["count"], seed=cfg.values["seed"]
    )
    tr = _transform_from(space, cfg.values)
    if cfg.values["optimize"]:
        report = ineq_mod.empirical_best_ratio(spec, family, budget=cfg.values["budget"], transform=tr)
    else:
        report = ineq_mod.family_sweep(spec, family, transform=tr)
    results = {"admissible": verdict, "ratio_report": report.to_dict()}
    rows = [
        {"member": i, "ratio": m["ratio"], "lhs": m["lhs"], "rhs": m["rhs"]}
        for i, m in enumerate(report.members)
    ]
    return EXIT_OK, results, ("member", ["member", "ratio", "lhs", "rhs"], rows)


def _wave_data(tr, eps: float):
    if len(tr.rgrid.axes) == 1:
        r = tr.rgrid.nodes
    else:
        r = tr.rgrid.radius_tensor()
    u0 = sph.RadialFunction(tr.rgrid, eps * np.exp(-(r**2)))
    u1 = sph.RadialFunction(tr.rgrid, 0.5 * eps * np.exp(-2 * r**2))
    return u0, u1


def _run_wave_linear(cfg: RunConfig):
    space = _space_from(cfg.values)
    v = cfg.values
    params = wave_mod.WaveParams(v["b"], v["m"])
    tr = wave_mod.wave_transform(space)
    u0, u1 = _wave_data(tr, v["eps"])
    times = np.arange(0.0, v["T"] + 1e-9, v["dt_out"])
    traj = wave_mod.solve_linear(space, params, u0, u1, times, transform=tr)
    rows = traj.norm_table()
    results = {
        "delta": traj.delta,
        "fitted_decay_rate": wave_mod.fit_decay_rate(traj, (5.0, min(20.0, v["T"]))),
        "z_norm": wave_mod.z_norm(traj),
        "n_times": len(rows),
    }
    return EXIT_OK, results, ("t", ["t", "l2", "h1", "l2_ut", "zweighted"], rows)


def _run_wave_semilinear(cfg: RunConfig):
    space = _space_from(cfg.values)
    v = cfg.values
    params = wave_mod.WaveParams(v["b"], v["m"], p_nl=v["p"], mu_nl=v["mu"])
    tr = wave_mod.wave_transform(space)
    u0, u1 = _wave_data(tr, 1.0)
    # scale the data to the requested H^{1,2} x L^2 size
    size = kernels_mod.sobolev_norm(
        space, kernels_mod.SobolevParams(1.0, 2.0), u0, transform=tr
    ) + u1.lp_norm(2)
    scale = v["eps"] / size
    u0 = sph.RadialFunction(tr.rgrid, scale * u0.values)
    u1 = sph.RadialFunction(tr.rgrid, scale * u1.values)
    try:
        traj = wave_mod.solve_semilinear(space, params, u0, u1, T=v["T"], dt=v["dt"], transform=tr)
    except wave_mod.ContractionError as exc:
        return EXIT_NUMERICAL, {"error": str(exc), "type": "contraction"}, None
    d = traj.diagnostics
    results = {
        "delta": traj.delta,
        "z_norm": d["z_norm"],
        "max_contraction_factor": d["max_contraction_factor"],
        "mean_iterations": float(np.mean(d["iteration_counts"])),
        "data_norm": v["eps"],
        "n_steps": len(d["iteration_counts"]),
    }
    rows = traj.norm_table()
    return EXIT_OK, results, ("t", ["t", "l2", "h1", "l2_ut", "zweighted"], rows)


_RUNNERS = {
    "space_info": _run_space_info,
    "spherical_eval": _run_spherical_eval,
    "transform_roundtrip": _run_transform_roundtrip,
    "kernel_table": _run_kernel_table,
    "kernel_asym": _run_kernel_asym,
    "hardy_check": _run_hardy_check,
    "ineq_run": _run_ineq,
    "wave_linear": _run_wave_linear,
    "wave_semilinear": _run_wave_semilinear,
}


def run(cfg: RunConfig) -> int:
    """Execute a resolved configuration and emit its report artifact."""
    try:
        code, results, csv_spec = _RUNNERS[cfg.command](cfg)
    except (wave_mod.ContractionError, sph.CalibrationError, RuntimeError) as exc:
        code, results, csv_spec = EXIT_NUMERICAL, {"error": str(exc), "type": type(exc).__name__}, None
    except (ValueError,) as exc:
        code, results, csv_spec = EXIT_INADMISSIBLE, {"error": str(exc), "type": type(exc).__name__}, None
    payload = {"config": cfg.echo_dict(), "version": __version__, "exit_code": code, "results": results}
    out = cfg.values.get("out") or ""
    fmt = cfg.values.get("format", "json")
    if fmt == "csv" and csv_spec is not None:
        _, columns, rows = csv_spec
        text = reporting.csv_payload(payload["config"] | {"version": __version__}, columns, rows)
    else:
        text = reporting.json_payload(payload)
    if out:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)
    if cfg.values.get("plot") and out:
        _render_plot(cfg, results, csv_spec, out)
    return code


def _render_plot(cfg: RunConfig, results, csv_spec, out):
    try:
        if cfg.command == "kernel_table" and csv_spec:
            rows = csv_spec[2]
            reporting.render_kernel_figure(out, [r["r"] for r in rows], [r["value"] for r in rows],
                                           title="Bessel-Green-Riesz kernel")
        elif cfg.command in ("wave_linear", "wave_semilinear") and csv_spec:
            reporting.render_trajectory_figure(out, csv_spec[2], title=cfg.command)
        elif cfg.command == "ineq_run" and csv_spec:
            reporting.render_ratio_figure(out, results["ratio_report"]["members"], title=results["ratio_report"]["kind"])
        elif cfg.command == "transform_roundtrip" and csv_spec:
            rows = csv_spec[2]
            reporting.render_error_figure(out, [r["function"] for r in rows],
                                          [r["roundtrip_rel_err"] for r in rows], "function",
                                          title="round-trip error")
    except Exception as exc:  # figures are best-effort side artifacts
        click.echo(f"figure rendering failed: {exc}", err=True)


# ---------------------------------------------------------------------------
# click wiring
# ---------------------------------------------------------------------------


def _common_options(fn):
    decorators = [
        click.option("--factors", default="3", show_default=True,
                     help="comma-separated hyperbolic factor dimensions"),
        click.option("--seed", default=0, show_default=True, type=int),
        click.option("--out", default="", help="artifact path (stdout when empty)"),
        click.option("--format", "format_", default="json", type=click.Choice(["json", "csv"]),
                     show_default=True),
        click.option("--json", "json_flag", is_flag=True, default=False,
                     help="force JSON output (alias for --format json)"),
        click.option("--plot/--no-plot", default=False, help="render a figure next to --out"),
        click.option("--config", "config_path", default=None, type=click.Path(exists=True),
                     help="config file (JSON or key=value lines); flags win"),
        click.option("--n-radial", default=0, type=int, help="radial grid size override"),
        click.option("--n-spectral", default=0, type=int, help="spectral grid size override"),
        click.option("--r-max", default=0.0, type=float, help="radial truncation override"),
        click.option("--lam-max", default=0.0, type=float, help="spectral truncation override"),
    ]
    for dec in reversed(decorators):
        fn = dec(fn)
    return fn


def _dispatch(ctx, command: str, config_path, json_flag, **kwargs):
    rename = {"format_": "format"}
    cli_values = {rename.get(k, k): v for k, v in kwargs.items()}
    if json_flag:
        cli_values["format"] = "json"
    explicit = set()
    for pname in ctx.params:
        source = ctx.get_parameter_source(pname)
        if source is not None and source.name == "COMMANDLINE":
            explicit.add(rename.get(pname, pname))
    if json_flag:
        explicit.add("format")
    cfg = parse(command, cli_values, explicit, config_path)
    sys.exit(run(cfg))


@click.group()
@click.version_option(version=__version__)
def main():
    """Radial harmonic analysis and wave solving on hyperbolic spaces."""


@main.group()
def space():
    """Model-space geometry."""


@space.command("info")
@_common_options
@click.pass_context
def space_info(ctx, config_path, json_flag, **kwargs):
    """Print n, rank, pseudo-dimension, |rho|, |W| for a space."""
    _dispatch(ctx, "space_info", config_path, json_flag, **kwargs)


@main.group()
def spherical():
    """Spherical function evaluation."""


@spherical.command("eval")
@_common_options
@click.option("--lam", default="1.0", show_default=True, help="frequency (per factor, comma-separated)")
@click.option("--r", default="0.5,1.0,2.0", show_default=True, help="radii along the diagonal ray")
@click.pass_context
def spherical_eval(ctx, config_path, json_flag, **kwargs):
    """Evaluate phi_lambda, phi_0, and the ground envelope."""
    _dispatch(ctx, "spherical_eval", config_path, json_flag, **kwargs)


@main.group()
def transform():
    """Spherical transform diagnostics."""


@transform.command("roundtrip")
@_common_options
@click.option("--report", "out", default="", help="alias for --out")
@click.pass_context
def transform_roundtrip(ctx, config_path, json_flag, **kwargs):
    """Round-trip and Plancherel fidelity over a smooth test suite."""
    _dispatch(ctx, "transform_roundtrip", config_path, json_flag, **kwargs)


@main.group()
def kernel():
    """Bessel-Green-Riesz kernels."""


@kernel.command("table")
@_common_options
@click.option("--sigma", type=float, required=True)
@click.option("--xi", type=float, default=0.0, help="spectral shift (default 8|rho|)")
@click.pass_context
def kernel_table(ctx, config_path, json_flag, **kwargs):
    """Tabulate the kernel on a graded radial grid."""
    _dispatch(ctx, "kernel_table", config_path, json_flag, **kwargs)


@kernel.command("asym")
@_common_options
@click.option("--sigma", type=float, required=True)
@click.option("--xi", type=float, default=0.0, help="spectral shift (default 8|rho|)")
@click.pass_context
def kernel_asym(ctx, config_path, json_flag, **kwargs):
    """Fit the small-r and large-r kernel regimes."""
    _dispatch(ctx, "kernel_asym", config_path, json_flag, **kwargs)


@main.group()
def hardy():
    """Weighted integral Hardy machinery."""


@hardy.command("check")
@_common_options
@click.option("--p", type=float, default=2.0, show_default=True)
@click.option("--q", type=float, default=2.0, show_default=True)
@click.option("--u-pow", type=float, default=0.0, show_default=True, help="power of the u weight")
@click.option("--u-growth", type=float, default=math.nan, help="exponential rate of u (default: integrable)")
@click.option("--v-pow", type=float, default=0.0, show_default=True, help="power of the v weight")
@click.option("--v-growth", type=float, default=math.nan, help="exponential rate of v (default: V bounded)")
@click.option("--s", type=float, default=0.0, help="auxiliary s for D2..D5 (default 1/(2p'))")
@click.option("--trials", type=int, default=100, show_default=True)
@click.option("--adjoint", is_flag=True, default=False)
@click.option("--refine", is_flag=True, default=False, help="double the sup grid")
@click.pass_context
def hardy_check(ctx, config_path, json_flag, **kwargs):
    """Compute D1..D5, verify the relation chain, and test the inequality."""
    _dispatch(ctx, "hardy_check", config_path, json_flag, **kwargs)


@main.group()
def ineq():
    """Functional-inequality verification."""


@ineq.command("run")
@_common_options
@click.option("--kind", required=True, type=click.Choice(list(ineq_mod.KINDS)))
@click.option("--params", required=True, help="comma-separated key=value inequality parameters")
@click.option("--family", default="dilated", type=click.Choice(["dilated", "shifted", "gaussian_bumps"]),
              show_default=True)
@click.option("--count", type=int, default=10, show_default=True, help="family size")
@click.option("--budget", type=int, default=200, show_default=True, help="ratio-evaluation budget")
@click.option("--optimize/--no-optimize", default=True, help="run the simplex search after the sweep")
@click.pass_context
def ineq_run(ctx, config_path, json_flag, **kwargs):
    """Check admissibility and search for the largest LHS/RHS ratio."""
    _dispatch(ctx, "ineq_run", config_path, json_flag, **kwargs)


@main.group()
def wave():
    """Damped wave equation solvers."""


@wave.command("linear")
@_common_options
@click.option("--b", type=float, default=2.0, show_default=True, help="damping")
@click.option("--m", type=float, default=2.0, show_default=True, help="mass")
@click.option("--t", "--T", "T", type=float, default=20.0, show_default=True, help="final time")
@click.option("--dt-out", type=float, default=0.25, show_default=True, help="output stride")
@click.option("--eps", type=float, default=0.01, show_default=True, help="data amplitude")
@click.pass_context
def wave_linear(ctx, config_path, json_flag, **kwargs):
    """Propagate the linear problem and report norm decay."""
    _dispatch(ctx, "wave_linear", config_path, json_flag, **kwargs)


@wave.command("semilinear")
@_common_options
@click.option("--b", type=float, default=2.0, show_default=True, help="damping")
@click.option("--m", type=float, default=2.0, show_default=True, help="mass")
@click.option("--p", type=float, default=2.0, show_default=True, help="nonlinearity power")
@click.option("--mu", type=float, default=1.0, show_default=True, help="nonlinearity coefficient")
@click.option("--eps", type=float, default=0.01, show_default=True, help="data norm in H^{1,2} x L^2")
@click.option("--t", "--T", "T", type=float, default=20.0, show_default=True, help="final time")
@click.option("--dt", type=float, default=0.01, show_default=True, help="time step")
@click.pass_context
def wave_semilinear(ctx, config_path, json_flag, **kwargs):
    """Duhamel fixed-point solve of the semilinear problem."""
    _dispatch(ctx, "wave_semilinear", config_path, json_flag, **kwargs)


if __name__ == "__main__":
    main()
