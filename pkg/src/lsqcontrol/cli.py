"""Command line front end.

    lsqcontrol solve CONFIG
    lsqcontrol check-gradient CONFIG
    lsqcontrol sweep CONFIG --grids 16,32,64

CONFIG is a UTF-8 file of ``key = value`` lines; ``#`` starts a comment.

==============  ========  ===================================================
key             default   meaning
==============  ========  ===================================================
variant         required  boundary | boundary-extended | inner
T               required  time horizon
Nx, Nt          required  space / time intervals of the optimisation grid
data            required  heat-exact-sinh | eigenmode | zero-target | zero |
                          sine-to-ramp | file
omega           --        "a,b", required for the inner variant
data_file       --        CSV with header x,u0,uT on the Nx+1 nodes (data=file)
maxit           500       descent iterations
tol_g           1e-8      gradient norm tolerance, relative to the first one
tol_E           1e-10     absolute energy tolerance
method          cg        cg | sd
record_every    1         history stride
solver_tol      1e-10     relative residual of the inner CG solves
output          out       output directory
Nx_f, Nt_f      128       forward-verification grid
seed            0         RNG seed for check-gradient
==============  ========  ===================================================

Exit codes: 0 success, 1 input or I/O error, 2 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corrector import KINDS, Variant, omega_indices
from .descent import DescentOptions, minimize, variation_mask
from .grid import make_grid
from .problems import (
    IncompatibleDataError,
    ProblemSpec,
    extract_boundary_control,
    extract_inner_control,
    lift_data,
)
from .verify import ForwardGrid, fd_gradient_check, forward_heat, l2_error

log = logging.getLogger("lsqcontrol")

DATASETS = ("heat-exact-sinh", "eigenmode", "zero-target", "zero", "sine-to-ramp", "file")


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    variant: str
    T: float
    Nx: int
    Nt: int
    data: str
    omega: tuple[float, float] | None = None
    data_file: str | None = None
    options: DescentOptions = field(default_factory=DescentOptions)
    output: str = "out"
    Nx_f: int = 128
    Nt_f: int = 128
    seed: int = 0

    def variant_obj(self) -> Variant:
        return Variant(self.variant, self.omega)


_REQUIRED = ("variant", "T", "Nx", "Nt", "data")
_CASTS = {
    "variant": str, "T": float, "Nx": int, "Nt": int, "data": str, "omega": str,
    "data_file": str, "maxit": int, "tol_g": float, "tol_E": float, "method": str,
    "record_every": int, "solver_tol": float, "output": str, "Nx_f": int, "Nt_f": int,
    "seed": int,
}
_OPTION_KEYS = ("maxit", "tol_g", "tol_E", "method", "record_every", "solver_tol")


def parse_config(text: str) -> Config:
    values, lines = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _CASTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _CASTS[key](val)
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from None
        lines[key] = lineno

    def fail(key, msg):
        where = f"line {lines[key]}: " if key in lines else ""
        raise ConfigError(f"{where}{msg}")

    for key in _REQUIRED:
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")
    if values["variant"] not in KINDS:
        fail("variant", f"variant must be one of {KINDS}")
    if not values["T"] > 0:
        fail("T", "T must be positive (T>0)")
    for key in ("Nx", "Nt", "Nx_f", "Nt_f"):
        if key in values and values[key] < 2:
            fail(key, f"{key} must satisfy {key}>=2")
    if values["data"] not in DATASETS:
        fail("data", f"data must be one of {DATASETS}")

    omega = None
    if values["variant"] == "inner":
        if "omega" not in values:
            raise ConfigError("missing required key 'omega' for the inner variant")
        try:
            a, b = (float(s) for s in values["omega"].split(","))
        except ValueError:
            fail("omega", "omega must be 'a,b'")
        omega = (a, b)
    elif "omega" in values:
        fail("omega", "omega is only valid for the inner variant")
    if values["data"] == "file" and "data_file" not in values:
        raise ConfigError("missing required key 'data_file' for data=file")

    try:
        variant = Variant(values["variant"], omega)
        if omega is not None:
            omega_indices(make_grid(values["T"], values["Nx"], values["Nt"]), omega)
    except ValueError as exc:
        fail("omega" if omega is not None else "variant", str(exc))
    if variant.is_inner and values["data"] in ("heat-exact-sinh", "sine-to-ramp"):
        fail("data", f"data set {values['data']!r} does not vanish at x=1; not valid for inner")
    try:
        opts = DescentOptions(**{k: values[k] for k in _OPTION_KEYS if k in values})
    except ValueError as exc:
        bad = next((k for k in _OPTION_KEYS if k in values), "maxit")
        fail(bad, str(exc))

    return Config(
        variant=values["variant"], T=values["T"], Nx=values["Nx"], Nt=values["Nt"],
        data=values["data"], omega=omega, data_file=values.get("data_file"), options=opts,
        output=values.get("output", "out"), Nx_f=values.get("Nx_f", 128),
        Nt_f=values.get("Nt_f", 128), seed=values.get("seed", 0),
    )


def builtin_data(name: str, x: np.ndarray, T: float):
    s = np.sin(np.pi * x)
    s[[0, -1]] = 0.0
    if name == "heat-exact-sinh":
        return np.sinh(x), np.exp(T) * np.sinh(x)
    if name == "eigenmode":
        return s, np.exp(-np.pi**2 * T) * s
    if name == "zero-target":
        return s, np.zeros_like(x)
    if name == "zero":
        return np.zeros_like(x), np.zeros_like(x)
    if name == "sine-to-ramp":
        return s, 0.2 * x
    raise ConfigError(f"unknown data set {name!r}")


def load_data(cfg: Config, Nx: int):
    x = np.linspace(0.0, 1.0, Nx + 1)
    if cfg.data != "file":
        return builtin_data(cfg.data, x, cfg.T)
    try:
        arr = np.genfromtxt(cfg.data_file, delimiter=",", names=True)
    except OSError as exc:
        raise ConfigError(f"cannot read data_file: {exc}") from None
    if arr.size != Nx + 1 or not {"x", "u0", "uT"} <= set(arr.dtype.names or ()):
        raise ConfigError(f"data_file needs columns x,u0,uT on {Nx + 1} nodes")
    if np.max(np.abs(arr["x"] - x)) > 1e-9:
        raise ConfigError("data_file x column does not match the grid nodes")
    return np.asarray(arr["u0"], float), np.asarray(arr["uT"], float)


def _write_csv(path: Path, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(f"{float(v):.17g}" for v in row) + "\n")


def _pipeline(cfg: Config, Nx: int, Nt: int):
    grid = make_grid(cfg.T, Nx, Nt)
    variant = cfg.variant_obj()
    u0, uT = load_data(cfg, Nx)
    spec = ProblemSpec(variant, cfg.T, u0, uT, Nx, Nt, cfg.options)
    ubar = lift_data(spec, grid)
    return grid, variant, spec, ubar


def run(cfg: Config) -> int:
    """Lift, minimise, extract the control and verify it; write all artefacts."""
    start = time.perf_counter()
    out = Path(cfg.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / ".write-test").write_text("")
        (out / ".write-test").unlink()
    except OSError as exc:
        print(f"error: output directory {out} is not writable: {exc}", file=sys.stderr)
        return 1
    try:
        grid, variant, spec, ubar = _pipeline(cfg, cfg.Nx, cfg.Nt)
    except (ConfigError, IncompatibleDataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    res = minimize(grid, variant, ubar, cfg.options)
    _write_csv(out / "convergence.csv", "iteration,E,grad_norm", res.history)

    if variant.is_inner:
        control = extract_inner_control(res.u, grid, variant.omega)
        tt, xx = np.meshgrid(control.t, control.x, indexing="ij")
        _write_csv(out / "control.csv", "t,x,f",
                   zip(tt.ravel(), xx.ravel(), control.values.ravel()))
        control_norm = float(np.sqrt(np.sum(control.values**2) * grid.hx * grid.ht))
    else:
        control = extract_boundary_control(res.u, grid)
        _write_csv(out / "control.csv", "t,f", zip(control.t, control.values))
        control_norm = l2_error(control.values, np.zeros_like(control.values), grid.ht)

    xf, uf = forward_heat(spec.u0, control, ForwardGrid(cfg.Nx_f, cfg.Nt_f), variant)
    target = np.interp(xf, grid.x, spec.uT)
    _write_csv(out / "final_state.csv", "x,u_forward,u_target", zip(xf, uf, target))
    h = 1.0 / cfg.Nx_f
    tnorm = l2_error(target, np.zeros_like(target), h)
    err = l2_error(uf, target, h)
    round_trip = err / tnorm if tnorm > 0 else err

    summary = {
        "variant": variant.kind,
        "omega": list(variant.omega) if variant.omega else None,
        "T": cfg.T, "Nx": cfg.Nx, "Nt": cfg.Nt, "data": cfg.data,
        "method": cfg.options.method,
        "iterations": res.iterations,
        "converged": res.converged,
        "reason": res.reason,
        "initial_energy": res.initial_energy,
        "final_energy": res.energy,
        "m_h": min(E for _, E, _ in res.history),
        "round_trip_error": round_trip,
        "control_l2_norm": control_norm,
        "wall_time_s": time.perf_counter() - start,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    log.info("E %.3e -> %.3e in %d iterations (%s); round trip %.3e",
             res.initial_energy, res.energy, res.iterations, res.reason, round_trip)
    return 0 if res.converged else 2


def check_gradient(cfg: Config, pairs: int = 10, eta: float = 1e-3, threshold: float = 1e-6) -> int:
    try:
        grid, variant, _, ubar = _pipeline(cfg, cfg.Nx, cfg.Nt)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    rng = np.random.default_rng(cfg.seed)
    free = variation_mask(grid, variant).free
    worst = 0.0
    for k in range(pairs):
        u = ubar.copy()
        u[free] += rng.standard_normal(free.size)
        U = np.zeros(grid.n_nodes)
        U[free] = rng.standard_normal(free.size)
        rel = fd_gradient_check(grid, variant, u, U, eta)
        worst = max(worst, rel)
        print(f"pair {k}: relative error {rel:.3e}")
    print(f"max relative error {worst:.3e} (threshold {threshold:g})")
    return 0 if worst <= threshold else 2


def sweep(cfg: Config, grids) -> int:
    out = Path(cfg.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: output directory {out} is not writable: {exc}", file=sys.stderr)
        return 1
    rows, ok = [], True
    for N in grids:
        try:
            grid, variant, _, ubar = _pipeline(cfg, N, N)
        except (ConfigError, ValueError) as exc:
            print(f"error: grid {N}: {exc}", file=sys.stderr)
            return 1
        res = minimize(grid, variant, ubar, cfg.options)
        ok &= res.converged
        rows.append((N, res.energy, res.initial_energy, res.iterations, int(res.converged)))
        print(f"N={N:4d}  m_h={res.energy:.6e}  E0={res.initial_energy:.6e}  "
              f"iterations={res.iterations}  {res.reason}")
    try:
        _write_csv(out / "sweep.csv", "N,m_h,initial_energy,iterations,converged", rows)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0 if ok else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="lsqcontrol", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "check-gradient", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("config")
        if name == "sweep":
            p.add_argument("--grids", default="16,32,64")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
        if args.command == "sweep":
            grids = [int(s) for s in args.grids.split(",") if s.strip()]
            if not grids or min(grids) < 2:
                raise ConfigError("--grids needs a comma-separated list of integers >= 2")
    except (OSError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.command == "solve":
        return run(cfg)
    if args.command == "check-gradient":
        return check_gradient(cfg)
    return sweep(cfg, grids)


if __name__ == "__main__":
    sys.exit(main())
