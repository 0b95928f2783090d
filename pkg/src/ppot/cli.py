"""Command line front end.

    ppot <subcommand> --config FILE [--theta p/q] [--N n] [--out DIR] ...

The config file holds ``key = value`` lines; ``#`` starts a comment. Flags
override the file. Every run writes the effective config to
``DIR/config.txt`` (re-running from it reproduces the outputs), its CSV and
JSON results, and prints a one-line summary.

Exit status: 0 on success, 1 on invalid input, 2 on numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .extremal import (
    ExtremalGrid,
    REFINE_RTOL,
    approx_V_bergman,
    approx_V_sup_basis,
    closed_form_V_circle,
    closed_form_V_gaussian,
    closed_form_V_interval,
    gaussian_mass_report,
    l1_density_report,
    lobatto_size_for,
    monotonicity_report,
    phi_lp_solve,
    uniform_convergence_report,
)
from .geometry_measure import (
    Circle,
    Interval,
    admissibility_check,
    build_mesh,
    build_quadrature,
    parse_domain,
    parse_weight,
    quadrature_csv_rows,
)
from .index_core import Theta, dim, enumerate_index_set
from .ortho_bergman import (
    RankDeficiencyError,
    assemble_vandermonde,
    basis_to_text,
    bm_constant,
    orthonormalize,
)
from .poly_core import as_points, dumps
from .radial_expr import ExprDomainError
from .reports import Report, fmt, point_columns, write_csv
from .simplex import InfeasibleError, UnboundedError

SUBCOMMANDS = (
    "dim", "basis", "phi", "vapprox", "hull", "bm", "mamass", "density",
    "report-converge", "report-monotone",
)


class ConfigError(ValueError):
    """Invalid configuration; the message names the line or field."""


class NumericalFailure(ArithmeticError):
    pass


# --- configuration ------------------------------------------------------------


@dataclass
class RunConfig:
    domain: Optional[str] = None
    weight: str = "unit"
    theta: str = "0"
    N: Optional[int] = None
    N_list: Optional[List[int]] = None
    M: Optional[int] = None
    mesh_M: Optional[int] = None
    grid: Optional[str] = None
    z: Optional[str] = None
    d: Optional[int] = None
    thetas: Optional[List[str]] = None
    method: Optional[str] = None
    family: str = "auto"
    tol: Optional[float] = None
    slack: Optional[float] = None
    local_bound: Optional[float] = None
    R: float = 3.0
    out: str = "ppot_out"

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, list):
                v = ", ".join(str(x) for x in v)
            elif isinstance(v, float):
                v = fmt(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


def _int_list(text: str) -> List[int]:
    return [int(t) for t in text.replace(",", " ").split()]


def _str_list(text: str) -> List[str]:
    return [t for t in text.replace(",", " ").split()]


_CONVERTERS = {
    "N": int, "M": int, "mesh_M": int, "d": int,
    "N_list": _int_list, "thetas": _str_list,
    "tol": float, "slack": float, "local_bound": float, "R": float,
}
_KEYS = {f.name for f in fields(RunConfig)}


def _set(cfg: RunConfig, key: str, raw: str, where: str):
    if key not in _KEYS:
        raise ConfigError(f"{where}: unknown key {key!r}")
    conv = _CONVERTERS.get(key, str)
    try:
        value = conv(raw.strip())
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value for {key!r}: {raw.strip()!r}") from exc
    setattr(cfg, key, value)


def parse_config_text(text: str, cfg: Optional[RunConfig] = None, source: str = "config") -> RunConfig:
    cfg = cfg or RunConfig()
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {body!r}")
        key, raw = body.split("=", 1)
        _set(cfg, key.strip(), raw, f"{source}:{lineno}")
    return cfg


def validate(cfg: RunConfig, sub: str) -> Dict[str, object]:
    """Turn the strings of a config into checked module inputs."""
    out: Dict[str, object] = {}

    def need(name):
        if getattr(cfg, name) is None:
            raise ConfigError(f"field {name}: required by {sub}")
        return getattr(cfg, name)

    try:
        out["theta"] = Theta.parse(cfg.theta)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"field theta: {exc}") from exc
    if cfg.thetas is not None:
        try:
            out["thetas"] = [Theta.parse(t) for t in cfg.thetas]
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"field thetas: {exc}") from exc
    for name in ("N", "M", "mesh_M", "d"):
        v = getattr(cfg, name)
        if v is not None and v < (0 if name == "N" else 1):
            raise ConfigError(f"field {name}: must be positive, got {v}")
    if cfg.N_list is not None and (not cfg.N_list or min(cfg.N_list) < 1):
        raise ConfigError("field N_list: needs positive entries")
    if cfg.domain is not None:
        try:
            out["domain"] = parse_domain(cfg.domain)
        except ValueError as exc:
            raise ConfigError(f"field domain: {exc}") from exc
    try:
        out["weight"] = parse_weight(cfg.weight)
    except ValueError as exc:
        raise ConfigError(f"field weight: {exc}") from exc
    if cfg.grid is not None:
        out["grid"] = parse_grid(cfg.grid)
    if cfg.z is not None:
        try:
            out["z"] = complex(cfg.z.replace(" ", ""))
        except ValueError as exc:
            raise ConfigError(f"field z: not a number: {cfg.z!r}") from exc
    if cfg.family not in ("auto", "monomial", "chebyshev"):
        raise ConfigError(f"field family: expected auto, monomial or chebyshev, got {cfg.family!r}")

    if sub in ("basis", "phi", "vapprox", "hull", "bm", "report-converge"):
        need("domain")
    if sub in ("dim", "basis", "phi") or (sub in ("vapprox", "hull") and cfg.method != "closed-form"):
        need("N")
    if sub == "phi":
        need("z")
    if sub in ("vapprox", "hull", "report-converge", "report-monotone"):
        need("grid")
    if sub in ("density", "report-converge"):
        need("N_list")
    if sub == "report-monotone":
        need("thetas")
    if sub == "bm" and cfg.N is None and cfg.N_list is None:
        raise ConfigError("field N: bm needs N or N_list")
    if "domain" in out and sub not in ("dim", "mamass", "density", "report-monotone"):
        rep = admissibility_check(out["weight"], out["domain"])
        if not rep.is_admissible:
            raise ConfigError(f"field weight: not admissible on {out['domain']}: {'; '.join(rep.violations)}")
    return out


def parse_grid(text: str) -> np.ndarray:
    """Evaluation points.

    ``points z1 z2 ...``      complex literals; ``a,b`` gives a point of C^2
    ``radii r1 r2 ... [angles k]``   k equispaced points on each circle
    ``polar r_lo r_hi n_r n_ang``
    ``line a b n``            n equispaced real points
    """
    parts = text.split()
    if not parts:
        raise ConfigError("field grid: empty")
    kind, args = parts[0].lower(), parts[1:]
    try:
        if kind == "points":
            rows = [[complex(c) for c in a.split(",")] for a in args]
            if not rows or len({len(r) for r in rows}) != 1:
                raise ValueError("points need a common dimension")
            return np.array(rows, dtype=complex)
        if kind == "radii":
            n_ang = 1
            if "angles" in args:
                k = args.index("angles")
                n_ang = int(args[k + 1])
                args = args[:k]
            r = np.array([float(a) for a in args])
            ang = 2 * np.pi * np.arange(n_ang) / n_ang
            return (r[:, None] * np.exp(1j * ang)[None, :]).reshape(-1, 1)
        if kind == "polar":
            lo, hi, n_r, n_ang = float(args[0]), float(args[1]), int(args[2]), int(args[3])
            r = np.linspace(lo, hi, n_r)
            ang = 2 * np.pi * np.arange(n_ang) / n_ang
            return (r[:, None] * np.exp(1j * ang)[None, :]).reshape(-1, 1)
        if kind == "line":
            return np.linspace(float(args[0]), float(args[1]), int(args[2])).astype(complex).reshape(-1, 1)
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"field grid: bad specification {text!r}: {exc}") from exc
    raise ConfigError(f"field grid: unknown kind {kind!r}")


# --- shared helpers -----------------------------------------------------------


def default_resolution(domain, N: int) -> int:
    if isinstance(domain, Circle):
        return 2 * N + 2
    return N + 2


def _basis(cfg: RunConfig, v, N: int):
    dom = v["domain"]
    quad = build_quadrature(dom, cfg.M or default_resolution(dom, N))
    idx = enumerate_index_set(N, v["theta"], dom.d)
    vm = assemble_vandermonde(quad, idx, v["weight"], N, cfg.family)
    return orthonormalize(vm), vm, quad


def _closed_form(v, theta, pts):
    dom, weight = v.get("domain"), v["weight"]
    z = pts[:, 0]
    if weight.kind == "gaussian":
        return closed_form_V_gaussian(theta, z)
    if weight.is_unit and isinstance(dom, Circle) and dom.radius == 1.0:
        return closed_form_V_circle(theta, z)
    if weight.is_unit and isinstance(dom, Interval) and (dom.a, dom.b) == (-1.0, 1.0):
        if theta.p != 0:
            raise ConfigError("field theta: the interval closed form is known for theta = 0 only")
        return closed_form_V_interval(z)
    raise ConfigError(
        "field method: closed forms exist for the Gaussian weight, the unit circle and [-1, 1]"
    )


def _estimate(cfg: RunConfig, v, theta, N, pts) -> ExtremalGrid:
    method = cfg.method or "bergman"
    if method == "closed-form":
        return ExtremalGrid(pts, _closed_form(v, theta, pts), "closed-form", None, theta, str(v["weight"]))
    if method in ("bergman", "sup-basis"):
        basis, _, _ = _basis(cfg, {**v, "theta": theta}, N)
        if method == "bergman":
            return approx_V_bergman(basis, pts)
        return approx_V_sup_basis(basis, pts)
    if method == "lp":
        dom = v["domain"]
        if not isinstance(dom, Interval):
            raise ConfigError("field method: lp needs an interval domain")
        mesh = build_mesh(dom, cfg.mesh_M or lobatto_size_for([N]))
        w = None if v["weight"].is_unit else v["weight"]
        phi = np.array([phi_lp_solve(mesh, theta, N, z.real, w).value for z in pts[:, 0]])
        with np.errstate(divide="ignore"):
            vals = np.log(phi) / N
        return ExtremalGrid(pts, vals, "lp", N, theta, str(v["weight"]))
    raise ConfigError(f"field method: expected bergman, sup-basis, closed-form or lp, got {method!r}")


def _grid_rows(grid: ExtremalGrid, extra=None):
    for k, row in enumerate(grid.rows()):
        yield row + ([] if extra is None else [extra[k]])


# --- subcommands --------------------------------------------------------------


def cmd_dim(cfg, v, out: Path) -> str:
    d = cfg.d or (v["domain"].d if "domain" in v else 1)
    n = dim(cfg.N, v["theta"], d)
    Report("dim", {"N": cfg.N, "theta": str(v["theta"]), "d": d}, [{"dim": n}]).write(out / "dim.json")
    return str(n)


def cmd_basis(cfg, v, out: Path) -> str:
    basis, vm, quad = _basis(cfg, v, cfg.N)
    gram = basis.discrete_gram(vm)
    err = float(np.abs(gram - np.eye(len(basis))).max())
    (out / "basis.txt").write_text(basis_to_text(basis))
    write_csv(out / "quadrature.csv", point_columns(quad.domain.d) + ["weight"], quadrature_csv_rows(quad))
    Report(
        "basis",
        {"domain": str(v["domain"]), "weight": str(v["weight"]), "theta": str(v["theta"]),
         "N": cfg.N, "M": quad.M, "family": type(basis.family).__name__},
        [{"dim": len(basis), "kappa": basis.kappa, "gram_error": err, "measure": basis.measure}],
    ).write(out / "basis.json")
    return f"basis: {len(basis)} functions, kappa={basis.kappa:.3g}, gram error={err:.2e}"


def cmd_phi(cfg, v, out: Path) -> Tuple[str, int]:
    dom = v["domain"]
    if not isinstance(dom, Interval):
        raise ConfigError("field domain: phi needs an interval")
    z = v["z"]
    if z.imag != 0:
        raise ConfigError("field z: phi takes a real point")
    w = None if v["weight"].is_unit else v["weight"]
    M = cfg.mesh_M or lobatto_size_for([cfg.N])
    coarse = phi_lp_solve(build_mesh(dom, M), v["theta"], cfg.N, z.real, w)
    fine = phi_lp_solve(build_mesh(dom, 2 * M - 1), v["theta"], cfg.N, z.real, w)
    change = abs(fine.value - coarse.value) / max(abs(fine.value), 1e-300)
    rtol = cfg.tol if cfg.tol is not None else REFINE_RTOL
    ok = change < rtol
    (out / "phi_poly.txt").write_text(dumps(fine.polynomial(), cfg.N, v["theta"]))
    write_csv(out / "phi_mesh.csv", ["x", "weighted_value"], zip(fine.mesh_points, fine.mesh_values))
    Report(
        "phi",
        {"domain": str(dom), "weight": str(v["weight"]), "theta": str(v["theta"]), "N": cfg.N,
         "z": z.real, "M": M, "rtol": rtol},
        [{"value": fine.value, "value_coarse": coarse.value, "relative_change": change,
          "iterations": fine.iterations}],
        "pass" if ok else "fail",
    ).write(out / "phi.json")
    line = f"phi: {fmt(fine.value)}"
    if not ok:
        return line + f" (refinement changed it by {change:.2e} >= {rtol:g})", 2
    return line, 0


def cmd_vapprox(cfg, v, out: Path) -> str:
    pts = v["grid"]
    g = _estimate(cfg, v, v["theta"], cfg.N, pts)
    write_csv(out / "vapprox.csv", g.header(), g.rows())
    return f"vapprox: {len(pts)} points, method={g.method}, max V={fmt(float(np.max(g.values)))}"


def cmd_hull(cfg, v, out: Path) -> str:
    pts = v["grid"]
    g = _estimate(cfg, v, v["theta"], cfg.N, pts)
    tol = cfg.tol if cfg.tol is not None else 0.0
    inside = [bool(x <= tol) for x in g.values]
    write_csv(out / "hull.csv", g.header() + ["in_hull"], _grid_rows(g, inside))
    return f"hull: {sum(inside)} of {len(inside)} points in the hull (tol={tol:g})"


def cmd_bm(cfg, v, out: Path) -> str:
    dom = v["domain"]
    Ns = cfg.N_list or [cfg.N]
    rows = []
    w = None if v["weight"].is_unit else v["weight"]
    for N in Ns:
        basis, _, _ = _basis(cfg, v, N)
        mesh = build_mesh(dom, cfg.mesh_M or max(4 * N + 4, 64))
        MN = bm_constant(mesh, basis, w, N)
        rows.append([N, len(basis), MN, MN ** (1.0 / N) if N else math.nan])
    write_csv(out / "bm.csv", ["N", "dim", "M_N", "M_N_root"], rows)
    return f"bm: M_N^(1/N) = {fmt(rows[-1][3])} at N={rows[-1][0]}"


def _mass_rows(theta):
    rep = gaussian_mass_report(theta)
    two_pi = 2 * math.pi
    th = float(theta)
    ok = (
        abs(rep.origin_mass - two_pi * th) <= 0.02 * two_pi
        and abs(rep.annulus_mass - two_pi * (1 - th)) <= 0.02 * two_pi * (1 - th)
        and abs(rep.total - two_pi) <= 0.02 * two_pi
        and rep.monotone
    )
    return rep, ok


def cmd_mamass(cfg, v, out: Path) -> str:
    if v["weight"].kind != "gaussian":
        raise ConfigError("field weight: mamass integrates the Gaussian closed form; set weight = gaussian")
    thetas = v.get("thetas") or [v["theta"]]
    rows, profile, all_ok = [], [], True
    for th in thetas:
        rep, ok = _mass_rows(th)
        all_ok &= ok
        rows.append({"theta": str(th), "origin_mass": rep.origin_mass, "annulus_mass": rep.annulus_mass,
                     "total": rep.total, "monotone": rep.monotone, "pass": ok})
        profile += [[str(th), r, m] for r, m in zip(rep.radii, rep.cumulative)]
    write_csv(out / "mamass.csv", ["theta", "r", "mass_of_ball"], profile)
    Report("mamass", {"thetas": [str(t) for t in thetas], "rtol": 0.02}, rows,
           "pass" if all_ok else "fail").write(out / "mamass.json")
    return f"mamass: {'pass' if all_ok else 'fail'} for theta in {{{', '.join(str(t) for t in thetas)}}}"


def cmd_density(cfg, v, out: Path) -> str:
    rep = l1_density_report(v["theta"], cfg.N_list, cfg.R, local_bound=cfg.local_bound)
    rep.write(out / "density.json")
    write_csv(out / "density.csv", list(rep.rows[0].keys()), [list(r.values()) for r in rep.rows])
    return f"density: {rep.verdict}, L1 distance {fmt(rep.rows[-1]['l1_distance'])} at N={rep.rows[-1]['N']}"


def cmd_report_converge(cfg, v, out: Path) -> str:
    dom, theta = v["domain"], v["theta"]
    oracle = lambda z: _closed_form(v, theta, as_points(z, 1))  # noqa: E731
    try:
        rep = uniform_convergence_report(dom, theta, v["grid"], cfg.N_list, oracle, cfg.M,
                                         cfg.slack if cfg.slack is not None else 0.1)
    except ValueError as exc:
        raise ConfigError(f"field grid: {exc}") from exc
    rep.write(out / "converge.json")
    write_csv(out / "converge.csv", ["N", "sup_error", "estimate", "oracle", "band_lo", "band_hi"],
              [[r["N"], r["sup_error"], r["estimate"], r["oracle"], r["band_lo"], r["band_hi"]] for r in rep.rows])
    return f"report-converge: {rep.verdict}, sup error {fmt(rep.rows[-1]['sup_error'])} at N={rep.rows[-1]['N']}"


def cmd_report_monotone(cfg, v, out: Path) -> str:
    pts = v["grid"]
    grids = [_estimate(cfg, v, th, cfg.N, pts) for th in v["thetas"]]
    slack = cfg.slack if cfg.slack is not None else (0.0 if cfg.method == "closed-form" else 0.02)
    rep = monotonicity_report(v["thetas"], grids, slack)
    rep.write(out / "monotone.json")
    n = sum(r["violations"] for r in rep.rows)
    return f"report-monotone: {rep.verdict}, {n} violations at slack {slack:g}"


HANDLERS = {
    "dim": cmd_dim, "basis": cmd_basis, "phi": cmd_phi, "vapprox": cmd_vapprox, "hull": cmd_hull,
    "bm": cmd_bm, "mamass": cmd_mamass, "density": cmd_density,
    "report-converge": cmd_report_converge, "report-monotone": cmd_report_monotone,
}


# --- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ppot", description="Weighted theta-incomplete polynomial numerics.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", help="key = value file")
    for name in ("domain", "weight", "theta", "N", "N_list", "M", "mesh_M", "grid", "z", "d",
                 "thetas", "method", "family", "tol", "slack", "local_bound", "R", "out"):
        p.add_argument(f"--{name}", dest=name, metavar=name.upper())
    return p


def run(subcommand: str, cfg: RunConfig) -> Tuple[int, str]:
    """Validate, compute and write outputs; returns (exit status, summary)."""
    try:
        v = validate(cfg, subcommand)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.txt").write_text(cfg.to_text())
        res = HANDLERS[subcommand](cfg, v, out)
    except (ConfigError, ExprDomainError) as exc:
        return 1, f"error: {exc}"
    except (RankDeficiencyError, UnboundedError, InfeasibleError, NumericalFailure) as exc:
        return 2, f"numerical failure: {exc}"
    except ValueError as exc:
        return 1, f"error: {exc}"
    except ArithmeticError as exc:
        return 2, f"numerical failure: {exc}"
    if isinstance(res, tuple):
        return res[1], res[0]
    return 0, res


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig()
    try:
        if args.config:
            path = Path(args.config)
            try:
                text = path.read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
            parse_config_text(text, cfg, str(path))
        for name in _KEYS:
            raw = getattr(args, name, None)
            if raw is not None:
                _set(cfg, name, raw, f"--{name}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    status, summary = run(args.subcommand, cfg)
    print(summary, file=sys.stderr if status == 1 else sys.stdout)
    return status


if __name__ == "__main__":
    sys.exit(main())
