"""``cgcat`` command line: figure data as CSV plus a JSON manifest sidecar.

Exit status: 0 on success, 2 on a configuration error, 3 when ``--strict`` is
set and a result is flagged unreliable.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction

import numpy as np

from . import __version__
from .bell import bell_reference, bell_resolution
from .coarse import (
    cat_reference_coefficients,
    resolution_weights,
    sharp_weights,
)
from .negativity import (
    QuadratureGrid,
    cat_grid,
    fock_grid,
    negativity_density,
    negativity_map,
    negativity_resolution,
    negativity_two_mode,
    pasv_grid,
    reduced_two_mode,
    resolution_mixture_state,
)
from .phasespace.wigner import (
    assemble_two_mode,
    wigner_basis_cat,
    wigner_basis_noon,
    wigner_basis_pasv,
)

# points per axis; the cat Im axis defaults to 4 (p - 1) + 1
DEFAULT_POINTS = {"cat": 81, "noon": 81, "pasv": 121, "map": 81}

EXIT_CONFIG = 2
EXIT_UNRELIABLE = 3


class ConfigError(ValueError):
    pass


def parse_angle(text: str) -> float:
    """Angle in radians from ``"0.3"``, ``"pi/4"``, ``"3pi/4"`` or ``"13/100pi"``."""
    s = text.strip().replace(" ", "").replace("*", "").lower()
    if "pi" not in s:
        try:
            return float(s)
        except ValueError:
            raise ConfigError(f"cannot parse angle {text!r}") from None
    left, right = s.split("pi", 1)
    try:
        coef = Fraction(1) if left in ("", "+") else Fraction(-1) if left == "-" else Fraction(left)
        if right:
            if not right.startswith("/"):
                raise ValueError
            coef /= Fraction(right[1:])
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"cannot parse angle {text!r}") from None
    return float(coef) * math.pi


def linspace(lo: float, hi: float, steps: int) -> np.ndarray:
    if steps < 0:
        raise ConfigError("steps must be nonnegative")
    if steps == 1:
        if lo != hi:
            raise ConfigError("a single step needs min == max")
        return np.array([lo])
    if hi < lo:
        raise ConfigError("max must not be below min")
    return np.linspace(lo, hi, steps)


@dataclass
class RunConfig:
    """Every parameter of a run; serializes to JSON and back unchanged."""

    command: str
    alpha: list = field(default_factory=lambda: [2.0])
    r: list = field(default_factory=lambda: [0.3, 0.6, 0.9])
    n: list = field(default_factory=lambda: [1, 3, 5])
    theta_a: list = field(default_factory=lambda: ["1/4pi"])
    theta_b: list = field(default_factory=lambda: ["3/4pi"])
    delta_min: float = 0.0
    delta_max: float = 2.0
    delta_steps: int = 5
    Delta_min: float = 0.0
    Delta_max: float = 1.0
    Delta_steps: int = 5
    grid_points: int | None = None
    grid_points_im: int | None = None
    grid_extent: float | None = None
    nmax: list = field(default_factory=lambda: [20])
    k_min: int = -3
    k_max: int = 3
    m_min: int = -3
    m_max: int = 3
    gamma: str = "0"
    state: str = "ref"
    Delta: float = 0.0
    delta: float = 0.0
    workers: int = 1
    convention: str = "printed"
    strict: bool = False
    out: str = "-"

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        return cls(**data)

    def angle_pairs(self):
        if len(self.theta_a) != len(self.theta_b):
            raise ConfigError("--theta-a and --theta-b need the same number of values")
        return [(parse_angle(a), parse_angle(b)) for a, b in zip(self.theta_a, self.theta_b)]

    def deltas(self):
        return linspace(self.delta_min, self.delta_max, self.delta_steps)

    def Deltas(self):
        return linspace(self.Delta_min, self.Delta_max, self.Delta_steps)

    def grid(self, family: str, param: float) -> QuadratureGrid:
        p = self.points(family)
        if family == "cat":
            g = cat_grid(param, p, self.grid_points_im or 4 * (p - 1) + 1)
        elif family == "pasv":
            g = pasv_grid(param, p, self.grid_points_im or p)
        else:
            g = fock_grid(p)
            if self.grid_points_im:
                g = QuadratureGrid(g.extent_re, g.extent_im, p, self.grid_points_im)
        if self.grid_extent is not None:
            g = QuadratureGrid(self.grid_extent, self.grid_extent, g.points_re, g.points_im)
        return g

    def points(self, family: str) -> int:
        """Points per axis: ``--grid-points`` or the family default."""
        return self.grid_points or DEFAULT_POINTS[family]

    def weights(self, delta: float):
        if delta == 0:
            return sharp_weights()
        return resolution_weights(delta, convention=self.convention)


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


@dataclass
class RunOutput:
    header: list
    rows: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    unreliable: bool = False


def _note(out: RunOutput, res, label: str) -> None:
    if not res.reliable:
        out.unreliable = True
        out.diagnostics.append(f"{label}: " + "; ".join(res.diagnostics))


def cmd_bell_res(cfg: RunConfig) -> RunOutput:
    out = RunOutput(["alpha", "delta", "B_delta"])
    for a in cfg.alpha:
        for d in cfg.deltas():
            out.rows.append([a, d, bell_resolution(a, cfg.weights(d))])
    return out


def cmd_bell_ref(cfg: RunConfig) -> RunOutput:
    out = RunOutput(["Delta", "B_Delta"])
    for D in cfg.Deltas():
        out.rows.append([D, bell_reference(D)])
    return out


def _reference_sweep(out: RunOutput, basis, grid, series, cfg: RunConfig) -> None:
    for ta, tb in cfg.angle_pairs():
        for D in cfg.Deltas():
            W = assemble_two_mode(cat_reference_coefficients(ta, tb, D), basis)
            res = negativity_two_mode(W, grid, workers=cfg.workers)
            _note(out, res, f"{series} theta=({ta:.6g},{tb:.6g}) Delta={D:.6g}")
            out.rows.append([*series, ta, tb, D, res.value, res.integral_of_W])


def cmd_neg_ref_cat(cfg: RunConfig) -> RunOutput:
    out = RunOutput(["alpha", "theta_a", "theta_b", "Delta", "negativity", "integral_of_W"])
    for a in cfg.alpha:
        _reference_sweep(out, wigner_basis_cat(a), cfg.grid("cat", a), (a,), cfg)
    return out


def cmd_neg_ref_noon(cfg: RunConfig) -> RunOutput:
    out = RunOutput(["N", "theta_a", "theta_b", "Delta", "negativity", "integral_of_W"])
    for N in cfg.n:
        _reference_sweep(out, wigner_basis_noon(int(N)), cfg.grid("noon", N), (int(N),), cfg)
    return out


def cmd_neg_ref_pasv(cfg: RunConfig) -> RunOutput:
    out = RunOutput(["r", "theta_a", "theta_b", "Delta", "negativity", "integral_of_W"])
    for r in cfg.r:
        basis = wigner_basis_pasv(r, strict=cfg.strict)
        out.diagnostics.extend(f"pasv r={r}: {d}" for d in basis.diagnostics)
        _reference_sweep(out, basis, cfg.grid("pasv", r), (r,), cfg)
    return out


def cmd_wigner_slice(cfg: RunConfig) -> RunOutput:
    """``W(beta, gamma)`` on the beta grid at fixed ``gamma`` for one alpha and angle pair."""
    out = RunOutput(["re_beta", "im_beta", "W"])
    a = cfg.alpha[0]
    ta, tb = cfg.angle_pairs()[0]
    gamma = complex(cfg.gamma.replace(" ", "").replace("i", "j"))
    if cfg.state == "ref":
        W = assemble_two_mode(cat_reference_coefficients(ta, tb, cfg.Delta), wigner_basis_cat(a))
    elif cfg.state == "res":
        rho = resolution_mixture_state(a, ta, tb, cfg.weights(cfg.delta), cfg.nmax[0])
        W = reduced_two_mode(rho)
    else:
        raise ConfigError(f"unknown state {cfg.state!r}; use 'ref' or 'res'")
    g = QuadratureGrid.square(cfg.grid_extent or max(4.0, abs(a) + 4.0),
                              cfg.points("map"))
    (x, _), (y, _) = g.axes()
    beta = (x[:, None] + 1j * y[None, :]).ravel()
    vals = W(beta, np.full(beta.shape, gamma))
    for b, v in zip(beta, vals):
        out.rows.append([b.real, b.imag, v.real])
    return out


def cmd_neg_res_cat(cfg: RunConfig) -> RunOutput:
    out = RunOutput(["nmax", "delta", "weighted_sum_negativity", "direct_mixture_negativity"])
    a = cfg.alpha[0]
    ta, tb = cfg.angle_pairs()[0]
    grid = QuadratureGrid.square(cfg.grid_extent or max(4.0, abs(a) + 4.0),
                                 cfg.points("map"))
    for n_max in cfg.nmax:
        ws = [cfg.weights(d) for d in cfg.deltas()]
        k_cut = max((w.k_cut for w in ws), default=0)
        ks = range(-k_cut, k_cut + 1)
        N_map = negativity_map(a, ta, tb, ks, ks, grid, int(n_max), cfg.workers)
        if N_map.flags:
            out.unreliable = True
            out.diagnostics.extend(N_map.flags)
        for d, w in zip(cfg.deltas(), ws):
            direct = negativity_density(resolution_mixture_state(a, ta, tb, w, int(n_max)),
                                        grid, cfg.workers)
            _note(out, direct, f"nmax={n_max} delta={d:.6g}")
            out.rows.append([int(n_max), d, negativity_resolution(w, N_map), direct.value])
    return out


def cmd_neg_map(cfg: RunConfig) -> RunOutput:
    out = RunOutput(["k", "m", "N_km"])
    a = cfg.alpha[0]
    ta, tb = cfg.angle_pairs()[0]
    ks = range(cfg.k_min, cfg.k_max + 1)
    ms = range(cfg.m_min, cfg.m_max + 1)
    grid = QuadratureGrid.square(cfg.grid_extent or max(4.0, abs(a) + 4.0),
                                 cfg.points("map"))
    N_map = negativity_map(a, ta, tb, ks, ms, grid, cfg.nmax[0], cfg.workers)
    if N_map.flags:
        out.unreliable = True
        out.diagnostics.extend(N_map.flags)
    for i, k in enumerate(N_map.ks):
        for j, m in enumerate(N_map.ms):
            out.rows.append([k, m, N_map.values[i, j]])
    return out


COMMANDS = {
    "bell-res": (cmd_bell_res, "CHSH value under resolution coarse-graining vs delta"),
    "bell-ref": (cmd_bell_ref, "CHSH value under reference coarse-graining vs Delta"),
    "neg-ref-cat": (cmd_neg_ref_cat, "two-mode cat negativity vs Delta"),
    "wigner-slice": (cmd_wigner_slice, "two-mode Wigner function at fixed gamma"),
    "neg-res-cat": (cmd_neg_res_cat, "weighted-sum and direct negativity vs delta"),
    "neg-map": (cmd_neg_map, "sharp-cut negativity map N_km"),
    "neg-ref-noon": (cmd_neg_ref_noon, "NOON negativity vs Delta"),
    "neg-ref-pasv": (cmd_neg_ref_pasv, "photon-added squeezed vacuum negativity vs Delta"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cgcat", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    d = RunConfig("")
    for name, (_, help_text) in COMMANDS.items():
        s = sub.add_parser(name, help=help_text)
        s.add_argument("--alpha", type=float, nargs="+", default=d.alpha)
        s.add_argument("--r", type=float, nargs="+", default=d.r)
        s.add_argument("--n", type=int, nargs="+", default=d.n)
        s.add_argument("--theta-a", nargs="+", default=d.theta_a)
        s.add_argument("--theta-b", nargs="+", default=d.theta_b)
        for sym in ("delta", "Delta"):
            s.add_argument(f"--{sym}-min", type=float, default=getattr(d, f"{sym}_min"))
            s.add_argument(f"--{sym}-max", type=float, default=getattr(d, f"{sym}_max"))
            s.add_argument(f"--{sym}-steps", type=int, default=getattr(d, f"{sym}_steps"))
        s.add_argument("--grid-points", type=int, default=d.grid_points)
        s.add_argument("--grid-points-im", type=int, default=None)
        s.add_argument("--grid-extent", type=float, default=None)
        s.add_argument("--nmax", type=int, nargs="+", default=d.nmax)
        s.add_argument("--k-min", type=int, default=d.k_min)
        s.add_argument("--k-max", type=int, default=d.k_max)
        s.add_argument("--m-min", type=int, default=d.m_min)
        s.add_argument("--m-max", type=int, default=d.m_max)
        s.add_argument("--gamma", default=d.gamma, help="fixed second-mode point, e.g. 0.5+0.2i")
        s.add_argument("--state", choices=["ref", "res"], default=d.state)
        s.add_argument("--Delta", dest="Delta", type=float, default=d.Delta)
        s.add_argument("--delta", dest="delta", type=float, default=d.delta)
        s.add_argument("--workers", type=int, default=d.workers)
        s.add_argument("--convention", choices=["printed", "variance"], default=d.convention)
        s.add_argument("--strict", action="store_true")
        s.add_argument("--out", default=d.out, help="CSV path, '-' for stdout")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    data = {f.name: getattr(ns, f.name) for f in fields(RunConfig) if hasattr(ns, f.name)}
    return RunConfig(**data)


def run(cfg: RunConfig) -> RunOutput:
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    if cfg.workers < 1:
        raise ConfigError("--workers must be at least 1")
    if cfg.grid_points is not None and cfg.grid_points < 2:
        raise ConfigError("--grid-points must be at least 2")
    return COMMANDS[cfg.command][0](cfg)


def write_csv(out: RunOutput, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(out.header)
    for row in out.rows:
        w.writerow([fmt(x) for x in row])


def manifest(cfg: RunConfig, out: RunOutput) -> dict:
    return {
        "command": cfg.command,
        "config": asdict(cfg),
        "conventions": {
            "index_map": "appendix",
            "weights": cfg.convention,
            "wigner": "(2/pi) Tr[rho D(beta) P D(beta)^dag], unit integral",
        },
        "version": __version__,
        "rows": len(out.rows),
        "diagnostics": out.diagnostics,
        "unreliable": out.unreliable,
    }


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(ns)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            out = run(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"cgcat: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MemoryError as exc:
        print(f"cgcat: refused: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.out == "-":
        write_csv(out, sys.stdout)
    else:
        with open(cfg.out, "w", newline="") as fh:
            write_csv(out, fh)
        with open(cfg.out + ".manifest.json", "w") as fh:
            json.dump(manifest(cfg, out), fh, indent=2, sort_keys=True)
            fh.write("\n")
    for msg in out.diagnostics:
        print(f"cgcat: note: {msg}", file=sys.stderr)
    if cfg.strict and out.unreliable:
        print("cgcat: unreliable results in strict mode", file=sys.stderr)
        return EXIT_UNRELIABLE
    return 0


if __name__ == "__main__":
    sys.exit(main())
