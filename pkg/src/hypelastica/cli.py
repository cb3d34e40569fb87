"""Command-line front end.

Every command prints one line of JSON on stdout; progress and explanations go
to stderr. Files land in --out-dir (default: $HYPELASTICA_OUT, else the
current directory) and are removed again if the command fails.
"""

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import closing, elastica, flow, hypgeo
from .errors import DomainError, ElasticaError

log = logging.getLogger("hypelastica")

OUT_ENV = "HYPELASTICA_OUT"
EXIT_USAGE = 64

EXIT_CODES = """exit codes:
  0   success
  1   invalid input or domain error
  2   no elastica with the requested data
  3   parameters on the degenerate locus kappa0^2 = lambda + 4
  4   closing condition has no root in the scanned bracket
  5   winding integer m outside the search window |m| <= n + 2
  6   a sampled curve failed certification
  7   flow failure (time step underflow or curve left the half-plane)
  64  command-line usage error
"""


@dataclass
class RunConfig:
    command: str
    lam: float | None = None
    C: float | None = None
    kappa0_sq: float | None = None
    n: int | None = None
    m: int | None = None
    N: int = 4096
    t_end: float | None = None
    dt0: float = 1e-4
    out_dir: Path = field(default_factory=Path)
    curve_in: Path | None = None
    catalog: Path | None = None
    emit_svg: bool = False
    extra: dict = field(default_factory=dict)


class _Outputs:
    """Tracks files written by a command so a failure can remove them."""

    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)
        self.paths = []

    def path(self, name):
        self.out_dir.mkdir(parents=True, exist_ok=True)
        p = self.out_dir / name
        self.paths.append(p)
        return p

    def discard(self):
        for p in self.paths:
            try:
                p.unlink()
            except FileNotFoundError:
                pass


# -- SVG ----------------------------------------------------------------------

def write_svg(path, curves, caption, width=640, height=480):
    """Curves (complex arrays) in the upper half-plane with the x-axis drawn."""
    pts = np.concatenate([np.asarray(z) for z in curves])
    x0, x1 = float(pts.real.min()), float(pts.real.max())
    y1 = float(pts.imag.max())
    pad = 0.05 * max(x1 - x0, y1, 1e-9)
    x0, x1, y0, y1 = x0 - pad, x1 + pad, 0.0 - pad, y1 + pad
    scale = min((width - 20) / (x1 - x0), (height - 60) / (y1 - y0))

    def px(z):
        return 10 + (z.real - x0) * scale, height - 50 - (z.imag - y0) * scale

    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">',
             '<rect width="100%" height="100%" fill="white"/>']
    ax_l, ax_y = px(complex(x0, 0.0))
    ax_r, _ = px(complex(x1, 0.0))
    lines.append(f'<line x1="{ax_l:.2f}" y1="{ax_y:.2f}" x2="{ax_r:.2f}" y2="{ax_y:.2f}" '
                 'stroke="black" stroke-width="1"/>')
    for z in curves:
        z = np.append(np.asarray(z), np.asarray(z)[:1])
        xs, ys = px(z)
        poly = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(xs, ys))
        lines.append(f'<polyline points="{poly}" fill="none" stroke="#1f4e9c" stroke-width="1.2"/>')
    lines.append(f'<text x="10" y="{height - 15}" font-family="monospace" font-size="12">'
                 f'{caption}</text>')
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _caption(params=None, n=None, m=None, T=None, E=None, L=None):
    bits = []
    if params is not None:
        bits += [f"lambda={params.lam:g}", f"C={params.C:.6g}"]
    for name, v in (("n", n), ("m", m), ("T", T)):
        if v is not None:
            bits.append(f"{name}={v}")
    for name, v in (("E", E), ("L", L)):
        if v is not None:
            bits.append(f"{name}={v:.6g}")
    return "  ".join(bits)


# -- commands -----------------------------------------------------------------

def _params_from(cfg):
    if (cfg.kappa0_sq is None) == (cfg.C is None):
        raise DomainError("give exactly one of --kappa0-sq and --C")
    if cfg.kappa0_sq is not None:
        return elastica.classify(cfg.lam, cfg.kappa0_sq, cfg.extra.get("allow_degenerate", False))
    return elastica.classify_from_C(cfg.lam, cfg.C, cfg.extra.get("allow_degenerate", False))


def cmd_classify(cfg, out):
    P = _params_from(cfg)
    return {**P.to_dict(), "flags": list(P.flags)}


def cmd_sample(cfg, out):
    P = _params_from(cfg)
    y = cfg.extra["y"]
    if P.case is elastica.Case.CIRCULAR:
        rho, _ = elastica.circle_geometry(P, y)
        span = 2.0 * math.pi * math.sinh(rho)
        s = span * np.arange(cfg.N) / cfg.N
        curve = elastica.sample_circle(P, y, s)
        report = None
    else:
        kp = elastica.killing_params(P, y)
        if cfg.extra.get("s_max") is not None:
            span = cfg.extra["s_max"]
        elif P.case is elastica.Case.ASYMPTOTIC:
            span = 16.0
        else:
            span = cfg.extra["periods"] * elastica.curvature_period(P)
        s = np.linspace(0.0, span, cfg.N)
        if P.case is elastica.Case.ASYMPTOTIC:
            s -= span / 2.0
        curve, report = elastica.certify(P, kp, s)
    csv_path = out.path(cfg.extra.get("name", "sample") + ".csv")
    hypgeo.write_curve_csv(csv_path, curve, s)
    result = {"params": P.to_dict(), "curve": str(csv_path), "N": cfg.N}
    if report is not None:
        result["residuals"] = {"unit_speed": report.unit_speed, "killing": report.killing,
                               "curvature": report.curvature, "closure": report.closure}
    if cfg.emit_svg:
        svg = out.path(csv_path.stem + ".svg")
        write_svg(svg, [curve.z], _caption(P))
        result["svg"] = str(svg)
    return result


def _record_summary(rec, out, stem, emit_svg):
    csv_path = out.path(stem + ".csv")
    hypgeo.write_curve_csv(csv_path, rec.curve)
    rec = rec.with_curve_path(csv_path.name)
    d = rec.to_dict()
    d["reilly_quotient"] = closing.reilly_quotient(rec)
    if emit_svg:
        svg = out.path(stem + ".svg")
        write_svg(svg, [rec.curve.z], _caption(rec.params, rec.n, rec.m, rec.total_curvature,
                                               rec.energy, rec.L))
        d["svg"] = svg.name
    return d


def cmd_close(cfg, out):
    rec = closing.solve_rotational_closed(cfg.lam, cfg.n, cfg.m, N=cfg.N)
    print(f"closed rotational elastica: {rec.label}", file=sys.stderr)
    return _record_summary(rec, out, f"closed_l{cfg.lam:g}_n{cfg.n}_m{rec.m}", cfg.emit_svg)


def cmd_figure_eight(cfg, out):
    if cfg.extra.get("sweep"):
        rows = []
        print(f"{'lambda':>8} {'C':>12} {'energy':>12} {'E/L':>10}", file=sys.stderr)
        for lam in cfg.extra["sweep_lambdas"]:
            rec = closing.solve_figure_eight(lam, N=cfg.N)
            rows.append({"lambda": lam, "C": rec.params.C, "energy": rec.energy, "L": rec.L,
                         "reilly_quotient": closing.reilly_quotient(rec)})
            print(f"{lam:8g} {rec.params.C:12.6g} {rec.energy:12.8f} "
                  f"{closing.reilly_quotient(rec):10.6f}", file=sys.stderr)
        return {"sweep": rows}
    rec = closing.solve_figure_eight(cfg.lam, N=cfg.N)
    print(f"figure-eight: {rec.label}, energy {rec.energy:.6f}", file=sys.stderr)
    return _record_summary(rec, out, f"figure_eight_l{cfg.lam:g}", cfg.emit_svg)


def cmd_make_curve(cfg, out):
    style = cfg.extra["style"]
    scale = cfg.extra["scale"]
    if style == "hyperbolic-circle":
        curve = hypgeo.hyperbolic_circle(scale, cfg.extra["rho"], cfg.N)
    elif style == "clifford":
        curve = hypgeo.SampledCurve.from_complex(flow.reparametrize(scale * flow.clifford_curve(cfg.N)))
    else:
        curve = flow.make_zero_turning_curve(style, scale, cfg.N, cfg.extra["lam_fe"])
    path = out.path(cfg.extra.get("name") or f"{style}.csv")
    hypgeo.write_curve_csv(path, curve)
    return {"curve": str(path), "N": curve.n, "turning": hypgeo.turning_number(curve),
            "energy": flow.flow_energy(curve.z), "length": flow.flow_length(curve.z)}


def cmd_flow(cfg, out):
    if cfg.curve_in is None:
        raise DomainError("--in is required")
    if not (cfg.t_end and cfg.t_end > 0):
        raise DomainError("--t-end must be positive")
    curve = hypgeo.read_curve_csv(cfg.curve_in)
    state = flow.initial_state(curve, cfg.lam, cfg.dt0, cfg.extra["dt_max"])
    stem = cfg.extra.get("name") or f"flow_{Path(cfg.curve_in).stem}"
    snaps = []

    def snapshot(st):
        p = out.path(f"{stem}_step{st.step_count:07d}.csv")
        hypgeo.write_curve_csv(p, st.curve)
        snaps.append(p.name)

    diag = flow.evolve(state, cfg.t_end, cfg.extra["sample_every"], snapshot,
                       cfg.extra["snapshot_every"])
    diag_path = out.path(stem + "_diagnostics.csv")
    diag.write_csv(diag_path)
    final_path = out.path(stem + "_final.csv")
    hypgeo.write_curve_csv(final_path, diag.final_state.curve)
    last = dict(zip(flow.DIAGNOSTIC_FIELDS, diag.samples[-1]))
    first = dict(zip(flow.DIAGNOSTIC_FIELDS, diag.samples[0]))
    print(f"flow stopped ({diag.stop_reason}) at t={last['t']:.6g}: energy {first['energy']:.6g} -> "
          f"{last['energy']:.6g}, length {first['length']:.6g} -> {last['length']:.6g}",
          file=sys.stderr)
    result = {"diagnostics": diag_path.name, "final_curve": final_path.name, "snapshots": snaps,
              "stop_reason": diag.stop_reason, "steps": diag.final_state.step_count,
              "initial": first, "final": last}
    if cfg.emit_svg:
        svg = out.path(stem + "_final.svg")
        write_svg(svg, [curve.z, diag.final_state.curve.z],
                  f"lambda={cfg.lam:g}  t={last['t']:.4g}  E={last['energy']:.6g}  "
                  f"L={last['length']:.6g}  T={last['turning']}")
        result["svg"] = svg.name
    return result


def _load_or_build_catalog(cfg):
    if cfg.catalog is not None:
        return closing.read_catalog(cfg.catalog)
    return closing.build_catalog(N=cfg.N, jobs=cfg.extra.get("jobs", 1))


def cmd_reilly_scan(cfg, out):
    records = _load_or_build_catalog(cfg)
    cap = cfg.extra["energy_cap"]
    rows = closing.reilly_scan(records, cap)
    if not rows:
        raise DomainError(f"no catalog record with energy <= {cap}")
    table = []
    for rec, q, bound in rows:
        table.append({"label": rec.label, "energy": rec.energy, "reilly_quotient": q,
                      "bound_1_over_K": bound})
        b = "-" if bound is None else f"{bound:.6f}"
        print(f"{rec.label:50s} E={rec.energy:9.5f} E/L={q:9.6f} 1/K={b}", file=sys.stderr)
    return {"energy_cap": cap, "min_reilly_quotient": rows[0][1], "records": table}


def cmd_catalog(cfg, out):
    records = closing.build_catalog(N=cfg.N, jobs=cfg.extra.get("jobs", 1))
    written = []
    for i, rec in enumerate(records):
        p = out.path(f"catalog_{i:03d}.csv")
        hypgeo.write_curve_csv(p, rec.curve)
        written.append(rec.with_curve_path(p.name))
        if cfg.emit_svg:
            write_svg(out.path(f"catalog_{i:03d}.svg"), [rec.curve.z],
                      _caption(rec.params, rec.n, rec.m, rec.total_curvature, rec.energy, rec.L))
    path = out.path("catalog.jsonl")
    closing.write_catalog(path, written)
    rows = closing.reilly_scan(written, 15.0)
    return {"catalog": path.name, "records": len(written),
            "min_reilly_quotient_below_15": rows[0][1] if rows else None}


COMMANDS = {
    "classify": cmd_classify,
    "sample": cmd_sample,
    "close": cmd_close,
    "figure-eight": cmd_figure_eight,
    "make-curve": cmd_make_curve,
    "flow": cmd_flow,
    "reilly-scan": cmd_reilly_scan,
    "catalog": cmd_catalog,
}


# -- argument parsing ---------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    fmt = argparse.RawDescriptionHelpFormatter
    p = _Parser(prog="hypelastica", description="Elastic curves in the hyperbolic plane.",
                epilog=EXIT_CODES, formatter_class=fmt)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, with_out=True):
        if with_out:
            sp.add_argument("--out-dir", type=Path, default=None,
                            help=f"output directory (default ${OUT_ENV} or .)")
            sp.add_argument("--svg", action="store_true", help="also write SVG renderings")

    def params(sp):
        sp.add_argument("--lambda", dest="lam", type=float, required=True)
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--kappa0-sq", type=float)
        g.add_argument("--C", type=float)
        sp.add_argument("--allow-degenerate", action="store_true")

    sp = sub.add_parser("classify", help="classify (lambda, kappa0^2) or (lambda, C)",
                        epilog=EXIT_CODES, formatter_class=fmt)
    params(sp)

    sp = sub.add_parser("sample", help="sample an elastica from its explicit parametrization",
                        epilog=EXIT_CODES, formatter_class=fmt)
    params(sp)
    sp.add_argument("--y", type=float, default=1.0, help="height of the start point (0, y)")
    sp.add_argument("--N", type=int, default=1024)
    sp.add_argument("--periods", type=float, default=1.0, help="curvature periods to sample")
    sp.add_argument("--s-max", type=float, default=None, help="arclength window instead of periods")
    sp.add_argument("--name", default="sample")
    common(sp)

    sp = sub.add_parser("close", help="solve the rotational closing condition",
                        epilog=EXIT_CODES, formatter_class=fmt)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--n", type=int, required=True, help="curvature periods per curve period")
    sp.add_argument("--m", type=int, default=None, help="winding integer (searched if absent)")
    sp.add_argument("--N", type=int, default=4096)
    common(sp)

    sp = sub.add_parser("figure-eight", help="solve for the lambda-figure-eight",
                        epilog=EXIT_CODES, formatter_class=fmt)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--sweep", action="store_true", help="tabulate energy over a lambda sweep")
    sp.add_argument("--sweep-lambdas", type=float, nargs="+", default=[0.6, 0.3, 0.1, 0.03, 0.01])
    sp.add_argument("--N", type=int, default=4096)
    common(sp)

    sp = sub.add_parser("make-curve", help="write initial data for the flow",
                        epilog=EXIT_CODES, formatter_class=fmt)
    sp.add_argument("--style", required=True,
                    choices=["hyperbolic-circle", "clifford", "lemniscate", "elastic-figure-eight"])
    sp.add_argument("--scale", type=float, default=1.0,
                    help="centre height (circle), dilation (clifford) or minimum height")
    sp.add_argument("--rho", type=float, default=0.5, help="geodesic radius of the circle")
    sp.add_argument("--lambda-fe", dest="lam_fe", type=float, default=0.1)
    sp.add_argument("--N", type=int, default=512)
    sp.add_argument("--name", default=None)
    common(sp)

    sp = sub.add_parser("flow", help="run the elastic flow from a curve CSV",
                        epilog=EXIT_CODES, formatter_class=fmt)
    sp.add_argument("--in", dest="curve_in", type=Path, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, default=0.0)
    sp.add_argument("--t-end", type=float, required=True)
    sp.add_argument("--dt0", type=float, default=1e-4)
    sp.add_argument("--dt-max", type=float, default=2e-3)
    sp.add_argument("--sample-every", type=int, default=20)
    sp.add_argument("--snapshot-every", type=int, default=0)
    sp.add_argument("--name", default=None)
    common(sp)

    sp = sub.add_parser("reilly-scan", help="minimum E/L over catalog records below an energy cap",
                        epilog=EXIT_CODES, formatter_class=fmt)
    sp.add_argument("--catalog", type=Path, default=None, help="catalog JSONL (built if absent)")
    sp.add_argument("--energy-cap", type=float, default=15.0)
    sp.add_argument("--N", type=int, default=4096)
    sp.add_argument("--jobs", type=int, default=1)

    sp = sub.add_parser("catalog", help="build the catalog of closed elastica",
                        epilog=EXIT_CODES, formatter_class=fmt)
    sp.add_argument("--N", type=int, default=4096)
    sp.add_argument("--jobs", type=int, default=1, help="parallel workers for catalog cells")
    common(sp)
    return p


_KNOWN = {"command", "lam", "C", "kappa0_sq", "n", "m", "N", "t_end", "dt0", "out_dir",
          "curve_in", "catalog", "svg", "verbose"}


def config_from_args(ns):
    d = vars(ns)
    out_dir = d.get("out_dir") or Path(os.environ.get(OUT_ENV, "."))
    cfg = RunConfig(command=ns.command, lam=d.get("lam"), C=d.get("C"),
                    kappa0_sq=d.get("kappa0_sq"), n=d.get("n"), m=d.get("m"),
                    N=d.get("N") or 4096, t_end=d.get("t_end"), dt0=d.get("dt0") or 1e-4,
                    out_dir=Path(out_dir), curve_in=d.get("curve_in"), catalog=d.get("catalog"),
                    emit_svg=bool(d.get("svg")),
                    extra={k: v for k, v in d.items() if k not in _KNOWN})
    validate(cfg)
    return cfg


def validate(cfg):
    for name in ("lam", "C", "kappa0_sq", "t_end", "dt0"):
        v = getattr(cfg, name)
        if v is not None and not math.isfinite(v):
            raise DomainError(f"{name} must be finite")
    if cfg.N < 8:
        raise DomainError("--N must be at least 8")
    if cfg.n is not None and cfg.n < 1:
        raise DomainError("--n must be a positive integer")
    if cfg.dt0 <= 0:
        raise DomainError("--dt0 must be positive")
    if cfg.extra.get("jobs", 1) < 1:
        raise DomainError("--jobs must be at least 1")
    if cfg.command == "flow" and cfg.t_end is not None and cfg.t_end <= 0:
        raise DomainError("--t-end must be positive")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    return obj


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    out = None
    try:
        cfg = config_from_args(ns)
        out = _Outputs(cfg.out_dir)
        result = COMMANDS[cfg.command](cfg, out)
    except ElasticaError as exc:
        if out is not None:
            out.discard()
        print(f"error: {exc}", file=sys.stderr)
        print(json.dumps({"error": type(exc).__name__, "message": str(exc),
                          "exit_code": exc.exit_code}))
        return exc.exit_code
    except BaseException:
        if out is not None:
            out.discard()
        raise
    print(json.dumps(_jsonable({"command": cfg.command, **result})))
    return 0


if __name__ == "__main__":
    sys.exit(main())
