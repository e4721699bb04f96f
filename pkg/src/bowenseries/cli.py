"""Command-line interface: ``bsl <command> [options]``.

Commands: polygon, verify, entropy, figures, markov, recode, psi.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import symbolic
from .boundary import eval_many, make_parameters, parse_spec_list
from .conjugacy import build_psi, psi_eval, psi_inverse
from .entropy import LAPS, MARKOV, SLOPE, rigidity_sweep
from .geometry import PolygonData, ccw_distance, make_polygon
from .markov import build_transition_matrix, matrix_to_csv, spectral_data
from .suites import SUITES, corrupt_generator, run_suites
from .svg import Canvas, Plot, fmt

METHODS = {"slope": (SLOPE,), "laps": (LAPS,), "eigen": (MARKOV,), "all": (SLOPE, LAPS, MARKOV)}


@dataclass(frozen=True)
class RunConfig:
    genus: int = 2
    seed: int = 0
    epsilon: float = 1e-5
    n_max: int = None
    output_dir: Path = None
    format: str = None

    def __post_init__(self):
        if self.genus < 2:
            raise ValueError("genus must be at least 2")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    def path(self, name: str) -> Path:
        out = Path(self.output_dir or ".")
        out.mkdir(parents=True, exist_ok=True)
        return out / name


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")
    print(f"wrote {path}", file=sys.stderr)


# ---------------------------------------------------------------------------
# polygon


def polygon_to_dict(poly: PolygonData) -> dict:
    return {
        "genus": poly.genus,
        "n_sides": poly.n,
        "alpha": poly.alpha,
        "P": [float(x) for x in poly.P],
        "Q": [float(x) for x in poly.Q],
        "C": [float(x) for x in poly.C],
        "V": [[float(z.real), float(z.imag)] for z in poly.V],
        "generators": [
            {"k": k, "a": [T.a.real, T.a.imag], "c": [T.c.real, T.c.imag]} for k, T in enumerate(poly.T, start=1)
        ],
    }


def load_polygon_json(text: str) -> dict:
    """Parse a polygon.json document, checking the fields it must carry."""
    data = json.loads(text)
    n = data["n_sides"]
    for key in ("P", "Q", "C", "V", "generators"):
        if len(data[key]) != n:
            raise ValueError(f"{key} has {len(data[key])} entries, expected {n}")
    return data


def polygon_svg(poly: PolygonData, size: int = 480) -> str:
    c = Canvas(size, size)
    R = size * 0.42
    cx = cy = size / 2

    def xy(z):
        return cx + R * z.real, cy - R * z.imag

    c.circle(cx, cy, R, stroke="#444")
    for k in range(1, poly.n + 1):
        T = poly.gen(k)
        centre = -T.a.conjugate() / T.c
        radius = 1.0 / abs(T.c)
        a, b = xy(poly.v(k)), xy(poly.v(k + 1))
        o = xy(centre)
        cross = (b[0] - a[0]) * (o[1] - a[1]) - (b[1] - a[1]) * (o[0] - a[0])
        sweep = 1 if cross > 0 else 0
        c.path(f"M {fmt(a[0])} {fmt(a[1])} A {fmt(R * radius)} {fmt(R * radius)} 0 0 {sweep} {fmt(b[0])} {fmt(b[1])}",
               stroke="#1f4e9c", width=1.5)
        mid = xy(0.78 * np.exp(1j * poly.c(k)))
        c.text(mid[0], mid[1] + 4, str(k), size=11)
    for name, pts in (("P", poly.P), ("Q", poly.Q)):
        for k, t in enumerate(pts, start=1):
            x, y = xy(np.exp(1j * t))
            lx, ly = xy(1.09 * np.exp(1j * t))
            c.circle(x, y, 2, fill="#c00" if name == "P" else "#080", stroke="none")
            c.text(lx, ly + 4, f"{name}{k}", size=8)
    c.text(cx, 18, f"fundamental polygon, genus {poly.genus}", size=13)
    return c.render()


def cmd_polygon(cfg: RunConfig) -> int:
    poly = make_polygon(cfg.genus)
    if cfg.format in (None, "json"):
        _write(cfg.path("polygon.json"), _dump(polygon_to_dict(poly)))
    if cfg.format in (None, "svg"):
        _write(cfg.path("polygon.svg"), polygon_svg(poly))
    return 0


# ---------------------------------------------------------------------------
# verify


def cmd_verify(cfg: RunConfig, suites: list, corrupt: int = None) -> int:
    poly = make_polygon(cfg.genus)
    if corrupt is not None:
        poly = corrupt_generator(poly, corrupt)
    checks = run_suites(poly, suites, cfg.epsilon, cfg.seed)
    ok = all(c.ok for c in checks)
    report = {
        "genus": cfg.genus,
        "epsilon": cfg.epsilon,
        "seed": cfg.seed,
        "suites": sorted(SUITES if "all" in suites else suites),
        "checks": [c.as_dict() for c in checks],
        "ok": ok,
    }
    sys.stdout.write(_dump(report))
    for c in checks:
        if not c.ok:
            print(f"FAIL {c.suite}.{c.name}: {c.value:.3e} > {c.threshold:.1e}", file=sys.stderr)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# entropy


def cmd_entropy(cfg: RunConfig, spec: str, method: str, bits: bool = False) -> int:
    poly = make_polygon(cfg.genus)
    choices = parse_spec_list(poly, spec, cfg.seed)
    result = rigidity_sweep(cfg.genus, choices, cfg.epsilon, cfg.n_max, METHODS[method], seed=cfg.seed)
    if bits:
        for row in result.rows:
            r = row.report
            r.estimate /= math.log(2)
            r.reference /= math.log(2)
    text = result.to_csv()
    sys.stdout.write(text)
    if cfg.output_dir is not None:
        if cfg.format in (None, "csv"):
            _write(cfg.path("sweep.csv"), text)
        if cfg.format == "json":
            rows = [dict(zip(["genus", "spec", "method", "estimate", "reference", "deviation", "pass"], r.as_list()))
                    for r in result.rows]
            _write(cfg.path("sweep.json"), _dump({"seed": cfg.seed, "epsilon": cfg.epsilon, "units": "bits" if bits
                                                  else "nats", "rows": rows, "pass": result.passed}))
    if SLOPE in METHODS[method]:
        return 0 if result.passed else 1
    return 0 if all(r.report.passed() for r in result.rows) else 1


# ---------------------------------------------------------------------------
# figures


def _fig_map(poly, params, title, n=2000):
    xs = np.linspace(-math.pi, math.pi, n, endpoint=False)
    ys, _ = eval_many(params, xs)
    p = Plot(title)
    for a in params.A:
        p.vline(a)
    p.curve(xs, ys)
    return p.render()


def _fig_conjugated(poly, table, n=2000):
    ys = np.linspace(-math.pi, math.pi, n, endpoint=False)
    xs = psi_inverse(table, ys)
    fx, _ = eval_many(table.params, xs)
    p = Plot("conjugated map (constant slope)")
    p.curve(ys, table.exact(fx))
    return p.render()


def _fig_psi(table, n=2000):
    xs = np.linspace(-math.pi, math.pi, n + 1)
    p = Plot("psi_P")
    p.curve(xs, table.exact(xs))
    return p.render()


def _fig_TS(poly, table, k, n=1500):
    xs = np.linspace(-math.pi, math.pi, n, endpoint=False)
    p = Plot(f"T_{k} (blue) and S_{k} (red)")
    p.curve(xs, poly.gen(k).apply_angle(xs))
    p.curve(xs, table.exact(poly.gen(k).apply_angle(psi_inverse(table, xs))), stroke="#b22")
    return p.render()


def _fig_cylinders(poly, omega=(1, 16)):
    """The P-cylinder of ``omega`` and its Q-cylinder tiles, drawn on a stretched axis."""
    target = symbolic.cylinder_interval(poly, omega, "P")
    words = symbolic.recode_P_to_Q(poly.genus, omega)
    size_w, size_h = 640, 220
    c = Canvas(size_w, size_h)
    x0, x1 = 30, size_w - 30

    def px(t):
        return x0 + ccw_distance(target.start, t) / target.length * (x1 - x0)

    c.rect(x0, 60, x1 - x0, 30, stroke="#000", fill="#9bb7e0")
    c.text(size_w / 2, 50, f"P-cylinder {omega}", size=12)
    arcs = [(symbolic.cylinder_interval(poly, w, "Q"), w) for w in words]
    arcs.sort(key=lambda aw: ccw_distance(target.start, aw[0].start))
    for arc, w in arcs:
        a = px(arc.start)
        b = a + arc.length / target.length * (x1 - x0)
        c.rect(a, 120, max(b - a, 0.5), 30, stroke="#000", fill="#e0c09b" if w[-1] % 2 else "#c0e09b")
    c.text(size_w / 2, 175, f"{len(words)} Q-cylinders of rank {len(omega) + 1}", size=12)
    return c.render()


def cmd_figures(cfg: RunConfig) -> int:
    poly = make_polygon(cfg.genus)
    pP = make_parameters(poly, "all-P")
    table = build_psi(pP, cfg.epsilon)
    _write(cfg.path("polygon.svg"), polygon_svg(poly))
    _write(cfg.path("fP.svg"), _fig_map(poly, pP, "f_P"))
    _write(cfg.path("conjugated.svg"), _fig_conjugated(poly, table))
    _write(cfg.path("psi.svg"), _fig_psi(table))
    _write(cfg.path("TS.svg"), _fig_TS(poly, table, 1))
    _write(cfg.path("cylinders.svg"), _fig_cylinders(poly))
    return 0


# ---------------------------------------------------------------------------
# data exports


def cmd_markov(cfg: RunConfig, spec: str) -> int:
    poly = make_polygon(cfg.genus)
    pc = make_parameters(poly, spec)
    M = build_transition_matrix(pc)
    sd = spectral_data(M)
    _write(cfg.path("matrix.csv"), matrix_to_csv(M))
    _write(cfg.path("spectral.json"), sd.to_json() + "\n")
    return 0


def cmd_recode(cfg: RunConfig, length: int) -> int:
    poly = make_polygon(cfg.genus)
    lines, ok = [], True
    for n in range(1, length + 1):
        for w in symbolic.admissible_words(cfg.genus, n):
            r = symbolic.verify_recoding(poly, w)
            ok &= r.ok
            d = r.as_dict()
            lines.append(json.dumps({k: d[k] for k in ("omega", "q_words", "measure_P", "measure_Q_sum", "union_ok")}))
    _write(cfg.path("recoding.jsonl"), "\n".join(lines) + "\n")
    return 0 if ok else 1


def cmd_psi(cfg: RunConfig, spec: str) -> int:
    poly = make_polygon(cfg.genus)
    table = build_psi(make_parameters(poly, spec), cfg.epsilon)
    _write(cfg.path("psi.csv"), table.to_csv())
    print(f"breakpoints={table.n_breakpoints} resolution={table.resolution:.3e} psi(0)={psi_eval(table, 0.0):.3e}",
          file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--genus", type=int, default=2)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--epsilon", type=float, default=1e-5, help="psi table resolution")
    common.add_argument("--nmax", type=int, default=None, help="largest iterate for lap counting / word length")
    common.add_argument("--out", type=Path, default=None, help="output directory")
    common.add_argument("--format", choices=["csv", "json", "svg"], default=None)

    ap = argparse.ArgumentParser(prog="bsl", description="Bowen-Series boundary maps: construction and checks")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("polygon", parents=[common], help="write polygon.json and polygon.svg")
    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("--suite", default="all", help="comma list of " + "|".join(SUITES + ("all",)))
    v.add_argument("--corrupt-generator", type=int, default=None, help=argparse.SUPPRESS)
    e = sub.add_parser("entropy", parents=[common], help="entropy estimates and rigidity sweep")
    e.add_argument("--spec", default="all-P", help="all-P | all-Q | bitmask:PQ.. | fractions:t,.. | random:N; ';' joins")
    e.add_argument("--method", choices=sorted(METHODS), default="all")
    e.add_argument("--bits", action="store_true", help="report entropies in bits")
    sub.add_parser("figures", parents=[common], help="write SVG figures")
    m = sub.add_parser("markov", parents=[common], help="write matrix.csv and spectral.json")
    m.add_argument("--spec", default="all-P")
    sub.add_parser("recode", parents=[common], help="write the recoding report (JSON lines)")
    p = sub.add_parser("psi", parents=[common], help="write the psi breakpoint table")
    p.add_argument("--spec", default="all-P")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(args.genus, args.seed, args.epsilon, args.nmax, args.out, args.format)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "polygon":
            return cmd_polygon(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, [s.strip() for s in args.suite.split(",")], args.corrupt_generator)
        if args.command == "entropy":
            return cmd_entropy(cfg, args.spec, args.method, args.bits)
        if args.command == "figures":
            return cmd_figures(cfg)
        if args.command == "markov":
            return cmd_markov(cfg, args.spec)
        if args.command == "recode":
            return cmd_recode(cfg, args.nmax or 2)
        if args.command == "psi":
            return cmd_psi(cfg, args.spec)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
