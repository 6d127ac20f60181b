"""``sqlab`` command line: one subcommand per object, CSV out, optional SVG.

Exit codes: 0 success, 2 validation error (bad flags, domain or capacity
violations), 1 runtime error or a failing selftest criterion.

Every CSV starts with a comment line holding the invocation and version.
Flags that cannot change the numbers (--workers, --cache-dir, --out, --svg)
are left out of that line so the bytes do not depend on them.
"""

from __future__ import annotations

import argparse
import io
import logging
import math
import os
import shlex
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .acceptance import CRITERIA, criterion_12, results_csv, run_criteria
from .apstats import AffineMap, correlation_summary, error_vector, variance
from .errors import SqlabError
from .expsum import (
    a_sum,
    a_sum_budget,
    b_sum,
    b_sum_budget,
    decay_scan,
    g_sum,
    g_sum_budget,
    incomplete_invsq_sum,
)
from .localdensity import f_density
from .pairstats import big_sigma, sigma_main_term, verify_pair_density
from .sieve import SegmentCache, count_squarefree, count_squarefree_mobius
from .svg import Series, emit_svg

log = logging.getLogger("sqlab")

COMMANDS = ("sieve-count", "evector", "variance", "correlate", "pairs", "density", "bigsigma",
            "expsum", "asum", "decay", "selftest")
CACHE_ENV = "SQLAB_CACHE_DIR"
NEUTRAL_FLAGS = ("--workers", "--cache-dir", "--out", "--svg")


class ValidationError(SqlabError, ValueError):
    """Bad command-line input; maps to exit code 2."""


@dataclass
class RunConfig:
    command: str
    X: int | None = None
    q: int | None = None
    r: int | None = None
    s: int | None = None
    a: int | None = None
    N: int | None = None
    Y: float | None = None
    l_values: list[int] = field(default_factory=list)
    x_values: list[int] = field(default_factory=list)
    q_values: list[int] = field(default_factory=list)
    epsilons: list[float] = field(default_factory=list)
    samples: int = 8
    seed: int = 0
    kind: str = "a"
    method: str = "auto"
    tolerance: float | None = None
    cutoff: int | None = None
    m_cutoff: int | None = None
    only: list[int] = field(default_factory=list)
    compare_workers: list[int] = field(default_factory=list)
    allow_degenerate: bool = False
    allow_homothety: bool = False
    cache_dir: Path | None = None
    workers: int = 1
    output: Path | None = None
    svg: Path | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        if self.workers < 1:
            raise ValidationError("--workers must be >= 1")
        if self.tolerance is not None and not self.tolerance > 0:
            raise ValidationError("--tolerance must be > 0")
        if self.cutoff is not None and self.cutoff < 1:
            raise ValidationError("--cutoff must be >= 1")
        if self.X is not None and self.X < 1:
            raise ValidationError("--x must be >= 1")
        if any(x < 1 for x in self.x_values):
            raise ValidationError("--x values must be >= 1")
        if self.q is not None and self.q < 2:
            raise ValidationError("--q must be >= 2")
        if any(q < 2 for q in self.q_values):
            raise ValidationError("--q values must be >= 2")
        if self.r == 0:
            raise ValidationError("--r must be nonzero")
        if self.N is not None and self.N < 0:
            raise ValidationError("--n must be >= 0")
        if self.samples < 1:
            raise ValidationError("--samples must be >= 1")
        if any(w < 1 for w in self.compare_workers):
            raise ValidationError("--compare-workers values must be >= 1")
        bad = [n for n in self.only if n not in CRITERIA and n != 12]
        if bad:
            raise ValidationError(f"unknown criteria {bad}")
        if self.command in ("evector", "variance", "correlate") and self.q > self.X and not self.allow_degenerate:
            raise ValidationError(f"q={self.q} > X={self.X}; pass --allow-degenerate to proceed")
        if self.command == "correlate" and self.s % self.q == 0 and not self.allow_homothety:
            raise ValidationError("s = 0 (mod q) is a homothety; pass --allow-homothety to proceed")
        if self.command == "asum" and self.kind in ("b", "g") and self.r is None:
            raise ValidationError(f"--kind {self.kind} needs --r")
        if self.command == "asum" and self.kind == "g" and self.s is None:
            raise ValidationError("--kind g needs --s")
        if self.command == "asum" and self.kind in ("a", "b") and self.a is None:
            raise ValidationError(f"--kind {self.kind} needs --a")

    def segment_cache(self) -> SegmentCache | None:
        return SegmentCache(self.cache_dir) if self.cache_dir else None


# ---------------------------------------------------------------------------
# argument grammar


def _int_list(text: str) -> list[int]:
    """'1,2,5' or '1:10' (inclusive) into a list of ints."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            lo, hi = part.split(":")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _float_list(text: str) -> list[float]:
    vals = [float(p) for p in text.split(",") if p.strip()]
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _number(text: str) -> int:
    """Integers, also written as 1e6 or 10**6."""
    text = text.strip()
    if "**" in text:
        base, exp = text.split("**")
        return int(base) ** int(exp)
    if "e" in text.lower():
        val = float(text)
        if val != int(val):
            raise argparse.ArgumentTypeError(f"{text} is not an integer")
        return int(val)
    return int(text)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sqlab", description="Squarefree numbers in arithmetic progressions.")
    parser.add_argument("--version", action="version", version=f"sqlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, svg=False):
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--cache-dir", type=Path, default=None)
        p.add_argument("--out", type=Path, default=None, help="CSV path (default stdout)")
        p.add_argument("-v", "--verbose", action="store_true")
        if svg:
            p.add_argument("--svg", type=Path, default=None)
        return p

    p = common(sub.add_parser("sieve-count", help="Q(X) for one or more X"), svg=True)
    p.add_argument("--x", type=_number, nargs="+", required=True)

    for name, help_ in (("evector", "counts and E(X, q, a) per residue"), ("variance", "V(X, q)")):
        p = common(sub.add_parser(name, help=help_), svg=name == "evector")
        p.add_argument("--x", type=_number, required=True)
        p.add_argument("--q", type=_number, required=True)
        p.add_argument("--allow-degenerate", action="store_true")

    p = common(sub.add_parser("correlate", help="C[gamma](X, q) with S[gamma], full sum and V"))
    p.add_argument("--x", type=_number, required=True)
    p.add_argument("--q", type=_number, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--allow-degenerate", action="store_true")
    p.add_argument("--allow-homothety", action="store_true")

    p = common(sub.add_parser("pairs", help="S(l, r) against f(l, r) |I(X, l, r)|"), svg=True)
    p.add_argument("--x", type=_number, required=True)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--l", type=_int_list, default=[1], help="list such as 1:100 or 1,2,4")

    p = common(sub.add_parser("density", help="f(l, r) as rational part times C2"))
    p.add_argument("--l", type=_int_list, required=True)
    p.add_argument("--r", type=int, default=1)

    p = common(sub.add_parser("bigsigma", help="completed pair sum against Lambda X^2/q"))
    p.add_argument("--x", type=_number, required=True)
    p.add_argument("--q", type=_number, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--method", choices=("auto", "factor", "sieve"), default="auto")

    p = common(sub.add_parser("expsum", help="incomplete sum of e(a n^-2 / q) over n <= N"))
    p.add_argument("--n", type=_number, required=True)
    p.add_argument("--q", type=_number, required=True)
    p.add_argument("--a", type=int, required=True)

    p = common(sub.add_parser("asum", help="Bernoulli-difference sums A, B or G"))
    p.add_argument("--kind", choices=("a", "b", "g"), default="a")
    p.add_argument("--y", type=float, required=True, help="Y (for b: D)")
    p.add_argument("--q", type=_number, required=True)
    p.add_argument("--a", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--s", type=int)
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--tolerance", type=float)
    grp.add_argument("--cutoff", type=_number)
    p.add_argument("--m-cutoff", type=int, default=2000, help="outer cutoff for --kind g")

    p = common(sub.add_parser("decay", help="|sum_{n<=N} e(a n^-2/q)|/N at N = q^epsilon"), svg=True)
    p.add_argument("--q", type=_int_list, required=True)
    p.add_argument("--epsilon", type=_float_list, default=[0.25, 0.5, 0.75])
    p.add_argument("--samples", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)

    p = common(sub.add_parser("selftest", help="run the acceptance criteria"))
    p.add_argument("--only", type=_int_list, default=[])
    p.add_argument("--compare-workers", type=_int_list, default=[1, 8],
                   help="worker counts compared for the determinism criterion")
    return parser


def parse_config(argv: list[str]) -> RunConfig:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(command=ns.command, workers=ns.workers, output=ns.out, svg=getattr(ns, "svg", None))
    env = os.environ.get(CACHE_ENV)
    cfg.cache_dir = Path(env) if env else ns.cache_dir
    if ns.command == "sieve-count":
        cfg.x_values = list(ns.x)
    elif ns.command == "decay":
        cfg.q_values, cfg.epsilons, cfg.samples, cfg.seed = ns.q, ns.epsilon, ns.samples, ns.seed
    else:
        cfg.X = getattr(ns, "x", None)
        cfg.q = getattr(ns, "q", None)
    for name in ("r", "s", "a", "method", "kind", "tolerance", "cutoff", "m_cutoff", "allow_degenerate",
                 "allow_homothety", "only", "compare_workers"):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    if hasattr(ns, "l"):
        cfg.l_values = ns.l
    if hasattr(ns, "n"):
        cfg.N = ns.n
    if hasattr(ns, "y"):
        cfg.Y = ns.y
    cfg.validate()
    return cfg


def invocation(argv: list[str]) -> str:
    """``sqlab`` plus argv with the result-neutral flags removed."""
    kept = []
    skip = False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok in NEUTRAL_FLAGS:
            skip = True
            continue
        if any(tok.startswith(f + "=") for f in NEUTRAL_FLAGS):
            continue
        kept.append(tok)
    return shlex.join(["sqlab", *kept])


# ---------------------------------------------------------------------------
# CSV


def fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def render_csv(header: str, rows, argv: list[str]) -> str:
    buf = io.StringIO()
    buf.write(f"# {invocation(argv)} (sqlab {__version__})\n")
    buf.write(header + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands; each returns (header, rows, series-for-svg or None, svg options)


def cmd_sieve_count(cfg: RunConfig):
    rows = []
    for X in cfg.x_values:
        Q = count_squarefree(X, workers=cfg.workers)
        main = 6 / math.pi**2 * X
        rows.append((X, Q, count_squarefree_mobius(X), main, (Q - main) / math.sqrt(X)))
    series = [Series("(Q - 6X/pi^2)/sqrt(X)", [r[0] for r in rows], [r[4] for r in rows])]
    return "X,Q,Q_mobius,main,normalized_dev", rows, series, dict(xlabel="X", ylabel="(Q - 6X/pi^2)/sqrt X", logx=True)


def _error_vector(cfg: RunConfig):
    return error_vector(cfg.X, cfg.q, allow_degenerate=cfg.allow_degenerate, workers=cfg.workers,
                        cache=cfg.segment_cache())


def cmd_evector(cfg: RunConfig):
    ev = _error_vector(cfg)
    rows = [(a, int(ev.counts[a]), float(ev.E[a])) for a in range(ev.q)]
    series = [Series(f"E(X={ev.X}, q={ev.q}, a)", list(range(ev.q)), ev.E.tolist())]
    return "a,count,E", rows, series, dict(xlabel="a", ylabel="E", lines=False)


def cmd_variance(cfg: RunConfig):
    ev = _error_vector(cfg)
    V = variance(ev)
    norm = math.sqrt(ev.X * ev.q)
    return "X,q,variance,sqrt_Xq,ratio", [(ev.X, ev.q, V, norm, V / norm)], None, {}


def cmd_correlate(cfg: RunConfig):
    ev = _error_vector(cfg)
    row = correlation_summary(ev, AffineMap(cfg.r, cfg.s), require_hypothesis=not cfg.allow_homothety)
    return ("X,q,r,s,S_gamma,full_sum,C,variance,ratio",
            [(row.X, row.q, row.r, row.s, row.S_gamma, row.full_sum, row.C, row.variance, row.ratio)], None, {})


def cmd_pairs(cfg: RunConfig):
    rep = verify_pair_density(cfg.X, cfg.r, cfg.l_values, cache=cfg.segment_cache(), workers=cfg.workers)
    rows = [(p.l, p.r, p.S, p.f, p.interval, p.main, p.abs_dev, p.rel_dev) for p in rep.rows]
    series = [Series(f"X={cfg.X}, r={cfg.r}", [p.l for p in rep.rows], [p.rel_dev for p in rep.rows])]
    return "l,r,S,f,interval,main,abs_dev,rel_dev", rows, series, dict(xlabel="l", ylabel="relative deviation")


def cmd_density(cfg: RunConfig):
    rows = []
    for l in cfg.l_values:
        d = f_density(l, cfg.r)
        rows.append((l, cfg.r, str(d.rational_part), d.includes_c2, d.approx))
    return "l,r,rational_part,includes_c2,f", rows, None, {}


def cmd_bigsigma(cfg: RunConfig):
    sig = big_sigma(cfg.X, cfg.q, cfg.r, cfg.s, method=cfg.method, workers=cfg.workers)
    main = sigma_main_term(cfg.X, cfg.q)
    return ("X,q,r,s,sigma,main_term,rel_dev",
            [(cfg.X, cfg.q, cfg.r, cfg.s, sig, main, (sig - main) / main)], None, {})


def cmd_expsum(cfg: RunConfig):
    z = incomplete_invsq_sum(cfg.N, cfg.q, cfg.a, workers=cfg.workers)
    ratio = abs(z) / cfg.N if cfg.N else 0.0
    return "N,q,a,re,im,abs_sum,ratio", [(cfg.N, cfg.q, cfg.a, z.real, z.imag, abs(z), ratio)], None, {}


def cmd_asum(cfg: RunConfig):
    if cfg.kind == "g":
        if cfg.tolerance is not None:
            raise ValidationError("--kind g takes --cutoff and --m-cutoff, not --tolerance")
        budget = g_sum_budget(cfg.Y, cfg.q, cfg.s, cfg.r, cutoff=cfg.cutoff or 10**6, m_cutoff=cfg.m_cutoff)
        value = g_sum(cfg.Y, cfg.q, cfg.s, cfg.r, budget, workers=cfg.workers)
    else:
        make = a_sum_budget if cfg.kind == "a" else b_sum_budget
        if cfg.cutoff is not None:
            budget = make(cfg.Y, cutoff=cfg.cutoff)
        else:
            budget = make(cfg.Y, tolerance=cfg.tolerance or 1e-6)
        if cfg.kind == "a":
            value = a_sum(cfg.Y, cfg.q, cfg.a, budget, workers=cfg.workers)
        else:
            value = b_sum(cfg.Y, cfg.q, cfg.a, cfg.r, budget, workers=cfg.workers)
    a = "" if cfg.a is None else cfg.a
    r = "" if cfg.r is None else cfg.r
    s = "" if cfg.s is None else cfg.s
    return ("kind,Y,q,a,r,s,value,cutoff,m_cutoff,tail_bound",
            [(cfg.kind, float(cfg.Y), cfg.q, a, r, s, value, budget.cutoff, budget.outer_cutoff,
              budget.tail_bound)], None, {})


def cmd_decay(cfg: RunConfig):
    rep = decay_scan(cfg.q_values, cfg.epsilons, cfg.samples, seed=cfg.seed, workers=cfg.workers)
    rows = [(row.q, row.epsilon, row.N, row.a, row.abs_sum, row.ratio) for row in rep.rows]
    series = []
    for q in dict.fromkeys(cfg.q_values):
        pts = [(N, mx) for qq, _, N, mx, _ in rep.summary() if qq == q and mx > 0]
        if pts:
            series.append(Series(f"q={q} max", [p[0] for p in pts], [p[1] for p in pts]))
    return ("q,epsilon,N,a,abs_sum,ratio", rows, series,
            dict(xlabel="N", ylabel="max |sum| / N", logx=True, logy=True))


def cmd_selftest(cfg: RunConfig, argv: list[str]) -> tuple[str, bool]:
    numbers = cfg.only or [*CRITERIA, 12]
    base = [n for n in numbers if n != 12] or list(CRITERIA)
    results = run_criteria(base, workers=cfg.workers)
    for r in results:
        print(r.line(), file=sys.stderr, flush=True)
    if 12 in numbers:
        runs = {cfg.workers: results}
        for w in cfg.compare_workers:
            if w not in runs:
                runs[w] = run_criteria(base, workers=w)
        det = criterion_12(runs)
        print(det.line(), file=sys.stderr, flush=True)
        results = results + [det]
    return results_csv(results, invocation(argv)), all(r.passed for r in results)


HANDLERS = {
    "sieve-count": cmd_sieve_count, "evector": cmd_evector, "variance": cmd_variance,
    "correlate": cmd_correlate, "pairs": cmd_pairs, "density": cmd_density, "bigsigma": cmd_bigsigma,
    "expsum": cmd_expsum, "asum": cmd_asum, "decay": cmd_decay,
}


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = parse_config(argv)
    except SqlabError as exc:
        print(f"sqlab: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if "-v" in argv or "--verbose" in argv else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if cfg.command == "selftest":
            text, ok = cmd_selftest(cfg, argv)
            _write(text, cfg.output)
            return 0 if ok else 1
        header, rows, series, svg_opts = HANDLERS[cfg.command](cfg)
        _write(render_csv(header, rows, argv), cfg.output)
        if cfg.svg is not None:
            emit_svg(series or [], cfg.svg, title=invocation(argv), **svg_opts)
        return 0
    except SqlabError as exc:
        # domain, hypothesis and capacity errors are all validation failures
        print(f"sqlab: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.exception("runtime failure")
        print(f"sqlab: runtime error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
