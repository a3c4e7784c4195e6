"""Command-line front end.

    bubblediamond graph    --b 3 --level 2
    bubblediamond coeffs   --b 2 --jmax 6
    bubblediamond sample   --b 2 --level 6 P:1:2
    bubblediamond legendre --b 1 --n 10

Exit codes: 0 success, 2 invalid arguments, 3 convention-resolution failure,
4 internal consistency failure.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
import tempfile
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from . import __version__
from ._rational import DEFAULT_PRECISION, decimal_str, frac_str, to_mpf
from .calculus import SampledFunction
from .coefficients import ConventionError, monomial_tables, multiharmonic_tables
from .conventions import resolve_conventions
from .orthopoly import (NotPositiveDefiniteError, SymmetryError, green_norm_estimate, green_norm_squared,
                        legendre, normalized_recursion, recursion_families, tables_for)
from .polyspace import ConsistencyError, PolySpec, monomial_to_fbasis, multiharmonic_basis, sample, sample_csv
from .topology import build_graph, to_json_dict, vertex_count

PRECISION_ENV = "BUBBLEDIAMOND_PRECISION"
MAX_VERTICES = 1_000_000
BOUND_SLACK = Fraction(11, 10)


class UsageError(ValueError):
    """Invalid configuration; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    b: int
    level: int = 0
    jmax: int = 4
    n: int = 10
    precision: int = DEFAULT_PRECISION
    format: str = "json"
    out: str = "-"
    exact: bool = False
    force: bool = False
    function: str | None = None
    quadrature: bool = False
    green_level: int = 8

    def validate(self) -> "RunConfig":
        if not 1 <= self.b <= 64:
            raise UsageError(f"--b must be in 1..64, got {self.b}")
        if not 0 <= self.level <= 12:
            raise UsageError(f"--level must be in 0..12, got {self.level}")
        if self.precision < 16:
            raise UsageError(f"--precision must be at least 16, got {self.precision}")
        if self.jmax < 0 or self.n < 1:
            raise UsageError("--jmax must be >= 0 and --n >= 1")
        if self.format not in ("json", "csv"):
            raise UsageError(f"unknown format {self.format!r}")
        if self.command in ("graph", "sample"):
            nv = vertex_count(self.b, self.level)
            if nv > MAX_VERTICES and not self.force:
                raise UsageError(f"G_{self.level} for b={self.b} has {nv} vertices (> {MAX_VERTICES}); "
                                 "pass --force to build it anyway")
        return self

    def meta(self, **extra) -> dict:
        """Header block: every field is present; those a command does not use are null."""
        uses_level = self.command in ("graph", "sample")
        m = {
            "tool": "bubblediamond",
            "version": __version__,
            "command": self.command,
            "b": self.b,
            "level": self.level if uses_level else None,
            "jmax": self.jmax if self.command == "coeffs" else None,
            "n": self.n if self.command == "legendre" else None,
            "function": self.function,
            "precision": self.precision,
            "convention": resolve_conventions(self.b).convention.as_dict(),
        }
        m.update(extra)
        return m


def _write(cfg: RunConfig, text: str) -> None:
    """Write atomically (temp file + rename), or to stdout for '-'."""
    if cfg.out == "-":
        sys.stdout.write(text)
        return
    target = os.path.abspath(cfg.out)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target), prefix=".tmp-", suffix=os.path.basename(target))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _csv_with_meta(meta: dict, body: str) -> str:
    head = "".join(f"# {k}: {json.dumps(v)}\n" for k, v in meta.items())
    return head + body


def _convention_meta(b: int, quadrature: bool) -> dict:
    report = resolve_conventions(b, quadrature_levels="auto" if quadrature else None)
    return report.as_dict()


# -- commands ---------------------------------------------------------------------

def cmd_graph(cfg: RunConfig) -> str:
    g = build_graph(cfg.b, cfg.level)
    meta = cfg.meta(vertices=len(g), edges=sum(g.edges.values()))
    if cfg.format == "csv":
        rows = ["word,x,y,value"]
        for v, (x, y), w in zip(g.vertices, g.coords, g.weights):
            rows.append(f"{v},{float(x)!r},{float(y)!r},{frac_str(w)}")
        return _csv_with_meta(meta, "\n".join(rows) + "\n")
    return _json({"meta": meta, **to_json_dict(g)})


def cmd_coeffs(cfg: RunConfig) -> str:
    if cfg.format != "json":
        raise UsageError("coeffs writes JSON only")
    record = _convention_meta(cfg.b, cfg.quadrature)
    mono = monomial_tables(cfg.b, cfg.jmax)
    body = mono.multi.to_json_dict()
    body.update(mono.to_json_dict())
    return _json({"meta": cfg.meta(convention=record["bundle"], convention_record=record), **body})


_SELECTOR = re.compile(r"^(f|P):(\d+):([12])$|^legendre:(\d+)$")


def parse_selector(text: str) -> tuple[str, int, int]:
    m = _SELECTOR.match(text or "")
    if not m:
        raise UsageError(f"unknown function selector {text!r} (use f:j:k, P:j:k or legendre:n)")
    if m.group(4) is not None:
        return "legendre", int(m.group(4)), 0
    return m.group(1), int(m.group(2)), int(m.group(3))


def selected_function(b: int, selector: str, precision: int):
    """(spec, scale, tables) where the function is scale * spec; scale is None when exact."""
    kind, j, k = parse_selector(selector)
    if kind == "f":
        return multiharmonic_basis(b, j, k), None, multiharmonic_tables(b, j)
    if kind == "P":
        mono = monomial_tables(b, j)
        return monomial_to_fbasis(b, j, k, mono), None, mono.multi
    seq = legendre(b, j + 1)
    with mpmath.workdps(precision):
        scale = 1 / mpmath.sqrt(to_mpf(seq.norm_sq[j]))
    spec = seq.specs[j]
    return spec, scale, multiharmonic_tables(b, max(spec.degree, 0))


def cmd_sample(cfg: RunConfig) -> str:
    spec, scale, tables = selected_function(cfg.b, cfg.function, cfg.precision)
    if scale is not None and cfg.exact:
        raise UsageError("normalized Legendre polynomials are irrational; drop --exact")
    f = sample(spec, cfg.level, tables)
    if scale is not None:
        with mpmath.workdps(cfg.precision + 10):
            f = SampledFunction(f.graph, tuple(scale * to_mpf(v) for v in f.values))
    meta = cfg.meta(exact=cfg.exact)
    if cfg.format == "json":
        rows = []
        for v, (x, y), val in zip(f.graph.vertices, f.graph.coords, f.values):
            sval = frac_str(val) if cfg.exact else decimal_str(val, cfg.precision)
            rows.append({"word": str(v), "x": float(x), "y": float(y), "value": sval})
        return _json({"meta": meta, "rows": rows})
    return _csv_with_meta(meta, sample_csv(f, exact=cfg.exact, digits=cfg.precision))


def legendre_report(b: int, n: int, precision: int = DEFAULT_PRECISION, green_level: int = 8) -> dict:
    """Sequence, recursion data per chain, normalized recursion and bound checks."""
    seq = legendre(b, n)
    fams = recursion_families(seq)
    g2 = green_norm_squared(b, green_level)
    with mpmath.workdps(precision):
        gnorm = green_norm_estimate(b, green_level, precision)
        checks = {}
        for name, fam in fams.items():
            checks[name] = {
                "three_term": fam.is_three_term,
                "t_nonnegative": all(t >= 0 for t in fam.t),
                "s_nonpositive": all(s <= 0 for s in fam.s),
                "t_bound": all(t <= BOUND_SLACK * g2 for t in fam.t),
                "norm_product": all(fam.product_ok),
                "low_index_orthogonality": all(fam.low_index_ok),
            }
        normalized = {}
        for name, fam in fams.items():
            steps = normalized_recursion(seq, fam, precision)
            normalized[name] = [{
                "slot": st.j,
                "sqrt_t_next": mpmath.nstr(st.sqrt_t_next, precision),
                "s": mpmath.nstr(st.s, precision),
                "sqrt_t": mpmath.nstr(st.sqrt_t, precision),
                "residual_exact": frac_str(st.residual_exact),
                "residual_mp": mpmath.nstr(st.residual_mp, 5),
                "three_term": st.three_term,
            } for st in steps]
        three = [name for name, fam in fams.items() if fam.is_three_term]
        verdict = {key: bool(three) and all(checks[name][key] for name in three)
                   for key in ("t_nonnegative", "s_nonpositive", "t_bound", "norm_product",
                               "low_index_orthogonality")}
        body = seq.to_json_dict()
        body.update({
            "bound_summary": {"three_term_families": three, **verdict},
            "green_norm": {"level": green_level, "squared": frac_str(g2), "estimate": mpmath.nstr(gnorm, precision),
                           "slack": frac_str(BOUND_SLACK)},
            "bound_checks": checks,
            "normalized_recursion": normalized,
        })
    return body


def cmd_legendre(cfg: RunConfig) -> str:
    if cfg.format != "json":
        raise UsageError("legendre writes JSON only")
    body = legendre_report(cfg.b, cfg.n, cfg.precision, cfg.green_level)
    return _json({"meta": cfg.meta(green_level=cfg.green_level), **body})


COMMANDS = {"graph": cmd_graph, "coeffs": cmd_coeffs, "sample": cmd_sample, "legendre": cmd_legendre}


def _default_precision() -> int:
    raw = os.environ.get(PRECISION_ENV)
    if raw is None:
        return DEFAULT_PRECISION
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{PRECISION_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--b", type=int, required=True, help="branching parameter (1..64)")
    common.add_argument("--precision", type=int, default=None,
                        help=f"decimal digits for irrational output (default {DEFAULT_PRECISION}, "
                             f"or ${PRECISION_ENV})")
    common.add_argument("--format", choices=("json", "csv"), default=None, help="output format")
    common.add_argument("--out", default="-", help="output path ('-' for stdout)")
    p = argparse.ArgumentParser(prog="bubblediamond", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    g = sub.add_parser("graph", parents=[common], help="graph approximation G_level as JSON")
    g.add_argument("--level", type=int, default=1)
    g.add_argument("--force", action="store_true", help="allow more than 1e6 vertices")
    c = sub.add_parser("coeffs", parents=[common], help="coefficient tables and convention record")
    c.add_argument("--jmax", type=int, default=4)
    c.add_argument("--quadrature", action="store_true", help="also run the finite-element stage of the harness")
    s = sub.add_parser("sample", parents=[common], help="sample f:j:k, P:j:k or legendre:n on V_level")
    s.add_argument("function")
    s.add_argument("--level", type=int, default=6)
    s.add_argument("--exact", action="store_true", help="write values as num/den")
    s.add_argument("--force", action="store_true", help="allow more than 1e6 vertices")
    lg = sub.add_parser("legendre", parents=[common], help="orthogonal sequence and recursion data")
    lg.add_argument("--n", type=int, default=10)
    lg.add_argument("--green-level", type=int, default=8)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    fmt = ns.format or ("csv" if ns.command == "sample" else "json")
    return RunConfig(
        command=ns.command, b=ns.b, level=getattr(ns, "level", 0), jmax=getattr(ns, "jmax", 4),
        n=getattr(ns, "n", 10), precision=ns.precision if ns.precision is not None else _default_precision(),
        format=fmt, out=ns.out, exact=getattr(ns, "exact", False), force=getattr(ns, "force", False),
        function=getattr(ns, "function", None), quadrature=getattr(ns, "quadrature", False),
        green_level=getattr(ns, "green_level", 8),
    ).validate()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(ns)
        if cfg.command == "sample":
            parse_selector(cfg.function)
        if cfg.command == "legendre" and not 2 <= cfg.green_level <= 12:
            raise UsageError("--green-level must be in 2..12")
        text = COMMANDS[cfg.command](cfg)
        _write(cfg, text)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConventionError as exc:
        print(f"convention resolution failed: {exc}", file=sys.stderr)
        return 3
    except (ConsistencyError, SymmetryError, NotPositiveDefiniteError, AssertionError) as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
