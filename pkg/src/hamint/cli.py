"""Command-line front end: ``hamint derive|check|symmetry|transform|catalog``.

Exit codes: 0 success / all conditions pass, 1 a condition or expectation
failed, 2 usage, parse or precondition error.
"""

from __future__ import annotations

import argparse
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import catalog
from .calculus import Flow, euler, total_x
from .expr import Expression, ExpressionError
from .hamiltonian import (
    PointTransformation,
    TransformError,
    flow_of,
    transform_dilate,
    transform_galilean,
    transform_point,
    transform_shift,
)
from .integrability import check_conditions, check_conditions_parametric, is_symmetry
from .parsing import ParseError, parse, parse_document, to_text

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_SEED = 20240501


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: list[str] = field(default_factory=list)
    max_n: int = 1
    bindings: dict[str, str] = field(default_factory=dict)
    fmt: str = "text"
    seed: int = DEFAULT_SEED
    threads: int = 1
    time_budget: float | None = None

    def __post_init__(self):
        if not -1 <= self.max_n <= 11:
            raise UsageError("--max-n must lie in [-1, 11]")
        if self.threads < 1:
            raise UsageError("--threads must be positive")


# ---------------------------------------------------------------------------
# input files


def _position(text: str, pos: int) -> str:
    # parse_document joins lines with single spaces, so offsets map back line by line
    for lineno, line in enumerate(text.splitlines(), 1):
        if pos <= len(line):
            return f"line {lineno}, column {pos + 1}"
        pos -= len(line) + 1
    return "end of input"


@dataclass
class Loaded:
    path: str
    kind: str
    expr: Expression
    params: tuple[str, ...]

    @property
    def flow(self) -> Flow:
        if self.kind == "ham":
            return Flow(flow_of(self.expr).rhs, Path(self.path).stem)
        if self.kind == "dens":
            return Flow(total_x(euler(self.expr)), Path(self.path).stem)
        return Flow(self.expr, Path(self.path).stem)


def load(path: str, bindings: dict[str, str] | None = None) -> Loaded:
    p = Path(path)
    kind = p.suffix.lstrip(".")
    if kind not in ("ham", "flow", "dens"):
        raise UsageError(f"{path}: expected a .ham, .flow or .dens file")
    try:
        text = p.read_text()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None
    try:
        expr, params = parse_document(text)
    except ParseError as exc:
        msg = str(exc).rsplit(" at position", 1)[0]
        raise UsageError(f"{path}: parse error at {_position(text, exc.pos)}: {msg}") from None
    if bindings:
        unknown = set(bindings) - set(params)
        if unknown:
            raise UsageError(f"{path}: no parameter(s) {', '.join(sorted(unknown))}")
        expr = catalog.bind_params(expr, {k: parse(v) for k, v in bindings.items()})
    return Loaded(path, kind, expr, params)


def _bindings(items) -> dict[str, str]:
    out = {}
    for item in (i for group in items or () for i in group):
        name, sep, value = item.partition("=")
        if not sep or not name or not value:
            raise UsageError(f"bad parameter binding {item!r}, expected name=value")
        try:
            parse(value)
        except ParseError as exc:
            raise UsageError(f"bad value for {name}: {exc}") from None
        out[name.strip()] = value.strip()
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_derive(cfg: RunConfig, out) -> int:
    src = load(cfg.inputs[0], cfg.bindings)
    if src.kind != "ham":
        raise UsageError("derive expects a .ham file")
    E = euler(src.expr)
    if E.is_zero():
        raise UsageError("Hamiltonian is trivial: its variational derivative vanishes")
    F = total_x(E)
    if cfg.fmt == "machine":
        out.write(f"euler={to_text(E)}\nflow={to_text(F)}\n")
    else:
        out.write(f"u_t = D1({to_text(E)})\n    = {to_text(F)}\n")
    return EXIT_OK


def cmd_check(cfg: RunConfig, out, collect: bool = False) -> int:
    src = load(cfg.inputs[0], cfg.bindings)
    name = Path(src.path).stem
    if collect:
        report = check_conditions_parametric(src.flow, cfg.max_n, time_budget=cfg.time_budget,
                                             flow_id=name)
    else:
        report = check_conditions(src.flow, cfg.max_n, time_budget=cfg.time_budget, flow_id=name)
    out.write(report.to_machine() if cfg.fmt == "machine" else report.to_text())
    return EXIT_OK if report.all_pass else EXIT_FAIL


def cmd_symmetry(cfg: RunConfig, out) -> int:
    F, G = (load(p, cfg.bindings if i == 0 else None).flow for i, p in enumerate(cfg.inputs[:2]))
    ok, c = is_symmetry(F, G)
    if cfg.fmt == "machine":
        out.write(f"commute={'yes' if ok else 'no'}\n")
    else:
        out.write(f"commute: {'yes' if ok else 'no'}\n")
        if not ok:
            out.write(f"commutator: {to_text(c)}\n")
    return EXIT_OK if ok else EXIT_FAIL


_KV = re.compile(r"\s+(?=[A-Za-z_][A-Za-z_0-9]*\s*=)")


def parse_transform(spec: str) -> tuple[str, dict[str, str], list[str]]:
    """``"galilean c=2"`` -> ("galilean", {"c": "2"}, [])."""
    head, _, rest = spec.strip().partition(" ")
    words, kv = [], {}
    for tok in filter(None, _KV.split(rest.strip())):
        name, sep, value = tok.partition("=")
        if sep:
            kv[name.strip()] = value.strip()
        else:
            words.extend(tok.split())
    return head, kv, words


def _expr_arg(kv: dict[str, str], name: str) -> Expression:
    if name not in kv:
        raise UsageError(f"transform needs {name}=...")
    try:
        return parse(kv[name])
    except ParseError as exc:
        raise UsageError(f"bad value for {name}: {exc}") from None


def cmd_transform(cfg: RunConfig, out) -> int:
    src = load(cfg.inputs[0], cfg.bindings)
    if src.kind != "ham":
        raise UsageError("transform expects a .ham file")
    kind, kv, words = parse_transform(cfg.inputs[1])
    H = src.expr
    if kind == "galilean":
        res = transform_galilean(H, _expr_arg(kv, "c"))
    elif kind == "dilate":
        res = transform_dilate(H, *(_expr_arg(kv, k) for k in ("a", "b", "g")))
    elif kind == "shift":
        shape = words[0] if words else "linear-in-x"
        keys = ("c",) if shape == "linear-in-x" else ("c1", "c2")
        res = transform_shift(H, shape, [_expr_arg(kv, k) for k in keys])
    elif kind == "point":
        T = PointTransformation(_expr_arg(kv, "phi"), _expr_arg(kv, "psi"))
        res = transform_point(H, T)
    else:
        raise UsageError(f"unknown transformation {kind!r} (galilean, dilate, shift, point)")
    if cfg.fmt == "machine":
        out.write(f"H={to_text(res.H)}\n")
        if res.conformal is not None:
            out.write(f"conformal={to_text(res.conformal)}\n")
    else:
        out.write(f"H = {to_text(res.H)}\n")
        if res.conformal is not None:
            out.write(f"conformal factor f = {to_text(res.conformal)}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# catalog


def _entry_depth(entry: catalog.CatalogEntry, max_n: int | None) -> int:
    if max_n is not None:
        return max_n
    if entry.status == "non-integrable":
        return entry.fail_by if entry.fail_by is not None else 11
    return entry.check_n if entry.check_n is not None else 1


def _catalog_one(eid: str, bindings: dict, max_n: int | None, budget: float | None,
                 fmt: str, seed: int) -> tuple[str, bool]:
    """Check one catalog entry; returns (rendered text, matches expectation)."""
    spec = catalog.describe(eid)
    lines: list[str] = []
    ok = True
    if spec.status == "flow":
        return f"{eid}: partner flow, nothing to check\n" if fmt == "text" else "", True
    unbound = [s for s, d in spec.slots.items() if d is None and s not in bindings]
    if unbound and spec.family is None and not catalog.admissible_bindings(eid):
        return _catalog_parametric(eid, unbound, bindings, max_n, budget, fmt)
    if not unbound:
        draws = [dict(bindings)]
    elif catalog.admissible_bindings(eid):
        draws = [dict(b, **bindings) for b in catalog.admissible_bindings(eid)]
    else:
        draws = [dict(b, **bindings) for b in catalog.random_bindings(eid, seed)]
    for b in draws:
        entry = catalog.get(eid, b)
        depth = _entry_depth(entry, max_n)
        report = check_conditions(entry.flow, depth, time_budget=budget, flow_id=eid)
        label = ", ".join(f"{k}={v}" for k, v in b.items()) or "defaults"
        note = catalog.expected_outcome(entry, report.first_failure,
                                        max((r.n for r in report.records if r.verdict != "not-checked"),
                                            default=-2))
        if note:
            ok = False
        if fmt == "machine":
            lines.append(report.to_machine())
        else:
            ff = report.first_failure
            verdict = "pass" if report.all_pass else (f"fail at n={ff}" if ff is not None else "incomplete")
            lines.append(f"{eid} [{label}]: {verdict} (n=-1..{depth}, expected {entry.status})\n")
            if note:
                lines.append(f"  QUARANTINE {note}\n")
        for pid in entry.partners:
            partner = catalog.get(pid, catalog.partner_bindings(pid, entry.bindings))
            commute = is_symmetry(entry.flow, partner.flow)[0]
            ok = ok and commute
            if fmt == "machine":
                lines.append(f"flow={eid} partner={pid} commute={'yes' if commute else 'no'}\n")
            else:
                lines.append(f"  symmetry with {pid}: {'yes' if commute else 'no'}\n")
                if not commute:
                    lines.append("  QUARANTINE discrepancy: listed symmetry does not hold\n")
    return "".join(lines), ok


def _catalog_parametric(eid, unbound, bindings, max_n, budget, fmt) -> tuple[str, bool]:
    """Free slots of a file family: collect the constraints the conditions impose."""
    entry = catalog.get(eid, bindings, keep=tuple(unbound))
    depth = _entry_depth(entry, max_n)
    report = check_conditions_parametric(entry.flow, depth, time_budget=budget, flow_id=eid)
    if fmt == "machine":
        return report.to_machine(), True
    head = f"{eid} [symbolic {', '.join(unbound)}]: n=-1..{depth}, expected {entry.status}\n"
    body = "".join("  " + line + "\n" for line in report.to_text().splitlines()[1:])
    return head + body, True


def cmd_catalog(cfg: RunConfig, out, action: str, ids: list[str], all_: bool, max_n: int | None) -> int:
    if action == "list":
        for eid, status, about in catalog.list_entries():
            if cfg.fmt == "machine":
                out.write(f"id={eid} status={status}\n")
            else:
                out.write(f"{eid:22} {status:15} {about}\n")
        return EXIT_OK
    if all_:
        ids = catalog.ids()
    if not ids:
        raise UsageError("catalog check needs an id or --all")
    for eid in ids:
        try:
            catalog.describe(eid)
        except catalog.CatalogError as exc:
            raise UsageError(str(exc)) from None
    if cfg.bindings and len(ids) > 1:
        raise UsageError("--params applies to a single catalog id")
    jobs = [(eid, cfg.bindings, max_n, cfg.time_budget, cfg.fmt, cfg.seed) for eid in ids]
    if cfg.threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.threads, len(jobs))) as pool:
            results = list(pool.map(_catalog_one, *zip(*jobs)))
    else:
        results = [_catalog_one(*job) for job in jobs]
    all_ok = True
    for text, ok in results:
        out.write(text)
        all_ok = all_ok and ok
    if cfg.fmt == "text" and len(ids) > 1:
        bad = [eid for eid, (_, ok) in zip(ids, results) if not ok]
        out.write("summary: " + ("all entries as expected" if not bad else "quarantined: " + ", ".join(bad)) + "\n")
    return EXIT_OK if all_ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--params", action="append", nargs="+", metavar="NAME=VALUE",
                        help="bind parameters declared in the input")
    common.add_argument("--format", choices=("text", "machine"), default="text")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--time-budget", type=float, default=None, metavar="SECONDS")

    p = _Parser(prog="hamint", description="Integrability checks for fifth-order Hamiltonian equations.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("derive", parents=[common], help="print u_t = D_x(δH/δu) for a .ham file")
    d.add_argument("file")

    c = sub.add_parser("check", parents=[common], help="run integrability conditions")
    c.add_argument("file")
    c.add_argument("--max-n", type=int, default=1)
    c.add_argument("--collect", action="store_true",
                   help="keep going past failures and collect parameter constraints")

    s = sub.add_parser("symmetry", parents=[common], help="test whether two flows commute")
    s.add_argument("first")
    s.add_argument("second")

    t = sub.add_parser("transform", parents=[common], help="apply a canonical transformation")
    t.add_argument("file")
    t.add_argument("spec", help='e.g. "galilean c=2", "dilate a=1 b=2 g=1", '
                                '"shift linear-in-x c=1", "point phi=x psi=u+x"')

    k = sub.add_parser("catalog", parents=[common], help="list or check catalog entries")
    k.add_argument("action", choices=("list", "check"))
    k.add_argument("ids", nargs="*")
    k.add_argument("--all", action="store_true")
    k.add_argument("--max-n", type=int, default=None)
    return p


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        max_n = getattr(args, "max_n", None)
        cfg = RunConfig(args.command, max_n=max_n if max_n is not None else 1,
                        bindings=_bindings(args.params), fmt=args.format, seed=args.seed,
                        threads=args.threads, time_budget=args.time_budget)
        if args.command == "derive":
            cfg.inputs = [args.file]
            return cmd_derive(cfg, out)
        if args.command == "check":
            cfg.inputs = [args.file]
            return cmd_check(cfg, out, collect=args.collect)
        if args.command == "symmetry":
            cfg.inputs = [args.first, args.second]
            return cmd_symmetry(cfg, out)
        if args.command == "transform":
            cfg.inputs = [args.file, args.spec]
            return cmd_transform(cfg, out)
        return cmd_catalog(cfg, out, args.action, args.ids, args.all, max_n)
    except UsageError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except TransformError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (catalog.CatalogError, ExpressionError, ValueError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
