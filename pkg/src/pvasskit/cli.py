"""Command-line entry point. Every analysis takes its bounds as explicit flags."""

from __future__ import annotations

import argparse
import hashlib
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .core import (
    ModelError,
    Section,
    format_vector,
    reach_set_bounded,
    section_eval_bounded,
    split_tested_updates,
    validate_model,
)
from .pumping import (
    IncomparableRuns,
    PumpError,
    decompose_transformer,
    factor_count,
    make_pump_pair,
    pump_run,
    sample_decomposition,
)
from .regex import (
    Leaf,
    TranslationError,
    eval_expression_bounded,
    monotone_analysis,
    pvass_to_regex,
    regex_to_pvass,
    validate_expression,
)
from .semilinear import (
    inductive_invariant_check,
    intersect_section_semilinear,
    section_config_pairs,
    separator_check,
    split_pairs,
    word_flat_check,
)
from .textio import (
    ParseError,
    format_model,
    parse_configuration,
    parse_expr_run,
    parse_expression,
    parse_model,
    parse_semilinear,
    parse_vector,
    parse_witness,
    write_expression,
)
from .wqo import enumerate_runs_bounded, format_expr_run, minimal_elements, run_leq

EXIT = {"ok": 0, "fail": 1, "error": 2}


@dataclass
class Report:
    verb: str
    status: str = "ok"
    payload: list[str] = field(default_factory=list)
    inputs: list[tuple[str, str]] = field(default_factory=list)
    params: list[tuple[str, str]] = field(default_factory=list)

    def render(self) -> str:
        head = [f"status: {self.status}", f"verb: {self.verb}"]
        head += [f"input {path} sha256={digest}" for path, digest in self.inputs]
        head += [f"param {k}={v}" for k, v in self.params]
        return "\n".join(head + ["---", *self.payload]) + "\n"


class Inputs:
    """Reads input files once and records their digests for the report."""

    def __init__(self, report: Report):
        self.report = report

    def read(self, path: str) -> str:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise ParseError(f"cannot read input: {exc.strerror}", 0, 0, path) from None
        self.report.inputs.append((path, hashlib.sha256(data).hexdigest()))
        return data.decode()

    def model(self, path: str):
        m = parse_model(self.read(path), path)
        problems = validate_model(m)
        if problems:
            raise ModelError("; ".join(problems))
        return m

    def expression(self, path: str):
        return parse_expression(self.read(path), Path(path).parent, path)

    def semilinear(self, ref: str):
        path, _, name = ref.partition(":")
        sets = parse_semilinear(self.read(path), path)
        if not sets:
            raise ParseError("no semilinear set in file", 0, 0, path)
        if name:
            if name not in sets:
                raise ParseError(f"no set named {name!r}", 0, 0, path)
            return sets[name]
        return next(iter(sets.values()))


def _section(args, inputs: Inputs) -> Section:
    m = inputs.model(args.model)
    return Section(m, args.p, args.q, parse_vector(args.bs or "()"), parse_vector(args.bt or "()"))


def _pairs(rel) -> list[str]:
    return [f"{format_vector(x)} -> {format_vector(y)}" for x, y in sorted(rel)]


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + n for n in missing))


class UsageError(ValueError):
    pass


def _expression_for_runs(args, inputs: Inputs):
    if args.expr:
        return inputs.expression(args.expr)
    _need(args, "model", "p", "q")
    return Leaf(_section(args, inputs))


def cmd_validate(args, rep: Report, inputs: Inputs):
    if args.expr:
        problems = validate_expression(inputs.expression(args.expr))
    else:
        _need(args, "model")
        m = parse_model(inputs.read(args.model), args.model)
        problems = validate_model(m)
    rep.payload = problems or ["valid"]
    rep.status = "fail" if problems else "ok"


def cmd_reach(args, rep: Report, inputs: Inputs):
    _need(args, "model", "from_", "bound")
    m = inputs.model(args.model)
    reached = reach_set_bounded(m, parse_configuration(args.from_), args.bound)
    order = {q: i for i, q in enumerate(m.states)}
    rep.payload = [str(c) for c in sorted(reached, key=lambda c: (order[c.state], c.counters))]


def cmd_section(args, rep: Report, inputs: Inputs):
    _need(args, "model", "p", "q", "bound")
    rep.payload = _pairs(section_eval_bounded(_section(args, inputs), args.bound))


def cmd_translate(args, rep: Report, inputs: Inputs):
    _need(args, "out")
    out = Path(args.out)
    if args.to_regex:
        _need(args, "model", "p", "q")
        s = _section(args, inputs)
        if args.normalize:
            s = Section(split_tested_updates(s.model), s.p, s.q, s.bs, s.bt)
        e = pvass_to_regex(s)
        path = write_expression(e, out)
        report = monotone_analysis(e)
        rep.payload = [f"expression {path}", f"dims {e.in_dim}->{e.out_dim}", f"star_on_monotone {report.star_on_monotone}"]
    else:
        _need(args, "expr")
        s = regex_to_pvass(inputs.expression(args.expr))
        out.mkdir(parents=True, exist_ok=True)
        path = out / "section.pv"
        path.write_text(format_model(s.model))
        rep.payload = [f"model {path}", f"p {s.p}", f"q {s.q}", f"bs {format_vector(s.bs)}", f"bt {format_vector(s.bt)}"]


def cmd_eval(args, rep: Report, inputs: Inputs):
    _need(args, "expr", "bound")
    rep.payload = _pairs(eval_expression_bounded(inputs.expression(args.expr), args.bound))


def cmd_compare_runs(args, rep: Report, inputs: Inputs):
    e = _expression_for_runs(args, inputs)
    if len(args.runs) != 2:
        raise UsageError("compare-runs takes exactly two run files")
    r1, r2 = (parse_expr_run(inputs.read(p), e, p) for p in args.runs)
    le, ge = bool(run_leq(e, r1, r2)), bool(run_leq(e, r2, r1))
    verdict = {(True, True): "equal", (True, False): "first <= second", (False, True): "second <= first"}
    rep.payload = [verdict.get((le, ge), "incomparable")]


def cmd_enumerate(args, rep: Report, inputs: Inputs, minimize: bool = False):
    _need(args, "bound", "steps")
    e = _expression_for_runs(args, inputs)
    runs = enumerate_runs_bounded(e, args.bound, args.steps, args.segments)
    if minimize:
        runs = minimal_elements(runs, e)
    rep.payload = [format_expr_run(r) for r in runs]


def cmd_pump(args, rep: Report, inputs: Inputs):
    _need(args, "n")
    e = _expression_for_runs(args, inputs)
    if len(args.runs) != 2:
        raise UsageError("pump takes a base run file and a bigger run file")
    base, big = (parse_expr_run(inputs.read(p), e, p) for p in args.runs)
    pp = make_pump_pair(e, base, big)
    rep.payload = [f"delta {format_vector(pp.delta[0])} -> {format_vector(pp.delta[1])}"]
    rep.payload += [f"n={k} {format_expr_run(pump_run(e, pp, k))}" for k in range(args.n + 1)]


def cmd_decompose(args, rep: Report, inputs: Inputs):
    _need(args, "bound")
    e = _expression_for_runs(args, inputs)
    if len(args.runs) != 1:
        raise UsageError("decompose takes one run file")
    r = parse_expr_run(inputs.read(args.runs[0]), e, args.runs[0])
    d = decompose_transformer(e, r)
    rep.payload = [f"factors {factor_count(d)}", *_pairs(sample_decomposition(d, args.bound))]


def cmd_intersect(args, rep: Report, inputs: Inputs):
    _need(args, "model", "p", "q", "semilinear", "bound")
    s = _section(args, inputs)
    x = intersect_section_semilinear(s, inputs.semilinear(args.semilinear))
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "intersection.pv").write_text(format_model(x.model))
    rep.payload = [f"dim {x.model.dim} states {len(x.model.states)}"]
    rep.payload += _pairs(split_pairs(section_eval_bounded(x, args.bound), s.in_dim))


def cmd_flat_check(args, rep: Report, inputs: Inputs):
    _need(args, "model", "p", "q", "witness", "bound")
    s = _section(args, inputs)
    fw = parse_witness(inputs.read(args.witness), args.witness)
    verdict = word_flat_check(s.model, fw, section_config_pairs(s, args.bound), args.bound)
    if verdict.included:
        rep.payload = [f"included ({verdict.checked} pairs)"]
    else:
        a, b = verdict.missing
        rep.status = "fail"
        rep.payload = [f"missing {a} -> {b}"]


def cmd_invariant(args, rep: Report, inputs: Inputs):
    _need(args, "model", "semilinear", "bound")
    m = inputs.model(args.model)
    v = inductive_invariant_check(m, inputs.semilinear(args.semilinear), args.bound)
    if v.ok:
        rep.payload = [f"inductive up to bound {args.bound} ({v.checked} configurations)"]
    else:
        c, eid = v.counterexample
        rep.status = "fail"
        rep.payload = [f"counterexample {c} e{eid}"]


def cmd_separator(args, rep: Report, inputs: Inputs):
    _need(args, "model", "semilinear", "from_", "to", "bound")
    m = inputs.model(args.model)
    v = separator_check(m, inputs.semilinear(args.semilinear), parse_configuration(args.from_), parse_configuration(args.to), args.bound)
    rep.status = "ok" if v.ok else "fail"
    rep.payload = [("separates" if v.ok else f"fails {v.failed_clause}") + f": {v.detail}"]


VERBS = {
    "validate": cmd_validate,
    "reach": cmd_reach,
    "section": cmd_section,
    "translate": cmd_translate,
    "eval": cmd_eval,
    "compare-runs": cmd_compare_runs,
    "enumerate": cmd_enumerate,
    "minimize": lambda a, r, i: cmd_enumerate(a, r, i, minimize=True),
    "pump": cmd_pump,
    "decompose": cmd_decompose,
    "intersect": cmd_intersect,
    "flat-check": cmd_flat_check,
    "invariant": cmd_invariant,
    "separator": cmd_separator,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pvasskit", description="Bounded analyses of priority VASS and their expressions.")
    ap.add_argument("verb", choices=sorted(VERBS))
    ap.add_argument("runs", nargs="*", help="run files (compare-runs, pump, decompose)")
    ap.add_argument("--model")
    ap.add_argument("--expr")
    ap.add_argument("--semilinear", help="FILE or FILE:NAME")
    ap.add_argument("--witness")
    ap.add_argument("--bound", type=int)
    ap.add_argument("--steps", type=int)
    ap.add_argument("--segments", type=int, help="segment limit per star run (default: steps + 1)")
    ap.add_argument("--n", type=int)
    ap.add_argument("--from", dest="from_")
    ap.add_argument("--to")
    ap.add_argument("--p")
    ap.add_argument("--q")
    ap.add_argument("--bs")
    ap.add_argument("--bt")
    ap.add_argument("--out")
    direction = ap.add_mutually_exclusive_group()
    direction.add_argument("--to-regex", action="store_true")
    direction.add_argument("--to-pvass", action="store_true")
    ap.add_argument("--normalize", action="store_true", help="split edges that update tested counters first")
    return ap


def run(argv: list[str] | None = None) -> tuple[int, str]:
    args = build_parser().parse_intermixed_args(argv)
    rep = Report(args.verb)
    for name in ("bound", "steps", "segments", "n"):
        value = getattr(args, name)
        if value is not None:
            if value < 0:
                rep.status, rep.payload = "error", [f"--{name} must be a natural number"]
                return EXIT["error"], rep.render()
            rep.params.append((name, str(value)))
    if args.verb == "translate" and not (args.to_regex or args.to_pvass):
        rep.status, rep.payload = "error", ["translate needs --to-regex or --to-pvass"]
        return EXIT["error"], rep.render()
    try:
        VERBS[args.verb](args, rep, Inputs(rep))
    except (ParseError, ModelError, UsageError, TranslationError) as exc:
        rep.status, rep.payload = "error", [str(exc)]
    except (IncomparableRuns, PumpError) as exc:
        rep.status, rep.payload = "fail", [str(exc)]
    except ValueError as exc:
        rep.status, rep.payload = "error", [str(exc)]
    return EXIT[rep.status], rep.render()


def main(argv: list[str] | None = None) -> int:
    code, text = run(argv)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
