"""Text formats for models, configurations, expressions, semilinear sets, flat witnesses and runs."""

from __future__ import annotations

import re
from pathlib import Path

from .core import Configuration, Edge, Pvass, Run, Section, Vector, format_vector
from .regex import Comp, Expression, Leaf, Star, Union, child_tags, preorder
from .semilinear import FlatWitness, LinearSet, SemilinearSet
from .wqo import CompRun, ExprRun, StarRun, UnionRun, leaf_run, validate_expr_run


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0, source: str = "<text>"):
        super().__init__(f"{source}:{line}:{column}: {message}")
        self.line, self.column, self.source = line, column, source


_NAME = r"[^\s(),\[\]=|]+"
_VEC = re.compile(r"\(\s*(-?\d+(?:\s*,\s*-?\d+)*)?\s*\)")


def parse_vector(text: str, *, where: tuple[int, int, str] = (0, 0, "<text>")) -> Vector:
    m = _VEC.fullmatch(text.strip())
    if not m:
        raise ParseError(f"malformed vector {text!r}", *where)
    return tuple(int(v) for v in m.group(1).split(",")) if m.group(1) else ()


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if line.strip():
            yield no, line


def parse_model(text: str, source: str = "<model>") -> Pvass:
    dim = None
    states: list[str] = []
    edges: list[Edge] = []
    for no, line in _lines(text):
        col = len(line) - len(line.lstrip()) + 1
        words = line.split()
        head = words[0]
        if head == "pvass":
            m = re.fullmatch(r"pvass\s+dim=(\d+)", line.strip())
            if not m:
                raise ParseError("expected 'pvass dim=<d>'", no, col, source)
            dim = int(m.group(1))
        elif head == "state":
            if len(words) != 2 or not re.fullmatch(_NAME, words[1]):
                raise ParseError("expected 'state <name>'", no, col, source)
            if words[1] in states:
                raise ParseError(f"duplicate state {words[1]!r}", no, col, source)
            states.append(words[1])
        elif head == "edge":
            if dim is None:
                raise ParseError("edge before the 'pvass dim=' header", no, col, source)
            m = re.fullmatch(rf"\s*edge\s+({_NAME})\s+({_NAME})\s+vec=(\([^)]*\))\s+zerotest=(\d+)\s*", line)
            if not m:
                raise ParseError("expected 'edge <from> <to> vec=(...) zerotest=<g>'", no, col, source)
            src, dst, vec_text, g = m.groups()
            vcol = line.index("vec=") + 5
            update = parse_vector(vec_text, where=(no, vcol, source))
            if len(update) != dim:
                raise ParseError(f"vec has {len(update)} entries, expected {dim}", no, vcol, source)
            for name in (src, dst):
                if name not in states:
                    raise ParseError(f"unknown state {name!r}", no, line.index(name) + 1, source)
            if int(g) > dim:
                raise ParseError(f"zerotest {g} exceeds dim {dim}", no, line.index("zerotest=") + 1, source)
            edges.append(Edge(src, dst, update, int(g), len(edges)))
        else:
            raise ParseError(f"unknown directive {head!r}", no, col, source)
    if dim is None:
        raise ParseError("missing 'pvass dim=<d>' header", 1, 1, source)
    if dim < 1:
        raise ParseError("dim must be positive", 1, 1, source)
    return Pvass(dim, tuple(states), tuple(edges))


def format_model(m: Pvass) -> str:
    out = [f"pvass dim={m.dim}"]
    out += [f"state {q}" for q in m.states]
    out += [f"edge {e.src} {e.dst} vec={format_vector(e.update)} zerotest={e.zerotest}" for e in m.edges]
    return "\n".join(out) + "\n"


def parse_configuration(text: str) -> Configuration:
    m = re.fullmatch(rf"\s*({_NAME})\s*(\(.*\))\s*", text)
    if not m:
        raise ParseError(f"expected '<state> (<n1>,...)', got {text!r}")
    counters = parse_vector(m.group(2))
    if any(v < 0 for v in counters):
        raise ParseError("configuration counters must be natural numbers")
    return Configuration(m.group(1), counters)


# -- expressions ---------------------------------------------------------------


_SEXPR_TOKEN = re.compile(r"\s*(?:(\()\s*(leaf|comp|union|star)\b|(\))|(\w+=\([^)]*\)|\w+=[^\s()]+))")


def parse_expression(text: str, base_dir: Path | str = ".", source: str = "<expr>") -> Expression:
    """Parse the s-expression format; leaf model paths are resolved against ``base_dir``."""
    base = Path(base_dir)
    models: dict[Path, Pvass] = {}
    pos = 0
    text = "\n".join(line.split("#", 1)[0] for line in text.splitlines())

    def where(p: int) -> tuple[int, int, str]:
        line = text.count("\n", 0, p) + 1
        return line, p - (text.rfind("\n", 0, p) + 1) + 1, source

    def token():
        nonlocal pos
        m = _SEXPR_TOKEN.match(text, pos)
        if not m:
            rest = text[pos:].strip()
            if not rest:
                raise ParseError("unexpected end of expression", *where(pos))
            raise ParseError(f"unexpected text {rest[:20]!r}", *where(pos + len(text[pos:]) - len(text[pos:].lstrip())))
        pos = m.end()
        return m

    def node() -> Expression:
        start = pos
        m = token()
        if not m.group(1):
            raise ParseError("expected '(leaf', '(comp', '(union' or '(star'", *where(start))
        head = m.group(2)
        if head == "leaf":
            fields = {}
            while True:
                at = pos
                t = token()
                if t.group(3):
                    break
                if not t.group(4):
                    raise ParseError("expected key=value inside leaf", *where(at))
                k, v = t.group(4).split("=", 1)
                fields[k] = (v, where(at))
            missing = {"model", "p", "q"} - fields.keys()
            if missing:
                raise ParseError(f"leaf lacks {sorted(missing)}", *where(start))
            path = (base / fields["model"][0]).resolve()
            if path not in models:
                try:
                    models[path] = parse_model(path.read_text(), str(path))
                except OSError as exc:
                    raise ParseError(f"cannot read model {fields['model'][0]!r}: {exc.strerror}", *fields["model"][1]) from None
            bs = parse_vector(fields["bs"][0], where=fields["bs"][1]) if "bs" in fields else ()
            bt = parse_vector(fields["bt"][0], where=fields["bt"][1]) if "bt" in fields else ()
            return Leaf(Section(models[path], fields["p"][0], fields["q"][0], bs, bt))
        arity = 1 if head == "star" else 2
        kids = [node() for _ in range(arity)]
        at = pos
        if not token().group(3):
            raise ParseError(f"expected ')' closing {head}", *where(at))
        if head == "star":
            return Star(kids[0])
        return (Comp if head == "comp" else Union)(*kids)

    e = node()
    if text[pos:].strip():
        raise ParseError("trailing text after expression", *where(pos))
    return e


def format_expression(e: Expression, model_names: dict[int, str]) -> str:
    """Render ``e``; ``model_names`` maps ``id(model)`` to the path written into leaves."""
    if isinstance(e, Leaf):
        s = e.section
        return (
            f"(leaf model={model_names[id(s.model)]} p={s.p} q={s.q} "
            f"bs={format_vector(s.bs)} bt={format_vector(s.bt)})"
        )
    if isinstance(e, Star):
        return f"(star {format_expression(e.inner, model_names)})"
    head = "comp" if isinstance(e, Comp) else "union"
    return f"({head} {format_expression(e.left, model_names)} {format_expression(e.right, model_names)})"


def write_expression(e: Expression, out_dir: Path | str, stem: str = "expr") -> Path:
    """Write ``e`` and one model file per distinct leaf model into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names: dict[int, str] = {}
    for _, n in preorder(e):
        if isinstance(n, Leaf) and id(n.section.model) not in names:
            name = f"{stem}_leaf{len(names)}.pv"
            names[id(n.section.model)] = name
            (out / name).write_text(format_model(n.section.model))
    path = out / f"{stem}.rx"
    path.write_text(format_expression(e, names) + "\n")
    return path


# -- semilinear sets and witnesses --------------------------------------------


def parse_semilinear(text: str, source: str = "<semilinear>") -> dict[str, SemilinearSet]:
    sets: dict[str, tuple[int | None, list[LinearSet]]] = {}
    current = None
    for no, line in _lines(text):
        col = len(line) - len(line.lstrip()) + 1
        words = line.split()
        if words[0] == "semilinear":
            m = re.fullmatch(rf"\s*semilinear\s+({_NAME})(?:\s+dim=(\d+))?\s*", line)
            if not m:
                raise ParseError("expected 'semilinear <name> [dim=<n>]'", no, col, source)
            current = m.group(1)
            sets[current] = (int(m.group(2)) if m.group(2) else None, [])
        elif words[0] == "lin":
            if current is None:
                raise ParseError("'lin' before any 'semilinear' header", no, col, source)
            m = re.fullmatch(r"\s*lin\s+base=(\([^)]*\))(?:\s+periods=\[(.*)\])?\s*", line)
            if not m:
                raise ParseError("expected 'lin base=(..) periods=[(..),...]'", no, col, source)
            base = parse_vector(m.group(1), where=(no, col, source))
            periods = tuple(parse_vector(p, where=(no, col, source)) for p in re.findall(r"\([^)]*\)", m.group(2) or ""))
            try:
                sets[current][1].append(LinearSet(base, periods))
            except ValueError as exc:
                raise ParseError(str(exc), no, col, source) from None
        else:
            raise ParseError(f"unknown directive {words[0]!r}", no, col, source)
    out = {}
    for name, (dim, comps) in sets.items():
        d = dim if dim is not None else (comps[0].dim if comps else 0)
        try:
            out[name] = SemilinearSet(d, tuple(comps))
        except ValueError as exc:
            raise ParseError(f"set {name!r}: {exc}", 0, 0, source) from None
    return out


def format_semilinear(name: str, s: SemilinearSet) -> str:
    out = [f"semilinear {name} dim={s.dim}"]
    for c in s.components:
        periods = ",".join(format_vector(p) for p in c.periods)
        out.append(f"lin base={format_vector(c.base)} periods=[{periods}]")
    return "\n".join(out) + "\n"


def parse_witness(text: str, source: str = "<witness>") -> FlatWitness:
    words = []
    for no, line in _lines(text):
        m = re.fullmatch(r"\s*word\s+(\d+(?:\s*,\s*\d+)*)\s*", line)
        if not m:
            raise ParseError("expected 'word <edge-id>,<edge-id>,...'", no, 1, source)
        words.append(tuple(int(v) for v in m.group(1).split(",")))
    return FlatWitness(tuple(words))


def format_witness(fw: FlatWitness) -> str:
    return "".join("word " + ",".join(str(e) for e in w) + "\n" for w in fw.words)


# -- expression runs -----------------------------------------------------------


_RUN_TOKEN = re.compile(
    rf"\s*(?:"
    rf"\[E(?P<open>\d+)\|(?P<branch>[LR](?=\s))?"
    rf"|\|E(?P<close>\d+)\]"
    rf"|\((?P<state>{_NAME}),\((?P<cfg>[-\d,\s]*)\)\)"
    rf"|\((?P<vec>[-\d,\s]*)\)"
    rf"|e(?P<edge>\d+)"
    rf")"
)


def parse_expr_run(text: str, e: Expression, source: str = "<run>") -> ExprRun:
    """Parse a bracketed run of ``e`` and check that it is a valid run of it."""
    toks = []
    pos = 0
    while text[pos:].strip():
        m = _RUN_TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected text {text[pos:].strip()[:20]!r}", 1, pos + 1, source)
        toks.append(m)
        pos = m.end()
    i = 0

    def fail(msg: str):
        at = toks[i].start() + 1 if i < len(toks) else len(text)
        raise ParseError(msg, 1, at, source)

    def vec(s: str) -> Vector:
        return tuple(int(v) for v in s.split(",")) if s.strip() else ()

    def take(kind: str):
        nonlocal i
        if i >= len(toks) or toks[i].group(kind) is None:
            fail(f"expected {kind}")
        i += 1
        return toks[i - 1]

    def node(n: Expression, tag: int) -> ExprRun:
        nonlocal i
        t = take("open")
        if int(t.group("open")) != tag:
            fail(f"expected tag E{tag}, found E{t.group('open')}")
        if isinstance(n, Leaf):
            if t.group("branch"):
                fail("branch marker on a leaf run")
            first = take("state")
            configs = [Configuration(first.group("state"), vec(first.group("cfg")))]
            edges = []
            while i < len(toks) and toks[i].group("edge") is not None:
                edges.append(int(take("edge").group("edge")))
                c = take("state")
                configs.append(Configuration(c.group("state"), vec(c.group("cfg"))))
            out: ExprRun = leaf_run(n.section, tag, Run(tuple(configs), tuple(edges)))
        elif isinstance(n, Union):
            if not t.group("branch"):
                fail("union runs need a branch marker L or R")
            b = "LR".index(t.group("branch"))
            out = UnionRun(tag, b, node((n.left, n.right)[b], child_tags(n, tag)[b]))
        elif isinstance(n, Comp):
            subs = child_tags(n, tag)
            out = CompRun(tag, node(n.left, subs[0]), node(n.right, subs[1]))
        else:
            src = vec(take("vec").group("vec"))
            segs = []
            while i < len(toks) and toks[i].group("open") is not None:
                segs.append(node(n.inner, child_tags(n, tag)[0]))
            out = StarRun(tag, src, tuple(segs), vec(take("vec").group("vec")))
        c = take("close")
        if int(c.group("close")) != tag:
            fail(f"closing tag E{c.group('close')} does not match E{tag}")
        return out

    r = node(e, 0)
    if i != len(toks):
        fail("trailing tokens after run")
    problems = validate_expr_run(e, r)
    if problems:
        raise ParseError("not a run of the expression: " + "; ".join(problems), 1, 1, source)
    return r
