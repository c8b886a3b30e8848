"""Line-oriented action files.

::

    action <name>
    gen <name> affine <slope> <intercept>
    gen <name> pl ltail <s> pts <x1> <y1> ; <x2> <y2> ; ... rtail <s>
    inv <name> <name>
    rel <token> <token> ...

Numbers are integers or ``p/q``.  Blank lines and ``#`` comments are accepted
on input.  Canonical output sorts generators and inverse pairs by name, keeps
relators in input order, and writes every rational in lowest terms.
"""

from __future__ import annotations

import re
from pathlib import Path

from aplab.errors import ParseError, ValidationError
from aplab.group_action import NAME_RE, GroupAction, check_relators, invert_map, resolve
from aplab.pl_homeo import PLHomeo
from aplab.rational import format_rational, parse_rational

_TOKEN = re.compile(r"\S+")


def _tokens(line):
    return [(m.group(), m.start() + 1) for m in _TOKEN.finditer(line)]


def _rational(tok, lineno):
    text, col = tok
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"expected a rational, got {text!r}", lineno, col) from None


def _name(tok, lineno):
    text, col = tok
    if not NAME_RE.match(text):
        raise ParseError(f"invalid name {text!r}", lineno, col)
    return text


def _expect(toks, i, word, lineno, line):
    if i >= len(toks):
        raise ParseError(f"expected {word!r}, got end of line", lineno, len(line) + 1)
    if toks[i][0] != word:
        raise ParseError(f"expected {word!r}, got {toks[i][0]!r}", lineno, toks[i][1])


def _parse_gen(toks, lineno, line):
    if len(toks) < 3:
        raise ParseError("gen needs a name and a kind", lineno, len(line) + 1)
    name = _name(toks[1], lineno)
    kind, col = toks[2]
    try:
        if kind == "affine":
            if len(toks) != 5:
                raise ParseError("affine takes exactly <slope> <intercept>", lineno, col)
            return name, PLHomeo.affine(_rational(toks[3], lineno), _rational(toks[4], lineno))
        if kind == "pl":
            _expect(toks, 3, "ltail", lineno, line)
            if len(toks) < 5:
                raise ParseError("missing left tail slope", lineno, len(line) + 1)
            ltail = _rational(toks[4], lineno)
            _expect(toks, 5, "pts", lineno, line)
            if toks[-2][0] != "rtail":
                raise ParseError("pl generator must end with 'rtail <slope>'", lineno, toks[-1][1])
            rtail = _rational(toks[-1], lineno)
            body = toks[6:-2]
            pts = []
            group = []
            for tok in body + [(";", len(line) + 1)]:
                if tok[0] == ";":
                    if len(group) != 2:
                        where = group[0][1] if group else tok[1]
                        raise ParseError("each breakpoint is '<x> <y>'", lineno, where)
                    pts.append((_rational(group[0], lineno), _rational(group[1], lineno)))
                    group = []
                else:
                    group.append(tok)
            return name, PLHomeo(pts, ltail, rtail)
    except ValidationError as exc:
        raise ValidationError(f"line {lineno}: generator {name}: {exc}") from None
    raise ParseError(f"unknown generator kind {kind!r}", lineno, col)


def parse_action(text: str, *, verify: bool = True) -> GroupAction:
    """Parse an action file; with ``verify`` the inverse pairs and relators are checked exactly."""
    name = None
    gens: dict = {}
    inv: dict = {}
    rels = []
    inv_lines = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        toks = _tokens(line)
        if not toks:
            continue
        head, col = toks[0]
        if head == "action":
            if name is not None:
                raise ParseError("duplicate 'action' header", lineno, col)
            if len(toks) != 2:
                raise ParseError("'action' takes exactly one name", lineno, col)
            name = _name(toks[1], lineno)
            continue
        if name is None:
            raise ParseError("file must start with 'action <name>'", lineno, col)
        if head == "gen":
            gname, g = _parse_gen(toks, lineno, line)
            if gname in gens:
                raise ParseError(f"duplicate generator {gname!r}", lineno, toks[1][1])
            gens[gname] = g
        elif head == "inv":
            if len(toks) != 3:
                raise ParseError("'inv' takes exactly two names", lineno, col)
            a, b = _name(toks[1], lineno), _name(toks[2], lineno)
            for n, partner in ((a, b), (b, a)):
                if n in inv and inv[n] != partner:
                    raise ValidationError(f"line {lineno}: generator {n} paired twice")
            inv[a], inv[b] = b, a
            inv_lines[(a, b)] = lineno
        elif head == "rel":
            if len(toks) < 2:
                raise ParseError("'rel' needs at least one letter", lineno, col)
            rels.append((tuple(t for t, _ in toks[1:]), lineno))
        else:
            raise ParseError(f"unknown keyword {head!r}", lineno, col)
    if name is None:
        raise ParseError("missing 'action <name>' header", 1)
    for (a, b), lineno in inv_lines.items():
        for n in (a, b):
            if n not in gens:
                raise ValidationError(f"line {lineno}: inv names unknown generator {n!r}")
        if verify and invert_map(gens[a]) != gens[b]:
            raise ValidationError(f"line {lineno}: bad symmetric pairing, {b} is not the inverse of {a}")
    A = GroupAction(name, gens, inv, tuple(r for r, _ in rels))
    if verify:
        for r, lineno in rels:
            for t in r:
                try:
                    resolve(A, t)
                except KeyError:
                    raise ValidationError(f"line {lineno}: relator uses unknown generator {t!r}") from None
        bad = check_relators(A)
        if bad:
            raise ValidationError(f"relator {' '.join(bad[0])} does not act as the identity")
    return A


def _format_gen(name, g: PLHomeo) -> str:
    if g.is_affine:
        m, b = g.affine_coefficients()
        return f"gen {name} affine {format_rational(m)} {format_rational(b)}"
    pts = " ; ".join(f"{format_rational(x)} {format_rational(y)}" for x, y in g.breakpoints)
    return f"gen {name} pl ltail {format_rational(g.left_slope)} pts {pts} rtail {format_rational(g.right_slope)}"


def serialize_action(A: GroupAction) -> str:
    if not A.is_pl:
        raise TypeError("only PL actions can be serialized; snapshot expressions first")
    lines = [f"action {A.name}"]
    for n in sorted(A.generators):
        lines.append(_format_gen(n, A.generators[n]))
    pairs = sorted({tuple(sorted((a, b))) for a, b in A.inverses.items()})
    lines.extend(f"inv {a} {b}" for a, b in pairs)
    lines.extend("rel " + " ".join(r) for r in A.relators)
    return "\n".join(lines) + "\n"


def read_action(path, **kw) -> GroupAction:
    return parse_action(Path(path).read_text(encoding="utf-8"), **kw)


def write_action(A: GroupAction, path) -> None:
    Path(path).write_text(serialize_action(A), encoding="utf-8")
