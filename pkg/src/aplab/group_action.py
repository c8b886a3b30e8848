"""Finitely generated group actions on the line: words, balls, generating-set surgery.

Words act on the left: the word ``g1 g2 ... gn`` is the map ``g1 o g2 o ... o gn``,
so its rightmost letter is applied first.  A token ``name-`` denotes the inverse
of generator ``name``; if the action pairs ``name`` with another generator,
the token resolves to that generator.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import NamedTuple, Union
import warnings

from aplab.errors import NotAnIntervalAction, UnknownGenerator, ValidationError
from aplab.numeric_homeo import Compose, HomeoExpr, eval_enclosure, lift
from aplab.pl_homeo import PLHomeo, compose, identity, inverse, lipschitz_constant, translation
from aplab.rational import Q

Map = Union[PLHomeo, HomeoExpr]
Word = tuple

NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")

#: probe points for deduplicating non-PL maps: k/2 for k in [-32, 32)
PROBES = tuple(Fraction(k, 2) for k in range(-32, 32))
PROBE_TOL = Fraction(1, 1 << 20)


@dataclass(frozen=True)
class GroupAction:
    """Named generators (insertion-ordered), an inverse pairing, and relators.

    ``inverses`` is stored in both directions (``a -> A`` and ``A -> a``);
    a self-inverse generator maps to itself.
    """

    name: str
    generators: dict = field(default_factory=dict)
    inverses: dict = field(default_factory=dict)
    relators: tuple = ()
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for n in self.generators:
            if not NAME_RE.match(n):
                raise ValidationError(f"invalid generator name {n!r}")
        for a, b in self.inverses.items():
            if a not in self.generators or b not in self.generators:
                raise ValidationError(f"inverse pairing {a}/{b} names an unknown generator")
            if self.inverses.get(b) != a:
                raise ValidationError(f"inverse pairing {a}/{b} is not mutual")

    @property
    def names(self) -> list[str]:
        return list(self.generators)

    @property
    def symmetric(self) -> bool:
        return all(n in self.inverses for n in self.generators)

    @property
    def is_pl(self) -> bool:
        return all(isinstance(g, PLHomeo) for g in self.generators.values())

    def __getitem__(self, name):
        return self.generators[name]

    def with_generators(self, generators: dict, **changes) -> "GroupAction":
        return replace(self, generators=dict(generators), **changes)


class BallElement(NamedTuple):
    word: tuple
    map: Map
    length: int
    certified: bool


# -- words --------------------------------------------------------------------


def parse_word(text) -> Word:
    if isinstance(text, str):
        return tuple(text.split())
    return tuple(text)


def inverse_token(A: GroupAction, token: str) -> str:
    if token in A.generators:
        partner = A.inverses.get(token)
        return partner if partner is not None else token + "-"
    if token.endswith("-") and token[:-1] in A.generators:
        return token[:-1]
    raise UnknownGenerator(token)


def resolve(A: GroupAction, token: str) -> Map:
    """The map denoted by a single token."""
    if token in A.generators:
        return A.generators[token]
    if token.endswith("-"):
        base = token[:-1]
        if base in A.generators:
            partner = A.inverses.get(base)
            if partner is not None:
                return A.generators[partner]
            return invert_map(A.generators[base])
    raise UnknownGenerator(token)


def invert_map(g: Map) -> Map:
    return inverse(g) if isinstance(g, PLHomeo) else g.inverse()


def compose_maps(f: Map, g: Map) -> Map:
    if isinstance(f, PLHomeo) and isinstance(g, PLHomeo):
        return compose(f, g)
    return Compose(lift(f), lift(g))


def word_eval(A: GroupAction, w) -> Map:
    """Map of a word; the empty word is the identity."""
    acc = None
    for token in parse_word(w):
        g = resolve(A, token)
        acc = g if acc is None else compose_maps(acc, g)
    return identity() if acc is None else acc


def free_reduce(A: GroupAction, w) -> Word:
    out: list[str] = []
    for token in parse_word(w):
        if out and _same_generator(A, inverse_token(A, token), out[-1]):
            out.pop()
        else:
            out.append(token)
    return tuple(out)


def _same_generator(A, s, t):
    return _canonical_token(A, s) == _canonical_token(A, t)


def _canonical_token(A, token):
    if token in A.generators:
        return token
    if token.endswith("-"):
        base = token[:-1]
        partner = A.inverses.get(base)
        if partner is not None:
            return partner
    return token


def word_length(A: GroupAction, w) -> int:
    return len(free_reduce(A, w))


# -- equality keys ------------------------------------------------------------


def is_identity(g: Map) -> bool:
    if isinstance(g, PLHomeo):
        return g == identity()
    return all(abs(eval_enclosure(g, x, PROBE_TOL).mid - x) <= PROBE_TOL for x in PROBES)


def _element_key(g: Map):
    if isinstance(g, PLHomeo):
        return ("pl", g)
    exact = g.as_pl()
    if exact is not None:
        return ("pl", exact)
    # probe signature: grid-rounded enclosure midpoints
    return ("probe", tuple(round(eval_enclosure(g, x, PROBE_TOL).mid / PROBE_TOL) for x in PROBES))


def _normalize_map(g: Map) -> Map:
    if isinstance(g, PLHomeo):
        return g
    exact = g.as_pl()
    return exact if exact is not None else g


# -- balls and generating sets -------------------------------------------------


def ball(A: GroupAction, radius: int) -> list[BallElement]:
    """Distinct elements of word length <= radius, shortest word first.

    Breadth-first over left multiplication by generators, so each element is
    recorded with the length of the shortest word that reaches it.  PL maps
    are deduplicated exactly; other maps by probe signature (``certified``
    is then ``False``).
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    idm = identity()
    seen = {_element_key(idm)}
    out = [BallElement((), idm, 0, True)]
    frontier = [out[0]]
    for r in range(1, radius + 1):
        nxt = []
        for el in frontier:
            for name, g in A.generators.items():
                m = _normalize_map(compose_maps(g, el.map))
                key = _element_key(m)
                if key in seen:
                    continue
                seen.add(key)
                new = BallElement((name, *el.word), m, r, key[0] == "pl")
                nxt.append(new)
        out.extend(nxt)
        frontier = nxt
    return out


def _pair_inverses(gens: dict) -> dict:
    keys = {}
    for n, g in gens.items():
        keys.setdefault(_element_key(g), n)
    pairs = {}
    for n, g in gens.items():
        partner = keys.get(_element_key(invert_map(g)))
        if partner is not None:
            pairs[n] = partner
    # keep only mutual pairs
    return {a: b for a, b in pairs.items() if pairs.get(b) == a}


def symmetrize(A: GroupAction, warn: bool = True) -> GroupAction:
    """Adjoin ``name-`` for every generator without an inverse partner."""
    if A.symmetric:
        return A
    gens = dict(A.generators)
    inv = dict(A.inverses)
    keys = {_element_key(g): n for n, g in gens.items()}
    added = []
    for n, g in list(A.generators.items()):
        if n in inv:
            continue
        gi = invert_map(g)
        existing = keys.get(_element_key(gi))
        if existing is not None and existing not in inv:
            inv[n], inv[existing] = existing, n
            continue
        new = n + "-"
        gens[new] = gi
        inv[n], inv[new] = new, n
        keys[_element_key(gi)] = new
        added.append(new)
    if warn and added:
        warnings.warn(f"action {A.name!r} was not symmetric; adjoined {', '.join(added)}", stacklevel=2)
    return replace(A, generators=gens, inverses=inv)


def square_generating_set(A: GroupAction) -> GroupAction:
    """Generators ``G u G^2`` (products named ``g.h`` = ``g o h``), deduplicated, identity dropped."""
    if not A.symmetric:
        raise ValidationError("square_generating_set needs a symmetric action")
    gens = {}
    seen = {_element_key(identity())}
    for n, g in A.generators.items():
        key = _element_key(g)
        if key not in seen:
            seen.add(key)
            gens[n] = g
    for a, g in A.generators.items():
        for b, h in A.generators.items():
            m = _normalize_map(compose_maps(g, h))
            key = _element_key(m)
            if key in seen:
                continue
            seen.add(key)
            gens[f"{a}.{b}"] = m
    return replace(A, generators=gens, inverses=_pair_inverses(gens), name=A.name)


def adjoin_translation(A: GroupAction, t, name: str = "tau") -> GroupAction:
    """Add ``x -> x + |t|`` and its inverse; kills every global fixed point."""
    t = abs(Q(t))
    if t == 0:
        raise ValueError("translation amount must be non-zero")
    base = name
    k = 1
    while base in A.generators or base + "-" in A.generators:
        base = f"{name}{k}"
        k += 1
    gens = dict(A.generators)
    gens[base] = translation(t)
    gens[base + "-"] = translation(-t)
    inv = dict(A.inverses)
    inv[base], inv[base + "-"] = base + "-", base
    return replace(A, generators=gens, inverses=inv)


def extend_interval_action(A: GroupAction, periods: int = 100) -> GroupAction:
    """Periodic extension ``F(x) = floor(x) + f(x - floor(x))`` of an action on ``[0, 1]``.

    A PL map with finitely many breakpoints cannot be periodic on all of the
    line, so the extension is periodic on ``[-periods, periods]`` and the
    identity shift (slope 1) outside; there ``F(x + 1) = F(x) + 1`` still
    holds because ``F(n) = n`` at every integer.
    """
    gens = {}
    for n, f in A.generators.items():
        if not isinstance(f, PLHomeo):
            raise NotAnIntervalAction(f"generator {n} is not PL")
        if f(0) != 0 or f(1) != 1:
            raise NotAnIntervalAction(f"generator {n} moves an endpoint of [0, 1]")
        inner = [(x, y) for x, y in f.breakpoints if 0 < x < 1]
        pts = []
        for k in range(-periods, periods):
            pts.append((Fraction(k), Fraction(k)))
            pts.extend((k + x, k + y) for x, y in inner)
        pts.append((Fraction(periods), Fraction(periods)))
        gens[n] = PLHomeo(pts, 1, 1)
    return replace(A, generators=gens, meta={**A.meta, "periodic_range": (-periods, periods)})


def check_relators(A: GroupAction) -> list[tuple]:
    """Relators that do not evaluate to the identity (exact for PL, probes otherwise)."""
    return [r for r in A.relators if not is_identity(word_eval(A, r))]


def lipschitz_bound(A: GroupAction):
    """Largest bilipschitz constant over PL generators."""
    return max((lipschitz_constant(g) for g in A.generators.values()), default=Fraction(1))
