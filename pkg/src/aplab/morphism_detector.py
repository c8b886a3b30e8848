"""Extract a nontrivial morphism to the reals from a PL action.

Two detectors.  Right-tail slopes of PL maps with affine tails multiply under
composition, so ``g -> slope at +infinity`` is a morphism to the positive
rationals (the scaling of Lebesgue measure near infinity).  When it is
trivial, translation numbers ``lim g^n(0)/n`` are estimated and tested for
additivity, which is what an action semi-conjugate to translations exhibits.
Verdict thresholds are diagnostics and are printed with the raw data.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from aplab.errors import TranslationOverflow
from aplab.group_action import GroupAction, parse_word, resolve, word_eval
from aplab.pl_homeo import PLHomeo

SCALING = "scaling cocycle nontrivial"
TRANSLATION = "translation-like"
INCONCLUSIVE = "inconclusive"

HALVING_THRESHOLD = Fraction(1, 10**6)
ADDITIVITY_THRESHOLD = Fraction(1, 10**4)
DEFAULT_N = 256
DEFAULT_BOUND = 10**12


@dataclass(frozen=True)
class TranslationNumber:
    estimate: Fraction
    halving_error: Fraction
    n: int


@dataclass
class MorphismReport:
    tail_slopes: dict = field(default_factory=dict)  # name -> (right, left)
    relators: list = field(default_factory=list)  # (word, right product, left product, ok)
    translation_numbers: dict = field(default_factory=dict)  # name -> TranslationNumber | str
    additivity: list = field(default_factory=list)  # (u, v, tau(uv), tau(u), tau(v))
    verdict: str | None = None
    notes: list = field(default_factory=list)

    @property
    def morphism(self) -> dict:
        return {n: s[0] for n, s in self.tail_slopes.items()}

    @property
    def nontrivial(self) -> bool:
        return any(s[0] != 1 for s in self.tail_slopes.values())


def tail_slopes(g: PLHomeo) -> tuple[Fraction, Fraction]:
    return g.right_slope, g.left_slope


def tail_slope_morphism(A: GroupAction) -> MorphismReport:
    """Exact morphism ``g -> s_+(g)``; relators are checked to map to 1 on both tails."""
    if not A.is_pl:
        raise TypeError("tail slopes need PL generators")
    rep = MorphismReport()
    for name, g in A.generators.items():
        rep.tail_slopes[name] = tail_slopes(g)
    for r in A.relators:
        rp = lp = Fraction(1)
        for token in parse_word(r):
            s_plus, s_minus = tail_slopes(resolve(A, token))
            rp *= s_plus
            lp *= s_minus
        rep.relators.append((tuple(parse_word(r)), rp, lp, rp == 1 and lp == 1))
    if rep.nontrivial:
        rep.verdict = SCALING
    return rep


def translation_number(A: GroupAction, g, n_max: int = DEFAULT_N, *, base=0, bound=DEFAULT_BOUND):
    """``(g^n(base) - base) / n`` with the change against ``n/2`` as a convergence diagnostic.

    ``n_max`` must be a power of two.  Raises :class:`TranslationOverflow`
    once an iterate exceeds ``bound`` in absolute value.
    """
    if n_max < 2 or n_max & (n_max - 1):
        raise ValueError("n_max must be a power of two >= 2")
    m = word_eval(A, g)
    if not isinstance(m, PLHomeo):
        raise TypeError("translation numbers need a PL map")
    base = Fraction(base)
    x = base
    half = None
    for i in range(1, n_max + 1):
        x = m(x)
        if abs(x) > bound:
            raise TranslationOverflow(f"|g^{i}({base})| exceeds {bound}")
        if i == n_max // 2:
            half = x
    est = (x - base) / n_max
    est_half = (half - base) / (n_max // 2)
    return TranslationNumber(est, abs(est - est_half), n_max)


def _random_word(rng, names, max_len):
    return tuple(rng.choice(names) for _ in range(rng.randint(1, max_len)))


def morphism_report(A: GroupAction, n_max: int = DEFAULT_N, pairs: int = 20, seed: int = 0) -> MorphismReport:
    """Run both detectors and assemble a verdict.

    ``translation-like`` needs every generator's halving error within
    ``1e-6``, at least one nonzero translation number, and
    ``|tau(uv) - tau(u) - tau(v)| <= 1e-4`` on ``pairs`` seeded random word pairs.
    """
    rep = tail_slope_morphism(A)
    if rep.verdict == SCALING:
        return rep
    ok = True
    for name in A.generators:
        try:
            tn = translation_number(A, (name,), n_max)
        except TranslationOverflow as exc:
            rep.translation_numbers[name] = f"overflow: {exc}"
            ok = False
            continue
        rep.translation_numbers[name] = tn
        if tn.halving_error > HALVING_THRESHOLD:
            ok = False
    if ok and all(t.estimate == 0 for t in rep.translation_numbers.values()):
        rep.notes.append("all translation numbers vanish; no morphism detected")
        ok = False
    if ok:
        rng = random.Random(seed)
        names = list(A.generators)
        for _ in range(pairs):
            u, v = _random_word(rng, names, 3), _random_word(rng, names, 3)
            try:
                tu = translation_number(A, u, n_max).estimate
                tv = translation_number(A, v, n_max).estimate
                tuv = translation_number(A, u + v, n_max).estimate
            except TranslationOverflow:
                ok = False
                break
            rep.additivity.append((u, v, tuv, tu, tv))
            if abs(tuv - tu - tv) > ADDITIVITY_THRESHOLD:
                ok = False
    rep.verdict = TRANSLATION if ok else INCONCLUSIVE
    return rep
