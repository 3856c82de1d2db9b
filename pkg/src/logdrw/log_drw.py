"""Log de Rham-Witt complexes of monoid algebras over F_p in three contexts.

* absolute: (F_p[P], P) over (F_p, trivial).  Elements are normal forms over
  P^gp = Z^r whose weights k^+ lie in P[1/p]; the P-side complex is
  identified with these through the f/g isomorphisms of x-parts.
* relative: (F_p[P], P) over (F_p[Q], Q).  A fixed splitting
  P^gp = Q^gp + M turns elements into normal forms over M = Z^s with
  coefficients in W_m(F_p[Q^gp]) (:class:`MonoidWittCoeffs`).
* quotient: the relative context modulo an ideal J of Q; only x-parts with
  J-minimal labels survive.

Monoids are used in lattice coordinates, so P^gp = Z^r throughout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .coeffs import ModularCoeffs, MonoidWittCoeffs
from .drw_basis import (
    NEG_INF,
    BasicKey,
    BasisEngine,
    DFactor,
    Dlog,
    DRWElement,
    VFactor,
    block_t,
    canonical_order,
    element_to_records,
    key_degree,
    key_u,
    neg_inf_indices,
    plus_part,
)
from .monoid import (
    AffineMonoid,
    FracPoint,
    MonoidError,
    MonoidHom,
    MonoidIdeal,
    Splitting,
    check_star_star,
    is_J_minimal,
    is_p_saturated_hom,
    is_radical_ideal,
    split_quotient,
    u_of,
)

__all__ = [
    "ContextError",
    "AbsoluteContext",
    "RelativeContext",
    "QuotientContext",
    "LogDRWElement",
    "PBasicSum",
    "from_P_basic",
    "f_map",
    "g_map",
    "decompose",
    "sum_parts",
    "mul",
    "d",
    "F",
    "V",
    "dlog",
    "to_relative",
    "to_quotient",
    "x_part_keys",
    "element_to_json",
]


class ContextError(ValueError):
    """Incompatible contexts or an element outside the context."""


def _sorted_sign(indices: Sequence[int]):
    """(sign, sorted tuple) of a wedge of distinct indices; sign 0 on repeats."""
    if len(set(indices)) != len(indices):
        return 0, None
    inv = sum(1 for a, b in itertools.combinations(indices, 2) if a > b)
    return (-1) ** inv, tuple(sorted(indices))


# ---------------------------------------------------------------------------
# contexts


@dataclass(frozen=True)
class AbsoluteContext:
    monoid: AffineMonoid
    p: int
    m: int
    variant: str = field(default="absolute", init=False)

    def __post_init__(self):
        object.__setattr__(self, "monoid", self.monoid.standardized())
        object.__setattr__(self, "engine", BasisEngine(ModularCoeffs(self.p, self.m), self.monoid.rank))

    @property
    def rank(self) -> int:
        return self.monoid.rank

    @property
    def form_rank(self) -> int:
        return self.monoid.rank

    def at_level(self, m: int) -> "AbsoluteContext":
        return AbsoluteContext(self.monoid, self.p, m)

    # weights seen by the engine, labels seen by the user
    def engine_weight(self, x: FracPoint) -> tuple:
        return x.values()

    def base_coefficient(self, x: FracPoint, xi: int):
        return xi % self.p**self.m

    def label_of(self, key: BasicKey, coeff) -> list:
        return [(FracPoint.from_values(plus_part(key.weight), self.p), coeff)]

    def u_label(self, x: FracPoint) -> int | None:
        return u_of(self.monoid, x)

    def header(self) -> dict:
        return {"variant": self.variant, "p": self.p, "m": self.m, "monoid": str(self.monoid)}


@dataclass(frozen=True)
class RelativeContext:
    hom: MonoidHom
    p: int
    m: int
    window: int = 3
    certify: bool = True
    variant: str = field(default="relative", init=False)

    def __post_init__(self):
        split = split_quotient(self.hom)
        if self.certify:
            verdict = is_p_saturated_hom(self.hom, self.p, self.window)
            if verdict.status == "fails":
                raise ContextError(f"homomorphism is not p-saturated: {verdict.witness}")
        object.__setattr__(self, "splitting", split)
        ring = MonoidWittCoeffs(self.p, self.m, split.q)
        object.__setattr__(self, "engine", BasisEngine(ring, split.s))
        object.__setattr__(self, "absolute", AbsoluteContext(self.hom.target, self.p, self.m))

    @property
    def monoid(self) -> AffineMonoid:
        return self.hom.target

    @property
    def rank(self) -> int:
        return self.hom.target.rank

    @property
    def form_rank(self) -> int:
        return self.splitting.s

    def at_level(self, m: int) -> "RelativeContext":
        return RelativeContext(self.hom, self.p, m, self.window, certify=False)

    def engine_weight(self, x: FracPoint) -> tuple:
        return self.splitting.quotient_part(x.values())

    def base_coefficient(self, x: FracPoint, xi: int):
        base = self.splitting.base_part(x.values())
        return self.engine.ring.monomial(base, xi)

    def label_of(self, key: BasicKey, coeff) -> list:
        quotient = plus_part(key.weight)
        ring = self.engine.ring
        out = []
        for y, xi in coeff.items():
            x = self.splitting.unapply(tuple(y) + tuple(quotient))
            out.append((FracPoint.from_values(x, self.p), ring.monomial(y, xi)))
        return out

    def u_label(self, x: FracPoint) -> int | None:
        return u_of(self.monoid, x)

    def header(self) -> dict:
        return {
            "variant": self.variant,
            "p": self.p,
            "m": self.m,
            "source": str(self.hom.source),
            "target": str(self.hom.target),
            "hom": [list(r) for r in self.hom.matrix],
        }


@dataclass(frozen=True)
class QuotientContext(RelativeContext):
    ideal: MonoidIdeal = None

    def __post_init__(self):
        if self.ideal is None:
            raise ContextError("quotient context needs an ideal")
        super().__post_init__()
        object.__setattr__(self, "variant", "quotient")
        if self.certify:
            verdict = is_radical_ideal(self.hom.source, self.ideal, max(self.window, 3))
            if verdict.status == "fails":
                raise ContextError(f"ideal is not radical: {verdict.witness}")

    def at_level(self, m: int) -> "QuotientContext":
        return QuotientContext(self.hom, self.p, m, self.window, False, self.ideal)

    def keeps(self, x: FracPoint) -> bool:
        return is_J_minimal(self.monoid, self.hom, self.ideal, x)

    def header(self) -> dict:
        out = super().header()
        out["ideal"] = [list(g) for g in self.ideal.generators]
        return out


# ---------------------------------------------------------------------------
# elements


class LogDRWElement:
    """An element of W_m Lambda in a context, stored as an engine normal form."""

    __slots__ = ("ctx", "nf")

    def __init__(self, ctx, nf: DRWElement):
        self.ctx = ctx
        self.nf = nf

    def __add__(self, other):
        _same(self, other)
        return LogDRWElement(self.ctx, self.nf + other.nf)

    def __sub__(self, other):
        _same(self, other)
        return LogDRWElement(self.ctx, self.nf - other.nf)

    def __neg__(self):
        return LogDRWElement(self.ctx, -self.nf)

    def scale(self, n: int):
        return LogDRWElement(self.ctx, self.nf.scale(n))

    def __eq__(self, other):
        if not isinstance(other, LogDRWElement):
            return NotImplemented
        return self.ctx == other.ctx and self.nf == other.nf

    def __hash__(self):
        return hash(self.nf)

    def is_zero(self) -> bool:
        return self.nf.is_zero()

    def degrees(self) -> set:
        return self.nf.degrees()

    def __repr__(self):
        return f"LogDRWElement({self.ctx.variant}, {self.nf!r})"


def _same(a: LogDRWElement, b: LogDRWElement):
    if a.ctx != b.ctx:
        raise ContextError("elements live in different contexts")


def zero(ctx) -> LogDRWElement:
    return LogDRWElement(ctx, ctx.engine.zero())


def _check_label(ctx, x: FracPoint) -> int:
    u = ctx.u_label(x)
    if u is None:
        raise ContextError(f"{x} is not in P[1/p]")
    return u


def from_P_basic(ctx, xi: int, x: FracPoint, I: Iterable[int]) -> LogDRWElement:
    """Normal form of b(xi, x, I); I holds 0 (for d) and 1-based dlog indices.

    ``xi`` is an integer mod p^m divisible by p^u(x).
    """
    u = _check_label(ctx, x)
    if xi % ctx.p**u:
        raise ContextError(f"coefficient {xi} is not divisible by p^{u}")
    I = sorted(set(I))
    eng = ctx.engine
    nf = eng.basic(ctx.base_coefficient(x, xi), ctx.engine_weight(x))
    if 0 in I:
        nf = eng.d(nf)
    for i in I:
        if i == 0:
            continue
        if not 1 <= i <= ctx.form_rank:
            raise ContextError(f"dlog index {i} out of range")
        nf = eng.wedge_dlog(nf, i - 1)
    return _filtered(ctx, nf)


def _filtered(ctx, nf: DRWElement) -> LogDRWElement:
    if isinstance(ctx, QuotientContext):
        return to_quotient(LogDRWElement(ctx, nf), ctx.ideal)
    return LogDRWElement(ctx, nf)


def mul(a: LogDRWElement, b: LogDRWElement) -> LogDRWElement:
    _same(a, b)
    return _filtered(a.ctx, a.ctx.engine.mul(a.nf, b.nf))


def d(e: LogDRWElement) -> LogDRWElement:
    return LogDRWElement(e.ctx, e.ctx.engine.d(e.nf))


def _move(e: LogDRWElement, ctx) -> DRWElement:
    """Same keys and integer representatives in another level's engine."""
    return ctx.engine.element(e.nf.terms.items())


def F(e: LogDRWElement) -> LogDRWElement:
    """Frobenius W_m -> W_(m-1)."""
    if e.ctx.m < 2:
        raise ContextError("Frobenius needs level at least 2")
    low = e.ctx.at_level(e.ctx.m - 1)
    return _filtered(low, e.ctx.engine.restrict(e.ctx.engine.F(e.nf), low.engine))


def V(e: LogDRWElement) -> LogDRWElement:
    """Verschiebung W_m -> W_(m+1)."""
    high = e.ctx.at_level(e.ctx.m + 1)
    return _filtered(high, high.engine.V(_move(e, high)))


def dlog(ctx, g: Sequence[int]) -> LogDRWElement:
    """dlog X^g for g in P^gp (lattice coordinates)."""
    if isinstance(ctx, AbsoluteContext):
        vec = tuple(int(v) for v in g)
    else:
        vec = tuple(int(v) for v in ctx.splitting.quotient_part(g))
    eng = ctx.engine
    if not any(vec):
        return zero(ctx)
    return LogDRWElement(ctx, eng.normalize([Dlog(vec)]))


def constant(ctx, xi: int) -> LogDRWElement:
    eng = ctx.engine
    c = eng.ring.from_int(xi)
    return LogDRWElement(ctx, eng.constant(c))


# ---------------------------------------------------------------------------
# x-parts


def decompose(e: LogDRWElement) -> dict:
    """Label -> x-part; the parts sum back to e."""
    ctx = e.ctx
    buckets: dict = {}
    for key, coeff in e.nf:
        for label, piece in ctx.label_of(key, coeff):
            buckets.setdefault(label, []).append((key, piece))
    return {label: LogDRWElement(ctx, ctx.engine.element(pairs)) for label, pairs in sorted(buckets.items(), key=lambda kv: (kv[0].denom_exp, kv[0].numerator))}


def sum_parts(ctx, parts: dict) -> LogDRWElement:
    acc = zero(ctx)
    for part in parts.values():
        acc = acc + part
    return acc


@dataclass
class PBasicSum:
    """sum over I of b(xi_I, x, I) for one label x; coefficients are engine ring values."""

    label: FracPoint
    terms: dict  # sorted tuple I (0 for d, 1-based dlogs) -> coefficient


def g_map(e_gp: LogDRWElement, x: FracPoint) -> PBasicSum:
    """P^gp-side x-part -> sum of P-basic differentials with weight x."""
    ctx = e_gp.ctx
    p = ctx.p
    ring = ctx.engine.ring
    target = tuple(Fraction(v) for v in ctx.engine_weight(x))
    _check_label(ctx, x)
    out: dict = {}
    for key, xi in e_gp.nf:
        if plus_part(key.weight) != target:
            raise ContextError(f"term {key} has weight different from {x}")
        for label, _ in ctx.label_of(key, xi):
            if label != x:
                raise ContextError(f"term {key} has label {label}, expected {x}")
        blocks = key.blocks
        negs = neg_inf_indices(key.weight)
        rest = blocks[1:]
        with_d = not blocks[0] and rest and block_t(key.weight, rest[0], p) >= 1
        chosen_blocks = rest[1:] if with_d else rest
        for choice in itertools.product(*chosen_blocks):
            factor = 1
            for i, b in zip(choice, chosen_blocks):
                val = key.weight[i] * Fraction(p) ** block_t(key.weight, b, p)
                factor *= int(val)
            sign, ordered = _sorted_sign(list(choice) + list(negs))
            if not sign:
                continue
            I = ((0,) if with_d else ()) + tuple(i + 1 for i in ordered)
            c = ring.scale(xi, sign * factor)
            out[I] = ring.add(out[I], c) if I in out else c
    return PBasicSum(x, {I: c for I, c in out.items() if not ring.is_zero(c)})


def f_map(ctx, s: PBasicSum) -> LogDRWElement:
    """Evaluate a P-basic sum as a normal form."""
    eng = ctx.engine
    acc = eng.zero()
    weight = ctx.engine_weight(s.label)
    for I, c in s.terms.items():
        nf = eng.basic(c, weight)
        if 0 in I:
            nf = eng.d(nf)
        for i in I:
            if i:
                nf = eng.wedge_dlog(nf, i - 1)
        acc = acc + nf
    return LogDRWElement(ctx, acc)


def x_part_keys(engine_weight: Sequence, p: int) -> dict:
    """All keys with k^+ = the given weight, grouped by degree."""
    weight = tuple(Fraction(v) for v in engine_weight)
    order = canonical_order(weight, p)
    zeros = [i for i, v in enumerate(weight) if v == 0]
    out: dict = {}
    n = len(order)
    for a in range(n + 1):
        head, tail = order[:a], order[a:]
        for cuts in _compositions(len(tail)):
            blocks = [head]
            pos = 0
            for c in cuts:
                blocks.append(tail[pos : pos + c])
                pos += c
            for size in range(len(zeros) + 1):
                for negs in itertools.combinations(zeros, size):
                    w = tuple(NEG_INF if i in negs else v for i, v in enumerate(weight))
                    key = BasicKey(w, tuple(tuple(b) for b in blocks))
                    out.setdefault(key_degree(key), []).append(key)
    for deg in out:
        out[deg].sort(key=lambda k: k.sort_key())
    return out


def _compositions(n: int) -> list:
    if n == 0:
        return [()]
    out = []
    for first in range(1, n + 1):
        for rest in _compositions(n - first):
            out.append((first,) + rest)
    return out


# ---------------------------------------------------------------------------
# change of context


def to_relative(e_abs: LogDRWElement, rel_ctx: RelativeContext) -> LogDRWElement:
    """Image of an absolute element in the relative complex."""
    if not isinstance(e_abs.ctx, AbsoluteContext):
        raise ContextError("expected an absolute element")
    if e_abs.ctx.m != rel_ctx.m or e_abs.ctx.p != rel_ctx.p or e_abs.ctx.monoid != rel_ctx.monoid.standardized():
        raise ContextError("contexts do not share p, m and P")
    split = rel_ctx.splitting
    ring = rel_ctx.engine.ring
    abs_eng = e_abs.ctx.engine
    acc = rel_ctx.engine.zero()
    for key, xi in e_abs.nf:
        word = []
        for f in abs_eng.word_of(key, xi):
            if isinstance(f, Dlog):
                word.append(Dlog(tuple(int(v) for v in split.quotient_part(f.vector))))
                continue
            y = split.apply(f.exponent)
            coeff = ring.monomial(y[: split.q], int(f.coeff))
            word.append(type(f)(f.depth, coeff, tuple(int(v) for v in y[split.q :])))
        acc = acc + rel_ctx.engine.normalize(word)
    return _filtered(rel_ctx, acc)


def to_quotient(e_rel: LogDRWElement, J: MonoidIdeal) -> LogDRWElement:
    """Drop every x-part whose label is not J-minimal."""
    ctx = e_rel.ctx
    kept = []
    for label, part in decompose(e_rel).items():
        if is_J_minimal(ctx.monoid, ctx.hom, J, label):
            kept.extend(part.nf.terms.items())
    return LogDRWElement(ctx, ctx.engine.element(kept))


def element_to_json(e: LogDRWElement) -> dict:
    return {"context": e.ctx.header(), "terms": element_to_records(e.nf)}
