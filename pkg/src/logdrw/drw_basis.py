"""Basic Witt differentials over R[Z^r] with p^(-inf) weight entries.

A basic element is indexed by a :class:`BasicKey` (weight plus ordered
interval blocks ``(I_0, I_1, ..., I_l)``; the p^(-inf) block is read off
the weight) and carries a coefficient ``xi`` from a coefficient ring of
:mod:`logdrw.coeffs`, with ``xi`` in the image of ``V^u(k)``.

Words are products of :class:`VFactor` (``V^n(c X^x)``), :class:`DFactor`
(``dV^n(c X^x)``, read as ``F^(-n) d(c X^x)`` for negative ``n``) and
:class:`Dlog` (``dlog X^v``).  :class:`BasisEngine` rewrites a word into the
unique sum of basic elements; two reduction orders are provided so they can
be checked against each other, and the phantom maps give an independent
oracle over torsion-free coefficients.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .coeffs import GhostCoeffs, ModularCoeffs
from .monoid import ord_p

__all__ = [
    "random_word",
    "NEG_INF",
    "BasicKey",
    "VFactor",
    "DFactor",
    "Dlog",
    "DRWElement",
    "BasisEngine",
    "WordError",
    "canonical_order",
    "key_u",
    "key_degree",
    "block_t",
    "plus_part",
    "neg_inf_indices",
    "support",
    "is_integral",
    "validate_key",
    "d_basic",
    "v_basic",
    "f_basic",
    "wedge_dlog",
    "word_normalize",
    "phantom",
    "phantom_forms",
    "word_phantom",
    "p_basic_element",
    "form_add",
    "form_mul",
    "form_scale",
    "forms_equal",
    "parse_word",
    "format_word",
    "element_to_records",
    "ghost_engine",
    "modular_engine",
]


class WordError(ValueError):
    """Malformed word or key."""


class _NegInf:
    """The weight entry p^(-inf)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NEG_INF"

    def __str__(self):
        return "p^-inf"

    def __reduce__(self):
        return (_NegInf, ())


NEG_INF = _NegInf()


# ---------------------------------------------------------------------------
# keys


@dataclass(frozen=True)
class BasicKey:
    """Weight entries (Fraction or NEG_INF) and blocks (I_0, I_1, ..., I_l)."""

    weight: tuple
    blocks: tuple

    @property
    def rank(self) -> int:
        return len(self.weight)

    def sort_key(self):
        return (tuple((0, 0) if v is NEG_INF else (1, v) for v in self.weight), self.blocks)

    def __str__(self):
        ws = ",".join("-inf" if v is NEG_INF else str(v) for v in self.weight)
        bs = "|".join(",".join(str(i + 1) for i in b) for b in self.blocks)
        return f"k=({ws}) P=[{bs}]"


def plus_part(weight: Sequence) -> tuple:
    return tuple(Fraction(0) if v is NEG_INF else v for v in weight)


def neg_inf_indices(weight: Sequence) -> tuple:
    return tuple(i for i, v in enumerate(weight) if v is NEG_INF)


def support(weight: Sequence) -> tuple:
    return tuple(i for i, v in enumerate(weight) if v is not NEG_INF and v != 0)


def is_integral(values: Iterable) -> bool:
    return all(Fraction(v).denominator == 1 for v in values)


@lru_cache(maxsize=200_000)
def canonical_order(weight: tuple, p: int) -> tuple:
    """Support indices sorted by (ord_p k_i, i)."""
    return tuple(sorted(support(weight), key=lambda i: (ord_p(weight[i], p), i)))


def block_t(weight: Sequence, block: Sequence[int], p: int) -> int:
    return -min(ord_p(weight[i], p) for i in block)


@lru_cache(maxsize=200_000)
def key_u(key: BasicKey, p: int) -> int:
    supp = support(key.weight)
    if not supp:
        return 0
    return max(0, block_t(key.weight, supp, p))


def key_degree(key: BasicKey) -> int:
    return len(key.blocks) - 1 + len(neg_inf_indices(key.weight))


def validate_key(key: BasicKey, p: int) -> None:
    order = canonical_order(key.weight, p)
    flat = tuple(i for b in key.blocks for i in b)
    if flat != order:
        raise WordError(f"blocks {key.blocks} are not an interval partition of {order}")
    if not key.blocks or any(not b for b in key.blocks[1:]):
        raise WordError("only I_0 may be empty")


def _key(weight, blocks) -> BasicKey:
    return BasicKey(tuple(v if v is NEG_INF else Fraction(v) for v in weight), tuple(tuple(b) for b in blocks))


# ---------------------------------------------------------------------------
# words


@dataclass(frozen=True)
class VFactor:
    """V^depth(coeff * X^exponent)."""

    depth: int
    coeff: object
    exponent: tuple


@dataclass(frozen=True)
class DFactor:
    """dV^depth(coeff * X^exponent); F^(-depth) d(...) when depth < 0."""

    depth: int
    coeff: object
    exponent: tuple


@dataclass(frozen=True)
class Dlog:
    """dlog X^vector."""

    vector: tuple


def _det(rows: list) -> int:
    n = len(rows)
    if n == 0:
        return 1
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = 0
    for j in range(n):
        if rows[0][j]:
            minor = [row[:j] + row[j + 1 :] for row in rows[1:]]
            total += (-1) ** j * rows[0][j] * _det(minor)
    return total


# ---------------------------------------------------------------------------
# elements


class DRWElement:
    """Finite sum of basic elements: key -> coefficient, zero terms dropped."""

    __slots__ = ("engine", "terms")

    def __init__(self, engine: "BasisEngine", terms: dict | None = None):
        self.engine = engine
        self.terms = terms or {}

    @property
    def ring(self):
        return self.engine.ring

    def __iter__(self):
        return iter(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "DRWElement") -> "DRWElement":
        return self.engine.element(itertools.chain(self.terms.items(), other.terms.items()))

    def __neg__(self):
        ring = self.ring
        return DRWElement(self.engine, {k: ring.neg(c) for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, n: int) -> "DRWElement":
        ring = self.ring
        return self.engine.element((k, ring.scale(c, n)) for k, c in self.terms.items())

    def canonical(self) -> tuple:
        ring = self.ring
        return tuple(sorted(((k.sort_key(), ring.key(c)) for k, c in self.terms.items())))

    def __eq__(self, other):
        if not isinstance(other, DRWElement):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __hash__(self):
        return hash(self.canonical())

    def degree_part(self, n: int) -> "DRWElement":
        return DRWElement(self.engine, {k: c for k, c in self.terms.items() if key_degree(k) == n})

    def degrees(self) -> set:
        return {key_degree(k) for k in self.terms}

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = [f"{self.ring.to_json(c)}*e[{k}]" for k, c in sorted(self.terms.items(), key=lambda kv: kv[0].sort_key())]
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# the engine


class BasisEngine:
    """Normal forms over a coefficient ring in rank ``rank``.

    ``ring`` follows the protocol of :mod:`logdrw.coeffs`; its ``m``
    attribute is the truncation level (keys with u(k) >= m vanish).
    """

    def __init__(self, ring, rank: int):
        self.ring = ring
        self.rank = rank
        self.p = ring.p
        self.m = ring.m
        self._zero_vec = (0,) * rank

    def __repr__(self):
        return f"BasisEngine({self.ring!r}, rank={self.rank})"

    # -- element plumbing ------------------------------------------------

    def element(self, pairs: Iterable) -> DRWElement:
        ring = self.ring
        acc: dict = {}
        for key, c in pairs:
            if key in acc:
                acc[key] = ring.add(acc[key], c)
            else:
                acc[key] = c
        terms = {k: c for k, c in acc.items() if not ring.is_zero(c) and key_u(k, self.p) < self.m}
        return DRWElement(self, terms)

    def zero(self) -> DRWElement:
        return DRWElement(self, {})

    def basic(self, xi, weight, blocks=None) -> DRWElement:
        """The basic element with the given weight; blocks default to (supp,) in canonical order."""
        weight = tuple(v if v is NEG_INF else Fraction(v) for v in weight)
        if blocks is None:
            blocks = (canonical_order(weight, self.p),)
        key = _key(weight, blocks)
        validate_key(key, self.p)
        u = key_u(key, self.p)
        if u and not self.ring.is_zero(xi):
            self.ring.Vinv(xi, u)  # raises when xi is not in the image of V^u
        return self.element([(key, xi)])

    def constant(self, xi) -> DRWElement:
        return self.basic(xi, (0,) * self.rank, ((),))

    # -- the rules ---------------------------------------------------------

    def v_rule(self, key: BasicKey, xi):
        p, ring = self.p, self.ring
        weight = tuple(v if v is NEG_INF else v / p for v in key.weight)
        new = ring.V(xi)
        if not key.blocks[0] and not is_integral(plus_part(weight)):
            new = ring.scale(new, p)
        return BasicKey(weight, key.blocks), new

    def d_rule(self, key: BasicKey, xi) -> list:
        I0 = key.blocks[0]
        if not I0:
            return []
        new = xi
        if is_integral(plus_part(key.weight)):
            new = self.ring.scale(xi, self.p ** (-block_t(key.weight, I0, self.p)))
        return [(BasicKey(key.weight, ((),) + key.blocks), new)]

    def wedge_rule(self, key: BasicKey, xi, i: int) -> list:
        """Terms of (basic element) * dlog X_i."""
        p, ring = self.p, self.ring
        w = key.weight
        v = w[i]
        negs = neg_inf_indices(w)
        if v is NEG_INF:
            return []
        if v == 0:
            sign = (-1) ** sum(1 for j in negs if j > i)
            new_w = w[:i] + (NEG_INF,) + w[i + 1 :]
            return [(BasicKey(new_w, key.blocks), ring.scale(xi, sign))]
        a = next(idx for idx, b in enumerate(key.blocks) if i in b)
        block = key.blocks[a]
        pos = block.index(i)
        before, after = block[:pos], block[pos + 1 :]
        length = len(key.blocks) - 1
        n_i = -ord_p(v, p)
        l_i = v * Fraction(p) ** n_i
        assert l_i.denominator == 1 and l_i.numerator % p
        l_i = int(l_i)
        sign = (-1) ** ((length - a) + len(negs))
        out = []
        if before or a == 0:
            xi1 = ring.div_unit(ring.scale(xi, sign), l_i)
            if a == 0 and not before:
                xi1 = ring.scale(xi1, p ** key_u(key, p))
            blocks = key.blocks[:a] + (before, (i,) + after) + key.blocks[a + 1 :]
            out.append((BasicKey(w, blocks), xi1))
        if after:
            shift = n_i - block_t(w, after, p)
            xi2 = ring.div_unit(ring.scale(xi, -sign * p**shift), l_i)
            blocks = key.blocks[:a] + (before + (i,), after) + key.blocks[a + 1 :]
            out.append((BasicKey(w, blocks), xi2))
        return out

    # -- words of basic elements -----------------------------------------

    def _block_vector(self, weight, block, power: int) -> tuple:
        scale = Fraction(self.p) ** power
        vec = [0] * self.rank
        for i in block:
            val = weight[i] * scale
            assert val.denominator == 1
            vec[i] = int(val)
        return tuple(vec)

    def word_of(self, key: BasicKey, xi) -> list:
        """A word whose product is the basic element."""
        p, ring = self.p, self.ring
        kp = plus_part(key.weight)
        blocks = key.blocks
        factors: list = []
        rest = blocks[1:]
        if blocks[0]:
            u = max(0, block_t(kp, blocks[0], p))
            factors.append(VFactor(u, ring.Vinv(xi, u), self._block_vector(kp, blocks[0], u)))
        elif rest and block_t(kp, rest[0], p) >= 1:
            t = block_t(kp, rest[0], p)
            factors.append(DFactor(t, ring.Vinv(xi, t), self._block_vector(kp, rest[0], t)))
            rest = rest[1:]
        else:
            factors.append(VFactor(0, xi, self._zero_vec))
        for b in rest:
            t = block_t(kp, b, p)
            factors.append(DFactor(t, ring.one(), self._block_vector(kp, b, t)))
        for i in neg_inf_indices(key.weight):
            factors.append(Dlog(tuple(int(j == i) for j in range(self.rank))))
        return factors

    # -- normalization, order A --------------------------------------------

    def _merge(self, a: VFactor, b: VFactor) -> VFactor:
        ring, p = self.ring, self.p
        if a.depth < b.depth:
            a, b = b, a
        gap = a.depth - b.depth
        c2 = b.coeff
        for _ in range(gap):
            c2 = ring.F(c2)
        coeff = ring.scale(ring.mul(a.coeff, c2), p**b.depth)
        exponent = tuple(x + p**gap * y for x, y in zip(a.exponent, b.exponent))
        return VFactor(a.depth, coeff, exponent)

    def _split(self, word: Sequence):
        deg0 = VFactor(0, self.ring.one(), self._zero_vec)
        deg1 = []
        for f in word:
            if isinstance(f, VFactor):
                if f.depth < 0:
                    raise WordError("V-depth must be nonnegative")
                deg0 = self._merge(deg0, f)
            elif isinstance(f, (DFactor, Dlog)):
                deg1.append(f)
            else:
                raise WordError(f"unknown factor {f!r}")
            if len(getattr(f, "exponent", getattr(f, "vector", ()))) != self.rank:
                raise WordError(f"factor {f!r} has the wrong rank")
        return deg0, deg1

    def _vanishes(self, deg1) -> bool:
        for f in deg1:
            if isinstance(f, DFactor) and (not any(f.exponent) or self.ring.is_zero(f.coeff)):
                return True
            if isinstance(f, Dlog) and not any(f.vector):
                return True
        return False

    def _telescope(self, deg0: VFactor, deg1: list) -> DRWElement:
        ring, p = self.ring, self.p
        top = deg0.depth
        c_in = deg0.coeff
        z = list(deg0.exponent)
        vectors = []
        for f in deg1:
            if isinstance(f, DFactor):
                c = f.coeff
                for _ in range(top - f.depth):
                    c = ring.F(c)
                c_in = ring.mul(c_in, c)
                z = [a + p ** (top - f.depth) * b for a, b in zip(z, f.exponent)]
                vectors.append(f.exponent)
            else:
                vectors.append(f.vector)
        s = len(vectors)
        if s > self.rank or ring.is_zero(c_in):
            return self.zero()
        weight = tuple(Fraction(v) for v in z)
        base = BasicKey(weight, (canonical_order(weight, p),))
        pairs = []
        for cols in itertools.combinations(range(self.rank), s):
            det = _det([[vec[j] for j in cols] for vec in vectors])
            if det == 0:
                continue
            terms = [(base, ring.scale(c_in, det))]
            for j in cols:
                terms = [t for key, xi in terms for t in self.wedge_rule(key, xi, j)]
            for _ in range(top):
                terms = [self.v_rule(key, xi) for key, xi in terms]
            pairs.extend(terms)
        return self.element(pairs)

    def normalize(self, word: Sequence, pick: str = "first") -> DRWElement:
        """Normal form of a word.

        ``pick`` chooses which deepest dV factor is peeled off by the Leibniz
        rule ("first" or "last"); the result does not depend on it.
        """
        deg0, deg1 = self._split(word)
        if self.ring.is_zero(deg0.coeff) or self._vanishes(deg1):
            return self.zero()
        depths = [f.depth if isinstance(f, DFactor) else None for f in deg1]
        deep = [i for i, dep in enumerate(depths) if dep is not None and dep > deg0.depth]
        if not deep:
            return self._telescope(deg0, deg1)
        top = max(depths[i] for i in deep)
        candidates = [i for i in deep if depths[i] == top]
        idx = candidates[0] if pick == "first" else candidates[-1]
        f = deg1[idx]
        rest = deg1[:idx] + deg1[idx + 1 :]
        sign = (-1) ** idx
        beta = VFactor(f.depth, f.coeff, f.exponent)
        first = self.d(self.normalize([self._merge(deg0, beta)] + rest, pick))
        result = first
        if any(deg0.exponent):
            second = self.normalize([beta, DFactor(deg0.depth, deg0.coeff, deg0.exponent)] + rest, pick)
            result = first - second
        return result.scale(sign) if sign < 0 else result

    # -- normalization, order B --------------------------------------------

    def factor_normal_form(self, f) -> DRWElement:
        """Normal form of a single factor, by the rules alone."""
        ring, p = self.ring, self.p
        if isinstance(f, VFactor):
            weight = tuple(Fraction(v) for v in f.exponent)
            terms = [(BasicKey(weight, (canonical_order(weight, p),)), f.coeff)]
            for _ in range(f.depth):
                terms = [self.v_rule(k, c) for k, c in terms]
            return self.element(terms)
        if isinstance(f, DFactor):
            if f.depth >= 0:
                return self.d(self.factor_normal_form(VFactor(f.depth, f.coeff, f.exponent)))
            c = f.coeff
            for _ in range(-f.depth):
                c = ring.F(c)
            lifted = tuple(p ** (-f.depth) * v for v in f.exponent)
            base = self.factor_normal_form(VFactor(0, c, lifted))
            return self.wedge_vector(base, f.exponent)
        if isinstance(f, Dlog):
            return self.wedge_vector(self.constant(ring.one()), f.vector)
        raise WordError(f"unknown factor {f!r}")

    def normalize_folded(self, word: Sequence) -> DRWElement:
        """Order B: normal forms of single factors multiplied left to right."""
        acc = self.constant(self.ring.one())
        for f in word:
            acc = self.mul(acc, self.factor_normal_form(f), pick="last")
        return acc

    # -- operations on normal forms -----------------------------------------

    def d(self, e: DRWElement) -> DRWElement:
        return self.element(t for key, xi in e for t in self.d_rule(key, xi))

    def V(self, e: DRWElement) -> DRWElement:
        return self.element(self.v_rule(key, xi) for key, xi in e)

    def wedge_dlog(self, e: DRWElement, i: int) -> DRWElement:
        return self.element(t for key, xi in e for t in self.wedge_rule(key, xi, i))

    def wedge_vector(self, e: DRWElement, vector: Sequence[int]) -> DRWElement:
        """e * dlog X^vector."""
        acc = self.zero()
        for i, v in enumerate(vector):
            if v:
                acc = acc + self.wedge_dlog(e, i).scale(v)
        return acc

    def mul(self, a: DRWElement, b: DRWElement, pick: str = "first") -> DRWElement:
        acc = self.zero()
        for ka, ca in a:
            wa = self.word_of(ka, ca)
            for kb, cb in b:
                acc = acc + self.normalize(wa + self.word_of(kb, cb), pick)
        return acc

    def frobenius_word(self, word: Sequence) -> list:
        ring, p = self.ring, self.p
        out = []
        for f in word:
            if isinstance(f, VFactor):
                if f.depth >= 1:
                    out.append(VFactor(f.depth - 1, ring.scale(f.coeff, p), f.exponent))
                else:
                    out.append(VFactor(0, ring.F(f.coeff), tuple(p * v for v in f.exponent)))
            elif isinstance(f, DFactor):
                out.append(DFactor(f.depth - 1, f.coeff, f.exponent))
            else:
                out.append(f)
        return out

    def F(self, e: DRWElement) -> DRWElement:
        """Frobenius, computed at the current level (restrict afterwards for W_(m-1))."""
        acc = self.zero()
        for key, xi in e:
            acc = acc + self.normalize(self.frobenius_word(self.word_of(key, xi)))
        return acc

    def restrict(self, e: DRWElement, engine: "BasisEngine") -> DRWElement:
        """Restriction W_m -> W_(m') into a lower-level engine of the same kind."""
        ring = engine.ring
        return engine.element((key, _reduce(ring, xi)) for key, xi in e)

    def lift_word(self, e: DRWElement) -> list:
        """List of words whose sum is e."""
        return [self.word_of(key, xi) for key, xi in e]


def _reduce(ring, xi):
    if isinstance(ring, ModularCoeffs):
        return xi % ring.modulus
    if hasattr(ring, "reduce"):
        return ring.reduce(xi, ring.m)
    return xi


# ---------------------------------------------------------------------------
# single-term operations with the names used elsewhere


def _single(t: DRWElement):
    if len(t) != 1:
        raise WordError("expected a single basic term")
    return next(iter(t))


def d_basic(t: DRWElement) -> DRWElement:
    key, xi = _single(t)
    return t.engine.element(t.engine.d_rule(key, xi))


def v_basic(t: DRWElement) -> DRWElement:
    if t.is_zero():
        return t
    key, xi = _single(t)
    return t.engine.element([t.engine.v_rule(key, xi)])


def f_basic(t: DRWElement) -> DRWElement:
    return t.engine.F(t)


def wedge_dlog(t: DRWElement, i: int) -> DRWElement:
    return t.engine.wedge_dlog(t, i)


def word_normalize(engine: BasisEngine, word: Sequence) -> DRWElement:
    return engine.normalize(word)


# ---------------------------------------------------------------------------
# classical forms and the phantom maps
#
# A classical form is a dict (exponent tuple of Fractions, sorted index
# tuple J) -> Fraction, meaning sum c T^exponent dlog T_J.


def form_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + v
    return {k: v for k, v in out.items() if v != 0}


def form_scale(a: dict, c) -> dict:
    return {k: v * c for k, v in a.items() if v * c != 0}


def _sort_sign(idx: tuple):
    if len(set(idx)) != len(idx):
        return 0, None
    inversions = sum(1 for x, y in itertools.combinations(idx, 2) if x > y)
    return (-1) ** inversions, tuple(sorted(idx))


def form_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for (e1, j1), c1 in a.items():
        for (e2, j2), c2 in b.items():
            sign, J = _sort_sign(j1 + j2)
            if not sign:
                continue
            k = (tuple(x + y for x, y in zip(e1, e2)), J)
            out[k] = out.get(k, 0) + sign * c1 * c2
    return {k: v for k, v in out.items() if v != 0}


def forms_equal(a: dict, b: dict) -> bool:
    return not form_add(a, form_scale(b, -1))


def _monomial_form(coeff, exponent) -> dict:
    return {(tuple(Fraction(v) for v in exponent), ()): Fraction(coeff)} if coeff != 0 else {}


def _dlog_form(vector, rank) -> dict:
    zero = (Fraction(0),) * rank
    return {(zero, (i,)): Fraction(v) for i, v in enumerate(vector) if v}


def p_basic_element(weight: Sequence, blocks: Sequence, p: int) -> dict:
    """T^(k_I0 + ...) * prod_b dlog T^(k_Ib / p^ord) * prod dlog T_i over the p^(-inf) entries."""
    kp = plus_part(weight)
    rank = len(kp)
    if not is_integral(kp):
        raise WordError("p-basic elements need integral weights")
    form = _monomial_form(1, kp)
    for b in blocks[1:]:
        o = min(ord_p(kp[i], p) for i in b)
        vec = [0] * rank
        for i in b:
            vec[i] = kp[i] / Fraction(p) ** o
        form = form_mul(form, _dlog_form(vec, rank))
    for i in neg_inf_indices(weight):
        form = form_mul(form, _dlog_form([int(j == i) for j in range(rank)], rank))
    return form


def phantom(j: int, e: DRWElement) -> dict:
    """omega_j in the p-basic basis: BasicKey(p^j k, P) -> coefficient."""
    ring, p = e.ring, e.engine.p
    out: dict = {}
    scale = Fraction(p) ** j
    for key, xi in e:
        kp = plus_part(key.weight)
        scaled = tuple(v * scale for v in kp)
        if not is_integral(scaled):
            continue
        coef = Fraction(ring.ghost(xi, j))
        if not key.blocks[0] and not is_integral(kp):
            coef /= Fraction(p) ** key_u(key, p)
        if coef == 0:
            continue
        label = BasicKey(tuple(NEG_INF if v is NEG_INF else v * scale for v in key.weight), key.blocks)
        out[label] = out.get(label, 0) + coef
    return {k: v for k, v in out.items() if v != 0}


def phantom_forms(j: int, e: DRWElement) -> dict:
    """omega_j(e) expanded into T^x dlog T_J forms."""
    p = e.engine.p
    acc: dict = {}
    for label, coef in phantom(j, e).items():
        acc = form_add(acc, form_scale(p_basic_element(label.weight, label.blocks, p), coef))
    return acc


def word_phantom(j: int, word: Sequence, ring, rank: int) -> dict:
    """omega_j of a word computed factor by factor (no normalization)."""
    p = ring.p
    form = _monomial_form(1, (0,) * rank)
    for f in word:
        if isinstance(f, VFactor):
            if j < f.depth:
                return {}
            g = Fraction(ring.ghost(f.coeff, j - f.depth)) * p**f.depth
            part = _monomial_form(g, [p ** (j - f.depth) * v for v in f.exponent])
        elif isinstance(f, DFactor):
            if j < f.depth:
                return {}
            g = Fraction(ring.ghost(f.coeff, j - f.depth))
            expo = [Fraction(p) ** (j - f.depth) * v for v in f.exponent]
            part = form_mul(_monomial_form(g, expo), _dlog_form(f.exponent, rank))
        else:
            part = _dlog_form(f.vector, rank)
        form = form_mul(form, part)
        if not form:
            return {}
    return form


# ---------------------------------------------------------------------------
# text form of words and elements

_FACTOR = re.compile(
    r"""\s*(?:
        (?P<dlog>dlog)\s*\((?P<dvec>[^)]*)\)
      | (?P<fd>F)(?:\^(?P<fn>\d+))?\s*d\s*\((?P<fbody>[^()]*(?:\([^)]*\))?[^()]*)\)
      | (?P<dv>dV)(?:\^(?P<dn>\d+))?\s*\((?P<dbody>[^()]*(?:\([^)]*\))?[^()]*)\)
      | (?P<d0>d)\s*\((?P<d0body>[^()]*(?:\([^)]*\))?[^()]*)\)
      | (?P<v>V)(?:\^(?P<vn>\d+))?\s*\((?P<vbody>[^()]*(?:\([^)]*\))?[^()]*)\)
      | (?P<mono>[^*()]*(?:\([^)]*\))?)
    )\s*$""",
    re.VERBOSE,
)


def _parse_body(body: str, ring, rank: int):
    """'c X^(a,b)' or 'X^(a,b)' or 'c' -> (coeff, exponent)."""
    body = body.strip()
    coeff, expo = 1, (0,) * rank
    m = re.fullmatch(r"(?:(-?\d+)\s*\*?\s*)?X\^\(([^)]*)\)", body)
    if m:
        if m.group(1) is not None:
            coeff = int(m.group(1))
        expo = tuple(int(t) for t in m.group(2).split(","))
    elif re.fullmatch(r"-?\d+", body):
        coeff = int(body)
    else:
        raise WordError(f"cannot read factor body {body!r}")
    if len(expo) != rank:
        raise WordError(f"exponent {expo} does not have rank {rank}")
    return ring.from_int(coeff), expo


def _split_factors(text: str) -> list:
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "*" and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    return [s.strip() for s in parts if s.strip()]


def parse_word(text: str, ring, rank: int) -> list:
    """Parse factors joined by '*': ``V^n(c X^(..))``, ``dV^n(..)``,
    ``d(..)``, ``F^n d(X^(..))``, ``dlog(v1,..)`` and plain ``c X^(..)``.
    """
    word = []
    for token in _split_factors(text):
        m = _FACTOR.fullmatch(token)
        if not m:
            raise WordError(f"cannot parse factor {token!r}")
        if m.group("dlog"):
            vec = tuple(int(t) for t in m.group("dvec").split(","))
            if len(vec) != rank:
                raise WordError(f"dlog vector {vec} does not have rank {rank}")
            word.append(Dlog(vec))
        elif m.group("fd"):
            c, x = _parse_body(m.group("fbody"), ring, rank)
            word.append(DFactor(-int(m.group("fn") or 1), c, x))
        elif m.group("dv"):
            c, x = _parse_body(m.group("dbody"), ring, rank)
            word.append(DFactor(int(m.group("dn") or 1), c, x))
        elif m.group("d0"):
            c, x = _parse_body(m.group("d0body"), ring, rank)
            word.append(DFactor(0, c, x))
        elif m.group("v"):
            c, x = _parse_body(m.group("vbody"), ring, rank)
            word.append(VFactor(int(m.group("vn") or 1), c, x))
        else:
            c, x = _parse_body(m.group("mono"), ring, rank)
            word.append(VFactor(0, c, x))
    return word


def format_word(word: Sequence, ring) -> str:
    out = []
    for f in word:
        if isinstance(f, Dlog):
            out.append("dlog(" + ",".join(map(str, f.vector)) + ")")
            continue
        body = f"{ring.to_json(f.coeff)} X^(" + ",".join(map(str, f.exponent)) + ")"
        if isinstance(f, VFactor):
            out.append(f"V^{f.depth}({body})")
        elif f.depth >= 0:
            out.append(f"dV^{f.depth}({body})")
        else:
            out.append(f"F^{-f.depth} d({body})")
    return " * ".join(out)


def element_to_records(e: DRWElement) -> list:
    """Sorted JSON-ready records (weight, blocks, coefficient, precision)."""
    p, m, ring = e.engine.p, e.engine.m, e.ring
    records = []
    for key, xi in sorted(e.terms.items(), key=lambda kv: kv[0].sort_key()):
        records.append(
            {
                "weight": ["-inf" if v is NEG_INF else str(v) for v in key.weight],
                "blocks": [[i + 1 for i in b] for b in key.blocks],
                "coefficient": ring.to_json(xi),
                "precision": m - key_u(key, p),
            }
        )
    return records


def ghost_engine(p: int, level: int, rank: int) -> BasisEngine:
    return BasisEngine(GhostCoeffs(p, level), rank)


def modular_engine(p: int, m: int, rank: int) -> BasisEngine:
    return BasisEngine(ModularCoeffs(p, m), rank)


# ---------------------------------------------------------------------------
# random words (property tests and the CLI sampler)


def _nonzero_vector(rng, rank: int, bound: int) -> tuple:
    while True:
        vec = tuple(int(v) for v in rng.integers(-bound, bound + 1, rank))
        if any(vec):
            return vec


def _random_coeff(rng, ring):
    n = int(rng.integers(-4, 5))
    if rng.random() < 0.8 and n % 2 == 0:
        n += 1
    return ring.teich(n) if rng.random() < 0.2 else ring.from_int(n)


def random_word(rng, rank: int, m: int, ring, max_factors: int = 4, bound: int = 3, points=None) -> list:
    """A random product of V, dV / F^n d and dlog factors, biased towards nonzero products.

    ``rng`` is a numpy Generator.  At most ``rank`` one-form factors are used
    and coefficients are mostly odd.  When ``points`` is given, monomial
    exponents are drawn from it (e.g. the points of a monoid).
    """
    if points is not None:
        points = [tuple(int(v) for v in pt) for pt in points if any(pt)]

    def exponent():
        if points is None:
            return _nonzero_vector(rng, rank, bound)
        return points[int(rng.integers(0, len(points)))]

    n_forms = int(rng.integers(0, rank + 1))
    n_funcs = int(rng.integers(1 if n_forms == 0 else 0, max(1, max_factors - n_forms) + 1))
    word: list = []
    for _ in range(n_funcs):
        word.append(VFactor(int(rng.integers(0, m)), _random_coeff(rng, ring), exponent()))
    for _ in range(n_forms):
        if rng.random() < 0.3:
            word.append(Dlog(_nonzero_vector(rng, rank, 2)))
        else:
            word.append(DFactor(int(rng.integers(-1, m)), _random_coeff(rng, ring), exponent()))
    order = rng.permutation(len(word))
    return [word[i] for i in order]
