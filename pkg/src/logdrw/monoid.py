"""Fine saturated monoids as cone-and-lattice data, fractional points and
morphism predicates.

A monoid is ``{v in L : l_i(v) >= 0}`` for a full-rank lattice ``L`` of
``Z^r`` and integer functionals ``l_i``.  Predicates that quantify over
infinite sets are windowed searches returning a :class:`Verdict`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_decomp

__all__ = [
    "AffineMonoid",
    "FracPoint",
    "MonoidHom",
    "MonoidIdeal",
    "Verdict",
    "Splitting",
    "MonoidError",
    "TorsionCokernelError",
    "ord_p",
    "membership",
    "u_of",
    "u_of_group",
    "is_integral_hom",
    "is_p_saturated_hom",
    "star_decompose",
    "check_star_star",
    "is_J_minimal",
    "ideal_contains",
    "is_radical_ideal",
    "split_quotient",
    "facets_from_generators",
    "parse_monoid_text",
    "box_points",
]


class MonoidError(ValueError):
    """Malformed monoid data."""


class TorsionCokernelError(MonoidError):
    """The cokernel of Q^gp -> P^gp has torsion."""

    def __init__(self, divisor: int):
        super().__init__(f"cokernel has torsion: elementary divisor {divisor}")
        self.divisor = divisor


def ord_p(x, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("ord_p(0) is infinite")
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def _is_p_power(n: int, p: int) -> bool:
    while n % p == 0:
        n //= p
    return n == 1


# ---------------------------------------------------------------------------
# fractional points


@dataclass(frozen=True, order=True)
class FracPoint:
    """numerator / p^denom_exp with numerator an integer vector.

    Canonical: denom_exp == 0 or some numerator entry prime to p.
    """

    numerator: tuple
    denom_exp: int
    p: int

    def __post_init__(self):
        num, e = tuple(int(v) for v in self.numerator), int(self.denom_exp)
        while e > 0 and all(v % self.p == 0 for v in num):
            num = tuple(v // self.p for v in num)
            e -= 1
        while e < 0:
            num = tuple(v * self.p for v in num)
            e += 1
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denom_exp", e)

    @classmethod
    def from_values(cls, values: Sequence, p: int) -> "FracPoint":
        vals = [Fraction(v) for v in values]
        e = 0
        for v in vals:
            if not _is_p_power(v.denominator, p):
                raise MonoidError(f"{v} is not in Z[1/{p}]")
            e = max(e, ord_p(v.denominator, p))
        return cls(tuple(int(v * p**e) for v in vals), e, p)

    @classmethod
    def integral(cls, values: Sequence[int], p: int) -> "FracPoint":
        return cls(tuple(int(v) for v in values), 0, p)

    @property
    def rank(self) -> int:
        return len(self.numerator)

    def values(self) -> tuple:
        d = self.p**self.denom_exp
        return tuple(Fraction(v, d) for v in self.numerator)

    def is_integral(self) -> bool:
        return self.denom_exp == 0

    def scaled(self, power: int) -> "FracPoint":
        """p^power * self."""
        return FracPoint(self.numerator, self.denom_exp - power, self.p)

    def __add__(self, other: "FracPoint") -> "FracPoint":
        e = max(self.denom_exp, other.denom_exp)
        a = [v * self.p ** (e - self.denom_exp) for v in self.numerator]
        b = [v * self.p ** (e - other.denom_exp) for v in other.numerator]
        return FracPoint(tuple(x + y for x, y in zip(a, b)), e, self.p)

    def __neg__(self):
        return FracPoint(tuple(-v for v in self.numerator), self.denom_exp, self.p)

    def __sub__(self, other):
        return self + (-other)

    def __str__(self):
        vals = ["/".join(map(str, (v.numerator, v.denominator))) if v.denominator != 1 else str(v.numerator) for v in self.values()]
        return "(" + ",".join(vals) + ")"


# ---------------------------------------------------------------------------
# monoids


@dataclass(frozen=True)
class AffineMonoid:
    """P = {v in L : l_i(v) >= 0} inside Z^rank.

    ``lattice`` holds basis rows of L (identity when empty); ``facets`` are
    integer functionals in ambient coordinates.
    """

    rank: int
    facets: tuple
    lattice: tuple = ()
    generators: tuple = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "facets", tuple(tuple(int(c) for c in f) for f in self.facets))
        object.__setattr__(self, "lattice", tuple(tuple(int(c) for c in row) for row in self.lattice))
        object.__setattr__(self, "generators", tuple(tuple(int(c) for c in g) for g in self.generators))
        for f in self.facets:
            if len(f) != self.rank:
                raise MonoidError("facet length differs from rank")
        if self.lattice:
            if len(self.lattice) != self.rank or Matrix(self.lattice).det() == 0:
                raise MonoidError("lattice basis must be square and full rank")
        for g in self.generators:
            if not membership(self, g):
                raise MonoidError(f"generator {g} not in the monoid")

    @classmethod
    def free(cls, rank: int, name: str = "") -> "AffineMonoid":
        facets = [tuple(1 if i == j else 0 for j in range(rank)) for i in range(rank)]
        gens = facets
        return cls(rank, tuple(facets), (), tuple(gens), name or f"N^{rank}")

    @classmethod
    def from_generators(cls, gens: Sequence[Sequence[int]], name: str = "") -> "AffineMonoid":
        gens = [tuple(int(c) for c in g) for g in gens]
        return cls(len(gens[0]), tuple(facets_from_generators(gens)), (), tuple(gens), name)

    def basis_matrix(self) -> Matrix:
        if not self.lattice:
            return Matrix.eye(self.rank)
        return Matrix(self.lattice).T

    def lattice_coords(self, v: Sequence) -> tuple:
        """Coordinates of an ambient (rational) vector in the lattice basis."""
        if not self.lattice:
            return tuple(Fraction(x) for x in v)
        sol = self.basis_matrix().LUsolve(Matrix([Fraction(x) for x in v]))
        return tuple(Fraction(int(c.p), int(c.q)) for c in sol)

    def in_cone(self, v: Sequence) -> bool:
        return all(sum(Fraction(a) * b for a, b in zip(v, f)) >= 0 for f in self.facets)

    def in_lattice(self, v: Sequence) -> bool:
        return all(c.denominator == 1 for c in self.lattice_coords(v))

    def standardized(self) -> "AffineMonoid":
        """The same monoid written in lattice coordinates (so that P^gp = Z^rank)."""
        if not self.lattice:
            return self
        B = self.basis_matrix()
        facets = [tuple(int(c) for c in (Matrix([f]) * B)) for f in self.facets]
        gens = [tuple(int(c) for c in self.lattice_coords(g)) for g in self.generators]
        return AffineMonoid(self.rank, tuple(facets), (), tuple(gens), self.name)

    def points(self, box: int) -> list:
        """Lattice points of P with ambient coordinates in [-box, box]."""
        return [v for v in box_points(self.rank, box) if membership(self, v)]

    def hilbert_basis(self, box: int) -> list:
        """Irreducible elements among the points in the box (windowed)."""
        pts = [v for v in self.points(box) if any(v)]
        pset = set(pts)
        irreducible = []
        for v in pts:
            if not any(tuple(a - b for a, b in zip(v, w)) in pset for w in pts if w != v):
                irreducible.append(v)
        return sorted(irreducible)

    def __str__(self):
        return self.name or f"monoid(rank {self.rank}, facets {list(self.facets)})"


def box_points(rank: int, box: int, low: int | None = None) -> Iterable[tuple]:
    low = -box if low is None else low
    return itertools.product(range(low, box + 1), repeat=rank)


def membership(P: AffineMonoid, v: Sequence) -> bool:
    """v in P, i.e. v in L and every facet functional is nonnegative."""
    return P.in_cone(v) and P.in_lattice(v)


def u_of(P: AffineMonoid, x: FracPoint) -> int | None:
    """Least n >= 0 with p^n x in P, or None when x is not in P[1/p]."""
    if not P.in_cone(x.numerator):
        return None
    return u_of_group(P, x)


def u_of_group(P: AffineMonoid, x: FracPoint) -> int | None:
    """Least n >= 0 with p^n x in P^gp = L, or None if no such n exists."""
    p = x.p
    n = 0
    for c in P.lattice_coords(x.values()):
        if c == 0:
            continue
        if not _is_p_power(c.denominator, p):
            return None
        n = max(n, -ord_p(c, p))
    return n


# ---------------------------------------------------------------------------
# morphisms and ideals


@dataclass(frozen=True)
class Verdict:
    """Outcome of a windowed semi-decision procedure."""

    status: str  # "holds-on-window" | "fails" | "inconclusive"
    witness: object = None
    note: str = ""

    @property
    def holds(self) -> bool:
        return self.status == "holds-on-window"

    def as_dict(self) -> dict:
        out = {"status": self.status}
        if self.witness is not None:
            out["witness"] = _jsonable(self.witness)
        if self.note:
            out["note"] = self.note
        return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


@dataclass(frozen=True)
class MonoidHom:
    """theta: Q -> P given by an integer matrix (rank P rows, rank Q columns)."""

    source: AffineMonoid
    target: AffineMonoid
    matrix: tuple

    def __post_init__(self):
        mat = tuple(tuple(int(c) for c in row) for row in self.matrix)
        object.__setattr__(self, "matrix", mat)
        if len(mat) != self.target.rank or any(len(r) != self.source.rank for r in mat):
            raise MonoidError("hom matrix must be (rank P) x (rank Q)")
        gens = self.source.generators or tuple(self.source.hilbert_basis(3))
        for g in gens:
            if not membership(self.target, self.apply(g)):
                raise MonoidError(f"image of {g} is not in the target monoid")

    def apply(self, q: Sequence) -> tuple:
        return tuple(sum(a * Fraction(b) for a, b in zip(row, q)) for row in self.matrix)

    def apply_int(self, q: Sequence[int]) -> tuple:
        return tuple(int(sum(a * b for a, b in zip(row, q))) for row in self.matrix)


@dataclass(frozen=True)
class MonoidIdeal:
    """The ideal generated by finitely many elements of Q."""

    monoid: AffineMonoid
    generators: tuple = field(default=())

    def __post_init__(self):
        gens = tuple(tuple(int(c) for c in g) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        for g in gens:
            if not membership(self.monoid, g):
                raise MonoidError(f"ideal generator {g} not in the monoid")


def ideal_contains(J: MonoidIdeal, x: Sequence[int]) -> bool:
    return any(membership(J.monoid, tuple(a - b for a, b in zip(x, g))) for g in J.generators)


def is_integral_hom(f: MonoidHom, window: int) -> Verdict:
    """Windowed check of integrality: q1 + r1 = q2 + r2 implies a common refinement."""
    Q, P = f.source, f.target
    qs = Q.points(window)
    rs = P.points(window)
    for q1, q2 in itertools.product(qs, qs):
        if q1 == q2:
            continue
        shift = tuple(a - b for a, b in zip(f.apply_int(q1), f.apply_int(q2)))
        for r1 in rs:
            r2 = tuple(a + b for a, b in zip(r1, shift))
            if not membership(P, r2):
                continue
            ok = False
            for q3 in qs:
                q4 = tuple(a + b - c for a, b, c in zip(q1, q3, q2))
                r = tuple(a - b for a, b in zip(r1, f.apply_int(q3)))
                if membership(Q, q4) and membership(P, r):
                    ok = True
                    break
            if not ok:
                return Verdict("fails", {"q1": q1, "q2": q2, "r1": r1, "r2": r2}, "no common refinement in window")
    return Verdict("holds-on-window", note=f"window {window}")


def _interior_direction(M: AffineMonoid) -> tuple:
    pts = [v for v in M.points(3) if any(v)]
    best = max(pts, key=lambda v: min(sum(a * b for a, b in zip(v, fc)) for fc in M.facets) if M.facets else 0)
    return best


def _lift_difference(M: AffineMonoid, d: Sequence[int], reach: int) -> tuple | None:
    """Find (a, b) in M x M with a - b = d."""
    direction = _interior_direction(M) if M.facets else tuple(0 for _ in d)
    for t in range(reach + 1):
        b = tuple(t * c for c in direction)
        a = tuple(x + y for x, y in zip(d, b))
        if membership(M, a) and membership(M, b):
            return a, b
    return None


def is_p_saturated_hom(f: MonoidHom, p: int, window: int) -> Verdict:
    """Windowed check of integrality and of the p-saturation lifting condition.

    For every d = r1 - r2 in the window and e = q1 - q2 with p d + e in P, a
    correction x in Q^gp with d + x in P and e - p x in Q is searched for.
    """
    integral = is_integral_hom(f, min(window, 4))
    if integral.status == "fails":
        return Verdict("fails", {"integrality": integral.witness}, "not integral")
    Q, P = f.source, f.target
    ds = list(box_points(P.rank, window))
    es = list(box_points(Q.rank, window))
    xs = list(box_points(Q.rank, 2 * window + 2))
    for d in ds:
        if not P.in_lattice(d):
            continue
        for e in es:
            if not Q.in_lattice(e):
                continue
            target = tuple(p * a + b for a, b in zip(d, f.apply_int(e)))
            if not membership(P, target):
                continue
            found = False
            for x in xs:
                if membership(P, tuple(a + b for a, b in zip(d, f.apply_int(x)))) and membership(
                    Q, tuple(a - p * b for a, b in zip(e, x))
                ):
                    found = True
                    break
            if not found:
                rr = _lift_difference(P, d, 4 * window + 8)
                qq = _lift_difference(Q, e, 4 * window + 8)
                witness = {"d": d, "e": e}
                if rr and qq:
                    witness.update({"r1": rr[0], "r2": rr[1], "q1": qq[0], "q2": qq[1]})
                return Verdict("fails", witness, "no correction element in search range")
    return Verdict("holds-on-window", note=f"window {window}")


def star_decompose(f: MonoidHom, x: Sequence[int], n: int, p: int, bound: int | None = None):
    """Search r in P, q in Q with x = p^n r + q; None if nothing in the bound."""
    x = tuple(int(v) for v in x)
    if n == 0:
        return x, tuple(0 for _ in range(f.source.rank))
    Q, P = f.source, f.target
    bound = bound if bound is not None else max(abs(v) for v in x) + 2
    for q in Q.points(bound):
        rest = tuple(a - b for a, b in zip(x, f.apply_int(q)))
        if any(v % p**n for v in rest):
            continue
        r = tuple(v // p**n for v in rest)
        if membership(P, r):
            return r, q
    return None


def check_star_star(f: MonoidHom, p: int, window: int, max_power: int = 3, split: "Splitting | None" = None) -> Verdict:
    """Windowed (**): x in P with image in p^n(P^gp/Q^gp) decomposes as p^n r + q."""
    split = split or split_quotient(f)
    for x in f.target.points(window):
        quotient = split.quotient_part(x)
        for n in range(1, max_power + 1):
            if any(Fraction(v) % p**n for v in quotient):
                break
            if star_decompose(f, x, n, p, bound=window + 2) is None:
                return Verdict("fails", {"x": x, "n": n}, "no decomposition x = p^n r + q")
    return Verdict("holds-on-window", note=f"window {window}, powers <= {max_power}")


def is_J_minimal(P: AffineMonoid, f: MonoidHom, J: MonoidIdeal, x: FracPoint) -> bool:
    """x (in P[1/p]) cannot be written r + q with r in P and q in J."""
    u = u_of(P, x)
    if u is None:
        raise MonoidError(f"{x} is not in P[1/p]")
    y = x.scaled(u)
    return not any(membership(P, tuple(a - b for a, b in zip(y.numerator, f.apply_int(g)))) for g in J.generators)


def is_radical_ideal(Q: AffineMonoid, J: MonoidIdeal, window: int) -> Verdict:
    """Windowed radicality: n x in J implies x in J, for x in the window and n <= window."""
    for x in Q.points(window):
        if ideal_contains(J, x):
            continue
        for n in range(2, window + 1):
            if ideal_contains(J, tuple(n * v for v in x)):
                return Verdict("fails", {"x": x, "n": n}, "n x in J but x not in J")
    return Verdict("holds-on-window", note=f"window {window}")


# ---------------------------------------------------------------------------
# splitting P^gp = Q^gp + M


@dataclass(frozen=True)
class Splitting:
    """Unimodular change of coordinates y = U v on P^gp with Q^gp = first q coordinates.

    ``base_basis`` maps split Q-coordinates back to Q^gp coordinates.
    """

    U: tuple
    U_inv: tuple
    base_basis: tuple
    q: int
    s: int

    def apply(self, v: Sequence) -> tuple:
        return tuple(sum(a * Fraction(b) for a, b in zip(row, v)) for row in self.U)

    def unapply(self, y: Sequence) -> tuple:
        return tuple(sum(a * Fraction(b) for a, b in zip(row, y)) for row in self.U_inv)

    def base_part(self, v: Sequence) -> tuple:
        return self.apply(v)[: self.q]

    def quotient_part(self, v: Sequence) -> tuple:
        return self.apply(v)[self.q :]

    def base_to_source(self, y_base: Sequence) -> tuple:
        """Split Q-coordinates -> coordinates of Q^gp."""
        return tuple(sum(a * Fraction(b) for a, b in zip(row, y_base)) for row in self.base_basis)


def split_quotient(f: MonoidHom) -> Splitting:
    """P^gp = Q^gp + M via Smith normal form of the hom matrix."""
    H = Matrix(f.matrix)
    r, q = H.shape
    if q == 0:
        eye = tuple(tuple(int(i == j) for j in range(r)) for i in range(r))
        return Splitting(eye, eye, (), 0, r)
    D, S, T = smith_normal_decomp(H, domain=ZZ)
    for i in range(q):
        if abs(D[i, i]) != 1:
            raise TorsionCokernelError(int(abs(D[i, i])) if D[i, i] != 0 else 0)
    # D = S H T with D = [diag(+-1); 0]; fold the signs into T
    signs = Matrix.diag(*[int(D[i, i]) for i in range(q)])
    T = T * signs
    S_inv = S.inv()
    U = tuple(tuple(int(c) for c in S.row(i)) for i in range(r))
    U_inv = tuple(tuple(int(c) for c in S_inv.row(i)) for i in range(r))
    base_basis = tuple(tuple(int(c) for c in T.row(i)) for i in range(q))
    return Splitting(U, U_inv, base_basis, q, r - q)


# ---------------------------------------------------------------------------
# generators -> facets and the text format


def _primitive(v: Sequence[int]) -> tuple:
    from math import gcd

    g = 0
    for c in v:
        g = gcd(g, int(c))
    return tuple(int(c) // g for c in v) if g else tuple(int(c) for c in v)


def facets_from_generators(gens: Sequence[Sequence[int]]) -> list:
    """Facet normals of the cone spanned by gens (full-dimensional cones)."""
    r = len(gens[0])
    if r == 1:
        signs = {1 if g[0] > 0 else -1 for g in gens if g[0] != 0}
        return [(s,) for s in sorted(signs)] if len(signs) == 1 else []
    facets = set()
    for subset in itertools.combinations(gens, r - 1):
        null = Matrix(subset).nullspace()
        if len(null) != 1:
            continue
        vec = null[0]
        den = 1
        for c in vec:
            den = den * int(c.q) // __import__("math").gcd(den, int(c.q))
        normal = _primitive([int(c * den) for c in vec])
        vals = [sum(a * b for a, b in zip(normal, g)) for g in gens]
        if all(v >= 0 for v in vals):
            facets.add(normal)
        elif all(v <= 0 for v in vals):
            facets.add(tuple(-c for c in normal))
    return sorted(facets)


def _parse_rows(text: str, lineno: int) -> list:
    rows = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            rows.append(tuple(int(t) for t in chunk.replace(",", " ").split()))
        except ValueError as exc:
            raise MonoidError(f"line {lineno}: expected integers, got {chunk!r}") from exc
    return rows


def parse_monoid_text(text: str, name: str = "") -> dict:
    """Parse the line-oriented monoid format.

    Recognized lines: ``rank r``, ``lattice <rows>``, ``facet <coeffs>``,
    ``generator <coeffs>``, ``hom <rows>``, ``ideal <generators>``; rows and
    generators are separated by ``;``.  Returns a dict with keys ``monoid``
    (or None), ``hom`` (rows) and ``ideal`` (generators).
    """
    rank = None
    lattice, facets, gens, hom, ideal = [], [], [], [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word, _, rest = line.partition(" ")
        if word == "rank":
            try:
                rank = int(rest)
            except ValueError as exc:
                raise MonoidError(f"line {lineno}: bad rank {rest!r}") from exc
        elif word == "lattice":
            lattice += _parse_rows(rest, lineno)
        elif word == "facet":
            facets += _parse_rows(rest, lineno)
        elif word == "generator":
            gens += _parse_rows(rest, lineno)
        elif word == "hom":
            hom += _parse_rows(rest, lineno)
        elif word == "ideal":
            ideal += _parse_rows(rest, lineno)
        else:
            raise MonoidError(f"line {lineno}: unknown keyword {word!r}")
    monoid = None
    if rank is not None:
        if gens and not facets:
            facets = facets_from_generators(gens)
        try:
            monoid = AffineMonoid(rank, tuple(facets), tuple(lattice), tuple(gens), name)
        except MonoidError as exc:
            raise MonoidError(f"{name or 'input'}: {exc}") from exc
    elif facets or gens or lattice:
        raise MonoidError("missing 'rank' line")
    return {"monoid": monoid, "hom": hom, "ideal": ideal}
