"""Truncated p-typical Witt vectors over small base rings.

Coordinates of sums, products and Frobenius images are computed from the
universal integer polynomials, obtained once per ``(p, m)`` by inverting the
ghost map over a polynomial ring with integer coefficients.  Because those
polynomials have integer coefficients they can be evaluated directly in any
of the supported base rings.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Iterable, Sequence

from sympy import ZZ
from sympy.polys.rings import ring as sparse_ring

__all__ = [
    "Integers",
    "PrimeField",
    "TruncatedIntegers",
    "MonoidAlgebra",
    "MonoidPoly",
    "WittVector",
    "witt_add",
    "witt_neg",
    "witt_sub",
    "witt_mul",
    "ghost",
    "teichmuller",
    "frobenius_W",
    "verschiebung_W",
    "witt_to_int",
    "int_to_witt",
    "teichmuller_int",
    "ghost_to_witt",
    "WittError",
    "from_integer",
    "random_witt",
    "iter_fp_vectors",
    "universal_polynomials",
]


class WittError(ValueError):
    """Raised on contract violations (mismatched lengths or base rings)."""


# ---------------------------------------------------------------------------
# base rings


@dataclass(frozen=True)
class Integers:
    """The integers; the p-torsion-free lift used by the oracles."""

    def zero(self):
        return 0

    def one(self):
        return 1

    def normalize(self, a):
        return int(a)

    def from_int(self, n: int):
        return int(n)

    def is_p_torsion_free(self) -> bool:
        return True

    def __str__(self):
        return "ZZ"


@dataclass(frozen=True)
class TruncatedIntegers:
    """Z/p^N with elements stored as integers in [0, p^N)."""

    p: int
    N: int = 1

    def __post_init__(self):
        if self.N < 1:
            raise WittError("N must be positive")

    @property
    def modulus(self) -> int:
        return self.p**self.N

    def zero(self):
        return 0

    def one(self):
        return 1 % self.modulus

    def normalize(self, a):
        return int(a) % self.modulus

    def from_int(self, n: int):
        return int(n) % self.modulus

    def is_p_torsion_free(self) -> bool:
        return False

    def __str__(self):
        return f"Z/{self.p}^{self.N}"


def PrimeField(p: int) -> TruncatedIntegers:
    """F_p as the special case N = 1 of Z/p^N."""
    return TruncatedIntegers(p, 1)


class MonoidPoly:
    """Finite-support element of a monoid algebra: exponent tuple -> integer.

    Coefficients are reduced modulo ``modulus`` when it is not None.
    """

    __slots__ = ("terms", "modulus", "_hash")

    def __init__(self, terms: dict, modulus: int | None = None):
        if modulus is not None:
            terms = {e: c % modulus for e, c in terms.items()}
        self.terms = {e: c for e, c in terms.items() if c != 0}
        self.modulus = modulus
        self._hash = None

    def _coerce(self, other) -> "MonoidPoly":
        if isinstance(other, MonoidPoly):
            return other
        if isinstance(other, int):
            if not self.terms and other == 0:
                return MonoidPoly({}, self.modulus)
            rank = len(next(iter(self.terms))) if self.terms else None
            if rank is None:
                raise WittError("cannot infer rank for constant coercion")
            return MonoidPoly({(0,) * rank: other}, self.modulus)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return MonoidPoly(out, self.modulus)

    __radd__ = __add__

    def __neg__(self):
        return MonoidPoly({e: -c for e, c in self.terms.items()}, self.modulus)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, int):
            return MonoidPoly({e: c * other for e, c in self.terms.items()}, self.modulus)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MonoidPoly(out, self.modulus)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise WittError("negative power")
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        if result is None:
            raise WittError("zeroth power needs a rank; use MonoidAlgebra.one()")
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            other = self._coerce(other) if self.terms else MonoidPoly({}, self.modulus)
        return isinstance(other, MonoidPoly) and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = [f"{c}*T^{list(e)}" for e, c in sorted(self.terms.items())]
        return " + ".join(parts)


@dataclass(frozen=True)
class MonoidAlgebra:
    """Monoid algebra base[P] with P a submonoid of Z^rank.

    Only the rank is needed for arithmetic; ``monoid`` (optional) records
    which monoid the supports are meant to lie in.
    """

    base: object
    rank: int
    monoid: object = None

    @property
    def modulus(self) -> int | None:
        return getattr(self.base, "modulus", None)

    def zero(self):
        return MonoidPoly({}, self.modulus)

    def one(self):
        return MonoidPoly({(0,) * self.rank: 1}, self.modulus)

    def monomial(self, exponent: Sequence[int], coeff: int = 1) -> MonoidPoly:
        return MonoidPoly({tuple(int(e) for e in exponent): coeff}, self.modulus)

    def normalize(self, a):
        if isinstance(a, int):
            return MonoidPoly({(0,) * self.rank: a}, self.modulus)
        return MonoidPoly(a.terms, self.modulus)

    def from_int(self, n: int):
        return self.normalize(int(n))

    def is_p_torsion_free(self) -> bool:
        return self.modulus is None

    def __str__(self):
        return f"{self.base}[P(rank {self.rank})]"


# ---------------------------------------------------------------------------
# universal polynomials


class _PolyCache:
    """Lazily built universal sum/product/Frobenius polynomials per (p, m)."""

    def __init__(self):
        self._lock = threading.Lock()
        self._table: dict = {}

    def get(self, p: int, m: int) -> dict:
        key = (p, m)
        with self._lock:
            hit = self._table.get(key)
            if hit is None:
                hit = _build_polynomials(p, m)
                self._table[key] = hit
            return hit


def _compile(poly, names: Sequence[str]) -> Callable:
    terms = []
    for monom, coeff in poly.terms():
        factors = [f"{names[i]}**{e}" if e > 1 else names[i] for i, e in enumerate(monom) if e]
        body = "*".join(factors) if factors else "1"
        terms.append(f"({int(coeff)})*{body}")
    src = " + ".join(terms) if terms else "0"
    return eval(f"lambda {', '.join(names)}: {src}", {})  # noqa: S307 - generated arithmetic only


def _build_polynomials(p: int, m: int) -> dict:
    # one extra coordinate so that Frobenius W_{m+1} -> W_m is available
    names_x = [f"x{i}" for i in range(m + 1)]
    names_y = [f"y{i}" for i in range(m + 1)]
    R, *gens = sparse_ring(",".join(names_x + names_y), ZZ)
    X, Y = gens[: m + 1], gens[m + 1 :]

    def w(v, n):
        return sum((p**i * v[i] ** (p ** (n - i)) for i in range(n + 1)), R.zero)

    sums, prods, frobs = [], [], []
    for n in range(m):
        s = w(X, n) + w(Y, n) - sum((p**i * sums[i] ** (p ** (n - i)) for i in range(n)), R.zero)
        q = w(X, n) * w(Y, n) - sum((p**i * prods[i] ** (p ** (n - i)) for i in range(n)), R.zero)
        f = w(X, n + 1) - sum((p**i * frobs[i] ** (p ** (n - i)) for i in range(n)), R.zero)
        sums.append(s.exquo(R(p**n)))
        prods.append(q.exquo(R(p**n)))
        frobs.append(f.exquo(R(p**n)))
    names = names_x + names_y
    return {
        "sum": [_compile(s, names) for s in sums],
        "prod": [_compile(q, names) for q in prods],
        "frob": [_compile(f, names) for f in frobs],
        "raw_sum": sums,
        "raw_prod": prods,
        "raw_frob": frobs,
    }


_CACHE = _PolyCache()


def universal_polynomials(p: int, m: int) -> dict:
    """Return the cached polynomial table for (p, m) (sympy sparse polys under ``raw_*``)."""
    return _CACHE.get(p, m)


# ---------------------------------------------------------------------------
# Witt vectors


@dataclass(frozen=True)
class WittVector:
    """Length-m Witt vector with coordinates in ``base``."""

    p: int
    base: object
    coords: tuple

    @property
    def length(self) -> int:
        return len(self.coords)

    def __add__(self, other):
        return witt_add(self, other)

    def __sub__(self, other):
        return witt_sub(self, other)

    def __neg__(self):
        return witt_neg(self)

    def __mul__(self, other):
        return witt_mul(self, other)

    def is_zero(self) -> bool:
        return all(_is_zero(c) for c in self.coords)


def _is_zero(c) -> bool:
    if isinstance(c, MonoidPoly):
        return c.is_zero()
    return c == 0


def _check(a: WittVector, b: WittVector):
    if a.length != b.length or a.base != b.base or a.p != b.p:
        raise WittError("Witt vectors of different length, prime or base ring")


def _pad(coords: Sequence, m: int, zero) -> list:
    return list(coords) + [zero] * (m + 1 - len(coords))


def _apply(kind: str, a: WittVector, b: WittVector | None = None) -> tuple:
    m = a.length
    table = universal_polynomials(a.p, m)[kind]
    zero = a.base.zero()
    xs = _pad(a.coords, m, zero)
    ys = _pad(b.coords if b is not None else (), m, zero)
    return tuple(a.base.normalize(f(*xs, *ys)) for f in table)


def witt_add(a: WittVector, b: WittVector) -> WittVector:
    _check(a, b)
    return WittVector(a.p, a.base, _apply("sum", a, b))


def witt_mul(a: WittVector, b: WittVector) -> WittVector:
    _check(a, b)
    return WittVector(a.p, a.base, _apply("prod", a, b))


def witt_neg(a: WittVector) -> WittVector:
    # -1 has ghost components (-1, -1, ...); multiply by it
    minus_one = from_integer(-1, a.p, a.base, a.length)
    return witt_mul(minus_one, a)


def witt_sub(a: WittVector, b: WittVector) -> WittVector:
    return witt_add(a, witt_neg(b))


def ghost(a: WittVector) -> tuple:
    """Ghost components w_j = sum_{i<=j} p^i a_i^(p^(j-i))."""
    p = a.p
    out = []
    for j in range(a.length):
        terms = [p**i * a.coords[i] ** (p ** (j - i)) for i in range(j + 1)]
        out.append(a.base.normalize(reduce(lambda s, t: s + t, terms)))
    return tuple(out)


def ghost_to_witt(ghosts: Sequence, p: int):
    """Invert the ghost map over Q: coordinates as Fractions (exact division)."""
    from fractions import Fraction

    coords = []
    for n, w in enumerate(ghosts):
        acc = Fraction(w) - sum(Fraction(p**i) * coords[i] ** (p ** (n - i)) for i in range(n))
        coords.append(acc / p**n)
    return coords


def teichmuller(a, m: int, p: int, base) -> WittVector:
    zero = base.zero()
    return WittVector(p, base, (base.normalize(a),) + (zero,) * (m - 1))


def from_integer(n: int, p: int, base, m: int) -> WittVector:
    """The image of the integer n in W_m(base)."""
    ghosts = [n] * m
    coords = ghost_to_witt(ghosts, p)
    return WittVector(p, base, tuple(base.normalize(base.from_int(int(c))) for c in coords))


def frobenius_W(a: WittVector) -> WittVector:
    """F: W_{m+1} -> W_m, characterized by ghost(F a)_j = ghost(a)_{j+1}."""
    m = a.length - 1
    if m < 1:
        raise WittError("Frobenius needs length at least 2")
    table = universal_polynomials(a.p, m)["frob"]
    zero = a.base.zero()
    xs = list(a.coords)
    ys = [zero] * (m + 1)
    return WittVector(a.p, a.base, tuple(a.base.normalize(f(*xs, *ys)) for f in table))


def verschiebung_W(a: WittVector) -> WittVector:
    """V: W_m -> W_{m+1}, shift right with a leading zero."""
    return WittVector(a.p, a.base, (a.base.zero(),) + a.coords)


# ---------------------------------------------------------------------------
# W_m(F_p) = Z/p^m


def teichmuller_int(a: int, p: int, m: int) -> int:
    """Teichmüller representative of a mod p inside Z/p^m."""
    mod = p**m
    return pow(a % p, p ** (m - 1), mod) if a % p else 0


def witt_to_int(w: WittVector) -> int:
    """W_m(F_p) -> Z/p^m, (a_0, a_1, ...) -> sum p^i [a_i]."""
    p, m = w.p, w.length
    return sum(p**i * teichmuller_int(int(c), p, m) for i, c in enumerate(w.coords)) % p**m


def int_to_witt(x: int, p: int, m: int) -> WittVector:
    """Inverse of :func:`witt_to_int`: Teichmüller digit expansion."""
    mod = p**m
    x %= mod
    coords = []
    for i in range(m):
        digit = (x // p**i) % p
        coords.append(digit)
        x = (x - p**i * teichmuller_int(digit, p, m)) % mod
    return WittVector(p, PrimeField(p), tuple(coords))


def random_witt(rng, p: int, m: int, base, bound: int = 5) -> WittVector:
    """Random vector with coordinates drawn from small integers (or monomials)."""
    if isinstance(base, MonoidAlgebra):
        coords = []
        for _ in range(m):
            terms = {}
            for _ in range(int(rng.integers(0, 3))):
                e = tuple(int(v) for v in rng.integers(0, 3, size=base.rank))
                terms[e] = int(rng.integers(-bound, bound + 1))
            coords.append(MonoidPoly(terms, base.modulus))
        return WittVector(p, base, tuple(coords))
    return WittVector(p, base, tuple(base.normalize(int(rng.integers(-bound, bound + 1))) for _ in range(m)))


def iter_fp_vectors(p: int, m: int) -> Iterable[WittVector]:
    """Every element of W_m(F_p)."""
    F = PrimeField(p)
    for x in range(p**m):
        digits = tuple((x // p**i) % p for i in range(m))
        yield WittVector(p, F, digits)
