"""Coefficient rings for the normal-form engine.

Every ring exposes the same small protocol: ``zero, one, from_int, teich,
add, neg, mul, scale, div_unit, V, F, Vinv, is_zero, key``.  ``V`` and
``F`` are the Witt operators on the constant ring, ``Vinv(a, u)`` returns
some ``b`` with ``V^u b == a`` (a must lie in the image of ``V^u``).

* :class:`ModularCoeffs` is W_m(F_p) = Z/p^m.
* :class:`GhostCoeffs` is W(Z_(p)) seen through lazily evaluated ghost
  components; it is torsion free, which makes it the phantom oracle.
* :class:`MonoidWittCoeffs` is the degree-0 part W_m(F_p[Z^q]) written in
  the perfection model ``V^u(eta X^(p^u y)) = p^u eta [T^y]``.
"""

from __future__ import annotations

from fractions import Fraction

from .witt import ghost_to_witt, teichmuller_int

__all__ = ["ModularCoeffs", "GhostCoeffs", "GhostVector", "MonoidWittCoeffs", "CoefficientError"]


class CoefficientError(ArithmeticError):
    """Division that the coefficient ring cannot perform."""


class ModularCoeffs:
    """Z/p^m with F = identity and V = multiplication by p."""

    def __init__(self, p: int, m: int):
        if m < 1:
            raise ValueError("level must be at least 1")
        self.p, self.m = p, m
        self.modulus = p**m

    def __repr__(self):
        return f"ModularCoeffs(p={self.p}, m={self.m})"

    def __eq__(self, other):
        return isinstance(other, ModularCoeffs) and (self.p, self.m) == (other.p, other.m)

    def __hash__(self):
        return hash(("mod", self.p, self.m))

    def zero(self):
        return 0

    def one(self):
        return 1 % self.modulus

    def from_int(self, n: int):
        return int(n) % self.modulus

    def teich(self, n: int):
        return teichmuller_int(int(n), self.p, self.m)

    def add(self, a, b):
        return (a + b) % self.modulus

    def neg(self, a):
        return (-a) % self.modulus

    def mul(self, a, b):
        return (a * b) % self.modulus

    def scale(self, a, n: int):
        return (a * int(n)) % self.modulus

    def div_unit(self, a, n: int):
        return (a * pow(int(n), -1, self.modulus)) % self.modulus

    def V(self, a):
        return (a * self.p) % self.modulus

    def F(self, a):
        return a

    def Vinv(self, a, u: int):
        if u == 0:
            return a
        if a % self.p**u:
            raise CoefficientError(f"{a} is not divisible by p^{u}")
        return a // self.p**u

    def is_zero(self, a) -> bool:
        return a % self.modulus == 0

    def key(self, a):
        return a % self.modulus

    def ghost(self, a, j: int):
        # integer lift of the residue, viewed in W(Z_(p)) through Z
        return Fraction(a % self.modulus)

    def reduce(self, a, level: int):
        return a % self.p**level

    def to_json(self, a):
        return int(a % self.modulus)


class GhostVector:
    """An element of W(Z_(p)) given by its ghost components, evaluated lazily."""

    __slots__ = ("_fn", "_cache")

    def __init__(self, fn):
        self._fn = fn
        self._cache = {}

    def __getitem__(self, j: int) -> Fraction:
        hit = self._cache.get(j)
        if hit is None:
            hit = self._cache[j] = Fraction(self._fn(j))
        return hit


class GhostCoeffs:
    """W(Z_(p)) with equality tested on the first ``level`` ghost components."""

    def __init__(self, p: int, level: int):
        self.p, self.m = p, level

    def __repr__(self):
        return f"GhostCoeffs(p={self.p}, level={self.m})"

    def zero(self):
        return GhostVector(lambda j: 0)

    def one(self):
        return GhostVector(lambda j: 1)

    def from_int(self, n: int):
        n = int(n)
        return GhostVector(lambda j: n)

    def teich(self, n: int):
        n, p = int(n), self.p
        return GhostVector(lambda j: Fraction(n) ** (p**j))

    def from_ghosts(self, values):
        values = tuple(Fraction(v) for v in values)
        return GhostVector(lambda j: values[j])

    def add(self, a, b):
        return GhostVector(lambda j: a[j] + b[j])

    def neg(self, a):
        return GhostVector(lambda j: -a[j])

    def mul(self, a, b):
        return GhostVector(lambda j: a[j] * b[j])

    def scale(self, a, n: int):
        n = int(n)
        return GhostVector(lambda j: n * a[j])

    def div_unit(self, a, n: int):
        n = int(n)
        if n % self.p == 0:
            raise CoefficientError(f"{n} is not a p-adic unit")
        return GhostVector(lambda j: a[j] / n)

    def V(self, a):
        p = self.p
        return GhostVector(lambda j: 0 if j == 0 else p * a[j - 1])

    def F(self, a):
        return GhostVector(lambda j: a[j + 1])

    def Vinv(self, a, u: int):
        if u == 0:
            return a
        p = self.p
        return GhostVector(lambda j: a[j + u] / p**u)

    def is_zero(self, a) -> bool:
        return all(a[j] == 0 for j in range(self.m))

    def key(self, a):
        return tuple(a[j] for j in range(self.m))

    def ghost(self, a, j: int):
        return a[j]

    def witt_coordinates(self, a, length: int | None = None) -> list:
        length = self.m if length is None else length
        return ghost_to_witt([a[j] for j in range(length)], self.p)

    def to_modular(self, a, level: int | None = None) -> int:
        """Image in W_level(F_p) = Z/p^level: reduce Witt coordinates mod p."""
        level = self.m if level is None else level
        p = self.p
        total = 0
        for i, c in enumerate(self.witt_coordinates(a, level)):
            if c.denominator % p == 0:
                raise CoefficientError(f"Witt coordinate {c} is not p-integral")
            digit = c.numerator * pow(c.denominator, -1, p) % p
            total += p**i * teichmuller_int(digit, p, level)
        return total % p**level

    def to_json(self, a):
        return [str(a[j]) for j in range(self.m)]


class MonoidWittCoeffs:
    """Degree-0 W_m(F_p[Z^q]) as finite maps y -> xi (y in Z[1/p]^q, xi mod p^m).

    The entry (y, xi) stands for ``V^u(eta X^(p^u y))`` with ``xi = p^u eta``;
    ``p^u(y)`` always divides xi.
    """

    def __init__(self, p: int, m: int, rank: int):
        self.p, self.m, self.rank = p, m, rank
        self.modulus = p**m

    def __repr__(self):
        return f"MonoidWittCoeffs(p={self.p}, m={self.m}, rank={self.rank})"

    def _clean(self, terms: dict) -> dict:
        return {y: c % self.modulus for y, c in terms.items() if c % self.modulus}

    def u_of(self, y) -> int:
        u = 0
        for v in y:
            e = 0
            den = Fraction(v).denominator
            while den % self.p == 0:
                den //= self.p
                e += 1
            u = max(u, e)
        return u

    def monomial(self, y, xi: int) -> dict:
        y = tuple(Fraction(v) for v in y)
        return self._clean({y: xi})

    def zero(self):
        return {}

    def one(self):
        return self._clean({(Fraction(0),) * self.rank: 1})

    def from_int(self, n: int):
        return self._clean({(Fraction(0),) * self.rank: int(n)})

    def teich(self, n: int):
        return self.from_int(teichmuller_int(int(n), self.p, self.m))

    def add(self, a, b):
        out = dict(a)
        for y, c in b.items():
            out[y] = out.get(y, 0) + c
        return self._clean(out)

    def neg(self, a):
        return self._clean({y: -c for y, c in a.items()})

    def mul(self, a, b):
        out: dict = {}
        for y1, c1 in a.items():
            for y2, c2 in b.items():
                y = tuple(s + t for s, t in zip(y1, y2))
                out[y] = out.get(y, 0) + c1 * c2
        return self._clean(out)

    def scale(self, a, n: int):
        return self._clean({y: c * int(n) for y, c in a.items()})

    def div_unit(self, a, n: int):
        inv = pow(int(n), -1, self.modulus)
        return self._clean({y: c * inv for y, c in a.items()})

    def V(self, a):
        p = self.p
        return self._clean({tuple(v / p for v in y): c * p for y, c in a.items()})

    def F(self, a):
        p = self.p
        return self._clean({tuple(v * p for v in y): c for y, c in a.items()})

    def Vinv(self, a, u: int):
        if u == 0:
            return a
        q = self.p**u
        out = {}
        for y, c in a.items():
            if c % q:
                raise CoefficientError(f"{c} is not divisible by p^{u}")
            out[tuple(v * q for v in y)] = c // q
        return out

    def is_zero(self, a) -> bool:
        return not a

    def key(self, a):
        return tuple(sorted(a.items()))

    def reduce(self, a, level: int):
        mod = self.p**level
        return {y: c % mod for y, c in a.items() if c % mod}

    def to_json(self, a):
        return [[[str(v) for v in y], int(c)] for y, c in sorted(a.items())]
