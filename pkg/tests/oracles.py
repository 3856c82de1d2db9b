"""Independent oracles used by the test-suite.

None of these share code paths with the objects they check: Witt-coordinate
arithmetic in W_m(F_p[P]) for degree-0 normal forms, brute-force
enumeration for homology over Z/p^M, and sympy for Smith forms.
"""

from __future__ import annotations

import itertools

import numpy as np
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_form

from logdrw.witt import MonoidAlgebra, MonoidPoly, PrimeField, WittVector, witt_add, witt_neg, teichmuller


def witt_to_normal_form(w: WittVector, engine):
    """Degree-0 normal form of a Witt vector over F_p[P] by peeling Teichmüller monomials.

    w = sum_e [c_e X^e] + V(w'), computed with Witt coordinate arithmetic;
    [c X^e] is the basic element teich(c) e[k=e] and V acts through the engine.
    w' has one coordinate fewer; V of it is still well defined at the engine level.
    """
    p, m = w.p, w.length
    base = w.base
    if m == 0 or w.is_zero():
        return engine.zero()
    head = w.coords[0]
    acc = engine.zero()
    peel = WittVector(p, base, tuple(base.zero() for _ in range(m)))
    for e, c in sorted(head.terms.items()):
        c %= p
        if not c:
            continue
        mono = teichmuller(base.monomial(e, c), m, p, base)
        peel = witt_add(peel, mono)
        weight = tuple(e)
        acc = acc + engine.basic(engine.ring.teich(c), weight)
    rest = witt_add(w, witt_neg(peel))
    assert rest.coords[0].is_zero(), "peeling must clear the first coordinate"
    if m == 1:
        return acc
    shifted = WittVector(p, base, tuple(rest.coords[1:]))
    return acc + engine.V(witt_to_normal_form(shifted, engine))


def bounded_witt_vectors(p: int, m: int, rank: int, support):
    """Every Witt vector of length m over F_p[P] whose coordinates have support in ``support``."""
    base = MonoidAlgebra(PrimeField(p), rank)
    polys = []
    for coeffs in itertools.product(range(p), repeat=len(support)):
        polys.append(MonoidPoly({tuple(e): c for e, c in zip(support, coeffs) if c}, p))
    for coords in itertools.product(polys, repeat=m):
        yield WittVector(p, base, tuple(coords))


def brute_homology_order(diffs_in, diff_out, moduli_in, moduli_mid, moduli_out, p: int) -> int:
    """|ker d_out / im d_in| for small complexes by enumeration.

    Modules are products of Z/p^e given by the moduli lists; matrices act on
    integer representatives.
    """
    def elements(moduli):
        return itertools.product(*[range(p**e) for e in moduli])

    def apply(mat, vec, moduli):
        out = np.asarray(mat, dtype=np.int64).reshape(len(moduli), len(vec)) @ np.asarray(vec, dtype=np.int64)
        return tuple(int(v) % p**e for v, e in zip(out, moduli))

    kernel = [v for v in elements(moduli_mid) if not any(apply(diff_out, v, moduli_out))] if moduli_out else list(elements(moduli_mid))
    image = {apply(diffs_in, v, moduli_mid) for v in elements(moduli_in)} if moduli_in else {tuple(0 for _ in moduli_mid)}
    return len(kernel) // len(image)


def sympy_local_invariants(A, p: int, M: int) -> list:
    """Valuations of the nonzero Smith invariants of A over Z, capped at M."""
    mat = Matrix(np.asarray(A).tolist())
    if mat.rows == 0 or mat.cols == 0:
        return []
    D = smith_normal_form(mat, domain=ZZ)
    vals = []
    for i in range(min(D.shape)):
        d = int(D[i, i])
        if d == 0:
            continue
        v = 0
        while d % p == 0 and v < M:
            d //= p
            v += 1
        if v < M:
            vals.append(v)
    return sorted(vals)
