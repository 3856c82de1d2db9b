from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from logdrw.monoid import (
    AffineMonoid,
    FracPoint,
    MonoidError,
    MonoidHom,
    MonoidIdeal,
    TorsionCokernelError,
    check_star_star,
    facets_from_generators,
    is_J_minimal,
    is_p_saturated_hom,
    is_radical_ideal,
    membership,
    parse_monoid_text,
    split_quotient,
    star_decompose,
    u_of,
    u_of_group,
)

N1 = AffineMonoid.free(1)
N2 = AffineMonoid.free(2)
CONE = AffineMonoid.from_generators([(1, 0), (1, 2)])
DIAG = MonoidHom(N1, N2, ((1,), (1,)))


def wedge_pair(p, k):
    N = p ** (2 * k)
    P = AffineMonoid(2, ((N, -1), (-1, N)))
    return MonoidHom(N1, P, ((1,), (1,)))


def frac(values, p=2):
    return FracPoint.from_values(values, p)


def test_fracpoint_is_canonical():
    assert FracPoint((4, 2), 1, 2) == FracPoint((2, 1), 0, 2)
    assert FracPoint((3,), 0, 2).scaled(-2) == frac([Fraction(3, 4)])
    assert frac(["1/2", 1]).numerator == (1, 2)
    with pytest.raises(MonoidError):
        frac([Fraction(1, 3)])


def test_membership_examples():
    assert membership(N1, (3,))
    assert not membership(N2, (1, -1))
    P = AffineMonoid(2, ((4, -1), (-1, 4)))
    assert membership(P, (1, 2))


def test_u_examples():
    assert u_of(N1, frac([Fraction(3, 4)])) == 2
    assert u_of(N2, frac([2, 5])) == 0
    assert u_of(N1, frac([Fraction(-1, 2)])) is None


def test_lattice_monoid():
    P = AffineMonoid(2, ((1, 0), (0, 1)), lattice=((2, 0), (0, 1)))
    assert membership(P, (2, 3)) and not membership(P, (1, 3))
    assert u_of(P, frac([1, 0])) == 1
    std = P.standardized()
    assert std.lattice == () and membership(std, (1, 3))


labels = st.builds(
    lambda num, e: FracPoint(tuple(num), e, 2),
    st.lists(st.integers(0, 12), min_size=2, max_size=2),
    st.integers(0, 3),
)


@given(labels, labels)
def test_u_laws(x, y):
    for P in (N2, CONE):
        ux, uy = u_of(P, x), u_of(P, y)
        if ux is None or uy is None:
            continue
        assert u_of(P, x.scaled(1)) == max(ux - 1, 0)
        assert u_of(P, x + y) <= max(ux, uy)
        assert ux == u_of_group(P, x)


def test_facets_from_generators():
    assert facets_from_generators([(1, 0), (1, 2)]) == [(0, 1), (2, -1)]
    assert CONE.hilbert_basis(3) == [(1, 0), (1, 1), (1, 2)]


def test_saturation_verdicts():
    assert is_p_saturated_hom(DIAG, 2, 6).holds
    ident = MonoidHom(N2, N2, ((1, 0), (0, 1)))
    assert is_p_saturated_hom(ident, 3, 3).holds
    bad = wedge_pair(2, 4)
    verdict = is_p_saturated_hom(bad, 2, 3)
    assert verdict.status == "fails" and verdict.witness


def test_star_decompose():
    assert star_decompose(DIAG, (3, 5), 0, 2) == ((3, 5), (0,))
    r, q = star_decompose(DIAG, (2, 4), 1, 2)
    assert tuple(2 * a + b for a, b in zip(r, DIAG.apply_int(q))) == (2, 4)
    assert star_decompose(wedge_pair(2, 4), (1, 17), 1, 2) is None
    assert check_star_star(DIAG, 2, 4).holds
    verdict = check_star_star(wedge_pair(2, 4), 2, 4)
    assert verdict.status == "fails" and verdict.witness["n"] == 1


def test_star_star_follows_from_saturation():
    for f, p in [(DIAG, 2), (DIAG, 3), (MonoidHom(N1, N2, ((1,), (0,))), 2)]:
        if is_p_saturated_hom(f, p, 4).holds:
            assert check_star_star(f, p, 4).holds


def test_J_minimality():
    ident = MonoidHom(N1, N1, ((1,),))
    J1 = MonoidIdeal(N1, ((1,),))
    assert is_J_minimal(N1, ident, MonoidIdeal(N1, ()), frac([5]))
    assert is_J_minimal(N1, ident, J1, frac([0]))
    assert not is_J_minimal(N1, ident, J1, frac([1]))
    assert is_J_minimal(N2, DIAG, J1, frac([1, 0]))
    assert not is_J_minimal(N2, DIAG, J1, frac([1, 1]))


@given(labels)
def test_J_minimality_is_p_stable(x):
    J = MonoidIdeal(N1, ((1,),))
    assert is_J_minimal(N2, DIAG, J, x) == is_J_minimal(N2, DIAG, J, x.scaled(1))


def test_radical_ideals():
    assert is_radical_ideal(N1, MonoidIdeal(N1, ()), 3).holds
    assert is_radical_ideal(N1, MonoidIdeal(N1, ((1,),)), 4).holds
    verdict = is_radical_ideal(N2, MonoidIdeal(N2, ((2, 0),)), 4)
    assert verdict.status == "fails" and verdict.witness["x"] == (1, 0)


def test_splitting():
    split = split_quotient(DIAG)
    for v in [(1, 0), (3, 5), (-2, 7)]:
        a, b = v
        assert split.apply(v)[1] == b - a
        assert split.unapply(split.apply(v)) == tuple(Fraction(c) for c in v)
    assert split.base_part((1, 1)) == (1,) and split.quotient_part((1, 1)) == (0,)
    trivial = split_quotient(MonoidHom(AffineMonoid(0, ()), N2, ((), ())))
    assert trivial.q == 0 and trivial.s == 2
    with pytest.raises(TorsionCokernelError) as err:
        split_quotient(MonoidHom(N1, N1, ((2,),)))
    assert err.value.divisor == 2


def test_parse_format():
    text = "# the cone\nrank 2\ngenerator 1 0; 1 2\nhom 1; 1\n"
    parsed = parse_monoid_text(text, "cone")
    assert parsed["monoid"].facets == ((0, 1), (2, -1))
    assert parsed["hom"] == [(1,), (1,)]
    with pytest.raises(MonoidError, match="line 2"):
        parse_monoid_text("rank 1\nfacet 1 y\n")
    with pytest.raises(MonoidError, match="unknown keyword"):
        parse_monoid_text("rank 1\ncone 1\n")
    with pytest.raises(MonoidError):
        parse_monoid_text("facet 1\n")
