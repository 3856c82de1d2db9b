from fractions import Fraction

import numpy as np
import pytest

from logdrw.drw_basis import VFactor
from logdrw.log_drw import (
    AbsoluteContext,
    ContextError,
    QuotientContext,
    RelativeContext,
    constant,
    d,
    decompose,
    dlog,
    F,
    f_map,
    from_P_basic,
    g_map,
    mul,
    sum_parts,
    to_quotient,
    to_relative,
    V,
    x_part_keys,
    zero,
)
from logdrw.monoid import AffineMonoid, FracPoint, MonoidHom, MonoidIdeal
from helpers import random_element

N1 = AffineMonoid.free(1)
N2 = AffineMonoid.free(2)
CONE = AffineMonoid.from_generators([(1, 0), (1, 2)])
DIAG = MonoidHom(N1, N2, ((1,), (1,)))


def pt(*values, p=2):
    return FracPoint.from_values(values, p)


def contexts(p=2, m=2):
    return [
        AbsoluteContext(N2, p, m),
        AbsoluteContext(CONE, p, m),
        RelativeContext(DIAG, p, m),
        QuotientContext(DIAG, p, m, ideal=MonoidIdeal(N1, ((1,),))),
    ]


def test_p_basic_examples():
    ctx = AbsoluteContext(N1, 2, 2)
    b = from_P_basic(ctx, 2, pt(Fraction(1, 2)), ())
    assert b.nf == ctx.engine.normalize([VFactor(1, 1, (1,))])
    assert from_P_basic(ctx, 3, pt(0), ()) == constant(ctx, 3)
    assert from_P_basic(ctx, 1, pt(1), (0,)) == d(from_P_basic(ctx, 1, pt(1), ()))
    assert from_P_basic(ctx, 1, pt(0), (1,)) == dlog(ctx, (1,))
    with pytest.raises(ContextError):
        from_P_basic(ctx, 1, pt(Fraction(1, 2)), ())
    with pytest.raises(ContextError):
        from_P_basic(ctx, 1, pt(-1), ())
    with pytest.raises(ContextError):
        from_P_basic(ctx, 1, pt(1), (2,))


def test_x_part_key_counts_are_binomial():
    counts = {n: len(keys) for n, keys in x_part_keys((1, 2), 2).items()}
    assert counts == {0: 1, 1: 2, 2: 1}
    counts = {n: len(keys) for n, keys in x_part_keys((1, Fraction(1, 2), 3), 2).items()}
    assert counts == {0: 1, 1: 3, 2: 3, 3: 1}
    assert {n: len(k) for n, k in x_part_keys((1,), 2).items()} == {0: 1, 1: 1}


def test_labels_add_under_products_and_survive_d():
    ctx = AbsoluteContext(N2, 2, 3)
    a = from_P_basic(ctx, 2, pt(Fraction(1, 2), 1), ())
    b = from_P_basic(ctx, 1, pt(0, 1), (0,))
    prod = mul(a, b)
    assert set(decompose(prod)) == {pt(Fraction(1, 2), 2)}
    labels = [pt(Fraction(i, 4), Fraction(j, 2)) for i in range(4) for j in range(3)]
    rng = np.random.default_rng(2)
    for _ in range(40):
        x, y = (labels[int(i)] for i in rng.integers(0, len(labels), 2))
        ex = from_P_basic(ctx, 2 ** ctx.u_label(x), x, tuple(int(i) for i in rng.choice(3, 1)))
        ey = from_P_basic(ctx, 2 ** ctx.u_label(y), y, ())
        assert set(decompose(mul(ex, ey))) <= {x + y}
    rng = np.random.default_rng(3)
    for _ in range(50):
        e = random_element(ctx, rng)
        assert set(decompose(d(e))) <= set(decompose(e))


def test_frobenius_and_verschiebung_on_generators():
    ctx = AbsoluteContext(N2, 2, 3)
    low = ctx.at_level(2)
    assert F(dlog(ctx, (1, 0))) == dlog(low, (1, 0))
    one = constant(ctx, 1)
    assert F(V(one)) == constant(ctx, 2)
    x = from_P_basic(ctx, 1, pt(1, 1), ())
    assert F(x) == from_P_basic(low, 1, pt(2, 2), ())


def test_relative_dlog_of_base_vanishes():
    ctx = RelativeContext(DIAG, 2, 2)
    assert dlog(ctx, (1, 1)).is_zero()
    assert not dlog(ctx, (1, 0)).is_zero()
    assert dlog(ctx, (1, 0)) == -dlog(ctx, (0, 1))


def test_relative_base_coefficients_merge():
    ctx = RelativeContext(DIAG, 2, 2)
    base = from_P_basic(ctx, 2, pt(Fraction(1, 2), Fraction(1, 2)), ())
    r = from_P_basic(ctx, 1, pt(1, 0), ())
    assert mul(base, r) == from_P_basic(ctx, 2, pt(Fraction(3, 2), Fraction(1, 2)), ())


def test_to_relative_is_a_dg_map():
    abs_ctx = AbsoluteContext(N2, 2, 2)
    rel = RelativeContext(DIAG, 2, 2)
    rng = np.random.default_rng(8)
    for _ in range(40):
        a, b = random_element(abs_ctx, rng), random_element(abs_ctx, rng)
        assert to_relative(mul(a, b), rel) == mul(to_relative(a, rel), to_relative(b, rel))
        assert to_relative(d(a), rel) == d(to_relative(a, rel))
    assert to_relative(dlog(abs_ctx, (1, 1)), rel).is_zero()


def test_quotient_keeps_only_minimal_labels():
    ident = MonoidHom(N1, N1, ((1,),))
    q = QuotientContext(ident, 2, 2, ideal=MonoidIdeal(N1, ((1,),)))
    assert from_P_basic(q, 1, pt(1), ()).is_zero()
    assert from_P_basic(q, 1, pt(3), ()).is_zero()
    assert constant(q, 3) == from_P_basic(q, 3, pt(0), ())
    assert not constant(q, 1).is_zero()

    diag = QuotientContext(DIAG, 2, 2, ideal=MonoidIdeal(N1, ((1,),)))
    assert not from_P_basic(diag, 1, pt(2, 0), ()).is_zero()
    assert not from_P_basic(diag, 1, pt(0, 3), (0,)).is_zero()
    assert from_P_basic(diag, 1, pt(1, 1), ()).is_zero()
    assert from_P_basic(diag, 1, pt(2, 1), ()).is_zero()


def test_quotient_products_with_ideal_elements_vanish():
    ctx = QuotientContext(DIAG, 2, 2, ideal=MonoidIdeal(N1, ((1,),)))
    g = from_P_basic(ctx, 1, pt(1, 1), ())
    rng = np.random.default_rng(4)
    for _ in range(30):
        assert mul(random_element(ctx, rng), g).is_zero()
    rel = RelativeContext(DIAG, 2, 2)
    e = random_element(rel, rng)
    assert to_quotient(to_quotient(e, ctx.ideal), ctx.ideal) == to_quotient(e, ctx.ideal)


@pytest.mark.parametrize("index", range(4))
def test_decomposition_round_trips(index):
    ctx = contexts()[index]
    rng = np.random.default_rng(100 + index)
    for _ in range(60):
        e = random_element(ctx, rng)
        parts = decompose(e)
        assert sum_parts(ctx, parts) == e
        for x, part in parts.items():
            assert not part.is_zero()
            assert f_map(ctx, g_map(part, x)) == part


def test_g_map_rejects_mixed_labels():
    ctx = AbsoluteContext(N1, 2, 2)
    e = from_P_basic(ctx, 1, pt(1), ()) + from_P_basic(ctx, 1, pt(2), ())
    with pytest.raises(ContextError):
        g_map(e, pt(1))


def test_elements_from_different_contexts_do_not_mix():
    with pytest.raises(ContextError):
        zero(AbsoluteContext(N1, 2, 2)) + zero(AbsoluteContext(N1, 2, 3))
