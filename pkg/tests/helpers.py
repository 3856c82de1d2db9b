"""Shared generators for the test-suite."""

from __future__ import annotations

from logdrw.drw_basis import Dlog, random_word

__all__ = ["random_word", "over_ring", "random_element"]


def over_ring(word: list, ring_to, ring_from=None) -> list:
    """Re-express a word with integer coefficients over another coefficient ring."""
    out = []
    for f in word:
        if isinstance(f, Dlog):
            out.append(f)
        else:
            c = f.coeff if ring_from is None else int(ring_from.key(f.coeff))
            out.append(type(f)(f.depth, ring_to.from_int(int(c)), f.exponent))
    return out


def random_element(ctx, rng, box: int = 3):
    """A random normal form in ``ctx`` built from a word over the points of P."""
    from logdrw.log_drw import AbsoluteContext, LogDRWElement, to_relative

    absolute = ctx if isinstance(ctx, AbsoluteContext) else ctx.absolute
    eng = absolute.engine
    word = random_word(rng, eng.rank, ctx.m, eng.ring, points=absolute.monoid.points(box))
    e = LogDRWElement(absolute, eng.normalize(word))
    return e if ctx is absolute else to_relative(e, ctx)
