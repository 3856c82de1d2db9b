"""Comparison of log de Rham-Witt x-parts with Koszul de Rham pieces.

For each label x the W-side x-part is a finite complex of cyclic
Z/p^e-modules spanned by the basic elements with that label, and the de Rham
side is the Koszul complex ``T^x dlog_J`` (or its relative version).  All
homology is computed over Z/p^M with M = m through Smith normal forms.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np

from . import snf
from .drw_basis import key_u, validate_key
from .log_drw import (
    AbsoluteContext,
    ContextError,
    LogDRWElement,
    QuotientContext,
    RelativeContext,
    d,
    decompose,
    from_P_basic,
    to_relative,
    x_part_keys,
)
from .drw_basis import VFactor
from .monoid import (
    AffineMonoid,
    FracPoint,
    MonoidHom,
    MonoidIdeal,
    check_star_star,
    is_J_minimal,
    is_p_saturated_hom,
    u_of,
)

__all__ = [
    "FiniteComplex",
    "homology",
    "cone",
    "x_part_complex",
    "de_rham_x_complex",
    "c_matrices",
    "enumerate_labels",
    "relative_u_min",
    "compare_label",
    "verify_comparison",
    "counterexample_probe",
    "DeRhamElement",
    "de_rham_d",
    "c_map",
    "homology_length",
    "counterexample_monoids",
]


@dataclass
class FiniteComplex:
    """Cochain complex of finite Z/p^M-modules.

    ``exponents[n]`` lists e_i with generator i of degree n of order p^e_i;
    ``diff[n]`` is the integer matrix of d: C^n -> C^(n+1).
    """

    p: int
    M: int
    exponents: dict = field(default_factory=dict)
    diff: dict = field(default_factory=dict)
    labels: dict = field(default_factory=dict)

    def degrees(self) -> list:
        return sorted(n for n, e in self.exponents.items() if e)

    def size(self, n: int) -> int:
        return len(self.exponents.get(n, []))

    def relations(self, n: int) -> np.ndarray:
        e = self.exponents.get(n, [])
        return np.diag([self.p**v for v in e]).astype(np.int64).reshape(len(e), len(e))

    def d_matrix(self, n: int) -> np.ndarray:
        mat = self.diff.get(n)
        if mat is None:
            return np.zeros((self.size(n + 1), self.size(n)), dtype=np.int64)
        return np.asarray(mat, dtype=np.int64).reshape(self.size(n + 1), self.size(n))

    def length(self, n: int) -> int:
        return sum(self.exponents.get(n, []))

    def check_dd(self) -> bool:
        mod = self.p**self.M
        for n in self.degrees():
            prod = (self.d_matrix(n + 1) @ self.d_matrix(n)) % mod
            rel = self.relations(n + 2)
            if prod.size and not _in_span(prod, rel, self.p, self.M):
                return False
        return True


def _in_span(cols, span, p, M) -> bool:
    cols = np.asarray(cols, dtype=np.int64)
    span = np.asarray(span, dtype=np.int64)
    if cols.size == 0:
        return True
    if span.size == 0:
        return not (cols % p**M).any()
    both = np.concatenate([span, cols], axis=1)
    return snf.submodule_length(both, p, M) == snf.submodule_length(span, p, M)


def _hcat(rows: int, *blocks) -> np.ndarray:
    blocks = [np.asarray(b, dtype=np.int64) for b in blocks]
    blocks = [b if b.ndim == 2 else b.reshape(rows, -1) for b in blocks]
    if not blocks:
        return np.zeros((rows, 0), dtype=np.int64)
    return np.concatenate(blocks, axis=1)


def _cycles(C: FiniteComplex, n: int) -> np.ndarray:
    """Column generators of the cycles in degree n (inside (Z/p^M)^size)."""
    size = C.size(n)
    D = C.d_matrix(n)
    K = C.relations(n + 1)
    stacked = _hcat(C.size(n + 1), D, -K)
    if stacked.shape[0] == 0:
        kern = np.eye(size + K.shape[1], dtype=np.int64)
    else:
        kern = snf.kernel_local(stacked, C.p, C.M)
    return _hcat(size, kern[:size, :], C.relations(n))


def homology(C: FiniteComplex) -> dict:
    """Degree -> sorted elementary divisor exponents of H^n."""
    out = {}
    lo = min(C.exponents, default=0)
    hi = max(C.exponents, default=-1)
    for n in range(lo, hi + 1):
        size = C.size(n)
        if size == 0:
            out[n] = []
            continue
        Z = _cycles(C, n)
        B = _hcat(size, C.d_matrix(n - 1), C.relations(n))
        out[n] = snf.quotient_invariants(Z, B, C.p, C.M)
    return out


def homology_length(H: dict) -> int:
    return sum(sum(v) for v in H.values())


def cone(A: FiniteComplex, B: FiniteComplex, c: dict) -> FiniteComplex:
    """Mapping cone of c: A -> B; Cone^n = A^(n+1) + B^n."""
    lo = min(list(A.exponents) + list(B.exponents), default=0) - 1
    hi = max(list(A.exponents) + list(B.exponents), default=-1)
    out = FiniteComplex(A.p, A.M)
    for n in range(lo, hi + 1):
        out.exponents[n] = list(A.exponents.get(n + 1, [])) + list(B.exponents.get(n, []))
    for n in range(lo, hi + 1):
        a1, b0 = A.size(n + 1), B.size(n)
        a2, b1 = A.size(n + 2), B.size(n + 1)
        mat = np.zeros((a2 + b1, a1 + b0), dtype=np.int64)
        mat[:a2, :a1] = -A.d_matrix(n + 1)
        cm = c.get(n + 1)
        if cm is not None and a1 and b1:
            mat[a2:, :a1] = np.asarray(cm, dtype=np.int64).reshape(b1, a1)
        mat[a2:, a1:] = B.d_matrix(n)
        out.diff[n] = mat
    return out


# ---------------------------------------------------------------------------
# the two sides


def _coordinate(ctx, coeff, u: int) -> int:
    """Coordinate of a coefficient against the generator p^u (for one label)."""
    if isinstance(ctx, AbsoluteContext):
        value = int(coeff)
    else:
        if len(coeff) != 1:
            raise ContextError("x-part coefficient spread over several labels")
        value = int(next(iter(coeff.values())))
    if value % ctx.p**u:
        raise ContextError(f"coefficient {value} not divisible by p^{u}")
    return value // ctx.p**u


def _w_generators(ctx, x: FracPoint):
    u = ctx.u_label(x)
    if u is None:
        raise ContextError(f"{x} is not in P[1/p]")
    exponent = ctx.m - u
    if isinstance(ctx, QuotientContext) and not ctx.keeps(x):
        exponent = 0
    if exponent <= 0:
        return u, {}
    weight = ctx.engine_weight(x)
    keys = {}
    for n, ks in x_part_keys(weight, ctx.p).items():
        good = []
        for k in ks:
            try:
                validate_key(k, ctx.p)
            except ValueError:
                continue
            if key_u(k, ctx.p) <= u:
                good.append(k)
        if good:
            keys[n] = good
    return u, keys


def _coordinates(ctx, e, index: dict, u: int, modulus: int) -> np.ndarray:
    vec = np.zeros(len(index), dtype=np.int64)
    for key, coeff in e:
        if key not in index:
            raise ContextError(f"term {key} outside the x-part")
        vec[index[key]] = _coordinate(ctx, coeff, u) % modulus
    return vec


def x_part_complex(ctx, x: FracPoint) -> FiniteComplex:
    """The W-side x-part as a complex of Z/p^(m-u(x))-modules."""
    p, m = ctx.p, ctx.m
    u, keys = _w_generators(ctx, x)
    C = FiniteComplex(p, m)
    if not keys:
        return C
    eng = ctx.engine
    gen_coeff = ctx.base_coefficient(x, p**u)
    mod = p**m
    for n, ks in keys.items():
        C.exponents[n] = [m - u] * len(ks)
        C.labels[n] = ks
    for n, ks in keys.items():
        target = {k: i for i, k in enumerate(keys.get(n + 1, []))}
        mat = np.zeros((len(target), len(ks)), dtype=np.int64)
        for j, k in enumerate(ks):
            image = eng.d(eng.element([(k, gen_coeff)]))
            mat[:, j] = _coordinates(ctx, image, target, u, mod)
        C.diff[n] = mat
    return C


def relative_u_min(ctx, x: FracPoint, window: int = 3) -> int | None:
    """min u(q) over x = q + r with q in Q[1/p] and r in P (windowed); None if none found.

    For the absolute context this is 0 on P and None elsewhere.
    """
    P = ctx.monoid
    if isinstance(ctx, AbsoluteContext):
        return 0 if x.is_integral() and u_of(P, x) == 0 else None
    Q, f = ctx.hom.source, ctx.hom
    e = x.denom_exp
    scale = ctx.p**e
    reach = int(max((abs(v) for v in x.values()), default=0)) + window
    best = None
    for q0 in Q.points(reach * scale):
        image = f.apply_int(q0)
        rest = tuple(scale * a - b for a, b in zip(x.values(), image))
        if any(v.denominator != 1 or int(v) % scale for v in rest):
            continue
        r = tuple(int(v) // scale for v in rest)
        if not P.in_cone(r) or not P.in_lattice(r):
            continue
        uq = u_of(Q, FracPoint(q0, e, ctx.p))
        if uq is not None and (best is None or uq < best):
            best = uq
    return best


def de_rham_x_complex(ctx, x: FracPoint, window: int = 3) -> tuple:
    """(complex, u_min) of the de Rham x-piece; u_min is None when the piece is zero."""
    p, m = ctx.p, ctx.m
    C = FiniteComplex(p, m)
    if isinstance(ctx, QuotientContext) and not ctx.keeps(x):
        return C, None
    u_min = relative_u_min(ctx, x, window)
    if u_min is None or u_min >= m:
        return C, u_min
    weight = [int(v) for v in ctx.engine_weight(x)]
    rank = len(weight)
    subsets = {n: list(itertools.combinations(range(rank), n)) for n in range(rank + 1)}
    for n, js in subsets.items():
        C.exponents[n] = [m - u_min] * len(js)
        C.labels[n] = js
    for n, js in subsets.items():
        if n == rank:
            continue
        target = {J: i for i, J in enumerate(subsets[n + 1])}
        mat = np.zeros((len(target), len(js)), dtype=np.int64)
        for j, J in enumerate(js):
            for i in range(rank):
                if i in J or not weight[i]:
                    continue
                sign = (-1) ** sum(1 for t in J if t < i)
                mat[target[tuple(sorted(J + (i,)))], j] += sign * weight[i]
        C.diff[n] = mat % p**m
    return C, u_min


def c_matrices(ctx, x: FracPoint, W: FiniteComplex, DR: FiniteComplex, u_min: int) -> dict:
    """Matrices of the comparison map from the de Rham piece to the x-part."""
    p, m = ctx.p, ctx.m
    u = ctx.u_label(x)
    out = {}
    for n, js in DR.labels.items():
        index = {k: i for i, k in enumerate(W.labels.get(n, []))}
        mat = np.zeros((len(index), len(js)), dtype=np.int64)
        for j, J in enumerate(js):
            image = from_P_basic(ctx, p**u_min, x, tuple(i + 1 for i in J))
            if index:
                mat[:, j] = _coordinates(ctx, image.nf, index, u, p**m)
            elif not image.is_zero():
                raise ContextError("comparison image outside the x-part")
        out[n] = mat
    return out


# ---------------------------------------------------------------------------
# verification


def enumerate_labels(ctx, box: int) -> list:
    """Labels n / p^e in P[1/p] with n in [-box, box]^r and e <= m - 1."""
    seen = set()
    out = []
    rank = ctx.rank
    for e in range(ctx.m):
        for n in itertools.product(range(-box, box + 1), repeat=rank):
            x = FracPoint(n, e, ctx.p)
            if x in seen:
                continue
            seen.add(x)
            if u_of(ctx.monoid, x) is not None:
                out.append(x)
    return sorted(out, key=lambda x: (x.denom_exp, x.numerator))


def _span_length(cols, rows: int, p: int, M: int) -> int:
    cols = np.asarray(cols, dtype=np.int64)
    if rows == 0 or cols.size == 0:
        return 0
    return snf.submodule_length(cols, p, M)


def _injective(A: FiniteComplex, B: FiniteComplex, c: dict) -> bool:
    p, M = A.p, A.M
    for n in A.degrees():
        cm = c.get(n)
        stacked = _hcat(B.size(n), np.asarray(cm, dtype=np.int64).reshape(B.size(n), A.size(n)), -B.relations(n))
        if stacked.shape[0] == 0:
            return A.length(n) == 0
        kern = snf.kernel_local(stacked, p, M)[: A.size(n), :]
        rel = A.relations(n)
        if _span_length(_hcat(A.size(n), kern, rel), A.size(n), p, M) != _span_length(rel, A.size(n), p, M):
            return False
    return True


def _surjective(A: FiniteComplex, B: FiniteComplex, c: dict) -> bool:
    p, M = A.p, A.M
    for n in B.degrees():
        rows = B.size(n)
        cm = c.get(n)
        cm = np.zeros((rows, 0), dtype=np.int64) if cm is None else np.asarray(cm, dtype=np.int64).reshape(rows, -1)
        rel = B.relations(n)
        full = _span_length(np.eye(rows, dtype=np.int64), rows, p, M) - _span_length(rel, rows, p, M)
        got = _span_length(_hcat(rows, cm, rel), rows, p, M) - _span_length(rel, rows, p, M)
        if got != full:
            return False
    return True


def _is_chain_map(A: FiniteComplex, B: FiniteComplex, c: dict) -> bool:
    p, M = A.p, A.M
    for n in A.degrees():
        left = B.d_matrix(n) @ np.asarray(c.get(n), dtype=np.int64).reshape(B.size(n), A.size(n))
        cn1 = c.get(n + 1)
        cn1 = np.zeros((B.size(n + 1), A.size(n + 1)), dtype=np.int64) if cn1 is None else np.asarray(cn1).reshape(B.size(n + 1), A.size(n + 1))
        right = cn1 @ A.d_matrix(n)
        if not _in_span((left - right) % p**M, B.relations(n + 1), p, M):
            return False
    return True


def _hjson(H: dict) -> dict:
    return {str(n): v for n, v in sorted(H.items()) if v}


def compare_label(ctx, x: FracPoint, window: int = 3) -> dict:
    """Comparison at one label.

    ``kind`` is 'image' when the de Rham piece is nonzero (c must be an
    isomorphism of complexes there) and 'outside' otherwise (the x-part must
    be acyclic).
    """
    W = x_part_complex(ctx, x)
    DR, u_min = de_rham_x_complex(ctx, x, window)
    HW, HDR = homology(W), homology(DR)
    record = {
        "weight": str(x),
        "u": ctx.u_label(x),
        "side_ranks": {
            "lhs": {str(n): DR.length(n) for n in DR.degrees()},
            "rhs": {str(n): W.length(n) for n in W.degrees()},
        },
        "homology_lhs": _hjson(HDR),
        "homology_rhs": _hjson(HW),
    }
    acyclic = homology_length(HW) == 0
    if not DR.degrees():
        record.update(kind="outside", injective=True, image=True, acyclic=acyclic)
        record["verdict"] = "pass" if acyclic else "fail"
        if not acyclic:
            record["witness"] = {"degree": min(n for n, v in HW.items() if v), "homology_rhs": _hjson(HW)}
        return record
    c = c_matrices(ctx, x, W, DR, u_min)
    chain = _is_chain_map(DR, W, c)
    inj = _injective(DR, W, c)
    surj = _surjective(DR, W, c)
    Hc = homology(cone(DR, W, c))
    qis = chain and homology_length(Hc) == 0
    same = {n: sorted(v) for n, v in HDR.items() if v} == {n: sorted(v) for n, v in HW.items() if v}
    record.update(
        kind="image",
        chain_map=chain,
        injective=inj,
        image=surj,
        acyclic=acyclic,
        cone_acyclic=qis,
        homology_match=same,
    )
    ok = chain and inj and surj and qis and same
    record["verdict"] = "pass" if ok else "fail"
    if not ok:
        record["witness"] = {"cone_homology": _hjson(Hc), "injective": inj, "image": surj, "chain_map": chain}
    return record


def verify_comparison(ctx, box: int = 3, window: int = 3, labels=None) -> dict:
    """Run :func:`compare_label` over all labels in the box; JSON-ready report.

    Only the enumerated labels are certified; the report says so.
    """
    labels = enumerate_labels(ctx, box) if labels is None else sorted(labels, key=lambda x: (x.denom_exp, x.numerator))
    rows = [compare_label(ctx, x, window) for x in labels]
    failures = [r for r in rows if r["verdict"] == "fail"]
    return {
        "context": ctx.header(),
        "scope": f"labels n/p^e with |n_i| <= {box}, e <= {ctx.m - 1}; window {window}",
        "labels": len(rows),
        "image_labels": sum(r["kind"] == "image" for r in rows),
        "outside_labels": sum(r["kind"] == "outside" for r in rows),
        "verdict": "pass" if not failures else "fail",
        "witness": failures[0] if failures else None,
        "results": rows,
    }


# ---------------------------------------------------------------------------
# elements of the de Rham side


@dataclass
class DeRhamElement:
    """Finite sum of xi [T^x] dlog_J; J holds 1-based indices of the form coordinates.

    xi is taken mod p^m.  Relative labels x = q + r carry xi divisible by
    p^u(q), matching the generator V^u(q)(eta X^(p^u(q) q)) (x) T^r.
    """

    ctx: object
    terms: dict = field(default_factory=dict)  # (FracPoint, tuple J) -> int

    def __post_init__(self):
        mod = self.ctx.p**self.ctx.m
        clean: dict = {}
        for (x, J), xi in self.terms.items():
            sign, J = _wedge_sort(J)
            if sign:
                clean[(x, J)] = (clean.get((x, J), 0) + sign * xi) % mod
        self.terms = {k: v for k, v in sorted(clean.items(), key=_dr_order) if v}

    def __add__(self, other):
        merged = dict(self.terms)
        for k, v in other.terms.items():
            merged[k] = merged.get(k, 0) + v
        return DeRhamElement(self.ctx, merged)

    def is_zero(self) -> bool:
        return not self.terms


def _dr_order(item):
    (x, J), _ = item
    return (x.denom_exp, x.numerator, len(J), J)


def _wedge_sort(J):
    J = tuple(J)
    if len(set(J)) != len(J):
        return 0, J
    inv = sum(1 for a, b in itertools.combinations(J, 2) if a > b)
    return (-1) ** inv, tuple(sorted(J))


def de_rham_d(e: DeRhamElement) -> DeRhamElement:
    """d(xi T^x dlog_J) = xi T^x (sum_i x_i dlog T_i) dlog_J; Q^gp directions die."""
    ctx = e.ctx
    out: dict = {}
    for (x, J), xi in e.terms.items():
        weight = ctx.engine_weight(x)
        for i, w in enumerate(weight, start=1):
            if w == 0 or i in J:
                continue
            if Fraction(w).denominator != 1:
                raise ContextError(f"de Rham label {x} has non-integral form part")
            sign, K = _wedge_sort((i,) + J)
            out[(x, K)] = out.get((x, K), 0) + sign * int(w) * xi
    return DeRhamElement(ctx, out)


def c_map(e: DeRhamElement) -> LogDRWElement:
    """The comparison map on generators: xi [T^x] dlog_J -> b(xi, x, J)."""
    ctx = e.ctx
    acc = None
    for (x, J), xi in e.terms.items():
        if isinstance(ctx, QuotientContext) and not ctx.keeps(x):
            raise ContextError(f"label {x} is not J-minimal")
        part = from_P_basic(ctx, xi, x, J)
        acc = part if acc is None else acc + part
    if acc is None:
        from .log_drw import zero

        return zero(ctx)
    return acc


# ---------------------------------------------------------------------------
# the counterexample family


def counterexample_monoids(p: int, k: int) -> MonoidHom:
    """Q = N diagonally inside P = {y <= p^(2k) x, x <= p^(2k) y}."""
    N = p ** (2 * k)
    P = AffineMonoid(2, ((N, -1), (-1, N)), (), ((1, 1), (1, N), (N, 1)), f"P_{p},{k}")
    Q = AffineMonoid.free(1, "N")
    return MonoidHom(Q, P, ((1,), (1,)))


def counterexample_probe(p: int, k: int, m: int, window: int = 3) -> dict:
    """Exhibit V(p X Y^(p^k+1)) as a relative 0-cocycle outside the comparison image."""
    if not (k > m >= 3):
        raise ValueError("the probe needs k > m >= 3")
    f = counterexample_monoids(p, k)
    ctx = RelativeContext(f, p, m, certify=False)
    absolute = ctx.absolute
    exponent = (1, p**k + 1)
    element = to_relative(
        LogDRWElement(absolute, absolute.engine.normalize([VFactor(1, p, exponent)])), ctx
    )
    parts = decompose(element)
    (x, part), = parts.items()
    cocycle = d(element).is_zero()
    u_min = relative_u_min(ctx, x, window=int(max(x.values())) + window)
    W = x_part_complex(ctx, x)
    H0 = homology(W).get(0, [])
    star = check_star_star(f, p, window=max(window, int(max(x.values())) + 1), max_power=2, split=ctx.splitting)
    sat = is_p_saturated_hom(f, p, window)
    ok = (not element.is_zero()) and cocycle and u_min is None and bool(H0)
    return {
        "p": p,
        "k": k,
        "m": m,
        "element": f"V({p} X^(1) Y^({p**k + 1}))",
        "label": [str(v) for v in x.values()],
        "split_label": [str(v) for v in ctx.splitting.apply(x.values())],
        "nonzero": not element.is_zero(),
        "cocycle": cocycle,
        "in_comparison_image": u_min is not None,
        "x_part_H0": H0,
        "star_star": star.as_dict(),
        "p_saturated": sat.as_dict(),
        "verdict": "counterexample" if ok else "no-counterexample",
    }
