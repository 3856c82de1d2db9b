import numpy as np
import pytest
from hypothesis import given, strategies as st

from logdrw import snf
from oracles import sympy_local_invariants


def _vals(A, p, M, impl):
    vals, Q = impl(np.array(A, dtype=np.int64), p, M)
    return sorted(int(v) for v in vals if v < M), Q


matrices = st.integers(1, 5).flatmap(
    lambda r: st.integers(1, 5).flatmap(
        lambda c: st.lists(st.lists(st.integers(-20, 20), min_size=c, max_size=c), min_size=r, max_size=r)
    )
)


@given(matrices, st.sampled_from([(2, 4), (3, 3), (5, 2)]))
def test_local_invariants_match_sympy(A, pm):
    p, M = pm
    expected = sympy_local_invariants(A, p, M)
    for impl in (snf.snf_local, snf.snf_local_numpy):
        got, Q = _vals(A, p, M, impl)
        assert got == expected
        # Q is invertible mod p
        assert round(abs(np.linalg.det(Q.astype(float)))) % p != 0 or Q.shape[0] == 0


def test_numpy_and_compiled_paths_agree():
    rng = np.random.default_rng(3)
    for _ in range(50):
        A = rng.integers(-30, 30, size=(4, 6))
        a, _ = snf._snf_impl(A.copy() % 2**5, 2, 5)
        b, _ = snf.snf_local_numpy(A, 2, 5)
        assert sorted(a) == sorted(b)


def test_kernel_generators():
    p, M = 2, 3
    A = np.array([[2, 4], [0, 0]])
    K = snf.kernel_local(A, p, M)
    assert not ((A @ K) % p**M).any()
    solutions = sum(1 for a in range(8) for b in range(8) if (2 * a + 4 * b) % 8 == 0)
    assert p ** snf.submodule_length(K, p, M) == solutions == 16


def test_quotient_invariants_examples():
    # Z/8 + Z/8 modulo (4, 2)-diagonal relations -> Z/8 / 4 + Z/8 / 2
    Z = np.eye(2, dtype=np.int64)
    B = np.diag([4, 2])
    assert snf.quotient_invariants(Z, B, 2, 3) == [2, 1]
    assert snf.quotient_invariants(Z, np.diag([8, 8]) % 8, 2, 3) == [3, 3]
    assert snf.quotient_invariants(Z, np.eye(2, dtype=np.int64), 2, 3) == []


def test_overflow_guard():
    with pytest.raises(OverflowError):
        snf.snf_local(np.eye(2, dtype=np.int64), 2, 40)
