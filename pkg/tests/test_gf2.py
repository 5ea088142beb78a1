import itertools

import numpy as np
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vdpconley import gf2

small = st.tuples(st.integers(1, 6), st.integers(1, 6)).flatmap(
    lambda s: arrays(np.uint8, s, elements=st.integers(0, 1))
)


def brute_rank(A):
    m, n = A.shape
    span = {tuple((A.T.astype(int) @ np.array(c)) % 2) for c in itertools.product((0, 1), repeat=m)}
    return int(round(np.log2(len(span))))


@given(small)
def test_rank_matches_span_count(A):
    assert gf2.rank(A) == brute_rank(A)


@given(small)
def test_nullspace_is_a_basis_of_the_kernel(A):
    N = gf2.nullspace(A)
    assert not gf2.matmul(A, N.T).any()
    assert N.shape[0] == A.shape[1] - gf2.rank(A)
    assert gf2.rank(N) == N.shape[0]


@given(small, st.data())
def test_solve_agrees_with_enumeration(A, data):
    b = data.draw(arrays(np.uint8, A.shape[0], elements=st.integers(0, 1)))
    x = gf2.solve(A, b)
    exists = any(
        not ((A.astype(int) @ np.array(v) - b) % 2).any()
        for v in itertools.product((0, 1), repeat=A.shape[1])
    )
    assert (x is not None) == exists
    if x is not None:
        assert np.array_equal(gf2.matmul(A, x.reshape(-1, 1)).ravel(), b)


def test_row_reduce_identity_and_empty():
    R, piv = gf2.row_reduce(np.eye(3, dtype=int))
    assert piv == [0, 1, 2] and np.array_equal(R, np.eye(3))
    assert gf2.rank(np.zeros((0, 4))) == 0
    assert gf2.nullspace(np.zeros((0, 2))).shape == (2, 2)
