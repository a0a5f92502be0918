import itertools

import pytest
from hypothesis import given, strategies as st

from anoncomm import fp
from anoncomm.fp import FieldElement, FieldError, Matrix, SymbolVector

PRIMES = (2, 3, 5, 7, 11, 13)


def fe(v, p):
    return FieldElement(v, p)


def vec(values, p):
    return SymbolVector(tuple(values), p)


# -- worked examples -----------------------------------------------------------


def test_add_examples():
    assert fp.add(fe(1, 2), fe(1, 2)) == fe(0, 2)
    assert fp.add(fe(2, 3), fe(2, 3)) == fe(1, 3)
    for p in PRIMES:
        for x in range(p):
            assert fp.add(fe(0, p), fe(x, p)) == fe(x, p)


def test_add_rejects_mixed_moduli():
    with pytest.raises(FieldError):
        fp.add(fe(1, 2), fe(1, 3))


def test_vec_add_examples():
    assert fp.vec_add(vec([1, 0], 2), vec([1, 1], 2)) == vec([0, 1], 2)
    v = vec([3, 1, 4], 5)
    assert fp.vec_add(v, SymbolVector.zeros(3, 5)) == v
    assert fp.vec_add(vec([2], 5), vec([2], 5)) == vec([4], 5)


@pytest.mark.parametrize("other", [vec([1], 2), vec([1, 0], 3)])
def test_vec_add_mismatch(other):
    with pytest.raises((FieldError, ValueError)):
        fp.vec_add(vec([1, 0], 2), other)


def test_scale_examples():
    v = vec([1, 2, 0], 3)
    assert fp.scale(fe(0, 3), v) == SymbolVector.zeros(3, 3)
    assert fp.scale(fe(1, 3), v) == v
    assert fp.scale(fe(2, 3), vec([2], 3)) == vec([1], 3)


def test_mat_apply_examples():
    v = vec([1, 0, 1], 2)
    assert fp.mat_apply(Matrix.identity(3, 2), v) == v
    assert fp.mat_apply(Matrix.zeros(2, 3, 2), v) == SymbolVector.zeros(2, 2)
    assert fp.mat_apply(Matrix.from_rows([[1, 1]], 2), vec([1, 1], 2)) == vec([0], 2)


def test_rank_examples():
    assert fp.rank(Matrix.identity(2, 2)) == 2
    assert fp.rank(Matrix.zeros(2, 3, 2)) == 0
    assert fp.rank(Matrix.from_rows([[1, 1], [1, 1]], 2)) == 1


def test_residue_range_enforced():
    with pytest.raises(FieldError):
        fe(3, 3)
    with pytest.raises(FieldError):
        vec([0, 5], 5)
    with pytest.raises(FieldError):
        fe(0, 4)


# -- exhaustive field axioms -----------------------------------------------------


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_field_axioms(p):
    els = [fe(v, p) for v in range(p)]
    zero, one = fe(0, p), fe(1, p)
    for a, b in itertools.product(els, repeat=2):
        assert a + b == b + a
        assert a * b == b * a
        assert a - b + b == a
    for a, b, c in itertools.product(els, repeat=3):
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
    for a in els:
        assert a + zero == a and a * one == a
        assert a + (-a) == zero
        if a != zero:
            assert a * a.inverse() == one
    with pytest.raises((FieldError, ZeroDivisionError)):
        zero.inverse()


# -- rank against a brute-force oracle -------------------------------------------


def brute_rank(rows, p):
    """Dimension of the row span, by listing every combination."""
    if not rows:
        return 0
    span = set()
    for coeffs in itertools.product(range(p), repeat=len(rows)):
        span.add(tuple(sum(c * r[j] for c, r in zip(coeffs, rows)) % p for j in range(len(rows[0]))))
    n, d = len(span), 0
    while p**d < n:
        d += 1
    assert p**d == n
    return d


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("shape", [(1, 2), (2, 2), (2, 3), (3, 2), (3, 3)])
def test_rank_matches_span_size(p, shape):
    r, c = shape
    for data in itertools.product(range(p), repeat=r * c):
        rows = [list(data[i * c:(i + 1) * c]) for i in range(r)]
        assert fp.rank(Matrix.from_rows(rows, p)) == brute_rank(rows, p), rows


# -- properties ----------------------------------------------------------------------

primes = st.sampled_from(PRIMES)


@st.composite
def vec_pair(draw):
    p = draw(primes)
    n = draw(st.integers(0, 6))
    elem = st.integers(0, p - 1)
    a = draw(st.lists(elem, min_size=n, max_size=n))
    b = draw(st.lists(elem, min_size=n, max_size=n))
    return vec(a, p), vec(b, p)


@given(vec_pair())
def test_vec_add_commutes_and_cancels(pair):
    a, b = pair
    assert fp.vec_add(a, b) == fp.vec_add(b, a)
    minus_b = fp.scale(fe(a.p - 1, a.p), b)
    assert fp.vec_add(fp.vec_add(a, b), minus_b) == a


@given(primes, st.integers(0, 4), st.data())
def test_code_round_trip(p, n, data):
    code = data.draw(st.integers(0, p**n - 1))
    v = SymbolVector.from_code(code, n, p)
    assert v.code() == code
    assert fp.encode_int(fp.decode_int(code, n, p), p) == code


@given(primes, st.data())
def test_mat_apply_is_linear(p, data):
    r = data.draw(st.integers(1, 3))
    c = data.draw(st.integers(1, 3))
    elem = st.integers(0, p - 1)
    rows = data.draw(st.lists(st.lists(elem, min_size=c, max_size=c), min_size=r, max_size=r))
    x = vec(data.draw(st.lists(elem, min_size=c, max_size=c)), p)
    y = vec(data.draw(st.lists(elem, min_size=c, max_size=c)), p)
    m = Matrix.from_rows(rows, p)
    assert fp.mat_apply(m, fp.vec_add(x, y)) == fp.vec_add(fp.mat_apply(m, x), fp.mat_apply(m, y))
    assert fp.rank(m) <= min(r, c)
