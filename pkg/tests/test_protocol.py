import inspect
import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from anoncomm import info, protocol
from anoncomm.fp import SymbolVector
from anoncomm.protocol import DesireFlag, Message, SchemeParams, Share, Transcript


def sv(values, p):
    return SymbolVector(tuple(values), p)


def shares(params, seed):
    return [s.z.values for s in protocol.deal(params, protocol.make_seed(seed, params))]


def msgs(ws, p):
    return [Message(sv(w, p)) for w in ws]


# -- deal ------------------------------------------------------------------------------


def test_deal_examples():
    k3 = SchemeParams(3, 2, 1)
    assert shares(k3, (1, 0)) == [(1,), (0,), (1,)]
    assert shares(k3, (0, 0)) == [(0,), (0,), (0,)]


def test_deal_last_share_cancels_the_rest():
    # 1 + 2 + 2 = 5 = 2 (mod 3), so the closing share is -2 = 1
    assert shares(SchemeParams(4, 3, 1), (1, 2, 2)) == [(1,), (2,), (2,), (1,)]


def test_deal_multi_symbol_layout():
    # slot l uses seed symbols l*(K-1) .. l*(K-1)+K-2
    assert shares(SchemeParams(3, 5, 2), (1, 2, 3, 4)) == [(1, 3), (2, 4), (2, 3)]


def test_deal_rejects_wrong_seed():
    params = SchemeParams(3, 2, 1)
    with pytest.raises(ValueError):
        protocol.deal(params, protocol.make_seed((1,), params))
    with pytest.raises(ValueError):
        protocol.deal(params, protocol.Seed(sv((1, 2), 3)))


def test_params_validation():
    with pytest.raises(ValueError):
        SchemeParams(1)
    with pytest.raises(ValueError):
        SchemeParams(3, 4)
    with pytest.raises(ValueError):
        SchemeParams(3, 2, 0)
    assert SchemeParams(3, 2, 2).N == 2
    assert SchemeParams(4, 3, 2).rate == Fraction(1, 4)


# -- encode / decode ---------------------------------------------------------------------


def test_encode_examples():
    assert protocol.encode(1, DesireFlag(True), Message(sv([1], 2)), Share(1, sv([1], 2))) == sv([0], 2)
    assert protocol.encode(2, DesireFlag(False), Message(sv([1], 2)), Share(2, sv([0], 2))) == sv([0], 2)
    assert protocol.encode(3, DesireFlag(True), Message(sv([2], 3)), Share(3, sv([1], 3))) == sv([0], 3)


def test_encode_refuses_foreign_share():
    with pytest.raises(ValueError):
        protocol.encode(1, DesireFlag(True), Message(sv([1], 2)), Share(2, sv([1], 2)))


def test_decode_examples():
    y = Transcript((sv([0], 2), sv([0], 2), sv([1], 2)))
    assert protocol.decode(y).w == sv([1], 2)
    zero = Transcript(tuple(sv([0, 0], 5) for _ in range(4)))
    assert protocol.decode(zero).w == sv([0, 0], 5)


def test_decode_takes_no_theta():
    assert list(inspect.signature(protocol.decode).parameters) == ["y"]


def test_hand_trace_theta_1():
    params = SchemeParams(3, 2, 1)
    y, m = protocol.run_round(params, 1, msgs([[1], [0], [0]], 2), protocol.make_seed((1, 0), params))
    assert y.as_tuples() == ((0,), (0,), (1,))
    assert m.w == sv([1], 2)


def test_run_round_theta_2():
    params = SchemeParams(3, 2, 1)
    y, m = protocol.run_round(params, 2, msgs([[0], [1], [0]], 2), protocol.make_seed((1, 1), params))
    assert y.as_tuples() == ((1,), (0,), (0,))
    assert m.w == sv([1], 2)


@pytest.mark.parametrize("theta", [1, 2, 3])
def test_zero_messages_decode_to_zero(theta):
    params = SchemeParams(3, 3, 2)
    seed = protocol.make_seed((2, 1, 0, 2), params)
    _, m = protocol.run_round(params, theta, msgs([[0, 0]] * 3, 3), seed)
    assert m.w.is_zero()


def test_exhaustive_k3_correctness():
    params = SchemeParams(3, 2, 1)
    n = 0
    for seed in itertools.product(range(2), repeat=2):
        for ws in itertools.product(range(2), repeat=3):
            for theta in (1, 2, 3):
                _, m = protocol.run_round(params, theta, msgs([[w] for w in ws], 2), protocol.make_seed(seed, params))
                assert m.w.values == (ws[theta - 1],)
                n += 1
    assert n == 4 * 8 * 3


def test_run_round_argument_checks():
    params = SchemeParams(3, 2, 1)
    seed = protocol.make_seed((0, 0), params)
    with pytest.raises(ValueError):
        protocol.run_round(params, 4, msgs([[0]] * 3, 2), seed)
    with pytest.raises(ValueError):
        protocol.run_round(params, 1, msgs([[0]] * 2, 2), seed)
    with pytest.raises(ValueError):
        protocol.run_round(params, 1, msgs([[0, 0]] * 3, 2), seed)


def test_builtin_requires_n_equal_l():
    with pytest.raises(ValueError):
        protocol.deal(SchemeParams(3, 2, 1, 2), protocol.Seed(sv((0, 0), 2)))


# -- metrics -----------------------------------------------------------------------------


@pytest.mark.parametrize(
    "params,expected",
    [
        (SchemeParams(3), (Fraction(1, 3), 1, 2)),
        (SchemeParams(2), (Fraction(1, 2), 1, 1)),
        (SchemeParams(5, 3), (Fraction(1, 5), 1, 4)),
    ],
)
def test_metrics_examples(params, expected):
    m = protocol.metrics(params)
    assert (m.rate, m.rho, m.eta) == expected
    assert all(r == 1 for r in m.individual)
    assert isinstance(m.rho, Fraction) and isinstance(m.eta, Fraction)


def test_metrics_per_symbol_with_longer_messages():
    m = protocol.metrics(SchemeParams(3, 3, 2))
    assert (m.rate, m.rho, m.eta) == (Fraction(1, 3), 1, 2)


# -- properties ---------------------------------------------------------------------------

scheme_params = st.builds(
    SchemeParams,
    st.integers(2, 6),
    st.sampled_from([2, 3, 5, 7, 11, 13]),
    st.integers(1, 3),
)


@settings(max_examples=200)
@given(scheme_params, st.data())
def test_shares_sum_to_zero_and_decode_is_correct(params, data):
    K, p, L = params.K, params.p, params.L
    elem = st.integers(0, p - 1)
    seed = data.draw(st.lists(elem, min_size=params.seed_len, max_size=params.seed_len))
    ws = data.draw(st.lists(st.lists(elem, min_size=L, max_size=L), min_size=K, max_size=K))
    theta = data.draw(st.integers(1, K))
    z = shares(params, seed)
    assert all(sum(col) % p == 0 for col in zip(*z))
    _, m = protocol.run_round(params, theta, msgs(ws, p), protocol.make_seed(seed, params))
    assert list(m.w.values) == ws[theta - 1]


@pytest.mark.parametrize("params", [SchemeParams(3, 2, 1), SchemeParams(2, 3, 1), SchemeParams(4, 2, 1)])
def test_transcript_uniform_for_every_theta(params):
    K, p = params.K, params.p

    def transcript(theta):
        def fn(x):
            seed, ws = x[:K - 1], x[K - 1:]
            y, _ = protocol.run_round(params, theta, msgs([[w] for w in ws], p), protocol.make_seed(seed, params))
            return y.as_tuples()

        return info.enumerate_distribution([p] * (2 * K - 1), fn)

    tables = [transcript(t) for t in range(1, K + 1)]
    for t in tables:
        assert len(t.counts) == p**K and t.is_uniform()
        assert info.same_distribution(tables[0], t)


def test_dealer_draws_valid_rounds():
    params = SchemeParams(4, 5, 2)
    d = protocol.Dealer(params, random.Random(7))
    for _ in range(50):
        assert 1 <= d.draw_theta() <= 4
        seed = d.draw_seed()
        assert len(seed.a) == 6 and seed.a.p == 5
