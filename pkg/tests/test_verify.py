import itertools
import random
from collections import Counter
from fractions import Fraction

import pytest

from anoncomm import info, mutants, schemes, verify
from anoncomm.info import StateSpaceTooLarge
from anoncomm.protocol import SchemeParams
from anoncomm.search.general import GeneralSpace

K3 = SchemeParams(3, 2, 1)


def verdicts(reports):
    out = {}
    for r in reports:
        out[r.check_name] = out.get(r.check_name, True) and r.passed
    return out


# -- a slow, obviously-correct oracle ------------------------------------------------


def brute_views(scheme, theta):
    """Yield (seed, messages, shares, transcript) over every seed and message tuple."""
    P = scheme.params
    msgs = list(itertools.product(range(P.p), repeat=P.L))
    for seed in itertools.product(range(P.p), repeat=scheme.seed_dim):
        z = scheme.shares(seed)
        for ws in itertools.product(msgs, repeat=P.K):
            y = tuple(scheme.encode(i, i == theta - 1, ws[i], z[i]) for i in range(P.K))
            yield seed, ws, z, y


def brute_verdicts(scheme, colluders=()):
    K = scheme.params.K
    correct, tables, secure = True, {}, True
    for theta in range(1, K + 1):
        t, cond = Counter(), Counter()
        for _, ws, _, y in brute_views(scheme, theta):
            t[y] += 1
            correct &= scheme.decode(y) == ws[theta - 1]
            others = tuple(w for i, w in enumerate(ws) if i != theta - 1)
            cond[(ws[theta - 1], y, others)] += 1
        tables[theta] = info.DistTable({(k,): c for k, c in t.items()})
        # I(Y; W_others | W_theta) = 0 slice by slice
        for wt in {k[0] for k in cond}:
            sl = info.DistTable({(y, o): c for (w, y, o), c in cond.items() if w == wt}, arity=2)
            secure &= info.factorizes(sl, [0], [1])
    anon = all(info.same_distribution(tables[1], tables[t]) for t in tables)

    views = {}
    for theta in range(1, K + 1):
        if theta in colluders:
            continue
        c = Counter()
        for _, ws, z, y in brute_views(scheme, theta):
            c[(y, tuple((z[j - 1], ws[j - 1]) for j in colluders))] += 1
        views[theta] = info.DistTable({(k,): n for k, n in c.items()})
    first = next(iter(views.values()))
    collusion = all(info.same_distribution(first, v) for v in views.values())
    return {"correctness": correct, "anonymity": anon, "security": secure, "collusion": collusion}


def fast_verdicts(scheme, colluders=()):
    reports = verify.run_checks(scheme, names=("correctness", "anonymity", "security", "collusion"), colluders=[colluders])
    return verdicts(reports)


@pytest.mark.parametrize("name", ["builtin", *mutants.CATALOG])
@pytest.mark.parametrize("colluders", [(), (1,), (3,)])
def test_vectorized_checks_agree_with_brute_force(name, colluders):
    scheme = schemes.BuiltinScheme(K3) if name == "builtin" else mutants.build(name, K3)
    assert fast_verdicts(scheme, colluders) == brute_verdicts(scheme, colluders)


def test_brute_force_agreement_on_random_general_schemes():
    space = GeneralSpace(SchemeParams(2, 2, 1), seed_dim=1)
    rng = random.Random(2024)
    for index in [6645093, *(rng.randrange(space.space_size) for _ in range(25))]:
        scheme = space.scheme_at(index)
        assert fast_verdicts(scheme) == brute_verdicts(scheme), index


# -- worked examples --------------------------------------------------------------------


@pytest.mark.parametrize("params", [K3, SchemeParams(2, 3, 2)])
def test_correctness_builtin(params):
    r = verify.check_correctness(params=params)
    assert r.passed and r.witness is None


def test_correctness_decoder_drops_last():
    r = verify.check_correctness(mutants.build("decoder_drops_last", K3))
    assert r.verdict == "fail"
    w = r.witness
    assert w["decoded"] != w["expected"]
    assert sum(w["seed"]) % 2 != 0  # a_1 + a_2 != 0


@pytest.mark.parametrize("params", [K3, SchemeParams(4, 3, 1)])
def test_anonymity_builtin(params):
    r = verify.check_anonymity(params=params)
    assert r.passed


def test_transcripts_uniform_over_eight():
    r = verify.check_transcript_uniform(params=K3)
    assert r.passed
    assert r.details["cells"] == 8


def test_anonymity_naive_reveals_theta():
    r = verify.check_anonymity(mutants.build("naive", K3))
    assert r.verdict == "fail"
    a, b = r.witness["theta_pair"]
    outcome = r.witness["outcome"]
    nonzero = [i + 1 for i, s in enumerate(outcome) if any(s)]
    assert nonzero and set(nonzero) <= {a, b}


@pytest.mark.parametrize("params", [K3, SchemeParams(2, 5, 1)])
def test_security_builtin(params):
    assert verify.check_security(params=params).passed


def test_security_leaky():
    r = verify.check_security(mutants.build("leaky", K3))
    assert r.verdict == "fail"
    assert "2" in r.witness["undesired_messages"]


def test_collusion_examples():
    assert verify.check_collusion(params=K3, colluders={3}).passed
    with pytest.raises(ValueError):
        verify.check_collusion(params=K3, colluders={2, 3})
    with pytest.raises(ValueError):
        verify.check_collusion(params=K3, colluders={4})
    k4 = SchemeParams(4, 2, 1)
    sets = verify.colluder_sets(4)
    assert (1,) in sets and (2, 4) in sets and all(len(s) <= 2 for s in sets)
    assert all(r.passed for r in verify.run_checks(params=k4, names=("collusion",)))


@pytest.mark.parametrize("params,cells", [(K3, 8), (SchemeParams(2, 3, 1), 9)])
def test_transcript_uniform_builtin(params, cells):
    r = verify.check_transcript_uniform(params=params)
    assert r.passed and r.details["cells"] == cells


def test_transcript_uniform_point_mass():
    r = verify.check_transcript_uniform(mutants.build("point_mass", K3))
    assert r.verdict == "fail" and r.witness["support"] == 1


@pytest.mark.parametrize("params", [K3, SchemeParams(5, 2, 1)])
def test_share_determinism_builtin(params):
    assert verify.check_share_determinism(params=params).passed


def test_share_determinism_mixing():
    r = verify.check_share_determinism(mutants.build("mixing", K3))
    assert r.verdict == "fail"
    a, b = r.witness["signals"]
    assert a != b


def test_latin_builtin_matches_sum_table():
    r = verify.check_decoder_latin_structure(params=K3)
    assert r.passed
    dec = schemes.tabulate(schemes.BuiltinScheme(K3)).dec
    # g(y) = w for even weight, 1 - w for odd weight, with w = 0
    assert [int(v) for v in dec.ravel()] == [0, 1, 1, 0, 1, 0, 0, 1]
    assert verify.matches_sum_table(dec, 2, 3)


def test_latin_constant_decoder_and_k2p3():
    assert verify.check_decoder_latin_structure(mutants.build("constant_decoder", K3)).verdict == "fail"
    assert verify.check_decoder_latin_structure(params=SchemeParams(2, 3, 1)).passed


# -- mutants, fixtures, caps ---------------------------------------------------------------


@pytest.mark.parametrize("name", list(mutants.CATALOG))
def test_mutant_fails_expected_checks_with_witnesses(name):
    reports = verify.run_checks(mutants.build(name, K3))
    failed = {r.check_name for r in reports if not r.passed}
    assert set(mutants.CATALOG[name].fails) <= failed
    for r in reports:
        if not r.passed:
            assert r.witness


def test_builtin_passes_everything():
    for params in (K3, SchemeParams(2, 3, 1), SchemeParams(4, 2, 1)):
        reports = verify.run_checks(params=params)
        assert all(r.passed for r in reports), [r.to_dict() for r in reports if not r.passed]


def test_latin_check_skips_multi_symbol_messages():
    reports = {r.check_name: r for r in verify.run_checks(params=SchemeParams(3, 3, 2))}
    assert reports.pop("decoder_latin").verdict == "skipped"
    assert all(r.passed for r in reports.values())


@pytest.mark.parametrize("name", [*mutants.CATALOG, "builtin"])
def test_fixtures_match_regenerated(name, fixtures_dir, tmp_path):
    mutants.write_fixtures(tmp_path)
    stored = schemes.load_scheme(fixtures_dir / f"{name}.scheme")
    fresh = schemes.load_scheme(tmp_path / f"{name}.scheme")
    assert stored.to_json() == fresh.to_json()
    if name != "builtin":
        live = mutants.build(name, K3)
        assert verdicts(verify.run_checks(stored)) == verdicts(verify.run_checks(live))


def test_cap_refusal_reports_required_size():
    big = SchemeParams(5, 5, 3)
    with pytest.raises(StateSpaceTooLarge) as exc:
        verify.check_correctness(params=big)
    assert exc.value.required == verify.required_states(big)
    assert exc.value.required > exc.value.cap == info.DEFAULT_MAX_STATES


def test_reports_are_deterministic():
    def strip(reports):
        out = []
        for r in reports:
            d = r.to_dict()
            d["stats"].pop("seconds")
            out.append(d)
        return out

    s = mutants.build("naive", K3)
    assert strip(verify.run_checks(s)) == strip(verify.run_checks(s))
    assert strip(verify.run_checks(params=K3)) == strip(verify.run_checks(params=K3))


def test_failing_report_requires_witness():
    with pytest.raises(ValueError):
        verify.CheckReport("correctness", K3, "fail")


def test_share_metrics():
    m = verify.share_metrics(params=SchemeParams(4, 3, 2))
    assert (m["rate"], m["rho"], m["eta"]) == (Fraction(1, 4), 1, 3)
    m0 = verify.share_metrics(mutants.build("naive", K3))
    assert (m0["rho"], m0["eta"]) == (0, 0)
