"""One test per acceptance criterion, each reporting a PASS/FAIL line."""

import time
from fractions import Fraction

import mpmath

from anoncomm import info, protocol, verify
from anoncomm.info import StateSpaceTooLarge
from anoncomm.protocol import SchemeParams
from anoncomm.search import (
    accepted_schemes,
    check_coded_randomness_necessity,
    check_rate_infeasible,
    forced_decoder_census,
    min_seed_dimension,
    search,
)
from anoncomm.sim import run_simulation

GRID = [SchemeParams(K, p, L) for K in range(2, 6) for p in (2, 3) for L in (1, 2)]


def grid_reports(names, max_k=5):
    """Run ``names`` over every grid point within the default state cap."""
    done, refused = {}, []
    for params in GRID:
        if params.K > max_k:
            continue
        try:
            done[params] = verify.run_checks(params=params, names=names)
        except StateSpaceTooLarge as exc:
            refused.append((params, exc.required))
    return done, refused


def describe_refused(refused):
    return ", ".join(f"K={p.K} p={p.p} L={p.L} needs {n:.2e} states" for p, n in refused) or "none"


def test_rate_is_one_over_k(criterion):
    with criterion(1, "built-in rate equals 1/K exactly for K=2..6") as c:
        start = time.perf_counter()
        for K in range(2, 7):
            for L in (1, 2):
                m = protocol.metrics(SchemeParams(K, 2, L, L))
                assert isinstance(m.rate, Fraction)
                assert m.rate == Fraction(1, K), (K, L, m.rate)
        elapsed = time.perf_counter() - start
        c.note(f"{elapsed:.2f}s")
        assert elapsed < 1


def test_randomness_sizes(criterion):
    with criterion(2, "rho = 1 and eta = K-1 for K=2..6, p in {2,3,5}") as c:
        start = time.perf_counter()
        for K in range(2, 7):
            for p in (2, 3, 5):
                m = protocol.metrics(SchemeParams(K, p, 1))
                assert m.rho == 1 and m.eta == K - 1, (K, p, m)
                assert all(r == 1 for r in m.individual)
                table = protocol.share_distribution(SchemeParams(K, p, 1))
                h = info.entropy(table, p)
                assert h.exact == K - 1
                assert abs(h.value - (K - 1)) < mpmath.mpf("1e-9")
                for i in range(K):
                    hi = info.entropy(table.marginal([i]), p)
                    assert hi.exact == 1 and abs(hi.value - 1) < mpmath.mpf("1e-9")
        elapsed = time.perf_counter() - start
        c.note(f"{elapsed:.2f}s")
        assert elapsed < 5


def test_anonymity_grid(criterion):
    with criterion(3, "transcripts identical across theta and uniform over p^(KL)") as c:
        done, refused = grid_reports(("anonymity", "transcript_uniform"))
        for params, reports in done.items():
            for r in reports:
                assert r.passed, (params, r.to_dict())
            uni = next(r for r in reports if r.check_name == "transcript_uniform")
            assert uni.details["cells"] == params.p ** (params.K * params.L)
        c.note(f"{len(done)} parameter sets; beyond cap: {describe_refused(refused)}")
        assert done


def test_correctness_grid(criterion):
    with criterion(4, "exhaustive decode equals W_theta, zero failures") as c:
        done, refused = grid_reports(("correctness",))
        failures = [(p, r.witness) for p, rs in done.items() for r in rs if not r.passed]
        assert failures == []
        c.note(f"{len(done)} parameter sets; beyond cap: {describe_refused(refused)}")


def test_security_grid(criterion):
    with criterion(5, "transcript independent of undesired messages (exact factorization)") as c:
        done, refused = grid_reports(("security",))
        for params, (r,) in done.items():
            assert r.passed, (params, r.to_dict())
        c.note(f"{len(done)} parameter sets; beyond cap: {describe_refused(refused)}")


def test_collusion_grid(criterion):
    with criterion(6, "every coalition of size <= K-2 sees the same view for all outside theta, K <= 4") as c:
        done, refused = grid_reports(("collusion",), max_k=4)
        coalitions = 0
        for params, reports in done.items():
            assert len(reports) == len(verify.colluder_sets(params.K))
            for r in reports:
                assert r.passed, (params, r.to_dict())
            coalitions += len(reports)
        c.note(f"{len(done)} parameter sets, {coalitions} coalitions; beyond cap: {describe_refused(refused)}")
        assert not refused


def test_general_converse_two_transmitters(criterion):
    with criterion(7, "general model K=2 p=2: none at s=0, some at s=1, all with H(Z_i)=1") as c:
        start = time.perf_counter()
        params = SchemeParams(2, 2, 1)
        r0 = search("general", params, 0)
        r1 = search("general", params, 1)
        assert r0.visited == r0.space_size and r0.valid_schemes_found == 0
        assert r1.visited == r1.space_size and r1.valid_schemes_found >= 1
        seen = 0
        for _, scheme in accepted_schemes("general", params, 1):
            m = verify.share_metrics(scheme)
            assert m["individual"] == [1, 1], m
            seen += 1
        assert seen == r1.valid_schemes_found
        elapsed = time.perf_counter() - start
        c.note(f"s=0: 0 of {r0.space_size}; s=1: {seen} of {r1.space_size}; {elapsed:.1f}s")
        assert elapsed < 600


def test_linear_converse_three_transmitters(criterion):
    with criterion(8, "linear model K=3 p=2: minimum seed dimension 2 and coded randomness necessary") as c:
        start = time.perf_counter()
        params = SchemeParams(3, 2, 1)
        assert min_seed_dimension("linear", params) == 2
        res = search("linear", params, 2)
        found = list(accepted_schemes("linear", params, 2))
        assert len(found) == res.valid_schemes_found > 0
        for _, scheme in found:
            m = verify.share_metrics(scheme)
            assert m["individual"] == [1, 1, 1], m
            assert m["eta"] == 2  # joint shares have rank K-1 < K
        # every accepted scheme has an all-nonzero c with sum c_i Z_i = 0
        assert res.tags["full_support_dependency"] == res.valid_schemes_found
        assert check_coded_randomness_necessity(params) is True
        elapsed = time.perf_counter() - start
        c.note(f"{len(found)} accepted at s=2; {elapsed:.1f}s")
        assert elapsed < 300


def test_forced_decoder_structure(criterion):
    with criterion(9, "every accepted decoder at K=3 p=2 is latin and matches the sum table up to w") as c:
        census = forced_decoder_census(SchemeParams(3, 2, 1))
        assert census.accepted
        assert census.all_latin and census.all_match_sum_table
        for table in census.accepted:
            w = table[0]
            expected = tuple(w ^ (bin(y).count("1") & 1) for y in range(8))
            assert table == expected
        c.note(f"{len(census.accepted)} decoders, constants w = {census.constants}")


def test_rate_infeasibility(criterion):
    with criterion(10, "linear model with N < L admits no valid scheme") as c:
        start = time.perf_counter()
        for K in (2, 3):
            for p in (2, 3):
                assert check_rate_infeasible(SchemeParams(K, p, 2, 1)) is True
        elapsed = time.perf_counter() - start
        c.note(f"{elapsed:.3f}s")
        assert elapsed < 1


def test_harness_ten_thousand_rounds(criterion):
    with criterion(11, "10,000 rounds at K=3 p=2 on both transports") as c:
        params = SchemeParams(3, 2, 1)
        start = time.perf_counter()
        runs = {t: run_simulation(params, 10_000, t, seed=20261016, audit=True) for t in ("in-process", "stream")}
        elapsed = time.perf_counter() - start
        for t, logs in runs.items():
            assert len(logs) == 10_000
            assert logs.correct == 10_000, (t, logs.failed)
            assert logs.traffic.violations == [], t
        assert runs["in-process"].to_jsonl().encode() == runs["stream"].to_jsonl().encode()
        c.note(f"{elapsed:.1f}s for both")
        assert elapsed < 30
