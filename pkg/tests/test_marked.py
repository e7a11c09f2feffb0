from __future__ import annotations

import pytest

from wreathcert import marked, wreath
from wreathcert.errors import UsageError
from wreathcert.forcing import ForcedSubset, FrozenSubset, Pattern
from wreathcert.marked import MarkedSpec, build_ball, r_similar, similarity_debug


def spec_of(backend, table, subset):
    return MarkedSpec(backend, table, subset)


class TestBuildBall:
    def test_radius_zero(self, free2, s3, fresh_subset):
        ball = build_ball(spec_of(free2, s3, fresh_subset), 0)
        assert len(ball.vertices) == 1
        assert ball.vertices[0] == ()
        assert all(t == marked.OUT for t in ball.edges[0])

    def test_radius_one_fresh_subset(self, free2, s3, fresh_subset):
        ball = build_ball(spec_of(free2, s3, fresh_subset), 1)
        # a = a^-1 and b = b^-1 for the s3 involutions: 1 + 6 distinct one-letter elements
        names = [wreath.format_word(free2, w) for w in ball.vertices]
        assert names == ["e", "x1", "x1^-1", "x2", "x2^-1", "a", "b"]

    def test_b_collapses_only_over_the_empty_stage(self, free2, s3):
        frozen = FrozenSubset(())
        ball = build_ball(spec_of(free2, s3, frozen), 1)
        names = [wreath.format_word(free2, w) for w in ball.vertices]
        assert "b" not in names
        assert len(ball.vertices) == 6

    def test_vertices_shortlex_sorted(self, free2, s3, fresh_subset):
        ball = build_ball(spec_of(free2, s3, fresh_subset), 2)
        keys = [wreath.word_sort_key(w) for w in ball.vertices]
        assert keys == sorted(keys)

    def test_edges_deterministic_and_inverse_coherent(self, free2, s3, fresh_subset):
        ball = build_ball(spec_of(free2, s3, fresh_subset), 2)
        arity2 = 2 * ball.arity
        for vi, row in enumerate(ball.edges):
            assert len(row) == arity2
            for t, target in enumerate(row):
                if target != marked.OUT:
                    assert ball.edges[target][t ^ 1] == vi

    def test_dump_stable(self, free2, s3, fresh_subset):
        ball = build_ball(spec_of(free2, s3, fresh_subset), 1)
        dump = ball.dump(free2)
        lines = dump.strip().splitlines()
        assert lines[0] == "0 e"
        assert len(lines) == len(ball.vertices) * (1 + 2 * ball.arity)
        assert dump == ball.dump(free2)

    def test_negative_radius_rejected(self, free2, s3, fresh_subset):
        with pytest.raises(UsageError):
            build_ball(spec_of(free2, s3, fresh_subset), -1)


class TestRSimilar:
    def test_reflexive(self, free2, s3, fresh_subset):
        b = build_ball(spec_of(free2, s3, fresh_subset), 1)
        assert r_similar(b, b)

    def test_mismatched_radius_rejected(self, free2, s3, fresh_subset):
        spec = spec_of(free2, s3, fresh_subset)
        b1 = build_ball(spec, 1)
        b2 = build_ball(spec, 2)
        with pytest.raises(UsageError):
            r_similar(b1, b2)

    def test_identity_point_separates_from_empty_stage(self, free2, s3):
        s = ForcedSubset(free2)
        s.pin(free2.identity, True)
        b1 = build_ball(spec_of(free2, s3, s), 1)
        b2 = build_ball(spec_of(free2, s3, FrozenSubset(())), 1)
        assert not r_similar(b1, b2)

    def test_two_fresh_subsets_agree(self, free2, s3):
        b1 = build_ball(spec_of(free2, s3, ForcedSubset(free2)), 2)
        b2 = build_ball(spec_of(free2, s3, ForcedSubset(free2)), 2)
        assert r_similar(b1, b2)


class TestSimilarityDebug:
    def test_same_spec_none(self, free2, s3, fresh_subset):
        spec = spec_of(free2, s3, fresh_subset)
        assert similarity_debug(spec, spec, 1) is None

    def test_finds_b_for_empty_stage(self, free2, s3):
        s = ForcedSubset(free2)
        s.pin(free2.identity, True)
        m1 = spec_of(free2, s3, s)
        m2 = spec_of(free2, s3, FrozenSubset(()))
        w = similarity_debug(m1, m2, 1)
        assert wreath.format_word(free2, w) == "b"

    def test_r3_sampled_agreement(self, free2, s3):
        s = ForcedSubset(free2)
        t = ForcedSubset(free2)
        pat = Pattern.of(free2, [free2.parse("x1 x2")], free2.ball(12))
        s.pin_window(pat)
        t.pin_window(pat)
        ms, mt = spec_of(free2, s3, s), spec_of(free2, s3, t)
        assert r_similar(build_ball(ms, 3), build_ball(mt, 3))
        assert similarity_debug(ms, mt, 3) is None

    def test_agrees_with_r_similar_exhaustively(self, free2, s3):
        cases = []
        s1 = ForcedSubset(free2)
        s1.pin(free2.identity, True)
        cases.append((s1, ForcedSubset(free2)))
        s3_ = ForcedSubset(free2)
        s4 = ForcedSubset(free2)
        s3_.pin(free2.parse("x1"), True)
        s4.pin(free2.parse("x1"), True)
        cases.append((s3_, s4))
        for r in (1, 2):
            for a, b in cases:
                ma, mb = spec_of(free2, s3, a), spec_of(free2, s3, b)
                balls_equal = r_similar(build_ball(ma, r), build_ball(mb, r))
                debug = similarity_debug(ma, mb, r)
                assert balls_equal == (debug is None)


class TestTransfer:
    """Agreement on the 4r-ball forces r-similarity."""

    @pytest.mark.parametrize("radius", [1, 2])
    def test_pinned_agreement_transfers(self, free2, s3, radius):
        ball4r = free2.ball(4 * radius)
        members = [g for i, g in enumerate(ball4r) if i % 7 == 3]
        pat = Pattern.of(free2, members, ball4r)
        s = ForcedSubset(free2)
        t = ForcedSubset(free2)
        s.pin_window(pat)
        t.pin_window(pat)
        # differ at three points outside the agreement ball
        outside = [g for g in free2.ball(4 * radius + 1) if free2.length(g) == 4 * radius + 1][:3]
        for g in outside:
            s.pin(g, True)
            t.pin(g, False)
        ms, mt = spec_of(free2, s3, s), spec_of(free2, s3, t)
        assert r_similar(build_ball(ms, radius), build_ball(mt, radius))
        assert similarity_debug(ms, mt, radius) is None

    def test_monotone_in_radius(self, free2, s3):
        s = ForcedSubset(free2)
        t = ForcedSubset(free2)
        pat = Pattern.of(free2, [free2.identity], free2.ball(8))
        s.pin_window(pat)
        t.pin_window(pat)
        ms, mt = spec_of(free2, s3, s), spec_of(free2, s3, t)
        if r_similar(build_ball(ms, 2), build_ball(mt, 2)):
            assert r_similar(build_ball(ms, 1), build_ball(mt, 1))
