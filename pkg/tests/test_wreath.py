from __future__ import annotations

import itertools
import random

import pytest

from wreathcert import groups, wreath
from wreathcert.errors import UsageError
from wreathcert.forcing import ForcedSubset, FrozenSubset, Pattern, TranslatedSubset
from wreathcert.wreath import A_KIND, B_KIND


def parse(backend, text):
    return wreath.parse_word(backend, text)


class TestWordGrammar:
    def test_parse_examples(self, free2):
        assert len(parse(free2, "x1 b^-1 a")) == 3
        assert parse(free2, "e") == ()
        assert parse(free2, "a") == ((2, 1),)
        assert parse(free2, "b^-1") == ((3, -1),)

    def test_parse_errors_carry_positions(self, free2):
        with pytest.raises(UsageError, match="token 1"):
            parse(free2, "x0")
        with pytest.raises(UsageError, match="token 2"):
            parse(free2, "a x3")
        with pytest.raises(UsageError, match="token 3"):
            parse(free2, "a b c")
        with pytest.raises(UsageError, match="exponent"):
            parse(free2, "a^2")

    def test_format_round_trip(self, free2):
        for text in ("e", "x1 x2^-1 a b^-1", "b b", "x2 a a a^-1"):
            w = parse(free2, text)
            assert parse(free2, wreath.format_word(free2, w)) == w

    def test_reduce_word(self, free2):
        w = parse(free2, "x1 x1^-1 a b b^-1 a^-1")
        assert wreath.reduce_word(w) == ()

    def test_iter_reduced_words_census(self, free2):
        words = list(wreath.iter_reduced_words(free2, 2))
        assert len(words) == 1 + 8 + 8 * 7
        assert words[0] == ()
        assert len(set(words)) == len(words)
        for w in words:
            assert wreath.reduce_word(w) == w


class TestCollect:
    def test_pure_ambient_word(self, free2):
        cf = wreath.collect(free2, parse(free2, "x1"))
        assert cf.factors == ()
        assert cf.tail == free2.parse("x1")

    def test_hand_rewritten_example_1(self, free2):
        cf = wreath.collect(free2, parse(free2, "a x1 b x1^-1"))
        assert cf.factors == (
            (free2.identity, A_KIND, 1),
            (free2.parse("x1"), B_KIND, 1),
        )
        assert cf.tail == free2.identity

    def test_hand_rewritten_example_2(self, free2):
        cf = wreath.collect(free2, parse(free2, "x1 a x1^-1 x1 b"))
        assert cf.factors == (
            (free2.parse("x1"), A_KIND, 1),
            (free2.parse("x1"), B_KIND, 1),
        )
        assert cf.tail == free2.parse("x1")

    def test_aggregation_merges_and_drops(self, free2):
        cf = wreath.collect(free2, parse(free2, "a b b^-1 a"))
        assert cf.factors == ((free2.identity, A_KIND, 2),)
        cf2 = wreath.collect(free2, parse(free2, "a a^-1"))
        assert cf2.factors == ()

    def test_conjugator_length_bounded_by_word_length(self, free2):
        rng = random.Random(3)
        words = list(wreath.iter_reduced_words(free2, 5))
        for w in rng.sample(words, 300):
            cf = wreath.collect(free2, w)
            for conj, _, _ in cf.factors:
                assert free2.length(conj) <= len(w)

    def test_collect_invariant_under_free_reduction(self, free2):
        # unreduced words collect to the same factors as their reductions
        w = parse(free2, "x1 x1^-1 b x2 x2^-1 b a")
        cf = wreath.collect(free2, w)
        cf2 = wreath.collect(free2, wreath.reduce_word(w))
        assert cf == cf2

    def test_tail_is_ambient_projection(self, free2):
        w = parse(free2, "x1 a x2 b^-1 x1^-1")
        cf = wreath.collect(free2, w)
        assert cf.tail == free2.parse("x1 x2 x1^-1")

    def test_recomposition_through_the_oracle(self, free2, s3):
        """Spelling the collected form back out gives the same group element."""
        s = ForcedSubset(free2)
        rng = random.Random(9)
        words = list(wreath.iter_reduced_words(free2, 3))
        words += rng.sample(list(wreath.iter_reduced_words(free2, 6)), 150)
        for w in words:
            cf = wreath.collect(free2, w)
            respelled = wreath.word_from_collected(free2, cf)
            assert wreath.elements_equal(free2, s3, s, w, respelled), w


class TestClassPartition:
    def test_partition_by_conjugator(self, free2):
        cf = wreath.collect(free2, parse(free2, "b x1 b x1^-1 b^-1 x1 b"))
        part = wreath.partition_classes(cf)
        assert len(part.classes) == 2
        by_conj = {c.conjugator: c for c in part.classes}
        assert by_conj[free2.identity].exponent_sum == 1 + -1
        assert by_conj[free2.parse("x1")].exponent_sum == 1 + 1
        assert by_conj[free2.identity].members == (0, 2)
        assert by_conj[free2.parse("x1")].members == (1, 3)


class TestEvaluateAt:
    def test_delta_at_identity(self, free2, s3, fresh_subset):
        cf = wreath.collect(free2, parse(free2, "a"))
        assert wreath.evaluate_at(free2, s3, fresh_subset, cf, free2.identity) == s3.gen_a
        assert (
            wreath.evaluate_at(free2, s3, fresh_subset, cf, free2.parse("x1"))
            == s3.identity
        )

    def test_commutator_at_pinned_identity(self, free2, s3):
        s = ForcedSubset(free2)
        s.pin(free2.identity, True)
        cf = wreath.collect(free2, parse(free2, "a b a^-1 b^-1"))
        got = wreath.evaluate_at(free2, s3, s, cf, free2.identity)
        comm = s3.mul[s3.mul[s3.mul[s3.gen_a][s3.gen_b]][s3.inv[s3.gen_a]]][s3.inv[s3.gen_b]]
        assert got == comm != s3.identity

    def test_evaluation_pins_the_oracle(self, free2, s3, fresh_subset):
        cf = wreath.collect(free2, parse(free2, "x1 b x1^-1"))
        wreath.evaluate_at(free2, s3, fresh_subset, cf, free2.identity)
        assert fresh_subset.peek(free2.parse("x1^-1")) is False


class TestGenericOracle:
    def test_free_cancellation(self, free2, s3, fresh_subset):
        assert wreath.is_identity_generic(
            free2, s3, fresh_subset, parse(free2, "x1 x1^-1")
        ).identity

    def test_bb_identity_with_window_cross_check(self, free2, s3, fresh_subset):
        w = parse(free2, "b b")
        assert wreath.is_identity_generic(free2, s3, fresh_subset, w).identity
        assert wreath.is_identity_window(
            free2, s3, fresh_subset, w, 8
        ).identity_up_to_window

    def test_nontrivial_tail(self, free2, s3, fresh_subset):
        v = wreath.is_identity_generic(free2, s3, fresh_subset, parse(free2, "x1 b"))
        assert not v.identity
        assert v.witness_tail == free2.parse("x1")

    def test_sigma_violation_witness(self, free2, s3, fresh_subset):
        w = parse(free2, "x1 b x1^-1 b^-1")
        v = wreath.is_identity_generic(free2, s3, fresh_subset, w)
        assert not v.identity
        h = v.witness_point
        # h in x1.S but not in S
        assert fresh_subset.query(free2.mul(free2.parse("x1^-1"), h)) is True
        assert fresh_subset.query(h) is False
        cf = wreath.collect(free2, w)
        assert wreath.evaluate_at(free2, s3, fresh_subset, cf, h) != s3.identity

    def test_a_point_violation(self, free2, s3):
        s = ForcedSubset(free2)
        s.pin(free2.identity, True)
        w = parse(free2, "b a b^-1 a^-1")  # fires only at the identity point
        v = wreath.is_identity_generic(free2, s3, s, w)
        assert not v.identity
        assert v.witness_point == free2.identity

    def test_q8_exponent_four(self, free2):
        q8 = groups.preset_table("q8")
        s = ForcedSubset(free2)
        assert not wreath.is_identity_generic(free2, q8, s, parse(free2, "b b")).identity
        assert wreath.is_identity_generic(free2, q8, s, parse(free2, "b b b b")).identity

    def test_rejects_frozen_subset(self, free2, s3):
        with pytest.raises(UsageError):
            wreath.is_identity_generic(free2, s3, FrozenSubset(()), parse(free2, "b"))

    def test_elements_equal(self, free2, s3, fresh_subset):
        w = parse(free2, "x1 a")
        assert wreath.elements_equal(free2, s3, fresh_subset, w, w)
        assert not wreath.elements_equal(
            free2, s3, fresh_subset, parse(free2, "a"), parse(free2, "b")
        )

    def test_translate_vs_base_words_differ_after_realization(self, free2, s3):
        s = ForcedSubset(free2)
        trans = TranslatedSubset(s, free2.parse("x1"))
        w1 = parse(free2, "x1 b x1^-1")
        w2 = parse(free2, "b")
        # force a difference between x1.S and S at some point
        v = wreath.is_identity_generic(free2, s3, s, parse(free2, "x1 b x1^-1 b^-1"))
        assert not v.identity
        assert not wreath.elements_equal(free2, s3, s, w1, w2)


class TestWindowOracle:
    def test_tail_violation(self, free2, s3, fresh_subset):
        v = wreath.is_identity_window(free2, s3, fresh_subset, parse(free2, "x1"), 2)
        assert v.witness_tail == free2.parse("x1")
        assert not v.identity_up_to_window

    def test_bb_identity_up_to_window(self, free2, s3, fresh_subset):
        v = wreath.is_identity_window(free2, s3, fresh_subset, parse(free2, "b b"), 6)
        assert v.identity_up_to_window

    def test_pinned_identity_violates_b(self, free2, s3):
        s = ForcedSubset(free2)
        s.pin(free2.identity, True)
        v = wreath.is_identity_window(free2, s3, s, parse(free2, "b"), 1)
        assert v.violation == free2.identity

    def test_small_window_still_conclusive_on_violations(self, free2, s3):
        s = ForcedSubset(free2)
        s.pin(free2.identity, True)
        w = parse(free2, "x1 x1^-1 b")  # longer than the window
        v = wreath.is_identity_window(free2, s3, s, w, 1)
        assert v.violation == free2.identity
        with pytest.raises(UsageError):
            wreath.is_identity_window(free2, s3, s, w, -1)

    def test_zd_backend(self, zd2, s3):
        s = ForcedSubset(zd2)
        s.pin(zd2.identity, True)
        v = wreath.is_identity_window(zd2, s3, s, parse(zd2, "b"), 2)
        assert v.violation == zd2.identity

    def test_window_scan_does_not_pin(self, free2, s3, fresh_subset):
        fresh_subset.query(free2.parse("x1"))
        before = fresh_subset.pin_count
        wreath.is_identity_window(free2, s3, fresh_subset, parse(free2, "b b"), 8)
        assert fresh_subset.pin_count == before


class TestFrozenExact:
    def test_empty_subset_kills_b(self, free2, s3):
        empty = FrozenSubset(())
        assert wreath.is_identity_frozen(free2, s3, empty, parse(free2, "b")).identity
        assert not wreath.is_identity_frozen(free2, s3, empty, parse(free2, "a")).identity

    def test_matches_window_oracle(self, free2, s3):
        frozen = FrozenSubset((free2.identity, free2.parse("x1")))
        for w in wreath.iter_reduced_words(free2, 3):
            exact = wreath.is_identity_frozen(free2, s3, frozen, w)
            scan = wreath.is_identity_window(free2, s3, frozen, w, len(w) + 2)
            assert exact.identity == scan.identity_up_to_window


class TestOracleAgreement:
    """Completeness vs window on all short words (the acceptance run covers length 6)."""

    def test_generic_vs_window_all_words_up_to_4(self, free2, s3):
        s = ForcedSubset(free2)
        disagreements = []
        for w in wreath.iter_reduced_words(free2, 4):
            v = wreath.is_identity_generic(free2, s3, s, w)
            if v.identity:
                wv = wreath.is_identity_window(free2, s3, s, w, 8)
                if not wv.identity_up_to_window:
                    disagreements.append(w)
            else:
                if v.witness_tail is None:
                    cf = wreath.collect(free2, w)
                    assert (
                        wreath.evaluate_at(free2, s3, s, cf, v.witness_point)
                        != s3.identity
                    )
        assert disagreements == []

    def test_zd_backend_generic_vs_window(self, zd2, s3):
        s = ForcedSubset(zd2)
        for w in wreath.iter_reduced_words(zd2, 3):
            v = wreath.is_identity_generic(zd2, s3, s, w)
            if v.identity:
                wv = wreath.is_identity_window(zd2, s3, s, w, 6)
                assert wv.identity_up_to_window, w
            elif v.witness_tail is None:
                cf = wreath.collect(zd2, w)
                assert wreath.evaluate_at(zd2, s3, s, cf, v.witness_point) != s3.identity

    @pytest.mark.parametrize("preset", ["s3", "d4", "q8"])
    def test_generic_vs_window_short_words_all_presets(self, free2, preset):
        table = groups.preset_table(preset)
        s = ForcedSubset(free2)
        for w in wreath.iter_reduced_words(free2, 4):
            v = wreath.is_identity_generic(free2, table, s, w)
            if v.identity:
                wv = wreath.is_identity_window(free2, table, s, w, 8)
                assert wv.identity_up_to_window, (preset, w)
            elif v.witness_tail is None:
                cf = wreath.collect(free2, w)
                value = wreath.evaluate_at(free2, table, s, cf, v.witness_point)
                assert value != table.identity, (preset, w)

    def test_window_nonidentity_implies_generic_nonidentity(self, free2, s3):
        s = ForcedSubset(free2)
        s.pin(free2.identity, True)
        s.pin(free2.parse("x1"), True)
        for w in wreath.iter_reduced_words(free2, 3):
            wv = wreath.is_identity_window(free2, s3, s, w, 6)
            if not wv.identity_up_to_window:
                assert not wreath.is_identity_generic(free2, s3, s, w).identity

    def test_sufficiency_is_oracle_independent(self, free2, s3):
        """Identity verdicts survive arbitrary extensions of the pinned stage."""
        s = ForcedSubset(free2)
        identities = []
        for w in wreath.iter_reduced_words(free2, 4):
            if wreath.is_identity_generic(free2, s3, s, w).identity:
                identities.append(w)
        rng = random.Random(11)
        pool = [g for g in free2.ball(5) if s.peek(g) is None]
        for trial in range(5):
            extra = rng.sample(pool, 40)
            trues = tuple(s.iter_true_points()) + tuple(extra)
            extended = FrozenSubset(trues)
            for w in rng.sample(identities, min(len(identities), 60)):
                assert wreath.is_identity_frozen(free2, s3, extended, w).identity


class TestWindows:
    def test_letter_windows(self, free2, s3):
        s = ForcedSubset(free2)
        s.pin(free2.identity, True)
        aw = wreath.letter_window(free2, s3, s, (2, 1), 6)
        assert aw.values == ((free2.identity, s3.gen_a),)
        assert aw.tail == free2.identity
        bw = wreath.letter_window(free2, s3, s, (3, 1), 6)
        assert bw.values == ((free2.identity, s3.gen_b),)
        xw = wreath.letter_window(free2, s3, s, (0, 1), 6)
        assert xw.values == ()
        assert xw.tail == free2.parse("x1")

    def test_recomposition_on_sampled_words(self, free2, s3):
        s = ForcedSubset(free2)
        # realize a few points so the subset is not empty
        for text in ("b", "x1 b x1^-1 b^-1", "x2 b x2^-1 b"):
            wreath.is_identity_generic(free2, s3, s, parse(free2, text))
        rng = random.Random(5)
        words = [w for w in wreath.iter_reduced_words(free2, 3)]
        words += rng.sample(list(wreath.iter_reduced_words(free2, 6)), 200)
        radius = 8
        for w in words:
            cf = wreath.collect(free2, w)
            direct = wreath.function_window(free2, s3, s, cf, radius)
            letterwise = wreath.word_window(free2, s3, s, w, radius + len(w))
            assert letterwise.radius >= radius
            assert wreath.windows_agree(free2, direct, letterwise, radius), w

    def test_window_mul_matches_pointwise(self, free2, s3):
        s = ForcedSubset(free2)
        s.pin(free2.identity, True)
        s.pin(free2.parse("x2"), True)
        w1 = parse(free2, "x1 b x1^-1")
        w2 = parse(free2, "b a")
        cf12 = wreath.collect(free2, w1 + w2)
        direct = wreath.function_window(free2, s3, s, cf12, 4)
        prod = wreath.window_mul(
            free2,
            s3,
            wreath.function_window(free2, s3, s, wreath.collect(free2, w1), 6),
            wreath.function_window(free2, s3, s, wreath.collect(free2, w2), 6),
        )
        assert wreath.windows_agree(free2, direct, prod, 4)

    def test_conjugation_identity_on_ball5(self, free2, s3):
        """Window of h * (b-generator) * h^-1 equals that of the translate marking."""
        s = ForcedSubset(free2)
        # make the subset non-trivial first
        for text in ("b", "x1 b x1^-1 b^-1"):
            wreath.is_identity_generic(free2, s3, s, parse(free2, text))
        b_cf = wreath.collect(free2, parse(free2, "b"))
        shifts = [h for h in free2.ball(4) if h != free2.identity][:20]
        for h in shifts:
            base = wreath.function_window(free2, s3, s, b_cf, 5 + free2.length(h))
            conj = wreath.window_conjugate(free2, s3, base, h)
            translated = wreath.function_window(
                free2, s3, TranslatedSubset(s, h), b_cf, 5
            )
            assert wreath.windows_agree(free2, conj, translated, 5), free2.format(h)
