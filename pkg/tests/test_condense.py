from __future__ import annotations

import pytest

from wreathcert import condense, wreath
from wreathcert.errors import UsageError
from wreathcert.forcing import ForcedSubset, TranslatedSubset
from wreathcert.marked import build_ball, r_similar


class TestXi:
    def test_base_marking(self, free2, s3, fresh_subset):
        spec = condense.xi(fresh_subset, s3)
        assert spec.arity == 4
        assert spec.subset is fresh_subset

    def test_identity_translate_same_answers(self, free2, s3, fresh_subset):
        fresh_subset.pin(free2.parse("x1"), True)
        spec = condense.xi(fresh_subset, s3, translate=free2.identity)
        for g in free2.ball(2):
            assert spec.member(g) == fresh_subset.query(g)

    def test_translate_composes_queries(self, free2, s3, fresh_subset):
        h = free2.parse("x1 x2")
        spec = condense.xi(fresh_subset, s3, translate=h)
        fresh_subset.pin(free2.identity, True)
        assert spec.member(h) is True
        assert spec.member(free2.identity) is False


class TestCommutatorWord:
    def test_shape(self, free2):
        s = free2.parse("x1 x2^-1")
        w = condense.commutator_word(free2, s)
        assert wreath.format_word(free2, w) == (
            "x2 x1^-1 b x1 x2^-1 a x2 x1^-1 b^-1 x1 x2^-1 a^-1"
        )

    def test_collects_to_zero_sums(self, free2, s3):
        s = free2.parse("x2 x2")
        cf = wreath.collect(free2, condense.commutator_word(free2, s))
        assert cf.tail == free2.identity
        part = wreath.partition_classes(cf)
        assert [c.exponent_sum for c in part.classes] == [0]
        assert part.classes[0].conjugator == free2.inv(s)


class TestDistinguish:
    def test_same_subset_inconclusive(self, free2, s3, fresh_subset):
        spec = condense.xi(fresh_subset, s3)
        assert condense.distinguish(spec, spec, 2) is None

    def test_pinned_difference_found(self, free2, s3):
        p = free2.parse("x1 x2")
        s = ForcedSubset(free2)
        t = ForcedSubset(free2)
        s.pin(p, True)
        t.pin(p, False)
        w = condense.distinguish(condense.xi(s, s3), condense.xi(t, s3), 2)
        assert w is not None
        assert w.point == p
        assert w.side == "first"
        # the word is the commutator of the conjugated b with a
        assert w.word == condense.commutator_word(free2, p)

    def test_verdicts_differ_between_sides(self, free2, s3):
        p = free2.parse("x2^-1")
        s = ForcedSubset(free2)
        t = ForcedSubset(free2)
        s.pin(p, True)
        t.pin(p, False)
        ms, mt = condense.xi(s, s3), condense.xi(t, s3)
        w = condense.distinguish(ms, mt, 1)
        assert not ms.verdict(w.word).identity
        assert mt.verdict(w.word).identity

    def test_twenty_single_point_differences(self, free2, s3):
        ball3 = free2.ball(3)
        for i in range(20):
            p = ball3[i]
            s = ForcedSubset(free2)
            t = ForcedSubset(free2)
            s.pin(p, True)
            t.pin(p, False)
            ms, mt = condense.xi(s, s3), condense.xi(t, s3)
            w = condense.distinguish(ms, mt, 3)
            assert w is not None and w.point == p
            containing = ms if w.side == "first" else mt
            wv = wreath.is_identity_window(
                free2,
                s3,
                containing.subset,
                w.word,
                free2.length(p) + 2,
            )
            assert not wv.identity_up_to_window


class TestCertify:
    def test_radius_zero_rejected(self, free2, s3, fresh_subset):
        with pytest.raises(UsageError):
            condense.certify_condensed(fresh_subset, s3, 0)

    def test_certificate_invariants_r1(self, free2, s3, fresh_subset):
        cert = condense.certify_condensed(fresh_subset, s3, 1)
        assert cert.shift != free2.identity
        assert free2.length(cert.shift) > 8  # past the doubled agreement ball
        assert cert.agreement.window == tuple(free2.ball(4))
        assert cert.witness.side == "second"
        assert condense.verify_certificate(fresh_subset, s3, cert) is None

    def test_sequential_certificates_share_one_subset(self, free2, s3, fresh_subset):
        c1 = condense.certify_condensed(fresh_subset, s3, 1)
        c2 = condense.certify_condensed(fresh_subset, s3, 2)
        assert c1.shift != c2.shift
        # append-only pinning keeps the first certificate valid
        assert condense.verify_certificate(fresh_subset, s3, c1) is None
        assert condense.verify_certificate(fresh_subset, s3, c2) is None

    def test_translate_coherence_on_agreement_ball(self, free2, s3, fresh_subset):
        cert = condense.certify_condensed(fresh_subset, s3, 1)
        h = cert.shift
        trans = TranslatedSubset(fresh_subset, h)
        for f in cert.agreement.window:
            assert trans.query(f) == fresh_subset.query(f)

    def test_translate_window_equals_conjugated_window(self, free2, s3, fresh_subset):
        """The translate marking's b-generator is the conjugate of the base one."""
        cert = condense.certify_condensed(fresh_subset, s3, 1)
        h = cert.shift
        reach = 4 * cert.radius
        b_cf = wreath.collect(free2, wreath.parse_word(free2, "b"))
        base = wreath.function_window(
            free2, s3, fresh_subset, b_cf, reach + free2.length(h)
        )
        conjugated = wreath.window_conjugate(free2, s3, base, h)
        translated = wreath.function_window(
            free2, s3, TranslatedSubset(fresh_subset, h), b_cf, reach
        )
        assert wreath.windows_agree(free2, conjugated, translated, reach)

    def test_balls_similar_but_markings_distinct(self, free2, s3, fresh_subset):
        cert = condense.certify_condensed(fresh_subset, s3, 1)
        base = condense.xi(fresh_subset, s3)
        shifted = condense.xi(fresh_subset, s3, translate=cert.shift)
        assert r_similar(build_ball(base, 1), build_ball(shifted, 1))
        assert base.verdict(cert.witness.word).identity
        assert not shifted.verdict(cert.witness.word).identity


class TestVerifyCertificate:
    def _cert(self, free2, s3):
        s = ForcedSubset(free2)
        return s, condense.certify_condensed(s, s3, 1)

    def test_tampered_shift(self, free2, s3):
        s, cert = self._cert(free2, s3)
        bad = condense.CondensationCertificate(
            cert.radius,
            free2.identity,
            cert.agreement,
            cert.witness,
            cert.ball_digests,
            cert.tool_version,
        )
        assert condense.verify_certificate(s, s3, bad) == "h is identity"

    def test_tampered_agreement_bit(self, free2, s3):
        s, cert = self._cert(free2, s3)
        flipped = list(cert.agreement.members)
        extra = cert.agreement.window[3]
        flipped.append(extra)
        from wreathcert.forcing import Pattern

        bad = condense.CondensationCertificate(
            cert.radius,
            cert.shift,
            Pattern(tuple(flipped), cert.agreement.window),
            cert.witness,
            cert.ball_digests,
            cert.tool_version,
        )
        failure = condense.verify_certificate(s, s3, bad)
        assert failure == f"agreement mismatch at {free2.format(extra)}"

    def test_tampered_digest(self, free2, s3):
        s, cert = self._cert(free2, s3)
        bad = condense.CondensationCertificate(
            cert.radius,
            cert.shift,
            cert.agreement,
            cert.witness,
            (cert.ball_digests[0], cert.ball_digests[0][:-3]),
            cert.tool_version,
        )
        assert condense.verify_certificate(s, s3, bad) == "ball digest mismatch"

    def test_round_trip_through_dict(self, free2, s3):
        s, cert = self._cert(free2, s3)
        data = condense.certificate_to_dict(free2, cert)
        back = condense.certificate_from_dict(free2, data)
        assert back == cert
        assert condense.verify_certificate(s, s3, back) is None
