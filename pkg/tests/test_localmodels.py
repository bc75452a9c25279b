"""Blowup local models: blowdowns, transitions, cocycles, exceptional loci."""

import itertools
import random

import pytest

from artifact.exactfield import GaussRat
from artifact.localmodels import (
    PRESETS,
    BlowupPoint,
    LocalModelError,
    Model,
    TransitionDomainError,
    blowdown,
    cocycle_check,
    corrupted_chart_control,
    exceptional_classify,
    lemma_hypothesis_check,
    sample_point,
    transition,
    verify_model,
)

G = GaussRat


class TestModels:
    def test_presets(self):
        assert PRESETS["real3"].charts() == [(1, 1), (1, 2), (1, 3)]
        assert PRESETS["complex2"].charts() == [(1, 1), (1, 2)]
        assert PRESETS["aug31"].charts() == [(1, 1), (2, 0), (2, 1)]

    def test_validation(self):
        with pytest.raises(LocalModelError):
            Model("augmented", c=3, m=1)  # missing c1
        with pytest.raises(LocalModelError):
            Model("real", c=1, m=0)
        with pytest.raises(LocalModelError):
            # complex scalar in a real model
            BlowupPoint(PRESETS["real3"], (1, 1), (G(0, 1), G(1), G(1), G(1)))


class TestStandardBlowdown:
    def test_chart1_formula(self):
        t, a, b, s = G(2), G(3), G(5), G(7)
        p = BlowupPoint(PRESETS["real3"], (1, 1), (t, a, b, s))
        assert blowdown(p) == (t, a * t, b * t, s)

    def test_center_image(self):
        a, b, s = G(3), G(5), G(7)
        p = BlowupPoint(PRESETS["real3"], (1, 1), (G(0), a, b, s))
        assert blowdown(p) == (G(0), G(0), G(0), s)

    def test_transition_chart1_to_2(self):
        t, a, b, s = G(2), G(3), G(5), G(7)
        p = BlowupPoint(PRESETS["real3"], (1, 1), (t, a, b, s))
        q = transition(p, (1, 2))
        assert q.coords == (G(1) / a, a * t, b / a, s)

    def test_identity_transition(self):
        p = BlowupPoint(PRESETS["real3"], (1, 2), (G(1), G(2), G(3), G(4)))
        assert transition(p, (1, 2)) is p

    def test_out_of_domain(self):
        p = BlowupPoint(PRESETS["real3"], (1, 1), (G(2), G(0), G(5), G(7)))
        with pytest.raises(TransitionDomainError):
            transition(p, (1, 2))


class TestAugmentedBlowdown:
    def test_second_family_chart0_formula(self):
        r0, v1, v2, s = G(2), G(3), G(5), G(7)
        p = BlowupPoint(PRESETS["aug31"], (2, 0), (r0, v1, v2, s))
        assert blowdown(p) == ((v1 * v1 + v2 * v2) * r0, v1, v2, s)

    def test_gluing_preserves_blowdown(self):
        p = BlowupPoint(PRESETS["aug31"], (2, 0), (G(2), G(3), G(5), G(7)))
        q = transition(p, (1, 1))
        assert blowdown(q) == blowdown(p)
        assert transition(q, (2, 0)).coords == p.coords

    def test_gluing_needs_nonzero_v_block(self):
        p = BlowupPoint(PRESETS["aug31"], (2, 0), (G(2), G(0), G(0), G(7)))
        with pytest.raises(TransitionDomainError):
            transition(p, (1, 1))

    def test_all_chart_pairs_blowdown_invariant(self):
        rng = random.Random("aug-pairs")
        m = PRESETS["aug31"]
        for n in range(60):
            chart = m.charts()[n % 3]
            p = sample_point(m, chart, rng, avoid_zero=True)
            img = blowdown(p)
            for target in m.charts():
                try:
                    q = transition(p, target)
                except TransitionDomainError:
                    continue
                assert blowdown(q) == img


class TestCocycle:
    @pytest.mark.parametrize("preset", sorted(PRESETS))
    def test_random_triples(self, preset):
        m = PRESETS[preset]
        rng = random.Random("cocycle:" + preset)
        checked = 0
        for n in range(40):
            p = sample_point(m, m.charts()[n % len(m.charts())], rng,
                             avoid_zero=True)
            for a, a1 in itertools.product(m.charts(), repeat=2):
                try:
                    ok = cocycle_check(p, a, a1, p.chart)
                except TransitionDomainError:
                    continue
                checked += 1
                assert ok
        assert checked > 0


class TestExceptional:
    def test_standard(self):
        m = PRESETS["real3"]
        assert exceptional_classify(
            BlowupPoint(m, (1, 2), (G(1), G(0), G(2), G(3)))) == "E"
        assert exceptional_classify(
            BlowupPoint(m, (1, 2), (G(1), G(5), G(2), G(3)))) == "off"

    def test_augmented(self):
        m = PRESETS["aug31"]
        mk = lambda ch, *cs: exceptional_classify(BlowupPoint(m, ch, tuple(cs)))
        assert mk((2, 0), G(2), G(0), G(0), G(1)) == "E0"
        assert mk((2, 1), G(0), G(0), G(0), G(1)) == "E0&E-"
        assert mk((2, 1), G(0), G(3), G(5), G(1)) == "E-"
        assert mk((1, 1), G(0), G(3), G(5), G(1)) == "E-"
        assert mk((2, 0), G(2), G(3), G(5), G(1)) == "off"

    def test_e_minus_off_e_zero_blows_down_into_center(self):
        # every E- point off E0 has blowdown image on the center 0 x R^m
        m = PRESETS["aug31"]
        rng = random.Random("eminus")
        for n in range(40):
            p0 = sample_point(m, (2, 1), rng, avoid_zero=True)
            coords = (GaussRat(0),) + p0.coords[1:]
            p = BlowupPoint(m, (2, 1), coords)
            assert exceptional_classify(p) == "E-"
            img = blowdown(p)
            assert all(z.is_zero() for z in img[: m.c])


class TestLemmaRelations:
    @pytest.mark.parametrize("preset", sorted(PRESETS))
    def test_hold_on_samples(self, preset):
        m = PRESETS[preset]
        rng = random.Random("lemma:" + preset)
        for n in range(60):
            p = sample_point(m, m.charts()[n % len(m.charts())], rng)
            assert lemma_hypothesis_check(m, p)["all_ok"]

    @pytest.mark.parametrize("preset", sorted(PRESETS))
    def test_corrupted_chart_fails(self, preset):
        m = PRESETS[preset]
        rng = random.Random("corrupt:" + preset)
        for n in range(40):
            p = sample_point(m, m.charts()[n % len(m.charts())], rng,
                             avoid_zero=True)
            assert corrupted_chart_control(m, p)


class TestInjectivity:
    def test_distinct_off_exceptional_points_distinct_images(self):
        # within a single chart, the blowdown is injective off E
        m = PRESETS["real3"]
        rng = random.Random("inj")
        seen = {}
        for n in range(200):
            p = sample_point(m, (1, 1), rng, avoid_zero=True)
            img = tuple(z.serialize() for z in blowdown(p))
            key = tuple(z.serialize() for z in p.coords)
            if img in seen:
                assert seen[img] == key
            seen[img] = key


class TestVerifyModel:
    @pytest.mark.parametrize("preset", sorted(PRESETS))
    def test_green(self, preset):
        rep = verify_model(preset, n_samples=60)
        assert rep["ok"]
        assert rep["injective_off_exceptional"]
        assert rep["negative_control"]["pass"] == rep["negative_control"]["total"]
        assert all(v["pass"] == v["total"] for v in rep["relations"].values())
