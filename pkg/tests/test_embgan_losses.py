"""Closed-form checks for the adversarial/cycle/identity/embedding losses."""

import math

import numpy as np
import pytest

from stitchwork import Tensor, grad_check
from stitchwork.embgan import (
    Generator,
    GeneratorConfig,
    adversarial_loss,
    cycle_loss,
    embedding_loss,
    identity_loss,
    total_objective,
    with_zero_embedding,
)
from stitchwork.tensor import ShapeError


class TestAdversarialLoss:
    def test_uniform_half_scores(self):
        half = Tensor(np.full((2, 1, 3, 3), 0.5))
        d_obj, _ = adversarial_loss(half, half)
        np.testing.assert_allclose(float(d_obj.data), 2.0 * math.log(0.5), atol=1e-6)

    def test_perfect_discriminator_limit(self):
        values = []
        for eps in (1e-2, 1e-4, 1e-6):
            real = Tensor(np.full((4,), 1.0 - eps))
            fake = Tensor(np.full((4,), eps))
            d_obj, _ = adversarial_loss(real, fake)
            values.append(float(d_obj.data))
        assert values[0] < values[1] < values[2] < 0.0
        assert abs(values[-1]) < 1e-5

    def test_g_objective_monotone_in_fake_scores(self):
        real = Tensor(np.full((4,), 0.5))
        lows = adversarial_loss(real, Tensor(np.full((4,), 0.2)))[1]
        highs = adversarial_loss(real, Tensor(np.full((4,), 0.8)))[1]
        assert float(highs.data) < float(lows.data)

    def test_non_saturating_variant(self):
        real = Tensor(np.full((4,), 0.5))
        fake = Tensor(np.full((4,), 0.25))
        _, g = adversarial_loss(real, fake, non_saturating=True)
        np.testing.assert_allclose(float(g.data), -math.log(0.25), atol=1e-12)

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, 1.1])
    def test_scores_outside_open_interval_rejected(self, bad):
        good = Tensor(np.full((3,), 0.5))
        with pytest.raises(ValueError, match="strictly inside"):
            adversarial_loss(Tensor(np.array([0.5, bad, 0.5])), good)
        with pytest.raises(ValueError, match="strictly inside"):
            adversarial_loss(good, Tensor(np.array([0.5, bad, 0.5])))


class TestCycleLoss:
    def test_identical_batches_zero(self):
        x = Tensor(np.random.default_rng(0).random((2, 3, 4, 4)))
        assert float(cycle_loss(x, x).data) == 0.0

    def test_constant_offset_closed_form(self):
        rng = np.random.default_rng(1)
        x = rng.random((2, 3, 4, 4)) * 0.5
        loss = cycle_loss(Tensor(x), Tensor(x + 0.25))
        np.testing.assert_allclose(float(loss.data), 0.25, atol=1e-6)

    def test_symmetric_in_offset_sign(self):
        rng = np.random.default_rng(2)
        x = rng.random((1, 3, 4, 4)) * 0.5 + 0.3
        plus = float(cycle_loss(Tensor(x), Tensor(x + 0.1)).data)
        minus = float(cycle_loss(Tensor(x), Tensor(x - 0.1)).data)
        np.testing.assert_allclose(plus, minus, atol=1e-12)

    def test_shape_mismatch_raises(self):
        with pytest.raises(ShapeError):
            cycle_loss(Tensor(np.zeros((1, 3, 4, 4))), Tensor(np.zeros((1, 3, 4, 5))))


class _ShiftGenerator:
    """Stub generator: adds a constant to the image channels."""

    def __init__(self, shift, c=3, k=1):
        self.shift = shift
        self.config = GeneratorConfig(image_channels=c, embedding_channels=k)

    def forward(self, x):
        c = self.config.image_channels
        img = x[:, :c] + self.shift
        emb = x[:, c:]
        from stitchwork.tensor import concatenate

        return concatenate([img, emb], axis=1)


class TestIdentityLoss:
    def test_identity_generators_zero(self):
        rng = np.random.default_rng(3)
        x = Tensor(rng.random((2, 3, 4, 4)))
        y = Tensor(rng.random((2, 3, 4, 4)))
        g = _ShiftGenerator(0.0)
        assert float(identity_loss(g, g, x, y).data) == 0.0

    def test_shift_closed_form(self):
        rng = np.random.default_rng(4)
        x = Tensor(rng.random((2, 3, 4, 4)) * 0.5)
        y = Tensor(rng.random((2, 3, 4, 4)) * 0.5)
        g1 = _ShiftGenerator(0.0)  # X->Y generator is exact on y
        g2 = _ShiftGenerator(0.1)  # Y->X generator shifts x by 0.1
        loss = identity_loss(g1, g2, x, y)
        np.testing.assert_allclose(float(loss.data), 0.1, atol=1e-6)

    def test_non_negative(self):
        rng = np.random.default_rng(5)
        x = Tensor(rng.random((1, 3, 4, 4)))
        y = Tensor(rng.random((1, 3, 4, 4)))
        g1 = _ShiftGenerator(-0.2)
        g2 = _ShiftGenerator(0.3)
        assert float(identity_loss(g1, g2, x, y).data) >= 0.0


class TestEmbeddingLoss:
    def test_zero_embeddings(self):
        z = Tensor(np.zeros((2, 1, 4, 4)))
        assert float(embedding_loss(z, z).data) == 0.0

    def test_all_ones_planes_sum_to_two(self):
        ones = Tensor(np.ones((2, 1, 4, 4)))
        np.testing.assert_allclose(float(embedding_loss(ones, ones).data), 2.0, atol=1e-12)

    def test_homogeneous_in_magnitude(self):
        rng = np.random.default_rng(6)
        e1 = rng.standard_normal((2, 1, 4, 4))
        e2 = rng.standard_normal((2, 1, 4, 4))
        full = float(embedding_loss(Tensor(e1), Tensor(e2)).data)
        half = float(embedding_loss(Tensor(e1 / 2), Tensor(e2 / 2)).data)
        np.testing.assert_allclose(half, full / 2, atol=1e-12)


class TestTotalObjective:
    def _components(self):
        vals = dict(g_adv1=-0.3, g_adv2=-0.4, d_adv1=-1.2, d_adv2=-1.1,
                    cyc1=0.2, cyc2=0.3, idt=0.15, emb=0.05)
        return {k: Tensor(np.array(v)) for k, v in vals.items()}

    def test_degenerate_lambdas_reduce_to_adv_plus_cycle(self):
        c = self._components()
        g_total, d_total = total_objective(**c, lambda_idt=0.0, lambda_emb=0.0, lambda_cyc=1.0)
        np.testing.assert_allclose(float(g_total.data), -0.3 - 0.4 + 0.2 + 0.3, atol=1e-12)
        np.testing.assert_allclose(float(d_total.data), -2.3, atol=1e-12)

    def test_affine_in_lambda_idt(self):
        c = self._components()
        g0, _ = total_objective(**c, lambda_idt=0.0, lambda_emb=1.0, lambda_cyc=1.0)
        g1, _ = total_objective(**c, lambda_idt=2.0, lambda_emb=1.0, lambda_cyc=1.0)
        np.testing.assert_allclose(float(g1.data) - float(g0.data), 2.0 * 0.15, atol=1e-12)

    def test_component_accounting(self):
        c = self._components()
        g_total, d_total = total_objective(**c, lambda_idt=5.0, lambda_emb=1.0, lambda_cyc=10.0)
        recomputed = (
            float(c["g_adv1"].data) + float(c["g_adv2"].data)
            + 10.0 * (float(c["cyc1"].data) + float(c["cyc2"].data))
            + 5.0 * float(c["idt"].data) + 1.0 * float(c["emb"].data)
        )
        np.testing.assert_allclose(float(g_total.data), recomputed, atol=1e-6)

    def test_negative_lambda_rejected(self):
        c = self._components()
        with pytest.raises(ValueError):
            total_objective(**c, lambda_idt=-1.0, lambda_emb=0.0, lambda_cyc=1.0)


class TestLossGradientsThroughGenerators:
    """Cycle/identity/embedding gradients w.r.t. generator parameters."""

    @pytest.mark.parametrize("param_name", ["init.w", "res0.c1.w", "up0.w", "final.b"])
    def test_grad_wrt_parameter(self, param_name):
        cfg = GeneratorConfig(image_channels=2, embedding_channels=1,
                              base_filters=4, downsamples=1, residual_blocks=1)
        gen = Generator(cfg, seed=0, dtype=np.float64)
        rng = np.random.default_rng(1)
        x = Tensor(rng.random((1, 2, 8, 8)))

        def fn(p):
            original = gen.params[param_name]
            gen.params[param_name] = p
            try:
                out = gen.forward(with_zero_embedding(x, 1))
                img = out[:, :2]
                emb = out[:, 2:]
                return cycle_loss(x, img) + embedding_loss(emb, emb) * 0.5
            finally:
                gen.params[param_name] = original

        assert grad_check(fn, gen.params[param_name]) < 1e-4
