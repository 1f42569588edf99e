"""Generator/discriminator shape contracts, ranges, determinism, spectral norm."""

import numpy as np
import pytest

from stitchwork import Tensor
from stitchwork.embgan import (
    Discriminator,
    DiscriminatorConfig,
    Generator,
    GeneratorConfig,
    with_zero_embedding,
)
from stitchwork.tensor import ShapeError

from oracles import largest_singular_value


def _small_gen(k=1, seed=0, dtype=np.float64):
    cfg = GeneratorConfig(image_channels=3, embedding_channels=k, base_filters=4,
                          downsamples=2, residual_blocks=2)
    return Generator(cfg, seed=seed, dtype=dtype)


class TestGenerator:
    def test_output_shape_matches_input(self):
        gen = _small_gen(k=1)
        x = with_zero_embedding(Tensor(np.random.default_rng(0).random((2, 3, 32, 32))), 1)
        out = gen.forward(x)
        assert out.shape == (2, 4, 32, 32)

    def test_image_channels_in_unit_interval(self):
        gen = _small_gen(k=1, seed=5)
        rng = np.random.default_rng(1)
        x = with_zero_embedding(Tensor(rng.random((1, 3, 16, 16))), 1)
        out = gen.forward(x).data
        assert out[:, :3].min() >= 0.0 and out[:, :3].max() <= 1.0

    def test_deterministic_per_seed(self):
        rng = np.random.default_rng(2)
        img = rng.random((1, 3, 16, 16))
        outs = []
        for _ in range(2):
            gen = _small_gen(seed=7)
            outs.append(gen.forward(with_zero_embedding(Tensor(img), 1)).data.tobytes())
        assert outs[0] == outs[1]

    def test_channel_mismatch_raises(self):
        gen = _small_gen(k=1)
        with pytest.raises(ShapeError, match="channels"):
            gen.forward(Tensor(np.zeros((1, 3, 16, 16))))  # missing embedding plane

    def test_multiple_embedding_channels(self):
        gen = _small_gen(k=3)
        x = with_zero_embedding(Tensor(np.random.default_rng(3).random((1, 3, 16, 16))), 3)
        out = gen.forward(x)
        assert out.shape == (1, 6, 16, 16)


class TestDiscriminator:
    def _disc(self, seed=0, dtype=np.float64, layers=4):
        cfg = DiscriminatorConfig(image_channels=3, base_filters=4, layers=layers)
        return Discriminator(cfg, seed=seed, dtype=dtype)

    def test_scores_strictly_inside_unit_interval(self):
        disc = self._disc(seed=1)
        rng = np.random.default_rng(4)
        scores = disc.forward(Tensor(rng.random((2, 3, 32, 32)))).data
        assert np.all(scores > 0.0) and np.all(scores < 1.0)

    def test_weight_scaling_washed_out_by_spectral_norm(self):
        # scaling every weight by 10 leaves each normalized weight's largest
        # singular value at 1 (SVD oracle per layer)
        from stitchwork.spectral import SpectralState, spectral_normalize

        disc = self._disc(seed=2)
        for name in disc.weight_names():
            w = disc.params[name]
            scaled = Tensor(w.data * 10.0)
            state = SpectralState(w.shape[0], seed=0, power_iterations=50)
            normalized = spectral_normalize(scaled, state).data
            sv = largest_singular_value(normalized.reshape(normalized.shape[0], -1))
            assert abs(sv - 1.0) < 1e-3

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        img = rng.random((1, 3, 16, 16))
        outs = []
        for _ in range(2):
            disc = self._disc(seed=3)
            outs.append(disc.forward(Tensor(img), update_u=True).data.tobytes())
        assert outs[0] == outs[1]

    def test_channel_mismatch_raises(self):
        disc = self._disc()
        with pytest.raises(ShapeError, match="channels"):
            disc.forward(Tensor(np.zeros((1, 4, 16, 16))))

    def test_update_u_flag_controls_persistence(self):
        disc = self._disc(seed=4)
        img = Tensor(np.random.default_rng(6).random((1, 3, 16, 16)))
        before = {n: s.u.copy() for n, s in disc.spectral.items()}
        disc.forward(img, update_u=False)
        for n, s in disc.spectral.items():
            np.testing.assert_array_equal(before[n], s.u)
        disc.forward(img, update_u=True)
        changed = any(not np.array_equal(before[n], s.u) for n, s in disc.spectral.items())
        assert changed

    def test_three_layer_variant_handles_tiny_inputs(self):
        disc = self._disc(layers=3)
        scores = disc.forward(Tensor(np.random.default_rng(7).random((1, 3, 8, 8)))).data
        assert scores.shape[-1] >= 1 and np.all((scores > 0) & (scores < 1))
