import math

import numpy as np
import pytest

from margin_auditor import (
    DimensionError,
    Identity,
    Layer,
    MaxPool,
    Network,
    ParameterError,
    ParseError,
    Relu,
    frobenius_norm,
    lipschitz_constant,
    load_manifest,
    save_manifest,
    spectral_norm,
)
from conftest import random_network


def scalar_loop_forward(net, x_row):
    """Independent straight-line oracle: pure-python loops, no shared code path."""
    values = [float(v) for v in x_row]
    for layer in net.layers:
        w = layer.weight
        pre = []
        for i in range(w.shape[0]):
            acc = 0.0
            for j in range(w.shape[1]):
                acc += float(w[i, j]) * values[j]
            pre.append(acc)
        if isinstance(layer.nonlinearity, Relu):
            values = [max(0.0, v) for v in pre]
        elif isinstance(layer.nonlinearity, Identity):
            values = pre
        elif isinstance(layer.nonlinearity, MaxPool):
            values = [max(pre[i] for i in g) for g in layer.nonlinearity.groups]
    return values


class TestForward:
    def test_identity_layer(self):
        net = Network(layers=(Layer(weight=np.eye(3), nonlinearity=Identity()),))
        x = np.random.default_rng(0).standard_normal((4, 3))
        assert np.array_equal(net.forward(x), x)

    def test_relu_layer(self):
        net = Network(layers=(Layer(weight=np.eye(2), nonlinearity=Relu()),))
        out = net.forward(np.array([[-1.0, 2.0]]))
        assert np.array_equal(out, [[0.0, 2.0]])

    def test_matches_scalar_loop_oracle(self):
        rng = np.random.default_rng(99)
        net = random_network(rng, depth=2)
        x = rng.standard_normal((5, net.input_dim))
        out = net.forward(x)
        for r in range(5):
            expected = scalar_loop_forward(net, x[r])
            assert np.max(np.abs(out[r] - np.array(expected))) <= 1e-12

    def test_dimension_mismatch(self):
        net = Network(layers=(Layer(weight=np.eye(3), nonlinearity=Relu()),))
        with pytest.raises(DimensionError):
            net.forward(np.zeros((2, 4)))


class TestForwardImages:
    def test_single_layer_length(self):
        net = Network(layers=(Layer(weight=np.eye(2), nonlinearity=Relu()),))
        assert len(net.forward_images(np.ones((3, 2)))) == 2

    def test_identity_chain(self):
        layer = Layer(weight=np.eye(2), nonlinearity=Identity())
        net = Network(layers=(layer, layer, layer))
        x = np.random.default_rng(1).standard_normal((4, 2))
        for image in net.forward_images(x):
            assert np.array_equal(image, x)

    def test_last_image_is_forward(self, rng):
        net = random_network(rng, depth=3)
        x = rng.standard_normal((6, net.input_dim))
        images = net.forward_images(x)
        assert np.array_equal(images[-1], net.forward(x))

    def test_forward_image_norm_bound(self, rng):
        # each layer image norm is at most ||X||_2 * prod rho_j * s_j
        for _ in range(20):
            net = random_network(rng, depth=3)
            x = rng.standard_normal((5, net.input_dim))
            images = net.forward_images(x)
            bound = frobenius_norm(x)
            for layer, image in zip(net.layers, images[1:]):
                bound *= layer.nonlinearity.lipschitz(2.0) * spectral_norm(layer.weight)
                if image.any():
                    assert frobenius_norm(image) <= bound * (1 + 1e-10)


class TestNonlinearities:
    def test_relu_lipschitz(self):
        assert lipschitz_constant(Relu(), 2.0) == 1.0

    def test_partition_pool_lipschitz(self):
        pool = MaxPool([[0, 1], [2, 3]])
        assert lipschitz_constant(pool, 2.0) == 1.0

    def test_overlap_pool_lipschitz(self):
        # one coordinate shared by 9 groups -> multiplicity 9 -> 9^(1/2) = 3
        pool = MaxPool([[0, i + 1] for i in range(9)])
        assert lipschitz_constant(pool, 2.0) == pytest.approx(3.0)
        assert lipschitz_constant(pool, 1.0) == pytest.approx(9.0)
        assert lipschitz_constant(pool, math.inf) == 1.0

    def test_bad_exponent(self):
        with pytest.raises(ParameterError):
            lipschitz_constant(Relu(), 0.5)

    @pytest.mark.parametrize("p", [1.0, 2.0, math.inf])
    def test_empirical_lipschitz(self, rng, p):
        cases = [
            (Relu(), 6, 1.0),
            (MaxPool([[0, 1, 2], [3, 4, 5]]), 6, 1.0),
            (MaxPool([[0, 1], [1, 2], [2, 3], [3, 4], [4, 5]]), 6, None),
        ]
        for nl, dim, expected in cases:
            rho = nl.lipschitz(p)
            if expected is not None:
                assert rho == pytest.approx(expected)
            for _ in range(200):
                z = rng.standard_normal((1, dim))
                zp = rng.standard_normal((1, dim))
                lhs = np.linalg.norm((nl.apply(z) - nl.apply(zp)).ravel(), ord=p)
                rhs = rho * np.linalg.norm((z - zp).ravel(), ord=p)
                assert lhs <= rhs + 1e-12

    def test_zero_maps_to_zero(self):
        z = np.zeros((1, 4))
        for nl in (Relu(), Identity(), MaxPool([[0, 1], [2, 3]])):
            assert not nl.apply(z).any()


class TestPositiveHomogeneity:
    def test_scaling_one_layer_scales_output(self, rng):
        for _ in range(10):
            net = random_network(rng, depth=3)
            x = rng.standard_normal((4, net.input_dim))
            j = int(rng.integers(0, 3))
            c = float(rng.uniform(0.5, 3.0))
            scaled_layers = list(net.layers)
            scaled_layers[j] = Layer(
                weight=c * net.layers[j].weight, nonlinearity=net.layers[j].nonlinearity
            )
            scaled = Network(layers=tuple(scaled_layers))
            assert np.allclose(scaled.forward(x), c * net.forward(x), rtol=1e-12, atol=1e-12)


class TestValidation:
    def test_reference_shape_mismatch(self):
        with pytest.raises(DimensionError):
            Layer(weight=np.eye(2), nonlinearity=Relu(), reference=np.zeros((3, 2)))

    def test_maxpool_must_cover_outputs(self):
        with pytest.raises(DimensionError):
            Layer(weight=np.eye(3), nonlinearity=MaxPool([[0, 1]]))

    def test_chain_mismatch(self):
        l1 = Layer(weight=np.zeros((3, 2)) + 1.0, nonlinearity=Relu())
        l2 = Layer(weight=np.ones((2, 4)), nonlinearity=Relu())
        with pytest.raises(DimensionError):
            Network(layers=(l1, l2))

    def test_width(self):
        l1 = Layer(weight=np.ones((5, 2)), nonlinearity=Relu())
        l2 = Layer(weight=np.ones((3, 5)), nonlinearity=Relu())
        assert Network(layers=(l1, l2)).width == 5

    def test_maxpool_width_counts_pooled_dim(self):
        layer = Layer(weight=np.ones((4, 2)), nonlinearity=MaxPool([[0, 1], [2, 3]]))
        net = Network(layers=(layer,))
        assert net.output_dim == 2
        assert net.width == 4


class TestManifest:
    def test_round_trip(self, tmp_path, rng):
        net = random_network(rng, depth=3, zero_refs=False)
        manifest = save_manifest(net, tmp_path, name="net")
        back = load_manifest(manifest)
        assert len(back.layers) == len(net.layers)
        for a, b in zip(net.layers, back.layers):
            assert np.array_equal(a.weight, b.weight)
            assert np.array_equal(a.reference, b.reference)
            assert a.nonlinearity == b.nonlinearity

    def test_identity_reference(self, tmp_path):
        net = Network(
            layers=(Layer(weight=2 * np.eye(3), nonlinearity=Relu(), reference=np.eye(3)),)
        )
        manifest = save_manifest(net, tmp_path)
        back = load_manifest(manifest)
        assert np.array_equal(back.layers[0].reference, np.eye(3))

    def test_maxpool_round_trip(self, tmp_path):
        net = Network(
            layers=(Layer(weight=np.ones((4, 3)), nonlinearity=MaxPool([[0, 1], [2, 3]])),)
        )
        back = load_manifest(save_manifest(net, tmp_path))
        assert back.layers[0].nonlinearity == MaxPool([[0, 1], [2, 3]])

    def test_unknown_kind(self, tmp_path):
        from margin_auditor import write_mat1

        write_mat1(tmp_path / "w.mat", np.eye(2))
        (tmp_path / "m.json").write_text(
            '{"layers": [{"weight": "w.mat", "nonlinearity": {"kind": "sgmd"}}]}'
        )
        with pytest.raises(ParseError):
            load_manifest(tmp_path / "m.json")

    def test_missing_manifest(self, tmp_path):
        from margin_auditor import InputOutputError

        with pytest.raises(InputOutputError):
            load_manifest(tmp_path / "none.json")
