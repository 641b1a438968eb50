import numpy as np
import pytest

from conftest import assert_close, load_golden
from robustxai.core import NormBall
from robustxai.diagnostics import lipschitz_bound_diagnostic
from robustxai.errors import ContractViolation, SurrogateRankError
from robustxai.explainers import (gradient_x_input, integrated_gradients, linear_surrogate,
                                  occlusion)
from robustxai.mlp import (MlpModel, cross_entropy_gradient, cross_entropy_loss,
                           dumps_weights, load_weights_file, mlp_forward,
                           mlp_input_gradient, save_weights_file)
from robustxai.rng import RngSpec
from robustxai.sue import load_builtin_model, make_builtin_sue
from robustxai.synthetic import synthetic_seed


def linear_model(w, softmax=False, bias=None):
    w = np.asarray(w, dtype=float)
    b = np.zeros(w.shape[0]) if bias is None else np.asarray(bias, dtype=float)
    return MlpModel(layers=[(w, b)], activation="softplus", softmax=softmax)


class TestForward:
    def test_identity_weights(self):
        m = linear_model([[1.0, 0.0], [0.0, 1.0]])
        np.testing.assert_allclose(mlp_forward(m, [0.3, 0.7]), [0.3, 0.7])

    def test_softmax_symmetry(self):
        m = linear_model([[0.0, 0.0], [0.0, 0.0]], softmax=True)
        np.testing.assert_allclose(mlp_forward(m, [1.0, -1.0]), [0.5, 0.5])

    def test_golden_probe(self):
        model = load_builtin_model("toy8x8")
        golden = load_golden("toy8x8_probe.json")
        probe = synthetic_seed(golden["probe_index"])
        assert_close(mlp_forward(model, probe), golden["forward_probs"], 1e-12, "forward")

    def test_softmax_simplex(self):
        model = load_builtin_model("toy8x8")
        gen = np.random.default_rng(0)
        probs = mlp_forward(model, gen.uniform(0, 1, size=(50, 64)))
        assert np.all(probs >= 0)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)

    def test_dim_mismatch(self):
        with pytest.raises(ContractViolation):
            mlp_forward(load_builtin_model("toy8x8"), np.zeros(10))


class TestGradients:
    def test_linear_logit_gradient_is_weight_row(self):
        w = np.array([[1.0, -2.0], [0.5, 0.25]])
        m = linear_model(w)
        for x in (np.array([0.0, 0.0]), np.array([3.0, -1.0])):
            np.testing.assert_allclose(mlp_input_gradient(m, x, 0), w[0], atol=1e-15)

    def test_finite_difference_oracle(self):
        # central differences with h = 1e-5 as the independent derivative check
        model = load_builtin_model("toy8x8")
        x = synthetic_seed(1)
        h = 1e-5
        for target in ("logit", "prob"):
            grad = mlp_input_gradient(model, x, 2, target=target)
            fd = np.zeros_like(x)
            for i in range(x.shape[0]):
                up, down = x.copy(), x.copy()
                up[i] += h
                down[i] -= h
                out_up = mlp_forward(model, up, return_logits=(target == "logit"))[2]
                out_dn = mlp_forward(model, down, return_logits=(target == "logit"))[2]
                fd[i] = (out_up - out_dn) / (2 * h)
            rel = np.max(np.abs(grad - fd)) / max(np.max(np.abs(fd)), 1e-12)
            assert rel < 1e-5, f"{target}: relative error {rel}"

    def test_prob_gradients_sum_to_zero_two_classes(self):
        m = linear_model(np.array([[0.3, -0.1], [0.2, 0.4]]), softmax=True)
        x = np.array([0.5, 0.5])
        g0 = mlp_input_gradient(m, x, 0, target="prob")
        g1 = mlp_input_gradient(m, x, 1, target="prob")
        np.testing.assert_allclose(g0, -g1, atol=1e-14)

    def test_class_index_out_of_range(self):
        with pytest.raises(ContractViolation):
            mlp_input_gradient(load_builtin_model("toy8x8"), synthetic_seed(0), 7)

    def test_relu_gradient_fd_at_non_kink_points(self):
        gen = np.random.default_rng(7)
        layers = [(gen.normal(0, 0.5, (16, 8)), gen.normal(0, 0.1, 16)),
                  (gen.normal(0, 0.5, (3, 16)), np.zeros(3))]
        model = MlpModel(layers=layers, activation="relu", softmax=True)
        x = gen.uniform(0.2, 0.8, 8)
        h = 1e-5
        pre = x @ layers[0][0].T + layers[0][1]
        assert np.min(np.abs(pre)) > 1e-3  # away from every kink
        grad = mlp_input_gradient(model, x, 1, target="logit")
        fd = np.zeros(8)
        for i in range(8):
            up, dn = x.copy(), x.copy()
            up[i] += h
            dn[i] -= h
            fd[i] = (mlp_forward(model, up, return_logits=True)[1]
                     - mlp_forward(model, dn, return_logits=True)[1]) / (2 * h)
        rel = np.max(np.abs(grad - fd)) / max(np.max(np.abs(fd)), 1e-12)
        assert rel < 1e-5

    def test_cross_entropy_gradient_fd(self):
        model = load_builtin_model("toy8x8")
        x = synthetic_seed(2)
        grad = cross_entropy_gradient(model, x, 1)
        h = 1e-5
        idx = [0, 17, 40, 63]
        for i in idx:
            up, down = x.copy(), x.copy()
            up[i] += h
            down[i] -= h
            fd = (cross_entropy_loss(model, up, 1) - cross_entropy_loss(model, down, 1)) / (2 * h)
            assert grad[i] == pytest.approx(fd, rel=1e-4, abs=1e-9)


class TestExplainers:
    def test_linear_closed_forms_agree(self):
        # for a linear logit all four explainers reduce to x * w exactly;
        # the bias keeps class 0 predicted without touching any attribution
        w = np.array([[1.0, -2.0], [0.0, 0.0]])
        m = linear_model(w, bias=[1.0, 0.0])
        x = np.array([0.5, 0.5])
        expected = np.array([0.5, -1.0])
        assert_close(gradient_x_input(m, x), expected, 1e-12, "gxi")
        assert_close(integrated_gradients(m, x, steps=3), expected, 1e-12, "ig")
        assert_close(occlusion(m, x), expected, 1e-12, "occlusion")
        coef = linear_surrogate(m, x, n_samples=100, perturb_scale=0.1, rng=RngSpec(5))
        assert_close(x * coef, expected, 1e-9, "surrogate*x")

    def test_gxi_zero_input(self):
        model = load_builtin_model("toy8x8")
        assert np.all(gradient_x_input(model, np.zeros(64)) == 0.0)

    def test_gxi_golden(self):
        model = load_builtin_model("toy8x8")
        golden = load_golden("toy8x8_probe.json")
        probe = synthetic_seed(golden["probe_index"])
        assert_close(gradient_x_input(model, probe), golden["gradient_x_input"], 1e-12, "gxi")

    def test_occlusion_golden_and_fixed_feature(self):
        model = load_builtin_model("toy8x8")
        golden = load_golden("toy8x8_probe.json")
        probe = synthetic_seed(golden["probe_index"])
        assert_close(occlusion(model, probe), golden["occlusion"], 1e-12, "occlusion")
        probe2 = probe.copy()
        probe2[5] = 0.0  # feature already at the baseline value attributes zero
        assert occlusion(model, probe2)[5] == 0.0

    @pytest.mark.parametrize("name,point", [("toy8x8", None), ("toy2d", [0.37, 0.81])])
    def test_ig_completeness(self, name, point):
        model = load_builtin_model(name)
        x = synthetic_seed(3) if point is None else np.array(point)
        baseline = np.zeros(model.input_dim)
        y = int(np.argmax(mlp_forward(model, x, return_logits=True)))
        attr = integrated_gradients(model, x, baseline, steps=512)
        fx = mlp_forward(model, x, return_logits=True)[y]
        fb = mlp_forward(model, baseline, return_logits=True)[y]
        assert abs(attr.sum() - (fx - fb)) < 1e-4

    def test_ig_zero_path(self):
        model = load_builtin_model("toy8x8")
        x = synthetic_seed(0)
        assert np.all(integrated_gradients(model, x, baseline=x, steps=8) == 0.0)

    def test_ig_golden(self):
        model = load_builtin_model("toy8x8")
        golden = load_golden("toy8x8_probe.json")
        probe = synthetic_seed(golden["probe_index"])
        assert_close(integrated_gradients(model, probe, steps=64),
                     golden["integrated_gradients_m64"], 1e-12, "ig")

    def test_surrogate_recovers_linear_weights(self):
        dim = 8
        gen = np.random.default_rng(9)
        w = gen.normal(size=(2, dim))
        m = MlpModel(layers=[(w, np.zeros(2))], activation="softplus", softmax=False)
        x = gen.uniform(0, 1, dim)
        y = int(np.argmax(mlp_forward(m, x)))
        coef = linear_surrogate(m, x, n_samples=50 * dim, perturb_scale=0.1, rng=RngSpec(6))
        rel = np.max(np.abs(coef - w[y])) / np.max(np.abs(w[y]))
        assert rel < 1e-3

    def test_surrogate_deterministic(self):
        model = load_builtin_model("toy8x8")
        x = synthetic_seed(4)
        a = linear_surrogate(model, x, n_samples=80, perturb_scale=0.05, rng=RngSpec(7))
        b = linear_surrogate(model, x, n_samples=80, perturb_scale=0.05, rng=RngSpec(7))
        np.testing.assert_array_equal(a, b)

    def test_surrogate_needs_enough_samples(self):
        model = load_builtin_model("toy8x8")
        with pytest.raises(SurrogateRankError):
            linear_surrogate(model, synthetic_seed(0), n_samples=64, perturb_scale=0.05,
                             rng=RngSpec(8))


class TestWeightsFile:
    def test_round_trip_bitwise(self, tmp_path):
        model = load_builtin_model("toy8x8")
        path = tmp_path / "w.json"
        save_weights_file(model, path)
        again = load_weights_file(path)
        assert again.activation == model.activation
        assert again.beta_sp == model.beta_sp
        assert again.softmax == model.softmax
        for (w1, b1), (w2, b2) in zip(model.layers, again.layers):
            np.testing.assert_array_equal(w1, w2)
            np.testing.assert_array_equal(b1, b2)
        # a second serialization is byte-identical
        save_weights_file(again, tmp_path / "w2.json")
        assert (tmp_path / "w.json").read_bytes() == (tmp_path / "w2.json").read_bytes()

    def test_declared_shape_checked(self, tmp_path):
        model = load_builtin_model("toy2d")
        text = dumps_weights(model).replace('"shape": [2, 16, 16, 2]', '"shape": [2, 16, 2]')
        path = tmp_path / "bad.json"
        path.write_text(text)
        with pytest.raises(ContractViolation):
            load_weights_file(path)


class TestSueHandle:
    def test_counter_tracks_batch_sizes(self):
        sue = make_builtin_sue("toy8x8", "gxi")
        sue.classify_batch(np.zeros((3, 64)))
        sue.explain_batch(np.zeros((2, 64)))
        sue.classify_batch(np.zeros((5, 64)))
        assert sue.counter.classify_points == 8
        assert sue.counter.explain_points == 2
        assert sue.counter.total() == 10

    def test_shapes(self):
        sue = make_builtin_sue("toy8x8", "gxi")
        out = sue.classify_batch(np.zeros((4, 64)))
        assert out.shape == (4, 4)
        maps = sue.explain_batch(np.zeros((4, 64)))
        assert maps.shape == (4, 64)

    def test_unknown_explainer(self):
        with pytest.raises(ContractViolation):
            make_builtin_sue("toy8x8", "nope")

    def test_noisy_explainer_differs_deterministically(self):
        plain = make_builtin_sue("toy8x8", "gxi")
        noisy = make_builtin_sue("toy8x8", "gxi_noisy", explainer_params={"amplitude": 0.5})
        x = synthetic_seed(0)[None, :]
        a = noisy.explain_batch(x)
        b = noisy.explain_batch(x)
        np.testing.assert_array_equal(a, b)
        assert not np.allclose(a, plain.explain_batch(x))


class TestLipschitzDiagnostic:
    def test_softplus_toy_no_violations(self):
        model = load_builtin_model("toy8x8")
        ball = NormBall(synthetic_seed(0), 0.3, 0.0, 1.0)
        report = lipschitz_bound_diagnostic(model, ball, n_probe=1000, rng=RngSpec(11))
        assert report.violations == 0
        assert report.max_slack <= 0
        assert report.method == "empirical-sampled-k"

    def test_linear_margin_k_vanishes(self):
        w = np.array([[0.8, -0.4], [-0.2, 0.6]])
        m = MlpModel(layers=[(w, np.zeros(2))], activation="softplus", softmax=True)
        ball = NormBall(np.array([0.4, 0.6]), 0.2)
        report = lipschitz_bound_diagnostic(m, ball, n_probe=500, rng=RngSpec(12),
                                            loss="logit_margin")
        assert report.violations == 0
        assert report.k_used < 1e-8  # finite-difference Hessian of a linear loss

    def test_zero_radius(self):
        model = load_builtin_model("toy8x8")
        ball = NormBall(synthetic_seed(0), 0.0)
        report = lipschitz_bound_diagnostic(model, ball, n_probe=10, rng=RngSpec(13))
        assert report.violations == 0
        assert report.max_slack == 0.0

    def test_relu_rejected(self):
        w = np.array([[1.0, 0.0], [0.0, 1.0]])
        m = MlpModel(layers=[(w, np.zeros(2))], activation="relu", softmax=True)
        with pytest.raises(ContractViolation):
            lipschitz_bound_diagnostic(m, NormBall(np.zeros(2), 0.1), 10, RngSpec(14))
