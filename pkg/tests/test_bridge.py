import math
import sys
from pathlib import Path

import numpy as np
import pytest

from robustxai.bridge import remote_sue_connect
from robustxai.core import Metric, MisinterpretationSpec, NormBall, Region
from robustxai.errors import (NondeterministicAdapter, ProtocolError, RemoteEvaluationError)
from robustxai.rng import RngSpec
from robustxai.subset import SsConfig, run_ss
from robustxai.sue import make_builtin_sue
from robustxai.synthetic import synthetic_seed, synthetic_seeds

FIXTURES = Path(__file__).parent / "fixtures"


def serve_cmd(*extra):
    return [sys.executable, "-m", "robustxai.bridge_serve", *extra]


def fixture_cmd(name):
    return [sys.executable, str(FIXTURES / name)]


class TestHandshake:
    def test_hello_meta(self):
        with remote_sue_connect(serve_cmd("--model", "toy8x8", "--explainer", "gxi")) as sue:
            assert sue.input_dim == 64
            assert sue.num_classes == 4
            assert sue.explainer_name == "gxi"
            assert sue.deterministic

    def test_nondeterministic_refused(self):
        with pytest.raises(NondeterministicAdapter):
            remote_sue_connect(fixture_cmd("nondeterministic_adapter.py"))

    def test_nondeterministic_allowed_with_flag(self):
        with remote_sue_connect(fixture_cmd("nondeterministic_adapter.py"),
                                allow_nondeterministic=True) as sue:
            assert not sue.deterministic


class TestFrames:
    def test_classify_shape_contract(self):
        with remote_sue_connect(serve_cmd("--model", "toy8x8")) as sue:
            out = sue.classify_batch(synthetic_seeds(2))
            assert out.shape == (2, 4)

    def test_explain_shape_contract(self):
        with remote_sue_connect(serve_cmd("--model", "toy8x8")) as sue:
            maps = sue.explain_batch(synthetic_seeds(3))
            assert maps.shape == (3, 64)

    def test_id_mismatch_aborts(self):
        with remote_sue_connect(fixture_cmd("bad_id_adapter.py")) as sue:
            with pytest.raises(ProtocolError):
                sue.classify_batch(np.zeros((1, 4)))

    def test_malformed_frame_aborts(self):
        with remote_sue_connect(fixture_cmd("malformed_adapter.py")) as sue:
            with pytest.raises(ProtocolError) as err:
                sue.classify_batch(np.zeros((1, 4)))
            assert "not a frame" in str(err.value)

    def test_remote_error_surfaces(self):
        with remote_sue_connect(fixture_cmd("failing_adapter.py")) as sue:
            with pytest.raises(RemoteEvaluationError, match="injected failure"):
                sue.classify_batch(np.zeros((1, 64)))

    def test_counter_tracks_points(self):
        with remote_sue_connect(serve_cmd("--model", "toy8x8")) as sue:
            sue.classify_batch(synthetic_seeds(4))
            sue.explain_batch(synthetic_seeds(2))
            assert sue.counter.classify_points == 4
            assert sue.counter.explain_points == 2


class TestFloatFidelity:
    def test_wire_round_trip_exact(self):
        # adversarial float payloads survive JSON frames bit for bit
        gen = np.random.default_rng(5)
        probe = gen.uniform(0, 1, (1, 64))
        probe[0, 0] = 1e-17
        probe[0, 1] = 1 / 3
        probe[0, 2] = np.nextafter(1.0, 0.0)
        with remote_sue_connect(serve_cmd("--model", "toy8x8")) as remote:
            local = make_builtin_sue("toy8x8", "gxi")
            np.testing.assert_array_equal(remote.classify_batch(probe),
                                          local.classify_batch(probe))
            np.testing.assert_array_equal(remote.explain_batch(probe),
                                          local.explain_batch(probe))


class TestEndToEnd:
    def test_bridge_equals_in_process_outputs(self):
        batch = synthetic_seeds(5)
        local = make_builtin_sue("toy8x8", "gxi")
        with remote_sue_connect(serve_cmd("--model", "toy8x8", "--explainer", "gxi")) as remote:
            np.testing.assert_allclose(remote.classify_batch(batch),
                                       local.classify_batch(batch), atol=1e-6)
            np.testing.assert_allclose(remote.explain_batch(batch),
                                       local.explain_batch(batch), atol=1e-6)

    def test_ss_through_bridge_matches_in_process(self):
        spec = MisinterpretationSpec(Region.F_HAT, Metric.INV_PCC, alpha=1.0, beta=1 / 0.7)
        ball = NormBall(synthetic_seed(0), 0.3, 0.0, 1.0)
        cfg = SsConfig(samples_per_level=200, quantile=0.1, mh_steps=20, rng=RngSpec(300))
        local = run_ss(make_builtin_sue("toy8x8", "gxi"), ball, spec, cfg)
        with remote_sue_connect(serve_cmd("--model", "toy8x8", "--explainer", "gxi")) as remote:
            through = run_ss(remote, ball, spec, cfg)
        assert math.isclose(through.ln_p, local.ln_p, rel_tol=1e-6)
        assert [r.threshold for r in through.levels] == pytest.approx(
            [r.threshold for r in local.levels], rel=1e-9)
