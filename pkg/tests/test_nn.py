import numpy as np
import pytest

from qasrl import nn
from qasrl.nn import tape


def numeric_grad(fn, value, step=1e-6):
    """Central finite differences of a scalar function of one array."""
    value = value.astype(np.float64)
    out = np.zeros_like(value)
    for i in range(value.size):
        original = value.flat[i]
        value.flat[i] = original + step
        up = fn(value)
        value.flat[i] = original - step
        down = fn(value)
        value.flat[i] = original
        out.flat[i] = (up - down) / (2 * step)
    return out


class TestTape:
    @pytest.mark.parametrize("name,build", [
        ("mul_sum", lambda x: (x * x).sum()),
        ("tanh", lambda x: nn.tanh(x).sum()),
        ("sigmoid", lambda x: nn.sigmoid(x).sum()),
        ("relu_shifted", lambda x: nn.relu(x + 0.3).sum()),
        ("exp", lambda x: nn.exp(x).sum()),
        ("log_shifted", lambda x: nn.log(x * x + 1.0).sum()),
        ("log_softmax", lambda x: (nn.log_softmax(x) * nn.as_tensor(
            np.arange(4.0))).sum()),
        ("div", lambda x: (x / (x * x + 2.0)).sum()),
        ("pow", lambda x: (x ** 3).sum()),
        ("slice", lambda x: (x[1:3] * x[0:2]).sum()),
    ])
    def test_op_gradients_match_finite_differences(self, name, build):
        rng = np.random.default_rng(7)
        with nn.float64_mode():
            value = rng.standard_normal(4)
            x = nn.Tensor(value, requires_grad=True)
            build(x).backward()
            analytic = x.grad

            def scalar(v):
                return float(build(nn.Tensor(v)).value)

            expected = numeric_grad(scalar, value)
        assert analytic == pytest.approx(expected, abs=1e-6)

    def test_matmul_gradients(self):
        rng = np.random.default_rng(9)
        with nn.float64_mode():
            a_val = rng.standard_normal((3, 2))
            b_val = rng.standard_normal((2, 4))
            a = nn.Tensor(a_val, requires_grad=True)
            b = nn.Tensor(b_val, requires_grad=True)
            ((a @ b) * (a @ b)).sum().backward()

            def loss_a(v):
                return float((((nn.Tensor(v) @ nn.Tensor(b_val)) ** 2).sum()).value)

            def loss_b(v):
                return float((((nn.Tensor(a_val) @ nn.Tensor(v)) ** 2).sum()).value)

            assert a.grad == pytest.approx(numeric_grad(loss_a, a_val), abs=1e-6)
            assert b.grad == pytest.approx(numeric_grad(loss_b, b_val), abs=1e-6)

    def test_vector_matrix_matmul_gradient(self):
        rng = np.random.default_rng(11)
        with nn.float64_mode():
            x_val = rng.standard_normal(3)
            w_val = rng.standard_normal((3, 2))
            x = nn.Tensor(x_val, requires_grad=True)
            w = nn.Tensor(w_val, requires_grad=True)
            nn.tanh(x @ w).sum().backward()

            def loss_w(v):
                return float(nn.tanh(nn.Tensor(x_val) @ nn.Tensor(v)).sum().value)

            assert w.grad == pytest.approx(numeric_grad(loss_w, w_val), abs=1e-6)

    def test_concat_and_getitem_route_gradients(self):
        with nn.float64_mode():
            a = nn.Tensor([1.0, 2.0], requires_grad=True)
            b = nn.Tensor([3.0], requires_grad=True)
            joined = nn.concat([a, b])
            (joined[2] * 5.0 + joined[0]).backward()
            assert a.grad == pytest.approx([1.0, 0.0])
            assert b.grad == pytest.approx([5.0])

    def test_bce_with_logits_matches_closed_form(self):
        with nn.float64_mode():
            for z, t in [(0.0, 1.0), (2.5, 0.0), (-3.0, 1.0)]:
                logit = nn.Tensor(z, requires_grad=True)
                loss = nn.bce_with_logits(logit, t)
                p = 1.0 / (1.0 + np.exp(-z))
                expected = -(t * np.log(p) + (1 - t) * np.log(1 - p))
                assert loss.item() == pytest.approx(expected, abs=1e-9)
                loss.backward()
                assert logit.grad == pytest.approx(p - t, abs=1e-9)

    def test_gradient_accumulates_across_reuse(self):
        x = nn.Tensor([2.0], requires_grad=True)
        (x * x + x * 3.0).sum().backward()
        assert x.grad == pytest.approx([2 * 2.0 + 3.0])

    def test_backward_requires_scalar(self):
        x = nn.Tensor([1.0, 2.0], requires_grad=True)
        with pytest.raises(ValueError):
            (x * 2.0).backward()

    def test_default_dtype_is_float32(self):
        assert nn.Tensor([1.0]).value.dtype == np.float32
        with nn.float64_mode():
            assert nn.Tensor([1.0]).value.dtype == np.float64


class TestOrthonormal:
    @pytest.mark.parametrize("shape", [(4, 4), (6, 3), (3, 6)])
    def test_orthonormal_within_tolerance(self, shape):
        rng = np.random.default_rng(0)
        q = nn.init_orthonormal(shape, rng)
        assert q.shape == shape
        small = min(shape)
        gram = q.T @ q if shape[0] >= shape[1] else q @ q.T
        assert np.abs(gram - np.eye(small)).max() < 1e-5

    def test_seeded_reproducibility(self):
        a = nn.init_orthonormal((5, 5), np.random.default_rng(3))
        b = nn.init_orthonormal((5, 5), np.random.default_rng(3))
        assert np.array_equal(a, b)


class TestAdadelta:
    def test_zero_gradient_leaves_parameters(self):
        params = nn.ParameterSet()
        p = params.add("x", np.array([1.0, 2.0], dtype=np.float32))
        opt = nn.Adadelta(params)
        p.grad = np.zeros(2, dtype=np.float32)
        opt.step()
        assert p.value == pytest.approx([1.0, 2.0])

    def test_matches_hand_derived_trace(self):
        # Scalar parameter, gradient sequence 1.0, -0.5, 0.25 with the
        # accumulator recurrences written out longhand.
        rho, eps = 0.95, 1e-6
        grads = [1.0, -0.5, 0.25]
        x, eg, ed = 3.0, 0.0, 0.0
        expected = []
        for g in grads:
            eg = rho * eg + (1 - rho) * g * g
            delta = -np.sqrt(ed + eps) / np.sqrt(eg + eps) * g
            ed = rho * ed + (1 - rho) * delta * delta
            x += delta
            expected.append(x)

        with nn.float64_mode():
            params = nn.ParameterSet()
            p = params.add("x", np.array(3.0))
            opt = nn.Adadelta(params, rho=rho, eps=eps, clip_norm=None)
            got = []
            for g in grads:
                p.grad = np.array(g)
                opt.step()
                got.append(float(p.value))
        assert got == pytest.approx(expected, rel=1e-12)

    def test_clipping_scales_to_unit_norm(self):
        params = nn.ParameterSet()
        p = params.add("x", np.zeros(4, dtype=np.float32))
        p.grad = np.full(4, 5.0, dtype=np.float32)  # norm 10
        norm_before = nn.clip_global_norm(params, 1.0)
        assert norm_before == pytest.approx(10.0)
        assert np.linalg.norm(p.grad) == pytest.approx(1.0, rel=1e-5)

    def test_clip_leaves_small_gradients(self):
        params = nn.ParameterSet()
        p = params.add("x", np.zeros(2, dtype=np.float32))
        p.grad = np.array([0.3, 0.4], dtype=np.float32)
        nn.clip_global_norm(params, 1.0)
        assert p.grad == pytest.approx([0.3, 0.4])


class TestMLP:
    def _zero_head(self, in_dim, hidden, out_dim):
        params = nn.ParameterSet()
        params.add("head/w1", np.zeros((in_dim, hidden), dtype=np.float32))
        params.add("head/b1", np.zeros(hidden, dtype=np.float32))
        params.add("head/w2", np.zeros((hidden, out_dim), dtype=np.float32))
        params.add("head/b2", np.zeros(out_dim, dtype=np.float32))
        return params

    def test_zero_weights_give_zero_output(self):
        params = self._zero_head(3, 5, 2)
        out = nn.mlp(nn.as_tensor([1.0, -2.0, 0.5]), params, "head")
        assert out.value == pytest.approx([0.0, 0.0])

    def test_identity_head_passes_positive_scalars(self):
        params = nn.ParameterSet()
        params.add("head/w1", np.ones((1, 1), dtype=np.float32))
        params.add("head/b1", np.zeros(1, dtype=np.float32))
        params.add("head/w2", np.ones((1, 1), dtype=np.float32))
        params.add("head/b2", np.zeros(1, dtype=np.float32))
        for v in (0.5, 2.0, 7.25):
            out = nn.mlp(nn.as_tensor([v]), params, "head")
            assert out.value == pytest.approx([v])

    def test_matches_hand_computed_matrices(self):
        rng = np.random.default_rng(42)
        with nn.float64_mode():
            w1 = rng.standard_normal((3, 4))
            b1 = rng.standard_normal(4)
            w2 = rng.standard_normal((4, 2))
            b2 = rng.standard_normal(2)
            x = rng.standard_normal(3)
            params = nn.ParameterSet()
            for name, v in [("h/w1", w1), ("h/b1", b1), ("h/w2", w2), ("h/b2", b2)]:
                params.add(name, v)
            got = nn.mlp(nn.as_tensor(x), params, "h").value
        hidden = np.maximum(x @ w1 + b1, 0.0)
        assert got == pytest.approx(hidden @ w2 + b2, abs=1e-9)


def hand_encoder_oracle(params, tokens, verb_index):
    """Independent numpy re-execution of the documented encoder recurrence."""
    sig = lambda a: 1.0 / (1.0 + np.exp(-a))
    manifest = params.manifest
    vocab = manifest["vocabulary"]
    hidden = manifest["hidden"]
    emb = params["embed/tokens"].value
    ind = params["embed/indicator"].value
    xs = []
    for i, token in enumerate(tokens):
        row = vocab.get(token.lower(), vocab["<unk>"])
        xs.append(np.concatenate([emb[row], ind[1 if i == verb_index else 0]]))
    for layer in range(manifest["layers"]):
        p = f"encoder/layer{layer}"
        w, u, b = params[f"{p}/w"].value, params[f"{p}/u"].value, params[f"{p}/b"].value
        gw, gu, gb = (params[f"{p}/gate_w"].value, params[f"{p}/gate_u"].value,
                      params[f"{p}/gate_b"].value)
        cw = params[f"{p}/carry_w"].value
        order = range(len(xs)) if layer % 2 == 0 else range(len(xs) - 1, -1, -1)
        h = np.zeros(hidden)
        c = np.zeros(hidden)
        out = [None] * len(xs)
        for t in order:
            x = xs[t]
            z = x @ w + h @ u + b
            i = sig(z[:hidden])
            f = sig(z[hidden:2 * hidden])
            g = np.tanh(z[2 * hidden:3 * hidden])
            o = sig(z[3 * hidden:])
            c = f * c + i * g
            r = sig(x @ gw + h @ gu + gb)
            h_new = o * np.tanh(c)
            out[t] = r * h_new + (1 - r) * (x @ cw)
            h = h_new
        xs = out
    return np.stack(xs)


class TestEncoder:
    def _toy_params(self, layers=1, hidden=2, embedding=3, seed=5):
        rng = np.random.default_rng(seed)
        vocab = nn.build_vocabulary([["the", "dog", "ran", "fast"]])
        return nn.init_encoder(vocab, rng, layers=layers, hidden=hidden,
                               embedding=embedding, recurrent_dropout=0.0)

    def test_output_shape(self):
        params = self._toy_params(layers=2, hidden=4)
        enc = nn.encode(["the", "dog", "ran", "fast", "."], 2, params)
        assert len(enc) == 5
        assert enc.matrix.shape == (5, 4)

    def test_verb_index_changes_output(self):
        params = self._toy_params()
        a = nn.encode(["the", "dog", "ran"], 1, params).matrix
        b = nn.encode(["the", "dog", "ran"], 2, params).matrix
        assert not np.allclose(a, b)

    def test_matches_hand_recurrence_oracle(self):
        with nn.float64_mode():
            params = self._toy_params(layers=1, hidden=2, embedding=3)
            got = nn.encode(["dog", "ran"], 0, params).matrix
            expected = hand_encoder_oracle(params, ["dog", "ran"], 0)
        assert np.abs(got - expected).max() < 1e-6

    def test_alternating_layers_match_oracle(self):
        with nn.float64_mode():
            params = self._toy_params(layers=3, hidden=3, embedding=2, seed=8)
            tokens = ["the", "dog", "ran", "fast"]
            got = nn.encode(tokens, 2, params).matrix
            expected = hand_encoder_oracle(params, tokens, 2)
        assert np.abs(got - expected).max() < 1e-6

    def test_inference_is_pure(self):
        params = self._toy_params(layers=2, hidden=3)
        a = nn.encode(["dog", "ran"], 0, params).matrix
        b = nn.encode(["dog", "ran"], 0, params).matrix
        assert np.array_equal(a, b)

    def test_training_dropout_reproducible_by_seed(self):
        rng = np.random.default_rng(5)
        vocab = nn.build_vocabulary([["a", "b"]])
        params = nn.init_encoder(vocab, rng, layers=1, hidden=4, embedding=2,
                                 recurrent_dropout=0.5)
        a = nn.encode(["a", "b"], 0, params, train=True,
                      rng=np.random.default_rng(1)).matrix
        b = nn.encode(["a", "b"], 0, params, train=True,
                      rng=np.random.default_rng(1)).matrix
        c = nn.encode(["a", "b"], 0, params, train=True,
                      rng=np.random.default_rng(2)).matrix
        assert np.array_equal(a, b)
        assert not np.allclose(a, c)

    def test_unknown_token_uses_unk_row(self):
        params = self._toy_params()
        a = nn.encode(["zzz", "ran"], 1, params).matrix
        b = nn.encode(["qqq", "ran"], 1, params).matrix
        assert np.array_equal(a, b)

    def test_verb_index_out_of_range(self):
        params = self._toy_params()
        with pytest.raises(ValueError):
            nn.encode(["dog"], 4, params)


class TestGradientCheck:
    def test_constant_loss_passes(self):
        params = nn.ParameterSet()
        params.add("x", np.array([1.0, 2.0]))
        report = nn.gradient_check(lambda: nn.as_tensor(3.0), params)
        assert report.passed
        assert report.max_relative_error == 0.0

    def test_quadratic_loss_passes(self):
        with nn.float64_mode():
            params = nn.ParameterSet()
            x = params.add("x", np.array([0.5, -1.5, 2.0]))
            report = nn.gradient_check(lambda: (x * x).sum() + (x * 3.0).sum(),
                                       params)
        assert report.passed

    def test_detects_wrong_gradient(self):
        # A loss that lies to the tape: value of x*x but gradient of x.
        with nn.float64_mode():
            params = nn.ParameterSet()
            x = params.add("x", np.array([1.0, 2.0]))

            def bad_loss():
                out = nn.Tensor._node(
                    (x.value ** 2).sum(), (x,),
                    lambda grad: x._accumulate(grad * np.ones_like(x.value)))
                return out

            report = nn.gradient_check(bad_loss, params)
        assert not report.passed

    def test_non_finite_loss_raises(self):
        params = nn.ParameterSet()
        params.add("x", np.array([1.0]))
        with pytest.raises(FloatingPointError):
            nn.gradient_check(lambda: nn.as_tensor(np.nan), params)

    def test_mlp_head_passes(self):
        with nn.float64_mode():
            rng = np.random.default_rng(3)
            params = nn.ParameterSet()
            nn.init_mlp(params, "head", 3, 4, 2, rng)
            x = np.array([0.3, -0.2, 0.9])
            target = np.array([1.0, -1.0])

            def loss():
                out = nn.mlp(nn.as_tensor(x), params, "head")
                diff = out - nn.as_tensor(target)
                return (diff * diff).sum()

            report = nn.gradient_check(loss, params)
        assert report.passed, report.max_relative_error

    def test_encoder_passes(self):
        with nn.float64_mode():
            rng = np.random.default_rng(4)
            vocab = nn.build_vocabulary([["a", "b", "c"]])
            params = nn.init_encoder(vocab, rng, layers=2, hidden=3,
                                     embedding=2, recurrent_dropout=0.0)

            def loss():
                enc = nn.encode(["a", "b", "c"], 1, params)
                return sum((v * v).sum() for v in enc.vectors) * 0.1

            report = nn.gradient_check(loss, params)
        assert report.passed, report.max_relative_error


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(12)
        params = nn.ParameterSet({"hidden": 7, "note": "toy"})
        params.add("a/w", rng.standard_normal((3, 4)).astype(np.float32))
        params.add("a/b", rng.standard_normal(4).astype(np.float32))
        path = tmp_path / "model.ckpt"
        nn.save_checkpoint(params, path)
        loaded = nn.load_checkpoint(path)
        assert loaded.names() == params.names()
        assert loaded.manifest == params.manifest
        for name in params.names():
            assert np.array_equal(loaded[name].value, params[name].value)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.ckpt"
        path.write_bytes(b"NOTAFILE" + b"\x00" * 16)
        with pytest.raises(ValueError, match="magic"):
            nn.load_checkpoint(path)

    def test_truncated_payload_rejected(self, tmp_path):
        params = nn.ParameterSet()
        params.add("w", np.ones((4, 4), dtype=np.float32))
        path = tmp_path / "model.ckpt"
        nn.save_checkpoint(params, path)
        data = path.read_bytes()
        path.write_bytes(data[:-8])
        with pytest.raises(ValueError, match="truncated"):
            nn.load_checkpoint(path)


class TestDeterminism:
    def _train_once(self):
        rng = np.random.default_rng(99)
        vocab = nn.build_vocabulary([["a", "b", "c", "d"]])
        params = nn.init_encoder(vocab, rng, layers=1, hidden=3, embedding=2,
                                 recurrent_dropout=0.1)
        nn.init_mlp(params, "head", 3, 4, 1, rng)
        opt = nn.Adadelta(params)
        data_rng = np.random.default_rng(7)
        for _ in range(5):
            enc = nn.encode(["a", "b", "c"], 1, params, train=True, rng=data_rng)
            out = nn.mlp(enc.vectors[0], params, "head")
            loss = (out * out).sum()
            params.zero_grad()
            loss.backward()
            opt.step()
        return {name: t.value.copy() for name, t in params.items()}

    def test_fixed_seed_bit_identical(self):
        a = self._train_once()
        b = self._train_once()
        for name in a:
            assert np.array_equal(a[name], b[name]), name
