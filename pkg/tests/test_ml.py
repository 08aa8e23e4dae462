import numpy as np
import pytest

from sankit.errors import CorruptFile, NonFiniteLoss, VersionMismatch
from sankit.ml import (FORMAT_VERSION, MAGIC, ParamStore, TrainConfig, Vocab,
                       WindowEncoder, grad_check, init_grads, load_params,
                       save_params, sgd_train, softmax)


class LeastSquares:
    """One-parameter linear least squares: loss = (w*x - y)^2."""

    def __init__(self, w0=0.0):
        self.params = ParamStore()
        self.params.declare("w", (1,))
        self.params["w"][0] = w0

    def clone(self):
        out = LeastSquares()
        out.params = self.params.copy()
        return out

    def loss_and_grads(self, example):
        x, y = example
        w = self.params["w"][0]
        resid = w * x - y
        grads = init_grads(self.params)
        grads["w"][0] = 2.0 * resid * x
        return float(resid * resid), grads


class BiasFreeLinear:
    """loss = (w . x - y)^2 without bias, for the zero-input gradient case."""

    def __init__(self, dim=3):
        self.params = ParamStore()
        self.params.declare("w", (dim,), np.random.default_rng(0))

    def clone(self):
        out = BiasFreeLinear(self.params["w"].shape[0])
        out.params = self.params.copy()
        return out

    def loss_and_grads(self, example):
        x, y = example
        w = self.params["w"]
        resid = float(w @ x - y)
        grads = init_grads(self.params)
        grads["w"][:] = 2.0 * resid * x
        return resid * resid, grads


def test_epochs_zero_is_identity():
    model = LeastSquares(w0=0.5)
    trained, trace = sgd_train(model, [(1.0, 2.0)], TrainConfig(learning_rate=0.1, epochs=0))
    assert trace == []
    assert trained.params["w"][0] == 0.5


def test_convex_toy_reaches_closed_form():
    data = [(1.0, 2.0), (2.0, 3.0), (3.0, 7.0), (0.5, 1.0)]
    optimum = sum(x * y for x, y in data) / sum(x * x for x, y in data)
    model = LeastSquares()
    cfg = TrainConfig(learning_rate=0.1, epochs=100, seed=3, batch_size=len(data))
    trained, trace = sgd_train(model, data, cfg)
    assert abs(trained.params["w"][0] - optimum) <= 1e-3
    assert len(trace) == 100


def test_same_seed_bit_identical():
    data = [(float(i), float(2 * i + 1)) for i in range(1, 6)]
    cfg = TrainConfig(learning_rate=0.05, epochs=20, seed=42, batch_size=2)
    a, _ = sgd_train(LeastSquares(), data, cfg)
    b, _ = sgd_train(LeastSquares(), data, cfg)
    assert a.params["w"][0] == b.params["w"][0]


def test_non_finite_loss_aborts():
    model = LeastSquares(w0=1.0)
    with pytest.raises(NonFiniteLoss):
        sgd_train(model, [(1e200, 0.0)], TrainConfig(learning_rate=10.0, epochs=3))


def test_l2_decay_shrinks_norm_on_zero_gradient_step():
    class Constant:
        def __init__(self):
            self.params = ParamStore()
            self.params.declare("w", (4,), np.random.default_rng(1))

        def clone(self):
            out = Constant.__new__(Constant)
            out.params = self.params.copy()
            return out

        def loss_and_grads(self, example):
            return 1.0, init_grads(self.params)

    model = Constant()
    before = float(np.linalg.norm(model.params["w"]))
    trained, _ = sgd_train(model, [0], TrainConfig(learning_rate=0.1, epochs=1, l2=0.5))
    after = float(np.linalg.norm(trained.params["w"]))
    assert after < before


def test_grad_check_linear_model():
    model = BiasFreeLinear()
    err = grad_check(model, (np.array([0.3, -1.2, 2.0]), 0.7), epsilon=1e-5)
    assert err <= 1e-6


def test_grad_check_zero_input_defined_zero():
    model = BiasFreeLinear()
    err = grad_check(model, (np.zeros(3), 0.0), epsilon=1e-5)
    assert err == 0.0


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.0, epochs=1)
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.1, epochs=1, loss_weights={"a": 0.0, "b": 0.0})
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.1, epochs=1, loss_weights={"a": -1.0})


def test_save_load_round_trip(tmp_path):
    store = ParamStore()
    rng = np.random.default_rng(5)
    store.declare("a", (3, 2), rng)
    store.declare("b", (4,), rng)
    store.version = 7
    path = tmp_path / "model.bin"
    save_params(store, path, "unit-test", meta={"k": 1})
    loaded, module_id, meta = load_params(path, expected_module="unit-test")
    assert module_id == "unit-test"
    assert meta == {"k": 1}
    assert loaded.version == 7
    assert loaded.names() == store.names()
    for name in store.names():
        assert np.array_equal(loaded[name], store[name])


def test_load_bad_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOPE!!" + b"\x00" * 32)
    with pytest.raises(CorruptFile):
        load_params(path)


def test_load_version_mismatch(tmp_path):
    import struct
    path = tmp_path / "v2.bin"
    path.write_bytes(MAGIC + struct.pack("<I", FORMAT_VERSION + 1) + b"\x00" * 16)
    with pytest.raises(VersionMismatch):
        load_params(path)


def test_load_truncated(tmp_path):
    store = ParamStore()
    store.declare("a", (8,), np.random.default_rng(0))
    path = tmp_path / "t.bin"
    save_params(store, path, "m")
    raw = path.read_bytes()
    path.write_bytes(raw[:-9])
    with pytest.raises(CorruptFile):
        load_params(path)


def test_param_store_shape_fixed():
    store = ParamStore()
    store.declare("w", (2, 2))
    with pytest.raises(ValueError):
        store["w"] = np.zeros((3, 3))
    with pytest.raises(ValueError):
        store.declare("w", (2, 2))


def test_vocab_reserved_and_oov():
    v = Vocab(["b", "a", "b"])
    assert v.id(Vocab.PAD) == 0
    assert v.id("zzz") == 1  # OOV
    assert v.id("a") != v.id("b")
    assert v.token(v.id("a")) == "a"


def test_window_encoder_grad_check():
    class TinyTagger:
        """Window encoder + affine head, softmax CE over 3 classes."""

        def __init__(self, seed=0):
            self.params = ParamStore()
            rng = np.random.default_rng(seed)
            self.enc = WindowEncoder(self.params, "enc", vocab_size=6, dim=3,
                                     radius=1, hidden=4, rng=rng)
            self.params.declare("head.W", (4, 3), rng)
            self.params.declare("head.b", (3,), rng)

        def clone(self):
            out = TinyTagger.__new__(TinyTagger)
            out.params = self.params.copy()
            out.enc = WindowEncoder.attach(out.params, "enc", radius=1)
            return out

        def loss_and_grads(self, example):
            idxs, golds = example
            h, cache = self.enc.forward(idxs)
            scores = h @ self.params["head.W"] + self.params["head.b"]
            probs = softmax(scores, axis=1)
            n = len(idxs)
            loss = -float(np.sum(np.log(probs[np.arange(n), golds]))) / n
            dscores = probs.copy()
            dscores[np.arange(n), golds] -= 1.0
            dscores /= n
            grads = init_grads(self.params)
            grads["head.W"] += h.T @ dscores
            grads["head.b"] += dscores.sum(axis=0)
            dh = dscores @ self.params["head.W"].T
            self.enc.backward(cache, dh, grads)
            return loss, grads

    model = TinyTagger()
    err = grad_check(model, ([2, 3, 4, 5], [0, 2, 1, 1]), epsilon=1e-5)
    assert err <= 1e-6

    # clone + train determinism through the shared encoder
    data = [([2, 3, 4], [0, 1, 2]), ([3, 3, 5], [1, 1, 0])]
    cfg = TrainConfig(learning_rate=0.1, epochs=5, seed=1)
    a, _ = sgd_train(model, data, cfg)
    b, _ = sgd_train(model, data, cfg)
    for name in a.params.names():
        assert np.array_equal(a.params[name], b.params[name])
