import numpy as np
import pytest
from hypothesis import given, strategies as st

from learninit import neural
from learninit.errors import InputError, NumericalError, TrainingError
from learninit.gradcheck import fd_gradient, rel_err


def handmade(weights, biases):
    w = [np.asarray(x, dtype=float) for x in weights]
    spec = neural.MlpSpec(w[0].shape[0], w[-1].shape[1], tuple(x.shape[1] for x in w[:-1]))
    return neural.MlpModel(spec, w, [np.asarray(b, dtype=float) for b in biases])


def test_forward_identity_without_hidden_layers():
    model = handmade([np.eye(3)], [np.zeros(3)])
    x = np.array([0.5, -2.0, 7.0])
    assert np.array_equal(neural.forward(model, x), x)


def test_forward_zero_input_zero_bias():
    model = neural.init_model(neural.MlpSpec(4, 2, (5, 3), seed=1))
    assert np.array_equal(neural.forward(model, np.zeros(4)), np.zeros(2))


def test_forward_hand_composition():
    model = handmade([[[1.0]], [[2.0]]], [[0.0], [1.0]])
    assert neural.forward(model, np.array([3.0]))[0] == 7.0


def test_forward_dimension_mismatch():
    model = neural.init_model(neural.MlpSpec(2, 1, (3,)))
    with pytest.raises(InputError):
        neural.forward(model, np.zeros(3))


def test_glorot_bounds_and_determinism():
    spec = neural.MlpSpec(10, 3, (20,), seed=4)
    a, b = neural.init_model(spec), neural.init_model(spec)
    for w, w2 in zip(a.weights, b.weights):
        assert np.array_equal(w, w2)
        assert np.abs(w).max() <= np.sqrt(6.0 / sum(w.shape))


def test_backward_zero_residual():
    model = neural.init_model(neural.MlpSpec(3, 2, (4,), seed=0))
    x = np.random.default_rng(0).standard_normal((6, 3))
    grads, loss = neural.backward(model, x, neural.forward(model, x))
    assert loss == 0.0
    assert all(np.all(g == 0) for g in grads)


def test_backward_fd_3_4_2():
    rng = np.random.default_rng(1)
    model = neural.init_model(neural.MlpSpec(3, 2, (4,), seed=3))
    model.biases[0] += 0.1
    x, y = rng.standard_normal((8, 3)), rng.standard_normal((8, 2))
    grads, _ = neural.backward(model, x, y)
    for p, g in zip(model.params(), grads):
        def loss(v, p=p):
            keep = p.copy()
            p[...] = v
            out = neural.backward(model, x, y)[1]
            p[...] = keep
            return out
        assert rel_err(g, fd_gradient(loss, p.copy(), h=1e-5)) < 1e-5


@given(st.integers(0, 10_000))
def test_backward_fd_random_small_nets(seed):
    rng = np.random.default_rng(seed)
    depth = int(rng.integers(0, 3))  # up to 4 layers of weights counting the output
    hidden = tuple(int(h) for h in rng.integers(1, 9, size=depth))
    model = neural.init_model(neural.MlpSpec(int(rng.integers(1, 9)), int(rng.integers(1, 9)), hidden, seed))
    for b in model.biases:
        b += rng.normal(scale=0.3, size=b.shape)
    x = rng.standard_normal((4, model.spec.input_dim))
    y = rng.standard_normal((4, model.spec.output_dim))
    grads, _ = neural.backward(model, x, y)
    for p, g in zip(model.params(), grads):
        def loss(v, p=p):
            keep = p.copy()
            p[...] = v
            out = neural.backward(model, x, y)[1]
            p[...] = keep
            return out
        assert rel_err(g, fd_gradient(loss, p.copy(), h=1e-5)) < 1e-5


def test_doubling_residual_quadruples_loss():
    model = neural.init_model(neural.MlpSpec(2, 1, (3,), seed=2))
    x = np.random.default_rng(2).standard_normal((5, 2))
    pred = neural.forward(model, x)
    _, l1 = neural.backward(model, x, pred + 0.3)
    _, l2 = neural.backward(model, x, pred + 0.6)
    assert l2 == pytest.approx(4 * l1, rel=1e-12)


def test_backward_empty_batch():
    model = neural.init_model(neural.MlpSpec(2, 1, (3,)))
    with pytest.raises(InputError):
        neural.backward(model, np.zeros((0, 2)), np.zeros((0, 1)))


def test_input_gradient_fd():
    rng = np.random.default_rng(3)
    model = neural.init_model(neural.MlpSpec(3, 2, (6, 5), seed=5))
    w = rng.standard_normal(2)
    x = rng.standard_normal(3)
    fd = fd_gradient(lambda v: float(neural.forward(model, v) @ w), x, h=1e-5)
    assert rel_err(neural.input_gradient(model, x, w), fd) < 1e-5


def scalar_model(w0):
    return handmade([[[w0]]], [[0.0]])


def test_adam_first_step_is_signed_lr():
    model = scalar_model(1.0)
    cfg = neural.TrainConfig(learning_rate=0.01)
    neural.adam_step(model, [np.array([[4.0]]), np.array([-2.0])], cfg)
    assert model.weights[0][0, 0] == pytest.approx(1.0 - 0.01, rel=1e-6)
    assert model.biases[0][0] == pytest.approx(0.01, rel=1e-6)
    assert model.adam.step == 1


def test_adam_zero_gradient_is_noop():
    model = scalar_model(1.5)
    neural.adam_step(model, [np.zeros((1, 1)), np.zeros(1)], neural.TrainConfig())
    assert model.weights[0][0, 0] == 1.5 and model.biases[0][0] == 0.0


def test_adam_quadratic_oracle():
    model = scalar_model(0.0)
    cfg = neural.TrainConfig(learning_rate=0.1)
    for _ in range(200):
        w = model.weights[0][0, 0]
        neural.adam_step(model, [np.array([[2.0 * (w - 3.0)]]), np.zeros(1)], cfg)
    assert abs(model.weights[0][0, 0] - 3.0) < 0.05


def test_adam_shape_mismatch():
    with pytest.raises(InputError):
        neural.adam_step(scalar_model(0.0), [np.zeros((2, 1)), np.zeros(1)], neural.TrainConfig())


def test_train_identity_map():
    rng = np.random.default_rng(4)
    x = rng.uniform(-1, 1, size=(500, 1))
    model = neural.init_model(neural.MlpSpec(1, 1, (16, 16), seed=0))
    _, hist = neural.train(model, x, x, neural.TrainConfig(learning_rate=1e-2, epochs=100, seed=0))
    assert hist.val_mse[-1] < 0.01
    assert hist.train_mse[-1] < hist.train_mse[0]
    assert len(hist.train_mse) == len(hist.val_mse) == 100


def test_train_zero_epochs():
    model = neural.init_model(neural.MlpSpec(1, 1, (4,), seed=0))
    before = [p.copy() for p in model.params()]
    model, hist = neural.train(model, np.ones((5, 1)), np.ones(5), neural.TrainConfig(epochs=0))
    assert hist.train_mse == [] and hist.val_mse == []
    assert all(np.array_equal(a, b) for a, b in zip(before, model.params()))


def test_train_deterministic():
    rng = np.random.default_rng(5)
    x, y = rng.standard_normal((100, 3)), rng.standard_normal((100, 2))
    runs = []
    for _ in range(2):
        m = neural.init_model(neural.MlpSpec(3, 2, (8,), seed=7))
        neural.train(m, x, y, neural.TrainConfig(epochs=5, seed=7))
        runs.append(m.params())
    assert all(np.array_equal(a, b) for a, b in zip(*runs))


def test_train_nonfinite_reports_epoch():
    model = neural.init_model(neural.MlpSpec(1, 1, (4,), seed=0))
    x = np.ones((10, 1))
    y = np.full(10, 1e300)
    with pytest.raises(NumericalError) as err:
        neural.train(model, x, y, neural.TrainConfig(epochs=3))
    assert err.value.index == 0


def test_train_needs_two_examples():
    model = neural.init_model(neural.MlpSpec(1, 1, (4,)))
    with pytest.raises(InputError):
        neural.train(model, np.ones((1, 1)), np.ones(1), neural.TrainConfig())


def test_train_config_validation():
    with pytest.raises(InputError):
        neural.TrainConfig(learning_rate=0.0)
    with pytest.raises(InputError):
        neural.TrainConfig(validation_fraction=1.0)


def test_validation_split_is_head_of_shuffle():
    cfg = neural.TrainConfig(validation_fraction=0.2, seed=3)
    x = np.arange(10.0).reshape(-1, 1)
    (_, _), (xv, _), _ = neural.split_dataset(x, x, cfg)
    order = np.random.default_rng(3).permutation(10)
    assert np.array_equal(xv[:, 0], order[:2])


def test_classifier_on_blobs():
    rng = np.random.default_rng(6)
    pts, labels = neural.make_blobs(1000, rng)
    model, _, acc = neural.train_classifier(pts, labels, neural.MlpSpec(2, 1, (16,)),
                                            neural.TrainConfig(learning_rate=1e-2, epochs=30))
    assert acc >= 0.95
    assert neural.forward(model, np.array([1.0, 1.0]))[0] > 0
    assert neural.accuracy(model, pts, labels) >= 0.95


def test_classifier_quality_gate():
    rng = np.random.default_rng(7)
    pts = rng.standard_normal((200, 2))
    labels = np.where(rng.uniform(size=200) < 0.5, 1.0, -1.0)  # pure noise
    with pytest.raises(TrainingError):
        neural.train_classifier(pts, labels, neural.MlpSpec(2, 1, (4,)), neural.TrainConfig(epochs=2))


def test_save_load_round_trip(tmp_path):
    model = neural.init_model(neural.MlpSpec(3, 2, (5, 4), seed=9))
    neural.save_model(model, tmp_path / "m.mlp", {"note": "x"})
    back, extra = neural.load_model(tmp_path / "m.mlp")
    assert extra == {"note": "x"}
    assert back.spec == model.spec
    assert all(np.array_equal(a, b) for a, b in zip(model.params(), back.params()))
    raw = (tmp_path / "m.mlp").read_bytes()
    assert raw[:8] == b"LINITMLP"


def test_load_rejects_foreign_file(tmp_path):
    (tmp_path / "x.bin").write_bytes(b"not a model at all")
    with pytest.raises(InputError):
        neural.load_model(tmp_path / "x.bin")
