import numpy as np
import pytest

from numeric import (
    AdamState,
    OptimizerConfig,
    Parameter,
    ParameterStore,
    ShapeError,
    Tape,
    Tensor,
    additive_attention,
    adam_step,
    affine,
    attend,
    bce_with_logits,
    clip_grad_norm,
    concat,
    embed,
    gradient_check,
    index,
    load_checkpoint,
    lstm_cell,
    matmul,
    maximum,
    mul,
    nll,
    rng_stream,
    save_checkpoint,
    sgd_step,
    sigmoid,
    softmax,
    stack,
    tanh,
    total,
)


def test_affine_row_times_matrix():
    y = affine(Tensor([1.0, 1.0]), Parameter([[1.0, 2.0], [3.0, 4.0]], "W"), Parameter([0.0, 0.0], "b"))
    np.testing.assert_allclose(y.data, [4.0, 6.0])


def test_affine_rejects_bad_dims():
    with pytest.raises(ShapeError):
        affine(Tensor([1.0, 1.0, 1.0]), Parameter(np.zeros((2, 2)), "W"), Parameter(np.zeros(2), "b"))


def test_sigmoid_value():
    assert sigmoid(Tensor(2.0)).item() == pytest.approx(0.880797, abs=1e-6)


def test_softmax_values_and_overflow():
    np.testing.assert_allclose(softmax(Tensor([np.log(1.0), np.log(3.0)])).data, [0.25, 0.75])
    np.testing.assert_allclose(softmax(Tensor([1000.0, 1000.0])).data, [0.5, 0.5])


def test_softmax_rows():
    P = softmax(Tensor([[0.0, 0.0], [0.0, np.log(3.0)]]), axis=-1)
    np.testing.assert_allclose(P.data.sum(axis=1), [1.0, 1.0])
    np.testing.assert_allclose(P.data[1], [0.25, 0.75])


def test_attention_weights_follow_scores():
    keys = Tensor([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    context, weights = attend(Tensor([0.0, np.log(2.0), np.log(4.0)]), keys)
    np.testing.assert_allclose(weights.data, [1 / 7, 2 / 7, 4 / 7])
    np.testing.assert_allclose(context.data, [5 / 7, 6 / 7])


def test_attention_rejects_empty_source():
    store = ParameterStore(rng_stream(0, "t"))
    params = store.attention("att", 2, 2, 3)
    with pytest.raises(ShapeError):
        additive_attention(Tensor([1.0, 0.0]), Tensor(np.zeros((0, 2))), params)


def test_sigmoid_gradient_at_zero():
    x = Parameter([0.0], "x")
    with Tape() as tape:
        loss = total(sigmoid(x))
    tape.backward(loss)
    assert x.grad[0] == pytest.approx(0.25)


def test_ops_outside_tape_do_not_record():
    x = Parameter([1.0], "x")
    with Tape() as tape:
        pass
    y = mul(x, x)
    assert len(tape) == 0
    assert not y.requires_grad


def test_backward_needs_scalar():
    x = Parameter([1.0, 2.0], "x")
    with Tape() as tape:
        y = mul(x, x)
    with pytest.raises(ShapeError):
        tape.backward(y)


def test_gradients_accumulate_over_shared_use():
    x = Parameter([3.0], "x")
    with Tape() as tape:
        loss = total(mul(x, x))
    tape.backward(loss)
    assert x.grad[0] == pytest.approx(6.0)


def test_maximum_routes_ties_to_first():
    a, b = Parameter([1.0, 2.0], "a"), Parameter([1.0, 3.0], "b")
    with Tape() as tape:
        loss = total(maximum(a, b))
    tape.backward(loss)
    np.testing.assert_allclose(a.grad, [1.0, 0.0])
    np.testing.assert_allclose(b.grad, [0.0, 1.0])


def test_sgd_step():
    w = Parameter([1.0], "w")
    w.grad[:] = 0.5
    sgd_step([w], lr=1.0)
    assert w.data[0] == pytest.approx(0.5)


def test_adam_first_step_moves_by_lr():
    w = Parameter([1.0, -1.0], "w")
    w.grad[:] = [0.2, -3.0]
    adam_step([w], lr=0.1, state=AdamState.empty())
    np.testing.assert_allclose(w.data, [0.9, -0.9], atol=1e-6)


def test_clip_grad_norm():
    w = Parameter([0.0, 0.0], "w")
    w.grad[:] = [3.0, 4.0]
    assert clip_grad_norm([w], 1.0) == pytest.approx(5.0)
    np.testing.assert_allclose(w.grad, [0.6, 0.8])


def test_nll_and_bce():
    assert nll(Tensor([0.25, 0.75]), 1).item() == pytest.approx(-np.log(0.75))
    z = Tensor([0.0, 0.0])
    assert bce_with_logits(z, [1.0, 0.0]).item() == pytest.approx(2 * np.log(2.0))
    with pytest.raises(ShapeError):
        bce_with_logits(z, [1.0])


def test_rng_streams_are_named_and_reproducible():
    a = rng_stream(5, "init-EL").random(4)
    b = rng_stream(5, "init-EL").random(4)
    c = rng_stream(5, "init-CMP").random(4)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)


def test_rng_stream_keys_split_a_stream():
    a = rng_stream(5, "shuffle", 0).random(4)
    b = rng_stream(5, "shuffle", 1).random(4)
    np.testing.assert_array_equal(a, rng_stream(5, "shuffle", 0).random(4))
    assert not np.allclose(a, b)


def test_lstm_cell_hand_computed():
    cell = ParameterStore(prefix="t.").lstm("cell", 1, 1)
    ln3 = np.log(3.0)
    cell.W_x.data[:] = [[ln3, 0.0, ln3 / 2, ln3]]
    h, c = lstm_cell(Tensor([1.0]), Tensor([0.0]), Tensor([2.0]), cell)
    # i = o = 3/4, f = 1/2, g = tanh(ln3 / 2) = 1/2
    assert c.item() == pytest.approx(0.5 * 2.0 + 0.75 * 0.5, abs=1e-12)
    assert h.item() == pytest.approx(0.75 * np.tanh(1.375), abs=1e-12)


def test_lstm_cell_with_zero_params_halves_the_cell():
    cell = ParameterStore(prefix="t.").lstm("cell", 2, 3)
    c0 = np.array([1.0, -2.0, 4.0])
    h, c = Tensor(np.zeros(3)), Tensor(c0)
    for t in range(1, 6):
        h, c = lstm_cell(Tensor(np.zeros(2)), h, c, cell)
        np.testing.assert_allclose(c.data, 0.5 ** t * c0, rtol=0, atol=1e-12)
        np.testing.assert_allclose(h.data, 0.5 * np.tanh(0.5 ** t * c0), rtol=0, atol=1e-12)


def test_attention_weights_are_distributions_over_random_draws():
    rng = np.random.default_rng(13)
    for draw in range(1000):
        q, k, size = (int(n) for n in rng.integers(1, 6, size=3))
        params = ParameterStore(rng_stream(draw, "att")).attention("att", q, k, size)
        keys = Tensor(rng.normal(scale=2.0, size=(int(rng.integers(1, 10)), k)))
        _, weights = additive_attention(Tensor(rng.normal(scale=2.0, size=q)), keys, params)
        assert abs(weights.data.sum() - 1.0) <= 1e-9
        assert (weights.data >= 0.0).all()


def test_store_without_rng_is_zero():
    store = ParameterStore(prefix="m.")
    W = store.add("W", (2, 3))
    assert W.name == "m.W"
    assert not W.data.any()
    with pytest.raises(KeyError):
        store.add("W", (2, 3))


def test_gradient_check_small_network():
    rng = rng_stream(11, "check")
    store = ParameterStore(rng)
    table = store.add("embedding", (5, 3))
    cell = store.lstm("cell", 3, 2)
    att = store.attention("att", 2, 2, 4)
    out = store.add("out.W", (4, 3))
    bias = store.add("out.b", (3,), init="xavier")

    def loss_fn():
        x = embed(table, [1, 3, 4])
        h = c = Tensor(np.zeros(2))
        states = []
        for t in range(3):
            h, c = lstm_cell(index(x, t), h, c, cell)
            states.append(h)
        keys = stack(states)
        ctx, _ = additive_attention(h, keys, att)
        P = softmax(affine(concat([h, tanh(ctx)]), out, bias))
        return nll(P, 2)

    assert gradient_check(loss_fn, store.parameters()) < 1e-4


def test_gradient_check_matmul_bce():
    rng = rng_stream(2, "check")
    store = ParameterStore(rng)
    W = store.add("W", (3, 2))
    x = Tensor(rng.normal(size=(4, 3)))
    y = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.0, 0.0]])
    assert gradient_check(lambda: bce_with_logits(matmul(x, W), y), [W]) < 1e-4


def test_checkpoint_round_trip_and_determinism(tmp_path):
    tensors = {"b": np.arange(3.0), "a.W": np.ones((2, 2))}
    save_checkpoint(tmp_path / "one.ckpt", tensors, {"kind": "x"})
    save_checkpoint(tmp_path / "two.ckpt", dict(reversed(tensors.items())), {"kind": "x"})
    assert (tmp_path / "one.ckpt").read_bytes() == (tmp_path / "two.ckpt").read_bytes()
    loaded, meta = load_checkpoint(tmp_path / "one.ckpt")
    assert meta == {"kind": "x"}
    np.testing.assert_array_equal(loaded["a.W"], np.ones((2, 2)))


def test_checkpoint_rejects_foreign_file(tmp_path):
    path = tmp_path / "bad.ckpt"
    path.write_bytes(b"NOTACKPT" + b"\0" * 8)
    with pytest.raises(ValueError):
        load_checkpoint(path)


def test_optimizer_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(kind="rmsprop")
    with pytest.raises(ValueError):
        OptimizerConfig(lr=0.0)


def test_optimizer_state_round_trip():
    w = Parameter([1.0], "w")
    opt = OptimizerConfig(kind="adam", lr=0.1).build([w])
    w.grad[:] = 1.0
    opt.step()
    again = OptimizerConfig(kind="adam", lr=0.1).build([w])
    again.load_state_dict(opt.state_dict())
    assert again.state.t == 1
    np.testing.assert_allclose(again.state.m["w"], opt.state.m["w"])
