import dataclasses

import numpy as np
import pytest

from spnet_summarizer.corpus.types import DelexRecord
from spnet_summarizer.corpus.vocab import SOS, extend_vocab
from spnet_summarizer.exceptions import ConfigurationError, ContractError
from spnet_summarizer.model.network import (
    attend,
    classify_domains,
    decoder_step,
    encode_dialog,
    final_distribution,
    generation_prob,
    init_decoder_state,
    merge_context,
    mix_distribution,
    vocab_distribution,
)
from spnet_summarizer.model.params import AttentionParams, ModelDims, ModelParams, PointerParams, parameter_shapes
from spnet_summarizer.numcore import Tensor, lstm_cell_forward


def _attention(W_h, W_s, v, b) -> AttentionParams:
    return AttentionParams(Tensor(W_h), Tensor(W_s), Tensor(v), Tensor(b))


def test_model_dims_validation() -> None:
    with pytest.raises(ConfigurationError):
        ModelDims(vocab_size=20, n_domains=2, encoder_hidden=16, decoder_hidden=16)
    with pytest.raises(ConfigurationError):
        ModelDims(vocab_size=20, n_domains=2, encoder_hidden=15, decoder_hidden=30)
    dims = ModelDims(vocab_size=20, n_domains=7)
    assert dims.decoder_hidden == 512 and dims.context_dim == 512


def test_initialize_is_seeded_and_bounded(tiny_dims) -> None:
    """Test the initialization scheme: bounded weights, zero biases, forget bias 1."""
    a = ModelParams.initialize(tiny_dims, seed=5)
    b = ModelParams.initialize(tiny_dims, seed=5)
    for name in a:
        np.testing.assert_array_equal(a[name].data, b[name].data)
    assert np.abs(a["dec_W"].data).max() <= 0.08
    hidden = tiny_dims.decoder_hidden
    np.testing.assert_array_equal(a["dec_b"].data[hidden:2 * hidden], 1.0)
    assert not a["dec_b"].data[:hidden].any()
    assert not a["out_b2"].data.any()
    assert a.n_parameters() == sum(int(np.prod(s)) for s in parameter_shapes(tiny_dims).values())


def test_zero_weights_give_zero_encoder_states(float64, tiny_dims, tiny_vocab) -> None:
    params = ModelParams.zeros(tiny_dims)
    record = DelexRecord(["you", "want", "a", "table"], ["book", "it"], [])
    encoded = encode_dialog(record, extend_vocab(tiny_vocab, record.user_stream, record.system_stream), params)
    for states in encoded.states:
        assert not states.data.any()
    assert encoded.states[0].shape == (4, tiny_dims.encoder_hidden)


def test_identical_encoders_on_identical_streams(float64, tiny_vocab, random_params) -> None:
    """Test that with shared weights both role encoders produce the same states."""
    params = random_params(2)
    for direction in ("fwd", "bwd"):
        for suffix in ("W", "b"):
            params[f"enc_sys_{direction}_{suffix}"].data[...] = params[f"enc_usr_{direction}_{suffix}"].data
    stream = ["you", "want", "a", "table", "at", "[time]"]
    record = DelexRecord(list(stream), list(stream), [])
    encoded = encode_dialog(record, extend_vocab(tiny_vocab, stream, stream), params)
    np.testing.assert_array_equal(encoded.states[0].data, encoded.states[1].data)
    np.testing.assert_array_equal(encoded.finals[0].data, encoded.finals[1].data)


def test_empty_stream_becomes_single_pad(float64, tiny_vocab, random_params) -> None:
    params = random_params(3)
    record = DelexRecord(["you", "want"], [], [])
    encoded = encode_dialog(record, extend_vocab(tiny_vocab, record.user_stream, []), params)
    assert encoded.tokens[1] == ["<pad>"]
    assert encoded.states[1].shape[0] == 1


def test_attend_uniform_and_single_position(float64) -> None:
    W_h, W_s = np.ones((2, 3)), np.ones((2, 4))
    states = Tensor(np.random.default_rng(0).normal(size=(5, 3)))
    s_t = Tensor(np.ones(4))

    _, a = attend(s_t, states, None, _attention(W_h, W_s, np.zeros(2), np.zeros(2)))
    np.testing.assert_allclose(a.data, np.full(5, 0.2))

    _, a = attend(s_t, states, np.array([False, False, True, False, False]),
                  _attention(W_h, W_s, np.ones(2), np.zeros(2)))
    np.testing.assert_array_equal(a.data, [0.0, 0.0, 1.0, 0.0, 0.0])


def test_attend_matches_hand_evaluation(float64) -> None:
    rng = np.random.default_rng(11)
    W_h, W_s = rng.normal(size=(4, 3)), rng.normal(size=(4, 2))
    v, b = rng.normal(size=4), rng.normal(size=4)
    H, s = rng.normal(size=(3, 3)), rng.normal(size=2)

    energies, a = attend(Tensor(s), Tensor(H), None, _attention(W_h, W_s, v, b))

    expected_e = np.array([v @ np.tanh(W_h @ H[i] + W_s @ s + b) for i in range(3)])
    expected_a = np.exp(expected_e) / np.exp(expected_e).sum()
    np.testing.assert_allclose(energies.data, expected_e, atol=1e-10)
    np.testing.assert_allclose(a.data, expected_a, atol=1e-10)


def test_merge_context(float64) -> None:
    h = np.array([0.3, -0.7])
    identical = Tensor(np.tile(h, (3, 1)))
    uniform = Tensor(np.full(3, 1 / 3))
    np.testing.assert_allclose(merge_context(uniform, identical, uniform, identical).data, np.concatenate([h, h]))

    rng = np.random.default_rng(4)
    H_usr, H_sys = rng.normal(size=(3, 2)), rng.normal(size=(2, 2))
    one_hot_usr, one_hot_sys = Tensor([0.0, 1.0, 0.0]), Tensor([1.0, 0.0])
    np.testing.assert_allclose(
        merge_context(one_hot_usr, Tensor(H_usr), one_hot_sys, Tensor(H_sys)).data,
        np.concatenate([H_usr[1], H_sys[0]]),
    )

    a_usr, a_sys = np.array([0.2, 0.5, 0.3]), np.array([0.9, 0.1])
    np.testing.assert_allclose(
        merge_context(Tensor(a_usr), Tensor(H_usr), Tensor(a_sys), Tensor(H_sys)).data,
        np.concatenate([a_usr @ H_usr, a_sys @ H_sys]),
        atol=1e-12,
    )


def test_init_decoder_state_order(float64) -> None:
    """Test that s_0 is the user final state followed by the system final state."""
    s0, c0 = init_decoder_state(Tensor(np.full(3, 1.0)), Tensor(np.full(3, 2.0)), decoder_hidden=6)
    np.testing.assert_array_equal(s0.data, [1, 1, 1, 2, 2, 2])
    assert not c0.data.any()
    with pytest.raises(ConfigurationError):
        init_decoder_state(Tensor(np.ones(3)), Tensor(np.ones(3)), decoder_hidden=8)


def test_generation_prob_zero_pointer(float64) -> None:
    pointer = PointerParams(Tensor.zeros(4), Tensor.zeros(3), Tensor.zeros(2), Tensor.zeros(1))
    p_gen = generation_prob(Tensor(np.ones(4)), Tensor(np.ones(3)), Tensor(np.ones(2)), pointer)
    assert p_gen.item() == 0.5


def test_final_distribution_hand_example(float64) -> None:
    """Test the generate/copy mixture on the worked example over {a, b} plus copied c."""
    p = final_distribution(
        Tensor([0.6, 0.4]), Tensor([0.5]), Tensor([1.0]), Tensor([1.0]),
        source_usr=[0], source_sys=[2], extended_size=3,
    )
    np.testing.assert_allclose(p.data, [0.55, 0.2, 0.25], atol=1e-12)


def test_final_distribution_extremes(float64) -> None:
    p_vocab = Tensor([0.1, 0.2, 0.7])
    a_usr, a_sys = Tensor([0.5, 0.5]), Tensor([1.0])
    p = final_distribution(p_vocab, Tensor([1.0]), a_usr, a_sys, [0, 3], [4], extended_size=5)
    np.testing.assert_allclose(p.data, [0.1, 0.2, 0.7, 0.0, 0.0], atol=1e-12)

    # Copy-only, one-hot attention on the same token in both encoders
    p = final_distribution(p_vocab, Tensor([0.0]), Tensor([0.0, 1.0]), Tensor([1.0]), [0, 3], [3], extended_size=4)
    np.testing.assert_allclose(p.data, [0.0, 0.0, 0.0, 1.0], atol=1e-12)


def test_final_distribution_rejects_unnormalized_input(float64) -> None:
    with pytest.raises(ContractError):
        final_distribution(Tensor([0.6, 0.6]), Tensor([0.5]), Tensor([1.0]), Tensor([1.0]), [0], [1], 2)


def test_decoder_step_matches_composed_ops(float64, tiny_vocab, random_params, random_example) -> None:
    """Test one full step against the same pipeline assembled from its parts."""
    params = random_params(6)
    example = random_example(6)
    encoded = encode_dialog(example.record, example.vocab, params)
    s0, c0 = init_decoder_state(*encoded.finals, decoder_hidden=params.dims.decoder_hidden)

    trace, s1, c1 = decoder_step(SOS, s0, c0, encoded, params)

    x = params["embedding"].data[SOS]
    s_ref, c_ref = lstm_cell_forward(Tensor(x), s0, c0, params.lstm("dec"))
    _, a_usr = attend(s_ref, encoded.states[0], None, params.attention(0))
    _, a_sys = attend(s_ref, encoded.states[1], None, params.attention(1))
    context = merge_context(a_usr, encoded.states[0], a_sys, encoded.states[1])
    p_gen = generation_prob(context, s_ref, Tensor(x), params.pointer())
    p_vocab = vocab_distribution(s_ref, context, params)
    expected = final_distribution(
        p_vocab, p_gen, a_usr, a_sys, encoded.source_ids[0], encoded.source_ids[1], len(example.vocab)
    )

    np.testing.assert_allclose(s1.data, s_ref.data, atol=1e-12)
    np.testing.assert_allclose(c1.data, c_ref.data, atol=1e-12)
    np.testing.assert_allclose(trace.distribution.data, expected.data, atol=1e-12)
    assert trace.p_gen.item() == pytest.approx(p_gen.item(), abs=1e-12)


def test_distribution_sanity_over_random_steps(float64, random_params, random_example) -> None:
    """Test normalization and range invariants over a thousand random decoder steps."""
    steps = 0
    for instance in range(50):
        params = random_params(instance, 0.5)
        example = random_example(instance)
        encoded = encode_dialog(example.record, example.vocab, params)
        s, c = init_decoder_state(*encoded.finals, decoder_hidden=params.dims.decoder_hidden)
        rng = np.random.default_rng(instance)
        for _ in range(20):
            token = int(rng.integers(0, len(example.vocab)))
            trace, s, c = decoder_step(token, s, c, encoded, params)
            assert abs(trace.distribution.data.sum() - 1.0) < 1e-6
            assert abs(trace.attention[0].data.sum() - 1.0) < 1e-6
            assert abs(trace.attention[1].data.sum() - 1.0) < 1e-6
            assert 0.0 < trace.p_gen.item() < 1.0
            steps += 1
    assert steps == 1000


def test_low_p_gen_concentrates_on_copy_candidates(float64, random_params, random_example) -> None:
    params = random_params(8)
    params["ptr_b"].data[...] = -40.0
    example = random_example(8)
    encoded = encode_dialog(example.record, example.vocab, params)
    s, c = init_decoder_state(*encoded.finals, decoder_hidden=params.dims.decoder_hidden)
    trace, _, _ = decoder_step(SOS, s, c, encoded, params)
    candidates = sorted(set(encoded.source_ids[0]) | set(encoded.source_ids[1]))
    assert trace.distribution.data[candidates].sum() > 1.0 - 1e-9


def test_classify_domains(float64, tiny_dims, random_params) -> None:
    zeros = ModelParams.zeros(tiny_dims)
    h = Tensor(np.ones(tiny_dims.encoder_hidden))
    np.testing.assert_array_equal(classify_domains(h, h, zeros).values, [0.5, 0.5])

    params = random_params(9)
    rng = np.random.default_rng(9)
    h_usr, h_sys = rng.normal(size=tiny_dims.encoder_hidden), rng.normal(size=tiny_dims.encoder_hidden)
    hidden = np.maximum(params["cls_U"].data @ np.concatenate([h_usr, h_sys]) + params["cls_b"].data, 0)
    expected = 1 / (1 + np.exp(-(params["cls_U2"].data @ hidden + params["cls_b2"].data)))
    np.testing.assert_allclose(classify_domains(Tensor(h_usr), Tensor(h_sys), params).values, expected, atol=1e-12)

    seven = ModelDims(vocab_size=20, n_domains=7, embedding_dim=8, encoder_hidden=16, decoder_hidden=32)
    assert classify_domains(h, h, ModelParams.zeros(seven)).values.shape == (7,)


@pytest.fixture
def shared_params(tiny_dims) -> ModelParams:
    dims = dataclasses.replace(tiny_dims, speaker_roles=False)
    rng = np.random.default_rng(21)
    arrays = {name: rng.uniform(-0.3, 0.3, size=shape) for name, shape in parameter_shapes(dims).items()}
    return ModelParams(dims, arrays)


def test_shared_encoder_shapes(tiny_dims) -> None:
    """Test that the shared encoder replaces both role encoders with one of twice the size."""
    dims = dataclasses.replace(tiny_dims, speaker_roles=False)
    shapes = parameter_shapes(dims)
    assert not any("_usr_" in name or "_sys_" in name for name in shapes)
    assert shapes["enc_dlg_fwd_W"] == (4 * tiny_dims.encoder_hidden, tiny_dims.embedding_dim + tiny_dims.encoder_hidden)
    assert shapes["attn_dlg_W_h"] == (tiny_dims.attention_dim, 2 * tiny_dims.encoder_hidden)
    role_shapes = parameter_shapes(tiny_dims)
    for name in ("dec_W", "ptr_w_h", "out_V", "cls_U"):
        assert shapes[name] == role_shapes[name]


def test_shared_encoder_reads_one_stream(float64, tiny_vocab, shared_params) -> None:
    stream = ["you", "want", "a", "table", "book", "it", "zorblax"]
    record = DelexRecord(stream, [], [])
    vocab = extend_vocab(tiny_vocab, stream, [])
    encoded = encode_dialog(record, vocab, shared_params)
    assert encoded.n_encoders == 1 and len(encoded) == len(stream)
    assert encoded.states[0].shape == (len(stream), 2 * shared_params.dims.encoder_hidden)
    h, missing = encoded.final_pair
    assert missing is None and h.shape == (shared_params.dims.decoder_hidden,)

    s, c = init_decoder_state(*encoded.final_pair, decoder_hidden=shared_params.dims.decoder_hidden)
    trace, _, _ = decoder_step(SOS, s, c, encoded, shared_params)
    assert len(trace.attention) == 1
    assert abs(trace.distribution.data.sum() - 1.0) < 1e-9
    np.testing.assert_allclose(trace.context.data, trace.attention[0].data @ encoded.states[0].data, atol=1e-12)
    np.testing.assert_array_equal(trace.merged_attention[0], trace.attention[0].data)
    assert classify_domains(*encoded.final_pair, shared_params).values.shape == (2,)

    with pytest.raises(ContractError):
        encode_dialog(DelexRecord(stream, ["book"], []), vocab, shared_params)


def test_single_source_mixture_copies_with_full_weight(float64) -> None:
    p = mix_distribution(Tensor([0.6, 0.4]), Tensor([0.5]), [("dialog attention", Tensor([1.0]), [2])], 3)
    np.testing.assert_allclose(p.data, [0.3, 0.2, 0.5], atol=1e-12)
