"""The summarization network.

Two bidirectional role encoders (user, system) feed one LSTM decoder. Every decoder
step attends over both encoders with separate attention parameters, merges the two
context vectors, and mixes a generation distribution over the fixed vocabulary with
a copy distribution over the source tokens of the extended vocabulary. A domain
classifier reads the two final encoder states.

Without speaker roles a single encoder reads the interleaved dialog, and the decoder
attends and copies over that one stream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from spnet_summarizer.corpus.types import SYSTEM_ENCODER, USER_ENCODER, DelexRecord
from spnet_summarizer.corpus.vocab import PAD, RESERVED_TOKENS, SOS, ExtendedVocab
from spnet_summarizer.exceptions import ConfigurationError, ContractError
from spnet_summarizer.model.params import AttentionParams, ModelParams, PointerParams
from spnet_summarizer.numcore import Tensor, get_precision, linear_forward, lstm_cell_forward
from spnet_summarizer.numcore import ops

COPY_WEIGHT = 0.5

_NORMALIZATION_TOLERANCE = {"float32": 1e-4, "float64": 1e-9}


@dataclass
class EncodedDialog:
    """Encoder outputs for one dialog, indexed by encoder id.

    Role encoders are user 0 and system 1; a shared encoder is the only entry, id 0.
    """

    vocab: ExtendedVocab
    tokens: Tuple[List[str], ...]
    source_ids: Tuple[List[int], ...]
    masks: Tuple[NDArray[np.bool_], ...]
    states: Tuple[Tensor, ...]
    finals: Tuple[Tensor, ...]
    keys: Tuple[Tensor, ...]

    def __len__(self) -> int:
        return sum(len(t) for t in self.tokens)

    @property
    def n_encoders(self) -> int:
        return len(self.states)

    @property
    def final_pair(self) -> Tuple[Tensor, Optional[Tensor]]:
        """Final states as ``(user, system)``; the system slot is None for a shared encoder."""
        return (self.finals[0], self.finals[1] if len(self.finals) > 1 else None)


@dataclass
class DecoderStepTrace:
    """Everything one decoder step computed; ``energies``/``attention`` hold one entry per encoder."""

    input_id: int
    x: Tensor
    state: Tensor
    energies: Tuple[Tensor, ...]
    attention: Tuple[Tensor, ...]
    context: Tensor
    p_gen: Tensor
    p_vocab: Tensor
    distribution: Tensor

    @property
    def merged_attention(self) -> Tuple[NDArray[Any], ...]:
        """Per-encoder attention scaled by its copy weight."""
        weight = copy_weight(len(self.attention))
        return tuple(weight * a.data for a in self.attention)


@dataclass
class DomainPrediction:
    probabilities: Tensor

    @property
    def values(self) -> NDArray[Any]:
        return self.probabilities.data


def copy_weight(n_encoders: int) -> float:
    """Share of the copy distribution each encoder contributes."""
    return COPY_WEIGHT if n_encoders == 2 else 1.0 / n_encoders


def encode_dialog(record: DelexRecord, vocab: ExtendedVocab, params: ModelParams) -> EncodedDialog:
    """Run the bidirectional encoders over the dialog's streams.

    With speaker roles the user and system streams go to their own encoders.
    Otherwise the record must carry one interleaved stream (see
    ``build_shared_record``), read by the shared encoder. An empty stream is replaced
    by a single unmasked PAD token.

    Raises:
        ContractError: If a token id falls outside the model's embedding table, or a
            shared-encoder model gets a record with a system stream.
    """
    roles = params.dims.encoder_roles
    if not params.dims.speaker_roles and record.system_stream:
        raise ContractError("A shared-encoder model needs an interleaved record with an empty system stream")
    tokens: List[List[str]] = []
    source_ids: List[List[int]] = []
    masks: List[NDArray[np.bool_]] = []
    states: List[Tensor] = []
    finals: List[Tensor] = []
    keys: List[Tensor] = []
    for encoder, role in enumerate(roles):
        stream = list(record.stream(encoder)) or [RESERVED_TOKENS[PAD]]
        ids = vocab.encode(stream)
        input_ids = [vocab.input_id(i) for i in ids]
        if max(input_ids) >= params.dims.vocab_size:
            raise ContractError(
                f"Token id {max(input_ids)} is outside the embedding table of size {params.dims.vocab_size}"
            )
        H, final = _bidirectional(ops.take_rows(params["embedding"], input_ids), params, role)
        attention = params.attention(encoder)
        tokens.append(stream)
        source_ids.append(ids)
        masks.append(np.ones(len(stream), dtype=bool))
        states.append(H)
        finals.append(final)
        keys.append(attention_keys(H, attention))
    return EncodedDialog(
        vocab=vocab,
        tokens=tuple(tokens),
        source_ids=tuple(source_ids),
        masks=tuple(masks),
        states=tuple(states),
        finals=tuple(finals),
        keys=tuple(keys),
    )


def _bidirectional(embedded: Tensor, params: ModelParams, role: str) -> Tuple[Tensor, Tensor]:
    n = embedded.shape[0]
    rows = [ops.row(embedded, i) for i in range(n)]
    forward = _run_lstm(rows, params, f"enc_{role}_fwd")
    backward = _run_lstm(rows[::-1], params, f"enc_{role}_bwd")[::-1]
    H = ops.stack([ops.concat([f, b]) for f, b in zip(forward, backward)])
    return H, ops.concat([forward[-1], backward[0]])


def _run_lstm(inputs: Sequence[Tensor], params: ModelParams, prefix: str) -> List[Tensor]:
    weights = params.lstm(prefix)
    hidden = weights.b.shape[0] // 4
    h, c = Tensor.zeros(hidden), Tensor.zeros(hidden)
    outputs: List[Tensor] = []
    for x in inputs:
        h, c = lstm_cell_forward(x, h, c, weights)
        outputs.append(h)
    return outputs


def attention_keys(states: Tensor, attention: AttentionParams) -> Tensor:
    """``W_h h_i + b_attn`` for every position; independent of the decoder step."""
    return ops.add_rowwise(ops.matmul(states, ops.transpose(attention.W_h)), attention.b)


def attend(
    s_t: Tensor,
    states: Tensor,
    mask: Optional[NDArray[np.bool_]],
    attention: AttentionParams,
    keys: Optional[Tensor] = None,
) -> Tuple[Tensor, Tensor]:
    """Score every encoder position against the decoder state.

    ``e_i = v . tanh(W_h h_i + W_s s_t + b_attn)`` and ``a = softmax(e)`` over the
    unmasked positions.

    Raises:
        ContractError: If every position is masked.
    """
    if keys is None:
        keys = attention_keys(states, attention)
    hidden = ops.tanh(ops.add_rowwise(keys, ops.matmul(attention.W_s, s_t)))
    energies = ops.matmul(hidden, attention.v)
    return energies, ops.softmax(energies, mask)


def merge_context(a_usr: Tensor, h_usr: Tensor, a_sys: Tensor, h_sys: Tensor) -> Tensor:
    """Concatenate the attention-weighted sums of both encoders (user first)."""
    return ops.concat([ops.matmul(a_usr, h_usr), ops.matmul(a_sys, h_sys)])


def _joined(h_usr: Tensor, h_sys: Optional[Tensor]) -> Tensor:
    return h_usr if h_sys is None else ops.concat([h_usr, h_sys])


def init_decoder_state(h_usr: Tensor, h_sys: Optional[Tensor], decoder_hidden: int) -> Tuple[Tensor, Tensor]:
    """Return ``(s_0, c_0)``: the concatenated final encoder states and a zero cell.

    ``h_sys`` is None for a shared encoder, whose final state is used as it is.
    """
    size = h_usr.shape[0] + (h_sys.shape[0] if h_sys is not None else 0)
    if size != decoder_hidden:
        raise ConfigurationError(f"Final encoder states of size {size} do not fill a decoder of size {decoder_hidden}")
    return _joined(h_usr, h_sys), Tensor.zeros(decoder_hidden)


def generation_prob(context: Tensor, s_t: Tensor, x_t: Tensor, pointer: PointerParams) -> Tensor:
    """Soft switch between generating and copying."""
    z = ops.add(
        ops.add(ops.matmul(pointer.w_h, context), ops.matmul(pointer.w_s, s_t)),
        ops.add(ops.matmul(pointer.w_x, x_t), pointer.b),
    )
    return ops.sigmoid(z)


def vocab_distribution(s_t: Tensor, context: Tensor, params: ModelParams) -> Tensor:
    """``softmax(V'(V[s_t, h*_t] + b) + b')`` over the fixed vocabulary."""
    hidden = linear_forward(ops.concat([s_t, context]), params["out_V"], params["out_b"])
    return ops.softmax(linear_forward(hidden, params["out_V2"], params["out_b2"]))


def final_distribution(
    p_vocab: Tensor,
    p_gen: Tensor,
    a_usr: Tensor,
    a_sys: Tensor,
    source_usr: Sequence[int],
    source_sys: Sequence[int],
    extended_size: int,
) -> Tensor:
    """Mix generation and copy mass over the extended vocabulary.

    The copy term averages the two encoders' attention, so it sums to one.

    Raises:
        ContractError: If an input distribution is not normalized.
    """
    return mix_distribution(
        p_vocab, p_gen, [("user attention", a_usr, source_usr), ("system attention", a_sys, source_sys)], extended_size
    )


def mix_distribution(
    p_vocab: Tensor,
    p_gen: Tensor,
    sources: Sequence[Tuple[str, Tensor, Sequence[int]]],
    extended_size: int,
) -> Tensor:
    """Generation mass plus copy mass from any number of ``(label, attention, ids)`` sources.

    Raises:
        ContractError: If an input distribution is not normalized.
    """
    tolerance = _NORMALIZATION_TOLERANCE[get_precision()]
    for label, dist in [("P_vocab", p_vocab), *((label, a) for label, a, _ in sources)]:
        total = float(np.sum(dist.data, dtype=np.float64))
        if abs(total - 1.0) > tolerance or np.any(dist.data < 0):
            raise ContractError(f"{label} is not a distribution (sums to {total})")
    if p_vocab.shape[0] > extended_size:
        raise ContractError(f"P_vocab size {p_vocab.shape[0]} exceeds extended size {extended_size}")
    weight = copy_weight(len(sources))
    copies = [ops.scatter_add(ops.mul_const(a, weight), ids, extended_size) for _, a, ids in sources]
    copy = copies[0]
    for extra in copies[1:]:
        copy = ops.add(copy, extra)
    generated = ops.scale(ops.pad(p_vocab, extended_size), p_gen)
    return ops.add(generated, ops.scale(copy, ops.rsub_const(1.0, p_gen)))


def decoder_step(
    input_id: int,
    s_prev: Tensor,
    c_prev: Tensor,
    encoded: EncodedDialog,
    params: ModelParams,
) -> Tuple[DecoderStepTrace, Tensor, Tensor]:
    """Advance the decoder by one token.

    ``input_id`` is an extended-vocabulary id; extension ids are embedded as UNK.
    """
    x_t = ops.row(params["embedding"], encoded.vocab.input_id(input_id))
    s_t, c_t = lstm_cell_forward(x_t, s_prev, c_prev, params.lstm("dec"))
    energies: List[Tensor] = []
    attention: List[Tensor] = []
    for encoder in range(encoded.n_encoders):
        e, a = attend(
            s_t, encoded.states[encoder], encoded.masks[encoder], params.attention(encoder), encoded.keys[encoder]
        )
        energies.append(e)
        attention.append(a)

    if encoded.n_encoders == 2:
        context = merge_context(
            attention[USER_ENCODER], encoded.states[USER_ENCODER],
            attention[SYSTEM_ENCODER], encoded.states[SYSTEM_ENCODER],
        )
    else:
        context = ops.matmul(attention[0], encoded.states[0])
    p_gen = generation_prob(context, s_t, x_t, params.pointer())
    p_vocab = vocab_distribution(s_t, context, params)
    if encoded.n_encoders == 2:
        distribution = final_distribution(
            p_vocab, p_gen, attention[USER_ENCODER], attention[SYSTEM_ENCODER],
            encoded.source_ids[USER_ENCODER], encoded.source_ids[SYSTEM_ENCODER], len(encoded.vocab),
        )
    else:
        distribution = mix_distribution(
            p_vocab, p_gen, [("dialog attention", attention[0], encoded.source_ids[0])], len(encoded.vocab)
        )
    trace = DecoderStepTrace(
        input_id=input_id,
        x=x_t,
        state=s_t,
        energies=tuple(energies),
        attention=tuple(attention),
        context=context,
        p_gen=p_gen,
        p_vocab=p_vocab,
        distribution=distribution,
    )
    return trace, s_t, c_t


def classify_domains(h_usr: Tensor, h_sys: Optional[Tensor], params: ModelParams) -> DomainPrediction:
    """``sigmoid(U'(relu(U[h_usr, h_sys] + b_d)) + b_d')``; a shared encoder passes ``h_sys=None``."""
    hidden = ops.relu(linear_forward(_joined(h_usr, h_sys), params["cls_U"], params["cls_b"]))
    return DomainPrediction(ops.sigmoid(linear_forward(hidden, params["cls_U2"], params["cls_b2"])))


def teacher_forced_steps(
    encoded: EncodedDialog, params: ModelParams, target_ids: Sequence[int]
) -> List[DecoderStepTrace]:
    """Decode with gold inputs: SOS first, then every target but the last."""
    s, c = init_decoder_state(*encoded.final_pair, decoder_hidden=params.dims.decoder_hidden)
    traces: List[DecoderStepTrace] = []
    for input_id in [SOS, *target_ids[:-1]]:
        trace, s, c = decoder_step(input_id, s, c, encoded, params)
        traces.append(trace)
    return traces
