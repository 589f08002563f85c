"""Greedy and beam-search decoding.

The search itself only sees a step function ``(state, token) -> StepOutput``, so the
same code runs the network and hand-built toy distributions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Generic, List, Optional, Tuple, TypeVar

import numpy as np
from numpy.typing import NDArray

from spnet_summarizer.corpus.vocab import EOS, SOS
from spnet_summarizer.exceptions import ConfigurationError
from spnet_summarizer.model.network import DecoderStepTrace, EncodedDialog, decoder_step, init_decoder_state
from spnet_summarizer.model.params import ModelParams

DEFAULT_MAX_LEN = 120
DEFAULT_BEAM = 3

_MIN_COVERAGE = 1e-12

S = TypeVar("S")


@dataclass
class StepOutput(Generic[S]):
    """One step of a search: next-token probabilities and the state they lead to."""

    probs: NDArray[Any]
    state: S
    attention: Optional[Tuple[NDArray[Any], ...]] = None
    trace: Any = None


StepFn = Callable[[S, int], StepOutput[S]]


@dataclass
class Hypothesis(Generic[S]):
    tokens: List[int]
    log_prob: float
    state: S
    coverage: Optional[List[NDArray[Any]]] = None
    traces: List[Any] = field(default_factory=list)
    finished: bool = False

    @property
    def last_token(self) -> int:
        return self.tokens[-1] if self.tokens else SOS


def hypothesis_score(
    hyp: Hypothesis[Any], length_penalty: Optional[float] = None, coverage_penalty: Optional[float] = None
) -> float:
    """Rank of a finished hypothesis.

    Without penalties this is the summed log-probability. A length penalty ``alpha``
    divides it by ``((5 + |Y|) / 6) ** alpha``; a coverage penalty ``beta`` adds
    ``beta * sum_i log(min(sum_t a_i^t, 1))`` over the positions of both encoders.
    """
    score = hyp.log_prob
    if length_penalty is not None:
        score /= ((5.0 + len(hyp.tokens)) / 6.0) ** length_penalty
    if coverage_penalty is not None and hyp.coverage is not None:
        total = sum(float(np.sum(np.log(np.clip(c, _MIN_COVERAGE, 1.0)))) for c in hyp.coverage)
        score += coverage_penalty * total
    return score


def greedy_search(step_fn: StepFn[S], initial_state: S, max_len: int) -> Hypothesis[S]:
    """Feed back the most probable token (lowest id on ties) until EOS or ``max_len``."""
    hyp: Hypothesis[S] = Hypothesis(tokens=[], log_prob=0.0, state=initial_state)
    for _ in range(max_len):
        out = step_fn(hyp.state, hyp.last_token)
        token = int(np.argmax(out.probs))
        hyp.log_prob += float(np.log(max(float(out.probs[token]), np.finfo(np.float64).tiny)))
        hyp.state = out.state
        if token == EOS:
            hyp.finished = True
            break
        hyp.tokens.append(token)
        hyp.traces.append(out.trace)
    return hyp


def beam_search(
    step_fn: StepFn[S],
    initial_state: S,
    beam: int,
    max_len: int,
    length_penalty: Optional[float] = None,
    coverage_penalty: Optional[float] = None,
) -> Hypothesis[S]:
    """Beam search over summed log-probabilities.

    Live hypotheses are ranked by raw log-probability; finished ones compete under the
    configured penalties. Length normalization is the ``length_penalty`` option: with
    it off, finished hypotheses compete on raw summed log-probability too. With
    ``beam=1`` the result equals ``greedy_search``.

    Raises:
        ConfigurationError: If ``beam < 1``.
    """
    if beam < 1:
        raise ConfigurationError(f"Beam size must be at least 1, got {beam}")
    live: List[Hypothesis[S]] = [Hypothesis(tokens=[], log_prob=0.0, state=initial_state)]
    completed: List[Hypothesis[S]] = []
    for _ in range(max_len):
        candidates: List[Hypothesis[S]] = []
        for hyp in live:
            out = step_fn(hyp.state, hyp.last_token)
            probs = np.asarray(out.probs, dtype=np.float64)
            with np.errstate(divide="ignore"):
                log_probs = np.log(probs)
            for token in np.argsort(-probs, kind="stable")[: 2 * beam]:
                if probs[token] <= 0.0:
                    break
                candidates.append(_extend(hyp, int(token), float(log_probs[token]), out))
        candidates.sort(key=lambda h: -h.log_prob)

        live = []
        for cand in candidates:
            if cand.finished:
                completed.append(cand)
            else:
                live.append(cand)
            if len(live) == beam or len(completed) == beam:
                break
        if len(completed) >= beam or not live:
            break

    pool = completed or live
    if not pool:
        return Hypothesis(tokens=[], log_prob=float("-inf"), state=initial_state)
    scores = [hypothesis_score(h, length_penalty, coverage_penalty) for h in pool]
    return pool[max(range(len(pool)), key=lambda i: (scores[i], -i))]


def _extend(hyp: Hypothesis[S], token: int, log_prob: float, out: StepOutput[S]) -> Hypothesis[S]:
    coverage = hyp.coverage
    if out.attention is not None:
        if coverage is None:
            coverage = [np.asarray(a, dtype=np.float64).copy() for a in out.attention]
        else:
            coverage = [c + np.asarray(a, dtype=np.float64) for c, a in zip(coverage, out.attention)]
    finished = token == EOS
    return Hypothesis(
        tokens=hyp.tokens if finished else hyp.tokens + [token],
        log_prob=hyp.log_prob + log_prob,
        state=out.state,
        coverage=coverage,
        traces=hyp.traces if finished else hyp.traces + [out.trace],
        finished=finished,
    )


@dataclass
class DecodeResult:
    """A decoded summary in extended-vocabulary ids and tokens, with its step traces."""

    ids: List[int]
    tokens: List[str]
    traces: List[DecoderStepTrace]
    log_prob: float


def _network_step(encoded: EncodedDialog, params: ModelParams) -> StepFn[Any]:
    def step(state: Any, token: int) -> StepOutput[Any]:
        s, c = state
        trace, s_next, c_next = decoder_step(token, s, c, encoded, params)
        return StepOutput(
            probs=trace.distribution.data,
            state=(s_next, c_next),
            attention=tuple(a.data for a in trace.attention),
            trace=trace,
        )

    return step


def _result(hyp: Hypothesis[Any], encoded: EncodedDialog) -> DecodeResult:
    return DecodeResult(
        ids=list(hyp.tokens),
        tokens=encoded.vocab.decode(hyp.tokens),
        traces=list(hyp.traces),
        log_prob=hyp.log_prob,
    )


def greedy_decode(encoded: EncodedDialog, params: ModelParams, max_len: int = DEFAULT_MAX_LEN) -> DecodeResult:
    """Greedy decoding from SOS; extension tokens are fed back as UNK."""
    initial = init_decoder_state(*encoded.final_pair, decoder_hidden=params.dims.decoder_hidden)
    return _result(greedy_search(_network_step(encoded, params), initial, max_len), encoded)


def beam_decode(
    encoded: EncodedDialog,
    params: ModelParams,
    beam: int = DEFAULT_BEAM,
    max_len: int = DEFAULT_MAX_LEN,
    length_penalty: Optional[float] = None,
    coverage_penalty: Optional[float] = None,
) -> DecodeResult:
    """Beam-search decoding; penalties are off unless given."""
    if beam < 1:
        raise ConfigurationError(f"Beam size must be at least 1, got {beam}")
    initial = init_decoder_state(*encoded.final_pair, decoder_hidden=params.dims.decoder_hidden)
    hyp = beam_search(_network_step(encoded, params), initial, beam, max_len, length_penalty, coverage_penalty)
    return _result(hyp, encoded)
