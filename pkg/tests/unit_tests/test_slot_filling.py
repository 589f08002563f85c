import itertools

import numpy as np
import pytest

from spnet_summarizer.corpus.types import SlotEntry
from spnet_summarizer.exceptions import ContractError
from spnet_summarizer.model.network import DecoderStepTrace
from spnet_summarizer.model.slot_filling import fill_slot_value, relexicalize_decoded
from spnet_summarizer.numcore import Tensor


def _trace(a_usr, a_sys) -> DecoderStepTrace:
    """A decoder step that only carries attention; everything else is a placeholder."""
    placeholder = Tensor([0.0])
    return DecoderStepTrace(
        input_id=0,
        x=placeholder,
        state=placeholder,
        energies=(Tensor(a_usr), Tensor(a_sys)),
        attention=(Tensor(a_usr), Tensor(a_sys)),
        context=placeholder,
        p_gen=Tensor([0.5]),
        p_vocab=Tensor([1.0]),
        distribution=Tensor([1.0]),
    )


def test_single_occurrence(float64) -> None:
    table = [SlotEntry("[time]", "18:00", 0, 2, "restaurant")]
    fill = fill_slot_value("[time]", _trace([0.2, 0.3, 0.5], [1.0]), table)
    assert fill.resolved
    assert fill.value == "18:00"
    assert (fill.encoder, fill.position) == (0, 2)
    assert fill.attention == pytest.approx(0.25)


def test_highest_merged_attention_wins(float64) -> None:
    table = [
        SlotEntry("[time]", "18:00", 0, 0),
        SlotEntry("[time]", "19:30", 0, 1),
    ]
    fill = fill_slot_value("[time]", _trace([0.1, 0.7, 0.2], [1.0]), table)
    assert fill.value == "19:30"


def test_attention_is_compared_across_encoders(float64) -> None:
    """Test that both encoders compete on the merged (halved) attention."""
    table = [
        SlotEntry("[place_name]", "golden wok", 0, 0),
        SlotEntry("[place_name]", "pizza hut", 1, 1),
    ]
    fill = fill_slot_value("[place_name]", _trace([0.3, 0.7], [0.2, 0.8]), table)
    assert fill.value == "pizza hut"
    assert fill.encoder == 1


def test_exact_ties_pick_the_earliest_position(float64) -> None:
    """Test every two-position tie: the lowest (encoder, position) wins regardless of table order."""
    positions = [(0, 0), (0, 1), (1, 0), (1, 1)]
    trace = _trace([0.5, 0.5], [0.5, 0.5])
    for first, second in itertools.combinations(positions, 2):
        entries = [
            SlotEntry("[day]", f"day{first}", *first),
            SlotEntry("[day]", f"day{second}", *second),
        ]
        for table in (entries, entries[::-1]):
            fill = fill_slot_value("[day]", trace, table)
            assert (fill.encoder, fill.position) == min(first, second)


def test_missing_slot_is_flagged(float64) -> None:
    fill = fill_slot_value("[time]", _trace([1.0], [1.0]), [SlotEntry("[day]", "monday", 0, 0)])
    assert not fill.resolved
    assert fill.value == "[time]"
    assert fill.position is None


def test_entry_outside_stream_is_a_contract_error(float64) -> None:
    with pytest.raises(ContractError):
        fill_slot_value("[time]", _trace([1.0], [1.0]), [SlotEntry("[time]", "18:00", 0, 4)])


def test_relexicalize_decoded(float64) -> None:
    table = [
        SlotEntry("[place_name]", "ask restaurant", 1, 0),
        SlotEntry("[time]", "18:00", 0, 1),
    ]
    tokens = ["book", "[place_name]", "at", "[time]", "[day]"]
    traces = [_trace([0.5, 0.5], [1.0]) for _ in tokens]

    summary = relexicalize_decoded(tokens, traces, table)

    assert summary.tokens == ["book", "ask", "restaurant", "at", "18:00", "[day]"]
    assert [f.slot for f in summary.fills] == ["[place_name]", "[time]", "[day]"]
    assert summary.unresolved == 1
    assert summary.fills[0].to_dict()["position"] == 0


def test_relexicalize_decoded_needs_a_trace_per_token(float64) -> None:
    with pytest.raises(ContractError):
        relexicalize_decoded(["a", "b"], [_trace([1.0], [1.0])], [])


def test_fill_uses_the_step_that_emitted_the_slot(float64) -> None:
    """Test that the same slot can resolve to different values at different steps."""
    table = [SlotEntry("[time]", "18:00", 0, 0), SlotEntry("[time]", "20:15", 0, 1)]
    traces = [_trace(np.array([0.9, 0.1]), [1.0]), _trace(np.array([0.2, 0.8]), [1.0])]
    summary = relexicalize_decoded(["[time]", "[time]"], traces, table)
    assert summary.tokens == ["18:00", "20:15"]


def test_system_entry_against_a_shared_encoder_trace(float64) -> None:
    """Test that a single-attention step cannot resolve entries recorded for a second encoder."""
    trace = _trace([0.1, 0.9], [1.0])
    trace.attention = trace.attention[:1]
    trace.energies = trace.energies[:1]
    fill = fill_slot_value("[time]", trace, [SlotEntry("[time]", "18:00", 0, 1)])
    assert fill.value == "18:00" and fill.attention == pytest.approx(0.9)
    with pytest.raises(ContractError):
        fill_slot_value("[time]", trace, [SlotEntry("[time]", "18:00", 1, 0)])
