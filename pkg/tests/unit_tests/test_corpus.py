import copy
import json

import pytest

from spnet_summarizer.corpus import (
    EOS,
    MULTIWOZ_DOMAINS,
    UNK,
    Role,
    SlotEntry,
    SlotSpan,
    SplitSizes,
    build_delex_record,
    build_shared_record,
    build_vocab,
    canonicalize_slot,
    convert_multiwoz,
    delexicalize_tokens,
    delexicalize_turn,
    dialog_from_record,
    dialog_to_record,
    extend_vocab,
    generate_synthetic_corpus,
    read_dialogs,
    relexicalize_text,
    slot_inventory,
    split_dialogs,
    tokenize,
    write_dialogs,
)
from spnet_summarizer.corpus.vocab import RESERVED_TOKENS
from spnet_summarizer.exceptions import ConfigurationError, ContractError, SchemaError


def test_tokenize_keeps_times_and_slots_whole() -> None:
    assert tokenize("Book it for 18:00, please!") == ["book", "it", "for", "18:00", ",", "please", "!"]
    assert tokenize("at [time] .") == ["at", "[time]", "."]


def test_canonical_slots() -> None:
    assert canonicalize_slot("restaurant-book-time") == "[time]"
    assert canonicalize_slot("taxi-leaveAt") == "[time]"
    assert canonicalize_slot("hotel-name") == "[place_name]"
    assert canonicalize_slot("attraction-name") == "[place_name]"
    # Unknown names survive domain-qualified
    assert canonicalize_slot("police-phone") == "[police-phone]"
    assert len(slot_inventory()) == 15


def test_delexicalize_tokens() -> None:
    tokens = ["book", "ask", "restaurant", "at", "18:00"]
    spans = [
        SlotSpan("[place_name]", "ask restaurant", 1, 3, "restaurant"),
        SlotSpan("[time]", "18:00", 4, 5, "restaurant"),
    ]
    delex, entries = delexicalize_tokens(tokens, spans, encoder=1)

    assert delex == ["book", "[place_name]", "at", "[time]"]
    assert entries == [
        SlotEntry("[place_name]", "ask restaurant", 1, 1, "restaurant"),
        SlotEntry("[time]", "18:00", 1, 3, "restaurant"),
    ]
    assert relexicalize_text(delex, entries, source=1).tokens == tokens


def test_delexicalize_rejects_bad_spans() -> None:
    tokens = ["at", "18:00"]
    with pytest.raises(ContractError):
        delexicalize_tokens(tokens, [SlotSpan("[time]", "19:00", 1, 2)])
    with pytest.raises(ContractError):
        delexicalize_tokens(tokens, [SlotSpan("[time]", "18:00", 1, 3)])
    with pytest.raises(ContractError):
        delexicalize_tokens(tokens, [SlotSpan("[time]", "at 18:00", 0, 2), SlotSpan("[time]", "18:00", 1, 2)])


def test_relexicalize_round_trip_on_synthetic_turns(synthetic_dialogs) -> None:
    """Test that relexicalizing each delexicalized turn restores its surface tokens."""
    for dialog in synthetic_dialogs:
        for turn in dialog.turns:
            delex, entries = delexicalize_turn(turn)
            restored = relexicalize_text(delex, entries, source=turn.role.encoder_id)
            assert restored.tokens == turn.tokens
            assert not restored.flagged


def test_relexicalize_with_empty_table_flags() -> None:
    result = relexicalize_text(["at", "[time]", "."], [])
    assert result.tokens == ["at", "[time]", "."]
    assert result.unresolved == [1]
    assert result.flagged


def test_delex_record_streams(synthetic_dialogs) -> None:
    dialog = synthetic_dialogs[0]
    record = build_delex_record(dialog)
    n_user = sum(len(delexicalize_turn(t)[0]) for t in dialog.turns if t.role is Role.USER)
    assert len(record.user_stream) == n_user
    for entry in record.slot_table:
        assert record.stream(entry.encoder)[entry.position] == entry.slot


def test_shared_record_interleaves_turns(synthetic_dialogs) -> None:
    """Test that the single-stream record keeps dialog order and points every slot into it."""
    dialog = synthetic_dialogs[0]
    record = build_shared_record(dialog)
    assert record.system_stream == []
    assert record.user_stream == [token for turn in dialog.turns for token in delexicalize_turn(turn)[0]]
    assert len(record.slot_table) == len(build_delex_record(dialog).slot_table)
    for entry in record.slot_table:
        assert entry.encoder == 0
        assert record.user_stream[entry.position] == entry.slot
    restored = relexicalize_text(record.user_stream, record.slot_table, source=0)
    assert restored.tokens == [token for turn in dialog.turns for token in turn.tokens]

    lexical = build_shared_record(dialog, delexicalize=False)
    assert lexical.user_stream == restored.tokens
    assert lexical.slot_table == []


def test_build_vocab_order() -> None:
    vocab = build_vocab([["b", "a", "b", "c", "a"]])
    fixed = len(RESERVED_TOKENS) + len(slot_inventory())
    assert vocab.tokens[: len(RESERVED_TOKENS)] == RESERVED_TOKENS
    assert vocab.tokens[len(RESERVED_TOKENS):fixed] == slot_inventory()
    # Equal counts break lexicographically
    assert vocab.tokens[fixed:] == ("a", "b", "c")


def test_build_vocab_edges() -> None:
    single = build_vocab([["hello"]])
    assert len(single) == len(RESERVED_TOKENS) + len(slot_inventory()) + 1
    assert single.id_of("hello") == len(single) - 1

    capped = build_vocab([["x", "x", "y", "z"]], max_size=len(single))
    assert "x" in capped and "y" not in capped

    with pytest.raises(ContractError):
        build_vocab([])
    with pytest.raises(ConfigurationError):
        build_vocab([["a"]], max_size=10)

    streams = [["the", "cat"], ["the", "dog", "[time]"]]
    assert build_vocab(streams) == build_vocab(streams)


def test_extend_vocab() -> None:
    vocab = build_vocab([["a"]])
    extended = extend_vocab(vocab, ["x", "a", "y"], ["y", "z"])
    assert extended.extension == ("x", "y", "z")
    assert extended.encode(["a", "y", "q"]) == [vocab.id_of("a"), len(vocab) + 1, UNK]
    assert extended.decode([len(vocab) + 2, EOS]) == ["z", "</s>"]
    assert extended.input_id(len(vocab)) == UNK

    # Nothing to extend
    assert extend_vocab(vocab, ["a"], ["a"]).extension == ()


def test_synthetic_corpus_is_deterministic_and_valid(synthetic_dialogs) -> None:
    again = generate_synthetic_corpus(seed=0, n_dialogs=32)
    assert [dialog_to_record(d) for d in again] == [dialog_to_record(d) for d in synthetic_dialogs]
    assert generate_synthetic_corpus(seed=1, n_dialogs=32)[0] != synthetic_dialogs[0]
    inventory = slot_inventory()
    for dialog in synthetic_dialogs:
        dialog.validate(inventory)
        assert 1 <= sum(dialog.domains) <= 2
    with pytest.raises(ConfigurationError):
        generate_synthetic_corpus(seed=0, n_dialogs=0)


def test_jsonl_round_trip(synthetic_dialogs, tmp_path) -> None:
    path = tmp_path / "train.jsonl"
    assert write_dialogs(path, synthetic_dialogs[:5]) == 5
    assert read_dialogs(path) == synthetic_dialogs[:5]


def test_jsonl_rejects_bad_records(synthetic_dialogs) -> None:
    record = dialog_to_record(synthetic_dialogs[0])

    missing = {k: v for k, v in record.items() if k != "turns"}
    with pytest.raises(SchemaError):
        dialog_from_record(missing)

    bad_domains = dict(record, domains=[1])
    with pytest.raises(SchemaError):
        dialog_from_record(bad_domains)

    tampered = copy.deepcopy(record)
    tampered["delex"]["user_stream"] = ["nothing"]
    with pytest.raises(SchemaError, match="disagrees"):
        dialog_from_record(tampered)

    with pytest.raises(SchemaError):
        dialog_from_record(dict(record, schema_version=2))


def _multiwoz_record(message="You want a <span class='emphasis'>chinese</span> restaurant. Book it for 18:00."):
    return {
        "goal": {
            "restaurant": {"info": {"food": "chinese"}, "book": {"time": "18:00"}},
            "taxi": {},
            "message": [message] if message else [],
        },
        "log": [
            {
                "text": "I want a chinese restaurant",
                "metadata": {},
                "span_info": [["Restaurant-Inform", "Food", "chinese", 3, 3]],
            },
            {
                "text": "Golden Wok serves chinese food. Booked for 18:00.",
                "metadata": {
                    "restaurant": {
                        "semi": {"food": "chinese", "name": "golden wok", "area": "not mentioned"},
                        "book": {"time": "18:00", "booked": []},
                    }
                },
                "span_info": [],
            },
        ],
    }


def test_convert_multiwoz_record() -> None:
    result = convert_multiwoz({"MUL0001.json": _multiwoz_record()})
    assert result.stats.converted == 1
    dialog = result.dialogs[0]

    assert dialog.domain_inventory == MULTIWOZ_DOMAINS
    assert dialog.active_domains == ["restaurant"]
    assert dialog.reference_summary_delex == [
        "you", "want", "a", "[food]", "restaurant", ".", "book", "it", "for", "[time]", ".",
    ]
    record = build_delex_record(dialog)
    assert record.user_stream == ["i", "want", "a", "[food]", "restaurant"]
    assert record.system_stream == ["[place_name]", "serves", "[food]", "food", ".", "booked", "for", "[time]", "."]
    assert [e.value for e in record.slot_table] == ["chinese", "golden wok", "chinese", "18:00"]


def test_convert_multiwoz_skips_and_rejects() -> None:
    broken = _multiwoz_record()
    broken["log"][0]["span_info"] = [["Restaurant-Inform", "Food", "chinese", 3, 9]]
    records = {
        "A.json": _multiwoz_record(),
        "B.json": _multiwoz_record(message=""),
        "C.json": broken,
    }
    result = convert_multiwoz(records)
    assert [d.id for d in result.dialogs] == ["A.json"]
    assert result.stats.skipped_ids == ["B.json"]
    assert result.stats.rejected_ids == ["C.json"]

    empty = convert_multiwoz({})
    assert empty.dialogs == []
    assert empty.stats.total == 0


def test_converted_record_survives_jsonl(tmp_path) -> None:
    dialog = convert_multiwoz({"MUL0001.json": _multiwoz_record()}).dialogs[0]
    line = json.dumps(dialog_to_record(dialog))
    assert dialog_from_record(json.loads(line)) == dialog


def test_split_sizes_parse() -> None:
    assert SplitSizes.parse("*,1000,1000") == SplitSizes(train=None, valid=1000, test=1000)
    assert SplitSizes.parse("10, 2, 3") == SplitSizes(train=10, valid=2, test=3)
    for bad in ("1,2", "a,b,c", "1,-1,0"):
        with pytest.raises(ConfigurationError):
            SplitSizes.parse(bad)


def test_split_dialogs(synthetic_dialogs) -> None:
    splits = split_dialogs(synthetic_dialogs, SplitSizes(train=None, valid=3, test=3), seed=7)
    assert [len(splits[name]) for name in ("train", "valid", "test")] == [26, 3, 3]
    ids = [d.id for name in ("train", "valid", "test") for d in splits[name]]
    assert sorted(ids) == sorted(d.id for d in synthetic_dialogs)
    assert split_dialogs(list(reversed(synthetic_dialogs)), SplitSizes(None, 3, 3), seed=7) == splits
    with pytest.raises(ConfigurationError):
        split_dialogs(synthetic_dialogs, SplitSizes(train=10, valid=3, test=3))
