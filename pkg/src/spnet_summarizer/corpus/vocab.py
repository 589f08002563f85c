"""Fixed vocabulary and its per-example copy extension."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from spnet_summarizer.corpus.slots import slot_inventory
from spnet_summarizer.corpus.types import is_slot_token
from spnet_summarizer.exceptions import ConfigurationError, ContractError

PAD, UNK, SOS, EOS = 0, 1, 2, 3
RESERVED_TOKENS: Tuple[str, ...] = ("<pad>", "<unk>", "<s>", "</s>")


@dataclass(frozen=True)
class Vocabulary:
    """Token/id bijection with reserved ids 0..3 and every slot token included."""

    tokens: Tuple[str, ...]

    def __post_init__(self) -> None:
        if self.tokens[: len(RESERVED_TOKENS)] != RESERVED_TOKENS:
            raise ContractError("Vocabulary must start with the reserved tokens")
        if len(set(self.tokens)) != len(self.tokens):
            raise ContractError("Vocabulary tokens must be unique")

    @cached_property
    def index(self) -> Dict[str, int]:
        return {token: i for i, token in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: object) -> bool:
        return token in self.index

    def id_of(self, token: str) -> int:
        return self.index.get(token, UNK)

    def token_of(self, token_id: int) -> str:
        if not 0 <= token_id < len(self.tokens):
            raise ContractError(f"Token id {token_id} outside vocabulary of size {len(self.tokens)}")
        return self.tokens[token_id]

    def encode(self, tokens: Sequence[str]) -> List[int]:
        """Map tokens to ids, OOV tokens to UNK."""
        return [self.id_of(t) for t in tokens]


def build_vocab(
    streams: Iterable[Sequence[str]],
    max_size: Optional[int] = None,
    slot_tokens: Optional[Iterable[str]] = None,
) -> Vocabulary:
    """Build a vocabulary from token streams.

    Reserved tokens come first, then every slot token (sorted), then the most frequent
    remaining tokens; equal counts are ordered lexicographically.

    Args:
        streams: Token sequences (source streams and target summaries).
        max_size: Total size cap including reserved and slot tokens. ``None`` keeps all.
        slot_tokens: Slot inventory; defaults to the canonical one. Slot tokens found
            in the streams are always added as well.

    Raises:
        ContractError: If the corpus is empty.
        ConfigurationError: If ``max_size`` cannot hold the reserved and slot tokens.
    """
    counts: Counter[str] = Counter()
    slots = set(slot_tokens if slot_tokens is not None else slot_inventory())
    seen_any = False
    for stream in streams:
        seen_any = True
        for token in stream:
            if is_slot_token(token):
                slots.add(token)
            else:
                counts[token] += 1
    if not seen_any:
        raise ContractError("Cannot build a vocabulary from an empty corpus")

    fixed = list(RESERVED_TOKENS) + sorted(slots - set(RESERVED_TOKENS))
    if max_size is not None and max_size < len(fixed):
        raise ConfigurationError(
            f"max_size {max_size} is smaller than the {len(fixed)} reserved and slot tokens"
        )
    ranked = sorted((t for t in counts if t not in fixed), key=lambda t: (-counts[t], t))
    if max_size is not None:
        ranked = ranked[: max_size - len(fixed)]
    return Vocabulary(tokens=tuple(fixed + ranked))


@dataclass(frozen=True)
class ExtendedVocab:
    """Base vocabulary plus the out-of-vocabulary source tokens of one example."""

    base: Vocabulary
    extension: Tuple[str, ...] = field(default_factory=tuple)

    @cached_property
    def extension_index(self) -> Dict[str, int]:
        offset = len(self.base)
        return {token: offset + i for i, token in enumerate(self.extension)}

    def __len__(self) -> int:
        return len(self.base) + len(self.extension)

    def id_of(self, token: str) -> int:
        """Extended id of ``token``; tokens in neither part map to UNK."""
        if token in self.base:
            return self.base.index[token]
        return self.extension_index.get(token, UNK)

    def token_of(self, token_id: int) -> str:
        if token_id < len(self.base):
            return self.base.token_of(token_id)
        offset = token_id - len(self.base)
        if not 0 <= offset < len(self.extension):
            raise ContractError(f"Token id {token_id} outside extended vocabulary of size {len(self)}")
        return self.extension[offset]

    def is_extension(self, token_id: int) -> bool:
        return token_id >= len(self.base)

    def encode(self, tokens: Sequence[str]) -> List[int]:
        return [self.id_of(t) for t in tokens]

    def decode(self, ids: Sequence[int]) -> List[str]:
        return [self.token_of(i) for i in ids]

    def input_id(self, token_id: int) -> int:
        """Id used for embedding lookup: extension ids become UNK."""
        return UNK if self.is_extension(token_id) else token_id


def extend_vocab(vocab: Vocabulary, user_stream: Sequence[str], system_stream: Sequence[str]) -> ExtendedVocab:
    """Append OOV source tokens in first-occurrence order, user stream first."""
    extension: Dict[str, None] = {}
    for token in list(user_stream) + list(system_stream):
        if token not in vocab:
            extension.setdefault(token, None)
    return ExtendedVocab(base=vocab, extension=tuple(extension))
