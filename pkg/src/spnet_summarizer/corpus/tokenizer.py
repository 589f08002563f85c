"""Lowercasing tokenizer shared by corpus processing and evaluation."""

import re
from typing import List

# slot placeholders and clock times stay whole; punctuation becomes its own token
_TOKEN_PATTERN = re.compile(r"\[[a-z0-9_\-]+\]|\d{1,2}:\d{2}|\w+|[^\w\s]")
_MARKUP = re.compile(r"<[^>]+>")


def tokenize(text: str) -> List[str]:
    """Lowercase ``text`` and split it on whitespace and punctuation."""
    return _TOKEN_PATTERN.findall(text.lower())


def strip_markup(text: str) -> str:
    """Remove HTML-style tags (MultiWOZ goal messages carry emphasis spans)."""
    return _MARKUP.sub(" ", text)
