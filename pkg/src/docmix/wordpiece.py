"""WordPiece tokenization against a fixed vocabulary file.

The vocab file format is one token per line, id = zero-based line number
(bit-compatible with standard BERT vocab files). Text is lowercased
(configurable), split on whitespace and punctuation, then each word is
tokenized by greedy longest-match-first WordPiece with the ``##``
continuation prefix. Words with no matchable prefix, or longer than
MAX_WORD_CHARS characters, become [UNK].
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field

PAD, UNK, CLS, SEP, MASK = "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"
SPECIAL_TOKENS = (PAD, UNK, CLS, SEP, MASK)
CONTINUATION_PREFIX = "##"
MAX_WORD_CHARS = 100


class VocabError(ValueError):
    """Raised for malformed vocabulary files."""


@dataclass(frozen=True)
class Vocabulary:
    token_to_id: dict[str, int]
    pad_id: int
    unk_id: int
    cls_id: int
    sep_id: int
    mask_id: int
    nonspecial_ids: tuple[int, ...] = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.token_to_id)

    @property
    def special_ids(self) -> frozenset[int]:
        return frozenset((self.pad_id, self.unk_id, self.cls_id, self.sep_id, self.mask_id))


def load_vocab(path) -> Vocabulary:
    """Load a one-token-per-line vocab file; line number = token id."""
    token_to_id: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for idx, line in enumerate(fh):
            token = line.rstrip("\n")
            if not token:
                raise VocabError(f"line {idx + 1}: empty token")
            if token in token_to_id:
                raise VocabError(f"line {idx + 1}: duplicate token {token!r}")
            token_to_id[token] = idx
    for special in SPECIAL_TOKENS:
        if special not in token_to_id:
            raise VocabError(f"vocabulary is missing special token {special}")
    specials = {token_to_id[t] for t in SPECIAL_TOKENS}
    nonspecial = tuple(i for i in range(len(token_to_id)) if i not in specials)
    return Vocabulary(
        token_to_id=token_to_id,
        pad_id=token_to_id[PAD],
        unk_id=token_to_id[UNK],
        cls_id=token_to_id[CLS],
        sep_id=token_to_id[SEP],
        mask_id=token_to_id[MASK],
        nonspecial_ids=nonspecial,
    )


def _is_punctuation(char: str) -> bool:
    cp = ord(char)
    if 33 <= cp <= 47 or 58 <= cp <= 64 or 91 <= cp <= 96 or 123 <= cp <= 126:
        return True
    return unicodedata.category(char).startswith("P")


def split_words(text: str, lowercase: bool = True) -> list[str]:
    """Split on whitespace, then split punctuation into standalone words."""
    if lowercase:
        text = text.lower()
    words: list[str] = []
    for chunk in text.split():
        current: list[str] = []
        for char in chunk:
            if _is_punctuation(char):
                if current:
                    words.append("".join(current))
                    current = []
                words.append(char)
            else:
                current.append(char)
        if current:
            words.append("".join(current))
    return words


def wordpiece(word: str, vocab: Vocabulary) -> list[int]:
    """Greedy longest-match-first subword split of a single word."""
    if len(word) > MAX_WORD_CHARS:
        return [vocab.unk_id]
    pieces: list[int] = []
    start = 0
    while start < len(word):
        end = len(word)
        piece_id = None
        while start < end:
            piece = word[start:end]
            if start > 0:
                piece = CONTINUATION_PREFIX + piece
            if piece in vocab.token_to_id:
                piece_id = vocab.token_to_id[piece]
                break
            end -= 1
        if piece_id is None:
            return [vocab.unk_id]
        pieces.append(piece_id)
        start = end
    return pieces


def tokenize(text: str, vocab: Vocabulary, lowercase: bool = True) -> list[int]:
    """Tokenize text into vocabulary ids.

    Ordinary text can never alias into [PAD]/[CLS]/[SEP]/[MASK] (their
    bracket characters are split off as punctuation); [UNK] appears only
    through the explicit fallback rules.
    """
    ids: list[int] = []
    for word in split_words(text, lowercase=lowercase):
        ids.extend(wordpiece(word, vocab))
    return ids
