"""Canonical artist/title strings and the song identity built from them."""

from __future__ import annotations

import functools
import re
import string
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from hitpredict.errors import EmptyTextError, RejectedRecordError

DEFAULT_FEATURING_TOKENS = frozenset({"ft", "ft.", "feat", "feat.", "featuring", "featured"})
CANONICAL_FEATURING = "feat"

_KEEP = frozenset("()")
_WHITESPACE = re.compile(r"\s+")


def _is_punctuation(ch: str) -> bool:
    if ch in _KEEP:
        return False
    return ch in string.punctuation or unicodedata.category(ch).startswith("P")


@functools.lru_cache(maxsize=None)
def _featuring_pattern(tokens: frozenset[str]) -> re.Pattern[str]:
    # Longest alternatives first so "feat." wins over "feat".
    alternatives = sorted((re.escape(t) for t in tokens), key=lambda t: (-len(t), t))
    return re.compile(r"(?<!\w)(?:" + "|".join(alternatives) + r")(?!\w)")


def _fold(text: str) -> str:
    # Upper-casing first maps letters such as dotless i onto their cased pair;
    # NFKC and casefold do not commute for every code point, so iterate.
    for _ in range(8):
        folded = unicodedata.normalize("NFKC", text).upper().casefold()
        if folded == text:
            break
        text = folded
    return text


@functools.lru_cache(maxsize=1 << 18)
def _normalize(raw: str, tokens: frozenset[str]) -> str:
    text = _fold(raw)
    text = text.replace("&", " and ")
    text = _featuring_pattern(tokens).sub(CANONICAL_FEATURING, text)
    text = "".join(" " if _is_punctuation(ch) else ch for ch in text)
    return _WHITESPACE.sub(" ", text).strip()


def normalize_text(raw: str, featuring: Iterable[str] | None = None) -> str:
    """Return the canonical form of an artist or title string.

    Steps: Unicode NFKC, case folding, ``&`` to ``and``, featuring tokens to
    ``feat``, punctuation (parentheses excepted) to spaces, whitespace collapse
    and trim. Raises :class:`EmptyTextError` when nothing is left.

    >>> normalize_text("The Artist FT. Guest")
    'the artist feat guest'
    """
    tokens = DEFAULT_FEATURING_TOKENS if featuring is None else frozenset(_fold(t) for t in featuring)
    out = _normalize(raw, tokens)
    if not out:
        raise EmptyTextError(f"empty after normalization: {raw!r}")
    return out


def load_featuring_tokens(path: str | Path) -> frozenset[str]:
    """Read a one-token-per-line UTF-8 file. Blank lines and ``#`` comments are skipped."""
    tokens = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            tokens.add(line)
    if not tokens:
        raise EmptyTextError(f"{path}: no featuring tokens")
    return frozenset(tokens)


@dataclass(frozen=True, order=True)
class SongKey:
    """Canonical (artist, title) identity shared by charts, scrobbles and audio files."""

    artist: str
    title: str

    def __str__(self) -> str:
        return f"{self.artist} - {self.title}"


def make_song_key(artist: str, title: str, featuring: Iterable[str] | None = None) -> SongKey:
    try:
        return SongKey(normalize_text(artist, featuring), normalize_text(title, featuring))
    except EmptyTextError as exc:
        raise RejectedRecordError(f"empty artist or title ({artist!r}, {title!r})") from exc
