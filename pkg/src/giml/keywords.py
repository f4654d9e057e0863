"""Multilingual keyword registry.

Every GIML keyword (element names, attribute names and enumerated
attribute values) exists in four spellings, one per supported language.
The registry maps those spellings onto stable canonical identifiers and
back.  It is generated from ``keywords.tsv`` which lives next to this
module; the table format is documented in the file header.

Matching is case insensitive through Unicode casefolding, so tokens may
be written in any capitalisation while diacritics stay significant
(``größeX`` and ``GrößeX`` match, ``grozeX`` does not).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

LANGUAGES = ("en", "fr", "de", "pl")

ELEMENT = "element"
ATTRIBUTE = "attribute"
ENUM_VALUE = "enum_value"

_DATA_FILE = Path(__file__).with_name("keywords.tsv")


def fold(token: str) -> str:
    """Casefold a keyword token the way all registry lookups do."""
    return token.strip().casefold()


@dataclass(frozen=True)
class KeywordEntry:
    """One keyword with its four-language spellings.

    ``spellings`` maps a language code to the accepted spellings; the
    first spelling is the canonical one used when rendering, any others
    are aliases accepted on lookup only.
    """

    canonical_id: str
    kind: str
    owner: str
    spellings: dict[str, tuple[str, ...]] = field(hash=False)
    flags: frozenset[str] = frozenset()

    def primary(self, language: str) -> str:
        return self.spellings[language][0]


class KeywordError(KeyError):
    """Raised when rendering an identifier the registry does not know."""


class KeywordRegistry:
    """Lookup and rendering over the full keyword table."""

    def __init__(self, entries: Iterable[KeywordEntry]):
        self._entries: list[KeywordEntry] = list(entries)
        # (kind, owner, language, folded spelling) -> canonical id
        self._by_spelling: dict[tuple[str, str, str, str], str] = {}
        # (canonical id, kind, owner, language) -> primary spelling
        self._by_id: dict[tuple[str, str, str, str], str] = {}
        for entry in self._entries:
            for language in LANGUAGES:
                for i, spelling in enumerate(entry.spellings[language]):
                    key = (entry.kind, entry.owner, language, fold(spelling))
                    previous = self._by_spelling.get(key)
                    if previous is not None and previous != entry.canonical_id:
                        raise ValueError(
                            "ambiguous keyword %r (%s/%s/%s): %s vs %s"
                            % (spelling, entry.kind, entry.owner, language,
                               previous, entry.canonical_id)
                        )
                    self._by_spelling[key] = entry.canonical_id
                    if i == 0:
                        self._by_id[(entry.canonical_id, entry.kind,
                                     entry.owner, language)] = spelling
        self._check_region_namespaces()
        self._check_render_consistency()

    # -- construction checks ------------------------------------------------

    def _check_region_namespaces(self) -> None:
        # Region elements carry both the region-only attributes and the
        # shared state attributes, so those two attribute namespaces must
        # not collide in any language.
        for language in LANGUAGES:
            seen: dict[str, str] = {}
            for entry in self._entries:
                if entry.kind != ATTRIBUTE or entry.owner not in ("REGION", "REGION_STATE"):
                    continue
                for spelling in entry.spellings[language]:
                    folded = fold(spelling)
                    other = seen.get(folded)
                    if other is not None and other != entry.canonical_id:
                        raise ValueError(
                            "region attribute %r (%s) collides: %s vs %s"
                            % (spelling, language, other, entry.canonical_id)
                        )
                    seen[folded] = entry.canonical_id

    def _check_render_consistency(self) -> None:
        # The same canonical id may be registered under several owners
        # (name, path, folder...).  Rendering without an owner is only
        # well defined if all of them agree on the spelling.
        per_id: dict[tuple[str, str, str], str] = {}
        for (cid, kind, _owner, language), spelling in self._by_id.items():
            key = (cid, kind, language)
            previous = per_id.setdefault(key, spelling)
            if previous != spelling:
                raise ValueError(
                    "canonical id %s renders inconsistently in %s: %r vs %r"
                    % (cid, language, previous, spelling)
                )

    # -- queries ------------------------------------------------------------

    @property
    def entries(self) -> list[KeywordEntry]:
        return list(self._entries)

    def lookup(self, token: str, language: str, kind: str,
               owner: str) -> Optional[str]:
        """Canonical id for a token, or None when the token is unknown."""
        return self._by_spelling.get((kind, owner, language, fold(token)))

    def render(self, canonical_id: str, language: str, kind: str = None,
               owner: str = None) -> str:
        """Spelling of a canonical id in the given language.

        ``kind`` and ``owner`` narrow the search when given; without them
        the first registered entry wins, which is unambiguous because the
        construction checks enforce consistent spellings per id.
        """
        if kind is not None and owner is not None:
            try:
                return self._by_id[(canonical_id, kind, owner, language)]
            except KeyError:
                raise KeywordError(canonical_id) from None
        for (cid, k, o, lang), spelling in self._by_id.items():
            if cid != canonical_id or lang != language:
                continue
            if kind is not None and k != kind:
                continue
            if owner is not None and o != owner:
                continue
            return spelling
        raise KeywordError(canonical_id)

    def entry(self, canonical_id: str, kind: str, owner: str) -> KeywordEntry:
        for e in self._entries:
            if (e.canonical_id, e.kind, e.owner) == (canonical_id, kind, owner):
                return e
        raise KeywordError(canonical_id)

    def suggest(self, token: str, language: str, kind: str,
                owner: str) -> Optional[str]:
        """Nearest registered spelling within edit distance 2, if unique.

        Used to attach "did you mean" hints to unknown-keyword
        diagnostics.  Returns the primary spelling of the best match, or
        None when nothing is close or two different keywords tie.
        """
        folded = fold(token)
        best: Optional[tuple[int, str, str]] = None  # distance, id, spelling
        tie = False
        for entry in self._entries:
            if entry.kind != kind or entry.owner != owner:
                continue
            for spelling in entry.spellings[language]:
                d = _edit_distance(folded, fold(spelling), limit=2)
                if d is None:
                    continue
                if best is None or d < best[0]:
                    best = (d, entry.canonical_id, entry.primary(language))
                    tie = False
                elif d == best[0] and entry.canonical_id != best[1]:
                    tie = True
        if best is None or tie:
            return None
        return best[2]

    def dump(self) -> str:
        """Render the whole table as aligned text, one keyword per line."""
        rows = [("id", "kind", "owner", "en", "fr", "de", "pl")]
        for entry in self._entries:
            rows.append((
                entry.canonical_id, entry.kind, entry.owner,
                *("|".join(entry.spellings[lang]) for lang in LANGUAGES),
            ))
        widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
                 for row in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"


def _edit_distance(a: str, b: str, limit: int) -> Optional[int]:
    """Levenshtein distance capped at ``limit``; None when above it."""
    if abs(len(a) - len(b)) > limit:
        return None
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        lowest = i
        for j, cb in enumerate(b, start=1):
            cost = min(previous[j] + 1,
                       current[j - 1] + 1,
                       previous[j - 1] + (ca != cb))
            current.append(cost)
            lowest = min(lowest, cost)
        if lowest > limit:
            return None
        previous = current
    return previous[-1] if previous[-1] <= limit else None


def _parse_table(text: str) -> list[KeywordEntry]:
    entries = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cells = line.split("\t")
        if len(cells) != 8:
            raise ValueError("keywords.tsv line %d: expected 8 columns, got %d"
                             % (line_no, len(cells)))
        cid, kind, owner, en, fr, de, pl, flags = cells
        spellings = {
            lang: tuple(part.strip() for part in cell.split("|") if part.strip())
            for lang, cell in zip(LANGUAGES, (en, fr, de, pl))
        }
        for lang, forms in spellings.items():
            if not forms:
                raise ValueError("keywords.tsv line %d: empty %s cell"
                                 % (line_no, lang))
        entries.append(KeywordEntry(
            canonical_id=cid.strip(),
            kind=kind.strip(),
            owner=owner.strip(),
            spellings=spellings,
            flags=frozenset() if flags.strip() == "-"
            else frozenset(flags.strip().split(",")),
        ))
    return entries


@functools.lru_cache(maxsize=1)
def load_registry() -> KeywordRegistry:
    """The process wide registry, loaded once from the data file."""
    return KeywordRegistry(_parse_table(_DATA_FILE.read_text(encoding="utf-8")))
