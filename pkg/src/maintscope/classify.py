"""Keyword classification of commit messages into maintenance activities."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field


class ChangeCategory(str, enum.Enum):
    CORRECTIVE = "corrective"
    PERFECTIVE = "perfective"
    ADAPTIVE = "adaptive"
    UNCLASSIFIED = "unclassified"

    def __str__(self) -> str:
        return self.value


# single-label precedence order
CATEGORIES = (ChangeCategory.CORRECTIVE, ChangeCategory.PERFECTIVE, ChangeCategory.ADAPTIVE)

DEFAULT_STEMS = {
    ChangeCategory.CORRECTIVE: ("fix", "resolv", "clos", "handl", "issue", "defect", "bug",
                                "problem", "ticket"),
    ChangeCategory.PERFECTIVE: ("refactor", "re-factor", "reimplement", "re-implement",
                                "design", "replac", "modify", "updat", "upgrad", "cleanup",
                                "clean-up"),
    ChangeCategory.ADAPTIVE: ("add", "new", "introduc", "implement", "implemented", "extend",
                              "feature", "support"),
}

_TOKEN = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class KeywordTable:
    stems: dict = field(default_factory=lambda: dict(DEFAULT_STEMS))

    def __post_init__(self):
        for cat, stems in self.stems.items():
            if cat not in CATEGORIES:
                raise ValueError(f"unknown category {cat!r}")
            for s in stems:
                if not s or s != s.casefold() or s != s.strip():
                    raise ValueError(f"stem {s!r} must be non-empty, trimmed and lower-case")

    @classmethod
    def default(cls) -> "KeywordTable":
        return cls()

    @classmethod
    def from_text(cls, text: str) -> "KeywordTable":
        """Read ``[corrective]``/``[perfective]``/``[adaptive]`` sections, one stem per line.

        Categories absent from the file keep their default stems.
        """
        stems = dict(DEFAULT_STEMS)
        seen: dict[ChangeCategory, list[str]] = {}
        current = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                try:
                    current = ChangeCategory(line[1:-1].strip().lower())
                except ValueError:
                    raise ValueError(f"line {lineno}: unknown section {line}") from None
                if current not in CATEGORIES:
                    raise ValueError(f"line {lineno}: unknown section {line}")
                seen.setdefault(current, [])
                continue
            if current is None:
                raise ValueError(f"line {lineno}: stem outside of a section")
            seen[current].append(line.casefold())
        stems.update({cat: tuple(v) for cat, v in seen.items()})
        return cls(stems)

    @classmethod
    def from_file(cls, path: str) -> "KeywordTable":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def matched_categories(message: str, table: KeywordTable | None = None) -> frozenset:
    """All categories with at least one stem present in ``message``."""
    table = table or KeywordTable()
    # upper() first so that fold(m) == fold(m.upper()) holds for every string
    folded = (message or "").upper().casefold()
    tokens = _TOKEN.findall(folded)
    found = set()
    for cat in CATEGORIES:
        for stem in table.stems.get(cat, ()):
            if "-" in stem or not stem.isalnum():
                hit = stem in folded
            else:
                hit = any(tok.startswith(stem) for tok in tokens)
            if hit:
                found.add(cat)
                break
    return frozenset(found)


def classify(message: str, table: KeywordTable | None = None, mode: str = "single"):
    """Classify a commit message.

    ``mode="single"`` returns one :class:`ChangeCategory` (precedence
    corrective > perfective > adaptive, ``UNCLASSIFIED`` when nothing
    matches); ``mode="multi"`` returns the frozenset of matched categories.
    """
    found = matched_categories(message, table)
    if mode == "multi":
        return found
    if mode != "single":
        raise ValueError(f"mode must be 'single' or 'multi', not {mode!r}")
    for cat in CATEGORIES:
        if cat in found:
            return cat
    return ChangeCategory.UNCLASSIFIED


def categories_for(message: str, table: KeywordTable | None = None,
                   multi_label: bool = False) -> frozenset:
    """Categories a commit is counted under (empty set = unclassified)."""
    if multi_label:
        return classify(message, table, "multi")
    cat = classify(message, table, "single")
    return frozenset() if cat is ChangeCategory.UNCLASSIFIED else frozenset({cat})
