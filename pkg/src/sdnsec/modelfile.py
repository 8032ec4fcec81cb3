"""Line-oriented declaration format shared by every file the toolkit reads.

All inputs (network models, catalogs, rule overrides, grouping tables,
attack scenarios) use one grammar: a section header line names a block,
and the ``key = value`` lines that follow belong to it. ``#`` starts a
comment, blank lines are ignored, indentation is not significant. The
formal EBNF lives in docs/model-format.md.

Repeated keys are legal and accumulate in order; consumers decide which
keys may repeat. Values run to the end of the line (comments stripped),
so they may contain spaces, commas, and punctuation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ModelSyntaxError

_HEADER_RE = re.compile(r"^(?P<kind>[a-z][a-z0-9_-]*)\s+(?P<name>[A-Za-z0-9][A-Za-z0-9_.:-]*)$")
_ASSIGN_RE = re.compile(r"^(?P<key>[A-Za-z][A-Za-z0-9_-]*)\s*=\s*(?P<value>.*)$")


@dataclass
class Entry:
    key: str
    value: str
    line: int


@dataclass
class Section:
    kind: str
    name: str
    line: int
    entries: list[Entry] = field(default_factory=list)

    def get(self, key: str, default: str | None = None) -> str | None:
        """Last value assigned to ``key``, or ``default``."""
        value = default
        for entry in self.entries:
            if entry.key == key:
                value = entry.value
        return value

    def require(self, key: str) -> str:
        value = self.get(key)
        if value is None:
            raise ModelSyntaxError(
                f"section '{self.kind} {self.name}' is missing required key {key!r}",
                self.line,
            )
        return value

    def values(self, key: str) -> list[str]:
        """All values assigned to ``key``, in declaration order."""
        return [e.value for e in self.entries if e.key == key]

    def keys(self) -> set[str]:
        return {e.key for e in self.entries}


def _strip_comment(line: str) -> str:
    # '#' opens a comment at line start or after whitespace; this keeps
    # values like "admin#1" expressible while plain trailing comments work.
    for i, ch in enumerate(line):
        if ch == "#" and (i == 0 or line[i - 1] in " \t"):
            return line[:i]
    return line


def read_sections(text: str, allowed_kinds: set[str] | None = None) -> list[Section]:
    """Parse ``text`` into sections, rejecting lines outside the grammar.

    ``allowed_kinds`` restricts header kinds; anything else raises
    ModelSyntaxError with the offending line number.
    """
    sections: list[Section] = []
    current: Section | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        m = _ASSIGN_RE.match(line)
        if m:
            if current is None:
                raise ModelSyntaxError("assignment before any section header", lineno)
            current.entries.append(Entry(m.group("key"), m.group("value").strip(), lineno))
            continue
        m = _HEADER_RE.match(line)
        if m:
            kind = m.group("kind")
            if allowed_kinds is not None and kind not in allowed_kinds:
                raise ModelSyntaxError(
                    f"unknown section kind {kind!r} (expected one of: "
                    + ", ".join(sorted(allowed_kinds)) + ")",
                    lineno,
                )
            current = Section(kind, m.group("name"), lineno)
            sections.append(current)
            continue
        raise ModelSyntaxError(f"cannot parse line: {raw.strip()!r}", lineno)
    return sections


def check_keys(section: Section, allowed: set[str]) -> None:
    """Reject keys a section's schema does not define."""
    for entry in section.entries:
        if entry.key not in allowed:
            raise ModelSyntaxError(
                f"unknown key {entry.key!r} in section '{section.kind} {section.name}'",
                entry.line,
            )


def parse_bool(value: str, line: int) -> bool:
    lowered = value.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ModelSyntaxError(f"expected a boolean, got {value!r}", line)


def parse_id_list(value: str) -> list[str]:
    """Split a comma-separated id list, preserving order."""
    return [item.strip() for item in value.split(",") if item.strip()]
