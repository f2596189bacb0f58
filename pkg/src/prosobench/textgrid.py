"""Parser for Praat long-format ("ooTextGrid") interval tiers.

Only the subset needed for alignment ingestion is handled: interval tiers,
read by name, with words, phones and (optionally) syllables.  Phones and
syllables are attached to the word whose span contains their midpoint.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .corpus import PAUSE_LABELS, Recording, Segment, Syllable, WordToken, renumber
from .errors import InvalidInterval, MissingTier, ParseError

_NUM_RE = re.compile(r"(xmin|xmax)\s*=\s*([-\d.eE+]+)")
_TEXT_RE = re.compile(r"(?:text|mark)\s*=\s*\"(.*)\"\s*$")
_NAME_RE = re.compile(r"name\s*=\s*\"(.*)\"")
_CLASS_RE = re.compile(r"class\s*=\s*\"(.*)\"")


@dataclass
class _Interval:
    xmin: float
    xmax: float
    text: str


@dataclass
class _Tier:
    name: str
    cls: str
    intervals: list[_Interval]


def _parse_tiers(text: str) -> list[_Tier]:
    lines = text.splitlines()
    header = "\n".join(lines[:3])
    if "ooTextGrid" not in header:
        for lineno, line in enumerate(lines[:3], start=1):
            if "File type" in line and "ooTextGrid" not in line:
                raise ParseError("not an ooTextGrid file", line=lineno)
        raise ParseError("missing ooTextGrid header", line=1)

    tiers: list[_Tier] = []
    tier: Optional[_Tier] = None
    interval: Optional[_Interval] = None
    in_items = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if line.startswith("item ["):
            in_items = True
            tier = _Tier("", "", [])
            tiers.append(tier)
            interval = None
            continue
        if not in_items or tier is None:
            continue
        m = _CLASS_RE.search(line)
        if m and not tier.cls:
            tier.cls = m.group(1)
            continue
        m = _NAME_RE.search(line)
        if m and not tier.name:
            tier.name = m.group(1)
            continue
        if line.startswith("intervals [") or line.startswith("points ["):
            interval = _Interval(0.0, 0.0, "")
            tier.intervals.append(interval)
            continue
        m = _NUM_RE.search(line)
        if m and interval is not None:
            try:
                value = float(m.group(2))
            except ValueError:
                raise ParseError("unparsable time %r" % m.group(2), line=lineno)
            if m.group(1) == "xmin":
                interval.xmin = value
            else:
                interval.xmax = value
            continue
        m = _TEXT_RE.search(line)
        if m and interval is not None:
            interval.text = m.group(1).strip()
    if not tiers:
        raise ParseError("no tiers found", line=len(lines) or 1)
    return tiers


def _get_tier(tiers: list[_Tier], name: str) -> _Tier:
    for tier in tiers:
        if tier.name == name:
            return tier
    raise MissingTier("tier %r not found (have: %s)"
                      % (name, ", ".join(repr(t.name) for t in tiers)))


def _check_spans(tier: _Tier) -> None:
    for iv in tier.intervals:
        if iv.xmax <= iv.xmin:
            raise InvalidInterval("tier %r: interval [%g, %g] %r has xmax <= xmin"
                                  % (tier.name, iv.xmin, iv.xmax, iv.text))


def parse_textgrid(text: str,
                   word_tier: str,
                   phone_tier: str,
                   syllable_tier: Optional[str] = None,
                   pause_labels: frozenset[str] = PAUSE_LABELS,
                   recording_id: str = "textgrid",
                   speaker_id: str = "spk0") -> Recording:
    """Parse one speaker's TextGrid into a Recording.

    Pause-labeled word intervals are dropped and delimit utterances.
    """
    tiers = _parse_tiers(text)
    words = _get_tier(tiers, word_tier)
    phones = _get_tier(tiers, phone_tier)
    syllables = _get_tier(tiers, syllable_tier) if syllable_tier else None
    for tier in filter(None, (words, phones, syllables)):
        _check_spans(tier)

    def is_pause(label: str) -> bool:
        return label.lower() in pause_labels

    speech_phones = [iv for iv in phones.intervals if not is_pause(iv.text)]

    def contained_phones(xmin: float, xmax: float) -> tuple[Segment, ...]:
        segs = []
        for iv in speech_phones:
            mid = 0.5 * (iv.xmin + iv.xmax)
            if xmin <= mid < xmax:
                segs.append(Segment(iv.text, iv.xmin, iv.xmax))
        return tuple(segs)

    syl_intervals = None
    if syllables is not None:
        syl_intervals = [iv for iv in syllables.intervals if not is_pause(iv.text)]

    utterances: list[list[WordToken]] = []
    current: list[WordToken] = []
    for iv in words.intervals:
        if is_pause(iv.text):
            if current:
                utterances.append(current)
                current = []
            continue
        segs = contained_phones(iv.xmin, iv.xmax)
        syls = None
        if syl_intervals is not None:
            syls = []
            for siv in syl_intervals:
                mid = 0.5 * (siv.xmin + siv.xmax)
                if iv.xmin <= mid < iv.xmax:
                    syl_segs = tuple(s for s in segs
                                     if siv.xmin <= 0.5 * (s.t_start + s.t_end) < siv.xmax)
                    syls.append(Syllable(syl_segs, siv.xmin, siv.xmax))
            syls = tuple(syls) if syls else None
        current.append(WordToken(iv.text, iv.xmin, iv.xmax, segs, speaker_id,
                                 len(utterances), len(current), syls))
    if current:
        utterances.append(current)

    rec = Recording(recording_id, frozenset({speaker_id}),
                    tuple(tuple(u) for u in utterances))
    return renumber(rec)
