"""In-memory model of a time-aligned speech corpus plus the neutral TSV
interchange format.

Every downstream stage (duration modeling, prominence scoring, benchmark
emission) consumes only the types defined here; the format-specific parsers
(textgrid, buckeye) all produce :class:`Recording` objects.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Optional, Sequence

from .errors import ParseError

TIME_TOL = 1e-6

PAUSE_LABELS = frozenset({"", "#", "sil", "sp"})

TSV_HEADER = ["speaker", "utt", "word", "t_start", "t_end", "segs", "syls"]


@dataclass(frozen=True)
class Segment:
    """One phone interval."""

    label: str
    t_start: float
    t_end: float

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class Syllable:
    segments: tuple[Segment, ...]
    t_start: float
    t_end: float

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class WordToken:
    orthography: str
    t_start: float
    t_end: float
    segments: tuple[Segment, ...]
    speaker_id: str
    utterance_index: int
    token_index: int
    syllables: Optional[tuple[Syllable, ...]] = None

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class Recording:
    id: str
    speaker_ids: frozenset[str]
    utterances: tuple[tuple[WordToken, ...], ...]
    audio_ref: Optional[str] = None

    def tokens(self) -> Iterator[WordToken]:
        for utt in self.utterances:
            yield from utt

    def n_tokens(self) -> int:
        return sum(len(u) for u in self.utterances)


@dataclass(frozen=True)
class AlignedCorpus:
    language: str  # "en", "fr" or "zh"
    recordings: tuple[Recording, ...]

    def tokens(self) -> Iterator[WordToken]:
        for rec in self.recordings:
            yield from rec.tokens()

    def n_tokens(self) -> int:
        return sum(rec.n_tokens() for rec in self.recordings)


# ---------------------------------------------------------------------------
# orthography normalization (used by the word-level analyses)

def _strip_joiners(word: str) -> str:
    word = unicodedata.normalize("NFC", word.lower())
    return "".join(ch for ch in word if ch not in "'’- ")


def _identity(word: str) -> str:
    return word


NORMALIZERS: dict[str, Callable[[str], str]] = {
    "en": _strip_joiners,
    "fr": _strip_joiners,
    "zh": _identity,
}


def normalize_word(word: str, language: str) -> str:
    """Normalize orthography for word-type analyses, e.g. you're -> youre."""
    return NORMALIZERS.get(language, _strip_joiners)(word)


# ---------------------------------------------------------------------------
# validation

@dataclass(frozen=True)
class Finding:
    kind: str
    location: str
    message: str


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def add(self, kind: str, location: str, message: str) -> None:
        self.findings.append(Finding(kind, location, message))


def validate(corpus: AlignedCorpus) -> ValidationReport:
    """Check every corpus invariant; findings are reported, never raised."""
    report = ValidationReport()
    seen_ids = set()
    if not corpus.recordings:
        report.add("EmptyCorpus", corpus.language, "corpus has no recordings")
    for rec in corpus.recordings:
        loc_rec = "%s" % rec.id
        if rec.id in seen_ids:
            report.add("DuplicateRecording", loc_rec, "recording id reused")
        seen_ids.add(rec.id)
        per_speaker: dict[str, list[WordToken]] = {}
        for tok in rec.tokens():
            loc = "%s/%s/u%d/t%d" % (rec.id, tok.speaker_id,
                                     tok.utterance_index, tok.token_index)
            if tok.speaker_id not in rec.speaker_ids:
                report.add("UnknownSpeaker", loc,
                           "token speaker not declared on recording")
            if tok.t_end - tok.t_start <= TIME_TOL:
                report.add("ZeroDuration", loc, "word duration <= 0")
            seg_sum = 0.0
            for seg in tok.segments:
                if not seg.label:
                    report.add("EmptyLabel", loc, "segment label empty")
                if seg.t_end - seg.t_start <= 0:
                    report.add("ZeroDuration", loc,
                               "segment %r duration <= 0" % seg.label)
                if seg.t_start < tok.t_start - TIME_TOL or seg.t_end > tok.t_end + TIME_TOL:
                    report.add("SpanViolation", loc,
                               "segment %r outside word span" % seg.label)
                seg_sum += seg.duration
            if seg_sum > tok.duration + TIME_TOL:
                report.add("SpanViolation", loc,
                           "segment durations exceed word duration")
            if tok.syllables is not None:
                for syl in tok.syllables:
                    if syl.t_start < tok.t_start - TIME_TOL or syl.t_end > tok.t_end + TIME_TOL:
                        report.add("SpanViolation", loc,
                                   "syllable outside word span")
            per_speaker.setdefault(tok.speaker_id, []).append(tok)
        for speaker, toks in per_speaker.items():
            ordered = sorted(toks, key=lambda t: (t.t_start, t.t_end))
            for a, b in zip(ordered, ordered[1:]):
                if b.t_start < a.t_end - TIME_TOL:
                    report.add("Overlap", "%s/%s" % (rec.id, speaker),
                               "tokens %r and %r overlap in time"
                               % (a.orthography, b.orthography))
    return report


# ---------------------------------------------------------------------------
# aligned TSV interchange format

def _fmt_time(t: float) -> str:
    return "%.6f" % t


def _fmt_segs(segments: Sequence[Segment]) -> str:
    return "|".join("%s:%s:%s" % (s.label, _fmt_time(s.t_start), _fmt_time(s.t_end))
                    for s in segments)


def _fmt_syls(token: WordToken) -> str:
    if token.syllables is None:
        return ""
    groups = []
    pos = 0
    for syl in token.syllables:
        n = len(syl.segments)
        groups.append(",".join(str(i) for i in range(pos, pos + n)))
        pos += n
    return "|".join(groups)


def emit_aligned_tsv(recording: Recording) -> str:
    """Serialize one recording in the TSV interchange format (LF endings)."""
    lines = ["\t".join(TSV_HEADER)]
    for utt in recording.utterances:
        for tok in utt:
            lines.append("\t".join([
                tok.speaker_id,
                str(tok.utterance_index),
                tok.orthography,
                _fmt_time(tok.t_start),
                _fmt_time(tok.t_end),
                _fmt_segs(tok.segments),
                _fmt_syls(tok),
            ]))
    return "\n".join(lines) + "\n"


def _parse_segs(text: str, row: int) -> tuple[Segment, ...]:
    if not text:
        return ()
    segments = []
    for part in text.split("|"):
        bits = part.split(":")
        if len(bits) != 3:
            raise ParseError("row %d: bad segment spec %r" % (row, part))
        label, s, e = bits
        try:
            segments.append(Segment(label, float(s), float(e)))
        except ValueError:
            raise ParseError("row %d: unparsable segment times in %r" % (row, part))
    return tuple(segments)


def _parse_syls(text: str, segments: tuple[Segment, ...],
                row: int) -> Optional[tuple[Syllable, ...]]:
    if not text:
        return None
    syllables = []
    for group in text.split("|"):
        try:
            idxs = [int(i) for i in group.split(",")]
        except ValueError:
            raise ParseError("row %d: unparsable syllable group %r" % (row, group))
        if any(i < 0 or i >= len(segments) for i in idxs):
            raise ParseError("row %d: syllable index out of range in %r" % (row, group))
        segs = tuple(segments[i] for i in idxs)
        syllables.append(Syllable(segs, segs[0].t_start, segs[-1].t_end))
    return tuple(syllables)


def parse_aligned_tsv(text: str, recording_id: str = "tsv") -> Recording:
    """Parse the TSV interchange format produced by :func:`emit_aligned_tsv`."""
    lines = text.splitlines()
    if not lines or lines[0].split("\t") != TSV_HEADER:
        raise ParseError("bad or missing TSV header (expected %r)"
                         % "\t".join(TSV_HEADER))
    utterances: dict[int, list[WordToken]] = {}
    speakers = set()
    for row, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != len(TSV_HEADER):
            raise ParseError("row %d: expected %d columns, got %d"
                             % (row, len(TSV_HEADER), len(cols)))
        speaker, utt_s, word, ts_s, te_s, segs_s, syls_s = cols
        try:
            utt = int(utt_s)
            t_start = float(ts_s)
            t_end = float(te_s)
        except ValueError:
            raise ParseError("row %d: unparsable numeric field" % row)
        segments = _parse_segs(segs_s, row)
        syllables = _parse_syls(syls_s, segments, row)
        toks = utterances.setdefault(utt, [])
        toks.append(WordToken(word, t_start, t_end, segments, speaker,
                              utt, len(toks), syllables))
        speakers.add(speaker)
    utts = tuple(tuple(utterances[u]) for u in sorted(utterances))
    return Recording(recording_id, frozenset(speakers), utts)


def renumber(recording: Recording) -> Recording:
    """Rewrite utterance/token indices to consecutive corpus order."""
    utts = []
    for u, utt in enumerate(recording.utterances):
        utts.append(tuple(replace(tok, utterance_index=u, token_index=i)
                          for i, tok in enumerate(utt)))
    return replace(recording, utterances=tuple(utts))
