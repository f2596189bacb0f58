"""Parser for Buckeye-style `.words` / `.phones` column files.

Both files list entries as chained end times: each row gives the end time of
an interval whose start is the previous row's end.  Rows look like

    0.402  121 okay; ow k ey; ow k; NN

i.e. whitespace-separated ``end [color] label`` before the first semicolon,
with attribute fields after it.  Non-speech entries (labels starting with
``<`` or ``{``) are dropped from the token stream and delimit utterances.
"""

from __future__ import annotations

from .corpus import TIME_TOL, Recording, Segment, WordToken, renumber
from .errors import AlignmentError, InvalidInterval, ParseError


def _parse_rows(text: str, what: str) -> list[tuple[float, float, str]]:
    """Return (start, end, label) rows from one column file."""
    rows: list[tuple[float, float, str]] = []
    prev_end = 0.0
    in_body = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not in_body:
            if line.startswith("#"):
                in_body = True
            continue
        if not line:
            continue
        head = line.split(";", 1)[0].split()
        if not head:
            continue
        try:
            end = float(head[0])
        except ValueError:
            raise ParseError("%s: unparsable end time %r" % (what, head[0]),
                             line=lineno)
        label = head[-1] if len(head) > 1 else ""
        if end <= prev_end - TIME_TOL:
            raise InvalidInterval("%s line %d: end time %g not after %g"
                                  % (what, lineno, end, prev_end))
        rows.append((prev_end, end, label))
        prev_end = end
    if not rows:
        raise AlignmentError("%s file has no entries after the '#' header" % what)
    return rows


def _non_speech(label: str) -> bool:
    return label.startswith("<") or label.startswith("{")


def parse_buckeye(words_text: str,
                  phones_text: str,
                  recording_id: str = "buckeye",
                  speaker_id: str = "spk0") -> Recording:
    word_rows = _parse_rows(words_text, ".words")
    phone_rows = _parse_rows(phones_text, ".phones")

    speech_words = [(s, e, lab) for s, e, lab in word_rows if not _non_speech(lab)]
    dropped_spans = [(s, e) for s, e, lab in word_rows if _non_speech(lab)]

    # assign speech phones to words by strict temporal containment
    word_segs: list[list[Segment]] = [[] for _ in speech_words]
    for ps, pe, plab in phone_rows:
        if _non_speech(plab):
            continue
        placed = False
        for i, (ws, we, _) in enumerate(speech_words):
            if ps >= ws - TIME_TOL and pe <= we + TIME_TOL:
                word_segs[i].append(Segment(plab, ps, pe))
                placed = True
                break
        if placed:
            continue
        if any(ps >= s - TIME_TOL and pe <= e + TIME_TOL for s, e in dropped_spans):
            continue
        raise AlignmentError("phone %r [%g, %g] not contained in any word"
                             % (plab, ps, pe))

    # non-speech rows split the token stream into utterances
    utterances: list[list[WordToken]] = []
    current: list[WordToken] = []
    speech_iter = iter(zip(speech_words, word_segs))
    for s, e, lab in word_rows:
        if _non_speech(lab):
            if current:
                utterances.append(current)
                current = []
            continue
        (_, _, _), segs = next(speech_iter)
        current.append(WordToken(lab, s, e, tuple(segs), speaker_id,
                                 len(utterances), len(current)))
    if current:
        utterances.append(current)

    rec = Recording(recording_id, frozenset({speaker_id}),
                    tuple(tuple(u) for u in utterances))
    return renumber(rec)
