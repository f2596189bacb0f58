"""Minimal RIFF/WAV reader for PCM16 and float32 audio."""

from __future__ import annotations

import struct

import numpy as np

from .errors import ParseError, UnsupportedFormat


def read_wav(path: str, channel: int = 0) -> tuple[np.ndarray, int]:
    """Read a WAV file and return (samples in [-1, 1] as float64, sample rate).

    Stereo files are de-interleaved and one channel is selected.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    return decode_wav(data, channel)


def decode_wav(data: bytes, channel: int = 0) -> tuple[np.ndarray, int]:
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise ParseError("not a RIFF/WAVE file")
    pos = 12
    fmt = None
    payload = None
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise ParseError("truncated fmt chunk")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            if len(body) < size:
                raise ParseError("truncated data chunk")
            payload = body
        pos += 8 + size + (size & 1)
    if fmt is None or payload is None:
        raise ParseError("missing fmt or data chunk")

    audio_format, n_channels, sample_rate, _, _, bits = fmt
    if audio_format == 0xFFFE and len(payload) >= 0:
        raise UnsupportedFormat("WAVE_FORMAT_EXTENSIBLE not supported")
    if audio_format == 1 and bits == 16:
        samples = np.frombuffer(payload, dtype="<i2").astype(np.float64) / 32768.0
    elif audio_format == 3 and bits == 32:
        samples = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    else:
        raise UnsupportedFormat("unsupported codec: format=%d bits=%d"
                                % (audio_format, bits))
    if n_channels < 1:
        raise UnsupportedFormat("channel count %d" % n_channels)
    if n_channels > 1:
        if channel >= n_channels:
            raise UnsupportedFormat("channel %d requested, file has %d"
                                    % (channel, n_channels))
        samples = samples[channel::n_channels]
    return samples, sample_rate


def write_wav(path: str, samples: np.ndarray, sample_rate: int) -> None:
    """Write mono PCM16; test fixtures and synthetic corpora only."""
    pcm = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)
    pcm = (pcm * 32767.0).astype("<i2").tobytes()
    header = struct.pack("<4sI4s4sIHHIIHH4sI",
                         b"RIFF", 36 + len(pcm), b"WAVE",
                         b"fmt ", 16, 1, 1, sample_rate,
                         sample_rate * 2, 2, 16, b"data", len(pcm))
    with open(path, "wb") as fh:
        fh.write(header + pcm)
