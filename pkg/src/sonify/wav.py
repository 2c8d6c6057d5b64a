"""RIFF/WAVE reading and writing (PCM and IEEE float).

Files with more than two channels are written with the WAVE_FORMAT_EXTENSIBLE
header and a zero channel mask, which is what ambisonic (ambiX) tools expect.
"""
from __future__ import annotations

import struct
from pathlib import Path
from typing import NamedTuple

import numpy as np

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE
# KSDATAFORMAT_SUBTYPE_* GUID tail shared by PCM and float
_GUID_TAIL = b"\x00\x00\x00\x00\x10\x00\x80\x00\x00\xaa\x00\x38\x9b\x71"

ENCODINGS = ("pcm16", "float32")
MAX_CHANNELS = 65535


class WavError(Exception):
    pass


class WavData(NamedTuple):
    data: np.ndarray  # (channels, frames) float64
    sample_rate: int
    encoding: str


def quantize_pcm16(x) -> np.ndarray:
    """Scale by 32767 and round half away from zero; input clipped to [-1, 1]."""
    x = np.clip(np.asarray(x, dtype=np.float64), -1.0, 1.0)
    return (np.sign(x) * np.floor(np.abs(x) * 32767.0 + 0.5)).astype("<i2")


def encode(data, sample_rate: int, encoding: str = "pcm16") -> bytes:
    """Serialise ``data`` (channels x frames) to WAV bytes."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim == 1:
        data = data[np.newaxis, :]
    if data.ndim != 2:
        raise WavError("audio must be a (channels, frames) array")
    nch, nframes = data.shape
    if not 1 <= nch <= MAX_CHANNELS:
        raise WavError(f"channel count {nch} outside 1..{MAX_CHANNELS}")
    if not np.all(np.isfinite(data)):
        raise WavError("refusing to write non-finite samples")
    if encoding == "pcm16":
        tag, bits = WAVE_FORMAT_PCM, 16
        payload = quantize_pcm16(data.T).tobytes()
    elif encoding == "float32":
        tag, bits = WAVE_FORMAT_IEEE_FLOAT, 32
        payload = np.ascontiguousarray(data.T, dtype="<f4").tobytes()
    else:
        raise WavError(f"unknown encoding {encoding!r}; choose from {ENCODINGS}")
    block = nch * bits // 8
    rate = int(sample_rate)
    if nch > 2:
        fmt = struct.pack(
            "<HHIIHHHHI16s", WAVE_FORMAT_EXTENSIBLE, nch, rate, rate * block, block, bits,
            22, bits, 0, struct.pack("<H", tag) + _GUID_TAIL,
        )
    else:
        fmt = struct.pack("<HHIIHH", tag, nch, rate, rate * block, block, bits)
        if tag != WAVE_FORMAT_PCM:
            fmt += b"\x00\x00"
    chunks = [b"fmt " + struct.pack("<I", len(fmt)) + fmt]
    if tag != WAVE_FORMAT_PCM:
        chunks.append(b"fact" + struct.pack("<II", 4, nframes))
    chunks.append(b"data" + struct.pack("<I", len(payload)) + payload)
    if len(payload) % 2:
        chunks.append(b"\x00")
    body = b"WAVE" + b"".join(chunks)
    if len(body) > 0xFFFFFFFF:
        raise WavError("audio too large for a RIFF file")
    return b"RIFF" + struct.pack("<I", len(body)) + body


def write_wav(path, data, sample_rate: int, encoding: str = "pcm16") -> Path:
    path = Path(path)
    blob = encode(data, sample_rate, encoding)
    path.write_bytes(blob)
    return path


def decode(blob: bytes) -> WavData:
    if len(blob) < 12 or blob[:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise WavError("not a RIFF/WAVE file")
    pos, fmt, payload = 12, None, None
    while pos + 8 <= len(blob):
        cid, size = blob[pos:pos + 4], struct.unpack("<I", blob[pos + 4:pos + 8])[0]
        body = blob[pos + 8:pos + 8 + size]
        if cid == b"fmt ":
            fmt = body
        elif cid == b"data":
            payload = body
        pos += 8 + size + (size & 1)
    if fmt is None or payload is None:
        raise WavError("missing fmt or data chunk")
    tag, nch, rate, _, block, bits = struct.unpack("<HHIIHH", fmt[:16])
    if tag == WAVE_FORMAT_EXTENSIBLE:
        if len(fmt) < 40:
            raise WavError("truncated extensible fmt chunk")
        tag = struct.unpack("<H", fmt[24:26])[0]
    if nch == 0:
        raise WavError("zero channels")
    width = bits // 8
    usable = len(payload) - len(payload) % (nch * width)
    raw = payload[:usable]
    if tag == WAVE_FORMAT_PCM and bits == 16:
        x, enc = np.frombuffer(raw, "<i2").astype(np.float64) / 32767.0, "pcm16"
    elif tag == WAVE_FORMAT_PCM and bits == 24:
        b = np.frombuffer(raw, np.uint8).reshape(-1, 3).astype(np.int32)
        v = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        v = np.where(v >= 1 << 23, v - (1 << 24), v)
        x, enc = v.astype(np.float64) / 8388607.0, "pcm24"
    elif tag == WAVE_FORMAT_PCM and bits == 32:
        x, enc = np.frombuffer(raw, "<i4").astype(np.float64) / 2147483647.0, "pcm32"
    elif tag == WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        x, enc = np.frombuffer(raw, "<f4").astype(np.float64), "float32"
    elif tag == WAVE_FORMAT_IEEE_FLOAT and bits == 64:
        x, enc = np.frombuffer(raw, "<f8").copy(), "float64"
    else:
        raise WavError(f"unsupported sample format (tag {tag:#x}, {bits} bits)")
    return WavData(x.reshape(-1, nch).T.copy(), rate, enc)


def read_wav(path) -> WavData:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise WavError(f"cannot read {path}: {exc}") from exc
    try:
        return decode(blob)
    except WavError as exc:
        raise WavError(f"{path}: {exc}") from None
