import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.io import wavfile

from sonify.wav import WavError, decode, encode, quantize_pcm16, read_wav, write_wav


def chunks(blob):
    out, pos = {}, 12
    while pos + 8 <= len(blob):
        cid, size = blob[pos:pos + 4], struct.unpack("<I", blob[pos + 4:pos + 8])[0]
        out[cid] = blob[pos + 8:pos + 8 + size]
        pos += 8 + size + (size & 1)
    return out


def test_stereo_pcm16_layout(tmp_path):
    path = write_wav(tmp_path / "a.wav", np.zeros((2, 44100)), 44100, "pcm16")
    blob = path.read_bytes()
    assert blob[:4] == b"RIFF" and blob[8:12] == b"WAVE"
    assert struct.unpack("<I", blob[4:8])[0] == len(blob) - 8
    c = chunks(blob)
    assert len(c[b"data"]) == 2 * 44100 * 2 == 176400
    tag, nch, rate, byte_rate, block, bits = struct.unpack("<HHIIHH", c[b"fmt "][:16])
    assert (tag, nch, rate, byte_rate, block, bits) == (1, 2, 44100, 176400, 4, 16)


def test_multichannel_uses_extensible_header(tmp_path):
    x = np.random.default_rng(0).uniform(-0.5, 0.5, (16, 1000))
    path = write_wav(tmp_path / "amb.wav", x, 48000, "pcm16")
    fmt = chunks(path.read_bytes())[b"fmt "]
    assert struct.unpack("<H", fmt[:2])[0] == 0xFFFE
    assert struct.unpack("<H", fmt[24:26])[0] == 1
    rate, data = wavfile.read(path)
    assert rate == 48000 and data.shape == (1000, 16) and data.dtype == np.int16
    np.testing.assert_array_equal(data.T, quantize_pcm16(x))


def test_float32_roundtrip_is_bitwise(tmp_path):
    x = np.random.default_rng(1).normal(0, 0.3, (3, 777)).astype(np.float32)
    path = write_wav(tmp_path / "f.wav", x, 96000, "float32")
    back = read_wav(path)
    assert back.encoding == "float32" and back.sample_rate == 96000
    assert back.data.astype(np.float32).tobytes() == x.tobytes()
    assert b"fact" in chunks(path.read_bytes())
    rate, data = wavfile.read(path)
    assert data.dtype == np.float32 and data.T.tobytes() == x.tobytes()


def test_pcm16_rounding_half_away_from_zero():
    half = 0.5 / 32767
    assert list(quantize_pcm16([half, -half, 1.5 / 32767, -1.5 / 32767])) == [1, -1, 2, -2]
    assert list(quantize_pcm16([1.0, -1.0, 2.0, -3.0, 0.0])) == [32767, -32767, 32767, -32767, 0]


@given(st.lists(st.floats(-1, 1), min_size=1, max_size=50))
def test_pcm16_roundtrip_error(values):
    x = np.array(values)
    back = decode(encode(x, 44100, "pcm16")).data[0]
    assert np.max(np.abs(back - x)) <= 0.5 / 32767 + 1e-12


def test_odd_payload_is_padded():
    blob = encode(np.zeros((1, 3)), 8000, "pcm16")
    assert len(blob) % 2 == 0
    assert decode(blob).data.shape == (1, 3)


def test_reads_24_bit_pcm():
    frames = np.array([0, 4194304, -8388607], dtype=np.int32)
    raw = b"".join(int(v).to_bytes(3, "little", signed=True) for v in frames)
    fmt = struct.pack("<HHIIHH", 1, 1, 8000, 24000, 3, 24)
    body = b"WAVE" + b"fmt " + struct.pack("<I", 16) + fmt + b"data" + struct.pack("<I", 9) + raw
    data = decode(b"RIFF" + struct.pack("<I", len(body)) + body + b"\x00")
    np.testing.assert_allclose(data.data[0], frames / 8388607.0)


def test_errors(tmp_path):
    with pytest.raises(WavError):
        encode(np.zeros(4), 44100, "mp3")
    with pytest.raises(WavError):
        encode(np.array([np.nan]), 44100)
    with pytest.raises(WavError):
        encode(np.zeros((1, 1, 1)), 44100)
    with pytest.raises(WavError):
        decode(b"RIFX0000WAVE")
    with pytest.raises(WavError):
        read_wav(tmp_path / "none.wav")
