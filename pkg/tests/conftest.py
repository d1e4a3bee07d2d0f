"""Shared fixtures; the WAV writer here is the stdlib-based test oracle."""

import wave

import numpy as np
import pytest


def write_wav(path, samples, rate=44100, channels=1):
    """Write int16 samples with the stdlib wave module (oracle-side writer).

    For multi-channel output, samples must already be interleaved.
    """
    samples = np.asarray(samples, dtype=np.int16)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(channels)
        wf.setsampwidth(2)
        wf.setframerate(rate)
        wf.writeframes(samples.tobytes())
    return path


def sine_int16(freq_hz, amplitude, seconds, rate=44100):
    """Sine as int16 samples; amplitude 1.0 means full scale (32767)."""
    t = np.arange(int(round(seconds * rate))) / rate
    return np.round(amplitude * 32767.0 * np.sin(2 * np.pi * freq_hz * t)
                    ).astype(np.int16)


@pytest.fixture
def wav_file(tmp_path):
    """Factory writing a WAV into tmp_path and returning its path."""
    def _make(samples, rate=44100, channels=1, name="in.wav"):
        return write_wav(tmp_path / name, samples, rate, channels)
    return _make
