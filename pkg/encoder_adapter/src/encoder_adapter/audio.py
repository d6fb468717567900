"""Audio loading, MFCC descriptors, and energy-based segmentation.

Everything targets 16 kHz mono: files are downmixed and linearly resampled
on load. The MFCC fallback pools 13 coefficients with mean+std (26 dims).
"""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np
from scipy.fft import dct

TARGET_RATE = 16_000
N_MFCC = 13
N_FILTERS = 26
FRAME_SECONDS = 0.025
HOP_SECONDS = 0.010
N_FFT = 512


def load_wav_mono_16k(path: str | Path) -> np.ndarray:
    """PCM WAV -> float32 samples in [-1, 1] at 16 kHz mono."""
    with wave.open(str(path), "rb") as fh:
        rate = fh.getframerate()
        channels = fh.getnchannels()
        width = fh.getsampwidth()
        raw = fh.readframes(fh.getnframes())
    if width == 2:
        samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    elif width == 4:
        samples = np.frombuffer(raw, dtype="<i4").astype(np.float64) / 2147483648.0
    elif width == 1:
        samples = (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    else:
        raise ValueError(f"unsupported sample width {width}")
    if channels > 1:
        samples = samples.reshape(-1, channels).mean(axis=1)
    if rate != TARGET_RATE:
        duration = len(samples) / rate
        target = np.arange(int(round(duration * TARGET_RATE))) / TARGET_RATE
        source = np.arange(len(samples)) / rate
        samples = np.interp(target, source, samples)
    return samples.astype(np.float64)


def _hz_to_mel(hz):
    return 2595.0 * np.log10(1.0 + np.asarray(hz) / 700.0)


def _mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel) / 2595.0) - 1.0)


def _mel_filterbank(n_filters: int, n_fft: int, rate: int) -> np.ndarray:
    mel_points = np.linspace(_hz_to_mel(0.0), _hz_to_mel(rate / 2.0), n_filters + 2)
    bins = np.floor((n_fft + 1) * _mel_to_hz(mel_points) / rate).astype(int)
    bank = np.zeros((n_filters, n_fft // 2 + 1))
    for i in range(1, n_filters + 1):
        left, center, right = bins[i - 1], bins[i], bins[i + 1]
        for k in range(left, center):
            if center > left:
                bank[i - 1, k] = (k - left) / (center - left)
        for k in range(center, right):
            if right > center:
                bank[i - 1, k] = (right - k) / (right - center)
    return bank


def _frame(signal: np.ndarray, rate: int) -> np.ndarray:
    frame_len = int(rate * FRAME_SECONDS)
    hop = int(rate * HOP_SECONDS)
    if len(signal) < frame_len:
        signal = np.pad(signal, (0, frame_len - len(signal)))
    n_frames = 1 + (len(signal) - frame_len) // hop
    idx = np.arange(frame_len)[None, :] + hop * np.arange(n_frames)[:, None]
    return signal[idx] * np.hanning(frame_len)


def mfcc(signal: np.ndarray, rate: int = TARGET_RATE) -> np.ndarray:
    """Frame-level MFCCs, shape (n_frames, 13)."""
    frames = _frame(signal, rate)
    power = np.abs(np.fft.rfft(frames, n=N_FFT, axis=1)) ** 2 / N_FFT
    bank = _mel_filterbank(N_FILTERS, N_FFT, rate)
    energies = np.log(power @ bank.T + 1e-10)
    return dct(energies, type=2, axis=1, norm="ortho")[:, :N_MFCC]


def mfcc_span_descriptor(samples: np.ndarray, start: float, end: float) -> np.ndarray:
    """Mean+std pooled MFCCs over [start, end) seconds; 26 dims."""
    a = max(0, int(start * TARGET_RATE))
    b = min(len(samples), int(end * TARGET_RATE))
    span = samples[a:b]
    if span.size == 0:
        return np.zeros(2 * N_MFCC)
    coeffs = mfcc(span)
    return np.concatenate([coeffs.mean(axis=0), coeffs.std(axis=0)])


def energy_segments(
    samples: np.ndarray,
    rate: int = TARGET_RATE,
    min_duration: float = 0.3,
    max_gap: float = 0.3,
) -> list[tuple[float, float]]:
    """Voiced spans from frame RMS energy; silence yields no segments."""
    frames = _frame(samples, rate)
    rms = np.sqrt((frames ** 2).mean(axis=1))
    if rms.size == 0:
        return []
    threshold = max(1e-4, 0.5 * rms.mean())
    voiced = rms > threshold

    spans: list[tuple[float, float]] = []
    start = None
    for i, flag in enumerate(voiced):
        t = i * HOP_SECONDS
        if flag and start is None:
            start = t
        elif not flag and start is not None:
            spans.append((start, t + FRAME_SECONDS))
            start = None
    if start is not None:
        spans.append((start, len(voiced) * HOP_SECONDS + FRAME_SECONDS))

    merged: list[tuple[float, float]] = []
    for a, b in spans:
        if merged and a - merged[-1][1] <= max_gap:
            merged[-1] = (merged[-1][0], b)
        else:
            merged.append((a, b))
    return [(round(a, 3), round(b, 3)) for a, b in merged if b - a >= min_duration]
