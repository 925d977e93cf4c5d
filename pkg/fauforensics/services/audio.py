"""Log-mel front end: waveform -> 80 x F spectrogram"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Tuple

import librosa
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.io import wavfile
from scipy.signal import get_window

from fauforensics.errors import InputError
from fauforensics.models.clip import Waveform

logger = logging.getLogger(__name__)

LOG_FLOOR = 1e-10
LOG_FLOOR_DB = -10.0


@dataclass(eq=False)
class MelSpectrogram:
    """Log10 mel power, n_mels x F"""
    grid: np.ndarray
    hop: float = 0.010
    window: float = 0.025

    @property
    def mel_filter_count(self) -> int:
        return int(self.grid.shape[0])

    @property
    def frames(self) -> int:
        return int(self.grid.shape[1])


def mel_band_edges(sr: int = 16000, n_mels: int = 80) -> np.ndarray:
    """n_mels + 2 frequencies (Hz) on the HTK scale: filter i spans edges[i]..edges[i+2], peaks at edges[i+1]"""
    return librosa.mel_frequencies(n_mels=n_mels + 2, fmin=0.0, fmax=sr / 2.0, htk=True)


@lru_cache(maxsize=8)
def _filterbank(nfft: int, sr: int, n_mels: int) -> np.ndarray:
    bank = librosa.filters.mel(sr=sr, n_fft=nfft, n_mels=n_mels, fmin=0.0, fmax=sr / 2.0,
                               htk=True, norm=None, dtype=np.float64)
    peaks = bank.max(axis=1, keepdims=True)
    bank = np.divide(bank, peaks, out=np.zeros_like(bank), where=peaks > 0)
    bank.setflags(write=False)
    return bank


def mel_filterbank(nfft: int = 512, sr: int = 16000, n_mels: int = 80) -> np.ndarray:
    """Peak-normalized triangular HTK filters, n_mels x (nfft/2 + 1)"""
    if n_mels < 1:
        raise InputError(f"n_mels must be >= 1, got {n_mels}")
    return _filterbank(nfft, sr, n_mels).copy()


class AudioFrontend:
    """Short-time Fourier transform and log-mel projection"""

    def __init__(self, sample_rate: int = 16000, window_s: float = 0.025, hop_s: float = 0.010,
                 nfft: int = 512, n_mels: int = 80):
        """
        Initialize the front end

        Args:
            sample_rate: Expected waveform rate in Hz (no resampling is done)
            window_s: Hann window length in seconds
            hop_s: Hop length in seconds
            nfft: FFT size; the window is zero-padded to it
            n_mels: Number of mel filters
        """
        self.sample_rate = sample_rate
        self.window_s = window_s
        self.hop_s = hop_s
        self.win_length = int(round(sample_rate * window_s))
        self.hop_length = int(round(sample_rate * hop_s))
        self.nfft = nfft
        self.n_mels = n_mels
        if self.win_length > nfft:
            raise InputError(f"Window of {self.win_length} samples does not fit nfft={nfft}")
        self.window = get_window('hann', self.win_length, fftbins=True)

    def stft(self, waveform: Waveform) -> np.ndarray:
        """Power spectrogram, F x (nfft/2 + 1)"""
        if waveform.sample_rate != self.sample_rate:
            raise InputError(f"Expected {self.sample_rate} Hz audio, got {waveform.sample_rate} Hz")
        samples = np.asarray(waveform.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise InputError(f"Expected mono samples, got shape {samples.shape}")
        if samples.size < self.win_length:
            raise InputError(f"Waveform of {samples.size} samples is shorter than one {self.win_length}-sample window")

        pad = self.win_length // 2
        padded = np.pad(samples, pad, mode='reflect')
        n_frames = samples.size // self.hop_length
        frames = sliding_window_view(padded, self.win_length)[::self.hop_length][:n_frames]
        spectrum = np.fft.rfft(frames * self.window, n=self.nfft, axis=1)
        return spectrum.real ** 2 + spectrum.imag ** 2

    def filterbank(self) -> np.ndarray:
        return _filterbank(self.nfft, self.sample_rate, self.n_mels)

    def log_mel(self, waveform: Waveform) -> MelSpectrogram:
        """log10 of mel power floored at 1e-10; n_mels x F"""
        power = self.stft(waveform)
        mel = self.filterbank() @ power.T
        grid = np.full(mel.shape, LOG_FLOOR_DB)
        above = mel > LOG_FLOOR
        grid[above] = np.maximum(np.log10(mel[above]), LOG_FLOOR_DB)
        return MelSpectrogram(grid=grid, hop=self.hop_s, window=self.window_s)

    def band_edges(self) -> np.ndarray:
        return mel_band_edges(self.sample_rate, self.n_mels)

    def band_of(self, hz: float) -> Tuple[int, ...]:
        """Indices of the filters whose open band contains hz"""
        edges = self.band_edges()
        return tuple(i for i in range(self.n_mels) if edges[i] < hz < edges[i + 2])


def read_wav(path: Path) -> Waveform:
    """Read a mono 16-bit PCM WAV file"""
    try:
        rate, data = wavfile.read(str(path))
    except (OSError, ValueError) as e:
        logger.error(f"Error reading WAV {path}: {str(e)}")
        raise InputError(f"Cannot read WAV file {path}: {e}")
    if data.dtype != np.int16:
        raise InputError(f"Expected 16-bit PCM, got {data.dtype}")
    if data.ndim != 1:
        raise InputError(f"Expected mono audio, got {data.shape[1]} channels")
    logger.info(f"Read {data.size} samples at {rate} Hz from {path}")
    return Waveform(samples=data.astype(np.float32) / 32768.0, sample_rate=int(rate))
