"""Clip, label and corpus-generation models"""

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Dict, List

import numpy as np

from fauforensics.errors import ConfigError, InputError

SAMPLE_RATE = 16000


class ClipLabel(IntEnum):
    """Audio/video authenticity combination"""
    RARV = 0
    FARV = 1
    RAFV = 2
    FAFV = 3

    @property
    def audio_fake(self) -> bool:
        return self in (ClipLabel.FARV, ClipLabel.FAFV)

    @property
    def video_fake(self) -> bool:
        return self in (ClipLabel.RAFV, ClipLabel.FAFV)

    @property
    def is_real(self) -> bool:
        return self is ClipLabel.RARV

    @property
    def binary(self) -> int:
        """0 = real, 1 = fake"""
        return 0 if self.is_real else 1


class VideoMode(Enum):
    """How the video stream is stored"""
    RAW = "raw"
    FEATURE = "feature"

    @property
    def code(self) -> int:
        return 0 if self is VideoMode.RAW else 1

    @classmethod
    def from_code(cls, code: int) -> 'VideoMode':
        if code == 0:
            return cls.RAW
        if code == 1:
            return cls.FEATURE
        raise ValueError(f"Unknown video mode code {code}")


@dataclass(eq=False)
class Waveform:
    """Mono audio samples in [-1, 1]"""
    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float32)
        if self.sample_rate <= 0:
            raise InputError(f"sample_rate must be positive, got {self.sample_rate}")

    @property
    def duration(self) -> float:
        return self.samples.shape[0] / self.sample_rate

    def equals(self, other: 'Waveform') -> bool:
        return (self.sample_rate == other.sample_rate
                and self.samples.dtype == other.samples.dtype
                and np.array_equal(self.samples, other.samples))


@dataclass(eq=False)
class AVClip:
    """
    One labeled audio-visual sample

    video is T x 1 x H x W pixels in raw mode or T x Dv features in feature
    mode; fau is T x Dau activations in [0, 1].
    """
    label: ClipLabel
    seed: int
    video: np.ndarray
    fau: np.ndarray
    waveform: Waveform

    @property
    def mode(self) -> VideoMode:
        return VideoMode.RAW if self.video.ndim == 4 else VideoMode.FEATURE

    @property
    def T(self) -> int:
        return int(self.video.shape[0])

    def equals(self, other: 'AVClip') -> bool:
        """Bit-exact equality of every field"""
        return (self.label == other.label
                and self.seed == other.seed
                and self.video.dtype == other.video.dtype
                and np.array_equal(self.video, other.video)
                and self.fau.dtype == other.fau.dtype
                and np.array_equal(self.fau, other.fau)
                and self.waveform.equals(other.waveform))

    def replace_video(self, video: np.ndarray) -> 'AVClip':
        return AVClip(self.label, self.seed, video, self.fau, self.waveform)


@dataclass
class GenConfig:
    """Parameters of the synthetic clip generator"""
    T: int = 25
    fps: int = 25
    rho_real: float = 0.95
    rho_fake: float = 0.6
    coupling_noise: float = 0.05
    mode: VideoMode = VideoMode.FEATURE
    video_dim: int = 32
    fau_dim: int = 12
    frame_size: int = 16

    def validate(self) -> None:
        if self.T < 2:
            raise ConfigError(f"T must be >= 2, got {self.T}")
        if self.fps <= 0:
            raise ConfigError(f"fps must be positive, got {self.fps}")
        if not 0.0 < self.rho_fake < self.rho_real < 1.0:
            raise ConfigError(
                f"Need 0 < rho_fake < rho_real < 1, got rho_fake={self.rho_fake}, rho_real={self.rho_real}"
            )
        if self.coupling_noise < 0:
            raise ConfigError(f"coupling_noise must be >= 0, got {self.coupling_noise}")
        if self.video_dim < 1 or self.fau_dim < 1 or self.frame_size < 4:
            raise ConfigError("video_dim, fau_dim must be >= 1 and frame_size >= 4")

    @property
    def num_samples(self) -> int:
        """Waveform length: T frames at fps"""
        return int(round(self.T * SAMPLE_RATE / self.fps))


@dataclass
class Corpus:
    """A set of clips sharing mode and frame count"""
    mode: VideoMode
    T: int
    clips: List[AVClip] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.clips)

    def label_histogram(self) -> Dict[ClipLabel, int]:
        histogram = {label: 0 for label in ClipLabel}
        for clip in self.clips:
            histogram[clip.label] += 1
        return histogram
