"""Model configuration and forward-pass containers"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional

import numpy as np

from fauforensics.errors import ConfigError
from fauforensics.models.clip import ClipLabel, VideoMode
from fauforensics.tensor import Tensor


class HeadMode(Enum):
    """Label space of the multimodal head"""
    BINARY = "binary"
    FOURCLASS = "fourclass"

    @property
    def num_classes(self) -> int:
        return 2 if self is HeadMode.BINARY else 4


@dataclass
class ModelConfig:
    """Architecture and loss configuration"""
    T: int = 25
    L: int = 512
    head_mode: HeadMode = HeadMode.BINARY
    lambda_av: float = 0.8
    lambda_a: float = 0.1
    lambda_v: float = 0.1
    audio_pool: int = 4
    n_mels: int = 80
    video_mode: VideoMode = VideoMode.FEATURE
    video_dim: int = 32
    fau_dim: int = 12
    frame_size: int = 16
    audio_hidden: int = 256
    video_hidden: int = 128
    fau_hidden: int = 64
    head_hidden: int = 512
    temporal_context: int = 1
    seed: int = 0
    use_fau: bool = True
    use_alignment: bool = True
    use_tap: bool = True
    use_video_encoder: bool = True
    use_audio_encoder: bool = True

    def validate(self) -> None:
        if self.T < 2:
            raise ConfigError(f"T must be >= 2, got {self.T}")
        if self.L < 1:
            raise ConfigError(f"L must be > 0, got {self.L}")
        if min(self.lambda_av, self.lambda_a, self.lambda_v) < 0:
            raise ConfigError("Loss weights must be >= 0")
        if self.audio_pool < 1 or self.n_mels < 1:
            raise ConfigError("audio_pool and n_mels must be >= 1")
        for name in ('video_dim', 'fau_dim', 'frame_size', 'audio_hidden',
                     'video_hidden', 'fau_hidden', 'head_hidden'):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.temporal_context < 0:
            raise ConfigError(f"temporal_context must be >= 0, got {self.temporal_context}")
        if not self.use_video_encoder and not self.use_fau:
            raise ConfigError("Disabling both the video encoder and the FAU encoder leaves no visual stream")

    @property
    def mel_frames(self) -> int:
        return self.T * self.audio_pool

    @property
    def window(self) -> int:
        """Frames seen by one row of the learnable encoders"""
        return 2 * self.temporal_context + 1

    @property
    def audio_frame_dim(self) -> int:
        return self.n_mels * self.audio_pool

    @property
    def video_input_dim(self) -> int:
        if self.video_mode is VideoMode.RAW:
            return self.frame_size * self.frame_size
        return self.video_dim

    @property
    def fau_input_dim(self) -> int:
        if self.video_mode is VideoMode.RAW:
            return self.frame_size * self.frame_size
        return self.fau_dim

    @property
    def variant(self) -> str:
        parts = [name for name, on in (('fau', self.use_fau), ('alignment', self.use_alignment),
                                       ('tap', self.use_tap), ('video', self.use_video_encoder),
                                       ('audio', self.use_audio_encoder)) if not on]
        return 'full' if not parts else 'no-' + '-no-'.join(parts)


@dataclass(eq=False)
class ClipInputs:
    """Model-ready arrays for one clip"""
    mel: np.ndarray
    video: np.ndarray
    fau_source: np.ndarray
    label: int
    audio_label: int
    video_label: int


@dataclass(eq=False)
class ForwardOut:
    """Intermediate and final tensors of one forward pass"""
    Z_a: Tensor
    Z_v: Tensor
    Z_aq: Tensor
    Z_vq: Tensor
    M_av: Optional[Tensor]
    M_a: Optional[Tensor]
    M_v: Optional[Tensor]
    s_av: Tensor
    s_a: Tensor
    s_v: Tensor
    Z_vid: Optional[Tensor] = None
    Z_au: Optional[Tensor] = None


@dataclass(eq=False)
class LossTerms:
    """Weighted total and its three cross-entropy components"""
    total: Tensor
    av: Tensor
    a: Tensor
    v: Tensor

    def values(self) -> Dict[str, float]:
        return {'total': self.total.item(), 'av': self.av.item(), 'a': self.a.item(), 'v': self.v.item()}


@dataclass
class InferenceResult:
    """Prediction from the multimodal head only"""
    probabilities: np.ndarray
    predicted_class: int
    fake_probability: float
    head_mode: HeadMode

    def class_name(self) -> str:
        if self.head_mode is HeadMode.FOURCLASS:
            return ClipLabel(self.predicted_class).name
        return 'fake' if self.predicted_class == 1 else 'real'
