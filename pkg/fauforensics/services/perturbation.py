"""Video post-processing perturbations for robustness evaluation"""

import logging
from typing import Union

import numpy as np
from scipy import ndimage

from fauforensics.errors import UsageError
from fauforensics.models.clip import AVClip, Corpus, VideoMode
from fauforensics.models.evaluation import LEVELS, PERTURB_LADDERS, PerturbKind

logger = logging.getLogger(__name__)

QUANT_BLOCK = 4
MID_GRAY = 0.5

_KIND_CODES = {kind: i for i, kind in enumerate(PerturbKind)}


def severity(kind: PerturbKind, level: int) -> float:
    """Ladder value for level 1..4"""
    return PERTURB_LADDERS[kind][level - 1]


def gaussian_noise(video: np.ndarray, std: float, rng: np.random.Generator) -> np.ndarray:
    return video + std * rng.standard_normal(video.shape)


def gaussian_blur(video: np.ndarray, sigma: float) -> np.ndarray:
    """Per-frame blur; the symmetric boundary keeps each frame's mean"""
    return ndimage.gaussian_filter(video, sigma=(0, 0, sigma, sigma), mode='reflect')


def contrast(video: np.ndarray, factor: float) -> np.ndarray:
    mean = video.mean(axis=(1, 2, 3), keepdims=True)
    return mean + factor * (video - mean)


def saturation(video: np.ndarray, factor: float) -> np.ndarray:
    """Pull single-channel intensities toward mid-gray"""
    return MID_GRAY + factor * (video - MID_GRAY)


def _block_labels(shape) -> np.ndarray:
    T, C, H, W = shape
    t, c, y, x = np.indices(shape)
    blocks_y = -(-H // QUANT_BLOCK)
    blocks_x = -(-W // QUANT_BLOCK)
    return ((t * C + c) * blocks_y + y // QUANT_BLOCK) * blocks_x + x // QUANT_BLOCK


def block_quantization(video: np.ndarray, step: float) -> np.ndarray:
    """Quantize 4 x 4 block means and the residuals around them to multiples of step"""
    labels = _block_labels(video.shape)
    index = np.arange(labels.max() + 1)
    means = np.asarray(ndimage.mean(video, labels=labels, index=index))[labels]
    return np.round(means / step) * step + np.round((video - means) / step) * step


def temporal_drop(video: np.ndarray, period: int) -> np.ndarray:
    """Every period-th frame is dropped and the previous frame held"""
    out = video.copy()
    for t in range(period - 1, video.shape[0], period):
        out[t] = out[t - 1]
    return out


class PerturbationService:
    """Apply perturbation ladders to raw-mode clips"""

    def perturb(self, clip: AVClip, kind: Union[PerturbKind, str], level: int) -> AVClip:
        """
        Perturb the video stream of one raw-mode clip

        Args:
            clip: Raw-mode clip; audio and FAU streams are left untouched
            kind: Perturbation kind
            level: Intensity 0..4; level 0 returns the clip unchanged

        Returns:
            New clip with the perturbed video
        """
        kind = PerturbKind(kind)
        if level not in LEVELS:
            raise UsageError(f"Perturbation level must be one of {LEVELS}, got {level}")
        if clip.mode is not VideoMode.RAW:
            raise UsageError("Perturbations need raw-mode clips (pixels)")
        if level == 0:
            return clip

        value = severity(kind, level)
        video = np.asarray(clip.video, dtype=np.float64)
        if kind is PerturbKind.GAUSSIAN_NOISE:
            rng = np.random.default_rng([clip.seed, _KIND_CODES[kind], level])
            out = gaussian_noise(video, value, rng)
        elif kind is PerturbKind.GAUSSIAN_BLUR:
            out = gaussian_blur(video, value)
        elif kind is PerturbKind.CONTRAST:
            out = contrast(video, value)
        elif kind is PerturbKind.SATURATION:
            out = saturation(video, value)
        elif kind is PerturbKind.BLOCK_QUANTIZATION:
            out = block_quantization(video, value)
        else:
            out = temporal_drop(video, int(value))
        return clip.replace_video(out.astype(clip.video.dtype, copy=False))

    def perturb_corpus(self, corpus: Corpus, kind: Union[PerturbKind, str], level: int) -> Corpus:
        clips = [self.perturb(clip, kind, level) for clip in corpus.clips]
        logger.debug(f"Perturbed {len(clips)} clips with {PerturbKind(kind).value} level {level}")
        return Corpus(mode=corpus.mode, T=corpus.T, clips=clips)
