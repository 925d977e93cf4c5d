"""Synthetic audio-visual corpus: seeded generation and FFC1 file I/O"""

import logging
import struct
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache, partial
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
from scipy.special import expit

from fauforensics.errors import ConfigError, FormatError
from fauforensics.models.clip import SAMPLE_RATE, AVClip, ClipLabel, Corpus, GenConfig, VideoMode, Waveform
from fauforensics.serialization import ByteReader, encode_tensor

logger = logging.getLogger(__name__)

CORPUS_MAGIC = b'FFC1'
CORPUS_VERSION = 1
LOADING_SEED = 0x5EED_FA0
BLOCK = SAMPLE_RATE // 100  # 10 ms

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One step of the SplitMix64 mixer"""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def clip_seed(corpus_seed: int, index: int) -> int:
    """Per-sample seed so generation parallelizes deterministically"""
    return splitmix64(splitmix64(corpus_seed & _MASK64) ^ (index & _MASK64))


def ar1(rng: np.random.Generator, T: int, rho: float) -> np.ndarray:
    """Stationary unit-variance AR(1) path"""
    shocks = rng.standard_normal(T)
    d = np.empty(T)
    d[0] = shocks[0]
    innovation = np.sqrt(1.0 - rho * rho)
    for t in range(1, T):
        d[t] = rho * d[t - 1] + innovation * shocks[t]
    return d


@lru_cache(maxsize=16)
def loadings(video_dim: int, fau_dim: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Corpus-wide fixed loadings: video direction u, FAU gains alpha and offsets beta"""
    rng = np.random.default_rng(LOADING_SEED)
    u = rng.standard_normal(video_dim)
    u /= np.linalg.norm(u)
    magnitude = rng.uniform(0.75, 2.0, fau_dim)
    sign = np.where(np.arange(fau_dim) % 2 == 0, 1.0, -1.0)
    alpha = magnitude * sign
    beta = rng.normal(0.0, 0.5, fau_dim)
    for arr in (u, alpha, beta):
        arr.setflags(write=False)
    return u, alpha, beta


def render_frames(driver: np.ndarray, noise: np.ndarray, size: int, coupling_noise: float) -> np.ndarray:
    """
    Single-channel face frames, T x 1 x size x size

    A static face blob plus a mouth blob whose vertical aperture tracks the driver.
    """
    coords = np.arange(size, dtype=np.float64)
    y, x = np.meshgrid(coords, coords, indexing='ij')
    centre = (size - 1) / 2.0
    face = 0.5 * np.exp(-((x - centre) ** 2 + (y - centre) ** 2) / (2.0 * (size / 4.0) ** 2))
    mouth_y = 0.72 * (size - 1)
    sx = 0.15 * size
    frames = np.empty((driver.size, 1, size, size))
    for t, d in enumerate(driver):
        sy = size * (0.04 + 0.05 * (1.0 + np.tanh(d)))
        mouth = 0.45 * np.exp(-((x - centre) ** 2 / (2 * sx * sx) + (y - mouth_y) ** 2 / (2 * sy * sy)))
        frames[t, 0] = face + mouth + 0.5 * coupling_noise * noise[t]
    return np.clip(frames, 0.0, 1.0)


def generate_clip(seed: int, label: ClipLabel, cfg: GenConfig) -> AVClip:
    """
    Generate one clip; identical (seed, label, cfg) give bit-identical clips

    Real streams follow a shared smooth driver. A fake modality follows its
    own, less smooth driver, breaking both cross-modal coupling and temporal
    consistency.
    """
    label = ClipLabel(label)
    T = cfg.T
    rng = np.random.default_rng(seed)

    # Three drivers drawn in fixed order so the stream does not depend on label
    shared = ar1(rng, T, cfg.rho_real)
    fake_audio = ar1(rng, T, cfg.rho_fake)
    fake_video = ar1(rng, T, cfg.rho_fake)
    audio_driver = fake_audio if label.audio_fake else shared
    video_driver = fake_video if label.video_fake else shared

    u, alpha, beta = loadings(cfg.video_dim, cfg.fau_dim)
    noise = cfg.coupling_noise

    gain = rng.uniform(0.8, 1.2)
    offset = rng.normal(0.0, 0.1, cfg.video_dim)
    video_noise = rng.standard_normal((T, cfg.video_dim))
    fau_noise = rng.standard_normal((T, cfg.fau_dim))
    pixel_noise = rng.standard_normal((T, cfg.frame_size, cfg.frame_size))

    if cfg.mode is VideoMode.FEATURE:
        video = gain * video_driver[:, None] * u[None, :] + offset[None, :] + noise * video_noise
    else:
        video = render_frames(video_driver, pixel_noise, cfg.frame_size, noise)
    fau = expit(alpha[None, :] * video_driver[:, None] + beta[None, :] + noise * fau_noise)

    n = cfg.num_samples
    f0 = rng.uniform(100.0, 220.0)
    phases = rng.uniform(0.0, 2.0 * np.pi, 4)
    audio_noise = rng.standard_normal(n)
    t = np.arange(n) / SAMPLE_RATE
    carrier = sum(np.sin(2.0 * np.pi * h * f0 * t + phases[h - 1]) / h for h in range(1, 5))
    carrier /= np.sqrt(np.mean(carrier ** 2))
    amplitude = 0.2 * (1.0 + 0.6 * np.tanh(audio_driver))
    envelope = np.repeat(amplitude, int(np.ceil(n / T)))[:n]
    samples = np.clip(envelope * carrier + 0.1 * noise * audio_noise, -1.0, 1.0).astype(np.float32)

    return AVClip(label=label, seed=int(seed), video=video, fau=fau,
                  waveform=Waveform(samples=samples, sample_rate=SAMPLE_RATE))


def _generate_indexed(corpus_seed: int, cfg: GenConfig, index: int) -> AVClip:
    return generate_clip(clip_seed(corpus_seed, index), ClipLabel(index % 4), cfg)


def audio_envelope(waveform: Waveform, T: int) -> np.ndarray:
    """10 ms block RMS averaged per video frame, length T"""
    samples = np.asarray(waveform.samples, dtype=np.float64)
    n_blocks = samples.size // BLOCK
    rms = np.sqrt(np.mean(samples[:n_blocks * BLOCK].reshape(n_blocks, BLOCK) ** 2, axis=1))
    per_frame = n_blocks // T
    return rms[:per_frame * T].reshape(T, per_frame).mean(axis=1)


def principal_channel(video: np.ndarray) -> np.ndarray:
    """Projection of feature-mode video on its first principal axis, sign aligned with the loading"""
    centred = video - video.mean(axis=0, keepdims=True)
    _, _, vt = np.linalg.svd(centred, full_matrices=False)
    axis = vt[0]
    u, _, _ = loadings(video.shape[1], 1)
    if np.dot(axis, u) < 0:
        axis = -axis
    return centred @ axis


def coupling_correlation(clip: AVClip) -> float:
    """Pearson correlation between the video principal channel and the audio envelope"""
    if clip.mode is not VideoMode.FEATURE:
        raise ConfigError("coupling_correlation needs a feature-mode clip")
    return float(np.corrcoef(principal_channel(clip.video), audio_envelope(clip.waveform, clip.T))[0, 1])


class CorpusService:
    """Generate, persist and load clip corpora"""

    def __init__(self, workers: int = 1):
        """
        Initialize corpus service

        Args:
            workers: Process count for generation; results never depend on it
        """
        self.workers = max(1, int(workers))

    def generate(self, count: int, corpus_seed: int, cfg: Optional[GenConfig] = None) -> Corpus:
        """Generate count clips with labels cycling RARV, FARV, RAFV, FAFV"""
        cfg = cfg or GenConfig()
        cfg.validate()
        if count < 0:
            raise ConfigError(f"count must be >= 0, got {count}")
        job = partial(_generate_indexed, corpus_seed, cfg)
        if self.workers > 1 and count > 1:
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                clips = list(pool.map(job, range(count), chunksize=max(1, count // (4 * self.workers))))
        else:
            clips = [job(i) for i in range(count)]
        logger.info(f"Generated {count} {cfg.mode.value} clips (T={cfg.T}, seed={corpus_seed})")
        return Corpus(mode=cfg.mode, T=cfg.T, clips=clips)

    def write_corpus(self, corpus: Corpus, path: Path) -> Path:
        """Write an FFC1 file plus its manifest sidecar"""
        path = Path(path)
        try:
            chunks = [CORPUS_MAGIC, struct.pack('<HBIQ', CORPUS_VERSION, corpus.mode.code, corpus.T, len(corpus))]
            for clip in corpus.clips:
                if clip.mode is not corpus.mode or clip.T != corpus.T:
                    raise FormatError(f"Clip seed={clip.seed} does not match corpus mode/T")
                chunks.append(struct.pack('<BQ', int(clip.label), clip.seed))
                chunks.append(encode_tensor(clip.video))
                chunks.append(encode_tensor(clip.fau))
                chunks.append(encode_tensor(clip.waveform.samples))
            path.write_bytes(b''.join(chunks))
            self.manifest_path(path).write_text(self.manifest_text(corpus), encoding='utf-8')
            logger.info(f"Wrote {len(corpus)} clips to {path}")
            return path
        except OSError as e:
            logger.error(f"Error writing corpus {path}: {str(e)}")
            raise

    def read_corpus(self, path: Path) -> Corpus:
        """Read an FFC1 file; corrupt or truncated input raises FormatError with the byte offset"""
        path = Path(path)
        try:
            data = path.read_bytes()
        except OSError as e:
            logger.error(f"Error reading corpus {path}: {str(e)}")
            raise FormatError(f"Cannot read corpus {path}: {e}")

        reader = ByteReader(data)
        reader.expect_magic(CORPUS_MAGIC, 'corpus')
        version_offset = reader.offset
        version, mode_code, T, count = reader.unpack('<HBIQ', 'corpus header')
        if version != CORPUS_VERSION:
            raise FormatError(f"Unsupported corpus version {version}", version_offset)
        try:
            mode = VideoMode.from_code(mode_code)
        except ValueError as e:
            raise FormatError(str(e), version_offset + 2)

        clips: List[AVClip] = []
        for index in range(count):
            record_offset = reader.offset
            label_code, seed = reader.unpack('<BQ', f'record {index} header')
            if label_code > 3:
                raise FormatError(f"Record {index} has invalid label {label_code}", record_offset)
            video = reader.read_tensor(f'record {index} video')
            fau = reader.read_tensor(f'record {index} fau')
            samples = reader.read_tensor(f'record {index} waveform')
            clip = AVClip(label=ClipLabel(label_code), seed=seed, video=video, fau=fau,
                          waveform=Waveform(samples=samples))
            if clip.mode is not mode or clip.T != T or fau.shape[0] != T:
                raise FormatError(f"Record {index} does not match corpus mode={mode.value} T={T}", record_offset)
            clips.append(clip)
        if reader.remaining:
            raise FormatError(f"{reader.remaining} trailing bytes after {count} records", reader.offset)

        logger.info(f"Read {count} clips from {path}")
        return Corpus(mode=mode, T=T, clips=clips)

    def import_features(self, path: Path, expected_T: Optional[int] = None) -> Iterator[AVClip]:
        """Feature-mode clips from a corpus file, e.g. externally precomputed features"""
        corpus = self.read_corpus(path)
        if corpus.mode is not VideoMode.FEATURE:
            raise FormatError(f"Expected a feature-mode corpus, {path} is {corpus.mode.value}-mode")
        if expected_T is not None and corpus.T != expected_T:
            raise ConfigError(f"Corpus T={corpus.T} does not match model T={expected_T}")
        return iter(corpus.clips)

    @staticmethod
    def manifest_path(path: Path) -> Path:
        return Path(str(path) + '.manifest')

    @staticmethod
    def manifest_text(corpus: Corpus) -> str:
        lines = [f"count={len(corpus)}", f"mode={corpus.mode.value}", f"T={corpus.T}", f"version={CORPUS_VERSION}"]
        lines += [f"label.{label.name}={n}" for label, n in corpus.label_histogram().items()]
        return '\n'.join(lines) + '\n'

    def split(self, corpus: Corpus, count: int) -> Tuple[Corpus, Corpus]:
        """First count clips and the rest"""
        return (Corpus(corpus.mode, corpus.T, corpus.clips[:count]),
                Corpus(corpus.mode, corpus.T, corpus.clips[count:]))

    def label_histogram(self, corpus: Corpus) -> Dict[str, int]:
        return {label.name: n for label, n in corpus.label_histogram().items()}
