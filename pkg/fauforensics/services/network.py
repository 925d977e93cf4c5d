"""The FauForensics network

Audio, video and frozen FAU encoders feed a FAU fusion step, a query-shared
cross-attention that aligns both modalities on one learnable query matrix,
a temporal attentional pooler producing three dense T x T matrices, and
three independent classification heads.
"""

import logging
from collections import OrderedDict
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import softmax

from fauforensics.errors import ConfigError, DimensionError, LabelError
from fauforensics.models.clip import AVClip, VideoMode
from fauforensics.models.network import ClipInputs, ForwardOut, HeadMode, InferenceResult, LossTerms, ModelConfig
from fauforensics.services.audio import AudioFrontend
from fauforensics.tensor import (
    Tensor, add, concat, cross_entropy, flatten, linear, matmul, mean_rows, mul_const,
    relu, scale, softmax_rows, stack, transpose,
)

logger = logging.getLogger(__name__)

FAU_ENCODER_SEED = 0xFA0_E2C
AUDIO_PROJECTION_SEED = 0xA0D_10
QUERY_INIT_STD = 1.0
SCALE_FLOOR = 1e-12


def _he(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    return rng.normal(0.0, np.sqrt(2.0 / fan_in), (fan_in, fan_out))


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    return rng.normal(0.0, np.sqrt(1.0 / fan_in), (fan_in, fan_out))


def temporal_window(x: np.ndarray, context: int) -> np.ndarray:
    """
    Row t becomes rows t-context .. t+context side by side

    Edge rows are replicated past both ends of the sequence.
    """
    if context == 0:
        return x
    padded = np.pad(x, ((context, context), (0, 0)), mode='edge')
    windows = np.lib.stride_tricks.sliding_window_view(padded, 2 * context + 1, axis=0)
    return np.ascontiguousarray(windows.transpose(0, 2, 1)).reshape(x.shape[0], -1)


def centered(x: np.ndarray) -> np.ndarray:
    """Subtract each column's mean over time"""
    return x - x.mean(axis=0, keepdims=True)


class FauForensicsModel:
    """Parameters plus the staged forward operations"""

    def __init__(self, config: ModelConfig):
        """
        Build and initialize all parameters from config.seed

        Args:
            config: Architecture configuration; validated here
        """
        config.validate()
        self.config = config
        self.frontend = AudioFrontend(n_mels=config.n_mels)
        self.params: "OrderedDict[str, Tensor]" = OrderedDict()
        self.frozen: "OrderedDict[str, Tensor]" = OrderedDict()
        self._init_params()
        logger.info(f"Built model variant={config.variant} T={config.T} L={config.L} "
                    f"head_mode={config.head_mode.value} ({self.num_learnable()} learnable values)")

    def _param(self, name: str, value: np.ndarray) -> None:
        self.params[name] = Tensor(value, requires_grad=True, name=name)

    def _frozen(self, name: str, value: np.ndarray) -> None:
        self.frozen[name] = Tensor(value, requires_grad=False, name=name)

    def _init_params(self) -> None:
        cfg = self.config
        L = cfg.L
        rng = np.random.default_rng(cfg.seed)

        audio_in = cfg.window * cfg.audio_frame_dim
        if cfg.use_audio_encoder:
            self._param('audio.w1', _he(rng, audio_in, cfg.audio_hidden))
            self._param('audio.b1', np.zeros(cfg.audio_hidden))
            self._param('audio.w2', _glorot(rng, cfg.audio_hidden, L))
            self._param('audio.b2', np.zeros(L))
        else:
            projection_rng = np.random.default_rng(AUDIO_PROJECTION_SEED)
            self._frozen('audio_proj.w', _glorot(projection_rng, audio_in, L))
        self._frozen('norm.audio_scale', np.ones(1))

        if cfg.use_video_encoder:
            self._frozen('norm.video_scale', np.ones(1))
            self._param('video.w1', _he(rng, cfg.window * cfg.video_input_dim, cfg.video_hidden))
            self._param('video.b1', np.zeros(cfg.video_hidden))
            self._param('video.w2', _glorot(rng, cfg.video_hidden, L))
            self._param('video.b2', np.zeros(L))

        if cfg.use_fau:
            # Zero projection: step-0 output equals the no-FAU baseline
            self._param('fusion.w', np.zeros((L, L)))
            self._param('fusion.b', np.zeros(L))
            if not cfg.use_video_encoder:
                self.params['fusion.w'].data[...] = _glorot(rng, L, L)
            frozen_rng = np.random.default_rng(FAU_ENCODER_SEED)
            self._frozen('fau.w1', _he(frozen_rng, cfg.fau_input_dim, cfg.fau_hidden))
            self._frozen('fau.b1', frozen_rng.normal(0.0, 0.1, cfg.fau_hidden))
            self._frozen('fau.w2', _glorot(frozen_rng, cfg.fau_hidden, L))
            self._frozen('fau.b2', np.zeros(L))

        if cfg.use_alignment:
            self._param('qt.query', rng.normal(0.0, QUERY_INIT_STD, (cfg.T, L)))
            for m in ('a', 'v'):
                self._param(f'qt.key_{m}.w', _glorot(rng, L, L))
                self._param(f'qt.value_{m}.w', _glorot(rng, L, L))
                self._param(f'qt.value_{m}.b', np.zeros(L))

        if cfg.use_tap:
            for m in ('av', 'a', 'v'):
                self._param(f'tap.sigma_{m}', np.full(1, 1.0 / np.sqrt(L)))
            head_inputs = {'av': cfg.T * cfg.T, 'a': cfg.T * cfg.T, 'v': cfg.T * cfg.T}
        else:
            head_inputs = {'av': 2 * L, 'a': L, 'v': L}

        head_outputs = {'av': cfg.head_mode.num_classes, 'a': 2, 'v': 2}
        for m in ('av', 'a', 'v'):
            self._param(f'head_{m}.w1', _he(rng, head_inputs[m], cfg.head_hidden))
            self._param(f'head_{m}.b1', np.zeros(cfg.head_hidden))
            self._param(f'head_{m}.w2', _glorot(rng, cfg.head_hidden, head_outputs[m]))
            self._param(f'head_{m}.b2', np.zeros(head_outputs[m]))

    # ------------------------------------------------------------------
    # Parameter access

    def parameters(self) -> List[Tensor]:
        return list(self.params.values())

    def named_tensors(self) -> List[Tuple[str, Tensor, bool]]:
        """(name, tensor, frozen) for every stored tensor, learnable first"""
        return ([(n, t, False) for n, t in self.params.items()]
                + [(n, t, True) for n, t in self.frozen.items()])

    def num_learnable(self) -> int:
        return sum(t.size for t in self.params.values())

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    def head_parameters(self, head: str) -> List[Tensor]:
        return [t for n, t in self.params.items() if n.startswith(f'head_{head}.')]

    def _mlp(self, x: Tensor, prefix: str, store: Dict[str, Tensor]) -> Tensor:
        hidden = relu(linear(x, store[f'{prefix}.w1'], store[f'{prefix}.b1']))
        return linear(hidden, store[f'{prefix}.w2'], store[f'{prefix}.b2'])

    # ------------------------------------------------------------------
    # Inputs

    def prepare(self, clip: AVClip) -> ClipInputs:
        """Compute the log-mel and flatten video/FAU sources for one clip"""
        cfg = self.config
        if clip.T != cfg.T:
            raise ConfigError(f"Clip has T={clip.T}, model expects T={cfg.T}")
        if clip.mode is not cfg.video_mode:
            raise ConfigError(f"Clip is {clip.mode.value}-mode, model expects {cfg.video_mode.value}-mode")
        mel = self.frontend.log_mel(clip.waveform).grid
        if cfg.video_mode is VideoMode.RAW:
            video = clip.video.reshape(cfg.T, -1).astype(np.float64)
            fau_source = video
        else:
            video = clip.video.astype(np.float64)
            fau_source = clip.fau.astype(np.float64)
        return ClipInputs(mel=mel, video=video, fau_source=fau_source, label=self.target_label(clip),
                          audio_label=int(clip.label.audio_fake), video_label=int(clip.label.video_fake))

    def target_label(self, clip: AVClip) -> int:
        if self.config.head_mode is HeadMode.FOURCLASS:
            return int(clip.label)
        return clip.label.binary

    def audio_frames(self, mel: np.ndarray) -> np.ndarray:
        """T x (n_mels * audio_pool): the mel columns of each video frame, band-mean removed"""
        cfg = self.config
        expected = (cfg.n_mels, cfg.mel_frames)
        if mel.shape != expected:
            raise ConfigError(f"Mel spectrogram shape {mel.shape} does not match expected {expected}")
        return centered(mel.T.reshape(cfg.T, cfg.audio_frame_dim))

    def video_frames(self, video: np.ndarray) -> np.ndarray:
        cfg = self.config
        if video.shape != (cfg.T, cfg.video_input_dim):
            raise ConfigError(f"Video input shape {video.shape} does not match ({cfg.T}, {cfg.video_input_dim})")
        return centered(video)

    def fit_input_scales(self, inputs: Sequence[ClipInputs]) -> Tuple[float, Optional[float]]:
        """
        Set the audio and video input scales to the RMS of the centered inputs

        Args:
            inputs: Prepared training clips

        Returns:
            (audio scale, video scale or None without a video encoder)
        """
        if not inputs:
            raise ConfigError("Cannot fit input scales without clips")
        audio = np.stack([self.audio_frames(x.mel) for x in inputs])
        audio_scale = max(float(np.sqrt(np.mean(audio ** 2))), SCALE_FLOOR)
        self.frozen['norm.audio_scale'].data[...] = audio_scale
        video_scale = None
        if self.config.use_video_encoder:
            video = np.stack([self.video_frames(x.video) for x in inputs])
            video_scale = max(float(np.sqrt(np.mean(video ** 2))), SCALE_FLOOR)
            self.frozen['norm.video_scale'].data[...] = video_scale
        logger.info(f"Input scales fitted on {len(inputs)} clips: audio={audio_scale:.6g} video={video_scale}")
        return audio_scale, video_scale

    # ------------------------------------------------------------------
    # Stages

    def encode_audio(self, mel: np.ndarray) -> Tensor:
        """Z_a: per-frame mel groups, scaled and windowed, through the audio MLP"""
        cfg = self.config
        frames = self.audio_frames(mel) / self.frozen['norm.audio_scale'].data[0]
        windows = Tensor(temporal_window(frames, cfg.temporal_context))
        if not cfg.use_audio_encoder:
            return matmul(windows, self.frozen['audio_proj.w'])
        return self._mlp(windows, 'audio', self.params)

    def encode_video(self, video: np.ndarray) -> Tensor:
        """Z_vid: scaled, windowed video frames through the video MLP"""
        frames = self.video_frames(video) / self.frozen['norm.video_scale'].data[0]
        return self._mlp(Tensor(temporal_window(frames, self.config.temporal_context)), 'video', self.params)

    def encode_fau(self, fau_source: np.ndarray) -> Tensor:
        """Z_au: per-frame MLP with frozen weights"""
        cfg = self.config
        if fau_source.shape != (cfg.T, cfg.fau_input_dim):
            raise ConfigError(f"FAU input shape {fau_source.shape} does not match ({cfg.T}, {cfg.fau_input_dim})")
        return self._mlp(Tensor(fau_source), 'fau', self.frozen)

    def fuse(self, Z_vid: Optional[Tensor], Z_au: Tensor) -> Tensor:
        """Z_v = Z_vid + P(Z_au)"""
        projected = linear(Z_au, self.params['fusion.w'], self.params['fusion.b'])
        if Z_vid is None:
            return projected
        if Z_vid.shape != Z_au.shape:
            raise DimensionError(f"fuse shape mismatch: {Z_vid.shape} vs {Z_au.shape}")
        return add(Z_vid, projected)

    def attention(self, Z: Tensor, modality: str) -> Tuple[Tensor, Tensor]:
        """softmax(Q K^T / sqrt(L)) and V for one modality"""
        p = self.params
        # Keys carry no bias: a shared key offset cancels inside the row softmax
        K = matmul(Z, p[f'qt.key_{modality}.w'])
        V = linear(Z, p[f'qt.value_{modality}.w'], p[f'qt.value_{modality}.b'])
        logits = mul_const(matmul(p['qt.query'], transpose(K)), 1.0 / np.sqrt(self.config.L))
        return softmax_rows(logits), V

    def query_shared_transform(self, Z_a: Tensor, Z_v: Tensor) -> Tuple[Tensor, Tensor]:
        """Both modalities attend with the same learnable queries"""
        expected = (self.config.T, self.config.L)
        for name, Z in (('Z_a', Z_a), ('Z_v', Z_v)):
            if Z.shape != expected:
                raise DimensionError(f"{name} has shape {Z.shape}, expected {expected}")
        A_a, V_a = self.attention(Z_a, 'a')
        A_v, V_v = self.attention(Z_v, 'v')
        return matmul(A_a, V_a), matmul(A_v, V_v)

    def pre_normalization(self, Z_aq: Tensor, Z_vq: Tensor) -> Tuple[Tensor, Tensor, Tensor]:
        """sigma-scaled products before row normalization"""
        if Z_aq.shape != Z_vq.shape:
            raise DimensionError(f"pool shape mismatch: {Z_aq.shape} vs {Z_vq.shape}")
        p = self.params
        G_av = scale(matmul(Z_aq, transpose(Z_vq)), p['tap.sigma_av'])
        G_a = scale(matmul(Z_aq, transpose(Z_aq)), p['tap.sigma_a'])
        G_v = scale(matmul(Z_vq, transpose(Z_vq)), p['tap.sigma_v'])
        return G_av, G_a, G_v

    def temporal_attentional_pool(self, Z_aq: Tensor, Z_vq: Tensor) -> Tuple[Tensor, Tensor, Tensor]:
        """Dense T x T matrices M_av, M_a, M_v (row-softmax normalized)"""
        G_av, G_a, G_v = self.pre_normalization(Z_aq, Z_vq)
        return softmax_rows(G_av), softmax_rows(G_a), softmax_rows(G_v)

    def predict(self, M_av: Tensor, M_a: Tensor, M_v: Tensor) -> Tuple[Tensor, Tensor, Tensor]:
        """Three independent heads over the flattened matrices"""
        return (self._mlp(flatten(M_av), 'head_av', self.params),
                self._mlp(flatten(M_a), 'head_a', self.params),
                self._mlp(flatten(M_v), 'head_v', self.params))

    def predict_pooled(self, Z_aq: Tensor, Z_vq: Tensor) -> Tuple[Tensor, Tensor, Tensor]:
        """Heads over temporally mean-pooled latents (variant without the pooler)"""
        pooled_a = mean_rows(Z_aq)
        pooled_v = mean_rows(Z_vq)
        return (self._mlp(concat([pooled_a, pooled_v]), 'head_av', self.params),
                self._mlp(pooled_a, 'head_a', self.params),
                self._mlp(pooled_v, 'head_v', self.params))

    def forward_inputs(self, inputs: ClipInputs) -> ForwardOut:
        cfg = self.config
        Z_a = self.encode_audio(inputs.mel)
        Z_vid = self.encode_video(inputs.video) if cfg.use_video_encoder else None
        Z_au = None
        if cfg.use_fau:
            Z_au = self.encode_fau(inputs.fau_source)
            Z_v = self.fuse(Z_vid, Z_au)
        else:
            Z_v = Z_vid
        if cfg.use_alignment:
            Z_aq, Z_vq = self.query_shared_transform(Z_a, Z_v)
        else:
            Z_aq, Z_vq = Z_a, Z_v
        if cfg.use_tap:
            M_av, M_a, M_v = self.temporal_attentional_pool(Z_aq, Z_vq)
            s_av, s_a, s_v = self.predict(M_av, M_a, M_v)
        else:
            M_av = M_a = M_v = None
            s_av, s_a, s_v = self.predict_pooled(Z_aq, Z_vq)
        return ForwardOut(Z_a=Z_a, Z_v=Z_v, Z_aq=Z_aq, Z_vq=Z_vq, M_av=M_av, M_a=M_a, M_v=M_v,
                          s_av=s_av, s_a=s_a, s_v=s_v, Z_vid=Z_vid, Z_au=Z_au)

    def forward(self, clip: AVClip) -> ForwardOut:
        return self.forward_inputs(self.prepare(clip))

    # ------------------------------------------------------------------
    # Loss and inference

    def total_loss(self, s_av: Tensor, s_a: Tensor, s_v: Tensor,
                   y_av: Sequence[int], y_a: Sequence[int], y_v: Sequence[int]) -> LossTerms:
        """lambda_av CE(s_av) + lambda_a CE(s_a) + lambda_v CE(s_v) over batch logits"""
        cfg = self.config
        num_classes = cfg.head_mode.num_classes
        if any(not 0 <= y < num_classes for y in y_av):
            raise LabelError(f"Multimodal labels must lie in [0, {num_classes})")
        L_av = cross_entropy(s_av, y_av)
        L_a = cross_entropy(s_a, y_a)
        L_v = cross_entropy(s_v, y_v)
        total = add(add(mul_const(L_av, cfg.lambda_av), mul_const(L_a, cfg.lambda_a)),
                    mul_const(L_v, cfg.lambda_v))
        return LossTerms(total=total, av=L_av, a=L_a, v=L_v)

    def batch_loss(self, batch: Iterable[ClipInputs]) -> LossTerms:
        """Forward every clip and combine batch-mean losses"""
        batch = list(batch)
        outs = [self.forward_inputs(inputs) for inputs in batch]
        return self.total_loss(
            stack([o.s_av for o in outs]), stack([o.s_a for o in outs]), stack([o.s_v for o in outs]),
            [b.label for b in batch], [b.audio_label for b in batch], [b.video_label for b in batch],
        )

    def probabilities(self, inputs: ClipInputs) -> np.ndarray:
        return softmax(self.forward_inputs(inputs).s_av.data)

    def infer_inputs(self, inputs: ClipInputs) -> InferenceResult:
        """Only s_av decides the output"""
        probs = self.probabilities(inputs)
        predicted = int(np.argmax(probs))
        fake = float(1.0 - probs[0])
        return InferenceResult(probabilities=probs, predicted_class=predicted,
                               fake_probability=fake, head_mode=self.config.head_mode)

    def infer(self, clip: AVClip) -> InferenceResult:
        return self.infer_inputs(self.prepare(clip))
