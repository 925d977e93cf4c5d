"""End-to-end gradient check of the full model against central differences"""

import logging
from typing import List, Optional

import numpy as np

from fauforensics.errors import CheckFailure
from fauforensics.models.clip import ClipLabel, GenConfig
from fauforensics.models.network import ClipInputs, ModelConfig
from fauforensics.models.training import GradCheckReport
from fauforensics.services.corpus import clip_seed, generate_clip
from fauforensics.services.network import FauForensicsModel
from fauforensics.tensor import backward, finite_diff_coords

logger = logging.getLogger(__name__)

FULL_CHECK_SIZE = 256
SAMPLED_COORDS = 64
NORM_FLOOR = 1e-8


def small_model_config(T: int = 8, L: int = 16, seed: int = 0, **overrides) -> ModelConfig:
    """Narrow widths so every coordinate check stays cheap"""
    values = dict(T=T, L=L, seed=seed, audio_hidden=16, video_hidden=16, fau_hidden=8, head_hidden=32)
    values.update(overrides)
    return ModelConfig(**values)


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    diff = np.linalg.norm(analytic - numeric)
    return float(diff / max(np.linalg.norm(analytic) + np.linalg.norm(numeric), NORM_FLOOR))


class GradientChecker:
    """Compare autodiff gradients of the total loss with finite differences"""

    def __init__(self, h: float = 1e-5, tolerance: float = 1e-4):
        self.h = h
        self.tolerance = tolerance

    def batch_inputs(self, model: FauForensicsModel, batch: int, seed: int) -> List[ClipInputs]:
        cfg = model.config
        gen = GenConfig(T=cfg.T, mode=cfg.video_mode, video_dim=cfg.video_dim,
                        fau_dim=cfg.fau_dim, frame_size=cfg.frame_size)
        # Alternate real and fully fake clips so both binary classes appear
        labels = [ClipLabel.RARV if i % 2 == 0 else ClipLabel.FAFV for i in range(batch)]
        return [model.prepare(generate_clip(clip_seed(seed, i), label, gen)) for i, label in enumerate(labels)]

    def check(self, T: int = 8, L: int = 16, batch: int = 2, seed: int = 0,
              config: Optional[ModelConfig] = None) -> GradCheckReport:
        """
        Check every learnable tensor of a freshly initialized model

        Tensors with at most 256 entries are checked on every coordinate,
        larger ones on 64 coordinates drawn from a seeded RNG.
        """
        config = config or small_model_config(T=T, L=L, seed=seed)
        model = FauForensicsModel(config)
        inputs = self.batch_inputs(model, batch, seed)
        model.fit_input_scales(inputs)

        model.zero_grad()
        backward(model.batch_loss(inputs).total)
        analytic = {name: p.grad.copy() for name, p in model.params.items()}

        def loss() -> float:
            return model.batch_loss(inputs).total.item()

        rng = np.random.default_rng([seed, 2])
        report = GradCheckReport(T=config.T, L=config.L, batch=batch, seed=seed, h=self.h, tolerance=self.tolerance)
        for name, p in model.params.items():
            if p.size <= FULL_CHECK_SIZE:
                coords = np.arange(p.size)
            else:
                coords = np.sort(rng.choice(p.size, SAMPLED_COORDS, replace=False))
            numeric = finite_diff_coords(loss, p, coords.tolist(), self.h)
            report.errors[name] = relative_error(analytic[name].reshape(-1)[coords], numeric.reshape(-1))
            report.coordinates += len(coords)
            logger.debug(f"{name}: rel_error={report.errors[name]:.3e}")
        model.zero_grad()
        logger.info(f"Gradient check {report.summary()}")
        return report

    def require_pass(self, report: GradCheckReport) -> GradCheckReport:
        if not report.passed:
            raise CheckFailure(f"gradient check failed: max relative error {report.max_error:.3e} "
                               f"on {report.worst} (tolerance {report.tolerance:g})")
        return report
