"""Training loop: poly schedule, decoupled-weight-decay adaptive moments, checkpoints"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from fauforensics.config import to_key_value_text
from fauforensics.errors import ConfigError, NumericDomainError, TrainingError, UsageError
from fauforensics.models.clip import Corpus
from fauforensics.models.manifest import RunManifest
from fauforensics.models.network import ClipInputs, LossTerms, ModelConfig
from fauforensics.models.training import OPTIMIZER_NOTE, EpochSummary, OptimState, StepRecord, TrainConfig, TrainResult
from fauforensics.services.checkpoint import CheckpointService
from fauforensics.services.network import FauForensicsModel
from fauforensics.tensor import Tensor, backward

logger = logging.getLogger(__name__)

INIT_CHECKPOINT = 'checkpoint_init.ffm'
FINAL_CHECKPOINT = 'checkpoint_final.ffm'
BEST_CHECKPOINT = 'checkpoint_best.ffm'
LOSS_LOG = 'loss.log'
RUN_MANIFEST = 'run-manifest.txt'


def poly_lr(step: int, total_steps: int, cfg: TrainConfig) -> float:
    """lr0 * (1 - step/total_steps) ** poly_power"""
    if total_steps <= 0:
        raise ConfigError(f"total_steps must be > 0, got {total_steps}")
    if not 0 <= step <= total_steps:
        raise UsageError(f"step {step} outside [0, {total_steps}]")
    return cfg.lr0 * (1.0 - step / total_steps) ** cfg.poly_power


def optimizer_step(params: Sequence[Tensor], state: OptimState, lr: float, cfg: TrainConfig) -> None:
    """
    One bias-corrected adaptive-moment update with decoupled weight decay

    Gradients are read from each parameter's grad buffer and cleared
    afterwards. Tensors outside params (the frozen set) are never touched.
    """
    for i, p in enumerate(params):
        if p.grad is None:
            raise TrainingError(f"Missing gradient for learnable parameter {p.name or i}")
    if not state.m:
        state.m = [np.zeros_like(p.data) for p in params]
        state.v = [np.zeros_like(p.data) for p in params]
    if len(state.m) != len(params):
        raise TrainingError(f"Optimizer state holds {len(state.m)} buffers for {len(params)} parameters")

    state.step += 1
    correction1 = 1.0 - cfg.beta1 ** state.step
    correction2 = 1.0 - cfg.beta2 ** state.step
    for p, m, v in zip(params, state.m, state.v):
        if m.shape != p.shape:
            raise TrainingError(f"Moment buffer shape {m.shape} does not match parameter {p.name} {p.shape}")
        g = p.grad
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * g
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * g * g
        update = (m / correction1) / (np.sqrt(v / correction2) + cfg.eps)
        if cfg.weight_decay:
            p.data -= lr * cfg.weight_decay * p.data
        p.data -= lr * update
        p.grad = None


def validation_split(n: int, cfg: TrainConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Seeded (train, validation) index arrays"""
    perm = np.random.default_rng(cfg.seed).permutation(n)
    n_val = 0
    if n >= 2 and cfg.val_fraction > 0:
        n_val = min(n - 1, max(1, math.ceil(cfg.val_fraction * n)))
    return perm[n_val:], perm[:n_val]


class Trainer:
    """Deterministic single-worker optimization of one model"""

    def __init__(self, model_config: ModelConfig, train_config: TrainConfig,
                 workers: int = 1, checkpoints: Optional[CheckpointService] = None):
        """
        Initialize trainer

        Args:
            model_config: Architecture of the model to train
            train_config: Optimization schedule
            workers: Threads used to precompute clip inputs (no effect on results)
            checkpoints: Checkpoint writer; a default one is created when omitted
        """
        model_config.validate()
        train_config.validate()
        self.model_config = model_config
        self.train_config = train_config
        self.workers = max(1, int(workers))
        self.checkpoints = checkpoints or CheckpointService()

    def prepare(self, model: FauForensicsModel, corpus: Corpus) -> List[ClipInputs]:
        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                return list(pool.map(model.prepare, corpus.clips))
        return [model.prepare(clip) for clip in corpus.clips]

    def check_corpus(self, corpus: Corpus) -> None:
        if len(corpus) == 0:
            raise ConfigError("Cannot train on an empty corpus")
        if corpus.T != self.model_config.T:
            raise ConfigError(f"Corpus T={corpus.T} does not match model T={self.model_config.T}")
        if corpus.mode is not self.model_config.video_mode:
            raise ConfigError(f"Corpus is {corpus.mode.value}-mode, model expects "
                              f"{self.model_config.video_mode.value}-mode")

    def step_loss(self, model: FauForensicsModel, batch: List[ClipInputs], step: int) -> LossTerms:
        """Batch loss of one optimization step; a non-finite loss stops training"""
        try:
            terms = model.batch_loss(batch)
        except NumericDomainError as e:
            logger.error(f"Non-finite logits at step {step}: {str(e)}")
            raise TrainingError(f"Training diverged at step {step}: {e}") from e
        total = terms.total.item()
        if not math.isfinite(total):
            logger.error(f"Non-finite loss {total} at step {step}")
            raise TrainingError(f"Training diverged at step {step}: loss is {total}")
        return terms

    def evaluate_split(self, model: FauForensicsModel, inputs: List[ClipInputs]) -> Tuple[float, float]:
        """(accuracy, weighted loss) of the multimodal head on prepared inputs"""
        correct = sum(model.infer_inputs(x).predicted_class == x.label for x in inputs)
        loss = model.batch_loss(inputs).total.item()
        return correct / len(inputs), loss

    def train(self, corpus: Corpus, out_dir: Path, inputs: Optional[str] = None) -> TrainResult:
        """
        Train a freshly initialized model on corpus and write outputs to out_dir

        Args:
            corpus: Training clips; a seeded validation split is held out
            out_dir: Directory for checkpoints, loss log and run manifest
            inputs: Optional corpus path recorded in the run manifest

        Returns:
            TrainResult with output paths and per-step records
        """
        started = time.perf_counter()
        cfg = self.train_config
        self.check_corpus(corpus)
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

        model = FauForensicsModel(self.model_config)
        prepared = self.prepare(model, corpus)
        train_idx, val_idx = validation_split(len(prepared), cfg)
        val_inputs = [prepared[i] for i in val_idx]
        model.fit_input_scales([prepared[i] for i in train_idx])
        steps_per_epoch = math.ceil(len(train_idx) / cfg.batch)
        total_steps = cfg.epochs * steps_per_epoch
        logger.info(f"Training on {len(train_idx)} clips ({len(val_idx)} held out), "
                    f"{steps_per_epoch} steps/epoch, {total_steps} steps total")

        result = TrainResult(out_dir=out_dir,
                             init_checkpoint=out_dir / INIT_CHECKPOINT,
                             final_checkpoint=out_dir / FINAL_CHECKPOINT,
                             best_checkpoint=out_dir / BEST_CHECKPOINT,
                             loss_log=out_dir / LOSS_LOG)
        self.checkpoints.save(model, result.init_checkpoint)

        params = model.parameters()
        state = OptimState()
        shuffle_rng = np.random.default_rng([cfg.seed, 1])
        best_key: Optional[Tuple[float, float]] = None
        best_bytes: Optional[bytes] = None
        step = 0

        try:
            with open(result.loss_log, 'w', encoding='utf-8') as log:
                for epoch in range(1, cfg.epochs + 1):
                    order = shuffle_rng.permutation(train_idx)
                    for start in range(0, len(order), cfg.batch):
                        batch = [prepared[i] for i in order[start:start + cfg.batch]]
                        lr = poly_lr(step, total_steps, cfg)
                        terms = self.step_loss(model, batch, step)
                        backward(terms.total)
                        optimizer_step(params, state, lr, cfg)
                        values = terms.values()
                        record = StepRecord(step, lr, values['total'], values['av'], values['a'], values['v'])
                        log.write(record.to_line() + '\n')
                        result.records.append(record)
                        logger.debug(f"step {step} lr={lr:.3e} loss={values['total']:.6f}")
                        step += 1
                    log.flush()

                    if val_inputs:
                        accuracy, val_loss = self.evaluate_split(model, val_inputs)
                        result.epochs.append(EpochSummary(epoch, accuracy, val_loss))
                        key = (accuracy, -val_loss)
                        if best_key is None or key > best_key:
                            best_key = key
                            best_bytes = self.checkpoints.encode(model)
                            result.best_epoch = epoch
                        logger.info(f"Epoch {epoch}/{cfg.epochs}: val_acc={accuracy:.4f} val_loss={val_loss:.6f}")
                    else:
                        result.epochs.append(EpochSummary(epoch, None, None))
                        logger.info(f"Epoch {epoch}/{cfg.epochs} done")
        except OSError as e:
            logger.error(f"Error writing loss log {result.loss_log}: {str(e)}")
            raise

        self.checkpoints.save(model, result.final_checkpoint)
        if best_bytes is None:
            best_bytes = self.checkpoints.encode(model)
            result.best_epoch = cfg.epochs
        result.best_checkpoint.write_bytes(best_bytes)
        result.model = model

        manifest = RunManifest(
            command='train',
            seed=cfg.seed,
            config_text=to_key_value_text(self.model_config, 'model.') + to_key_value_text(cfg, 'train.'),
            inputs={'corpus': inputs} if inputs else {},
            outputs={'init_checkpoint': str(result.init_checkpoint),
                     'final_checkpoint': str(result.final_checkpoint),
                     'best_checkpoint': str(result.best_checkpoint),
                     'loss_log': str(result.loss_log)},
            substitutions=[f"optimizer: {OPTIMIZER_NOTE}"],
            wall_time_s=time.perf_counter() - started,
        )
        manifest.write(out_dir / RUN_MANIFEST)
        logger.info(f"Training finished after {step} steps; best epoch {result.best_epoch}")
        return result
