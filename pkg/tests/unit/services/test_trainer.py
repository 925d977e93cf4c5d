"""Unit tests for the training loop"""

import numpy as np
import pytest

from fauforensics.errors import ConfigError, NumericDomainError, TrainingError, UsageError
from fauforensics.models.clip import Corpus, GenConfig
from fauforensics.models.network import HeadMode, LossTerms, ModelConfig
from fauforensics.models.training import OptimState, StepRecord, TrainConfig
from fauforensics.services.checkpoint import CheckpointService
from fauforensics.services.corpus import CorpusService
from fauforensics.services.evaluation import EvaluationService
from fauforensics.services.gradcheck import small_model_config
from fauforensics.services.network import FauForensicsModel
from fauforensics.services.trainer import (
    BEST_CHECKPOINT, FINAL_CHECKPOINT, INIT_CHECKPOINT, LOSS_LOG, RUN_MANIFEST,
    Trainer, optimizer_step, poly_lr, validation_split,
)
from fauforensics.tensor import Tensor


@pytest.fixture
def corpus():
    return CorpusService().generate(8, 17, GenConfig(T=4))


@pytest.fixture
def trainer():
    return Trainer(small_model_config(T=4, L=8, seed=2), TrainConfig(lr0=1e-3, batch=4, epochs=2, seed=2))


def test_poly_lr():
    """Test the poly schedule endpoints and shape"""
    cfg = TrainConfig(lr0=1e-4, poly_power=0.9)
    assert poly_lr(0, 100, cfg) == pytest.approx(1e-4)
    assert poly_lr(50, 100, cfg) == pytest.approx(1e-4 * 0.5 ** 0.9)
    assert poly_lr(100, 100, cfg) == 0.0


def test_poly_lr_invalid():
    """Test poly schedule argument checks"""
    cfg = TrainConfig()
    with pytest.raises(ConfigError):
        poly_lr(0, 0, cfg)
    with pytest.raises(UsageError):
        poly_lr(11, 10, cfg)


def test_optimizer_step_descends():
    """Test that repeated updates shrink a quadratic"""
    cfg = TrainConfig(weight_decay=0.0)
    p = Tensor(np.array([1.0, -2.0]), requires_grad=True, name='p')
    state = OptimState()
    for _ in range(200):
        p.grad = 2.0 * p.data
        optimizer_step([p], state, 0.05, cfg)
    assert np.abs(p.data).max() < 0.1
    assert state.step == 200
    assert p.grad is None


def test_optimizer_first_step_size():
    """Test that the bias-corrected first step moves each coordinate by about lr"""
    cfg = TrainConfig(weight_decay=0.0)
    p = Tensor(np.array([3.0, -5.0]), requires_grad=True)
    p.grad = np.array([0.2, -40.0])
    optimizer_step([p], OptimState(), 0.01, cfg)
    np.testing.assert_allclose(p.data, [2.99, -4.99], atol=1e-6)


def test_optimizer_weight_decay_is_decoupled():
    """Test that decay shrinks weights even with a zero gradient"""
    cfg = TrainConfig(weight_decay=0.1)
    p = Tensor(np.array([2.0]), requires_grad=True)
    p.grad = np.zeros(1)
    optimizer_step([p], OptimState(), 0.5, cfg)
    assert p.data[0] == pytest.approx(2.0 - 0.5 * 0.1 * 2.0)


def test_optimizer_missing_gradient():
    """Test that a learnable parameter without a gradient is an error"""
    p = Tensor(np.zeros(2), requires_grad=True, name='w')
    with pytest.raises(TrainingError, match="w"):
        optimizer_step([p], OptimState(), 0.1, TrainConfig())


def test_optimizer_state_mismatch():
    """Test moment buffers that do not match the parameter list"""
    p = Tensor(np.zeros(2), requires_grad=True)
    p.grad = np.ones(2)
    state = OptimState(m=[np.zeros(2), np.zeros(2)], v=[np.zeros(2), np.zeros(2)])
    with pytest.raises(TrainingError, match="buffers"):
        optimizer_step([p], state, 0.1, TrainConfig())


def test_validation_split():
    """Test split sizes and disjointness"""
    train, val = validation_split(20, TrainConfig(val_fraction=0.1, seed=0))
    assert len(val) == 2
    assert sorted(np.concatenate([train, val]).tolist()) == list(range(20))

    train, val = validation_split(1, TrainConfig())
    assert len(train) == 1 and len(val) == 0

    train, val = validation_split(2, TrainConfig(val_fraction=0.9))
    assert len(train) == 1 and len(val) == 1


def test_train_writes_outputs(trainer, corpus, tmp_path):
    """Test checkpoints, loss log and run manifest of a short run"""
    result = trainer.train(corpus, tmp_path / 'run', inputs='train.ffc')

    for name in (INIT_CHECKPOINT, FINAL_CHECKPOINT, BEST_CHECKPOINT, LOSS_LOG, RUN_MANIFEST):
        assert (tmp_path / 'run' / name).exists()

    # 7 training clips (1 held out) at batch 4 -> 2 steps per epoch
    lines = result.loss_log.read_text().splitlines()
    assert len(lines) == 4 == len(result.records)
    records = [StepRecord.from_line(line) for line in lines]
    assert [r.step for r in records] == [0, 1, 2, 3]
    assert records[0].lr == pytest.approx(1e-3)
    assert all(np.isfinite(r.total) for r in records)

    assert len(result.epochs) == 2
    assert result.best_epoch in (1, 2)
    assert result.model is not None

    manifest = (tmp_path / 'run' / RUN_MANIFEST).read_text()
    assert "command=train" in manifest
    assert "input.corpus=train.ffc" in manifest
    assert "substitution.0=optimizer:" in manifest


def test_train_is_deterministic(trainer, corpus, tmp_path):
    """Test that two runs with the same seed give identical logs and checkpoints"""
    first = trainer.train(corpus, tmp_path / 'a')
    second = trainer.train(corpus, tmp_path / 'b')
    assert first.loss_log.read_bytes() == second.loss_log.read_bytes()
    assert first.final_checkpoint.read_bytes() == second.final_checkpoint.read_bytes()
    assert first.best_checkpoint.read_bytes() == second.best_checkpoint.read_bytes()


def test_train_leaves_frozen_tensors(trainer, corpus, tmp_path):
    """Test that training changes learnable weights and never the frozen FAU encoder"""
    result = trainer.train(corpus, tmp_path / 'run')
    checkpoints = CheckpointService()
    assert checkpoints.frozen_bytes(result.init_checkpoint) == checkpoints.frozen_bytes(result.final_checkpoint)
    assert result.init_checkpoint.read_bytes() != result.final_checkpoint.read_bytes()


def test_train_workers_do_not_change_results(corpus, tmp_path):
    """Test that input preparation threads do not affect the run"""
    model_config = small_model_config(T=4, L=8, seed=2)
    train_config = TrainConfig(lr0=1e-3, batch=4, epochs=1, seed=2)
    serial = Trainer(model_config, train_config, workers=1).train(corpus, tmp_path / 'serial')
    threaded = Trainer(model_config, train_config, workers=3).train(corpus, tmp_path / 'threaded')
    assert serial.loss_log.read_bytes() == threaded.loss_log.read_bytes()


def test_train_empty_corpus(trainer, tmp_path):
    """Test training on an empty corpus"""
    empty = CorpusService().generate(0, 0, GenConfig(T=4))
    with pytest.raises(ConfigError, match="empty"):
        trainer.train(empty, tmp_path / 'run')


def test_train_frame_count_mismatch(trainer, tmp_path):
    """Test a corpus whose T differs from the model"""
    corpus = CorpusService().generate(4, 0, GenConfig(T=6))
    with pytest.raises(ConfigError, match="T=6"):
        trainer.train(corpus, tmp_path / 'run')


@pytest.mark.slow
def test_train_reduces_loss(tmp_path):
    """Test that a longer run lowers the training loss"""
    corpus = CorpusService().generate(64, 1, GenConfig(T=8))
    trainer = Trainer(small_model_config(T=8, L=16, seed=0), TrainConfig(lr0=1e-3, batch=8, epochs=10, seed=0))
    result = trainer.train(corpus, tmp_path / 'run')
    first = np.mean([r.total for r in result.records[:7]])
    last = np.mean([r.total for r in result.records[-7:]])
    assert last < first


def test_loss_log_total_is_weighted_sum(trainer, corpus, tmp_path):
    """Test that every logged total equals 0.8 av + 0.1 a + 0.1 v"""
    result = trainer.train(corpus, tmp_path / 'run')
    records = [StepRecord.from_line(line) for line in result.loss_log.read_text().splitlines()]
    assert records
    for r in records:
        assert abs(r.total - (0.8 * r.av + 0.1 * r.a + 0.1 * r.v)) <= 1e-12


def test_train_fits_input_scales(trainer, corpus, tmp_path):
    """Test that input scales are fitted before the first checkpoint and stay fixed"""
    result = trainer.train(corpus, tmp_path / 'run')
    initial = CheckpointService().load(result.init_checkpoint)
    for name in ('norm.audio_scale', 'norm.video_scale'):
        assert initial.frozen[name].data[0] != 1.0
        assert initial.frozen[name].data[0] > 0
        np.testing.assert_array_equal(initial.frozen[name].data, result.model.frozen[name].data)


def test_reimported_features_reproduce_training(trainer, corpus, tmp_path):
    """Test that a corpus read back through import_features gives the same loss log"""
    service = CorpusService()
    path = service.write_corpus(corpus, tmp_path / 'train.ffc')
    imported = Corpus(corpus.mode, corpus.T, list(service.import_features(path, expected_T=4)))

    direct = trainer.train(corpus, tmp_path / 'direct')
    reloaded = trainer.train(imported, tmp_path / 'imported')
    assert direct.loss_log.read_bytes() == reloaded.loss_log.read_bytes()


def test_train_non_finite_logits(trainer, corpus, tmp_path, mocker):
    """Test that non-finite logits stop training with TrainingError"""
    mocker.patch.object(FauForensicsModel, 'batch_loss', side_effect=NumericDomainError("non-finite logits"))
    with pytest.raises(TrainingError, match="step 0"):
        trainer.train(corpus, tmp_path / 'run')


def test_train_nan_loss(trainer, corpus, tmp_path, mocker):
    """Test that a NaN loss stops training before any update"""
    nan = Tensor(np.array(np.nan), requires_grad=True)
    terms = LossTerms(total=nan, av=nan, a=nan, v=nan)
    batch_loss = mocker.patch.object(FauForensicsModel, 'batch_loss', return_value=terms)
    with pytest.raises(TrainingError, match="nan"):
        trainer.train(corpus, tmp_path / 'run')
    batch_loss.assert_called_once()
    assert not (tmp_path / 'run' / FINAL_CHECKPOINT).exists()


@pytest.mark.slow
def test_fourclass_acceptance_run(tmp_path):
    """Test the 2000/400 four-class run at L=64 for 20 epochs"""
    service = CorpusService()
    train_set, test_set = service.split(service.generate(2400, 7), 2000)
    model_config = ModelConfig(L=64, head_mode=HeadMode.FOURCLASS)
    result = Trainer(model_config, TrainConfig(epochs=20), workers=4).train(train_set, tmp_path / 'run')

    model = CheckpointService().load(result.best_checkpoint)
    accuracy, auc, _ = EvaluationService(workers=4).clean_metrics(model, test_set)
    assert accuracy >= 0.95
    assert auc >= 0.99
