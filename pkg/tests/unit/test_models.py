"""Unit tests for data models"""

import numpy as np
import pytest

from fauforensics.errors import ConfigError, FormatError, InputError
from fauforensics.models import (
    ClipLabel, EvalReport, GenConfig, GradCheckReport, HeadMode, InferenceResult,
    ModelConfig, RunManifest, StepRecord, TrainConfig, VideoMode, Waveform
)
from fauforensics.models.evaluation import CorrelationSummary, GroupStatistic


def test_clip_label_flags():
    """Test modality flags and the binary label of each class"""
    assert [label.binary for label in ClipLabel] == [0, 1, 1, 1]
    assert [label.audio_fake for label in ClipLabel] == [False, True, False, True]
    assert [label.video_fake for label in ClipLabel] == [False, False, True, True]
    assert ClipLabel.RARV.is_real


def test_video_mode_codes():
    """Test mode codes used in corpus headers"""
    assert VideoMode.from_code(VideoMode.RAW.code) is VideoMode.RAW
    assert VideoMode.from_code(1) is VideoMode.FEATURE
    with pytest.raises(ValueError):
        VideoMode.from_code(7)


def test_waveform():
    """Test waveform dtype and duration"""
    waveform = Waveform(samples=np.zeros(8000, dtype=np.float64))
    assert waveform.samples.dtype == np.float32
    assert waveform.duration == pytest.approx(0.5)
    with pytest.raises(InputError):
        Waveform(samples=np.zeros(4), sample_rate=0)


def test_gen_config_defaults():
    """Test default generator settings"""
    cfg = GenConfig()
    assert cfg.T == 25
    assert cfg.num_samples == 16000
    assert cfg.mode is VideoMode.FEATURE
    cfg.validate()


def test_gen_config_invalid():
    """Test generator settings that violate their ranges"""
    with pytest.raises(ConfigError):
        GenConfig(T=1).validate()
    with pytest.raises(ConfigError):
        GenConfig(coupling_noise=-0.1).validate()


def test_model_config_defaults():
    """Test defaults of the full-size model"""
    cfg = ModelConfig()
    assert (cfg.T, cfg.L, cfg.head_hidden) == (25, 512, 512)
    assert (cfg.lambda_av, cfg.lambda_a, cfg.lambda_v) == (0.8, 0.1, 0.1)
    assert cfg.mel_frames == 100
    assert cfg.variant == 'full'
    assert HeadMode.BINARY.num_classes == 2
    assert HeadMode.FOURCLASS.num_classes == 4


def test_model_config_variant_name():
    """Test the ablation variant label"""
    assert ModelConfig(use_alignment=False, use_tap=False).variant == 'no-alignment-no-tap'
    assert ModelConfig(use_audio_encoder=False).variant == 'no-audio'


def test_model_config_temporal_context():
    """Test the encoder window width"""
    assert ModelConfig().window == 3
    assert ModelConfig(temporal_context=0).window == 1
    assert ModelConfig(T=2, temporal_context=2).window == 5
    assert ModelConfig().audio_frame_dim == 320
    with pytest.raises(ConfigError, match="temporal_context"):
        ModelConfig(temporal_context=-1).validate()


def test_model_config_invalid():
    """Test invalid model settings"""
    with pytest.raises(ConfigError, match="L must be"):
        ModelConfig(L=0).validate()
    with pytest.raises(ConfigError, match="Loss weights"):
        ModelConfig(lambda_a=-0.1).validate()


def test_train_config_defaults():
    """Test the default optimization schedule"""
    cfg = TrainConfig()
    assert (cfg.lr0, cfg.batch, cfg.epochs, cfg.poly_power) == (1e-4, 32, 50, 0.9)
    with pytest.raises(ConfigError):
        TrainConfig(val_fraction=1.0).validate()


def test_step_record_line():
    """Test loss-log line formatting and parsing"""
    record = StepRecord(3, 1e-4, 0.6931471805599453, 0.7, 0.5, 0.4)
    assert StepRecord.from_line(record.to_line() + '\n') == record
    with pytest.raises(ValueError):
        StepRecord.from_line("1\t2")


def test_inference_result_class_names():
    """Test class names for binary and four-class heads"""
    binary = InferenceResult(np.array([0.2, 0.8]), 1, 0.8, HeadMode.BINARY)
    fourclass = InferenceResult(np.array([0.1, 0.1, 0.7, 0.1]), 2, 0.9, HeadMode.FOURCLASS)
    assert binary.class_name() == 'fake'
    assert fourclass.class_name() == 'RAFV'


def test_gradcheck_report():
    """Test pass/fail and summary of a gradient check report"""
    report = GradCheckReport(T=8, L=16, batch=2, seed=0, h=1e-5, tolerance=1e-4,
                             errors={'qt.query': 2e-7, 'head_av.w1': 5e-6}, coordinates=96)
    assert report.passed
    assert report.worst == 'head_av.w1'
    assert report.summary().startswith('PASS max_rel_error=5.000e-06 worst=head_av.w1')


def test_eval_report_text():
    """Test sections of the structured evaluation report"""
    report = EvalReport(n_samples=4, head_mode='binary', accuracy=0.75, auc=0.5,
                        confusion=np.array([[1, 1], [0, 2]]), per_class_recall=[0.5, 1.0],
                        perturbation_grid={('contrast', lv): 0.5 for lv in range(5)})
    text = report.to_text()
    assert "accuracy=0.75" in text
    assert "1\t1\n0\t2\n" in text
    assert "contrast\t0.5\t0.5\t0.5\t0.5\t0.5" in report.grid_tsv()
    assert report.clean_auc_for('contrast') == 0.5
    assert report.clean_auc_for('saturation') is None


def test_correlation_summary_pairs():
    """Test key=value pairs of a correlation summary"""
    summary = CorrelationSummary(
        statistic='consecutive_cosine',
        real=GroupStatistic('real_video', 2, 0.9, 0.01, 0.007),
        fake=GroupStatistic('fake_video', 2, 0.8, 0.02, 0.014),
        separation=6.3,
    )
    pairs = dict(summary.to_pairs())
    assert pairs['consecutive_cosine.real_video.count'] == '2'
    assert pairs['consecutive_cosine.separation_se'] == '6.3'


def test_run_manifest(tmp_path):
    """Test the run manifest text"""
    manifest = RunManifest(command='train', seed=7, config_text='model.L=8\n',
                           inputs={'corpus': 'c.ffc'}, outputs={'loss_log': 'run/loss.log'},
                           substitutions=['optimizer: adamw'])
    path = manifest.write(tmp_path / 'run-manifest.txt')
    text = path.read_text()
    assert "command=train\n" in text
    assert "seed=7\n" in text
    assert "input.corpus=c.ffc\n" in text
    assert "substitution.0=optimizer: adamw\n" in text
    assert text.endswith("[config]\nmodel.L=8\n")


def test_format_error_offset():
    """Test that FormatError carries its byte offset"""
    err = FormatError("Bad magic", 12)
    assert err.offset == 12
    assert "offset 12" in str(err)
    assert err.exit_code == 2
