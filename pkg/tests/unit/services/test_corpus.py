"""Unit tests for the synthetic corpus service"""

import struct

import numpy as np
import pytest

from fauforensics.errors import ConfigError, FormatError
from fauforensics.models.clip import ClipLabel, GenConfig, VideoMode
from fauforensics.services.corpus import (
    CORPUS_MAGIC, CorpusService, ar1, audio_envelope, clip_seed, coupling_correlation, generate_clip
)


@pytest.fixture
def corpus_service():
    return CorpusService(workers=1)


@pytest.fixture
def feature_corpus(corpus_service):
    return corpus_service.generate(8, 11, GenConfig(T=8))


def test_generate_clip_deterministic():
    """Test that the same seed, label and config give bit-identical clips"""
    cfg = GenConfig()
    first = generate_clip(123, ClipLabel.RAFV, cfg)
    second = generate_clip(123, ClipLabel.RAFV, cfg)
    assert first.equals(second)
    assert not first.equals(generate_clip(124, ClipLabel.RAFV, cfg))


def test_generate_clip_shapes_feature_mode():
    """Test extents of a default feature-mode clip"""
    clip = generate_clip(5, ClipLabel.RARV, GenConfig())
    assert clip.mode is VideoMode.FEATURE
    assert clip.video.shape == (25, 32)
    assert clip.fau.shape == (25, 12)
    assert clip.waveform.samples.shape == (16000,)
    assert clip.waveform.samples.dtype == np.float32
    assert np.all((clip.fau >= 0) & (clip.fau <= 1))


def test_generate_clip_shapes_raw_mode():
    """Test extents and pixel range of a raw-mode clip"""
    clip = generate_clip(5, ClipLabel.FAFV, GenConfig(mode=VideoMode.RAW))
    assert clip.mode is VideoMode.RAW
    assert clip.video.shape == (25, 1, 16, 16)
    assert clip.video.min() >= 0.0 and clip.video.max() <= 1.0


def test_real_clip_fau_unchanged_by_audio_label():
    """Test that faking audio leaves video and FAU streams untouched"""
    cfg = GenConfig()
    real = generate_clip(9, ClipLabel.RARV, cfg)
    fake_audio = generate_clip(9, ClipLabel.FARV, cfg)
    assert np.array_equal(real.video, fake_audio.video)
    assert np.array_equal(real.fau, fake_audio.fau)
    assert not np.array_equal(real.waveform.samples, fake_audio.waveform.samples)


def test_ar1_unit_variance():
    """Test the stationary AR(1) variance over many draws"""
    rng = np.random.default_rng(0)
    paths = np.stack([ar1(rng, 50, 0.9) for _ in range(2000)])
    assert paths.var() == pytest.approx(1.0, abs=0.1)


def test_real_clips_are_coupled():
    """Test video-audio coupling of real clips versus audio-faked clips"""
    cfg = GenConfig()
    real = [coupling_correlation(generate_clip(clip_seed(3, i), ClipLabel.RARV, cfg)) for i in range(20)]
    fake = [coupling_correlation(generate_clip(clip_seed(3, i), ClipLabel.FARV, cfg)) for i in range(20)]
    assert np.mean(real) > 0.8
    assert np.mean(fake) < np.mean(real) - 0.3


def test_audio_envelope_length():
    """Test one envelope value per video frame"""
    clip = generate_clip(1, ClipLabel.RARV, GenConfig())
    assert audio_envelope(clip.waveform, clip.T).shape == (25,)


def test_clip_seeds_differ():
    """Test that per-sample seeds differ across indices and corpus seeds"""
    seeds = {clip_seed(1, i) for i in range(100)} | {clip_seed(2, i) for i in range(100)}
    assert len(seeds) == 200


def test_labels_cycle(feature_corpus, corpus_service):
    """Test that labels cycle RARV, FARV, RAFV, FAFV"""
    assert [c.label for c in feature_corpus.clips[:4]] == list(ClipLabel)
    assert corpus_service.label_histogram(feature_corpus) == {'RARV': 2, 'FARV': 2, 'RAFV': 2, 'FAFV': 2}


def test_generate_independent_of_workers():
    """Test that parallel generation reproduces the serial corpus"""
    cfg = GenConfig(T=6)
    serial = CorpusService(workers=1).generate(6, 4, cfg)
    parallel = CorpusService(workers=2).generate(6, 4, cfg)
    assert all(a.equals(b) for a, b in zip(serial.clips, parallel.clips))


def test_generate_invalid_config(corpus_service):
    """Test rejected generator settings"""
    with pytest.raises(ConfigError, match="rho_fake"):
        corpus_service.generate(4, 0, GenConfig(rho_real=0.5, rho_fake=0.6))
    with pytest.raises(ConfigError, match="count"):
        corpus_service.generate(-1, 0, GenConfig())


def test_write_read_corpus(corpus_service, feature_corpus, tmp_path):
    """Test that a corpus file reads back bit-exactly"""
    path = corpus_service.write_corpus(feature_corpus, tmp_path / 'train.ffc')
    loaded = corpus_service.read_corpus(path)

    assert loaded.mode is VideoMode.FEATURE
    assert loaded.T == 8
    assert len(loaded) == 8
    assert all(a.equals(b) for a, b in zip(feature_corpus.clips, loaded.clips))

    manifest = corpus_service.manifest_path(path).read_text()
    assert "count=8" in manifest
    assert "label.FAFV=2" in manifest


def test_write_read_raw_corpus(corpus_service, tmp_path):
    """Test raw-mode corpus files"""
    corpus = corpus_service.generate(3, 2, GenConfig(T=4, mode=VideoMode.RAW))
    loaded = corpus_service.read_corpus(corpus_service.write_corpus(corpus, tmp_path / 'raw.ffc'))
    assert loaded.mode is VideoMode.RAW
    assert all(a.equals(b) for a, b in zip(corpus.clips, loaded.clips))


def test_read_corpus_bad_magic(corpus_service, tmp_path):
    """Test a file with the wrong magic bytes"""
    path = tmp_path / 'bad.ffc'
    path.write_bytes(b'NOPE' + bytes(20))
    with pytest.raises(FormatError) as exc:
        corpus_service.read_corpus(path)
    assert exc.value.offset == 0


def test_read_corpus_truncated(corpus_service, feature_corpus, tmp_path):
    """Test that a truncated file names a byte offset"""
    path = corpus_service.write_corpus(feature_corpus, tmp_path / 'train.ffc')
    data = path.read_bytes()
    path.write_bytes(data[:len(data) - 10])
    with pytest.raises(FormatError, match="byte offset"):
        corpus_service.read_corpus(path)


def test_read_corpus_bad_version(corpus_service, tmp_path):
    """Test an unsupported version field"""
    path = tmp_path / 'v2.ffc'
    path.write_bytes(CORPUS_MAGIC + struct.pack('<HBIQ', 2, 0, 25, 0))
    with pytest.raises(FormatError, match="version") as exc:
        corpus_service.read_corpus(path)
    assert exc.value.offset == 4


def test_read_corpus_trailing_bytes(corpus_service, feature_corpus, tmp_path):
    """Test extra bytes after the last record"""
    path = corpus_service.write_corpus(feature_corpus, tmp_path / 'train.ffc')
    path.write_bytes(path.read_bytes() + b'\x00\x00')
    with pytest.raises(FormatError, match="trailing"):
        corpus_service.read_corpus(path)


def test_read_corpus_missing(corpus_service, tmp_path):
    """Test reading a file that does not exist"""
    with pytest.raises(FormatError, match="Cannot read"):
        corpus_service.read_corpus(tmp_path / 'absent.ffc')


def test_empty_corpus_round_trip(corpus_service, tmp_path):
    """Test that a zero-record corpus is a valid file"""
    corpus = corpus_service.generate(0, 0, GenConfig(T=5))
    loaded = corpus_service.read_corpus(corpus_service.write_corpus(corpus, tmp_path / 'empty.ffc'))
    assert len(loaded) == 0
    assert loaded.T == 5


def test_import_features(corpus_service, feature_corpus, tmp_path):
    """Test importing externally stored feature-mode clips"""
    path = corpus_service.write_corpus(feature_corpus, tmp_path / 'features.ffc')
    clips = list(corpus_service.import_features(path, expected_T=8))
    assert len(clips) == 8
    with pytest.raises(ConfigError, match="T=8"):
        corpus_service.import_features(path, expected_T=25)


def test_import_features_rejects_raw(corpus_service, tmp_path):
    """Test that raw-mode files are not feature imports"""
    corpus = corpus_service.generate(2, 0, GenConfig(T=4, mode=VideoMode.RAW))
    path = corpus_service.write_corpus(corpus, tmp_path / 'raw.ffc')
    with pytest.raises(FormatError, match="feature-mode"):
        corpus_service.import_features(path)


def test_split(corpus_service, feature_corpus):
    """Test splitting a corpus by count"""
    head, tail = corpus_service.split(feature_corpus, 3)
    assert len(head) == 3 and len(tail) == 5
    assert head.T == tail.T == 8
