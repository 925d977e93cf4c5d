"""Unit tests for the end-to-end gradient check"""

import numpy as np
import pytest

from fauforensics.errors import CheckFailure
from fauforensics.models.network import HeadMode
from fauforensics.models.training import GradCheckReport
from fauforensics.services.gradcheck import GradientChecker, relative_error, small_model_config


def test_relative_error():
    """Test the normalized difference and its floor"""
    assert relative_error(np.array([1.0, 0.0]), np.array([1.0, 0.0])) == 0.0
    assert relative_error(np.array([1.0]), np.array([-1.0])) == pytest.approx(1.0)
    assert relative_error(np.zeros(3), np.zeros(3)) == 0.0


def test_gradcheck_small_model():
    """Test that every learnable tensor passes on a tiny model"""
    report = GradientChecker().check(T=4, L=8, batch=2, seed=0)
    model_names = {'audio.w1', 'fusion.w', 'qt.query', 'tap.sigma_av', 'head_v.b2'}
    assert model_names <= set(report.errors)
    assert report.passed, report.summary()
    assert report.summary().startswith('PASS')


def test_gradcheck_fourclass_variant():
    """Test gradients of the four-class head"""
    config = small_model_config(T=4, L=8, seed=1, head_mode=HeadMode.FOURCLASS)
    report = GradientChecker().check(batch=2, seed=1, config=config)
    assert report.passed, report.summary()


@pytest.mark.parametrize('flag', ['use_tap', 'use_video_encoder', 'use_audio_encoder', 'use_alignment'])
def test_gradcheck_ablations(flag):
    """Test gradients of models with a component switched off"""
    config = small_model_config(T=4, L=8, seed=2, **{flag: False})
    report = GradientChecker().check(batch=2, seed=2, config=config)
    assert report.passed, report.summary()


def test_require_pass():
    """Test that a failing report raises CheckFailure"""
    checker = GradientChecker()
    failing = GradCheckReport(T=8, L=16, batch=2, seed=0, h=1e-5, tolerance=1e-4, errors={'a': 1e-6, 'b': 3e-3})
    assert failing.worst == 'b'
    with pytest.raises(CheckFailure, match="b"):
        checker.require_pass(failing)
    passing = GradCheckReport(T=8, L=16, batch=2, seed=0, h=1e-5, tolerance=1e-4, errors={'a': 1e-6})
    assert checker.require_pass(passing) is passing


@pytest.mark.slow
def test_gradcheck_acceptance_size():
    """Test the T=8, L=16, batch=2 gradient check"""
    report = GradientChecker().check(T=8, L=16, batch=2, seed=0)
    assert report.max_error < 1e-4
