"""Tests for tool request/response models"""

from fauforensics.errors import DataError, UsageError
from fauforensics.models.tool_models import (
    ErrorInfo, GenerateCorpusRequest, GradientCheckRequest, TrainModelRequest,
    TrainModelResponse, error_info
)


def test_error_info_uses_error_kind():
    """Test that the error code is the exception kind"""
    info = error_info(DataError("Cannot evaluate on an empty corpus"))
    assert info.code == 'data'
    assert info.message == "Cannot evaluate on an empty corpus"
    assert error_info(UsageError("bad")).code == 'usage'


def test_error_info_unexpected_exception():
    """Test the code of exceptions outside the hierarchy"""
    assert error_info(RuntimeError("boom")).code == 'internal'


def test_request_defaults():
    """Test default values of requests"""
    generate = GenerateCorpusRequest(out='c.ffc', count=10)
    assert (generate.seed, generate.mode, generate.T) == (0, 'feature', 25)

    train = TrainModelRequest(corpus='c.ffc', out_dir='run')
    assert (train.epochs, train.batch, train.lr) == (50, 32, 1e-4)
    assert (train.lambda_av, train.lambda_a, train.lambda_v) == (0.8, 0.1, 0.1)
    assert train.head_mode == 'binary'

    gradcheck = GradientCheckRequest()
    assert (gradcheck.T, gradcheck.L, gradcheck.batch) == (8, 16, 2)


def test_failed_response():
    """Test a failed response carrying error info"""
    response = TrainModelResponse(out_dir='run', status='FAILED', error=ErrorInfo(message='x', code='config'))
    assert response.final_checkpoint is None
    assert response.error.code == 'config'
