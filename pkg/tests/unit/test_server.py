"""Unit tests for Server"""

import pytest
from unittest.mock import Mock, patch

from fauforensics.config import Config
from fauforensics.errors import ConfigError
from fauforensics.server import create_server


@patch('fauforensics.server.FastMCP')
def test_create_server_basic(mock_fastmcp):
    """Test create_server with basic config"""
    mock_fastmcp.return_value = Mock()

    config = Config(workers=2)
    server = create_server(config)

    assert server is not None
    assert server.config is config
    mock_fastmcp.assert_called_once_with(name='fauforensics')


@patch('fauforensics.server.FastMCP')
def test_create_server_invalid_config(mock_fastmcp):
    """Test create_server rejects an invalid config before building the server"""
    with pytest.raises(ConfigError):
        create_server(Config(workers=0))
    mock_fastmcp.assert_not_called()


def test_create_server_real_fastmcp():
    """Test create_server with the real FastMCP class"""
    server = create_server(Config())
    assert server.name == 'fauforensics'
    assert server.config.workers == 1
