"""MCP server setup (stdio transport)"""

import logging

from mcp.server import FastMCP

from fauforensics.config import Config

logger = logging.getLogger(__name__)


def create_server(config: Config) -> FastMCP:
    """
    Create MCP server for FauForensics tools

    Args:
        config: Runtime configuration

    Returns:
        Configured FastMCP server instance
    """
    config.validate()

    mcp = FastMCP(name='fauforensics')

    # Store config in server instance for tools to access
    mcp.config = config

    logger.info(f"Created MCP server with {config.workers} worker(s)")

    return mcp
