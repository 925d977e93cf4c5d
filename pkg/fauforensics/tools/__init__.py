"""MCP Tools for FauForensics operations"""

from . import discovery, corpus, training, evaluation

__all__ = [
    'discovery',
    'corpus',
    'training',
    'evaluation'
]
