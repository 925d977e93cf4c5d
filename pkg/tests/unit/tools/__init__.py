# Unit tests for tools