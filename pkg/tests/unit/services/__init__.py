# Unit tests for services