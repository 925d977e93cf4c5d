# Tests configuration