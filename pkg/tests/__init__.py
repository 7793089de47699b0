# Tests for dgwave
