"""Criterion number -> (passed, seconds, detail), filled by the acceptance tests."""
RESULTS: dict[int, tuple[bool, float, str]] = {}
