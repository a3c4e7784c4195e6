import pytest

from bubblediamond.coefficients import Convention, ConventionError, DEFAULT_CONVENTION
from bubblediamond.conventions import (EXACT_CHECKS, all_conventions, auto_levels, entry_ok, format_table,
                                       resolve_conventions, score_exact)


def test_bundle_space():
    bundles = all_conventions()
    assert len(bundles) == 64
    assert len(set(bundles)) == 64
    assert DEFAULT_CONVENTION in bundles


@pytest.mark.parametrize("b", [1, 2, 3, 5])
def test_exact_stage_unique_survivor(b):
    report = resolve_conventions(b)
    assert report.convention == DEFAULT_CONVENTION
    assert report.as_dict()["survivors"] == 1


@pytest.mark.parametrize("b", [1, 2, 3])
def test_default_bundle_scores_zero(b):
    score = score_exact(b, DEFAULT_CONVENTION, 3)
    assert all(score.residuals[c] == 0 for c in EXACT_CHECKS)


def test_printed_initial_values_break_symmetry():
    score = score_exact(2, Convention(initial="printed"), 3)
    assert not score.exact_ok


def test_auto_levels_respect_budget():
    assert auto_levels(1) == (6, 8)
    assert auto_levels(3) == (6, 8)
    assert auto_levels(5) == (5, 7)
    assert auto_levels(8) == (4, 6)


def test_entry_rule():
    assert entry_ok(1.0, 1e-3, 1e-4, 1e-2)
    assert not entry_ok(1.0, 1e-4, 1e-3, 1e-2)   # error grew
    assert not entry_ok(1.0, 0.5, 0.1, 1e-2)     # decayed but too large
    assert entry_ok(1.0, 1e-17, 1e-16, 1e-2)     # both at round-off


def test_impossible_tolerance_raises_with_table():
    with pytest.raises(ConventionError) as info:
        resolve_conventions(1, quadrature_levels=(2, 3), quad_jmax=1, rel_tol=1e-9)
    assert "eta_lead" in info.value.table


def test_format_table_has_one_row_per_bundle():
    report = resolve_conventions(1)
    assert len(format_table(report.scores).splitlines()) == 65


def test_cached_entry_points_validate_first():
    resolve_conventions(1)
    with pytest.raises(ValueError):
        resolve_conventions(True)
