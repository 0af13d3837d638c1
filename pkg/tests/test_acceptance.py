"""Acceptance criteria, one test each; a PASS/FAIL line per criterion is printed
in the terminal summary."""

import pytest

from pdm_spectra import harness
from pdm_spectra.cli import check_determinism

RESULTS = []

CRITERIA = [
    ("transform", harness.check_transform),
    ("spectrum", harness.check_spectrum),
    ("residual", harness.check_residual),
    ("structure", harness.check_structure),
    ("scaling", harness.check_scaling),
    ("degeneracy", harness.check_degeneracy),
    ("convergence", harness.check_convergence),
    ("determinism", check_determinism),
]


@pytest.mark.parametrize("name,check", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_criterion(name, check):
    result = check(tol=harness.DEFAULT_TOLERANCES, grid_size=8192)
    RESULTS.append(result)
    print(result.line())
    assert result.passed, result.line()
