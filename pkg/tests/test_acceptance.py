"""End-to-end acceptance gates.

Each test runs one self-validation check at its stated tolerance and
prints a single pass/fail line so the whole gate is readable from the
test log at a glance.
"""

import pytest

from votermodel import validate as vl


def _gate(capsys, number, check):
    result = check()
    status = "PASS" if result.passed else "FAIL"
    with capsys.disabled():
        print(
            f"[{status}] criterion {number:02d} {result.name}: "
            f"{result.measured} (expected {result.expected}; tolerance {result.tolerance})"
        )
    assert result.passed, f"{result.name}: {result.measured} vs {result.expected}"


def test_criterion_01_spectral_correctness(capsys):
    _gate(capsys, 1, vl.check_spectral_correctness)


def test_criterion_02_propagator_equivalence(capsys):
    _gate(capsys, 2, vl.check_propagator_equivalence)


def test_criterion_03_uniform_local_time(capsys):
    _gate(capsys, 3, vl.check_uniform_local_time)


def test_criterion_04_oracle_equivalence(capsys):
    _gate(capsys, 4, vl.check_oracle_equivalence)


def test_criterion_05_consensus_time_value(capsys):
    _gate(capsys, 5, vl.check_consensus_time_value)


def test_criterion_06_local_time_histograms(capsys):
    _gate(capsys, 6, vl.check_local_time_histograms)


def test_criterion_07_moment_linearity(capsys):
    _gate(capsys, 7, vl.check_moment_linearity)


def test_criterion_08_moment_scaling(capsys):
    _gate(capsys, 8, vl.check_moment_scaling)


def test_criterion_09_continuum_limits(capsys):
    _gate(capsys, 9, vl.check_continuum_limits)


def test_criterion_10_gap_scaling(capsys):
    _gate(capsys, 10, vl.check_gap_scaling)
