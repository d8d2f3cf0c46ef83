"""Tests for utility functions."""

import pytest

from erem_fem.exceptions import ValidationError
from erem_fem.utils import env_int, fmt17, halving_sequence


class TestFormatting:
    """Test full-precision number formatting."""

    def test_round_trip_digits(self):
        """Seventeen significant digits identify a double uniquely."""
        value = 0.1 + 0.2
        assert float(fmt17(value)) == value
        assert fmt17(0.125) == "0.125"


class TestHalvingSequence:
    """Test refinement sequences."""

    def test_levels(self):
        assert halving_sequence(0.5, 4) == [0.5, 0.25, 0.125, 0.0625]

    def test_invalid_levels(self):
        with pytest.raises(ValidationError, match="levels"):
            halving_sequence(0.5, 0)


class TestEnvInt:
    """Test integer environment variables."""

    def test_unset_uses_default(self, monkeypatch):
        monkeypatch.delenv("EREM_JOBS", raising=False)
        assert env_int("EREM_JOBS", 4) == 4

    def test_value(self, monkeypatch):
        monkeypatch.setenv("EREM_JOBS", " 3 ")
        assert env_int("EREM_JOBS") == 3

    def test_not_an_integer(self, monkeypatch):
        monkeypatch.setenv("EREM_JOBS", "many")
        with pytest.raises(ValidationError, match="EREM_JOBS"):
            env_int("EREM_JOBS")
