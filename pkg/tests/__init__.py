"""Tests for erem-fem."""
