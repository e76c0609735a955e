"""Tests for the parrep-sensitivity package."""
