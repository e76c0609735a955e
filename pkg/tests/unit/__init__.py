"""Unit tests package."""
