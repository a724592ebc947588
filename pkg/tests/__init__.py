"""Tests for polishforge."""
