"""Tests for fsub."""
