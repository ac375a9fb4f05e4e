"""Tests for the strtrend package."""
