"""Utility modules for the strtrend package."""
