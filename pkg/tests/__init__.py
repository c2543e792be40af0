"""Test package for mobile-maps."""
