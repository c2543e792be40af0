"""Command groups of the mobile-maps CLI."""
