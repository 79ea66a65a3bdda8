"""Config file parsing and CSV output."""
