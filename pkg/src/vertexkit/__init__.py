"""Comma three-string vertex in the full-string oscillator basis."""
