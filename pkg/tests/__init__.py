"""sKdV toolkit tests."""
