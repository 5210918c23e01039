"""Stop rules played against a value field."""
