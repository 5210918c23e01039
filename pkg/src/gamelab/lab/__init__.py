"""Approximation studies: gamma sweeps, value rates, mollification."""
