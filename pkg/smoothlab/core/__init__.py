"""Numerical core: grid functions, weights, spaces, smoothness, interpolation lattices."""
