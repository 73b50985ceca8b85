"""Exact bivariate q/y series, Jacobi-form special functions, characters and MLDE checks."""
