"""Directed solid-on-solid model toolkit.

Exact configuration samplers, finite-size determinantal correlation kernels,
Fredholm-determinant gap probabilities, the limiting height surface, soft-edge
(Airy/Tracy-Widom) asymptotics, and a reproducible Monte Carlo harness.
"""

__version__ = "0.1.0"

__all__ = [
    "airy",
    "distributions",
    "experiments",
    "io",
    "jacobi",
    "kernel",
    "model",
    "plots",
    "sampler",
    "shape",
]
