"""Teleporting one mode of a state whose other part spans ``m`` modes."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import ResourceState, StateError
from .kernels import diagonal_sum_matrix, fidelity_samples
from .metrics import IMAG_TOL, _mean_stderr


@dataclass(frozen=True)
class ModeCounts:
    n_in: int
    m: int
    total_modes: int
    nu: int

    def __post_init__(self):
        if self.n_in < 0 or self.nu < 0:
            raise ValueError("particle numbers must be >= 0")
        if not 1 <= self.m <= self.total_modes:
            raise ValueError(f"need 1 <= m <= M, got m={self.m}, M={self.total_modes}")


def block_dimension(k: int, m: int) -> int:
    """Number of ways to put ``k`` bosons into ``m`` modes."""
    if k < 0 or m < 1:
        raise ValueError(f"need k >= 0 and m >= 1, got k={k}, m={m}")
    return math.comb(k + m - 1, k)


def _block_dimension0(k: int, m: int) -> int:
    # zero modes hold only the vacuum
    if m == 0:
        return 1 if k == 0 else 0
    return block_dimension(k, m)


def total_dimension(n_in: int, modes: int) -> int:
    return math.comb(n_in + modes - 1, n_in)


def split_dimension(n_in: int, modes: int, m: int) -> int:
    """``sum_k D_k^(m) D_(N-k)^(M-m)``, which should equal :func:`total_dimension`."""
    if not 1 <= m <= modes:
        raise ValueError(f"need 1 <= m <= M, got m={m}, M={modes}")
    return sum(
        _block_dimension0(k, m) * _block_dimension0(n_in - k, modes - m) for k in range(n_in + 1)
    )


def _block_weights(n_in: int, m: int) -> np.ndarray:
    return np.array([block_dimension(k, m) for k in range(n_in + 1)], dtype=np.float64)


def fidelity_multimode(resource: ResourceState, n_in: int, m: int) -> float:
    """Haar-averaged fidelity when the first party holds ``m`` modes.

    The pair of modes (first set, teleported mode) spans ``D = C(N+m, N)``
    states; at ``m = 1`` this is the two-mode fidelity.
    """
    d_k = _block_weights(n_in, m)
    dim = float(d_k.sum())
    a = diagonal_sum_matrix(resource.matrix, n_in)
    total = d_k @ a @ d_k + d_k @ np.diag(a)
    if abs(total.imag) > IMAG_TOL * max(1.0, abs(total.real)):
        raise StateError(f"imaginary residue {total.imag:.3e} in Hermitian sum")
    return float(total.real) / (dim * (dim + 1.0))


def fidelity_multimode_loops(resource: ResourceState, n_in: int, m: int) -> float:
    """Same quantity summed sector by sector, as a reference for tests."""
    d_k = _block_weights(n_in, m)
    dim = d_k.sum()
    rho = resource.matrix
    nu = resource.n_particles
    total = 0.0
    for l in range(-n_in, nu + 1):
        lo, hi = max(0, -l), min(n_in, nu - l)
        for k in range(lo, hi + 1):
            total += d_k[k] * rho[k + l, k + l].real
            for j in range(lo, hi + 1):
                total += d_k[k] * d_k[j] * rho[k + l, j + l].real
    return total / (dim * (dim + 1.0))


def fidelity_multimode_monte_carlo(
    resource: ResourceState, n_in: int, m: int, samples: int, seed: int
):
    """Estimate from random pure states of the ``D``-dimensional first system.

    Only the total weight ``P_k`` of each particle-number block enters the
    overlap, and for a uniformly random state those weights are Dirichlet
    distributed with parameters ``D_k``, so they are drawn directly.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    g = rng.standard_gamma(_block_weights(n_in, m), size=(samples, n_in + 1))
    p = g / g.sum(axis=1, keepdims=True)
    return _mean_stderr(fidelity_samples(p, resource.matrix.real, n_in))


def product_resource_lower_bound(n_in: int, nu: int, m: int) -> float:
    """Chance that ``m`` separate maximally entangled runs are all exact."""
    if nu < n_in:
        raise ValueError(f"needs nu >= N (got N={n_in}, nu={nu})")
    if m < 1:
        raise ValueError("m must be >= 1")
    return ((nu - n_in + 1) / (nu + 1)) ** m
