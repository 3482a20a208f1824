"""Teleportation figures of merit: Haar averages, closed forms and Monte Carlo."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.special import gammaln

from . import kernels
from .fock import PureNumberState, ResourceState, StateError
from .protocol import (
    OutcomeRecord,
    TeleportReport,
    averaged_channel,
    cardinality,
    conditional_fidelity,
    outcomes,
    sector_window,
)

IMAG_TOL = 1e-12
TRIANGLE_SLACK = 1e-12

# Samples per random stream. Sample i always comes from stream i // CHUNK,
# so any split of the index range reproduces the same draws.
CHUNK = 4096
# Samples held in memory at once by the Monte Carlo estimators.
BLOCK = 32768


def haar_moment(alpha: float, beta: Optional[float], n_in: int) -> float:
    """Haar average of ``|c_k|^alpha`` (``beta=None``) or ``|c_k|^alpha |c_j|^beta``, k != j."""
    if alpha <= -2 or (beta is not None and beta <= -2):
        raise ValueError(f"moments need alpha, beta > -2 (got {alpha}, {beta})")
    if beta is None:
        log = gammaln(1 + alpha / 2) + gammaln(n_in + 1) - gammaln(n_in + 1 + alpha / 2)
    else:
        log = (
            gammaln(1 + alpha / 2)
            + gammaln(1 + beta / 2)
            + gammaln(n_in + 1)
            - gammaln(n_in + 1 + (alpha + beta) / 2)
        )
    return float(np.exp(log))


def _stream(seed: int, chunk: int, dim: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk,))))
    z = rng.standard_normal((CHUNK, 2, dim))
    return z[:, 0, :] + 1j * z[:, 1, :]


def haar_coefficients(dim: int, seed: int, start: int, count: int) -> np.ndarray:
    """Unit vectors for sample indices ``start .. start+count-1``, shape (count, dim).

    Normalized i.i.d. complex Gaussians are Haar distributed on the unit sphere.
    """
    if count <= 0:
        return np.zeros((0, dim), dtype=np.complex128)
    first, last = start // CHUNK, (start + count - 1) // CHUNK
    z = np.concatenate([_stream(seed, c, dim) for c in range(first, last + 1)])
    z = z[start - first * CHUNK : start - first * CHUNK + count]
    return z / np.linalg.norm(z, axis=1, keepdims=True)


@dataclass
class HaarSampler:
    """Deterministic source of Haar-random pure states of ``dim`` components."""

    dim: int
    seed: int
    counter: int = 0

    def draw(self, count: int) -> np.ndarray:
        out = haar_coefficients(self.dim, self.seed, self.counter, count)
        self.counter += count
        return out


def sample_haar(sampler: HaarSampler) -> PureNumberState:
    c = sampler.draw(1)[0]
    return PureNumberState.normalized(c)


def _weighted_sums(resource: ResourceState, n_in: int):
    re, im, ab = kernels.band_sums(resource.matrix, resource.abs_matrix, n_in)
    if abs(im) > IMAG_TOL:
        raise StateError(f"imaginary residue {im:.3e} in Hermitian sum")
    return re, ab


def fidelity_closed_form(resource: ResourceState, n_in: int) -> float:
    re, _ = _weighted_sums(resource, n_in)
    return 2.0 / (n_in + 2) * (1.0 + re / (2.0 * (n_in + 1)))


def avg_final_entanglement(resource: ResourceState, n_in: int) -> float:
    _, ab = _weighted_sums(resource, n_in)
    return math.pi / 8.0 * ab / (n_in + 1)


def triangle_bound_check(resource: ResourceState, n_in: int) -> bool:
    f = fidelity_closed_form(resource, n_in)
    e = avg_final_entanglement(resource, n_in)
    return 8.0 * e / math.pi >= (n_in + 2) * f - 2.0 - TRIANGLE_SLACK


def _mean_stderr(values: np.ndarray):
    mean = float(np.mean(values))
    if values.size < 2:
        return mean, math.nan
    return mean, float(np.std(values, ddof=1) / math.sqrt(values.size))


@lru_cache(maxsize=8)
def _cached_block(dim: int, seed: int, start: int, count: int) -> np.ndarray:
    # sweeps reuse the same draws for every resource at a given N
    c = haar_coefficients(dim, seed, start, count)
    c.setflags(write=False)
    return c


def _monte_carlo(per_block, dim: int, samples: int, seed: int):
    if samples < 1:
        raise ValueError("samples must be >= 1")
    parts = []
    for start in range(0, samples, BLOCK):
        c = _cached_block(dim, seed, start, min(BLOCK, samples - start))
        parts.append(per_block(c))
    return _mean_stderr(np.concatenate(parts))


def fidelity_samples_via_channel(resource: ResourceState, n_in: int, coeffs: np.ndarray) -> np.ndarray:
    """Per-sample ``<psi|T[psi]|psi>`` through :func:`averaged_channel` (slow reference path)."""
    out = np.empty(coeffs.shape[0])
    for i, c in enumerate(coeffs):
        psi = PureNumberState.normalized(c)
        out[i] = conditional_fidelity(psi, averaged_channel(psi, resource))
    return out


def fidelity_monte_carlo(
    resource: ResourceState, n_in: int, samples: int, seed: int, method: str = "kernel"
):
    """Haar-sampled estimate of the teleportation fidelity and its standard error."""
    rho_re = resource.matrix.real
    if method == "kernel":
        per_block = lambda c: kernels.fidelity_samples(np.abs(c) ** 2, rho_re, n_in)
    elif method == "channel":
        per_block = lambda c: fidelity_samples_via_channel(resource, n_in, c)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _monte_carlo(per_block, n_in + 1, samples, seed)


def avg_entanglement_monte_carlo(resource: ResourceState, n_in: int, samples: int, seed: int):
    """Haar-sampled estimate of the outcome-averaged final negativity."""
    absrho = resource.abs_matrix
    return _monte_carlo(
        lambda c: kernels.entanglement_samples(np.abs(c), absrho, n_in), n_in + 1, samples, seed
    )


def haar_negativity_monte_carlo(n_in: int, samples: int, seed: int):
    """Haar average of the negativity of the input state itself."""

    def per_block(c):
        a = np.abs(c)
        return 0.5 * (np.sum(a, axis=1) ** 2 - np.sum(a * a, axis=1))

    return _monte_carlo(per_block, n_in + 1, samples, seed)


def teleport_report(resource: ResourceState, n_in: int) -> TeleportReport:
    """Haar-averaged per-outcome breakdown.

    For each outcome: mean probability ``<p>``, and the conditional fidelity
    and negativity weighted by ``p`` (``<p F> / <p>``, ``<p N> / <p>``), so
    that ``sum <p> F = f`` and ``sum <p> N = E``.
    """
    nu = resource.n_particles
    rho = resource.matrix
    absrho = resource.abs_matrix
    second = haar_moment(2, 2, n_in)  # <|c_k|^2 |c_j|^2>, k != j
    fourth = haar_moment(4, None, n_in)
    cross = haar_moment(1, 1, n_in)  # <|c_k| |c_j|>, k != j
    records = []
    for label in outcomes(n_in, nu):
        c = cardinality(label.l, n_in, nu)
        lo, hi = sector_window(label.l, n_in, nu)
        sub = rho[lo + label.l : hi + label.l + 1, lo + label.l : hi + label.l + 1]
        asub = absrho[lo + label.l : hi + label.l + 1, lo + label.l : hi + label.l + 1]
        diag = float(np.trace(sub).real)
        p = diag / (n_in + 1) / c
        pf = (fourth * diag + second * float((sub.sum() - np.trace(sub)).real)) / c
        pn = 0.5 * cross * float(asub.sum() - np.trace(asub)) / c
        if p <= 0:
            records.append(OutcomeRecord(label, 0.0, math.nan, math.nan))
        else:
            records.append(OutcomeRecord(label, p, pf / p, pn / p))
    return TeleportReport(
        fidelity=fidelity_closed_form(resource, n_in),
        avg_entanglement=avg_final_entanglement(resource, n_in),
        per_outcome=records,
    )
