"""Hot numeric kernels, each in two flavours.

The loop versions follow the outcome sum literally (sector ``l``, then the
Fock window ``k, j``) and are compiled with numba when it is available.
The sector sums do not depend on the sampled state, so they are formed once
per call and each sample then costs one small quadratic form.
The numpy versions use the fact that summing a resource matrix over all
sectors collapses to a Toeplitz matrix of its diagonal sums, so the two
paths are independent enough to cross-check each other.

Which flavour backs the public names is decided once, at import time, by
:mod:`bosetele._accel`.
"""
import numpy as np

from ._accel import BACKEND, HAVE_NUMBA, njit

__all__ = [
    "BACKEND",
    "band_sums",
    "fidelity_samples",
    "entanglement_samples",
    "diagonal_sum_matrix",
    "IMPLEMENTATIONS",
]


# -- loop kernels ------------------------------------------------------------

def _band_sums_loops(rho, absrho, n_in):
    n = rho.shape[0]
    re = 0.0
    im = 0.0
    ab = 0.0
    for k in range(n):
        lo = max(0, k - n_in)
        hi = min(n, k + n_in + 1)
        for j in range(lo, hi):
            if j == k:
                continue
            w = n_in + 1 - abs(k - j)
            re += w * rho[k, j].real
            im += w * rho[k, j].imag
            ab += w * absrho[k, j]
    return re, im, ab


def _fidelity_samples_loops(p, rho_re, n_in):
    # sector sums first, one sector l at a time, then one quadratic form per sample
    nu = rho_re.shape[0] - 1
    size = n_in + 1
    a = np.zeros((size, size))
    for l in range(-n_in, nu + 1):
        lo = max(0, -l)
        hi = min(n_in, nu - l)
        for k in range(lo, hi + 1):
            for j in range(lo, hi + 1):
                a[k, j] += rho_re[k + l, j + l]
    n_samples = p.shape[0]
    out = np.empty(n_samples)
    for s in range(n_samples):
        total = 0.0
        for k in range(size):
            row = 0.0
            for j in range(size):
                row += a[k, j] * p[s, j]
            total += p[s, k] * row
        out[s] = total
    return out


def _entanglement_samples_loops(amp, absrho, n_in):
    nu = absrho.shape[0] - 1
    size = n_in + 1
    b = np.zeros((size, size))
    for l in range(-n_in, nu + 1):
        lo = max(0, -l)
        hi = min(n_in, nu - l)
        for k in range(lo, hi + 1):
            for j in range(lo, hi + 1):
                if j != k:
                    b[k, j] += absrho[k + l, j + l]
    n_samples = amp.shape[0]
    out = np.empty(n_samples)
    for s in range(n_samples):
        total = 0.0
        for k in range(size):
            row = 0.0
            for j in range(size):
                row += b[k, j] * amp[s, j]
            total += amp[s, k] * row
        out[s] = 0.5 * total
    return out


# -- numpy kernels -----------------------------------------------------------

def diagonal_sum_matrix(mat, n_in):
    """Return the (N+1)x(N+1) matrix ``A[k, j] = trace(mat, offset=j-k)``.

    This is ``sum_l mat[k+l, j+l]`` over every sector ``l`` whose window
    contains both ``k`` and ``j``.
    """
    mat = np.asarray(mat)
    size = n_in + 1
    offsets = np.arange(-n_in, n_in + 1)
    traces = np.array([np.trace(mat, offset=int(d)) for d in offsets])
    idx = np.arange(size)
    return traces[(idx[None, :] - idx[:, None]) + n_in]


def _band_sums_numpy(rho, absrho, n_in):
    n = rho.shape[0]
    re = 0.0
    im = 0.0
    ab = 0.0
    for d in range(1, min(n_in, n - 1) + 1):
        w = n_in + 1 - d
        t = np.trace(rho, offset=d) + np.trace(rho, offset=-d)
        re += w * t.real
        im += w * t.imag
        ab += w * (np.trace(absrho, offset=d) + np.trace(absrho, offset=-d))
    return float(re), float(im), float(ab)


def _fidelity_samples_numpy(p, rho_re, n_in):
    a = diagonal_sum_matrix(rho_re, n_in)
    return np.einsum("si,ij,sj->s", p, a, p)


def _entanglement_samples_numpy(a, absrho, n_in):
    b = diagonal_sum_matrix(absrho, n_in)
    np.fill_diagonal(b, 0.0)
    return 0.5 * np.einsum("si,ij,sj->s", a, b, a)


IMPLEMENTATIONS = {
    "numpy": {
        "band_sums": _band_sums_numpy,
        "fidelity_samples": _fidelity_samples_numpy,
        "entanglement_samples": _entanglement_samples_numpy,
    },
}

if HAVE_NUMBA:
    IMPLEMENTATIONS["numba"] = {
        "band_sums": njit(cache=True)(_band_sums_loops),
        "fidelity_samples": njit(cache=True)(_fidelity_samples_loops),
        "entanglement_samples": njit(cache=True)(_entanglement_samples_loops),
    }

_active = IMPLEMENTATIONS[BACKEND]


def band_sums(rho, absrho, n_in):
    """Weighted off-diagonal sums ``sum_{k!=j} max(0, N+1-|k-j|) x[k, j]``.

    Returns ``(real part, imaginary part, sum over |x|)``; the first two use
    ``rho``, the third ``absrho``.
    """
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    absrho = np.ascontiguousarray(absrho, dtype=np.float64)
    return _active["band_sums"](rho, absrho, int(n_in))


def fidelity_samples(p, rho_re, n_in):
    """Per-sample overlap ``<psi|T[psi]|psi>`` from populations ``p = |c|^2``."""
    p = np.ascontiguousarray(p, dtype=np.float64)
    rho_re = np.ascontiguousarray(rho_re, dtype=np.float64)
    return _active["fidelity_samples"](p, rho_re, int(n_in))


def entanglement_samples(a, absrho, n_in):
    """Per-sample outcome-averaged negativity from moduli ``a = |c|``."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    absrho = np.ascontiguousarray(absrho, dtype=np.float64)
    return _active["entanglement_samples"](a, absrho, int(n_in))
