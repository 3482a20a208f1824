"""Number-conserving Fock-space primitives.

Two-mode states with a fixed total ``n`` are stored over the label ``k``
(particles in the first mode; the second mode holds ``n - k``). Every
container validates itself on construction and is read-only afterwards.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
NORM_TOL = 1e-12


class StateError(ValueError):
    """Raised when a state container violates its invariants."""


class AnnihilatedError(StateError):
    """Raised when an operator maps every label of a joint state to zero."""


def _frozen(arr, dtype=np.complex128):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def _check_hermitian(mat, what):
    scale = max(1.0, float(np.max(np.abs(mat)))) if mat.size else 1.0
    diff = np.abs(mat - mat.conj().T)
    worst = float(diff.max()) if diff.size else 0.0
    if worst > HERMITIAN_TOL * scale:
        k, j = np.unravel_index(int(np.argmax(diff)), diff.shape)
        raise StateError(
            f"{what} is not Hermitian: |rho[{k},{j}] - conj(rho[{j},{k}])| = {worst:.3e}"
        )


def _check_psd(mat, what, scale=1.0):
    lowest = float(np.linalg.eigvalsh(mat)[0]) if mat.size else 0.0
    if lowest < -PSD_TOL * max(scale, 1e-300):
        raise StateError(f"{what} is not positive semidefinite: min eigenvalue {lowest:.3e}")


def log_binomial(n: int, k: int) -> float:
    """Natural log of the binomial coefficient C(n, k)."""
    if k < 0 or k > n:
        raise ValueError(f"log_binomial needs 0 <= k <= n, got n={n}, k={k}")
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


@dataclass(frozen=True)
class FockLabel:
    occupations: tuple
    total: int

    def __post_init__(self):
        occ = tuple(int(x) for x in self.occupations)
        if any(x < 0 for x in occ):
            raise StateError(f"negative occupation in {occ}")
        if sum(occ) != self.total:
            raise StateError(f"occupations {occ} do not sum to {self.total}")
        object.__setattr__(self, "occupations", occ)

    @classmethod
    def of(cls, *occupations: int) -> "FockLabel":
        return cls(tuple(occupations), sum(occupations))


@dataclass(frozen=True)
class PureNumberState:
    """``sum_k c_k |k>|N-k>`` with ``N = n_particles``."""

    n_particles: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = _frozen(self.coeffs)
        if c.ndim != 1 or c.shape[0] != self.n_particles + 1:
            raise StateError(
                f"expected {self.n_particles + 1} coefficients, got shape {c.shape}"
            )
        norm = float(np.sum(np.abs(c) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise StateError(f"coefficients are not normalized: sum |c|^2 = {norm!r}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def normalized(cls, coeffs) -> "PureNumberState":
        c = np.asarray(coeffs, dtype=np.complex128)
        return cls(c.shape[0] - 1, c / np.linalg.norm(c))

    @classmethod
    def fock(cls, n_particles: int, k: int) -> "PureNumberState":
        c = np.zeros(n_particles + 1, dtype=np.complex128)
        c[k] = 1.0
        return cls(n_particles, c)

    def density(self) -> np.ndarray:
        return np.outer(self.coeffs, self.coeffs.conj())


@dataclass(frozen=True)
class ResourceState:
    """Shared two-mode resource ``rho_34`` over labels ``k = 0..nu``.

    ``amplitude_moduli`` is kept for pure states built from amplitudes so
    that ``|rho[k, j]|`` can be formed without rounding through a phase.
    """

    n_particles: int
    matrix: np.ndarray
    amplitude_moduli: Optional[np.ndarray] = field(default=None, compare=False)
    check_psd: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        m = _frozen(self.matrix)
        dim = self.n_particles + 1
        if m.shape != (dim, dim):
            raise StateError(f"resource matrix must be {dim}x{dim}, got {m.shape}")
        _check_hermitian(m, "resource state")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise StateError(f"resource state trace is {tr!r}, expected 1")
        if self.check_psd:
            _check_psd(m, "resource state")
        object.__setattr__(self, "matrix", m)
        if self.amplitude_moduli is not None:
            object.__setattr__(
                self, "amplitude_moduli", _frozen(self.amplitude_moduli, np.float64)
            )

    @classmethod
    def from_amplitudes(cls, amplitudes, moduli=None) -> "ResourceState":
        """Pure resource ``|g><g|``; ``moduli`` overrides ``|g_k|`` if given."""
        g = np.asarray(amplitudes, dtype=np.complex128)
        norm = float(np.sum(np.abs(g) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise StateError(f"resource amplitudes are not normalized: {norm!r}")
        if moduli is None:
            moduli = np.abs(g)
        return cls(g.shape[0] - 1, np.outer(g, g.conj()), np.asarray(moduli), check_psd=False)

    @property
    def nu(self) -> int:
        return self.n_particles

    @property
    def abs_matrix(self) -> np.ndarray:
        if self.amplitude_moduli is not None:
            return np.outer(self.amplitude_moduli, self.amplitude_moduli)
        return np.abs(self.matrix)


@dataclass(frozen=True)
class TwoModeDensity:
    """Two-mode density over labels ``k = 0..n_particles``.

    With ``normalized=False`` the trace may be anywhere in (0, 1]; this is
    how ``p * rho`` for a single measurement outcome is carried around.
    """

    n_particles: int
    matrix: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        m = _frozen(self.matrix)
        dim = self.n_particles + 1
        if m.shape != (dim, dim):
            raise StateError(f"two-mode matrix must be {dim}x{dim}, got {m.shape}")
        _check_hermitian(m, "two-mode state")
        tr = float(np.trace(m).real)
        if self.normalized:
            if abs(tr - 1.0) > TRACE_TOL:
                raise StateError(f"normalized two-mode state has trace {tr!r}")
        elif not (0.0 < tr <= 1.0 + TRACE_TOL):
            raise StateError(f"unnormalized two-mode state has trace {tr!r} outside (0, 1]")
        _check_psd(m, "two-mode state", scale=tr)
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def normalize(self) -> "TwoModeDensity":
        return TwoModeDensity(self.n_particles, self.matrix / self.trace, True)


def negativity(state: TwoModeDensity) -> float:
    """Negativity of a fixed-number two-mode state: half the off-diagonal l1 norm."""
    off = np.abs(state.matrix)
    np.fill_diagonal(off, 0.0)
    return 0.5 * float(np.sum(off))


def negativity_via_partial_transpose(state: TwoModeDensity) -> float:
    """Negativity from the spectrum of the partial transpose.

    The state is embedded in the (n+1)^2-dimensional product space spanned
    by ``|k> (x) |n-k>`` and the second factor is transposed.
    """
    n = state.n_particles
    dim = n + 1
    big = np.zeros((dim, dim, dim, dim), dtype=np.complex128)
    k = np.arange(dim)
    # rho[k,j] |k><j| (x) |n-k><n-j|  ->  transposed second factor: |n-j><n-k|
    big[k[:, None], n - k[None, :], k[None, :], n - k[:, None]] = state.matrix
    pt = big.reshape(dim * dim, dim * dim)
    eig = np.linalg.eigvalsh(pt)
    return 0.5 * float(np.sum(np.abs(eig)) - state.trace)


@dataclass(frozen=True)
class JointState:
    """Density operator of modes 1-4 over an explicit list of Fock labels.

    ``labels[i] = (n1, n2, n3, n4)``. The product of an input state with
    ``N`` particles and a resource with ``nu`` particles lives on the
    (N+1)(nu+1) labels ``(k, N-k, s, nu-s)``; operations applied later may
    move weight to other labels.
    """

    n_in: int
    n_res: int
    labels: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        lab = np.array(self.labels, dtype=np.int64, copy=True)
        if lab.ndim != 2 or lab.shape[1] != 4:
            raise StateError(f"labels must be an (n, 4) array, got {lab.shape}")
        if np.any(lab < 0):
            raise StateError("negative occupation in joint-state labels")
        if len({tuple(r) for r in lab}) != lab.shape[0]:
            raise StateError("duplicate joint-state labels")
        lab.setflags(write=False)
        m = _frozen(self.matrix)
        if m.shape != (lab.shape[0], lab.shape[0]):
            raise StateError(f"joint matrix shape {m.shape} does not match {lab.shape[0]} labels")
        _check_hermitian(m, "joint state")
        tr = float(np.trace(m).real)
        if not (-TRACE_TOL <= tr <= 1.0 + TRACE_TOL):
            raise StateError(f"joint state trace {tr!r} outside [0, 1]")
        object.__setattr__(self, "labels", lab)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def product(cls, initial: PureNumberState, resource: ResourceState) -> "JointState":
        n, nu = initial.n_particles, resource.n_particles
        labels = [(k, n - k, s, nu - s) for k in range(n + 1) for s in range(nu + 1)]
        return cls(n, nu, np.array(labels), np.kron(initial.density(), resource.matrix))

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def apply_local(self, modes, action) -> "JointState":
        """Apply ``X rho X^dag`` for an operator ``X`` acting on ``modes``.

        ``action(sub)`` maps the occupation tuple of ``modes`` to a list of
        ``(new_sub, amplitude)`` pairs, i.e. one column of ``X``.
        """
        modes = tuple(modes)
        out_index = {}
        entries = []
        for col, lab in enumerate(self.labels):
            sub = tuple(int(lab[m]) for m in modes)
            for new_sub, amp in action(sub):
                if amp == 0:
                    continue
                new = lab.copy()
                for m, v in zip(modes, new_sub):
                    new[m] = v
                key = tuple(int(x) for x in new)
                row = out_index.setdefault(key, len(out_index))
                entries.append((row, col, amp))
        if not out_index:
            raise AnnihilatedError("operator annihilates every label of the joint state")
        op = np.zeros((len(out_index), self.labels.shape[0]), dtype=np.complex128)
        for row, col, amp in entries:
            op[row, col] += amp
        new_labels = np.array(list(out_index.keys()), dtype=np.int64)
        return JointState(self.n_in, self.n_res, new_labels, op @ self.matrix @ op.conj().T)


def partial_trace_23_sectors(joint: JointState) -> dict:
    """Trace out modes 2 and 3; one unnormalized two-mode block per total n1 + n4.

    Coherences between different totals cannot survive the trace because
    the joint state lives at fixed total particle number.
    """
    rows = {}
    for i, (n1, n2, n3, n4) in enumerate(joint.labels):
        rows.setdefault((int(n2), int(n3)), []).append((i, int(n1), int(n4)))
    blocks = {}
    for members in rows.values():
        for i, a1, a4 in members:
            for j, b1, b4 in members:
                total = a1 + a4
                if b1 + b4 != total:
                    if abs(joint.matrix[i, j]) > HERMITIAN_TOL:
                        raise StateError(
                            "joint state has coherence between different n1+n4 sectors"
                        )
                    continue
                blk = blocks.setdefault(total, np.zeros((total + 1, total + 1), dtype=np.complex128))
                blk[a1, b1] += joint.matrix[i, j]
    out = {}
    for total in sorted(blocks):
        blk = blocks[total]
        if np.trace(blk).real > 0:
            out[total] = TwoModeDensity(total, blk, normalized=False)
    return out


def partial_trace_23(joint: JointState) -> TwoModeDensity:
    """Reduced (unnormalized) state of modes 1 and 4.

    Requires the reduced state to sit in a single particle-number sector,
    which is the case after any of the protocol's measurement projections.
    """
    sectors = partial_trace_23_sectors(joint)
    if len(sectors) != 1:
        raise StateError(
            f"reduced state spans particle-number sectors {sorted(sectors)}; "
            "use partial_trace_23_sectors"
        )
    return next(iter(sectors.values()))
