"""Two-mode teleportation protocol.

Alice holds modes 2 and 3, Bob holds mode 4, and mode 1 is a spectator
entangled with mode 2. Alice projects modes 2-3 onto the number-conserving
basis ``|phi^(l,lam)>``, Bob applies ``V4^(l,lam)``.

Two independent routes are provided: closed index formulas
(:func:`apply_measurement`, :func:`averaged_channel`) and an explicit
joint-state simulation (:func:`oracle_full_protocol`) that builds the
projectors and Bob's correction as operators on Fock labels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .fock import (
    AnnihilatedError,
    JointState,
    PureNumberState,
    ResourceState,
    StateError,
    TwoModeDensity,
    negativity,
    partial_trace_23_sectors,
)

ZERO_PROBABILITY = 1e-15


class OutcomeLabel(NamedTuple):
    l: int
    lam: int


class MeasurementResult(NamedTuple):
    probability: float
    state: Optional[TwoModeDensity]  # None when the outcome has zero probability


class OutcomeRecord(NamedTuple):
    label: OutcomeLabel
    probability: float
    fidelity: float
    negativity: float


@dataclass(frozen=True)
class TeleportReport:
    """Figures of merit for one (input, resource) pair or a Haar average.

    ``per_outcome`` holds ``(label, p, F, neg)``; ``F`` and ``neg`` are the
    conditional fidelity and negativity (NaN for zero-probability outcomes).
    """

    fidelity: float
    avg_entanglement: float
    per_outcome: list
    states: dict = field(default_factory=dict, repr=False)
    averaged: Optional[TwoModeDensity] = field(default=None, repr=False)

    @property
    def total_probability(self) -> float:
        return float(sum(rec.probability for rec in self.per_outcome))


def sector_window(l: int, n_in: int, nu: int) -> tuple:
    """Inclusive range of ``k`` (particles left in mode 1) contributing to sector ``l``."""
    return max(0, -l), min(n_in, nu - l)


def cardinality(l: int, n_in: int, nu: int) -> int:
    """Number of phases ``lam`` available in sector ``l``."""
    if not -n_in <= l <= nu:
        raise ValueError(f"sector l={l} outside [-{n_in}, {nu}]")
    lo, hi = sector_window(l, n_in, nu)
    return hi - lo + 1


def outcomes(n_in: int, nu: int) -> list:
    """All outcome labels, ascending in ``l`` then ``lam``."""
    return [
        OutcomeLabel(l, lam)
        for l in range(-n_in, nu + 1)
        for lam in range(cardinality(l, n_in, nu))
    ]


def _check_outcome(outcome, n_in, nu):
    l, lam = outcome
    c = cardinality(l, n_in, nu)
    if not 0 <= lam < c:
        raise ValueError(f"lam={lam} outside [0, {c - 1}] for sector l={l}")
    return OutcomeLabel(int(l), int(lam)), c


@dataclass(frozen=True)
class MeasurementBasis:
    """Alice's basis; ``vectors[i, k2, k3]`` is the amplitude of ``|k2>_2 |k3>_3``."""

    n_in: int
    n_res: int
    labels: tuple
    vectors: np.ndarray

    def vector(self, outcome) -> np.ndarray:
        return self.vectors[self.labels.index(OutcomeLabel(*outcome))]

    def gram(self) -> np.ndarray:
        flat = self.vectors.reshape(len(self.labels), -1)
        return flat.conj() @ flat.T


def build_measurement_basis(n_in: int, nu: int) -> MeasurementBasis:
    labels = tuple(outcomes(n_in, nu))
    vecs = np.zeros((len(labels), n_in + 1, nu + 1), dtype=np.complex128)
    for i, (l, lam) in enumerate(labels):
        c = cardinality(l, n_in, nu)
        lo, hi = sector_window(l, n_in, nu)
        for k in range(lo, hi + 1):
            vecs[i, n_in - k, k + l] = np.exp(2j * np.pi * lam * k / c) / math.sqrt(c)
    vecs.setflags(write=False)
    return MeasurementBasis(n_in, nu, labels, vecs)


def bob_correction(l: int, lam: int, n_in: int, nu: int) -> np.ndarray:
    """Matrix of ``V4^(l,lam)`` on mode-4 occupations ``0..max(N, nu)``.

    Column ``nu-k-l`` is sent to row ``N-k`` with phase ``exp(2 pi i lam k / C_l)``.
    """
    (l, lam), c = _check_outcome((l, lam), n_in, nu)
    dim = max(n_in, nu) + 1
    v = np.zeros((dim, dim), dtype=np.complex128)
    lo, hi = sector_window(l, n_in, nu)
    for k in range(lo, hi + 1):
        v[n_in - k, nu - k - l] = np.exp(2j * np.pi * lam * k / c)
    return v


def _dilation_supports(l, n_in, nu, kappa):
    lo, hi = sector_window(l, n_in, nu)
    shift = nu - n_in - l
    pairs = []
    for k in range(lo, hi + 1):
        pairs.append(((nu - k - l, kappa), (n_in - k, kappa + shift)))
    return pairs


def build_dilated_correction(l: int, lam: int, n_in: int, nu: int, kappa: Optional[int] = None):
    """Number-conserving unitary on modes 4 and 5 that implements ``V4``.

    Returns ``(U, dim4, dim5, kappa)`` with ``U`` acting on the truncated
    product space, index ``n4 * dim5 + n5``. Mode 5 starts in ``|kappa>``;
    the default ``kappa = max(0, l - (nu - N))`` keeps every ancilla
    occupation nonnegative.
    """
    (l, lam), c = _check_outcome((l, lam), n_in, nu)
    shift = nu - n_in - l
    if kappa is None:
        kappa = max(0, -shift)
    if kappa + shift < 0:
        raise ValueError(f"kappa={kappa} leaves a negative ancilla occupation")
    pairs = _dilation_supports(l, n_in, nu, kappa)
    dim4 = max(n_in, nu) + 1
    dim5 = max(kappa, kappa + shift) + 1
    dim = dim4 * dim5

    def idx(n4, n5):
        return n4 * dim5 + n5

    u = np.zeros((dim, dim), dtype=np.complex128)
    used = set()
    lo, _ = sector_window(l, n_in, nu)
    for offset, (src, dst) in enumerate(pairs):
        k = lo + offset
        phase = np.exp(2j * np.pi * lam * k / c)
        s, d = idx(*src), idx(*dst)
        support = {s, d}
        if support & used:
            raise StateError(f"dilation blocks overlap at k={k}")
        used |= support
        if shift == 0:
            u[d, s] = phase
        else:
            u[d, s] = phase
            u[s, d] = np.conj(phase)
    for i in range(dim):
        if i not in used:
            u[i, i] = 1.0
    return u, dim4, dim5, kappa


def dilated_correction_check(
    l: int, lam: int, n_in: int, nu: int, test_state=None, seed: int = 0, tol: float = 1e-10
) -> bool:
    """Check that the dilation is unitary, conserves ``n4 + n5`` and reproduces ``V4``.

    ``test_state`` is a mode-4 density on occupations ``0..max(N, nu)``
    supported on the input window of ``V4``; a random one is drawn if omitted.
    """
    u, dim4, dim5, kappa = build_dilated_correction(l, lam, n_in, nu)
    v = bob_correction(l, lam, n_in, nu)
    if test_state is None:
        lo, hi = sector_window(l, n_in, nu)
        occ = [nu - k - l for k in range(lo, hi + 1)]
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((len(occ), len(occ))) + 1j * rng.standard_normal((len(occ), len(occ)))
        sub = g @ g.conj().T
        sub /= np.trace(sub).real
        test_state = np.zeros((dim4, dim4), dtype=np.complex128)
        test_state[np.ix_(occ, occ)] = sub
    rho4 = np.asarray(test_state, dtype=np.complex128)

    ident = np.eye(u.shape[0])
    unitary = np.max(np.abs(u.conj().T @ u - ident)) <= tol
    n_tot = np.diag([n4 + n5 for n4 in range(dim4) for n5 in range(dim5)]).astype(float)
    conserving = np.max(np.abs(u @ n_tot - n_tot @ u)) <= tol

    anc = np.zeros((dim5, dim5))
    anc[kappa, kappa] = 1.0
    out = u @ np.kron(rho4, anc) @ u.conj().T
    reduced = np.einsum("iaja->ij", out.reshape(dim4, dim5, dim4, dim5))
    reproduces = np.max(np.abs(reduced - v @ rho4 @ v.conj().T)) <= tol
    return bool(unitary and conserving and reproduces)


def _conditional_block(initial, resource, l, n_in, nu):
    """``sum_{k,j in window} rho[k+l, j+l] c_k conj(c_j)``, zero outside the window."""
    c = initial.coeffs
    lo, hi = sector_window(l, n_in, nu)
    block = np.zeros((n_in + 1, n_in + 1), dtype=np.complex128)
    win = slice(lo, hi + 1)
    sub = resource.matrix[lo + l : hi + l + 1, lo + l : hi + l + 1]
    block[win, win] = sub * np.outer(c[win], c[win].conj())
    return block


def apply_measurement(
    initial: PureNumberState, resource: ResourceState, outcome, corrected: bool = True
) -> MeasurementResult:
    """Probability and conditional state of modes 1-4 for one outcome.

    With ``corrected=True`` Bob's ``V4`` has been applied and the state has
    ``N`` particles over labels ``k`` (mode 4 holds ``N-k``). Without it the
    state has ``nu-l`` particles and still carries the measurement phases.
    """
    n_in, nu = initial.n_particles, resource.n_particles
    (l, lam), c = _check_outcome(outcome, n_in, nu)
    block = _conditional_block(initial, resource, l, n_in, nu) / c
    p = float(np.trace(block).real)
    if p <= ZERO_PROBABILITY:
        return MeasurementResult(max(p, 0.0), None)
    if corrected:
        return MeasurementResult(p, TwoModeDensity(n_in, block / p))
    total = nu - l
    k = np.arange(n_in + 1)
    phases = np.exp(2j * np.pi * lam * (k[None, :] - k[:, None]) / c)
    raw = np.zeros((total + 1, total + 1), dtype=np.complex128)
    lo, hi = sector_window(l, n_in, nu)
    win = slice(lo, hi + 1)
    raw[win, win] = (block * phases)[win, win] / p
    return MeasurementResult(p, TwoModeDensity(total, raw))


def averaged_channel(initial: PureNumberState, resource: ResourceState) -> TwoModeDensity:
    """Outcome-averaged output ``T[|psi><psi|]`` of modes 1 and 4."""
    n_in, nu = initial.n_particles, resource.n_particles
    out = np.zeros((n_in + 1, n_in + 1), dtype=np.complex128)
    for l in range(-n_in, nu + 1):
        out += _conditional_block(initial, resource, l, n_in, nu)
    return TwoModeDensity(n_in, out)


def conditional_fidelity(initial: PureNumberState, state: TwoModeDensity) -> float:
    c = initial.coeffs
    return float((c.conj() @ state.matrix @ c).real)


def oracle_full_protocol(
    initial: PureNumberState,
    resource: ResourceState,
    mode4_unitary: Optional[np.ndarray] = None,
) -> TeleportReport:
    """Run the protocol by brute force on the joint state of modes 1-4.

    Each outcome applies ``1 (x) P23 (x) V4`` as an explicit operator on Fock
    labels and traces out modes 2 and 3. ``mode4_unitary`` (on occupations
    ``0..max(N, nu)``) is applied to mode 4 right before ``V4``, which is how
    a redefined correction ``V4 U`` is simulated.
    """
    n_in, nu = initial.n_particles, resource.n_particles
    basis = build_measurement_basis(n_in, nu)
    joint = JointState.product(initial, resource)

    records, states = [], {}
    averaged = np.zeros((n_in + 1, n_in + 1), dtype=np.complex128)
    total_ent = 0.0
    for label, phi in zip(basis.labels, basis.vectors):
        support = [tuple(int(x) for x in ij) for ij in np.argwhere(np.abs(phi) > 0)]

        def project(sub, phi=phi, support=support):
            overlap = np.conj(phi[sub])
            if overlap == 0:
                return []
            return [(s, phi[s] * overlap) for s in support]

        correction = bob_correction(label.l, label.lam, n_in, nu)
        if mode4_unitary is not None:
            correction = correction @ np.asarray(mode4_unitary)

        def correct(sub, v=correction):
            (n4,) = sub
            if n4 >= v.shape[1]:
                return []
            return [((int(i),), v[i, n4]) for i in np.flatnonzero(np.abs(v[:, n4]) > 0)]

        try:
            after = joint.apply_local((1, 2), project).apply_local((3,), correct)
        except AnnihilatedError:
            sectors = {}
        else:
            sectors = partial_trace_23_sectors(after)
        if len(sectors) > 1:
            raise StateError(f"outcome {label} left modes 1+4 in several number sectors")
        unnorm = next(iter(sectors.values())) if sectors else None
        p = unnorm.trace if unnorm is not None else 0.0
        if unnorm is None or p <= ZERO_PROBABILITY:
            records.append(OutcomeRecord(label, max(p, 0.0), math.nan, math.nan))
            states[label] = None
            continue
        if unnorm.n_particles != n_in:
            raise StateError(f"outcome {label} left {unnorm.n_particles} particles in modes 1+4")
        averaged += unnorm.matrix
        cond = unnorm.normalize()
        neg = negativity(cond)
        total_ent += p * neg
        records.append(OutcomeRecord(label, p, conditional_fidelity(initial, cond), neg))
        states[label] = cond

    avg_state = TwoModeDensity(n_in, averaged)
    return TeleportReport(
        fidelity=conditional_fidelity(initial, avg_state),
        avg_entanglement=total_ent,
        per_outcome=records,
        states=states,
        averaged=avg_state,
    )


def analytic_report(initial: PureNumberState, resource: ResourceState) -> TeleportReport:
    """Same quantities as :func:`oracle_full_protocol`, from the index formulas."""
    records, states = [], {}
    total_ent = 0.0
    for label in outcomes(initial.n_particles, resource.n_particles):
        p, state = apply_measurement(initial, resource, label)
        states[label] = state
        if state is None:
            records.append(OutcomeRecord(label, p, math.nan, math.nan))
            continue
        neg = negativity(state)
        total_ent += p * neg
        records.append(OutcomeRecord(label, p, conditional_fidelity(initial, state), neg))
    avg = averaged_channel(initial, resource)
    return TeleportReport(conditional_fidelity(initial, avg), total_ent, records, states, avg)
