import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bosetele.fock import (
    FockLabel,
    JointState,
    PureNumberState,
    ResourceState,
    StateError,
    TwoModeDensity,
    log_binomial,
    negativity,
    negativity_via_partial_transpose,
    partial_trace_23,
    partial_trace_23_sectors,
)
from bosetele.protocol import OutcomeLabel, build_measurement_basis, bob_correction
from bosetele.resources import ResourceKind, ResourceSpec, build_resource

from conftest import random_resource, random_state


# -- log_binomial --------------------------------------------------------------

def test_log_binomial_small():
    assert log_binomial(4, 2) == pytest.approx(math.log(6), abs=1e-15)
    assert log_binomial(17, 0) == 0.0


def test_log_binomial_exact_up_to_60():
    for n in range(61):
        for k in range(n + 1):
            exact = math.comb(n, k)
            assert abs(math.exp(log_binomial(n, k)) - exact) <= 1e-12 * exact


def test_log_binomial_large_matches_big_integer():
    # math.log of a Python int is accurate for integers of any size
    ref = math.log(math.comb(300, 150))
    # exp(a) / exp(b) - 1 is the relative error of the binomial itself
    assert abs(math.expm1(log_binomial(300, 150) - ref)) <= 1e-10


@pytest.mark.parametrize("n,k", [(3, -1), (3, 4)])
def test_log_binomial_domain(n, k):
    with pytest.raises(ValueError):
        log_binomial(n, k)


# -- containers ------------------------------------------------------------------

def test_fock_label():
    lab = FockLabel.of(2, 0, 1)
    assert lab.total == 3
    with pytest.raises(StateError):
        FockLabel((1, -1), 0)
    with pytest.raises(StateError):
        FockLabel((1, 1), 3)


def test_pure_state_checks():
    with pytest.raises(StateError):
        PureNumberState(2, np.array([1.0, 0.0]))
    with pytest.raises(StateError):
        PureNumberState(1, np.array([1.0, 1.0]))
    psi = PureNumberState.normalized([1, 1j])
    assert np.sum(np.abs(psi.coeffs) ** 2) == pytest.approx(1, abs=1e-15)
    assert not psi.coeffs.flags.writeable


def test_resource_rejects_bad_matrices():
    m = np.eye(3) / 3
    bad = m.astype(complex)
    bad[0, 1] = 1e-6
    with pytest.raises(StateError, match=r"rho\[0,1\]"):
        ResourceState(2, bad)
    with pytest.raises(StateError, match="trace"):
        ResourceState(2, np.eye(3) / 2)
    with pytest.raises(StateError, match="positive"):
        ResourceState(1, np.array([[1.2, 0], [0, -0.2]]))
    with pytest.raises(StateError):
        ResourceState(2, np.eye(2) / 2)


def test_two_mode_unnormalized_trace_range():
    TwoModeDensity(1, np.diag([0.2, 0.1]), normalized=False)
    with pytest.raises(StateError):
        TwoModeDensity(1, np.diag([0.2, 0.1]))
    with pytest.raises(StateError):
        TwoModeDensity(1, np.diag([0.0, 0.0]), normalized=False)


# -- negativity ------------------------------------------------------------------

def test_negativity_diagonal_is_zero():
    st_ = TwoModeDensity(3, np.diag([0.1, 0.2, 0.3, 0.4]))
    assert negativity(st_) == 0.0
    assert abs(negativity_via_partial_transpose(st_)) < 1e-14


def test_negativity_max_ent_nu1_explicit_partial_transpose():
    # (|0,1> + |1,0>)/sqrt2 on two qubit-like modes; partial transpose by hand
    psi = np.zeros(4)
    psi[0 * 2 + 1] = psi[1 * 2 + 0] = 1 / math.sqrt(2)
    rho = np.outer(psi, psi).reshape(2, 2, 2, 2)
    pt = rho.transpose(0, 3, 2, 1).reshape(4, 4)
    eig = np.linalg.eigvalsh(pt)
    expected = (np.sum(np.abs(eig)) - 1) / 2
    assert expected == pytest.approx(0.5)
    state = TwoModeDensity(1, build_resource(ResourceSpec(ResourceKind.MAX_ENT, 1)).matrix)
    assert negativity(state) == pytest.approx(0.5, abs=1e-15)
    assert negativity_via_partial_transpose(state) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("nu", [1, 2, 5, 9])
def test_negativity_max_ent_general(nu):
    state = TwoModeDensity(nu, build_resource(ResourceSpec(ResourceKind.MAX_ENT, nu)).matrix)
    assert negativity(state) == pytest.approx(nu / 2, abs=1e-12)
    assert negativity_via_partial_transpose(state) == pytest.approx(nu / 2, abs=1e-10)


@pytest.mark.parametrize("nu", [1, 2, 4, 7])
def test_negativity_noon(nu):
    state = TwoModeDensity(nu, build_resource(ResourceSpec(ResourceKind.NOON, nu)).matrix)
    assert negativity_via_partial_transpose(state) == pytest.approx(0.5, abs=1e-12)
    assert negativity(state) == pytest.approx(0.5, abs=1e-15)


def test_negativity_coherent_two_routes():
    state = TwoModeDensity(2, build_resource(ResourceSpec(ResourceKind.SU2_COHERENT, 2)).matrix)
    assert negativity(state) == pytest.approx(negativity_via_partial_transpose(state), abs=1e-12)


@given(st.integers(0, 7), st.integers(0, 2**32 - 1), st.booleans())
def test_negativity_routes_agree(n, seed, pure):
    rng = np.random.default_rng(seed)
    res = random_resource(rng, n, rank=1 if pure else None)
    state = TwoModeDensity(n, res.matrix)
    assert abs(negativity(state) - negativity_via_partial_transpose(state)) <= 1e-10


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_negativity_faithful(n, seed):
    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.ones(n + 1))
    diag = TwoModeDensity(n, np.diag(w))
    assert negativity(diag) == 0.0
    # mixing in any coherence makes it strictly positive
    res = random_resource(rng, n)
    mixed = TwoModeDensity(n, 0.5 * np.diag(w) + 0.5 * res.matrix)
    assert negativity(mixed) > 0
    assert negativity_via_partial_transpose(mixed) > 1e-12


# -- joint states and partial trace ----------------------------------------------

def test_partial_trace_product_state(rng):
    psi, res = random_state(rng, 2), random_resource(rng, 3)
    joint = JointState.product(psi, res)
    sectors = partial_trace_23_sectors(joint)
    assert sum(b.trace for b in sectors.values()) == pytest.approx(joint.trace, abs=1e-12)
    # the reduced state of a product spans several n1+n4 sectors
    assert len(sectors) > 1
    with pytest.raises(StateError):
        partial_trace_23(joint)


def test_partial_trace_perfect_teleportation(rng):
    n, nu = 1, 2
    psi = random_state(rng, n)
    res = build_resource(ResourceSpec(ResourceKind.MAX_ENT, nu))
    basis = build_measurement_basis(n, nu)
    label = OutcomeLabel(0, 0)
    phi = basis.vector(label)
    support = [tuple(map(int, ij)) for ij in np.argwhere(np.abs(phi) > 0)]
    v = bob_correction(0, 0, n, nu)
    joint = JointState.product(psi, res)
    after = joint.apply_local((1, 2), lambda s: [(t, phi[t] * np.conj(phi[s])) for t in support]).apply_local(
        (3,), lambda s: [((int(i),), v[i, s[0]]) for i in np.flatnonzero(np.abs(v[:, s[0]]) > 0)]
    )
    out = partial_trace_23(after)
    assert out.n_particles == n
    target = psi.density() * out.trace
    assert np.max(np.abs(out.matrix - target)) <= 1e-12


@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 2**32 - 1))
def test_partial_trace_linear_and_trace_preserving(n, nu, seed):
    rng = np.random.default_rng(seed)
    psi = random_state(rng, n)
    r1, r2 = random_resource(rng, nu), random_resource(rng, nu)
    t = rng.uniform()
    j1, j2 = JointState.product(psi, r1), JointState.product(psi, r2)
    mix = JointState(n, nu, j1.labels, t * j1.matrix + (1 - t) * j2.matrix)
    s1, s2, sm = (partial_trace_23_sectors(j) for j in (j1, j2, mix))
    assert sum(b.trace for b in sm.values()) == pytest.approx(mix.trace, abs=1e-12)
    for total, blk in sm.items():
        a = s1[total].matrix if total in s1 else 0
        b = s2[total].matrix if total in s2 else 0
        assert np.max(np.abs(blk.matrix - (t * a + (1 - t) * b))) <= 1e-12


def test_joint_state_validation():
    with pytest.raises(StateError):
        JointState(0, 0, np.array([[0, 0, 0, 0], [0, 0, 0, 0]]), np.eye(2) / 2)
    with pytest.raises(StateError):
        JointState(0, 0, np.array([[0, 0, 0]]), np.eye(1))
