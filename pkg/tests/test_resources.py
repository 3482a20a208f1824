import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bosetele.fock import TwoModeDensity, negativity_via_partial_transpose
from bosetele.metrics import avg_final_entanglement, fidelity_closed_form
from bosetele.protocol import oracle_full_protocol
from bosetele.resources import (
    RegimeLabel,
    ResourceKind,
    ResourceSpec,
    absorb_phases,
    analytic_performance,
    bose_hubbard_ground_state,
    bose_hubbard_hamiltonian,
    build_resource,
    catalog,
    classify_regime,
    gaussian_double,
    gaussian_single,
    noon_dilation_two_sided_purity,
    noon_reduction_dilation,
    noon_reduction_dilation_check,
    noon_reduction_map,
    parse_descriptor,
    perfect_probability,
    phase_absorber,
    repeated_teleportation_probability,
    su2_coherent_amplitudes,
)

from conftest import random_state


# -- specs and descriptors --------------------------------------------------------

@pytest.mark.parametrize("nu", [0, 1, 4])
def test_descriptor_round_trip(nu):
    for spec in catalog(nu):
        assert parse_descriptor(spec.descriptor(), nu) == spec


@given(
    st.integers(1, 6),
    st.floats(0, 1),
    st.floats(0, 2 * math.pi, exclude_max=True),
    st.floats(-50, 50).filter(lambda g: abs(g + 1) > 1e-6),
)
def test_descriptor_round_trip_floats(nu, xi, theta, gamma):
    specs = [ResourceSpec(ResourceKind.SU2_COHERENT, nu, xi=xi, theta=theta),
             ResourceSpec(ResourceKind.BOSE_HUBBARD, nu, gamma=gamma)]
    kind = ResourceKind.GAUSSIAN_SINGLE if gamma > -1 else ResourceKind.GAUSSIAN_DOUBLE
    specs.append(ResourceSpec(kind, nu, gamma=gamma))
    for spec in specs:
        assert parse_descriptor(spec.descriptor(), nu) == spec


def test_parse_descriptor_forms():
    assert parse_descriptor(" MaxEnt ", 3) == ResourceSpec(ResourceKind.MAX_ENT, 3)
    spec = parse_descriptor("separable:weights=0.25;0.75", 1)
    assert spec.weights == (0.25, 0.75)
    assert parse_descriptor("noon:n=2", 5).noon_n == 2
    assert parse_descriptor("bh:gamma=-2", 4).gamma == -2.0


@pytest.mark.parametrize(
    "text",
    ["bogus", "maxent:xi=0.5", "su2:xi", "noon:n=7", "su2:xi=1.5", "gauss1:gamma=-2", "gauss2:gamma=0", "bh"],
)
def test_parse_descriptor_errors(text):
    with pytest.raises(ValueError):
        parse_descriptor(text, 4)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind=ResourceKind.MAX_ENT, nu=-1),
        dict(kind=ResourceKind.SEPARABLE, nu=2, weights=(0.5, 0.5)),
        dict(kind=ResourceKind.SEPARABLE, nu=1, weights=(1.5, -0.5)),
        dict(kind=ResourceKind.SEPARABLE, nu=1, weights=(0.5, 0.6)),
        dict(kind=ResourceKind.MAX_ENT_PHASED, nu=2, phases=(0.0,)),
        dict(kind=ResourceKind.NOON, nu=0),
        dict(kind=ResourceKind.NOON, nu=3, n=0),
        dict(kind=ResourceKind.SU2_COHERENT, nu=3, theta=2 * math.pi),
        dict(kind=ResourceKind.BOSE_HUBBARD, nu=3),
        dict(kind=ResourceKind.BOSE_HUBBARD, nu=0, gamma=1.0),
        dict(kind=ResourceKind.GAUSSIAN_SINGLE, nu=3, gamma=math.inf),
    ],
)
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        ResourceSpec(**kwargs)


def test_with_nu():
    spec = ResourceSpec(ResourceKind.SU2_COHERENT, 3, xi=0.2, theta=1.0)
    assert spec.with_nu(9) == ResourceSpec(ResourceKind.SU2_COHERENT, 9, xi=0.2, theta=1.0)


# -- simple resources ----------------------------------------------------------------

def test_separable_weights():
    assert np.allclose(np.diag(build_resource(ResourceSpec(ResourceKind.SEPARABLE, 3)).matrix), 0.25)
    a = build_resource(ResourceSpec(ResourceKind.SEPARABLE, 3, seed=5)).matrix
    b = build_resource(ResourceSpec(ResourceKind.SEPARABLE, 3, seed=5)).matrix
    assert np.array_equal(a, b)
    assert not np.allclose(np.diag(a), 0.25)
    w = (0.1, 0.2, 0.7)
    assert np.allclose(np.diag(build_resource(ResourceSpec(ResourceKind.SEPARABLE, 2, weights=w)).matrix), w)


def test_max_ent_and_noon_matrices():
    m = build_resource(ResourceSpec(ResourceKind.MAX_ENT, 3)).matrix
    assert np.allclose(m, np.full((4, 4), 0.25))
    noon = build_resource(ResourceSpec(ResourceKind.NOON, 4))
    assert noon.n_particles == 4
    expected = np.zeros((5, 5))
    expected[np.ix_([0, 4], [0, 4])] = 0.5
    assert np.allclose(noon.matrix, expected)
    reduced = build_resource(ResourceSpec(ResourceKind.NOON, 6, n=2))
    assert reduced.n_particles == 2


@pytest.mark.parametrize("nu", [0, 1, 3, 8])
def test_su2_small_nu_against_direct_binomial(nu):
    xi, theta = 0.37, 2.1
    g, mod = su2_coherent_amplitudes(nu, xi, theta)
    for k in range(nu + 1):
        direct = math.sqrt(math.comb(nu, k) * xi**k * (1 - xi) ** (nu - k))
        assert mod[k] == pytest.approx(direct, rel=1e-12)
        assert g[k] == pytest.approx(direct * complex(math.cos(theta * (nu / 2 - k)), math.sin(theta * (nu / 2 - k))), abs=1e-14)


def test_su2_large_nu_is_normalized():
    for nu in (300, 1000):
        g, mod = su2_coherent_amplitudes(nu, 0.5, 0.0)
        assert np.all(np.isfinite(mod))
        assert np.sum(mod**2) == pytest.approx(1, abs=1e-12)


def test_su2_edges_are_fock_states():
    _, mod = su2_coherent_amplitudes(5, 0.0, 0.0)
    assert np.array_equal(mod, [1, 0, 0, 0, 0, 0])
    _, mod = su2_coherent_amplitudes(5, 1.0, 0.0)
    assert np.array_equal(mod, [0, 0, 0, 0, 0, 1])


# -- Bose-Hubbard ------------------------------------------------------------------

def _second_quantized_ground_state(nu, gamma, tau=1.0):
    # truncated ladder operators on two modes, projected to nu particles
    dim = nu + 1
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    eye = np.eye(dim)
    a3, a4 = np.kron(a, eye), np.kron(eye, a)
    u = gamma * tau / nu
    h = -tau * (a3.T @ a4 + a4.T @ a3) + u * (a3.T @ a3.T @ a3 @ a3 + a4.T @ a4.T @ a4 @ a4)
    idx = [k * dim + (nu - k) for k in range(dim)]  # |k>_3 |nu-k>_4
    sub = h[np.ix_(idx, idx)]
    w, v = np.linalg.eigh(sub)
    g = v[:, 0]
    return w, g * np.sign(g.sum())


@pytest.mark.parametrize("nu", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("gamma", [-3.0, -0.5, 0.0, 2.0])
def test_bose_hubbard_against_second_quantized_oracle(nu, gamma):
    w, ref = _second_quantized_ground_state(nu, gamma)
    h = bose_hubbard_hamiltonian(nu, gamma)
    assert np.allclose(np.linalg.eigvalsh(h), w, atol=1e-12)
    g = bose_hubbard_ground_state(nu, gamma).coeffs
    assert np.max(np.abs(g - ref)) <= 1e-10


def test_bose_hubbard_sign_and_symmetry():
    for nu in (6, 7, 40):
        for gamma in (-4.0, -1.0, 0.3, 30.0):
            g = bose_hubbard_ground_state(nu, gamma).coeffs
            assert g.sum() > 0
            assert np.allclose(g, g[::-1], atol=1e-12)
            h = bose_hubbard_hamiltonian(nu, gamma)
            e = g @ h @ g
            assert e == pytest.approx(np.linalg.eigvalsh(h)[0], abs=1e-9 * max(1, abs(e)))


def test_bose_hubbard_gamma_zero_is_symmetric_coherent():
    g = bose_hubbard_ground_state(20, 0.0).coeffs
    _, mod = su2_coherent_amplitudes(20, 0.5, 0.0)
    assert abs(g @ mod) > 1 - 1e-10


def test_bose_hubbard_errors():
    with pytest.raises(ValueError):
        bose_hubbard_ground_state(0, 1.0)
    with pytest.raises(ValueError):
        bose_hubbard_ground_state(3, 1.0, tau=0)
    with pytest.raises(ValueError):
        bose_hubbard_hamiltonian(0, 1.0)


def test_gaussians():
    g = gaussian_single(100, -0.5).coeffs
    assert np.sum(g**2) == pytest.approx(1, abs=1e-14)
    assert int(np.argmax(g)) == 50
    d = gaussian_double(100, -3.0).coeffs
    assert d[50] < d.max()  # two peaks away from the middle
    assert np.allclose(d, d[::-1])
    with pytest.raises(ValueError):
        gaussian_single(10, -1.0)
    with pytest.raises(ValueError):
        gaussian_double(10, -1.0)


@pytest.mark.parametrize("gamma,builder", [(-0.5, gaussian_single), (2.0, gaussian_single), (-2.0, gaussian_double)])
def test_gaussians_approximate_exact_ground_state(gamma, builder):
    assert abs(builder(100, gamma).coeffs @ bose_hubbard_ground_state(100, gamma).coeffs) > 0.99


def test_classify_regime():
    nu = 100
    width = nu ** (-2 / 3)
    assert classify_regime(nu, -1.0) is RegimeLabel.CRITICAL
    assert classify_regime(nu, -1 + 0.9 * width) is RegimeLabel.CRITICAL
    assert classify_regime(nu, 0.0) is RegimeLabel.SINGLE_GAUSSIAN
    assert classify_regime(nu, nu * nu / 10) is RegimeLabel.SINGLE_GAUSSIAN
    assert classify_regime(nu, nu * nu) is RegimeLabel.PERTURBATIVE
    assert classify_regime(nu, -2.0) is RegimeLabel.DOUBLE_GAUSSIAN
    assert classify_regime(nu, -10 * math.sqrt(nu)) is RegimeLabel.DOUBLE_GAUSSIAN
    assert classify_regime(nu, -1000.0) is RegimeLabel.PERTURBATIVE


# -- closed-form performance ------------------------------------------------------------

@pytest.mark.parametrize("nu", [0, 1, 3, 6, 10])
def test_analytic_performance_matches_closed_forms(nu):
    for spec in catalog(nu):
        for n in range(1, 8):
            known = analytic_performance(spec, n)
            if known is None:
                continue
            res = build_resource(spec)
            assert fidelity_closed_form(res, n) == pytest.approx(known[0], abs=1e-12)
            assert avg_final_entanglement(res, n) == pytest.approx(known[1], abs=1e-12)


def test_analytic_performance_unknown_cases():
    assert analytic_performance(ResourceSpec(ResourceKind.MAX_ENT, 2), 5) is None
    assert analytic_performance(ResourceSpec(ResourceKind.SU2_COHERENT, 2), 1) is None


def test_max_ent_frozen_values():
    f, e = analytic_performance(ResourceSpec(ResourceKind.MAX_ENT, 5), 2)
    assert f == pytest.approx(1 - 2 / 18, abs=1e-15)
    assert e == pytest.approx(math.pi * 2 * 14 / 144, abs=1e-15)


def test_perfect_probability(rng):
    n, nu = 2, 5
    assert perfect_probability(n, nu) == pytest.approx(4 / 6)
    # the brute-force protocol gives fidelity one on exactly those outcomes
    psi = random_state(rng, n)
    rep = oracle_full_protocol(psi, build_resource(ResourceSpec(ResourceKind.MAX_ENT, nu)))
    exact = sum(r.probability for r in rep.per_outcome if abs(r.fidelity - 1) < 1e-12)
    assert exact == pytest.approx(perfect_probability(n, nu), abs=1e-12)
    assert repeated_teleportation_probability(n, nu, 3) == pytest.approx(1 - (2 / 6) ** 3)
    with pytest.raises(ValueError):
        perfect_probability(5, 2)
    with pytest.raises(ValueError):
        repeated_teleportation_probability(1, 2, 0)


# -- phases ------------------------------------------------------------------------

def test_phase_absorber_restores_max_ent(rng):
    phases = rng.uniform(0, 2 * math.pi, 5)
    phased = build_resource(ResourceSpec(ResourceKind.MAX_ENT_PHASED, 4, phases=tuple(phases)))
    d = phase_absorber(phases)
    assert np.allclose(d.conj().T @ d, np.eye(5))
    fixed = absorb_phases(phased, phases)
    assert np.allclose(fixed.matrix, build_resource(ResourceSpec(ResourceKind.MAX_ENT, 4)).matrix, atol=1e-14)


def test_phases_change_fidelity_but_not_entanglement():
    phased = build_resource(ResourceSpec(ResourceKind.MAX_ENT_PHASED, 4, seed=3))
    plain = build_resource(ResourceSpec(ResourceKind.MAX_ENT, 4))
    assert fidelity_closed_form(phased, 2) < fidelity_closed_form(plain, 2)
    assert avg_final_entanglement(phased, 2) == pytest.approx(avg_final_entanglement(plain, 2), abs=1e-14)


# -- N00N reduction -------------------------------------------------------------------

def test_noon_reduction_map():
    w = noon_reduction_map(4, 2)
    assert w[0, 0] == 1 and w[2, 4] == 1 and w.sum() == 2


@pytest.mark.parametrize("nu", [1, 2, 3, 5])
def test_noon_reduction_dilation(nu):
    for n in range(1, nu + 1):
        assert noon_reduction_dilation_check(nu, n)
    assert np.array_equal(noon_reduction_dilation(nu, nu), np.eye((nu + 1) ** 2))
    with pytest.raises(ValueError):
        noon_reduction_dilation(nu, 0)


def test_noon_two_sided_dilation_purity():
    assert noon_dilation_two_sided_purity(4, 4) == pytest.approx(1.0, abs=1e-14)
    for n in (1, 2, 3):
        assert noon_dilation_two_sided_purity(4, n) == pytest.approx(0.5, abs=1e-14)


@pytest.mark.parametrize("nu", [1, 2, 5])
def test_noon_negativity_two_routes(nu):
    res = build_resource(ResourceSpec(ResourceKind.NOON, nu))
    assert negativity_via_partial_transpose(TwoModeDensity(nu, res.matrix)) == pytest.approx(0.5, abs=1e-12)


def test_catalog_is_valid():
    for nu in (0, 1, 7):
        specs = catalog(nu)
        assert len(specs) == (7 if nu == 0 else 14)
        for spec in specs:
            res = build_resource(spec)
            assert np.trace(res.matrix).real == pytest.approx(1, abs=1e-12)
