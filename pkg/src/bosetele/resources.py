"""Resource-state catalog, Bose-Hubbard ground states and closed-form performance."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln, xlogy

from .fock import PureNumberState, ResourceState, StateError

WEIGHT_TOL = 1e-12
DILATION_TOL = 1e-10


class ResourceKind(enum.Enum):
    SEPARABLE = "separable"
    MAX_ENT = "maxent"
    MAX_ENT_PHASED = "maxent_phased"
    NOON = "noon"
    SU2_COHERENT = "su2"
    BOSE_HUBBARD = "bh"
    GAUSSIAN_SINGLE = "gauss1"
    GAUSSIAN_DOUBLE = "gauss2"


class RegimeLabel(enum.Enum):
    PERTURBATIVE = "perturbative"
    SINGLE_GAUSSIAN = "single_gaussian"
    DOUBLE_GAUSSIAN = "double_gaussian"
    CRITICAL = "critical"


# parameters each kind accepts in a descriptor, with defaults
_PARAMS = {
    ResourceKind.SEPARABLE: {"weights": None, "seed": None},
    ResourceKind.MAX_ENT: {},
    ResourceKind.MAX_ENT_PHASED: {"phases": None, "seed": None},
    ResourceKind.NOON: {"n": None},
    ResourceKind.SU2_COHERENT: {"xi": 0.5, "theta": 0.0},
    ResourceKind.BOSE_HUBBARD: {"gamma": None},
    ResourceKind.GAUSSIAN_SINGLE: {"gamma": None},
    ResourceKind.GAUSSIAN_DOUBLE: {"gamma": None},
}


@dataclass(frozen=True)
class ResourceSpec:
    """A resource kind, its parameters and the particle number ``nu``.

    ``weights`` and ``phases`` may be given explicitly or drawn from ``seed``;
    with neither, separable weights are uniform and phases are zero. For
    ``NOON``, ``n`` is the particle number left after the local reduction of
    the ``nu``-particle state (``n = nu`` when omitted), so the built state
    has ``n`` particles.
    """

    kind: ResourceKind
    nu: int
    weights: Optional[Tuple[float, ...]] = None
    phases: Optional[Tuple[float, ...]] = None
    seed: Optional[int] = None
    n: Optional[int] = None
    xi: float = 0.5
    theta: float = 0.0
    gamma: Optional[float] = None

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError(f"nu must be >= 0, got {self.nu}")
        kind = self.kind
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if self.phases is not None:
            object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
        if kind is ResourceKind.SEPARABLE and self.weights is not None:
            w = np.asarray(self.weights)
            if w.shape != (self.nu + 1,):
                raise ValueError(f"separable weights need length {self.nu + 1}, got {w.size}")
            if np.any(w < 0) or abs(w.sum() - 1.0) > WEIGHT_TOL:
                raise ValueError("separable weights must be nonnegative and sum to 1")
        if kind is ResourceKind.MAX_ENT_PHASED and self.phases is not None:
            if len(self.phases) != self.nu + 1:
                raise ValueError(f"phases need length {self.nu + 1}, got {len(self.phases)}")
        if kind is ResourceKind.NOON:
            if self.nu < 1:
                raise ValueError("N00N states need nu >= 1")
            n = self.nu if self.n is None else self.n
            if not 1 <= n <= self.nu:
                raise ValueError(f"N00N reduction needs 1 <= n <= nu, got n={n}, nu={self.nu}")
        if kind is ResourceKind.SU2_COHERENT:
            if not 0.0 <= self.xi <= 1.0:
                raise ValueError(f"xi must lie in [0, 1], got {self.xi}")
            if not 0.0 <= self.theta < 2 * math.pi:
                raise ValueError(f"theta must lie in [0, 2pi), got {self.theta}")
        if kind in (ResourceKind.BOSE_HUBBARD, ResourceKind.GAUSSIAN_SINGLE, ResourceKind.GAUSSIAN_DOUBLE):
            if self.gamma is None or not math.isfinite(self.gamma):
                raise ValueError(f"{kind.value} needs a finite gamma")
            if self.nu < 1:
                raise ValueError(f"{kind.value} needs nu >= 1")
        if kind is ResourceKind.GAUSSIAN_SINGLE and self.gamma <= -1:
            raise ValueError(f"single Gaussian needs gamma > -1, got {self.gamma}")
        if kind is ResourceKind.GAUSSIAN_DOUBLE and self.gamma >= -1:
            raise ValueError(f"double Gaussian needs gamma < -1, got {self.gamma}")

    @property
    def noon_n(self) -> int:
        return self.nu if self.n is None else self.n

    def descriptor(self) -> str:
        """Compact text form, e.g. ``su2:xi=0.5,theta=0.0``. Round-trips via :func:`parse_descriptor`."""
        parts = []
        for name in _PARAMS[self.kind]:
            value = getattr(self, name)
            if value is None:
                continue
            if isinstance(value, tuple):
                parts.append(f"{name}=" + ";".join(repr(v) for v in value))
            else:
                parts.append(f"{name}={value!r}")
        return self.kind.value + (":" + ",".join(parts) if parts else "")

    def with_nu(self, nu: int) -> "ResourceSpec":
        return ResourceSpec(
            self.kind, nu, self.weights, self.phases, self.seed, self.n, self.xi, self.theta, self.gamma
        )


def parse_descriptor(text: str, nu: int) -> ResourceSpec:
    """Parse ``kind[:key=value,...]``; tuple values are ``;``-separated."""
    head, _, tail = text.strip().partition(":")
    try:
        kind = ResourceKind(head.strip().lower())
    except ValueError:
        known = ", ".join(k.value for k in ResourceKind)
        raise ValueError(f"unknown resource kind {head!r} (known: {known})") from None
    kwargs = {}
    for item in filter(None, (s.strip() for s in tail.split(","))):
        key, eq, value = item.partition("=")
        key = key.strip()
        if not eq or key not in _PARAMS[kind]:
            raise ValueError(f"bad parameter {item!r} for resource kind {kind.value}")
        value = value.strip()
        if key in ("weights", "phases"):
            kwargs[key] = tuple(float(v) for v in value.split(";"))
        elif key in ("seed", "n"):
            kwargs[key] = int(value)
        else:
            kwargs[key] = float(value)
    return ResourceSpec(kind, nu, **kwargs)


# -- state builders ----------------------------------------------------------

def _separable_weights(spec: ResourceSpec) -> np.ndarray:
    if spec.weights is not None:
        return np.asarray(spec.weights)
    if spec.seed is not None:
        return np.random.default_rng(spec.seed).dirichlet(np.ones(spec.nu + 1))
    return np.full(spec.nu + 1, 1.0 / (spec.nu + 1))


def _phases(spec: ResourceSpec) -> np.ndarray:
    if spec.phases is not None:
        return np.asarray(spec.phases)
    if spec.seed is not None:
        return np.random.default_rng(spec.seed).uniform(0, 2 * math.pi, spec.nu + 1)
    return np.zeros(spec.nu + 1)


def su2_coherent_amplitudes(nu: int, xi: float, theta: float):
    """Amplitudes ``sqrt(C(nu,k)) xi^(k/2) (1-xi)^((nu-k)/2) exp(i theta (nu/2 - k))``.

    Returns ``(amplitudes, moduli)``; moduli come straight from log space.
    """
    k = np.arange(nu + 1)
    log_binom = gammaln(nu + 1) - gammaln(k + 1) - gammaln(nu - k + 1)
    log_mod = 0.5 * (log_binom + xlogy(k, xi) + xlogy(nu - k, 1.0 - xi))
    moduli = np.exp(log_mod)
    return moduli * np.exp(1j * theta * (nu / 2.0 - k)), moduli


def build_resource(spec: ResourceSpec) -> ResourceState:
    kind, nu = spec.kind, spec.nu
    if kind is ResourceKind.SEPARABLE:
        return ResourceState(nu, np.diag(_separable_weights(spec)).astype(np.complex128))
    if kind is ResourceKind.MAX_ENT:
        g = np.full(nu + 1, 1.0 / math.sqrt(nu + 1))
        return ResourceState.from_amplitudes(g)
    if kind is ResourceKind.MAX_ENT_PHASED:
        mod = np.full(nu + 1, 1.0 / math.sqrt(nu + 1))
        return ResourceState.from_amplitudes(mod * np.exp(1j * _phases(spec)), mod)
    if kind is ResourceKind.NOON:
        n = spec.noon_n
        g = np.zeros(n + 1)
        g[0] = g[n] = 1.0 / math.sqrt(2.0)
        return ResourceState.from_amplitudes(g)
    if kind is ResourceKind.SU2_COHERENT:
        g, mod = su2_coherent_amplitudes(nu, spec.xi, spec.theta)
        return ResourceState.from_amplitudes(g, mod)
    if kind is ResourceKind.BOSE_HUBBARD:
        g = bose_hubbard_ground_state(nu, spec.gamma).coeffs
    elif kind is ResourceKind.GAUSSIAN_SINGLE:
        g = gaussian_single(nu, spec.gamma).coeffs
    else:
        g = gaussian_double(nu, spec.gamma).coeffs
    return ResourceState.from_amplitudes(g)


# -- Bose-Hubbard --------------------------------------------------------------

def _bh_bands(nu: int, gamma: float, tau: float):
    k = np.arange(nu + 1, dtype=np.float64)
    u = gamma * tau / nu
    diag = u * (k * (k - 1) + (nu - k) * (nu - k - 1))
    off = -tau * np.sqrt((k[:-1] + 1) * (nu - k[:-1]))
    return diag, off


def bose_hubbard_hamiltonian(nu: int, gamma: float, tau: float = 1.0) -> np.ndarray:
    """Dense two-site Bose-Hubbard Hamiltonian on ``|k, nu-k>``, with ``U = gamma tau / nu``."""
    if nu < 1:
        raise ValueError("nu must be >= 1")
    diag, off = _bh_bands(nu, gamma, tau)
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


def bose_hubbard_ground_state(nu: int, gamma: float, tau: float = 1.0) -> PureNumberState:
    """Ground state of the two-site model, sign fixed so the amplitudes sum positive.

    The ground state is even under ``k -> nu-k`` (its amplitudes are all of
    one sign), so only the even block is diagonalized. Solving the full
    matrix instead lets the near-degenerate odd state leak in on the
    attractive side.
    """
    if nu < 1:
        raise ValueError("nu must be >= 1")
    if tau <= 0:
        raise ValueError("tau must be > 0")
    diag, off = _bh_bands(nu, gamma, tau)
    h = nu // 2
    d = diag[: h + 1].copy()
    e = off[:h].copy()
    if nu % 2 == 0:
        e[h - 1] *= math.sqrt(2.0)
    else:
        d[h] += off[h]
    try:
        _, vec = eigh_tridiagonal(d, e, select="i", select_range=(0, 0))
    except np.linalg.LinAlgError as exc:
        raise StateError(f"ground-state solve failed for nu={nu}, gamma={gamma}: {exc}") from exc
    v = vec[:, 0]
    g = np.empty(nu + 1)
    if nu % 2 == 0:
        g[:h] = v[:h] / math.sqrt(2.0)
        g[h] = v[h]
        g[h + 1 :] = g[:h][::-1]
    else:
        g[: h + 1] = v / math.sqrt(2.0)
        g[h + 1 :] = g[: h + 1][::-1]
    if g.sum() < 0:
        g = -g
    return PureNumberState.normalized(g)


def _normalized_real(g: np.ndarray, nu: int) -> PureNumberState:
    return PureNumberState(nu, g / math.sqrt(float(np.sum(g * g))))


def gaussian_single(nu: int, gamma: float) -> PureNumberState:
    if gamma <= -1:
        raise ValueError(f"single Gaussian needs gamma > -1, got {gamma}")
    var = nu / (4.0 * math.sqrt(gamma + 1.0))
    k = np.arange(nu + 1)
    return _normalized_real(np.exp(-((k - nu / 2.0) ** 2) / (4.0 * var)), nu)


def gaussian_double(nu: int, gamma: float) -> PureNumberState:
    if gamma >= -1:
        raise ValueError(f"double Gaussian needs gamma < -1, got {gamma}")
    var = nu / (4.0 * abs(gamma) * math.sqrt(gamma * gamma - 1.0))
    shift = nu / 2.0 * math.sqrt(1.0 - 1.0 / gamma**2)
    k = np.arange(nu + 1)
    g = np.exp(-((k - nu / 2.0 - shift) ** 2) / (4.0 * var)) + np.exp(
        -((k - nu / 2.0 + shift) ** 2) / (4.0 * var)
    )
    return _normalized_real(g, nu)


def classify_regime(nu: int, gamma: float) -> RegimeLabel:
    """Advisory regime label; the cutoffs replacing "much less than" are factors of 10."""
    width = nu ** (-2.0 / 3.0)
    if abs(gamma + 1.0) <= width:
        return RegimeLabel.CRITICAL
    if -1.0 + width < gamma <= nu * nu / 10.0:
        return RegimeLabel.SINGLE_GAUSSIAN
    if -10.0 * math.sqrt(nu) <= gamma < -1.0 - width:
        return RegimeLabel.DOUBLE_GAUSSIAN
    return RegimeLabel.PERTURBATIVE


# -- N00N reduction ------------------------------------------------------------

def noon_reduction_map(nu: int, n: int) -> np.ndarray:
    """``W = |0><0| + |n><nu|`` on single-mode occupations ``0..nu``."""
    w = np.zeros((nu + 1, nu + 1))
    w[0, 0] = 1.0
    w[n, nu] = 1.0
    return w


def noon_reduction_dilation(nu: int, n: int) -> np.ndarray:
    """Number-conserving unitary on (mode, ancilla) occupations ``0..nu`` each.

    Swaps ``|nu, 0>`` with ``|n, nu-n>`` and leaves every other label alone;
    for ``n = nu`` that is the identity. Index ``a * (nu+1) + b`` is ``|a, b>``.
    """
    if not 1 <= n <= nu:
        raise ValueError(f"need 1 <= n <= nu, got n={n}, nu={nu}")
    dim = nu + 1
    u = np.eye(dim * dim)
    src = nu * dim + 0
    dst = n * dim + (nu - n)
    if dst == 0:
        raise StateError("reduction target overlaps the vacuum block")
    if src != dst:
        u[[src, dst]] = u[[dst, src]]
    return u


def noon_reduction_dilation_check(nu: int, n: int, seed: int = 0, tol: float = DILATION_TOL) -> bool:
    dim = nu + 1
    u = noon_reduction_dilation(nu, n)
    if not np.allclose(u.conj().T @ u, np.eye(dim * dim), atol=tol, rtol=0):
        return False
    occ = np.arange(dim)
    total = np.diag((occ[:, None] + occ[None, :]).ravel().astype(float))
    if np.max(np.abs(u @ total - total @ u)) > tol:
        return False
    # a single-mode state obeying number superselection is diagonal
    q = np.random.default_rng(seed).uniform()
    rho = np.zeros((dim, dim), dtype=np.complex128)
    rho[0, 0], rho[nu, nu] = q, 1.0 - q
    anc = np.zeros((dim, dim))
    anc[0, 0] = 1.0
    big = u @ np.kron(rho, anc) @ u.conj().T
    reduced = np.einsum("iaja->ij", big.reshape(dim, dim, dim, dim))
    w = noon_reduction_map(nu, n)
    if np.max(np.abs(reduced - w @ rho @ w.T)) > tol:
        return False
    # two-mode states as (occ_3, occ_4) arrays
    before = np.zeros((dim, dim))
    before[nu, 0] = before[0, nu] = 1.0 / math.sqrt(2.0)
    after = np.zeros((dim, dim))
    after[n, 0] = after[0, n] = 1.0 / math.sqrt(2.0)
    return bool(np.max(np.abs(w @ before @ w.T - after)) <= tol)


def noon_dilation_two_sided_purity(nu: int, n: int) -> float:
    """Purity of ``rho_34`` after dilating both reductions and tracing the ancillas.

    The two branches of the N00N state leave the ancillas in different
    number states, so for ``n < nu`` the coherence is lost and the purity
    drops to 1/2; only ``n = nu`` stays pure.
    """
    dim = nu + 1
    u = noon_reduction_dilation(nu, n).reshape(dim, dim, dim, dim)
    # psi[a3, a4, a5, a6] for |nu 0 0 nu> with both ancillas empty
    psi = np.zeros((dim,) * 4)
    psi[nu, 0, 0, 0] = psi[0, nu, 0, 0] = 1.0 / math.sqrt(2.0)
    out = np.einsum("acxz,bdyw,xyzw->abcd", u, u, psi)
    rho = np.einsum("abcd,efcd->abef", out, out.conj()).reshape(dim * dim, dim * dim)
    return float(np.real(np.trace(rho @ rho)))


# -- closed forms ----------------------------------------------------------------

def perfect_probability(n_in: int, nu: int) -> float:
    """Chance that a single run with the maximally entangled resource is exact."""
    return repeated_teleportation_probability(n_in, nu, 1)


def repeated_teleportation_probability(n_in: int, nu: int, r: int) -> float:
    if nu < n_in:
        raise ValueError(f"needs nu >= N (got N={n_in}, nu={nu})")
    if r < 1:
        raise ValueError("r must be >= 1")
    return 1.0 - (n_in / (nu + 1)) ** r


def analytic_performance(spec: ResourceSpec, n_in: int) -> Optional[Tuple[float, float]]:
    """Closed-form ``(f, E)`` where one is known, else ``None``."""
    kind, nu = spec.kind, spec.nu
    if kind is ResourceKind.SEPARABLE:
        return 2.0 / (n_in + 2), 0.0
    if kind is ResourceKind.MAX_ENT:
        if nu < n_in:
            return None
        return (
            1.0 - n_in / (3.0 * (nu + 1)),
            math.pi * n_in * (3 * nu - n_in + 1) / (24.0 * (nu + 1)),
        )
    if kind is ResourceKind.NOON:
        n = spec.noon_n
        if n > n_in:
            return 2.0 / (n_in + 2), 0.0
        extra = (n_in - n + 1) / (2.0 * (n_in + 1))
        return 2.0 / (n_in + 2) * (1.0 + extra), math.pi * (n_in - n + 1) / (8.0 * (n_in + 1))
    return None


def phase_absorber(phases) -> np.ndarray:
    """Diagonal unitary ``diag(exp(-i theta_k))`` indexed by the resource label ``k``.

    Entry ``k`` acts on the mode-4 occupation ``nu - k`` paired with label
    ``k``, so ``D @ rho @ D^dagger`` removes the phases ``theta_k`` from a
    phased maximally entangled state.
    """
    return np.diag(np.exp(-1j * np.asarray(phases, dtype=np.float64)))


def absorb_phases(resource: ResourceState, phases) -> ResourceState:
    d = phase_absorber(phases)
    moduli = resource.amplitude_moduli
    return ResourceState(resource.n_particles, d @ resource.matrix @ d.conj().T, moduli)


def catalog(nu: int) -> list:
    """Representative specs of every kind available at ``nu``."""
    specs = [
        ResourceSpec(ResourceKind.SEPARABLE, nu),
        ResourceSpec(ResourceKind.SEPARABLE, nu, seed=7),
        ResourceSpec(ResourceKind.MAX_ENT, nu),
        ResourceSpec(ResourceKind.MAX_ENT_PHASED, nu, seed=11),
        ResourceSpec(ResourceKind.SU2_COHERENT, nu, xi=0.5, theta=0.0),
        ResourceSpec(ResourceKind.SU2_COHERENT, nu, xi=0.5, theta=math.pi),
        ResourceSpec(ResourceKind.SU2_COHERENT, nu, xi=0.3, theta=1.0),
    ]
    if nu >= 1:
        specs += [
            ResourceSpec(ResourceKind.NOON, nu),
            ResourceSpec(ResourceKind.NOON, nu, n=max(1, nu // 2)),
            ResourceSpec(ResourceKind.BOSE_HUBBARD, nu, gamma=-0.5),
            ResourceSpec(ResourceKind.BOSE_HUBBARD, nu, gamma=-2.0),
            ResourceSpec(ResourceKind.BOSE_HUBBARD, nu, gamma=5.0),
            ResourceSpec(ResourceKind.GAUSSIAN_SINGLE, nu, gamma=-0.5),
            ResourceSpec(ResourceKind.GAUSSIAN_DOUBLE, nu, gamma=-2.0),
        ]
    return specs
