"""Parameter sweeps: config parsing, grid evaluation, figure presets and CSV output."""
from __future__ import annotations

import csv
import io
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import List, Optional, Sequence

import numpy as np

from . import metrics
from .multimode import fidelity_multimode, fidelity_multimode_monte_carlo, product_resource_lower_bound
from .resources import (
    RegimeLabel,
    ResourceKind,
    ResourceSpec,
    build_resource,
    classify_regime,
    parse_descriptor,
)

SEED_ENV = "BOSETELE_SEED"
DEFAULT_SEED = 12345
DEFAULT_SAMPLES = 10_000

_GAMMA_KINDS = (ResourceKind.BOSE_HUBBARD, ResourceKind.GAUSSIAN_SINGLE, ResourceKind.GAUSSIAN_DOUBLE)
_INT_PARAMS = ("n", "seed")


class ConfigError(ValueError):
    pass


class SweepError(ValueError):
    pass


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or not raw.strip():
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


# -- value lists -------------------------------------------------------------------

def parse_values(text: str, integer: bool) -> list:
    """Expand ``a, b, lo..hi`` (integers, inclusive) or ``lo..hi/n`` (n evenly spaced points)."""
    out = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        if ".." not in item:
            out.append(int(item) if integer else float(item))
            continue
        lo, _, rest = item.partition("..")
        hi, slash, count = rest.partition("/")
        if slash:
            if integer:
                raise ConfigError(f"integer range {item!r} cannot take a point count")
            n = int(count)
            if n < 1:
                raise ConfigError(f"point count must be >= 1 in {item!r}")
            out.extend(float(x) for x in np.linspace(float(lo), float(hi), n))
        elif integer:
            a, b = int(lo), int(hi)
            if b < a:
                raise ConfigError(f"empty range {item!r}")
            out.extend(range(a, b + 1))
        else:
            raise ConfigError(f"real range {item!r} needs a point count, e.g. lo..hi/11")
    if not out:
        raise ConfigError(f"no values in {text!r}")
    return out


def expand_descriptor(text: str) -> List[str]:
    """Expand ranges inside a resource descriptor, e.g. ``bh:gamma=-3..3/7``."""
    head, colon, tail = text.strip().partition(":")
    if not colon:
        return [head]
    keys, choices = [], []
    for item in filter(None, (s.strip() for s in tail.split(","))):
        key, _, value = item.partition("=")
        key, value = key.strip(), value.strip()
        keys.append(key)
        if ".." in value:
            choices.append([repr(v) for v in parse_values(value, key in _INT_PARAMS)])
        else:
            choices.append([value])
    return [
        head + ":" + ",".join(f"{k}={v}" for k, v in zip(keys, combo))
        for combo in itertools.product(*choices)
    ]


# -- config ------------------------------------------------------------------------

@dataclass
class SweepConfig:
    resources: List[str]
    n_values: List[int]
    nu_values: List[int]
    m_values: List[int] = field(default_factory=lambda: [1])
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    output_path: Optional[str] = None
    jobs: int = 1

    def __post_init__(self):
        for name in ("resources", "n_values", "nu_values", "m_values"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must not be empty")
        if self.samples < 0:
            raise ConfigError("samples must be >= 0")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if min(self.n_values) < 0 or min(self.nu_values) < 0 or min(self.m_values) < 1:
            raise ConfigError("need N >= 0, nu >= 0 and m >= 1")

    def points(self):
        for desc in self.resources:
            for n, nu, m in itertools.product(self.n_values, self.nu_values, self.m_values):
                yield desc, n, nu, m


_KEYS = {
    "resource": "resources",
    "n": "n_values",
    "nu": "nu_values",
    "m": "m_values",
    "samples": "samples",
    "seed": "seed",
    "output": "output_path",
    "jobs": "jobs",
}


def parse_config(text: str, seed: Optional[int] = None) -> SweepConfig:
    """Read a flat ``key = value`` file. ``resource``, ``N``, ``nu`` and ``m`` may repeat."""
    lists = {"resources": [], "n_values": [], "nu_values": [], "m_values": []}
    scalars = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        key, value = key.strip(), value.strip()
        name = _KEYS.get(key.lower())
        if not eq or name is None:
            raise ConfigError(f"line {lineno}: cannot parse {raw.strip()!r}")
        try:
            if name == "resources":
                lists[name].extend(expand_descriptor(value))
            elif name in lists:
                lists[name].extend(parse_values(value, integer=True))
            elif name == "output_path":
                scalars[name] = value
            else:
                scalars[name] = int(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    if not lists["m_values"]:
        lists["m_values"] = [1]
    scalars.setdefault("seed", default_seed() if seed is None else seed)
    return SweepConfig(**lists, **scalars)


# -- evaluation --------------------------------------------------------------------

@dataclass(frozen=True)
class ResultRow:
    resource: str
    N: int
    nu: int
    m: int
    f_closed: float
    f_mc: Optional[float]
    f_mc_stderr: Optional[float]
    E_closed: Optional[float]
    E_mc: Optional[float]
    E_mc_stderr: Optional[float]
    p_perfect: Optional[float]
    regime: str
    note: str


COLUMNS = [f.name for f in fields(ResultRow)]


def evaluate_point(desc: str, n_in: int, nu: int, m: int, samples: int, seed: int) -> ResultRow:
    where = f"resource={desc} N={n_in} nu={nu} m={m}"
    try:
        spec = parse_descriptor(desc, nu)
        res = build_resource(spec)
    except ValueError as exc:
        raise SweepError(f"{where}: {exc}") from exc
    f_mc = f_se = e_mc = e_se = e_closed = None
    if m == 1:
        f_closed = metrics.fidelity_closed_form(res, n_in)
        e_closed = metrics.avg_final_entanglement(res, n_in)
        if samples:
            f_mc, f_se = metrics.fidelity_monte_carlo(res, n_in, samples, seed)
            e_mc, e_se = metrics.avg_entanglement_monte_carlo(res, n_in, samples, seed)
    else:
        f_closed = fidelity_multimode(res, n_in, m)
        if samples:
            f_mc, f_se = fidelity_multimode_monte_carlo(res, n_in, m, samples, seed)
    p_perfect = None
    if spec.kind is ResourceKind.MAX_ENT and nu >= n_in:
        p_perfect = product_resource_lower_bound(n_in, nu, m)
    regime = note = ""
    if spec.kind in _GAMMA_KINDS:
        label = classify_regime(nu, spec.gamma)
        regime = label.value
        if label is RegimeLabel.CRITICAL and spec.kind is not ResourceKind.BOSE_HUBBARD:
            note = "continuation"
    return ResultRow(
        spec.descriptor(), n_in, nu, m, f_closed, f_mc, f_se, e_closed, e_mc, e_se, p_perfect, regime, note
    )


def _evaluate(args):
    return evaluate_point(*args)


def _sort_key(row: ResultRow):
    spec = parse_descriptor(row.resource, row.nu)

    def num(x):
        return -math.inf if x is None else x

    return (
        spec.kind.value, row.N, row.nu, row.m,
        num(spec.gamma), spec.xi, spec.theta, num(spec.n), num(spec.seed),
        spec.weights or (), spec.phases or (), row.resource,
    )


def run_sweep(config: SweepConfig) -> List[ResultRow]:
    """Evaluate every grid point; rows come back sorted, whatever ``jobs`` is."""
    tasks = [(d, n, nu, m, config.samples, config.seed) for d, n, nu, m in config.points()]
    if config.jobs == 1 or len(tasks) < 2:
        rows = [_evaluate(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            chunk = max(1, len(tasks) // (4 * config.jobs))
            rows = list(pool.map(_evaluate, tasks, chunksize=chunk))
    return sorted(rows, key=_sort_key)


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return f"{value:.17g}" if math.isfinite(value) else ""
    return str(value)


def write_csv(rows: Sequence[ResultRow], handle) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([format_cell(getattr(row, c)) for c in COLUMNS])


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


# -- figure presets ------------------------------------------------------------------

def _critical_grid(nu: int, coarse: int = 81, fine: int = 41):
    width = nu ** (-2.0 / 3.0)
    gammas = set(np.round(np.linspace(-5.0, 5.0, coarse), 12).tolist())
    gammas |= set(np.round(np.linspace(-1.0 - 2 * width, -1.0 + 2 * width, fine), 12).tolist())
    return sorted(gammas)


def _bh_family(nu: int) -> List[str]:
    out = []
    for g in _critical_grid(nu):
        out.append(f"bh:gamma={g!r}")
        if g > -1.0:
            out.append(f"gauss1:gamma={g!r}")
        elif g < -1.0:
            out.append(f"gauss2:gamma={g!r}")
    return out


def _fig1(seed):
    return SweepConfig(
        ["su2:xi=0.5,theta=0.0", "separable", "maxent"], [1, 2, 3, 5, 10], list(range(1, 101)), seed=seed
    )


def _fig3(seed):
    xis = np.linspace(0.0, 1.0, 41)
    thetas = 2 * math.pi * np.arange(72) / 72
    res = [f"su2:xi={float(x)!r},theta={float(t)!r}" for x in xis for t in thetas]
    return SweepConfig(res, [10], [100], seed=seed, samples=0)


def _fig4(seed):
    return SweepConfig(
        ["bh:gamma=-0.5", "gauss1:gamma=-0.5", "separable", "maxent"],
        [1, 2, 3, 4, 5, 6, 10], list(range(1, 101)), seed=seed,
    )


def _fig6(seed):
    return SweepConfig(_bh_family(100) + ["maxent"], [1, 5, 10], [100], seed=seed)


def _fig8(seed):
    return SweepConfig(["maxent"], [10], [10, 100, 1000], list(range(1, 9)), seed=seed)


PRESETS = {
    "fig1": (_fig1, "symmetric coherent resource vs separable and max-ent: fidelity"),
    "fig2": (_fig1, "symmetric coherent resource vs separable and max-ent: entanglement"),
    "fig3": (_fig3, "SU(2) coherent landscape over (xi, theta) at N=10, nu=100"),
    "fig4": (_fig4, "Bose-Hubbard ground state at gamma=-0.5: fidelity"),
    "fig5": (_fig4, "Bose-Hubbard ground state at gamma=-0.5: entanglement"),
    "fig6": (_fig6, "Bose-Hubbard ground state vs gamma at nu=100: fidelity"),
    "fig7": (_fig6, "Bose-Hubbard ground state vs gamma at nu=100: entanglement"),
    "fig8": (_fig8, "many modes, max-ent resource, N=10"),
}


def preset(name: str, seed: Optional[int] = None, **overrides) -> SweepConfig:
    """Built-in figure config; keyword overrides replace any :class:`SweepConfig` field."""
    try:
        build, _ = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r} (known: {', '.join(PRESETS)})") from None
    config = build(default_seed() if seed is None else seed)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(config, **overrides) if overrides else config
