"""Seeded disorder ensembles and parameter sweeps for both schemes."""
from __future__ import annotations

import csv
import io
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .hamiltonian import ChainSpec, DisorderSpec, WireSpec, min_wire_length, transfer_time
from .protocol import DEFAULT_SCOPE, run_scheme_a, run_scheme_b

DEFAULT_BINS = 40
DEFAULT_COUNT = 1000


class EnsembleError(RuntimeError):
    def __init__(self, message: str, seed: int | None = None):
        super().__init__(message)
        self.seed = seed


@dataclass(frozen=True)
class Setup:
    """Physical parameters shared by both schemes (energies in units of the chain hopping).

    Scheme A uses ``N`` and ``hopping`` for the engineered chain. Scheme B uses
    the uniform chain with ``sigma`` plus the wire. ``L=None`` picks the
    shortest wire that passes the truncation bound for the requested time.
    """

    N: int = 5
    hopping: float = 1.0
    sigma: float = 1.5
    kappa: float = 2.0
    g: float = 2.0
    L: int | None = None
    initial_site: int | None = None

    @property
    def tau(self) -> float:
        return transfer_time(self.hopping)

    def chain(self, scheme: str) -> ChainSpec:
        if scheme == "A":
            return ChainSpec(self.N, self.hopping, 0.0, engineered=True)
        return ChainSpec(self.N, self.hopping, self.sigma)

    def wire(self, t_f: float) -> WireSpec:
        L = self.L if self.L is not None else min_wire_length(self.kappa, t_f)
        return WireSpec(L, self.kappa, self.g)


@dataclass
class EnsembleStats:
    scheme: str
    delta: float
    t_f: float
    base_seed: int
    fidelities: np.ndarray
    mean: float
    std: float
    bin_edges: np.ndarray
    counts: np.ndarray
    scope: tuple = ()
    std_kind: str = "population"
    residuals: np.ndarray | None = None

    @property
    def count(self) -> int:
        return len(self.fidelities)

    @property
    def seeds(self) -> list[int]:
        return [self.base_seed + i for i in range(self.count)]

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "delta": self.delta,
            "t_f": self.t_f,
            "base_seed": self.base_seed,
            "count": self.count,
            "mean": self.mean,
            "std": self.std,
            "std_kind": self.std_kind,
            "scope": list(self.scope),
            "histogram": {"bin_edges": self.bin_edges.tolist(), "counts": self.counts.tolist()},
            "fidelities": self.fidelities.tolist(),
        }


def summarize(fidelities: Sequence[float], bins: int = DEFAULT_BINS):
    """Mean, population std and a histogram over uniform bins on [0, 1].

    A value on an interior edge goes to the upper bin; 1.0 lands in the last bin.
    """
    x = np.asarray(fidelities, dtype=float)
    if x.size == 0:
        raise ValueError("cannot summarize an empty sample")
    if bins < 1:
        raise ValueError("bins must be positive")
    if np.any((x < -1e-12) | (x > 1 + 1e-12)):
        raise ValueError("fidelities must lie in [0, 1]")
    edges = np.linspace(0.0, 1.0, bins + 1)
    which = np.clip(np.floor(x * bins).astype(int), 0, bins - 1)
    counts = np.bincount(which, minlength=bins)
    # statistics works in exact arithmetic, so identical inputs give std == 0
    values = x.tolist()
    return statistics.fmean(values), statistics.pstdev(values), (edges, counts)


def run_single(scheme: str, setup: Setup, t_f: float, delta: float, seed: int,
               scope: Iterable[str] | None = None) -> tuple[float, float | None]:
    """One realization; returns (fidelity, R at the switch or None)."""
    scope = DEFAULT_SCOPE[scheme] if scope is None else frozenset(scope)
    disorder = DisorderSpec(delta, seed, scope) if delta > 0 else None
    if scheme == "A":
        r = run_scheme_a(setup.chain("A"), t_f, setup.initial_site, disorder)
    elif scheme == "B":
        r = run_scheme_b(setup.chain("B"), setup.wire(t_f), t_f / 2, setup.initial_site, disorder,
                         check_bound_states=False)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return r.fidelity, r.residual_R_at_switch


def _task(args):
    scheme, setup, t_f, delta, seed, scope = args
    try:
        return run_single(scheme, setup, t_f, delta, seed, scope)
    except Exception as exc:  # re-raised in the parent with the seed attached
        return exc


def run_ensemble(scheme: str, setup: Setup, t_f: float, delta: float, count: int = DEFAULT_COUNT,
                 base_seed: int = 0, scope: Iterable[str] | None = None, jobs: int = 1,
                 bins: int = DEFAULT_BINS) -> EnsembleStats:
    """Realization ``i`` uses seed ``base_seed + i``; output is in seed order."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if scheme not in DEFAULT_SCOPE:
        raise ValueError(f"unknown scheme {scheme!r}")
    scope = DEFAULT_SCOPE[scheme] if scope is None else frozenset(scope)
    tasks = [(scheme, setup, t_f, delta, base_seed + i, scope) for i in range(count)]
    if jobs > 1 and count > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(_task, tasks, chunksize=max(1, count // (4 * jobs))))
    else:
        out = [_task(t) for t in tasks]
    for t, r in zip(tasks, out):
        if isinstance(r, Exception):
            raise EnsembleError(f"scheme {scheme} failed for seed {t[4]}: {r}", seed=t[4]) from r
    fid = np.array([r[0] for r in out])
    residuals = np.array([r[1] for r in out]) if scheme == "B" else None
    mean, std, (edges, counts) = summarize(fid, bins)
    return EnsembleStats(scheme, float(delta), float(t_f), int(base_seed), fid, mean, std, edges,
                         counts, tuple(sorted(scope)), residuals=residuals)


def derived_seed(base_seed: int, cell: int, stride: int = 1_000_003) -> int:
    """Base seed for grid cell ``cell``; cells are spaced far apart so streams never overlap."""
    return base_seed + cell * stride


def sweep_disorder(schemes: Sequence[str], setup: Setup, deltas: Sequence[float], t_fs: Sequence[float],
                   count: int, base_seed: int = 0, jobs: int = 1, scopes: dict | None = None,
                   bins: int = DEFAULT_BINS) -> list[EnsembleStats]:
    """Run every (scheme, delta, t_f) cell; cell ``k`` in row-major order gets ``derived_seed(base_seed, k)``."""
    if not schemes or not deltas or not t_fs:
        raise ValueError("sweep grids must be nonempty")
    scopes = scopes or {}
    table = []
    cell = 0
    for scheme in schemes:
        for delta in deltas:
            for t_f in t_fs:
                table.append(run_ensemble(scheme, setup, t_f, delta, count, derived_seed(base_seed, cell),
                                          scopes.get(scheme), jobs, bins))
                cell += 1
    return table


def ensemble_csv(table: Iterable[EnsembleStats]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scheme", "delta", "t_f", "realization_index", "seed", "fidelity"])
    for st in table:
        for i, f in enumerate(st.fidelities):
            w.writerow([st.scheme, repr(st.delta), repr(st.t_f), i, st.base_seed + i, repr(float(f))])
    return buf.getvalue()


def summary_csv(table: Iterable[EnsembleStats]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scheme", "delta", "t_f", "count", "mean", "std"])
    for st in table:
        w.writerow([st.scheme, repr(st.delta), repr(st.t_f), st.count, repr(st.mean), repr(st.std)])
    return buf.getvalue()
