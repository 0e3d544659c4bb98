"""Exact piecewise-constant evolution of single-excitation states."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .hamiltonian import GraphError, SystemGraph, as_label, label_str

NORM_TOL = 1e-12
TIME_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    labels: Mapping = field(default_factory=dict)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1:
            raise ValueError("amplitudes must be a 1-d vector")
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > NORM_TOL:
            raise ValueError(f"state must have unit norm (got {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def at_site(cls, graph: SystemGraph, label) -> StateVector:
        amps = np.zeros(graph.num_sites, dtype=complex)
        amps[graph.index(label)] = 1.0
        return cls(amps, graph.site_labels)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __len__(self):
        return len(self.amplitudes)

    def amplitude(self, label) -> complex:
        label = as_label(label)
        if label not in self.labels:
            raise KeyError(f"unknown site label {label_str(label)}")
        return complex(self.amplitudes[self.labels[label]])

    def overlap(self, other: StateVector) -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def site_probability(state: StateVector, label) -> float:
    return abs(state.amplitude(label)) ** 2


def chain_occupation(state: StateVector, graph: SystemGraph) -> float:
    """Probability left in the chain subspace (residual occupation R)."""
    idx = graph.region_indices("S")
    if len(idx) == 0:
        raise GraphError("graph has no chain sites")
    return float(np.sum(np.abs(state.amplitudes[idx]) ** 2))


def wire_occupation(state: StateVector, graph: SystemGraph) -> float:
    idx = graph.region_indices("C")
    return float(np.sum(np.abs(state.amplitudes[idx]) ** 2)) if len(idx) else 0.0


def energy(state: StateVector, graph: SystemGraph) -> float:
    psi = state.amplitudes
    return float(np.real(np.vdot(psi, graph.matrix @ psi)))


def _evolve(amps: np.ndarray, graph: SystemGraph, duration: float) -> np.ndarray:
    if duration == 0:
        return amps
    spec = graph.spectrum
    v = spec.eigenvectors
    return v @ (np.exp(-1j * spec.eigenvalues * duration) * (v.T @ amps))


def propagate_segment(state: StateVector, graph: SystemGraph, duration: float) -> StateVector:
    """Apply ``exp(-i H t)`` through the graph's cached eigendecomposition."""
    if len(state) != graph.num_sites:
        raise ValueError(f"state has {len(state)} sites, graph has {graph.num_sites}")
    if duration < 0:
        raise ValueError("duration must be nonnegative")
    return StateVector(_evolve(state.amplitudes, graph, duration), graph.site_labels)


@dataclass(frozen=True)
class Schedule:
    segments: tuple

    def __post_init__(self):
        segs = tuple((g, float(d)) for g, d in self.segments)
        if not segs:
            raise ValueError("schedule needs at least one segment")
        first = segs[0][0]
        for g, d in segs:
            if d < 0:
                raise ValueError("segment durations must be nonnegative")
            if g.num_sites != first.num_sites or g.site_labels != first.site_labels:
                raise ValueError("all segments must share one site layout")
        object.__setattr__(self, "segments", segs)

    @property
    def total(self) -> float:
        return sum(d for _, d in self.segments)

    @property
    def layout(self) -> SystemGraph:
        return self.segments[0][0]


@dataclass(eq=False)
class Trajectory:
    times: np.ndarray
    states: list
    layout: SystemGraph
    final: StateVector

    def amplitudes(self) -> np.ndarray:
        """Array of shape (num_times, num_sites)."""
        return np.array([s.amplitudes for s in self.states])

    def probabilities(self, label) -> np.ndarray:
        i = self.layout.index(label)
        return np.array([abs(s.amplitudes[i]) ** 2 for s in self.states])

    def chain_occupation(self) -> np.ndarray:
        return np.array([chain_occupation(s, self.layout) for s in self.states])

    def norms(self) -> np.ndarray:
        return np.array([s.norm for s in self.states])

    def at(self, t: float) -> StateVector:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > TIME_TOL * max(1.0, abs(t)):
            raise KeyError(f"no snapshot at t={t}")
        return self.states[k]


def run_schedule(initial: StateVector, schedule: Schedule, sample_times: Sequence[float] = ()) -> Trajectory:
    """Evolve through every segment, recording snapshots at ``sample_times``.

    Snapshots inside a segment are reached from the previous snapshot, so the
    cost stays linear in the number of samples.
    """
    times = np.asarray(sample_times, dtype=float)
    if times.size and np.any(np.diff(times) < 0):
        raise ValueError("sample times must be ascending")
    total = schedule.total
    slack = TIME_TOL * max(1.0, total)
    if times.size and (times[0] < -slack or times[-1] > total + slack):
        raise ValueError(f"sample times must lie within [0, {total}]")
    if len(initial) != schedule.layout.num_sites:
        raise ValueError("initial state does not match the schedule layout")

    labels = schedule.layout.site_labels
    psi = initial.amplitudes
    states: list[StateVector] = []
    k = 0
    start = 0.0
    last = len(schedule.segments) - 1
    for i, (graph, duration) in enumerate(schedule.segments):
        end = start + duration
        now = start
        limit = end + slack if i == last else end
        while k < times.size and times[k] <= limit:
            t = min(max(times[k], now), end)
            psi = _evolve(psi, graph, t - now)
            now = t
            states.append(StateVector(psi, labels))
            k += 1
        psi = _evolve(psi, graph, end - now)
        start = end
    while k < times.size:  # numerical slack past the final boundary
        states.append(StateVector(psi, labels))
        k += 1
    return Trajectory(times, states, schedule.layout, StateVector(psi, labels))


def bloch_amplitudes(state: StateVector, graph: SystemGraph, alphas: Iterable[float]) -> np.ndarray:
    """Sine transform of the wire part: ``sqrt(2/pi) * sum_l sin(l a) psi_l``."""
    alphas = np.asarray(list(alphas), dtype=float)
    if np.any((alphas <= 0) | (alphas >= math.pi)):
        raise ValueError("Bloch wave numbers must lie in (0, pi)")
    return _sine_transform(state, graph, alphas)


def _sine_transform(state: StateVector, graph: SystemGraph, alphas: np.ndarray) -> np.ndarray:
    idx = graph.region_indices("C")
    if len(idx) == 0:
        return np.zeros(alphas.shape, dtype=complex)
    l = np.arange(1, len(idx) + 1)
    return math.sqrt(2 / math.pi) * (np.sin(np.outer(alphas, l)) @ state.amplitudes[idx])


def continuum_weight(state: StateVector, graph: SystemGraph, points: int = 512) -> float:
    """Trapezoid estimate of the integral of ``|Phi(alpha)|^2`` over ``[0, pi]``.

    The grid is widened to ``2L + 1`` points for long wires so that the rule
    stays exact for the truncated sine series.
    """
    n = max(points, 2 * graph.wire_length + 1)
    grid = np.linspace(0.0, math.pi, n)
    phi = _sine_transform(state, graph, grid)
    return float(np.trapezoid(np.abs(phi) ** 2, grid))


def trajectory_rows(traj: Trajectory, sites: Iterable) -> tuple[list[str], list[list]]:
    sites = [as_label(s) for s in sites]
    idx = [traj.layout.index(s) for s in sites]
    header = ["time", "norm", "R"] + [f"P_{label_str(s)}" for s in sites]
    has_chain = len(traj.layout.region_indices("S")) > 0
    rows = []
    for t, s in zip(traj.times, traj.states):
        amps = s.amplitudes
        r = chain_occupation(s, traj.layout) if has_chain else 0.0
        rows.append([float(t), s.norm, r] + [float(abs(amps[i]) ** 2) for i in idx])
    return header, rows


def trajectory_csv(traj: Trajectory, sites: Iterable) -> str:
    header, rows = trajectory_rows(traj, sites)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([[repr(x) for x in row] for row in rows])
    return buf.getvalue()
