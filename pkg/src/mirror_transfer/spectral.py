"""Diagonalization and the symmetry / bound-state checks behind the reversal protocol."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .hamiltonian import CHAIN, WIRE, GraphError, SystemGraph


class SpectralError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns

    def __len__(self):
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


@dataclass
class SymmetryReport:
    spectral_pairing_ok: bool
    max_pairing_error: float
    coupling_symmetry_ok: bool
    max_overlap_mismatch: float
    zero_mode_present: bool
    tol: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class BoundStateReport:
    outside_band: list = field(default_factory=list)  # (eigenvalue, ipr)
    inside_band_suspects: list = field(default_factory=list)  # (eigenvalue, ipr)
    forbidden_ratio_hit: bool = False
    sigma_over_kappa: float = 0.0
    nearest_forbidden: float = 0.0
    forbidden_distance: float = math.inf
    # same forbidden set applied to sigma / (chain hopping), which is the ratio
    # that actually decides whether a chain mode vanishes at the centre site
    decoupling_hit: bool = False
    sigma_over_hopping: float = 0.0
    decoupling_distance: float = math.inf

    @property
    def clean(self) -> bool:
        return not (self.outside_band or self.forbidden_ratio_hit or self.decoupling_hit)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["clean"] = self.clean
        return d


def eigendecompose(graph: SystemGraph) -> Spectrum:
    """Dense symmetric eigendecomposition with ascending eigenvalues.

    Each eigenvector is signed so its largest-magnitude entry is positive.
    """
    try:
        w, v = np.linalg.eigh(graph.matrix)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigensolver did not converge: {exc}") from exc
    v = np.array(v)
    peak = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[peak, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    v *= signs
    w.setflags(write=False)
    v.setflags(write=False)
    return Spectrum(w, v)


def ipr(vectors: np.ndarray) -> np.ndarray:
    """Inverse participation ratio sum |v_i|^4 of each column."""
    return np.sum(np.abs(vectors) ** 4, axis=0)


def _groups(values: np.ndarray, tol: float) -> list[list[int]]:
    """Split sorted values into runs closer than ``tol``."""
    groups: list[list[int]] = []
    for i, x in enumerate(values):
        if groups and x - values[groups[-1][-1]] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def check_mirror_symmetry(spectrum: Spectrum, tol: float = 1e-10, center: int | None = None) -> SymmetryReport:
    """Test the ``omega -> -omega`` pairing and equal centre-site weight of each pair.

    ``center`` is the storage index of the site coupled to the continuum and
    defaults to the middle of the chain. Near-degenerate levels are grouped
    within ``tol``; a group's centre weight is its summed squared overlap, which
    keeps the comparison well defined when individual vectors are not.
    """
    w = np.asarray(spectrum.eigenvalues)
    v = np.asarray(spectrum.eigenvectors)
    m = len(w)
    if m == 0:
        raise SpectralError("empty spectrum")
    if center is None:
        center = m // 2
    pairing_error = float(np.max(np.abs(w + w[::-1])))
    zero_mode = bool(np.any(np.abs(w) < tol))
    pairing_ok = pairing_error <= tol and (m % 2 == 0 or zero_mode)

    # compare centre weight of each level group with that of its mirrored group
    weight = v[center] ** 2
    groups = _groups(w, tol)
    mismatch = 0.0
    for grp in groups:
        target = -w[grp].mean()
        partner = min(groups, key=lambda g: abs(w[g].mean() - target))
        if len(partner) != len(grp):
            mismatch = math.inf
            break
        a = math.sqrt(weight[grp].sum())
        b = math.sqrt(weight[partner].sum())
        mismatch = max(mismatch, abs(a - b))
    return SymmetryReport(
        spectral_pairing_ok=bool(pairing_ok),
        max_pairing_error=pairing_error,
        coupling_symmetry_ok=bool(pairing_ok and mismatch <= tol),
        max_overlap_mismatch=float(mismatch),
        zero_mode_present=zero_mode,
        tol=tol,
    )


def forbidden_sigma_ratios(N: int) -> list[float]:
    """Values of sigma/kappa that leave chain modes decoupled from the wire."""
    if N < 1:
        raise ValueError("N must be >= 1")
    c = np.cos(np.arange(1, N + 1) * np.pi / (N + 1))
    diffs = np.sort((c[:, None] - c[None, :]).ravel())
    out: list[float] = []
    for x in diffs:
        x = round(float(x), 14) + 0.0
        if not out or x - out[-1] > 1e-12:
            out.append(x)
    return out


def detect_bound_states(combined: SystemGraph, kappa: float, tol: float = 1e-6,
                        wire_weight_floor: float = 0.5) -> BoundStateReport:
    """Look for states that would keep the excitation from leaking away.

    Outside the band (``|w| > 2 kappa``) a state counts when its IPR exceeds
    ``10 / num_sites``. Inside the band a state is only a suspect when less than
    ``wire_weight_floor`` of it sits on the wire; truncation blurs that test, so
    the forbidden-ratio checks are the ones that decide. The forbidden set is
    tested against both sigma/kappa and sigma/(chain hopping); only the latter
    changes the chain eigenvectors, so ``decoupling_hit`` is the one that
    predicts trapped population.
    """
    wire = combined.region_indices("C")
    if len(wire) == 0 or not combined.edges_with(WIRE):
        raise GraphError("graph has no wire region")
    spec = combined.spectrum
    w, v = spec.eigenvalues, spec.eigenvectors
    loc = ipr(v)
    threshold = 10.0 / combined.num_sites
    band = 2 * abs(kappa)
    report = BoundStateReport()
    wire_weight = np.sum(v[wire] ** 2, axis=0)
    for i, (e, p) in enumerate(zip(w, loc)):
        if abs(e) > band + tol:
            if p > threshold:
                report.outside_band.append((float(e), float(p)))
        elif wire_weight[i] < wire_weight_floor:
            report.inside_band_suspects.append((float(e), float(p)))

    N = combined.chain_N
    sigma = combined.onsite[combined.index(("S", 1))] if N >= 1 else 0.0
    forbidden = np.array(forbidden_sigma_ratios(max(N, 1)))

    ratio = sigma / abs(kappa)
    k = int(np.argmin(np.abs(forbidden - ratio)))
    report.sigma_over_kappa = float(ratio)
    report.nearest_forbidden = float(forbidden[k])
    report.forbidden_distance = float(abs(forbidden[k] - ratio))
    report.forbidden_ratio_hit = report.forbidden_distance <= tol

    chain_hops = [abs(e.hopping) for e in combined.edges_with(CHAIN)]
    if chain_hops:
        ratio = sigma / float(np.mean(chain_hops))
        report.sigma_over_hopping = ratio
        report.decoupling_distance = float(np.min(np.abs(forbidden - ratio)))
        report.decoupling_hit = report.decoupling_distance <= tol
    return report
