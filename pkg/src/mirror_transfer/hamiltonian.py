"""Site-basis tight-binding Hamiltonians for the two transfer schemes.

Sites are addressed by logical labels: ``("S", n)`` for chain site ``n`` in
``-N..N`` and ``("C", l)`` for wire site ``l`` in ``1..L``. Storage order puts
the chain first (``-N`` at index 0) and the wire after it.

Hoppings enter with a ``+`` sign::

    H = sum_n e_n |n><n| + sum_<a,b> t_ab (|a><b| + |b><a|)
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

CHAIN = "chain"
WIRE = "wire"
JUNCTION = "junction"
REGION_TAGS = frozenset({CHAIN, WIRE, JUNCTION})

# wire must be long enough that the leaked front (speed <= 2*kappa) cannot
# bounce off the far end and reach the junction within the run
TRUNCATION_SAFETY = 1.5

Label = tuple  # ("S", n) or ("C", l)


class GraphError(ValueError):
    """Invalid graph construction or parameters."""


def label_str(label: Label) -> str:
    return f"{label[0]}{label[1]}"


def parse_label(text: str) -> Label:
    text = text.strip()
    if len(text) < 2 or text[0] not in "SC":
        raise GraphError(f"bad site label {text!r}")
    return (text[0], int(text[1:]))


def as_label(label) -> Label:
    """Normalize a label; a bare int means a chain site."""
    if isinstance(label, (int, np.integer)):
        return ("S", int(label))
    if isinstance(label, str):
        return parse_label(label)
    return (str(label[0]), int(label[1]))


@dataclass(frozen=True)
class Edge:
    a: int
    b: int
    hopping: float
    tag: str


@dataclass(frozen=True)
class ChainSpec:
    N: int
    delta: float = 1.0
    sigma: float = 0.0
    engineered: bool = False

    def __post_init__(self):
        if self.N < 0:
            raise GraphError("N must be nonnegative")
        if self.sigma < 0:
            raise GraphError("sigma must be nonnegative")
        if self.engineered and self.sigma != 0:
            raise GraphError("engineered chain takes no site-energy staircase (sigma must be 0)")

    @property
    def num_sites(self) -> int:
        return 2 * self.N + 1

    @property
    def tau(self) -> float:
        """Mirror-image period pi / (2 delta) of the engineered chain."""
        return transfer_time(self.delta)


@dataclass(frozen=True)
class WireSpec:
    L: int
    kappa: float = 2.0
    g: float = 2.0

    def __post_init__(self):
        if self.L < 2:
            raise GraphError("wire length L must be >= 2")
        if not self.kappa > 0:
            raise GraphError("kappa must be positive")
        if not self.g > 0:
            raise GraphError("junction hopping g must be positive")


@dataclass(frozen=True)
class DisorderSpec:
    delta: float
    seed: int = 0
    scope: frozenset = frozenset({CHAIN})

    def __post_init__(self):
        if not 0 <= self.delta < 1:
            raise GraphError("disorder strength must satisfy 0 <= delta < 1")
        if self.seed < 0:
            raise GraphError("seed must be nonnegative")
        object.__setattr__(self, "scope", frozenset(self.scope))
        unknown = self.scope - REGION_TAGS
        if unknown:
            raise GraphError(f"unknown region tags in scope: {sorted(unknown)}")


@dataclass(frozen=True)
class SystemGraph:
    num_sites: int
    onsite: tuple
    edges: tuple
    site_labels: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "onsite", tuple(float(e) for e in self.onsite))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "site_labels", dict(self.site_labels))
        if self.num_sites < 1:
            raise GraphError("graph needs at least one site")
        if len(self.onsite) != self.num_sites:
            raise GraphError("onsite energies must have one entry per site")
        seen = set()
        for e in self.edges:
            if e.a == e.b:
                raise GraphError(f"self-edge at site {e.a}")
            if not (0 <= e.a < self.num_sites and 0 <= e.b < self.num_sites):
                raise GraphError(f"edge ({e.a}, {e.b}) out of range")
            if e.tag not in REGION_TAGS:
                raise GraphError(f"unknown region tag {e.tag!r}")
            key = (min(e.a, e.b), max(e.a, e.b))
            if key in seen:
                raise GraphError(f"duplicate edge {key}")
            seen.add(key)
        for lab, idx in self.site_labels.items():
            if not 0 <= idx < self.num_sites:
                raise GraphError(f"label {lab} points outside the graph")

    # cached_property writes straight into __dict__, so it works on a frozen dataclass
    @cached_property
    def matrix(self) -> np.ndarray:
        h = np.diag(np.asarray(self.onsite, dtype=float))
        for e in self.edges:
            h[e.a, e.b] = e.hopping
            h[e.b, e.a] = e.hopping
        h.setflags(write=False)
        return h

    @cached_property
    def spectrum(self):
        from .spectral import eigendecompose

        return eigendecompose(self)

    def index(self, label) -> int:
        label = as_label(label)
        try:
            return self.site_labels[label]
        except KeyError:
            raise GraphError(f"unknown site label {label_str(label)}") from None

    def region_indices(self, kind: str) -> np.ndarray:
        """Storage indices of all sites whose label starts with ``kind`` (``S`` or ``C``)."""
        items = sorted((lab[1], idx) for lab, idx in self.site_labels.items() if lab[0] == kind)
        return np.array([idx for _, idx in items], dtype=int)

    @property
    def chain_N(self) -> int:
        ns = [lab[1] for lab in self.site_labels if lab[0] == "S"]
        if not ns:
            raise GraphError("graph has no chain sites")
        return max(ns)

    @property
    def wire_length(self) -> int:
        return sum(1 for lab in self.site_labels if lab[0] == "C")

    def edges_with(self, tag: str) -> list[Edge]:
        return [e for e in self.edges if e.tag == tag]

    def to_dict(self) -> dict:
        return {
            "num_sites": self.num_sites,
            "onsite": list(self.onsite),
            "edges": [{"a": e.a, "b": e.b, "hopping": e.hopping, "tag": e.tag} for e in self.edges],
            "labels": {label_str(lab): idx for lab, idx in self.site_labels.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, doc: Mapping) -> SystemGraph:
        return cls(
            num_sites=int(doc["num_sites"]),
            onsite=doc["onsite"],
            edges=[Edge(int(e["a"]), int(e["b"]), float(e["hopping"]), e["tag"]) for e in doc["edges"]],
            site_labels={parse_label(k): int(v) for k, v in doc["labels"].items()},
        )

    @classmethod
    def from_json(cls, text: str) -> SystemGraph:
        return cls.from_dict(json.loads(text))


def transfer_time(delta: float = 1.0) -> float:
    return math.pi / (2 * delta)


def min_wire_length(kappa: float, t_total: float) -> int:
    return max(2, math.ceil(TRUNCATION_SAFETY * abs(kappa) * t_total))


def _chain_labels(N: int) -> dict:
    return {("S", n): n + N for n in range(-N, N + 1)}


def build_engineered_chain(spec: ChainSpec) -> SystemGraph:
    """Chain with hoppings ``delta * sqrt((n+N+1)(N-n))`` between sites n, n+1."""
    if not spec.engineered:
        raise GraphError("build_engineered_chain needs engineered=True")
    if spec.N < 1:
        raise GraphError("engineered chain needs N >= 1")
    if not spec.delta > 0:
        raise GraphError("delta must be positive")
    N = spec.N
    edges = [
        Edge(n + N, n + N + 1, spec.delta * math.sqrt((n + N + 1) * (N - n)), CHAIN)
        for n in range(-N, N)
    ]
    return SystemGraph(2 * N + 1, [0.0] * (2 * N + 1), edges, _chain_labels(N))


def staircase(N: int, sigma: float) -> list[float]:
    return [-sigma if n < 0 else (sigma if n > 0 else 0.0) for n in range(-N, N + 1)]


def build_uniform_chain(spec: ChainSpec) -> SystemGraph:
    """Uniform chain with the antisymmetric ``-sigma, 0, +sigma`` site-energy staircase."""
    if spec.engineered:
        raise GraphError("build_uniform_chain needs engineered=False")
    if spec.N < 1:
        raise GraphError("uniform chain needs N >= 1")
    if not spec.delta > 0:
        raise GraphError("delta must be positive")
    N = spec.N
    edges = [Edge(i, i + 1, float(spec.delta), CHAIN) for i in range(2 * N)]
    return SystemGraph(2 * N + 1, staircase(N, spec.sigma), edges, _chain_labels(N))


def build_chain(spec: ChainSpec) -> SystemGraph:
    return build_engineered_chain(spec) if spec.engineered else build_uniform_chain(spec)


def build_wire(L: int, kappa: float) -> SystemGraph:
    """An isolated wire of L sites (handy as a reference spectrum)."""
    if L < 1:
        raise GraphError("wire needs at least one site")
    edges = [Edge(l, l + 1, float(kappa), WIRE) for l in range(L - 1)]
    return SystemGraph(L, [0.0] * L, edges, {("C", l + 1): l for l in range(L)})


def attach_wire(chain: SystemGraph, wire: WireSpec, t_total: float | None = None) -> SystemGraph:
    """Hang a semi-infinite wire (truncated at ``wire.L`` sites) off the chain centre.

    If ``t_total`` is given, ``wire.L`` is also checked against the truncation
    bound ``ceil(1.5 * kappa * t_total)``.
    """
    n = chain.num_sites
    if n % 2 == 0:
        raise GraphError("chain must have an odd number of sites")
    if any(lab[0] == "C" for lab in chain.site_labels):
        raise GraphError("graph already carries a wire")
    if any(e.tag != CHAIN for e in chain.edges) or len(chain.edges) != n - 1:
        raise GraphError("attach_wire expects a bare path chain")
    if ("S", 0) not in chain.site_labels:
        raise GraphError("chain has no central site 0")
    if t_total is not None:
        need = min_wire_length(wire.kappa, t_total)
        if wire.L < need:
            raise GraphError(
                f"wire length L={wire.L} too short for t={t_total:g} (need L >= {need})"
            )
    centre = chain.site_labels[("S", 0)]
    edges = list(chain.edges)
    edges.append(Edge(centre, n, float(wire.g), JUNCTION))
    edges.extend(Edge(n + l, n + l + 1, float(wire.kappa), WIRE) for l in range(wire.L - 1))
    labels = dict(chain.site_labels)
    labels.update({("C", l + 1): n + l for l in range(wire.L)})
    return SystemGraph(n + wire.L, list(chain.onsite) + [0.0] * wire.L, edges, labels)


def disorder_factors(num: int, delta: float, seed: int) -> np.ndarray:
    """Independent factors ``1 + u`` with ``u`` uniform on ``(-delta, delta)``."""
    rng = np.random.default_rng(seed)
    return 1.0 + rng.uniform(-delta, delta, size=num)


def apply_disorder(graph: SystemGraph, spec: DisorderSpec) -> SystemGraph:
    """Multiply in-scope hoppings by random factors; site energies are left alone.

    One factor is drawn per edge in storage order whatever the scope, so turning
    a region on or off does not reshuffle the draws seen by the others.
    """
    if spec.delta == 0 or not spec.scope:
        return graph
    factors = disorder_factors(len(graph.edges), spec.delta, spec.seed)
    edges = [
        replace(e, hopping=e.hopping * f) if e.tag in spec.scope else e
        for e, f in zip(graph.edges, factors)
    ]
    return replace(graph, edges=edges)


def flip_wire_hoppings(graph: SystemGraph) -> SystemGraph:
    """Time-reverse the wire: negate every wire hopping, keep chain and junction."""
    if not graph.edges_with(WIRE):
        raise GraphError("graph has no wire edges to flip")
    edges = [replace(e, hopping=-e.hopping) if e.tag == WIRE else e for e in graph.edges]
    return replace(graph, edges=edges)


def negate(graph: SystemGraph, tags: Iterable[str] = REGION_TAGS, onsite: bool = True) -> SystemGraph:
    """Flip the sign of selected hoppings (and optionally the site energies)."""
    tags = frozenset(tags)
    edges = [replace(e, hopping=-e.hopping) if e.tag in tags else e for e in graph.edges]
    energies = [-x for x in graph.onsite] if onsite else graph.onsite
    return replace(graph, onsite=energies, edges=edges)
