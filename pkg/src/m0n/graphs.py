"""Dual trees of pointed rational curves and their weighted reductions.

A :class:`MarkedTree` is a tree of components with marked legs. A leg carries
a tuple of mark labels; several labels (or a repeated label) on one leg model
points that have collided, so the leg's multiplicity is ``len(marks)``.
"""
from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import networkx as nx

Number = int | Fraction


class TreeError(ValueError):
    pass


class InvalidWeightError(ValueError):
    pass


def vertex_key(v: str) -> tuple:
    """Natural order: v2 < v10."""
    return tuple(int(t) if t.isdigit() else t for t in re.split(r"(\d+)", v) if t)


@dataclass(frozen=True)
class Leg:
    vertex: str
    marks: tuple[int, ...]

    @property
    def multiplicity(self) -> int:
        return len(self.marks)

    @property
    def label(self) -> str:
        parts = []
        for mark, group in itertools.groupby(self.marks):
            k = len(list(group))
            parts.append(f"{mark}*{k}" if k > 1 else str(mark))
        return "+".join(parts)


@dataclass(frozen=True)
class MarkedTree:
    vertices: tuple[str, ...]
    edges: frozenset[frozenset[str]]
    leg_list: tuple[Leg, ...]

    def __post_init__(self) -> None:
        verts = tuple(sorted(set(self.vertices), key=vertex_key))
        if len(verts) != len(self.vertices):
            raise TreeError("duplicate vertex id")
        edges = frozenset(frozenset(e) for e in self.edges)
        legs = tuple(sorted(
            (Leg(l.vertex, tuple(sorted(l.marks))) for l in self.leg_list),
            key=lambda l: (vertex_key(l.vertex), l.marks),
        ))
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "leg_list", legs)
        if not verts:
            raise TreeError("a tree needs at least one vertex")
        vs = set(verts)
        for e in edges:
            if len(e) != 2 or not e <= vs:
                raise TreeError(f"bad edge {sorted(e)}")
        if len(edges) != len(verts) - 1:
            raise TreeError("a genus-0 dual graph needs |edges| = |vertices| - 1")
        g = nx.Graph()
        g.add_nodes_from(verts)
        g.add_edges_from(tuple(e) for e in edges)
        if not nx.is_connected(g):
            raise TreeError("dual graph is not connected")
        for leg in legs:
            if leg.vertex not in vs:
                raise TreeError(f"leg {leg.label} attached to unknown vertex {leg.vertex}")
            if not leg.marks:
                raise TreeError("a leg must carry at least one mark")

    @classmethod
    def build(
        cls,
        legs: Mapping[str, Iterable[int | Sequence[int]]],
        edges: Iterable[tuple[str, str]] = (),
    ) -> "MarkedTree":
        """``legs`` maps vertex -> list of marks (an int, or a tuple for a collided point)."""
        leg_list = []
        for v, marks in legs.items():
            for m in marks:
                leg_list.append(Leg(v, (m,) if isinstance(m, int) else tuple(m)))
        return cls(tuple(legs), frozenset(frozenset(e) for e in edges), tuple(leg_list))

    @property
    def n(self) -> int:
        return sum(l.multiplicity for l in self.leg_list)

    @property
    def legs(self) -> dict[str, tuple[str, int]]:
        return {l.label: (l.vertex, l.multiplicity) for l in self.leg_list}

    def legs_at(self, v: str) -> list[Leg]:
        return [l for l in self.leg_list if l.vertex == v]

    def neighbours(self, v: str) -> list[str]:
        out = [next(iter(e - {v})) for e in self.edges if v in e]
        return sorted(out, key=vertex_key)

    def degree(self, v: str) -> int:
        return sum(1 for e in self.edges if v in e)

    def marks_in(self, vertices: Iterable[str]) -> list[int]:
        vs = set(vertices)
        return sorted(m for l in self.leg_list if l.vertex in vs for m in l.marks)

    def side(self, keep: str, cut: str) -> frozenset[str]:
        """Vertices reachable from ``keep`` without crossing the edge to ``cut``."""
        seen, stack = {keep}, [keep]
        while stack:
            x = stack.pop()
            for y in self.neighbours(x):
                if y not in seen and not (x == keep and y == cut):
                    seen.add(y)
                    stack.append(y)
        return frozenset(seen)

    def tails(self) -> list[tuple[frozenset[str], str, str]]:
        """Every tail as (vertex set, inner endpoint, outer endpoint) of its attaching edge."""
        out = []
        for e in sorted(self.edges, key=lambda e: sorted(map(vertex_key, e))):
            a, b = sorted(e, key=vertex_key)
            out.append((self.side(a, b), a, b))
            out.append((self.side(b, a), b, a))
        return out

    def is_connected_subset(self, vertices: Iterable[str]) -> bool:
        vs = set(vertices)
        if not vs or not vs <= set(self.vertices):
            return False
        start = next(iter(vs))
        seen, stack = {start}, [start]
        while stack:
            x = stack.pop()
            for y in self.neighbours(x):
                if y in vs and y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen == vs

    def boundary_edges(self, vertices: Iterable[str]) -> int:
        vs = set(vertices)
        return sum(1 for e in self.edges if len(e & vs) == 1)

    def is_ordinary_stable(self) -> bool:
        marks = [m for l in self.leg_list for m in l.marks]
        if any(l.multiplicity != 1 for l in self.leg_list) or len(set(marks)) != len(marks):
            return False
        return all(len(self.legs_at(v)) + self.degree(v) >= 3 for v in self.vertices)

    # -- text and JSON forms ------------------------------------------------

    def to_text(self) -> str:
        parts = []
        for v in self.vertices:
            parts.append(f"{v}: [" + ",".join(l.label for l in self.legs_at(v)) + "]")
        edges = sorted(tuple(sorted(e, key=vertex_key)) for e in self.edges)
        edges.sort(key=lambda e: (vertex_key(e[0]), vertex_key(e[1])))
        if edges:
            parts.append("edges: " + ", ".join(f"({a},{b})" for a, b in edges))
        return "tree{ " + "; ".join(parts) + " }"

    def to_json(self) -> dict:
        edges = sorted((sorted(e, key=vertex_key) for e in self.edges), key=lambda e: tuple(map(vertex_key, e)))
        return {
            "vertices": {v: [l.label for l in self.legs_at(v)] for v in self.vertices},
            "edges": edges,
        }


def _parse_leg(text: str, where: int) -> tuple[int, ...]:
    marks: list[int] = []
    for atom in text.split("+"):
        m = re.fullmatch(r"\s*(\d+)\s*(?:\*\s*(\d+))?\s*", atom)
        if not m:
            raise TreeError(f"malformed leg {text.strip()!r} near position {where}")
        mark, mult = int(m.group(1)), int(m.group(2) or 1)
        if mult < 1:
            raise TreeError(f"multiplicity must be positive in {text.strip()!r}")
        marks.extend([mark] * mult)
    return tuple(marks)


def parse_tree(text: str) -> MarkedTree:
    """Parse ``tree{ v1: [1,2,3]; v2: [4,5,6,7]; edges: (v1,v2) }``."""
    m = re.fullmatch(r"\s*tree\s*\{(.*)\}\s*", text, re.S)
    if not m:
        raise TreeError("expected 'tree{ ... }'")
    body = m.group(1)
    legs: dict[str, list[tuple[int, ...]]] = {}
    edges: list[tuple[str, str]] = []
    offset = m.start(1)
    for chunk in body.split(";"):
        if not chunk.strip():
            offset += len(chunk) + 1
            continue
        name, sep, rest = chunk.partition(":")
        if not sep:
            raise TreeError(f"missing ':' near position {offset}")
        name = name.strip()
        if name == "edges":
            for a, b in re.findall(r"\(\s*([\w.]+)\s*,\s*([\w.]+)\s*\)", rest):
                edges.append((a, b))
            leftover = re.sub(r"\(\s*[\w.]+\s*,\s*[\w.]+\s*\)|[,\s]", "", rest)
            if leftover:
                raise TreeError(f"malformed edge list near position {offset}")
        else:
            if not re.fullmatch(r"[\w.]+", name):
                raise TreeError(f"bad vertex name {name!r}")
            lm = re.fullmatch(r"\s*\[(.*)\]\s*", rest, re.S)
            if not lm:
                raise TreeError(f"expected [legs] for vertex {name}")
            inner = lm.group(1).strip()
            if name in legs:
                raise TreeError(f"vertex {name} listed twice")
            legs[name] = [_parse_leg(x, offset) for x in inner.split(",")] if inner else []
        offset += len(chunk) + 1
    return MarkedTree.build(legs, edges)


def tree_from_json(data: Mapping) -> MarkedTree:
    legs = {v: [_parse_leg(str(x), 0) for x in marks] for v, marks in data["vertices"].items()}
    return MarkedTree.build(legs, [tuple(e) for e in data.get("edges", [])])


# --------------------------------------------------------------------------
# weights

@dataclass(frozen=True)
class WeightData:
    weights: tuple[Fraction, ...]  # a_1, ..., a_N indexed by mark label
    gamma: Fraction = Fraction(0)
    d: int = 1

    def __post_init__(self) -> None:
        w = tuple(Fraction(a) for a in self.weights)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "gamma", Fraction(self.gamma))
        if any(not 0 < a <= 1 for a in w):
            raise InvalidWeightError("weights must satisfy 0 < a_i <= 1")
        if not 0 <= self.gamma < 1:
            raise InvalidWeightError("gamma must satisfy 0 <= gamma < 1")
        if self.d < 1:
            raise InvalidWeightError("d must be a positive integer")

    @classmethod
    def uniform(cls, a: Number, n: int, gamma: Number = 0, d: int = 1) -> "WeightData":
        return cls(tuple([Fraction(a)] * n), Fraction(gamma), d)

    def weight(self, mark: int) -> Fraction:
        if not 1 <= mark <= len(self.weights):
            raise InvalidWeightError(f"no weight for mark {mark}")
        return self.weights[mark - 1]

    def leg_weight(self, leg: Leg) -> Fraction:
        return sum((self.weight(m) for m in leg.marks), Fraction(0))

    def total(self, tree: MarkedTree, vertices: Iterable[str] | None = None) -> Fraction:
        vs = set(tree.vertices if vertices is None else vertices)
        return sum((self.leg_weight(l) for l in tree.leg_list if l.vertex in vs), Fraction(0))


@dataclass
class ReductionReport:
    result: MarkedTree
    contracted: list[tuple[frozenset[str], str]] = field(default_factory=list)
    sigma_values: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "result": self.result.to_json(),
            "result_text": self.result.to_text(),
            "contracted": [
                {"vertices": sorted(vs, key=vertex_key), "reason": why} for vs, why in self.contracted
            ],
            "sigma_values": {v: self.sigma_values[v] for v in sorted(self.sigma_values, key=vertex_key)},
        }


# --------------------------------------------------------------------------
# Hassett reduction

def validate_hassett_stable(tree: MarkedTree, weights: WeightData) -> bool:
    """Ampleness of omega + sum a_i x_i, read off the dual graph.

    Each vertex needs weighted marks plus nodes > 2, and every collided
    point has total weight <= 1.
    """
    for leg in tree.leg_list:
        if leg.multiplicity > 1 and weights.leg_weight(leg) > 1:
            return False
    for v in tree.vertices:
        if weights.total(tree, [v]) + tree.degree(v) <= 2:
            return False
    return True


def _contract_tail(tree: MarkedTree, tail: frozenset[str], target: str) -> MarkedTree:
    marks = tuple(tree.marks_in(tail))
    legs = [l for l in tree.leg_list if l.vertex not in tail]
    if marks:
        legs.append(Leg(target, marks))
    verts = tuple(v for v in tree.vertices if v not in tail)
    edges = frozenset(e for e in tree.edges if not e & tail)
    return MarkedTree(verts, edges, tuple(legs))


def light_tails(tree: MarkedTree, weights: WeightData) -> list[tuple[frozenset[str], str]]:
    """Tails of weight <= 1 with the vertex they hang from."""
    out = []
    for tail, _inner, outer in tree.tails():
        if weights.total(tree, tail) <= 1:
            out.append((tail, outer))
    return out


def hassett_reduce(
    tree: MarkedTree,
    weights: WeightData,
    choose: Callable[[list[tuple[frozenset[str], str]]], int] | None = None,
) -> ReductionReport:
    """Contract tails of weight <= 1 onto their attaching points until none remain.

    By default the tail containing the smallest vertex id goes first;
    ``choose`` picks an index into the candidate list instead.
    """
    total = weights.total(tree)
    if total <= 2:
        raise InvalidWeightError(f"total weight {total} must exceed 2")
    report = ReductionReport(tree)
    current = tree
    while True:
        cands = light_tails(current, weights)
        if not cands:
            break
        if choose is None:
            cands.sort(key=lambda c: (sorted(map(vertex_key, c[0]))[0], len(c[0])))
            pick = 0
        else:
            pick = choose(cands)
        tail, target = cands[pick]
        w = weights.total(current, tail)
        k = len(current.marks_in(tail))
        current = _contract_tail(current, tail, target)
        report.contracted.append(
            (tail, f"tail of weight {w} <= 1 collapsed to a multiplicity-{k} point on {target}")
        )
    report.result = current
    return report


# --------------------------------------------------------------------------
# Veronese reduction

def sigma_formula(weight: Fraction, weights: WeightData) -> int:
    """min(max(ceil((w - 1)/(1 - gamma)), 0), d) for a tail of total weight w."""
    val = math.ceil((weight - 1) / (1 - weights.gamma))
    return min(max(val, 0), weights.d)


def check_normalisation(tree: MarkedTree, weights: WeightData) -> None:
    lhs = (weights.d - 1) * weights.gamma + weights.total(tree)
    if lhs != weights.d + 1:
        raise InvalidWeightError(f"(d-1)*gamma + sum a_i = {lhs}, expected d+1 = {weights.d + 1}")


def default_root(tree: MarkedTree) -> str:
    leaves = [v for v in tree.vertices if tree.degree(v) <= 1]
    return leaves[0]


def component_sigmas(tree: MarkedTree, weights: WeightData, root: str | None = None) -> dict[str, int]:
    """sigma of each component by telescoping subtrees hanging below it from ``root``."""
    root = default_root(tree) if root is None else root
    if root not in tree.vertices:
        raise TreeError(f"unknown root {root}")
    parent: dict[str, str | None] = {root: None}
    order = [root]
    for x in order:
        for y in tree.neighbours(x):
            if y not in parent:
                parent[y] = x
                order.append(y)
    subtree_weight: dict[str, Fraction] = {}
    for v in reversed(order):
        w = weights.total(tree, [v])
        for c in tree.neighbours(v):
            if parent.get(c) == v:
                w += subtree_weight[c]
        subtree_weight[v] = w
    out = {}
    for v in order:
        s = sigma_formula(subtree_weight[v], weights)
        for c in tree.neighbours(v):
            if parent.get(c) == v:
                s -= sigma_formula(subtree_weight[c], weights)
        out[v] = s
    return out


def sigma_by_root(tree: MarkedTree, weights: WeightData) -> dict[str, dict[str, int]]:
    return {r: component_sigmas(tree, weights, r) for r in tree.vertices}


def sigma_is_well_defined(tree: MarkedTree, weights: WeightData) -> bool:
    maps = list(sigma_by_root(tree, weights).values())
    return all(m == maps[0] for m in maps)


def sigma(tree: MarkedTree, vertices: Iterable[str], weights: WeightData) -> int:
    """sigma of a connected set of components.

    A tail (or the whole curve) uses the closed formula; any other connected
    set sums its component values.
    """
    vs = frozenset(vertices)
    if not tree.is_connected_subset(vs):
        raise TreeError("sigma needs a nonempty connected set of components")
    if tree.boundary_edges(vs) <= 1:
        return sigma_formula(weights.total(tree, vs), weights)
    comp = component_sigmas(tree, weights)
    return sum(comp[v] for v in vs)


def _zero_groups(tree: MarkedTree, zero: set[str]) -> list[frozenset[str]]:
    groups, seen = [], set()
    for v in tree.vertices:
        if v in zero and v not in seen:
            grp, stack = {v}, [v]
            while stack:
                x = stack.pop()
                for y in tree.neighbours(x):
                    if y in zero and y not in grp:
                        grp.add(y)
                        stack.append(y)
            seen |= grp
            groups.append(frozenset(grp))
    return groups


def _describe_point(k: int, marks: list[int]) -> str:
    if k >= 3:
        what = f"spine with {k} attachments: {k}-fold point"
    elif k == 2:
        what = "component with 2 attachments: node"
    else:
        what = "tail collapsed to a smooth point"
    if marks:
        what += " carrying marks " + ",".join(map(str, marks))
    return what


def veronese_reduce(tree: MarkedTree, weights: WeightData) -> ReductionReport:
    """Contract every component with sigma = 0.

    A connected block of such components is merged into its neighbour with
    the smallest id; the resulting k-fold point is recorded in ``contracted``.
    """
    check_normalisation(tree, weights)
    sig = component_sigmas(tree, weights)
    report = ReductionReport(tree, sigma_values=dict(sig))
    current = tree
    for grp in _zero_groups(tree, {v for v, s in sig.items() if s == 0}):
        outside = sorted({y for x in grp for y in current.neighbours(x) if y not in grp}, key=vertex_key)
        if not outside:
            continue
        target = outside[0]
        k = current.boundary_edges(grp)
        marks = current.marks_in(grp)
        legs = [Leg(target if l.vertex in grp else l.vertex, l.marks) for l in current.leg_list]
        edges = set()
        for e in current.edges:
            mapped = frozenset(target if x in grp else x for x in e)
            if len(mapped) == 2:
                edges.add(mapped)
        verts = tuple(v for v in current.vertices if v not in grp)
        current = MarkedTree(verts, frozenset(edges), tuple(legs))
        report.contracted.append((grp, _describe_point(k, marks)))
    report.result = current
    return report


# --------------------------------------------------------------------------
# B_2 strata

def enumerate_strata(n: int, i: int) -> list[tuple[tuple[int, int], ...]]:
    """Sets of i pairwise-disjoint 2-subsets of [n]: nonempty intersections of i B_2 components."""
    if n < 4 or i < 1:
        raise ValueError("need n >= 4 and i >= 1")
    out: list[tuple[tuple[int, int], ...]] = []

    def rec(start: int, used: frozenset[int], chosen: list[tuple[int, int]]) -> None:
        if len(chosen) == i:
            out.append(tuple(chosen))
            return
        for a in range(start, n + 1):
            if a in used:
                continue
            for b in range(a + 1, n + 1):
                if b not in used:
                    chosen.append((a, b))
                    rec(a + 1, used | {a, b}, chosen)
                    chosen.pop()

    rec(1, frozenset(), [])
    return out


def strata_count(n: int, i: int) -> int:
    """n! / (2^i i! (n-2i)!)."""
    if 2 * i > n:
        return 0
    return math.factorial(n) // (2 ** i * math.factorial(i) * math.factorial(n - 2 * i))


# --------------------------------------------------------------------------
# corpus of small trees

def stable_trees(n: int, max_vertices: int) -> Iterator[MarkedTree]:
    """Ordinary stable trees with marks 1..n and at most ``max_vertices`` components.

    One tree per (shape, marks-per-vertex) pair; marks are dealt out in
    vertex order, so labels are not permuted.
    """
    for size in range(1, max_vertices + 1):
        shapes = [nx.empty_graph(1)] if size == 1 else list(nx.nonisomorphic_trees(size))
        for g in shapes:
            nodes = sorted(g.nodes())
            deg = {v: g.degree(v) for v in nodes}
            need = [max(0, 3 - deg[v]) for v in nodes]
            spare = n - sum(need)
            if spare < 0:
                continue
            for extra in _compositions(spare, len(nodes)):
                counts = [a + b for a, b in zip(need, extra)]
                legs, mark = {}, 1
                for v, c in zip(nodes, counts):
                    legs[f"v{v + 1}"] = list(range(mark, mark + c))
                    mark += c
                edges = [(f"v{a + 1}", f"v{b + 1}") for a, b in g.edges()]
                yield MarkedTree.build(legs, edges)


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest
