"""Tollbooth pricing on trees with few leaves.

The tree is rooted at its designated source leaf.  A bounding tree G0 hangs
a pad of ``x`` edges above the source and a pad below every sink, each tree
edge is subdivided into unit edges, and a dissection splits a part at nodes:
splitting at ``v`` ends the upper part at ``v`` and starts one new part per
child of ``v``.  A part is named by ``(top, first child, cut nodes)``.

Every table entry requires weight exactly ``W`` on each source-to-leaf path
of the part.  The tables here are edge granular, so only small trees and
small ``gamma`` are practical.
"""

from __future__ import annotations

import random
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from math import floor
from typing import Iterator, Sequence

from .dissection.params import Params
from .dissection.solver import MODES, w_star_guesses
from .instance import (
    InternalConsistencyError,
    InvalidInput,
    SolveReport,
    _int_field,
    as_rational,
    format_rational,
)
from .wellround import TrivialInstance, check_epsilon

DEFAULT_MAX_LEAVES = 4
DEFAULT_MAX_DISSECTIONS = 200_000
NEG = -1


class UnsupportedInstance(InvalidInput):
    """The tree is beyond what the solver accepts (too many leaves or split sets)."""


@dataclass(frozen=True)
class TreeDriver:
    u: int
    v: int
    budget: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "budget", as_rational(self.budget))


@dataclass(frozen=True)
class TreeInstance:
    n_nodes: int
    edges: tuple[tuple[int, int], ...]
    source: int
    drivers: tuple[TreeDriver, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        object.__setattr__(self, "drivers", tuple(self.drivers))

    @property
    def m(self) -> int:
        return len(self.drivers)

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {v: [] for v in range(1, self.n_nodes + 1)}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for v in adj:
            adj[v].sort()
        return adj

    def leaves(self) -> list[int]:
        return [v for v, nb in self.adjacency().items() if len(nb) == 1]

    @property
    def theta(self) -> int:
        return len(self.leaves())

    def edge_index(self) -> dict[frozenset, int]:
        return {frozenset(e): i for i, e in enumerate(self.edges)}

    def parents(self) -> dict[int, int]:
        """Parent of every node when rooted at the source (the source maps to 0)."""
        adj = self.adjacency()
        parent = {self.source: 0}
        stack = [self.source]
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if u not in parent:
                    parent[u] = v
                    stack.append(u)
        return parent

    def path_edges(self, a: int, b: int) -> list[int]:
        """Indices of the edges on the unique a-b path."""
        parent = self.parents()
        index = self.edge_index()
        anc_a = [a]
        while parent[anc_a[-1]]:
            anc_a.append(parent[anc_a[-1]])
        pos = {v: i for i, v in enumerate(anc_a)}
        path_b = [b]
        while path_b[-1] not in pos:
            path_b.append(parent[path_b[-1]])
        meet = path_b[-1]
        nodes = anc_a[:pos[meet] + 1] + list(reversed(path_b[:-1]))
        return sorted(index[frozenset((x, y))] for x, y in zip(nodes, nodes[1:]))


def validate_tree(tree: TreeInstance, max_leaves: int = DEFAULT_MAX_LEAVES) -> list[str]:
    problems = []
    if tree.n_nodes < 2:
        return [f"a tree needs at least 2 nodes, got {tree.n_nodes}"]
    if len(tree.edges) != tree.n_nodes - 1:
        problems.append(f"{len(tree.edges)} edges for {tree.n_nodes} nodes: not a tree")
    for u, v in tree.edges:
        if not (1 <= u <= tree.n_nodes and 1 <= v <= tree.n_nodes) or u == v:
            problems.append(f"bad edge ({u}, {v})")
    if problems:
        return problems
    if len(set(frozenset(e) for e in tree.edges)) != len(tree.edges):
        return ["duplicate edges"]
    if len(tree.parents()) != tree.n_nodes:
        return ["edge set is not connected"]
    leaves = tree.leaves()
    if tree.source not in leaves:
        problems.append(f"source {tree.source} is not a leaf")
    for j, d in enumerate(tree.drivers):
        if not (1 <= d.u <= tree.n_nodes and 1 <= d.v <= tree.n_nodes) or d.u == d.v:
            problems.append(f"driver {j}: bad endpoints ({d.u}, {d.v})")
        if d.budget < 0:
            problems.append(f"driver {j}: negative budget")
    return problems


def require_tree(tree: TreeInstance, max_leaves: int = DEFAULT_MAX_LEAVES) -> None:
    problems = validate_tree(tree, max_leaves)
    if problems:
        raise InvalidInput("; ".join(problems))
    if tree.theta > max_leaves:
        raise UnsupportedInstance(f"tree has {tree.theta} leaves, the limit is {max_leaves}")


def tree_profit(tree: TreeInstance, w: Sequence) -> Fraction:
    w = [as_rational(x) for x in w]
    if len(w) != len(tree.edges):
        raise InvalidInput(f"weight vector has length {len(w)}, expected {len(tree.edges)}")
    total = Fraction(0)
    for d in tree.drivers:
        wd = sum((w[i] for i in tree.path_edges(d.u, d.v)), Fraction(0))
        if wd <= d.budget:
            total += wd
    return total


def tree_satisfied(tree: TreeInstance, w: Sequence) -> frozenset[int]:
    w = [as_rational(x) for x in w]
    return frozenset(
        j for j, d in enumerate(tree.drivers)
        if sum((w[i] for i in tree.path_edges(d.u, d.v)), Fraction(0)) <= d.budget
    )


def path_tree(instance) -> TreeInstance:
    """The highway as a path tree: nodes 1..n+1, source 1, driver [l, r] -> nodes (l, r+1)."""
    edges = tuple((i, i + 1) for i in range(1, instance.n_edges + 1))
    drivers = tuple(TreeDriver(d.left, d.right + 1, d.budget) for d in instance.drivers)
    return TreeInstance(instance.n_edges + 1, edges, 1, drivers)


# ---- JSON ----------------------------------------------------------------------

def tree_to_dict(tree: TreeInstance) -> dict:
    return {
        "kind": "tollbooth",
        "nodes": tree.n_nodes,
        "edges": [list(e) for e in tree.edges],
        "source": tree.source,
        "drivers": [{"u": d.u, "v": d.v, "budget": format_rational(d.budget)} for d in tree.drivers],
    }


def tree_from_dict(data: dict, max_leaves: int = DEFAULT_MAX_LEAVES) -> TreeInstance:
    if data.get("kind") != "tollbooth":
        raise InvalidInput(f"expected kind 'tollbooth', got {data.get('kind')!r}")
    edges = data.get("edges")
    if not isinstance(edges, list) or any(not isinstance(e, list) or len(e) != 2 for e in edges):
        raise InvalidInput("'edges' must be a list of [u, v] pairs")
    for e in edges:
        for v in e:
            if isinstance(v, bool) or not isinstance(v, int):
                raise InvalidInput(f"edge endpoint {v!r} is not an integer")
    drivers = tuple(
        TreeDriver(_int_field(d, "u"), _int_field(d, "v"), as_rational(d.get("budget", 0)))
        for d in data.get("drivers", [])
    )
    tree = TreeInstance(_int_field(data, "nodes"), tuple(tuple(e) for e in edges), _int_field(data, "source"), drivers)
    require_tree(tree, max_leaves)
    return tree


# ---- bounding tree ---------------------------------------------------------------

@dataclass(frozen=True)
class WellRoundedTree:
    tree: TreeInstance
    scale: Fraction
    kept: tuple[int, ...]
    budgets: tuple[int, ...]
    expansion: int
    epsilon: Fraction


def well_round_tree(tree: TreeInstance, eps) -> WellRoundedTree:
    """Budget scaling, discarding and flooring as on the highway; expansion happens in G0."""
    eps = check_epsilon(eps)
    require_tree(tree, max(tree.theta, 2))
    m = tree.m
    if m == 0:
        raise TrivialInstance("instance has no drivers")
    b_max = max(d.budget for d in tree.drivers)
    if b_max == 0:
        raise TrivialInstance("all budgets are zero")
    target = Fraction(m) / (eps * eps)
    scale = target / b_max
    kept, budgets = [], []
    for j, d in enumerate(tree.drivers):
        scaled = d.budget * scale
        if scaled >= 1 / eps:
            kept.append(j)
            budgets.append(floor(scaled))
    return WellRoundedTree(tree, scale, tuple(kept), tuple(budgets), int(target), eps)


@dataclass
class BoundingTree:
    """G0 rooted at node 0; the edge into node ``v`` is named ``v``."""

    parent: list[int]
    children: list[list[int]]
    drivers: list[tuple[frozenset[int], int]]        # (edge set, budget)
    edge_runs: list[list[int]]                        # original edge -> its unit edges
    w_star: int
    x: int
    y: int
    ell: int
    base_weight: int
    w_prime: int
    gamma: int

    @property
    def size(self) -> int:
        return len(self.parent)

    def level_weight(self, q: int) -> int:
        return self.base_weight * self.gamma ** (self.ell - q)


def bound_tree(wrt: WellRoundedTree, w_star: int, x: int, y: int, params: Params) -> BoundingTree:
    from .dissection.table import gamma_log

    ell = gamma_log(w_star, params.gamma)
    c = params.base_weight(y)
    if not 1 <= x <= w_star:
        raise InvalidInput(f"x={x} outside 1..{w_star}")
    sink_pad = w_star * params.gamma + w_star * (c - 1) - x
    if w_star * (c - 1) - x < 0:
        raise InvalidInput(f"sink pad would be negative (W*={w_star}, c={c}, x={x})")
    tree = wrt.tree
    adj = tree.adjacency()
    index = tree.edge_index()
    parent = [-1]
    children: list[list[int]] = [[]]
    where: dict[int, int] = {}
    edge_runs: list[list[int]] = [[] for _ in tree.edges]

    def new_node(par: int) -> int:
        parent.append(par)
        children.append([])
        children[par].append(len(parent) - 1)
        return len(parent) - 1

    node = 0
    for _ in range(x):
        node = new_node(node)
    where[tree.source] = node

    # preorder over the original tree, children by node id
    visit = [(tree.source, None)]
    while visit:
        v, par = visit.pop()
        if par is not None:
            cur = where[par]
            run = []
            for _ in range(wrt.expansion):
                cur = new_node(cur)
                run.append(cur)
            where[v] = cur
            edge_runs[index[frozenset((par, v))]] = run
        kids = [u for u in adj[v] if u != par]
        if not kids and v != tree.source:
            cur = where[v]
            for _ in range(sink_pad):
                cur = new_node(cur)
        for u in reversed(kids):
            visit.append((u, v))

    drivers = []
    for j, b in zip(wrt.kept, wrt.budgets):
        d = tree.drivers[j]
        edges = frozenset(e for i in tree.path_edges(d.u, d.v) for e in edge_runs[i])
        drivers.append((edges, b))
    return BoundingTree(parent, children, drivers, edge_runs, w_star, x, y, ell, c, w_star * c, params.gamma)


# ---- parts and dissections -------------------------------------------------------

@dataclass(frozen=True)
class Part:
    top: int
    first: int
    cuts: tuple[int, ...]    # nodes where the part ends early (sorted)


@dataclass(frozen=True)
class ForestPartition:
    splits: tuple[int, ...]
    parts: tuple[Part, ...]


class PartGeometry:
    """Cached structural facts about parts of one bounding tree."""

    def __init__(self, g0: BoundingTree):
        self.g0 = g0
        self._nodes: dict[Part, tuple[int, ...]] = {}
        self._kids: dict[Part, dict[int, tuple[int, ...]]] = {}
        self._sets: dict[Part, frozenset[int]] = {}
        self._intervals: dict[Part, tuple[dict[int, int], dict[int, int]]] = {}

    def nodes(self, part: Part) -> tuple[int, ...]:
        """Edge names (child endpoints) of the part in preorder."""
        hit = self._nodes.get(part)
        if hit is not None:
            return hit
        cuts = set(part.cuts)
        out = []
        stack = [part.first]
        while stack:
            v = stack.pop()
            out.append(v)
            if v in cuts:
                continue
            stack.extend(reversed(self.g0.children[v]))
        res = tuple(out)
        self._nodes[part] = res
        return res

    def intervals(self, part: Part) -> tuple[dict[int, int], dict[int, int]]:
        """Preorder index of every edge of the part and the index just past its subtree."""
        hit = self._intervals.get(part)
        if hit is None:
            nodes = self.nodes(part)
            pre = {v: i for i, v in enumerate(nodes)}
            end = {}
            kid_map = self.kid_map(part)
            for v in reversed(nodes):
                kids = kid_map[v]
                end[v] = end[kids[-1]] if kids else pre[v] + 1
            hit = self._intervals[part] = (pre, end)
        return hit

    def node_set(self, part: Part) -> frozenset[int]:
        hit = self._sets.get(part)
        if hit is None:
            hit = self._sets[part] = frozenset(self.nodes(part))
        return hit

    def kid_map(self, part: Part) -> dict[int, tuple[int, ...]]:
        """Children of every node of the part, the top included."""
        hit = self._kids.get(part)
        if hit is None:
            hit = {part.top: (part.first,)}
            for v in self.nodes(part):
                hit[v] = tuple(self.kids(part, v))
            self._kids[part] = hit
        return hit

    def kids(self, part: Part, v: int) -> list[int]:
        if v in part.cuts:
            return []
        return self.g0.children[v] if v != part.top else [part.first]

    def leaves(self, part: Part) -> list[int]:
        return [v for v in self.nodes(part) if not self.kids(part, v)]

    def leaf_paths(self, part: Part) -> list[frozenset[int]]:
        """Edge sets of the source-to-leaf paths of the part."""
        out = []
        for leaf in self.leaves(part):
            path, v = [], leaf
            while v != part.top:
                path.append(v)
                v = self.g0.parent[v]
            out.append(frozenset(path))
        return out


def enumerate_tree_dissections(geom: PartGeometry, part: Part, gamma: int, exact: bool = False) -> Iterator[ForestPartition]:
    """Split-node sets with at most (or, with ``exact``, exactly) gamma-1 splits per path.

    Candidates are the interior nodes of the part.  Sets are produced by a
    preorder walk that tries including a node before excluding it.
    """
    for splits in split_sets(geom, part, gamma, exact):
        yield ForestPartition(splits, _parts_for(geom, part, splits))


def split_sets(geom: PartGeometry, part: Part, gamma: int, exact: bool = False) -> list[tuple[int, ...]]:
    """The split sets of :func:`enumerate_tree_dissections`, in the same order."""
    limit = gamma - 1
    kid_map = geom.kid_map(part)
    memo: dict[tuple[int, int], list[tuple[int, ...]]] = {}
    order, stack = [], [part.top]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(kid_map[v])
    for v in reversed(order):
        kids = kid_map[v]
        for used in range(limit + 1):
            if not kids:
                memo[v, used] = [()] if not exact or used == limit else []
                continue
            out: list[tuple[int, ...]] = []
            for take in ((True, False) if v != part.top and used < limit else (False,)):
                below = used + take
                combos: list[tuple[int, ...]] = [(v,)] if take else [()]
                for u in kids:
                    options = memo[u, below]
                    combos = [a + b for a in combos for b in options]
                    if not combos:
                        break
                out.extend(combos)
            memo[v, used] = out
    return memo[part.top, 0]


def count_tree_dissections(geom: PartGeometry, part: Part, gamma: int) -> int:
    """Number of split sets with exactly gamma-1 splits on every path, without listing them."""
    limit = gamma - 1
    order, stack = [], [part.top]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(geom.kids(part, v))
    ways: dict[int, list[int]] = {}
    for v in reversed(order):
        kids = geom.kids(part, v)
        row = []
        for used in range(limit + 1):
            if not kids:
                row.append(1 if used == limit else 0)
                continue
            total = 0
            for take in ((1, 0) if v != part.top and used < limit else (0,)):
                prod = 1
                for u in kids:
                    prod *= ways[u][used + take]
                total += prod
            row.append(total)
        ways[v] = row
    return ways[part.top][0]


def _parts_for(geom: PartGeometry, part: Part, splits: Sequence[int]) -> tuple[Part, ...]:
    """Parts cut out by ``splits``; a part's cuts are the topmost split or cut nodes below its first edge."""
    pre, end = geom.intervals(part)
    kid_map = geom.kid_map(part)
    markers = sorted(set(splits).union(part.cuts), key=pre.__getitem__)
    keys = [pre[m] for m in markers]
    tops = [(part.top, part.first)]
    for v in splits:
        for u in kid_map[v]:
            tops.append((v, u))
    parts = []
    for top, first in tops:
        lo, hi = pre[first], end[first]
        cuts = []
        skip = lo
        for k in range(bisect_left(keys, lo), bisect_left(keys, hi)):
            if keys[k] >= skip:
                m = markers[k]
                cuts.append(m)
                skip = end[m]
        parts.append(Part(top, first, tuple(sorted(cuts))))
    return tuple(parts)


def crossing_count(driver_edges: frozenset[int], forest: ForestPartition, geom: PartGeometry) -> int:
    """Parts of the forest that have a full source-to-leaf path inside the driver."""
    return sum(
        1 for p in forest.parts if any(path <= driver_edges for path in geom.leaf_paths(p))
    )


# ---- the table ---------------------------------------------------------------------

@dataclass
class TreeChoice:
    value: int
    forest: ForestPartition | None
    credits: tuple[tuple[int, int], ...]


class TreeTable:
    def __init__(self, g0: BoundingTree, params: Params):
        self.g0 = g0
        self.params = params
        self.geom = PartGeometry(g0)
        self.memo: dict[tuple[Part, int], int] = {}
        self.root = Part(0, g0.children[0][0], ())

    def value(self, part: Part, weight: int) -> int:
        key = (part, weight)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if any(len(p) < weight for p in self.geom.leaf_paths(part)):
            v = NEG
        elif weight == self.g0.base_weight:
            v = self.base(part)[0]
        else:
            v = self.split(part, weight).value
        self.memo[key] = v
        return v

    def inside_drivers(self, part: Part):
        edges = self.geom.node_set(part)
        return [(j, d, b) for j, (d, b) in enumerate(self.g0.drivers) if d <= edges]

    def split(self, part: Part, weight: int) -> TreeChoice:
        cw = weight // self.params.gamma
        inside = self.inside_drivers(part)
        best = TreeChoice(NEG, None, ())
        geom = self.geom
        for splits in split_sets(geom, part, self.params.gamma, exact=True):
            parts = _parts_for(geom, part, splits)
            total = 0
            for p in parts:
                v = self.value(p, cw)
                if v == NEG:
                    break
                total += v
            else:
                forest = ForestPartition(splits, parts)
                term, credits = 0, []
                for j, d, b in inside:
                    if any(d <= geom.node_set(p) for p in parts):
                        continue
                    n = crossing_count(d, forest, self.geom)
                    if n >= self.params.delta and cw * n <= b:
                        term += cw * n
                        credits.append((j, n))
                if total + term > best.value:
                    best = TreeChoice(total + term, forest, tuple(credits))
        return best

    def base(self, part: Part) -> tuple[int, dict[int, int]]:
        """Best 0/1 placement with exactly ``c`` units on every source-to-leaf path.

        Edges are grouped into blocks: runs along a chain (no branching)
        covered by the same set of contained drivers.  Units are packed
        towards the top inside a block.
        """
        c = self.g0.base_weight
        inside = self.inside_drivers(part)
        geom = self.geom
        # chains: maximal runs of edges between branch points
        blocks: list[list[int]] = []
        block_kids: list[list[int]] = []
        root_blocks: list[int] = []

        def build(start: int, parent_block: int | None):
            run = [start]
            v = start
            while len(geom.kids(part, v)) == 1:
                v = geom.kids(part, v)[0]
                run.append(v)
            prev = parent_block
            cur: list[int] = []
            sig = None
            for e in run:
                s = frozenset(j for j, d, _ in inside if e in d)
                if cur and s != sig:
                    prev = add_block(cur, prev)
                    cur = []
                cur.append(e)
                sig = s
            prev = add_block(cur, prev)
            for u in geom.kids(part, v):
                build(u, prev)

        def add_block(edges: list[int], parent_block: int | None) -> int:
            blocks.append(edges)
            block_kids.append([])
            idx = len(blocks) - 1
            if parent_block is None:
                root_blocks.append(idx)
            else:
                block_kids[parent_block].append(idx)
            return idx

        build(part.first, None)
        counts = [0] * len(blocks)
        driver_blocks = [
            (b, [i for i, blk in enumerate(blocks) if blk[0] in d]) for _, d, b in inside
        ]
        best = [NEG, None]

        def assign(frontier: list[tuple[int, int]]):
            if not frontier:
                value = 0
                for b, idxs in driver_blocks:
                    wd = sum(counts[i] for i in idxs)
                    if wd <= b:
                        value += wd
                if value > best[0]:
                    best[0], best[1] = value, list(counts)
                return
            (blk, rem), rest = frontier[0], frontier[1:]
            cap = len(blocks[blk])
            kids = block_kids[blk]
            lo = rem if not kids else 0
            for k in range(lo, min(rem, cap) + 1):
                counts[blk] = k
                assign([(u, rem - k) for u in kids] + rest)
            counts[blk] = 0

        assign([(root_blocks[0], c)])
        if best[0] == NEG:
            return NEG, {}
        placement = {}
        for blk, k in zip(blocks, best[1]):
            for t, e in enumerate(blk):
                placement[e] = 1 if t < k else 0
        return best[0], placement

    def entry_count(self) -> int:
        return len(self.memo)

    def feasible_count(self) -> int:
        return sum(1 for v in self.memo.values() if v != NEG)


@dataclass
class TreeReconstruction:
    weights: dict[int, int]
    records: list[tuple[int, int, int]]     # (driver, n_j, credit)
    value: int


def reconstruct_tree(table: TreeTable) -> TreeReconstruction:
    g0 = table.g0
    root_value = table.value(table.root, g0.w_prime)
    if root_value == NEG:
        raise InternalConsistencyError("tree root entry is infeasible")
    weights = {v: 0 for v in range(1, g0.size)}
    records = []
    total = 0
    stack = [(table.root, 0)]
    while stack:
        part, q = stack.pop()
        weight = g0.level_weight(q)
        if weight == g0.base_weight:
            value, placement = table.base(part)
            weights.update(placement)
            total += value
            continue
        choice = table.split(part, weight)
        if choice.forest is None:
            raise InternalConsistencyError(f"no feasible dissection for {part}")
        cw = weight // g0.gamma
        for j, n in choice.credits:
            records.append((j, n, cw * n))
            total += cw * n
        for p in reversed(choice.forest.parts):
            stack.append((p, q + 1))
    if total != root_value:
        raise InternalConsistencyError(f"recomputed tree value {total} != table value {root_value}")
    return TreeReconstruction(weights, records, root_value)


def tollbooth_scale(params: Params) -> Fraction:
    return Fraction(params.delta, params.delta + 4)


def run_tollbooth(
    tree: TreeInstance,
    params: Params,
    mode: str = "derandomized",
    seed: int = 0,
    max_leaves: int = DEFAULT_MAX_LEAVES,
    max_dissections: int = DEFAULT_MAX_DISSECTIONS,
) -> SolveReport:
    """Tree analogue of the highway scheme with an exhaustive edge-level table.

    The table enumerates every split set, so each draw first counts the
    root's split sets and refuses (``UnsupportedInstance``) above
    ``max_dissections``.  In practice that means gamma = 2 on small trees.
    """
    if mode not in MODES:
        raise InvalidInput(f"unknown mode {mode!r}; choose from {MODES}")
    require_tree(tree, max_leaves)
    zero = tuple(Fraction(0) for _ in tree.edges)
    try:
        wrt = well_round_tree(tree, params.epsilon)
    except TrivialInstance as exc:
        return SolveReport(zero, Fraction(0), tree_satisfied(tree, zero), {"trivial": str(exc)})

    scale = tollbooth_scale(params)
    n_bar = len(tree.edges) * wrt.expansion
    rng = random.Random(seed)
    ys = list(params.y_values())
    draws, guesses, best = [], [], None
    for ell, w_star in enumerate(w_star_guesses(n_bar, params.gamma)):
        if mode == "derandomized":
            grid = [(x, y) for y in ys for x in range(1, w_star + 1)]
        else:
            grid = [(rng.randint(1, w_star), rng.choice(ys))]
        entries = feasible = 0
        for x, y in grid:
            g0 = bound_tree(wrt, w_star, x, y, params)
            table = TreeTable(g0, params)
            count = count_tree_dissections(table.geom, table.root, params.gamma)
            if count > max_dissections:
                raise UnsupportedInstance(
                    f"W*={w_star}, y={y}: {count} root split sets exceed the limit {max_dissections}; "
                    "use a smaller tree or override gamma (e.g. --gamma 2)"
                )
            root = table.value(table.root, g0.w_prime)
            entry = {"ell": ell, "w_star": w_star, "x": x, "y": y, "apx_d": None, "profit": None}
            if root != NEG:
                result = _evaluate_tree_draw(tree, wrt, table, scale)
                entry.update(apx_d=root, profit=format_rational(result[1]))
                if best is None or result[1] > best[1][1]:
                    best = (entry, result)
            entries += table.entry_count()
            feasible += table.feasible_count()
            draws.append(entry)
        guesses.append({"ell": ell, "w_star": w_star, "table_entries": entries, "feasible_entries": feasible})
    if best is None:
        raise InternalConsistencyError("no guess produced a feasible tree table root")
    entry, (weights, value) = best
    diagnostics = {
        "params": params.to_dict(),
        "mode": mode,
        "seed": seed,
        "scale": format_rational(scale),
        "theta": tree.theta,
        "guesses": guesses,
        "draws": draws,
        "best": dict(entry),
    }
    return SolveReport(weights, value, tree_satisfied(tree, weights), diagnostics)


def _evaluate_tree_draw(tree: TreeInstance, wrt: WellRoundedTree, table: TreeTable, scale: Fraction):
    rec = reconstruct_tree(table)
    g0 = table.g0
    for j, n, _ in rec.records:
        edges, b = g0.drivers[j]
        wd = sum(rec.weights[e] for e in edges) * scale
        if wd > b:
            raise InternalConsistencyError(f"tree driver {j} exceeds its budget after scaling")
    lifted = tuple(
        sum(rec.weights[e] for e in run) * scale / wrt.scale for run in g0.edge_runs
    )
    return lifted, tree_profit(tree, lifted)
