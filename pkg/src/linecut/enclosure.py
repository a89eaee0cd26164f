"""Enclosure measures: how many lines of a family a region encloses.

A region K "encloses" a sub-family when every pairwise intersection of the
sub-family lies in K.  The measure mu(K) is the largest such sub-family size.
Three routes are provided:

* `mu_exact` -- max clique over the enclosure graph, branch-and-bound with a
  greedy-coloring bound.  The desk-scale oracle; also a decision procedure
  when a target is given.
* `mu_halfplane` -- exact O(n log n) evaluation for half-planes: order the
  lines by where they cross the boundary, and the enclosed subsets are the
  monotone runs of boundary-relative slopes (longest one found by patience
  sorting).
* `wedge_dilworth` -- for a wedge, a constructive chain/antichain pair via a
  three-poset decomposition and Dilworth's theorem, certifying a product
  bound of ceil(2n/3).

Every witness returned by this module is re-checked with `verify_witness`
before it escapes.
"""

from __future__ import annotations

import itertools
from bisect import bisect_left
from dataclasses import dataclass

from .geometry import (
    BadId,
    GeometryError,
    LineFamily,
    ParallelLines,
    Point,
    Ray,
    Region,
    Direction,
    HalfPlane,
    incidence_points,
    intersect_lines,
    wedge_complement,
    wedge_region,
)


class BoundaryDegeneracy(GeometryError):
    """A half-plane boundary hits an incidence point or parallels a line."""


class DegenerateWedge(GeometryError):
    """Wedge preconditions failed (ray through incidences, parallelism...)."""


class PosetInvalid(GeometryError):
    """The wedge poset construction violated an expected order property.

    This is a distinguished diagnostic: the construction's order properties
    are theorems, so seeing this means a bug or an input degeneracy slipped
    through the preconditions.
    """


@dataclass(frozen=True)
class EnclosureWitness:
    """A sub-family plus a region claimed to enclose it."""

    family: LineFamily
    subset: tuple
    region: Region

    @staticmethod
    def of(family: LineFamily, ids, region: Region) -> "EnclosureWitness":
        return EnclosureWitness(family, tuple(sorted(family.check_ids(ids))), region)

    @property
    def size(self) -> int:
        return len(self.subset)


def verify_witness(w: EnclosureWitness) -> bool:
    """True iff all pairwise intersections of the subset lie in the region."""
    ids = w.family.check_ids(w.subset)
    for i, j in itertools.combinations(ids, 2):
        li, lj = w.family[i], w.family[j]
        if li.is_parallel(lj):
            raise ParallelLines(ids=(i, j))
        if not w.region.contains(intersect_lines(li, lj)):
            return False
    return True


# ---------------------------------------------------------------------------
# Enclosure graph and max clique
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnclosureGraph:
    """Graph on the family's lines; edge (i,j) iff their crossing is in K."""

    n: int
    rows: tuple  # bitmask adjacency rows

    def edge(self, i: int, j: int) -> bool:
        return bool(self.rows[i] >> j & 1)

    def matrix(self):
        return [[self.edge(i, j) for j in range(self.n)] for i in range(self.n)]


def build_enclosure_graph(family: LineFamily, region: Region) -> EnclosureGraph:
    n = len(family)
    rows = [0] * n
    for i, j in itertools.combinations(range(n), 2):
        li, lj = family[i], family[j]
        if li.is_parallel(lj):
            raise ParallelLines(ids=(i, j))
        if region.contains(intersect_lines(li, lj)):
            rows[i] |= 1 << j
            rows[j] |= 1 << i
    return EnclosureGraph(n, tuple(rows))


def _max_clique(rows, cand: int, target=None):
    """Branch and bound with greedy coloring. Deterministic.

    Returns (size, clique_ids).  With a target, returns as soon as any clique
    of size >= target is found; a completed search below target is an
    exhaustive proof that none exists.
    """
    best_size = 0
    best_clique: list = []
    stack: list = []

    def expand(P: int):
        nonlocal best_size, best_clique
        order = []
        uncolored = P
        color = 0
        while uncolored:
            color += 1
            q = uncolored
            while q:
                v = (q & -q).bit_length() - 1
                bit = 1 << v
                q &= ~(bit | rows[v])
                uncolored &= ~bit
                order.append((v, color))
        for v, bound in reversed(order):
            if target is not None and best_size >= target:
                return
            if len(stack) + bound <= best_size:
                return
            bit = 1 << v
            stack.append(v)
            sub = P & rows[v]
            if sub:
                expand(sub)
            elif len(stack) > best_size:
                best_size = len(stack)
                best_clique = stack.copy()
            stack.pop()
            P &= ~bit

    if cand:
        expand(cand)
    return best_size, sorted(best_clique)


def _lex_min_clique(rows, n: int, size: int):
    """Lexicographically smallest clique of the given (max) size."""
    chosen: list = []
    cand = (1 << n) - 1
    while len(chosen) < size:
        need = size - len(chosen) - 1
        v = 0
        while True:
            if not (cand >> v & 1):
                v += 1
                continue
            sub = cand & rows[v]
            got, _ = _max_clique(rows, sub, target=need)
            if got >= need:
                chosen.append(v)
                cand = sub
                break
            v += 1
    return chosen


def mu_exact(family: LineFamily, region: Region, target=None):
    """Exact enclosure measure by branch-and-bound max clique.

    Returns (size, witness).  In decision mode (target given) the search may
    stop at any clique of size >= target; otherwise the witness is the
    lexicographically smallest optimum.  Intended exact use at n <= ~30,
    decision use at larger n with small targets.
    """
    n = len(family)
    if n == 0:
        return 0, EnclosureWitness.of(family, (), region)
    graph = build_enclosure_graph(family, region)
    rows = graph.rows
    if target is not None:
        if target <= 1:
            return 1, EnclosureWitness.of(family, (0,), region)
        size, clique = _max_clique(rows, (1 << n) - 1, target=target)
        if size <= 1:
            size, clique = 1, [0]
    else:
        size, _ = _max_clique(rows, (1 << n) - 1)
        if size <= 1:
            size, clique = 1, [0]
        else:
            clique = _lex_min_clique(rows, n, size)
    witness = EnclosureWitness.of(family, clique, region)
    if not verify_witness(witness):
        raise AssertionError("internal error: clique witness failed verification")
    return size, witness


def mu_decision(family: LineFamily, region: Region, target: int,
                banned_pair=None):
    """Decision-mode mu: any enclosed subset of size >= target, or the exact
    maximum if it is smaller.  With banned_pair=(i, j), subsets containing
    both lines i and j are excluded (their crossing point is off limits).
    """
    n = len(family)
    if n == 0:
        return 0, None
    if target <= 1 and banned_pair is None:
        return 1, EnclosureWitness.of(family, (0,), region)
    graph = build_enclosure_graph(family, region)
    rows = list(graph.rows)
    if banned_pair is not None:
        i, j = banned_pair
        rows[i] &= ~(1 << j)
        rows[j] &= ~(1 << i)
    size, clique = _max_clique(tuple(rows), (1 << n) - 1, target=max(target, 2))
    if size <= 1:
        size, clique = 1, [0]
    if size < target:
        return size, None
    witness = EnclosureWitness.of(family, clique, region)
    if not verify_witness(witness):
        raise AssertionError("internal error: decision witness failed verification")
    return size, witness


# ---------------------------------------------------------------------------
# Half-plane measure via longest monotone run (patience sorting)
# ---------------------------------------------------------------------------

def _crossing_sequence(family: LineFamily, halfplane: HalfPlane):
    """(t, rho, id) per line: boundary crossing position and relative slope.

    In the frame (u, nu) -- u along the boundary, nu the inner normal -- a
    pair of lines crosses inside the half-plane iff rho increases with t,
    where rho = -(w.u)/(w.nu) for line direction w.  For a vertical boundary
    and the left side this is literally "slope increases with height".
    """
    nu = halfplane.inner_normal()
    u = nu.rot90ccw()
    boundary = halfplane.boundary
    seq = []
    for ln in family:
        w = ln.direction()
        w_nu = w.dx * nu.dx + w.dy * nu.dy
        if w_nu == 0:
            raise BoundaryDegeneracy(f"line {ln.id} is parallel to the boundary")
        crossing = intersect_lines(ln, boundary)
        t = u.dx * crossing.x + u.dy * crossing.y
        w_u = w.dx * u.dx + w.dy * u.dy
        rho = -w_u / w_nu
        seq.append((t, rho, ln.id))
    seq.sort()
    for (t1, _, i), (t2, _, j) in zip(seq, seq[1:]):
        if t1 == t2:
            raise BoundaryDegeneracy(
                f"incidence point of lines {i} and {j} lies on the boundary")
    return seq


def mu_halfplane(family: LineFamily, halfplane: HalfPlane):
    """Exact mu for a closed half-plane in O(n log n), with witness.

    Preconditions: no family line parallel to the boundary and no incidence
    point on it (BoundaryDegeneracy otherwise; the caller owns the
    perturbation policy).  Agrees with mu_exact.
    """
    n = len(family)
    if n == 0:
        return 0, EnclosureWitness.of(family, (), Region.of_halfplane(halfplane))
    if n == 1:
        return 1, EnclosureWitness.of(family, (0,), Region.of_halfplane(halfplane))
    seq = _crossing_sequence(family, halfplane)
    rhos = [rho for _, rho, _ in seq]

    tails = []       # rho value closing each pile
    tail_pos = []    # index (into seq) of that value
    prev = [-1] * n  # patience back-pointers
    for idx, rho in enumerate(rhos):
        pile = bisect_left(tails, rho)
        prev[idx] = tail_pos[pile - 1] if pile > 0 else -1
        if pile == len(tails):
            tails.append(rho)
            tail_pos.append(idx)
        else:
            tails[pile] = rho
            tail_pos[pile] = idx
    size = len(tails)
    chain = []
    at = tail_pos[-1]
    while at >= 0:
        chain.append(seq[at][2])
        at = prev[at]
    witness = EnclosureWitness.of(family, chain, Region.of_halfplane(halfplane))
    if not verify_witness(witness):
        raise AssertionError("internal error: LIS witness failed verification")
    return size, witness


# ---------------------------------------------------------------------------
# Wedges: poset decomposition and Dilworth chain/antichain
# ---------------------------------------------------------------------------

TYPE_MEETS_R1 = 1
TYPE_MEETS_R2 = 2
TYPE_MEETS_BOTH = 3
TYPE_MEETS_NEITHER = 4


@dataclass(frozen=True)
class Wedge:
    """Two rays from an apex; the counterclockwise sweep d1 -> d2 (< pi) is
    the convex side C1, the closed complement is C2."""

    apex: Point
    d1: Direction
    d2: Direction

    @staticmethod
    def of(apex: Point, d1: Direction, d2: Direction) -> "Wedge":
        if d1.cross(d2) <= 0:
            raise DegenerateWedge("rays must span an angle in (0, pi), "
                                  "counterclockwise from d1 to d2")
        return Wedge(apex, d1, d2)

    @property
    def ray1(self) -> Ray:
        return Ray(self.apex, self.d1)

    @property
    def ray2(self) -> Ray:
        return Ray(self.apex, self.d2)

    def convex_side(self) -> Region:
        return wedge_region(self.apex, self.d1, self.d2)

    def other_side(self) -> Region:
        return wedge_complement(self.apex, self.d1, self.d2)


def _ray_hit_param(line, ray: Ray):
    """Ray parameter of line crossing ray's line, or None if parallel."""
    w = line.direction()
    if w.is_parallel(ray.dir):
        return None
    p = intersect_lines(line, ray.line())
    return ray.param_of(p)


def check_wedge_preconditions(family: LineFamily, wedge: Wedge) -> None:
    for ln in family:
        # A line through the apex meets both rays at parameter 0; its part
        # inside the wedge is a full ray, not a separating chord, and the
        # d-distance orders below lose their geometric meaning.
        if ln.contains(wedge.apex):
            raise DegenerateWedge(f"line {ln.id} passes through the wedge apex")
    for ray in (wedge.ray1, wedge.ray2):
        ray_line = ray.line()
        for ln in family:
            if ln.direction().is_parallel(ray.dir):
                raise DegenerateWedge(f"line {ln.id} is parallel to a wedge ray")
            if ln == ray_line:
                raise DegenerateWedge(f"line {ln.id} contains a wedge ray")
        for p in incidence_points(family):
            if ray.contains(p):
                raise DegenerateWedge("an incidence point lies on a wedge ray")


def classify_line_type(line, wedge: Wedge) -> int:
    t1 = _ray_hit_param(line, wedge.ray1)
    t2 = _ray_hit_param(line, wedge.ray2)
    meets1 = t1 is not None and t1 >= 0
    meets2 = t2 is not None and t2 >= 0
    if meets1 and meets2:
        return TYPE_MEETS_BOTH
    if meets1:
        return TYPE_MEETS_R1
    if meets2:
        return TYPE_MEETS_R2
    return TYPE_MEETS_NEITHER


@dataclass(frozen=True)
class PosetDecomposition:
    """The three ground sets covering each line twice, with strict orders.

    ground_sets[k] lists line ids; edges[k] lists strict relations (i, j)
    meaning i < j.  Chains pairwise intersect in the wedge's convex side,
    antichains in the complement.
    """

    wedge: Wedge
    types: tuple
    d_along_r1: dict
    d_along_r2: dict
    ground_sets: tuple
    edges: tuple

    def largest_set_index(self) -> int:
        sizes = [len(s) for s in self.ground_sets]
        return sizes.index(max(sizes))


def _orient(i, j, ti, tj, low_type, high_type, key, ascending=True):
    """Strict order for a comparable pair by type rule then key order."""
    if ti == low_type and tj == high_type:
        return (i, j)
    if tj == low_type and ti == high_type:
        return (j, i)
    if ti == tj:
        ki, kj = key[i], key[j]
        if ki == kj:
            raise PosetInvalid("tied order keys; incidence on a ray slipped through")
        if (ki < kj) == ascending:
            return (i, j)
        return (j, i)
    raise PosetInvalid(f"comparable pair with unexpected types ({ti},{tj})")


def build_poset_decomposition(family: LineFamily, wedge: Wedge) -> PosetDecomposition:
    check_wedge_preconditions(family, wedge)
    n = len(family)
    types = tuple(classify_line_type(ln, wedge) for ln in family)
    d1 = {}
    d2 = {}
    for ln in family:
        t = _ray_hit_param(ln, wedge.ray1)
        if t is not None and t >= 0:
            d1[ln.id] = t
        t = _ray_hit_param(ln, wedge.ray2)
        if t is not None and t >= 0:
            d2[ln.id] = t

    set1 = tuple(i for i in range(n) if types[i] in (2, 3, 4))
    set2 = tuple(i for i in range(n) if types[i] in (1, 3, 4))
    set3 = tuple(i for i in range(n) if types[i] in (1, 2))
    c1 = wedge.convex_side()

    comparable = {}
    for i, j in itertools.combinations(range(n), 2):
        li, lj = family[i], family[j]
        if li.is_parallel(lj):
            raise ParallelLines(ids=(i, j))
        comparable[(i, j)] = c1.contains(intersect_lines(li, lj))

    def pairs_of(ids):
        for i, j in itertools.combinations(ids, 2):
            if comparable[(i, j)]:
                yield i, j

    edges1 = []
    for i, j in pairs_of(set1):
        ti, tj = types[i], types[j]
        if TYPE_MEETS_NEITHER in (ti, tj):
            raise PosetInvalid("type-4 line comparable inside the wedge")
        edges1.append(_orient(i, j, ti, tj, TYPE_MEETS_R2, TYPE_MEETS_BOTH, d2))
    edges2 = []
    for i, j in pairs_of(set2):
        ti, tj = types[i], types[j]
        if TYPE_MEETS_NEITHER in (ti, tj):
            raise PosetInvalid("type-4 line comparable inside the wedge")
        edges2.append(_orient(i, j, ti, tj, TYPE_MEETS_R1, TYPE_MEETS_BOTH, d1))
    edges3 = []
    for i, j in pairs_of(set3):
        ti, tj = types[i], types[j]
        if ti == tj == TYPE_MEETS_R2:
            edges3.append(_orient(i, j, ti, tj, None, None, d2, ascending=True))
        elif ti == tj == TYPE_MEETS_R1:
            edges3.append(_orient(i, j, ti, tj, None, None, d1, ascending=False))
        else:
            edges3.append(_orient(i, j, ti, tj, TYPE_MEETS_R1, TYPE_MEETS_R2, {}))

    decomposition = PosetDecomposition(
        wedge, types, d1, d2,
        (set1, set2, set3),
        (tuple(edges1), tuple(edges2), tuple(edges3)),
    )
    if sum(len(s) for s in decomposition.ground_sets) != 2 * n:
        raise PosetInvalid("ground sets do not cover each line exactly twice")
    return decomposition


def _longest_path(ids, edges):
    """Longest chain in the strict-order DAG, as a list of ids."""
    succ = {i: [] for i in ids}
    indeg = {i: 0 for i in ids}
    for i, j in edges:
        succ[i].append(j)
        indeg[j] += 1
    ready = sorted(i for i in ids if indeg[i] == 0)
    topo = []
    indeg = dict(indeg)
    while ready:
        v = ready.pop(0)
        topo.append(v)
        added = []
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                added.append(w)
        ready = sorted(ready + added)
    if len(topo) != len(ids):
        raise PosetInvalid("order relation has a cycle")
    length = {i: 1 for i in ids}
    parent = {i: None for i in ids}
    for v in topo:
        for w in succ[v]:
            if length[v] + 1 > length[w] or (
                    length[v] + 1 == length[w] and
                    (parent[w] is None or v < parent[w])):
                length[w] = length[v] + 1
                parent[w] = v
    best = max(ids, key=lambda i: (length[i], -i))
    chain = []
    at = best
    while at is not None:
        chain.append(at)
        at = parent[at]
    chain.reverse()
    return chain


def _max_antichain(ids, edges):
    """Maximum antichain via minimum chain cover (Koenig on the matching)."""
    ids = list(ids)
    succ = {i: sorted(j for (a, j) in edges if a == i) for i in ids}
    match_right = {}
    match_left = {}

    def try_augment(v, seen):
        for w in succ[v]:
            if w in seen:
                continue
            seen.add(w)
            if w not in match_right or try_augment(match_right[w], seen):
                match_right[w] = v
                match_left[v] = w
                return True
        return False

    for v in ids:
        try_augment(v, set())

    # Koenig: alternate from unmatched left vertices.
    z_left = set(v for v in ids if v not in match_left)
    z_right = set()
    frontier = sorted(z_left)
    while frontier:
        nxt = []
        for v in frontier:
            for w in succ[v]:
                if w not in z_right:
                    z_right.add(w)
                    u = match_right.get(w)
                    if u is not None and u not in z_left:
                        z_left.add(u)
                        nxt.append(u)
        frontier = sorted(nxt)
    antichain = sorted(v for v in ids if v in z_left and v not in z_right)
    if len(antichain) != len(ids) - len(match_left):
        raise PosetInvalid("antichain size disagrees with the matching bound")
    return antichain


def wedge_dilworth(family: LineFamily, wedge: Wedge):
    """Chain witness in the convex side, antichain witness in the complement.

    Works on the largest of the three ground sets (size >= ceil(2n/3)), so
    the product of the two witness sizes is at least ceil(2n/3).  Both
    witnesses are verified before returning.
    """
    n = len(family)
    c1 = wedge.convex_side()
    c2 = wedge.other_side()
    if n == 0:
        empty = EnclosureWitness.of(family, (), c1)
        return empty, EnclosureWitness.of(family, (), c2)
    decomposition = build_poset_decomposition(family, wedge)
    k = decomposition.largest_set_index()
    ids = decomposition.ground_sets[k]
    edges = decomposition.edges[k]
    chain = _longest_path(ids, edges)
    antichain = _max_antichain(ids, edges)
    chain_witness = EnclosureWitness.of(family, chain, c1)
    anti_witness = EnclosureWitness.of(family, antichain, c2)
    if not verify_witness(chain_witness):
        raise PosetInvalid("chain witness failed geometric verification")
    if not verify_witness(anti_witness):
        raise PosetInvalid("antichain witness failed geometric verification")
    need = -(-2 * n // 3)  # ceil(2n/3)
    if len(chain) * len(antichain) < need:
        raise PosetInvalid("chain x antichain product below ceil(2n/3)")
    return chain_witness, anti_witness
