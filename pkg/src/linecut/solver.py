"""Recursive partitioner: r convex regions each enclosing large sub-families.

The guarantee per part is r^ln(2/3) * n^(1/r) - 2r lines of each family.  The
solver recurses: find an equitable two-cut (or, failing that, use the sign
table to pick a same-signed pair or triple and cut accordingly), then solve
each side on the enclosed witness sub-families.  Output is a cut tree whose
leaves carry explicit witnesses; `verify_certificate` re-checks everything
from scratch and never trusts the solver's internals.

A fallback path exists because the three-cut search is budgeted: when no
equitable cut is found, a best-scoring unconditional cut is used and affected
leaves are reported as degraded rather than silently weakened.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import mpmath
from gmpy2 import mpq

from .geometry import (
    Direction,
    GeometryError,
    LineFamily,
    Region,
    choose_reference_direction,
    joint_family,
    validate_general_position,
)
from .enclosure import EnclosureWitness, verify_witness
from .cuts import (
    DEFAULT_DIRECTION_SEEDS,
    SearchConfig,
    SignsUnrecoverable,
    SummandsNotFound,
    TwoCut,
    TwoCutMissed,
    _parallel_to_some_line,
    _try_offset,
    assign_signs,
    critical_halfplane,
    family_projections,
    find_equitable_two_cut,
    find_summands,
    halfplane_leq,
    mu_side,
    threshold_int,
)
from .fans import find_equitable_three_cut


class NotGeneralPosition(GeometryError):
    def __init__(self, report):
        super().__init__(f"input families not in general position: "
                         f"{report.violations[:3]}...")
        self.report = report


# ---------------------------------------------------------------------------
# The main bound, with certified integer rounding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundValue:
    value: float   # r^ln(2/3) * n^(1/r) - 2r, for reporting
    required: int  # smallest integer witness size satisfying >= value


def bound_value(n: int, r: int) -> BoundValue:
    """Evaluate the per-part guarantee and its exact integer form.

    The real value is transcendental for r >= 2, so the integer ceiling is
    certified by interval arithmetic: precision is raised until the interval
    endpoints agree on the ceiling.
    """
    if n < 0 or r < 1:
        raise ValueError("need n >= 0 and r >= 1")
    if n == 0:
        return BoundValue(float(-2 * r), 0)
    if r == 1:
        return BoundValue(float(n - 2), max(0, n - 2))
    iv = mpmath.iv
    old = iv.prec
    try:
        for prec in (64, 128, 256, 512, 1024):
            iv.prec = prec
            val = (iv.mpf(r) ** iv.log(iv.mpf(2) / iv.mpf(3))
                   * iv.mpf(n) ** (iv.mpf(1) / iv.mpf(r)) - 2 * r)
            lo_t, hi_t = val._mpi_
            lo = mpq(*mpmath.libmp.to_rational(lo_t))
            hi = mpq(*mpmath.libmp.to_rational(hi_t))
            k_lo, k_hi = int(math.ceil(lo)), int(math.ceil(hi))
            if k_lo == k_hi:
                return BoundValue(float((lo + hi) / 2), max(0, k_lo))
    finally:
        iv.prec = old
    raise ArithmeticError(f"bound for n={n}, r={r} too close to an integer")


# ---------------------------------------------------------------------------
# Cut tree
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Leaf:
    region: Region
    witness_a: EnclosureWitness
    witness_b: EnclosureWitness
    degraded: bool = False

    kind = "leaf"


@dataclass(frozen=True)
class TwoCutNode:
    boundary: object               # Line
    pieces: tuple                  # two half-plane Regions
    parts: tuple                   # (r1, r2)
    children: tuple

    kind = "two-cut"


@dataclass(frozen=True)
class ThreeCutNode:
    apex: object
    down: object
    d1: object
    d2: object
    pieces: tuple                  # three fan-cell Regions
    parts: tuple
    children: tuple

    kind = "three-cut"


def walk_leaves(node, path=""):
    if node.kind == "leaf":
        yield path or "root", node
    else:
        for i, child in enumerate(node.children):
            yield from walk_leaves(child, f"{path or 'root'}.{i}")


def tree_depth(node) -> int:
    if node.kind == "leaf":
        return 1
    return 1 + max(tree_depth(c) for c in node.children)


@dataclass(frozen=True)
class SolverConfig:
    search: SearchConfig = SearchConfig(max_cut_directions=600)
    validate_input: bool = True
    fallback_offsets: int = 9
    seed: int = 0  # echoed into certificates; the solver itself is seedless

    def echo(self) -> dict:
        return {
            "max_cut_directions": self.search.max_cut_directions,
            "kkm_grid": self.search.kkm_grid,
            "kkm_budget": self.search.kkm_budget,
            "kkm_floor_tries": self.search.kkm_floor_tries,
            "sign_spot_checks": self.search.sign_spot_checks,
            "recovery_cap": self.search.recovery_cap,
            "threads": self.search.threads,
            "validate_input": self.validate_input,
            "fallback_offsets": self.fallback_offsets,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class PartitionCertificate:
    n_a: int
    n_b: int
    r: int
    name_a: str
    name_b: str
    bound_a: BoundValue
    bound_b: BoundValue
    tree: object
    config_echo: dict

    def leaves(self):
        return list(walk_leaves(self.tree))

    @property
    def degraded_leaves(self):
        return [path for path, leaf in self.leaves() if leaf.degraded]

    @property
    def ok_claimed(self) -> bool:
        return not self.degraded_leaves


# ---------------------------------------------------------------------------
# Solving
# ---------------------------------------------------------------------------

def _fallback_two_cut(A, B, r1, r2, config: SolverConfig):
    """Unconditional cut maximizing the worse normalized enclosure product.

    Deterministic sweep over a few directions and offset quantiles; always
    returns some cut with four witnesses (sizes may be below the equitable
    thresholds; the caller marks affected leaves degraded).
    """
    u = choose_reference_direction([A, B])
    candidates = [u, -u]
    for dx, dy in DEFAULT_DIRECTION_SEEDS[1:6]:
        d = Direction.of(dx, dy)
        if not _parallel_to_some_line(d, (A, B)):
            candidates.append(d)
    best = None
    best_score = None
    for ucand in candidates:
        nu = ucand.rot90ccw()
        projs = sorted(set(family_projections(A, nu) + family_projections(B, nu)))
        if not projs:
            offsets = [mpq(0)]
        else:
            k = max(config.fallback_offsets, 1)
            offsets = []
            for i in range(1, k + 1):
                idx = i * (len(projs) - 1) // (k + 1)
                nxt = min(idx + 1, len(projs) - 1)
                offsets.append((projs[idx] + projs[nxt]) / 2
                               if nxt > idx else projs[idx] + mpq(1, 2))
            offsets = sorted(set(offsets))
        for t in offsets:
            sa1, wa1 = mu_side(A, nu, t, lower=True)
            sa2, wa2 = mu_side(A, nu, t, lower=False)
            sb1, wb1 = mu_side(B, nu, t, lower=True)
            sb2, wb2 = mu_side(B, nu, t, lower=False)
            score = min(mpq(sa1 * sa2, max(len(A), 1)),
                        mpq(sb1 * sb2, max(len(B), 1)))
            if best_score is None or score > best_score:
                best_score = score
                hp = halfplane_leq(nu, t)
                best = TwoCut(
                    direction=ucand, offset=t, boundary=hp.boundary,
                    parts=(r1, r2),
                    c1=Region.of_halfplane(hp),
                    c2=Region.of_halfplane(hp.complement()),
                    witness_a1=wa1, witness_a2=wa2,
                    witness_b1=wb1, witness_b2=wb2,
                )
    return best


def _cut_from_same_sign_pair(A, B, ra, rb, sign, config: SolverConfig):
    """Both split sizes share a sign: the two critical half-planes for the
    positively-signed family bound a slab, and any boundary inside it is an
    equitable cut.  Validated before being returned."""
    r = ra + rb
    first, second = (A, B) if sign > 0 else (B, A)
    u = choose_reference_direction([A, B])
    nu = u.rot90ccw()
    m1 = threshold_int(len(first), ra, r)
    m2 = threshold_int(len(first), rb, r)
    if m1 < 2 or m2 < 2:
        return None
    try:
        x0 = critical_halfplane(first, u, m1).offset
        x1 = -critical_halfplane(first, -u, m2).offset
    except GeometryError:
        return None
    if x0 > x1:
        return None
    t = (x0 + x1) / 2
    levels = (threshold_int(len(A), ra, r), threshold_int(len(A), rb, r),
              threshold_int(len(B), ra, r), threshold_int(len(B), rb, r))
    return _try_offset(A, B, nu, t, levels, ra, rb, u)


def _solve(A, B, r: int, config: SolverConfig):
    """Returns a tree whose leaf witnesses are in the local families' ids;
    regions are per-node pieces, intersected later by _finalize."""
    if r == 1:
        return Leaf(
            region=None,
            witness_a=EnclosureWitness.of(A, range(len(A)), Region.whole_plane()),
            witness_b=EnclosureWitness.of(B, range(len(B)), Region.whole_plane()),
        )

    def recurse_two(cut: TwoCut, r1: int, r2: int, degraded=False):
        sub_a1 = A.subfamily(cut.witness_a1.subset)
        sub_b1 = B.subfamily(cut.witness_b1.subset)
        sub_a2 = A.subfamily(cut.witness_a2.subset)
        sub_b2 = B.subfamily(cut.witness_b2.subset)
        child1 = _solve(sub_a1, sub_b1, r1, config)
        child2 = _solve(sub_a2, sub_b2, r2, config)
        child1 = _lift_ids(child1, cut.witness_a1.subset, cut.witness_b1.subset, A, B)
        child2 = _lift_ids(child2, cut.witness_a2.subset, cut.witness_b2.subset, A, B)
        if degraded:
            child1 = _mark_degraded(child1)
            child2 = _mark_degraded(child2)
        return TwoCutNode(
            boundary=cut.boundary, pieces=(cut.c1, cut.c2),
            parts=(r1, r2), children=(child1, child2),
        )

    for r1 in range(1, r):
        cut = find_equitable_two_cut(A, B, r1, r - r1, config.search)
        if cut is not None:
            return recurse_two(cut, r1, r - r1)

    summands = None
    try:
        table = assign_signs(A, B, r, config.search)
        summands = find_summands(table, r)
    except TwoCutMissed as missed:
        r1, r2 = missed.cut.parts
        return recurse_two(missed.cut, r1, r2)
    except (SignsUnrecoverable, SummandsNotFound, GeometryError):
        summands = None

    if summands is not None and summands.is_pair:
        ra, rb = summands.parts
        cut = _cut_from_same_sign_pair(A, B, ra, rb, summands.sign, config)
        if cut is not None:
            return recurse_two(cut, ra, rb)
    elif summands is not None:
        triple = summands.parts
        swap = summands.sign < 0
        first, second = (A, B) if not swap else (B, A)
        three = find_equitable_three_cut(first, second, triple, config.search)
        if three is not None:
            wit_first, wit_second = three.witnesses_a, three.witnesses_b
            wit_a, wit_b = (wit_first, wit_second) if not swap \
                else (wit_second, wit_first)
            children = []
            for i in range(3):
                sub_a = A.subfamily(wit_a[i].subset)
                sub_b = B.subfamily(wit_b[i].subset)
                child = _solve(sub_a, sub_b, triple[i], config)
                child = _lift_ids(child, wit_a[i].subset, wit_b[i].subset, A, B)
                children.append(child)
            cutting = three.cutting
            return ThreeCutNode(
                apex=cutting.apex, down=cutting.down,
                d1=cutting.d1, d2=cutting.d2,
                pieces=(cutting.c1, cutting.c2, cutting.c3),
                parts=tuple(triple), children=tuple(children),
            )

    r1 = (r + 1) // 2
    cut = _fallback_two_cut(A, B, r1, r - r1, config)
    return recurse_two(cut, r1, r - r1, degraded=True)


def _lift_ids(node, ids_a, ids_b, A, B):
    """Rewrite a subtree's leaf witnesses from subfamily ids to parent ids."""
    map_a = {k: orig for k, orig in enumerate(sorted(ids_a))}
    map_b = {k: orig for k, orig in enumerate(sorted(ids_b))}
    if node.kind == "leaf":
        return replace(
            node,
            witness_a=EnclosureWitness(
                A, tuple(sorted(map_a[i] for i in node.witness_a.subset)),
                node.witness_a.region),
            witness_b=EnclosureWitness(
                B, tuple(sorted(map_b[i] for i in node.witness_b.subset)),
                node.witness_b.region),
        )
    children = tuple(_lift_ids(c, ids_a, ids_b, A, B) for c in node.children)
    return replace(node, children=children)


def _mark_degraded(node):
    if node.kind == "leaf":
        return replace(node, degraded=True)
    return replace(node, children=tuple(_mark_degraded(c) for c in node.children))


def _finalize(node, region: Region, A, B):
    """Intersect piece regions down the tree and bind leaf witnesses."""
    if node.kind == "leaf":
        return replace(
            node,
            region=region,
            witness_a=EnclosureWitness(A, node.witness_a.subset, region),
            witness_b=EnclosureWitness(B, node.witness_b.subset, region),
        )
    children = tuple(
        _finalize(child, region.intersect(piece), A, B)
        for child, piece in zip(node.children, node.pieces))
    return replace(node, children=children)


def partition(A: LineFamily, B: LineFamily, r: int,
              config: SolverConfig = SolverConfig()) -> PartitionCertificate:
    """Partition the plane into r convex parts, each enclosing a witnessed
    sub-family of both A and B, recorded as a verifiable certificate."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if config.validate_input:
        report = validate_general_position(joint_family(A, B))
        if not report.ok:
            raise NotGeneralPosition(report)
    tree = _solve(A, B, r, config)
    tree = _finalize(tree, Region.whole_plane(), A, B)
    return PartitionCertificate(
        n_a=len(A), n_b=len(B), r=r, name_a=A.name, name_b=B.name,
        bound_a=bound_value(len(A), r), bound_b=bound_value(len(B), r),
        tree=tree, config_echo=config.echo(),
    )


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LeafReport:
    path: str
    size_a: int
    size_b: int
    required_a: int
    required_b: int
    meets_bound: bool
    degraded: bool
    failures: tuple


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    failures: tuple        # (where, kind, detail)
    leaf_reports: tuple

    def failing_leaves(self):
        return sorted({where for where, _, _ in self.failures})


def _check_two_cut_pieces(node, fail):
    p1, p2 = node.pieces
    if not (p1.combine == p2.combine == "and" and
            len(p1.halfplanes) == len(p2.halfplanes) == 1):
        fail("structure", "two-cut pieces are not half-planes")
        return
    h1, h2 = p1.halfplanes[0], p2.halfplanes[0]
    if h1.boundary != h2.boundary or h1.side != -h2.side:
        fail("structure", "two-cut pieces do not share a boundary")
    if h1.boundary != node.boundary:
        fail("structure", "recorded boundary differs from the pieces")


def _check_three_cut_pieces(node, fail):
    from .fans import _fan_regions
    expect = _fan_regions(node.apex, node.down, node.d1, node.d2)
    if tuple(node.pieces) != tuple(expect):
        fail("structure", "fan pieces do not match the recorded rays")
    if not expect[2].is_convex_form:
        fail("structure", "third fan cell is not convex")


def verify_certificate(A: LineFamily, B: LineFamily,
                       cert: PartitionCertificate) -> VerificationReport:
    """Re-verify a certificate from scratch: structural tiling, region
    reconstruction, exact witness enclosure, sizes against the exact integer
    form of the bound.  Trusts nothing from the solver."""
    failures = []
    leaf_reports = []

    def fail(where, kind, detail=""):
        failures.append((where, kind, detail))

    if cert.n_a != len(A) or cert.n_b != len(B):
        fail("root", "family-size", "certificate sizes disagree with inputs")
    required_a = bound_value(len(A), cert.r).required
    required_b = bound_value(len(B), cert.r).required
    if cert.bound_a.required != required_a or cert.bound_b.required != required_b:
        fail("root", "bound", "recorded bound disagrees with recomputation")

    def visit(node, region, path, parts_expected):
        where = path or "root"
        if node.kind == "leaf":
            if parts_expected != 1:
                fail(where, "structure", f"leaf with r={parts_expected}")
            leaf_fail = []
            if node.region != region:
                leaf_fail.append("region mismatch with path reconstruction")
            size_a = len(node.witness_a.subset)
            size_b = len(node.witness_b.subset)
            for name, w, fam in (("A", node.witness_a, A), ("B", node.witness_b, B)):
                if w.family != fam:
                    leaf_fail.append(f"witness {name} bound to a foreign family")
                if w.region != node.region:
                    leaf_fail.append(f"witness {name} region differs from leaf")
                try:
                    if not verify_witness(w):
                        leaf_fail.append(f"witness {name} enclosure fails")
                except GeometryError as exc:
                    leaf_fail.append(f"witness {name} invalid: {exc}")
            meets = size_a >= required_a and size_b >= required_b
            if not meets and not node.degraded:
                leaf_fail.append("bound not met and leaf not marked degraded")
            for msg in leaf_fail:
                fail(where, "leaf", msg)
            leaf_reports.append(LeafReport(
                path=where, size_a=size_a, size_b=size_b,
                required_a=required_a, required_b=required_b,
                meets_bound=meets, degraded=node.degraded,
                failures=tuple(leaf_fail)))
            return
        if sum(node.parts) != parts_expected:
            fail(where, "structure",
                 f"parts {node.parts} do not sum to {parts_expected}")
        if not (len(node.children) == len(node.parts) == len(node.pieces)):
            fail(where, "structure", "children/parts/pieces length mismatch")
            return
        if node.kind == "two-cut":
            _check_two_cut_pieces(node, lambda k, d: fail(where, k, d))
        elif node.kind == "three-cut":
            _check_three_cut_pieces(node, lambda k, d: fail(where, k, d))
        else:
            fail(where, "structure", f"unknown node kind {node.kind}")
            return
        for i, (child, piece) in enumerate(zip(node.children, node.pieces)):
            try:
                sub_region = region.intersect(piece)
            except GeometryError as exc:
                fail(where, "structure", f"piece {i} not intersectable: {exc}")
                continue
            visit(child, sub_region, f"{where}.{i}", node.parts[i])

    visit(cert.tree, Region.whole_plane(), "", cert.r)

    leaves = cert.leaves()
    if len(leaves) != cert.r:
        fail("root", "structure", f"{len(leaves)} leaves for r={cert.r}")
    if tree_depth(cert.tree) > cert.r:
        fail("root", "structure", "tree deeper than r")

    return VerificationReport(
        ok=not failures,
        failures=tuple(failures),
        leaf_reports=tuple(leaf_reports),
    )
