"""Exact rational planar primitives: points, lines, half-planes, regions.

Every predicate in this module (and everything built on top of it) is decided
in exact rational arithmetic.  Enclosure counts are integer-valued and jump
discontinuously as regions move, so there is no epsilon that would make a
floating-point kernel safe here.  Coordinates are `gmpy2.mpq` rationals
throughout; floats only ever appear as a conservative pre-filter inside the
general-position validator, never in a final decision.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from gmpy2 import mpq

Scalar = mpq

RatLike = "Scalar | int | str"


class GeometryError(Exception):
    """Base class for geometric precondition failures."""


class ParallelLines(GeometryError):
    def __init__(self, msg="lines are parallel", ids=None):
        super().__init__(msg)
        self.ids = ids


class BadId(GeometryError):
    pass


def rat(value, den=None) -> Scalar:
    """Build an exact rational from ints, strings like '3/4', or rationals."""
    if den is not None:
        return mpq(value, den)
    return mpq(value)


def rat_str(q) -> str:
    """Serialize a rational as 'num/den' (denominator always explicit)."""
    q = mpq(q)
    return f"{q.numerator}/{q.denominator}"


def _reduce_int_vector(coords: Sequence[Scalar]) -> tuple:
    """Scale a rational vector to coprime integers, preserving orientation."""
    from math import gcd

    coords = [mpq(c) for c in coords]
    den_lcm = 1
    for c in coords:
        d = int(c.denominator)
        den_lcm = den_lcm * d // gcd(den_lcm, d)
    ints = [int(c * den_lcm) for c in coords]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    return tuple(mpq(v) for v in ints)


@dataclass(frozen=True)
class Point:
    x: Scalar
    y: Scalar

    @staticmethod
    def of(x, y) -> "Point":
        return Point(mpq(x), mpq(y))

    def __sub__(self, other: "Point") -> "Direction":
        return Direction.of(self.x - other.x, self.y - other.y)

    def translated(self, d: "Direction", t=1) -> "Point":
        t = mpq(t)
        return Point(self.x + t * d.dx, self.y + t * d.dy)


@dataclass(frozen=True)
class Direction:
    """A nonzero direction vector, reduced to coprime integers.

    Orientation is preserved by the normalization: (0,-1) stays "down" and is
    distinct from (0,1).  Two Directions compare equal iff they point the same
    way.
    """

    dx: Scalar
    dy: Scalar

    @staticmethod
    def of(dx, dy) -> "Direction":
        dx, dy = mpq(dx), mpq(dy)
        if dx == 0 and dy == 0:
            raise GeometryError("zero direction")
        dx, dy = _reduce_int_vector((dx, dy))
        return Direction(dx, dy)

    def rot90ccw(self) -> "Direction":
        return Direction.of(-self.dy, self.dx)

    def rot90cw(self) -> "Direction":
        return Direction.of(self.dy, -self.dx)

    def __neg__(self) -> "Direction":
        return Direction.of(-self.dx, -self.dy)

    def cross(self, other: "Direction") -> Scalar:
        return self.dx * other.dy - self.dy * other.dx

    def dot(self, other: "Direction") -> Scalar:
        return self.dx * other.dx + self.dy * other.dy

    def is_parallel(self, other: "Direction") -> bool:
        return self.cross(other) == 0


DOWN = Direction.of(0, -1)


@dataclass(frozen=True)
class Line:
    """The locus a*x + b*y = c, in canonical form.

    Canonical means (a, b, c) are coprime integers with the first nonzero of
    (a, b) positive, so equal loci have equal coefficient triples.  `id` is
    the line's index within its family (-1 for standalone lines) and does not
    participate in equality.
    """

    a: Scalar
    b: Scalar
    c: Scalar
    id: int = field(default=-1, compare=False)

    @staticmethod
    def of(a, b, c, id=-1) -> "Line":
        a, b, c = mpq(a), mpq(b), mpq(c)
        if a == 0 and b == 0:
            raise GeometryError("degenerate line: (a, b) == (0, 0)")
        a, b, c = _reduce_int_vector((a, b, c))
        lead = a if a != 0 else b
        if lead < 0:
            a, b, c = -a, -b, -c
        return Line(a, b, c, id)

    @staticmethod
    def from_slope_intercept(m, c, id=-1) -> "Line":
        # y = m x + c  ->  m x - y = -c
        return Line.of(mpq(m), -1, -mpq(c), id)

    @staticmethod
    def through(p: Point, q: Point, id=-1) -> "Line":
        if p == q:
            raise GeometryError("two equal points do not determine a line")
        a = q.y - p.y
        b = p.x - q.x
        return Line.of(a, b, a * p.x + b * p.y, id)

    @staticmethod
    def through_direction(p: Point, d: Direction, id=-1) -> "Line":
        a, b = -d.dy, d.dx
        return Line.of(a, b, a * p.x + b * p.y, id)

    def with_id(self, id: int) -> "Line":
        return Line(self.a, self.b, self.c, id)

    def eval(self, p: Point) -> Scalar:
        return self.a * p.x + self.b * p.y - self.c

    def contains(self, p: Point) -> bool:
        return self.eval(p) == 0

    def direction(self) -> Direction:
        return Direction.of(-self.b, self.a)

    @property
    def slope(self):
        """dy/dx, or None for vertical lines."""
        if self.b == 0:
            return None
        return -self.a / self.b

    @property
    def y_intercept(self):
        """y at x = 0, or None for vertical lines."""
        if self.b == 0:
            return None
        return self.c / self.b

    def is_parallel(self, other: "Line") -> bool:
        return self.a * other.b - self.b * other.a == 0


@dataclass(frozen=True)
class LineFamily:
    """An ordered family of pairwise-distinct lines, ids 0..n-1 by position."""

    lines: tuple
    name: str = "A"

    @staticmethod
    def of(lines: Iterable[Line], name: str = "A") -> "LineFamily":
        relabeled = tuple(ln.with_id(i) for i, ln in enumerate(lines))
        return LineFamily(relabeled, name)

    def __len__(self) -> int:
        return len(self.lines)

    def __getitem__(self, i: int) -> Line:
        return self.lines[i]

    def __iter__(self):
        return iter(self.lines)

    def check_ids(self, ids: Iterable[int]) -> tuple:
        ids = tuple(ids)
        n = len(self.lines)
        if len(set(ids)) != len(ids) or any(not (0 <= i < n) for i in ids):
            raise BadId(f"invalid ids {ids} for family of size {n}")
        return ids

    def subfamily(self, ids: Iterable[int], name: str | None = None) -> "LineFamily":
        """New family from the given ids; new ids follow the sorted order."""
        ids = sorted(self.check_ids(ids))
        return LineFamily.of([self.lines[i] for i in ids], name or self.name)


def joint_family(*families: LineFamily, name: str = "union") -> LineFamily:
    lines = [ln for fam in families for ln in fam]
    return LineFamily.of(lines, name)


@dataclass(frozen=True)
class HalfPlane:
    """A closed half-plane: side * (a*x + b*y - c) >= 0."""

    boundary: Line
    side: int

    @staticmethod
    def of(boundary: Line, side: int) -> "HalfPlane":
        if side not in (1, -1):
            raise GeometryError(f"side must be +1 or -1, got {side}")
        return HalfPlane(boundary, side)

    def contains(self, p: Point) -> bool:
        return self.side * self.boundary.eval(p) >= 0

    def strictly_contains(self, p: Point) -> bool:
        return self.side * self.boundary.eval(p) > 0

    def complement(self) -> "HalfPlane":
        """The other closed half-plane (shares the boundary line)."""
        return HalfPlane(self.boundary, -self.side)

    def inner_normal(self) -> Direction:
        return Direction.of(self.side * self.boundary.a, self.side * self.boundary.b)


@dataclass(frozen=True)
class Ray:
    apex: Point
    dir: Direction

    def line(self) -> Line:
        return Line.through_direction(self.apex, self.dir)

    def contains(self, p: Point) -> bool:
        vx = p.x - self.apex.x
        vy = p.y - self.apex.y
        if self.dir.dx * vy - self.dir.dy * vx != 0:
            return False
        return self.dir.dx * vx + self.dir.dy * vy >= 0

    def param_of(self, p: Point):
        """Position of an on-line point along the ray (apex at 0)."""
        if self.dir.dx != 0:
            return (p.x - self.apex.x) / self.dir.dx
        return (p.y - self.apex.y) / self.dir.dy


@dataclass(frozen=True)
class Region:
    """A plane region built from closed half-planes.

    combine="and" is an intersection (always convex); combine="or" is a union,
    used for the nonconvex side of a wedge and for reflex fan cells.  The
    whole plane is the empty intersection.
    """

    halfplanes: tuple
    combine: str = "and"
    kind: str = "region"

    @staticmethod
    def whole_plane() -> "Region":
        return Region((), "and", "whole-plane")

    @staticmethod
    def of_halfplane(h: HalfPlane) -> "Region":
        return Region((h,), "and", "halfplane")

    @staticmethod
    def strip(lo: HalfPlane, hi: HalfPlane) -> "Region":
        if not lo.boundary.is_parallel(hi.boundary):
            raise GeometryError("strip boundaries must be parallel")
        return Region((lo, hi), "and", "strip")

    @staticmethod
    def sector_ccw(apex: Point, d_from: Direction, d_to: Direction,
                   kind: str = "fan-cell") -> "Region":
        """Closed angular sector swept counterclockwise from d_from to d_to.

        Convex (intersection form) when the sweep is <= pi, otherwise the
        union of the two bounding half-planes.  A zero sweep degenerates to
        the line through the apex along d_from.
        """
        h_from = _halfplane_ccw_of(apex, d_from)
        h_to = _halfplane_ccw_of(apex, d_to).complement()
        cr = d_from.cross(d_to)
        if cr == 0 and d_from.dot(d_to) > 0:
            # zero sweep: the two line-sides alone would describe the whole
            # line; cut it down to the closed ray from the apex.
            forward = _halfplane_forward(apex, d_from)
            return Region((h_from, h_to, forward), "and", kind)
        if cr > 0 or cr == 0:  # cr == 0 here is the half-turn: a half-plane
            return Region((h_from, h_to), "and", kind)
        return Region((h_from, h_to), "or", kind)

    def contains(self, p: Point) -> bool:
        if self.combine == "and":
            return all(h.contains(p) for h in self.halfplanes)
        return any(h.contains(p) for h in self.halfplanes)

    @property
    def is_convex_form(self) -> bool:
        return self.combine == "and"

    def intersect(self, other: "Region") -> "Region":
        if self.combine != "and" or other.combine != "and":
            raise GeometryError("can only intersect intersection-form regions")
        seen = []
        for h in self.halfplanes + other.halfplanes:
            if h not in seen:
                seen.append(h)
        return Region(tuple(seen), "and", "region")


def _halfplane_ccw_of(apex: Point, d: Direction) -> HalfPlane:
    """Closed half-plane of points (weakly) counterclockwise of d at apex."""
    # cross(d, p - apex) >= 0  <=>  -d.dy*(px-ax) + d.dx*(py-ay) >= 0
    a, b = -d.dy, d.dx
    ln = Line.of(a, b, a * apex.x + b * apex.y)
    # Line.of may flip the sign of (a, b, c); keep the intended side.
    side = 1 if (ln.a * a + ln.b * b) > 0 else -1
    return HalfPlane(ln, side)


def _halfplane_forward(apex: Point, d: Direction) -> HalfPlane:
    """Closed half-plane {p : <d, p - apex> >= 0}."""
    a, b = d.dx, d.dy
    ln = Line.of(a, b, a * apex.x + b * apex.y)
    side = 1 if (ln.a * a + ln.b * b) > 0 else -1
    return HalfPlane(ln, side)


def wedge_region(apex: Point, d1: Direction, d2: Direction) -> Region:
    """Convex sector from d1 counterclockwise to d2 (sweep must be < pi)."""
    if d1.cross(d2) <= 0:
        raise GeometryError("wedge rays must span an angle in (0, pi)")
    r = Region.sector_ccw(apex, d1, d2, kind="wedge")
    return r


def wedge_complement(apex: Point, d1: Direction, d2: Direction) -> Region:
    """Closure of the complement of wedge_region(apex, d1, d2)."""
    if d1.cross(d2) <= 0:
        raise GeometryError("wedge rays must span an angle in (0, pi)")
    return Region.sector_ccw(apex, d2, d1, kind="fan-cell")


# ---------------------------------------------------------------------------
# Intersections and incidence sets
# ---------------------------------------------------------------------------

def intersect_lines(l1: Line, l2: Line) -> Point:
    det = l1.a * l2.b - l2.a * l1.b
    if det == 0:
        raise ParallelLines(ids=(l1.id, l2.id))
    x = (l1.c * l2.b - l2.c * l1.b) / det
    y = (l1.a * l2.c - l2.a * l1.c) / det
    return Point(x, y)


@lru_cache(maxsize=256)
def incidence_set(family: LineFamily) -> tuple:
    """All pairwise intersection points, labeled by unordered id pairs."""
    out = []
    for i, j in itertools.combinations(range(len(family)), 2):
        p = intersect_lines(family[i], family[j])
        out.append((p, (i, j)))
    return tuple(out)


def incidence_points(family: LineFamily) -> tuple:
    return tuple(p for p, _ in incidence_set(family))


# ---------------------------------------------------------------------------
# General position
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneralPositionReport:
    ok: bool
    violations: tuple

    def kinds(self):
        return {k for k, _ in self.violations}


def _slopes_equal(d1x, d1y, d2x, d2y) -> bool:
    return d1y * d2x == d2y * d1x


def _collinear_exact_scan(pts, pair_ids):
    """O(m^2) exact scan for collinear triples among incidence points."""
    violations = []
    m = len(pts)
    for i in range(m):
        groups = {}
        xi, yi = pts[i].x, pts[i].y
        for j in range(i + 1, m):
            dx = pts[j].x - xi
            dy = pts[j].y - yi
            if dx == 0 and dy == 0:
                continue  # coincident points are reported as concurrency
            key = ("v",) if dx == 0 else ("s", dy / dx)
            groups.setdefault(key, []).append(j)
        for js in groups.values():
            if len(js) < 2:
                continue
            for j, k in itertools.combinations(js, 2):
                _record_collinear(violations, pair_ids, i, j, k)
    return violations


def _record_collinear(violations, pair_ids, i, j, k):
    common = set(pair_ids[i]) & set(pair_ids[j]) & set(pair_ids[k])
    if common:
        return  # all three points lie on a shared family line
    ids = tuple(sorted(set(pair_ids[i]) | set(pair_ids[j]) | set(pair_ids[k])))
    violations.append(("collinear-incidences", ids))


def _exact_pairwise_check(violations, pts, pair_ids, i, group):
    xi, yi = pts[i].x, pts[i].y
    diffs = []
    for j in group:
        ddx = pts[j].x - xi
        ddy = pts[j].y - yi
        if ddx == 0 and ddy == 0:
            continue
        diffs.append((j, ddx, ddy))
    for (j, ax, ay), (k, bx, by) in itertools.combinations(diffs, 2):
        if set(pair_ids[i]) & set(pair_ids[j]) & set(pair_ids[k]):
            continue  # exempt either way
        if _slopes_equal(ax, ay, bx, by):
            _record_collinear(violations, pair_ids, i, j, k)


def _collinear_prefiltered_scan(pts, pair_ids, lines):
    """Float pre-filter + exact confirmation, for large incidence sets.

    Per anchor point, slopes to the later points are grouped by overlap of
    conservatively-widened float intervals, so exactly-equal slopes always
    share a cluster; only clustered pairs are re-checked exactly.  Points on
    the anchor's own two lines are excluded up front (those runs are exempt
    by construction) and replaced by two exact line-direction probes, so the
    verdict stays exact at every size.
    """
    violations = []
    m = len(pts)
    xs = np.array([float(p.x) for p in pts])
    ys = np.array([float(p.y) for p in pts])
    id1 = np.array([pair[0] for pair in pair_ids])
    id2 = np.array([pair[1] for pair in pair_ids])
    eps = np.finfo(float).eps
    line_dirs = {ln.id: ln.direction() for ln in lines}
    for i in range(m - 1):
        a, b = pair_ids[i]
        tail1, tail2 = id1[i + 1:], id2[i + 1:]
        shares = ((tail1 == a) | (tail1 == b) | (tail2 == a) | (tail2 == b))
        keep = np.nonzero(~shares)[0]
        if len(keep) == 0:
            continue
        jx = xs[i + 1:][keep]
        jy = ys[i + 1:][keep]
        dx = jx - xs[i]
        dy = jy - ys[i]
        absx = np.abs(jx) + abs(xs[i])
        absy = np.abs(jy) + abs(ys[i])
        near_vertical = np.abs(dx) <= 4 * eps * absx
        vert = np.nonzero(near_vertical)[0]
        if len(vert) >= 2:
            _exact_pairwise_check(violations, pts, pair_ids, i,
                                  [i + 1 + int(keep[v]) for v in vert])
        fin = np.nonzero(~near_vertical)[0]
        sharer_cache = {}

        def first_sharer(line_id):
            if line_id not in sharer_cache:
                found = None
                for j in range(m):
                    if j != i and line_id in pair_ids[j]:
                        found = j
                        break
                sharer_cache[line_id] = found
            return sharer_cache[line_id]

        if len(fin) >= 1:
            slope = dy[fin] / dx[fin]
            width = 8 * eps * (absy[fin] + np.abs(slope) * absx[fin]) \
                / np.abs(dx[fin]) + 1e-300
            # Probes for the anchor's own lines: an exactly-collinear triple
            # (anchor, same-line point, other point) shows up as an "other"
            # slope equal to that line's direction.
            for line_id in (a, b):
                d = line_dirs[line_id]
                if d.dx == 0:
                    continue  # would have been a vertical candidate
                sfl = float(d.dy) / float(d.dx)
                hit = np.abs(slope - sfl) <= width + 4 * eps * abs(sfl) + 1e-300
                for v in np.nonzero(hit)[0]:
                    j = i + 1 + int(keep[fin[v]])
                    ddx = pts[j].x - pts[i].x
                    ddy = pts[j].y - pts[i].y
                    if _slopes_equal(d.dx, d.dy, ddx, ddy):
                        other = first_sharer(line_id)
                        if other is not None:
                            _record_collinear(violations, pair_ids, i, other, j)
        if len(fin) >= 2:
            perm = np.argsort(slope)
            s_sorted = slope[perm]
            w_sorted = width[perm]
            # Interval-overlap clusters against a running maximum; using the
            # global running max only ever merges clusters (conservative).
            run_hi = np.maximum.accumulate(s_sorted + w_sorted)
            joined = np.nonzero((s_sorted[1:] - w_sorted[1:]) <= run_hi[:-1])[0]
            if len(joined):
                splits = np.nonzero(np.diff(joined) > 1)[0]
                starts = [0] + [int(s) + 1 for s in splits]
                ends = starts[1:] + [len(joined)]
                for si, ei in zip(starts, ends):
                    lo = int(joined[si])
                    hi = int(joined[ei - 1]) + 2
                    _exact_pairwise_check(
                        violations, pts, pair_ids, i,
                        [i + 1 + int(keep[fin[perm[c]]]) for c in range(lo, hi)])
    return violations


def validate_general_position(family: LineFamily, *,
                              exact_scan_cap: int = 600) -> GeneralPositionReport:
    """Check the three general-position conditions for a line family.

    Reports (never raises): parallel pairs, concurrent triples, and collinear
    incidence-point triples that do not lie on a common family line.  Above
    `exact_scan_cap` incidence points the collinearity scan switches to a
    conservatively-widened float pre-filter whose candidates are confirmed
    exactly, so the verdict stays exact at every size.
    """
    violations = []
    n = len(family)

    by_dir = {}
    for ln in family:
        by_dir.setdefault(ln.direction(), []).append(ln.id)
    for ids in by_dir.values():
        if len(ids) > 1:
            for i, j in itertools.combinations(sorted(ids), 2):
                violations.append(("parallel-pair", (i, j)))
    if violations:
        return GeneralPositionReport(False, tuple(violations))

    pts = []
    pair_ids = []
    by_point = {}
    for p, pair in incidence_set(family):
        pts.append(p)
        pair_ids.append(pair)
        by_point.setdefault((p.x, p.y), set()).update(pair)
    for key, ids in sorted(by_point.items(), key=lambda kv: tuple(map(str, kv[0]))):
        if len(ids) > 2:
            violations.append(("concurrent-triple", tuple(sorted(ids))))

    if len(pts) <= exact_scan_cap:
        collinear = _collinear_exact_scan(pts, pair_ids)
    else:
        collinear = _collinear_prefiltered_scan(pts, pair_ids, family.lines)
    seen = set()
    for kind, ids in collinear:
        if ids not in seen:
            seen.add(ids)
            violations.append((kind, ids))

    return GeneralPositionReport(not violations, tuple(violations))


# ---------------------------------------------------------------------------
# Reference direction
# ---------------------------------------------------------------------------

def _direction_ok(u: Direction, families: Sequence[LineFamily]) -> bool:
    for fam in families:
        for ln in fam:
            if u.is_parallel(ln.direction()):
                return False
    nu = u.rot90ccw()
    points = {(p.x, p.y) for fam in families for p in incidence_points(fam)}
    seen = set()
    for x, y in points:
        proj = nu.dx * x + nu.dy * y
        if proj in seen:
            return False
        seen.add(proj)
    return True


def choose_reference_direction(families: Sequence[LineFamily]) -> Direction:
    """Deterministically pick a "down" direction usable as the sweep frame.

    The returned u is parallel to no family line, and the projections of all
    families' incidence points onto rot90ccw(u) are pairwise distinct (the
    exact substitute for rotating the plane until x-coordinates differ).
    Defaults to (0,-1) whenever that already works.
    """
    families = [f for f in families if len(f) > 0]
    candidates = [DOWN]
    for k in range(1, 2000):
        candidates.append(Direction.of(1, -k))
        candidates.append(Direction.of(-1, -k))
        candidates.append(Direction.of(k, -1))
        candidates.append(Direction.of(-k, -1))
    for u in candidates:
        if _direction_ok(u, families):
            return u
    raise GeometryError("no valid reference direction found (input degenerate?)")


def projection(nu: Direction, p: Point) -> Scalar:
    return nu.dx * p.x + nu.dy * p.y


# ---------------------------------------------------------------------------
# Perturbation utility
# ---------------------------------------------------------------------------

def perturb_intercepts(family: LineFamily, magnitude) -> LineFamily:
    """Shift each line's constant term by a distinct rational below magnitude.

    Degenerate inputs are never silently repaired by the validators; this is
    the explicit opt-in used by generators to climb off degeneracies.
    """
    magnitude = mpq(magnitude)
    if magnitude <= 0:
        raise GeometryError("perturbation magnitude must be positive")
    n = len(family)
    out = []
    for k, ln in enumerate(family):
        # Quadratic steps: an arithmetic progression of shifts would preserve
        # affine degeneracies that are themselves index progressions.
        delta = magnitude * (k + 1) ** 2 / (n + 1) ** 2
        out.append(Line.of(ln.a, ln.b, ln.c + delta))
    return LineFamily.of(out, family.name)
