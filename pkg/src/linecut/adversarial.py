"""Hard instances: line families that defeat vertical-strip partitions.

The construction sums r generator vectors with increasing slopes and rapidly
growing norms over an a^r grid; the slope of the difference of two grid
points is then pinned near the slope indexed by their highest differing
coordinate.  Dualizing (m, c) points to lines y = m x + c turns that slope
separation into strip hardness: any r vertical strips leave some strip
enclosing at most a lines.  The norm schedule is found by doubling until
the separation property verifies exactly over all pairs; nothing about the
instance is accepted probabilistically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from gmpy2 import mpq

from .geometry import (
    GeometryError,
    HalfPlane,
    Line,
    LineFamily,
    Point,
    Region,
    incidence_points,
    incidence_set,
    joint_family,
    perturb_intercepts,
    validate_general_position,
)
from .enclosure import mu_exact


class SizeCap(GeometryError):
    pass


class OracleCap(GeometryError):
    pass


class ConstructionFailed(GeometryError):
    pass


@dataclass(frozen=True)
class AdversarialParams:
    a: int
    r: int
    slopes: tuple       # interval centers l_1 < ... < l_r
    eps: object         # interval half-width; intervals pairwise disjoint
    norms: tuple        # scale factors: generator v_i = norms[i] * (1, l_i)
    growth: int         # the doubling factor that verified
    perturbation: object  # intercept perturbation magnitude (0 if none)

    def interval(self, j):
        return (self.slopes[j - 1] - self.eps, self.slopes[j - 1] + self.eps)


@dataclass(frozen=True)
class HardInstance:
    family: LineFamily
    params: AdversarialParams
    grid: tuple         # the (m, c) points, index-aligned with the lines
    labels: tuple       # grid coordinates in [1..a]^r per point


def _grid_points(a, r, scales, slopes):
    pts = []
    labels = []
    for coords in itertools.product(range(1, a + 1), repeat=r):
        x = sum(c * s for c, s in zip(coords, scales))
        y = sum(c * s * l for c, s, l in zip(coords, scales, slopes))
        pts.append(Point(mpq(x), mpq(y)))
        labels.append(coords)
    return tuple(pts), tuple(labels)


def highest_differing(label_p, label_q) -> int:
    diff = [i for i in range(len(label_p)) if label_p[i] != label_q[i]]
    return diff[-1] + 1 if diff else 0


def check_separation(points, labels, params: AdversarialParams):
    """Exact check: every pair's slope lies in the interval of its highest
    differing coordinate.  Returns (ok, offending pair or None)."""
    for i, j in itertools.combinations(range(len(points)), 2):
        level = highest_differing(labels[i], labels[j])
        if level == 0:
            return False, (i, j)  # duplicate grid point
        dx = points[j].x - points[i].x
        dy = points[j].y - points[i].y
        if dx == 0:
            return False, (i, j)
        s = dy / dx
        lo, hi = params.interval(level)
        if not (lo <= s <= hi):
            return False, (i, j)
    return True, None


def _lines_from_grid(points) -> LineFamily:
    return LineFamily.of(
        [Line.from_slope_intercept(p.x, p.y) for p in points], "A")


def build_hard_family(a: int, r: int, *, size_cap: int = 64,
                      initial_growth: int = 2,
                      verify: bool = True) -> HardInstance:
    """Construct the a^r-line strip-hard family, verified exactly.

    The norm schedule doubles until the separation property holds over all
    pairs; intercepts are then perturbed by distinct small rationals to reach
    general position, re-verifying separation afterwards.  verify=False
    freezes the initial growth factor (used to demonstrate broken schedules).
    """
    if a < 1 or r < 1:
        raise ValueError("need a >= 1 and r >= 1")
    if a ** r > size_cap:
        raise SizeCap(f"a^r = {a ** r} exceeds the size cap {size_cap}")
    slopes = tuple(mpq(i) for i in range(1, r + 1))
    eps = mpq(1, 4)
    growth = initial_growth
    for _ in range(64):
        scales = tuple(mpq(growth) ** i for i in range(r))
        params = AdversarialParams(a, r, slopes, eps, scales, growth, mpq(0))
        points, labels = _grid_points(a, r, scales, slopes)
        ok, _ = check_separation(points, labels, params)
        if ok or not verify:
            break
        growth *= 2
    else:
        raise ConstructionFailed("no norm schedule verified within 64 doublings")

    family = _lines_from_grid(points)
    perturbation = mpq(0)
    if verify and len(family) > 1 and not validate_general_position(family).ok:
        magnitude = _slack_bound(points, labels, params)
        for _ in range(40):
            candidate = perturb_intercepts(family, magnitude)
            new_points = tuple(Point(ln.slope, ln.y_intercept) for ln in candidate)
            sep_ok, _ = check_separation(new_points, labels, params)
            if sep_ok and validate_general_position(candidate).ok:
                family = candidate
                points = new_points
                perturbation = magnitude
                break
            magnitude /= 2
        else:
            raise ConstructionFailed("perturbation did not reach general position")
    params = AdversarialParams(a, r, slopes, eps, scales, growth, perturbation)
    return HardInstance(family, params, points, labels)


def _slack_bound(points, labels, params):
    """A perturbation magnitude small enough to keep all pair slopes inside
    their intervals: slack to the interval edges times the smallest dx."""
    best = None
    for i, j in itertools.combinations(range(len(points)), 2):
        level = highest_differing(labels[i], labels[j])
        dx = abs(points[j].x - points[i].x)
        s = (points[j].y - points[i].y) / (points[j].x - points[i].x)
        lo, hi = params.interval(level)
        slack = min(s - lo, hi - s)
        room = slack * dx / 2
        if best is None or room < best:
            best = room
    return best if best is not None and best > 0 else mpq(1, 1024)


@dataclass(frozen=True)
class StripHardnessReport:
    ok: bool
    checked_partitions: int
    counterexample: tuple  # (boundaries, per-strip sizes) when not ok

    def __bool__(self):
        return self.ok


def _strip_region(lo, hi) -> Region:
    parts = []
    if lo is not None:
        parts.append(HalfPlane.of(Line.of(1, 0, lo), 1))   # x >= lo
    if hi is not None:
        parts.append(HalfPlane.of(Line.of(1, 0, hi), -1))  # x <= hi
    if not parts:
        return Region.whole_plane()
    return Region(tuple(parts), "and", "strip" if len(parts) == 2 else "halfplane")


def verify_strip_hardness(inst: HardInstance, *,
                          oracle_cap: int = 30) -> StripHardnessReport:
    """Exhaustively check that every r-strip partition has a weak strip.

    Boundary placements run over all combinatorially distinct positions:
    each distinct incidence x-coordinate, the midpoints between consecutive
    ones, and one position beyond each end.  Every resulting partition must
    have a strip enclosing at most a lines (exact measure).
    """
    family = inst.family
    a, r = inst.params.a, inst.params.r
    if len(family) > oracle_cap:
        raise OracleCap(f"{len(family)} lines exceed the oracle cap {oracle_cap}")
    xs = sorted({p.x for p in incidence_points(family)})
    placements = []
    if xs:
        placements.append(xs[0] - 1)
        for u, v in zip(xs, xs[1:]):
            placements.append(u)
            placements.append((u + v) / 2)
        placements.append(xs[-1])
        placements.append(xs[-1] + 1)
    else:
        placements.append(mpq(0))
    checked = 0
    for bounds in itertools.combinations_with_replacement(placements, r - 1):
        checked += 1
        cuts = [None] + list(bounds) + [None]
        weak = False
        sizes = []
        for lo, hi in zip(cuts, cuts[1:]):
            region = _strip_region(lo, hi)
            size, _ = mu_exact(family, region, target=a + 1)
            sizes.append(size)
            if size <= a:
                weak = True
                break
        if not weak:
            return StripHardnessReport(False, checked, (bounds, tuple(sizes)))
    return StripHardnessReport(True, checked, ())


def build_two_family_instance(a: int, r: int, height, *,
                              size_cap: int = 64):
    """The hard family plus a second family whose incidences sit in a unit
    disk far above it.  Returns (A, B, diagnostics)."""
    height = mpq(height)
    if height <= 0:
        raise ValueError("height must be positive")
    inst = build_hard_family(a, r, size_cap=size_cap)
    A = inst.family
    m = len(A)
    pts_a = incidence_points(A) or (Point.of(0, 0),)
    top = max(p.y for p in pts_a)
    cx = sum(p.x for p in pts_a) / len(pts_a)
    cy = top + height
    used_slopes = {ln.slope for ln in A}
    max_slope = max(s for s in used_slopes if s is not None)
    slopes = []
    k = 1
    while len(slopes) < m:
        cand = max_slope + k
        if cand not in used_slopes:
            slopes.append(cand)
        k += 1
    rho = mpq(1, 4)
    for _ in range(40):
        lines = []
        for idx, s in enumerate(slopes):
            t = mpq(idx + 1, m + 1)
            qx = cx + rho * (1 - t * t) / (1 + t * t)
            qy = cy + rho * 2 * t / (1 + t * t)
            lines.append(Line.from_slope_intercept(s, qy - s * qx))
        B = LineFamily.of(lines, "B")
        if m == 1:
            break
        radius2 = max((p.x - cx) ** 2 + (p.y - cy) ** 2
                      for p in incidence_points(B))
        if radius2 <= 1 and validate_general_position(joint_family(A, B)).ok:
            break
        rho /= 2
    else:
        raise ConstructionFailed("second family did not settle into the disk")
    diagnostics = {
        "disk_center": (cx, cy),
        "disk_radius_sq": radius2 if m > 1 else mpq(0),
        "separation_height": height,
    }
    return A, B, diagnostics


def slope_duality_holds(family: LineFamily, grid) -> bool:
    """The x-coordinate of two lines' crossing equals the negative of the
    slope between their (m, c) grid points; exact identity check."""
    from .geometry import intersect_lines
    for i, j in itertools.combinations(range(len(family)), 2):
        p = intersect_lines(family[i], family[j])
        dm = grid[j].x - grid[i].x
        dc = grid[j].y - grid[i].y
        if dm == 0 or p.x != -(dc / dm):
            return False
    return True
