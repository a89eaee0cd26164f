"""Three-ray fans at a point: canonical cuttings and the three-cut search.

A cutting at apex p has a downward reference ray and two rays at the minimal
sweep angles whose closed sectors reach the required enclosure levels for the
first family.  Angles are represented by exact ray directions: sweep events
happen only when a bounding ray passes an incidence point, so the minima are
attained at point directions and binary search over them is exact.

The three-cut search samples apexes in the critical strip, colors them by
which sectors satisfy the second family's thresholds, and refines toward a
tri-colored point.  A fixed-point theorem guarantees such a point exists;
soundness never relies on it, because every candidate is validated directly
(all six enclosure conditions, with witnesses) before being returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cmp_to_key

from gmpy2 import mpq

from .geometry import (
    DOWN,
    Direction,
    GeometryError,
    LineFamily,
    Point,
    Region,
    choose_reference_direction,
    incidence_points,
    incidence_set,
    projection,
)
from .enclosure import EnclosureWitness, mu_decision, verify_witness
from .cuts import (
    SearchConfig,
    critical_halfplane,
    family_projections,
    threshold_int,
)


class OutOfStrip(GeometryError):
    """Cutting apex lies outside the closed critical strip."""


class ThresholdUnreachable(GeometryError):
    """Even the half-plane at sweep angle pi misses the enclosure level."""


# ---------------------------------------------------------------------------
# Exact angular sweeps
# ---------------------------------------------------------------------------

def _sweep_bucket(base: Direction, d: Direction, clockwise: bool) -> int:
    """0 along base, 1 strictly within the first half-turn of the sweep,
    2 opposite base, 3 in the second half-turn."""
    c = base.cross(d)
    if clockwise:
        c = -c
    if c > 0:
        return 1
    if c == 0:
        return 0 if base.dot(d) > 0 else 2
    return 3


def _sweep_cmp(base: Direction, a: Direction, b: Direction, clockwise: bool) -> int:
    ba = _sweep_bucket(base, a, clockwise)
    bb = _sweep_bucket(base, b, clockwise)
    if ba != bb:
        return -1 if ba < bb else 1
    c = a.cross(b)
    if clockwise:
        c = -c
    if c > 0:
        return -1
    if c < 0:
        return 1
    return 0


def _sweep_events(apex: Point, base: Direction, points, clockwise: bool):
    """Candidate sweep-end directions: base, point directions up to a
    half-turn, then the half-turn itself."""
    dirs = set()
    for q in points:
        if q.x == apex.x and q.y == apex.y:
            continue  # a point at the apex lies in every closed sector
        dirs.add(Direction.of(q.x - apex.x, q.y - apex.y))
    evs = [d for d in dirs if _sweep_bucket(base, d, clockwise) in (1, 2)]
    evs.sort(key=cmp_to_key(lambda a, b: _sweep_cmp(base, a, b, clockwise)))
    out = [base] + evs
    if out[-1] != -base:
        out.append(-base)
    return out


def _sector_cw(apex: Point, down: Direction, d_end: Direction) -> Region:
    """Sector swept clockwise from down to d_end (the first fan cell)."""
    return Region.sector_ccw(apex, d_end, down)


def _sector_ccw(apex: Point, down: Direction, d_end: Direction) -> Region:
    return Region.sector_ccw(apex, down, d_end)


def _min_sweep_direction(family: LineFamily, apex: Point, down: Direction,
                         level: int, clockwise: bool, banned_pair=None,
                         points=None) -> Direction:
    """Smallest sweep whose closed sector encloses >= level lines."""
    if level <= 1 and banned_pair is None:
        return down
    pts = points if points is not None else incidence_points(family)
    candidates = _sweep_events(apex, down, pts, clockwise)
    make = _sector_cw if clockwise else _sector_ccw

    def accept(d_end):
        region = make(apex, down, d_end)
        size, _ = mu_decision(family, region, max(level, 1), banned_pair)
        return size >= max(level, 1)

    lo, hi = 0, len(candidates) - 1
    if not accept(candidates[hi]):
        raise ThresholdUnreachable(
            f"half-plane at sweep pi encloses < {level} lines")
    while lo < hi:
        mid = (lo + hi) // 2
        if accept(candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return candidates[lo]


def _max_sweep(base: Direction, clockwise: bool, *dirs: Direction) -> Direction:
    best = dirs[0]
    for d in dirs[1:]:
        if _sweep_cmp(base, best, d, clockwise) < 0:
            best = d
    return best


def _dir_lerp(target: Direction, base: Direction, w, via: Direction) -> Direction:
    """Continuous monotone path of exact directions from base (w=0) to
    target (w=1); routed through `via` when the endpoints are antipodal."""
    w = mpq(w)
    if w <= 0:
        return base
    if w >= 1:
        return target
    if target.cross(base) == 0 and target.dot(base) < 0:
        if w == mpq(1, 2):
            return via
        if w < mpq(1, 2):
            return _dir_lerp(via, base, 2 * w, via)
        return _dir_lerp(target, via, 2 * w - 1, via)
    dx = w * target.dx + (1 - w) * base.dx
    dy = w * target.dy + (1 - w) * base.dy
    return Direction.of(dx, dy)


# ---------------------------------------------------------------------------
# Canonical cuttings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FanContext:
    """Frame and blending context for canonical cuttings."""

    down: Direction = DOWN
    x0: object = None          # critical strip bounds along nu (None = open)
    x1: object = None
    b_family: LineFamily = None
    level_b1: int = None       # second family's integer levels for C1/C2
    level_b2: int = None
    eps: object = None         # blend half-width; default from the family


@dataclass(frozen=True)
class CanonicalCutting:
    apex: Point
    down: Direction
    d1: Direction              # end of the clockwise sweep (C1 side)
    d2: Direction              # end of the counterclockwise sweep (C2 side)
    c1: Region
    c2: Region
    c3: Region
    mode: str
    c3_convex: bool
    blends: tuple = ()

    def regions(self):
        return (self.c1, self.c2, self.c3)


def default_blend_eps(family: LineFamily, nu: Direction):
    """Half the minimum gap between consecutive incidence projections."""
    projs = family_projections(family, nu)
    gaps = [b - a for a, b in zip(projs, projs[1:])]
    if not gaps:
        return mpq(1)
    return min(gaps) / 2


def _point_at_offset(family: LineFamily, nu: Direction, offset):
    for p in incidence_points(family):
        if projection(nu, p) == offset:
            return p
    return None


def _pair_at_point(family: LineFamily, target: Point):
    for p, pair in incidence_set(family):
        if p == target:
            return pair
    return None


def _fan_regions(apex: Point, down: Direction, d1: Direction, d2: Direction):
    c1 = _sector_cw(apex, down, d1)
    c2 = _sector_ccw(apex, down, d2)
    if d1 == down and d2 == down:
        c3 = Region.whole_plane()
    else:
        c3 = Region.sector_ccw(apex, d2, d1)
    return c1, c2, c3


def _blend_boundary_zone(A, p, down, level, clockwise, ctx, d_direct, blends):
    """The critical-boundary modification: pi/2 below the boundary's single
    incidence point, a blend across its eps band, then a blend into the
    interior band.  Applied before (and overriding) the incidence-band
    modification at the shared corner."""
    nu = down.rot90ccw()
    up = -down
    x = projection(nu, p)
    h = projection(up, p)
    bound = ctx.x0 if clockwise else ctx.x1
    eps = ctx.eps if ctx.eps is not None else default_blend_eps(A, nu)
    p0 = _point_at_offset(A, nu, bound)
    if p0 is None:
        return None
    in_zone = (bound <= x <= bound + eps) if clockwise else (bound - eps <= x <= bound)
    if not in_zone:
        return None
    y0 = projection(up, p0)
    halfpi = down.rot90cw() if clockwise else down.rot90ccw()
    q0 = _frame_point(nu, up, bound, h)
    if h < y0:
        tilde = halfpi
    else:
        aprime = _min_sweep_direction(A, q0, down, level, clockwise)
        merged = aprime
        if ctx.b_family is not None:
            level_b = ctx.level_b1 if clockwise else ctx.level_b2
            if level_b is not None and level_b >= 1:
                beta = _min_sweep_direction(ctx.b_family, q0, down,
                                            level_b, clockwise)
                merged = _max_sweep(down, clockwise, aprime, beta)
        if h > y0 + eps:
            tilde = merged
        else:
            t = (h - y0) / eps
            tilde = _dir_lerp(merged, halfpi, t, halfpi)
    s = (x - bound) / eps if clockwise else (bound - x) / eps
    blends.append(("boundary", "cw" if clockwise else "ccw", s))
    if s == 0:
        return tilde
    return _dir_lerp(d_direct, tilde, s, halfpi)


def _blend_incidence_zone(A, p, down, level, clockwise, ctx, d_direct, blends):
    """Within eps on one side of an interior incidence projection, blend
    between the unconstrained minimum angle and the minimum angle avoiding
    that incidence point."""
    nu = down.rot90ccw()
    x = projection(nu, p)
    eps = ctx.eps if ctx.eps is not None else default_blend_eps(A, nu)
    best = None
    for v in family_projections(A, nu):
        if ctx.x0 is not None and not (ctx.x0 < v < ctx.x1):
            continue
        if clockwise:
            if v <= x <= v + eps and (best is None or v > best):
                best = v
        else:
            if v - eps <= x <= v and (best is None or v < best):
                best = v
    if best is None:
        return None
    p0 = _point_at_offset(A, nu, best)
    pair = _pair_at_point(A, p0)
    t = (x - best) / eps if clockwise else (best - x) / eps
    avoiding = _min_sweep_direction(A, p, down, level, clockwise,
                                    banned_pair=pair)
    halfpi = down.rot90cw() if clockwise else down.rot90ccw()
    blends.append(("incidence", "cw" if clockwise else "ccw", t))
    return _dir_lerp(d_direct, avoiding, t, halfpi)


def canonical_cutting(A: LineFamily, p: Point, m1: int, m2: int,
                      mode: str = "direct",
                      context: FanContext | None = None) -> CanonicalCutting:
    """The three-sector fan at p: minimal sweeps reaching levels m1 and m2.

    Direct mode takes the raw minimal event angles (monotone, exact).
    Blended mode additionally applies the continuity modifications near the
    strip boundaries and near interior incidence projections, using rational
    chord interpolation between the exact event directions (a monotone
    reparametrization of the angular blend).
    """
    ctx = context or FanContext()
    down = ctx.down
    nu = down.rot90ccw()
    if ctx.x0 is not None and ctx.x1 is not None:
        x = projection(nu, p)
        if not (ctx.x0 <= x <= ctx.x1):
            raise OutOfStrip(f"apex projection {x} outside [{ctx.x0}, {ctx.x1}]")
    pts = incidence_points(A)
    d1 = _min_sweep_direction(A, p, down, m1, True, points=pts)
    d2 = _min_sweep_direction(A, p, down, m2, False, points=pts)
    blends = []
    if mode == "blended":
        for clockwise, level, d_direct in ((True, m1, d1), (False, m2, d2)):
            adjusted = None
            if (ctx.x0 if clockwise else ctx.x1) is not None:
                adjusted = _blend_boundary_zone(
                    A, p, down, level, clockwise, ctx, d_direct, blends)
            if adjusted is None:
                adjusted = _blend_incidence_zone(
                    A, p, down, level, clockwise, ctx, d_direct, blends)
            if adjusted is not None:
                if clockwise:
                    d1 = adjusted
                else:
                    d2 = adjusted
    c1, c2, c3 = _fan_regions(p, down, d1, d2)
    return CanonicalCutting(
        apex=p, down=down, d1=d1, d2=d2, c1=c1, c2=c2, c3=c3,
        mode=mode, c3_convex=c3.is_convex_form, blends=tuple(blends),
    )


def _frame_point(nu: Direction, up: Direction, x, h) -> Point:
    norm2 = nu.dx * nu.dx + nu.dy * nu.dy
    px = (mpq(x) * nu.dx + mpq(h) * up.dx) / norm2
    py = (mpq(x) * nu.dy + mpq(h) * up.dy) / norm2
    return Point(px, py)


# ---------------------------------------------------------------------------
# Equitable three-cut search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThreeCut:
    cutting: CanonicalCutting
    parts: tuple
    witnesses_a: tuple
    witnesses_b: tuple
    floor_height: object
    rounds_used: int

    def witnesses(self):
        return self.witnesses_a + self.witnesses_b


def _linspace(a, b, k):
    a, b = mpq(a), mpq(b)
    if a == b or k <= 1:
        return [a]
    return [a + (b - a) * i / (k - 1) for i in range(k)]


def find_equitable_three_cut(A: LineFamily, B: LineFamily, triple,
                             config: SearchConfig = SearchConfig()):
    """Certified grid search for a three-fan meeting all six thresholds.

    Builds the critical strip from the first two levels, establishes a floor
    below which the first two colors hold, then refines a grid over the strip
    toward a point whose fan carries all three colors.  Any candidate found
    is validated unconditionally (six decision-mode measures with witnesses);
    returns None when the refinement budget runs out.
    """
    r1, r2, r3 = triple
    r = r1 + r2 + r3
    levels_a = [threshold_int(len(A), ri, r) for ri in triple]
    levels_b = [threshold_int(len(B), ri, r) for ri in triple]
    down = choose_reference_direction([A, B])
    nu = down.rot90ccw()
    up = -down

    proj_all = family_projections(A, nu) + family_projections(B, nu)
    lo_default = min(proj_all, default=mpq(0)) - 1
    hi_default = max(proj_all, default=mpq(0)) + 1
    if levels_a[0] >= 2:
        x0 = critical_halfplane(A, down, levels_a[0]).offset
    else:
        x0 = lo_default
    if levels_a[1] >= 2:
        x1 = -critical_halfplane(A, -down, levels_a[1]).offset
    else:
        x1 = hi_default
    if x0 > x1:
        return None

    ctx = FanContext(down=down, x0=x0, x1=x1, b_family=B,
                     level_b1=levels_b[0], level_b2=levels_b[1])

    heights = [projection(up, p) for fam in (A, B) for p in incidence_points(fam)]
    h_min = min(heights, default=mpq(0)) - 1
    h_max = max(heights, default=mpq(0)) + 1

    def sample(x, h):
        p = _frame_point(nu, up, x, h)
        cut = canonical_cutting(A, p, levels_a[0], levels_a[1], "direct", ctx)
        colors = set()
        for i, region in enumerate(cut.regions()):
            size, _ = mu_decision(B, region, max(levels_b[i], 1))
            if size >= max(levels_b[i], 1):
                colors.add(i + 1)
        return cut, colors

    def validate(cut):
        wit_a, wit_b = [], []
        for i, region in enumerate(cut.regions()):
            size, w = mu_decision(A, region, max(levels_a[i], 1))
            if size < max(levels_a[i], 1) or w is None:
                return None
            wit_a.append(w)
            size, w = mu_decision(B, region, max(levels_b[i], 1))
            if size < max(levels_b[i], 1) or w is None:
                return None
            wit_b.append(w)
        for w in wit_a + wit_b:
            if not verify_witness(w):
                raise AssertionError("internal error: three-cut witness invalid")
        return tuple(wit_a), tuple(wit_b)

    # Floor: descend until every in-strip sample carries colors 1 and 2.
    grid = max(config.kkm_grid, 2)
    floor = h_min
    for k in range(max(config.kkm_floor_tries, 1)):
        y = h_min - 2 ** k + 1
        row_ok = None
        for x in _linspace(x0, x1, grid):
            cut, colors = sample(x, y)
            if not cut.c3_convex:
                continue
            ok = {1, 2} <= colors
            row_ok = ok if row_ok is None else (row_ok and ok)
            if not ok:
                break
        if row_ok:
            floor = y
            break
        floor = y

    rect = (x0, x1, floor, h_max)
    for round_idx in range(config.kkm_budget):
        xs = _linspace(rect[0], rect[1], grid)
        ys = _linspace(rect[2], rect[3], grid)
        cells = {}
        for iy, y in enumerate(ys):
            for ix, x in enumerate(xs):
                cut, colors = sample(x, y)
                in_r = cut.c3_convex
                cells[(ix, iy)] = (cut, colors, in_r)
                if in_r and colors == {1, 2, 3}:
                    result = validate(cut)
                    if result is not None:
                        return ThreeCut(
                            cutting=cut, parts=tuple(triple),
                            witnesses_a=result[0], witnesses_b=result[1],
                            floor_height=floor, rounds_used=round_idx + 1,
                        )
        if len(xs) < 2 or len(ys) < 2:
            return None
        best_cell = None
        best_score = -1
        for iy in range(len(ys) - 1):
            for ix in range(len(xs) - 1):
                seen = set()
                for dx, dy in ((0, 0), (1, 0), (0, 1), (1, 1)):
                    cut, colors, in_r = cells[(ix + dx, iy + dy)]
                    if in_r:
                        seen |= colors
                if len(seen) > best_score:
                    best_score = len(seen)
                    best_cell = (ix, iy)
        ix, iy = best_cell
        rect = (xs[ix], xs[ix + 1], ys[iy], ys[iy + 1])
    return None
