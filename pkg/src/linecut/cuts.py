"""Equitable two-cuts: thresholds, critical half-planes, signs, summands.

The cut thresholds are powers (2n/3)^(ri/r) - 2, which are irrational; all
comparisons against them are done in big-integer form,
    m >= (2n/3)^(ri/r) - 2   <=>   (m+2)^r * 3^ri >= (2n)^ri,
so no rounding ever enters a decision.  The two-cut search sweeps boundary
directions; within one direction the only candidate boundaries that matter
are the incidence-point projections, and the minimal ones are the "critical"
half-planes found by binary search over projections with the exact half-plane
measure as the probe.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cmp_to_key, lru_cache

from gmpy2 import mpq

from .geometry import (
    Direction,
    GeometryError,
    HalfPlane,
    Line,
    LineFamily,
    Point,
    Region,
    choose_reference_direction,
    incidence_points,
    projection,
)
from .enclosure import EnclosureWitness, mu_halfplane, verify_witness


class BadPartition(GeometryError):
    pass


class LevelTooSmall(GeometryError):
    """Criticality is undefined for levels <= 1 (every half-plane encloses 1)."""


class NoSuchLevel(GeometryError):
    """Requested enclosure level exceeds the family size."""


class SummandsNotFound(Exception):
    """Same-signed pair/triple missing: a fatal internal-consistency failure."""


class SignsUnrecoverable(Exception):
    """Sign spot-check found an inconsistency but no cut could be recovered."""


class TwoCutMissed(Exception):
    """Sign assignment was inconsistent across directions; the direction sweep
    must have missed an equitable cut.  Carries the recovered cut."""

    def __init__(self, cut):
        super().__init__("inconsistent signs: recovered an equitable two-cut")
        self.cut = cut


# ---------------------------------------------------------------------------
# Exact threshold arithmetic
# ---------------------------------------------------------------------------

def threshold_int(n: int, ri: int, r: int) -> int:
    """ceil((2n/3)^(ri/r)) - 2 by big-integer bracketing (can be negative)."""
    if n == 0:
        return -2
    target = (2 * n) ** ri
    three = 3 ** ri
    k = max(0, int(round((2 * n / 3) ** (ri / r))))
    while k ** r * three < target:
        k += 1
    while k > 0 and (k - 1) ** r * three >= target:
        k -= 1
    return k - 2


def meets_threshold(m: int, n: int, ri: int, r: int) -> bool:
    """Exact test  m >= (2n/3)^(ri/r) - 2  for integer m."""
    if m + 2 < 0:
        return n == 0 and m + 2 == 0
    return (m + 2) ** r * 3 ** ri >= (2 * n) ** ri


def exceeds_threshold(m: int, n: int, ri: int, r: int) -> bool:
    """Exact strict test  m > (2n/3)^(ri/r) - 2  for integer m."""
    if m + 2 < 0:
        return False
    return (m + 2) ** r * 3 ** ri > (2 * n) ** ri


@dataclass(frozen=True)
class Thresholds:
    """Per-part integer thresholds M_i for a partition of n into parts r_i.

    Note on the two threshold flavors: with and without the ceiling,
    mu >= ceil(x) - 2 and mu >= x - 2 are the same predicate for integer mu,
    so `meets` decides both.  Both spellings are exposed for clarity where a
    source distinguishes them.
    """

    n: int
    r: int
    parts: tuple  # ((r_i, M_i), ...)

    def level(self, i: int) -> int:
        return self.parts[i][1]

    def meets(self, i: int, m: int) -> bool:
        return meets_threshold(m, self.n, self.parts[i][0], self.r)

    def meets_unceiled(self, i: int, m: int) -> bool:
        return self.meets(i, m)

    def exceeds(self, i: int, m: int) -> bool:
        return exceeds_threshold(m, self.n, self.parts[i][0], self.r)


def compute_thresholds(n: int, r: int, parts) -> Thresholds:
    parts = tuple(parts)
    if not parts or any(p <= 0 for p in parts) or sum(parts) != r:
        raise BadPartition(f"parts {parts} are not a positive partition of {r}")
    if n < 1:
        raise BadPartition("n must be >= 1")
    return Thresholds(n, r, tuple((p, threshold_int(n, p, r)) for p in parts))


# ---------------------------------------------------------------------------
# Half-planes along a sweep frame
# ---------------------------------------------------------------------------

def halfplane_leq(nu: Direction, t) -> HalfPlane:
    """The closed half-plane {p : <nu, p> <= t}."""
    ln = Line.of(nu.dx, nu.dy, t)
    same = ln.a * nu.dx + ln.b * nu.dy > 0
    return HalfPlane.of(ln, -1 if same else 1)


def halfplane_geq(nu: Direction, t) -> HalfPlane:
    return halfplane_leq(nu, t).complement()


@lru_cache(maxsize=256)
def family_projections(family: LineFamily, nu: Direction) -> tuple:
    return tuple(sorted({projection(nu, p) for p in incidence_points(family)}))


def mu_side(family: LineFamily, nu: Direction, t, lower: bool):
    """Exact mu of {<nu,p> <= t} (lower) or {<nu,p> >= t}, with witness.

    The boundary is internally shifted off the incidence projections (without
    changing the enclosed set), so criticality boundaries passing through
    incidence points are handled exactly.
    """
    t = mpq(t)
    projs = family_projections(family, nu)
    if lower:
        beyond = [v for v in projs if v > t]
        t_safe = (t + beyond[0]) / 2 if beyond else t + 1
        probe = halfplane_leq(nu, t_safe)
        hp = halfplane_leq(nu, t)
    else:
        beyond = [v for v in projs if v < t]
        t_safe = (t + beyond[-1]) / 2 if beyond else t - 1
        probe = halfplane_geq(nu, t_safe)
        hp = halfplane_geq(nu, t)
    size, w = mu_halfplane(family, probe)
    witness = EnclosureWitness.of(family, w.subset, Region.of_halfplane(hp))
    if not verify_witness(witness):
        raise AssertionError("internal error: shifted-boundary witness invalid")
    return size, witness


@dataclass(frozen=True)
class CriticalHalfPlane:
    halfplane: HalfPlane
    level: int
    family_name: str
    witness: EnclosureWitness
    offset: object  # projection of the boundary onto nu
    direction: Direction  # the sweep ("down") direction; boundary runs along it


def critical_halfplane(family: LineFamily, u: Direction, m: int) -> CriticalHalfPlane:
    """Minimal closed half-plane with boundary along u enclosing >= m lines.

    "Minimal" is by translation toward smaller <nu, p> with nu = rot90ccw(u):
    for u pointing down this is the usual "leftmost" half-plane.  Its open
    interior encloses fewer than m lines (checked, not assumed).
    """
    n = len(family)
    if m <= 1:
        raise LevelTooSmall(f"criticality undefined for level {m}")
    if m > n:
        raise NoSuchLevel(f"level {m} > family size {n}")
    for ln in family:
        if u.is_parallel(ln.direction()):
            raise GeometryError(f"sweep direction is parallel to line {ln.id}")
    nu = u.rot90ccw()
    projs = family_projections(family, nu)

    cache = {}

    def measure(k):
        if k not in cache:
            cache[k] = mu_side(family, nu, projs[k], lower=True)
        return cache[k]

    lo, hi = 0, len(projs) - 1
    if measure(hi)[0] < m:
        raise NoSuchLevel(f"no translate encloses {m} lines")
    while lo < hi:
        mid = (lo + hi) // 2
        if measure(mid)[0] >= m:
            hi = mid
        else:
            lo = mid + 1
    if lo > 0 and measure(lo - 1)[0] >= m:
        raise AssertionError("internal error: criticality binary search")
    size, witness = measure(lo)
    return CriticalHalfPlane(
        halfplane=halfplane_leq(nu, projs[lo]),
        level=m,
        family_name=family.name,
        witness=witness,
        offset=projs[lo],
        direction=u,
    )


# ---------------------------------------------------------------------------
# Candidate directions for the two-cut sweep
# ---------------------------------------------------------------------------

DEFAULT_DIRECTION_SEEDS = (
    (0, -1), (1, -1), (-1, -1), (1, -2), (-1, -2), (2, -1), (-2, -1),
    (1, -3), (-1, -3), (3, -1), (-3, -1), (1, -4), (-1, -4), (2, -3), (-2, -3),
)


@dataclass(frozen=True)
class SearchConfig:
    """Budgets and knobs for the cut searches; fully determines behavior."""

    max_cut_directions: int | None = 4000  # cap on event-derived directions
    direction_seeds: tuple = DEFAULT_DIRECTION_SEEDS
    sign_spot_checks: int = 3
    recovery_cap: int = 48
    kkm_grid: int = 5
    kkm_budget: int = 10
    kkm_floor_tries: int = 10
    threads: int = 1


def _dir_half(d: Direction) -> int:
    if d.dy > 0 or (d.dy == 0 and d.dx > 0):
        return 0
    return 1


def _angle_cmp(d1: Direction, d2: Direction) -> int:
    h1, h2 = _dir_half(d1), _dir_half(d2)
    if h1 != h2:
        return -1 if h1 < h2 else 1
    c = d1.cross(d2)
    if c > 0:
        return -1
    if c < 0:
        return 1
    return 0


def _parallel_to_some_line(u: Direction, families) -> bool:
    return any(u.is_parallel(ln.direction()) for fam in families for ln in fam)


_EVENT_POINT_CAP = 420  # beyond this many incidence points, subsample pairs


def candidate_directions(families, config: SearchConfig):
    """Deterministic sweep order: reference first, fixed seeds, then event
    directions (through pairs of incidence points) with mediants in between.

    Between consecutive event directions every half-plane enclosure count is
    constant, so events plus mediants make the sweep lossless when uncapped
    at desk scale.  Large instances get a deterministic subsample of event
    points (and a direction cap), which keeps the sweep a heuristic there;
    certificates do not depend on its completeness.  Lazily generated so the
    usual case (the reference direction works) stays cheap.
    """
    seen = set()

    def fresh(u: Direction):
        if u in seen or _parallel_to_some_line(u, families):
            return None
        seen.add(u)
        return u

    u0 = choose_reference_direction(families)
    for u in (u0, -u0):
        if fresh(u):
            yield u
    for dx, dy in config.direction_seeds:
        d = Direction.of(dx, dy)
        for u in (d, -d):
            if fresh(u):
                yield u

    if config.max_cut_directions == 0:
        return
    pts = sorted({(p.x, p.y) for fam in families for p in incidence_points(fam)})
    if len(pts) > _EVENT_POINT_CAP:
        step = len(pts) / _EVENT_POINT_CAP
        pts = [pts[int(i * step)] for i in range(_EVENT_POINT_CAP)]
    events = set()
    for (px, py), (qx, qy) in itertools.combinations(pts, 2):
        d = Direction.of(qx - px, qy - py)
        events.add(d)
        events.add(-d)
    ordered = sorted(events, key=cmp_to_key(_angle_cmp))
    enriched = []
    for d, e in zip(ordered, ordered[1:] + ordered[:1]):
        enriched.append(d)
        if d != e and d.cross(e) != 0:
            enriched.append(Direction.of(d.dx + e.dx, d.dy + e.dy))
    cap = config.max_cut_directions
    if cap is not None and len(enriched) > cap:
        step = len(enriched) / cap
        enriched = [enriched[int(i * step)] for i in range(cap)]
    for d in enriched:
        if fresh(d):
            yield d


# ---------------------------------------------------------------------------
# Equitable two-cuts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoCut:
    """A split by one line meeting all four enclosure thresholds."""

    direction: Direction    # boundary runs along this direction
    offset: object          # <nu, p> value of the boundary
    boundary: Line
    parts: tuple            # (r1, r2)
    c1: Region
    c2: Region
    witness_a1: EnclosureWitness
    witness_a2: EnclosureWitness
    witness_b1: EnclosureWitness
    witness_b2: EnclosureWitness

    def witnesses(self):
        return (self.witness_a1, self.witness_a2, self.witness_b1, self.witness_b2)


def _try_offset(A, B, nu, t, levels, r1, r2, u):
    (la1, la2, lb1, lb2) = levels
    sa1, wa1 = mu_side(A, nu, t, lower=True)
    if sa1 < la1:
        return None
    sa2, wa2 = mu_side(A, nu, t, lower=False)
    if sa2 < la2:
        return None
    sb1, wb1 = mu_side(B, nu, t, lower=True)
    if sb1 < lb1:
        return None
    sb2, wb2 = mu_side(B, nu, t, lower=False)
    if sb2 < lb2:
        return None
    hp = halfplane_leq(nu, t)
    return TwoCut(
        direction=u, offset=t, boundary=hp.boundary, parts=(r1, r2),
        c1=Region.of_halfplane(hp),
        c2=Region.of_halfplane(hp.complement()),
        witness_a1=wa1, witness_a2=wa2, witness_b1=wb1, witness_b2=wb2,
    )


def _candidate_offsets(A, B, u, levels):
    """Probe offsets for one direction: the two lower-side critical translates
    (the minimal boundaries achieving the C1-side thresholds), or a boundary
    below everything when both C1-side thresholds are vacuous."""
    la1, _, lb1, _ = levels
    nu = u.rot90ccw()
    offsets = []
    try:
        if la1 >= 2:
            offsets.append(critical_halfplane(A, u, la1).offset)
        if lb1 >= 2:
            offsets.append(critical_halfplane(B, u, lb1).offset)
    except NoSuchLevel:
        return []
    if la1 <= 1 and lb1 <= 1:
        projs = family_projections(A, nu) + family_projections(B, nu)
        offsets.append(min(projs, default=mpq(0)) - 1)
    return offsets


def find_equitable_two_cut(A: LineFamily, B: LineFamily, r1: int, r2: int,
                           config: SearchConfig = SearchConfig()):
    """Search for a one-line cut meeting the (r1, r2) thresholds on both
    families.  Probes, per direction, the minimal half-planes that reach the
    C1-side thresholds for A and for B; whenever a cut at this direction
    exists at all, one of those two probes passes.  Returns None only after
    exhausting the (possibly capped) candidate directions.
    """
    r = r1 + r2
    levels = (threshold_int(len(A), r1, r), threshold_int(len(A), r2, r),
              threshold_int(len(B), r1, r), threshold_int(len(B), r2, r))
    for u in candidate_directions((A, B), config):
        nu = u.rot90ccw()
        for t in _candidate_offsets(A, B, u, levels):
            cut = _try_offset(A, B, nu, t, levels, r1, r2, u)
            if cut is not None:
                return cut
    return None


# ---------------------------------------------------------------------------
# Sign assignment and summands
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignTable:
    """Sign of each split size for family A (B's signs are the opposites)."""

    r: int
    signs: tuple  # signs[i] is the sign of r1 = i+1, each +1 or -1

    def sign(self, r1: int) -> int:
        return self.signs[r1 - 1]

    def sign_for_b(self, r1: int) -> int:
        return -self.signs[r1 - 1]


def _sign_probe(A, B, r1, r, u):
    """Sign of r1 at one direction: does mu_B on the r1-critical half-plane
    for A strictly exceed the B threshold?"""
    m_a = threshold_int(len(A), r1, r)
    nu = u.rot90ccw()
    if m_a >= 2:
        t = critical_halfplane(A, u, m_a).offset
    else:
        t = min(family_projections(A, nu), default=mpq(0)) - 1
    size_b, _ = mu_side(B, nu, t, lower=True)
    return 1 if exceeds_threshold(size_b, len(B), r1, r) else -1


def _recover_cut(A, B, r1, r, u_pos, u_neg, config):
    """Between a positive and a negative direction an equitable (r1, r-r1)
    cut exists; locate it by mediant bisection on directions."""
    r2 = r - r1
    levels = (threshold_int(len(A), r1, r), threshold_int(len(A), r2, r),
              threshold_int(len(B), r1, r), threshold_int(len(B), r2, r))
    lo, hi = u_pos, u_neg
    for _ in range(config.recovery_cap):
        mid = Direction.of(lo.dx + hi.dx, lo.dy + hi.dy)
        if mid in (lo, hi) or _parallel_to_some_line(mid, (A, B)):
            mid = Direction.of(2 * lo.dx + hi.dx, 2 * lo.dy + hi.dy)
            if _parallel_to_some_line(mid, (A, B)):
                break
        nu = mid.rot90ccw()
        for t in _candidate_offsets(A, B, mid, levels):
            cut = _try_offset(A, B, nu, t, levels, r1, r2, mid)
            if cut is not None:
                return cut
        if _sign_probe(A, B, r1, r, mid) > 0:
            lo = mid
        else:
            hi = mid
    return None


def assign_signs(A: LineFamily, B: LineFamily, r: int,
                 config: SearchConfig = SearchConfig()) -> SignTable:
    """Sign for every split size 1..r-1, assuming no equitable two-cut was
    found.  Each sign is spot-checked at a few extra directions; a mismatch
    means the sweep missed a cut, which is then recovered and raised as
    TwoCutMissed (the caller should use that cut).
    """
    u0 = choose_reference_direction([A, B])
    extras = []
    for dx, dy in DEFAULT_DIRECTION_SEEDS[1:]:
        d = Direction.of(dx, dy)
        if d != u0 and not _parallel_to_some_line(d, (A, B)):
            extras.append(d)
        if len(extras) >= config.sign_spot_checks:
            break
    signs = []
    for r1 in range(1, r):
        s0 = _sign_probe(A, B, r1, r, u0)
        for u in extras:
            s = _sign_probe(A, B, r1, r, u)
            if s != s0:
                u_pos, u_neg = (u0, u) if s0 > 0 else (u, u0)
                cut = _recover_cut(A, B, r1, r, u_pos, u_neg, config)
                if cut is not None:
                    raise TwoCutMissed(cut)
                raise SignsUnrecoverable(
                    f"sign of {r1} differs between directions but no cut found")
        signs.append(s0)
    return SignTable(r, tuple(signs))


@dataclass(frozen=True)
class Summands:
    parts: tuple  # (r1, r2) or (r1, r2, r3), nondecreasing
    sign: int

    @property
    def is_pair(self) -> bool:
        return len(self.parts) == 2


def find_summands(signs: SignTable, r: int) -> Summands:
    """Lexicographically first same-signed pair or triple summing to r with
    every part <= 2r/3.  Always exists (checked exhaustively in tests)."""
    if r < 2:
        raise BadPartition("r must be >= 2")

    def ok(part):
        return 3 * part <= 2 * r

    for r1 in range(1, r // 2 + 1):
        r2 = r - r1
        if ok(r1) and ok(r2) and signs.sign(r1) == signs.sign(r2):
            return Summands((r1, r2), signs.sign(r1))
    for r1 in range(1, r - 1):
        for r2 in range(r1, r - r1):
            r3 = r - r1 - r2
            if r3 < r2:
                continue
            if ok(r1) and ok(r2) and ok(r3) and \
                    signs.sign(r1) == signs.sign(r2) == signs.sign(r3):
                return Summands((r1, r2, r3), signs.sign(r1))
    raise SummandsNotFound(f"no same-signed pair or triple for r={r}")
