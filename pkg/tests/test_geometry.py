import random

import pytest
from gmpy2 import mpq

from linecut.geometry import (
    DOWN,
    Direction,
    HalfPlane,
    Line,
    LineFamily,
    ParallelLines,
    Point,
    Ray,
    Region,
    choose_reference_direction,
    incidence_set,
    intersect_lines,
    joint_family,
    perturb_intercepts,
    validate_general_position,
    wedge_region,
    wedge_complement,
)


def fam(*slope_intercepts, name="A"):
    return LineFamily.of(
        [Line.from_slope_intercept(m, c) for m, c in slope_intercepts], name)


THREE = fam((1, 0), (-1, 2), (3, -4))  # y=x, y=-x+2, y=3x-4

_PRIMES = [1009, 1013, 1019, 1021, 1031, 1033, 1039, 1049, 1051, 1061,
           1063, 1069, 1087, 1091, 1093, 1097, 1103, 1109, 1117, 1123]


def random_family(rng, n, name="A", coeff=30):
    """Random general-position family (distinct slopes, retried validation)."""
    while True:
        slopes = set()
        while len(slopes) < n:
            slopes.add(mpq(rng.randint(-coeff, coeff), rng.randint(1, 4)))
        lines = [Line.from_slope_intercept(
            m, mpq(rng.randint(-10**9, 10**9), _PRIMES[k % len(_PRIMES)]))
            for k, m in enumerate(sorted(slopes))]
        family = LineFamily.of(lines, name)
        if len({(l.a, l.b, l.c) for l in family}) < n:
            continue
        if validate_general_position(family).ok:
            return family


class TestLineBasics:
    def test_canonical_form(self):
        l1 = Line.of(2, -2, 4)
        assert (l1.a, l1.b, l1.c) == (1, -1, 2)
        l2 = Line.of(mpq(-1, 3), mpq(1, 3), mpq(-2, 3))
        assert l1 == l2

    def test_vertical_line_representable(self):
        v = Line.of(1, 0, 5)
        assert v.slope is None
        assert v.contains(Point.of(5, 123))

    def test_slope(self):
        assert Line.from_slope_intercept(3, -4).slope == 3

    def test_through_points(self):
        ln = Line.through(Point.of(0, 0), Point.of(2, 2))
        assert ln == Line.from_slope_intercept(1, 0)


class TestIntersect:
    def test_symmetric_diagonals(self):
        p = intersect_lines(Line.from_slope_intercept(1, 0),
                            Line.from_slope_intercept(-1, 0))
        assert p == Point.of(0, 0)

    def test_rational_solution(self):
        # y=x and y=3x-4 meet at (2,2): substitution x = 3x-4 -> x = 2.
        p = intersect_lines(Line.from_slope_intercept(1, 0),
                            Line.from_slope_intercept(3, -4))
        assert p == Point.of(2, 2)

    def test_parallel_raises(self):
        with pytest.raises(ParallelLines):
            intersect_lines(Line.from_slope_intercept(0, 1),
                            Line.from_slope_intercept(0, 2))

    def test_exactness_and_symmetry(self):
        rng = random.Random(7)
        for _ in range(50):
            l1 = Line.of(rng.randint(-9, 9) or 1, rng.randint(-9, 9),
                         mpq(rng.randint(-9, 9), rng.randint(1, 5)))
            l2 = Line.of(rng.randint(-9, 9), rng.randint(-9, 9) or 2,
                         mpq(rng.randint(-9, 9), rng.randint(1, 5)))
            if l1.is_parallel(l2):
                continue
            p = intersect_lines(l1, l2)
            q = intersect_lines(l2, l1)
            assert p == q
            assert l1.eval(p) == 0 and l2.eval(p) == 0


class TestIncidence:
    def test_single_line_empty(self):
        assert incidence_set(fam((1, 0))) == ()

    def test_three_lines(self):
        pts = {p: pair for p, pair in incidence_set(THREE)}
        assert pts == {
            Point.of(1, 1): (0, 1),
            Point.of(2, 2): (0, 2),
            Point.of(mpq(3, 2), mpq(1, 2)): (1, 2),
        }

    def test_count_is_n_choose_2(self):
        rng = random.Random(3)
        family = random_family(rng, 8)
        assert len(incidence_set(family)) == 28

    def test_parallel_raises(self):
        with pytest.raises(ParallelLines):
            incidence_set(fam((1, 0), (1, 1)))


class TestGeneralPosition:
    def test_ok_family(self):
        assert validate_general_position(THREE).ok

    def test_parallel_pair(self):
        report = validate_general_position(fam((1, 0), (1, 1), (0, 0)))
        assert not report.ok
        assert ("parallel-pair", (0, 1)) in report.violations

    def test_concurrent_triple(self):
        report = validate_general_position(fam((1, 0), (-1, 0), (0, 0)))
        assert not report.ok
        assert ("concurrent-triple", (0, 1, 2)) in report.violations

    def test_collinear_incidences(self):
        # Lines y=0, y=x, y=2x, all shifted to break concurrency, still give
        # three incidence points on y=0 only via the shared line (exempt).
        # Build a genuine violation instead: three crossings on x-axis with
        # no shared family line.
        family = LineFamily.of([
            Line.from_slope_intercept(1, 1),     # crosses y=-x-1... constructed below
            Line.from_slope_intercept(-1, -1),
            Line.from_slope_intercept(2, -2),
            Line.from_slope_intercept(-2, 2),
        ])
        # pairs (0,1) meet at (-1, 0); (2,3) meet at (1, 0); (0,3) meet at (1/3, 4/3)
        # Add a line through (-1,0) and (1,0)?? That line is y=0 and then the
        # collinear triple shares it.  Instead assert exemption logic via the
        # non-shared case:
        report = validate_general_position(family)
        # (-1,0), (1,0) and any third collinear point would be needed for a
        # violation; this family has none.
        assert report.ok

    def test_collinear_violation_detected(self):
        # Six lines arranged so that three crossings not on a common family
        # line are collinear: pairs meet at (0,0), (1,0), (2,0).
        lines = [
            Line.from_slope_intercept(1, 0),    # 0: through (0,0)
            Line.from_slope_intercept(-1, 0),   # 1: through (0,0) ... concurrent!
        ]
        # Use distinct pairs per point instead.
        lines = [
            Line.from_slope_intercept(1, 0),         # 0 through (0,0)
            Line.from_slope_intercept(-2, 0),        # 1 through (0,0)
            Line.from_slope_intercept(2, -2),        # 2 through (1,0)
            Line.from_slope_intercept(-3, 3),        # 3 through (1,0)
            Line.from_slope_intercept(3, -6),        # 4 through (2,0)
            Line.from_slope_intercept(-5, 10),       # 5 through (2,0)
        ]
        report = validate_general_position(LineFamily.of(lines))
        assert not report.ok
        assert any(kind == "collinear-incidences" for kind, _ in report.violations)

    def test_collinear_exempt_on_family_line(self):
        # y=0 crosses three other lines at (0,0), (1,0), (2,0): collinear but
        # all on the family line y=0, hence exempt.
        lines = [
            Line.from_slope_intercept(0, 0),
            Line.from_slope_intercept(1, 0),
            Line.from_slope_intercept(1, -1),
            Line.from_slope_intercept(2, -4),
        ]
        report = validate_general_position(LineFamily.of(lines))
        ok_kinds = {k for k, _ in report.violations}
        assert "collinear-incidences" not in ok_kinds

    def test_prefiltered_scan_agrees(self):
        rng = random.Random(11)
        family = random_family(rng, 9)
        full = validate_general_position(family)
        fast = validate_general_position(family, exact_scan_cap=0)
        assert full == fast

    def test_prefiltered_scan_catches_planted_collinearity(self):
        rng = random.Random(13)
        base = random_family(rng, 9)
        used = {ln.slope for ln in base}
        slopes = []
        k = mpq(1, 101)
        while len(slopes) < 6:
            if k not in used:
                slopes.append(k)
            k += mpq(3, 101)
        # Consecutive pairs cross at (0,7), (1,7), (2,7): a collinear triple
        # on y=7, which is not a family line.
        anchors = [0, 0, 1, 1, 2, 2]
        planted = [Line.from_slope_intercept(s, 7 - s * x)
                   for s, x in zip(slopes, anchors)]
        family = LineFamily.of(list(base.lines) + planted)
        report = validate_general_position(family, exact_scan_cap=0)
        assert any(kind == "collinear-incidences" for kind, _ in report.violations)


class TestRegions:
    def test_whole_plane(self):
        assert Region.whole_plane().contains(Point.of(10**9, -10**9))

    def test_halfplane_closed(self):
        h = HalfPlane.of(Line.of(1, 0, 0), -1)  # x <= 0
        region = Region.of_halfplane(h)
        assert not region.contains(Point.of(1, 0))
        assert region.contains(Point.of(0, 5))
        assert region.contains(Point.of(-3, 1))

    def test_wedge_contains_boundary(self):
        # first quadrant: from +x direction ccw to +y direction
        w = wedge_region(Point.of(0, 0), Direction.of(1, 0), Direction.of(0, 1))
        assert w.contains(Point.of(0, 0))
        assert w.contains(Point.of(1, 0))
        assert w.contains(Point.of(1, 1))
        assert not w.contains(Point.of(-1, 1))
        assert not w.contains(Point.of(1, -1))

    def test_wedge_complement(self):
        c2 = wedge_complement(Point.of(0, 0), Direction.of(1, 0), Direction.of(0, 1))
        assert c2.contains(Point.of(-1, -1))
        assert c2.contains(Point.of(1, 0))      # shared boundary
        assert not c2.contains(Point.of(1, 1))
        assert c2.contains(Point.of(-1, 1))

    def test_monotone_under_more_constraints(self):
        h1 = HalfPlane.of(Line.of(1, 0, 0), -1)
        h2 = HalfPlane.of(Line.of(0, 1, 0), -1)
        r1 = Region((h1,), "and", "halfplane")
        r2 = Region((h1, h2), "and", "region")
        rng = random.Random(5)
        for _ in range(100):
            p = Point.of(rng.randint(-5, 5), rng.randint(-5, 5))
            if r2.contains(p):
                assert r1.contains(p)

    def test_ray(self):
        r = Ray(Point.of(1, 1), Direction.of(1, 2))
        assert r.contains(Point.of(1, 1))
        assert r.contains(Point.of(2, 3))
        assert not r.contains(Point.of(0, -1))  # behind the apex
        assert not r.contains(Point.of(2, 4))


class TestReferenceDirection:
    def test_default_down(self):
        assert choose_reference_direction([fam((1, 0))]) == DOWN
        assert choose_reference_direction([]) == DOWN

    def test_separates_shared_x(self):
        # Pairs (0,1) and (2,3) meet at (0,0) and (0,5): shared x-coordinate,
        # so the default down direction cannot be used.
        family = fam((1, 0), (-1, 0), (2, 5), (-2, 5))
        u = choose_reference_direction([family])
        assert u != DOWN
        nu = u.rot90ccw()
        projections = [nu.dx * p.x + nu.dy * p.y
                       for p, _ in incidence_set(family)]
        assert len(set(projections)) == len(projections)

    def test_never_parallel_to_family(self):
        rng = random.Random(17)
        for trial in range(10):
            family = random_family(rng, 6)
            u = choose_reference_direction([family])
            for ln in family:
                assert u.cross(ln.direction()) != 0


class TestPerturb:
    def test_perturbation_breaks_concurrency(self):
        bad = fam((1, 0), (-1, 0), (0, 0))
        assert not validate_general_position(bad).ok
        fixed = perturb_intercepts(bad, mpq(1, 100))
        assert validate_general_position(fixed).ok

    def test_requires_positive_magnitude(self):
        from linecut.geometry import GeometryError
        with pytest.raises(GeometryError):
            perturb_intercepts(THREE, 0)


def test_joint_family_reindexes():
    a = fam((1, 0), (2, 0))
    b = fam((3, 0), name="B")
    u = joint_family(a, b)
    assert len(u) == 3
    assert [ln.id for ln in u] == [0, 1, 2]
