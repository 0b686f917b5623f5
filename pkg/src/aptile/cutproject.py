"""Cut-and-project construction of the silver-mean chain and the Ammann-Beenker vertex set."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exact import OctaCoord, QuadHalf, QuadInt, compare_fraction, qsign, qsign_array

# ---------------------------------------------------------------------------
# one dimension
# ---------------------------------------------------------------------------

_GUARD = Fraction(1, 10**9)


@dataclass(frozen=True)
class Strip1D:
    lo: QuadHalf = QuadHalf.of(0, -1)
    hi: QuadHalf = QuadHalf.of(0, 1)
    split: QuadHalf = QuadHalf.of(-2, 1)

    def colour(self, star: QuadInt) -> str | None:
        """B or R for a conjugate value inside [lo, hi), otherwise None."""
        s = QuadHalf.coerce(star)
        if s < self.lo or not s < self.hi:
            return None
        return "B" if s < self.split else "R"


STRIP = Strip1D()


def _outward(x: float, direction: int) -> Fraction:
    return Fraction(x) + direction * _GUARD


def cp_points_1d(xmin: float, xmax: float, strip: Strip1D = STRIP) -> list[tuple[QuadInt, str]]:
    """All u + v*sqrt2 in [xmin, xmax] whose conjugate u - v*sqrt2 lies in the strip.

    The range ends are widened by 1e-9 and then compared exactly.  Each
    integer u admits at most two values of v, found from a float estimate and
    confirmed exactly, so the cost is proportional to the output.
    """
    if not xmin < xmax:
        raise ValueError("xmin must be smaller than xmax")
    lo, hi = _outward(xmin, -1), _outward(xmax, +1)
    half = math.sqrt(2.0) / 2.0
    # u = (x + x*)/2 with x in [lo, hi] and x* in the strip
    u_lo = math.floor((float(lo) - half) / 2.0) - 1
    u_hi = math.ceil((float(hi) + half) / 2.0) + 1
    out = []
    for u in range(u_lo, u_hi + 1):
        v0 = math.floor(u / math.sqrt(2.0) - 0.5)
        for v in range(v0 - 1, v0 + 3):
            x = QuadInt(u, v)
            if compare_fraction(x, lo) < 0 or compare_fraction(x, hi) > 0:
                continue
            c = strip.colour(QuadInt(u, -v))
            if c is not None:
                out.append((x, c))
    out.sort(key=lambda p: float(p[0]))
    # float sort is safe for ordering distinct values this far apart, but
    # confirm exactly so that near ties cannot swap
    for i in range(1, len(out)):
        if qsign(out[i][0] - out[i - 1][0]) <= 0:
            out.sort(key=lambda p: p[0])
            break
    return out


@dataclass(frozen=True)
class PeriodProbe:
    n_points: int
    n_central: int
    n_candidates: int
    periods: tuple[QuadInt, ...]


def period_probe_1d(points: list[QuadInt]) -> PeriodProbe:
    """Search the differences of the central half for a translation symmetry.

    With the points spanning [lo, hi] and c their midpoint, the central half
    is the set within (hi - lo)/4 of c.  A candidate t = x - y (x, y central,
    |t| at most a quarter span) is a period when the central half shifted by
    t lies inside the full set.  All comparisons are exact.
    """
    if len(points) < 2:
        raise ValueError("need at least two points")
    pts = sorted(points)
    lo, hi = pts[0], pts[-1]
    span = hi - lo
    # 4|x - c| <= span  with c = (lo + hi)/2  <=>  |4x - 2(lo + hi)| <= span
    two_c = lo + hi
    central = [x for x in pts if qsign(span - abs_q(x * 4 - two_c * 2)) >= 0]
    full = {(x.a, x.b) for x in pts}
    ca = np.array([x.a for x in central], dtype=np.int64)
    cb = np.array([x.b for x in central], dtype=np.int64)
    diffs = np.unique(np.stack([np.subtract.outer(ca, ca).ravel(),
                                np.subtract.outer(cb, cb).ravel()], axis=1), axis=0)
    cands = set()
    for a, b in diffs.tolist():
        t = QuadInt(a, b)
        if (a, b) != (0, 0) and qsign(span - abs_q(t * 4)) >= 0:
            cands.add((a, b))
    periods = []
    for a, b in sorted(cands):
        if all((x.a + a, x.b + b) in full for x in central):
            periods.append(QuadInt(a, b))
    return PeriodProbe(len(pts), len(central), len(cands), tuple(periods))


def abs_q(x: QuadInt) -> QuadInt:
    return -x if qsign(x) < 0 else x


# ---------------------------------------------------------------------------
# the octagon window
# ---------------------------------------------------------------------------

# Half-width of the unit-edge octagon: h = (1 + sqrt2)/2.  The window is
# |x| <= h, |y| <= h, |x + y| <= sqrt2 h, |x - y| <= sqrt2 h, i.e. its edges are
# normal to the eight directions k*45 degrees.
H_HALF = QuadHalf.of(1, 1)
SQRT2_H = QuadHalf.of(2, 1)  # sqrt2 * h = (2 + sqrt2)/2


@dataclass(frozen=True)
class OctagonWindow:
    vertices: tuple[tuple[QuadHalf, QuadHalf], ...]
    normals: tuple[tuple[int, int], ...]

    @property
    def area(self) -> QuadInt:
        return QuadInt(2, 2)

    def contains(self, p: tuple[QuadHalf, QuadHalf]) -> int:
        """1 strictly inside, 0 on the boundary, -1 outside (exact)."""
        x, y = p
        xs, ys = x.num, y.num
        # compare doubled quantities against doubled bounds
        margins = [
            QuadHalf(H_HALF.num - xs), QuadHalf(H_HALF.num + xs),
            QuadHalf(H_HALF.num - ys), QuadHalf(H_HALF.num + ys),
        ]
        # |x + y| <= sqrt2 h  <=>  (x+y) in halves compared with SQRT2_H
        s, d = xs + ys, xs - ys
        margins += [
            QuadHalf(SQRT2_H.num - s), QuadHalf(SQRT2_H.num + s),
            QuadHalf(SQRT2_H.num - d), QuadHalf(SQRT2_H.num + d),
        ]
        worst = min(m.sign() for m in margins)
        return worst


def _octagon_vertices() -> tuple[tuple[QuadHalf, QuadHalf], ...]:
    half = QuadHalf.of(1, 0)
    pts = [(half, H_HALF), (-half, H_HALF), (-H_HALF, half), (-H_HALF, -half),
           (-half, -H_HALF), (half, -H_HALF), (H_HALF, -half), (H_HALF, half)]
    return tuple(pts)


OCTAGON = OctagonWindow(
    _octagon_vertices(),
    ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)),
)

H_FLOAT = (1.0 + math.sqrt(2.0)) / 2.0


def octagon_vertices_float() -> np.ndarray:
    return np.array([[float(x), float(y)] for x, y in OCTAGON.vertices])


def in_octagon_array(coeffs: np.ndarray, shift_half: np.ndarray | None = None) -> np.ndarray:
    """Exact window test on rows of module coefficients.

    Returns +1 inside, 0 on the boundary, -1 outside.  ``shift_half`` adds a
    half-integer module offset (in coefficients of twice the offset) before
    taking the star image.
    """
    u = np.asarray(coeffs, dtype=np.int64).reshape(-1, 4)
    u2 = 2 * u
    if shift_half is not None:
        u2 = u2 + np.asarray(shift_half, dtype=np.int64)
    # star image times 2: x* = u1 + (u4 - u2) sqrt2/2, y* = -u3 + (u2 + u4) sqrt2/2
    # so 4 x* = 2 U1 + (U4 - U2) sqrt2 with U = 2u (+ shift)
    xa, xb = 2 * u2[:, 0], u2[:, 3] - u2[:, 1]
    ya, yb = -2 * u2[:, 2], u2[:, 1] + u2[:, 3]
    # bounds times 4: 4h = 2 + 2 sqrt2, 4 sqrt2 h = 4 + 2 sqrt2
    signs = []
    for a, b, ca, cb in (
        (xa, xb, 2, 2), (-xa, -xb, 2, 2), (ya, yb, 2, 2), (-ya, -yb, 2, 2),
        (xa + ya, xb + yb, 4, 2), (-xa - ya, -xb - yb, 4, 2),
        (xa - ya, xb - yb, 4, 2), (ya - xa, yb - xb, 4, 2),
    ):
        signs.append(qsign_array(ca - a, cb - b))
    return np.min(np.stack(signs), axis=0)


# ---------------------------------------------------------------------------
# two dimensions
# ---------------------------------------------------------------------------

# The embedding matrix has orthogonal rows of squared length 2, so
# u_i = (a_i . x + a_i* . x*) / 2.  Bounding each term gives coefficient bounds.
_A = np.array([[math.cos(k * math.pi / 4), math.sin(k * math.pi / 4)] for k in range(4)])
_AS = np.array([[math.cos(3 * k * math.pi / 4), math.sin(3 * k * math.pi / 4)] for k in range(4)])


def coefficient_bounds(radius: float) -> np.ndarray:
    # |a_i . x| <= radius, |a_i* . x*| <= |a_i*_x| h + |a_i*_y| h
    b = (radius + np.abs(_AS).sum(axis=1) * H_FLOAT) / 2.0
    return np.floor(b + 1e-9).astype(np.int64)


@dataclass(frozen=True)
class OctaPoints:
    points: list[OctaCoord]
    singular: list[OctaCoord]

    def as_array(self) -> np.ndarray:
        return np.array([p.coeffs for p in self.points], dtype=np.int64).reshape(-1, 4)


def _disk_mask(u: np.ndarray, radius: float) -> np.ndarray:
    """Exact test |phys(u)| <= radius (+1e-9 guard) on coefficient rows.

    4|phys|^2 = A + B sqrt2 with integer A, B.  A float evaluation settles
    clear cases; rows within a relative 1e-9 of the bound are decided with
    Python integers.
    """
    u1, u2, u3, u4 = (u[:, i] for i in range(4))
    p, q = u2 - u4, u2 + u4
    A = 4 * u1 * u1 + 2 * p * p + 4 * u3 * u3 + 2 * q * q
    B = 4 * u1 * p + 4 * u3 * q
    r2 = (Fraction(radius) + _GUARD) ** 2 * 4
    approx = A + B * math.sqrt(2.0)
    bound = float(r2)
    tol = 1e-9 * max(1.0, bound)
    out = approx <= bound - tol
    unsure = np.nonzero(np.abs(approx - bound) < tol)[0]
    num, den = r2.numerator, r2.denominator
    for i in unsure:
        out[i] = qsign(QuadInt(num - den * int(A[i]), -den * int(B[i]))) >= 0
    return out


def cp_points_octa(radius: float) -> OctaPoints:
    """Module points with |phys| <= radius and star image in the closed octagon."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    bounds = coefficient_bounds(radius)
    axes = [np.arange(-b, b + 1, dtype=np.int64) for b in bounds]
    out_pts, out_sing = [], []
    # block over the first coefficient to bound memory
    g2, g3, g4 = np.meshgrid(axes[1], axes[2], axes[3], indexing="ij")
    rest = np.stack([g2.ravel(), g3.ravel(), g4.ravel()], axis=1)
    for u1 in axes[0]:
        u = np.concatenate([np.full((len(rest), 1), u1, dtype=np.int64), rest], axis=1)
        w = in_octagon_array(u)
        u = u[w >= 0]
        w = w[w >= 0]
        keep = _disk_mask(u, radius)
        out_pts.append(u[keep])
        out_sing.append(u[keep & (w == 0)])
    pts = np.concatenate(out_pts)
    sing = np.concatenate(out_sing)
    order = np.lexsort(pts.T[::-1])
    return OctaPoints(
        [OctaCoord.of(r) for r in pts[order].tolist()],
        [OctaCoord.of(r) for r in sing.tolist()],
    )


def phys_array(coeffs: np.ndarray, shift_half: np.ndarray | None = None) -> np.ndarray:
    u = np.asarray(coeffs, dtype=float).reshape(-1, 4)
    if shift_half is not None:
        u = u + np.asarray(shift_half, dtype=float) / 2.0
    h = math.sqrt(2.0) / 2.0
    return np.stack([u[:, 0] + (u[:, 1] - u[:, 3]) * h, u[:, 2] + (u[:, 1] + u[:, 3]) * h], axis=1)


def internal_array(coeffs: np.ndarray, shift_half: np.ndarray | None = None) -> np.ndarray:
    u = np.asarray(coeffs, dtype=float).reshape(-1, 4)
    if shift_half is not None:
        u = u + np.asarray(shift_half, dtype=float) / 2.0
    h = math.sqrt(2.0) / 2.0
    return np.stack([u[:, 0] + (u[:, 3] - u[:, 1]) * h, -u[:, 2] + (u[:, 1] + u[:, 3]) * h], axis=1)


@dataclass(frozen=True)
class FillStats:
    inside_fraction: float
    chi_square: float
    dof: int
    quantile_999: float
    degenerate: bool
    n_points: int


def star_fill_stats(
    points: np.ndarray | list[OctaCoord], bins: int = 8, shift_half=None
) -> FillStats:
    """Window containment and chi-square uniformity of the star images.

    The bounding box [-h, h]^2 is cut into bins x bins cells; only cells whose
    four corners lie in the octagon take part in the chi-square sum, with
    expected counts equal for all of them (uniform law).
    """
    from scipy.stats import chi2

    if isinstance(points, list):
        points = np.array([p.coeffs for p in points], dtype=np.int64).reshape(-1, 4)
    points = np.asarray(points, dtype=np.int64).reshape(-1, 4)
    if len(points) == 0:
        raise ValueError("no points given")
    inside = in_octagon_array(points, shift_half) >= 0
    star = internal_array(points, shift_half)
    edges = np.linspace(-H_FLOAT, H_FLOAT, bins + 1)
    ix = np.clip(np.searchsorted(edges, star[:, 0], side="right") - 1, 0, bins - 1)
    iy = np.clip(np.searchsorted(edges, star[:, 1], side="right") - 1, 0, bins - 1)
    counts = np.zeros((bins, bins), dtype=np.int64)
    np.add.at(counts, (ix, iy), 1)
    interior = np.zeros((bins, bins), dtype=bool)
    for i in range(bins):
        for j in range(bins):
            cs = [(edges[i + a], edges[j + b]) for a in (0, 1) for b in (0, 1)]
            interior[i, j] = all(
                abs(x) <= H_FLOAT + 1e-12 and abs(y) <= H_FLOAT + 1e-12
                and abs(x + y) <= math.sqrt(2) * H_FLOAT + 1e-12
                and abs(x - y) <= math.sqrt(2) * H_FLOAT + 1e-12
                for x, y in cs
            )
    obs = counts[interior].astype(float)
    k = int(interior.sum())
    expected = obs.sum() / k
    dof = k - 1
    degenerate = bool(expected < 5.0)
    chi = float(((obs - expected) ** 2 / expected).sum()) if expected > 0 else math.nan
    return FillStats(
        float(inside.mean()), chi, dof, float(chi2.ppf(0.999, dof)), degenerate, len(points)
    )
