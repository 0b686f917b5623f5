"""Bragg peaks of cut-and-project sets and a finite-sum intensity oracle."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .cutproject import octagon_vertices_float

SQRT2 = math.sqrt(2.0)
DEFAULT_THRESHOLD = 5e-4


def sinc(t):
    t = np.asarray(t, dtype=float)
    return np.sinc(t / np.pi)


# ---------------------------------------------------------------------------
# one dimension
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Peak1D:
    m: int
    n: int
    k_phys: float
    k_int: float
    intensity: float


def intensity_1d(k_int: float) -> float:
    return float(sinc(SQRT2 * math.pi * k_int) ** 2)


def peak_1d(m: int, n: int) -> Peak1D:
    kp = m / 2 + n * SQRT2 / 4
    ki = m / 2 - n * SQRT2 / 4
    return Peak1D(m, n, kp, ki, intensity_1d(ki))


def peaks_1d(kmax: float, threshold: float = DEFAULT_THRESHOLD) -> list[Peak1D]:
    """Every peak with |k_phys| <= kmax and intensity >= threshold.

    Completeness: sinc^2(t) <= 1/t^2, so a surviving peak has
    |k_int| <= K = 1/(sqrt2 pi sqrt(threshold)).  Since m = k_phys + k_int and
    n = sqrt2 (k_phys - k_int), the finite box |m| <= kmax + K,
    |n| <= sqrt2 (kmax + K) contains all of them.
    """
    if kmax <= 0 or not 0 < threshold <= 1:
        raise ValueError("need kmax > 0 and 0 < threshold <= 1")
    K = 1.0 / (SQRT2 * math.pi * math.sqrt(threshold))
    mb = int(math.ceil(kmax + K)) + 1
    nb = int(math.ceil(SQRT2 * (kmax + K))) + 1
    out = []
    for m in range(-mb, mb + 1):
        for n in range(-nb, nb + 1):
            p = peak_1d(m, n)
            if abs(p.k_phys) <= kmax + 1e-12 and p.intensity >= threshold:
                out.append(p)
    out.sort(key=lambda p: (-p.intensity, p.k_phys, p.m, p.n))
    return out


# ---------------------------------------------------------------------------
# the octagon transform
# ---------------------------------------------------------------------------


def _divided_difference_exp(a0, a1, a2):
    """Second divided difference of t -> exp(i t) at three nodes (vectorised)."""
    a = np.stack(np.broadcast_arrays(np.asarray(a0, float), np.asarray(a1, float), np.asarray(a2, float)))
    out = np.empty(a.shape[1:], dtype=complex)
    flat = a.reshape(3, -1)
    res = out.reshape(-1)
    spread = flat.max(axis=0) - flat.min(axis=0)
    close = spread < 1e-3
    if close.any():
        # expansion about the mean: sum_n i^n/n! h_{n-2}(b) with b = a - mean
        c = flat[:, close]
        mu = c.mean(axis=0)
        b = c - mu
        e1 = b.sum(axis=0)
        e2 = b[0] * b[1] + b[0] * b[2] + b[1] * b[2]
        e3 = b[0] * b[1] * b[2]
        # complete homogeneous polynomials from elementary ones
        h0 = np.ones_like(mu)
        h1 = e1
        h2 = e1 * h1 - e2 * h0
        h3 = e1 * h2 - e2 * h1 + e3 * h0
        h4 = e1 * h3 - e2 * h2 + e3 * h1
        s = (1j**2 / 2) * h0 + (1j**3 / 6) * h1 + (1j**4 / 24) * h2 + (1j**5 / 120) * h3 + (1j**6 / 720) * h4
        res[close] = np.exp(1j * mu) * s
    far = ~close
    if far.any():
        f = flat[:, far]
        # order so that the outer nodes are the farthest apart
        order = np.argsort(f, axis=0)
        f = np.take_along_axis(f, order, axis=0)
        lo, mid, hi = f

        def dd1(x, y):
            d = y - x
            small = np.abs(d) < 1e-12
            z = 1j * np.where(small, 1.0, d)
            phi = np.where(small, 1.0 + 0j, np.expm1(z) / z)
            return np.exp(1j * x) * 1j * phi

        res[far] = (dd1(mid, hi) - dd1(lo, mid)) / (hi - lo)
    return out


def _triangle_ft(k: np.ndarray, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Integral of exp(2 pi i k.y) over the triangle (0, p, q)."""
    area = 0.5 * abs(p[0] * q[1] - p[1] * q[0])
    a1 = 2 * np.pi * (k @ p)
    a2 = 2 * np.pi * (k @ q)
    # Hermite-Genocchi: integral over the simplex = -g[a0, a1, a2] for g = exp(i t)
    return -2.0 * area * _divided_difference_exp(np.zeros_like(a1), a1, a2)


_OCT = octagon_vertices_float()
OCTAGON_AREA = 2.0 * (1.0 + SQRT2)


def octagon_ft(k_int) -> np.ndarray | complex:
    """Fourier transform of the unit-edge octagon indicator, as a fan of 8 triangles.

    Accepts a single 2-vector or an (N, 2) array.
    """
    k = np.asarray(k_int, dtype=float)
    single = k.ndim == 1
    k = k.reshape(-1, 2)
    total = np.zeros(len(k), dtype=complex)
    for j in range(8):
        total += _triangle_ft(k, _OCT[j], _OCT[(j + 1) % 8])
    return complex(total[0]) if single else total


# ---------------------------------------------------------------------------
# two dimensions
# ---------------------------------------------------------------------------

# Rows (a_i, a_i*) of the embedding matrix.  The dual lattice is spanned by
# the rows of inv(E).T.
_E = np.array(
    [[math.cos(k * math.pi / 4), math.sin(k * math.pi / 4),
      math.cos(3 * k * math.pi / 4), math.sin(3 * k * math.pi / 4)] for k in range(4)]
)


def dual_basis() -> np.ndarray:
    det = np.linalg.det(_E)
    if abs(det) < 1e-9:
        raise RuntimeError("embedding matrix is singular")
    return np.linalg.inv(_E).T


@dataclass(frozen=True)
class Peak2D:
    m: tuple[int, int, int, int]
    k_phys: tuple[float, float]
    k_int: tuple[float, float]
    intensity: float


@dataclass(frozen=True)
class PeakList2D:
    peaks: list[Peak2D]
    scan_bound: int
    bound_limited: bool


def _sigma_rows(m: np.ndarray) -> np.ndarray:
    return np.stack([-m[:, 3], m[:, 0], m[:, 1], m[:, 2]], axis=1)


def peaks_2d(kmax: float, threshold: float = DEFAULT_THRESHOLD, scan_bound: int = 12) -> PeakList2D:
    """Dual-lattice peaks with |k_phys| <= kmax and intensity >= threshold.

    The scan covers |m_i| <= scan_bound.  The box is invariant under the
    45-degree coefficient rotation, and each rotation orbit is judged by one
    representative, so the emitted list is exactly rotation-closed.  The
    ``bound_limited`` flag is set when a surviving peak touches the box.
    """
    if kmax <= 0 or not 0 < threshold <= 1:
        raise ValueError("need kmax > 0 and 0 < threshold <= 1")
    B = dual_basis()
    ax = np.arange(-scan_bound, scan_bound + 1, dtype=np.int64)
    g = np.stack(np.meshgrid(ax, ax, ax, ax, indexing="ij"), axis=-1).reshape(-1, 4)
    # orbit representative: lexicographically smallest of the 8 rotations
    rots = [g]
    for _ in range(7):
        rots.append(_sigma_rows(rots[-1]))
    stacked = np.stack(rots)  # (8, N, 4)
    w = 2 * scan_bound + 1
    codes = ((stacked + scan_bound) * np.array([w**3, w**2, w, 1])).sum(axis=2)
    rep_idx = codes.argmin(axis=0)
    rep = stacked[rep_idx, np.arange(len(g))]
    is_rep = (rep == g).all(axis=1)
    reps = g[is_rep]
    k = reps @ B
    kp, ki = k[:, :2], k[:, 2:]
    keep = np.hypot(kp[:, 0], kp[:, 1]) <= kmax + 1e-9
    reps, kp, ki = reps[keep], kp[keep], ki[keep]
    amp = octagon_ft(ki) if len(ki) else np.zeros(0, complex)
    inten = np.abs(amp) ** 2 / OCTAGON_AREA**2
    keep = inten >= threshold
    reps, inten = reps[keep], inten[keep]
    peaks = []
    limited = False
    for r, I in zip(reps, inten):
        m = r
        for _ in range(8):
            kk = m @ B
            if np.abs(m).max() == scan_bound:
                limited = True
            peaks.append(Peak2D(tuple(int(c) for c in m), (float(kk[0]), float(kk[1])),
                                (float(kk[2]), float(kk[3])), float(I)))
            m = np.array([-m[3], m[0], m[1], m[2]])
    uniq = {p.m: p for p in peaks}
    out = sorted(uniq.values(), key=lambda p: (-p.intensity, p.m))
    return PeakList2D(out, scan_bound, limited)


# ---------------------------------------------------------------------------
# finite-sum oracle
# ---------------------------------------------------------------------------


def numeric_intensity(points, k) -> float:
    """|sum_j exp(-2 pi i k.x_j)|^2 / N^2 for reals or 2-vectors."""
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    kk = np.atleast_1d(np.asarray(k, dtype=float))
    if len(x) == 0:
        raise ValueError("need at least one point")
    phase = -2 * np.pi * (x @ kk)
    # math.fsum keeps the reduction order independent and accurate
    re = math.fsum(np.cos(phase).tolist())
    im = math.fsum(np.sin(phase).tolist())
    return (re * re + im * im) / (len(x) ** 2)


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def peaks_to_csv(peaks) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    items = peaks.peaks if isinstance(peaks, PeakList2D) else list(peaks)
    if items and isinstance(items[0], Peak2D) or isinstance(peaks, PeakList2D):
        flag = int(peaks.bound_limited) if isinstance(peaks, PeakList2D) else 0
        w.writerow(["m1", "m2", "m3", "m4", "kx", "ky", "intensity", "singular_flag"])
        for p in items:
            w.writerow([*p.m, _fmt(p.k_phys[0]), _fmt(p.k_phys[1]), _fmt(p.intensity), flag])
    else:
        w.writerow(["m", "n", "kx", "ky", "intensity", "singular_flag"])
        for p in items:
            w.writerow([p.m, p.n, _fmt(p.k_phys), _fmt(0.0), _fmt(p.intensity), 0])
    return buf.getvalue()
