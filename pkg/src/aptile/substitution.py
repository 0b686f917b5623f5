"""Inflation engines for the silver-mean chain, Ammann-Beenker and Penrose tilings.

Two-dimensional patches are stored as integer arrays (kind, rotation,
anchor coefficients) so that patches with millions of tiles stay cheap.
Every geometric decision (vertices, shared edges, arrow heads, marks) is
made on exact module coordinates.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Callable, Iterable, Sequence

import numpy as np

from .exact import (
    ALPHA,
    OctaCoord,
    PentaCoord,
    QuadHalf,
    QuadInt,
    zeta_matrix,
)


class PatchError(ValueError):
    """Raised for malformed patches or invalid operations on them."""


# ---------------------------------------------------------------------------
# one-dimensional silver-mean chain
# ---------------------------------------------------------------------------

LENGTH_1D = {"B": QuadInt(1, 0), "R": ALPHA}


@dataclass(frozen=True, slots=True)
class Tile1D:
    kind: str
    left: QuadInt

    def __post_init__(self) -> None:
        if self.kind not in LENGTH_1D:
            raise PatchError(f"unknown 1D tile kind {self.kind!r}")

    @property
    def right(self) -> QuadInt:
        return self.left + LENGTH_1D[self.kind]


def check_abutting(word: Sequence[Tile1D]) -> None:
    for i in range(1, len(word)):
        if word[i].left != word[i - 1].right:
            raise PatchError(f"tiles {i - 1} and {i} do not abut")


def inflate_1d(word: Sequence[Tile1D]) -> list[Tile1D]:
    """B -> R and R -> R B R, with coordinates scaled by alpha."""
    check_abutting(word)
    out: list[Tile1D] = []
    for t in word:
        x = t.left * ALPHA
        if t.kind == "B":
            out.append(Tile1D("R", x))
        else:
            out.append(Tile1D("R", x))
            out.append(Tile1D("B", x + ALPHA))
            out.append(Tile1D("R", x + ALPHA + 1))
    return out


SILVER_SEED = (Tile1D("R", -ALPHA), Tile1D("R", QuadInt()))


def fixed_point_1d(n: int, seed: Sequence[Tile1D] = SILVER_SEED) -> list[Tile1D]:
    if n < 0:
        raise ValueError("n must be non-negative")
    word = list(seed)
    for _ in range(n):
        word = inflate_1d(word)
    return word


def word_census(word: Iterable[Tile1D]) -> dict[str, int]:
    c = Counter(t.kind for t in word)
    return {"B": c.get("B", 0), "R": c.get("R", 0)}


# ---------------------------------------------------------------------------
# prototile templates
# ---------------------------------------------------------------------------

AB, PENROSE = "AB", "penrose"

# Tile vertices are anchor + sum of unit vectors zeta**(rot + e) over the
# listed exponents e.  Edges carry a type and a default arrow head.
AB_KINDS = ("tri_a", "tri_b", "rh")
PEN_KINDS = ("fat_l", "fat_r", "thin_l", "thin_r")

_TRI_VERTS = ((), (0,), (2,))
_RH_VERTS = ((), (0,), (0, 1), (1,))

# (local i, local j, edge type, local index of arrow head)
_AB_EDGES = {
    0: ((0, 1, "unit", 1), (0, 2, "unit", 0), (1, 2, "hyp", 2)),
    1: ((0, 1, "unit", 0), (0, 2, "unit", 2), (1, 2, "hyp", 1)),
    2: ((0, 1, "unit", 0), (1, 2, "unit", 2), (2, 3, "unit", 2), (3, 0, "unit", 0)),
}
# angle of each corner in units of 45 degrees
_AB_ANGLES = {0: (2, 1, 1), 1: (2, 1, 1), 2: (1, 3, 1, 3)}

# Penrose half-rhombi: apex A at the anchor, legs AB and AC of unit length,
# base BC along a rhombus diagonal.  Fat halves have a 108 degree apex,
# thin halves a 36 degree apex.
_PEN_SPREAD = {0: 3, 1: -3, 2: 1, 3: -1}
_PEN_EDGES = {
    0: ((0, 1, "double", 1), (0, 2, "single", 0), (1, 2, "base_fat", 1)),
    2: ((0, 1, "double", 0), (0, 2, "single", 0), (1, 2, "base_thin", 1)),
}
_PEN_EDGES[1] = _PEN_EDGES[0]
_PEN_EDGES[3] = _PEN_EDGES[2]
_PEN_ANGLES = {0: (3, 1, 1), 1: (3, 1, 1), 2: (1, 2, 2), 3: (1, 2, 2)}  # units of 36 degrees

# The base diagonal is shared only with the mirror half of the same rhombus
# and carries no arrow; its recorded head is the endpoint with the smaller
# coefficient tuple, which both halves agree on.

# Child tables for rotation-0 parents: (child kind, child rot, offset from
# scale * parent anchor).  Rotated parents rotate the children.
_AB_CHILDREN = {
    0: ((2, 1, (0, 0, 0, 0)), (2, 3, (1, 1, 0, -1)), (0, 3, (0, 1, 1, 0)),
        (0, 5, (0, 1, 0, 0)), (1, 0, (0, 1, 0, 0))),
    1: ((2, 0, (0, 0, 0, 0)), (2, 2, (0, 1, 0, 0)), (0, 0, (0, 1, 0, 0)),
        (1, 3, (0, 1, 0, 0)), (1, 5, (1, 1, 0, 0))),
    2: ((2, 0, (0, 0, 0, 0)), (2, 0, (1, 1, 1, -1)), (2, 2, (1, 1, 0, -1)),
        (0, 2, (1, 1, 0, 0)), (0, 6, (1, 1, 1, -1)), (1, 1, (1, 1, 1, -1)),
        (1, 5, (1, 1, 0, 0))),
}
_PEN_CHILDREN = {
    0: ((0, 4, (1, 0, 0, 0)), (1, 3, (1, 0, 0, 1)), (3, 8, (1, 0, 0, 0))),
    1: ((1, 6, (0, 0, 0, 1)), (0, 7, (1, 0, 0, 1)), (2, 2, (0, 0, 0, 1))),
    2: ((2, 7, (0, -1, -1, -1)), (0, 2, (-1, -1, -1, -1))),
    3: ((3, 3, (-1, -1, -1, 0)), (1, 8, (-1, -1, -1, -1))),
}


@dataclass(frozen=True)
class _System:
    name: str
    kinds: tuple[str, ...]
    n_rot: int
    verts: dict[int, tuple[tuple[int, ...], ...]]
    edges: dict[int, tuple[tuple[int, int, str, int], ...]]
    angles: dict[int, tuple[int, ...]]
    full_turn: int
    unit: Callable[[int], tuple[int, int, int, int]]
    zeta: np.ndarray  # multiplication by the rotation generator
    scale: np.ndarray  # multiplication by the inflation factor
    children: dict[int, tuple[tuple[int, int, tuple[int, int, int, int]], ...]]


def _octa_unit(k: int) -> tuple[int, int, int, int]:
    return OctaCoord.unit(k).coeffs


def _penta_unit(k: int) -> tuple[int, int, int, int]:
    return PentaCoord.unit10(k).coeffs


def _mat_power(m: np.ndarray, k: int) -> np.ndarray:
    out = np.eye(4, dtype=np.int64)
    for _ in range(k):
        out = m @ out
    return out


_Z8 = zeta_matrix(8)
_Z5 = zeta_matrix(5)
# zeta10 = -zeta5**3
_Z10 = -_mat_power(_Z5, 3)
_ALPHA_M = np.eye(4, dtype=np.int64) + _Z8 - _mat_power(_Z8, 3)
_TAU_M = -(_mat_power(_Z5, 2) + _mat_power(_Z5, 3))

SYSTEMS = {
    AB: _System(
        AB, AB_KINDS, 8, {0: _TRI_VERTS, 1: _TRI_VERTS, 2: _RH_VERTS}, _AB_EDGES,
        _AB_ANGLES, 8, _octa_unit, _Z8, _ALPHA_M, _AB_CHILDREN,
    ),
    PENROSE: _System(
        PENROSE, PEN_KINDS, 10,
        {k: ((), (0,), (_PEN_SPREAD[k],)) for k in range(4)}, _PEN_EDGES,
        _PEN_ANGLES, 10, _penta_unit, _Z10, _TAU_M, _PEN_CHILDREN,
    ),
}


def _rot_matrix(sys_: _System, r: int) -> np.ndarray:
    return _mat_power(sys_.zeta, r % sys_.n_rot)


def _canonical(sys_: _System, kind: int, rot: int, anchor: np.ndarray) -> tuple[int, np.ndarray]:
    # The AB rhombus is centrally symmetric: rotation r at a equals
    # rotation r+4 at the opposite acute corner.
    rot %= sys_.n_rot
    if sys_.name == AB and kind == 2 and rot >= 4:
        anchor = anchor + np.array(sys_.unit(rot)) + np.array(sys_.unit(rot + 1))
        rot -= 4
    return rot, anchor


@lru_cache(maxsize=None)
def _tables(name: str):
    """Vertex offsets, child tables and mark tables indexed by (kind, rot)."""
    s = SYSTEMS[name]
    nk, nr = len(s.kinds), s.n_rot
    vmax = max(len(v) for v in s.verts.values())
    voff = np.zeros((nk, nr, vmax, 4), dtype=np.int64)
    nverts = np.array([len(s.verts[k]) for k in range(nk)])
    for k in range(nk):
        for r in range(nr):
            for j, exps in enumerate(s.verts[k]):
                v = np.zeros(4, dtype=np.int64)
                for e in exps:
                    v += np.array(s.unit(r + e))
                voff[k, r, j] = v
            for j in range(len(s.verts[k]), vmax):
                voff[k, r, j] = voff[k, r, 0]
    cmax = max(len(c) for c in s.children.values())
    ckind = np.zeros((nk, nr, cmax), dtype=np.int8)
    crot = np.zeros((nk, nr, cmax), dtype=np.int8)
    coff = np.zeros((nk, nr, cmax, 4), dtype=np.int64)
    cvalid = np.zeros((nk, nr, cmax), dtype=bool)
    cmark = np.zeros((nk, nr, cmax, vmax), dtype=np.int8)
    for k in range(nk):
        for r in range(nr):
            rm = _rot_matrix(s, r)
            parent_corners = {tuple(s.scale @ voff[k, r, j]) for j in range(nverts[k])}
            for c, (kk, rr, off) in enumerate(s.children[k]):
                a = rm @ np.array(off, dtype=np.int64)
                rot, a = _canonical(s, kk, rr + r, a)
                ckind[k, r, c], crot[k, r, c], coff[k, r, c] = kk, rot, a
                cvalid[k, r, c] = True
                for j in range(nverts[kk]):
                    cmark[k, r, c, j] = tuple(a + voff[kk, rot, j]) in parent_corners
    return voff, nverts, ckind, crot, coff, cvalid, cmark


# ---------------------------------------------------------------------------
# placed tiles and patches
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlacedTile:
    system: str
    kind: str
    rotation: int
    anchor: OctaCoord | PentaCoord
    arrows: tuple[tuple[str, OctaCoord | PentaCoord, OctaCoord | PentaCoord], ...]
    marks: tuple[int, ...] | None = None

    @property
    def vertices(self) -> tuple:
        s = SYSTEMS[self.system]
        cls = OctaCoord if self.system == AB else PentaCoord
        k = s.kinds.index(self.kind)
        out = []
        for exps in s.verts[k]:
            v = self.anchor
            for e in exps:
                v = v + cls.of(s.unit(self.rotation + e))
            out.append(v)
        return tuple(out)


@dataclass
class Patch:
    """Finite edge-to-edge set of placed tiles.

    ``pivot_half`` records a half-integer offset: the true position of a
    stored coordinate x is x + pivot_half / 2.  The origin-centred AB square
    uses it, since its centre is not a module point.
    """

    system: str
    kind: np.ndarray
    rot: np.ndarray
    anchor: np.ndarray
    marks: np.ndarray | None = None
    arrow_flip: np.ndarray | None = None
    decorated: bool = True
    pivot_half: tuple[int, int, int, int] = (0, 0, 0, 0)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.system not in SYSTEMS:
            raise PatchError(f"unknown system {self.system!r}")
        s = SYSTEMS[self.system]
        self.kind = np.asarray(self.kind, dtype=np.int8).reshape(-1)
        self.rot = np.asarray(self.rot, dtype=np.int8).reshape(-1)
        self.anchor = np.asarray(self.anchor, dtype=np.int64).reshape(-1, 4)
        n = len(self.kind)
        if len(self.rot) != n or len(self.anchor) != n:
            raise PatchError("kind, rot and anchor lengths differ")
        if n and (self.kind.min() < 0 or self.kind.max() >= len(s.kinds)):
            raise PatchError("tile kind out of range")
        vmax = max(len(v) for v in s.verts.values())
        if self.marks is None:
            self.marks = np.zeros((n, vmax), dtype=np.int8)
        self.marks = np.asarray(self.marks, dtype=np.int8).reshape(n, vmax)
        if self.arrow_flip is None:
            self.arrow_flip = np.zeros((n, 4), dtype=bool)
        self.arrow_flip = np.asarray(self.arrow_flip, dtype=bool).reshape(n, 4)

    def __len__(self) -> int:
        return len(self.kind)

    @property
    def spec(self) -> _System:
        return SYSTEMS[self.system]

    def vertex_coords(self) -> np.ndarray:
        """(N, vmax, 4) tile corner coefficients (padded corners repeat corner 0)."""
        voff = _tables(self.system)[0]
        return self.anchor[:, None, :] + voff[self.kind, self.rot]

    def n_vertices_of(self) -> np.ndarray:
        return _tables(self.system)[1][self.kind]

    def vertex_array(self) -> np.ndarray:
        """Distinct vertex coefficient rows, sorted lexicographically."""
        if "verts" not in self._cache:
            vc = self.vertex_coords()
            nv = self.n_vertices_of()
            mask = np.arange(vc.shape[1])[None, :] < nv[:, None]
            rows = vc[mask]
            self._cache["verts"] = (
                np.unique(rows, axis=0) if len(rows) else np.zeros((0, 4), np.int64)
            )
        return self._cache["verts"]

    @property
    def tiles(self) -> list[PlacedTile]:
        cls = OctaCoord if self.system == AB else PentaCoord
        vc = self.vertex_coords()
        out = []
        for i in range(len(self)):
            k = int(self.kind[i])
            arrows = []
            for e, (a, b, et, head) in enumerate(self.spec.edges[k]):
                h = head
                if self.arrow_flip[i, e]:
                    h = b if head == a else a
                tail = b if h == a else a
                arrows.append((et, cls.of(vc[i, tail]), cls.of(vc[i, h])))
            nv = len(self.spec.verts[k])
            out.append(
                PlacedTile(
                    self.system, self.spec.kinds[k], int(self.rot[i]), cls.of(self.anchor[i]),
                    tuple(arrows),
                    tuple(int(m) for m in self.marks[i, :nv]) if self.system == AB else None,
                )
            )
        return out

    def subset(self, idx) -> Patch:
        return Patch(
            self.system, self.kind[idx], self.rot[idx], self.anchor[idx], self.marks[idx],
            self.arrow_flip[idx], self.decorated, self.pivot_half,
        )

    def strip_decorations(self) -> Patch:
        p = self.subset(slice(None))
        p.decorated = False
        p.marks = np.zeros_like(p.marks)
        return p

    @classmethod
    def from_tiles(cls, system: str, tiles: Iterable[tuple[int, int, Sequence[int]]], **kw) -> Patch:
        tiles = list(tiles)
        s = SYSTEMS[system]
        kinds, rots, anchors = [], [], []
        for k, r, a in tiles:
            r2, a2 = _canonical(s, k, r, np.asarray(a, dtype=np.int64))
            kinds.append(k)
            rots.append(r2)
            anchors.append(a2)
        return cls(system, np.array(kinds, np.int8), np.array(rots, np.int8),
                   np.array(anchors, np.int64).reshape(-1, 4), **kw)

    def same_tiles(self, other: Patch) -> bool:
        return self.system == other.system and self.tile_set() == other.tile_set()

    def tile_set(self) -> frozenset:
        return frozenset(
            (int(k), int(r), tuple(int(c) for c in a))
            for k, r, a in zip(self.kind, self.rot, self.anchor)
        )


@dataclass(frozen=True)
class SubstitutionRule:
    system: str
    scale: QuadInt | tuple[int, int]
    children: dict
    corner_marks: bool


AB_RULE = SubstitutionRule(AB, ALPHA, _AB_CHILDREN, True)
# the golden mean is recorded as (a, b) meaning a + b*tau
PENROSE_RULE = SubstitutionRule(PENROSE, (0, 1), _PEN_CHILDREN, False)
RULES = {AB: AB_RULE, PENROSE: PENROSE_RULE}

_COEFF_LIMIT = 1 << 48


def inflate_patch(patch: Patch, rule: SubstitutionRule | None = None) -> Patch:
    """Replace every tile by its children; coordinates are scaled about the pivot."""
    rule = rule or RULES[patch.system]
    if rule.system != patch.system:
        raise PatchError(f"rule for {rule.system} applied to a {patch.system} patch")
    s = patch.spec
    if len(patch) and np.abs(patch.anchor).max() > _COEFF_LIMIT // 8:
        raise PatchError("coordinates too large for 64-bit inflation")
    voff, nverts, ckind, crot, coff, cvalid, cmark = _tables(patch.system)
    shift = np.zeros(4, dtype=np.int64)
    if any(patch.pivot_half):
        # x -> scale*x + (scale - 1)*c with c = pivot_half/2; for alpha the
        # factor is sqrt2, so the shift is (zeta - zeta^3) pivot_half / 2
        if patch.system != AB:
            raise PatchError("pivot offsets are only supported for AB patches")
        doubled = (_Z8 - _mat_power(_Z8, 3)) @ np.array(patch.pivot_half, dtype=np.int64)
        if np.any(doubled % 2):
            raise PatchError("pivot shift leaves the module")
        shift = doubled // 2
    scaled = patch.anchor @ s.scale.T + shift
    k, r = patch.kind.astype(np.intp), patch.rot.astype(np.intp)
    valid = cvalid[k, r]
    anchors = (scaled[:, None, :] + coff[k, r])[valid]
    kinds = ckind[k, r][valid]
    rots = crot[k, r][valid]
    marks = cmark[k, r][valid] if rule.corner_marks else None
    return Patch(patch.system, kinds, rots, anchors, marks, None, patch.decorated, patch.pivot_half)


def inflate_n(patch: Patch, n: int) -> Patch:
    for _ in range(n):
        patch = inflate_patch(patch)
    return patch


# ---------------------------------------------------------------------------
# seeds
# ---------------------------------------------------------------------------


def ab_square_seed() -> Patch:
    """Unit square split along its diagonal, centred on the origin.

    Stored coordinates put one corner at 0; the true centre offset is
    -(a1 + a3)/2, recorded in ``pivot_half``.
    """
    return Patch.from_tiles(AB, [(0, 0, (0, 0, 0, 0)), (1, 4, (1, 0, 1, 0))], pivot_half=(-1, 0, -1, 0))


def ab_star_seed() -> Patch:
    """Eight rhombi around the origin, a fixed point of one inflation.

    Being a fixed point, the seed carries the corner marks its own tiles get
    after one inflation.
    """
    seed = Patch.from_tiles(AB, [(2, r, (0, 0, 0, 0)) for r in range(8)])
    child = inflate_patch(seed)
    marks = {t: m for t, m in zip(_tile_keys(child), child.marks)}
    seed.marks = np.array([marks[t] for t in _tile_keys(seed)], dtype=np.int8)
    return seed


def _tile_keys(p: Patch) -> list[tuple]:
    return [(int(k), int(r), tuple(int(c) for c in a)) for k, r, a in zip(p.kind, p.rot, p.anchor)]


def ab_periodic_squares(m: int, n: int) -> Patch:
    """m x n block of identically split unit squares (a periodic arrangement)."""
    tiles = []
    for i in range(m):
        for j in range(n):
            tiles.append((0, 0, (i, 0, j, 0)))
            tiles.append((1, 4, (i + 1, 0, j + 1, 0)))
    return Patch.from_tiles(AB, tiles)


def penrose_sun_seed() -> Patch:
    """Ten thin half-rhombi around the origin with alternating chirality."""
    tiles = []
    for i in range(10):
        if i % 2 == 0:
            tiles.append((3, (i + 1) % 10, (0, 0, 0, 0)))
        else:
            tiles.append((2, i, (0, 0, 0, 0)))
    return Patch.from_tiles(PENROSE, tiles)


SEEDS = {
    "square": ab_square_seed,
    "star": ab_star_seed,
    "sun": penrose_sun_seed,
}


# ---------------------------------------------------------------------------
# census and area
# ---------------------------------------------------------------------------


def _edge_records(patch: Patch):
    """Yield (tile index, local edge index, key, type, head) for every tile edge."""
    vc = patch.vertex_coords()
    s = patch.spec
    for i in range(len(patch)):
        k = int(patch.kind[i])
        for e, (a, b, et, head) in enumerate(s.edges[k]):
            va, vb = tuple(vc[i, a].tolist()), tuple(vc[i, b].tolist())
            if et.startswith("base"):
                yield i, e, va, vb, et, min(va, vb)
                continue
            h = head
            if patch.arrow_flip[i, e]:
                h = b if head == a else a
            yield i, e, va, vb, et, (va if h == a else vb)


def tile_census(patch: Patch | Sequence[Tile1D]) -> dict[str, int]:
    if not isinstance(patch, Patch):
        return word_census(patch)
    names = patch.spec.kinds
    counts = np.bincount(patch.kind.astype(np.intp), minlength=len(names)) if len(patch) else np.zeros(len(names), int)
    out = {name: int(c) for name, c in zip(names, counts)}
    if patch.system == AB:
        out["triangles"] = out["tri_a"] + out["tri_b"]
        out["rhombi"] = out["rh"]
        hyp = Counter()
        tri = np.nonzero(patch.kind < 2)[0]
        if len(tri):
            vc = patch.vertex_coords()[tri]
            for p, q in zip(vc[:, 1], vc[:, 2]):
                a, b = tuple(p.tolist()), tuple(q.tolist())
                hyp[(a, b) if a < b else (b, a)] += 1
        out["squares"] = sum(1 for c in hyp.values() if c == 2)
        out["unpaired_triangles"] = out["triangles"] - 2 * out["squares"]
    else:
        out["fat"] = out["fat_l"] + out["fat_r"]
        out["thin"] = out["thin_l"] + out["thin_r"]
    return out


def patch_area(patch: Patch):
    """Exact area.

    AB: a QuadHalf (triangles 1/2, rhombi sqrt2/2).  Penrose: a pair (a, b)
    meaning (a + b*tau) times the thin half-rhombus area.
    """
    c = tile_census(patch)
    if patch.system == AB:
        return QuadHalf.of(c["triangles"], c["rhombi"])
    return (c["thin"], c["fat"])


def area_identity_holds(parent: Patch, child: Patch) -> bool:
    """scale**2 * area(parent) == area(child), exactly."""
    if parent.system == AB:
        return patch_area(parent) * (ALPHA * ALPHA) == patch_area(child)
    a, b = patch_area(parent)
    # multiply (a + b tau) by tau**2 = 1 + tau, using tau**2 = tau + 1
    return (a + b, a + 2 * b) == patch_area(child)


# ---------------------------------------------------------------------------
# matching rules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str
    tiles: tuple[int, ...]
    location: tuple[float, float]
    detail: str = ""


@dataclass
class MatchReport:
    ok: bool
    violations: list[Violation]
    checked_edges: int
    checked_vertices: int

    def __bool__(self) -> bool:
        return self.ok


def _phys_float(system: str, coeffs: Sequence[int]) -> tuple[float, float]:
    cls = OctaCoord if system == AB else PentaCoord
    return cls.of(coeffs).phys_float()


def _direction_index(system: str, vec: Sequence[int]) -> tuple[int, bool]:
    x, y = _phys_float(system, vec)
    steps = SYSTEMS[system].n_rot
    ang = math.atan2(y, x) / (2 * math.pi) * steps
    return int(round(ang)) % steps, math.hypot(x, y) > 1.2


@lru_cache(maxsize=None)
def _corner_shapes(system: str):
    """Per (kind, rot, corner): (corner class, ((edge idx, dir, long), ...))."""
    s = SYSTEMS[system]
    voff = _tables(system)[0]
    out = {}
    for k in range(len(s.kinds)):
        nv = len(s.verts[k])
        cls = s.kinds[k][:3]
        for r in range(s.n_rot):
            for j in range(nv):
                edges = []
                for e, (a, b, _et, _h) in enumerate(s.edges[k]):
                    if j not in (a, b):
                        continue
                    other = b if j == a else a
                    d, long = _direction_index(system, voff[k, r, other] - voff[k, r, j])
                    edges.append((e, d, long))
                out[(k, r, j)] = (cls, tuple(edges))
    return out


def _identity_key(v: tuple[int, ...]) -> tuple[int, ...]:
    return v


def _collect_vertices(patch: Patch, wrap: Callable = _identity_key):
    """Map vertex key -> list of (tile, corner) plus per-edge records."""
    s = patch.spec
    vc = patch.vertex_coords()
    nv = patch.n_vertices_of()
    corners = defaultdict(list)
    for i in range(len(patch)):
        for j in range(int(nv[i])):
            corners[wrap(tuple(vc[i, j].tolist()))].append((i, j))
    return corners


def _star_descriptor(patch: Patch, members: list[tuple[int, int]]):
    shapes = _corner_shapes(patch.system)
    s = patch.spec
    desc = []
    for i, j in members:
        k, r = int(patch.kind[i]), int(patch.rot[i])
        cls, edges = shapes[(k, r, j)]
        es = []
        for e, d, long in edges:
            a, b, et, head = s.edges[k][e]
            if patch.arrow_flip[i, e]:
                head = b if head == a else a
            es.append((d, int(long), int(head != j)))
        desc.append((cls, tuple(sorted(es)), int(patch.marks[i, j])))
    return desc


def canonical_star(desc: Iterable[tuple[str, tuple, int]], n_rot: int = 8) -> tuple:
    """Rotation-invariant form of a decorated vertex star."""
    desc = list(desc)
    best = None
    for k in range(n_rot):
        rotated = tuple(sorted(
            (cls, tuple(sorted(((d + k) % n_rot, lg, out) for d, lg, out in es)), m)
            for cls, es, m in desc
        ))
        if best is None or rotated < best:
            best = rotated
    return best


def _star_to_json(star: tuple) -> list:
    return [[cls, [list(e) for e in es], m] for cls, es, m in star]


def _star_from_json(obj: list) -> tuple:
    return tuple((cls, tuple(tuple(e) for e in es), m) for cls, es, m in obj)


@lru_cache(maxsize=1)
def ab_vertex_atlas() -> frozenset:
    """The admissible decorated AB vertex stars (shipped data table)."""
    text = resources.files("aptile.data").joinpath("ab_vertex_atlas.json").read_text()
    doc = json.loads(text)
    return frozenset(_star_from_json(s) for s in doc["stars"])


def vertex_stars(patch: Patch, wrap: Callable = _identity_key) -> dict[tuple, tuple]:
    """Canonical decorated stars at the interior vertices of an AB patch."""
    s = patch.spec
    corners = _collect_vertices(patch, wrap)
    out = {}
    for v, members in corners.items():
        turn = sum(s.angles[int(patch.kind[i])][j] for i, j in members)
        if turn == s.full_turn:
            out[v] = canonical_star(_star_descriptor(patch, members), s.n_rot)
    return out


def verify_matching(
    patch: Patch, mode: str = "edges-only", wrap: Callable | None = None
) -> MatchReport:
    """Check arrow matching on shared edges and, for AB, the corner houses.

    ``wrap`` maps vertex keys to representatives; passing a reduction modulo
    a period lattice checks a patch glued into a torus.
    """
    if mode not in ("edges-only", "edges+corners"):
        raise ValueError(f"unknown mode {mode!r}")
    if not patch.decorated:
        raise PatchError("patch carries no decorations to verify")
    if mode == "edges+corners" and patch.system != AB:
        raise PatchError("corner marks exist only for AB patches")
    wrap = wrap or _identity_key
    by_edge = defaultdict(list)
    for i, e, va, vb, et, head in _edge_records(patch):
        a, b = wrap(va), wrap(vb)
        key = (a, b) if a < b else (b, a)
        by_edge[key].append((i, et, wrap(head)))
    violations = []
    checked = 0
    for key, recs in by_edge.items():
        loc = _phys_float(patch.system, key[0])
        if len(recs) > 2:
            violations.append(Violation("overlap", tuple(r[0] for r in recs), loc, "edge used by more than two tiles"))
            continue
        if len(recs) < 2:
            continue
        checked += 1
        (i, t1, h1), (j, t2, h2) = recs
        if t1 != t2:
            violations.append(Violation("edge-type", (i, j), loc, f"{t1} vs {t2}"))
        elif h1 != h2:
            violations.append(Violation("edge-orientation", (i, j), loc, "arrows disagree"))
    nverts = 0
    if mode == "edges+corners":
        atlas = ab_vertex_atlas()
        corners = _collect_vertices(patch, wrap)
        s = patch.spec
        for v, members in corners.items():
            turn = sum(s.angles[int(patch.kind[i])][j] for i, j in members)
            if turn != s.full_turn:
                continue
            nverts += 1
            star = canonical_star(_star_descriptor(patch, members), s.n_rot)
            if star not in atlas:
                violations.append(
                    Violation("corner-house", tuple(sorted({i for i, _ in members})),
                              _phys_float(patch.system, v), "vertex star not in atlas")
                )
    violations.sort(key=lambda x: (x.location, x.kind, x.tiles))
    return MatchReport(not violations, violations, checked, nverts)


# ---------------------------------------------------------------------------
# repetitivity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeResult:
    radius: float
    bound: float
    n_patterns: int
    n_centres: int
    censored: bool


def _vertex_floats(system: str, verts: np.ndarray) -> np.ndarray:
    if system == AB:
        h = math.sqrt(2.0) / 2.0
        u = verts.astype(float)
        return np.stack([u[:, 0] + (u[:, 1] - u[:, 3]) * h, u[:, 2] + (u[:, 1] + u[:, 3]) * h], axis=1)
    ang = 2 * np.pi * np.arange(1, 5) / 5
    u = verts.astype(float)
    return np.stack([u @ np.cos(ang), u @ np.sin(ang)], axis=1)


def boundary_vertex_mask(patch: Patch) -> np.ndarray:
    """True for vertices of the patch whose corner angles do not close up."""
    verts = patch.vertex_array()
    index = {tuple(v): n for n, v in enumerate(verts.tolist())}
    turn = np.zeros(len(verts), dtype=np.int64)
    vc = patch.vertex_coords()
    nv = patch.n_vertices_of()
    s = patch.spec
    for i in range(len(patch)):
        ang = s.angles[int(patch.kind[i])]
        for j in range(int(nv[i])):
            turn[index[tuple(vc[i, j].tolist())]] += ang[j]
    return turn != s.full_turn


def repetitivity_probe(patch: Patch, r: float, r_guess: float | None = None) -> ProbeResult:
    """Largest distance from a vertex to the nearest other copy of its r-pattern.

    The r-pattern at a vertex is the set of vertex positions (exact, relative
    to the centre) within distance r.  Centres are restricted to vertices at
    distance greater than r + r_guess from the patch boundary, while copies
    may sit anywhere their r-ball is complete.  If a recurrence distance
    exceeds r_guess the answer may be censored and the flag is raised.
    """
    from scipy.spatial import cKDTree

    verts = patch.vertex_array()
    pts = _vertex_floats(patch.system, verts)
    bnd = boundary_vertex_mask(patch)
    if not bnd.any():
        raise PatchError("patch has no boundary")
    btree = cKDTree(pts[bnd])
    dist_to_boundary = btree.query(pts)[0]
    if r_guess is None:
        r_guess = max(4.0, 2.0 * r + 4.0)
    complete = dist_to_boundary > r + 1e-9
    centres = dist_to_boundary > r + r_guess
    if not centres.any():
        raise PatchError("radius too large for the usable interior of the patch")
    tree = cKDTree(pts)
    keys = {}
    for n in np.nonzero(complete)[0]:
        nb = tree.query_ball_point(pts[n], r + 1e-9)
        rel = verts[nb] - verts[n]
        d = np.hypot(*(pts[nb] - pts[n]).T)
        rel = rel[d <= r + 1e-9]
        keys[n] = hash(np.ascontiguousarray(rel[np.lexsort(rel.T[::-1])]).tobytes())
    groups = defaultdict(list)
    for n, key in keys.items():
        groups[key].append(n)
    bound = 0.0
    used = set()
    for key, members in groups.items():
        cs = [n for n in members if centres[n]]
        if not cs:
            continue
        used.add(key)
        if len(members) < 2:
            bound = math.inf
            continue
        t = cKDTree(pts[members])
        dd, _ = t.query(pts[cs], k=2)
        bound = max(bound, float(dd[:, 1].max()))
    return ProbeResult(r, bound, len(used), int(centres.sum()), bound > r_guess)
