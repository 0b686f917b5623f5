"""Undecorated square-rhombus tilings and simpleton-flip Monte Carlo.

A face is a parallelogram stored as (corner, d1, d2): corner is a tuple of
module coefficients and d1 < d2 are unit directions in 0..3 (units of 45
degrees), so the face is {corner + s*zeta^d1 + t*zeta^d2 : 0 <= s, t <= 1}.
Squares have d2 - d1 = 2, rhombi 1 or 3.  On a torus, corners are reduced
modulo the period lattice.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .exact import OctaCoord, QuadHalf, QuadInt
from .substitution import AB, Patch, PatchError, patch_area

Vertex = tuple[int, int, int, int]
Face = tuple[Vertex, int, int]

_UNIT = [OctaCoord.unit(k).coeffs for k in range(8)]
RNG_ALGORITHM = "numpy.random.PCG64"


class FlipError(ValueError):
    """Raised when a flip site is not valid in the given tiling."""


def _add(v: Vertex, d: int) -> Vertex:
    u = _UNIT[d % 8]
    return (v[0] + u[0], v[1] + u[1], v[2] + u[2], v[3] + u[3])


def _sub(v: Vertex, d: int) -> Vertex:
    return _add(v, d + 4)


def _ident(v: Vertex) -> Vertex:
    return v


def canonical_face(corner: Vertex, d1: int, d2: int, wrap: Callable = _ident) -> Face:
    """Normal form of the parallelogram spanned by zeta^d1, zeta^d2 at corner."""
    d1 %= 8
    d2 %= 8
    if d1 >= 4:
        corner = _add(corner, d1)
        d1 -= 4
    if d2 >= 4:
        corner = _add(corner, d2)
        d2 -= 4
    if d1 > d2:
        d1, d2 = d2, d1
    if d1 == d2:
        raise PatchError("degenerate parallelogram")
    return (wrap(corner), d1, d2)


def face_kind(f: Face) -> str:
    return "square" if f[2] - f[1] == 2 else "rhombus"


def face_corners(f: Face, wrap: Callable = _ident) -> tuple[tuple[Vertex, int, int, int], ...]:
    """The four corners as (vertex, outgoing dir a, outgoing dir b, angle in 45-degree units)."""
    c, d1, d2 = f
    ang = d2 - d1
    return (
        (wrap(c), d1, d2, ang),
        (wrap(_add(c, d1)), d2, d1 + 4, 4 - ang),
        (wrap(_add(_add(c, d1), d2)), d1 + 4, d2 + 4, ang),
        (wrap(_add(c, d2)), d1, d2 + 4, 4 - ang),
    )


def orientation_class(f: Face) -> tuple[int, int]:
    return (f[1], f[2])


@dataclass(frozen=True)
class FlipSite:
    centre: Vertex
    faces: tuple[Face, Face, Face]


class _Torus:
    """Reduction of module points modulo the lattice spanned by two periods."""

    def __init__(self, xmin_vertex: Vertex, ymin_vertex: Vertex, p1: Vertex, p2: Vertex):
        # the float frame is always recomputed from exact module points
        self.xmin_vertex, self.ymin_vertex = tuple(xmin_vertex), tuple(ymin_vertex)
        self.p1, self.p2 = tuple(p1), tuple(p2)
        self.origin = (OctaCoord.of(self.xmin_vertex).phys_float()[0],
                       OctaCoord.of(self.ymin_vertex).phys_float()[1])
        self.side = OctaCoord.of(self.p1).phys_float()[0]

    def __call__(self, v: Vertex) -> Vertex:
        x, y = OctaCoord.of(v).phys_float()
        k1 = math.floor((x - self.origin[0]) / self.side + 1e-9)
        k2 = math.floor((y - self.origin[1]) / self.side + 1e-9)
        if k1 or k2:
            v = tuple(v[i] - k1 * self.p1[i] - k2 * self.p2[i] for i in range(4))
        return v


@dataclass
class RTiling:
    """Square-rhombus tiling; immutable by convention (operations return new values)."""

    faces: frozenset
    period: tuple[Vertex, Vertex] | None = None
    wrap: Callable = field(default=_ident, repr=False, compare=False)
    _vf: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.faces = frozenset(self.faces)
        if self._vf is None:
            vf: dict[Vertex, list] = {}
            for f in sorted(self.faces):
                for v, a, b, ang in face_corners(f, self.wrap):
                    vf.setdefault(v, []).append((f, a % 8, b % 8, ang))
            self._vf = vf

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RTiling) and self.faces == other.faces and self.period == other.period

    def __hash__(self) -> int:
        return hash(self.faces)

    @property
    def vertices(self) -> frozenset:
        return frozenset(self._vf)

    def corners_at(self, v: Vertex):
        return self._vf.get(v, [])

    def edges(self) -> set:
        out = set()
        for f in self.faces:
            cs = [c[0] for c in face_corners(f, self.wrap)]
            for i in range(4):
                a, b = cs[i], cs[(i + 1) % 4]
                # on a torus two distinct edges could join the same pair of
                # vertices only for tiny periods, which are not supported
                out.add((a, b) if a < b else (b, a))
        return out

    def edge_faces(self) -> dict:
        out: dict = {}
        for f in self.faces:
            cs = [c[0] for c in face_corners(f, self.wrap)]
            for i in range(4):
                a, b = cs[i], cs[(i + 1) % 4]
                out.setdefault((a, b) if a < b else (b, a), []).append(f)
        return out

    def turn(self, v: Vertex) -> int:
        return sum(c[3] for c in self.corners_at(v))

    def boundary_vertices(self) -> frozenset:
        return frozenset(v for v in self._vf if self.turn(v) != 8)

    def boundary(self) -> list[Vertex]:
        """Boundary vertices in cyclic order (disk patches); empty on a torus."""
        ef = self.edge_faces()
        bedges = [e for e, fs in ef.items() if len(fs) == 1]
        if not bedges:
            return []
        nxt: dict[Vertex, list[Vertex]] = {}
        for a, b in bedges:
            nxt.setdefault(a, []).append(b)
            nxt.setdefault(b, []).append(a)
        start = min(nxt)
        cycle, prev, cur = [start], None, start
        while True:
            cands = sorted(w for w in nxt[cur] if w != prev)
            if not cands:
                break
            prev, cur = cur, cands[0]
            if cur == start:
                break
            cycle.append(cur)
            if len(cycle) > len(nxt):
                break
        return cycle

    def euler_characteristic(self) -> int:
        return len(self._vf) - len(self.edges()) + len(self.faces)

    def census(self) -> dict[str, int]:
        c = Counter(face_kind(f) for f in self.faces)
        return {"square": c.get("square", 0), "rhombus": c.get("rhombus", 0)}

    def orientation_histograms(self) -> dict[str, dict[str, int]]:
        rh = Counter()
        sq = Counter()
        for f in self.faces:
            key = f"{f[1]}{f[2]}"
            (sq if face_kind(f) == "square" else rh)[key] += 1
        return {
            "rhombus": {k: rh.get(k, 0) for k in ("01", "12", "23", "03")},
            "square": {k: sq.get(k, 0) for k in ("02", "13")},
        }

    def validate(self) -> None:
        """Check the tiling invariants; raise PatchError on failure."""
        ef = self.edge_faces()
        for e, fs in ef.items():
            if len(fs) > 2:
                raise PatchError(f"edge {e} borders {len(fs)} faces")
        for v, cs in self._vf.items():
            if self.turn(v) > 8:
                raise PatchError(f"overlapping faces at vertex {v}")
        if self.period is None:
            if self.euler_characteristic() != 1:
                raise PatchError("disk patch violates V - E + F = 1")
        elif self.euler_characteristic() != 0:
            raise PatchError("torus tiling violates V - E + F = 0")


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def _faces_from_patch(patch: Patch, wrap: Callable = _ident) -> tuple[list[Face], int]:
    if patch.system != AB:
        raise PatchError("square-rhombus tilings come from AB patches")
    seen: Counter = Counter()
    faces = []
    for k, r, a in zip(patch.kind.tolist(), patch.rot.tolist(), patch.anchor.tolist()):
        a = tuple(a)
        if k == 2:
            faces.append(canonical_face(a, r, r + 1, wrap))
        else:
            # a triangle is half of the square at its right-angle corner
            seen[canonical_face(a, r, r + 2, wrap)] += 1
    unpaired = 0
    for f, c in seen.items():
        if c == 2:
            faces.append(f)
        elif c == 1:
            unpaired += 1
        else:
            raise PatchError("overlapping triangles")
    return faces, unpaired


def rtiling_from_patch(patch: Patch) -> RTiling:
    """Strip decorations, erase hypotenuses; unpaired boundary triangles are dropped."""
    faces, _ = _faces_from_patch(patch)
    return RTiling(frozenset(faces))


def simpleton_hexagon() -> RTiling:
    """One square and two rhombi around a single interior vertex."""
    o: Vertex = (0, 0, 0, 0)
    return RTiling(frozenset([
        canonical_face(o, 0, 2), canonical_face(o, 2, 5), canonical_face(o, 5, 8),
    ]))


def periodic_squares(m: int, n: int) -> RTiling:
    return RTiling(frozenset(canonical_face((i, 0, j, 0), 0, 2) for i in range(m) for j in range(n)))


# ---------------------------------------------------------------------------
# flips
# ---------------------------------------------------------------------------


def _site_at(t: RTiling, v: Vertex) -> FlipSite | None:
    cs = t.corners_at(v)
    if len(cs) != 3:
        return None
    if sum(c[3] for c in cs) != 8:
        return None
    kinds = sorted(face_kind(c[0]) for c in cs)
    if kinds != ["rhombus", "rhombus", "square"]:
        return None
    dirs = {c[1] for c in cs} | {c[2] for c in cs}
    if len(dirs) != 3:
        return None
    return FlipSite(v, tuple(sorted(c[0] for c in cs)))


def find_flips(t: RTiling) -> list[FlipSite]:
    sites = [s for v in t._vf if (s := _site_at(t, v)) is not None]
    sites.sort(key=lambda s: (OctaCoord.of(s.centre).phys_float(), s.centre))
    return sites


def _flip_faces(t: RTiling, s: FlipSite) -> tuple[list[Face], list[Face], Vertex]:
    cur = _site_at(t, s.centre)
    if cur is None or cur.faces != s.faces:
        raise FlipError(f"stale or invalid flip site at {s.centre}")
    cs = t.corners_at(s.centre)
    dirs = sorted({c[1] for c in cs} | {c[2] for c in cs})
    new_v = s.centre
    for d in dirs:
        new_v = _add(new_v, d)
    new_v = t.wrap(new_v)
    new_faces = []
    for _f, a, b, _ang in cs:
        # the same pair of directions, now meeting at the mirrored centre
        corner = _sub(_sub(new_v, a), b)
        new_faces.append(canonical_face(corner, a, b, t.wrap))
    return list(s.faces), new_faces, new_v


def apply_flip(t: RTiling, s: FlipSite) -> RTiling:
    """Move the centre of a simpleton hexagon to its mirror image through the hexagon centre."""
    old, new, _ = _flip_faces(t, s)
    faces = set(t.faces)
    faces.difference_update(old)
    faces.update(new)
    return RTiling(frozenset(faces), t.period, t.wrap)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


class _FlipEngine:
    """Mutable working copy used by mc_run; sites are kept incrementally."""

    def __init__(self, t: RTiling):
        self.wrap = t.wrap
        self.period = t.period
        self.faces = set(t.faces)
        self.vf: dict[Vertex, list] = {v: list(cs) for v, cs in t._vf.items()}
        self.sites: list[Vertex] = []
        self.pos: dict[Vertex, int] = {}
        for s in find_flips(t):
            self._add_site(s.centre)

    def _add_site(self, v: Vertex) -> None:
        if v not in self.pos:
            self.pos[v] = len(self.sites)
            self.sites.append(v)

    def _drop_site(self, v: Vertex) -> None:
        i = self.pos.pop(v, None)
        if i is None:
            return
        last = self.sites.pop()
        if i < len(self.sites):
            self.sites[i] = last
            self.pos[last] = i

    def snapshot(self) -> RTiling:
        return RTiling(frozenset(self.faces), self.period, self.wrap)

    def is_site(self, v: Vertex) -> bool:
        cs = self.vf.get(v, [])
        if len(cs) != 3 or sum(c[3] for c in cs) != 8:
            return False
        if sorted(face_kind(c[0]) for c in cs) != ["rhombus", "rhombus", "square"]:
            return False
        return len({c[1] for c in cs} | {c[2] for c in cs}) == 3

    def flip(self, v: Vertex) -> None:
        cs = self.vf[v]
        dirs = sorted({c[1] for c in cs} | {c[2] for c in cs})
        new_v = v
        for d in dirs:
            new_v = _add(new_v, d)
        new_v = self.wrap(new_v)
        old = [c[0] for c in cs]
        new = [canonical_face(_sub(_sub(new_v, a), b), a, b, self.wrap) for _f, a, b, _ang in cs]
        touched = set()
        for f in old:
            self.faces.discard(f)
            for w, a, b, ang in face_corners(f, self.wrap):
                lst = self.vf[w]
                lst[:] = [c for c in lst if c[0] != f]
                if not lst:
                    del self.vf[w]
                touched.add(w)
        for f in new:
            self.faces.add(f)
            for w, a, b, ang in face_corners(f, self.wrap):
                self.vf.setdefault(w, []).append((f, a % 8, b % 8, ang))
                touched.add(w)
        # only hexagon vertices and the two centres can change status
        for w in sorted(touched):
            if self.is_site(w):
                self._add_site(w)
            else:
                self._drop_site(w)
        self.last_old, self.last_new = old, new

    def census(self) -> dict[str, int]:
        c = Counter(face_kind(f) for f in self.faces)
        return {"square": c.get("square", 0), "rhombus": c.get("rhombus", 0)}


@dataclass
class MCStats:
    rng: str
    seed: int
    steps_requested: int
    steps_done: int
    accepted: int
    stalled: bool
    records: list[dict]
    rescan_checks: int = 0
    rescan_mismatches: int = 0

    def to_jsonl(self) -> str:
        head = {"rng": self.rng, "seed": self.seed, "steps_requested": self.steps_requested,
                "steps_done": self.steps_done, "accepted": self.accepted, "stalled": self.stalled}
        lines = [json.dumps({"header": head}, sort_keys=True)]
        lines += [json.dumps(r, sort_keys=True) for r in self.records]
        return "\n".join(lines) + "\n"


def mc_run(
    t: RTiling,
    steps: int,
    seed: int,
    sample_every: int = 1000,
    check_every: int = 0,
    validate_every: int = 0,
) -> tuple[RTiling, MCStats]:
    """Uniform random simpleton flips.

    Each step draws one of the current flip sites uniformly and flips it.
    ``check_every`` > 0 compares the incremental site list with a full
    rescan at that interval; ``validate_every`` > 0 runs the tiling
    invariant checks.  Records are written every ``sample_every`` steps.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    stats = MCStats(RNG_ALGORITHM, seed, steps, 0, 0, False, [])
    if steps == 0:
        return t, stats
    rng = np.random.Generator(np.random.PCG64(seed))
    eng = _FlipEngine(t)

    def record(step: int) -> None:
        snap_faces = eng.faces
        rh, sq = Counter(), Counter()
        for f in snap_faces:
            (sq if face_kind(f) == "square" else rh)[f"{f[1]}{f[2]}"] += 1
        stats.records.append({
            "step": step,
            "census": eng.census(),
            "rhombus_orientations": {k: rh.get(k, 0) for k in ("01", "12", "23", "03")},
            "square_orientations": {k: sq.get(k, 0) for k in ("02", "13")},
            "flip_sites": len(eng.sites),
        })

    record(0)
    for step in range(1, steps + 1):
        if not eng.sites:
            stats.stalled = True
            break
        v = eng.sites[int(rng.integers(len(eng.sites)))]
        eng.flip(v)
        stats.accepted += 1
        stats.steps_done = step
        if check_every and step % check_every == 0:
            stats.rescan_checks += 1
            full = {s.centre for s in find_flips(eng.snapshot())}
            if full != set(eng.sites):
                stats.rescan_mismatches += 1
        if validate_every and step % validate_every == 0:
            eng.snapshot().validate()
        if sample_every and step % sample_every == 0:
            record(step)
    if not stats.records or stats.records[-1]["step"] != stats.steps_done:
        record(stats.steps_done)
    return eng.snapshot(), stats


# ---------------------------------------------------------------------------
# periodic approximants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SquareFrame:
    origin: tuple[float, float]
    side: float
    p1: Vertex
    p2: Vertex
    xmin_vertex: Vertex
    ymin_vertex: Vertex


def square_frame(patch: Patch) -> SquareFrame:
    """Period vectors of a patch whose outline is an axis-parallel square."""
    if patch.system != AB or len(patch) == 0:
        raise PatchError("need a non-empty AB patch")
    verts = patch.vertex_array()
    xy = np.array([OctaCoord.of(v).phys_float() for v in verts.tolist()])
    ix_min, ix_max = int(xy[:, 0].argmin()), int(xy[:, 0].argmax())
    iy_min, iy_max = int(xy[:, 1].argmin()), int(xy[:, 1].argmax())
    dx = OctaCoord.of(verts[ix_max] - verts[ix_min]).phys()[0]
    dy = OctaCoord.of(verts[iy_max] - verts[iy_min]).phys()[1]
    if dx != dy:
        raise PatchError("outline is not a square")
    # the outline is the square exactly when the tiles fill its area
    if QuadHalf(dx.num * dx.num) != patch_area(patch) * 2:
        raise PatchError("outline is not a square")
    a, b = dx.num.a, dx.num.b
    if a % 2 or b % 2:
        raise PatchError("side vector is not a module point")
    # side * a1 with side = a/2 + (b/2) sqrt2 and sqrt2 a1 = a2 - a4
    p1 = (a // 2, b // 2, 0, -(b // 2))
    p2 = (0, b // 2, a // 2, b // 2)
    return SquareFrame((float(xy[ix_min, 0]), float(xy[iy_min, 1])), float(dx), p1, p2,
                       tuple(int(c) for c in verts[ix_min]), tuple(int(c) for c in verts[iy_min]))


def torus_wrap(patch: Patch) -> tuple[Callable, SquareFrame]:
    fr = square_frame(patch)
    return _Torus(fr.xmin_vertex, fr.ymin_vertex, fr.p1, fr.p2), fr


def periodic_approximant(square_patch: Patch) -> RTiling:
    """Glue opposite sides of a square patch; half-squares on the rim pair up across the seam."""
    wrap, fr = torus_wrap(square_patch)
    faces, unpaired = _faces_from_patch(square_patch, wrap)
    if unpaired:
        raise PatchError(f"{unpaired} boundary triangles found no partner across the seam")
    t = RTiling(frozenset(faces), (fr.p1, fr.p2), wrap)
    return t


def seam_violations(square_patch: Patch):
    """Matching-rule report of the glued patch and the largest distance of a violation from the corner."""
    from .substitution import verify_matching

    wrap, fr = torus_wrap(square_patch)
    rep = verify_matching(square_patch, "edges+corners", wrap)
    worst = 0.0
    for v in rep.violations:
        dx = (v.location[0] - fr.origin[0]) % fr.side
        dy = (v.location[1] - fr.origin[1]) % fr.side
        dx = min(dx, fr.side - dx)
        dy = min(dy, fr.side - dy)
        worst = max(worst, math.hypot(dx, dy))
    return rep, worst
