"""Robinson marked squares: tile table, verifier, backtracking search and square detection.

Tiles carry two families of oriented lines.  Green lines run through edge
midpoints and form the crosses; red lines run off-centre and close up into
the nested squares.  A corner of a tile is "yellow" unless the tile is a
smallest cross, and the corner rule asks for exactly three yellow corners
around every interior grid point.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

SIDES = ("N", "E", "S", "W")
LANES = ("lo", "mid", "hi")
TABLE_HEADER = "# aptile-robinson-tiles v1"

# A side signature is a sorted tuple of (lane, colour, orientation).
Side = tuple
_FLIP = {"lo": "hi", "mid": "mid", "hi": "lo"}


def _flip_lanes(side: Side) -> Side:
    return tuple(sorted((_FLIP[lane], c, o) for lane, c, o in side))


def _rot_edges(edges):
    """Quarter turn counter-clockwise."""
    n, e, s, w = edges
    return (_flip_lanes(e), s, _flip_lanes(w), n)


def _refl_edges(edges):
    """Mirror in the vertical axis (x -> -x)."""
    n, e, s, w = edges
    return (_flip_lanes(n), w, _flip_lanes(s), e)


# corner order NE, NW, SW, SE
def _rot_corners(c):
    ne, nw, sw, se = c
    return (se, ne, nw, sw)


def _refl_corners(c):
    ne, nw, sw, se = c
    return (nw, ne, se, sw)


@dataclass(frozen=True)
class RobTile:
    base: int
    rot: int
    reflected: bool
    edges: tuple = field(compare=False)
    corner_colour: tuple = field(compare=False)

    @property
    def signature(self):
        return (self.edges, self.corner_colour)

    @property
    def yellow(self) -> bool:
        return all(self.corner_colour)


def _parse_side(text: str) -> Side:
    if text == "-":
        return ()
    out = []
    for part in text.split(","):
        lane, colour, orient = part.split(":")
        if lane not in LANES or colour not in ("r", "g") or orient not in ("in", "out"):
            raise ValueError(f"bad crossing {part!r}")
        out.append((lane, colour, orient))
    return tuple(sorted(out))


def parse_table(text: str) -> dict[int, tuple]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != TABLE_HEADER:
        raise ValueError("missing or unknown tile table header")
    bases = {}
    for ln, raw in enumerate(lines[1:], start=2):
        raw = raw.strip()
        if not raw or raw.startswith("#"):
            continue
        fields = raw.split()
        try:
            b = int(fields[0])
            kv = dict(f.split("=", 1) for f in fields[1:])
            edges = tuple(_parse_side(kv[s]) for s in SIDES)
            bits = kv["yellow"]
            if len(bits) != 4 or set(bits) - {"0", "1"}:
                raise ValueError("yellow= needs four bits")
            corners = tuple(ch == "1" for ch in bits)
        except (KeyError, ValueError, IndexError) as exc:
            raise ValueError(f"tile table line {ln}: {exc}") from None
        bases[b] = (edges, corners)
    if sorted(bases) != list(range(1, 7)):
        raise ValueError("tile table must define bases 1..6")
    return bases


@lru_cache(maxsize=1)
def base_table() -> dict[int, tuple]:
    text = resources.files("aptile.data").joinpath("robinson_tiles.txt").read_text()
    return parse_table(text)


def make_tile(base: int, rot: int = 0, reflected: bool = False) -> RobTile:
    edges, corners = base_table()[base]
    if reflected:
        edges, corners = _refl_edges(edges), _refl_corners(corners)
    for _ in range(rot % 4):
        edges, corners = _rot_edges(edges), _rot_corners(corners)
    return RobTile(base, rot % 4, bool(reflected), edges, corners)


def transform_tile(t: RobTile, rot: int, reflected: bool) -> RobTile:
    """Apply (reflect, then rotate) to an already placed tile."""
    # reflecting a rotated tile: refl . rot^r = rot^-r . refl
    if reflected:
        r0, f0 = (-t.rot) % 4, not t.reflected
    else:
        r0, f0 = t.rot, t.reflected
    return make_tile(t.base, (r0 + rot) % 4, f0)


@lru_cache(maxsize=1)
def all_tiles() -> tuple[RobTile, ...]:
    """The distinct decorated tiles: the dihedral orbit of the bases, deduplicated."""
    seen = {}
    for b in range(1, 7):
        for f in (False, True):
            for r in range(4):
                t = make_tile(b, r, f)
                seen.setdefault(t.signature, t)
    return tuple(seen.values())


def orbit_sizes() -> dict[int, int]:
    sizes = {}
    for b in range(1, 7):
        sizes[b] = len({make_tile(b, r, f).signature for f in (False, True) for r in range(4)})
    return sizes


def edges_match(a_side: Side, b_side: Side) -> bool:
    """Facing sides: same crossings, opposite orientations."""
    if len(a_side) != len(b_side):
        return False
    flipped = tuple(sorted((l, c, "in" if o == "out" else "out") for l, c, o in b_side))
    return a_side == flipped


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------


@dataclass
class RobGrid:
    """Row-major grid; row 0 is the top row and N faces row - 1."""

    width: int
    height: int
    cells: list = None

    def __post_init__(self):
        if self.width < 0 or self.height < 0:
            raise ValueError("grid dimensions must be non-negative")
        if self.cells is None:
            self.cells = [[None] * self.width for _ in range(self.height)]
        if len(self.cells) != self.height or any(len(r) != self.width for r in self.cells):
            raise ValueError("cells do not match the grid dimensions")

    def __getitem__(self, rc):
        r, c = rc
        return self.cells[r][c]

    def __setitem__(self, rc, tile):
        r, c = rc
        self.cells[r][c] = tile

    def complete(self) -> bool:
        return all(t is not None for row in self.cells for t in row)

    def to_json(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "cells": [[None if t is None else [t.base, t.rot, t.reflected] for t in row]
                      for row in self.cells],
        }

    @classmethod
    def from_json(cls, d: dict) -> "RobGrid":
        cells = [[None if v is None else make_tile(int(v[0]), int(v[1]), bool(v[2])) for v in row]
                 for row in d["cells"]]
        return cls(int(d["width"]), int(d["height"]), cells)

    def __eq__(self, other):
        if not isinstance(other, RobGrid):
            return NotImplemented
        sig = lambda g: [[None if t is None else t.signature for t in row] for row in g.cells]
        return (self.width, self.height) == (other.width, other.height) and sig(self) == sig(other)

    def transformed(self, rot: int, reflected: bool) -> "RobGrid":
        """Apply a square symmetry to the whole grid, moving and relabelling tiles."""
        g = self
        if reflected:
            cells = [[None if t is None else transform_tile(t, 0, True) for t in reversed(row)]
                     for row in g.cells]
            g = RobGrid(g.width, g.height, cells)
        for _ in range(rot % 4):
            # counter-clockwise quarter turn: new[r][c] = old[c][W-1-r]
            h, w = g.height, g.width
            cells = [[None] * h for _ in range(w)]
            for r in range(h):
                for c in range(w):
                    t = g.cells[r][c]
                    cells[w - 1 - c][r] = None if t is None else transform_tile(t, 1, False)
            g = RobGrid(h, w, cells)
        return g


@dataclass(frozen=True)
class RobViolation:
    kind: str  # "edge" or "corner"
    where: tuple


@dataclass(frozen=True)
class RobReport:
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_grid(g: RobGrid) -> RobReport:
    """Edge and corner check on every assigned adjacency."""
    bad = []
    for r in range(g.height):
        for c in range(g.width):
            t = g.cells[r][c]
            if t is None:
                continue
            if c + 1 < g.width and g.cells[r][c + 1] is not None:
                if not edges_match(t.edges[1], g.cells[r][c + 1].edges[3]):
                    bad.append(RobViolation("edge", ((r, c), (r, c + 1))))
            if r + 1 < g.height and g.cells[r + 1][c] is not None:
                if not edges_match(t.edges[2], g.cells[r + 1][c].edges[0]):
                    bad.append(RobViolation("edge", ((r, c), (r + 1, c))))
    # interior grid point between rows r, r+1 and columns c, c+1
    for r in range(g.height - 1):
        for c in range(g.width - 1):
            quad = (g.cells[r][c], g.cells[r][c + 1], g.cells[r + 1][c], g.cells[r + 1][c + 1])
            if any(t is None for t in quad):
                continue
            # the corner of each tile that touches the point: SE, SW, NE, NW
            bits = (quad[0].corner_colour[3], quad[1].corner_colour[2],
                    quad[2].corner_colour[0], quad[3].corner_colour[1])
            if sum(bits) != 3:
                bad.append(RobViolation("corner", (r + 1, c + 1)))
    return RobReport(tuple(bad))


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------


@lru_cache(maxsize=1)
def _compat():
    tiles = all_tiles()
    n = len(tiles)
    east = [0] * n   # tiles allowed to the east of t
    south = [0] * n  # tiles allowed below t
    for i, a in enumerate(tiles):
        for j, b in enumerate(tiles):
            if edges_match(a.edges[1], b.edges[3]):
                east[i] |= 1 << j
            if edges_match(a.edges[2], b.edges[0]):
                south[i] |= 1 << j
    west = [0] * n
    north = [0] * n
    for i in range(n):
        for j in range(n):
            if east[i] >> j & 1:
                west[j] |= 1 << i
            if south[i] >> j & 1:
                north[j] |= 1 << i
    # corner bit of each tile at each of its corners NE NW SW SE
    corner_masks = [sum(1 << i for i, t in enumerate(tiles) if t.corner_colour[k]) for k in range(4)]
    return tiles, east, west, south, north, corner_masks


@dataclass(frozen=True)
class SearchResult:
    grid: RobGrid | None
    nodes: int
    exhausted: bool  # True when the search space was fully explored without success

    @property
    def found(self) -> bool:
        return self.grid is not None


def search_grid(width: int, height: int, order_seed: int = 0, preset: RobGrid | None = None,
                max_nodes: int | None = None) -> SearchResult:
    """Backtracking with forward checking and most-constrained-cell selection.

    ``preset`` pins the assigned cells of a partial grid.  Values are tried
    in an order shuffled once by ``order_seed``.
    """
    if not (0 <= width <= 16 and 0 <= height <= 16):
        raise ValueError("width and height must lie in 0..16")
    tiles, east, west, south, north, cmask = _compat()
    n = len(tiles)
    full = (1 << n) - 1
    order = list(range(n))
    random.Random(order_seed).shuffle(order)
    index = {t.signature: i for i, t in enumerate(tiles)}

    dom = [full] * (width * height)
    if preset is not None:
        if (preset.width, preset.height) != (width, height):
            raise ValueError("preset grid has the wrong dimensions")
        for r in range(height):
            for c in range(width):
                t = preset.cells[r][c]
                if t is not None:
                    dom[r * width + c] = 1 << index[t.signature]

    def nbrs(k):
        r, c = divmod(k, width)
        if c + 1 < width:
            yield k + 1, east
        if c > 0:
            yield k - 1, west
        if r + 1 < height:
            yield k + width, south
        if r > 0:
            yield k - width, north

    def corners_of(k):
        # interior grid points touching cell k, as lists of (cell, corner index)
        r, c = divmod(k, width)
        for dr in (0, 1):
            for dc in (0, 1):
                pr, pc = r + dr, c + dc
                if 0 < pr < height and 0 < pc < width:
                    yield ((pr - 1) * width + pc - 1, 3), ((pr - 1) * width + pc, 2), \
                          (pr * width + pc - 1, 0), (pr * width + pc, 1)

    def support(d, table):
        m = 0
        while d:
            low = d & -d
            m |= table[low.bit_length() - 1]
            d ^= low
        return m

    def propagate(dom, queue):
        """Arc consistency on edges plus the corner counting rule."""
        while queue:
            k = queue.pop()
            for j, table in nbrs(k):
                nd = dom[j] & support(dom[k], table)
                if nd != dom[j]:
                    if not nd:
                        return False
                    dom[j] = nd
                    queue.append(j)
            for quad in corners_of(k):
                need = 3
                free = []
                for cell, ci in quad:
                    d = dom[cell]
                    y = d & cmask[ci]
                    if d == y:
                        need -= 1
                    elif y:
                        free.append((cell, ci))
                if need < 0 or need > len(free):
                    return False
                if free and (need == 0 or need == len(free)):
                    for cell, ci in free:
                        nd = dom[cell] & (cmask[ci] if need else ~cmask[ci])
                        if not nd:
                            return False
                        dom[cell] = nd
                        queue.append(cell)
        return True

    nodes = 0
    if not propagate(dom, list(range(width * height))):
        return SearchResult(None, 0, True)

    def solve(dom):
        nonlocal nodes
        best, best_n = -1, n + 1
        for k, d in enumerate(dom):
            if d & (d - 1):
                cnt = d.bit_count()
                if cnt < best_n:
                    best, best_n = k, cnt
        if best < 0:
            return dom
        for v in order:
            if not dom[best] >> v & 1:
                continue
            nodes += 1
            if max_nodes is not None and nodes > max_nodes:
                raise _Budget
            nd = dom.copy()
            nd[best] = 1 << v
            if propagate(nd, [best]):
                res = solve(nd)
                if res is not None:
                    return res
        return None

    try:
        res = solve(dom)
    except _Budget:
        return SearchResult(None, nodes, False)
    if res is None:
        return SearchResult(None, nodes, True)
    g = RobGrid(width, height)
    for k, d in enumerate(res):
        r, c = divmod(k, width)
        g.cells[r][c] = tiles[d.bit_length() - 1]
    return SearchResult(g, nodes, False)


class _Budget(Exception):
    pass


# ---------------------------------------------------------------------------
# square detection
# ---------------------------------------------------------------------------

_LANE_POS = {"lo": 1, "mid": 2, "hi": 3}  # quarter-tile offsets


@dataclass(frozen=True)
class Square:
    """A closed red circuit; ``side`` counts the tiles strictly between corner tiles."""

    row0: int
    col0: int
    row1: int
    col1: int

    @property
    def side(self) -> int:
        return self.col1 - self.col0 - 1


class HierarchyError(ValueError):
    pass


def _red_segments(g: RobGrid):
    """Red line pieces as pairs of points in quarter-tile units (x east, y south)."""
    segs = []
    for r in range(g.height):
        for c in range(g.width):
            t = g.cells[r][c]
            if t is None:
                continue
            red = {s: {lane for lane, col, _ in side if col == "r"} for s, side in zip(SIDES, t.edges)}
            x0, y0 = 4 * c, 4 * r

            def point(s, lane):
                p = _LANE_POS[lane]
                # N/S lanes run west to east; E/W lanes run south to north
                if s == "N":
                    return (x0 + p, y0)
                if s == "S":
                    return (x0 + p, y0 + 4)
                if s == "E":
                    return (x0 + 4, y0 + 4 - p)
                return (x0, y0 + 4 - p)

            used = set()
            for a, b in (("N", "S"), ("E", "W")):
                for lane in red[a] & red[b]:
                    segs.append((point(a, lane), point(b, lane)))
                    used |= {(a, lane), (b, lane)}
            loose = [(s, lane) for s in SIDES for lane in red[s] if (s, lane) not in used]
            if len(loose) == 2:
                (sa, la), (sb, lb) = loose
                pa, pb = point(sa, la), point(sb, lb)
                # bend where the two straight continuations meet
                if sa in ("N", "S"):
                    bend = (pa[0], pb[1])
                else:
                    bend = (pb[0], pa[1])
                segs.append((pa, bend))
                segs.append((bend, pb))
            elif loose:
                raise HierarchyError(f"tile at {(r, c)} has unpaired red crossings")
    return segs


def detect_hierarchy(g: RobGrid) -> list[Square]:
    """Closed axis-aligned red square circuits of a complete legal grid."""
    if not g.complete():
        raise HierarchyError("grid is incomplete")
    if not verify_grid(g).ok:
        raise HierarchyError("grid is not legal")
    adj: dict = {}
    for a, b in _red_segments(g):
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    seen = set()
    out = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp, stack = [], [start]
        seen.add(start)
        while stack:
            p = stack.pop()
            comp.append(p)
            for q in adj[p]:
                if q not in seen:
                    seen.add(q)
                    stack.append(q)
        if any(len(adj[p]) != 2 for p in comp):
            continue  # open path: leaves the grid
        xs = [p[0] for p in comp]
        ys = [p[1] for p in comp]
        x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
        on_box = all((p[0] in (x0, x1)) or (p[1] in (y0, y1)) for p in comp)
        if not on_box or x1 - x0 != y1 - y0:
            continue
        out.append(Square(y0 // 4, x0 // 4, y1 // 4, x1 // 4))
    out.sort(key=lambda s: (s.side, s.row0, s.col0))
    return out


def grid_to_text(g: RobGrid) -> str:
    return json.dumps(g.to_json(), separators=(",", ":"))
