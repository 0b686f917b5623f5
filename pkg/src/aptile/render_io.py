"""JSON exchange format ``aptile-v1`` and deterministic SVG rendering.

Every geometric quantity is stored as integer module coefficients.  Float
positions are recomputed on load and only ever used for drawing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .cutproject import OctaPoints
from .diffraction import Peak1D, Peak2D, PeakList2D, dual_basis, peak_1d
from .exact import OctaCoord, QuadInt
from .random_tiling import RTiling, _Torus
from .robinson import SIDES, RobGrid, _red_segments, make_tile
from .substitution import AB, SYSTEMS, Patch, Tile1D, _edge_records, _vertex_floats

FORMAT = "aptile-v1"
KINDS = ("patch", "rtiling", "points", "peaks", "robgrid")


class ParseError(ValueError):
    """Malformed or unsupported input; ``offset`` is a byte offset, ``path`` a JSON path."""

    def __init__(self, message: str, offset: int | None = None, path: str | None = None):
        self.message, self.offset, self.path = message, offset, path
        where = []
        if offset is not None:
            where.append(f"byte {offset}")
        if path is not None:
            where.append(path)
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


def content_kind(x: Any) -> str:
    if isinstance(x, Patch):
        return "patch"
    if isinstance(x, RTiling):
        return "rtiling"
    if isinstance(x, RobGrid):
        return "robgrid"
    if isinstance(x, OctaPoints):
        return "points"
    if isinstance(x, PeakList2D):
        return "peaks"
    if isinstance(x, list) and x:
        head = x[0]
        if isinstance(head, Tile1D):
            return "patch"
        if isinstance(head, tuple) and len(head) == 2 and isinstance(head[0], QuadInt):
            return "points"
        if isinstance(head, Peak1D):
            return "peaks"
    raise TypeError(f"unsupported content of type {type(x).__name__}")


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def _ints(row) -> list[int]:
    return [int(c) for c in row]


def _export_data(x: Any, kind: str) -> dict:
    if kind == "patch":
        if isinstance(x, list):
            return {"system": "silver1d", "tiles": [[t.kind, t.left.a, t.left.b] for t in x]}
        nv = [len(x.spec.verts[int(k)]) for k in x.kind]
        return {
            "system": x.system,
            "decorated": bool(x.decorated),
            "pivot_half": _ints(x.pivot_half),
            "tiles": [[int(k), int(r), _ints(a)] for k, r, a in zip(x.kind, x.rot, x.anchor)],
            "marks": [_ints(m[:n]) for m, n in zip(x.marks, nv)],
            "arrow_flip": [[int(f) for f in row] for row in x.arrow_flip],
        }
    if kind == "rtiling":
        d: dict = {"faces": [[_ints(c), d1, d2] for c, d1, d2 in sorted(x.faces)], "period": None}
        if x.period is not None:
            w = x.wrap
            d["period"] = [_ints(x.period[0]), _ints(x.period[1])]
            d["frame"] = [_ints(w.xmin_vertex), _ints(w.ymin_vertex)]
        return d
    if kind == "points":
        if isinstance(x, OctaPoints):
            return {"system": AB, "points": [_ints(p.coeffs) for p in x.points],
                    "singular": [_ints(p.coeffs) for p in x.singular]}
        return {"system": "silver1d", "points": [[p.a, p.b, c] for p, c in x]}
    if kind == "peaks":
        if isinstance(x, PeakList2D):
            return {"system": AB, "scan_bound": x.scan_bound, "bound_limited": x.bound_limited,
                    "peaks": [[_ints(p.m), p.intensity] for p in x.peaks]}
        return {"system": "silver1d", "peaks": [[p.m, p.n, p.intensity] for p in x]}
    if kind == "robgrid":
        return x.to_json()
    raise TypeError(kind)


def export(x: Any) -> bytes:
    """Serialise to canonical JSON bytes (sorted keys, no whitespace, trailing newline)."""
    kind = content_kind(x)
    doc = {"format": FORMAT, "kind": kind, "data": _export_data(x, kind)}
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode()


# ---------------------------------------------------------------------------
# import
# ---------------------------------------------------------------------------


class _Reader:
    """Typed accessors that report the JSON path of any schema violation."""

    def __init__(self, path: str = "$"):
        self.path = path

    def fail(self, msg: str, path: str):
        raise ParseError(msg, path=path)

    def obj(self, v, path, keys):
        if not isinstance(v, dict):
            self.fail("expected an object", path)
        for k in keys:
            if k not in v:
                self.fail(f"missing key {k!r}", path)
        return v

    def lst(self, v, path, n=None):
        if not isinstance(v, list):
            self.fail("expected an array", path)
        if n is not None and len(v) != n:
            self.fail(f"expected {n} entries", path)
        return v

    def int_(self, v, path):
        if isinstance(v, float):
            self.fail("float where an exact integer is required", path)
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail("expected an integer", path)
        return v

    def ints(self, v, path, n=None):
        return tuple(self.int_(c, f"{path}[{i}]") for i, c in enumerate(self.lst(v, path, n)))

    def num(self, v, path):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail("expected a number", path)
        return float(v)

    def bool_(self, v, path):
        if not isinstance(v, bool):
            self.fail("expected a boolean", path)
        return v

    def str_(self, v, path, allowed=None):
        if not isinstance(v, str) or (allowed is not None and v not in allowed):
            self.fail(f"expected one of {allowed}" if allowed else "expected a string", path)
        return v


def _import_data(kind: str, d: Any):
    R = _Reader()
    p = "$.data"
    if kind == "patch":
        d = R.obj(d, p, ("system", "tiles"))
        system = R.str_(d["system"], f"{p}.system", ("silver1d", *SYSTEMS))
        tiles = R.lst(d["tiles"], f"{p}.tiles")
        if system == "silver1d":
            out = []
            for i, t in enumerate(tiles):
                q = f"{p}.tiles[{i}]"
                R.lst(t, q, 3)
                out.append(Tile1D(R.str_(t[0], f"{q}[0]", ("B", "R")),
                                  QuadInt(R.int_(t[1], f"{q}[1]"), R.int_(t[2], f"{q}[2]"))))
            return out
        R.obj(d, p, ("decorated", "pivot_half", "marks", "arrow_flip"))
        s = SYSTEMS[system]
        kinds, rots, anchors = [], [], []
        for i, t in enumerate(tiles):
            q = f"{p}.tiles[{i}]"
            R.lst(t, q, 3)
            k = R.int_(t[0], f"{q}[0]")
            if not 0 <= k < len(s.kinds):
                R.fail("tile kind out of range", f"{q}[0]")
            r = R.int_(t[1], f"{q}[1]")
            if not 0 <= r < s.n_rot:
                R.fail("rotation out of range", f"{q}[1]")
            kinds.append(k)
            rots.append(r)
            anchors.append(R.ints(t[2], f"{q}[2]", 4))
        marks_in = R.lst(d["marks"], f"{p}.marks", len(tiles))
        vmax = max(len(v) for v in s.verts.values())
        marks = np.zeros((len(tiles), vmax), dtype=np.int8)
        for i, m in enumerate(marks_in):
            vals = R.ints(m, f"{p}.marks[{i}]", len(s.verts[kinds[i]]))
            marks[i, :len(vals)] = vals
        flips_in = R.lst(d["arrow_flip"], f"{p}.arrow_flip", len(tiles))
        flips = np.array([R.ints(f, f"{p}.arrow_flip[{i}]", 4) for i, f in enumerate(flips_in)],
                         dtype=bool).reshape(-1, 4)
        return Patch(system, np.array(kinds, np.int8), np.array(rots, np.int8),
                     np.array(anchors, np.int64).reshape(-1, 4), marks, flips,
                     R.bool_(d["decorated"], f"{p}.decorated"),
                     R.ints(d["pivot_half"], f"{p}.pivot_half", 4))
    if kind == "rtiling":
        d = R.obj(d, p, ("faces", "period"))
        faces = []
        for i, f in enumerate(R.lst(d["faces"], f"{p}.faces")):
            q = f"{p}.faces[{i}]"
            R.lst(f, q, 3)
            faces.append((R.ints(f[0], f"{q}[0]", 4), R.int_(f[1], f"{q}[1]"), R.int_(f[2], f"{q}[2]")))
        if d["period"] is None:
            return RTiling(frozenset(faces))
        per = R.lst(d["period"], f"{p}.period", 2)
        p1, p2 = (R.ints(v, f"{p}.period[{i}]", 4) for i, v in enumerate(per))
        R.obj(d, p, ("frame",))
        fr = R.lst(d["frame"], f"{p}.frame", 2)
        xv, yv = (R.ints(v, f"{p}.frame[{i}]", 4) for i, v in enumerate(fr))
        wrap = _Torus(xv, yv, p1, p2)
        return RTiling(frozenset(faces), (p1, p2), wrap)
    if kind == "points":
        d = R.obj(d, p, ("system", "points"))
        system = R.str_(d["system"], f"{p}.system", ("silver1d", AB))
        pts = R.lst(d["points"], f"{p}.points")
        if system == "silver1d":
            out = []
            for i, t in enumerate(pts):
                q = f"{p}.points[{i}]"
                R.lst(t, q, 3)
                out.append((QuadInt(R.int_(t[0], f"{q}[0]"), R.int_(t[1], f"{q}[1]")),
                            R.str_(t[2], f"{q}[2]", ("B", "R"))))
            return out
        R.obj(d, p, ("singular",))
        return OctaPoints(
            [OctaCoord.of(R.ints(v, f"{p}.points[{i}]", 4)) for i, v in enumerate(pts)],
            [OctaCoord.of(R.ints(v, f"{p}.singular[{i}]", 4))
             for i, v in enumerate(R.lst(d["singular"], f"{p}.singular"))],
        )
    if kind == "peaks":
        d = R.obj(d, p, ("system", "peaks"))
        system = R.str_(d["system"], f"{p}.system", ("silver1d", AB))
        items = R.lst(d["peaks"], f"{p}.peaks")
        if system == "silver1d":
            out = []
            for i, t in enumerate(items):
                q = f"{p}.peaks[{i}]"
                R.lst(t, q, 3)
                pk = peak_1d(R.int_(t[0], f"{q}[0]"), R.int_(t[1], f"{q}[1]"))
                out.append(Peak1D(pk.m, pk.n, pk.k_phys, pk.k_int, R.num(t[2], f"{q}[2]")))
            return out
        R.obj(d, p, ("scan_bound", "bound_limited"))
        B = dual_basis()
        out = []
        for i, t in enumerate(items):
            q = f"{p}.peaks[{i}]"
            R.lst(t, q, 2)
            m = R.ints(t[0], f"{q}[0]", 4)
            kk = np.array(m) @ B
            out.append(Peak2D(m, (float(kk[0]), float(kk[1])), (float(kk[2]), float(kk[3])),
                              R.num(t[1], f"{q}[1]")))
        return PeakList2D(out, R.int_(d["scan_bound"], f"{p}.scan_bound"),
                          R.bool_(d["bound_limited"], f"{p}.bound_limited"))
    if kind == "robgrid":
        d = R.obj(d, p, ("width", "height", "cells"))
        w, h = R.int_(d["width"], f"{p}.width"), R.int_(d["height"], f"{p}.height")
        rows = R.lst(d["cells"], f"{p}.cells", h)
        cells = []
        for r, row in enumerate(rows):
            out_row = []
            for c, v in enumerate(R.lst(row, f"{p}.cells[{r}]", w)):
                q = f"{p}.cells[{r}][{c}]"
                if v is None:
                    out_row.append(None)
                    continue
                R.lst(v, q, 3)
                b, rot = R.int_(v[0], f"{q}[0]"), R.int_(v[1], f"{q}[1]")
                if not (1 <= b <= 6 and 0 <= rot <= 3):
                    R.fail("tile index out of range", q)
                out_row.append(make_tile(b, rot, R.bool_(v[2], f"{q}[2]")))
            cells.append(out_row)
        return RobGrid(w, h, cells)
    raise ParseError(f"unknown content kind {kind!r}", path="$.kind")


def import_(raw: bytes | str):
    """Parse an ``aptile-v1`` document back into library objects."""
    if isinstance(raw, bytes):
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("invalid UTF-8", offset=exc.start) from None
    else:
        text = raw
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, offset=len(text[: exc.pos].encode("utf-8"))) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", path="$")
    if doc.get("format") != FORMAT:
        raise ParseError(f"unsupported format {doc.get('format')!r}, expected {FORMAT!r}", path="$.format")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ParseError(f"unknown content kind {kind!r}", path="$.kind")
    if "data" not in doc:
        raise ParseError("missing key 'data'", path="$")
    try:
        return _import_data(kind, doc["data"])
    except ParseError:
        raise
    except (ValueError, TypeError) as exc:
        raise ParseError(str(exc), path="$.data") from None


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

DEFAULT_PALETTE = {
    "tri_a": "#f2c14e", "tri_b": "#f2c14e", "rh": "#5b8bd0",
    "fat_l": "#d96c4f", "fat_r": "#d96c4f", "thin_l": "#6fb07f", "thin_r": "#6fb07f",
    "square": "#f2c14e", "rhombus": "#5b8bd0",
    "B": "#3b6fb6", "R": "#c8453a",
    "point": "#222222", "peak": "#222222", "arrow": "#111111", "mark": "#b02020",
    "cell": "#fff6cc", "cross": "#ffffff", "green": "#2e9a3e", "red": "#d02a2a",
    "stroke": "#333333",
}


@dataclass(frozen=True)
class DocumentSpec:
    """Drawing style.  Styles change appearance only, never geometry."""

    kind: str | None = None
    unit_px: float = 40.0
    stroke_width: float = 1.0
    palette: dict = field(default_factory=lambda: dict(DEFAULT_PALETTE))
    show_arrows: bool = False
    show_marks: bool = False
    show_lines: bool = False
    point_radius: float = 0.08
    peak_scale: float = 0.5  # disc radius (edge units) of an intensity-1 peak


def _f(x: float) -> str:
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


class _Svg:
    def __init__(self, spec: DocumentSpec):
        self.spec = spec
        self.items: list[str] = []
        self.xs: list[float] = []
        self.ys: list[float] = []

    def _pt(self, x: float, y: float) -> str:
        u = self.spec.unit_px
        self.xs.append(x * u)
        self.ys.append(-y * u)
        return f"{_f(x * u)},{_f(-y * u)}"

    def path(self, pts, fill: str, closed=True, stroke: str | None = None, width: float | None = None,
             cls: str = "") -> None:
        d = "M" + " L".join(self._pt(x, y) for x, y in pts) + (" Z" if closed else "")
        sw = self.spec.stroke_width if width is None else width
        self.items.append(
            f'<path class="{cls}" d="{d}" fill="{fill}" stroke="{stroke or self.spec.palette["stroke"]}" '
            f'stroke-width="{_f(sw)}"/>'
        )

    def circle(self, x: float, y: float, r: float, fill: str, cls: str = "") -> None:
        u = self.spec.unit_px
        self.xs += [(x - r) * u, (x + r) * u]
        self.ys += [-(y + r) * u, -(y - r) * u]
        self.items.append(
            f'<circle class="{cls}" cx="{_f(x * u)}" cy="{_f(-y * u)}" r="{_f(r * u)}" fill="{fill}"/>'
        )

    def document(self, kind: str) -> str:
        if self.xs:
            pad = 2 * self.spec.stroke_width
            x0, x1 = min(self.xs) - pad, max(self.xs) + pad
            y0, y1 = min(self.ys) - pad, max(self.ys) + pad
        else:
            x0 = y0 = 0.0
            x1 = y1 = 1.0
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'viewBox="{_f(x0)} {_f(y0)} {_f(x1 - x0)} {_f(y1 - y0)}">\n'
        )
        body = "".join(f"  {it}\n" for it in self.items)
        return head + f'<g class="{kind}">\n' + body + "</g>\n</svg>\n"


def _patch_svg(svg: _Svg, p: Patch) -> None:
    spec = svg.spec
    pal = spec.palette
    if len(p) == 0:
        return
    # stored coordinates are offset from true positions by pivot_half / 2
    off = _vertex_floats(p.system, np.array([p.pivot_half], dtype=np.int64))[0] / 2
    vc = p.vertex_coords()
    nv = p.n_vertices_of()
    flat = _vertex_floats(p.system, vc.reshape(-1, 4)).reshape(len(p), -1, 2) + off
    for i in range(len(p)):
        name = p.spec.kinds[int(p.kind[i])]
        svg.path([tuple(flat[i, j]) for j in range(int(nv[i]))], pal[name], cls=name)
    if spec.show_arrows and p.decorated:
        seen = set()
        for i, e, va, vb, et, head in _edge_records(p):
            if et.startswith("base"):
                continue
            key = (min(va, vb), max(va, vb))
            if key in seen:
                continue
            seen.add(key)
            a, b = p.spec.edges[int(p.kind[i])][e][:2]
            pa, pb = flat[i, a], flat[i, b]
            if head == va:
                pa, pb = pb, pa
            # a chevron at the edge midpoint pointing towards the head
            mx, my = (pa + pb) / 2
            dx, dy = (pb - pa) / np.hypot(*(pb - pa))
            s = 0.12
            tip = (mx + dx * s, my + dy * s)
            left = (mx - dx * s - dy * s, my - dy * s + dx * s)
            right = (mx - dx * s + dy * s, my - dy * s - dx * s)
            svg.path([left, tip, right], "none", closed=False, stroke=pal["arrow"],
                     width=spec.stroke_width, cls=f"arrow-{et}")
    if spec.show_marks and p.decorated and p.system == AB:
        for i in range(len(p)):
            for j in range(int(nv[i])):
                if p.marks[i, j]:
                    # a small wedge towards the tile centroid
                    c = flat[i, : int(nv[i])].mean(axis=0)
                    v = flat[i, j]
                    d = (c - v) / np.hypot(*(c - v)) * 0.18
                    svg.circle(float(v[0] + d[0]), float(v[1] + d[1]), 0.05, pal["mark"], cls="mark")


def _word_svg(svg: _Svg, word: list) -> None:
    for t in word:
        x0, x1 = float(t.left), float(t.right)
        svg.path([(x0, 0.0), (x1, 0.0), (x1, 0.15), (x0, 0.15)], svg.spec.palette[t.kind], cls=t.kind)


def _rtiling_svg(svg: _Svg, t: RTiling) -> None:
    from .random_tiling import face_corners, face_kind

    for f in sorted(t.faces):
        pts = [OctaCoord.of(v).phys_float() for v, *_ in face_corners(f)]
        k = face_kind(f)
        svg.path(pts, svg.spec.palette[k], cls=k)


def _points_svg(svg: _Svg, x) -> None:
    r = svg.spec.point_radius
    if isinstance(x, OctaPoints):
        for p in x.points:
            svg.circle(*p.phys_float(), r, svg.spec.palette["point"], cls="point")
        for p in x.singular:
            svg.circle(*p.phys_float(), r, svg.spec.palette["mark"], cls="singular")
    else:
        for q, c in x:
            svg.circle(float(q), 0.0, r, svg.spec.palette[c], cls=c)


def peak_radius(intensity: float, spec: DocumentSpec) -> float:
    """Disc area proportional to intensity."""
    return spec.peak_scale * math.sqrt(max(intensity, 0.0))


def _peaks_svg(svg: _Svg, x) -> None:
    items = x.peaks if isinstance(x, PeakList2D) else x
    for pk in items:
        kx, ky = pk.k_phys if isinstance(pk, Peak2D) else (pk.k_phys, 0.0)
        svg.circle(kx, ky, peak_radius(pk.intensity, svg.spec), svg.spec.palette["peak"], cls="peak")


def _robgrid_svg(svg: _Svg, g: RobGrid) -> None:
    pal = svg.spec.palette
    for r in range(g.height):
        for c in range(g.width):
            t = g.cells[r][c]
            x0, y0 = float(c), float(g.height - 1 - r)  # y-up: row 0 on top
            fill = "none" if t is None else (pal["cell"] if t.yellow else pal["cross"])
            svg.path([(x0, y0), (x0 + 1, y0), (x0 + 1, y0 + 1), (x0, y0 + 1)], fill, cls="cell")
            if t is None or not svg.spec.show_lines:
                continue
            for side, crossings in zip(SIDES, t.edges):
                for lane, colour, _ in crossings:
                    if colour != "g":
                        continue
                    a = {"N": (x0 + 0.5, y0 + 1), "S": (x0 + 0.5, y0),
                         "E": (x0 + 1, y0 + 0.5), "W": (x0, y0 + 0.5)}[side]
                    svg.path([a, (x0 + 0.5, y0 + 0.5)], "none", closed=False, stroke=pal["green"],
                             cls="line-g")
    if svg.spec.show_lines:
        # red pieces come in quarter-tile units with y pointing down
        for (ax, ay), (bx, by) in _red_segments(g):
            svg.path([(ax / 4, g.height - ay / 4), (bx / 4, g.height - by / 4)], "none", closed=False,
                     stroke=pal["red"], cls="line-r")


def to_svg(content: Any, spec: DocumentSpec | None = None) -> str:
    """Render to an SVG 1.1 document with y pointing up."""
    spec = spec or DocumentSpec()
    try:
        kind = content_kind(content)
    except TypeError:
        raise ValueError(f"cannot render content of type {type(content).__name__}") from None
    if spec.kind is not None and spec.kind != kind:
        raise ValueError(f"document spec expects {spec.kind!r}, got {kind!r}")
    svg = _Svg(spec)
    if kind == "patch":
        (_word_svg if isinstance(content, list) else _patch_svg)(svg, content)
    elif kind == "rtiling":
        _rtiling_svg(svg, content)
    elif kind == "points":
        _points_svg(svg, content)
    elif kind == "peaks":
        _peaks_svg(svg, content)
    else:
        _robgrid_svg(svg, content)
    return svg.document(kind)
