"""Grid sweeps over a slice: bifurcation loci, level lines, the v-plane picture and the height field.

Palette v1 (RGBA):

=====================  ==================  ==========================================
name                   colour              meaning
=====================  ==================  ==========================================
background             (255, 255, 255)     both critical orbits tend to 0
one_escaped            (238, 238, 238)     exactly one critical orbit escapes
both_escaped           (190, 190, 190)     both escape (does not occur for |lam| < 1)
undecided              (255, 170, 0)       iteration cap reached
locus_outer            (150, 0, 0)         bifurcation locus of the critical point c
locus_inner            (0, 0, 150)         bifurcation locus of the critical point 1
level_line             (110, 110, 110)     equipotential of log|phi(c)| - log|phi(1)|
=====================  ==================  ==========================================

The critical point c escapes for large |c| and the critical point 1 escapes
for small |c|, so in the c-plane the locus of c is the outer one. It is drawn
red and the locus of 1 (its image under c -> 1/c) blue. In the v-plane the
critical points are unmarked and every locus pixel is red.
"""

from __future__ import annotations

import cmath
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np
from numba import njit, prange
from PIL import Image

from .attracting import (
    ATTRACTED,
    ESCAPED,
    MAIN_NONE,
    UNDECIDED,
    _escape_radius,
    _linear_zone,
    _main_dynamic,
    _orbit_status,
    _phi_kernel,
)
from .grid import C_PLANE, V_PLANE, GridField, GridSpec

PALETTE_VERSION = 1
PALETTE = {
    "background": (255, 255, 255, 255),
    "one_escaped": (238, 238, 238, 255),
    "both_escaped": (190, 190, 190, 255),
    "undecided": (255, 170, 0, 255),
    "locus_outer": (150, 0, 0, 255),
    "locus_inner": (0, 0, 150, 255),
    "level_line": (110, 110, 110, 255),
}

CLASSIFY = "classify"
EQUIPOTENTIAL = "equipotential"
BOTH = "both"
MODES = (CLASSIFY, EQUIPOTENTIAL, BOTH)

LEVEL_WIDTH = 0.02
RENDER_MAX_ITER = 5000

SIDECAR_MAGIC = b"SLCF"
SIDECAR_VERSION = 1
_HEADER = struct.Struct("<4sIIIddd")


@dataclass(frozen=True)
class SliceImage:
    """RGBA raster (row 0 at the top) with its palette and an optional raw field."""

    pixels: np.ndarray
    legend: dict
    grid: GridSpec
    raw: GridField | None = None
    status_one: np.ndarray | None = None
    status_c: np.ndarray | None = None

    def save_png(self, path) -> None:
        Image.fromarray(self.pixels, mode="RGBA").save(path)


# ---------------------------------------------------------------- kernels


@njit(cache=True, inline="always")
def _c_of_v(v):
    s = cmath.sqrt(v * v - 1)
    c = v + s
    if abs(c) < 1:
        c = 1 / c
    return c


@njit(cache=True, parallel=True)
def _classify_kernel(lam, xs, ys, v_plane, max_iter, want_level):
    ny = ys.shape[0]
    nx = xs.shape[0]
    s1 = np.full((ny, nx), UNDECIDED, dtype=np.int8)
    sc = np.full((ny, nx), UNDECIDED, dtype=np.int8)
    level = np.full((ny, nx), np.nan)
    loglam = math.log(abs(lam))
    for i in prange(ny):
        for j in range(nx):
            c = complex(xs[j], ys[i])
            if v_plane:
                c = _c_of_v(c)
            if c == 0:
                continue
            u = 1 / c
            R = _escape_radius(lam, c)
            eps0 = _linear_zone(lam, u)
            if want_level:
                a, f1, _d1, _n1 = _phi_kernel(lam, u, 1 + 0j, R, eps0, max_iter)
                b, fc, _dc, _nc = _phi_kernel(lam, u, c, R, eps0, max_iter)
                if a == ATTRACTED and b == ATTRACTED and f1 != 0 and fc != 0:
                    level[i, j] = (math.log(abs(fc)) - math.log(abs(f1))) / loglam
            else:
                a = _orbit_status(lam, u, 1 + 0j, R, eps0, max_iter)[0]
                b = _orbit_status(lam, u, c, R, eps0, max_iter)[0]
            s1[i, j] = a
            sc[i, j] = b
    return s1, sc, level


@njit(cache=True, parallel=True)
def _height_kernel(lam, xs, ys, max_iter):
    ny = ys.shape[0]
    nx = xs.shape[0]
    out = np.full((ny, nx), np.nan)
    for i in prange(ny):
        for j in range(nx):
            c = complex(xs[j], ys[i])
            if c == 0:
                continue
            res = _main_dynamic(lam, c, max_iter)
            if res[0] != MAIN_NONE:
                out[i, j] = math.log(res[1]) - math.log(abs(c))
    return out


def _locus(status: np.ndarray) -> np.ndarray:
    """Pixels whose 3x3 neighbourhood contains a different status."""
    padded = np.pad(status, 1, mode="edge")
    ny, nx = status.shape
    out = np.zeros(status.shape, dtype=bool)
    for di in (0, 1, 2):
        for dj in (0, 1, 2):
            out |= padded[di : di + ny, dj : dj + nx] != status
    return out


def _set_threads(threads: int | None) -> None:
    if threads is not None:
        numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))


def _check_lambda(lam: complex, strict: bool = False) -> complex:
    lam = complex(lam)
    if not 0 < abs(lam) <= 1 or (strict and abs(lam) == 1):
        raise ValueError("the slice needs 0 < |lam| < 1" if strict else "the slice needs 0 < |lam| <= 1")
    return lam


def _paint(shape, s1, sc, level, loci, mode):
    """Assemble an RGBA image (row 0 at the bottom) from status arrays and locus masks."""
    img = np.empty(shape + (4,), dtype=np.uint8)
    img[:] = PALETTE["background"]
    escaped = (s1 == ESCAPED).astype(int) + (sc == ESCAPED).astype(int)
    img[escaped == 1] = PALETTE["one_escaped"]
    img[escaped == 2] = PALETTE["both_escaped"]
    if mode in (EQUIPOTENTIAL, BOTH) and level is not None:
        frac = np.abs(level - np.round(level))
        with np.errstate(invalid="ignore"):
            img[np.isfinite(level) & (frac < LEVEL_WIDTH)] = PALETTE["level_line"]
    img[(s1 == UNDECIDED) | (sc == UNDECIDED)] = PALETTE["undecided"]
    if mode in (CLASSIFY, BOTH):
        for mask, colour in loci:
            img[mask] = PALETTE[colour]
    return img


def _supersample(img_fn, g: GridSpec, ss: int) -> np.ndarray:
    """Render at ss times the resolution and average ss x ss blocks of RGBA values."""
    fine = GridSpec(g.center, g.half_width, g.resolution * ss, g.coordinate)
    big = img_fn(fine).astype(np.uint32)
    n = g.resolution
    blocks = big.reshape(n, ss, n, ss, 4).sum(axis=(1, 3))
    half = (ss * ss) // 2
    return ((blocks + half) // (ss * ss)).astype(np.uint8)


def _sweep(lam, g: GridSpec, max_iter, want_level):
    xs, ys = g.axes()
    return _classify_kernel(lam, xs, ys, g.coordinate == V_PLANE, int(max_iter), bool(want_level))


def render_slice(
    lam: complex,
    g: GridSpec,
    mode: str = CLASSIFY,
    max_iter: int = RENDER_MAX_ITER,
    ss: int = 1,
    threads: int | None = None,
) -> SliceImage:
    """Classify both critical orbits on the c-plane grid and draw the bifurcation loci.

    The raw field stores the status code 3 * status(1) + status(c) per pixel
    (status 0 attracted, 1 escaped, 2 undecided).
    """
    lam = _check_lambda(lam)
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if g.coordinate != C_PLANE:
        raise ValueError("render_slice expects a c-plane grid; use vslice for the v-plane")
    _set_threads(threads)
    want_level = mode != CLASSIFY

    def paint(spec):
        s1, sc, level = _sweep(lam, spec, max_iter, want_level)
        loci = [(_locus(sc), "locus_outer"), (_locus(s1), "locus_inner")]
        return _paint(s1.shape, s1, sc, level, loci, mode), s1, sc

    img, s1, sc = paint(g)
    if ss > 1:
        img = _supersample(lambda spec: paint(spec)[0], g, ss)
    raw = g.field(3.0 * s1 + sc, np.ones(s1.shape, dtype=bool))
    return SliceImage(
        pixels=np.ascontiguousarray(img[::-1]),
        legend=dict(PALETTE),
        grid=g,
        raw=raw,
        status_one=s1,
        status_c=sc,
    )


def vslice(
    lam: complex,
    g: GridSpec,
    max_iter: int = RENDER_MAX_ITER,
    ss: int = 1,
    threads: int | None = None,
) -> SliceImage:
    """The slice drawn in v = (c + 1/c)/2, with every locus pixel red.

    Each pixel v is mapped back to the root c with |c| >= 1 (c = +-1 at the
    branch points v = +-1). The unmarked status of a pixel is the unordered
    pair of the two critical statuses.
    """
    lam = _check_lambda(lam)
    if g.coordinate != V_PLANE:
        g = GridSpec(g.center, g.half_width, g.resolution, V_PLANE)
    _set_threads(threads)

    def paint(spec):
        s1, sc, _ = _sweep(lam, spec, max_iter, False)
        lo = np.minimum(s1, sc)
        hi = np.maximum(s1, sc)
        unmarked = 3 * lo + hi
        return _paint(s1.shape, lo, hi, None, [(_locus(unmarked), "locus_outer")], CLASSIFY), s1, sc

    img, s1, sc = paint(g)
    if ss > 1:
        img = _supersample(lambda spec: paint(spec)[0], g, ss)
    lo = np.minimum(s1, sc)
    hi = np.maximum(s1, sc)
    raw = g.field(3.0 * lo + hi, np.ones(s1.shape, dtype=bool))
    return SliceImage(
        pixels=np.ascontiguousarray(img[::-1]),
        legend=dict(PALETTE),
        grid=g,
        raw=raw,
        status_one=s1,
        status_c=sc,
    )


def heightfield(
    lam: complex,
    g: GridSpec,
    max_iter: int = 100_000,
    threads: int | None = None,
) -> tuple[GridField, np.ndarray]:
    """log r(P_{lam,c}) - log|c| on the grid and an 8-bit grayscale RGBA raster of it.

    The radius comes from the dynamic main-critical-point route. Pixels where
    neither critical orbit could be followed to 0 are masked (transparent in
    the raster).
    """
    lam = _check_lambda(lam, strict=True)
    if g.coordinate != C_PLANE:
        raise ValueError("heightfield expects a c-plane grid")
    _set_threads(threads)
    xs, ys = g.axes()
    values = _height_kernel(lam, xs, ys, int(max_iter))
    f = g.field(values)
    return f, grayscale(f)


def grayscale(f: GridField) -> np.ndarray:
    """Map the valid range of the field linearly onto 0..255; masked pixels are transparent."""
    v = f.values
    ok = f.mask & np.isfinite(v)
    img = np.zeros(v.shape + (4,), dtype=np.uint8)
    if ok.any():
        lo = float(np.min(v[ok]))
        hi = float(np.max(v[ok]))
        span = hi - lo if hi > lo else 1.0
        level = np.zeros(v.shape)
        level[ok] = np.rint(255 * (v[ok] - lo) / span)
        img[..., 0] = img[..., 1] = img[..., 2] = level.astype(np.uint8)
        img[..., 3] = np.where(ok, 255, 0)
    return np.ascontiguousarray(img[::-1])


def level_values(lam: complex, g: GridSpec, max_iter: int = RENDER_MAX_ITER) -> np.ndarray:
    """(log|phi(c)| - log|phi(1)|) / log|lam| per pixel (NaN unless both orbits tend to 0)."""
    return _sweep(_check_lambda(lam, strict=True), g, max_iter, True)[2]


# ---------------------------------------------------------------- files


def pixel_of(g: GridSpec, c: complex) -> tuple[int, int] | None:
    """(row, column) in raster order (row 0 at the top) of the pixel containing c."""
    o = g.center - complex(g.half_width, g.half_width)
    j = math.floor((c.real - o.real) / g.step)
    i = math.floor((c.imag - o.imag) / g.step)
    n = g.resolution
    if 0 <= i < n and 0 <= j < n:
        return n - 1 - i, j
    return None


def write_sidecar(path, g: GridSpec, values: np.ndarray) -> None:
    """Raw float64 field: header then width x height values, rows from the top of the image."""
    values = np.asarray(values, dtype="<f8")
    h, w = values.shape
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(SIDECAR_MAGIC, SIDECAR_VERSION, w, h, g.center.real, g.center.imag, g.half_width)
        )
        fh.write(np.ascontiguousarray(values[::-1]).tobytes())


def read_sidecar(path):
    """Return (header dict, values) with values in grid order (row 0 at the bottom)."""
    data = Path(path).read_bytes()
    magic, version, w, h, cre, cim, hw = _HEADER.unpack_from(data)
    if magic != SIDECAR_MAGIC:
        raise ValueError("not a slice sidecar")
    values = np.frombuffer(data, dtype="<f8", offset=_HEADER.size, count=w * h).reshape(h, w)[::-1]
    return {"version": version, "width": w, "height": h, "center": complex(cre, cim), "half_width": hw}, values
