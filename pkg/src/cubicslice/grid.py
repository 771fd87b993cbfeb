"""Rectangular sample grids over the c-plane (or the v-plane).

Samples sit at pixel centres: a grid of ``resolution`` pixels per side over
the square of half-width ``h`` around ``center`` has step 2h/resolution and
its first sample at center - h + step/2 (in both coordinates). Row 0 is the
bottom row (smallest imaginary part); rasters flip it when written.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

C_PLANE = "c"
V_PLANE = "v"


@dataclass(frozen=True)
class GridSpec:
    center: complex
    half_width: float
    resolution: int
    coordinate: str = C_PLANE

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "half_width", float(self.half_width))
        object.__setattr__(self, "resolution", int(self.resolution))
        if self.resolution < 16:
            raise ValueError("resolution must be at least 16")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        if self.coordinate not in (C_PLANE, V_PLANE):
            raise ValueError(f"coordinate must be {C_PLANE!r} or {V_PLANE!r}")

    @property
    def step(self) -> float:
        return 2 * self.half_width / self.resolution

    @property
    def origin(self) -> complex:
        """Coordinate of sample [0, 0] (bottom-left pixel centre)."""
        s = self.step / 2 - self.half_width
        return self.center + complex(s, s)

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        k = np.arange(self.resolution)
        o = self.origin
        return o.real + k * self.step, o.imag + k * self.step

    def points(self) -> np.ndarray:
        """Complex sample coordinates, shape (resolution, resolution), row 0 at the bottom."""
        xs, ys = self.axes()
        return xs[None, :] + 1j * ys[:, None]

    def field(self, values, mask=None) -> "GridField":
        values = np.asarray(values, dtype=float)
        if values.shape != (self.resolution, self.resolution):
            raise ValueError("values do not match the grid shape")
        if mask is None:
            mask = np.isfinite(values)
        return GridField(origin=self.origin, step=self.step, values=values, mask=np.asarray(mask, dtype=bool))


@dataclass(frozen=True)
class GridField:
    """Real samples values[i, j] at origin + step * (j + i 1j); ``mask`` is True where valid."""

    origin: complex
    step: float
    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.values.ndim != 2 or self.values.shape != self.mask.shape:
            raise ValueError("values and mask must be 2-D arrays of the same shape")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def points(self) -> np.ndarray:
        ny, nx = self.shape
        return (self.origin.real + self.step * np.arange(nx))[None, :] + 1j * (
            self.origin.imag + self.step * np.arange(ny)
        )[:, None]

    @property
    def center(self) -> complex:
        ny, nx = self.shape
        return self.origin + self.step * complex((nx - 1) / 2, (ny - 1) / 2)

    def with_mask(self, mask) -> "GridField":
        return GridField(self.origin, self.step, self.values, self.mask & np.asarray(mask, dtype=bool))

    def map(self, fn) -> "GridField":
        with np.errstate(invalid="ignore", over="ignore"):
            return GridField(self.origin, self.step, fn(self.values), self.mask.copy())
