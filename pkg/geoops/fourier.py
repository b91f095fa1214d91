"""
Fourier descriptors of closed boundaries and the total-energy operator F_T.

Planar: the loop is resampled uniformly in arc length, read as x + iy, and
transformed with F(n) = fft(C)[n] / N (so F(0) is the sample centroid).

Sectional 3D: the surface is cut by S planes z_j = z_min + (j + 1/2) H / S,
each section loop gets a planar descriptor F(z_j, n), and a second DFT
across the stack gives G(m, n) = fft_z(F)[m] / S. The even-length axes are
trimmed to the symmetric ranges m in [-(S/2-1), S/2-1], n in [-(N/2-1), N/2-1];
the energy of the dropped Nyquist row and column is kept on the grid so the
Parseval identity still covers the whole stack.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np
import pandas as pd

from geoops.errors import GeoOpsError, require
from geoops.shapes import POINT_TOL, ClosedProfile2D, TriangleMesh, resample_polyline
from geoops.slicing import section_loops

logger = logging.getLogger(__name__)


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class BoundarySignal:
    samples: np.ndarray
    length: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.complex128)
        require(s.ndim == 1 and len(s) >= 8, "boundary signal needs >= 8 samples", count=int(s.size))
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class PlanarSpectrum:
    """Coefficients F(n) for n = -N/2 .. N/2-1, in that order."""
    coeffs: np.ndarray
    freqs: np.ndarray

    def at(self, n: int) -> complex:
        idx = int(n) + len(self.coeffs) // 2
        require(0 <= idx < len(self.coeffs), "frequency outside spectrum", n=n)
        return complex(self.coeffs[idx])

    def magnitudes(self) -> np.ndarray:
        return np.abs(self.coeffs)

    def to_frame(self, magnitudes_only: bool = False) -> pd.DataFrame:
        if magnitudes_only:
            return pd.DataFrame({"n": self.freqs, "magnitude": self.magnitudes()})
        return pd.DataFrame({"n": self.freqs, "re": self.coeffs.real, "im": self.coeffs.imag})


@dataclass(frozen=True)
class FourierGrid:
    coeffs: np.ndarray
    m_values: np.ndarray
    n_values: np.ndarray
    section_count: int
    height: float
    section_heights: np.ndarray
    nyquist_energy: float = 0.0
    nyquist_mean_energy: float = 0.0

    def at(self, m: int, n: int) -> complex:
        i = int(m) - int(self.m_values[0])
        j = int(n) - int(self.n_values[0])
        require(0 <= i < len(self.m_values) and 0 <= j < len(self.n_values), "index outside grid", m=m, n=n)
        return complex(self.coeffs[i, j])

    def to_frame(self, magnitudes_only: bool = False) -> pd.DataFrame:
        mm, nn = np.meshgrid(self.m_values, self.n_values, indexing="ij")
        frame = pd.DataFrame({"m": mm.ravel(), "n": nn.ravel()})
        flat = self.coeffs.ravel()
        if magnitudes_only:
            frame["magnitude"] = np.abs(flat)
        else:
            frame["re"] = flat.real
            frame["im"] = flat.imag
        return frame


# =========================
# Planar descriptors
# =========================
def resample_arclength(profile: ClosedProfile2D, n: int) -> BoundarySignal:
    if not (_is_power_of_two(n) and n >= 16):
        raise GeoOpsError("INVALID_ARGUMENT", "sample count must be a power of two >= 16", n=n)
    length = profile.perimeter
    if not length > 0:
        raise GeoOpsError("ZERO_PERIMETER", "profile has zero perimeter")
    pts = resample_polyline(profile.points, np.ones(len(profile)), n)
    return BoundarySignal(pts[:, 0] + 1j * pts[:, 1], length)


def planar_fd(signal: BoundarySignal) -> PlanarSpectrum:
    n = len(signal)
    coeffs = np.fft.fftshift(np.fft.fft(signal.samples) / n)
    freqs = np.arange(-(n // 2), n - n // 2)
    return PlanarSpectrum(coeffs, freqs)


def inverse_planar_fd(spectrum: PlanarSpectrum) -> np.ndarray:
    n = len(spectrum.coeffs)
    return np.fft.ifft(np.fft.ifftshift(spectrum.coeffs) * n)


def total_energy(coeffs: Union[PlanarSpectrum, FourierGrid, np.ndarray], include_mean: bool = True) -> float:
    """F_T: sum of squared coefficient magnitudes.

    Without the mean term, the planar F(0) and for grids the whole n = 0
    column (every section's centroid) are left out.
    """
    if isinstance(coeffs, FourierGrid):
        energy = float(np.sum(np.abs(coeffs.coeffs) ** 2)) + coeffs.nyquist_energy
        if not include_mean:
            col = int(np.flatnonzero(coeffs.n_values == 0)[0])
            energy -= float(np.sum(np.abs(coeffs.coeffs[:, col]) ** 2)) + coeffs.nyquist_mean_energy
        return energy
    if isinstance(coeffs, PlanarSpectrum):
        arr, freqs = coeffs.coeffs, coeffs.freqs
    else:
        arr = np.asarray(coeffs, dtype=np.complex128)
        freqs = np.arange(-(len(arr) // 2), len(arr) - len(arr) // 2)
    if not np.all(np.isfinite(arr)):
        raise GeoOpsError("NAN_INPUT", "coefficients must be finite")
    mag = np.abs(arr) ** 2
    if not include_mean:
        mag = mag[freqs != 0]
    return float(np.sum(mag))


# =========================
# Sectional descriptors
# =========================
def _area_centroid(pts: np.ndarray) -> np.ndarray:
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * np.sum(cross)
    if abs(area) < POINT_TOL ** 2:
        return pts.mean(axis=0)
    return np.array([np.sum((x + xn) * cross), np.sum((y + yn) * cross)]) / (6.0 * area)


def start_at_ray(profile: ClosedProfile2D) -> ClosedProfile2D:
    """Re-start a CCW loop where the +x ray from its area centroid leaves it.

    A crossing within 1e-12 of an existing vertex starts at that vertex;
    otherwise the crossing point is inserted.
    """
    prof = profile.oriented_ccw()
    pts = prof.points
    cx, cy = _area_centroid(pts)
    nxt = np.roll(pts, -1, axis=0)
    y0, y1 = pts[:, 1], nxt[:, 1]
    upward = (y0 <= cy) & (cy < y1)
    t = np.where(upward, (cy - y0) / np.where(upward, y1 - y0, 1.0), 0.0)
    xs = pts[:, 0] + t * (nxt[:, 0] - pts[:, 0])
    cand = np.flatnonzero(upward & (xs > cx))
    if cand.size == 0:
        return prof
    i = int(cand[np.argmin(xs[cand])])
    hit = np.array([xs[i], cy])
    if np.linalg.norm(hit - pts[i]) <= POINT_TOL:
        return ClosedProfile2D(np.roll(pts, -i, axis=0))
    if np.linalg.norm(hit - nxt[i]) <= POINT_TOL:
        return ClosedProfile2D(np.roll(pts, -((i + 1) % len(pts)), axis=0))
    rolled = np.roll(pts, -(i + 1), axis=0)
    return ClosedProfile2D(np.vstack([hit, rolled]))


def sectional_fd_3d(mesh: TriangleMesh, n_sections: int = 32, n_per_section: int = 64) -> FourierGrid:
    if not (_is_power_of_two(n_sections) and n_sections >= 4):
        raise GeoOpsError("INVALID_ARGUMENT", "section count must be a power of two >= 4", n_sections=n_sections)
    if not (_is_power_of_two(n_per_section) and n_per_section >= 16):
        raise GeoOpsError("INVALID_ARGUMENT", "samples per section must be a power of two >= 16",
                          n_per_section=n_per_section)
    _, counts = mesh.edge_counts()
    if np.any(counts != 2):
        raise GeoOpsError("NOT_WATERTIGHT", "sectional descriptor needs a closed 2-manifold")

    z_min, z_max = float(mesh.vertices[:, 2].min()), float(mesh.vertices[:, 2].max())
    height = z_max - z_min
    require(height > 0, "mesh is flat in z")
    zs = z_min + (np.arange(n_sections) + 0.5) * height / n_sections

    rows = np.empty((n_sections, n_per_section), dtype=np.complex128)
    for j, z in enumerate(zs):
        loops = section_loops(mesh, axis=2, value=z)
        if len(loops) != 1:
            raise GeoOpsError("MULTI_LOOP_SECTION", "section must be a single closed loop",
                              z=float(z), loops=len(loops))
        signal = resample_arclength(start_at_ray(loops[0]), n_per_section)
        rows[j] = np.fft.fft(signal.samples) / n_per_section

    full = np.fft.fftshift(np.fft.fft(rows, axis=0) / n_sections)
    # index 0 on each shifted axis is the Nyquist frequency -S/2 (resp. -N/2)
    mean_col = n_per_section // 2
    nyquist = float(np.sum(np.abs(full[0, :]) ** 2) + np.sum(np.abs(full[1:, 0]) ** 2))
    nyquist_mean = float(np.abs(full[0, mean_col]) ** 2)
    grid = full[1:, 1:]
    m_values = np.arange(-(n_sections // 2 - 1), n_sections // 2)
    n_values = np.arange(-(n_per_section // 2 - 1), n_per_section // 2)
    logger.debug("sectional FD: %d sections, %d samples, nyquist energy %.3g", n_sections, n_per_section, nyquist)
    return FourierGrid(grid, m_values, n_values, n_sections, height, zs, nyquist, nyquist_mean)
