"""
Phase singularities and intensity structure of sampled fields.

Windings are counted on the elementary 2x2 cells (plaquettes) of the grid.
Every edge phase difference is wrapped into (-pi, pi] once and shared by the
two plaquettes it borders, so the plaquette windings always add up to the
winding around the grid boundary.
"""
import logging
from collections import namedtuple
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from scipy import ndimage
from scipy.signal import find_peaks

from src.utils.settings import load_settings

logger = logging.getLogger(__name__)

MIN_DETECTION_RESOLUTION = 64
ZERO_MODULUS = 1e-300
UNRESOLVED_STEP = np.pi / 2
PETAL_PROMINENCE = 1e-3

TWO_PI = 2.0 * np.pi
NEIGHBOURHOOD = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class Vortex:
    """Position in units of the reference waist and integer topological charge."""
    x: float
    y: float
    charge: int

    @property
    def radius(self) -> float:
        return float(np.hypot(self.x, self.y))

    @property
    def azimuth(self) -> float:
        return float(np.mod(np.arctan2(self.y, self.x), TWO_PI))


@dataclass(frozen=True)
class VortexReport:
    vortices: Tuple[Vortex, ...]
    total_winding: int
    petal_count: Optional[int] = None
    ring_radius: Optional[float] = None

    @property
    def charge_sum(self) -> int:
        return sum(v.charge for v in self.vortices)


RadialProfile = namedtuple("RadialProfile", ["table", "peak_radius"])


def loop_winding(values):
    """
    Winding number of a closed loop of samples (the last one joins the first).

    Raises:
        ValueError: if a sample has zero modulus or the loop is empty
    """
    loop = np.asarray(values, dtype=complex).reshape(-1)
    if loop.size == 0:
        raise ValueError("cannot wind around an empty loop")
    if np.any(np.abs(loop) < ZERO_MODULUS):
        raise ValueError("loop passes through a zero of the field; winding is undefined")
    steps = np.angle(np.roll(loop, -1) * loop.conj())
    return int(np.rint(np.sum(steps) / TWO_PI))


def _edge_steps(field):
    """Wrapped phase steps along +x (shape R x R-1) and +y (shape R-1 x R)."""
    dx = np.angle(field[:, 1:] * field[:, :-1].conj())
    dy = np.angle(field[1:, :] * field[:-1, :].conj())
    return dx, dy


def plaquette_windings(field):
    """Integer winding of every plaquette, counterclockwise with y growing along axis 0."""
    dx, dy = _edge_steps(np.asarray(field, dtype=complex))
    circulation = dx[:-1, :] + dy[:, 1:] - dx[1:, :] - dy[:, :-1]
    return np.rint(circulation / TWO_PI).astype(int)


def boundary_winding(field):
    """Winding around the outer edge of the sampled region."""
    dx, dy = _edge_steps(np.asarray(field, dtype=complex))
    circulation = np.sum(dx[0, :]) + np.sum(dy[:, -1]) - np.sum(dx[-1, :]) - np.sum(dy[:, 0])
    return int(np.rint(circulation / TWO_PI))


def _flag_plaquettes(field, q, intensity_floor):
    dx, dy = _edge_steps(field)
    steep_x = np.abs(dx) > UNRESOLVED_STEP
    steep_y = np.abs(dy) > UNRESOLVED_STEP
    unresolved = steep_x[:-1, :] | steep_x[1:, :] | steep_y[:, :-1] | steep_y[:, 1:]

    intensity = np.abs(field) ** 2
    dim = intensity < intensity_floor * float(np.max(intensity))
    dead = dim[:-1, :-1] & dim[:-1, 1:] & dim[1:, :-1] & dim[1:, 1:]
    return (q != 0) | unresolved | dead


def detect_vortices(field_grid, field_index, intensity_floor=None):
    """
    Locate the phase singularities of one field.

    Plaquettes with a nonzero winding, an under-resolved edge or four dim
    corners are flagged, grown by one plaquette and grouped with 8-connectivity.
    A group's charge is the sum of its plaquette windings; groups of zero net
    charge are dropped.

    Args:
        field_grid: Sampled fields
        field_index: 0-based field index
        intensity_floor: Dim-corner threshold relative to the grid maximum of
            |Omega|^2; config.yaml default if None

    Returns:
        VortexReport ordered by distance from the axis, then azimuth
    """
    grid = field_grid.grid
    if grid.resolution < MIN_DETECTION_RESOLUTION:
        raise ValueError(
            f"vortex detection needs resolution >= {MIN_DETECTION_RESOLUTION}, got {grid.resolution}"
        )
    floor = load_settings().intensity_floor if intensity_floor is None else float(intensity_floor)
    field = field_grid.field(field_index)

    q = plaquette_windings(field)
    flags = _flag_plaquettes(field, q, floor)
    clusters = ndimage.binary_dilation(flags, structure=NEIGHBOURHOOD)
    labels, count = ndimage.label(clusters, structure=NEIGHBOURHOOD)

    vortices = []
    if count:
        index = np.arange(1, count + 1)
        charges = np.rint(ndimage.sum(q, labels, index)).astype(int)
        centres = ndimage.center_of_mass(flags, labels, index)
        origin = grid.axis[0] / grid.w
        step = grid.spacing / grid.w
        for charge, (iy, ix) in zip(charges, centres):
            if charge == 0:
                continue
            x = origin + (ix + 0.5) * step
            y = origin + (iy + 0.5) * step
            vortices.append(Vortex(x=float(x), y=float(y), charge=int(charge)))
    vortices.sort(key=lambda v: (round(v.radius, 9), v.azimuth))

    total = boundary_winding(field)
    if total != sum(v.charge for v in vortices):
        logger.error("boundary winding %d differs from summed vortex charges", total)
    logger.debug("field %d: %d vortices, boundary winding %d", field_index, len(vortices), total)
    return VortexReport(vortices=tuple(vortices), total_winding=total)


def radial_profile(field_grid, field_index):
    """
    Azimuthally averaged intensity in bins one grid spacing wide, out to the
    inscribed circle. Radii are in units of the reference waist and give the
    mean radius of the samples in each bin.
    """
    grid = field_grid.grid
    r, _ = grid.polar()
    r = r / grid.w
    intensity = field_grid.intensity(field_index)
    inside = r <= grid.extent
    bins = np.floor(r[inside] / (grid.spacing / grid.w)).astype(int)

    counts = np.bincount(bins)
    occupied = counts > 0
    radius = np.bincount(bins, weights=r[inside])[occupied] / counts[occupied]
    mean = np.bincount(bins, weights=intensity[inside])[occupied] / counts[occupied]

    table = pd.DataFrame({"r": radius, "mean_intensity": mean})
    peak_radius = float(radius[int(np.argmax(mean))])
    return RadialProfile(table=table, peak_radius=peak_radius)


def ring_intensity(field_grid, field_index, ring_radius, samples=None):
    """|Omega|^2 on a circle of radius ring_radius (units of w), cubic-spline interpolated."""
    grid = field_grid.grid
    samples = load_settings().petal_samples if samples is None else int(samples)
    if samples < 3:
        raise ValueError(f"need at least 3 ring samples, got {samples}")
    if not 0 < ring_radius <= grid.extent:
        raise ValueError(f"ring radius {ring_radius} lies outside the grid extent {grid.extent}")

    theta = np.arange(samples) * TWO_PI / samples
    x = ring_radius * grid.w * np.cos(theta)
    y = ring_radius * grid.w * np.sin(theta)
    ix = (x - grid.axis[0]) / grid.spacing
    iy = (y - grid.axis[0]) / grid.spacing
    intensity = field_grid.intensity(field_index)
    return ndimage.map_coordinates(intensity, [iy, ix], order=3, mode="nearest")


def count_petals(field_grid, field_index, ring_radius=None, samples=None):
    """
    Number of intensity maxima around a ring.

    The ring samples are smoothed with a cyclic 3-point moving average and a
    maximum must stand out from its surroundings by more than a thousandth of
    the ring maximum, so a uniform ring counts 0. The default ring is the peak
    of the radial profile.

    Raises:
        ValueError: if the ring leaves the grid or carries no intensity
    """
    if ring_radius is None:
        ring_radius = radial_profile(field_grid, field_index).peak_radius
    ring = ring_intensity(field_grid, field_index, ring_radius, samples)
    ring_max = float(np.max(ring))
    if not ring_max > load_settings().intensity_floor * float(np.max(field_grid.intensity(field_index))):
        raise ValueError(f"ring of radius {ring_radius} carries no intensity")

    smoothed = ndimage.uniform_filter1d(ring, size=3, mode="wrap")
    peaks, _ = find_peaks(np.tile(smoothed, 3), prominence=PETAL_PROMINENCE * ring_max)
    n = smoothed.size
    return int(np.count_nonzero((peaks >= n) & (peaks < 2 * n)))


def vortex_report(field_grid, field_index, ring_radius=None):
    """detect_vortices plus the petal count at ring_radius (radial peak by default)."""
    report = detect_vortices(field_grid, field_index)
    if ring_radius is None:
        ring_radius = radial_profile(field_grid, field_index).peak_radius
    try:
        petals = count_petals(field_grid, field_index, ring_radius)
    except ValueError as e:
        logger.debug("no petal count for field %d: %s", field_index, e)
        petals = None
    return VortexReport(
        vortices=report.vortices,
        total_winding=report.total_winding,
        petal_count=petals,
        ring_radius=float(ring_radius),
    )


def report_to_dict(report):
    return {
        "vortices": [{"x": v.x, "y": v.y, "charge": v.charge} for v in report.vortices],
        "total_winding": report.total_winding,
        "petal_count": report.petal_count,
        "ring_radius": report.ring_radius,
    }


def report_from_dict(data):
    return VortexReport(
        vortices=tuple(Vortex(x=float(v["x"]), y=float(v["y"]), charge=int(v["charge"])) for v in data["vortices"]),
        total_winding=int(data["total_winding"]),
        petal_count=None if data.get("petal_count") is None else int(data["petal_count"]),
        ring_radius=None if data.get("ring_radius") is None else float(data["ring_radius"]),
    )
