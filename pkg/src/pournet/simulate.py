"""Quasi-static pouring simulator.

Models an upright cylindrical cup tipped about its lip: at each tilt the cup
retains at most the volume bounded by the plane through the low point of the
rim, and liquid that leaves never comes back. Geometry is in mm, volume in
mm^3, weight in lbf.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .data import PourRecord

RHO_WATER = 1000.0  # kg/m^3
GRAVITY = 9.80665  # m/s^2
NEWTON_TO_LBF = 0.2248089431
MM3_TO_M3 = 1e-9
# Thin-wall areal density (kg/m^2) that sets the empty-cup weight from its
# base + lateral surface area.
CUP_SHELL_DENSITY = 0.5


@dataclass(frozen=True)
class CupGeometry:
    """Cylindrical cup interior: radius and height in mm."""

    radius: float
    height: float

    def __post_init__(self):
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"radius must be > 0 (got {self.radius!r})")
        if not (np.isfinite(self.height) and self.height > 0):
            raise ValueError(f"height must be > 0 (got {self.height!r})")

    @property
    def full_volume(self) -> float:
        """Upright capacity, pi r^2 h (mm^3)."""
        return math.pi * self.radius * self.radius * self.height


def retained_volume(geometry: CupGeometry, tilt_deg: float) -> float:
    """Largest volume (mm^3) the cup retains at a tilt from vertical (degrees).

    The free surface is the plane through the low point of the rim. Three
    regimes as tilt grows:
      tilt <= 0                 full cylinder,
      tan(tilt) <= H/(2R)       oblique slab cut, pi R^2 (H - R tan(tilt)),
      tan(tilt) >  H/(2R)       hoof-shaped wedge, integrated numerically,
    and zero at or past horizontal.
    """
    if not np.isfinite(tilt_deg):
        raise ValueError(f"tilt must be finite (got {tilt_deg!r})")
    r, h = geometry.radius, geometry.height
    if tilt_deg <= 0.0:
        return geometry.full_volume
    if tilt_deg >= 90.0:
        return 0.0
    t = math.tan(math.radians(tilt_deg))
    if t <= h / (2.0 * r):
        return math.pi * r * r * (h - r * t)
    return ungula_volume(r, h, t)


def ungula_volume(radius: float, height: float, tan_tilt: float) -> float:
    """Wedge volume by adaptive quadrature (relative tolerance 1e-8).

    The liquid column above the base point (x, y) has height
    H - (R - x) tan_tilt, positive for x > a = R - H / tan_tilt, and the
    chord width at x is 2 sqrt(R^2 - x^2). Substituting x = R sin(u) removes
    the square root's endpoint slope. Valid whenever tan_tilt > 0; for
    tan_tilt <= H/(2R) it reproduces the slab closed form.
    """
    if tan_tilt <= 0:
        raise ValueError("ungula_volume needs a positive tangent")
    a = radius - height / tan_tilt
    u0 = math.asin(max(-1.0, a / radius))

    def column(u):
        s, c = math.sin(u), math.cos(u)
        return 2.0 * radius * radius * c * c * (height - radius * (1.0 - s) * tan_tilt)

    scale = math.pi * radius * radius * height
    value, _ = quad(column, u0, math.pi / 2.0, epsabs=1e-12 * scale, epsrel=1e-8, limit=200)
    return max(value, 0.0)


def quasi_static_pour(geometry: CupGeometry, tilt_series, v0: float) -> np.ndarray:
    """Liquid volume after each step of a tilt sequence (degrees, 0 = upright).

    V_t = min(V_{t-1}, retained_volume(tilt_t)); spilled liquid never returns,
    so the result is non-increasing regardless of tilt wobble.
    """
    if not (np.isfinite(v0) and v0 >= 0):
        raise ValueError(f"initial volume must be >= 0 (got {v0!r})")
    tilts = np.asarray(tilt_series, dtype=np.float64)
    out = np.empty(tilts.shape[0], dtype=np.float64)
    level = float(v0)
    for i, tilt in enumerate(tilts):
        level = min(level, retained_volume(geometry, float(tilt)))
        out[i] = level
    return out


def weight_from_volume(volume, rho_rel: float, f_cup_empty: float):
    """Cup-plus-liquid weight in lbf for a liquid volume in mm^3.

    One liter of water comes out at about 2.2046 lbf of liquid weight.
    """
    v = np.asarray(volume, dtype=np.float64)
    if np.any(v < 0):
        raise ValueError("volume must be >= 0")
    liquid_newton = rho_rel * RHO_WATER * GRAVITY * v * MM3_TO_M3
    out = f_cup_empty + liquid_newton * NEWTON_TO_LBF
    if np.isscalar(volume) or getattr(volume, "ndim", 1) == 0:
        return float(out)
    return out


def cup_empty_weight(geometry: CupGeometry) -> float:
    """Empty-cup weight (lbf) from the thin-shell wall model."""
    r_m = geometry.radius * 1e-3
    h_m = geometry.height * 1e-3
    shell_area = math.pi * r_m * r_m + 2.0 * math.pi * r_m * h_m
    return CUP_SHELL_DENSITY * shell_area * GRAVITY * NEWTON_TO_LBF


@dataclass(frozen=True)
class TrajectoryConfig:
    """Shape of the rotation-angle series and the sensor noise level.

    length: inclusive range of sequence lengths (steps).
    ramp_frac: share of steps spent tilting fast, in (0, 0.3].
    final_tilt: range of the hold tilt in degrees, inside (0, 90).
    jitter_deg: zero-mean wobble amplitude during the hold phase.
    noise_sigma: Gaussian sensor noise on the weight series, lbf.
    """

    length: tuple = (80, 150)
    ramp_frac: float = 0.25
    final_tilt: tuple = (55.0, 85.0)
    jitter_deg: float = 0.5
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.length
        if not (1 <= lo <= hi):
            raise ValueError(f"length range must satisfy 1 <= lo <= hi (got {self.length!r})")
        if not (0.0 < self.ramp_frac <= 0.3):
            raise ValueError(f"ramp_frac must lie in (0, 0.3] (got {self.ramp_frac!r})")
        t_lo, t_hi = self.final_tilt
        if not (0.0 < t_lo <= t_hi < 90.0):
            raise ValueError(f"final_tilt range must lie inside (0, 90) (got {self.final_tilt!r})")
        if self.jitter_deg < 0:
            raise ValueError("jitter_deg must be >= 0")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


_RANGE_FIELDS = ("d_cm", "h_cm", "d_cup", "h_cup", "rho_rel", "fill_frac")


@dataclass(frozen=True)
class SimRanges:
    """Sampling intervals for the static scalars of a simulated trial.

    d_cm/h_cm (pouring cup, mm) drive the physics; d_cup/h_cup (receiving
    cup, mm) ride along as features. fill_frac is the initial fill as a
    fraction of the pouring cup's capacity.
    """

    d_cm: tuple = (60.0, 110.0)
    h_cm: tuple = (80.0, 150.0)
    d_cup: tuple = (60.0, 115.0)
    h_cup: tuple = (80.0, 150.0)
    rho_rel: tuple = (0.8, 1.2)
    fill_frac: tuple = (0.5, 0.95)

    def __post_init__(self):
        for name in _RANGE_FIELDS:
            lo, hi = getattr(self, name)
            if not (np.isfinite(lo) and np.isfinite(hi) and 0 < lo <= hi):
                raise ValueError(f"{name} range must satisfy 0 < lo <= hi (got {(lo, hi)!r})")
        if self.fill_frac[1] > 1.0:
            raise ValueError("fill_frac must stay <= 1")

    def scaled_cups(self, factor: float) -> "SimRanges":
        """Both cups' dimensions scaled by `factor`; densities and fill unchanged."""
        return SimRanges(
            d_cm=(self.d_cm[0] * factor, self.d_cm[1] * factor),
            h_cm=(self.h_cm[0] * factor, self.h_cm[1] * factor),
            d_cup=(self.d_cup[0] * factor, self.d_cup[1] * factor),
            h_cup=(self.h_cup[0] * factor, self.h_cup[1] * factor),
            rho_rel=self.rho_rel,
            fill_frac=self.fill_frac,
        )

    def to_dict(self) -> dict:
        return {name: list(getattr(self, name)) for name in _RANGE_FIELDS}

    @classmethod
    def from_dict(cls, doc: dict) -> "SimRanges":
        kwargs = {name: tuple(doc[name]) for name in _RANGE_FIELDS if name in doc}
        return cls(**kwargs)


def default_ranges() -> SimRanges:
    """Desk-scale cups, the in-distribution regime."""
    return SimRanges()


def wide_cup_ranges() -> SimRanges:
    """Cup dimensions doubled: every sampled cup lies outside the default ranges."""
    return default_ranges().scaled_cups(2.0)


def gen_theta_trajectory(config: TrajectoryConfig, rng: np.random.Generator) -> np.ndarray:
    """Rotation-angle series: a short upright start, a roughly linear ramp
    down to -(final tilt), then a hold with zero-mean jitter.

    The start angle sits within [-2, +2] degrees. The physical tilt used by
    the simulator is clamp(-theta, 0, 90).
    """
    lo, hi = config.length
    length = int(rng.integers(lo, hi + 1))
    final_tilt = float(rng.uniform(*config.final_tilt))
    start = float(rng.uniform(-1.0, 1.0)) * min(config.jitter_deg, 2.0)
    n_ramp = min(max(1, math.ceil(config.ramp_frac * length)), max(1, length - 1))
    steps = np.arange(length, dtype=np.float64)
    theta = start + (-final_tilt - start) * np.minimum(steps, n_ramp) / n_ramp
    hold = length - n_ramp - 1
    if hold > 0 and config.jitter_deg > 0:
        theta[n_ramp + 1 :] += rng.uniform(-config.jitter_deg, config.jitter_deg, size=hold)
    return theta


def generate_dataset(n: int, ranges: SimRanges, config: TrajectoryConfig, seed: int | None = None) -> list:
    """Synthesize n pouring trials.

    Record k draws from its own stream seeded by (seed, k), so a record's
    content does not depend on how many records are generated around it.
    Draw order per record: the six static scalars in SimRanges field order,
    then the trajectory, then sensor noise.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1 (got {n!r})")
    base = config.seed if seed is None else seed
    records = []
    for k in range(n):
        rng = np.random.default_rng([base, k])
        d_cm = float(rng.uniform(*ranges.d_cm))
        h_cm = float(rng.uniform(*ranges.h_cm))
        d_cup = float(rng.uniform(*ranges.d_cup))
        h_cup = float(rng.uniform(*ranges.h_cup))
        rho_rel = float(rng.uniform(*ranges.rho_rel))
        fill = float(rng.uniform(*ranges.fill_frac))
        geometry = CupGeometry(radius=d_cm / 2.0, height=h_cm)
        theta = gen_theta_trajectory(config, rng)
        tilt = np.clip(-theta, 0.0, 90.0)
        volumes = quasi_static_pour(geometry, tilt, fill * geometry.full_volume)
        f_empty = cup_empty_weight(geometry)
        clean = weight_from_volume(volumes, rho_rel, f_empty)
        weight = clean + rng.normal(0.0, config.noise_sigma or 0.0, size=clean.shape[0]) \
            if config.noise_sigma > 0 else clean.copy()
        records.append(
            PourRecord(
                theta=theta,
                weight=weight,
                f_init=float(clean[0]),
                f_empty=f_empty,
                f_final=float(clean[-1]),
                d_cup=d_cup,
                h_cup=h_cup,
                d_cm=d_cm,
                h_cm=h_cm,
                rho_rel=rho_rel,
            )
        )
    return records
