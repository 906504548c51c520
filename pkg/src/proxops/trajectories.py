"""Reference generation: parametric inspection paths and goal-velocity streams.

All shapes are arc-length parameterized so the path speed equals the
configured speed. Circle, capsule (stadium), and rectangle walk their
perimeter in closed form; lemniscate and Lissajous invert a dense
numerically integrated arc-length table; the Archimedean spiral inverts its
closed-form arc length with Newton iterations. Closed shapes return to the
start after exactly one period.

The reference orientation points the body +x axis (camera boresight) at the
shape center, with world +z as up-vector and +y as the degenerate tie-break.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import PchipInterpolator

from . import quat
from .errors import ValidationError

SHAPES = ("circle", "capsule", "rectangle", "lemniscate", "lissajous", "spiral")

_TABLE_POINTS = 16385  # odd count keeps Simpson happy over the closed interval


@dataclass(frozen=True)
class TrajectorySpec:
    """Geometric inspection path.

    Shape-specific sizes (meters unless noted):
      circle      radius
      capsule     radius (cap), length (each straight segment)
      rectangle   width (x extent), height (y extent)
      lemniscate  amplitude (half-width of the figure-eight)
      lissajous   amp_x, amp_y, freq_x:freq_y (coprime ints), phase (rad)
      spiral      radius (start), radial_rate (m/rad)
    """

    shape: str
    speed: float
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    plane_quat: np.ndarray = field(default_factory=lambda: quat.IDENTITY.copy())
    radius: float = 1.0
    length: float = 1.0
    width: float = 2.0
    height: float = 1.0
    amplitude: float = 1.0
    amp_x: float = 1.0
    amp_y: float = 1.0
    freq_x: int = 2
    freq_y: int = 3
    phase: float = math.pi / 4
    radial_rate: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "plane_quat", np.asarray(self.plane_quat, dtype=float))
        if self.shape not in SHAPES:
            raise ValidationError(f"unknown shape '{self.shape}', expected one of {SHAPES}")
        if not self.speed > 0.0:
            raise ValidationError("speed must be > 0")
        sizes = {
            "circle": (self.radius,),
            "capsule": (self.radius, self.length),
            "rectangle": (self.width, self.height),
            "lemniscate": (self.amplitude,),
            "lissajous": (self.amp_x, self.amp_y),
            "spiral": (self.radius, self.radial_rate),
        }[self.shape]
        if any(not s > 0.0 for s in sizes):
            raise ValidationError(f"{self.shape}: size parameters must be > 0, got {sizes}")
        if self.shape == "lissajous":
            a, b = int(self.freq_x), int(self.freq_y)
            if a <= 0 or b <= 0 or math.gcd(a, b) != 1:
                raise ValidationError(f"lissajous frequency ratio must be coprime positive ints, got {a}:{b}")
        if abs(np.linalg.norm(self.plane_quat) - 1.0) > 1e-9:
            raise ValidationError("plane_quat must be a unit quaternion")

    def _key(self):
        return (
            self.shape, self.speed, self.radius, self.length, self.width, self.height,
            self.amplitude, self.amp_x, self.amp_y, self.freq_x, self.freq_y,
            self.phase, self.radial_rate,
        )


@dataclass(frozen=True)
class ReferenceSample:
    """Target pose and velocity at a given time, world frame."""

    time: float
    position: np.ndarray
    orientation: np.ndarray
    velocity: np.ndarray


@dataclass(frozen=True)
class VelocityStreamSpec:
    """Randomized piecewise-constant goal-velocity stream.

    Every ``hold`` seconds a fresh uniform vector within the per-axis
    component bounds is drawn and rescaled so its norm lies inside the
    speed bounds.
    """

    speed_bounds: tuple = (0.05, 0.15)
    hold: float = 5.0
    component_bounds: tuple = (0.15, 0.15, 0.15)

    def __post_init__(self):
        lo, hi = self.speed_bounds
        if not (np.isfinite(lo) and np.isfinite(hi) and 0.0 <= lo <= hi):
            raise ValidationError(f"speed bounds must satisfy 0 <= lo <= hi, got {self.speed_bounds}")
        if not self.hold > 0.0:
            raise ValidationError("hold duration must be > 0")
        if any(not (np.isfinite(b) and b >= 0.0) for b in self.component_bounds):
            raise ValidationError("component bounds must be finite and non-negative")


# ---------------------------------------------------------------------------
# planar curves, arc-length parameterized
# ---------------------------------------------------------------------------


def _circle_local(spec, s):
    th = s / spec.radius
    p = np.array([spec.radius * math.cos(th), spec.radius * math.sin(th), 0.0])
    t = np.array([-math.sin(th), math.cos(th), 0.0])
    return p, t


def _capsule_local(spec, s):
    # stadium: caps of radius r at x = +-L/2, straights of length L at y = +-r,
    # counter-clockwise from the rightmost point (L/2 + r, 0).
    r, L = spec.radius, spec.length
    quarter = 0.5 * math.pi * r
    segs = (quarter, L, 2.0 * quarter, L, quarter)
    if s < segs[0]:  # right cap, upper quarter
        th = s / r
        c = np.array([L / 2.0, 0.0])
    elif s < segs[0] + segs[1]:  # top straight, heading -x
        u = s - segs[0]
        p = np.array([L / 2.0 - u, r, 0.0])
        return p, np.array([-1.0, 0.0, 0.0])
    elif s < segs[0] + segs[1] + segs[2]:  # left cap
        th = math.pi / 2.0 + (s - segs[0] - segs[1]) / r
        c = np.array([-L / 2.0, 0.0])
    elif s < segs[0] + segs[1] + segs[2] + segs[3]:  # bottom straight, heading +x
        u = s - segs[0] - segs[1] - segs[2]
        p = np.array([-L / 2.0 + u, -r, 0.0])
        return p, np.array([1.0, 0.0, 0.0])
    else:  # right cap, lower quarter
        th = 1.5 * math.pi + (s - segs[0] - segs[1] - segs[2] - segs[3]) / r
        c = np.array([L / 2.0, 0.0])
    p = np.array([c[0] + r * math.cos(th), c[1] + r * math.sin(th), 0.0])
    t = np.array([-math.sin(th), math.cos(th), 0.0])
    return p, t


def _rectangle_local(spec, s):
    # counter-clockwise from the midpoint of the right edge, heading +y
    w, h = spec.width, spec.height
    segs = (
        (h / 2.0, np.array([w / 2.0, 0.0]), np.array([0.0, 1.0])),
        (w, np.array([w / 2.0, h / 2.0]), np.array([-1.0, 0.0])),
        (h, np.array([-w / 2.0, h / 2.0]), np.array([0.0, -1.0])),
        (w, np.array([-w / 2.0, -h / 2.0]), np.array([1.0, 0.0])),
        (h / 2.0, np.array([w / 2.0, -h / 2.0]), np.array([0.0, 1.0])),
    )
    for seg_len, start, heading in segs[:-1]:
        if s < seg_len:
            p2 = start + s * heading
            return np.array([p2[0], p2[1], 0.0]), np.array([heading[0], heading[1], 0.0])
        s -= seg_len
    seg_len, start, heading = segs[-1]
    p2 = start + min(s, seg_len) * heading
    return np.array([p2[0], p2[1], 0.0]), np.array([heading[0], heading[1], 0.0])


def _lemniscate_xy(spec, th):
    # Gerono figure-eight, shifted so the walk starts at the +x extreme
    a = spec.amplitude
    th = th + math.pi / 2.0
    x = a * np.sin(th)
    y = a * np.sin(th) * np.cos(th)
    dx = a * np.cos(th)
    dy = a * np.cos(2.0 * th)
    return x, y, dx, dy


def _lissajous_xy(spec, th):
    ax, ay, fa, fb, ph = spec.amp_x, spec.amp_y, spec.freq_x, spec.freq_y, spec.phase
    x = ax * np.sin(fa * th + ph)
    y = ay * np.sin(fb * th)
    dx = ax * fa * np.cos(fa * th + ph)
    dy = ay * fb * np.cos(fb * th)
    return x, y, dx, dy


@lru_cache(maxsize=64)
def _arc_table(key):
    """Dense theta -> arc-length table with monotone-cubic inverse."""
    spec = _SPEC_CACHE[key]
    fn = _lemniscate_xy if spec.shape == "lemniscate" else _lissajous_xy
    th = np.linspace(0.0, 2.0 * math.pi, _TABLE_POINTS)
    _, _, dx, dy = fn(spec, th)
    ds = np.hypot(dx, dy)
    if ds.min() < 1e-6 * ds.max():
        raise ValidationError(
            f"{spec.shape}: curve speed vanishes along the path; "
            "adjust the phase or frequency ratio"
        )
    s = cumulative_simpson(ds, x=th, initial=0.0)
    return PchipInterpolator(s, th), float(s[-1])


# cache of spec values keyed by their hashable parameter tuple, so the
# lru-cached arc table does not hold spec object identities
_SPEC_CACHE = {}


def _table_for(spec):
    key = spec._key()
    _SPEC_CACHE.setdefault(key, spec)
    return _arc_table(key)


def _numeric_local(spec, s):
    inv, total = _table_for(spec)
    th = float(inv(s))
    fn = _lemniscate_xy if spec.shape == "lemniscate" else _lissajous_xy
    x, y, dx, dy = fn(spec, th)
    norm = math.hypot(dx, dy)
    return np.array([x, y, 0.0]), np.array([dx / norm, dy / norm, 0.0])


def _spiral_arc(u):
    # arc length integrand antiderivative for r = k*u: (k/2)(u sqrt(1+u^2) + asinh u)
    return 0.5 * (u * math.sqrt(1.0 + u * u) + math.asinh(u))


def _spiral_local(spec, s):
    r0, k = spec.radius, spec.radial_rate
    u0 = r0 / k
    s_scaled = s / k + _spiral_arc(u0)
    # Newton on s(u) = k*(A(u) - A(u0)); derivative k*sqrt(1+u^2)
    u = max(u0, math.sqrt(max(2.0 * s_scaled, 0.0)))  # good initial guess for large u
    for _ in range(60):
        f = _spiral_arc(u) - s_scaled
        df = math.sqrt(1.0 + u * u)
        step = f / df
        u -= step
        if abs(step) < 1e-14 * max(1.0, abs(u)):
            break
    th = u - u0
    r = r0 + k * th
    p = np.array([r * math.cos(th), r * math.sin(th), 0.0])
    tangent = np.array(
        [k * math.cos(th) - r * math.sin(th), k * math.sin(th) + r * math.cos(th), 0.0]
    )
    return p, tangent / np.linalg.norm(tangent)


def trajectory_period(spec):
    """Duration of one full loop; infinite for the open spiral."""
    if spec.shape == "circle":
        return 2.0 * math.pi * spec.radius / spec.speed
    if spec.shape == "capsule":
        return (2.0 * spec.length + 2.0 * math.pi * spec.radius) / spec.speed
    if spec.shape == "rectangle":
        return 2.0 * (spec.width + spec.height) / spec.speed
    if spec.shape in ("lemniscate", "lissajous"):
        _, total = _table_for(spec)
        return total / spec.speed
    return math.inf


def look_at_orientation(position, target, up=(0.0, 0.0, 1.0)):
    """Quaternion pointing body +x from ``position`` toward ``target``.

    World +z is used as the up-vector; if the boresight is aligned with it,
    +y breaks the tie. A degenerate (zero-range) pair returns identity.
    """
    fwd = np.asarray(target, float) - np.asarray(position, float)
    n = np.linalg.norm(fwd)
    if n < 1e-12:
        return quat.IDENTITY.copy()
    x = fwd / n
    y = np.cross(np.asarray(up, float), x)
    if np.linalg.norm(y) < 1e-9:
        y = np.cross(np.array([0.0, 1.0, 0.0]), x)
    y /= np.linalg.norm(y)
    z = np.cross(x, y)
    return quat.from_matrix(np.column_stack([x, y, z]))


def sample_reference(spec, t):
    """Reference pose and velocity on the path at time t >= 0."""
    if t < 0.0:
        raise ValidationError("time must be >= 0")
    period = trajectory_period(spec)
    arc = spec.speed * t
    if math.isfinite(period):
        arc = math.fmod(arc, period * spec.speed)
    local = {
        "circle": _circle_local,
        "capsule": _capsule_local,
        "rectangle": _rectangle_local,
        "lemniscate": _numeric_local,
        "lissajous": _numeric_local,
        "spiral": _spiral_local,
    }[spec.shape]
    p_local, t_local = local(spec, arc)
    R_plane = quat.to_matrix(spec.plane_quat)
    position = spec.center + R_plane @ p_local
    velocity = spec.speed * (R_plane @ t_local)
    orientation = look_at_orientation(position, spec.center)
    return ReferenceSample(time=t, position=position, orientation=orientation, velocity=velocity)


# ---------------------------------------------------------------------------
# goal-velocity streams
# ---------------------------------------------------------------------------


def _segment_velocity(spec, index, seed):
    rng = np.random.default_rng([int(seed) & 0xFFFFFFFF, int(index)])
    bounds = np.asarray(spec.component_bounds, dtype=float)
    v = rng.uniform(-bounds, bounds)
    lo, hi = spec.speed_bounds
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        if lo == 0.0:
            return np.zeros(3)
        return np.array([lo, 0.0, 0.0])
    return v * (min(max(norm, lo), hi) / norm)


def sample_goal_velocity(spec, t, seed):
    """Piecewise-constant goal velocity, deterministic per (seed, segment)."""
    if t < 0.0:
        raise ValidationError("time must be >= 0")
    return _segment_velocity(spec, math.floor(t / spec.hold), seed)


def integrate_reference(spec, t, origin, seed, asset_center=(0.0, 0.0, 0.0)):
    """Virtual target pose from the exact integral of the streamed velocity.

    The position accumulates full hold segments plus the partial current
    one; the orientation faces the inspected asset center.
    """
    if t < 0.0:
        raise ValidationError("time must be >= 0")
    k = math.floor(t / spec.hold)
    position = np.asarray(origin, dtype=float).copy()
    for j in range(k):
        position = position + spec.hold * _segment_velocity(spec, j, seed)
    v = _segment_velocity(spec, k, seed)
    position = position + (t - k * spec.hold) * v
    orientation = look_at_orientation(position, asset_center)
    return ReferenceSample(time=t, position=position, orientation=orientation, velocity=v)
