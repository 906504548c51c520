"""Spacecraft body and thruster-layout definition, validation, randomization.

A morphology is the full physical parameterization of a free-flyer: mass,
inertia tensor, and the fixed layout of 8 unidirectional thrusters. Because
thrusters only push (activations live in [0, 1]), plain rank-6
controllability is not enough; the 8 per-thruster wrench columns

    w_i = (P_i * d_i,  r_i x P_i * d_i)

must *positively* span wrench space, i.e. every force/torque direction must
be reachable by a non-negative combination. ``validate_positive_span``
checks exactly that.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError, ValidationError

THRUSTER_COUNT = 8

_UNIT_TOL = 1e-9
_SPAN_SAMPLES = 10_000


@dataclass(frozen=True)
class ThrusterSpec:
    """One body-fixed thruster: mounting offset, firing direction, max thrust.

    ``direction`` is the direction of the *force* applied to the body, unit
    norm, body frame. ``offset`` is the mounting point relative to the
    center of mass, meters.
    """

    offset: np.ndarray
    direction: np.ndarray
    max_thrust: float

    def __post_init__(self):
        object.__setattr__(self, "offset", np.asarray(self.offset, dtype=float))
        object.__setattr__(self, "direction", np.asarray(self.direction, dtype=float))
        if self.offset.shape != (3,) or self.direction.shape != (3,):
            raise ValidationError("thruster offset and direction must be 3-vectors")
        if abs(np.linalg.norm(self.direction) - 1.0) > _UNIT_TOL:
            raise ValidationError(
                f"thruster direction must be unit norm, got |d|={np.linalg.norm(self.direction):.3e}"
            )
        if not self.max_thrust > 0.0:
            raise ValidationError(f"thruster max thrust must be > 0, got {self.max_thrust}")


@dataclass(frozen=True)
class Morphology:
    """Validated rigid-body and actuator parameterization.

    Immutable after construction; safe to share across parallel episodes.
    Construction checks mass, inertia symmetry/positive-definiteness and
    the thruster count, but not the positive-span property, so partial
    layouts can still be built and fed to ``validate_positive_span``.
    """

    name: str
    mass: float
    inertia: np.ndarray
    thrusters: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "inertia", np.asarray(self.inertia, dtype=float))
        object.__setattr__(self, "thrusters", tuple(self.thrusters))
        if not self.mass > 0.0:
            raise ValidationError(f"mass must be > 0 kg, got {self.mass}")
        if self.inertia.shape != (3, 3):
            raise ValidationError("inertia must be a 3x3 matrix")
        scale = float(np.abs(self.inertia).max())
        if scale <= 0.0 or np.abs(self.inertia - self.inertia.T).max() > 1e-9 * scale:
            raise ValidationError("inertia tensor must be symmetric")
        if np.linalg.eigvalsh(self.inertia).min() <= 0.0:
            raise ValidationError("inertia tensor must be positive definite")
        if len(self.thrusters) != THRUSTER_COUNT:
            raise ValidationError(
                f"expected exactly {THRUSTER_COUNT} thrusters, got {len(self.thrusters)}"
            )

    @property
    def inertia_inv(self):
        return np.linalg.inv(self.inertia)

    def wrench_matrix(self):
        """6x8 matrix whose columns are the unit-activation wrenches."""
        cols = []
        for th in self.thrusters:
            f = th.max_thrust * th.direction
            cols.append(np.concatenate([f, np.cross(th.offset, f)]))
        return np.array(cols).T


@dataclass
class SpanReport:
    """Outcome of the positive-span check of a thruster layout."""

    passed: bool
    rank: int
    min_support: float
    n_samples: int
    force_ok: bool
    torque_ok: bool
    failed_directions: list = field(default_factory=list)

    def summary(self):
        status = "pass" if self.passed else "FAIL"
        return (
            f"positive span: {status} (rank {self.rank}/6, "
            f"min support {self.min_support:.4f} over {self.n_samples} directions, "
            f"force {'ok' if self.force_ok else 'FAIL'}, "
            f"torque {'ok' if self.torque_ok else 'FAIL'})"
        )


def _refine_direction(normed, u, iters=400):
    """Subgradient descent of the support function f(u) = max_i <w_i, u>
    on the unit sphere, starting from u. Returns the refined minimum."""
    def f(v):
        return float((v @ normed).max())

    val = f(u)
    step = 0.3
    for _ in range(iters):
        g = normed[:, int(np.argmax(u @ normed))]
        improved = False
        for _ in range(40):
            cand = u - step * g
            norm = np.linalg.norm(cand)
            if norm > 1e-12:
                cand = cand / norm
                v = f(cand)
                if v < val:
                    u, val = cand, v
                    improved = True
                    step = min(step * 1.3, 0.3)
                    break
            step *= 0.5
        if not improved or step < 1e-14:
            break
    return u, val


def _support_check(columns, n_samples, seed, refine_starts=24):
    """Sampled positive-span test of a set of generator columns.

    For quasi-uniform unit directions u, the cone spans the whole space
    iff no u has all generators on its non-positive side; the margin
    reported is min over u of max_i <u, w_i/|w_i|>. The worst sampled
    directions seed a local descent so thin failure slivers are found too.
    Zero columns add nothing to the cone and are dropped.
    """
    dim = columns.shape[0]
    norms = np.linalg.norm(columns, axis=0)
    keep = norms > 1e-12 * max(norms.max(), 1e-300)
    if not keep.any():
        return -1.0, np.empty((0, dim))
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(n_samples, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    normed = columns[:, keep] / norms[keep]
    support = (dirs @ normed).max(axis=1)
    order = np.argsort(support)
    min_support = float(support[order[0]])
    failed = [dirs[i] for i in order if support[i] <= 0.0][:5]
    for idx in order[:refine_starts]:
        u, val = _refine_direction(normed, dirs[idx].copy())
        if val < min_support:
            min_support = val
            if val <= 0.0 and len(failed) < 5:
                failed.append(u)
    return min_support, np.array(failed) if failed else np.empty((0, dim))


_MARGIN_TOL = 1e-6


def validate_positive_span(morphology, n_samples=_SPAN_SAMPLES, seed=0):
    """Check that the thruster wrench columns positively span wrench space.

    Returns a SpanReport; never raises. The check samples ``n_samples``
    quasi-uniform unit wrench directions, descends from the worst of them,
    and requires the resulting support margin to clear a small tolerance
    plus full rank of the 6x8 wrench matrix. A near-zero margin means some
    wrench direction needs unboundedly large activations, which is as
    unusable as an outright gap. Force-only and torque-only sub-spans are
    reported for diagnosis.
    """
    W = morphology.wrench_matrix()
    rank = int(np.linalg.matrix_rank(W))
    min_support, failed = _support_check(W, n_samples, seed)
    force_ms, _ = _support_check(W[:3], n_samples, seed + 1)
    torque_ms, _ = _support_check(W[3:], n_samples, seed + 2)
    return SpanReport(
        passed=rank == 6 and min_support > _MARGIN_TOL,
        rank=rank,
        min_support=min_support,
        n_samples=n_samples,
        force_ok=np.linalg.matrix_rank(W[:3]) == 3 and force_ms > _MARGIN_TOL,
        torque_ok=np.linalg.matrix_rank(W[3:]) == 3 and torque_ms > _MARGIN_TOL,
        failed_directions=[f for f in failed[:5]],
    )


def _require(mapping, key, context):
    if key not in mapping:
        raise ConfigError(f"{context}: missing field '{key}'")
    return mapping[key]


def morphology_from_dict(doc, context="morphology"):
    """Build and validate a Morphology from a parsed config document.

    Thruster directions are renormalized (any clearly nonzero vector is
    accepted); degenerate near-zero directions are rejected.
    """
    if not isinstance(doc, dict):
        raise ConfigError(f"{context}: document must be a mapping")
    name = str(_require(doc, "name", context))
    mass = float(_require(doc, "mass_kg", context))
    inertia_raw = np.asarray(_require(doc, "inertia_kg_m2", context), dtype=float)
    if inertia_raw.shape == (3,):
        inertia = np.diag(inertia_raw)
    elif inertia_raw.shape == (3, 3):
        inertia = inertia_raw
    else:
        raise ConfigError(
            f"{context}: inertia_kg_m2 must be 3 principal moments or a 3x3 matrix"
        )
    thrusters_raw = _require(doc, "thrusters", context)
    if not isinstance(thrusters_raw, list) or len(thrusters_raw) != THRUSTER_COUNT:
        n = len(thrusters_raw) if isinstance(thrusters_raw, list) else "non-list"
        raise ConfigError(f"{context}: expected {THRUSTER_COUNT} thrusters, got {n}")
    thrusters = []
    for i, t in enumerate(thrusters_raw):
        tctx = f"{context}: thruster {i}"
        d = np.asarray(_require(t, "direction", tctx), dtype=float)
        norm = np.linalg.norm(d)
        if norm < 1e-9:
            raise ConfigError(f"{tctx}: direction is degenerate (near zero)")
        thrusters.append(
            ThrusterSpec(
                offset=np.asarray(_require(t, "offset_m", tctx), dtype=float),
                direction=d / norm,
                max_thrust=float(_require(t, "max_thrust_n", tctx)),
            )
        )
    try:
        return Morphology(name=name, mass=mass, inertia=inertia, thrusters=thrusters)
    except ValidationError as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def load_morphology(source, check_span=True):
    """Load a morphology from a YAML path, file object, or parsed dict.

    When ``check_span`` is set (the default), the layout must pass the
    positive-span validation; a layout without full one-sided wrench
    authority is rejected with the failing report in the message.
    """
    if isinstance(source, dict):
        doc = source
        context = source.get("name", "morphology")
    else:
        path = Path(source)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read morphology file {path}: {exc}") from exc
        try:
            doc = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse morphology file {path}: {exc}") from exc
        context = str(path)
    morph = morphology_from_dict(doc, context=context)
    if check_span:
        report = validate_positive_span(morph)
        if not report.passed:
            raise ConfigError(f"{context}: layout fails span validation: {report.summary()}")
    return morph


@dataclass(frozen=True)
class RandomizationRanges:
    """Uniform scale ranges for domain randomization, all within (0, inf).

    Inertia scaling perturbs principal moments independently and never
    introduces products of inertia, so randomized outputs stay symmetric
    positive definite by construction.
    """

    mass: tuple = (1.0, 1.0)
    inertia: tuple = (1.0, 1.0)
    power: tuple = (1.0, 1.0)

    def __post_init__(self):
        for label, rng in (("mass", self.mass), ("inertia", self.inertia), ("power", self.power)):
            lo, hi = rng
            if not (0.0 < lo <= hi):
                raise ValidationError(f"{label} scale range must satisfy 0 < lo <= hi, got {rng}")


_RANDOMIZE_RETRIES = 20


def randomize_morphology(base, ranges, rng):
    """Scale mass, principal inertia moments, and per-thruster power.

    Geometry (offsets and directions) is preserved. Each scale factor is
    an independent uniform draw from its range; the result is re-validated
    and resampled up to a bounded retry count before failing.
    """
    for _ in range(_RANDOMIZE_RETRIES):
        mass = base.mass * rng.uniform(*ranges.mass)
        evals, evecs = np.linalg.eigh(base.inertia)
        scaled = evals * rng.uniform(*ranges.inertia, size=3)
        inertia = evecs @ np.diag(scaled) @ evecs.T
        inertia = 0.5 * (inertia + inertia.T)
        thrusters = [
            ThrusterSpec(
                offset=t.offset,
                direction=t.direction,
                max_thrust=t.max_thrust * rng.uniform(*ranges.power),
            )
            for t in base.thrusters
        ]
        try:
            morph = Morphology(name=base.name, mass=mass, inertia=inertia, thrusters=thrusters)
        except ValidationError:
            continue
        # Positive column scaling cannot break the span, so a light re-check
        # (rank plus sampled support, no descent) is enough of a guard here.
        W = morph.wrench_matrix()
        ms, _ = _support_check(W, 500, seed=0, refine_starts=0)
        if np.linalg.matrix_rank(W) == 6 and ms > 0.0:
            return morph
    raise ValidationError(
        f"randomized morphology failed validation after {_RANDOMIZE_RETRIES} attempts"
    )
