"""Rollout logs, post-hoc tracking metrics, and delimited serialization.

The CSV column order is fixed and part of the file contract:

    t, px, py, pz, qw, qx, qy, qz,
    ref_px, ref_py, ref_pz, ref_qw, ref_qx, ref_qy, ref_qz,
    a1..a8, reward, r_track, r_align, r_stable, p_mag, p_rate

Floats are written with ``repr``, which round-trips exactly, so identical
logs serialize to identical bytes.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import quat
from .dynamics import SpacecraftState
from .errors import ValidationError
from .trajectories import ReferenceSample

CSV_COLUMNS = (
    ["t", "px", "py", "pz", "qw", "qx", "qy", "qz"]
    + ["ref_px", "ref_py", "ref_pz", "ref_qw", "ref_qx", "ref_qy", "ref_qz"]
    + [f"a{i}" for i in range(1, 9)]
    + ["reward", "r_track", "r_align", "r_stable", "p_mag", "p_rate"]
)

TERM_KEYS = ("r_track", "r_align", "r_stable", "p_mag", "p_rate")


@dataclass(frozen=True)
class RolloutStep:
    t: float
    state: SpacecraftState
    reference: ReferenceSample
    action: np.ndarray
    reward: float
    terms: dict


@dataclass
class RolloutLog:
    """Per-step records of one episode plus identifying metadata."""

    dt: float
    steps: list = field(default_factory=list)
    seed: object = None
    morphology_name: str = ""
    regime: str = ""
    config_id: str = ""

    def append(self, step):
        self.steps.append(step)

    def __len__(self):
        return len(self.steps)


@dataclass(frozen=True)
class EpisodeMetrics:
    rms_pos_err: float        # m
    mean_geodesic_err: float  # rad
    control_jerk: float       # 1/s, mean |a_t - a_{t-1}|^2 / dt
    smoothness: float         # mean |a_t - a_{t-1}|
    mean_action_sq: float
    mean_reward: float
    total_reward: float
    n_steps: int


def episode_metrics(log):
    """Tracking and actuation summary of a rollout.

    Position error is the RMS of |p_ref - p|; orientation error is the mean
    geodesic angle of the relative rotation. Action-rate metrics are
    averaged over consecutive step pairs.
    """
    if len(log) == 0:
        raise ValidationError("cannot compute metrics of an empty rollout log")
    pos_sq = []
    geo = []
    rewards = []
    actions = []
    for s in log.steps:
        dp = s.reference.position - s.state.position
        pos_sq.append(float(dp @ dp))
        dR = s.state.rotation().T @ quat.to_matrix(s.reference.orientation)
        geo.append(quat.geodesic_angle(dR))
        rewards.append(s.reward)
        actions.append(np.asarray(s.action, dtype=float))
    actions = np.array(actions)
    if len(actions) > 1:
        diffs = np.linalg.norm(np.diff(actions, axis=0), axis=1)
        jerk = float(np.mean(diffs**2) / log.dt)
        smooth = float(np.mean(diffs))
    else:
        jerk = 0.0
        smooth = 0.0
    return EpisodeMetrics(
        rms_pos_err=float(np.sqrt(np.mean(pos_sq))),
        mean_geodesic_err=float(np.mean(geo)),
        control_jerk=jerk,
        smoothness=smooth,
        mean_action_sq=float(np.mean(np.sum(actions**2, axis=1))),
        mean_reward=float(np.mean(rewards)),
        total_reward=float(np.sum(rewards)),
        n_steps=len(log),
    )


def _fmt(x):
    return repr(float(x))


def _csv_row(step):
    s, r = step.state, step.reference
    cells = (
        [step.t]
        + list(s.position) + list(s.orientation)
        + list(r.position) + list(r.orientation)
        + list(step.action)
        + [step.reward]
        + [step.terms.get(k, 0.0) for k in TERM_KEYS]
    )
    return ",".join(_fmt(c) for c in cells)


def write_rollout_csv(log, sink):
    """Write the fixed-column CSV variant. ``sink`` is a path or file object."""
    lines = [",".join(CSV_COLUMNS)]
    lines.extend(_csv_row(s) for s in log.steps)
    text = "\n".join(lines) + "\n"
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        with open(sink, "w") as fh:
            fh.write(text)


def read_rollout_csv(source, dt=None):
    """Parse a rollout CSV back into a log.

    The CSV does not carry velocities or metadata; those fields come back
    zeroed/empty. Round-tripping the carried columns is byte-exact.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source) as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if ln]
    header = lines[0].split(",")
    if header != CSV_COLUMNS:
        raise ValidationError("rollout CSV header does not match the documented columns")
    rows = [[float(c) for c in ln.split(",")] for ln in lines[1:]]
    if dt is None:
        dt = rows[1][0] - rows[0][0] if len(rows) > 1 else 1.0
    log = RolloutLog(dt=dt)
    for row in rows:
        t = row[0]
        # quaternions are stored unit-norm; do not renormalize, so the
        # parsed values round-trip byte-exactly
        state = SpacecraftState(
            position=row[1:4],
            orientation=row[4:8],
            lin_velocity=np.zeros(3),
            ang_velocity=np.zeros(3),
        )
        ref = ReferenceSample(
            time=t,
            position=np.asarray(row[8:11]),
            orientation=np.asarray(row[11:15]),
            velocity=np.zeros(3),
        )
        terms = dict(zip(TERM_KEYS, row[24:29]))
        log.append(RolloutStep(t=t, state=state, reference=ref,
                               action=np.asarray(row[15:23]), reward=row[23], terms=terms))
    return log


def _jsonl_record(step):
    s, r = step.state, step.reference
    return {
        "t": step.t,
        "position": list(s.position),
        "orientation": list(s.orientation),
        "lin_velocity": list(s.lin_velocity),
        "ang_velocity": list(s.ang_velocity),
        "ref_position": list(r.position),
        "ref_orientation": list(r.orientation),
        "ref_velocity": list(r.velocity),
        "action": list(step.action),
        "reward": step.reward,
        "terms": {k: step.terms.get(k, 0.0) for k in TERM_KEYS},
    }


def write_rollout_jsonl(log, sink):
    """Write the JSON-lines variant: one metadata line, then one line per step."""
    meta = {
        "meta": {
            "dt": log.dt,
            "seed": log.seed,
            "morphology": log.morphology_name,
            "regime": log.regime,
            "config_id": log.config_id,
        }
    }
    lines = [json.dumps(meta, sort_keys=True)]
    lines.extend(json.dumps(_jsonl_record(s), sort_keys=True) for s in log.steps)
    text = "\n".join(lines) + "\n"
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        with open(sink, "w") as fh:
            fh.write(text)


def read_rollout_jsonl(source):
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source) as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if ln]
    meta = json.loads(lines[0])["meta"]
    log = RolloutLog(
        dt=meta["dt"],
        seed=meta["seed"],
        morphology_name=meta["morphology"],
        regime=meta["regime"],
        config_id=meta["config_id"],
    )
    for ln in lines[1:]:
        rec = json.loads(ln)
        state = SpacecraftState(
            position=rec["position"],
            orientation=rec["orientation"],
            lin_velocity=rec["lin_velocity"],
            ang_velocity=rec["ang_velocity"],
        )
        ref = ReferenceSample(
            time=rec["t"],
            position=np.asarray(rec["ref_position"]),
            orientation=np.asarray(rec["ref_orientation"]),
            velocity=np.asarray(rec["ref_velocity"]),
        )
        log.append(RolloutStep(t=rec["t"], state=state, reference=ref,
                               action=np.asarray(rec["action"]),
                               reward=rec["reward"], terms=rec["terms"]))
    return log
