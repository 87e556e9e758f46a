"""Flows, fundamental matrices, switched/relaxed trajectories, section times.

Two explicit integrators are provided: classical fixed-step RK4 and the
adaptive Dormand-Prince 5(4) pair. Backward time is handled by integrating
the negated field forward.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import MaxStepsExceeded, NoConvergence, StepSizeUnderflow, TransversalityError, ValidityError
from .field import FieldPair, VectorField

__all__ = [
    "IntegratorConfig",
    "SwitchSchedule",
    "Trajectory",
    "flow",
    "flow_variational",
    "integrate",
    "switched_trajectory",
    "relaxed_trajectory",
    "time_to_hyperplane",
    "dynamics_residual",
]

METHODS = ("rk4", "rkdp45")


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rkdp45"
    h: float = 1e-3
    rtol: float = 1e-10
    atol: float = 1e-12
    max_steps: int = 10**7

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not (self.h > 0 and self.rtol > 0 and self.atol > 0):
            raise ValueError("h, rtol and atol must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")

    def tighter(self) -> "IntegratorConfig":
        """A decade tighter tolerances and half the sampling step."""
        return replace(self, rtol=self.rtol / 10, atol=self.atol / 10, h=self.h / 2)

    def with_(self, **changes) -> "IntegratorConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


DEFAULT = IntegratorConfig()


# -- Dormand-Prince 5(4) tableau ----------------------------------------------
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B_LOW = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B - _B_LOW


def _rms(v):
    return math.sqrt(float(np.dot(v, v)) / v.size)


def _initial_step(rhs, y0, f0, T, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0, d1 = _rms(y0 / scale), _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, T)
    f1 = rhs(y0 + h0 * f0)
    d2 = _rms((f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    # near-zero states make d0/d1 meaningless; the controller recovers from a coarse guess
    return min(max(100 * h0, 1e-6 * T), h1, T)


def _dp45(rhs, y0, T, cfg, record):
    t = 0.0
    y = y0
    f = rhs(y)
    nodes = [(0.0, y, f)] if record else None
    h = _initial_step(rhs, y, f, T, cfg.rtol, cfg.atol)
    attempts = 0
    while t < T:
        attempts += 1
        if attempts > cfg.max_steps:
            raise MaxStepsExceeded(f"exceeded {cfg.max_steps} steps at t={t}")
        last = t + h >= T - 1e-12 * T
        if last:
            h = T - t
        elif h < 10 * np.spacing(max(t, T)):
            raise StepSizeUnderflow(f"step size {h} underflow at t={t}")
        K = [f]
        for i in range(1, 7):
            a = _A[i]
            incr = a[0] * K[0]
            for j in range(1, i):
                if a[j] != 0.0:
                    incr = incr + a[j] * K[j]
            K.append(rhs(y + h * incr))
        y_new = y + h * sum(b * k for b, k in zip(_B, K) if b != 0.0)
        err = h * sum(e * k for e, k in zip(_E, K) if e != 0.0)
        scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = _rms(err / scale)
        if err_norm <= 1.0:
            t = T if last else t + h
            y = y_new
            f = K[6]  # first-same-as-last
            if record:
                nodes.append((t, y, f))
            factor = 10.0 if err_norm == 0.0 else min(10.0, max(0.2, 0.9 * err_norm**-0.2))
        else:
            factor = max(0.2, 0.9 * err_norm**-0.2)
        h *= factor
    return y, nodes


def _rk4(rhs, y0, T, cfg, record):
    steps = max(1, math.ceil(T / cfg.h - 1e-9))
    if steps > cfg.max_steps:
        raise MaxStepsExceeded(f"{steps} fixed steps exceed max_steps={cfg.max_steps}")
    h = T / steps
    y = y0
    nodes = [(0.0, y, rhs(y))] if record else None
    for k in range(steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if record:
            nodes.append(((k + 1) * h if k + 1 < steps else T, y, rhs(y)))
    return y, nodes


def integrate(rhs: Callable, y0, t: float, cfg: IntegratorConfig = DEFAULT, record: bool = False):
    """Integrate the autonomous system y' = rhs(y) for signed time ``t``.

    Returns ``(y(t), nodes)`` where ``nodes`` is a list of ``(s, y, y')`` at
    accepted steps (``s`` measured in |t|) when ``record`` is set.
    """
    y0 = np.array(y0, dtype=float)
    if not math.isfinite(t):
        raise ValueError("integration time must be finite")
    if t == 0.0:
        return y0.copy(), ([(0.0, y0.copy(), rhs(y0))] if record else None)
    if t < 0:
        fwd = rhs

        def rhs(y):
            return -fwd(y)

    stepper = _dp45 if cfg.method == "rkdp45" else _rk4
    return stepper(rhs, y0, abs(t), cfg, record)


def flow(f: VectorField, x0, t: float, cfg: IntegratorConfig = DEFAULT) -> np.ndarray:
    """Point reached from ``x0`` after time ``t`` under ``f``."""
    return integrate(f, x0, t, cfg)[0]


def flow_variational(f: VectorField, x0, t: float, cfg: IntegratorConfig = DEFAULT):
    """Flow together with the fundamental matrix d(flow)/d(x0)."""
    n = f.dim

    def rhs(z):
        x = z[:n]
        psi = z[n:].reshape(n, n)
        return np.concatenate([f(x), (f.jacobian(x) @ psi).ravel()])

    z0 = np.concatenate([np.asarray(x0, dtype=float), np.eye(n).ravel()])
    z = integrate(rhs, z0, t, cfg)[0]
    return z[:n], z[n:].reshape(n, n)


def _hermite(nodes, times):
    """Cubic Hermite interpolation through recorded (t, y, y') nodes."""
    ts = np.array([nd[0] for nd in nodes])
    out = np.empty((len(times), nodes[0][1].size))
    for row, s in enumerate(times):
        k = int(np.clip(np.searchsorted(ts, s, side="right") - 1, 0, len(ts) - 2)) if len(ts) > 1 else 0
        if len(ts) == 1:
            out[row] = nodes[0][1]
            continue
        t0, y0, f0 = nodes[k]
        t1, y1, f1 = nodes[k + 1]
        h = t1 - t0
        u = (s - t0) / h
        h00 = (1 + 2 * u) * (1 - u) ** 2
        h10 = u * (1 - u) ** 2
        h01 = u * u * (3 - 2 * u)
        h11 = u * u * (u - 1)
        out[row] = h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1
    return out


# -- schedules and trajectories ------------------------------------------------

@dataclass(frozen=True)
class SwitchSchedule:
    segments: tuple  # ((field_index, duration), ...)

    def __post_init__(self):
        segs = tuple((int(i), float(d)) for i, d in self.segments)
        if not segs:
            raise ValueError("switch schedule must be nonempty")
        for i, d in segs:
            if i not in (1, 2):
                raise ValueError(f"field index must be 1 or 2, got {i}")
            if not (d > 0 and math.isfinite(d)):
                raise ValueError(f"durations must be positive and finite, got {d}")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def parse(cls, text: str) -> "SwitchSchedule":
        """Parse ``"1:0.5,2:0.693"``."""
        segs = []
        for token in text.split(","):
            parts = token.strip().split(":")
            if len(parts) != 2:
                raise ValueError(f"malformed schedule token {token!r}")
            try:
                segs.append((int(parts[0]), float(parts[1])))
            except ValueError:
                raise ValueError(f"malformed schedule token {token!r}") from None
        return cls(tuple(segs))

    @property
    def total(self) -> float:
        return sum(d for _, d in self.segments)

    def __iter__(self):
        return iter(self.segments)

    def __len__(self):
        return len(self.segments)


@dataclass
class Trajectory:
    """Sampled piecewise trajectory.

    ``seg[k]`` labels the interval ``[t[k], t[k+1]]``: 1 or 2 for a pure
    field, a float weight for the relaxed field. The final sample repeats
    the last label.
    """

    t: np.ndarray
    x: np.ndarray
    seg: list = field(default_factory=list)

    @property
    def end(self) -> np.ndarray:
        return self.x[-1]

    @property
    def start(self) -> np.ndarray:
        return self.x[0]

    def __len__(self):
        return len(self.t)

    def rows(self):
        for k in range(len(self.t)):
            yield self.t[k], self.x[k], self.seg[k]

    def write_csv(self, stream) -> None:
        n = self.x.shape[1]
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["t", *(f"x{i + 1}" for i in range(n)), "seg"])
        for t, x, seg in self.rows():
            label = str(seg) if isinstance(seg, int) else f"{seg:.17g}"
            writer.writerow([f"{t:.17g}", *(f"{v:.17g}" for v in x), label])


def _sample_segment(rhs, x0, duration, cfg):
    y_end, nodes = integrate(rhs, x0, duration, cfg, record=True)
    count = max(1, math.ceil(duration / cfg.h - 1e-9))
    times = np.arange(count) * (duration / count)
    samples = _hermite(nodes, times)
    samples[0] = x0
    return times, samples, y_end


def switched_trajectory(pair: FieldPair, x0, sched: SwitchSchedule, cfg: IntegratorConfig = DEFAULT) -> Trajectory:
    """Concatenate flows in schedule order, sampled at spacing <= cfg.h."""
    if not isinstance(sched, SwitchSchedule):
        sched = SwitchSchedule(tuple(sched))
    x = np.array(x0, dtype=float)
    ts, xs, labels = [], [], []
    t0 = 0.0
    for index, duration in sched:
        times, samples, x = _sample_segment(pair.field(index), x, duration, cfg)
        ts.append(t0 + times)
        xs.append(samples)
        labels.extend([index] * len(times))
        t0 += duration
    ts.append(np.array([t0]))
    xs.append(x[None, :])
    labels.append(labels[-1])
    return Trajectory(np.concatenate(ts), np.vstack(xs), labels)


class _Relaxed:
    """The convex combination (1 - lam) f1 + lam f2."""

    def __init__(self, pair: FieldPair, lam: float):
        self.pair = pair
        self.lam = lam
        self.dim = pair.dim

    def __call__(self, x):
        return (1.0 - self.lam) * self.pair.f1(x) + self.lam * self.pair.f2(x)

    def jacobian(self, x):
        return (1.0 - self.lam) * self.pair.f1.jacobian(x) + self.lam * self.pair.f2.jacobian(x)


def relaxed_field(pair: FieldPair, lam: float) -> _Relaxed:
    return _Relaxed(pair, lam)


def relaxed_trajectory(pair: FieldPair, x0, lam: float, tspan: Sequence[float], cfg: IntegratorConfig = DEFAULT) -> Trajectory:
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"relaxation weight must lie in [0, 1], got {lam}")
    a, b = float(tspan[0]), float(tspan[1])
    if not b > a:
        raise ValueError("tspan must be increasing")
    times, samples, end = _sample_segment(_Relaxed(pair, lam), np.array(x0, dtype=float), b - a, cfg)
    return Trajectory(
        np.concatenate([a + times, [b]]),
        np.vstack([samples, end[None, :]]),
        [float(lam)] * (len(times) + 1),
    )


def _field_for_label(pair: FieldPair, label):
    if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
        return pair.field(int(label))
    return _Relaxed(pair, float(label))


def dynamics_residual(pair: FieldPair, traj: Trajectory) -> float:
    """Largest gap between a chord slope and the trapezoidal field average."""
    worst = 0.0
    cache = {}
    for k in range(len(traj.t) - 1):
        dt = traj.t[k + 1] - traj.t[k]
        label = traj.seg[k]
        if label not in cache:
            cache[label] = _field_for_label(pair, label)
        f = cache[label]
        slope = (traj.x[k + 1] - traj.x[k]) / dt
        avg = 0.5 * (f(traj.x[k]) + f(traj.x[k + 1]))
        worst = max(worst, float(np.linalg.norm(slope - avg)))
    return worst


# -- section crossing ------------------------------------------------------------

def time_to_hyperplane(
    f: VectorField,
    x,
    normal,
    anchor,
    cfg: IntegratorConfig = DEFAULT,
    t_max: float = math.inf,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> float:
    """Signed time tau with <flow(f, x, -tau) - anchor, normal> = 0.

    Newton on t -> <flow(f, x, t) - anchor, normal>; the answer is -t.
    """
    x = np.asarray(x, dtype=float)
    normal = np.asarray(normal, dtype=float)
    anchor = np.asarray(anchor, dtype=float)

    def slope(p):
        fp = f(p)
        d = float(fp @ normal)
        if abs(d) < 1e-8 * float(np.linalg.norm(fp)) or d == 0.0:
            raise TransversalityError(f"field is tangent to the section at {p}")
        return d

    t = -float((x - anchor) @ normal) / slope(x)
    for _ in range(max_iter):
        if abs(t) > t_max:
            raise ValidityError(f"section time {-t} exceeds the bound {t_max}")
        p = flow(f, x, t, cfg)
        g = float((p - anchor) @ normal)
        if abs(g) <= tol:
            return -t + 0.0
        dt = g / slope(p)
        t -= dt
        if abs(dt) <= 4 * np.finfo(float).eps * max(1.0, abs(t)):
            return -t + 0.0
    raise NoConvergence(f"section time did not converge from {x}")
