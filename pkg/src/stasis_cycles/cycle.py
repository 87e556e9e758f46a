"""Small two-cycles near a non-degenerate stasis point.

Two routes are implemented:

* the *reduced* route straightens f1 with a flow-box chart, follows f2 in
  the (n-1)-dimensional section coordinates (the reduced action), solves
  G(y, d) = (Psi(y, d) - Psi(y, -d)) / 2d = 0 for a loop and closes it with
  an f1 arc;
* the *direct* route shoots on (z, kappa) for
  flow_f2(flow_f1(z, kappa), t2) = z with a phase condition.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    ClosureError,
    DegenerateCycle,
    DegenerateStasis,
    NoConvergence,
    NotPlanar,
    OpenCurve,
    SingularJacobian,
    StasisCyclesError,
    ValidityError,
    ZeroField,
)
from .field import FieldPair, VectorField
from .ode import (
    DEFAULT,
    IntegratorConfig,
    SwitchSchedule,
    Trajectory,
    dynamics_residual,
    flow,
    flow_variational,
    switched_trajectory,
    time_to_hyperplane,
)
from .stasis import CONDITION_LIMIT, StasisPoint, find_stasis_fixed_lambda, is_degenerate

__all__ = [
    "FlowBoxChart",
    "ReducedAction",
    "LoopResult",
    "TwoCycle",
    "FamilyMember",
    "VerificationReport",
    "Theorem1Check",
    "ContainmentResult",
    "make_chart",
    "reduced_action",
    "g_map",
    "find_loop",
    "check_theorem1_hypotheses",
    "find_two_cycle_reduced",
    "find_two_cycle_direct",
    "cycle_family",
    "verify_two_cycle",
    "stasis_in_cycle_check",
]

CLOSURE_TOL = 1e-7
DYNAMICS_TOL = 1e-4
KAPPA_FLOOR = 1e-12


def _section_basis(normal: np.ndarray) -> np.ndarray:
    """Orthonormal complement of ``normal`` from a Householder reflection."""
    n = normal.size
    v = normal.copy()
    v[0] += 1.0 if normal[0] >= 0 else -1.0
    H = np.eye(n) - 2.0 * np.outer(v, v) / float(v @ v)
    return H[:, 1:]


# -- flow-box chart --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FlowBoxChart:
    """Coordinates (tau, s) in which f1 reads (1, 0, ..., 0).

    ``to_chart(p)`` flows p back along f1 to the hyperplane through ``base``
    orthogonal to ``normal``; tau is the time taken and s the coordinates of
    the landing point in ``basis``.
    """

    base: np.ndarray
    normal: np.ndarray
    basis: np.ndarray
    f1: VectorField
    cfg: IntegratorConfig = DEFAULT
    r_max: float = 0.5
    t_max: float = 2.0

    @property
    def dim(self) -> int:
        return self.base.size

    def to_chart(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if np.linalg.norm(p - self.base) > self.r_max:
            raise ValidityError(f"point {p} is outside the chart radius {self.r_max}")
        tau = time_to_hyperplane(self.f1, p, self.normal, self.base, self.cfg, t_max=self.t_max)
        landing = flow(self.f1, p, -tau, self.cfg)
        return np.concatenate([[tau], self.basis.T @ (landing - self.base)])

    def from_chart(self, tau: float, s) -> np.ndarray:
        tau = float(np.squeeze(tau))
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if abs(tau) > self.t_max or np.linalg.norm(s) > self.r_max:
            raise ValidityError(f"chart coordinates ({tau}, {s}) outside the validity region")
        return flow(self.f1, self.base + self.basis @ s, tau, self.cfg)

    def section(self, p) -> np.ndarray:
        return self.to_chart(p)[1:]


def make_chart(f1: VectorField, x_star, cfg: IntegratorConfig = DEFAULT, r_max: float = 0.5, t_max: float | None = None) -> FlowBoxChart:
    x_star = np.array(x_star, dtype=float)
    v = f1(x_star)
    speed = float(np.linalg.norm(v))
    if speed <= 1e-10:
        raise ZeroField(f"f1 vanishes at the chart base {x_star}")
    normal = v / speed
    if t_max is None:
        t_max = 2.0 / speed
    return FlowBoxChart(x_star, normal, _section_basis(normal), f1, cfg, r_max, t_max)


# -- reduced action ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ReducedAction:
    """Psi(y, t): section coordinates of flow_f2(from_chart(0, y), t)."""

    chart: FlowBoxChart
    f2: VectorField

    @property
    def dim(self) -> int:
        return self.chart.dim - 1

    @property
    def t_max(self) -> float:
        return self.chart.t_max

    @property
    def base(self) -> np.ndarray:
        return self.chart.base

    def point(self, y) -> np.ndarray:
        return self.chart.from_chart(0.0, y)

    def __call__(self, y, t: float) -> np.ndarray:
        q = flow(self.f2, self.point(y), t, self.chart.cfg)
        return self.chart.section(q)


def _require_nondegenerate(s: StasisPoint):
    if s.degenerate:
        raise DegenerateStasis(
            f"stasis point {s.x} is degenerate (sigma_min={s.sigma_min:.3e}); "
            "d/dx(k1 f1 + k2 f2) is singular, no two-cycle construction applies"
        )


def reduced_action(pair: FieldPair, s: StasisPoint, cfg: IntegratorConfig = DEFAULT, r_max: float = 0.5) -> ReducedAction:
    _require_nondegenerate(s)
    return ReducedAction(make_chart(pair.f1, s.x, cfg, r_max=r_max), pair.f2)


def g_map(A, y, delta: float, h: float = 1e-6) -> np.ndarray:
    """(Psi(y, d) - Psi(y, -d)) / 2d, and dPsi/dt(y, 0) at d = 0."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if abs(delta) > A.t_max:
        raise ValidityError(f"|delta|={abs(delta)} exceeds t_max={A.t_max}")
    if delta == 0.0:
        delta = h
    return (A(y, delta) - A(y, -delta)) / (2.0 * delta)


def _fd_jacobian(fun, y, h_rel=1e-5):
    h = h_rel * max(1.0, float(np.linalg.norm(y)))
    cols = []
    for j in range(y.size):
        e = np.zeros(y.size)
        e[j] = h
        cols.append((fun(y + e) - fun(y - e)) / (2.0 * h))
    return np.column_stack(cols)


@dataclass
class LoopResult:
    z: np.ndarray
    delta: float
    residual: float
    max_excursion: float
    jacobian_sigma_min: float
    iterations: int

    @property
    def period(self) -> float:
        return 2.0 * self.delta

    @property
    def tau0(self) -> float:
        return -self.delta


def find_loop(A, guess, delta: float, tol: float = 1e-10, max_iter: int = 50) -> LoopResult:
    """Damped Newton on y -> G(y, delta) with a central-difference Jacobian.

    A zero with singular dG/dy at which the orbit does not move at all is
    rejected as SingularJacobian: it is a stationary point, not a loop.
    """
    if not 0.0 < delta <= A.t_max:
        raise ValueError(f"delta must lie in (0, {A.t_max}], got {delta}")
    y = np.atleast_1d(np.array(guess, dtype=float))
    G = g_map(A, y, delta)
    r = float(np.linalg.norm(G))
    J = None
    iterations = 0
    while r > tol:
        if iterations == max_iter:
            raise NoConvergence(f"loop search did not converge (|G|={r:.3e})")
        iterations += 1
        J = _fd_jacobian(lambda v: g_map(A, v, delta), y)
        sv = np.linalg.svd(J, compute_uv=False)
        if is_degenerate(sv[-1], sv[0]) or sv[0] > CONDITION_LIMIT * sv[-1]:
            raise SingularJacobian(
                f"dG/dy is singular at y={y} (sigma_min={sv[-1]:.3e}); the mixed partial of the action is not invertible"
            )
        step = np.linalg.solve(J, -G)
        alpha = 1.0
        for _ in range(31):
            trial = y + alpha * step
            try:
                G_trial = g_map(A, trial, delta)
                r_trial = float(np.linalg.norm(G_trial))
            except (ValidityError, ArithmeticError):
                r_trial = math.inf
            if r_trial < r:
                break
            alpha *= 0.5
        else:
            raise NoConvergence(f"loop line search failed at y={y} (|G|={r:.3e})")
        y, G, r, J = trial, G_trial, r_trial, None
    if J is None:
        J = _fd_jacobian(lambda v: g_map(A, v, delta), y)
    sv = np.linalg.svd(J, compute_uv=False)
    plus, minus = A(y, delta), A(y, -delta)
    if is_degenerate(sv[-1], sv[0]):
        moved = max(np.linalg.norm(plus - y), np.linalg.norm(minus - y))
        if moved <= 2.0 * delta * tol:
            raise SingularJacobian(f"G vanishes identically near y={y} and the orbit is stationary: no loop")
    excursion = max(float(np.linalg.norm(A(y, t))) for t in np.linspace(-delta, delta, 21))
    return LoopResult(y, float(delta), float(np.linalg.norm(plus - minus)), excursion, float(sv[-1]), iterations)


@dataclass(frozen=True)
class Theorem1Check:
    stationarity_norm: float
    sigma_min: float
    mixed_partial: np.ndarray


def check_theorem1_hypotheses(A, y0=None, h_t: float = 1e-6, h_y: float = 1e-4) -> Theorem1Check:
    """Stationarity |dPsi/dt(y0, 0)| and the smallest singular value of d2Psi/dy dt."""
    y0 = np.zeros(A.dim) if y0 is None else np.atleast_1d(np.asarray(y0, dtype=float))

    def dpsi_dt(y):
        return (A(y, h_t) - A(y, -h_t)) / (2.0 * h_t)

    stationarity = float(np.linalg.norm(dpsi_dt(y0)))
    mixed = _fd_jacobian(dpsi_dt, y0, h_rel=h_y)
    sigma = float(np.linalg.svd(mixed, compute_uv=False)[-1])
    return Theorem1Check(stationarity, sigma, mixed)


# -- two-cycles ----------------------------------------------------------------

@dataclass
class TwoCycle:
    """One f1 arc of length kappa from ``start`` followed by one f2 arc of length t2."""

    start: np.ndarray
    kappa: float
    t2: float
    closure_residual: float
    amplitude: float
    stasis_x: np.ndarray
    stasis_lambda: float
    trajectory: Trajectory | None = None
    method: str = "reduced"
    dynamics_residual: float = math.nan
    loop: LoopResult | None = None
    section_gap: float | None = None

    @property
    def period(self) -> float:
        return self.kappa + self.t2

    @property
    def schedule(self) -> SwitchSchedule:
        return SwitchSchedule(((1, self.kappa), (2, self.t2)))

    def to_dict(self, samples: int = 0) -> dict:
        out = {
            "start": [float(v) for v in self.start],
            "kappa": float(self.kappa),
            "t2": float(self.t2),
            "period": float(self.period),
            "closure_residual": float(self.closure_residual),
            "amplitude": float(self.amplitude),
            "stasis": {"x": [float(v) for v in self.stasis_x], "lambda": float(self.stasis_lambda)},
            "method": self.method,
        }
        if samples and self.trajectory is not None:
            traj = self.trajectory
            idx = np.unique(np.linspace(0, len(traj) - 1, min(samples, len(traj))).round().astype(int))
            out["samples"] = [[float(traj.t[k]), *map(float, traj.x[k]), traj.seg[k]] for k in idx]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TwoCycle":
        try:
            stasis = data["stasis"]
            return cls(
                start=np.array(data["start"], dtype=float),
                kappa=float(data["kappa"]),
                t2=float(data["t2"]),
                closure_residual=float(data.get("closure_residual", math.nan)),
                amplitude=float(data.get("amplitude", math.nan)),
                stasis_x=np.array(stasis["x"], dtype=float),
                stasis_lambda=float(stasis["lambda"]),
                method=str(data.get("method", "unknown")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed two-cycle record: {exc}") from None


def _assemble(pair, stasis_x, stasis_lambda, start, kappa, t2, cfg, method, **extra) -> TwoCycle:
    if not kappa > KAPPA_FLOOR:
        raise DegenerateCycle(f"f1 arc duration kappa={kappa:.3e} is not positive")
    traj = switched_trajectory(pair, start, SwitchSchedule(((1, kappa), (2, t2))), cfg)
    closure = float(np.linalg.norm(traj.end - start))
    if closure > CLOSURE_TOL:
        raise ClosureError(f"cycle does not close: residual {closure:.3e}")
    amplitude = float(np.max(np.linalg.norm(traj.x - stasis_x, axis=1)))
    return TwoCycle(
        start=np.asarray(start, dtype=float),
        kappa=float(kappa),
        t2=float(t2),
        closure_residual=closure,
        amplitude=amplitude,
        stasis_x=np.asarray(stasis_x, dtype=float),
        stasis_lambda=float(stasis_lambda),
        trajectory=traj,
        method=method,
        dynamics_residual=dynamics_residual(pair, traj),
        **extra,
    )


def find_two_cycle_reduced(
    pair: FieldPair,
    s: StasisPoint,
    delta: float,
    cfg: IntegratorConfig = DEFAULT,
    guess=None,
    tol: float = 1e-10,
) -> TwoCycle:
    """Loop of the reduced action at half-period ``delta``, closed by an f1 arc.

    The returned cycle starts at the beginning of its f1 arc.
    """
    A = reduced_action(pair, s, cfg)
    y0 = np.zeros(A.dim) if guess is None else guess
    loop = find_loop(A, y0, delta, tol=tol)
    chart = A.chart
    p = chart.from_chart(0.0, loop.z)
    q_minus = flow(pair.f2, p, -delta, cfg)
    q_plus = flow(pair.f2, p, delta, cfg)
    c_minus, c_plus = chart.to_chart(q_minus), chart.to_chart(q_plus)
    kappa = float(c_minus[0] - c_plus[0])
    gap = float(np.linalg.norm(c_minus[1:] - c_plus[1:]))
    return _assemble(pair, s.x, s.lam, q_plus, kappa, 2.0 * delta, cfg, "reduced", loop=loop, section_gap=gap)


def find_two_cycle_direct(
    pair: FieldPair,
    s: StasisPoint,
    t2: float,
    guess=None,
    cfg: IntegratorConfig = DEFAULT,
    anchor=None,
    tol: float = 1e-11,
    max_iter: int = 50,
) -> TwoCycle:
    """Shooting on (z, kappa) with z on the hyperplane through ``anchor``.

    ``anchor`` defaults to the stasis location; the hyperplane is orthogonal
    to f1 there.
    """
    if not t2 > 0:
        raise ValueError(f"f2 arc duration must be positive, got {t2}")
    _require_nondegenerate(s)
    f1, f2 = pair.f1, pair.f2
    v = f1(s.x)
    if np.linalg.norm(v) <= 1e-10:
        raise ZeroField(f"f1 vanishes at the stasis point {s.x}")
    normal = v / np.linalg.norm(v)
    anchor = s.x if anchor is None else np.asarray(anchor, dtype=float)
    if guess is None:
        z, kappa = anchor.copy(), float(t2)
    else:
        z, kappa = np.array(guess[0], dtype=float), float(guess[1])
    n = pair.dim

    def residual(z, kappa):
        end = flow(f2, flow(f1, z, kappa, cfg), t2, cfg)
        return np.append(end - z, (z - anchor) @ normal)

    for _ in range(max_iter + 1):
        w, psi1 = flow_variational(f1, z, kappa, cfg)
        end, psi2 = flow_variational(f2, w, t2, cfg)
        R = np.append(end - z, (z - anchor) @ normal)
        r = float(np.linalg.norm(R))
        if r <= tol:
            break
        J = np.zeros((n + 1, n + 1))
        J[:n, :n] = psi2 @ psi1 - np.eye(n)
        J[:n, n] = psi2 @ f1(w)
        J[n, :n] = normal
        if np.linalg.cond(J) > CONDITION_LIMIT:
            raise SingularJacobian(f"shooting Jacobian is singular at z={z}, kappa={kappa}")
        step = np.linalg.solve(J, -R)
        alpha = 1.0
        for _ in range(31):
            zt, kt = z + alpha * step[:n], kappa + alpha * step[n]
            try:
                rt = float(np.linalg.norm(residual(zt, kt)))
            except (StasisCyclesError, ArithmeticError):
                rt = math.inf
            if rt < r:
                break
            alpha *= 0.5
        else:
            raise NoConvergence(f"shooting line search failed (residual {r:.3e})")
        z, kappa = zt, kt
    else:
        raise NoConvergence(f"shooting did not converge in {max_iter} iterations (residual {r:.3e})")
    return _assemble(pair, s.x, s.lam, z, kappa, t2, cfg, "direct")


@dataclass
class FamilyMember:
    delta: float
    cycle: TwoCycle | None
    amplitude: float | None
    error: str | None = None


def _check_deltas(deltas):
    deltas = [float(d) for d in deltas]
    if not deltas:
        raise ValueError("delta list must be nonempty")
    if any(d <= 0 for d in deltas) or any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("delta list must be positive and strictly decreasing")
    return deltas


def cycle_family(pair: FieldPair, s: StasisPoint, deltas: Sequence[float], cfg: IntegratorConfig = DEFAULT, warm_start: bool = True) -> list:
    """Reduced-route cycles for decreasing half-periods, warm-started in order."""
    deltas = _check_deltas(deltas)
    _require_nondegenerate(s)
    out = []
    guess = None
    for d in deltas:
        try:
            c = find_two_cycle_reduced(pair, s, d, cfg, guess=guess)
        except StasisCyclesError as exc:
            out.append(FamilyMember(d, None, None, f"{type(exc).__name__}: {exc}"))
            continue
        if warm_start:
            guess = c.loop.z
        out.append(FamilyMember(d, c, c.amplitude))
    return out


# -- verification ----------------------------------------------------------------

@dataclass(frozen=True)
class VerificationReport:
    closure_residual: float
    dynamics_residual: float
    kappa: float
    period: float
    amplitude: float
    ordering_ok: bool
    closure_ok: bool
    dynamics_ok: bool

    @property
    def passed(self) -> bool:
        return self.ordering_ok and self.closure_ok and self.dynamics_ok

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "ordering_ok": self.ordering_ok,
            "closure_ok": self.closure_ok,
            "dynamics_ok": self.dynamics_ok,
            "closure_residual": self.closure_residual,
            "dynamics_residual": self.dynamics_residual,
            "kappa": self.kappa,
            "period": self.period,
            "amplitude": self.amplitude,
        }


def verify_two_cycle(pair: FieldPair, c: TwoCycle, cfg: IntegratorConfig = DEFAULT, replay_cfg: IntegratorConfig | None = None) -> VerificationReport:
    """Replay [(1, kappa), (2, t2)] at a decade tighter tolerance and re-check."""
    ordering_ok = bool(0.0 < c.kappa < c.kappa + c.t2 and c.t2 > 0)
    if not ordering_ok:
        return VerificationReport(math.nan, math.nan, c.kappa, c.period, math.nan, False, False, False)
    replay_cfg = replay_cfg or cfg.tighter()
    traj = switched_trajectory(pair, c.start, c.schedule, replay_cfg)
    closure = float(np.linalg.norm(traj.end - c.start))
    dyn = dynamics_residual(pair, traj)
    amp = float(np.max(np.linalg.norm(traj.x - c.stasis_x, axis=1)))
    return VerificationReport(closure, dyn, c.kappa, c.period, amp, True, closure <= CLOSURE_TOL, dyn <= DYNAMICS_TOL)


# -- planar containment --------------------------------------------------------

@dataclass
class ContainmentResult:
    contains: bool
    witness: StasisPoint | None
    method: str
    interior_samples: int = 0

    def to_dict(self) -> dict:
        return {
            "contains": self.contains,
            "method": self.method,
            "interior_samples": self.interior_samples,
            "witness": None if self.witness is None else self.witness.to_dict(),
        }


def _inside(poly: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Even-odd rule for many points against a closed polygon."""
    x, y = pts[:, 0][:, None], pts[:, 1][:, None]
    x0, y0 = poly[:, 0][None, :], poly[:, 1][None, :]
    x1, y1 = np.roll(poly[:, 0], -1)[None, :], np.roll(poly[:, 1], -1)[None, :]
    straddle = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    return np.count_nonzero(straddle & (x < xc), axis=1) % 2 == 1


def _distance_to_polyline(poly: np.ndarray, p: np.ndarray, closed: bool = True) -> float:
    a = poly
    b = np.roll(poly, -1, axis=0) if closed else poly[1:]
    if not closed:
        a = poly[:-1]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(denom > 0, np.einsum("ij,ij->i", p - a, ab) / denom, 0.0)
    u = np.clip(u, 0.0, 1.0)
    nearest = a + u[:, None] * ab
    return float(np.min(np.linalg.norm(nearest - p, axis=1)))


def _lambda_guess(pair, x):
    n1, n2 = float(np.linalg.norm(pair.f1(x))), float(np.linalg.norm(pair.f2(x)))
    if n1 + n2 == 0.0:
        return None
    return float(np.clip(n1 / (n1 + n2), 1e-6, 1 - 1e-6))


def _try_witness(pair, seed, lam):
    try:
        return find_stasis_fixed_lambda(pair, seed, lam)
    except (StasisCyclesError, ArithmeticError, np.linalg.LinAlgError):
        return None


def stasis_in_cycle_check(
    pair: FieldPair,
    c: TwoCycle,
    cfg: IntegratorConfig = DEFAULT,
    tol: float = 1e-6,
    min_interior: int = 100,
    use_reference: bool = True,
) -> ContainmentResult:
    """Look for a certified stasis point inside (or on) a planar two-cycle.

    The cycle's own stasis point is tried first; then seeds are drawn from
    the polygon (segment cycles) or from an interior grid.
    """
    if pair.dim != 2:
        raise NotPlanar(f"containment check needs n = 2, got n = {pair.dim}")
    traj = c.trajectory
    if traj is None:
        traj = switched_trajectory(pair, c.start, c.schedule, cfg)
    gap = float(np.linalg.norm(traj.end - traj.start))
    if gap > tol:
        raise OpenCurve(f"cycle samples do not close (gap {gap:.3e})")
    poly = traj.x[:-1]
    extent = float(np.max(np.ptp(poly, axis=0)))
    area = 0.5 * abs(float(np.dot(poly[:, 0], np.roll(poly[:, 1], -1)) - np.dot(poly[:, 1], np.roll(poly[:, 0], -1))))
    flat = extent == 0.0 or area <= 1e-9 * extent**2

    def accept(w):
        if w is None:
            return False
        if _distance_to_polyline(poly, w.x) <= tol:
            return True
        return not flat and bool(_inside(poly, w.x[None, :])[0])

    if use_reference and c.stasis_x is not None:
        w = _try_witness(pair, c.stasis_x, c.stasis_lambda)
        if accept(w):
            return ContainmentResult(True, w, "reference")
    if flat:
        seeds = poly[np.unique(np.linspace(0, len(poly) - 1, 101).round().astype(int))]
        for seed in seeds:
            lam = _lambda_guess(pair, seed)
            w = None if lam is None else _try_witness(pair, seed, lam)
            if accept(w):
                return ContainmentResult(True, w, "segment", len(seeds))
        return ContainmentResult(False, None, "segment", len(seeds))
    lo, hi = poly.min(axis=0), poly.max(axis=0)
    m = 16
    while True:
        gx, gy = np.meshgrid(np.linspace(lo[0], hi[0], m + 2)[1:-1], np.linspace(lo[1], hi[1], m + 2)[1:-1])
        grid = np.column_stack([gx.ravel(), gy.ravel()])
        interior = grid[_inside(poly, grid)]
        if len(interior) >= min_interior or m >= 1024:
            break
        m *= 2
    for seed in interior:
        lam = _lambda_guess(pair, seed)
        w = None if lam is None else _try_witness(pair, seed, lam)
        if accept(w):
            return ContainmentResult(True, w, "interior-grid", len(interior))
    return ContainmentResult(False, None, "interior-grid", len(interior))
