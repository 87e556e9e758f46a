"""Stasis points of a field pair and continuation of the stasis curve.

A stasis point is where f1 and f2 are anti-parallel, i.e. where
(1 - lam) f1(x) + lam f2(x) = 0 for some lam in (0, 1). Weights are always
normalised so that k1 + k2 = 1.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateStasis, NoConvergence, NotAntiParallel, SingularJacobian, ZeroField
from .field import FieldPair

__all__ = [
    "StasisPoint",
    "StasisCurve",
    "NondegeneracyReport",
    "stasis_residual",
    "certify",
    "find_stasis_fixed_lambda",
    "weights_from_antiparallel",
    "trace_stasis_curve",
    "nondegeneracy_report",
    "is_degenerate",
]

ANTIPARALLEL_TOL = 1e-8
DEGENERACY_TOL = 1e-8
CONDITION_LIMIT = 1e12


def is_degenerate(sigma_min: float, sigma_max: float) -> bool:
    return sigma_min < DEGENERACY_TOL * max(1.0, sigma_max)


@dataclass(frozen=True)
class NondegeneracyReport:
    det_M: float
    sigma_min: float
    sigma_max: float
    degenerate: bool


@dataclass(frozen=True)
class StasisPoint:
    x: np.ndarray
    lam: float
    residual_norm: float
    M: np.ndarray
    det_M: float
    sigma_min: float
    sigma_max: float
    degenerate: bool
    iterations: int = 0

    @property
    def k1(self) -> float:
        return 1.0 - self.lam

    @property
    def k2(self) -> float:
        return self.lam

    def to_dict(self) -> dict:
        return {
            "x": [float(v) for v in self.x],
            "lambda": float(self.lam),
            "k1": self.k1,
            "k2": self.k2,
            "residual_norm": float(self.residual_norm),
            "det_M": float(self.det_M),
            "sigma_min": float(self.sigma_min),
            "sigma_max": float(self.sigma_max),
            "degenerate": bool(self.degenerate),
            "iterations": int(self.iterations),
        }


def stasis_residual(pair: FieldPair, x, lam: float) -> np.ndarray:
    """F(x, lam) = (1 - lam) f1(x) + lam f2(x)."""
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    return (1.0 - lam) * pair.f1(x) + lam * pair.f2(x)


def _M(pair: FieldPair, x, lam: float) -> np.ndarray:
    return (1.0 - lam) * pair.f1.jacobian(x) + lam * pair.f2.jacobian(x)


def _metrics(M: np.ndarray) -> NondegeneracyReport:
    sv = np.linalg.svd(M, compute_uv=False)
    smin, smax = float(sv[-1]), float(sv[0])
    return NondegeneracyReport(float(np.linalg.det(M)), smin, smax, is_degenerate(smin, smax))


def certify(pair: FieldPair, x, lam: float, iterations: int = 0) -> StasisPoint:
    """Build a StasisPoint at (x, lam), checking residual and anti-parallelism."""
    x = np.array(x, dtype=float)
    f1, f2 = pair.f1(x), pair.f2(x)
    n1, n2 = np.linalg.norm(f1), np.linalg.norm(f2)
    res = float(np.linalg.norm(stasis_residual(pair, x, lam)))
    if res > 1e-9 * (1.0 + n1 + n2):
        raise NoConvergence(f"residual {res:.3e} at {x} is too large to certify a stasis point")
    if float(f1 @ f2) > -(1.0 - ANTIPARALLEL_TOL) * n1 * n2:
        raise NotAntiParallel(f"f1 and f2 are not anti-parallel at {x}")
    M = _M(pair, x, lam)
    rep = _metrics(M)
    return StasisPoint(x, float(lam), res, M, rep.det_M, rep.sigma_min, rep.sigma_max, rep.degenerate, iterations)


def find_stasis_fixed_lambda(pair: FieldPair, guess, lam: float, tol: float = 1e-10, max_iter: int = 50) -> StasisPoint:
    """Damped Newton on x -> F(x, lam), Jacobian M = (1 - lam) Df1 + lam Df2."""
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    x = np.array(guess, dtype=float)
    if x.size != pair.dim:
        raise ValueError(f"guess has dimension {x.size}, expected {pair.dim}")
    F = stasis_residual(pair, x, lam)
    r = float(np.linalg.norm(F))
    for it in range(max_iter + 1):
        if r <= tol:
            return certify(pair, x, lam, iterations=it)
        if it == max_iter:
            break
        M = _M(pair, x, lam)
        if np.linalg.cond(M) > CONDITION_LIMIT:
            raise SingularJacobian(f"stasis Jacobian is singular at {x} (lambda={lam})")
        step = np.linalg.solve(M, -F)
        alpha = 1.0
        for _ in range(31):
            trial = x + alpha * step
            try:
                F_trial = stasis_residual(pair, trial, lam)
                r_trial = float(np.linalg.norm(F_trial))
            except ArithmeticError:
                r_trial = np.inf
            if r_trial < r:
                break
            alpha *= 0.5
        else:
            raise NoConvergence(f"line search failed at {x} (residual {r:.3e})")
        x, F, r = trial, F_trial, r_trial
    raise NoConvergence(f"no convergence in {max_iter} iterations (residual {r:.3e})")


def weights_from_antiparallel(pair: FieldPair, x) -> tuple[float, float]:
    """The unique convex weights with k1 f1(x) + k2 f2(x) = 0."""
    f1, f2 = pair.f1(x), pair.f2(x)
    n1, n2 = float(np.linalg.norm(f1)), float(np.linalg.norm(f2))
    if n1 == 0.0 or n2 == 0.0:
        raise ZeroField(f"a field vanishes at {x}")
    if float(f1 @ f2) > -(1.0 - ANTIPARALLEL_TOL) * n1 * n2:
        raise NotAntiParallel(f"f1 and f2 are not anti-parallel at {x}")
    return n2 / (n1 + n2), n1 / (n1 + n2)


def nondegeneracy_report(pair: FieldPair, s: StasisPoint) -> NondegeneracyReport:
    return _metrics(_M(pair, s.x, s.lam))


# -- continuation ----------------------------------------------------------------

@dataclass
class StasisCurve:
    points: list = field(default_factory=list)  # StasisPoint samples
    tangents: list = field(default_factory=list)  # unit vectors in R^{n+1}
    step: float = 0.05
    reason: str = "steps"
    message: str = ""

    def __len__(self):
        return len(self.points)

    def arclength(self) -> np.ndarray:
        z = np.array([np.append(p.x, p.lam) for p in self.points])
        if len(z) < 2:
            return np.zeros(len(z))
        return np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(z, axis=0), axis=1))])

    def write_csv(self, stream) -> None:
        n = self.points[0].x.size
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["s", *(f"x{i + 1}" for i in range(n)), "lambda", "sigma_min"])
        for s, p in zip(self.arclength(), self.points):
            writer.writerow([f"{s:.17g}", *(f"{v:.17g}" for v in p.x), f"{p.lam:.17g}", f"{p.sigma_min:.17g}"])


def _extended_jacobian(pair: FieldPair, x, lam):
    return np.hstack([_M(pair, x, lam), (pair.f2(x) - pair.f1(x))[:, None]])


def _null_vector(J):
    v = np.linalg.svd(J)[2][-1]
    return v / np.linalg.norm(v)


def trace_stasis_curve(
    pair: FieldPair,
    start: StasisPoint,
    steps: int,
    step_size: float = 0.05,
    direction: int = 1,
    tol: float = 1e-12,
    max_corrector: int = 20,
) -> StasisCurve:
    """Pseudo-arclength continuation of F(x, lam) = 0 in R^{n+1}.

    The first tangent is oriented so that lam is non-decreasing when
    ``direction`` is +1 (non-increasing for -1).
    """
    if start.degenerate:
        raise DegenerateStasis("cannot continue from a degenerate stasis point")
    if steps < 0 or step_size <= 0:
        raise ValueError("steps must be >= 0 and step_size > 0")
    n = pair.dim
    curve = StasisCurve(step=step_size)
    z = np.append(start.x, start.lam)
    tangent = _null_vector(_extended_jacobian(pair, start.x, start.lam))
    if direction * tangent[-1] < 0:
        tangent = -tangent
    curve.points.append(start)
    curve.tangents.append(tangent)
    for _ in range(steps):
        pred = z + step_size * tangent
        zc = pred.copy()
        converged = False
        for _ in range(max_corrector):
            x, lam = zc[:n], zc[n]
            if not 0.0 < lam < 1.0:
                break
            G = np.append(stasis_residual(pair, x, lam), (zc - pred) @ tangent)
            if np.linalg.norm(G) <= tol:
                converged = True
                break
            A = np.vstack([_extended_jacobian(pair, x, lam), tangent])
            try:
                zc = zc - np.linalg.solve(A, G)
            except np.linalg.LinAlgError:
                break
        lam = zc[n]
        if not 0.0 < lam < 1.0:
            curve.reason = "lambda-exit"
            curve.message = f"lambda left (0, 1) near {lam:.6g}"
            break
        if not converged:
            curve.reason = "corrector-failure"
            curve.message = f"corrector failed after {len(curve.points) - 1} steps"
            break
        try:
            point = certify(pair, zc[:n], lam)
        except (NoConvergence, NotAntiParallel) as exc:
            curve.reason = "corrector-failure"
            curve.message = str(exc)
            break
        new_tangent = _null_vector(_extended_jacobian(pair, point.x, point.lam))
        if new_tangent @ tangent < 0:
            new_tangent = -new_tangent
        z, tangent = zc, new_tangent
        curve.points.append(point)
        curve.tangents.append(tangent)
    return curve
