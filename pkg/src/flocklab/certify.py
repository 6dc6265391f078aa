"""Certificates, contraction arithmetic, and trajectory audits.

A certificate turns an initial state plus a coupling envelope and an
internal-dynamics penalty bound into a yes/no answer with the numbers that
back it: the largest admissible position spread, the root d* where the
integral budget is exhausted, and the guaranteed exponential rate.

Audits replay a finished trajectory against the differential inequalities
the certificates rest on.  The forward difference of the velocity spread on
the sample grid is compared with the discrete consequence of the bound,
S_k * expm1(B h) / h, rather than the linearised B * S_k: the linear form
flags exactly-tight exponential decay at any finite sample spacing.
Samples where the spread has fallen below integrator resolution are
reported as skipped instead of audited.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .coupling import Envelope, psi_integral, weights_matrix
from .dynamics import RepulsionModel, repulsion_strength, repulsion_tail
from .integrate import Trajectory
from .state import distance_sq_matrix, min_pair_distance_sq, spread_report

_D_STAR_TOL = 1e-10
_MAX_BISECT = 200
_PROBE_CAP = 1e15

FLOOR_FACTOR = 100.0


@dataclass(frozen=True)
class ContractionResult:
    row_sum: float
    tau: float
    i: int  # row pair with the least overlap
    j: int


def contraction_coefficient(p, row_sum_tol: float = 1e-9) -> ContractionResult:
    """Contraction factor of a nonnegative constant-row-sum matrix.

    For any vector z, the spread of P z shrinks by at least this factor:
    tau = m - min over row pairs of sum_k min(p_ik, p_jk), with m the
    common row sum.  Guarantees spread(P z) <= tau * spread(z).
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError("matrix must be square")
    if (p < 0).any():
        raise ValueError("matrix entries must be nonnegative")
    sums = p.sum(axis=1)
    m = float(sums[0])
    if np.abs(sums - m).max() > row_sum_tol * max(1.0, abs(m)):
        raise ValueError("row sums are not constant within tolerance")
    n = p.shape[0]
    if n == 1:
        return ContractionResult(row_sum=m, tau=0.0, i=0, j=0)
    overlap = np.minimum(p[:, None, :], p[None, :, :]).sum(axis=2)
    iu, ju = np.triu_indices(n, k=1)
    k = int(np.argmin(overlap[iu, ju]))
    return ContractionResult(
        row_sum=m,
        tau=m - float(overlap[iu[k], ju[k]]),
        i=int(iu[k]),
        j=int(ju[k]),
    )


@dataclass(frozen=True)
class StandardCertificate:
    feasible: bool
    spread_x0: float
    spread_v0: float
    tail: float  # int_{S(x0)}^inf psi


def certify_standard(env: Envelope, spread_x0: float, spread_v0: float) -> StandardCertificate:
    """Unconditional flocking test: the envelope tail must exceed S(v0)."""
    tail = psi_integral(env, spread_x0, math.inf)
    return StandardCertificate(
        feasible=bool(spread_v0 < tail),
        spread_x0=spread_x0,
        spread_v0=spread_v0,
        tail=tail,
    )


@dataclass(frozen=True)
class SyncCertificate:
    feasible: bool
    k_bound: float
    k_source: str
    relaxed: bool
    c: int
    n: int
    spread_x0: float
    spread_v0: float
    d_max: float
    d_star: Optional[float]
    epsilon: Optional[float]

    def decay_bound(self, t: np.ndarray, t0: float = 0.0) -> np.ndarray:
        if not self.feasible:
            raise ValueError("no decay bound for an infeasible certificate")
        return self.spread_v0 * np.exp(-self.epsilon * (np.asarray(t) - t0))


def _budget(env: Envelope, c: int, k: float, s_x0: float, d: float) -> float:
    return c * psi_integral(env, s_x0, d) - k * (d - s_x0)


def certify_sync(
    env: Envelope,
    spread_x0: float,
    spread_v0: float,
    n: int,
    k_bound: float,
    k_source: str = "user",
    relaxed: bool = False,
) -> SyncCertificate:
    """Exponential alignment certificate for the driven model.

    Feasible when the integral of c psi(r) - k over [S(x0), d] exceeds
    S(v0) for some d below the last radius d_max where c psi still beats k.
    c counts the full network (c = n) or drops to 1 under the relaxed
    connectivity reading.  On success d* solves the budget equation and
    epsilon = c psi(d*) - k is the certified rate.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    c = 1 if relaxed else n

    def head(r: float) -> float:
        return c * env.psi(r) - k_bound

    def infeasible(d_max: float) -> SyncCertificate:
        return SyncCertificate(
            feasible=False,
            k_bound=k_bound,
            k_source=k_source,
            relaxed=relaxed,
            c=c,
            n=n,
            spread_x0=spread_x0,
            spread_v0=spread_v0,
            d_max=d_max,
            d_star=None,
            epsilon=None,
        )

    if head(spread_x0) <= 0.0:
        return infeasible(d_max=spread_x0)

    # locate d_max: psi is non-increasing, so head has a single sign change
    lo, hi = spread_x0, spread_x0 + 1.0
    d_max = math.inf
    while head(hi) > 0.0:
        lo = hi
        hi = spread_x0 + 2.0 * (hi - spread_x0)
        if hi > _PROBE_CAP:
            break
    else:
        for _ in range(_MAX_BISECT):
            mid = 0.5 * (lo + hi)
            if head(mid) > 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= _D_STAR_TOL * max(1.0, hi):
                break
        d_max = 0.5 * (lo + hi)

    if math.isinf(d_max):
        if k_bound < 0.0:
            budget_sup = math.inf
        else:
            tail = psi_integral(env, spread_x0, math.inf)
            if math.isinf(tail):
                budget_sup = math.inf
            elif k_bound == 0.0:
                budget_sup = c * tail
            else:
                budget_sup = _budget(env, c, k_bound, spread_x0, _PROBE_CAP)
    else:
        budget_sup = _budget(env, c, k_bound, spread_x0, d_max)

    if not budget_sup > spread_v0:
        return infeasible(d_max=d_max)

    # root of the budget equation in (S(x0), d_max)
    if math.isinf(d_max):
        hi = spread_x0 + 1.0
        while _budget(env, c, k_bound, spread_x0, hi) <= spread_v0:
            hi = spread_x0 + 2.0 * (hi - spread_x0)
    else:
        hi = d_max
    lo = spread_x0
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if _budget(env, c, k_bound, spread_x0, mid) < spread_v0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _D_STAR_TOL:
            break
    d_star = 0.5 * (lo + hi)
    epsilon = c * env.psi(d_star) - k_bound
    return SyncCertificate(
        feasible=True,
        k_bound=k_bound,
        k_source=k_source,
        relaxed=relaxed,
        c=c,
        n=n,
        spread_x0=spread_x0,
        spread_v0=spread_v0,
        d_max=d_max,
        d_star=d_star,
        epsilon=epsilon,
    )


@dataclass(frozen=True)
class CollisionCertificate:
    feasible: bool
    n: int
    spread_x0: float
    spread_v0: float
    lhs: float  # S(v0) / n
    psi_term: float  # half the envelope tail from S(x0)
    repulsion_term: float  # worst pair tail at the initial separation
    separation_ok: bool
    min_dist_sq: float


def certify_collision(
    env: Envelope,
    rep: RepulsionModel,
    x0,
    spread_v0: float,
    n: int,
) -> CollisionCertificate:
    """Joint alignment and collision-avoidance certificate.

    Requires every initial squared separation strictly above d0 and
    S(v0)/n < (1/2) int_{S(x0)}^inf psi - max_pairs tail(separation).
    """
    x0 = np.asarray(x0, dtype=float)
    rail = spread_report(x0)
    s_x0 = float(rail.value)
    min_d2, _, _ = min_pair_distance_sq(x0)
    separation_ok = bool(min_d2 > rep.d0)
    lhs = spread_v0 / n
    psi_term = 0.5 * psi_integral(env, s_x0, math.inf)

    if not separation_ok:
        return CollisionCertificate(
            feasible=False,
            n=n,
            spread_x0=s_x0,
            spread_v0=spread_v0,
            lhs=lhs,
            psi_term=psi_term,
            repulsion_term=math.inf,
            separation_ok=False,
            min_dist_sq=min_d2,
        )

    d2 = distance_sq_matrix(x0)
    worst = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                worst = max(worst, repulsion_tail(rep, float(d2[i, j]), i, j))

    feasible = bool(lhs < psi_term - worst)
    return CollisionCertificate(
        feasible=feasible,
        n=n,
        spread_x0=s_x0,
        spread_v0=spread_v0,
        lhs=lhs,
        psi_term=psi_term,
        repulsion_term=worst,
        separation_ok=True,
        min_dist_sq=min_d2,
    )


def resolution_floor(traj: Trajectory) -> np.ndarray:
    """Smallest velocity spread the sample grid can vouch for, per sample."""
    vmax = np.abs(traj.vs).reshape(len(traj.ts), -1).max(axis=1)
    return FLOOR_FACTOR * (traj.cfg.rtol * vmax + traj.cfg.atol)


def decay_rate_fit(
    traj: Trajectory, t_lo: Optional[float] = None, t_hi: Optional[float] = None
) -> float:
    """Observed exponential rate of the velocity spread by least squares.

    Fits log S(v) against t over [t_lo, t_hi], restricted to samples still
    above the resolution floor.  Returns the positive decay rate (negated
    slope); 0.0 for flat data.
    """
    ts = traj.ts
    sv = traj.spread_v
    mask = sv > resolution_floor(traj)
    if t_lo is not None:
        mask &= ts >= t_lo
    if t_hi is not None:
        mask &= ts <= t_hi
    mask &= sv > 0.0
    if mask.sum() < 2:
        raise ValueError("not enough resolvable samples for a rate fit")
    slope = np.polyfit(ts[mask], np.log(sv[mask]), 1)[0]
    return float(-slope)


@dataclass(frozen=True)
class TrajectoryAudit:
    n_samples: int
    n_checked: int
    n_skipped: int
    n_violations: int
    worst_margin: float  # most positive (fd - bound - tol) seen; <= 0 is clean
    first_violation_t: Optional[float]


def _run_audit(traj: Trajectory, bound_rate, forcing=None) -> TrajectoryAudit:
    """Shared forward-difference audit loop.

    bound_rate(k) gives the certified growth rate B at sample k; the audit
    checks (S_{k+1} - S_k)/h <= S_k expm1(max(B_k, B_{k+1}) h)/h - forcing
    within 10 (rtol S_k + atol) / h.
    """
    ts = traj.ts
    sv = traj.spread_v
    floor = resolution_floor(traj)
    rtol, atol = traj.cfg.rtol, traj.cfg.atol

    rates = np.array([bound_rate(k) for k in range(len(ts))])
    force = np.zeros(len(ts)) if forcing is None else np.array([forcing(k) for k in range(len(ts))])

    n_checked = 0
    n_skipped = 0
    n_violations = 0
    worst = -math.inf
    first_t = None
    for k in range(len(ts) - 1):
        h = ts[k + 1] - ts[k]
        if h <= 0:
            continue
        if sv[k] <= floor[k] or sv[k + 1] <= floor[k + 1]:
            n_skipped += 1
            continue
        fd = (sv[k + 1] - sv[k]) / h
        b = max(rates[k], rates[k + 1])
        rhs = sv[k] * math.expm1(b * h) / h - min(force[k], force[k + 1])
        tol = 10.0 * (rtol * sv[k] + atol) / h
        margin = fd - rhs - tol
        n_checked += 1
        worst = max(worst, margin)
        if margin > 0.0:
            n_violations += 1
            if first_t is None:
                first_t = float(ts[k])
    return TrajectoryAudit(
        n_samples=len(ts),
        n_checked=n_checked,
        n_skipped=n_skipped,
        n_violations=n_violations,
        worst_margin=worst if n_checked else 0.0,
        first_violation_t=first_t,
    )


def audit_sync_run(traj: Trajectory, env: Envelope, n: int, k_bound: float) -> TrajectoryAudit:
    """Check d/dt S(v) <= (k - n psi(S(x))) S(v) sample by sample."""
    sx = traj.spread_x

    def rate(k: int) -> float:
        return k_bound - n * env.psi(float(sx[k]))

    return _run_audit(traj, rate)


def _pair_decay_terms(traj: Trajectory, coupling, rep: Optional[RepulsionModel], k: int):
    """Contraction rate rho and repulsion forcing at sample k.

    Both are taken at the pair attaining the velocity spread.  Self weights
    drop out of the pair minimum, so the (i, i') cross terms enter directly.
    """
    t = float(traj.ts[k])
    x = traj.xs[k]
    v = traj.vs[k]
    rail = spread_report(v)
    i, ip = rail.i, rail.j
    w = weights_matrix(coupling, t, x)
    n = x.shape[0]
    others = [j for j in range(n) if j != i and j != ip]
    rho = w[i, ip] + w[ip, i] + sum(min(w[i, j], w[ip, j]) for j in others)

    gamma = 0.0
    if rep is not None:

        def dtail(a: int, b: int) -> float:
            d2 = float(np.dot(x[a] - x[b], x[a] - x[b]))
            inner = float(np.dot(x[a] - x[b], v[a] - v[b]))
            return -2.0 * repulsion_strength(rep, d2, a, b) * inner

        gamma = 0.5 * (
            dtail(i, ip)
            + dtail(ip, i)
            + sum(min(dtail(i, j), dtail(ip, j)) for j in others)
        )
    return rho, gamma


def audit_collision_run(traj: Trajectory, coupling, rep: RepulsionModel) -> TrajectoryAudit:
    """Check d/dt S(v) <= -rho S(v) - Gamma at the spread-attaining pair."""
    terms = [_pair_decay_terms(traj, coupling, rep, k) for k in range(len(traj.ts))]

    def rate(k: int) -> float:
        return -terms[k][0]

    def forcing(k: int) -> float:
        return terms[k][1]

    return _run_audit(traj, rate, forcing)
