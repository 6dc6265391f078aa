"""Communication weight families and their certified lower envelopes.

Each family provides per-pair weights w_ij(t, x) together with an Envelope:
a non-increasing function psi with w_ij(t, x) >= psi(S(x)) along with the
uniform upper bound w_bar.  Certificates only ever touch the envelope, so
every family carries closed-form tail integrals where they exist.

The envelope treats the position spread itself as the pairwise-distance
argument, mirroring how the certificates are normally stated.  For r > 1 a
pairwise distance can exceed the spread by up to sqrt(r); tests exercise the
sound sandwich psi(sqrt(r) * S(x)) <= w_ij <= w_bar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .state import _as_2d

# Modulated weights draw their pair offsets beta_ij from (0, sqrt(2)), so
# (distance + beta_ij^2) < (distance + 2) always; 2.0 is the envelope offset.
BETA_SQ_SUP = 2.0

_QUAD_ABS_TOL = 1e-10


@dataclass(frozen=True)
class PowerLawCoupling:
    """w_ij(x) = gain / (sigma^2 + |x_i - x_j|^2) ** exponent."""

    gain: float
    sigma: float
    exponent: float

    def __post_init__(self):
        if self.gain <= 0 or self.sigma <= 0 or self.exponent <= 0:
            raise ValueError("power-law coupling needs gain, sigma, exponent > 0")


@dataclass(frozen=True, eq=False)
class ModulatedCoupling:
    """w_ij(t, x) = w * (1.5 + 0.5 sin t) / (|x_i - x_j| + beta_ij^2) ** delta.

    `beta` is an (n, n) matrix with entries in (0, sqrt(2)); the diagonal is
    ignored.  delta >= 0 controls how fast communication decays with distance.
    """

    w: float
    delta: float
    beta: np.ndarray

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        if beta.ndim != 2 or beta.shape[0] != beta.shape[1]:
            raise ValueError("beta must be a square matrix")
        off = ~np.eye(beta.shape[0], dtype=bool)
        if beta.shape[0] > 1 and not ((beta[off] > 0) & (beta[off] < math.sqrt(2.0))).all():
            raise ValueError("beta entries must lie in (0, sqrt(2))")
        if self.w <= 0 or self.delta < 0:
            raise ValueError("modulated coupling needs w > 0 and delta >= 0")
        beta = beta.copy()
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)


@dataclass(frozen=True)
class ConstantCoupling:
    """Distance-independent weight w_ij = w; the tightest possible envelope."""

    w: float

    def __post_init__(self):
        if self.w <= 0:
            raise ValueError("constant coupling needs w > 0")


CouplingModel = PowerLawCoupling | ModulatedCoupling | ConstantCoupling


def weights_matrix(model, t: float, x) -> np.ndarray:
    """Full (n, n) weight matrix at time t; diagonal forced to zero."""
    x = _as_2d(x)
    n = x.shape[0]
    diff = x[:, None, :] - x[None, :, :]
    dist_sq = np.einsum("ijk,ijk->ij", diff, diff)
    if isinstance(model, PowerLawCoupling):
        w = model.gain / (model.sigma**2 + dist_sq) ** model.exponent
    elif isinstance(model, ModulatedCoupling):
        if model.beta.shape[0] != n:
            raise ValueError(f"beta is {model.beta.shape[0]}x{model.beta.shape[0]}, state has n={n}")
        dist = np.sqrt(dist_sq)
        w = model.w * (1.5 + 0.5 * math.sin(t)) / (dist + model.beta**2) ** model.delta
    elif isinstance(model, ConstantCoupling):
        w = np.full((n, n), model.w)
    else:
        raise TypeError(f"unknown coupling model {type(model).__name__}")
    np.fill_diagonal(w, 0.0)
    return w


def weight(model, i: int, j: int, t: float, x) -> float:
    """Single pair weight w_ij(t, x); i and j are zero based and distinct."""
    if i == j:
        raise ValueError("weights are defined for distinct pairs only")
    x = _as_2d(x)
    return float(weights_matrix(model, t, x)[i, j])


@dataclass(frozen=True)
class Envelope:
    """Certified sandwich for a coupling family.

    psi is non-increasing with w_ij(t, x) >= psi(S(x)) (spread argument, see
    module docstring); w_bar bounds every weight from above.  `integral_fn`,
    when present, evaluates integrals of psi in closed form including the
    divergence bookkeeping for infinite upper limits.
    """

    psi: Callable[[float], float]
    w_bar: float
    integral_fn: Optional[Callable[[float, float], float]] = None


def _power_tail_integral(amp: float, offset: float, exponent: float):
    """Closed form for integrals of amp / (s + offset) ** exponent."""

    def integral(a: float, b: float) -> float:
        if b < a:
            raise ValueError("integral needs b >= a")
        if math.isinf(b):
            if exponent <= 1.0:
                return math.inf
            return amp * (a + offset) ** (1.0 - exponent) / (exponent - 1.0)
        if exponent == 1.0:
            return amp * math.log((b + offset) / (a + offset))
        return amp * ((b + offset) ** (1.0 - exponent) - (a + offset) ** (1.0 - exponent)) / (1.0 - exponent)

    return integral


def envelope_of(model) -> Envelope:
    """Lower envelope and uniform upper bound for a coupling family."""
    if isinstance(model, PowerLawCoupling):
        gain, sig2, b = model.gain, model.sigma**2, model.exponent

        def psi(s: float) -> float:
            return gain / (sig2 + s * s) ** b

        def integral(lo: float, hi: float) -> float:
            if hi < lo:
                raise ValueError("integral needs b >= a")
            if math.isinf(hi):
                if 2.0 * b <= 1.0:
                    return math.inf
                val, _ = quad(psi, lo, np.inf, epsabs=_QUAD_ABS_TOL, limit=200)
                return val
            val, _ = quad(psi, lo, hi, epsabs=_QUAD_ABS_TOL, limit=200)
            return val

        return Envelope(psi=psi, w_bar=gain / sig2**b, integral_fn=integral)

    if isinstance(model, ModulatedCoupling):
        # modulation minimum is 1.0, offset uses the draw-interval supremum
        # so the envelope does not depend on the realised beta matrix
        amp, delta = model.w, model.delta
        off = ~np.eye(model.beta.shape[0], dtype=bool)
        beta_min = float(model.beta[off].min()) if off.any() else 1.0

        def psi(s: float) -> float:
            return amp / (s + BETA_SQ_SUP) ** delta

        return Envelope(
            psi=psi,
            w_bar=2.0 * amp / beta_min ** (2.0 * delta),
            integral_fn=_power_tail_integral(amp, BETA_SQ_SUP, delta),
        )

    if isinstance(model, ConstantCoupling):
        w = model.w
        return Envelope(
            psi=lambda s: w,
            w_bar=w,
            integral_fn=_power_tail_integral(w, 0.0, 0.0),
        )

    raise TypeError(f"unknown coupling model {type(model).__name__}")


def psi_integral(env: Envelope, a: float, b: float) -> float:
    """Integral of the envelope over [a, b]; b may be inf.

    Uses the family closed form when available, otherwise adaptive
    quadrature at absolute tolerance 1e-10.  A divergent tail reports +inf.
    """
    if a < 0:
        raise ValueError("integral lower limit must be >= 0")
    if b < a:
        raise ValueError("integral needs b >= a")
    if b == a:
        return 0.0
    if env.integral_fn is not None:
        return env.integral_fn(a, b)
    if math.isinf(b):
        val, _ = quad(env.psi, a, np.inf, epsabs=_QUAD_ABS_TOL, limit=200)
        return val
    val, _ = quad(env.psi, a, b, epsabs=_QUAD_ABS_TOL, limit=200)
    return val
