"""Cutoff integrals over the Euclidean 4-ball |P| <= L.

The default rule is a tensor product of Gauss-Legendre quadratures in
hyperspherical coordinates

    P = r (cos chi, sin chi cos theta, sin chi sin theta cos phi,
           sin chi sin theta sin phi),      d^4P = r^3 sin^2(chi) sin(theta)

with r in [0, L], chi, theta in [0, pi], phi in [0, 2 pi).  A plain
Monte-Carlo estimator on the ball is available for integrands the screen
rejects.  Partial sums are reduced in a fixed chunk order so results are
bit-identical regardless of how the host parallelizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad

from .integrand import evaluate, screen_singularities

__all__ = [
    "SingularIntegrandError",
    "BallRegion",
    "QuadratureSpec",
    "CutoffSamples",
    "ball_volume",
    "integrate_ball",
    "radial_oracle",
    "sample_over_cutoffs",
]

_CHUNK = 1 << 19  # evaluation points per reduction chunk


class SingularIntegrandError(ValueError):
    """The singularity screen flagged a denominator inside the ball."""

    def __init__(self, report):
        super().__init__(f"integrand flagged as singular on the ball:\n{report}")
        self.report = report


@dataclass(frozen=True)
class BallRegion:
    """The 4-ball of radius ``radius`` centered at the origin."""

    radius: float

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"cutoff radius must be finite and positive: {self.radius}")


@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature choice: tensor Gauss-Legendre orders or Monte-Carlo size."""

    method: str = "tensor-gauss"
    radial_order: int = 64
    angular_orders: tuple = (32, 32, 32)
    samples: int = 100_000
    seed: int | None = None

    def __post_init__(self):
        if self.method not in ("tensor-gauss", "monte-carlo"):
            raise ValueError(f"unknown quadrature method '{self.method}'")
        if self.radial_order < 2 or any(n < 2 for n in self.angular_orders):
            raise ValueError("quadrature orders must be >= 2")
        if self.method == "monte-carlo":
            if self.samples < 1000:
                raise ValueError("monte-carlo needs at least 1000 samples")
            if self.seed is None:
                raise ValueError("monte-carlo requires an explicit seed")


@dataclass(frozen=True)
class CutoffSamples:
    """Complex integral values on an ascending grid of cutoff radii."""

    q: tuple
    m: float
    grid: np.ndarray
    values: np.ndarray
    errors: np.ndarray = field(default=None)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        errors = (
            np.zeros_like(grid)
            if self.errors is None
            else np.asarray(self.errors, dtype=float)
        )
        if grid.ndim != 1 or values.shape != grid.shape or errors.shape != grid.shape:
            raise ValueError("grid, values and errors must be 1-d and congruent")
        if not np.all(np.diff(grid) > 0):
            raise ValueError("cutoff grid must be strictly ascending")
        if not (np.all(np.isfinite(grid)) and np.all(np.isfinite(values))):
            raise ValueError("cutoff samples must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "errors", errors)

    def __len__(self):
        return len(self.grid)


def ball_volume(radius):
    """Volume of the 4-ball, pi^2 r^4 / 2."""
    return 0.5 * np.pi**2 * radius**4


def _kinematics(q, m):
    q = np.asarray(q, dtype=float)
    if q.shape == (3,):
        q = np.concatenate([[0.0], q])
    if q.shape != (4,):
        raise ValueError(f"q must have 3 or 4 components, got shape {q.shape}")
    if not (np.all(np.isfinite(q)) and math.isfinite(m)):
        raise ValueError("kinematic point must be finite")
    return q, float(m)


def _gauss(n, a, b):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def _tensor_sum(exprs, q4, m, radius, spec):
    """Weighted sums of each expr over the tensor rule, chunked deterministically."""
    # graded radial map r = L t^2: clusters nodes toward the origin, where
    # rational integrands with O(1) mass scales vary fastest relative to L
    t, wt = _gauss(spec.radial_order, 0.0, 1.0)
    r = radius * t**2
    wr = wt * 2.0 * radius * t
    chi, wchi = _gauss(spec.angular_orders[0], 0.0, np.pi)
    theta, wth = _gauss(spec.angular_orders[1], 0.0, np.pi)
    phi, wphi = _gauss(spec.angular_orders[2], 0.0, 2 * np.pi)

    r4 = r[:, None, None, None]
    chi4 = chi[None, :, None, None]
    th4 = theta[None, None, :, None]
    phi4 = phi[None, None, None, :]
    weight = (
        (wr * r**3)[:, None, None, None]
        * (wchi * np.sin(chi) ** 2)[None, :, None, None]
        * (wth * np.sin(theta))[None, None, :, None]
        * wphi[None, None, None, :]
    )
    sinchi = np.sin(chi4)
    sinth = np.sin(th4)
    coords = {
        "p0": np.broadcast_to(r4 * np.cos(chi4), weight.shape).ravel(),
        "p1": np.broadcast_to(r4 * sinchi * np.cos(th4), weight.shape).ravel(),
        "p2": np.broadcast_to(r4 * sinchi * sinth * np.cos(phi4), weight.shape).ravel(),
        "p3": np.broadcast_to(r4 * sinchi * sinth * np.sin(phi4), weight.shape).ravel(),
    }
    wflat = weight.ravel()
    fixed = {f"q{i}": q4[i] for i in range(4)}
    fixed.update({"m": m, "L": radius})

    totals = []
    for expr in exprs:
        if expr is None:
            totals.append(0.0)
            continue
        chunk_sums = []
        for start in range(0, wflat.size, _CHUNK):
            sl = slice(start, start + _CHUNK)
            ctx = {k: v[sl] for k, v in coords.items()}
            ctx.update(fixed)
            values = evaluate(expr, ctx)
            chunk_sums.append(np.sum(values * wflat[sl]))
        totals.append(float(np.sum(np.asarray(chunk_sums))))
    return totals


def _refined(spec):
    return replace(
        spec,
        radial_order=math.ceil(1.5 * spec.radial_order),
        angular_orders=tuple(math.ceil(1.5 * n) for n in spec.angular_orders),
    )


def _monte_carlo(exprs, q4, m, radius, spec):
    rng = np.random.default_rng(spec.seed)
    u = rng.random(spec.samples)
    r = radius * u**0.25
    direction = rng.standard_normal((4, spec.samples))
    direction /= np.linalg.norm(direction, axis=0)
    ctx = {f"p{i}": r * direction[i] for i in range(4)}
    ctx.update({f"q{i}": q4[i] for i in range(4)})
    ctx.update({"m": m, "L": radius})
    vol = ball_volume(radius)
    results = []
    for expr in exprs:
        if expr is None:
            results.append((0.0, 0.0))
            continue
        values = np.broadcast_to(np.asarray(evaluate(expr, ctx), dtype=float), r.shape)
        mean = float(np.mean(values))
        stderr = float(np.std(values) / math.sqrt(spec.samples))
        results.append((vol * mean, vol * stderr))
    return results


def integrate_ball(f_re, f_im, q, m, region, spec=QuadratureSpec(), screen=True):
    """Integral of f_re + i f_im over the 4-ball, with an error estimate.

    The tensor rule reports |value - refined value| with all orders increased
    by 1.5x; Monte-Carlo reports the standard error of the mean.  Unless
    ``screen`` is disabled or Monte-Carlo is requested, flagged singular
    integrands are refused with the screen report attached.
    """
    if not isinstance(region, BallRegion):
        region = BallRegion(float(region))
    q4, m = _kinematics(q, m)
    exprs = (f_re, f_im)
    if screen and spec.method == "tensor-gauss":
        for expr in exprs:
            if expr is None:
                continue
            report = screen_singularities(expr, q4, m, region.radius)
            if report.flagged:
                raise SingularIntegrandError(report)
    if spec.method == "monte-carlo":
        (re, re_err), (im, im_err) = _monte_carlo(exprs, q4, m, region.radius, spec)
        return complex(re, im), math.hypot(re_err, im_err)
    re, im = _tensor_sum(exprs, q4, m, region.radius, spec)
    re_f, im_f = _tensor_sum(exprs, q4, m, region.radius, _refined(spec))
    return complex(re, im), abs(complex(re - re_f, im - im_f))


def radial_oracle(f, radius):
    """Independent 1-d oracle for radially symmetric integrands:
    2 pi^2 * integral of r^3 f(r) over [0, L], by adaptive quadrature."""
    value, err = quad(
        lambda r: r**3 * f(r), 0.0, radius, epsabs=1e-12, epsrel=1e-12, limit=200
    )
    if not math.isfinite(value) or err > 1e-6 * max(1.0, abs(value)):
        raise ValueError(f"radial quadrature did not converge (error {err:.3e})")
    return 2 * np.pi**2 * value


def sample_over_cutoffs(f_re, f_im, q, m, grid, spec=QuadratureSpec()):
    """One ball integral per cutoff radius on an ascending grid."""
    grid = np.asarray(grid, dtype=float)
    if not np.all(np.diff(grid) > 0):
        raise ValueError("cutoff grid must be strictly ascending")
    q4, m = _kinematics(q, m)
    values = np.empty(grid.size, dtype=complex)
    errors = np.empty(grid.size)
    for i, radius in enumerate(grid):
        values[i], errors[i] = integrate_ball(
            f_re, f_im, q4, m, BallRegion(float(radius)), spec
        )
    return CutoffSamples(q=tuple(q4), m=m, grid=grid, values=values, errors=errors)
