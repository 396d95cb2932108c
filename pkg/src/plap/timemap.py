"""Level functions, singular time-map integrals, and flat-core widths.

Everything here reduces to two ingredients:

* the level map ``rho -> z`` (resp. ``S``) inverting ``z^q/q - F(z) = rho`` on
  ``(0, z_plus)`` (resp. ``|S|^q/q - F(S) = rho`` on ``(z_minus, 0)``), and
* the singular integrals

  ``I(a) = int_0^a (F(t) - F(a) + (a^q - t^q)/q)^(-1/p) dt``
  ``J(a) = int_a^0 (F(t) - F(a) + (|a|^q - |t|^q)/q)^(-1/p) dt``

whose integrand has a simple zero at the moving endpoint for interior levels
and a double zero when the level sits exactly at ``z_plus``/``z_minus``.  The
substitution ``t = a -/+ w^beta`` with ``beta = p/(p-1)`` (simple zero) or
``beta = p/(p-2)`` (double zero, requires ``p > 2``) turns the integrand into
a bounded function of ``w``, which the tanh-sinh rule then resolves.

The half-period of one monotone arch launched with slope ``r`` is
``theta(r) = kappa * I(z(r))`` with ``kappa = ((p-1)/(lambda p))^(1/p)``; the
mirrored arch gives ``alpha(r) = kappa * J(S(r))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import Divergent, DomainError, OutOfRange
from .nonlinearity import Nonlinearity, areas, eval_F, eval_df, eval_m
from .quadrature import tanh_sinh, tanh_sinh_batch

_TAIL_FRAC = 1e-2  # switch from the direct formula to the tail integral
_MODEL_FRAC = 1e-8  # switch from the tail integral to the local quadratic model
_ENDPOINT_SNAP = 1e-14  # levels this close to z+/z- are treated as the endpoint


@dataclass(frozen=True)
class Problem:
    """Exponents and eigenvalue parameter for one boundary value problem."""

    p: float
    nl: Nonlinearity
    lam: float

    def __post_init__(self):
        if self.p <= 1.0:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if self.lam <= 0.0:
            raise ValueError(f"lambda must be positive, got {self.lam}")

    @property
    def q(self) -> float:
        return self.nl.q

    @property
    def kappa(self) -> float:
        """Prefactor ((p-1)/(lambda p))^(1/p) linking I/J to theta/alpha."""
        return ((self.p - 1.0) / (self.lam * self.p)) ** (1.0 / self.p)


@dataclass(frozen=True)
class SlopeBounds:
    """Maximal shooting slopes: positive arch, negative arch, and their min."""

    r_pos: float
    r_neg: float
    r_star: float


@dataclass(frozen=True)
class EndpointLevels:
    """Lambda-independent arch levels attained at the slope bound r_star."""

    z_hat: float
    s_hat: float


def slope_bounds(problem: Problem) -> SlopeBounds:
    """Slopes above which an arch can no longer turn around."""
    a_plus, a_minus = areas(problem.nl)
    scale = problem.lam * problem.p / (problem.p - 1.0)
    r_pos = (scale * a_plus) ** (1.0 / problem.p)
    r_neg = (scale * a_minus) ** (1.0 / problem.p)
    return SlopeBounds(r_pos=r_pos, r_neg=r_neg, r_star=min(r_pos, r_neg))


# ---------------------------------------------------------------------------
# level maps
# ---------------------------------------------------------------------------


def _area_pos(nl: Nonlinearity, z):
    return np.asarray(z) ** nl.q / nl.q - eval_F(nl, z)


def _area_neg(nl: Nonlinearity, s):
    return np.abs(np.asarray(s)) ** nl.q / nl.q - eval_F(nl, s)


def level_pos(nl: Nonlinearity, rho: float) -> float:
    """The level z in (0, z_plus] with z^q/q - F(z) = rho."""
    a_plus, _ = areas(nl)
    if rho <= 0.0 or rho > a_plus * (1.0 + 1e-12):
        raise OutOfRange(f"rho = {rho} outside (0, A+ = {a_plus}]")
    if rho >= a_plus:
        return nl.z_plus
    return brentq(
        lambda z: float(_area_pos(nl, z)) - rho,
        0.0,
        nl.z_plus,
        xtol=1e-17 + 1e-16 * nl.z_plus,
        rtol=8.9e-16,
    )


def level_neg(nl: Nonlinearity, rho: float) -> float:
    """The level S in [z_minus, 0) with |S|^q/q - F(S) = rho."""
    _, a_minus = areas(nl)
    if rho <= 0.0 or rho > a_minus * (1.0 + 1e-12):
        raise OutOfRange(f"rho = {rho} outside (0, A- = {a_minus}]")
    if rho >= a_minus:
        return nl.z_minus
    return brentq(
        lambda s: float(_area_neg(nl, s)) - rho,
        nl.z_minus,
        0.0,
        xtol=1e-17 + 1e-16 * abs(nl.z_minus),
        rtol=8.9e-16,
    )


def _level_many(nl: Nonlinearity, rho: np.ndarray, positive: bool) -> np.ndarray:
    """Vectorized bisection of the level map (80 halvings)."""
    if positive:
        lo = np.zeros_like(rho)
        hi = np.full_like(rho, nl.z_plus)
        fun = lambda z: _area_pos(nl, z) - rho
    else:
        lo = np.full_like(rho, nl.z_minus)
        hi = np.zeros_like(rho)
        fun = lambda s: -(_area_neg(nl, s) - rho)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        high = fun(mid) > 0.0
        hi = np.where(high, mid, hi)
        lo = np.where(high, lo, mid)
    return 0.5 * (lo + hi)


def _rho_of_r(problem: Problem, r) -> np.ndarray:
    return (problem.p - 1.0) * np.asarray(r) ** problem.p / (problem.lam * problem.p)


def z_of_r(problem: Problem, r: float) -> float:
    """Arch maximum for shooting slope r in (0, r_pos)."""
    b = slope_bounds(problem)
    if not 0.0 < r < b.r_pos:
        raise OutOfRange(f"r = {r} outside (0, r(lambda) = {b.r_pos})")
    return level_pos(problem.nl, float(_rho_of_r(problem, r)))


def s_of_r(problem: Problem, r: float) -> float:
    """Arch minimum for shooting slope r in (0, r_neg)."""
    b = slope_bounds(problem)
    if not 0.0 < r < b.r_neg:
        raise OutOfRange(f"r = {r} outside (0, r-(lambda) = {b.r_neg})")
    return level_neg(problem.nl, float(_rho_of_r(problem, r)))


def endpoint_levels(nl: Nonlinearity, p: float) -> EndpointLevels:
    """Levels attained at r_star; the smaller-area side sits exactly at its zero.

    Dividing the level equations by lambda shows these are independent of
    lambda, so they are computed once per nonlinearity and reused.
    """
    a_plus, a_minus = areas(nl)
    rho_star = min(a_plus, a_minus)
    z_hat = nl.z_plus if a_plus <= a_minus else level_pos(nl, rho_star)
    s_hat = nl.z_minus if a_minus <= a_plus else level_neg(nl, rho_star)
    return EndpointLevels(z_hat=z_hat, s_hat=s_hat)


# ---------------------------------------------------------------------------
# the radicand G and the substituted integrand
# ---------------------------------------------------------------------------

_GL4_X, _GL4_W = np.polynomial.legendre.leggauss(4)
_GL4_SIGMA = 0.5 * (_GL4_X + 1.0)
_GL4_WBAR = 0.5 * _GL4_W


def _dm(nl: Nonlinearity, s: float) -> float:
    """Derivative of the map m(s) = |s|^{q-2}s - f(s)."""
    return (nl.q - 1.0) * abs(s) ** (nl.q - 2.0) - float(eval_df(nl, s))


def _tail_mean_pos(nl: Nonlinearity, a, h):
    """Mean of m over [a-h, a]; G = h * mean, free of cancellation."""
    pts = a[..., None] - h[..., None] * _GL4_SIGMA
    return eval_m(nl, pts) @ _GL4_WBAR


def _tail_mean_neg(nl: Nonlinearity, b, h):
    """Mean of -m over [b, b+h] for the negative side."""
    pts = b[..., None] + h[..., None] * _GL4_SIGMA
    return -(eval_m(nl, pts) @ _GL4_WBAR)


def radicand_pos(nl: Nonlinearity, a, t):
    """G(t) = F(t) - F(a) + (a^q - t^q)/q for t in [0, a], a in (0, z_plus].

    Near t = a the direct formula cancels catastrophically, so the tail is
    evaluated as h times the Gauss mean of m over [a-h, a].
    """
    a_b, t_b = np.broadcast_arrays(np.asarray(a, float), np.asarray(t, float))
    h = a_b - t_b
    out = np.empty_like(h)
    tail = h < _TAIL_FRAC * a_b
    d = ~tail
    out[d] = (
        eval_F(nl, t_b[d]) - eval_F(nl, a_b[d]) + (a_b[d] ** nl.q - t_b[d] ** nl.q) / nl.q
    )
    out[tail] = h[tail] * _tail_mean_pos(nl, a_b[tail], h[tail])
    return out if out.ndim else float(out)


def radicand_neg(nl: Nonlinearity, b, t):
    """G(t) = F(t) - F(b) + (|b|^q - |t|^q)/q for t in [b, 0], b in [z_minus, 0)."""
    b_b, t_b = np.broadcast_arrays(np.asarray(b, float), np.asarray(t, float))
    h = t_b - b_b
    out = np.empty_like(h)
    tail = h < _TAIL_FRAC * np.abs(b_b)
    d = ~tail
    out[d] = (
        eval_F(nl, t_b[d])
        - eval_F(nl, b_b[d])
        + (np.abs(b_b[d]) ** nl.q - np.abs(t_b[d]) ** nl.q) / nl.q
    )
    out[tail] = h[tail] * _tail_mean_neg(nl, b_b[tail], h[tail])
    return out if out.ndim else float(out)


def _beta(p: float, double: bool) -> float:
    return p / (p - 2.0) if double else p / (p - 1.0)


def psi_transformed(nl: Nonlinearity, p: float, a: float, double: bool, positive: bool):
    """Integrand of I/J after the substitution t = a -/+ w^beta.

    Returns a vectorized function of w on (0, a^(1/beta)).  The simple-zero
    exponent makes the w-prefactor cancel exactly in the tail region, so the
    returned function is bounded all the way to w = 0.
    """
    beta = _beta(p, double)
    scale = abs(a)
    mean = _tail_mean_pos if positive else _tail_mean_neg
    exp_tail = 1.0 / (p - 2.0) if double else 0.0
    if double:
        dm_end = abs(_dm(nl, a))

    def psi(w):
        w = np.asarray(w, float)
        with np.errstate(under="ignore"):
            h = w**beta
        out = np.empty_like(w)
        tail = h < _TAIL_FRAC * scale
        d = ~tail
        if np.any(d):
            t = a - h[d] if positive else a + h[d]
            if positive:
                G = eval_F(nl, t) - eval_F(nl, a) + (a**nl.q - t**nl.q) / nl.q
            else:
                G = (
                    eval_F(nl, t)
                    - eval_F(nl, a)
                    + (abs(a) ** nl.q - np.abs(t) ** nl.q) / nl.q
                )
            out[d] = G ** (-1.0 / p) * beta * w[d] ** (beta - 1.0)
        if np.any(tail):
            ht = h[tail]
            wt = w[tail]
            res = np.empty_like(ht)
            if double:
                model = ht < _MODEL_FRAC * scale
                res[model] = beta * (0.5 * dm_end) ** (-1.0 / p)
                rest = ~model
                if np.any(rest):
                    anchor = np.full(rest.sum(), a)
                    S = mean(nl, anchor, ht[rest])
                    res[rest] = beta * S ** (-1.0 / p) * wt[rest] ** exp_tail
            else:
                anchor = np.full(ht.size, a)
                S = mean(nl, anchor, ht)
                res = beta * S ** (-1.0 / p)
            out[tail] = res
        return out

    return psi


# ---------------------------------------------------------------------------
# the singular integrals I and J
# ---------------------------------------------------------------------------


def integral_I(nl: Nonlinearity, p: float, a: float, tol: float = 1e-10) -> float:
    """I(a) for a in (0, z_plus]; the endpoint needs p > 2."""
    zp = nl.z_plus
    if not 0.0 < a <= zp * (1.0 + 1e-12):
        raise DomainError(f"a = {a} outside (0, z+ = {zp}]")
    double = a >= zp * (1.0 - _ENDPOINT_SNAP)
    if double:
        a = zp
        if p <= 2.0:
            raise Divergent("I(z+) diverges for p <= 2")
    beta = _beta(p, double)
    psi = psi_transformed(nl, p, a, double, positive=True)
    return tanh_sinh(psi, a ** (1.0 / beta), tol)


def integral_J(nl: Nonlinearity, p: float, a: float, tol: float = 1e-10) -> float:
    """J(a) for a in [z_minus, 0); the endpoint needs p > 2."""
    zm = nl.z_minus
    if not zm * (1.0 + 1e-12) <= a < 0.0:
        raise DomainError(f"a = {a} outside [z- = {zm}, 0)")
    double = a <= zm * (1.0 - _ENDPOINT_SNAP)
    if double:
        a = zm
        if p <= 2.0:
            raise Divergent("J(z-) diverges for p <= 2")
    beta = _beta(p, double)
    psi = psi_transformed(nl, p, a, double, positive=False)
    return tanh_sinh(psi, abs(a) ** (1.0 / beta), tol)


def _integral_many(nl: Nonlinearity, p: float, levels: np.ndarray, positive: bool, tol: float):
    """Batched I (positive=True) or J over interior levels."""
    levels = np.asarray(levels, dtype=float)
    beta = p / (p - 1.0)
    mean = _tail_mean_pos if positive else _tail_mean_neg
    q = nl.q

    def rows(w, idx):
        a = levels[idx][:, None]
        scale = np.abs(a)
        with np.errstate(under="ignore"):
            h = w**beta
        out = np.empty_like(w)
        tail = h < _TAIL_FRAC * scale
        d = ~tail
        a_mat = np.broadcast_to(a, w.shape)
        if np.any(d):
            am = a_mat[d]
            t = am - h[d] if positive else am + h[d]
            G = eval_F(nl, t) - eval_F(nl, am) + (np.abs(am) ** q - np.abs(t) ** q) / q
            out[d] = G ** (-1.0 / p) * beta * w[d] ** (beta - 1.0)
        if np.any(tail):
            S = mean(nl, a_mat[tail], h[tail])
            out[tail] = beta * S ** (-1.0 / p)
        return out

    uppers = np.abs(levels) ** (1.0 / beta)
    return tanh_sinh_batch(rows, uppers, tol)


def theta(problem: Problem, r: float, tol: float = 1e-10) -> float:
    """Half-width of the positive arch launched with slope r."""
    return problem.kappa * integral_I(problem.nl, problem.p, z_of_r(problem, r), tol)


def alpha(problem: Problem, r: float, tol: float = 1e-10) -> float:
    """Half-width of the negative arch launched with slope r."""
    return problem.kappa * integral_J(problem.nl, problem.p, s_of_r(problem, r), tol)


def theta_alpha_grids(
    problem: Problem,
    r_grid: np.ndarray,
    tol: float = 1e-8,
    need_theta: bool = True,
    need_alpha: bool = True,
):
    """Vectorized (theta, alpha) along a grid of admissible slopes.

    Either array may be requested alone; the other comes back as None.
    Intended for bracketing scans; refined roots re-evaluate scalars at full
    tolerance.
    """
    rho = _rho_of_r(problem, np.asarray(r_grid, dtype=float))
    th = al = None
    if need_theta:
        z = _level_many(problem.nl, rho, positive=True)
        th = problem.kappa * _integral_many(problem.nl, problem.p, z, True, tol)
    if need_alpha:
        s = _level_many(problem.nl, rho, positive=False)
        al = problem.kappa * _integral_many(problem.nl, problem.p, s, False, tol)
    return th, al


def flat_core_half_widths(problem: Problem, tol: float = 1e-10) -> tuple[float, float]:
    """x(lambda) and y(lambda): half-widths of the saturated arches (p > 2)."""
    if problem.p <= 2.0:
        raise Divergent("flat cores require p > 2")
    nl = problem.nl
    x_lam = problem.kappa * integral_I(nl, problem.p, nl.z_plus, tol)
    y_lam = problem.kappa * integral_J(nl, problem.p, nl.z_minus, tol)
    return x_lam, y_lam


# ---------------------------------------------------------------------------
# incomplete arch integrals (used by profile reconstruction and regularity)
# ---------------------------------------------------------------------------


def arch_tail_cumulative(
    nl: Nonlinearity, p: float, level: float, double: bool, w_grid: np.ndarray
) -> np.ndarray:
    """Cumulative integral of the substituted integrand from w = 0.

    ``w_grid`` must ascend from 0; entry i is the x-distance (in G-space,
    i.e. before the kappa prefactor) between the arch extremum and the point
    at ``|level - t| = w_grid[i]^beta``.
    """
    from .quadrature import cumulative_gl

    psi = psi_transformed(nl, p, level, double, positive=level > 0.0)
    return cumulative_gl(psi, np.asarray(w_grid, dtype=float))


def arch_tail_distance(
    nl: Nonlinearity, p: float, level: float, double: bool, w: float, tol: float = 1e-11
) -> float:
    """Scalar version: G-space distance from the arch extremum to offset w."""
    if w == 0.0:
        return 0.0
    psi = psi_transformed(nl, p, level, double, positive=level > 0.0)
    return tanh_sinh(psi, w, tol)


def invert_arch_distance(
    nl: Nonlinearity, p: float, level: float, double: bool, target: float, tol: float = 1e-11
) -> float:
    """Solve arch_tail_distance(w) = target for w (target in G-space)."""
    beta = _beta(p, double)
    w_max = abs(level) ** (1.0 / beta)
    fun = lambda w: arch_tail_distance(nl, p, level, double, w, tol) - target
    hi = w_max * (1.0 - 1e-13)
    if fun(hi) < 0.0:
        raise OutOfRange(f"target distance {target} exceeds the arch half-width")
    return brentq(fun, 0.0, hi, xtol=1e-15 * w_max, rtol=8.9e-16)
