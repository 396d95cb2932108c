"""Per-class solution enumeration by root-finding the matching conditions.

A candidate in class ``S_j^sign`` alternates ``n_pos`` positive and ``n_neg``
negative arches; it solves the boundary value problem exactly when the arch
widths fill ``[0, 1]``:

    2*n_pos*theta(r) + 2*n_neg*alpha(r) = 1.

For ``q <= p`` the left side is monotone in ``r`` (0 or 1 root per class);
for ``q > p`` it diverges as ``r -> 0`` and dips to an interior minimum, so
roots appear in pairs born at a tangency.  For ``p > 2`` the left side stays
finite at the slope bound; when it is still below 1 there, the remaining
length is absorbed by flat plateaus at ``z_plus``/``z_minus`` and the class
carries a continuum of solutions, represented by a single descriptor with
the plateau budget and the continuum dimension.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import OutOfRange
from .nonlinearity import areas
from .timemap import (
    Problem,
    endpoint_levels,
    integral_I,
    integral_J,
    slope_bounds,
    theta,
    alpha,
    theta_alpha_grids,
)

SIGN_POS = "+"
SIGN_NEG = "-"

_SCAN_EPS = 1e-12  # relative clamp of the open slope interval
_TANGENT_TOL = 1e-9  # |residual| at a refined minimum below this is a tangency
_MERGE_TOL = 1e-9  # roots closer than this (relative to the bound) merge


@dataclass(frozen=True)
class SolutionClass:
    """Class S_j^sign: sign of the initial slope and j-1 interior zeros."""

    j: int
    sign: str

    def __post_init__(self):
        if self.j < 1:
            raise ValueError(f"class index must be >= 1, got {self.j}")
        if self.sign not in (SIGN_POS, SIGN_NEG):
            raise ValueError(f"sign must be '+' or '-', got {self.sign!r}")

    @property
    def n_pos(self) -> int:
        return (self.j + 1) // 2 if self.sign == SIGN_POS else self.j // 2

    @property
    def n_neg(self) -> int:
        return self.j - self.n_pos


@dataclass(frozen=True)
class SolutionDescriptor:
    """Symbolic identity of one solution (or one flat-core continuum)."""

    j: int
    sign: str
    kind: str  # "regular" | "flat_core" | "trivial"
    r: float
    degenerate: bool = False
    residual: float = 0.0
    core_budget: float = 0.0
    core_count: int = 0
    core_side: str = ""
    continuum_dim: int = 0

    @property
    def descriptor_id(self) -> str:
        key = (
            f"{self.j}|{self.sign}|{self.kind}|{self.r:.12g}|"
            f"{self.core_count}|{self.core_side}"
        )
        return hashlib.sha256(key.encode()).hexdigest()[:12]

    def to_json_dict(self) -> dict:
        return {
            "id": self.descriptor_id,
            "j": self.j,
            "sign": self.sign,
            "kind": self.kind,
            "r": self.r,
            "degenerate": self.degenerate,
            "residual": self.residual,
            "core_budget": self.core_budget,
            "core_count": self.core_count,
            "core_side": self.core_side,
            "continuum_dim": self.continuum_dim,
        }


TRIVIAL = SolutionDescriptor(j=0, sign="0", kind="trivial", r=0.0)


def area_relation(nl, rel_tol: float = 1e-12) -> str:
    """'equal', 'plus_less', or 'plus_greater' comparison of A(z+) and A(z-)."""
    a_plus, a_minus = areas(nl)
    if abs(a_plus - a_minus) <= rel_tol * max(a_plus, a_minus):
        return "equal"
    return "plus_less" if a_plus < a_minus else "plus_greater"


def flat_core_side(sclass: SolutionClass, relation: str) -> str:
    """Which arches carry plateaus: single-arch classes saturate their own
    sign, multi-arch classes follow the area comparison."""
    if sclass.j == 1:
        return "positive" if sclass.sign == SIGN_POS else "negative"
    return {
        "equal": "alternating",
        "plus_less": "positive",
        "plus_greater": "negative",
    }[relation]


def flat_core_count(sclass: SolutionClass, relation: str) -> int:
    side = flat_core_side(sclass, relation)
    if side == "alternating":
        return sclass.j
    return sclass.n_pos if side == "positive" else sclass.n_neg


def continuum_dimension(sclass: SolutionClass, relation: str) -> int:
    """Dimension of the flat-core continuum: free plateau lengths minus the
    one constraint that they sum to the budget."""
    return flat_core_count(sclass, relation) - 1


class _ProblemCache:
    """Shared per-problem quantities reused across classes in one enumeration."""

    def __init__(self, problem: Problem, quad_tol: float, scan_points: int):
        self.problem = problem
        self.quad_tol = quad_tol
        self.scan_points = scan_points
        self.bounds = slope_bounds(problem)
        self.relation = area_relation(problem.nl)
        self._levels = None
        self._endpoint_integrals = None
        self._grids: dict[str, tuple] = {}

    @property
    def levels(self):
        if self._levels is None:
            self._levels = endpoint_levels(self.problem.nl, self.problem.p)
        return self._levels

    def endpoint_integrals(self):
        """(I at z_hat, J at s_hat, I at z_plus, J at z_minus); p > 2 only."""
        if self._endpoint_integrals is None:
            nl = self.problem.nl
            p = self.problem.p
            lv = self.levels
            i_zp = integral_I(nl, p, nl.z_plus, self.quad_tol)
            j_zm = integral_J(nl, p, nl.z_minus, self.quad_tol)
            i_hat = i_zp if lv.z_hat == nl.z_plus else integral_I(nl, p, lv.z_hat, self.quad_tol)
            j_hat = j_zm if lv.s_hat == nl.z_minus else integral_J(nl, p, lv.s_hat, self.quad_tol)
            self._endpoint_integrals = (i_hat, j_hat, i_zp, j_zm)
        return self._endpoint_integrals

    def bound_for(self, sclass: SolutionClass) -> float:
        if sclass.j == 1:
            return self.bounds.r_pos if sclass.sign == SIGN_POS else self.bounds.r_neg
        return self.bounds.r_star

    def grid_maps(self, sclass: SolutionClass):
        """(r grid, theta grid, alpha grid) on the class's admissible interval."""
        key = "pos" if sclass.j == 1 and sclass.sign == SIGN_POS else (
            "neg" if sclass.j == 1 and sclass.sign == SIGN_NEG else "star"
        )
        if key not in self._grids:
            bound = self.bound_for(sclass)
            half = np.geomspace(_SCAN_EPS, 0.5, self.scan_points // 2)
            grid = bound * np.unique(np.concatenate([half, 1.0 - half[::-1]]))
            th, al = theta_alpha_grids(
                self.problem,
                grid,
                tol=max(1e-8, self.quad_tol),
                need_theta=key != "neg",
                need_alpha=key != "pos",
            )
            self._grids[key] = (grid, th, al)
        return self._grids[key]

    def arch_total_at_bound(self, sclass: SolutionClass) -> float:
        """Total arch width when every arch launches at the class's bound."""
        kappa = self.problem.kappa
        i_hat, j_hat, i_zp, j_zm = self.endpoint_integrals()
        if sclass.j == 1:
            return 2.0 * kappa * (i_zp if sclass.sign == SIGN_POS else j_zm)
        return 2.0 * kappa * (sclass.n_pos * i_hat + sclass.n_neg * j_hat)


def matching_residual(problem: Problem, sclass: SolutionClass, r: float, tol: float = 1e-10) -> float:
    """Left side of the class's matching condition minus 1."""
    bound = slope_bounds(problem)
    upper = bound.r_pos if (sclass.j == 1 and sclass.sign == SIGN_POS) else (
        bound.r_neg if (sclass.j == 1 and sclass.sign == SIGN_NEG) else bound.r_star
    )
    if not 0.0 < r < upper:
        raise OutOfRange(f"r = {r} outside (0, {upper}) for class {sclass}")
    total = 0.0
    if sclass.n_pos:
        total += 2.0 * sclass.n_pos * theta(problem, r, tol)
    if sclass.n_neg:
        total += 2.0 * sclass.n_neg * alpha(problem, r, tol)
    return total - 1.0


def _flat_core_descriptor(cache: _ProblemCache, sclass: SolutionClass) -> SolutionDescriptor | None:
    problem = cache.problem
    if problem.p <= 2.0:
        return None
    budget = 1.0 - cache.arch_total_at_bound(sclass)
    if budget <= 0.0:
        return None
    return SolutionDescriptor(
        j=sclass.j,
        sign=sclass.sign,
        kind="flat_core",
        r=cache.bound_for(sclass),
        core_budget=budget,
        core_count=flat_core_count(sclass, cache.relation),
        core_side=flat_core_side(sclass, cache.relation),
        continuum_dim=continuum_dimension(sclass, cache.relation),
    )


def solve_class(
    problem: Problem,
    sclass: SolutionClass,
    *,
    scan_points: int = 1024,
    quad_tol: float = 1e-10,
    _shared: _ProblemCache | None = None,
) -> list[SolutionDescriptor]:
    """All solutions in one class: regular matching roots, a tangent root at
    a fold, and the flat-core continuum descriptor when the budget is open.

    Returns an empty list when the class has no solutions at this lambda.
    """
    cache = _shared if _shared is not None else _ProblemCache(problem, quad_tol, scan_points)
    grid, th, al = cache.grid_maps(sclass)
    res = -np.ones_like(grid)
    if sclass.n_pos:
        res += 2.0 * sclass.n_pos * th
    if sclass.n_neg:
        res += 2.0 * sclass.n_neg * al

    refine_tol = 0.1 * min(quad_tol, 1e-11)  # grid noise must not mask the root residual

    def residual(r: float) -> float:
        return matching_residual(problem, sclass, r, refine_tol)

    bound = cache.bound_for(sclass)
    roots: list[tuple[float, float, bool]] = []  # (r, residual, degenerate)

    # strict crossings only: exact zeros over a run of grid points happen when
    # lambda sits on a birth threshold (the residual flattens onto 0 at the
    # interval edge) and do not correspond to class members
    sign_change = np.where(np.sign(res[:-1]) * np.sign(res[1:]) < 0)[0]
    noise_floor = 1e-10  # residual evaluations are only this trustworthy
    for i in sign_change:
        # the scan runs at a coarser tolerance; confirm the bracket before
        # Brent and reject crossings that never rise above evaluation noise
        # (the residual flattens onto 0 at a birth threshold)
        f_lo = residual(float(grid[i]))
        f_hi = residual(float(grid[i + 1]))
        if f_lo * f_hi >= 0.0 or min(abs(f_lo), abs(f_hi)) < noise_floor:
            continue
        r0 = brentq(residual, grid[i], grid[i + 1], xtol=1e-15 * bound, rtol=8.9e-16)
        roots.append((float(r0), float(residual(r0)), False))

    if problem.q > problem.p:
        # interior minima without a sign change can hide a tangency or a
        # just-born root pair; refine them before deciding
        interior = np.where((res[1:-1] < res[:-2]) & (res[1:-1] <= res[2:]))[0] + 1
        for i in interior:
            if res[i] > 0.05 or any(grid[i - 1] <= r <= grid[i + 1] for r, _, _ in roots):
                continue
            opt = minimize_scalar(
                residual,
                bracket=(float(grid[i - 1]), float(grid[i]), float(grid[i + 1])),
                method="golden",
                options={"xtol": 1e-12},
            )
            r_min, f_min = float(opt.x), float(opt.fun)
            if abs(f_min) <= _TANGENT_TOL:
                roots.append((r_min, f_min, True))
            elif f_min < 0.0:
                for lo, hi in ((grid[i - 1], r_min), (r_min, grid[i + 1])):
                    if residual(float(lo)) * residual(float(hi)) < 0.0:
                        r0 = brentq(residual, lo, hi, xtol=1e-15 * bound, rtol=8.9e-16)
                        roots.append((float(r0), float(residual(r0)), False))

    roots.sort()
    merged: list[tuple[float, float, bool]] = []
    for r0, f0, deg in roots:
        if merged and abs(r0 - merged[-1][0]) <= _MERGE_TOL * bound:
            prev = merged.pop()
            merged.append(((r0 + prev[0]) / 2.0, min(f0, prev[1]), True))
        else:
            merged.append((r0, f0, deg))

    out = [
        SolutionDescriptor(
            j=sclass.j, sign=sclass.sign, kind="regular", r=r0, residual=f0, degenerate=deg
        )
        for r0, f0, deg in merged
    ]
    fc = _flat_core_descriptor(cache, sclass)
    if fc is not None:
        out.append(fc)
    return out


def enumerate_solutions(
    problem: Problem,
    j_max: int,
    *,
    scan_points: int = 1024,
    quad_tol: float = 1e-10,
) -> list[SolutionDescriptor]:
    """Trivial marker plus every descriptor of every class with j <= j_max."""
    if j_max < 1:
        raise ValueError(f"j_max must be >= 1, got {j_max}")
    cache = _ProblemCache(problem, quad_tol, scan_points)
    out = [TRIVIAL]
    for j in range(1, j_max + 1):
        for sign in (SIGN_POS, SIGN_NEG):
            out.extend(
                solve_class(
                    problem,
                    SolutionClass(j, sign),
                    scan_points=scan_points,
                    quad_tol=quad_tol,
                    _shared=cache,
                )
            )
    return out


def find_descriptor(descriptors: list[SolutionDescriptor], descriptor_id: str):
    for d in descriptors:
        if d.descriptor_id == descriptor_id:
            return d
    return None
