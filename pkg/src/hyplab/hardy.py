"""Weighted integral Hardy machinery on the model spaces.

Everything here reduces to one-dimensional work against the radial measure
w(R) dR with w the shell density of the space.  The five equivalent
finiteness conditions D1..D5 (and the adjoint D*1..D*5, where ball and
complement trade places) are evaluated as maxima over a log-spaced radius
grid, which makes every reported value an honest lower bound of the true
supremum.  The constant bracket

    D1  <=  C  <=  D1 * (p')^{1/p'} * p^{1/q}

is used by `test_integral_hardy` to hunt for violations over random
nonnegative test functions; zero violations are expected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spaces import SpaceModel, shell_density

DEFAULT_R_TAIL = 45.0  # master-grid extent; exponential margins checked below
SUP_GRID_RANGE = (1e-3, 40.0)


class WeightPreconditionError(ValueError):
    """A weight pair violates the integrability preconditions."""


@dataclass(frozen=True)
class WeightSpec:
    """Radial weight r^gamma * e^{growth * r} * amplitude, or a tabulated profile.

    The power-exponential family is closed under the v^{1-p'} conjugation the
    Hardy machinery needs, which keeps every integrability check analytic.
    """

    kind: str = "power_exp"  # "power_exp" or "table"
    gamma: float = 0.0
    growth: float = 0.0
    amplitude: float = 1.0
    table_nodes: tuple = field(default=())
    table_values: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in ("power_exp", "table"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.amplitude < 0:
            raise ValueError("weights must be nonnegative")
        # amplitude 0 is admitted only as the degenerate u == 0 limit; it is
        # rejected wherever a conjugated power would blow up
        if self.kind == "table":
            if len(self.table_nodes) != len(self.table_values) or not self.table_nodes:
                raise ValueError("tabulated weight needs matching nodes/values")
            if any(v <= 0 for v in self.table_values):
                raise ValueError("tabulated weight must be positive")

    def __call__(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.kind == "table":
            # log-linear interpolation keeps positivity
            lv = np.interp(np.log(r), np.log(np.array(self.table_nodes)),
                           np.log(np.array(self.table_values)))
            return np.exp(lv)
        return self.amplitude * r**self.gamma * np.exp(self.growth * r)

    def conjugated(self, p: float) -> "WeightSpec":
        """The weight v^{1-p'} entering V."""
        if self.amplitude == 0.0:
            raise ValueError("v must be strictly positive to form v^{1-p'}")
        e = 1.0 - p / (p - 1.0)
        if self.kind == "table":
            return WeightSpec(
                kind="table",
                table_nodes=self.table_nodes,
                table_values=tuple(v**e for v in self.table_values),
            )
        return WeightSpec(
            kind="power_exp",
            gamma=self.gamma * e,
            growth=self.growth * e,
            amplitude=self.amplitude**e,
        )


@dataclass
class HardyReport:
    """D quantities, applicability flags, and the relation checks of one run."""

    adjoint: bool
    p: float
    q: float
    s: float
    D: list  # five entries; math.inf marks a divergent quantity
    applicable: list  # D3/D5 carry integrability provisos
    relations: list  # dicts: name, lhs, rhs, ok
    bracket_upper_factor: float
    extrapolated_bracket: bool = False

    @property
    def bracket_ok(self) -> bool:
        return all(rel["ok"] for rel in self.relations)

    def to_dict(self) -> dict:
        return {
            "adjoint": self.adjoint,
            "p": self.p,
            "q": self.q,
            "s": self.s,
            "D": [None if math.isinf(d) else d for d in self.D],
            "applicable": self.applicable,
            "relations": self.relations,
            "bracket_ok": self.bracket_ok,
            "bracket_upper_factor": self.bracket_upper_factor,
            "extrapolated_bracket": self.extrapolated_bracket,
        }


# ---------------------------------------------------------------------------
# the radial measure and cumulative machinery
# ---------------------------------------------------------------------------


class RadialMeasure:
    """Master graded grid with the shell density of the space."""

    def __init__(self, space: SpaceModel, r_tail: float = DEFAULT_R_TAIL,
                 n_log: int = 1200, n_uni: int = 3000):
        self.space = space
        log_part = np.exp(np.linspace(math.log(1e-5), 0.0, n_log, endpoint=False))
        uni_part = np.linspace(1.0, r_tail, n_uni)
        self.r = np.concatenate([log_part, uni_part])
        self.w = np.asarray(shell_density(space, self.r), dtype=float)
        self.r_tail = r_tail

    def cumulative(self, vals: np.ndarray) -> np.ndarray:
        """C(R_k) = int_0^{R_k} vals * w dr, with a power-law stub below r[0]."""
        integrand = vals * self.w
        out = np.empty_like(integrand)
        seg = 0.5 * (integrand[1:] + integrand[:-1]) * np.diff(self.r)
        # local power fit for the [0, r0] stub; exponent > -1 checked upstream
        if integrand[0] > 0 and integrand[1] > 0:
            e = math.log(integrand[1] / integrand[0]) / math.log(self.r[1] / self.r[0])
            e = max(e, -0.999)
            stub = integrand[0] * self.r[0] / (e + 1.0)
        else:
            stub = 0.0
        out[0] = stub
        out[1:] = stub + np.cumsum(seg)
        return out

    def reverse_cumulative(self, vals: np.ndarray) -> np.ndarray:
        """T(R_k) = int_{R_k}^{r_tail} vals * w dr (tail beyond is checked)."""
        integrand = vals * self.w
        seg = 0.5 * (integrand[1:] + integrand[:-1]) * np.diff(self.r)
        out = np.zeros_like(integrand)
        out[:-1] = np.cumsum(seg[::-1])[::-1]
        return out

    def tail_negligible(self, vals: np.ndarray, rel: float = 1e-9) -> bool:
        integrand = vals * self.w
        total = np.trapezoid(integrand, self.r)
        if total == 0:
            return True
        # crude exponential extrapolation of the last decade
        tail_window = self.r > self.r_tail - 5.0
        y = integrand[tail_window]
        if np.all(y <= 0):
            return True
        rate = (math.log(max(y[-1], 1e-300)) - math.log(max(y[0], 1e-300))) / 5.0
        if rate >= -1e-3:
            return False
        tail_est = y[-1] / (-rate)
        return tail_est <= rel * abs(total) + 1e-300


_MEASURE_CACHE: dict = {}


def get_measure(space: SpaceModel) -> RadialMeasure:
    if space.factors not in _MEASURE_CACHE:
        _MEASURE_CACHE[space.factors] = RadialMeasure(space)
    return _MEASURE_CACHE[space.factors]


def _check_preconditions(space: SpaceModel, u: WeightSpec, v: WeightSpec, p: float,
                         adjoint: bool) -> None:
    """Hypothesis-level integrability preconditions, checked analytically for the
    power-exponential family and numerically on the master grid otherwise."""
    two_rho = 2 * space.rho_norm
    n = space.dim
    pprime = p / (p - 1)
    vconj = v.conjugated(p)
    if u.kind == "power_exp":
        if u.growth + two_rho >= -0.1:
            raise WeightPreconditionError(
                "u is not integrable away from the origin: need growth(u) + 2|rho| < 0 "
                f"(got {u.growth} + {two_rho})"
            )
    if vconj.kind == "power_exp":
        if vconj.gamma + n - 1 <= -1:
            raise WeightPreconditionError(
                "v^{1-p'} is not locally integrable: need gamma(v)(1-p') > -n "
                f"(got exponent {vconj.gamma + n - 1} <= -1 in the shell integrand)"
            )
    if adjoint and vconj.kind == "power_exp":
        if vconj.growth + two_rho >= -0.1:
            raise WeightPreconditionError(
                "adjoint form needs v^{1-p'} integrable at infinity: "
                f"growth(v^(1-p')) + 2|rho| = {vconj.growth + two_rho} >= 0"
            )
    meas = get_measure(space)
    if not meas.tail_negligible(u(meas.r), rel=1e-8):
        raise WeightPreconditionError("u * shell density has a non-negligible tail at r_tail")


def _globally_integrable(space: SpaceModel, w: WeightSpec) -> bool:
    two_rho = 2 * space.rho_norm
    n = space.dim
    if w.kind == "power_exp":
        return (w.growth + two_rho < -1e-9) and (w.gamma + n - 1 > -1)
    meas = get_measure(space)
    vals = w(meas.r)
    return meas.tail_negligible(vals, rel=1e-6) and vals[0] * meas.w[0] * meas.r[0] < np.inf


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def compute_UV(space: SpaceModel, u: WeightSpec, v: WeightSpec, p: float, R: float):
    """U(R) = int_{|x| >= R} u dvol and V(R) = int_{|x| <= R} v^{1-p'} dvol."""
    if R <= 0:
        raise ValueError("R must be positive")
    if not (1.0 < p < math.inf):
        raise ValueError("p must lie in (1, inf)")
    _check_preconditions(space, u, v, p, adjoint=False)
    meas = get_measure(space)
    U_arr = meas.reverse_cumulative(u(meas.r))
    V_arr = meas.cumulative(v.conjugated(p)(meas.r))
    U = float(np.interp(R, meas.r, U_arr))
    V = float(np.interp(R, meas.r, V_arr))
    return U, V


def _sup_grid(refine: bool) -> np.ndarray:
    n = 400 if refine else 200
    return np.exp(np.linspace(math.log(SUP_GRID_RANGE[0]), math.log(SUP_GRID_RANGE[1]), n))


def d_conditions(
    space: SpaceModel,
    u: WeightSpec,
    v: WeightSpec,
    p: float,
    q: float,
    s: float | None = None,
    adjoint: bool = False,
    refine: bool = False,
    rel_tol: float = 1e-3,
) -> HardyReport:
    """All five D quantities (or adjoint D*), with the published relations.

    Every D is a max over the log-spaced radius grid, i.e. a lower bound of
    the true supremum; the relation checks carry ``rel_tol`` slack for that.
    D3/D5 are computed only when their global-integrability provisos hold and
    are marked not-applicable otherwise.
    """
    if not (1.0 < p <= q < math.inf):
        raise ValueError("need 1 < p <= q < inf")
    pprime = p / (p - 1.0)
    if s is None:
        s = 1.0 / (2.0 * pprime)
    if s <= 0:
        raise ValueError("s must be positive")
    if u.amplitude == 0.0:
        return HardyReport(
            adjoint=adjoint, p=p, q=q, s=s, D=[0.0] * 5,
            applicable=[True] * 5, relations=[],
            bracket_upper_factor=pprime ** (1 / pprime) * p ** (1 / q),
            extrapolated_bracket=adjoint,
        )
    _check_preconditions(space, u, v, p, adjoint=adjoint)

    meas = get_measure(space)
    uw = u(meas.r)
    vw = v.conjugated(p)(meas.r)
    if not adjoint:
        U_arr = meas.reverse_cumulative(uw)
        V_arr = meas.cumulative(vw)
    else:
        U_arr = meas.cumulative(uw)
        V_arr = meas.reverse_cumulative(vw)

    grid = _sup_grid(refine)

    def at(arr):
        return np.interp(grid, meas.r, arr)

    def sup_of(arr):
        return float(np.max(at(arr)))

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        D1 = float(np.max(at(U_arr) ** (1 / q) * at(V_arr) ** (1 / pprime)))

        exp2 = q * (1 / pprime - s)
        inner2 = uw * np.where(V_arr > 0, V_arr, np.nan) ** exp2
        cum2 = meas.reverse_cumulative(np.nan_to_num(inner2)) if not adjoint else \
            meas.reverse_cumulative(np.nan_to_num(inner2))
        D2 = float(np.nanmax(at(cum2) ** (1 / q) * at(V_arr) ** s))

        proviso_35 = _globally_integrable(space, u) and _globally_integrable(
            space, v.conjugated(p)
        )
        if proviso_35:
            exp3 = q * (1 / pprime + s)
            inner3 = uw * np.where(V_arr > 0, V_arr, 0.0) ** exp3
            cum3 = meas.cumulative(inner3) if not adjoint else meas.reverse_cumulative(inner3)
            with np.errstate(divide="ignore"):
                vals3 = at(cum3) ** (1 / q) * at(V_arr) ** (-s)
            D3 = float(np.nanmax(np.where(at(V_arr) > 0, vals3, np.nan)))
        else:
            D3 = math.inf

        exp4 = pprime * (1 / q - s)
        inner4 = vw * np.where(U_arr > 0, U_arr, np.nan) ** exp4
        cum4 = meas.cumulative(np.nan_to_num(inner4)) if not adjoint else \
            meas.reverse_cumulative(np.nan_to_num(inner4))
        D4 = float(np.nanmax(at(cum4) ** (1 / pprime) * at(U_arr) ** s))

        if proviso_35:
            exp5 = pprime * (1 / q + s)
            inner5 = vw * np.where(U_arr > 0, U_arr, 0.0) ** exp5
            cum5 = meas.reverse_cumulative(inner5) if not adjoint else meas.cumulative(inner5)
            with np.errstate(divide="ignore"):
                vals5 = at(cum5) ** (1 / pprime) * at(U_arr) ** (-s)
            D5 = float(np.nanmax(np.where(at(U_arr) > 0, vals5, np.nan)))
        else:
            D5 = math.inf

    D = [D1, D2, D3, D4, D5]
    relations = []

    def rel(name, lhs, rhs):
        ok = bool(lhs <= rhs * (1 + rel_tol)) if np.isfinite(lhs) and np.isfinite(rhs) else None
        relations.append({"name": name, "lhs": lhs, "rhs": rhs, "ok": ok if ok is not None else True})

    rel("D1 <= max(1,p's)^(1/q) D2", D1, max(1.0, pprime * s) ** (1 / q) * D2)
    rel("D2 <= max(1,1/(p's))^(1/q) D1", D2, max(1.0, 1 / (pprime * s)) ** (1 / q) * D1)
    if proviso_35:
        rel("(sp'/(1+p's))^(1/q) D3 <= D1", (s * pprime / (1 + pprime * s)) ** (1 / q) * D3, D1)
        rel("D1 <= (1+sp')^(1/q) D3", D1, (1 + s * pprime) ** (1 / q) * D3)
    rel("D1 <= max(1,qs)^(1/p') D4", D1, max(1.0, q * s) ** (1 / pprime) * D4)
    rel("D4 <= max(1,1/(qs))^(1/p') D1", D4, max(1.0, 1 / (q * s)) ** (1 / pprime) * D1)
    if proviso_35:
        rel("(sq/(1+qs))^(1/p') D5 <= D1", (s * q / (1 + q * s)) ** (1 / pprime) * D5, D1)
        rel("D1 <= (1+sq)^(1/p') D5", D1, (1 + s * q) ** (1 / pprime) * D5)

    return HardyReport(
        adjoint=adjoint,
        p=p,
        q=q,
        s=s,
        D=D,
        applicable=[True, True, proviso_35, True, proviso_35],
        relations=relations,
        bracket_upper_factor=pprime ** (1 / pprime) * p ** (1 / q),
        extrapolated_bracket=adjoint,
    )


# ---------------------------------------------------------------------------
# empirical inequality testing
# ---------------------------------------------------------------------------


def bump_sampler(rng: np.random.Generator, r: np.ndarray) -> np.ndarray:
    """One nonnegative test function: 1..5 Gaussian bumps, log-uniform widths
    in [0.05, 5], centers in [0, 10], log-uniform amplitudes in [0.1, 10]."""
    k = int(rng.integers(1, 6))
    out = np.zeros_like(r)
    for _ in range(k):
        width = float(np.exp(rng.uniform(math.log(0.05), math.log(5.0))))
        center = float(rng.uniform(0.0, 10.0))
        amp = float(np.exp(rng.uniform(math.log(0.1), math.log(10.0))))
        out += amp * np.exp(-((r - center) ** 2) / width**2)
    return out


def test_integral_hardy(
    space: SpaceModel,
    u: WeightSpec,
    v: WeightSpec,
    p: float,
    q: float,
    trials: int = 100,
    seed: int = 7,
    adjoint: bool = False,
    s: float | None = None,
) -> dict:
    """Check LHS <= D1 (p')^{1/p'} p^{1/q} RHS over seeded random bump sums.

    LHS integrates the ball (or complement, in the adjoint form) averages of f
    against u; RHS is the weighted L^p norm.  Returns the violation count
    (expected zero) and the best observed ratio as an empirical lower bound
    for the true constant C.
    """
    report = d_conditions(space, u, v, p, q, s=s, adjoint=adjoint)
    D1 = report.D[0]
    if not math.isfinite(D1):
        raise ValueError("D1 is not finite; the inequality hypothesis fails")
    C_upper = D1 * report.bracket_upper_factor
    meas = get_measure(space)
    uw = u(meas.r) * meas.w
    vw = v(meas.r) * meas.w
    seeds = np.random.SeedSequence(seed).spawn(trials)
    violations = 0
    max_ratio = 0.0
    ratios = []
    for sd in seeds:
        rng = np.random.default_rng(sd)
        f = bump_sampler(rng, meas.r)
        F = meas.cumulative(f) if not adjoint else meas.reverse_cumulative(f)
        lhs = float(np.trapezoid(F**q * uw, meas.r) ** (1 / q))
        rhs = float(np.trapezoid(f**p * vw, meas.r) ** (1 / p))
        if rhs == 0.0:
            continue
        ratio = lhs / rhs
        ratios.append(ratio)
        max_ratio = max(max_ratio, ratio)
        if lhs > C_upper * rhs * (1 + 1e-9):
            violations += 1
    return {
        "trials": trials,
        "counted": len(ratios),
        "violations": violations,
        "max_ratio": max_ratio,
        "median_ratio": float(np.median(ratios)) if ratios else 0.0,
        "D1": D1,
        "C_upper": C_upper,
        "adjoint": adjoint,
        "seed": seed,
    }
