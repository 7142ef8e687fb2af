"""Admissibility checking and empirical ratio verification for the
functional-inequality family: Stein-Weiss, Hardy-Littlewood-Sobolev,
Hardy-Sobolev, Hardy, uncertainty, Sobolev, Gagliardo-Nirenberg, and
Caffarelli-Kohn-Nirenberg.

Verification is one-sided: each inequality asserts a finite constant C, so
the lab confirms boundedness of LHS/RHS over test families (and collapses of
special cases onto each other exactly), never sharpness.

Notes on two upstream wrinkles, resolved here the proof-consistent way:

* The uncertainty-principle LHS is ||u||_2^2 (as the Cauchy-Schwarz step of
  its derivation produces); with a first power the two sides would not share
  a scaling degree.
* The CKN balance relation is taken in the form the Hoelder + Hardy-Sobolev
  derivation yields:
      (sigma - (c(1-a)-b)/a)/n = 1/p - (q-(1-a)tau)/(a tau q),
  whose a=1, b=0 case is exactly the Sobolev relation.
* The Gagliardo-Nirenberg interpolation exponent is always derived from the
  general balance relation (for sigma=1, p=mu=2 this gives
  a = n(tau-2)/(2 tau)); reports echo the derived value.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .kernels import KernelSpec, SobolevParams, bgr_convolve, sobolev_norm
from .spaces import SpaceModel
from .spherical import RadialFunction, Transform, TruncationWarning, get_transform

KINDS = (
    "steinweiss",
    "hls",
    "hardy_sobolev",
    "hardy",
    "uncertainty",
    "sobolev",
    "gn",
    "ckn",
)

_REQUIRED = {
    "steinweiss": ("sigma", "p", "q", "alpha", "beta"),
    "hls": ("sigma", "p", "q"),
    "hardy_sobolev": ("sigma", "p", "q", "beta"),
    "hardy": ("sigma", "p"),
    "uncertainty": ("sigma", "p"),
    "sobolev": ("sigma", "p", "q"),
    "gn": ("sigma", "p", "tau", "mu", "a"),
    "ckn": ("sigma", "p", "q", "tau", "a", "b", "c"),
}


@dataclass(frozen=True)
class IneqSpec:
    """One inequality instance: kind, parameter map, and the model space."""

    kind: str
    space: SpaceModel
    params: dict

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown inequality kind {self.kind!r}; known: {KINDS}")
        missing = [k for k in _REQUIRED[self.kind] if k not in self.params]
        if missing:
            raise ValueError(f"{self.kind} spec is missing parameters: {missing}")

    def get(self, name, default=None):
        return self.params.get(name, default)


@dataclass
class RatioReport:
    """Outcome of a family sweep / best-ratio search."""

    kind: str
    params: dict
    members: list  # dicts: params, lhs, rhs, ratio
    max_ratio: float
    argmax_params: dict
    admissible: bool
    evaluations: int
    median_ratio: float = 0.0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": self.params,
            "members": self.members,
            "max_ratio": self.max_ratio,
            "median_ratio": self.median_ratio,
            "argmax_params": self.argmax_params,
            "admissible": self.admissible,
            "evaluations": self.evaluations,
        }


# ---------------------------------------------------------------------------
# admissibility
# ---------------------------------------------------------------------------


def _relation(name: str, lhs: float, rhs: float, tol: float = 1e-9) -> dict:
    return {"name": name, "ok": bool(abs(lhs - rhs) <= tol * max(1.0, abs(lhs), abs(rhs))),
            "residual": float(lhs - rhs)}


def _bound(name: str, ok: bool, residual: float = 0.0) -> dict:
    return {"name": name, "ok": bool(ok), "residual": float(residual)}


def admissible_check(spec: IneqSpec) -> dict:
    """Evaluate every admissibility relation of the spec's kind.

    Returns a verdict with one pass/fail entry per relation (balance
    relations carry their residual) and the list of failed-relation names.
    """
    n = spec.space.dim
    P = spec.params
    checks = [_bound("dimension n >= 3", n >= 3, n - 3)]
    kind = spec.kind

    def sigma_range(sig, upper=n):
        checks.append(_bound("0 < sigma < n", 0 < sig < upper, sig))

    if kind in ("steinweiss", "hls"):
        sig, p, q = P["sigma"], P["p"], P["q"]
        alpha = P.get("alpha", 0.0)
        beta = P.get("beta", 0.0)
        pprime = p / (p - 1) if p > 1 else math.inf
        sigma_range(sig)
        checks.append(_bound("1 < p", p > 1, p - 1))
        if kind == "hls":
            checks.append(_bound("p < q", p < q, q - p))
            checks.append(_bound("alpha == 0 and beta == 0", alpha == 0.0 and beta == 0.0))
        else:
            checks.append(_bound("p <= q", p <= q, q - p))
        checks.append(_bound("q < inf", math.isfinite(q)))
        checks.append(_bound("alpha < n/p'", alpha < n / pprime, n / pprime - alpha))
        checks.append(_bound("beta < n/q", beta < n / q, n / q - beta))
        checks.append(_bound("alpha + beta >= 0", alpha + beta >= 0, alpha + beta))
        checks.append(
            _relation("(sigma - alpha - beta)/n == 1/p - 1/q", (sig - alpha - beta) / n, 1 / p - 1 / q)
        )
    elif kind in ("hardy_sobolev", "sobolev"):
        sig, p, q = P["sigma"], P["p"], P["q"]
        beta = P.get("beta", 0.0) if kind == "hardy_sobolev" else 0.0
        sigma_range(sig)
        checks.append(_bound("1 < p <= q < inf", 1 < p <= q < math.inf))
        checks.append(_bound("0 <= beta", beta >= 0, beta))
        checks.append(_bound("beta < n/q", beta < n / q, n / q - beta))
        checks.append(_relation("(sigma - beta)/n == 1/p - 1/q", (sig - beta) / n, 1 / p - 1 / q))
    elif kind in ("hardy", "uncertainty"):
        sig, p = P["sigma"], P["p"]
        checks.append(_bound("1 < p", p > 1, p - 1))
        checks.append(_bound("0 < sigma < n/p", 0 < sig < n / p, n / p - sig))
    elif kind == "gn":
        sig, p, tau, mu, a = P["sigma"], P["p"], P["tau"], P["mu"], P["a"]
        sigma_range(sig)
        checks.append(_bound("tau > 0", tau > 0, tau))
        checks.append(_bound("p > 1", p > 1, p - 1))
        checks.append(_bound("sigma * p < n", sig * p < n, n - sig * p))
        checks.append(_bound("mu >= 1", mu >= 1, mu - 1))
        checks.append(_bound("a in (0, 1]", 0 < a <= 1, a))
        checks.append(
            _relation("1/tau == a(1/p - sigma/n) + (1-a)/mu", 1 / tau, a * (1 / p - sig / n) + (1 - a) / mu)
        )
    elif kind == "ckn":
        sig, p, q, tau = P["sigma"], P["p"], P["q"], P["tau"]
        a, b, c = P["a"], P["b"], P["c"]
        sigma_range(sig)
        checks.append(_bound("p > 1", p > 1, p - 1))
        checks.append(_bound("0 < q < tau < inf", 0 < q < tau < math.inf))
        checks.append(_bound("a > (tau - q)/tau", a > (tau - q) / tau, a - (tau - q) / tau))
        checks.append(_bound("a <= 1", a <= 1, 1 - a))
        denom = q - (1 - a) * tau
        checks.append(_bound("q - (1-a)tau > 0", denom > 0, denom))
        if denom > 0:
            checks.append(_bound("p <= a tau q / (q - (1-a)tau)", p <= a * tau * q / denom,
                                 a * tau * q / denom - p))
            x = c * (1 - a) - b
            checks.append(_bound("c(1-a) - b >= 0", x >= 0, x))
            checks.append(_bound("c(1-a) - b <= n(q-(1-a)tau)/(q tau)", x <= n * denom / (q * tau),
                                 n * denom / (q * tau) - x))
            checks.append(
                _relation(
                    "(sigma - (c(1-a)-b)/a)/n == 1/p - (q-(1-a)tau)/(a tau q)",
                    (sig - x / a) / n,
                    1 / p - denom / (a * tau * q),
                )
            )
    failed = [c["name"] for c in checks if not c["ok"]]
    return {
        "kind": kind,
        "admissible": not failed,
        "checks": checks,
        "reasons": failed,
        "params": dict(P),
        "space": spec.space.to_dict(),
    }


def gn_exponent(space: SpaceModel, sigma: float, p: float, mu: float, tau: float) -> float:
    """Interpolation exponent a solving the GN balance relation."""
    n = space.dim
    denom = (1 / p - sigma / n) - 1 / mu
    if denom == 0:
        raise ValueError("degenerate GN relation: 1/p - sigma/n equals 1/mu")
    return (1 / tau - 1 / mu) / denom


# ---------------------------------------------------------------------------
# ratio computation
# ---------------------------------------------------------------------------


def _weighted_lp(grid_radius: np.ndarray, grid, values: np.ndarray, weight_pow: float, p: float) -> float:
    w = grid_radius**weight_pow if weight_pow != 0.0 else 1.0
    return float(grid.integrate(np.abs(values * w) ** p) ** (1 / p))


def _require_nonzero(u: RadialFunction):
    if not np.any(u.values):
        raise ValueError("u == 0 has an undefined ratio (zero RHS)")


def _require_positive_rhs(rhs: float):
    if rhs == 0.0 or not math.isfinite(rhs):
        raise ValueError(f"ratio undefined: RHS norm is {rhs}")


def steinweiss_ratio(spec: IneqSpec, u: RadialFunction, transform: Transform | None = None):
    """Weighted L^q norm of G_{xi,sigma} * u against the weighted L^p norm of u.

    The HLS kind routes through this same path with the weights switched off.
    """
    if spec.kind not in ("steinweiss", "hls"):
        raise ValueError("steinweiss_ratio expects a steinweiss or hls spec")
    _require_nonzero(u)
    space = spec.space
    tr = transform if transform is not None else get_transform(space)
    P = spec.params
    alpha = P.get("alpha", 0.0)
    beta = P.get("beta", 0.0)
    xi = P.get("xi", 8.0 * space.rho_norm)
    kspec = KernelSpec(space, xi, P["sigma"], enforce_xi_min=False)
    conv = bgr_convolve(kspec, u, transform=tr)
    radius = tr.rgrid.radius_tensor() if space.rank > 1 else tr.rgrid.nodes
    lhs = _weighted_lp(radius, tr.rgrid, conv.values, -beta, P["q"])
    rhs = _weighted_lp(radius, tr.rgrid, u.values, alpha, P["p"])
    _require_positive_rhs(rhs)
    return lhs, rhs, lhs / rhs


def hardy_sobolev_ratio(spec: IneqSpec, u: RadialFunction, transform: Transform | None = None):
    """LHS/RHS for the Hardy-Sobolev family (hardy, sobolev, uncertainty kinds
    are parameter specializations sharing this code path)."""
    if spec.kind not in ("hardy_sobolev", "hardy", "uncertainty", "sobolev"):
        raise ValueError(f"hardy_sobolev_ratio cannot evaluate kind {spec.kind}")
    _require_nonzero(u)
    space = spec.space
    tr = transform if transform is not None else get_transform(space)
    P = spec.params
    sigma, p = P["sigma"], P["p"]
    radius = tr.rgrid.radius_tensor() if space.rank > 1 else tr.rgrid.nodes
    hnorm = sobolev_norm(space, SobolevParams(sigma, p), u, transform=tr)
    if spec.kind == "uncertainty":
        pprime = p / (p - 1)
        l2sq = _weighted_lp(radius, tr.rgrid, u.values, 0.0, 2.0) ** 2
        rhs = hnorm * _weighted_lp(radius, tr.rgrid, u.values, sigma, pprime)
        _require_positive_rhs(rhs)
        return l2sq, rhs, l2sq / rhs
    if spec.kind == "hardy":
        beta, q = sigma, p
    elif spec.kind == "sobolev":
        beta, q = 0.0, P["q"]
    else:
        beta, q = P["beta"], P["q"]
    lhs = _weighted_lp(radius, tr.rgrid, u.values, -beta, q)
    _require_positive_rhs(hnorm)
    return lhs, hnorm, lhs / hnorm


def gn_ratio(spec: IneqSpec, u: RadialFunction, transform: Transform | None = None):
    """||u||_tau against ||u||_{H^{sigma,p}}^a ||u||_mu^{1-a}."""
    if spec.kind != "gn":
        raise ValueError("gn_ratio expects a gn spec")
    _require_nonzero(u)
    P = spec.params
    a = P["a"]
    if not (0 < a <= 1):
        raise ValueError("GN exponent a must lie in (0, 1]")
    tr = transform if transform is not None else get_transform(spec.space)
    radius = tr.rgrid.radius_tensor() if spec.space.rank > 1 else tr.rgrid.nodes
    lhs = _weighted_lp(radius, tr.rgrid, u.values, 0.0, P["tau"])
    hnorm = sobolev_norm(spec.space, SobolevParams(P["sigma"], P["p"]), u, transform=tr)
    mnorm = _weighted_lp(radius, tr.rgrid, u.values, 0.0, P["mu"])
    rhs = hnorm**a * mnorm ** (1 - a)
    _require_positive_rhs(rhs)
    return lhs, rhs, lhs / rhs


def ckn_ratio(spec: IneqSpec, u: RadialFunction, transform: Transform | None = None):
    """|| |x|^b u ||_tau against ||u||_{H^{sigma,p}}^a || |x|^c u ||_q^{1-a}."""
    if spec.kind != "ckn":
        raise ValueError("ckn_ratio expects a ckn spec")
    verdict = admissible_check(spec)
    if not verdict["admissible"]:
        raise ValueError(f"inadmissible CKN spec: {verdict['reasons']}")
    _require_nonzero(u)
    P = spec.params
    tr = transform if transform is not None else get_transform(spec.space)
    radius = tr.rgrid.radius_tensor() if spec.space.rank > 1 else tr.rgrid.nodes
    lhs = _weighted_lp(radius, tr.rgrid, u.values, P["b"], P["tau"])
    hnorm = sobolev_norm(spec.space, SobolevParams(P["sigma"], P["p"]), u, transform=tr)
    cnorm = _weighted_lp(radius, tr.rgrid, u.values, P["c"], P["q"])
    rhs = hnorm ** P["a"] * cnorm ** (1 - P["a"])
    _require_positive_rhs(rhs)
    return lhs, rhs, lhs / rhs


_RATIO_DISPATCH = {
    "steinweiss": steinweiss_ratio,
    "hls": steinweiss_ratio,
    "hardy_sobolev": hardy_sobolev_ratio,
    "hardy": hardy_sobolev_ratio,
    "uncertainty": hardy_sobolev_ratio,
    "sobolev": hardy_sobolev_ratio,
    "gn": gn_ratio,
    "ckn": ckn_ratio,
}


def ratio_for_spec(spec: IneqSpec, u: RadialFunction, transform: Transform | None = None):
    return _RATIO_DISPATCH[spec.kind](spec, u, transform=transform)


# ---------------------------------------------------------------------------
# test families and the best-ratio search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TestFamily:
    """Family of radial test profiles, all functions of the Riemannian radius.

    Kinds: ``dilated`` (log-spaced Gaussian widths), ``shifted`` (one evenized
    off-center bump), ``gaussian_bumps`` (seeded random sums of evenized
    bumps).  Profiles are evenized so their transforms decay spectrally.
    """

    kind: str = "dilated"
    count: int = 10
    seed: int = 0
    width_range: tuple[float, float] = (0.05, 5.0)
    center_range: tuple[float, float] = (0.0, 10.0)

    def __post_init__(self):
        if self.kind not in ("dilated", "shifted", "gaussian_bumps"):
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.count < 1:
            raise ValueError("family needs at least one member")

    def member_params(self) -> list[dict]:
        lo, hi = self.width_range
        if self.kind == "dilated":
            widths = np.exp(np.linspace(math.log(lo), math.log(hi), self.count))
            return [{"width": float(w), "center": 0.0, "amps": (1.0,)} for w in widths]
        rng_seeds = np.random.SeedSequence(self.seed).spawn(self.count)
        out = []
        for sd in rng_seeds:
            rng = np.random.default_rng(sd)
            if self.kind == "shifted":
                out.append(
                    {
                        "width": float(np.exp(rng.uniform(math.log(lo), math.log(hi)))),
                        "center": float(rng.uniform(*self.center_range)),
                        "amps": (1.0,),
                    }
                )
            else:
                k = int(rng.integers(1, 6))
                out.append(
                    {
                        "widths": [float(np.exp(rng.uniform(math.log(lo), math.log(hi)))) for _ in range(k)],
                        "centers": [float(rng.uniform(*self.center_range)) for _ in range(k)],
                        "amps": [float(np.exp(rng.uniform(math.log(0.1), math.log(10.0)))) for _ in range(k)],
                    }
                )
        return out


def _profile_from_params(radius: np.ndarray, params: dict) -> np.ndarray:
    """Evenized bump sum evaluated on the radius tensor."""
    if "widths" in params:
        out = np.zeros_like(radius)
        for w, c, a in zip(params["widths"], params["centers"], params["amps"]):
            out += a * (np.exp(-((radius - c) ** 2) / w**2) + np.exp(-((radius + c) ** 2) / w**2))
        return out
    w, c = params["width"], params["center"]
    amp = params["amps"][0]
    return amp * (np.exp(-((radius - c) ** 2) / w**2) + np.exp(-((radius + c) ** 2) / w**2))


def family_sweep(spec: IneqSpec, family: TestFamily, transform: Transform | None = None) -> RatioReport:
    """Evaluate the ratio on every family member (no optimization)."""
    verdict = admissible_check(spec)
    if not verdict["admissible"]:
        raise ValueError(f"inadmissible spec: {verdict['reasons']}")
    tr = transform if transform is not None else get_transform(spec.space)
    radius = tr.rgrid.radius_tensor() if spec.space.rank > 1 else tr.rgrid.nodes
    members = []
    best = (-math.inf, None)
    for params in family.member_params():
        u = RadialFunction(tr.rgrid, _profile_from_params(radius, params))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", TruncationWarning)
            lhs, rhs, ratio = ratio_for_spec(spec, u, transform=tr)
        truncated = any(issubclass(w.category, TruncationWarning) for w in caught)
        members.append(
            {"params": params, "lhs": lhs, "rhs": rhs, "ratio": ratio, "truncation_flag": truncated}
        )
        if ratio > best[0]:
            best = (ratio, params)
    ratios = [m["ratio"] for m in members]
    return RatioReport(
        kind=spec.kind,
        params=dict(spec.params),
        members=members,
        max_ratio=best[0],
        argmax_params=best[1],
        admissible=True,
        evaluations=len(members),
        median_ratio=float(np.median(ratios)),
    )


def empirical_best_ratio(
    spec: IneqSpec,
    family: TestFamily,
    budget: int = 200,
    transform: Transform | None = None,
    restarts: int = 3,
) -> RatioReport:
    """Maximize the ratio over the family's continuous parameters.

    Simplex direct search (Nelder-Mead) on (log width, center) seeded from the
    best family member, with deterministic jittered restarts.  The reported
    maximum is monotone in the budget: it never falls below the sweep maximum.
    """
    if budget < family.count:
        raise ValueError(f"budget {budget} is below the family size {family.count}")
    sweep = family_sweep(spec, family, transform=transform)
    tr = transform if transform is not None else get_transform(spec.space)
    radius = tr.rgrid.radius_tensor() if spec.space.rank > 1 else tr.rgrid.nodes
    evals = [family.count]

    start = sweep.argmax_params
    if "widths" in start:
        start = {"width": start["widths"][0], "center": start["centers"][0], "amps": (start["amps"][0],)}

    def objective(x):
        evals[0] += 1
        w = math.exp(x[0])
        c = abs(x[1])
        if not (1e-3 < w < 50.0) or c > 20.0:
            return 0.0  # outside the transform-safe box
        u = RadialFunction(tr.rgrid, _profile_from_params(radius, {"width": w, "center": c, "amps": (1.0,)}))
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", TruncationWarning)
                _, _, ratio = ratio_for_spec(spec, u, transform=tr)
        except ValueError:
            return 0.0
        return -ratio

    best_ratio = sweep.max_ratio
    best_params = dict(sweep.argmax_params)
    rng = np.random.default_rng(family.seed)
    per_restart = max(8, (budget - family.count) // max(restarts, 1))
    for k in range(restarts):
        jitter = rng.normal(scale=0.15, size=2) if k else np.zeros(2)
        x0 = np.array([math.log(start["width"]), start["center"]]) + jitter
        res = optimize.minimize(
            objective, x0, method="Nelder-Mead",
            options={"maxfev": per_restart, "xatol": 1e-3, "fatol": 1e-3 * max(best_ratio, 1e-12)},
        )
        if -res.fun > best_ratio:
            best_ratio = float(-res.fun)
            best_params = {"width": math.exp(res.x[0]), "center": abs(res.x[1]), "amps": (1.0,)}
        if evals[0] >= budget:
            break
    return RatioReport(
        kind=spec.kind,
        params=dict(spec.params),
        members=sweep.members,
        max_ratio=best_ratio,
        argmax_params=best_params,
        admissible=True,
        evaluations=evals[0],
        median_ratio=sweep.median_ratio,
    )
