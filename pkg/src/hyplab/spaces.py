"""Geometry of the supported model spaces.

A model space is a real hyperbolic space H^n (rank one) or a finite product
of real hyperbolic factors (rank = number of factors).  Curvature is -1 per
factor and the single positive indivisible root of each factor has |alpha| = 1,
multiplicity n_i - 1.  The normalizing constant of the polar density is 1;
Plancherel constants are handled by calibration in :mod:`hyplab.spherical`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid


@dataclass(frozen=True)
class SpaceModel:
    """Root data and derived constants of a product of real hyperbolic spaces.

    Attributes
    ----------
    factors : tuple of int
        Dimension n_i >= 2 of each hyperbolic factor.
    rank : int
        Number of factors (dimension of the chamber).
    dim : int
        Total dimension n = rank + sum of root multiplicities.
    roots : tuple of (int, int)
        One entry per factor: (factor index, multiplicity m = n_i - 1).
    rho : numpy.ndarray
        Half sum of positive roots in chamber coordinates; component i equals
        (n_i - 1) / 2.
    rho_norm : float
        Euclidean norm |rho|.
    num_indivisible : int
        Count of positive indivisible roots (= rank for these models).
    pseudo_dim : int
        nu = rank + 2 * num_indivisible (= 3 * rank here).
    weyl_order : int
        Order of the Weyl group, 2 ** rank.
    """

    factors: tuple[int, ...]
    rank: int = field(init=False, compare=False)
    dim: int = field(init=False, compare=False)
    roots: tuple[tuple[int, int], ...] = field(init=False, compare=False)
    rho: np.ndarray = field(init=False, repr=False, compare=False)
    rho_norm: float = field(init=False, compare=False)
    num_indivisible: int = field(init=False, compare=False)
    pseudo_dim: int = field(init=False, compare=False)
    weyl_order: int = field(init=False, compare=False)

    def __post_init__(self):
        if len(self.factors) == 0:
            raise ValueError("a model space needs at least one hyperbolic factor")
        for n in self.factors:
            if int(n) != n or n < 2:
                raise ValueError(f"hyperbolic factor dimension must be an integer >= 2, got {n}")
        object.__setattr__(self, "factors", tuple(int(n) for n in self.factors))
        l = len(self.factors)
        object.__setattr__(self, "rank", l)
        object.__setattr__(self, "dim", l + sum(n - 1 for n in self.factors))
        object.__setattr__(self, "roots", tuple((i, n - 1) for i, n in enumerate(self.factors)))
        rho = np.array([(n - 1) / 2 for n in self.factors], dtype=float)
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "rho_norm", float(np.linalg.norm(rho)))
        object.__setattr__(self, "num_indivisible", l)
        object.__setattr__(self, "pseudo_dim", l + 2 * l)
        object.__setattr__(self, "weyl_order", 2**l)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {"factors": list(self.factors)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "SpaceModel":
        return cls(tuple(d["factors"]))

    def describe(self) -> dict:
        """Scalar summary used by ``space info`` and report headers."""
        return {
            "factors": list(self.factors),
            "rank": self.rank,
            "dim": self.dim,
            "pseudo_dim": self.pseudo_dim,
            "rho_norm": self.rho_norm,
            "weyl_order": self.weyl_order,
        }


@dataclass(frozen=True)
class ChamberPoint:
    """Point of the closed positive chamber: one radius >= 0 per factor."""

    H: np.ndarray

    def __post_init__(self):
        H = np.atleast_1d(np.asarray(self.H, dtype=float))
        if H.ndim != 1:
            raise ValueError("chamber point must be a flat vector of radii")
        if np.any(H < 0):
            raise ValueError("chamber coordinates must be nonnegative")
        H.setflags(write=False)
        object.__setattr__(self, "H", H)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.H))


def make_hyperbolic(n: int) -> SpaceModel:
    """Rank-one model H^n with a single root of multiplicity n - 1."""
    if int(n) != n or n < 2:
        raise ValueError(f"H^n requires an integer n >= 2, got {n}")
    return SpaceModel((int(n),))


def make_product(dims) -> SpaceModel:
    """Product of hyperbolic factors; rank equals the number of factors."""
    dims = tuple(dims)
    if not dims:
        raise ValueError("product space needs a nonempty list of factor dimensions")
    return SpaceModel(dims)


def _as_chamber(space: SpaceModel, H) -> np.ndarray:
    if isinstance(H, ChamberPoint):
        vec = H.H
    else:
        vec = np.atleast_1d(np.asarray(H, dtype=float))
    if vec.shape[-1] != space.rank:
        # allow a bare scalar for rank-one spaces
        if space.rank == 1 and vec.ndim >= 1:
            vec = vec[..., None] if vec.shape[-1] != 1 else vec
        else:
            raise ValueError(f"expected {space.rank} chamber coordinates, got shape {vec.shape}")
    if np.any(vec < 0):
        raise ValueError("chamber coordinates must be nonnegative")
    return vec


def polar_density(space: SpaceModel, H) -> float | np.ndarray:
    """Polar density J(H) = prod_i sinh^{n_i - 1}(r_i), normalizing constant 1.

    Vanishes exactly on the chamber walls.  Broadcasts over leading axes of
    ``H`` when given an array of chamber points.
    """
    vec = _as_chamber(space, H)
    mults = np.array([m for _, m in space.roots], dtype=float)
    out = np.prod(np.sinh(vec) ** mults, axis=-1)
    return float(out) if np.isscalar(out) or out.ndim == 0 else out


def distances(space: SpaceModel, H) -> tuple[float, float]:
    """Riemannian distance |H| and polyhedral distance <rho, H>/|rho|."""
    vec = _as_chamber(space, H)
    riem = float(np.linalg.norm(vec))
    poly = float(np.dot(space.rho, vec) / space.rho_norm)
    return riem, poly


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^{n-1} in R^n."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


def factor_volume_element(n: int, r: np.ndarray) -> np.ndarray:
    """Radial volume element of H^n: |S^{n-1}| sinh^{n-1}(r)."""
    return sphere_area(n) * np.sinh(r) ** (n - 1)


def ball_volume(space: SpaceModel, R: float, n_quad: int = 4096) -> float:
    """Volume of the metric ball of radius R about the base point.

    Rank one reduces to a 1-d quadrature of the volume element; higher rank
    integrates the product density over the chamber sector recursively.
    """
    if R < 0:
        raise ValueError("ball radius must be nonnegative")
    if R == 0.0:
        return 0.0
    if space.rank == 1:
        r = np.linspace(0.0, R, n_quad)
        vals = factor_volume_element(space.factors[0], r)
        return float(np.trapezoid(vals, r))

    # recursive sector integral: peel off one factor at a time
    grid = np.linspace(0.0, R, n_quad)

    def level(vol_prev: np.ndarray, n_fac: int) -> np.ndarray:
        # vol_prev[k] = sector volume of the partial product at radius grid[k]
        out = np.empty_like(grid)
        for k, Rk in enumerate(grid):
            if Rk == 0.0:
                out[k] = 0.0
                continue
            # integrate w(r) * vol_prev(sqrt(Rk^2 - r^2)) over r in [0, Rk]
            r = grid[grid <= Rk]
            rest = np.sqrt(np.maximum(Rk**2 - r**2, 0.0))
            vp = np.interp(rest, grid, vol_prev)
            out[k] = np.trapezoid(factor_volume_element(n_fac, r) * vp, r)
        return out

    vol = cumulative_trapezoid(factor_volume_element(space.factors[0], grid), grid, initial=0.0)
    for n_fac in space.factors[1:]:
        vol = level(vol, n_fac)
    return float(vol[-1])


def shell_density(space: SpaceModel, R, n_theta: int = 256):
    """Surface density w(R) = d/dR vol(B_R), the radial weight of the measure.

    Rank one is the plain volume element; rank two integrates the product
    density over the quarter-circle arc of radius R.
    """
    R = np.atleast_1d(np.asarray(R, dtype=float))
    if space.rank == 1:
        out = factor_volume_element(space.factors[0], R)
    elif space.rank == 2:
        th = (np.arange(n_theta) + 0.5) * (np.pi / 2) / n_theta
        w = (np.pi / 2) / n_theta
        n1, n2 = space.factors
        r1 = np.outer(R, np.cos(th))
        r2 = np.outer(R, np.sin(th))
        integrand = (
            sphere_area(n1) * np.sinh(r1) ** (n1 - 1)
            * sphere_area(n2) * np.sinh(r2) ** (n2 - 1)
        )
        out = R * np.sum(integrand, axis=1) * w
    else:
        raise NotImplementedError("shell density implemented for rank <= 2")
    return out if out.size > 1 else float(out[0])
