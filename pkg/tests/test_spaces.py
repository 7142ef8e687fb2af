import math

import numpy as np
import pytest

from hyplab.spaces import (
    ChamberPoint,
    SpaceModel,
    ball_volume,
    distances,
    factor_volume_element,
    make_hyperbolic,
    make_product,
    polar_density,
    shell_density,
)


def test_h3_root_data():
    # rho = (1/2) m_alpha alpha with m_alpha = 2, |alpha| = 1; nu = l + 2|Sigma_0^+|
    s = make_hyperbolic(3)
    assert s.rho_norm == 1.0
    assert s.pseudo_dim == 3
    assert s.dim == 3
    assert s.weyl_order == 2


def test_h2_root_data():
    s = make_hyperbolic(2)
    assert s.rho_norm == 0.5
    assert s.rank == 1


def test_rejects_low_dimension():
    with pytest.raises(ValueError):
        make_hyperbolic(1)
    with pytest.raises(ValueError):
        make_product([])
    with pytest.raises(ValueError):
        make_product([3, 1])


def test_product_root_data():
    s = make_product([3, 3])
    assert s.rank == 2
    assert s.dim == 6
    assert s.rho_norm == pytest.approx(math.sqrt(2), abs=1e-15)
    s = make_product([2, 3, 3])
    assert s.rank == 3
    assert s.dim == 8
    assert s.pseudo_dim == 9


def test_single_factor_product_equals_hyperbolic():
    assert make_product([3]) == make_hyperbolic(3)


@pytest.mark.parametrize("dims", [(3,), (2,), (4,), (3, 3), (2, 3, 3)])
def test_dimension_identities(dims):
    # n = l + sum m_alpha and nu = l + 2|Sigma_0^+| hold exactly
    s = make_product(dims)
    assert s.dim == s.rank + sum(m for _, m in s.roots)
    assert s.pseudo_dim == s.rank + 2 * s.num_indivisible
    assert s.pseudo_dim == 3 * s.rank
    assert s.weyl_order == 2**s.rank


def test_polar_density_values(h3):
    assert polar_density(h3, [0.0]) == 0.0
    assert polar_density(h3, [1.0]) == pytest.approx(math.sinh(1.0) ** 2, rel=1e-15)
    p = make_product([3, 3])
    assert polar_density(p, [1.0, 1.0]) == pytest.approx(math.sinh(1.0) ** 4, rel=1e-14)


def test_polar_density_product_structure():
    # density of a product is the product of factor densities, to machine precision
    p = make_product([2, 4])
    rng = np.random.default_rng(3)
    for _ in range(20):
        r1, r2 = rng.uniform(0.01, 8.0, size=2)
        expected = polar_density(make_hyperbolic(2), [r1]) * polar_density(make_hyperbolic(4), [r2])
        assert polar_density(p, [r1, r2]) == pytest.approx(expected, rel=1e-14)


def test_polar_density_large_r_asymptotics(h3):
    # J ~ {r/(1+r)}^2 e^{2r} up to the 2^{-m} normalization at large r
    for r in [10.0, 15.0]:
        got = polar_density(h3, [r])
        asym = (r / (1 + r)) ** 2 * math.exp(2 * r)
        assert 0.1 < got / asym < 10.0


def test_polar_density_rejects_negative(h3):
    with pytest.raises(ValueError):
        polar_density(h3, [-0.5])


def test_distances_rank_one(h3):
    for r in [0.3, 1.0, 7.5]:
        riem, poly = distances(h3, [r])
        assert riem == pytest.approx(r, abs=1e-15)
        assert poly == pytest.approx(r, abs=1e-15)


def test_distances_product():
    p = make_product([3, 3])
    riem, poly = distances(p, [1.0, 0.0])
    assert riem == pytest.approx(1.0)
    assert poly == pytest.approx(1 / math.sqrt(2), rel=1e-14)
    assert distances(p, [0.0, 0.0]) == (0.0, 0.0)


def test_distance_equivalence_sampled():
    # (min_i rho_i/|rho|) |H| <= d'(H) <= |H| over the closed chamber
    p = make_product([2, 5])
    lower = min(p.rho) / p.rho_norm
    rng = np.random.default_rng(11)
    for _ in range(100):
        H = rng.uniform(0, 10, size=2)
        riem, poly = distances(p, H)
        assert poly <= riem * (1 + 1e-12)
        assert poly >= lower * riem * (1 - 1e-12)


def test_ball_volume_h3_quadrature_oracle(h3):
    # independent fine-grid quadrature of 4 pi sinh^2
    r = np.linspace(0, 1.0, 200001)
    oracle = np.trapezoid(4 * math.pi * np.sinh(r) ** 2, r)
    assert ball_volume(h3, 1.0) == pytest.approx(oracle, rel=1e-6)
    assert ball_volume(h3, 0.0) == 0.0
    with pytest.raises(ValueError):
        ball_volume(h3, -1.0)


def test_ball_volume_monotone_and_growth(h3):
    radii = [0.5, 1.0, 2.0, 5.0, 10.0, 12.0, 15.0, 20.0]
    vols = [ball_volume(h3, R) for R in radii]
    assert all(b > a for a, b in zip(vols, vols[1:]))
    # log-volume slope -> 2|rho| = 2 for rank one (within 2% on [10, 20])
    slope = (math.log(vols[-1]) - math.log(vols[-4])) / (20.0 - 10.0)
    assert slope == pytest.approx(2.0, rel=0.02)


def test_ball_volume_product_consistency():
    # rank-2 sector integral cross-checked against a 2-d grid quadrature
    p = make_product([3, 3])
    R = 2.0
    r = np.linspace(0, R, 801)
    R1, R2 = np.meshgrid(r, r, indexing="ij")
    inside = R1**2 + R2**2 <= R**2
    dens = factor_volume_element(3, R1) * factor_volume_element(3, R2)
    oracle = np.sum(dens * inside) * (r[1] - r[0]) ** 2
    assert ball_volume(p, R) == pytest.approx(oracle, rel=5e-3)


def test_shell_density_consistency():
    # d/dR ball_volume == shell_density (finite-difference check)
    p = make_product([3, 3])
    R = 1.5
    h = 1e-3
    dv = (ball_volume(p, R + h) - ball_volume(p, R - h)) / (2 * h)
    assert shell_density(p, R) == pytest.approx(dv, rel=1e-3)


def test_chamber_point_validation():
    with pytest.raises(ValueError):
        ChamberPoint(np.array([-1.0]))
    cp = ChamberPoint(np.array([1.0, 2.0]))
    assert cp.norm == pytest.approx(math.sqrt(5))


def test_serialization_roundtrip():
    s = make_product([3, 4])
    assert SpaceModel.from_dict(s.to_dict()) == s
    assert s.to_json() == '{"factors": [3, 4]}'
