import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from couette_lab import Grid, PhysicalField, SpectralField
from couette_lab.errors import GridMismatchError, NonFiniteError
from couette_lab.spectral import (
    apply_delta_L, apply_nabla_L, dealias, dv, dz, eval_at_eta, is_conjugate_symmetric, l2_norm, lp_levels,
    lp_multiplier, lp_project, paraproduct_split, product, profile_coeffs, profile_eval, profile_values,
    project_nonzero, rows_at, field_from_rows, shear_symbol, sobolev_norm, to_physical, to_spectral,
)
from conftest import random_real_field


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(0, 32)
    with pytest.raises(ValueError):
        Grid(4, 30)
    with pytest.raises(ValueError):
        Grid(4, 32, Lv=-1.0)
    g = Grid(4, 32)
    assert g.shape == (8, 32)
    assert g.deta == pytest.approx(2 * math.pi / g.Lv)


def test_roundtrip_and_parseval(grid, rng):
    vals = rng.standard_normal((grid.Nz, grid.Nv))
    f = to_spectral(PhysicalField(grid, vals))
    assert np.allclose(to_physical(f).values, vals, atol=1e-13)
    dA = (2 * math.pi / grid.Nz) * (grid.Lv / grid.Nv)
    assert l2_norm(f) ** 2 == pytest.approx(np.sum(vals**2) * dA, rel=1e-12)
    assert is_conjugate_symmetric(f)


def test_nonfinite_rejected(grid):
    vals = np.zeros((grid.Nz, grid.Nv))
    vals[1, 2] = np.nan
    with pytest.raises(NonFiniteError):
        to_spectral(PhysicalField(grid, vals))


def test_grid_mismatch():
    a = SpectralField.zeros(Grid(4, 16))
    b = SpectralField.zeros(Grid(4, 32))
    with pytest.raises(GridMismatchError):
        a + b


def test_derivatives_of_trig(grid):
    z, v = np.meshgrid(grid.z, grid.v, indexing="ij")
    q = 3 * grid.deta
    f = to_spectral(PhysicalField(grid, np.sin(2 * z) * np.cos(q * v)))
    assert np.allclose(to_physical(dz(f)).values, 2 * np.cos(2 * z) * np.cos(q * v), atol=1e-12)
    assert np.allclose(to_physical(dv(f)).values, -q * np.sin(2 * z) * np.sin(q * v), atol=1e-12)


def test_shear_symbol_and_nabla(field):
    t = 2.5
    gx, gy = apply_nabla_L(field, t)
    lap = apply_delta_L(field, t)
    assert np.allclose(lap.coeffs, (1j * field.grid.K) * gx.coeffs + 1j * (field.grid.ETA - field.grid.K * t) * gy.coeffs)
    assert np.all(shear_symbol(field.grid, t) >= 0)


def test_dealias_and_projection(field):
    d = dealias(field)
    assert np.all(d.coeffs[~field.grid.dealias_mask] == 0)
    assert np.all(project_nonzero(field).coeffs[0] == 0)


@given(st.floats(0, 8))
def test_sobolev_monotone_in_sigma(s):
    g = Grid(4, 16)
    f = random_real_field(g, np.random.default_rng(1))
    assert sobolev_norm(f, s) <= sobolev_norm(f, s + 0.5) * (1 + 1e-14)
    assert sobolev_norm(f, 0) == pytest.approx(l2_norm(f))


def test_lp_partition_of_unity(grid):
    for var in ("v", "zv"):
        total = sum(lp_multiplier(grid, N, var) for N in lp_levels(grid, var))
        assert np.allclose(total, 1.0, atol=1e-14)


def test_lp_projection_sums_to_field(field):
    parts = sum((lp_project(field, N, "zv") for N in lp_levels(field.grid, "zv")), SpectralField.zeros(field.grid))
    assert np.allclose(parts.coeffs, field.coeffs, atol=1e-14)


def test_paraproduct_reconstructs_product(grid, rng):
    f, g = random_real_field(grid, rng), random_real_field(grid, rng)
    a, b, r = paraproduct_split(f, g)
    assert np.allclose((a + b + r).coeffs, product(f, g).coeffs, atol=1e-10)


def test_profile_roundtrip_and_eval(grid):
    q = 2 * grid.deta
    p = np.sin(q * grid.v) + 0.3
    assert np.allclose(profile_values(grid, profile_coeffs(grid, p)), p, atol=1e-14)
    y = np.linspace(-3, 3, 11)
    assert np.allclose(profile_eval(grid, p, y), np.sin(q * y) + 0.3, atol=1e-12)
    assert np.allclose(profile_eval(grid, p, y, 1), q * np.cos(q * y), atol=1e-12)


def test_rows_roundtrip(field):
    rows = rows_at(field, field.grid.v)
    assert np.allclose(field_from_rows(field.grid, rows).coeffs, field.coeffs, atol=1e-13)


def test_eval_at_eta_on_lattice(field):
    g = field.grid
    targets = np.tile(g.eta, (g.Nz, 1))
    assert np.allclose(eval_at_eta(field, targets), field.coeffs, atol=1e-12)
