import numpy as np
import pytest

from periorbit.functional import build_context
from periorbit.grids import GridFunction, MatrixPath, TimeGrid
from periorbit.potentials import (
    modulated_power_potential,
    power_potential,
    quartic_potential,
    three_halves_potential,
    zero_potential,
)

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="module")
def duffing_ctx():
    grid = TimeGrid(TWO_PI, 64, 1)
    return build_context(grid, MatrixPath.zero(grid), quartic_potential(TWO_PI))


def cos_function(grid):
    return GridFunction(np.cos(grid.nodes)[:, None], grid)


def random_function(grid, rng, scale=1.0):
    return GridFunction(scale * rng.standard_normal((grid.node_count, grid.dim)), grid)


def test_psi_oracles(duffing_ctx):
    grid = duffing_ctx.grid
    assert duffing_ctx.psi(GridFunction.zero(grid)) == 0.0
    # quartic: psi(cos t) = (1/4) * int cos^4 = 3 pi / 16, exact quadrature
    assert duffing_ctx.psi(cos_function(grid)) == pytest.approx(3 * np.pi / 16, abs=1e-12)

    ctx32 = build_context(
        TimeGrid(TWO_PI, 32, 1),
        MatrixPath.zero(TimeGrid(TWO_PI, 32, 1)),
        three_halves_potential(TWO_PI),
    )
    one = GridFunction(np.ones((32, 1)), ctx32.grid)
    assert ctx32.psi(one) == pytest.approx(TWO_PI, rel=1e-14)


def test_phi_value_oracles(duffing_ctx):
    grid = duffing_ctx.grid
    zero = GridFunction.zero(grid)
    for lam in (1.0, 1.5, 2.0):
        assert duffing_ctx.phi_lambda(zero, lam) == 0.0
    u = cos_function(grid)
    assert duffing_ctx.phi(u) == pytest.approx(5 * np.pi / 16, abs=1e-12)
    assert duffing_ctx.phi_lambda(u, 2.0) == pytest.approx(np.pi / 8, abs=1e-12)
    assert duffing_ctx.a_part(u) == pytest.approx(np.pi / 2, abs=1e-12)
    assert duffing_ctx.b_part(u) == pytest.approx(3 * np.pi / 16, abs=1e-12)


def test_lambda_domain(duffing_ctx):
    u = cos_function(duffing_ctx.grid)
    with pytest.raises(ValueError):
        duffing_ctx.phi_lambda(u, 0.0)
    with pytest.raises(ValueError):
        duffing_ctx.phi_lambda(u, 2.5)
    with pytest.warns(UserWarning):
        duffing_ctx.phi_lambda(u, 0.9)


def test_gradient_trivial_cases(duffing_ctx):
    grid = duffing_ctx.grid
    zero = GridFunction.zero(grid)
    g = duffing_ctx.grad_phi_lambda(zero, 1.0)
    assert np.abs(g.values).max() <= 1e-14

    ctx0 = build_context(grid, MatrixPath.zero(grid), zero_potential(TWO_PI))
    for i in (2, 5, 9):
        if ctx0.dec.eigenvalues[i] > ctx0.dec.zero_tol:
            e = ctx0.dec.eigenfunction(i)
            g = ctx0.grad_phi_lambda(e, 1.0)
            assert np.abs(g.values - e.values).max() <= 1e-10


BUILTINS = [
    quartic_potential(TWO_PI),
    three_halves_potential(TWO_PI),
    modulated_power_potential(1.0, 3.0, TWO_PI),
    power_potential(0.5, 1.7, TWO_PI),
    zero_potential(TWO_PI),
]


def fd_directional(ctx, u, v, lam, h=1e-5):
    up = GridFunction(u.values + h * v.values, ctx.grid)
    dn = GridFunction(u.values - h * v.values, ctx.grid)
    return (ctx.phi_lambda(up, lam) - ctx.phi_lambda(dn, lam)) / (2.0 * h)


@pytest.mark.parametrize("potential", BUILTINS, ids=lambda p: p.name)
def test_gradient_matches_finite_differences(potential):
    grid = TimeGrid(TWO_PI, 32, 1)
    ctx = build_context(grid, MatrixPath.constant(grid, 0.5), potential)
    rng = np.random.default_rng(42)
    checked = 0
    while checked < 20:
        u = random_function(grid, rng)
        # stay where W is smooth enough for the h^2 remainder to be small
        if potential.name != "zero" and np.min(np.abs(u.values)) < 1e-3:
            continue
        v = random_function(grid, rng)
        lam = rng.uniform(1.0, 2.0)
        lhs = ctx.dec.e_inner(ctx.grad_phi_lambda(u, lam), v)
        rhs = fd_directional(ctx, u, v, lam)
        assert lhs == pytest.approx(rhs, rel=1e-6, abs=1e-9)
        checked += 1


def test_phi_prime_apply_riesz_identity(duffing_ctx):
    grid = duffing_ctx.grid
    rng = np.random.default_rng(7)
    u = random_function(grid, rng)
    lam = 1.3
    g = duffing_ctx.grad_phi_lambda(u, lam)
    # derivative along the gradient equals the squared dual norm
    assert duffing_ctx.phi_prime_apply(u, g, lam) == pytest.approx(
        duffing_ctx.dec.e_norm(g) ** 2, rel=1e-9
    )
    # derivative vanishes along directions orthogonal (adapted product) to it
    v = random_function(grid, rng)
    coeff = duffing_ctx.dec.e_inner(v, g) / duffing_ctx.dec.e_norm(g) ** 2
    v_orth = v - coeff * g
    scale = duffing_ctx.dec.e_norm(g) * duffing_ctx.dec.e_norm(v_orth)
    assert abs(duffing_ctx.phi_prime_apply(u, v_orth, lam)) <= 1e-9 * max(1.0, scale)


def test_phi_prime_pure_quadratic():
    grid = TimeGrid(TWO_PI, 32, 1)
    ctx = build_context(grid, MatrixPath.zero(grid), zero_potential(TWO_PI))
    for i in (3, 6):
        lam_i = ctx.dec.eigenvalues[i]
        if lam_i > ctx.dec.zero_tol:
            e = ctx.dec.eigenfunction(i)
            assert ctx.phi_prime_apply(e, e, 1.0) == pytest.approx(abs(lam_i), rel=1e-10)


def test_evenness(duffing_ctx):
    rng = np.random.default_rng(11)
    for _ in range(25):
        u = random_function(duffing_ctx.grid, rng)
        lam = rng.uniform(1.0, 2.0)
        a = duffing_ctx.phi_lambda(u, lam)
        b = duffing_ctx.phi_lambda(-u, lam)
        assert b == pytest.approx(a, rel=1e-14, abs=1e-14)


def test_lambda_monotonicity(duffing_ctx):
    rng = np.random.default_rng(13)
    for _ in range(10):
        u = random_function(duffing_ctx.grid, rng)
        if duffing_ctx.b_part(u) <= 0:
            continue
        values = [duffing_ctx.phi_lambda(u, lam) for lam in (1.0, 1.3, 1.7, 2.0)]
        assert all(values[i + 1] < values[i] for i in range(len(values) - 1))


def test_growth_diagnostic_subquadratic():
    grid = TimeGrid(TWO_PI, 32, 1)
    pot = three_halves_potential(TWO_PI)
    ctx = build_context(grid, MatrixPath.constant(grid, 1.0), pot)
    c1 = pot.constants.c1
    mu = pot.constants.mu
    rng = np.random.default_rng(17)
    for _ in range(10):
        u = random_function(grid, rng, scale=2.0)
        lam = rng.uniform(1.0, 2.0)
        lower = (
            ctx.a_part(u)
            - lam * 0.5 * ctx.dec.e_norm(ctx.dec.project(u, "minus")) ** 2
            - lam * c1 * (TWO_PI + sum(np.abs(u.node_norms()) ** mu) * grid.weight)
        )
        assert ctx.phi_lambda(u, lam) >= lower - 1e-10


def test_weak_gradient_consistency(duffing_ctx):
    rng = np.random.default_rng(19)
    k = 9
    a = rng.standard_normal(k)
    lam = 1.4
    u = duffing_ctx.restricted_values(a, k)
    weak = duffing_ctx.weak_gradient(a, k, lam)
    for i in range(k):
        e = duffing_ctx.dec.eigenfunction(i)
        assert weak[i] == pytest.approx(duffing_ctx.phi_prime_apply(u, e, lam), abs=1e-10)
    # restricted dual norm never exceeds the full one
    assert duffing_ctx.restricted_dual_norm(a, k, lam) <= duffing_ctx.grad_dual_norm(u, lam) + 1e-12


def test_weak_hessian_matches_fd(duffing_ctx):
    rng = np.random.default_rng(23)
    k = 7
    a = rng.standard_normal(k)
    lam = 1.0
    jac = duffing_ctx.weak_hessian(a, k, lam)
    h = 1e-6
    for col in range(k):
        step = np.zeros(k)
        step[col] = h
        fd = (
            duffing_ctx.weak_gradient(a + step, k, lam)
            - duffing_ctx.weak_gradient(a - step, k, lam)
        ) / (2 * h)
        assert np.abs(jac[:, col] - fd).max() <= 1e-5 * max(1.0, np.abs(fd).max())


def test_nonfinite_potential_value_reports_node():
    grid = TimeGrid(TWO_PI, 16, 1)
    from periorbit.potentials import callable_potential

    def bad_w(t, u):
        vals = np.linalg.norm(np.atleast_2d(u), axis=1)
        vals = np.where(np.asarray(t) > 3.0, np.inf, vals)
        return vals

    pot = callable_potential("bad", TWO_PI, bad_w)
    ctx = build_context(grid, MatrixPath.zero(grid), pot)
    u = GridFunction(np.ones((16, 1)), grid)
    with pytest.raises(ValueError, match="node"):
        ctx.psi(u)
