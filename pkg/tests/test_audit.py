import numpy as np
import pytest

from periorbit.audit import (
    INCONCLUSIVE,
    NO_VIOLATION,
    VIOLATED,
    SampleScheme,
    audit_all,
    audit_aq1,
    audit_aq2,
    audit_aq3,
    audit_even,
    audit_grad_consistency,
    audit_sq1,
    audit_sq2,
    audit_sq3,
)
from periorbit.potentials import (
    callable_potential,
    power_potential,
    quartic_potential,
    three_halves_potential,
)

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="module")
def scheme():
    return SampleScheme.default(dim=1, period=TWO_PI)


@pytest.fixture(scope="module")
def w32(scheme):
    return three_halves_potential(TWO_PI)


@pytest.fixture(scope="module")
def w4():
    return quartic_potential(TWO_PI)


def test_default_ladder_contains_one(scheme):
    assert 1.0 in scheme.radii
    assert scheme.radii[0] == pytest.approx(1e-4) and scheme.radii[-1] == pytest.approx(1e4)


def test_aq1_truth_table(scheme, w32):
    # Euler homogeneity: <grad W, u> = (3/2) W exactly, margin ~ 0
    report = audit_aq1(w32, scheme, mu=1.5, r1=1.0)
    assert report.verdict == NO_VIOLATION
    assert report.margin == pytest.approx(0.0, abs=1e-6)

    cubic = power_potential(1.0, 3.0, TWO_PI)
    report = audit_aq1(cubic, scheme, mu=1.9, r1=1.0)
    assert report.verdict == VIOLATED
    assert report.margin < 0

    report = audit_aq1(w32, scheme, mu=1.4, r1=1.0)
    assert report.verdict == VIOLATED


def test_aq2_truth_table(scheme, w32, w4):
    report = audit_aq2(w32, scheme, c2=1.0, r2=1.0)
    assert report.verdict == NO_VIOLATION

    quadratic = power_potential(1.0, 2.0, TWO_PI)
    report = audit_aq2(quadratic, scheme, c2=1.0, r2=1.0)
    assert report.verdict in (INCONCLUSIVE, VIOLATED)

    report = audit_aq2(w4, scheme, c2=1.0, r2=1.0)
    assert report.verdict == VIOLATED


def test_aq3_truth_table(scheme, w32):
    report = audit_aq3(w32, scheme, d=1.0)
    assert report.verdict == NO_VIOLATION

    log_pot = callable_potential(
        "log1p",
        TWO_PI,
        w=lambda t, u: np.log1p(np.linalg.norm(np.atleast_2d(u), axis=1)),
        even=True,
    )
    report = audit_aq3(log_pot, scheme, d=1.0)
    assert report.verdict == VIOLATED

    report = audit_aq3(w32, scheme, d=200.0)
    assert report.verdict == VIOLATED
    # ratio at the top of the ladder is sqrt(1e4) = 100, so the worst margin
    # over the top decades is at most 100 - 200
    assert report.margin <= 100.0 - 200.0


def test_sq_truth_table(scheme, w4, w32):
    assert audit_sq1(w4, scheme, a1=1.0, nu=4.0).verdict == NO_VIOLATION
    assert audit_sq3(w4, scheme, varrho=4.0, b=0.4, nu=4.0).verdict == NO_VIOLATION
    report = audit_sq3(w4, scheme, varrho=4.0, b=0.6, nu=4.0)
    assert report.verdict == VIOLATED
    assert report.margin == pytest.approx(0.5 - 0.6, abs=1e-9)
    assert audit_sq2(w32, scheme).verdict == VIOLATED


def test_sq3_rejects_bad_domain(scheme, w4):
    with pytest.raises(ValueError, match="varrho"):
        audit_sq3(w4, scheme, varrho=2.0, b=0.5, nu=4.0)  # varrho = nu - 2
    with pytest.raises(ValueError, match="varrho"):
        audit_sq3(w4, scheme, varrho=0.5, b=0.5, nu=4.0)
    with pytest.raises(ValueError, match="nu"):
        audit_sq1(w4, scheme, a1=1.0, nu=1.5)


def test_even_truth_table(scheme, w32):
    report = audit_even(w32, scheme)
    assert report.verdict == NO_VIOLATION
    assert 0.0 <= report.margin <= 1e-10

    odd = callable_potential(
        "odd",
        TWO_PI,
        w=lambda t, u: np.atleast_2d(u)[:, 0] * np.linalg.norm(np.atleast_2d(u), axis=1) ** 2,
        even=False,
    )
    assert audit_even(odd, scheme).verdict == VIOLATED


def test_grad_consistency_truth_table(scheme, w4):
    assert audit_grad_consistency(w4, scheme).verdict == NO_VIOLATION
    assert audit_grad_consistency(w4.with_grad_scaled(1.01), scheme).verdict == VIOLATED


def test_violations_are_recheckable(scheme):
    cubic = power_potential(1.0, 3.0, TWO_PI)
    mu, r1 = 1.9, 1.0
    report = audit_aq1(cubic, scheme, mu=mu, r1=r1)
    assert report.violations
    for t, u, margin in report.violations:
        u = np.atleast_2d(np.array(u))
        w = float(cubic.w(np.array([t]), u)[0])
        gu = float(np.vdot(cubic.grad_w(np.array([t]), u), u))
        assert margin == pytest.approx(min(w, mu * w - gu), rel=1e-12, abs=1e-12)
        assert margin < 0


def test_determinism(w32):
    s1 = SampleScheme.default(dim=2, period=TWO_PI, seed=42)
    s2 = SampleScheme.default(dim=2, period=TWO_PI, seed=42)
    pot = power_potential(1.0, 1.5, TWO_PI)
    r1 = audit_aq1(pot, s1, mu=1.5, r1=1.0)
    r2 = audit_aq1(pot, s2, mu=1.5, r1=1.0)
    assert r1 == r2


def test_never_certifies(scheme, w32, w4):
    verdicts = {r.verdict for r in audit_all(w32, scheme, "asymptotic")}
    verdicts |= {r.verdict for r in audit_all(w4, scheme, "superquadratic")}
    assert verdicts <= {NO_VIOLATION, VIOLATED, INCONCLUSIVE}
    assert "proved" not in verdicts


def test_r3_and_l0_estimates(scheme, w32, w4):
    # W = |u|^(3/2) >= d|u|/2 with d=1 holds iff |u| >= (1/2)^2 = 0.25
    report = audit_aq3(w32, scheme, d=1.0)
    r3 = report.details["r3_estimate"]
    assert r3 is not None and 0.2 <= r3 <= 0.3
    # quartic: <gW,u>/2 - W = |u|^4/4 >= (b/4)|u|^4 holds everywhere for b=0.4
    report = audit_sq3(w4, scheme, varrho=4.0, b=0.4, nu=4.0)
    assert report.details["l0_estimate"] == pytest.approx(scheme.radii[0])


def test_missing_constants_rejected(scheme):
    bare = callable_potential(
        "bare", TWO_PI, w=lambda t, u: np.linalg.norm(np.atleast_2d(u), axis=1) ** 2
    )
    with pytest.raises(ValueError, match="constants"):
        audit_aq1(bare, scheme)


def test_report_json_roundtrip(scheme, w32):
    report = audit_aq1(w32, scheme, mu=1.4, r1=1.0)
    d = report.to_dict()
    assert d["condition"] == "AQ1" and d["verdict"] == VIOLATED
    assert isinstance(d["violations"], list) and d["violations"]
