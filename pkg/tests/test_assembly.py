import json
import math
from fractions import Fraction

import pytest

from trilinear_manin.assembly import (
    PredictionReport,
    alpha_V,
    assemble,
    beta_V,
    compare_counts,
    factor_bridge,
    predicted_affine,
    predicted_projective,
)
from trilinear_manin.enumeration import count_height, scaled_projective_count
from trilinear_manin.expsums import A_of_q
from trilinear_manin.local import sigma_p


def test_alpha_beta():
    assert alpha_V(1) == Fraction(1, 2)
    assert alpha_V(3) == Fraction(1, 54)
    assert alpha_V(2) == Fraction(1, 16)
    assert beta_V() == 1 == beta_V()
    with pytest.raises(ValueError):
        alpha_V(0)


@pytest.fixture(scope="module")
def diag1_report(diag1):
    return assemble(diag1, pmax=7, phi=8.0, samples=1 << 16, Q=6, seed=1, residue_budget=10**5)


def test_identity(diag1_report):
    rep = diag1_report
    assert rep.identity_residual <= 1e-12
    assert rep.alphaV == Fraction(1, 2) and rep.betaV == 1
    assert rep.tau_inf == pytest.approx(rep.J / 8, rel=1e-15)
    assert rep.C_V == pytest.approx(rep.sigma_prime / 16, rel=1e-12)
    assert rep.J_sinc is not None


def test_bridge(diag1_report):
    br = diag1_report.bridge
    assert br["projective_over_sigma_prime"] == Fraction(1, 16)
    for n in (1, 2, 5):
        assert factor_bridge(n, Fraction(1))["projective_over_sigma_prime"] == Fraction(1, 16)


def test_roundtrip(diag1_report):
    text = diag1_report.dumps()
    back = PredictionReport.from_json(json.loads(text))
    assert back.dumps() == text
    assert back.euler == diag1_report.euler and isinstance(back.alphaV, Fraction)


def test_cross_truncation_identity(generic_n1):
    # A is multiplicative, so the product of sigma_p(r_p) equals the sum of A(q)
    # over q = prod p^k with k <= r_p.
    f = generic_n1[0]
    euler = sigma_p(f, 2, 2).value * sigma_p(f, 3, 1).value
    qs = [2**a * 3**b for a in range(3) for b in range(2)]
    assert euler == sum(A_of_q(f, q) for q in qs)


def test_series_vs_euler_reported(diag1_report):
    rep = diag1_report
    assert rep.series is not None and rep.series_tail is not None
    assert rep.euler > 1 and rep.series > 1


def test_compare_counts(diag2):
    rep = assemble(diag2, pmax=5, phi=None, samples=1 << 14, seed=0, residue_budget=10**5)
    compare_counts(diag2, [8, 16], rep)
    rows = rep.comparisons
    assert [r["B"] for r in rows] == [8, 16]
    assert rows[0]["affine_observed"] == count_height(diag2, 8).count
    assert rows[1]["projective_observed"] == scaled_projective_count(diag2, 16)
    for r in rows:
        for key in ("affine_ratio", "projective_ratio"):
            assert math.isfinite(r[key]) and r[key] > 0
    preds = [predicted_affine(rep, B) for B in (2, 4, 8, 16, 32)]
    assert preds == sorted(preds)
    preds = [predicted_projective(rep, B) for B in (2, 4, 8, 16, 32)]
    assert preds == sorted(preds)
    back = PredictionReport.from_json(json.loads(rep.dumps()))
    assert back.comparisons[1]["projective_observed"] == rows[1]["projective_observed"]


def test_assemble_validation(diag1):
    with pytest.raises(ValueError):
        assemble(diag1, pmax=1)
