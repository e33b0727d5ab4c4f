import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trilinear_manin.enumeration import (
    CountReport,
    CountVariant,
    DegenerateFiberError,
    count_box,
    count_fiber_z,
    count_height,
    count_hyperplane_points,
    h_function,
    height_histogram,
    moebius_from_histogram,
    moebius_primitive,
    scaled_projective_count,
)
from trilinear_manin.form import Contraction, contract, diagonal_form, random_generic_form

from . import oracles

TAGS = ["all", "nondeg3", "n1", "nprime", "u"]


def test_fiber_examples(diag1):
    # B(x, y) = (1, 1) and (0, 1) on the diagonal form.
    assert count_fiber_z(diag1, (1, 1), (1, 1), 5, "all") == 11
    assert count_fiber_z(diag1, (1, 1), (0, 1), 7, "all") == 15


def test_degenerate_fiber(diag1):
    with pytest.raises(DegenerateFiberError):
        count_fiber_z(diag1, (1, 0), (0, 1), 3)


def test_fiber_against_naive_n2():
    f = random_generic_form(2, 3, 5)
    rng = np.random.default_rng(1)
    for _ in range(5):
        x, y = rng.integers(-2, 3, size=3), rng.integers(-2, 3, size=3)
        b = contract(f, Contraction.B, x, y)
        if b.is_zero():
            continue
        assert count_fiber_z(f, x, y, 20, "all") == oracles.naive_hyperplane_count(b.values, 20)


@settings(max_examples=60, deadline=None)
@given(b=st.lists(st.integers(-7, 7), min_size=2, max_size=3).filter(any), P=st.integers(0, 6))
def test_hyperplane_count_property(b, P):
    assert count_hyperplane_points(b, P) == oracles.naive_hyperplane_count(b, P)


def test_fiber_U_filter_against_naive(generic_n1):
    f = generic_n1[0]
    _, c = oracles.coeff_list(f)
    x, y, P3 = (1, 2), (2, -1), 4
    expect = sum(
        1 for z in oracles.box(P3, 2) if oracles.accept(c, x, y, z, "u", 1)
    )
    assert count_fiber_z(f, x, y, P3, "u") == expect


@pytest.mark.parametrize("tag", TAGS)
def test_box_against_exhaustive_diag(diag1, tag):
    assert count_box(diag1, 1, 1, 1, tag).count == oracles.naive_box_count(diag1, 1, 1, 1, tag)


@pytest.mark.parametrize("tag", TAGS)
def test_box_against_exhaustive_generic(generic_n1, tag):
    f = generic_n1[1]
    assert count_box(f, 2, 1, 2, tag).count == oracles.naive_box_count(f, 2, 1, 2, tag)


def test_box_n2_against_exhaustive(generic_n2):
    f = generic_n2[0]
    for tag in ("nondeg3", "u"):
        assert count_box(f, 1, 1, 1, tag).count == oracles.naive_box_count(f, 1, 1, 1, tag)


def test_box_trivial_cases(generic_n1):
    f = generic_n1[2]
    pairs = sum(
        1 for x in oracles.box(2, 2) for y in oracles.box(3, 2) if any(oracles.B_xy(oracles.coeff_list(f)[1], x, y))
    )
    assert count_box(f, 2, 3, 0, "nondeg3").count == pairs
    assert count_box(f, 0, 3, 3, "nondeg3").count == 0


def test_variant_nesting(generic_n1):
    for f in generic_n1[:3]:
        counts = [count_box(f, 2, 2, 2, t).count for t in ("u", "nprime", "n1", "nondeg3", "all")]
        assert counts == sorted(counts)


def test_shell_telescoping(generic_n1):
    f = generic_n1[0]
    total = sum(h_function(f, a, b, c) for a in range(3) for b in range(3) for c in range(3))
    assert total == count_box(f, 2, 2, 2, "u").count
    assert h_function(f, 0, 1, 1) == 0 and h_function(f, 1, 1, 0) == 0


def test_h_diag_exhaustive(diag1):
    _, c = oracles.coeff_list(diag1)
    shell = [v for v in oracles.box(1, 2) if oracles.sup(v) == 1]
    expect = sum(1 for x in shell for y in shell for z in shell if oracles.accept(c, x, y, z, "u", 1))
    assert h_function(diag1, 1, 1, 1) == expect


@pytest.mark.parametrize("primitive", [False, True])
def test_height_against_naive(generic_n1, primitive):
    f = generic_n1[3]
    for B in (1, 2, 4):
        assert count_height(f, B, primitive).count == oracles.naive_height_count(f, B, primitive)


def test_height_B1_primitive_equal(generic_n1):
    for f in generic_n1:
        assert count_height(f, 1, True).count == count_height(f, 1, False).count


def test_height_monotone(generic_n1):
    f = generic_n1[0]
    assert count_height(f, 10).count <= count_height(f, 20).count


def test_height_sign_symmetry(generic_n1):
    # Every counted triple pairs with its image under x -> -x (and likewise y, z):
    # the histogram for each height is a multiple of 8.
    for f in generic_n1[:2]:
        hist = height_histogram(f, 12, "u")
        assert np.all(hist % 8 == 0)


def test_moebius_examples(diag1):
    assert moebius_primitive(diag1, 1) == count_height(diag1, 1).count
    assert moebius_primitive(diag1, 12) == count_height(diag1, 12, primitive=True).count


def test_moebius_all_B_from_histogram(generic_n1):
    f = generic_n1[4]
    full = height_histogram(f, 20, "u", primitive=False)
    prim = np.cumsum(height_histogram(f, 20, "u", primitive=True))
    for B in range(1, 21):
        assert moebius_from_histogram(full, B) == prim[B]


def test_scaled_projective(diag2, generic_n1):
    assert scaled_projective_count(diag2, 100) * 8 == moebius_primitive(diag2, 10)
    f = generic_n1[0]
    assert scaled_projective_count(f, 9) * 8 == moebius_primitive(f, 9)
    with pytest.raises(ValueError):
        scaled_projective_count(f, 0.5)


def test_worker_determinism(generic_n1):
    f = generic_n1[1]
    assert count_box(f, 3, 3, 3, "u", workers=1).count == count_box(f, 3, 3, 3, "u", workers=3).count
    assert count_height(f, 15, workers=1).count == count_height(f, 15, workers=2).count


def test_lambda_override(diag1):
    # With lambda = 2 every nonzero vector passes the A-tests for the diagonal form.
    lo = count_box(diag1, 2, 2, 2, CountVariant.U(1)).count
    hi = count_box(diag1, 2, 2, 2, CountVariant.U(2)).count
    assert lo <= hi
    assert hi == oracles.naive_box_count(diag1, 2, 2, 2, "u", lam=2)
    with pytest.raises(ValueError):
        count_box(diag1, 1, 1, 1, CountVariant.U(3))


def test_report_roundtrip(generic_n1):
    rep = count_box(generic_n1[0], 1, 2, 1, "nondeg3")
    back = CountReport.from_json(rep.to_json())
    assert back == rep


def test_variant_validation():
    with pytest.raises(ValueError):
        CountVariant("bogus")
    with pytest.raises(ValueError):
        CountVariant("u", 0)
