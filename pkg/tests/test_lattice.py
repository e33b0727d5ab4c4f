import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from trilinear_manin.enumeration import count_hyperplane_points
from trilinear_manin.lattice import (
    UniformSumDensity,
    density_at_zero,
    gram_det,
    kernel_basis,
    lattice_det,
    predict_fiber,
    predict_fiber_exact,
    slice_density_at_zero_batch,
    slice_volume,
)

nonzero_vec = st.lists(st.integers(-20, 20), min_size=2, max_size=5).filter(any)


def test_det_examples():
    assert lattice_det((0, 1)) == (1, 1.0)
    assert lattice_det((1, 2, 2))[0] == 9
    assert lattice_det((2, 4, 4))[0] == 9


def test_kernel_basis_examples():
    basis = kernel_basis((1, 1))
    assert len(basis) == 1 and abs(basis[0][0]) == 1 and basis[0][0] == -basis[0][1]
    assert gram_det(kernel_basis((1, 2, 2))) == 9


@settings(max_examples=150, deadline=None)
@given(b=nonzero_vec)
def test_kernel_basis_properties(b):
    basis = kernel_basis(b)
    assert len(basis) == len(b) - 1
    for v in basis:
        assert sum(x * y for x, y in zip(b, v)) == 0
    assert gram_det(basis) == lattice_det(b)[0]


@settings(max_examples=50, deadline=None)
@given(b=nonzero_vec, c=st.integers(-6, 6).filter(bool))
def test_det_scale_invariance(b, c):
    assert lattice_det(b) == lattice_det([c * t for t in b])


def test_zero_vector_rejected():
    for fn in (lattice_det, kernel_basis, slice_volume):
        with pytest.raises(ValueError):
            fn((0, 0, 0))


def test_closed_form_volumes():
    for d in range(2, 6):
        b = [0] * (d - 1) + [1]
        assert abs(slice_volume(b).value - 2 ** (d - 1)) <= 1e-12
    assert abs(slice_volume((1, 1)).value - 2 * math.sqrt(2)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(b=st.tuples(st.integers(-9, 9), st.integers(-9, 9)).filter(any))
def test_volume_segment_formula(b):
    # In the square the slice is a segment of length 2 ||b|| / max|b_k|.
    expect = 2 * math.hypot(*b) / max(abs(t) for t in b)
    assert abs(slice_volume(b).value - expect) <= 1e-12 * expect


def test_volume_122_mc():
    ex = slice_volume((1, 2, 2))
    assert ex.exact_density == Fraction(7, 32)
    mc = slice_volume((1, 2, 2), "mc", samples=10**6, seed=3)
    assert abs(mc.value - ex.value) <= 3 * mc.stderr
    with pytest.raises(ValueError):
        slice_volume((1, 2), "mc", samples=10)
    with pytest.raises(ValueError):
        slice_volume((1, 2), "nope")


@settings(max_examples=25, deadline=None)
@given(b=st.lists(st.integers(1, 6), min_size=1, max_size=4))
def test_density_integrates_to_one(b):
    dens = UniformSumDensity.from_coefficients(b)
    s = sum(b)
    breaks = sorted({float(t) for t in dens.terms})
    total = sum(
        integrate.quad(lambda t: float(dens(Fraction(t))), lo, hi)[0] for lo, hi in zip(breaks, breaks[1:])
    )
    assert abs(total - 1) < 1e-9
    assert dens(s + 1) == 0 and dens(-s - 1) == 0
    assert dens(Fraction(1, 3)) == dens(Fraction(-1, 3))


@settings(max_examples=60, deadline=None)
@given(b=st.lists(st.integers(-12, 12), min_size=2, max_size=5).filter(any))
def test_batch_density_matches_exact(b):
    fast = slice_density_at_zero_batch(np.array([b], dtype=float))[0]
    exact = float(density_at_zero(b))
    assert abs(fast - exact) <= 1e-9 * exact


def test_predict_examples():
    assert predict_fiber((1, 1), 100) == 200 and count_hyperplane_points((1, 1), 100) == 201
    assert predict_fiber((0, 1), 50) == 100 and count_hyperplane_points((0, 1), 50) == 101
    pred = predict_fiber((1, 2, 2), 200)
    assert abs(count_hyperplane_points((1, 2, 2), 200) / pred - 1) <= 0.05
    assert predict_fiber_exact((1, 2, 2), 200) == Fraction(70000)
