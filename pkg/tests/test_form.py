import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trilinear_manin.form import (
    Contraction,
    DimensionError,
    FormFileError,
    GenerationError,
    TrilinearForm,
    check_genericity,
    contract,
    contraction_matrix,
    diagonal_form,
    eval_F,
    fiber_kernel_dim,
    is_in_A,
    random_generic_form,
)

from . import oracles

vec2 = st.lists(st.integers(-50, 50), min_size=2, max_size=2)
vec3 = st.lists(st.integers(-50, 50), min_size=3, max_size=3)


def test_eval_diagonal_example(diag1):
    assert eval_F(diag1, (1, 2), (3, 4), (5, 6)) == 63


def test_eval_zero_z(generic_n1):
    for f in generic_n1:
        assert eval_F(f, (3, -1), (2, 7), (0, 0)) == 0


def test_eval_matches_naive_loop():
    f = random_generic_form(2, 3, 7)
    _, c = oracles.coeff_list(f)
    rng = np.random.default_rng(0)
    for _ in range(200):
        x, y, z = (rng.integers(-9, 10, size=3).tolist() for _ in range(3))
        assert eval_F(f, x, y, z) == oracles.F(c, x, y, z)


def test_eval_no_overflow():
    f = diagonal_form(1)
    big = 10**30
    assert eval_F(f, (big, 0), (big, 0), (big, 0)) == big**3


def test_length_mismatch(diag1):
    with pytest.raises(DimensionError):
        eval_F(diag1, (1, 2, 3), (1, 2), (1, 2))
    with pytest.raises(DimensionError):
        contract(diag1, "B", (1,), (1, 2))


def test_contract_examples(diag1, generic_n1):
    assert contract(diag1, Contraction.B, (1, 2), (3, 4)).values == (3, 8)
    for f in generic_n1:
        for kind in Contraction:
            assert contract(f, kind, (0, 0), (5, -3)).is_zero()


@settings(max_examples=100, deadline=None)
@given(x=vec3, y=vec3, z=vec3)
def test_contraction_consistency_n2(x, y, z):
    f = random_generic_form(2, 3, 11)
    val = eval_F(f, x, y, z)
    assert contract(f, "B", x, y).dot(z) == val
    assert contract(f, "B'", x, z).dot(y) == val
    assert contract(f, "B''", y, z).dot(x) == val


@settings(max_examples=60, deadline=None)
@given(x=vec2, y=vec2, z=vec2, a=st.integers(-20, 20))
def test_multilinearity(x, y, z, a):
    f = random_generic_form(1, 3, 3)
    ax = [a * t for t in x]
    ay = [a * t for t in y]
    az = [a * t for t in z]
    v = eval_F(f, x, y, z)
    assert eval_F(f, ax, y, z) == a * v
    assert eval_F(f, x, ay, z) == a * v
    assert eval_F(f, x, y, az) == a * v


def test_contraction_matrix_agrees(generic_n1):
    for f in generic_n1:
        for kind in Contraction:
            u, w = (2, -1), (3, 5)
            M = contraction_matrix(f, kind, u, 0)
            assert tuple(int(t) for t in np.asarray(w) @ M) == contract(f, kind, u, w).values
            M1 = contraction_matrix(f, kind, u, 1)
            assert tuple(int(t) for t in np.asarray(w) @ M1) == contract(f, kind, w, u).values


def test_kernel_dim_examples(diag1):
    assert fiber_kernel_dim(diag1, "B", (1, 1)) == 0
    assert fiber_kernel_dim(diag1, "B", (1, 0)) == 1
    assert fiber_kernel_dim(diag1, "B", (0, 0)) == 2


@settings(max_examples=50, deadline=None)
@given(u=vec3, seed=st.integers(1, 5))
def test_kernel_dim_plus_rank(u, seed):
    f = random_generic_form(2, 2, seed)
    _, c = oracles.coeff_list(f)
    for kind, fn in (("B", lambda w: oracles.B_xy(c, u, w)), ("B'", lambda w: oracles.Bp_xz(c, u, w))):
        assert fiber_kernel_dim(f, kind, u) == oracles.kernel_dim_map(3, fn)


def test_is_in_A_examples(diag1):
    assert is_in_A(diag1, 1, (1, 1), 1)
    assert not is_in_A(diag1, 1, (1, 0), 1)
    assert is_in_A(diag1, 1, (1, 0), 2)
    for lam in (1, 2):
        assert not is_in_A(diag1, 1, (0, 0), lam)
    with pytest.raises(ValueError):
        is_in_A(diag1, 1, (1, 1), 3)
    with pytest.raises(ValueError):
        is_in_A(diag1, 1, (1, 1), 0)


@settings(max_examples=60, deadline=None)
@given(u=vec3, which=st.sampled_from([1, 2, 3]))
def test_is_in_A_monotone_and_oracle(u, which):
    f = random_generic_form(2, 2, 4)
    _, c = oracles.coeff_list(f)
    prev = False
    for lam in (1, 2, 3):
        cur = is_in_A(f, which, u, lam)
        assert cur == oracles.in_A(c, which, u, lam)
        assert cur or not prev
        prev = cur


def test_genericity(diag1):
    rep = check_genericity(diag1, trials=10, coord_bound=2, seed=0)
    assert rep.all_passed
    for w in rep.witnesses:
        assert w is not None
    c = np.zeros((2, 2, 2), dtype=int)
    c[0, 0, 0] = 1
    mono = TrilinearForm(1, c)
    assert not any(check_genericity(mono, trials=20, coord_bound=3, seed=1).passed)


def test_genericity_deterministic():
    f = random_generic_form(2, 3, 5)
    assert check_genericity(f, seed=9).to_json() == check_genericity(f, seed=9).to_json()


@pytest.mark.parametrize("n,bound,seed", [(1, 3, 1), (2, 1, 2), (3, 2, 4)])
def test_random_generic_form(n, bound, seed):
    f = random_generic_form(n, bound, seed)
    assert f.n == n and f.max_coeff <= bound
    assert check_genericity(f, seed=123).all_passed
    assert f == random_generic_form(n, bound, seed)


def test_generation_errors():
    with pytest.raises(GenerationError):
        random_generic_form(1, 0, 1)


def test_form_invariants():
    with pytest.raises(ValueError):
        TrilinearForm(1, np.zeros((2, 2, 2), dtype=int))
    with pytest.raises(DimensionError):
        TrilinearForm(0, np.ones((1, 1, 1), dtype=int))
    with pytest.raises(DimensionError):
        TrilinearForm(1, np.ones((2, 2, 3), dtype=int))
    f = diagonal_form(1)
    with pytest.raises(ValueError):
        f.coeffs[0, 0, 0] = 5


def test_json_roundtrip(tmp_path, generic_n1):
    for f in generic_n1:
        g = TrilinearForm.from_json(json.loads(json.dumps(f.to_json())))
        assert g == f and hash(g) == hash(f) and g.form_id() == f.form_id()
    path = tmp_path / "f.json"
    generic_n1[0].dump(path)
    assert TrilinearForm.load(path) == generic_n1[0]


@pytest.mark.parametrize(
    "payload,needle",
    [
        ([], "JSON object"),
        ({"n": "1", "coeffs": []}, "'n'"),
        ({"n": 1, "coeffs": {}}, "'coeffs'"),
        ({"n": 1, "coeffs": [{"i": 0, "j": 0, "k": 5, "a": 1}]}, "coeffs[0]"),
        ({"n": 1, "coeffs": [{"i": 0, "j": 0, "k": 0, "a": 1.5}]}, "coeffs[0].a"),
        ({"n": 1, "coeffs": []}, "zero form"),
    ],
)
def test_json_diagnostics(payload, needle):
    with pytest.raises(FormFileError, match=needle.replace("[", r"\[").replace("]", r"\]")):
        TrilinearForm.from_json(payload)


def test_malformed_file_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"n": 1,\n "coeffs": [\n')
    with pytest.raises(FormFileError, match="line"):
        TrilinearForm.load(p)
