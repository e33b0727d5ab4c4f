"""Trilinear forms on Z^{n+1} x Z^{n+1} x Z^{n+1} and their bilinear contractions.

A form F(x, y, z) = sum a[i, j, k] x_i y_j z_k is stored densely.  Fixing two
of the three vector arguments leaves a linear form in the third; the
coefficient vectors of those linear forms are the three contractions

    B   (x, y)_k = sum_ij a[i, j, k] x_i y_j      (coefficient of z_k)
    B'  (x, z)_j = sum_ik a[i, j, k] x_i z_k      (coefficient of y_j)
    B'' (y, z)_i = sum_jk a[i, j, k] y_j z_k      (coefficient of x_i)
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .arith import integer_rank


class DimensionError(ValueError):
    pass


class FormFileError(ValueError):
    pass


class GenerationError(RuntimeError):
    pass


class Contraction(enum.Enum):
    """Which variable block is left free.

    Each member records the tensor axes of its two inputs and of its output.
    """

    B = ("B", (0, 1), 2)
    B_PRIME = ("B'", (0, 2), 1)
    B_SECOND = ("B''", (1, 2), 0)

    def __init__(self, label, inputs, output):
        self.label = label
        self.inputs = inputs
        self.output = output

    @classmethod
    def parse(cls, tag) -> "Contraction":
        if isinstance(tag, cls):
            return tag
        for member in cls:
            if tag in (member.label, member.name, member.name.lower()):
                return member
        raise ValueError(f"unknown contraction {tag!r}")


@dataclass(frozen=True, eq=False)
class TrilinearForm:
    n: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if self.n < 1:
            raise DimensionError("n must be >= 1")
        if c.shape != (self.n + 1,) * 3:
            raise DimensionError(f"coefficient tensor must have shape {(self.n + 1,) * 3}, got {c.shape}")
        if not np.issubdtype(c.dtype, np.integer):
            if not np.all(np.equal(np.mod(c, 1), 0)):
                raise ValueError("coefficients must be integers")
        c = c.astype(np.int64)
        if not c.any():
            raise ValueError("the zero form is not allowed")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def dim(self) -> int:
        return self.n + 1

    @property
    def max_coeff(self) -> int:
        return int(np.abs(self.coeffs).max())

    def __eq__(self, other):
        return isinstance(other, TrilinearForm) and self.n == other.n and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash((self.n, self.coeffs.tobytes()))

    def form_id(self) -> str:
        """Short content hash; identical forms get identical ids."""
        payload = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]

    # -- JSON form files -------------------------------------------------
    def to_json(self) -> dict:
        entries = [
            {"i": int(i), "j": int(j), "k": int(k), "a": int(self.coeffs[i, j, k])}
            for i, j, k in zip(*np.nonzero(self.coeffs))
        ]
        return {"n": self.n, "coeffs": entries}

    @classmethod
    def from_json(cls, obj) -> "TrilinearForm":
        if not isinstance(obj, dict):
            raise FormFileError("form file must hold a JSON object")
        n = obj.get("n")
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise FormFileError("field 'n': expected an integer >= 1")
        entries = obj.get("coeffs")
        if not isinstance(entries, list):
            raise FormFileError("field 'coeffs': expected a list of {i,j,k,a} objects")
        c = np.zeros((n + 1,) * 3, dtype=np.int64)
        for pos, e in enumerate(entries):
            if not isinstance(e, dict):
                raise FormFileError(f"coeffs[{pos}]: expected an object")
            for key in ("i", "j", "k", "a"):
                v = e.get(key)
                if not isinstance(v, int) or isinstance(v, bool):
                    raise FormFileError(f"coeffs[{pos}].{key}: expected an integer")
            i, j, k = e["i"], e["j"], e["k"]
            if not all(0 <= t <= n for t in (i, j, k)):
                raise FormFileError(f"coeffs[{pos}]: index out of range 0..{n}")
            c[i, j, k] += e["a"]
        try:
            return cls(n, c)
        except ValueError as exc:
            raise FormFileError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "TrilinearForm":
        with open(path) as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise FormFileError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        return cls.from_json(obj)

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)
            fh.write("\n")


def diagonal_form(n: int) -> TrilinearForm:
    """The form sum_i x_i y_i z_i."""
    c = np.zeros((n + 1,) * 3, dtype=np.int64)
    for i in range(n + 1):
        c[i, i, i] = 1
    return TrilinearForm(n, c)


def _check_vec(form: TrilinearForm, v, name="vector") -> tuple[int, ...]:
    v = tuple(int(a) for a in v)
    if len(v) != form.dim:
        raise DimensionError(f"{name} has length {len(v)}, expected {form.dim}")
    return v


def eval_F(form: TrilinearForm, x, y, z) -> int:
    """Exact value F(x, y, z) in Python integers."""
    x, y, z = (_check_vec(form, v, name) for v, name in ((x, "x"), (y, "y"), (z, "z")))
    c = form.coeffs
    d = form.dim
    total = 0
    for i in range(d):
        if x[i] == 0:
            continue
        for j in range(d):
            if y[j] == 0:
                continue
            xy = x[i] * y[j]
            row = c[i, j]
            for k in range(d):
                if z[k] and row[k]:
                    total += int(row[k]) * xy * z[k]
    return total


@dataclass(frozen=True)
class BilinearVector:
    values: tuple[int, ...]
    kind: Contraction

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def is_zero(self) -> bool:
        return not any(self.values)

    def dot(self, w) -> int:
        if len(w) != len(self.values):
            raise DimensionError("length mismatch in dot product")
        return sum(a * int(b) for a, b in zip(self.values, w))


def contract(form: TrilinearForm, kind, u, v) -> BilinearVector:
    """Contraction vector of ``kind`` at the input pair (u, v).

    The inputs are taken in the order the contraction names them: (x, y) for B,
    (x, z) for B', (y, z) for B''.
    """
    kind = Contraction.parse(kind)
    u = _check_vec(form, u, "u")
    v = _check_vec(form, v, "v")
    t = np.moveaxis(form.coeffs, (*kind.inputs, kind.output), (0, 1, 2))
    d = form.dim
    out = [0] * d
    for a in range(d):
        if u[a] == 0:
            continue
        for b in range(d):
            if v[b] == 0:
                continue
            uv = u[a] * v[b]
            for c in range(d):
                if t[a, b, c]:
                    out[c] += int(t[a, b, c]) * uv
    return BilinearVector(tuple(out), kind)


def contraction_matrix(form: TrilinearForm, kind, u, slot: int = 0) -> np.ndarray:
    """Matrix M with ``w @ M`` equal to the contraction when input ``slot`` is u.

    Rows are indexed by the remaining input, columns by the output index.
    """
    kind = Contraction.parse(kind)
    if slot not in (0, 1):
        raise ValueError("slot must be 0 or 1")
    u = np.asarray(_check_vec(form, u, "u"), dtype=np.int64)
    return np.tensordot(u, oriented_tensor(form, kind, slot), axes=(0, 0))


def oriented_tensor(form: TrilinearForm, kind, slot: int = 0) -> np.ndarray:
    """Coefficient tensor with axes (fixed input, other input, output)."""
    kind = Contraction.parse(kind)
    fixed = kind.inputs[slot]
    other = kind.inputs[1 - slot]
    return np.moveaxis(form.coeffs, (fixed, other, kind.output), (0, 1, 2))


def fiber_kernel_dim(form: TrilinearForm, kind, u, slot: int = 0) -> int:
    """Dimension of the space of w with contraction(u, w) = 0 (u in ``slot``)."""
    m = contraction_matrix(form, kind, u, slot)
    return form.dim - integer_rank(m.T.tolist())


# Which (kind, slot) pairs define the two fibre kernels attached to each block.
_A_SET_FIBERS = {
    1: ((Contraction.B, 0), (Contraction.B_PRIME, 0)),
    2: ((Contraction.B, 1), (Contraction.B_SECOND, 0)),
    3: ((Contraction.B_SECOND, 1), (Contraction.B_PRIME, 1)),
}


def is_in_A(form: TrilinearForm, which: int, u, lam: int) -> bool:
    """Membership of u in the open set A_{which, lam}: both fibre kernels have dim < lam."""
    if which not in _A_SET_FIBERS:
        raise ValueError("which must be 1, 2 or 3")
    if not 1 <= lam <= form.dim:
        raise ValueError(f"lambda must lie in [1, {form.dim}]")
    return all(fiber_kernel_dim(form, kind, u, slot) < lam for kind, slot in _A_SET_FIBERS[which])


class ASetCache:
    """Memoised A-set membership for many vectors of one form."""

    def __init__(self, form: TrilinearForm, lam: int):
        if not 1 <= lam <= form.dim:
            raise ValueError(f"lambda must lie in [1, {form.dim}]")
        self.form = form
        self.lam = lam
        self._cache: dict[tuple[int, tuple], bool] = {}

    def member(self, which: int, u) -> bool:
        key = (which, tuple(int(a) for a in u))
        hit = self._cache.get(key)
        if hit is None:
            hit = is_in_A(self.form, which, key[1], self.lam)
            self._cache[key] = hit
        return hit

    def mask(self, which: int, vectors: np.ndarray) -> np.ndarray:
        """Vectorised membership for an (m, n+1) integer array."""
        vectors = np.asarray(vectors, dtype=np.int64)
        out = np.ones(len(vectors), dtype=bool)
        if len(vectors) == 0:
            return out
        pending = np.ones(len(vectors), dtype=bool)
        # A nonsingular fibre matrix means kernel dimension 0 < lam.
        generic = np.ones(len(vectors), dtype=bool)
        for kind, slot in _A_SET_FIBERS[which]:
            mats = np.tensordot(vectors, oriented_tensor(self.form, kind, slot), axes=(1, 0))
            generic &= _batch_nonsingular(mats)
        pending &= ~generic
        for idx in np.nonzero(pending)[0]:
            out[idx] = self.member(which, vectors[idx])
        return out


@dataclass(frozen=True)
class GenericityReport:
    passed: tuple[bool, bool, bool]
    witnesses: tuple[Optional[tuple[int, ...]], ...]
    trials: int
    coord_bound: int
    seed: int

    @property
    def all_passed(self) -> bool:
        return all(self.passed)

    def to_json(self) -> dict:
        names = ("V1*", "V2*", "V3*")
        return {
            "trials": self.trials,
            "coord_bound": self.coord_bound,
            "seed": self.seed,
            "dims": {
                name: {"pass": ok, "witness": list(w) if w is not None else None}
                for name, ok, w in zip(names, self.passed, self.witnesses)
            },
        }


# V1* is cut out by B'', V2* by B', V3* by B.
_GENERICITY_KINDS = (Contraction.B_SECOND, Contraction.B_PRIME, Contraction.B)


def check_genericity(form: TrilinearForm, trials: int = 50, coord_bound: int = 3, seed: int = 0) -> GenericityReport:
    """Search for points u where the matrix of the fibre linear system is nonsingular.

    A single such witness shows the determinant of that matrix of linear forms is
    not identically zero, which is equivalent to dim V_i* = n + 1.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    passed = []
    witnesses = []
    for kind in _GENERICITY_KINDS:
        found = None
        for _ in range(trials):
            u = rng.integers(-coord_bound, coord_bound + 1, size=form.dim)
            if fiber_kernel_dim(form, kind, u) == 0:
                found = tuple(int(a) for a in u)
                break
        passed.append(found is not None)
        witnesses.append(found)
    return GenericityReport(tuple(passed), tuple(witnesses), trials, coord_bound, seed)


def random_generic_form(n: int, coeff_bound: int, seed: int, max_retries: int = 100) -> TrilinearForm:
    """Uniform random coefficients in [-coeff_bound, coeff_bound], retried until generic."""
    if n < 1:
        raise DimensionError("n must be >= 1")
    if coeff_bound < 1:
        raise GenerationError("coeff_bound must be >= 1 (bound 0 only yields the zero form)")
    rng = np.random.default_rng(seed)
    for attempt in range(max_retries):
        c = rng.integers(-coeff_bound, coeff_bound + 1, size=(n + 1,) * 3)
        if not c.any():
            continue
        form = TrilinearForm(n, c)
        if check_genericity(form, trials=50, coord_bound=3, seed=seed + attempt).all_passed:
            return form
    raise GenerationError(f"no generic form found in {max_retries} attempts")


def as_int_array(vectors: Sequence[Sequence[int]]) -> np.ndarray:
    return np.asarray(vectors, dtype=np.int64)


def _batch_nonsingular(mats: np.ndarray) -> np.ndarray:
    """Exact nonsingularity test for a stack of small integer matrices.

    Float determinants are trusted only below a Hadamard bound where rounding
    cannot reach 0.5; anything else falls back to exact elimination.
    """
    d = mats.shape[-1]
    if len(mats) == 0:
        return np.zeros(0, dtype=bool)
    f = mats.astype(np.float64)
    det = np.linalg.det(f)
    hadamard = np.prod(np.sqrt((f * f).sum(axis=2)), axis=1)
    trusted = hadamard < 1e12
    out = np.abs(det) > 0.5
    for idx in np.nonzero(~trusted)[0]:
        out[idx] = integer_rank(mats[idx].tolist()) == d
    return out
