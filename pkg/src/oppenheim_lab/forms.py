"""Quadratic forms, exact and floating, homogeneous and shifted."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .numbers import (
    NotExact,
    Number,
    Surd,
    as_number,
    exact_root,
    is_rational,
    is_zero,
    number_to_json,
)


class FormError(ValueError):
    pass


class DegenerateFormError(FormError):
    pass


class DimensionError(FormError):
    pass


class UnsupportedModeError(FormError):
    pass


def _mode_of(entries) -> str:
    flat = [e for row in entries for e in row]
    if all(isinstance(e, Fraction) for e in flat):
        return "rational"
    if all(isinstance(e, (Fraction, Surd)) for e in flat):
        return "tagged"
    return "float"


@dataclass(frozen=True)
class SymmetricForm:
    """Q(x) = x^T M x for a symmetric coefficient matrix M.

    ``mode`` is "rational" (all Fractions), "tagged" (Fractions and Surds) or
    "float".  Any float entry turns the whole form into float mode.
    """

    entries: tuple[tuple[Number, ...], ...]

    def __post_init__(self):
        rows = [tuple(as_number(e) for e in row) for row in self.entries]
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise DimensionError("coefficient matrix must be square")
        if _mode_of(rows) == "float":
            rows = [tuple(float(e) for e in row) for row in rows]
        for i in range(n):
            for j in range(i):
                if rows[i][j] != rows[j][i]:
                    raise FormError(f"matrix not symmetric at ({i},{j})")
        object.__setattr__(self, "entries", tuple(rows))

    @classmethod
    def from_polynomial(cls, dim: int, coeffs: dict) -> "SymmetricForm":
        """Build from monomial coefficients {(i, j): c} meaning c * x_i * x_j (0-based)."""
        m = [[Fraction(0)] * dim for _ in range(dim)]
        for (i, j), c in coeffs.items():
            c = as_number(c)
            i, j = min(i, j), max(i, j)
            if i == j:
                m[i][i] = m[i][i] + c
            else:
                half = c / 2 if not isinstance(c, float) else c / 2.0
                m[i][j] = m[i][j] + half
                m[j][i] = m[j][i] + half
        return cls(tuple(tuple(r) for r in m))

    @property
    def dim(self) -> int:
        return len(self.entries)

    @property
    def mode(self) -> str:
        return _mode_of(self.entries)

    @property
    def is_exact(self) -> bool:
        return self.mode != "float"

    def matrix(self) -> np.ndarray:
        return np.array([[float(e) for e in row] for row in self.entries])

    def __call__(self, x) -> Number:
        return evaluate(InhomForm(self, (Fraction(0),) * self.dim), x)

    def scaled(self, c: Number) -> "SymmetricForm":
        c = as_number(c)
        return SymmetricForm(tuple(tuple(c * e for e in row) for row in self.entries))

    def congruent(self, g) -> "SymmetricForm":
        """The form x -> Q(g x), i.e. matrix g^T M g, for an integer or rational g."""
        g = [[as_number(v) for v in row] for row in g]
        n = self.dim
        m = self.entries
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                s = Fraction(0)
                for k in range(n):
                    if is_zero(g[k][i]):
                        continue
                    for l in range(n):
                        if is_zero(g[l][j]) or is_zero(m[k][l]):
                            continue
                        s = s + g[k][i] * m[k][l] * g[l][j]
                row.append(s)
            out.append(tuple(row))
        return SymmetricForm(tuple(out))


@dataclass(frozen=True)
class InhomForm:
    """Q_xi(x) = Q(x + xi)."""

    homogeneous: SymmetricForm
    shift: tuple[Number, ...]

    def __post_init__(self):
        shift = tuple(as_number(s) for s in self.shift)
        if len(shift) != self.homogeneous.dim:
            raise DimensionError("shift length must equal the form dimension")
        object.__setattr__(self, "shift", shift)

    @classmethod
    def homogeneous_only(cls, q: SymmetricForm) -> "InhomForm":
        return cls(q, (Fraction(0),) * q.dim)

    @property
    def dim(self) -> int:
        return self.homogeneous.dim

    @property
    def is_exact(self) -> bool:
        return self.homogeneous.is_exact and all(not isinstance(s, float) for s in self.shift)

    @property
    def is_rational_input(self) -> bool:
        """All coefficients and shift entries are exact rationals."""
        return self.homogeneous.mode == "rational" and all(isinstance(s, Fraction) for s in self.shift)

    def shift_array(self) -> np.ndarray:
        return np.array([float(s) for s in self.shift])

    def __call__(self, x) -> Number:
        return evaluate(self, x)

    def to_json(self) -> str:
        return json.dumps(form_to_dict(self))

    @classmethod
    def from_json(cls, text: str) -> "InhomForm":
        return form_from_dict(json.loads(text))


class Rationality(enum.Enum):
    RATIONAL_FORM = "RationalForm"
    IRRATIONAL_HOMOGENEOUS = "IrrationalHomogeneous"
    RATIONAL_HOMOGENEOUS_IRRATIONAL_SHIFT = "RationalHomogeneousIrrationalShift"


@dataclass(frozen=True)
class RationalityReport:
    kind: Rationality
    # c > 0 making c*Q a primitive integral polynomial; None when Q is
    # irrational or the scalar is itself a tagged irrational (then only the
    # float value is reported).
    witness: Fraction | None
    witness_value: float | None


@dataclass(frozen=True)
class Signature:
    positive: int
    negative: int

    def __iter__(self):
        return iter((self.positive, self.negative))


def evaluate(form: InhomForm, x: Sequence) -> Number:
    """(x + xi)^T M (x + xi); exact when every input is exact and the products stay tagged-linear."""
    if len(x) != form.dim:
        raise DimensionError(f"vector of length {len(x)} for a form in {form.dim} variables")
    xs = [as_number(int(v)) if _is_integral_scalar(v) else as_number(v) for v in x]
    u = [a + b for a, b in zip(xs, form.shift)]
    m = form.homogeneous.entries
    if all(not isinstance(v, float) for v in u) and form.homogeneous.is_exact:
        try:
            total = Fraction(0)
            for i in range(form.dim):
                if is_zero(u[i]):
                    continue
                for j in range(form.dim):
                    if is_zero(u[j]) or is_zero(m[i][j]):
                        continue
                    total = total + u[i] * m[i][j] * u[j]
            return total
        except NotExact:
            pass
    uf = np.array([float(v) for v in u])
    return float(uf @ form.homogeneous.matrix() @ uf)


def _is_integral_scalar(v) -> bool:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return True
    return False


def _exact_determinant(entries) -> Fraction:
    a = [list(r) for r in entries]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f:
                for k in range(c, n):
                    a[r][k] -= f * a[c][k]
    return det


def determinant(form: SymmetricForm) -> Number:
    if form.mode == "rational":
        return _exact_determinant(form.entries)
    return float(np.linalg.det(form.matrix()))


def _exact_signature(entries) -> Signature:
    # Symmetric elimination with congruence moves; every step is x -> G x with G invertible.
    a = [list(r) for r in entries]
    pos = neg = 0
    while a:
        n = len(a)
        piv = next((i for i in range(n) if a[i][i] != 0), None)
        if piv is None:
            off = next(((i, j) for i in range(n) for j in range(i + 1, n) if a[i][j] != 0), None)
            if off is None:
                raise DegenerateFormError("zero pivot chain with no completion: form is degenerate")
            i, j = off
            # x_i -> x_i + x_j makes the (i, i) entry 2 a_ij.
            for k in range(n):
                a[i][k] += a[j][k]
            for k in range(n):
                a[k][i] += a[k][j]
            piv = i
        p = a[piv][piv]
        if p > 0:
            pos += 1
        else:
            neg += 1
        rest = [k for k in range(n) if k != piv]
        a = [[a[r][c] - a[r][piv] * a[piv][c] / p for c in rest] for r in rest]
    return Signature(pos, neg)


def signature(form: SymmetricForm) -> Signature:
    """Inertia (p, q): exact elimination for rational forms, eigenvalue signs otherwise."""
    if form.mode == "rational":
        return _exact_signature(form.entries)
    m = form.matrix()
    ev = np.linalg.eigvalsh(m)
    thresh = 1e-10 * max(np.linalg.norm(m), 1e-300)
    if np.any(np.abs(ev) <= thresh):
        raise DegenerateFormError("form is degenerate to within 1e-10 * |M|")
    return Signature(int(np.sum(ev > 0)), int(np.sum(ev < 0)))


def normalize_discriminant(form: SymmetricForm) -> SymmetricForm:
    """c * Q with c > 0 and |det(c M)| = 1; exact when the root is rational."""
    n = form.dim
    det = determinant(form)
    if det == 0:
        raise DegenerateFormError("cannot normalize a degenerate form")
    if isinstance(det, Fraction):
        if abs(det) == 1:
            return form
        c = exact_root(1 / abs(det), n)
        if c is not None:
            return form.scaled(c)
    c = abs(float(det)) ** (-1.0 / n)
    if abs(c - 1.0) < 1e-15:
        return form
    return SymmetricForm(tuple(tuple(c * float(e) for e in row) for row in form.entries))


def classify_rationality(form: InhomForm) -> RationalityReport:
    q = form.homogeneous
    if q.mode == "float" or any(isinstance(s, float) for s in form.shift):
        raise UnsupportedModeError("rationality of floating inputs cannot be decided; use tagged entries")
    flat = [e for row in q.entries for e in row]
    ref = next((e for e in flat if not is_zero(e)), None)
    if ref is None:
        raise FormError("the zero form has no rationality class")
    proportional = all(_rational_ratio(e, ref) is not None for e in flat)
    if not proportional:
        return RationalityReport(Rationality.IRRATIONAL_HOMOGENEOUS, None, None)
    ratios = [_rational_ratio(e, ref) for e in flat]
    content = _polynomial_content(ratios, q.dim)
    if isinstance(ref, Fraction):
        witness = 1 / (ref * content)
        witness_value = float(witness)
    else:
        witness = None  # 1 / (tagged entry) leaves the tagged-linear algebra
        witness_value = 1.0 / (float(ref) * float(content))
    if all(is_rational(s) for s in form.shift):
        return RationalityReport(Rationality.RATIONAL_FORM, witness, witness_value)
    return RationalityReport(Rationality.RATIONAL_HOMOGENEOUS_IRRATIONAL_SHIFT, witness, witness_value)


def _polynomial_content(ratios, n) -> Fraction:
    """Positive rational gcd of the monomial coefficients of the matrix given row-major."""
    from math import gcd

    coeffs = []
    for i in range(n):
        coeffs.append(ratios[i * n + i])
        coeffs.extend(2 * ratios[i * n + j] for j in range(i + 1, n))
    coeffs = [c for c in coeffs if c != 0]
    den = 1
    for c in coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    g = 0
    for c in coeffs:
        g = gcd(g, int(c * den))
    return Fraction(g, den)


def _rational_ratio(e: Number, ref: Number) -> Fraction | None:
    """r with e == r * ref when it exists (tag-exact)."""
    if is_zero(e):
        return Fraction(0)
    if isinstance(ref, Fraction):
        return e / ref if isinstance(e, Fraction) else None
    if isinstance(e, Fraction):
        return None
    # both Surds: coefficient vectors must be proportional
    ve = {"": e.const, **dict(e.terms)}
    vr = {"": ref.const, **dict(ref.terms)}
    if set(k for k, v in ve.items() if v) != set(k for k, v in vr.items() if v):
        return None
    k0 = next(k for k, v in vr.items() if v)
    r = ve[k0] / vr[k0]
    return r if all(ve.get(k, 0) == r * v for k, v in vr.items()) else None


# standard forms -----------------------------------------------------------


def standard_form(p: int, q: int) -> SymmetricForm:
    """The model forms: x1x4 - x2x3 for (2,2), x1x3 - x2^2 for (2,1), else 2 x1 xn + ... ."""
    n = p + q
    if (p, q) == (2, 2):
        return SymmetricForm.from_polynomial(4, {(0, 3): 1, (1, 2): -1})
    if (p, q) == (2, 1):
        return SymmetricForm.from_polynomial(3, {(0, 2): 1, (1, 1): -1})
    if p >= 3 and q >= 1:
        coeffs = {(0, n - 1): 2}
        for i in range(1, p):
            coeffs[(i, i)] = 1
        for i in range(p, n - 1):
            coeffs[(i, i)] = -1
        return SymmetricForm.from_polynomial(n, coeffs)
    raise FormError(f"no standard form for signature ({p},{q})")


def b4() -> SymmetricForm:
    """x1 x4 - x2 x3, the determinant on 2x2 matrices [[x1, x2], [x3, x4]]."""
    return standard_form(2, 2)


def q0_21() -> SymmetricForm:
    """2 x z - y^2."""
    return SymmetricForm.from_polynomial(3, {(0, 2): 2, (1, 1): -1})


def diagonal_form(coeffs) -> SymmetricForm:
    n = len(coeffs)
    return SymmetricForm(tuple(tuple(as_number(coeffs[i]) if i == j else Fraction(0) for j in range(n)) for i in range(n)))


# serialization --------------------------------------------------------------


def form_to_dict(form: InhomForm) -> dict:
    q = form.homogeneous
    return {
        "dim": q.dim,
        "entries": [[number_to_json(e) for e in row] for row in q.entries],
        "shift": [number_to_json(s) for s in form.shift],
        "mode": "float" if q.mode == "float" else "rational",
    }


def form_from_dict(obj: dict) -> InhomForm:
    mode = obj.get("mode", "rational")
    if mode not in ("rational", "float"):
        raise FormError(f"unknown mode {mode!r}")
    conv = (lambda v: float(Fraction(v)) if isinstance(v, str) else float(v)) if mode == "float" else as_number
    entries = tuple(tuple(conv(e) for e in row) for row in obj["entries"])
    q = SymmetricForm(entries)
    if q.dim != obj.get("dim", q.dim):
        raise DimensionError("dim field disagrees with entries")
    shift = obj.get("shift") or [0] * q.dim
    return InhomForm(q, tuple(conv(s) for s in shift))
