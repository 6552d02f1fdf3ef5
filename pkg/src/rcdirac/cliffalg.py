"""The Clifford algebra Cl(1,3) of multivectors over a generic scalar ring.

Basis and conventions
---------------------
Generators e0..e3 are the orthonormal coframe one-forms, with metric
signature eta = diag(+1, -1, -1, -1), so ``e_a e_b + e_b e_a = 2 eta_ab``.
A blade is internally a bitmask over the four generators (bit a set means
e_a present, factors in ascending order); the *coefficient index* visible to
callers is the grade-grouped canonical order::

    0: 1
    1..4: e0 e1 e2 e3
    5..10: e01 e02 e03 e12 e13 e23
    11..14: e012 e013 e023 e123
    15: e0123   (unit pseudoscalar)

Product signs come from transposition counting on the bitmasks plus one
metric factor per repeated generator, exactly once, at import time, into
flat 256-entry tables.  The same pair table drives the geometric product,
the wedge (pairs with disjoint masks) and the left contraction (pairs where
the left mask is a subset of the right mask).

Scalar ring
-----------
Coefficients may be floats, ``Jet2`` values, or any ring with +, -, *
(e.g. ``fractions.Fraction`` for exact checks).  Float and jet coefficients
take vectorized numpy kernels; anything else falls back to a generic loop
with identical semantics.

The Hodge dual used throughout is ``hodge(A) = reversion(A) * e0123``; with
this convention the codifferential is a plain star-d-star sandwich on every
grade (no grade-dependent signs).
"""

from __future__ import annotations

import numpy as np

from .jets import HESS_I, HESS_J, JET_LEN, Jet2

N_GENERATORS = 4
N_BLADES = 16

SIGNATURE = (1.0, -1.0, -1.0, -1.0)

# Grade-grouped canonical order of blade bitmasks.
BLADE_MASKS = (
    0b0000,
    0b0001, 0b0010, 0b0100, 0b1000,
    0b0011, 0b0101, 0b1001, 0b0110, 0b1010, 0b1100,
    0b0111, 0b1011, 0b1101, 0b1110,
    0b1111,
)
MASK_TO_INDEX = {m: i for i, m in enumerate(BLADE_MASKS)}
GRADES = tuple(bin(m).count("1") for m in BLADE_MASKS)
GRADE_INDICES = tuple(
    tuple(i for i in range(N_BLADES) if GRADES[i] == k) for k in range(5)
)

BLADE_NAMES = tuple(
    "1" if m == 0 else "e" + "".join(str(a) for a in range(4) if m >> a & 1)
    for m in BLADE_MASKS
)


class GradeError(ValueError):
    """Raised for grade projections outside 0..4 or wrong-grade operands."""


def _mask_bits(m: int):
    return [a for a in range(N_GENERATORS) if m >> a & 1]


def _product_sign(mi: int, mj: int) -> float:
    """Sign of blade(mi) * blade(mj), metric factors included."""
    inv = 0
    for b in _mask_bits(mj):
        higher = mi & ~((1 << (b + 1)) - 1)
        inv += bin(higher).count("1")
    sign = -1.0 if inv % 2 else 1.0
    for g in _mask_bits(mi & mj):
        sign *= SIGNATURE[g]
    return sign


def _build_tables():
    entries = []
    for i, mi in enumerate(BLADE_MASKS):
        for j, mj in enumerate(BLADE_MASKS):
            k = MASK_TO_INDEX[mi ^ mj]
            s = _product_sign(mi, mj)
            w = s if (mi & mj) == 0 else 0.0
            c = s if (mi & ~mj) == 0 else 0.0  # left mask subset of right
            entries.append((k, i, j, s, w, c))
    entries.sort()  # ascending k; exactly 16 pairs land on each k
    k_idx = np.array([e[0] for e in entries])
    assert (k_idx.reshape(N_BLADES, N_BLADES) == np.arange(N_BLADES)[:, None]).all()
    return (
        np.array([e[1] for e in entries]),
        np.array([e[2] for e in entries]),
        np.array([e[3] for e in entries]),
        np.array([e[4] for e in entries]),
        np.array([e[5] for e in entries]),
    )


PAIR_I, PAIR_J, GP_SIGN, WEDGE_SIGN, LC_SIGN = _build_tables()

# Per-blade involution signs.
REVERSION_SIGN = np.array([(-1.0) ** (k * (k - 1) // 2) for k in GRADES])
INVOLUTION_SIGN = np.array([(-1.0) ** k for k in GRADES])

# Exact float fast-path types; other rings (Fraction, ...) take the generic loop.
_NUMERIC = (int, float, np.floating, np.integer)


def _mul_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise packed-jet product, a and b of shape (n, 15)."""
    out = np.empty_like(a)
    av, bv = a[:, :1], b[:, :1]
    ag, bg = a[:, 1:5], b[:, 1:5]
    out[:, :1] = av * bv
    out[:, 1:5] = av * bg + bv * ag
    out[:, 5:15] = (
        av * b[:, 5:15]
        + bv * a[:, 5:15]
        + ag[:, HESS_I] * bg[:, HESS_J]
        + ag[:, HESS_J] * bg[:, HESS_I]
    )
    return out


class Multivector:
    """A 16-coefficient element of Cl(1,3) over a generic scalar ring."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        coeffs = list(coeffs)
        if len(coeffs) != N_BLADES:
            raise ValueError(f"need {N_BLADES} coefficients, got {len(coeffs)}")
        self.coeffs = coeffs

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls) -> "Multivector":
        return cls([0.0] * N_BLADES)

    @classmethod
    def scalar(cls, value) -> "Multivector":
        c = [0.0] * N_BLADES
        c[0] = value
        return cls(c)

    @classmethod
    def basis(cls, a: int) -> "Multivector":
        """The coframe one-form e_a."""
        c = [0.0] * N_BLADES
        c[1 + a] = 1.0
        return cls(c)

    @classmethod
    def blade(cls, indices, coeff=1.0) -> "Multivector":
        """Blade e_{i1} ^ ... ^ e_{ik} for strictly increasing indices."""
        mask = 0
        for a in indices:
            if mask >> a & 1 or (mask and a <= max(_mask_bits(mask))):
                raise ValueError(f"blade indices must be strictly increasing: {indices}")
            mask |= 1 << a
        c = [0.0] * N_BLADES
        c[MASK_TO_INDEX[mask]] = coeff
        return cls(c)

    @classmethod
    def pseudoscalar(cls) -> "Multivector":
        c = [0.0] * N_BLADES
        c[15] = 1.0
        return cls(c)

    @classmethod
    def from_grade1(cls, components) -> "Multivector":
        """One-form with coframe components (v_0, v_1, v_2, v_3)."""
        c = [0.0] * N_BLADES
        c[1:5] = list(components)
        return cls(c)

    # -- structure queries ------------------------------------------------

    def is_numeric(self) -> bool:
        return all(isinstance(c, _NUMERIC) for c in self.coeffs)

    def has_jets(self) -> bool:
        return any(isinstance(c, Jet2) for c in self.coeffs)

    def values(self) -> np.ndarray:
        """Coefficient values (jets collapsed to their value part)."""
        return np.array(
            [c.value if isinstance(c, Jet2) else float(c) for c in self.coeffs]
        )

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values())))

    def grade1_components(self):
        for i, c in enumerate(self.coeffs):
            v = c.value if isinstance(c, Jet2) else float(c)
            if GRADES[i] != 1 and v != 0.0:
                raise GradeError("multivector is not pure grade 1")
        return list(self.coeffs[1:5])

    def __repr__(self):
        vals = self.values()
        parts = [
            f"{vals[i]:+.4g}*{BLADE_NAMES[i]}"
            for i in range(N_BLADES)
            if vals[i] != 0.0
        ]
        return "Multivector(" + (" ".join(parts) if parts else "0") + ")"

    # -- linear operations ------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return Multivector([a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return Multivector([a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return Multivector([-c for c in self.coeffs])

    def scale(self, s) -> "Multivector":
        if isinstance(s, Jet2) and all(
            isinstance(c, (Jet2, *_NUMERIC)) for c in self.coeffs
        ):
            arr, order = self._pack()
            rows = _mul_rows(np.broadcast_to(s.data, arr.shape), arr)
            order = min(order, s.order)
            return Multivector([Jet2(rows[i].copy(), order) for i in range(N_BLADES)])
        return Multivector([s * c for c in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return geometric_product(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        if isinstance(other, Multivector):
            return NotImplemented
        return self.scale(other)

    def __xor__(self, other):
        return wedge(self, other)

    def __lshift__(self, other):
        return left_contraction(self, other)

    # -- packing for the vectorized kernels --------------------------------

    def _pack(self):
        arr = np.zeros((N_BLADES, JET_LEN))
        order = 2
        for i, c in enumerate(self.coeffs):
            if isinstance(c, Jet2):
                arr[i] = c.data
                order = min(order, c.order)
            else:
                arr[i, 0] = float(c)
        return arr, order


def _product(a: Multivector, b: Multivector, sign: np.ndarray) -> Multivector:
    a_num, b_num = a.is_numeric(), b.is_numeric()
    if a_num and b_num:
        va = a.values()[PAIR_I]
        vb = b.values()[PAIR_J]
        out = (sign * va * vb).reshape(N_BLADES, N_BLADES).sum(axis=1)
        return Multivector(out.tolist())
    if (a_num or a.has_jets()) and (b_num or b.has_jets()):
        pa, oa = a._pack()
        pb, ob = b._pack()
        rows = _mul_rows(pa[PAIR_I], pb[PAIR_J])
        packed = (sign[:, None] * rows).reshape(N_BLADES, N_BLADES, JET_LEN).sum(axis=1)
        order = min(oa, ob)
        return Multivector([Jet2(packed[i].copy(), order) for i in range(N_BLADES)])
    # Generic ring fallback (exact arithmetic, arbitrary scalar types).
    out = [None] * N_BLADES
    for k, i, j, s in zip(
        np.arange(N_BLADES).repeat(N_BLADES), PAIR_I, PAIR_J, sign
    ):
        if s == 0.0:
            continue
        term = a.coeffs[i] * b.coeffs[j]
        if s < 0:
            term = -term
        out[k] = term if out[k] is None else out[k] + term
    return Multivector([0.0 if c is None else c for c in out])


def geometric_product(a: Multivector, b: Multivector) -> Multivector:
    return _product(a, b, GP_SIGN)


def wedge(a: Multivector, b: Multivector) -> Multivector:
    return _product(a, b, WEDGE_SIGN)


def left_contraction(a: Multivector, b: Multivector) -> Multivector:
    return _product(a, b, LC_SIGN)


def _blade_signs(a: Multivector, signs: np.ndarray) -> Multivector:
    return Multivector(
        [c if s > 0 else -c for c, s in zip(a.coeffs, signs)]
    )


def reversion(a: Multivector) -> Multivector:
    return _blade_signs(a, REVERSION_SIGN)


def grade_involution(a: Multivector) -> Multivector:
    return _blade_signs(a, INVOLUTION_SIGN)


def grade_project(a: Multivector, k: int) -> Multivector:
    if not 0 <= k <= 4:
        raise GradeError(f"grade {k} outside 0..4")
    return Multivector(
        [c if GRADES[i] == k else 0.0 for i, c in enumerate(a.coeffs)]
    )


_PSEUDO = Multivector.pseudoscalar()


def hodge_dual(a: Multivector) -> Multivector:
    """Dual through the unit pseudoscalar: reversion(a) * e0123."""
    return geometric_product(reversion(a), _PSEUDO)


def commutator(a: Multivector, b: Multivector) -> Multivector:
    """Half-free bracket [a, b] = ab - ba."""
    return geometric_product(a, b) - geometric_product(b, a)


def pair_blade(a: int, b: int):
    """(index, sign) of e_a ^ e_b in the canonical order; sign 0 if a == b."""
    if a == b:
        return 0, 0.0
    if a < b:
        return MASK_TO_INDEX[(1 << a) | (1 << b)], 1.0
    return MASK_TO_INDEX[(1 << a) | (1 << b)], -1.0
