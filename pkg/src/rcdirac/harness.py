"""Residual harness: load a scenario, sample chart points, run identity
checks, emit deterministic reports.

Every check is a pure function of (scenario, point, test fields); the run
evaluates each selected check at each sampled point and reports max/mean
residuals against the tolerance.  Reports are byte-identical across runs
with the same scenario bytes, seed and flags, at any worker count: work is
keyed by point index and merged in index order, and timing goes to stderr.

Auto-generated test fields are random degree-3 polynomials with seeded
coefficients, normalized to unit sup-norm over the sampled points.  A
scenario may override any of them by defining fields with the reserved
names ``f.scalar`` and ``A.vector``, ``A.bivector``, ``A.even``,
``A.general``, ``A.general2``, ``A.current``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import fieldspec, geometry, operators
from .cliffalg import GRADES, Multivector, geometric_product, grade_involution, wedge
from .fieldspec import Scenario, ScenarioError, eval_expr
from .geometry import ETA, DegenerateFrameError
from .jets import ChartPoint, Jet2, JetDomainError, JetOrderError, seed_coordinate

MARGIN = 0.05

# Monomial exponents of total degree <= 3 in four variables (35 of them).
MONOMIALS: tuple[tuple[int, int, int, int], ...] = tuple(
    (i, j, k, l)
    for i in range(4)
    for j in range(4)
    for k in range(4)
    for l in range(4)
    if i + j + k + l <= 3
)

FIELD_KINDS = {
    "scalar": (0,),
    "vector": (1,),
    "bivector": (2,),
    "even": (0, 2, 4),
    "general": (0, 1, 2, 3, 4),
    "general2": (0, 1, 2, 3, 4),
    "current": (1,),
}


class UsageError(ValueError):
    """Bad command-line arguments."""


# -- test fields --------------------------------------------------------------


@dataclass
class RunField:
    """A test field: random polynomial coefficients or scenario expressions,
    with a sup-norm scale applied at evaluation time."""

    kind: str
    polys: np.ndarray | None = None       # (16, 35) monomial coefficients
    exprs: tuple | None = None            # 16 expressions from the scenario
    scale: float = 1.0

    def at(self, point: ChartPoint) -> Multivector:
        if self.exprs is not None:
            coeffs = [eval_expr(e, point) * self.scale for e in self.exprs]
            return Multivector(coeffs)
        xs = [seed_coordinate(mu, point) for mu in range(4)]
        mons = []
        for i, j, k, l in MONOMIALS:
            m = Jet2.const(1.0)
            for _ in range(i):
                m = m * xs[0]
            for _ in range(j):
                m = m * xs[1]
            for _ in range(k):
                m = m * xs[2]
            for _ in range(l):
                m = m * xs[3]
            mons.append(m)
        coeffs = []
        for row in self.polys:
            if not row.any():
                coeffs.append(0.0)
                continue
            acc = Jet2.const(0.0)
            for c, m in zip(row, mons):
                if c != 0.0:
                    acc = acc + float(c) * m
            coeffs.append(acc * self.scale)
        return Multivector(coeffs)


def build_run_fields(scenario: Scenario, seed: int, points) -> dict[str, RunField]:
    """Assemble all test fields for a run and normalize them to unit
    sup-norm over the sampled points."""
    rng = np.random.default_rng([seed, 0xF1E1D])
    fields: dict[str, RunField] = {}
    for kind, grades in FIELD_KINDS.items():
        override = None
        if kind == "scalar" and "scalar" in scenario.scalar_fields:
            override = (scenario.scalar_fields["scalar"],) + (fieldspec.ZERO_EXPR,) * 15
        elif kind != "scalar" and kind in scenario.multivector_fields:
            override = scenario.multivector_fields[kind]
            for i, expr in enumerate(override):
                if GRADES[i] not in grades and expr != fieldspec.ZERO_EXPR:
                    raise ScenarioError(
                        f"field A.{kind} has a component at blade {i} "
                        f"(grade {GRADES[i]}), but this reserved name only "
                        f"allows grades {grades}"
                    )
        # the rng stream is consumed for every kind regardless of overrides,
        # so pinning one field never reshuffles the generated ones
        polys = np.zeros((16, len(MONOMIALS)))
        for i in range(16):
            if GRADES[i] in grades:
                polys[i] = rng.uniform(-1.0, 1.0, len(MONOMIALS))
        if override is not None:
            fields[kind] = RunField(kind=kind, exprs=tuple(override))
        else:
            fields[kind] = RunField(kind=kind, polys=polys)
    for f in fields.values():
        sup = 0.0
        for p in points:
            sup = max(sup, f.at(p).max_abs())
        if sup > 1e-12:
            f.scale = 1.0 / sup
    return fields


# -- sampling ------------------------------------------------------------------


_HALTON_BASES = (2, 3, 5, 7)


def _halton(index: int, base: int) -> float:
    f, r = 1.0, 0.0
    while index > 0:
        f /= base
        r += f * (index % base)
        index //= base
    return r


def sample_points(scenario: Scenario, points: int | None = None, seed: int | None = None):
    """Seeded quasi-uniform points, strictly interior (5% margin) to the
    chart box so user expressions stay away from edge singularities.

    A Halton sequence with a seeded rotation: low discrepancy in the box,
    deterministic for a given (seed, count)."""
    n = scenario.sampling.points if points is None else points
    s = scenario.sampling.seed if seed is None else seed
    if n <= 0:
        raise ValueError(f"point count must be positive, got {n}")
    for lo, hi in scenario.chart_box:
        if not hi > lo:
            raise ValueError(f"empty chart box interval ({lo}, {hi})")
    shift = np.random.default_rng([s, 0x5A11]).uniform(0.0, 1.0, 4)
    out = []
    for k in range(n):
        coords = []
        for d, (lo, hi) in enumerate(scenario.chart_box):
            u = (_halton(k + 1, _HALTON_BASES[d]) + shift[d]) % 1.0
            t = MARGIN + u * (1.0 - 2.0 * MARGIN)
            coords.append(float(lo + t * (hi - lo)))
        out.append(ChartPoint(tuple(coords)))
    return out


# -- check registry --------------------------------------------------------------


@dataclass(frozen=True)
class CheckDescriptor:
    name: str
    anchor: str                       # identity statement, for explain/JSON
    fields: tuple[str, ...]
    fn: object
    jet_order: int = 2
    note: str = ""


CHECKS: dict[str, CheckDescriptor] = {}


def _check(name, anchor, fields=(), jet_order=2, note=""):
    def deco(fn):
        CHECKS[name] = CheckDescriptor(
            name=name, anchor=anchor, fields=tuple(fields), fn=fn,
            jet_order=jet_order, note=note,
        )
        return fn

    return deco


class PointContext:
    """Shared per-point state: frame geometry, curvature and test fields,
    built lazily so cheap checks stay cheap."""

    def __init__(self, scenario: Scenario, fields: dict[str, RunField], point: ChartPoint):
        self.scenario = scenario
        self.point = point
        self._fields = fields
        self._values: dict[str, Multivector] = {}
        self._geom = None
        self._curv = None
        self._thetas = None

    @property
    def geom(self):
        if self._geom is None:
            self._geom = geometry.build_frame(self.scenario, self.point)
        return self._geom

    @property
    def curv(self):
        if self._curv is None:
            self._curv = geometry.curvature(self.geom)
        return self._curv

    @property
    def torsion_forms(self):
        if self._thetas is None:
            self._thetas = geometry.torsion_two_forms(self.geom)
        return self._thetas

    def field(self, kind: str) -> Multivector:
        if kind not in self._values:
            self._values[kind] = self._fields[kind].at(self.point)
        return self._values[kind]

    def scalar(self) -> Jet2:
        f = self.field("scalar").coeffs[0]
        return f if isinstance(f, Jet2) else Jet2.const(float(f))

    def scalar_mv(self) -> Multivector:
        return Multivector([self.scalar()] + [0.0] * 15)


_TOT_ANTISYM_NOTE = "valid for totally antisymmetric (zero-strain) torsion"
_COCLOSED_NOTE = "needs co-closed totally antisymmetric torsion"


@_check(
    "metricity",
    "eta-lowered full connection coefficients are antisymmetric in the rotation pair",
)
def _c_metricity(ctx):
    return geometry.metricity_residual(ctx.geom.full)


@_check(
    "torsion-recovery",
    "antisymmetrized connection minus frame structure coefficients reproduces the torsion input",
)
def _c_torsion_recovery(ctx):
    return geometry.torsion_recovery_residual(ctx.geom)


@_check(
    "levi-civita",
    "torsion-free and metricity defining residuals of the Levi-Civita coefficients",
)
def _c_levi_civita(ctx):
    return geometry.levi_civita_residual(ctx.geom)


@_check(
    "contorsion-trace",
    "contorsion trace identity: eta^{br} K^a_{br} + eta^{sa} T^r_{rs} = 0",
)
def _c_contorsion_trace(ctx):
    return geometry.contorsion_trace_residual(ctx.geom)


@_check(
    "bianchi",
    "first Bianchi identity: cyclic sum of the lowered torsion-free curvature vanishes",
)
def _c_bianchi(ctx):
    return geometry.first_bianchi_residual(ctx.curv)


@_check(
    "curvature-decomposition",
    "curvature equals torsion-free curvature plus the contorsion-induced difference, componentwise",
)
def _c_decomposition(ctx):
    return geometry.decomposition_residual(ctx.curv)


@_check(
    "curvature-traces",
    "curvature biforms are antisymmetric in the plane pair and eta-traceless",
)
def _c_curvature_traces(ctx):
    curv = ctx.curv
    worst = 0.0
    for a in range(4):
        for b in range(4):
            worst = max(worst, (curv.biforms[a][b] + curv.biforms[b][a]).max_abs())
    trace = operators._sum(curv.biforms[a][a].scale(ETA[a]) for a in range(4))
    return max(worst, trace.max_abs())


@_check(
    "ricci-antisymmetry",
    "grade-2 part of the curvature contraction (the connection's antisymmetric "
    "Ricci) vanishes; the structural condition behind the four-term squared "
    "spin operator identity",
    note=_COCLOSED_NOTE,
)
def _c_ricci_antisymmetry(ctx):
    return ctx.curv.contraction_grade2.max_abs()


@_check(
    "dirac-split",
    "Dirac operator equals its contraction part plus its wedge part",
    fields=("general",),
)
def _c_dirac_split(ctx):
    A = ctx.field("general")
    worst = 0.0
    for conn in ("lc", "full"):
        resid = (
            operators.dirac(ctx.geom, A, conn)
            - operators.dirac_contract(ctx.geom, A, conn)
            - operators.dirac_wedge(ctx.geom, A, conn)
        )
        worst = max(worst, resid.max_abs())
    return worst


@_check(
    "exterior-derivative",
    "wedge part of the standard Dirac operator is the exterior derivative",
    fields=("general",),
)
def _c_exterior_derivative(ctx):
    A = ctx.field("general")
    return (
        operators.dirac_wedge(ctx.geom, A, "lc") - operators.exterior_d(ctx.geom, A)
    ).max_abs()


@_check(
    "codifferential",
    "contraction part of the standard Dirac operator is minus the Hodge codifferential",
    fields=("general",),
)
def _c_codifferential(ctx):
    A = ctx.field("general")
    return (
        operators.dirac_contract(ctx.geom, A, "lc") + operators.codifferential(ctx.geom, A)
    ).max_abs()


@_check(
    "torsion-splits",
    "torsionful contraction/wedge parts equal the standard parts minus torsion 2-form corrections",
    fields=("general",),
)
def _c_torsion_splits(ctx):
    from .cliffalg import left_contraction

    A = ctx.field("general")
    geom = ctx.geom
    thetas = ctx.torsion_forms
    wedge_corr = operators._sum(
        wedge(thetas[r], left_contraction(geom.theta_down(r), A)) for r in range(4)
    )
    contract_corr = operators._sum(
        left_contraction(thetas[r], wedge(geom.theta_down(r), A)) for r in range(4)
    )
    w = operators.dirac_wedge(geom, A) - (operators.dirac_wedge(geom, A, "lc") - wedge_corr)
    c = operators.dirac_contract(geom, A) - (
        operators.dirac_contract(geom, A, "lc") - contract_corr
    )
    return max(w.max_abs(), c.max_abs())


@_check(
    "torsion-trace-contraction",
    "torsion 2-forms contracted on the gradient reproduce minus the eta-raised torsion trace",
    fields=("scalar",),
)
def _c_torsion_trace_contraction(ctx):
    from .cliffalg import left_contraction

    geom = ctx.geom
    f = ctx.scalar()
    df = operators.dirac(geom, ctx.scalar_mv(), "lc")
    lhs = operators._sum(
        left_contraction(ctx.torsion_forms[r], wedge(geom.theta_down(r), df))
        for r in range(4)
    )
    Q = geometry.torsion_trace(geom)
    rhs_scalar = operators._sum_scalar(
        -(ETA[b] * Q[b]) * geom.e(b, f) for b in range(4)
    )
    return (lhs - Multivector.scalar(rhs_scalar)).max_abs()


@_check(
    "scalar-laplacian",
    "minus delta d on a scalar equals the frame Laplace-Beltrami combination",
    fields=("scalar",),
)
def _c_scalar_laplacian(ctx):
    geom = ctx.geom
    f = ctx.scalar()
    lhs = operators.codifferential(geom, operators.exterior_d(geom, ctx.scalar_mv())).scale(-1.0)
    acc = None
    for b in range(4):
        t = ETA[b] * geom.e(b, geom.e(b, f))
        acc = t if acc is None else acc + t
    for b in range(4):
        for a in range(4):
            acc = acc - (ETA[b] * geom.lc[b][a][b]) * geom.e(a, f)
    return (lhs - Multivector.scalar(acc)).max_abs()


@_check(
    "cov-deriv-torsion",
    "covariant derivative equals the standard one plus half the torsion operator on vectors",
    fields=("vector",),
    note=_TOT_ANTISYM_NOTE,
)
def _c_cov_deriv_torsion(ctx):
    geom = ctx.geom
    v = ctx.field("vector")
    worst = 0.0
    for a in range(4):
        resid = (
            operators.cov_deriv(geom, v, a, "full")
            - operators.cov_deriv(geom, v, a, "lc")
            - operators.torsion_operator(geom, a, v).scale(0.5)
        )
        worst = max(worst, resid.max_abs())
    return worst


@_check(
    "dirac-torsion",
    "Dirac operator on vectors equals the standard one plus half the contracted torsion operator",
    fields=("vector",),
    note=_TOT_ANTISYM_NOTE,
)
def _c_dirac_torsion(ctx):
    geom = ctx.geom
    v = ctx.field("vector")
    corr = operators._sum(
        geometric_product(geom.theta[a], operators.torsion_operator(geom, a, v)).scale(0.5)
        for a in range(4)
    )
    return (
        operators.dirac(geom, v, "full") - operators.dirac(geom, v, "lc") - corr
    ).max_abs()


@_check(
    "leibniz",
    "covariant derivatives are derivations of the geometric product",
    fields=("general", "general2"),
)
def _c_leibniz(ctx):
    geom = ctx.geom
    A = ctx.field("general")
    B = ctx.field("general2")
    AB = geometric_product(A, B)
    worst = 0.0
    for conn in ("lc", "full"):
        for a in range(4):
            resid = (
                operators.cov_deriv(geom, AB, a, conn)
                - geometric_product(operators.cov_deriv(geom, A, a, conn), B)
                - geometric_product(A, operators.cov_deriv(geom, B, a, conn))
            )
            worst = max(worst, resid.max_abs())
    return worst


@_check(
    "antiderivation",
    "the wedge part acts as an antiderivation through the grade involution",
    fields=("general", "general2"),
)
def _c_antiderivation(ctx):
    geom = ctx.geom
    A = ctx.field("general")
    B = ctx.field("general2")
    AB = wedge(A, B)
    worst = 0.0
    for conn in ("lc", "full"):
        resid = (
            operators.dirac_wedge(geom, AB, conn)
            - wedge(operators.dirac_wedge(geom, A, conn), B)
            - wedge(grade_involution(A), operators.dirac_wedge(geom, B, conn))
        )
        worst = max(worst, resid.max_abs())
    return worst


@_check(
    "spin-module",
    "spin derivative of a Clifford multiple of a representative obeys the module rule",
    fields=("general", "even"),
)
def _c_spin_module(ctx):
    geom = ctx.geom
    C = ctx.field("general")
    psi = ctx.field("even")
    worst = 0.0
    for a in range(4):
        resid = (
            operators.spin_cov_deriv(geom, geometric_product(C, psi), a)
            - geometric_product(operators.cov_deriv(geom, C, a, "full"), psi)
            - geometric_product(C, operators.spin_cov_deriv(geom, psi, a))
        )
        worst = max(worst, resid.max_abs())
    return worst


@_check(
    "spin-left-form",
    "one-sided left form of the spin derivative equals the covariant form plus half the right action",
    fields=("even",),
)
def _c_spin_left_form(ctx):
    geom = ctx.geom
    psi = ctx.field("even")
    worst = 0.0
    for a in range(4):
        resid = (
            operators.spin_cov_deriv(geom, psi, a)
            - operators.cov_deriv(geom, psi, a, "full")
            - geometric_product(psi, geom.omega_biform[a]).scale(0.5)
        )
        worst = max(worst, resid.max_abs())
    return worst


@_check("d-squared", "the exterior derivative squares to zero", fields=("general",))
def _c_d_squared(ctx):
    A = ctx.field("general")
    return operators.exterior_d(ctx.geom, operators.exterior_d(ctx.geom, A)).max_abs()


@_check("delta-squared", "the codifferential squares to zero", fields=("general",))
def _c_delta_squared(ctx):
    A = ctx.field("general")
    return operators.codifferential(ctx.geom, operators.codifferential(ctx.geom, A)).max_abs()


@_check(
    "double-contraction",
    "the contraction part applied twice to a scalar vanishes",
    fields=("scalar",),
)
def _c_double_contraction(ctx):
    inner = operators.dirac_contract(ctx.geom, ctx.scalar_mv(), "full")
    return operators.dirac_contract(ctx.geom, inner, "full").max_abs()


@_check(
    "scalar-square-forms",
    "standard-plus-torsion and full-connection scalar square expansions agree with the direct square",
    fields=("scalar",),
)
def _c_scalar_square_forms(ctx):
    geom = ctx.geom
    f = ctx.scalar()
    direct = operators.dirac_square_direct(geom, ctx.scalar_mv(), "full")
    std = operators.scalar_square_standard_form(geom, f)
    conn = operators.scalar_square_connection_form(geom, f)
    return max(
        (std - conn).max_abs(), (std - direct).max_abs(), (conn - direct).max_abs()
    )


@_check(
    "square-assembly",
    "direct square equals the eta-plus-bivector assembly, plain and antisymmetrized",
    fields=("general",),
)
def _c_square_assembly(ctx):
    geom = ctx.geom
    A = ctx.field("general")
    direct = operators.dirac_square_direct(geom, A, "full")
    plain = operators.dirac_square_assembled(geom, A, "full")
    anti = operators.dirac_square_assembled(geom, A, "full", antisymmetrized=True)
    return max((plain - direct).max_abs(), (anti - direct).max_abs())


@_check(
    "pair-expansion",
    "second covariant derivative expands through the standard derivative and the torsion operator",
    fields=("vector",),
    note=_TOT_ANTISYM_NOTE,
)
def _c_pair_expansion(ctx):
    return operators.covariant_pair_expansion_residual(ctx.geom, ctx.field("vector"))


@_check(
    "square-torsion-relation",
    "torsionful square equals the standard square plus the paired torsion correction on vectors",
    fields=("vector",),
    note=_TOT_ANTISYM_NOTE,
)
def _c_square_torsion_relation(ctx):
    return operators.vector_square_relation_residual(ctx.geom, ctx.field("vector"))


@_check(
    "spin-commutator",
    "commutator of spin derivatives equals half the curvature biform action "
    "plus a structure/torsion coefficient term, in both printed forms",
    fields=("even",),
)
def _c_spin_commutator(ctx):
    br, ex = operators.spin_commutator_residuals(ctx.geom, ctx.curv, ctx.field("even"))
    return max(br, ex)


@_check(
    "lichnerowicz",
    "squared spin operator equals generalized Dalembertian + scalar curvature over 4 "
    "+ grade-4 torsion-curvature term - torsion 2-form term",
    fields=("even",),
    note=_COCLOSED_NOTE,
)
def _c_lichnerowicz(ctx):
    return operators.lichnerowicz_residual(ctx.geom, ctx.curv, ctx.field("even"))


@_check(
    "spin-square-relation",
    "squared spin operator equals the torsionful square plus the paired right-action correction",
    fields=("general",),
)
def _c_spin_square_relation(ctx):
    return operators.spin_square_relation_residual(ctx.geom, ctx.field("general"))


@_check(
    "spin-standard-square",
    "squared spin operator equals the standard square plus both corrections on vectors",
    fields=("vector",),
    note=_TOT_ANTISYM_NOTE,
)
def _c_spin_standard_square(ctx):
    return operators.spin_standard_square_residual(ctx.geom, ctx.field("vector"))


@_check(
    "s2-levi-civita",
    "right-action correction rewritten through the standard derivative and the torsion operator",
    fields=("vector",),
    note=_TOT_ANTISYM_NOTE,
)
def _c_s2_levi_civita(ctx):
    return operators.s2_levi_civita_residual(ctx.geom, ctx.field("vector"))


@_check(
    "spin-square-assembly",
    "squared spin operator equals its eta-plus-bivector assembly",
    fields=("even",),
)
def _c_spin_square_assembly(ctx):
    return operators.spin_square_assembly_residual(ctx.geom, ctx.field("even"))


@_check(
    "maxwell-equivalence",
    "Clifford-form and right-representative field-equation residuals coincide for arbitrary fields",
    fields=("bivector", "current"),
)
def _c_maxwell_equivalence(ctx):
    _, _, eq = operators.maxwell_residuals(
        ctx.geom, ctx.field("bivector"), ctx.field("current")
    )
    return eq.max_abs()


# -- evaluation ------------------------------------------------------------------


def evaluate_point(scenario, fields, names, point):
    """All selected checks at one point; errors are captured per check."""
    from .cliffalg import GradeError

    ctx = PointContext(scenario, fields, point)
    out = {}
    for name in names:
        try:
            out[name] = float(CHECKS[name].fn(ctx))
        except (DegenerateFrameError, JetDomainError, JetOrderError,
                GradeError, fieldspec.ExprDomainError) as err:
            out[name] = ("error", f"{type(err).__name__}: {err}")
    return out


def _eval_task(args):
    scenario, fields, names, idx, point = args
    return idx, evaluate_point(scenario, fields, names, point)


@dataclass
class CheckResult:
    name: str
    max: float | None
    mean: float | None
    worst_point: tuple | None
    passed: bool
    anchor: str
    errors: list = field(default_factory=list)


@dataclass
class ResidualReport:
    scenario_digest: str
    seed: int
    points: int
    tol: float
    checks: list

    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> str:
        obj = {
            "scenario_digest": self.scenario_digest,
            "seed": self.seed,
            "points": self.points,
            "tol": self.tol,
            "checks": [
                {
                    "name": c.name,
                    "max": c.max,
                    "mean": c.mean,
                    "worst_point": list(c.worst_point) if c.worst_point else None,
                    "pass": c.passed,
                    "paper_anchor": c.anchor,
                }
                for c in self.checks
            ],
        }
        return json.dumps(obj)

    def to_text(self) -> str:
        lines = []
        for c in self.checks:
            if c.max is None:
                lines.append(f"FAIL {c.name} max=n/a mean=n/a worst=n/a")
            else:
                worst = ",".join(f"{x:.6g}" for x in c.worst_point)
                status = "PASS" if c.passed else "FAIL"
                lines.append(
                    f"{status} {c.name} max={c.max:.6e} mean={c.mean:.6e} worst=({worst})"
                )
            for point, msg in c.errors:
                coords = ",".join(f"{x:.6g}" for x in point)
                lines.append(f"ERROR {c.name} point=({coords}) {msg}")
        return "\n".join(lines) + "\n"


def select_checks(scenario: Scenario, only=None):
    if only:
        unknown = [n for n in only if n not in CHECKS]
        if unknown:
            raise UsageError(
                f"unknown check name(s) {', '.join(unknown)}; "
                f"valid names: {', '.join(CHECKS)}"
            )
        return list(only)
    if scenario.checks:
        unknown = [n for n in scenario.checks if n not in CHECKS]
        if unknown:
            raise ScenarioError(
                f"unknown check name(s) {', '.join(unknown)}; "
                f"valid names: {', '.join(CHECKS)}"
            )
        return list(scenario.checks)
    return list(CHECKS)


def run_suite(
    scenario: Scenario,
    points: int | None = None,
    seed: int | None = None,
    tol: float | None = None,
    only=None,
    workers: int = 1,
) -> ResidualReport:
    names = select_checks(scenario, only)
    n_points = scenario.sampling.points if points is None else points
    run_seed = scenario.sampling.seed if seed is None else seed
    run_tol = scenario.sampling.tol if tol is None else tol

    pts = sample_points(scenario, n_points, run_seed)
    fields = build_run_fields(scenario, run_seed, pts)

    tasks = [(scenario, fields, names, i, p) for i, p in enumerate(pts)]
    results = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for idx, res in pool.map(_eval_task, tasks):
                results[idx] = res
    else:
        for task in tasks:
            idx, res = _eval_task(task)
            results[idx] = res

    checks = []
    for name in names:
        values = []
        errors = []
        for i in range(len(pts)):
            r = results[i][name]
            if isinstance(r, tuple):
                errors.append((pts[i].x, r[1]))
            else:
                values.append((r, pts[i].x))
        if values:
            vmax, worst = max(values, key=lambda t: t[0])
            vmean = float(np.mean([v for v, _ in values]))
            passed = vmax <= run_tol
        else:
            vmax = vmean = worst = None
            passed = False
        checks.append(
            CheckResult(
                name=name,
                max=vmax,
                mean=vmean,
                worst_point=worst,
                passed=passed,
                anchor=CHECKS[name].anchor,
                errors=errors,
            )
        )
    return ResidualReport(
        scenario_digest=scenario.digest,
        seed=run_seed,
        points=n_points,
        tol=run_tol,
        checks=checks,
    )


# -- CLI ---------------------------------------------------------------------------


def resolve_scenario_path(name: str):
    """A filesystem path, or the name of a bundled scenario."""
    import os

    if os.path.exists(name):
        return name
    base = name if name.endswith(".scn") else name + ".scn"
    bundled = resources.files("rcdirac") / "scenarios" / base
    if bundled.is_file():
        return bundled
    raise ScenarioError(
        f"scenario {name!r} not found (not a file, not a bundled scenario)"
    )


def bundled_scenario_names():
    out = []
    for entry in (resources.files("rcdirac") / "scenarios").iterdir():
        if entry.name.endswith(".scn"):
            out.append(entry.name[:-4])
    return sorted(out)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rcdirac",
        description="Verify Dirac-operator identities on frame-based Riemann-Cartan geometries.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run identity checks on a scenario file")
    run.add_argument("scenario", help="scenario file path or bundled scenario name")
    run.add_argument("--points", type=int, default=None, help="sample point count")
    run.add_argument("--seed", type=int, default=None, help="sampling/field seed")
    run.add_argument("--tol", type=float, default=None, help="pass/fail tolerance")
    run.add_argument("--format", choices=("text", "json"), default="text")
    run.add_argument("--only", default=None, help="comma-separated check names")
    run.add_argument("--workers", type=int, default=1, help="worker process count")
    sub.add_parser("list-checks", help="list available identity checks")
    explain = sub.add_parser("explain", help="describe one check")
    explain.add_argument("check")
    return parser


def cli_main(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 2

    if args.command == "list-checks":
        for name, desc in CHECKS.items():
            note = f"  [{desc.note}]" if desc.note else ""
            print(f"{name:26s} {desc.anchor}{note}")
        return 0

    if args.command == "explain":
        desc = CHECKS.get(args.check)
        if desc is None:
            print(
                f"unknown check {args.check!r}; valid names: {', '.join(CHECKS)}",
                file=sys.stderr,
            )
            return 2
        print(f"name:     {desc.name}")
        print(f"identity: {desc.anchor}")
        print(f"fields:   {', '.join(desc.fields) if desc.fields else 'none'}")
        print(f"order:    needs jets of order {desc.jet_order}")
        if desc.note:
            print(f"note:     {desc.note}")
        return 0

    only = None
    if args.only:
        only = [n.strip() for n in args.only.split(",") if n.strip()]
    try:
        path = resolve_scenario_path(args.scenario)
        scenario = fieldspec.load_scenario_file(path, valid_checks=set(CHECKS))
    except (ScenarioError, OSError) as err:
        print(f"scenario error: {err}", file=sys.stderr)
        return 3
    try:
        t0 = time.perf_counter()
        report = run_suite(
            scenario,
            points=args.points,
            seed=args.seed,
            tol=args.tol,
            only=only,
            workers=args.workers,
        )
        elapsed = time.perf_counter() - t0
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    except (ValueError, ScenarioError) as err:
        print(f"scenario error: {err}", file=sys.stderr)
        return 3

    if args.format == "json":
        sys.stdout.write(report.to_json() + "\n")
    else:
        sys.stdout.write(report.to_text())
    print(f"wall time: {elapsed:.2f}s", file=sys.stderr)
    return 0 if report.all_passed() else 1


def main():
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
