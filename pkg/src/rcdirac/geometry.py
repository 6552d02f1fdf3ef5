"""Connection-level geometry built from a tetrad and a torsion table.

Index conventions (all tensors carried in orthonormal frame indices; the
metric is the constant eta = diag(1,-1,-1,-1), so raising/lowering is a sign
flip per index):

* connection-like tables ``conn[a][b][c]`` hold the coefficient with ``a``
  the differentiation direction, ``b`` the upper index and ``c`` the form
  index: ``cov_a theta^b = -conn[a][b][c] theta^c``;
* the torsion table ``T[c][a][b]`` holds ``T^c_ab``, antisymmetric in a,b;
* the contorsion table has the same slot layout as a connection.

The full connection is the unique metric-compatible one with the prescribed
torsion: Levi-Civita coefficients from the structure-coefficient closed form
plus the contorsion built from ``T``.  Connection biforms are calibrated so
that ``pfaff_a theta^b + [omega_a, theta^b]/2 = -conn[a][b][c] theta^c``
holds identically (checked at build time).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

from .cliffalg import Multivector, commutator, geometric_product, grade_project, pair_blade, wedge
from .fieldspec import Scenario, eval_expr
from .jets import ChartPoint, Jet2, partial

ETA = (1.0, -1.0, -1.0, -1.0)
_DET_TOL = 1e-8
_CALIBRATION_TOL = 1e-9

# Permutation signs epsilon^{abcd} with epsilon^{0123} = +1.
EPSILON = {}
for perm in permutations(range(4)):
    sign = 1
    p = list(perm)
    for i in range(4):
        for j in range(i + 1, 4):
            if p[i] > p[j]:
                sign = -sign
    EPSILON[perm] = float(sign)


class DegenerateFrameError(ValueError):
    def __init__(self, point: ChartPoint, det: float):
        self.point = point
        super().__init__(
            f"tetrad is singular at point {point.x} (|det| = {abs(det):.3e})"
        )


class GeometryError(RuntimeError):
    """Internal consistency failure while assembling the connection."""


def _zeros(*shape):
    if len(shape) == 1:
        return [Jet2.const(0.0) for _ in range(shape[0])]
    return [_zeros(*shape[1:]) for _ in range(shape[0])]


@dataclass
class FrameGeometry:
    """All connection-level data of one scenario at one chart point."""

    point: ChartPoint
    tetrad: list                 # theta^a_mu jets, rows a
    frame_vectors: list          # e_a^mu jets, rows a
    det: Jet2
    c: list                      # structure coefficients c[c][a][b]
    T: list                      # torsion T[c][a][b]
    lc: list                     # Levi-Civita conn[a][b][c]
    K: list                      # contorsion conn[a][b][c]
    full: list                   # full connection conn[a][b][c]
    theta: list                  # coframe one-forms as multivectors
    omega_biform: list           # full-connection biforms omega_{e_a}
    lc_biform: list              # Levi-Civita biforms
    contorsion_biform: list      # omega - lc biforms

    def e(self, a: int, f: Jet2) -> Jet2:
        """Directional derivative e_a(f) = e_a^mu d_mu f."""
        out = None
        for mu in range(4):
            term = self.frame_vectors[a][mu] * partial(f, mu)
            out = term if out is None else out + term
        return out

    def theta_down(self, a: int) -> Multivector:
        return self.theta[a].scale(ETA[a])


@dataclass
class CurvatureData:
    """Curvature of the full connection plus its Levi-Civita part and the
    contorsion-induced difference."""

    components: list             # R^a_{bcd}, full connection
    lc_components: list          # same for Levi-Civita
    biforms: list                # biforms[c][d], plane indices lowered
    scalar: Jet2                 # grade-0 part of the biform contraction
    contraction_grade2: Multivector
    contraction_grade4: Multivector
    j_components: list           # J^a_{bcd} = (R - R_lc)^a_{bcd}, from contorsion
    j_form: Multivector          # grade-4 term as it enters the squared operator


# -- tetrad ---------------------------------------------------------------


def _det3(m, r, c):
    rows = [i for i in range(4) if i != r]
    cols = [j for j in range(4) if j != c]
    a, b, cc = rows
    x, y, z = cols
    return (
        m[a][x] * (m[b][y] * m[cc][z] - m[b][z] * m[cc][y])
        - m[a][y] * (m[b][x] * m[cc][z] - m[b][z] * m[cc][x])
        + m[a][z] * (m[b][x] * m[cc][y] - m[b][y] * m[cc][x])
    )


def invert_tetrad(theta_mat, point: ChartPoint):
    """Inverse of the 4x4 jet matrix theta^a_mu via the adjugate.

    Returns (frame_vectors, det) with frame_vectors[a][mu] = e_a^mu such
    that theta^a_mu e_b^mu = delta^a_b.
    """
    cof = [[None] * 4 for _ in range(4)]
    for r in range(4):
        for c in range(4):
            d3 = _det3(theta_mat, r, c)
            cof[r][c] = d3 if (r + c) % 2 == 0 else -d3
    det = None
    for c in range(4):
        term = theta_mat[0][c] * cof[0][c]
        det = term if det is None else det + term
    if abs(det.value) <= _DET_TOL:
        raise DegenerateFrameError(point, det.value)
    inv_det = 1.0 / det
    # adj = cof^T; (theta^-1)[mu][a] = adj[mu][a]/det; e_a^mu = that entry.
    frame_vectors = [[cof[a][mu] * inv_det for mu in range(4)] for a in range(4)]
    return frame_vectors, det


def build_frame(scenario: Scenario, point: ChartPoint) -> FrameGeometry:
    """Evaluate the scenario's tetrad and torsion at a point and assemble
    every connection-level object."""
    theta_mat = [
        [eval_expr(scenario.tetrad[a][mu], point) for mu in range(4)]
        for a in range(4)
    ]
    frame_vectors, det = invert_tetrad(theta_mat, point)

    T = _zeros(4, 4, 4)
    for c in range(4):
        for a in range(4):
            for b in range(a + 1, 4):
                val = eval_expr(scenario.torsion_expr(c, a, b), point)
                T[c][a][b] = val
                T[c][b][a] = -val

    c_t = structure_coefficients(theta_mat, frame_vectors)
    lc = levi_civita(c_t)
    K = contorsion(T)
    full = [
        [[lc[a][b][c] + K[a][b][c] for c in range(4)] for b in range(4)]
        for a in range(4)
    ]

    theta = [Multivector.basis(a) for a in range(4)]
    geom = FrameGeometry(
        point=point,
        tetrad=theta_mat,
        frame_vectors=frame_vectors,
        det=det,
        c=c_t,
        T=T,
        lc=lc,
        K=K,
        full=full,
        theta=theta,
        omega_biform=connection_biforms(full),
        lc_biform=connection_biforms(lc),
        contorsion_biform=connection_biforms(K),
    )
    _calibrate_biforms(geom)
    return geom


def structure_coefficients(theta_mat, frame_vectors):
    """c^c_{ab} = theta^c([e_a, e_b]) from jets of the inverse tetrad."""
    out = _zeros(4, 4, 4)
    for a in range(4):
        for b in range(a + 1, 4):
            bracket = []
            for mu in range(4):
                acc = None
                for nu in range(4):
                    term = frame_vectors[a][nu] * partial(frame_vectors[b][mu], nu)
                    term = term - frame_vectors[b][nu] * partial(frame_vectors[a][mu], nu)
                    acc = term if acc is None else acc + term
                bracket.append(acc)
            for c in range(4):
                acc = None
                for mu in range(4):
                    term = theta_mat[c][mu] * bracket[mu]
                    acc = term if acc is None else acc + term
                out[c][a][b] = acc
                out[c][b][a] = -acc
    return out


def levi_civita(c_t):
    """Unique zero-torsion metric-compatible coefficients from the structure
    coefficients: lowered form L_abc = (g_abc + g_bca - g_cab)/2 with
    g_abc = eta_bm c^m_{ac}."""

    def g(a, b, c):
        return ETA[b] * c_t[b][a][c]

    lc = _zeros(4, 4, 4)
    for a in range(4):
        for b in range(4):
            for c in range(4):
                low = 0.5 * (g(a, b, c) + g(b, c, a) - g(c, a, b))
                lc[a][b][c] = ETA[b] * low
    return lc


def contorsion(T):
    """Contorsion of the metric-compatible connection with torsion T.

    Componentwise, with the metric already diagonal:
    K^al_{be,rh} = -eta^{al,al} (eta_be T^be_{rh,al} + eta_rh T^rh_{be,al}
    - eta_al T^al_{be,rh}) / 2, stored as conn[be][al][rh].
    """
    K = _zeros(4, 4, 4)
    for be in range(4):
        for al in range(4):
            for rh in range(4):
                s = (
                    ETA[be] * T[be][rh][al]
                    + ETA[rh] * T[rh][be][al]
                    - ETA[al] * T[al][be][rh]
                )
                K[be][al][rh] = (-0.5 * ETA[al]) * s
    return K


def connection_biforms(conn):
    """Biforms omega_{e_a} = L_abc theta^b ^ theta^c / 2 with L the lowered
    (antisymmetric-pair) coefficients."""
    out = []
    for a in range(4):
        coeffs = [0.0] * 16
        for b in range(4):
            for c in range(b + 1, 4):
                idx, _ = pair_blade(b, c)
                low_bc = ETA[b] * conn[a][b][c]
                low_cb = ETA[c] * conn[a][c][b]
                coeffs[idx] = 0.5 * (low_bc - low_cb)
        out.append(Multivector(coeffs))
    return out


def _calibrate_biforms(geom: FrameGeometry):
    """Abort if [omega_a, theta^b]/2 fails to reproduce -conn[a][b][c] theta^c."""
    worst = 0.0
    for a in range(4):
        for b in range(4):
            resid = commutator(geom.omega_biform[a], geom.theta[b]).scale(0.5)
            for c in range(4):
                resid = resid + geom.theta[c].scale(geom.full[a][b][c])
            for coeff in resid.coeffs:
                data = coeff.data if isinstance(coeff, Jet2) else None
                mag = float(max(abs(x) for x in data)) if data is not None else abs(coeff)
                worst = max(worst, mag)
    if worst > _CALIBRATION_TOL:
        raise GeometryError(
            f"connection biform calibration failed at {geom.point.x}: "
            f"residual {worst:.3e}"
        )


def torsion_two_forms(geom: FrameGeometry):
    """The four torsion 2-forms Theta^rho = T^rho_{ab} theta^a ^ theta^b / 2."""
    out = []
    for rho in range(4):
        coeffs = [0.0] * 16
        for a in range(4):
            for b in range(a + 1, 4):
                idx, _ = pair_blade(a, b)
                coeffs[idx] = geom.T[rho][a][b]
        out.append(Multivector(coeffs))
    return out


# -- curvature -------------------------------------------------------------


def _riemann_components(geom: FrameGeometry, conn):
    """R^a_{bcd} = e_c conn[d][a][b] - e_d conn[c][a][b]
    + conn[c][a][k] conn[d][k][b] - conn[d][a][k] conn[c][k][b]
    - c^k_{cd} conn[k][a][b]."""
    dconn = [
        [[[geom.e(c, conn[d][a][b]) for d in range(4)] for b in range(4)]
         for a in range(4)]
        for c in range(4)
    ]
    R = _zeros(4, 4, 4, 4)
    for a in range(4):
        for b in range(4):
            for c in range(4):
                for d in range(c + 1, 4):
                    acc = dconn[c][a][b][d] - dconn[d][a][b][c]
                    for k in range(4):
                        acc = acc + conn[c][a][k] * conn[d][k][b]
                        acc = acc - conn[d][a][k] * conn[c][k][b]
                        acc = acc - geom.c[k][c][d] * conn[k][a][b]
                    R[a][b][c][d] = acc
                    R[a][b][d][c] = -acc
    return R


def _cov_deriv_contorsion(geom: FrameGeometry, c: int, a: int, d: int, b: int):
    """Full-connection covariant derivative of the contorsion tensor,
    nabla_c K^a_{db}, acting on all three slots."""
    K, full = geom.K, geom.full
    acc = geom.e(c, K[d][a][b])
    for k in range(4):
        acc = acc + full[c][a][k] * K[d][k][b]
        acc = acc - full[c][k][d] * K[k][a][b]
        acc = acc - full[c][k][b] * K[d][a][k]
    return acc


def j_components(geom: FrameGeometry):
    """The contorsion-induced curvature difference J^a_{bcd}, already
    antisymmetrized in its last index pair; satisfies R = R_lc + J."""
    K = geom.K
    cand = _zeros(4, 4, 4, 4)
    for a in range(4):
        for b in range(4):
            for c in range(4):
                for d in range(4):
                    acc = _cov_deriv_contorsion(geom, c, a, d, b)
                    for k in range(4):
                        acc = acc - K[c][a][k] * K[d][k][b]
                        acc = acc + K[c][k][d] * K[k][a][b]
                    cand[a][b][c][d] = acc
    J = _zeros(4, 4, 4, 4)
    for a in range(4):
        for b in range(4):
            for c in range(4):
                for d in range(4):
                    J[a][b][c][d] = cand[a][b][c][d] - cand[a][b][d][c]
    return J


def j_quadriform(J) -> Multivector:
    """Grade-4 torsion-curvature term, normalized as it enters the squared
    spin-Dirac identity: (1/8) sum J_{abcd} eps^{abcd} e0123 with the first
    index lowered."""
    acc = None
    for (a, b, c, d), eps in EPSILON.items():
        term = (0.125 * eps * ETA[a]) * J[a][b][c][d]
        acc = term if acc is None else acc + term
    coeffs = [0.0] * 16
    coeffs[15] = acc if acc is not None else Jet2.const(0.0)
    return Multivector(coeffs)


def curvature(geom: FrameGeometry) -> CurvatureData:
    """Curvature components, biforms, scalar, and the contorsion split."""
    R = _riemann_components(geom, geom.full)
    R_lc = _riemann_components(geom, geom.lc)

    biforms = [[None] * 4 for _ in range(4)]
    for c in range(4):
        for d in range(4):
            coeffs = [0.0] * 16
            for a in range(4):
                for b in range(a + 1, 4):
                    idx, _ = pair_blade(a, b)
                    low_ab = ETA[a] * R[a][b][c][d]
                    low_ba = ETA[b] * R[b][a][c][d]
                    coeffs[idx] = 0.5 * (low_ab - low_ba)
            biforms[c][d] = Multivector(coeffs)

    contraction = None
    for a in range(4):
        for b in range(4):
            if a == b:
                continue
            plane = wedge(geom.theta[a], geom.theta[b])
            term = geometric_product(plane, biforms[a][b])
            contraction = term if contraction is None else contraction + term
    scalar = contraction.coeffs[0]
    if not isinstance(scalar, Jet2):
        scalar = Jet2.const(float(scalar))

    J = j_components(geom)
    return CurvatureData(
        components=R,
        lc_components=R_lc,
        biforms=biforms,
        scalar=scalar,
        contraction_grade2=grade_project(contraction, 2),
        contraction_grade4=grade_project(contraction, 4),
        j_components=J,
        j_form=j_quadriform(J),
    )


# -- residual helpers (used by the harness geometry checks) -----------------


def _max_value(entries) -> float:
    worst = 0.0
    for x in entries:
        worst = max(worst, abs(x.value if isinstance(x, Jet2) else float(x)))
    return worst


def metricity_residual(conn) -> float:
    """max |eta_bm conn[a][m][c] + eta_cm conn[a][m][b]|."""
    vals = []
    for a in range(4):
        for b in range(4):
            for c in range(4):
                vals.append(ETA[b] * conn[a][b][c] + ETA[c] * conn[a][c][b])
    return _max_value(vals)


def torsion_recovery_residual(geom: FrameGeometry) -> float:
    """Antisymmetrized full connection minus structure coefficients must
    reproduce the input torsion."""
    vals = []
    for c in range(4):
        for a in range(4):
            for b in range(4):
                vals.append(
                    geom.full[a][c][b]
                    - geom.full[b][c][a]
                    - geom.c[c][a][b]
                    - geom.T[c][a][b]
                )
    return _max_value(vals)


def levi_civita_residual(geom: FrameGeometry) -> float:
    """Zero-torsion and metricity defining residuals of the Levi-Civita
    coefficients."""
    vals = []
    for c in range(4):
        for a in range(4):
            for b in range(4):
                vals.append(geom.lc[a][c][b] - geom.lc[b][c][a] - geom.c[c][a][b])
    return max(_max_value(vals), metricity_residual(geom.lc))


def contorsion_trace_residual(geom: FrameGeometry) -> float:
    """Trace identity: eta^{br} K^a_{br} + eta^{sa} T^r_{rs} = 0."""
    vals = []
    for al in range(4):
        lhs = None
        for b in range(4):
            term = ETA[b] * geom.K[b][al][b]
            lhs = term if lhs is None else lhs + term
        rhs = None
        for rho in range(4):
            term = ETA[al] * geom.T[rho][rho][al]
            rhs = term if rhs is None else rhs + term
        vals.append(lhs + rhs)
    return _max_value(vals)


def first_bianchi_residual(curv: CurvatureData) -> float:
    """Cyclic sum of the lowered Levi-Civita curvature over the last three
    indices."""
    R = curv.lc_components
    vals = []
    for a in range(4):
        for b in range(4):
            for c in range(4):
                for d in range(4):
                    vals.append(
                        ETA[a]
                        * (R[a][b][c][d] + R[a][c][d][b] + R[a][d][b][c])
                    )
    return _max_value(vals)


def decomposition_residual(curv: CurvatureData) -> float:
    """Componentwise residual of R = R_levi_civita + J."""
    vals = []
    for a in range(4):
        for b in range(4):
            for c in range(4):
                for d in range(4):
                    vals.append(
                        curv.components[a][b][c][d]
                        - curv.lc_components[a][b][c][d]
                        - curv.j_components[a][b][c][d]
                    )
    return _max_value(vals)


def torsion_trace(geom: FrameGeometry):
    """Q_b = T^a_{ab}, the torsion trace entering scalar square formulas."""
    out = []
    for b in range(4):
        acc = None
        for a in range(4):
            term = geom.T[a][a][b]
            acc = term if acc is None else acc + term
        out.append(acc)
    return out
