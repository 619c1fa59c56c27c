"""Reflected stage field on the octahedron surface and its weak identities.

The positive face T = {x, y, t > 0, x + y + t = 1} carries the planar field
W = alpha (1, sigma) in orthonormal coordinates (xi, eta) of its plane,
where sigma is the stage sign pulled back along xi.  On T the pull-back
parameter is rational,

    s = (1 + y - x) / 2 = 1/2 + xi / sqrt(2),

so strip boundaries are exact.  The other seven faces are reached by
coordinate reflections p = (s1 x', s2 y', s3 t') with p' in T, and the
field there is U = (s2 s3 V1, s1 s3 V2, s1 s2 V3).  With u = U_3 and
B = u U on the surface (and (0, 0, 1) off it) the third component of B is
always 1.

The sign convention follows the positive set: sigma = +1 on the open
pieces where the stage slope is +1 and -1 everywhere else, breakpoints
included.  Points with a zero coordinate (the edges) are off the surface,
where u = 0.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .functions import Bump, Polynomial
from .quadrature import gauss_adaptive, gauss_region
from .rational import format_float
from .stagegen import StageState, init_stage, tail_bound

__all__ = [
    "ALPHA",
    "SIGNS",
    "Frame3",
    "OctField",
    "face_parameter",
    "face_gauss_green",
    "edge_fluxes",
    "edge_cancellation",
    "edge_cancellation_formula",
    "divergence_pairing",
    "slice_tv",
    "mu_tv_bound",
    "mu2d_pair",
    "stage_gap_bound",
    "flux_table_csv",
    "slice_tv_csv",
    "wireframe_csv",
    "face_suite",
    "space_suite",
]

ALPHA = math.sqrt(1.5)
SQ2, SQ3, SQ6 = math.sqrt(2.0), math.sqrt(3.0), math.sqrt(6.0)
SIGNS = tuple(itertools.product((1, -1), repeat=3))


@dataclass(frozen=True)
class Frame3:
    """Origin (1/2, 1/2, 0) with axes along (-1, 1, 0), (-1, -1, 2), (1, 1, 1)."""

    origin: tuple[Fraction, ...] = (Fraction(1, 2), Fraction(1, 2), Fraction(0))
    directions: tuple[tuple[int, ...], ...] = ((-1, 1, 0), (-1, -1, 2), (1, 1, 1))

    @property
    def squared_norms(self) -> tuple[int, ...]:
        return tuple(sum(c * c for c in d) for d in self.directions)

    @property
    def matrix(self) -> np.ndarray:
        """Rows are the unit axes e_xi, e_eta, e_zeta."""
        d = np.array(self.directions, dtype=float)
        return d / np.sqrt(np.array(self.squared_norms, dtype=float))[:, None]

    def exact_checks(self) -> dict[str, Fraction]:
        """Pairwise dot products (0 expected) and the normalisation of alpha.

        ``alpha_t_component_squared`` is alpha^2 * (2^2 / 6), the square of the
        t-component of alpha * e_eta, with alpha^2 = 3/2; 1 expected.
        """
        d = self.directions
        out = {}
        for (i, a), (j, b) in itertools.combinations(enumerate(d), 2):
            out[f"dot_{i}{j}"] = Fraction(sum(x * y for x, y in zip(a, b)))
        out["alpha_t_component_squared"] = Fraction(3, 2) * Fraction(d[1][2] ** 2, self.squared_norms[1])
        return out

    def to_frame(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        o = np.array(self.origin, dtype=float)
        return (p - o) @ self.matrix.T

    def from_frame(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        o = np.array(self.origin, dtype=float)
        return o + q @ self.matrix


def face_parameter(x, y):
    """Pull-back parameter s = (1 + y - x) / 2 on the positive face."""
    return (1 + y - x) / 2


class OctField:
    """Stage-K sign along the face parameter, reflected onto the surface."""

    def __init__(self, stage: StageState | None = None, frame: Frame3 | None = None, surface_tol: float = 1e-12):
        self.stage = stage or init_stage()
        self.frame = frame or Frame3()
        self.surface_tol = surface_tol
        sl = self.stage.slopes
        self._bps = np.array([float(b) for b in sl.breakpoints])
        self._signs = np.array(sl.signs, dtype=float)

    @property
    def breakpoints(self) -> tuple[Fraction, ...]:
        return self.stage.slopes.breakpoints

    # -- sign along the face --------------------------------------------------

    def sigma(self, s):
        """+1 on open pieces of positive slope, -1 elsewhere."""
        if isinstance(s, (Fraction, int)):
            sl = self.stage.slopes
            s = Fraction(s)
            if not 0 < s < 1 or s in sl.breakpoints:
                return -1
            return 1 if sl(s) > 0 else -1
        s = np.asarray(s, dtype=float)
        idx = np.searchsorted(self._bps, s, side="right") - 1
        ok = (idx >= 0) & (idx < len(self._signs)) & (s > self._bps[0]) & (s < self._bps[-1])
        on_bp = np.isin(s, self._bps)
        vals = np.where(ok, self._signs[np.clip(idx, 0, len(self._signs) - 1)], -1.0)
        return np.where(on_bp, -1.0, vals)

    # -- fields ---------------------------------------------------------------

    def field_V(self, p) -> np.ndarray:
        """alpha (e_xi + sigma e_eta) in ambient coordinates at p on the face plane."""
        p = np.asarray(p, dtype=float)
        sig = self.sigma(face_parameter(p[..., 0], p[..., 1]))
        return np.stack([-(SQ3 + sig) / 2, (SQ3 - sig) / 2, sig * np.ones_like(p[..., 0])], axis=-1)

    def on_surface(self, p):
        p = np.asarray(p, dtype=float)
        nonzero = np.all(p != 0, axis=-1)
        return nonzero & (np.abs(np.sum(np.abs(p), axis=-1) - 1) <= self.surface_tol)

    def field_U(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        s = np.sign(p)
        V = self.field_V(np.abs(p))
        U = np.stack(
            [s[..., 1] * s[..., 2] * V[..., 0], s[..., 0] * s[..., 2] * V[..., 1], s[..., 0] * s[..., 1] * V[..., 2]],
            axis=-1,
        )
        return np.where(self.on_surface(p)[..., None], U, 0.0)

    def weight_u(self, p):
        return self.field_U(p)[..., 2]

    def field_B(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        U = self.field_U(p)
        B = U[..., 2:3] * U
        off = np.array([0.0, 0.0, 1.0])
        return np.where(self.on_surface(p)[..., None], B, off)

    def field_b(self, p) -> np.ndarray:
        return self.field_B(p)[..., :2]

    # -- strips ---------------------------------------------------------------

    def s_strips(self) -> list[tuple[Fraction, Fraction]]:
        """Subintervals of [0, 1] with constant sign, also cut at s = 1/2."""
        cuts = sorted({*self.breakpoints, Fraction(1, 2)})
        return list(zip(cuts, cuts[1:]))


# -- planar Gauss-Green on the positive face ------------------------------------

_H = SQ6 / 2  # apex height of T in (xi, eta)


def _xi_of(s) -> float:
    return SQ2 * (float(s) - 0.5)


def face_gauss_green(of: OctField, phi, tol: float = 1e-12) -> tuple[float, float]:
    """Both sides of the divergence theorem for W on T in (xi, eta).

    ``phi(xi, eta)`` and ``phi.grad(xi, eta)`` act on arrays.  The interior
    side sums strip integrals of W . grad phi; the boundary side sums line
    integrals of phi W . nu over the base and the two slanted edges, each cut
    at the same breakpoints.
    """
    lhs = 0.0
    rhs = 0.0
    for sa, sb in of.s_strips():
        sig = float(of.sigma((sa + sb) / 2))
        a, b = _xi_of(sa), _xi_of(sb)
        right = sa >= Fraction(1, 2)
        if right:
            top = lambda u: _H - SQ3 * u  # noqa: E731
        else:
            top = lambda u: _H + SQ3 * u  # noqa: E731

        def interior(U, V, sig=sig):
            gx, gy = phi.grad(U, V)
            return ALPHA * (gx + sig * gy)

        lhs += gauss_region(interior, a, b, lambda u: np.zeros_like(u), top, tol=tol)
        # base, outward normal (0, -1)
        rhs += gauss_adaptive(lambda u, sig=sig: -ALPHA * sig * phi(u, np.zeros_like(u)), a, b, tol=tol)
        # slanted edge over this xi-range; arc length 2 d(xi)
        if right:
            flux = ALPHA * (SQ3 / 2 + sig / 2)
        else:
            flux = ALPHA * (-SQ3 / 2 + sig / 2)
        rhs += gauss_adaptive(lambda u, flux=flux, top=top: 2 * flux * phi(u, top(u)), a, b, tol=tol)
    return lhs, rhs


# -- edges of the reflected faces -----------------------------------------------

# positive-face edges: start, end (as functions of lambda in [0, 1]), conormal,
# and the face parameter along the edge as s = s0 + ds * lambda
_EDGES = (
    ((0.0, 1.0, 0.0), (0.0, 0.0, 1.0), np.array([-2.0, 1.0, 1.0]) / SQ6, Fraction(1), Fraction(-1, 2)),
    ((1.0, 0.0, 0.0), (0.0, 0.0, 1.0), np.array([1.0, -2.0, 1.0]) / SQ6, Fraction(0), Fraction(1, 2)),
    ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), np.array([1.0, 1.0, -2.0]) / SQ6, Fraction(0), Fraction(1)),
)


def _edge_cuts(of: OctField, s0: Fraction, ds: Fraction) -> list[Fraction]:
    cuts = {Fraction(0), Fraction(1)}
    for bp in of.breakpoints:
        lam = (bp - s0) / ds
        if 0 < lam < 1:
            cuts.add(lam)
    return sorted(cuts)


def _V_const(sig: float) -> np.ndarray:
    return np.array([-(SQ3 + sig) / 2, (SQ3 - sig) / 2, sig])


def edge_fluxes(of: OctField, phi, tol: float = 1e-12) -> list[tuple[tuple[int, int, int], int, float]]:
    """Rows ``(signs, edge index, int_E phi U . n dH^1)`` for all 24 face edges.

    For the face reached by ``signs`` the edge and its outward conormal are
    the reflections of the positive-face ones; U is the trace of that face.
    """
    rows = []
    for signs in SIGNS:
        sv = np.array(signs, dtype=float)
        for i, (start, end, n, s0, ds) in enumerate(_EDGES):
            start_a, end_a = np.array(start), np.array(end)
            length = float(np.linalg.norm(end_a - start_a))
            total = 0.0
            cuts = _edge_cuts(of, s0, ds)
            for la, lb in zip(cuts, cuts[1:]):
                mid_s = s0 + ds * (la + lb) / 2
                sig = float(of.sigma(mid_s))

                # the face's U with the strip sign, traced onto the edge
                V = _V_const(sig)
                s1, s2, s3 = signs
                U = np.array([s2 * s3 * V[0], s1 * s3 * V[1], s1 * s2 * V[2]])
                un = float(U @ (sv * n))

                def integrand(lam):
                    p = (start_a[None, :] + lam[:, None] * (end_a - start_a)[None, :]) * sv[None, :]
                    return phi(p[:, 0], p[:, 1], p[:, 2])

                total += un * length * gauss_adaptive(integrand, float(la), float(lb), tol=tol)
            rows.append((signs, i + 1, total))
    return rows


def edge_cancellation(of: OctField, phi, tol: float = 1e-12) -> float:
    """Sum of all 24 reflected edge fluxes; vanishes by mirror symmetry."""
    return float(sum(v for _, _, v in edge_fluxes(of, phi, tol)))


def edge_cancellation_formula(of: OctField, phi, tol: float = 1e-12) -> float:
    """Same sum written as s1 s2 s3 int phi(s . p) V(p) . n_i over positive-face edges."""
    total = 0.0
    for signs in SIGNS:
        sv = np.array(signs, dtype=float)
        sign3 = signs[0] * signs[1] * signs[2]
        for start, end, n, s0, ds in _EDGES:
            start_a, end_a = np.array(start), np.array(end)
            length = float(np.linalg.norm(end_a - start_a))
            cuts = _edge_cuts(of, s0, ds)
            for la, lb in zip(cuts, cuts[1:]):
                sig = float(of.sigma(s0 + ds * (la + lb) / 2))
                vn = float(_V_const(sig) @ n)

                def integrand(lam):
                    p = (start_a[None, :] + lam[:, None] * (end_a - start_a)[None, :]) * sv[None, :]
                    return phi(p[:, 0], p[:, 1], p[:, 2])

                total += sign3 * vn * length * gauss_adaptive(integrand, float(la), float(lb), tol=tol)
    return total


# -- surface pairing ----------------------------------------------------------------


def divergence_pairing(of: OctField, phi, tol: float = 1e-12) -> float:
    """int over the surface of u B . grad phi dH^2.

    Each face is parametrised by (s, tau) -> (1 - s - tau/2, s - tau/2, tau)
    on the positive face, reflected by the face signs; dH^2 = sqrt(3) ds dtau.
    The integrand goes through ``field_B`` and ``weight_u`` at the reflected
    points rather than any closed form.
    """
    total = 0.0
    for signs in SIGNS:
        sv = np.array(signs, dtype=float)
        for sa, sb in of.s_strips():
            right = sa >= Fraction(1, 2)
            hi = (lambda s: 2 * (1 - s)) if right else (lambda s: 2 * s)

            def integrand(S, Tau, sv=sv):
                p = np.stack([1 - S - Tau / 2, S - Tau / 2, Tau], axis=-1) * sv
                B = of.field_B(p)
                u = of.weight_u(p)
                g = phi.grad(p[..., 0], p[..., 1], p[..., 2])
                dot = B[..., 0] * g[0] + B[..., 1] * g[1] + B[..., 2] * g[2]
                return SQ3 * u * dot

            total += gauss_region(integrand, float(sa), float(sb), lambda s: np.zeros_like(s), hi, tol=tol)
    return total


# -- slices -----------------------------------------------------------------------


def slice_tv(t: float) -> float:
    """alpha times the perimeter of the diamond {|x| + |y| = 1 - |t|}."""
    r = 1 - abs(float(t))
    if r <= 0:
        return 0.0
    verts = [(r, 0.0), (0.0, r), (-r, 0.0), (0.0, -r)]
    perimeter = sum(math.dist(verts[i], verts[(i + 1) % 4]) for i in range(4))
    return ALPHA * perimeter


def mu_tv_bound() -> float:
    return ALPHA * 4 * SQ2


def mu2d_pair(of: OctField, t: float, phi, tol: float = 1e-12) -> float:
    """<mu_t, phi> with mu_t = u alpha H^1 on the slice diamond.

    On the side of quadrant (s1, s2), with y' in (0, r) and x' = r - y', the
    weight is u = s1 s2 sigma((1 + y' - x') / 2); arc length is sqrt(2) dy'.
    """
    t = float(t)
    r = 1 - abs(t)
    if r <= 0:
        return 0.0
    total = 0.0
    # sign breakpoints along a side: s = (1 - r)/2 + y'
    s_lo = (1 - r) / 2
    cuts = sorted({0.0, r, *(float(b) - s_lo for b in of.breakpoints if 0 < float(b) - s_lo < r)})
    for s1, s2 in itertools.product((1, -1), repeat=2):
        for a, b in zip(cuts, cuts[1:]):
            sig = float(of.sigma(s_lo + (a + b) / 2))

            def integrand(yp, s1=s1, s2=s2):
                return phi(s1 * (r - yp), s2 * yp)

            total += s1 * s2 * sig * SQ2 * gauss_adaptive(integrand, a, b, tol=tol)
    return ALPHA * total


def stage_gap_bound(stage: StageState, phi_sup: float) -> float:
    """Bound for how much face_gauss_green can move from stage K to K + 1.

    The next flip changes the sign on a window of width at most the stage
    tail bound; the boundary flux of W changes by at most 2 alpha sqrt(2)
    per unit of window width on the base and on one slanted edge together.
    """
    return 2 * float(tail_bound(stage)) * phi_sup * 2 * SQ2 * ALPHA


# -- test functions ---------------------------------------------------------------


def face_suite() -> list[tuple[str, object]]:
    """Test functions of (xi, eta) on the face plane."""
    return [
        ("xi^2 eta - 2 eta^3 + 3/2 xi + 1", Polynomial.from_dict({(2, 1): 1, (0, 3): -2, (1, 0): Fraction(3, 2), (0, 0): 1}, 2)),
        ("eta", Polynomial.from_dict({(0, 1): 1}, 2)),
        ("xi^3 eta^2 - xi eta", Polynomial.from_dict({(3, 2): 1, (1, 1): -1}, 2)),
        ("bump (0.1, 0.4)", Bump((0.1, 0.4), (0.5, 0.5))),
        ("bump (-0.3, 0.2)", Bump((-0.3, 0.2), (0.6, 0.4), -2.0)),
    ]


def space_suite() -> list[tuple[str, object]]:
    """Test functions of (x, y, t); the bumps straddle several faces."""
    return [
        ("xyt - x^2 t + 2y^3 + x/2", Polynomial.from_dict({(1, 1, 1): 1, (2, 0, 1): -1, (0, 3, 0): 2, (1, 0, 0): Fraction(1, 2)}, 3)),
        ("t^2 + x y", Polynomial.from_dict({(0, 0, 2): 1, (1, 1, 0): 1}, 3)),
        ("x^3 t - y t^2 + 1", Polynomial.from_dict({(3, 0, 1): 1, (0, 1, 2): -1, (0, 0, 0): 1}, 3)),
        ("bump (0.3, 0.2, 0.4)", Bump((0.3, 0.2, 0.4), (0.6, 0.6, 0.6))),
        ("bump (-0.2, 0.1, -0.3)", Bump((-0.2, 0.1, -0.3), (0.7, 0.5, 0.6), 1.5)),
    ]


# -- plot data ---------------------------------------------------------------------


def flux_table_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s1", "s2", "s3", "edge", "flux"])
    for signs, i, v in rows:
        w.writerow([*signs, i, format_float(v)])
    return buf.getvalue()


def slice_tv_csv(n: int = 101) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "tv"])
    for t in np.linspace(-1.0, 1.0, n):
        w.writerow([format_float(t), format_float(slice_tv(t))])
    return buf.getvalue()


def wireframe_csv(slices=(-0.5, 0.0, 0.5)) -> str:
    """Octahedron edges and slice diamonds as polylines ``(id, x, y, t)``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["polyline", "x", "y", "t"])
    verts = {
        "+x": (1, 0, 0), "-x": (-1, 0, 0), "+y": (0, 1, 0),
        "-y": (0, -1, 0), "+t": (0, 0, 1), "-t": (0, 0, -1),
    }
    for a, b in itertools.combinations(verts, 2):
        if a[1] == b[1]:
            continue  # opposite vertices are not joined
        for v in (verts[a], verts[b]):
            w.writerow([f"edge {a} {b}", *v])
    for t in slices:
        r = 1 - abs(t)
        for x, y in [(r, 0), (0, r), (-r, 0), (0, -r), (r, 0)]:
            w.writerow([f"slice {format_float(t)}", format_float(x), format_float(y), format_float(t)])
    return buf.getvalue()
