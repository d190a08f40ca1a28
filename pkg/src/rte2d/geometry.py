"""Strictly convex 2D domains described by a level-set gauge.

A domain is the sublevel set of xi(x) = ((x-cx)/a)^m + ((y-cy)/b)^m - 1 with
even exponent m: a disk (m=2, a=b), an ellipse (m=2) or a superellipse
(m >= 4).  xi is negative inside, zero on the boundary, positive outside,
and analytic, so normals, Hessians and exit times are exact up to root
tolerance.  The boundary is parametrized radially from the center, which is
smooth and closed for every member of the family.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import PointOutsideDomain, TangentialRay

TANGENT_CUTOFF = K.TANGENT_CUTOFF
ROOT_TOL = K.ROOT_TOL
BOUNDARY_TOL = K.BOUNDARY_TOL


def unit(v):
    v = np.asarray(v, dtype=float)
    n = np.hypot(v[0], v[1])
    if n == 0.0:
        raise ValueError("zero direction vector")
    return v / n


def angle_of(v):
    v = np.asarray(v, dtype=float)
    return float(np.arctan2(v[1], v[0]))


@dataclass(frozen=True)
class ConvexDomain:
    """Level-set description of a strictly convex bounded domain."""

    kind: str
    center: tuple
    semi_axes: tuple
    exponent: int
    D0: float = field(init=False)
    params: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        cx, cy = self.center
        a, b = self.semi_axes
        m = self.exponent
        if a <= 0 or b <= 0:
            raise ValueError("semi-axes must be positive")
        if m < 2 or m % 2 != 0:
            raise ValueError("exponent must be an even integer >= 2")
        P = np.array([cx, cy, a, b, float(m)])
        object.__setattr__(self, "params", P)
        if m == 2:
            d0 = min(2.0 / a ** 2, 2.0 / b ** 2)
        else:
            d0 = 0.999 * self.hessian_quadratic_min(64)
        if not d0 > 0.0:
            raise ValueError("domain fails the convexity lower bound")
        object.__setattr__(self, "D0", d0)
        # the radial parametrization closes up by construction; keep a guard
        p0 = self.boundary_point(0.0)
        p1 = self.boundary_point(2.0 * np.pi)
        assert np.hypot(*(p0 - p1)) < 1e-12

    # ------------------------------------------------------------- builders

    @classmethod
    def disk(cls, radius=1.0, center=(0.0, 0.0)):
        return cls("disk", tuple(center), (radius, radius), 2)

    @classmethod
    def ellipse(cls, a, b, center=(0.0, 0.0)):
        return cls("ellipse", tuple(center), (a, b), 2)

    @classmethod
    def superellipse(cls, a, b, exponent=4, center=(0.0, 0.0)):
        return cls("superellipse", tuple(center), (a, b), int(exponent))

    # ----------------------------------------------------------- evaluation

    def xi(self, x, y=None):
        if y is None:
            x = np.asarray(x, dtype=float)
            x, y = x[..., 0], x[..., 1]
        P = self.params
        m = self.exponent
        return (((np.asarray(x) - P[0]) / P[2]) ** m
                + ((np.asarray(y) - P[1]) / P[3]) ** m - 1.0)

    def normal(self, point):
        nx, ny = K.outward_normal(self.params, point[0], point[1])
        return np.array([nx, ny])

    def contains(self, point, tol=BOUNDARY_TOL):
        return bool(self.xi(point[0], point[1]) <= tol)

    def hessian_quadratic_min(self, n=64):
        """Smallest Hessian eigenvalue of xi sampled on an n x n grid of
        interior cell centers."""
        (x0, x1), (y0, y1) = self.bounding_box()
        dx = (x1 - x0) / n
        dy = (y1 - y0) / n
        xs = x0 + dx * (0.5 + np.arange(n))
        ys = y0 + dy * (0.5 + np.arange(n))
        X, Y = np.meshgrid(xs, ys)
        inside = self.xi(X, Y) < 0.0
        best = np.inf
        P = self.params
        for px, py in zip(X[inside].ravel(), Y[inside].ravel()):
            best = min(best, K.hessian_min_eig(P, px, py))
        return float(best)

    def bounding_box(self):
        cx, cy = self.center
        a, b = self.semi_axes
        return (cx - a, cx + a), (cy - b, cy + b)

    def diameter_bound(self):
        a, b = self.semi_axes
        return 2.0 * float(np.hypot(a, b))

    # ----------------------------------------------- boundary parametrization

    def boundary_point(self, u):
        if np.ndim(u) == 0:
            bx, by = K.boundary_point(self.params, float(u))
            return np.array([bx, by])
        u = np.asarray(u, dtype=float)
        out = np.empty(u.shape + (2,))
        for idx, uu in np.ndenumerate(u):
            out[idx] = K.boundary_point(self.params, float(uu))
        return out

    def boundary_speed(self, u):
        if np.ndim(u) == 0:
            return float(K.boundary_speed(self.params, float(u)))
        u = np.asarray(u, dtype=float)
        return np.array([K.boundary_speed(self.params, float(uu))
                         for uu in u.ravel()]).reshape(u.shape)

    def boundary_param(self, point):
        """Parameter of a boundary point (radial rays from the center are
        bijective on a convex domain containing its center)."""
        cx, cy = self.center
        return float(np.arctan2(point[1] - cy, point[0] - cx) % (2.0 * np.pi))

    def perimeter(self, n=4096):
        u = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        return float(np.sum(self.boundary_speed(u)) * 2.0 * np.pi / n)


@dataclass(frozen=True)
class PhasePoint:
    """Position plus travel direction, the direction stored as an angle so
    unit length is structural."""

    position: np.ndarray
    angle: float

    @property
    def direction(self):
        return np.array([np.cos(self.angle), np.sin(self.angle)])


@dataclass(frozen=True)
class ChordRay:
    """A full chord of the domain with its boundary flux factors."""

    x_in: np.ndarray
    angle: float
    tau_plus: float
    x_out: np.ndarray
    entry_flux: float   # |n(x_in) . v|
    exit_flux: float    # |n(x_out) . v|

    @property
    def direction(self):
        return np.array([np.cos(self.angle), np.sin(self.angle)])

    @classmethod
    def from_entry(cls, domain, x_in, v):
        """Chord entering at a boundary point with direction v."""
        v = unit(v)
        x_in = np.asarray(x_in, dtype=float)
        if abs(domain.xi(x_in[0], x_in[1])) > 10.0 * BOUNDARY_TOL + 1e-12:
            raise PointOutsideDomain("entry point is not on the boundary")
        n_in = domain.normal(x_in)
        sin_v = float(n_in @ v)
        if sin_v >= 0.0:
            raise TangentialRay("direction does not point into the domain")
        tau = exit_time(domain, x_in, v, "forward")
        x_out = x_in + tau * v
        n_out = domain.normal(x_out)
        return cls(x_in, angle_of(v), tau, x_out,
                   abs(sin_v), abs(float(n_out @ v)))

    @classmethod
    def through_point(cls, domain, x, v):
        """Chord through an interior point along v."""
        v = unit(v)
        back = exit_time(domain, np.asarray(x, dtype=float), v, "backward")
        x_in = np.asarray(x, dtype=float) - back * v
        return cls.from_entry(domain, x_in, v)


def exit_time(domain, x, v, orientation="forward"):
    """Distance from x to the boundary along +/- v.

    Raises PointOutsideDomain when xi(x) exceeds the boundary tolerance and
    TangentialRay when the ray grazes the boundary (|n . v| below cutoff at
    the root, where root multiplicity makes the exit ill-conditioned).
    """
    x = np.asarray(x, dtype=float)
    v = unit(v)
    if domain.xi(x[0], x[1]) > BOUNDARY_TOL:
        raise PointOutsideDomain("xi(x) = %.3e > tolerance" % domain.xi(x[0], x[1]))
    if orientation == "forward":
        t = K.exit_time_forward(domain.params, x[0], x[1], v[0], v[1])
    elif orientation == "backward":
        t = K.exit_time_backward(domain.params, x[0], x[1], v[0], v[1])
    else:
        raise ValueError("orientation must be 'forward' or 'backward'")
    if t < 0.0:
        raise TangentialRay("ray does not cross the boundary")
    sgn = 1.0 if orientation == "forward" else -1.0
    hit = x + sgn * t * v
    n = domain.normal(hit)
    if abs(float(n @ v)) < TANGENT_CUTOFF:
        raise TangentialRay("|n . v| = %.3e at the exit point" % abs(float(n @ v)))
    return float(t)


def grad_exit_time(domain, x, v):
    """Gradients of the backward exit time with respect to x and v.

    With y the backward exit point, grad_x tau = n(y)/(v.n(y)) and
    grad_v tau = tau * n(y)/(v.n(y)); requires a non-tangential exit.
    """
    x = np.asarray(x, dtype=float)
    v = unit(v)
    tau = exit_time(domain, x, v, "backward")
    y = x - tau * v
    n = domain.normal(y)
    vn = float(v @ n)
    if abs(vn) < TANGENT_CUTOFF:
        raise TangentialRay("backward exit is tangential")
    gx = n / vn
    gv = tau * n / vn
    return gx, gv


# --------------------------------------------------------------------------
# boundary quadrature
# --------------------------------------------------------------------------

@dataclass
class BoundaryQuadrature:
    """Nodes on (boundary x circle) restricted to one half of phase space.

    Weights carry |n . v| dS dv with the angular measure normalized to total
    mass one, so summing weights over the full outgoing set of the unit disk
    gives 2.
    """

    points: np.ndarray   # (N, 2)
    angles: np.ndarray   # (N,)
    weights: np.ndarray  # (N,)
    side: str            # "incoming" | "outgoing"

    def __post_init__(self):
        if np.any(self.weights <= 0.0):
            raise ValueError("quadrature weights must be positive")

    @classmethod
    def full(cls, domain, side, n_space=512, n_angle=256):
        """Product trapezoid rule over the whole boundary and circle,
        masked to the requested half of phase space."""
        us = np.linspace(0.0, 2.0 * np.pi, n_space, endpoint=False)
        angs = np.linspace(0.0, 2.0 * np.pi, n_angle, endpoint=False)
        du = 2.0 * np.pi / n_space
        da = 2.0 * np.pi / n_angle
        pts = domain.boundary_point(us)
        spd = domain.boundary_speed(us)
        normals = np.array([domain.normal(p) for p in pts])
        ca, sa = np.cos(angs), np.sin(angs)
        ndotv = normals[:, None, 0] * ca[None, :] + normals[:, None, 1] * sa[None, :]
        sign = 1.0 if side == "outgoing" else -1.0
        keep = sign * ndotv > 0.0
        iu, ia = np.nonzero(keep)
        w = np.abs(ndotv[iu, ia]) * spd[iu] * du * da / (2.0 * np.pi)
        return cls(pts[iu], angs[ia], w, side)

    @classmethod
    def patch(cls, domain, side, u_lo, u_hi, a_lo, a_hi, n_space, n_angle):
        """Trapezoid product rule on a parameter window; used by probes whose
        integrands vanish at the window edges."""
        us = np.linspace(u_lo, u_hi, n_space)
        angs = np.linspace(a_lo, a_hi, n_angle)
        wu = np.full(n_space, u_hi - u_lo) / (n_space - 1)
        wu[0] *= 0.5
        wu[-1] *= 0.5
        wa = np.full(n_angle, a_hi - a_lo) / (n_angle - 1)
        wa[0] *= 0.5
        wa[-1] *= 0.5
        pts = domain.boundary_point(us % (2.0 * np.pi))
        spd = domain.boundary_speed(us % (2.0 * np.pi))
        normals = np.array([domain.normal(p) for p in pts])
        ca, sa = np.cos(angs), np.sin(angs)
        ndotv = normals[:, None, 0] * ca[None, :] + normals[:, None, 1] * sa[None, :]
        sign = 1.0 if side == "outgoing" else -1.0
        keep = sign * ndotv > 0.0
        iu, ia = np.nonzero(keep)
        w = (np.abs(ndotv[iu, ia]) * spd[iu] * wu[iu] * wa[ia] / (2.0 * np.pi))
        return cls(pts[iu], angs[ia] % (2.0 * np.pi), w, side)


# --------------------------------------------------------------------------
# integral identities
# --------------------------------------------------------------------------

def flux_identity_residual(domain, v, arc, n_nodes=2048):
    """Mismatch between the outgoing flux of an arc and the incoming flux of
    its backward-exit image.

    arc is a parameter interval (u_lo, u_hi) on the outgoing side for v.
    Both integrals are discretized independently (each arc with its own
    composite trapezoid rule), so the residual decays at the quadrature
    order and vanishes in the limit.
    """
    u_lo, u_hi = arc
    if u_hi == u_lo:
        return 0.0
    v = unit(v)
    us = np.linspace(u_lo, u_hi, n_nodes)
    pts = domain.boundary_point(us % (2.0 * np.pi))
    spd = domain.boundary_speed(us % (2.0 * np.pi))
    ndv = np.array([float(domain.normal(p) @ v) for p in pts])
    if np.any(ndv <= TANGENT_CUTOFF):
        raise TangentialRay("arc touches the tangential region for v")
    wu = np.full(n_nodes, (u_hi - u_lo) / (n_nodes - 1))
    wu[0] *= 0.5
    wu[-1] *= 0.5
    flux_out = float(np.sum(ndv * spd * wu))

    # image arc endpoints under the backward-exit map
    y_lo = pts[0] - exit_time(domain, pts[0], v, "backward") * v
    y_hi = pts[-1] - exit_time(domain, pts[-1], v, "backward") * v
    w0 = domain.boundary_param(y_lo)
    w1 = domain.boundary_param(y_hi)
    if w1 - w0 > np.pi:
        w0 += 2.0 * np.pi
    elif w0 - w1 > np.pi:
        w1 += 2.0 * np.pi
    ws = np.linspace(w0, w1, n_nodes)
    ypts = domain.boundary_point(ws % (2.0 * np.pi))
    yspd = domain.boundary_speed(ws % (2.0 * np.pi))
    yndv = np.array([float(domain.normal(p) @ v) for p in ypts])
    ww = np.full(n_nodes, abs(w1 - w0) / (n_nodes - 1))
    ww[0] *= 0.5
    ww[-1] *= 0.5
    flux_in = float(np.sum(-yndv * yspd * ww))
    return abs(flux_out - flux_in)


def _tangent_params(domain, v, n_scan=4096):
    """The two boundary parameters where n . v changes sign."""
    us = np.linspace(0.0, 2.0 * np.pi, n_scan, endpoint=False)
    pts = domain.boundary_point(us)
    d = np.array([float(domain.normal(p) @ v) for p in pts])
    roots = []
    for i in range(n_scan):
        j = (i + 1) % n_scan
        if d[i] == 0.0:
            roots.append(us[i])
        elif d[i] * d[j] < 0.0:
            lo, hi = us[i], us[i] + 2.0 * np.pi / n_scan
            flo = d[i]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                fm = float(domain.normal(domain.boundary_point(mid % (2 * np.pi))) @ v)
                if flo * fm <= 0.0:
                    hi = mid
                else:
                    lo = mid
                    flo = fm
            roots.append(0.5 * (lo + hi))
    return roots


def volume_from_boundary_quadrature(domain, v, integrand, n_boundary=2048,
                                    step=None):
    """Volume integral of a field computed as a boundary-and-ray quadrature.

    Evaluates the iterated integral over the outgoing arc for v of
    (n . v) * int_0^{tau_-(x,v)} g(x - s v) ds, which equals the area
    integral of g; tests compare it against a direct area rule.

    integrand may be a ScalarField-like object (with .sample) or a
    vectorized callable g(xs, ys).
    """
    v = unit(v)
    if step is None:
        step = domain.diameter_bound() / 512.0
    g = integrand.sample if hasattr(integrand, "sample") else integrand

    t1, t2 = _tangent_params(domain, v)
    # integrate over the arc where n . v > 0
    mid = 0.5 * (t1 + t2)
    if float(domain.normal(domain.boundary_point(mid % (2 * np.pi))) @ v) < 0.0:
        t1, t2 = t2, t1 + 2.0 * np.pi
    us = np.linspace(t1, t2, n_boundary)
    wu = np.full(n_boundary, (t2 - t1) / (n_boundary - 1))
    wu[0] *= 0.5
    wu[-1] *= 0.5
    total = 0.0
    for u, w in zip(us, wu):
        p = domain.boundary_point(u % (2.0 * np.pi))
        nd = float(domain.normal(p) @ v)
        if nd <= 1e-12:
            continue
        tau = K.exit_time_backward(domain.params, p[0], p[1], v[0], v[1])
        if tau <= 0.0:
            continue
        n_in = max(2, int(np.ceil(tau / step)) + 1)
        s = np.linspace(0.0, tau, n_in)
        vals = g(p[0] - s * v[0], p[1] - s * v[1])
        inner = np.trapezoid(vals, s)
        total += nd * domain.boundary_speed(u % (2.0 * np.pi)) * w * inner
    return float(total)
