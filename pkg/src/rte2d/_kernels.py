"""Numba kernels shared by the geometry and transport layers.

Conventions used throughout:

* a domain is the parameter vector ``P = [cx, cy, a, b, m]`` describing the
  level set ((x-cx)/a)^m + ((y-cy)/b)^m - 1 with even integer exponent m
  (m=2 covers disks and ellipses, m>=4 superellipses);
* a gridded field is the tuple ``(vals, x0, y0, h, cflag, cval)`` where
  ``vals`` is a C-contiguous (ny, nx) array sampled at nodes
  (x0 + i*h, y0 + j*h); ``cflag`` short-circuits constant fields;
* the angular measure on the unit circle carries total mass 1, so every
  integral over directions is an average.
"""

import numpy as np
from numba import njit

# Rays are rejected as tangential when |n . v| at the exit point drops
# below this cutoff.
TANGENT_CUTOFF = 1e-3
# Root tolerance for exit times, absolute in the ray parameter.
ROOT_TOL = 1e-12
# Points with level-set value above this are treated as outside.
BOUNDARY_TOL = 1e-9


# --------------------------------------------------------------------------
# level-set evaluation
# --------------------------------------------------------------------------

@njit(cache=True)
def xi_value(P, x, y):
    u = (x - P[0]) / P[2]
    w = (y - P[1]) / P[3]
    m = int(P[4])
    return u ** m + w ** m - 1.0


@njit(cache=True)
def xi_gradient(P, x, y):
    u = (x - P[0]) / P[2]
    w = (y - P[1]) / P[3]
    m = int(P[4])
    gx = m * u ** (m - 1) / P[2]
    gy = m * w ** (m - 1) / P[3]
    return gx, gy


@njit(cache=True)
def outward_normal(P, x, y):
    gx, gy = xi_gradient(P, x, y)
    g = np.sqrt(gx * gx + gy * gy)
    return gx / g, gy / g


@njit(cache=True)
def hessian_min_eig(P, x, y):
    # The Hessian of the gauge family is diagonal.
    u = (x - P[0]) / P[2]
    w = (y - P[1]) / P[3]
    m = int(P[4])
    hxx = m * (m - 1) * u ** (m - 2) / (P[2] * P[2])
    hyy = m * (m - 1) * w ** (m - 2) / (P[3] * P[3])
    return min(hxx, hyy)


# --------------------------------------------------------------------------
# exit times
# --------------------------------------------------------------------------

@njit(cache=True)
def exit_time_forward(P, x, y, vx, vy):
    """Largest root t >= 0 of xi(x + t v) = 0, or -1.0 when the forward ray
    never meets the boundary.

    xi is convex along any line, so the forward exit of a point in the
    closed domain is the largest root.  m = 2 is solved in closed form;
    higher exponents use damped Newton from an exterior point, which
    descends monotonically onto the largest root.
    """
    m = int(P[4])
    if m == 2:
        u = (x - P[0]) / P[2]
        w = (y - P[1]) / P[3]
        pa = vx / P[2]
        pb = vy / P[3]
        A = pa * pa + pb * pb
        B = 2.0 * (u * pa + w * pb)
        C = u * u + w * w - 1.0
        disc = B * B - 4.0 * A * C
        if disc < 0.0:
            return -1.0
        t = (-B + np.sqrt(disc)) / (2.0 * A)
        if t < 0.0:
            return -1.0
        return t

    t = 4.0 * (P[2] + P[3]) + np.sqrt((x - P[0]) ** 2 + (y - P[1]) ** 2)
    f = xi_value(P, x + t * vx, y + t * vy)
    if f <= 0.0:
        return -1.0
    for _ in range(200):
        gx, gy = xi_gradient(P, x + t * vx, y + t * vy)
        fp = gx * vx + gy * vy
        if fp <= 0.0:
            return -1.0
        dt = f / fp
        t -= dt
        f = xi_value(P, x + t * vx, y + t * vy)
        if dt < ROOT_TOL:
            break
    if t < -ROOT_TOL:
        return -1.0
    if t < 0.0:
        t = 0.0
    return t


@njit(cache=True)
def exit_time_backward(P, x, y, vx, vy):
    return exit_time_forward(P, x, y, -vx, -vy)


# --------------------------------------------------------------------------
# boundary parametrization (radial gauge from the center)
# --------------------------------------------------------------------------

@njit(cache=True)
def boundary_radius(P, u):
    c = np.cos(u)
    s = np.sin(u)
    m = int(P[4])
    q = (c / P[2]) ** m + (s / P[3]) ** m
    return q ** (-1.0 / m)


@njit(cache=True)
def boundary_point(P, u):
    r = boundary_radius(P, u)
    return P[0] + r * np.cos(u), P[1] + r * np.sin(u)


@njit(cache=True)
def boundary_speed(P, u):
    """|d/du| of the radial boundary parametrization (arc-length factor)."""
    c = np.cos(u)
    s = np.sin(u)
    m = int(P[4])
    q = (c / P[2]) ** m + (s / P[3]) ** m
    qp = m * (-s * c ** (m - 1) / P[2] ** m + c * s ** (m - 1) / P[3] ** m)
    r = q ** (-1.0 / m)
    rp = -(1.0 / m) * q ** (-1.0 / m - 1.0) * qp
    return np.sqrt(rp * rp + r * r)


# --------------------------------------------------------------------------
# field sampling
# --------------------------------------------------------------------------

@njit(cache=True)
def bilinear(vals, x0, y0, h, px, py):
    ny, nx = vals.shape
    fx = (px - x0) / h
    fy = (py - y0) / h
    if fx < 0.0:
        fx = 0.0
    if fy < 0.0:
        fy = 0.0
    if fx > nx - 1.0:
        fx = nx - 1.0
    if fy > ny - 1.0:
        fy = ny - 1.0
    i = int(fx)
    j = int(fy)
    if i > nx - 2:
        i = nx - 2
    if j > ny - 2:
        j = ny - 2
    ax = fx - i
    ay = fy - j
    v00 = vals[j, i]
    v01 = vals[j, i + 1]
    v10 = vals[j + 1, i]
    v11 = vals[j + 1, i + 1]
    return (v00 * (1.0 - ax) * (1.0 - ay) + v01 * ax * (1.0 - ay)
            + v10 * (1.0 - ax) * ay + v11 * ax * ay)


@njit(cache=True)
def sample_field(vals, x0, y0, h, cflag, cval, px, py):
    if cflag:
        return cval
    return bilinear(vals, x0, y0, h, px, py)


@njit(cache=True)
def line_integral_kernel(vals, x0, y0, h, cflag, cval,
                         px, py, vx, vy, t0, t1, step):
    """Composite trapezoid of the field along s -> (p + s v), s in [t0, t1]."""
    length = t1 - t0
    if length <= 0.0:
        return 0.0
    if cflag:
        return cval * length
    n = int(np.ceil(length / step))
    if n < 1:
        n = 1
    dt = length / n
    s = t0
    f0 = bilinear(vals, x0, y0, h, px + s * vx, py + s * vy)
    acc = 0.0
    for _ in range(n):
        s += dt
        f1 = bilinear(vals, x0, y0, h, px + s * vx, py + s * vy)
        acc += 0.5 * (f0 + f1) * dt
        f0 = f1
    return acc


@njit(cache=True)
def attenuation_to_boundary(P, sig, sx0, sy0, sh, scf, scv,
                            px, py, vx, vy, step):
    """Optical depth from (px,py) backward along v to the boundary."""
    tau = exit_time_backward(P, px, py, vx, vy)
    if tau <= 0.0:
        return 0.0
    return line_integral_kernel(sig, sx0, sy0, sh, scf, scv,
                                px, py, -vx, -vy, 0.0, tau, step)


@njit(cache=True)
def duhamel_ray(P, sig, sx0, sy0, sh, scf, scv,
                src, rx0, ry0, rh, rcf, rcv,
                px, py, vx, vy, tau, step):
    """March the backward characteristic accumulating the attenuated source.

    Each sub-interval uses the product rule
    exp(-A_j) * Sbar * (1 - exp(-sbar*dt)) / sbar with endpoint-averaged
    sbar, Sbar; constant coefficients integrate exactly and the discrete
    maximum principle is preserved whenever sigma_s <= sigma_a nodally.
    Returns (integral, total optical depth along [0, tau]).
    """
    if tau <= 0.0:
        return 0.0, 0.0
    n = int(np.ceil(tau / step))
    if n < 1:
        n = 1
    dt = tau / n
    A = 0.0
    total = 0.0
    sg0 = sample_field(sig, sx0, sy0, sh, scf, scv, px, py)
    sc0 = sample_field(src, rx0, ry0, rh, rcf, rcv, px, py)
    s = 0.0
    for _ in range(n):
        s += dt
        qx = px - s * vx
        qy = py - s * vy
        sg1 = sample_field(sig, sx0, sy0, sh, scf, scv, qx, qy)
        sc1 = sample_field(src, rx0, ry0, rh, rcf, rcv, qx, qy)
        sbar = 0.5 * (sg0 + sg1)
        Sbar = 0.5 * (sc0 + sc1)
        w = sbar * dt
        if w > 1e-12:
            seg = np.exp(-A) * Sbar * (-np.expm1(-w)) / sbar
        else:
            seg = np.exp(-A) * Sbar * dt * (1.0 - 0.5 * w)
        total += seg
        A += w
        sg0 = sg1
        sc0 = sc1
    return total, A


# --------------------------------------------------------------------------
# boundary-data table lookup
# --------------------------------------------------------------------------

@njit(cache=True)
def phi_table_eval(table, P, bx, by, jdir):
    """Incoming-data table sampled at a boundary point for ordinate jdir.

    The table is (nu, nv) over uniform boundary parameters u_i = 2*pi*i/nu
    with the angle axis aligned to the solver ordinates; linear periodic
    interpolation in u.
    """
    nu = table.shape[0]
    u = np.arctan2(by - P[1], bx - P[0])
    if u < 0.0:
        u += 2.0 * np.pi
    fu = u * nu / (2.0 * np.pi)
    i0 = int(fu)
    au = fu - i0
    if i0 >= nu:
        i0 -= nu
    i1 = i0 + 1
    if i1 >= nu:
        i1 -= nu
    return table[i0, jdir] * (1.0 - au) + table[i1, jdir] * au


# --------------------------------------------------------------------------
# transport sweeps
# --------------------------------------------------------------------------

@njit(cache=True)
def mean_sweep(P, xs, ys, cos_a, sin_a, wgt,
               sig, sx0, sy0, sh, scf, scv,
               src, rx0, ry0, rh, rcf, rcv, has_src,
               phi_table, has_phi, step, out):
    """One source-iteration sweep of the direction-averaged density.

    out[k] = sum_j wgt[j] * [exp(-A) * phi(entry_kj) + duhamel(source)_kj].
    Writes are disjoint per node, keeping results bit-deterministic.
    """
    nnod = xs.shape[0]
    ndir = cos_a.shape[0]
    for k in range(nnod):
        px = xs[k]
        py = ys[k]
        acc = 0.0
        for j in range(ndir):
            vx = cos_a[j]
            vy = sin_a[j]
            tau = exit_time_backward(P, px, py, vx, vy)
            if tau < 0.0:
                tau = 0.0
            if has_src:
                val, A = duhamel_ray(P, sig, sx0, sy0, sh, scf, scv,
                                     src, rx0, ry0, rh, rcf, rcv,
                                     px, py, vx, vy, tau, step)
            else:
                val = 0.0
                A = line_integral_kernel(sig, sx0, sy0, sh, scf, scv,
                                         px, py, -vx, -vy, 0.0, tau, step)
            if has_phi:
                bx = px - tau * vx
                by = py - tau * vy
                val += np.exp(-A) * phi_table_eval(phi_table, P, bx, by, j)
            acc += wgt[j] * val
        out[k] = acc


@njit(cache=True)
def full_field_sweep(P, xs, ys, cos_a, sin_a,
                     sig, sx0, sy0, sh, scf, scv,
                     src, rx0, ry0, rh, rcf, rcv, has_src,
                     phi_table, has_phi, step, out):
    """Assemble the full phase-space density; out has shape (nnodes, ndir)."""
    nnod = xs.shape[0]
    ndir = cos_a.shape[0]
    for k in range(nnod):
        px = xs[k]
        py = ys[k]
        for j in range(ndir):
            vx = cos_a[j]
            vy = sin_a[j]
            tau = exit_time_backward(P, px, py, vx, vy)
            if tau < 0.0:
                tau = 0.0
            if has_src:
                val, A = duhamel_ray(P, sig, sx0, sy0, sh, scf, scv,
                                     src, rx0, ry0, rh, rcf, rcv,
                                     px, py, vx, vy, tau, step)
            else:
                val = 0.0
                A = line_integral_kernel(sig, sx0, sy0, sh, scf, scv,
                                         px, py, -vx, -vy, 0.0, tau, step)
            if has_phi:
                bx = px - tau * vx
                by = py - tau * vy
                val += np.exp(-A) * phi_table_eval(phi_table, P, bx, by, j)
            out[k, j] = val


@njit(cache=True)
def eval_phase_batch(P, xs, ys, angs,
                     sig, sx0, sy0, sh, scf, scv,
                     src, rx0, ry0, rh, rcf, rcv, has_src,
                     phi_table, phi_angles, has_phi, step, out):
    """Evaluate a characteristic solution at arbitrary phase points.

    phi is interpolated linearly in angle between its table columns
    (phi_angles must be the uniform ordinate angles the table was built on).
    """
    npts = xs.shape[0]
    ndir = phi_angles.shape[0]
    dang = 2.0 * np.pi / ndir if ndir > 0 else 0.0
    for k in range(npts):
        px = xs[k]
        py = ys[k]
        vx = np.cos(angs[k])
        vy = np.sin(angs[k])
        tau = exit_time_backward(P, px, py, vx, vy)
        if tau < 0.0:
            tau = 0.0
        if has_src:
            val, A = duhamel_ray(P, sig, sx0, sy0, sh, scf, scv,
                                 src, rx0, ry0, rh, rcf, rcv,
                                 px, py, vx, vy, tau, step)
        else:
            val = 0.0
            A = line_integral_kernel(sig, sx0, sy0, sh, scf, scv,
                                     px, py, -vx, -vy, 0.0, tau, step)
        if has_phi:
            bx = px - tau * vx
            by = py - tau * vy
            ang = angs[k] % (2.0 * np.pi)
            fj = ang / dang
            j0 = int(fj)
            aj = fj - j0
            if j0 >= ndir:
                j0 -= ndir
            j1 = j0 + 1
            if j1 >= ndir:
                j1 -= ndir
            pv = (phi_table_eval(phi_table, P, bx, by, j0) * (1.0 - aj)
                  + phi_table_eval(phi_table, P, bx, by, j1) * aj)
            val += np.exp(-A) * pv
        out[k] = val


# --------------------------------------------------------------------------
# smooth compactly supported bump
# --------------------------------------------------------------------------

@njit(cache=True)
def bump(u):
    """exp(1 - 1/(1-u^2)) inside |u| < 1, zero outside; peak value 1."""
    if u < 0.0:
        u = -u
    if u >= 1.0:
        return 0.0
    return np.exp(1.0 - 1.0 / (1.0 - u * u))
