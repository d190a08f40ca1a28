"""Gridded coefficient fields, phantom construction and chord integrals.

Fields live on a uniform node grid covering the domain bounding box plus a
small pad, with bilinear interpolation between nodes; values are defined on
the whole box (continuous phantoms evaluate globally, solver outputs are
extended past the interior mask) so sampling near the boundary is always
well posed.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import InvalidCoefficients, InvalidPhantomParams

PAD_CELLS = 4


@dataclass
class ScalarField:
    """A scalar quantity sampled on a uniform grid.

    values[j, i] is the sample at (x0 + i*h, y0 + j*h).  ``constant`` short
    circuits interpolation for uniform fields, which also makes chord
    integrals of constants exact.
    """

    values: np.ndarray
    x0: float
    y0: float
    h: float
    mask: np.ndarray = None
    constant: bool = False

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise InvalidPhantomParams("field contains non-finite values")
        if self.mask is None:
            self.mask = np.ones(self.values.shape, dtype=bool)

    # ------------------------------------------------------------ building

    @classmethod
    def grid_for(cls, domain, n=128, pad=PAD_CELLS):
        """Grid geometry (x0, y0, h, nx, ny) covering the domain with pad."""
        (xa, xb), (ya, yb) = domain.bounding_box()
        h = max(xb - xa, yb - ya) / (n - 1)
        nx = int(np.ceil((xb - xa) / h)) + 1 + 2 * pad
        ny = int(np.ceil((yb - ya) / h)) + 1 + 2 * pad
        x0 = 0.5 * (xa + xb) - 0.5 * (nx - 1) * h
        y0 = 0.5 * (ya + yb) - 0.5 * (ny - 1) * h
        return x0, y0, h, nx, ny

    @classmethod
    def from_function(cls, domain, fn, n=128, pad=PAD_CELLS):
        x0, y0, h, nx, ny = cls.grid_for(domain, n, pad)
        X, Y = np.meshgrid(x0 + h * np.arange(nx), y0 + h * np.arange(ny))
        vals = np.asarray(fn(X, Y), dtype=float)
        if vals.shape != X.shape:
            vals = np.broadcast_to(vals, X.shape).copy()
        mask = domain.xi(X, Y) <= 0.0
        return cls(vals, x0, y0, h, mask)

    @classmethod
    def constant_on(cls, domain, value, n=128, pad=PAD_CELLS):
        x0, y0, h, nx, ny = cls.grid_for(domain, n, pad)
        X, Y = np.meshgrid(x0 + h * np.arange(nx), y0 + h * np.arange(ny))
        mask = domain.xi(X, Y) <= 0.0
        vals = np.full((ny, nx), float(value))
        return cls(vals, x0, y0, h, mask, constant=True)

    def like(self, values, constant=False):
        return ScalarField(values, self.x0, self.y0, self.h,
                           self.mask.copy(), constant)

    # ------------------------------------------------------------ sampling

    @property
    def nx(self):
        return self.values.shape[1]

    @property
    def ny(self):
        return self.values.shape[0]

    def nodes(self):
        X, Y = np.meshgrid(self.x0 + self.h * np.arange(self.nx),
                           self.y0 + self.h * np.arange(self.ny))
        return X, Y

    def sample(self, xs, ys):
        """Bilinear interpolation, clamped to the grid box (numpy path)."""
        if self.constant:
            val = self.values.flat[0]
            return np.full(np.broadcast(xs, ys).shape, val) \
                if np.ndim(xs) or np.ndim(ys) else val
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        fx = np.clip((xs - self.x0) / self.h, 0.0, self.nx - 1.0)
        fy = np.clip((ys - self.y0) / self.h, 0.0, self.ny - 1.0)
        i = np.minimum(fx.astype(int), self.nx - 2)
        j = np.minimum(fy.astype(int), self.ny - 2)
        ax = fx - i
        ay = fy - j
        v = self.values
        return (v[j, i] * (1 - ax) * (1 - ay) + v[j, i + 1] * ax * (1 - ay)
                + v[j + 1, i] * (1 - ax) * ay + v[j + 1, i + 1] * ax * ay)

    def pack(self):
        """Tuple consumed by the numba kernels."""
        cval = float(self.values.flat[0]) if self.constant else 0.0
        return (self.values, self.x0, self.y0, self.h,
                self.constant, cval)

    # ---------------------------------------------------------- statistics

    def interior_min(self):
        return float(self.values[self.mask].min())

    def interior_max(self):
        return float(self.values[self.mask].max())

    def sup_norm(self):
        return float(np.abs(self.values[self.mask]).max())

    def l2_norm(self):
        """Discrete L2 norm over the interior mask (cell-area weighted)."""
        return float(np.sqrt(np.sum(self.values[self.mask] ** 2) * self.h ** 2))

    # --------------------------------------------------------- persistence

    def save(self, path):
        with open(path, "w") as fh:
            fh.write("%d %d %.17g %.17g %.17g\n"
                     % (self.nx, self.ny, self.h, self.x0, self.y0))
            for row in self.values:
                fh.write(" ".join("%.17g" % v for v in row) + "\n")

    @classmethod
    def load(cls, path, domain=None):
        with open(path) as fh:
            header = fh.readline().split()
            nx, ny = int(header[0]), int(header[1])
            h, x0, y0 = float(header[2]), float(header[3]), float(header[4])
            vals = np.loadtxt(fh, ndmin=2)
        if vals.shape != (ny, nx):
            raise ValueError("grid payload does not match its header")
        mask = None
        if domain is not None:
            X, Y = np.meshgrid(x0 + h * np.arange(nx), y0 + h * np.arange(ny))
            mask = domain.xi(X, Y) <= 0.0
        constant = bool(np.all(vals == vals.flat[0]))
        return cls(vals, x0, y0, h, mask, constant)


def dilate_fill(values, known):
    """Extend values past a mask by repeated neighbor averaging.

    Unknown nodes adjacent to known ones take the mean of their known
    4-neighbors; repeats until everything is filled.  Used to continue
    solver outputs just outside the interior mask so bilinear cells that
    straddle the boundary are well defined.
    """
    vals = values.copy()
    known = known.copy()
    while not known.all():
        acc = np.zeros_like(vals)
        cnt = np.zeros(vals.shape)
        for sh in ((0, 1), (0, -1), (1, 0), (-1, 0)):
            rolled_v = np.roll(vals, sh, axis=(0, 1))
            rolled_k = np.roll(known, sh, axis=(0, 1))
            if sh[0] == 1:
                rolled_k[0, :] = False
            if sh[0] == -1:
                rolled_k[-1, :] = False
            if sh[1] == 1:
                rolled_k[:, 0] = False
            if sh[1] == -1:
                rolled_k[:, -1] = False
            acc += np.where(rolled_k, rolled_v, 0.0)
            cnt += rolled_k
        frontier = (~known) & (cnt > 0)
        vals[frontier] = acc[frontier] / cnt[frontier]
        if not frontier.any():
            break
        known |= frontier
    return vals


# --------------------------------------------------------------------------
# phantoms
# --------------------------------------------------------------------------

def make_phantom(domain, kind, params, n=128, nonneg=True):
    """Continuous coefficient phantoms on the domain grid.

    kinds: "constant" {value}; "gaussian-bumps" {baseline, bumps: [(cx, cy,
    amplitude, width), ...]}; "smoothed-disc-inclusions" {baseline, discs:
    [(cx, cy, radius, amplitude, edge_width), ...]}.
    """
    if kind == "constant":
        value = float(params["value"])
        if nonneg and value < 0:
            raise InvalidPhantomParams("constant phantom must be nonnegative")
        return ScalarField.constant_on(domain, value, n)

    if kind == "gaussian-bumps":
        baseline = float(params.get("baseline", 0.0))
        bumps = params["bumps"]

        def fn(X, Y):
            out = np.full(X.shape, baseline)
            for cx, cy, amp, width in bumps:
                if width <= 0:
                    raise InvalidPhantomParams("bump width must be positive")
                out += amp * np.exp(-((X - cx) ** 2 + (Y - cy) ** 2)
                                    / (2.0 * width ** 2))
            return out

    elif kind == "smoothed-disc-inclusions":
        baseline = float(params.get("baseline", 0.0))
        discs = params["discs"]

        def fn(X, Y):
            out = np.full(X.shape, baseline)
            for cx, cy, radius, amp, edge in discs:
                if edge <= 0 or radius <= edge:
                    raise InvalidPhantomParams("need 0 < edge_width < radius")
                r = np.hypot(X - cx, Y - cy)
                s = np.where(r <= radius - edge, 1.0,
                             np.where(r >= radius + edge, 0.0,
                                      0.5 * (1.0 + np.cos(
                                          np.pi * (r - radius + edge)
                                          / (2.0 * edge)))))
                out += amp * s
            return out

    else:
        raise InvalidPhantomParams("unknown phantom kind %r" % kind)

    fld = ScalarField.from_function(domain, fn, n)
    if nonneg and fld.values.min() < 0.0:
        raise InvalidPhantomParams("phantom takes negative values")
    return fld


def phantom_formula(kind, params):
    """The analytic formula behind a phantom, for pointwise oracles."""
    if kind == "constant":
        value = float(params["value"])
        return lambda x, y: np.full(np.broadcast(x, y).shape, value) \
            if np.ndim(x) or np.ndim(y) else value
    if kind == "gaussian-bumps":
        baseline = float(params.get("baseline", 0.0))
        bumps = params["bumps"]

        def fn(x, y):
            out = baseline + np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)
            for cx, cy, amp, width in bumps:
                out = out + amp * np.exp(-((np.asarray(x) - cx) ** 2
                                           + (np.asarray(y) - cy) ** 2)
                                         / (2.0 * width ** 2))
            return out
        return fn
    raise InvalidPhantomParams("no closed formula for phantom kind %r" % kind)


# --------------------------------------------------------------------------
# coefficient pair
# --------------------------------------------------------------------------

@dataclass
class CoefficientPair:
    """Absorption and scattering coefficients with their common lower bound.

    Enforces 0 <= sigma_0 <= sigma_s <= sigma_a at every interior node.
    sigma_0 = 0 is admitted only for the degenerate pure-absorption case
    sigma_s = 0; energy diagnostics then report a vacuous bound.
    """

    sigma_a: ScalarField
    sigma_s: ScalarField
    sigma_0: float

    def __post_init__(self):
        sa, ss = self.sigma_a, self.sigma_s
        if sa.values.shape != ss.values.shape or sa.h != ss.h:
            raise InvalidCoefficients("coefficient grids do not match")
        m = sa.mask
        if self.sigma_0 < 0:
            raise InvalidCoefficients("sigma_0 must be nonnegative")
        if np.any(ss.values[m] < self.sigma_0 - 1e-12):
            raise InvalidCoefficients("sigma_s drops below sigma_0")
        if np.any(sa.values[m] < ss.values[m] - 1e-12):
            raise InvalidCoefficients("sigma_s exceeds sigma_a")
        if np.any(sa.values[m] < 0.0):
            raise InvalidCoefficients("sigma_a must be nonnegative")
        if self.sigma_0 == 0.0 and float(ss.values[m].max()) > 0.0:
            raise InvalidCoefficients(
                "sigma_0 must be positive when scattering is present")


# --------------------------------------------------------------------------
# chord integrals and sinograms
# --------------------------------------------------------------------------

def line_integral(fld, chord, step=None):
    """Composite trapezoid of the field along a chord, O(step^2) for smooth
    fields and exact for constants."""
    if step is None:
        step = fld.h / 2.0
    if step <= 0:
        raise ValueError("step must be positive")
    vals, x0, y0, h, cf, cv = fld.pack()
    v = chord.direction
    return float(K.line_integral_kernel(
        vals, x0, y0, h, cf, cv,
        chord.x_in[0], chord.x_in[1], v[0], v[1], 0.0, chord.tau_plus, step))


@dataclass
class Sinogram:
    """Chord family paired with line-integral values of an attenuation
    field (dimensionless optical depths)."""

    chords: list
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if len(self.chords) != self.values.shape[0]:
            raise ValueError("chord/value length mismatch")
