"""Deterministic trajectories and threshold constants.

Three autonomous initial value problems (all started at 0) drive everything
here:

* ``z`` : z' = 2*exp(-z^2) - 4*z^2, the unmatched-edge trajectory of the
  K_{1,1,s} packing process, together with the co-integrated waste integral
  I(t) = int_0^t [z^2 - 1 + exp(-z^2)].
* ``y`` : y' = 6*exp(-y^2) - 4, the triangle-only variant.
* ``that`` : t̂' = exp(-4*t̂^2), the accepted-edge count of the triangle-free
  process.

From their fixed-step RK4 tabulations we evaluate the packing lower-bound
curves ``l_nu`` and ``l_nu_star``, the cover upper-bound curve ``u_tau``, and
solve for the named constants (``zeta``, ``upsilon``, the sparse/dense
sufficiency thresholds, the cover/packing ratio supremum).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backend import kernel

DEFAULT_STEP = 1e-4
DEFAULT_T_MAX = 10.0

CURVE_Z = "z"
CURVE_Y = "y"
CURVE_THAT = "that"
CURVES = (CURVE_Z, CURVE_Y, CURVE_THAT)


# ---------------------------------------------------------------------------
# RK4 tabulation kernels


@kernel
def _rk4_z(h, nsteps, out_z, out_i):
    # Augmented state (z, I): I' = z^2 - 1 + exp(-z^2) is co-integrated so the
    # waste integral inherits RK4 accuracy instead of quadrature error.
    z = 0.0
    acc = 0.0
    out_z[0] = 0.0
    out_i[0] = 0.0
    for k in range(nsteps):
        e1 = math.exp(-z * z)
        k1z = 2.0 * e1 - 4.0 * z * z
        k1i = z * z - 1.0 + e1

        z2 = z + 0.5 * h * k1z
        e2 = math.exp(-z2 * z2)
        k2z = 2.0 * e2 - 4.0 * z2 * z2
        k2i = z2 * z2 - 1.0 + e2

        z3 = z + 0.5 * h * k2z
        e3 = math.exp(-z3 * z3)
        k3z = 2.0 * e3 - 4.0 * z3 * z3
        k3i = z3 * z3 - 1.0 + e3

        z4 = z + h * k3z
        e4 = math.exp(-z4 * z4)
        k4z = 2.0 * e4 - 4.0 * z4 * z4
        k4i = z4 * z4 - 1.0 + e4

        z += (h / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        acc += (h / 6.0) * (k1i + 2.0 * k2i + 2.0 * k3i + k4i)
        out_z[k + 1] = z
        out_i[k + 1] = acc


@kernel
def _rk4_scalar(mode, h, nsteps, out):
    # mode 0: y' = 6*exp(-y^2) - 4 ; mode 1: t̂' = exp(-4*t̂^2)
    y = 0.0
    out[0] = 0.0
    for k in range(nsteps):
        if mode == 0:
            k1 = 6.0 * math.exp(-y * y) - 4.0
            y2 = y + 0.5 * h * k1
            k2 = 6.0 * math.exp(-y2 * y2) - 4.0
            y3 = y + 0.5 * h * k2
            k3 = 6.0 * math.exp(-y3 * y3) - 4.0
            y4 = y + h * k3
            k4 = 6.0 * math.exp(-y4 * y4) - 4.0
        else:
            k1 = math.exp(-4.0 * y * y)
            y2 = y + 0.5 * h * k1
            k2 = math.exp(-4.0 * y2 * y2)
            y3 = y + 0.5 * h * k2
            k3 = math.exp(-4.0 * y3 * y3)
            y4 = y + h * k3
            k4 = math.exp(-4.0 * y4 * y4)
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k + 1] = y


# ---------------------------------------------------------------------------
# Curve tables


@dataclass(frozen=True)
class CurveTable:
    """Dense fixed-step tabulation of one trajectory.

    ``values[k]`` is the trajectory at t = k*step.  For the ``z`` curve,
    ``aux_integral[k]`` holds the co-integrated waste integral I(t).
    """

    which: str
    t_max: float
    step: float
    values: np.ndarray
    aux_integral: np.ndarray | None = None

    def _interp(self, arr: np.ndarray, t: float) -> float:
        if not 0.0 <= t <= self.t_max + 1e-12:
            raise ValueError(f"t={t} outside tabulated range [0, {self.t_max}]")
        x = t / self.step
        last = len(arr) - 1
        i = int(x)
        # center a 4-point Lagrange cubic stencil on the cell; exact at nodes
        i = min(max(i, 1), last - 2)
        s = x - i
        w0 = -s * (s - 1.0) * (s - 2.0) / 6.0
        w1 = (s * s - 1.0) * (s - 2.0) / 2.0
        w2 = -s * (s + 1.0) * (s - 2.0) / 2.0
        w3 = s * (s * s - 1.0) / 6.0
        return w0 * arr[i - 1] + w1 * arr[i] + w2 * arr[i + 1] + w3 * arr[i + 2]

    def eval(self, t: float) -> float:
        return self._interp(self.values, t)

    def eval_aux(self, t: float) -> float:
        if self.aux_integral is None:
            raise ValueError(f"curve {self.which!r} carries no auxiliary integral")
        return self._interp(self.aux_integral, t)


def tabulate(which: str, t_max: float = DEFAULT_T_MAX, step: float = DEFAULT_STEP) -> CurveTable:
    """Tabulate one of the trajectories with classical fixed-step RK4."""
    if which not in CURVES:
        raise ValueError(f"unknown curve {which!r}; expected one of {CURVES}")
    if t_max <= 0.0 or step <= 0.0:
        raise ValueError("t_max and step must be positive")
    nsteps = int(round(t_max / step))
    if nsteps < 4:
        raise ValueError("tabulation needs at least 4 steps")
    t_max = nsteps * step
    values = np.empty(nsteps + 1, dtype=np.float64)
    if which == CURVE_Z:
        aux = np.empty(nsteps + 1, dtype=np.float64)
        _rk4_z(step, nsteps, values, aux)
        return CurveTable(which, t_max, step, values, aux)
    _rk4_scalar(0 if which == CURVE_Y else 1, step, nsteps, values)
    return CurveTable(which, t_max, step, values)


_table_cache: dict[str, CurveTable] = {}


def default_table(which: str) -> CurveTable:
    if which not in _table_cache:
        _table_cache[which] = tabulate(which)
    return _table_cache[which]


# ---------------------------------------------------------------------------
# Root finding


def bisect(f, lo: float, hi: float, iters: int = 200) -> float:
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo < 0.0) == (fhi < 0.0):
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0.0) == (flo < 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(1.0, abs(lo)):
            break
    return 0.5 * (lo + hi)


def zeta() -> float:
    """Limit of z(t): positive root of exp(-x^2) - 2x^2 = 0."""
    return bisect(lambda x: math.exp(-x * x) - 2.0 * x * x, 0.5, 0.7)


def upsilon() -> float:
    """Limit of y(t): positive root of 6*exp(-y^2) - 4 = 0, i.e. sqrt(ln 1.5)."""
    return bisect(lambda y: 6.0 * math.exp(-y * y) - 4.0, 0.6, 0.7)


# ---------------------------------------------------------------------------
# Bound curves


def l_nu(c: float, table: CurveTable | None = None) -> float:
    """Scaled packing lower bound (c - z(c)/2 - 2*I(c)) / 3."""
    if c < 0.0:
        raise ValueError("c must be nonnegative")
    tab = table if table is not None else default_table(CURVE_Z)
    return (c - tab.eval(c) / 2.0 - 2.0 * tab.eval_aux(c)) / 3.0


def l_nu_star(c: float, table: CurveTable | None = None) -> float:
    """Scaled packing lower bound of the triangle-only variant: c/3 - y(c)/6."""
    if c < 0.0:
        raise ValueError("c must be nonnegative")
    tab = table if table is not None else default_table(CURVE_Y)
    return c / 3.0 - tab.eval(c) / 6.0


def u_tau(c: float, table: CurveTable | None = None) -> float:
    """Scaled cover upper bound: min(c/2, c - t̂(c))."""
    if c < 0.0:
        raise ValueError("c must be nonnegative")
    tab = table if table is not None else default_table(CURVE_THAT)
    return min(c / 2.0, c - tab.eval(c))


# ---------------------------------------------------------------------------
# Threshold constants


def threshold_c1() -> float:
    """Sparse-side sufficiency threshold: sqrt(ln 2 / 12).

    Below this density a doubled independent-triangle count dominates the
    one-edge-per-triangle cover, i.e. 2*exp(-12 c^2) >= 1.
    """
    return math.sqrt(math.log(2.0) / 12.0)


def threshold_c2_exact() -> float:
    """Exact break-even of the half-edges cover bound against the linear
    packing bound: c/2 = 2*[c*(1 - 2*zeta^2) - zeta/6]."""
    zt = zeta()
    return (zt / 3.0) / (2.0 * (1.0 - 2.0 * zt * zt) - 0.5)


def threshold_c2() -> float:
    """Dense-side sufficiency threshold as a safe 4-decimal constant.

    Any density above the exact break-even works, so the published constant
    rounds the break-even *up* at the fourth decimal; this returns that
    conservative value (use :func:`threshold_c2_exact` for the raw root).
    """
    return math.ceil(threshold_c2_exact() * 1e4) / 1e4


def _tuza_gap(c: float, tz: CurveTable, tt: CurveTable) -> float:
    return u_tau(c, tt) - 2.0 * l_nu(c, tz)


def tuza_window(
    z_table: CurveTable | None = None, that_table: CurveTable | None = None
) -> tuple[float, float]:
    """Roots of u_tau(c) = 2*l_nu(c) on (0, 10].

    The cover bound stays below twice the packing bound up to the first root,
    exceeds it strictly between the two, and falls below again past the
    second.  The second root is the numerically sharpened dense threshold.
    """
    tz = z_table if z_table is not None else default_table(CURVE_Z)
    tt = that_table if that_table is not None else default_table(CURVE_THAT)
    grid = np.arange(1e-3, 10.0 + 1e-9, 1e-3)
    vals = np.array([_tuza_gap(c, tz, tt) for c in grid])
    roots = []
    for k in range(len(grid) - 1):
        if vals[k] == 0.0:
            roots.append(grid[k])
        elif (vals[k] < 0.0) != (vals[k + 1] < 0.0):
            roots.append(bisect(lambda c: _tuza_gap(c, tz, tt), grid[k], grid[k + 1]))
    if len(roots) < 2:
        raise RuntimeError(f"expected two crossings of u_tau - 2*l_nu, found {roots}")
    return float(roots[0]), float(roots[-1])


def threshold_tf(
    z_table: CurveTable | None = None, that_table: CurveTable | None = None
) -> float:
    """Largest density below which u_tau(c) <= 2*l_nu(c) holds throughout,
    i.e. the onset of the window the curve comparison cannot close."""
    return tuza_window(z_table, that_table)[0]


def ratio_sup(
    y_table: CurveTable | None = None, that_table: CurveTable | None = None
) -> float:
    """Supremum over c of u_tau(c) / l_nu_star(c).

    Grid scan (2000 points on [0.01, 10]) followed by golden-section
    refinement in a +-2 cell window around the grid maximum.
    """
    ty = y_table if y_table is not None else default_table(CURVE_Y)
    tt = that_table if that_table is not None else default_table(CURVE_THAT)

    def ratio(c: float) -> float:
        return u_tau(c, tt) / l_nu_star(c, ty)

    grid = np.linspace(0.01, 10.0, 2000)
    vals = np.array([ratio(c) for c in grid])
    i = int(np.argmax(vals))
    a = grid[max(i - 2, 0)]
    b = grid[min(i + 2, len(grid) - 1)]
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - gr * (b - a)
    x2 = a + gr * (b - a)
    f1, f2 = ratio(x1), ratio(x2)
    for _ in range(120):
        if f1 > f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - gr * (b - a)
            f1 = ratio(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + gr * (b - a)
            f2 = ratio(x2)
        if b - a < 1e-12:
            break
    return float(ratio(0.5 * (a + b)))


# ---------------------------------------------------------------------------
# Codegree family functions


def family_values(z: float, r: int, s: int) -> tuple[float, float, float]:
    """Closed forms (c_r, p_r, q_{r,s}) at a given trajectory value z."""
    if r < 0 or s < 0:
        raise ValueError("family indices must be nonnegative")
    e = math.exp(-z * z)
    rf = math.factorial(r)
    sf = math.factorial(s)
    c_r = e * z ** (2 * r) / rf
    p_r = 2.0 * e * z ** (2 * r + 1) / rf
    q_rs = e * e * z ** (2 * r + 2 * s) / (rf * sf)
    return c_r, p_r, q_rs


def deterministic_families(
    t: float, r: int, s: int, table: CurveTable | None = None
) -> tuple[float, float, float]:
    """(c_r, p_r, q_{r,s}) evaluated at z = z(t)."""
    tab = table if table is not None else default_table(CURVE_Z)
    return family_values(tab.eval(t), r, s)


def _c(z: float, r: int) -> float:
    return math.exp(-z * z) * z ** (2 * r) / math.factorial(r) if r >= 0 else 0.0


def _p(z: float, r: int) -> float:
    return 2.0 * math.exp(-z * z) * z ** (2 * r + 1) / math.factorial(r) if r >= 0 else 0.0


def _q(z: float, r: int, s: int) -> float:
    if r < 0 or s < 0:
        return 0.0
    return math.exp(-2.0 * z * z) * z ** (2 * r + 2 * s) / (math.factorial(r) * math.factorial(s))


def ode_residual(
    t: float, r: int, s: int, table: CurveTable | None = None
) -> tuple[float, float, float]:
    """Residuals of the family evolution identities at time t.

    The left side differentiates the closed forms along z' = 2e^{-z^2}-4z^2;
    the right side is the creation/destruction balance written in terms of
    neighboring families (negative indices contribute 0).  Both sides agree
    identically, so the residuals measure only floating-point error.
    """
    if r < 0 or s < 0:
        raise ValueError("family indices must be nonnegative")
    tab = table if table is not None else default_table(CURVE_Z)
    z = tab.eval(t)
    zp = 2.0 * math.exp(-z * z) - 4.0 * z * z
    e = math.exp(-z * z)
    rf = math.factorial(r)
    sf = math.factorial(s)

    # d/dz of the closed forms (explicit r = 0 / r + s = 0 branches avoid 0 * z^-1)
    if r == 0:
        dc = -2.0 * z * e
    else:
        dc = e * (2.0 * r * z ** (2 * r - 1) - 2.0 * z ** (2 * r + 1)) / rf
    dp = 2.0 * e * ((2 * r + 1) * z ** (2 * r) - 2.0 * z ** (2 * r + 2)) / rf
    if r + s == 0:
        dq = -4.0 * z * e * e
    else:
        dq = e * e * ((2 * r + 2 * s) * z ** (2 * r + 2 * s - 1) - 4.0 * z ** (2 * r + 2 * s + 1)) / (rf * sf)

    p0 = _p(z, 0)
    rhs_c = 2.0 * _c(z, r - 1) * p0 + 8.0 * (r + 1) * _c(z, r + 1) * z - 2.0 * _c(z, r) * (p0 + 4.0 * r * z)
    rhs_p = (
        4.0 * _q(z, r, 0)
        + 2.0 * _p(z, r - 1) * p0
        + 8.0 * (r + 1) * _p(z, r + 1) * z
        - 2.0 * _p(z, r) * (p0 + (4.0 * r + 2.0) * z)
    )
    rhs_q = (
        2.0 * (_q(z, r - 1, s) + _q(z, r, s - 1)) * p0
        + 8.0 * ((r + 1) * _q(z, r + 1, s) + (s + 1) * _q(z, r, s + 1)) * z
        - 4.0 * _q(z, r, s) * (p0 + 2.0 * (r + s) * z)
    )
    return dc * zp - rhs_c, dp * zp - rhs_p, dq * zp - rhs_q


def error_envelope(t: float, n: int) -> float:
    """Concentration envelope exp((100 ln n / ln ln n) * t) * n^(-1/5)."""
    if n < 16:
        raise ValueError("envelope needs n >= 16 (ln ln n must be positive)")
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    rate = 100.0 * math.log(n) / math.log(math.log(n))
    return math.exp(rate * t) * n ** (-0.2)


# ---------------------------------------------------------------------------
# Constant bundle and curve dumps


def constants() -> dict[str, float]:
    return {
        "zeta": zeta(),
        "upsilon": upsilon(),
        "c1": threshold_c1(),
        "c2": threshold_c2(),
        "c2_exact": threshold_c2_exact(),
        "c_tf": threshold_tf(),
        "c_tf_upper": tuza_window()[1],
        "ratio_sup": ratio_sup(),
    }


def curve_grid(c_max: float, spacing: float, step: float = DEFAULT_STEP) -> dict[str, np.ndarray]:
    """Uniform-grid columns t, z, y, that, l_nu, l_nu_star, u_tau."""
    if c_max <= 0.0 or spacing <= 0.0:
        raise ValueError("c_max and spacing must be positive")
    tz = tabulate(CURVE_Z, c_max + step, step)
    ty = tabulate(CURVE_Y, c_max + step, step)
    tt = tabulate(CURVE_THAT, c_max + step, step)
    ts = np.round(np.arange(0.0, c_max + spacing / 2.0, spacing), 12)
    cols = {
        "t": ts,
        "z": np.array([tz.eval(t) for t in ts]),
        "y": np.array([ty.eval(t) for t in ts]),
        "that": np.array([tt.eval(t) for t in ts]),
        "l_nu": np.array([l_nu(t, tz) for t in ts]),
        "l_nu_star": np.array([l_nu_star(t, ty) for t in ts]),
        "u_tau": np.array([u_tau(t, tt) for t in ts]),
    }
    return cols


def write_curve_csv(path, c_max: float, spacing: float, step: float = DEFAULT_STEP) -> None:
    cols = curve_grid(c_max, spacing, step)
    names = ["t", "z", "y", "that", "l_nu", "l_nu_star", "u_tau"]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(names) + "\n")
        for k in range(len(cols["t"])):
            fh.write(",".join(repr(float(cols[name][k])) for name in names) + "\n")
