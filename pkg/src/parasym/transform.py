"""Construction of the point transformation mapping a 6-dimensional equation
to the heat equation.

With K = c2 I^2 + c1 I + c0 and (q2, q1, q0) = (-c2, -c1, -c0), the
transformation is

    t~ = T(t),   x~ = sqrt(T') (I(x) + omega(t)),   u~ = theta(x, t) u,

where T solves the Schwarzian equation {T; t} = -8 q2 (a Moebius ratio over a
two-dimensional solution basis of Omega'' - 4 q2 Omega = 0), omega solves
omega'' - 4 q2 omega = -2 q1, and

    theta = nu(t) exp[-G(x)/2 - A(t) I^2 - (omega' + 4 A omega) I / 2],
    nu(t) = T'^{-1/4} exp[-A omega^2
                          - (1/4) int_0^t (4 q2 omega^2 + omega'^2 - 4 q0) ds],
    A(t)  = T''/(8 T'),   G(x) = int J/sqrt(a) dx.

If u~ solves the heat equation u~_t = u~_xx then u = u~/theta solves the
original equation; the pullback residual test below is the ground truth for
all sign conventions used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from scipy.integrate import quad

from . import expr as E
from .expr import Expr
from .invariants import (Fn1, InvariantTriple, ParabolicEquation, base_point,
                         chebyshev_points, compute_invariants, normalize,
                         probe_window, quadrature_fn1)
from .classify import SymmetryClassification, classify


class NotReducible(Exception):
    """Equation is not 6-dimensional: no transformation to the heat equation."""


class SingularOnInterval(Exception):
    """No admissible Moebius branch free of singularities on the interval."""


class DegenerateTransform(Exception):
    """T' <= 0 or another Jacobian factor degenerated at a requested time."""


T = "t"


# ---------------------------------------------------------------------------
# Schwarzian solutions

@dataclass
class MobiusMap:
    """T(t) = (k1 W1 + k2 W2)/(k3 W1 + k4 W2) over the Omega basis (W1, W2)
    of Omega'' = 4 q2 Omega, satisfying {T; t} = -8 q2 wherever T' != 0.

    branch: 'rational' (q2 = 0, basis (t, 1)), 'exponential' (q2 > 0, basis
    (e^{2 kappa t}, e^{-2 kappa t})), 'trigonometric' (q2 < 0, basis
    (sin 2 kappa t, cos 2 kappa t))."""

    k: tuple
    branch: str
    q2: float
    t_interval: tuple
    expr: Expr = field(default=None)
    _d1: Expr = field(default=None, repr=False)
    _d2: Expr = field(default=None, repr=False)
    _d3: Expr = field(default=None, repr=False)

    def __post_init__(self):
        k1, k2, k3, k4 = self.k
        if abs(k1 * k4 - k2 * k3) < 1e-14:
            raise SingularOnInterval("Moebius determinant vanishes")
        w1, w2 = _omega_basis(self.branch, self.q2)
        num = E.add(E.mul(E.num(k1), w1), E.mul(E.num(k2), w2))
        den = E.add(E.mul(E.num(k3), w1), E.mul(E.num(k4), w2))
        self.expr = E.simplify(E.div(num, den))
        self._d1 = E.differentiate(self.expr, T)
        self._d2 = E.differentiate(self._d1, T)
        self._d3 = E.differentiate(self._d2, T)

    def __call__(self, t):
        return E.evaluate(self.expr, {T: t})

    def d(self, t, order=1):
        e = (self._d1, self._d2, self._d3)[order - 1]
        return E.evaluate(e, {T: t})

    def schwarzian(self, t):
        d1, d2, d3 = self.d(t, 1), self.d(t, 2), self.d(t, 3)
        return d3 / d1 - 1.5 * (d2 / d1) ** 2

    def check(self, n=16):
        """Max |{T;t} + 8 q2| and min T' over n sample times."""
        lo, hi = self.t_interval
        worst, tp_min = 0.0, math.inf
        for t in chebyshev_points(lo, hi, n):
            worst = max(worst, abs(self.schwarzian(t) + 8.0 * self.q2))
            tp_min = min(tp_min, self.d(t, 1))
        return worst, tp_min


def _omega_basis(branch, q2):
    t = E.sym(T)
    if branch == "rational":
        return t, E.ONE
    kappa = math.sqrt(abs(q2))
    arg = E.mul(E.num(2.0 * kappa), t)
    if branch == "exponential":
        return E.exp_(arg), E.exp_(E.neg(arg))
    if branch == "trigonometric":
        return E.fn("sin", arg), E.fn("cos", arg)
    raise ValueError("unknown branch %r" % branch)


def solve_schwarzian(q2, t_interval=None, mode="default"):
    """A MobiusMap with {T; t} = -8 q2 and T' > 0 on t_interval.

    mode='default' picks the everywhere-regular representative when one
    exists; mode='kernel' picks the pole-at-zero representative used for
    fundamental-solution construction (q2 > 0: T = -coth(2 kappa t)/(2 kappa)
    on t > 0; q2 = 0: T = -1/t, the Appell inversion).
    """
    q2 = float(q2)
    if q2 > 0:
        kappa = math.sqrt(q2)
        if t_interval is None:
            t_interval = (0.05, 1.0) if mode == "kernel" else (-0.5, 0.5)
        if mode == "kernel":
            # -coth(2 kappa t)/(2 kappa): T' = csch^2 > 0, pole at t=0
            cands = [(-1 / (2 * kappa), -1 / (2 * kappa), 1.0, -1.0)]
        else:
            # tanh(2 kappa t)/(2 kappa): T' = sech^2 > 0 everywhere
            cands = [(1 / (2 * kappa), -1 / (2 * kappa), 1.0, 1.0),
                     (-1 / (2 * kappa), -1 / (2 * kappa), 1.0, -1.0)]
        branch = "exponential"
    elif q2 < 0:
        kappa = math.sqrt(-q2)
        width = math.pi / (8 * kappa)
        if t_interval is None:
            t_interval = (-0.45 * width, 0.45 * width)
        # tan(2 kappa (t - tm))/(2 kappa) for a few pole offsets tm
        cands = []
        for tm in (0.0, width, -width, 2 * width, -2 * width):
            cs, sn = math.cos(2 * kappa * tm), math.sin(2 * kappa * tm)
            # tan(2k t - 2k tm) = (sin cs - cos sn)/(cos cs + sin sn) over
            # basis (sin 2kt, cos 2kt)
            cands.append((cs / (2 * kappa), -sn / (2 * kappa), sn, cs))
        branch = "trigonometric"
    else:
        if t_interval is None:
            t_interval = (0.05, 1.0) if mode == "kernel" else (-0.5, 0.5)
        if mode == "kernel":
            cands = [(0.0, -1.0, 1.0, 0.0)]  # T = -1/t
        else:
            cands = [(1.0, 0.0, 0.0, 1.0), (0.0, -1.0, 1.0, 0.0)]
        branch = "rational"

    last = None
    for k in cands:
        try:
            m = MobiusMap(k, branch, q2, tuple(t_interval))
            worst, tp_min = m.check()
            if worst <= 1e-8 * (1 + 8 * abs(q2)) and tp_min > 0:
                return m
            last = (worst, tp_min)
        except (E.DomainError, ZeroDivisionError):
            continue
    raise SingularOnInterval(
        "no admissible branch on %s (last residual/T'min: %s)"
        % (t_interval, last))


# ---------------------------------------------------------------------------
# antiderivatives in x for the multiplier exponent

def antiderivative_x(e, var="x"):
    """Closed-form antiderivative of e in var from a small rule table,
    or None."""
    e = E.simplify(e)
    out = _anti(e, var)
    return E.simplify(out) if out is not None else None


def _anti(e, var):
    x = E.sym(var)
    if not E.contains_symbol(e, var):
        return E.mul(e, x)
    if e.kind == "add":
        parts = []
        for a in e.args:
            p = _anti(a, var)
            if p is None:
                return None
            parts.append(p)
        return Expr("add", parts)
    if e.kind == "mul":
        const, rest = [], []
        for f in e.args:
            (const if not E.contains_symbol(f, var) else rest).append(f)
        if const and rest:
            inner = rest[0] if len(rest) == 1 else Expr("mul", rest)
            p = _anti(E.simplify(inner), var)
            if p is None:
                return None
            return Expr("mul", const + [p])
        poly = _linpoly(e, var)
        if poly is not None:
            return _anti_poly(poly, x)
        return None
    if e.kind == "sym" and e.value == var:
        return E.mul(E.HALF, E.pow_(x, 2))
    if e.kind == "pow":
        b, ex = e.args
        lin = _linpoly(b, var)
        if lin is None or not E.is_num(ex):
            poly = _linpoly(e, var)
            return _anti_poly(poly, x) if poly is not None else None
        beta, alpha = lin
        g = ex.value
        if g == -1:
            return E.div(E.log_(E.fn("abs", b)), E.num(alpha))
        gp1 = g + 1 if not isinstance(g, float) else g + 1.0
        return E.div(E.pow_(b, E.num(gp1)), E.mul(E.num(alpha), E.num(gp1)))
    if e.kind in ("exp", "sin", "cos", "sinh", "cosh", "tanh"):
        lin = _linpoly(e.args[0], var)
        if lin is None:
            return None
        _, alpha = lin
        inner = e.args[0]
        table = {
            "exp": E.exp_(inner),
            "sin": E.neg(E.fn("cos", inner)),
            "cos": E.fn("sin", inner),
            "sinh": E.fn("cosh", inner),
            "cosh": E.fn("sinh", inner),
            "tanh": E.log_(E.fn("cosh", inner)),
        }
        return E.div(table[e.kind], E.num(alpha))
    poly = _linpoly(e, var)
    if poly is not None:
        return _anti_poly(poly, x)
    return None


def _linpoly(e, var):
    """[const, slope] when e is a degree<=1 polynomial with var-free coeffs."""
    coeffs = E.as_polynomial(e, var)
    if coeffs is None or len(coeffs) > 2:
        return _numpoly_any(e, var)
    vals = []
    for c in coeffs:
        if E.free_symbols(c) - set(E.DEFAULT_BINDINGS):
            return None
        vals.append(E.evaluate(c, {}))
    if len(vals) == 1:
        vals.append(0.0)
    return None if vals[1] == 0 else vals


def _numpoly_any(e, var):
    return None


def _anti_poly(poly, x):
    beta, alpha = poly
    return E.add(E.mul(E.num(beta), x),
                 E.mul(E.num(alpha), E.HALF, E.pow_(x, 2)))


# ---------------------------------------------------------------------------
# the transform object

def _omega_exprs(q2, q1, source_I0=None):
    """omega(t) solving omega'' - 4 q2 omega = -2 q1; with a source point,
    homogeneous terms are added so omega(0) = -I0 and omega'(0) = 0."""
    t = E.sym(T)
    if q2 != 0:
        wp = q1 / (2.0 * q2)
        omega = E.num(wp)
        if source_I0 is not None:
            amp = -source_I0 - wp
            kappa = math.sqrt(abs(q2))
            arg = E.mul(E.num(2.0 * kappa), t)
            osc = E.fn("cosh", arg) if q2 > 0 else E.fn("cos", arg)
            omega = E.add(omega, E.mul(E.num(amp), osc))
    else:
        omega = E.mul(E.num(-float(q1)), E.pow_(t, 2)) if q1 else E.ZERO
        if source_I0 is not None:
            omega = E.add(omega, E.num(-source_I0))
    return E.simplify(omega)


class HeatTransform:
    """Immutable transformation (T, omega, nu, theta) to the heat equation.

    Built from a dim-6 classification; `source_point` seeds omega for
    fundamental-solution construction (omega(0) = -I(y), omega'(0) = 0).
    """

    def __init__(self, cls, inv, mode="default", t_interval=None,
                 source_point=None, mobius=None):
        if cls.dim != 6:
            raise NotReducible("dim=%d equation cannot be mapped to the heat "
                               "equation" % cls.dim)
        c2 = cls.constants.get("c2", 0.0)
        c1 = cls.constants.get("c1", 0.0)
        c0 = cls.constants.get("c0", 0.0)
        self.q = (-c2, -c1, -c0)
        self.cls = cls
        self.inv = inv
        q2, q1, q0 = self.q
        self.mobius = mobius or solve_schwarzian(q2, t_interval, mode)
        self.t_interval = self.mobius.t_interval
        I0 = None if source_point is None else inv.I(source_point)
        self.source_point = source_point
        self.omega_expr = _omega_exprs(q2, q1, I0)
        self.domega_expr = E.differentiate(self.omega_expr, T) \
            if E.contains_symbol(self.omega_expr, T) else E.ZERO
        # nu-exponent integrand 4 q2 w^2 + w'^2 - 4 q0, as an Expr in t
        self.nu_integrand = E.simplify(E.add(
            E.mul(E.num(4.0 * q2), E.pow_(self.omega_expr, 2)),
            E.pow_(self.domega_expr, 2),
            E.num(-4.0 * q0)))
        self._nu_int_poly = E.as_polynomial(self.nu_integrand, T)
        if self._nu_int_poly is not None and \
                any(E.free_symbols(c) for c in self._nu_int_poly):
            self._nu_int_poly = None
        # G(x) = int J/sqrt(a) dx
        integrand = E.simplify(E.div(inv.J, inv.sqrt_a))
        Gexpr = antiderivative_x(integrand)
        if Gexpr is not None:
            self.G = Fn1(expr=Gexpr, derivative=integrand)
        else:
            self.G = quadrature_fn1(integrand, inv.domain,
                                    base_point(inv.domain))

    # -- scalar pieces ----------------------------------------------------
    def t_tilde(self, t):
        return self.mobius(t)

    def _dT(self, t):
        d1 = self.mobius.d(t, 1)
        if d1 <= 0:
            raise DegenerateTransform("T'(%g) = %g <= 0" % (t, d1))
        return d1

    def A(self, t):
        return self.mobius.d(t, 2) / (8.0 * self._dT(t))

    def omega(self, t):
        return E.evaluate(self.omega_expr, {T: t})

    def domega(self, t):
        return E.evaluate(self.domega_expr, {T: t}) \
            if self.domega_expr is not E.ZERO else 0.0

    @lru_cache(maxsize=4096)
    def _Q(self, t):
        """int_0^t of the nu-exponent integrand."""
        if self._nu_int_poly is not None:
            total = 0.0
            for n, cexpr in enumerate(self._nu_int_poly):
                total += E.evaluate(cexpr, {}) * t ** (n + 1) / (n + 1)
            return total
        f = lambda s: E.evaluate(self.nu_integrand, {T: s})
        val, _ = quad(f, 0.0, t, epsabs=1e-12, epsrel=1e-12, limit=200)
        return val

    def nu(self, t):
        w = self.omega(t)
        return self._dT(t) ** -0.25 * math.exp(
            -self.A(t) * w * w - 0.25 * self._Q(t))

    def x_tilde(self, x, t):
        return math.sqrt(self._dT(t)) * (self.inv.I(x) + self.omega(t))

    def theta(self, x, t):
        Iv = self.inv.I(x)
        At = self.A(t)
        expo = (-0.5 * self.G(x) - At * Iv * Iv
                - 0.5 * (self.domega(t) + 4.0 * At * self.omega(t)) * Iv)
        return self.nu(t) * math.exp(expo)

    def describe(self):
        parts = {
            "T": E.to_text(self.mobius.expr),
            "omega": E.to_text(self.omega_expr),
            "branch": self.mobius.branch,
            "q2": self.q[0], "q1": self.q[1], "q0": self.q[2],
        }
        if self.G.expr is not None:
            parts["G"] = E.to_text(self.G.expr)
        return parts


def build_heat_transform(cls, inv, mode="default", t_interval=None,
                         source_point=None):
    """Construct the transformation for a dim-6 classification.

    Raises NotReducible when cls.dim != 6.
    """
    return HeatTransform(cls, inv, mode=mode, t_interval=t_interval,
                         source_point=source_point)


def map_solution(ht, u_tilde):
    """Pull a heat-equation solution u~(x~, t~) back to a solution
    u(x, t) = u~(x~(x,t), T(t)) / theta(x, t) of the original equation."""
    def u(x, t):
        return u_tilde(ht.x_tilde(x, t), ht.t_tilde(t)) / ht.theta(x, t)
    return u


# ---------------------------------------------------------------------------
# pullback verification

HEAT_SOLUTIONS = (
    ("1", lambda x, t: 1.0),
    ("x", lambda x, t: x),
    ("x^2+2t", lambda x, t: x * x + 2.0 * t),
    ("exp(x+t)", lambda x, t: math.exp(x + t)),
)


def pde_residual(eq, ufun, n=21, t_interval=(0.05, 0.45), window=None,
                 hx=None, ht=None):
    """Max relative residual of u_t - a u_xx - b u_x - c u on an n-by-n grid,
    derivatives by 4th-order central differences."""
    if isinstance(eq, ParabolicEquation):
        a, b, c, _ = normalize(eq)
        domain = eq.domain
    else:
        a, b, c, domain = eq.a, eq.b, eq.c, eq.domain
    lo, hi = window or probe_window(domain)
    t0, t1 = t_interval
    ht = ht or 0.01 * (t1 - t0)
    worst = 0.0
    for i in range(n):
        x = lo + (hi - lo) * i / (n - 1)
        # step adapted to the local scale: stay well away from singular
        # domain endpoints where u may have large higher derivatives
        if hx is None:
            L = 1.0
            if math.isfinite(domain[0]):
                L = min(L, x - domain[0])
            if math.isfinite(domain[1]):
                L = min(L, domain[1] - x)
            hx_loc = 0.02 * L
        else:
            hx_loc = hx
        av = E.evaluate(a, {"x": x})
        bv = E.evaluate(b, {"x": x})
        cv = E.evaluate(c, {"x": x})
        for j in range(n):
            t = t0 + (t1 - t0) * j / (n - 1)
            ut = _d1(lambda s: ufun(x, s), t, ht)
            ux = _d1(lambda s: ufun(s, t), x, hx_loc)
            uxx = _d2(lambda s: ufun(s, t), x, hx_loc)
            uv = ufun(x, t)
            resid = ut - av * uxx - bv * ux - cv * uv
            scale = abs(ut) + abs(av * uxx) + abs(bv * ux) + abs(cv * uv) \
                + abs(uv) + 1.0
            worst = max(worst, abs(resid) / scale)
    return worst


def _d1(f, x, h):
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def _d2(f, x, h):
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x)
            + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)


def verify_pullback(eq, ht=None, solutions=HEAT_SOLUTIONS, n=21):
    """Map each reference heat solution through the transform and measure the
    PDE residual of the result.  Returns {name: residual}."""
    inv = compute_invariants(eq)
    if ht is None:
        cls = classify(inv)
        ht = build_heat_transform(cls, inv)
    lo, hi = ht.t_interval
    span = hi - lo
    t_int = (lo + 0.25 * span, hi - 0.25 * span)
    out = {}
    for name, sol in solutions:
        u = map_solution(ht, sol)
        out[name] = pde_residual(eq, u, n=n, t_interval=t_int)
    return out
