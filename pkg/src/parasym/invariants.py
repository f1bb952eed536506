"""Semi-invariants of u_t = a(x) u_xx + b(x) u_x + c(x) u.

With s(x) = sqrt(a), the three quantities are

    I(x) = integral dx / s(x)
    J(x) = s'(x) - b(x)/s(x)
    K(x) = (1/2) s J' - (1/4) J^2 + c

J and K are always produced symbolically.  I is symbolic when 1/s matches a
small antiderivative pattern table (reciprocal quadratic, power of a linear
factor, exponential); otherwise it is an adaptive-quadrature sampler anchored
at a base point.  The additive constant of I is a free gauge; downstream
classification is invariant under I -> I + s0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from scipy.integrate import quad

from . import expr as E
from .expr import Expr, DomainError


class NonparabolicError(Exception):
    """Diffusion coefficient vanishes or changes sign on the domain."""


class UnsupportedCoefficient(Exception):
    """Coefficient outside the time-autonomous class handled here."""


class DegenerateTransform(Exception):
    """A Jacobian factor (T', X_x, or theta) vanished on the probed grid."""


VAR = "x"


# ---------------------------------------------------------------------------
# equations

@dataclass
class ParabolicEquation:
    """The triple (a, b, c) with an open spatial domain.

    `bindings` maps named constants appearing in the coefficient expressions
    to numeric values; they are substituted before any numeric work.
    Backward-parabolic input (a < 0 on the domain) is normalized to forward
    by t -> -t, i.e. (a, b, c) -> (-a, -b, -c).
    """

    a: Expr
    b: Expr
    c: Expr
    domain: tuple = (-math.inf, math.inf)
    time_direction: str = "forward"
    bindings: dict = field(default_factory=dict)

    def bound_coefficients(self):
        sub = dict(self.bindings)
        out = []
        for e in (self.a, self.b, self.c):
            out.append(E.substitute(E.to_expr(e), sub))
        return tuple(out)

    @staticmethod
    def from_program(prog):
        """Build from a ParsedProgram (see parser module)."""
        missing = [k for k in ("a", "b", "c") if k not in prog.assignments]
        if missing:
            raise UnsupportedCoefficient(
                "equation file must assign a, b, c (missing %s)" % ", ".join(missing))
        var = prog.variables[0] if prog.variables else VAR
        sub = {} if var == VAR else {var: E.sym(VAR)}
        a, b, c = (E.substitute(prog.assignments[k], sub) for k in ("a", "b", "c"))
        domain = prog.domain or (-math.inf, math.inf)
        td = "forward"
        return ParabolicEquation(a, b, c, domain, td, dict(prog.constants))


def probe_window(domain):
    """Finite sampling window inset from the domain boundaries."""
    lo, hi = domain
    if math.isinf(lo) and math.isinf(hi):
        return (-4.0, 4.0)
    if math.isinf(hi):
        return (lo + 0.15, lo + 5.0)
    if math.isinf(lo):
        return (hi - 5.0, hi - 0.15)
    w = hi - lo
    return (lo + 0.05 * w, hi - 0.05 * w)


def chebyshev_points(lo, hi, n):
    pts = []
    for i in range(n):
        theta = math.pi * (2 * i + 1) / (2 * n)
        pts.append(0.5 * (lo + hi) + 0.5 * (hi - lo) * math.cos(theta))
    return sorted(pts)


def base_point(domain):
    lo, hi = domain
    if math.isinf(lo) and math.isinf(hi):
        return 0.0
    if math.isinf(hi):
        return lo + 1.0
    if math.isinf(lo):
        return hi - 1.0
    return 0.5 * (lo + hi)


def normalize(eq):
    """Substitute bindings and normalize time direction.

    Returns (a, b, c, flipped) with a > 0 on the probe window.
    Raises NonparabolicError if a vanishes or changes sign at the 32 sample
    points, UnsupportedCoefficient on time dependence or unbound symbols.
    """
    a, b, c = eq.bound_coefficients()
    for e in (a, b, c):
        free = E.free_symbols(e) - {VAR} - set(E.DEFAULT_BINDINGS)
        if "t" in free:
            raise UnsupportedCoefficient(
                "time-dependent coefficients are outside the time-autonomous class")
        if free:
            raise E.UnboundIdentifier(", ".join(sorted(free)))
    lo, hi = probe_window(eq.domain)
    signs = set()
    for x in chebyshev_points(lo, hi, 32):
        try:
            v = E.evaluate(a, {VAR: x})
        except DomainError as exc:
            raise NonparabolicError("a undefined at x=%g: %s" % (x, exc)) from exc
        if v == 0.0:
            raise NonparabolicError("a vanishes at x=%g" % x)
        signs.add(v > 0)
    if len(signs) != 1:
        raise NonparabolicError("a changes sign on the domain")
    flipped = not signs.pop()
    if flipped:
        # backward equation: t -> -t
        a, b, c = (E.simplify(E.mul(E.MINUS_ONE, e)) for e in (a, b, c))
    return a, b, c, flipped


def fokker_planck_equation(p, q, domain=(-math.inf, math.inf), bindings=None):
    """u_t = (p u_x)_x + (q u)_x as a ParabolicEquation:
    a = p, b = p' + q, c = q'."""
    p = E.to_expr(p)
    q = E.to_expr(q)
    b = E.simplify(E.add(E.differentiate(p, VAR), q))
    c = E.differentiate(q, VAR)
    return ParabolicEquation(E.simplify(p), b, c, domain, "forward",
                             dict(bindings or {}))


# ---------------------------------------------------------------------------
# one-variable function values (symbolic or sampled)

class Fn1:
    """A function of one variable: symbolic Expr, or a quadrature sampler
    of a known derivative anchored at x_ref.  Pure: concurrent evaluation
    equals serial evaluation."""

    def __init__(self, expr=None, sampler=None, derivative=None, x_ref=None,
                 var=VAR):
        if expr is None and sampler is None:
            raise ValueError("Fn1 needs an expression or a sampler")
        self.expr = expr
        self._sampler = sampler
        self.derivative = derivative
        self.x_ref = x_ref
        self.var = var

    @property
    def symbolic(self):
        return self.expr is not None

    def __call__(self, x):
        if self.expr is not None:
            return E.evaluate(self.expr, {self.var: float(x)})
        return self._sampler(float(x))

    def d(self, x):
        """First derivative value."""
        if self.derivative is not None:
            return E.evaluate(self.derivative, {self.var: float(x)})
        h = 1e-6 * max(1.0, abs(x))
        return (self(x + h) - self(x - h)) / (2 * h)

    def __repr__(self):
        if self.expr is not None:
            return "Fn1<%s>" % E.to_text(self.expr)
        return "Fn1<quadrature from x_ref=%g>" % self.x_ref


def quadrature_fn1(derivative_expr, domain, x_ref, var=VAR):
    """Antiderivative of `derivative_expr` from x_ref by adaptive quadrature
    (abs tol 1e-10), insetting 1e-8 from singular domain endpoints."""
    lo, hi = domain
    inset_lo = lo + 1e-8 if math.isfinite(lo) else -math.inf
    inset_hi = hi - 1e-8 if math.isfinite(hi) else math.inf

    def f(x):
        return E.evaluate(derivative_expr, {var: x})

    @lru_cache(maxsize=65536)
    def sampler(x):
        x = min(max(x, inset_lo), inset_hi)
        val, _err = quad(f, x_ref, x, epsabs=1e-10, epsrel=1e-10, limit=200)
        return val

    return Fn1(sampler=sampler, derivative=derivative_expr, x_ref=x_ref, var=var)


# ---------------------------------------------------------------------------
# sqrt(a) in structural form

def symbolic_sqrt(a, window):
    """An Expr s with s^2 = a and s > 0 on the window, unwrapping powers and
    products where the sign can be decided by sampling."""
    a = E.simplify(a)
    s = _sqrt_try(a, window)
    if s is None:
        s = E.simplify(E.pow_(a, E.HALF))
    return s


def _sign_on(e, window):
    lo, hi = window
    signs = set()
    for x in chebyshev_points(lo, hi, 9):
        try:
            v = E.evaluate(e, {VAR: x})
        except DomainError:
            return 0
        if v == 0:
            return 0
        signs.add(v > 0)
    if len(signs) != 1:
        return 0
    return 1 if signs.pop() else -1


def _half(ev):
    v = ev.value
    if isinstance(v, Fraction):
        return E.num(v / 2)
    return E.num(v / 2.0)


def _sqrt_try(a, window):
    if a.kind == "num":
        if a.value < 0:
            return None
        return E.simplify(E.pow_(a, E.HALF))
    if a.kind == "pow" and E.is_num(a.args[1]):
        u, ev = a.args
        sgn = _sign_on(u, window)
        if sgn > 0:
            return E.simplify(E.pow_(u, _half(ev)))
        if sgn < 0:
            v = ev.value
            even = isinstance(v, Fraction) and v.denominator == 1 and v % 2 == 0
            if even:
                return E.simplify(E.pow_(E.mul(E.MINUS_ONE, u), _half(ev)))
        return None
    if a.kind == "mul":
        parts = []
        for f in a.args:
            sf = _sqrt_try(f, window)
            if sf is None:
                return None
            parts.append(sf)
        return E.simplify(Expr("mul", parts))
    sgn = _sign_on(a, window)
    if sgn > 0:
        return E.simplify(E.pow_(a, E.HALF))
    return None


# ---------------------------------------------------------------------------
# antiderivative pattern table for 1/s

def _numeric_poly(e, var=VAR):
    coeffs = E.as_polynomial(e, var)
    if coeffs is None:
        return None
    out = []
    for c in coeffs:
        if c.kind == "num":
            out.append(c.value)
        elif not E.free_symbols(c) - set(E.DEFAULT_BINDINGS):
            try:
                out.append(E.evaluate(c, {}))
            except DomainError:
                return None
        else:
            return None
    return out


def _sqrt_value(v):
    """Exact sqrt when possible, else float."""
    if isinstance(v, Fraction):
        r = E._exact_root(v, 2)
        if r is not None:
            return E.num(r)
    return E.num(math.sqrt(float(v)))


def antiderivative_recip(s, window):
    """F(x) with F' = 1/s(x), from the pattern table, or None.

    Covers: s a polynomial of degree <= 2, s = C*(alpha x + beta)^g, and
    s = C*exp(lambda x + m).
    """
    s = E.simplify(s)
    x = E.sym(VAR)
    poly = _numeric_poly(s)
    if poly is not None and len(poly) <= 3:
        return _recip_poly_antideriv(poly, x)
    C, core = _split_constant(s)
    if core.kind == "pow" and E.is_num(core.args[1]):
        lin = _numeric_poly(core.args[0])
        if lin is not None and len(lin) == 2 and lin[1] != 0:
            return _recip_power_antideriv(C, lin, core.args[1].value, core.args[0], x)
    if core.kind == "exp":
        lin = _numeric_poly(core.args[0])
        if lin is not None and len(lin) == 2 and lin[1] != 0:
            lam = lin[1]
            # int dx / (C e^{lam x + m}) = -exp(-(lam x + m)) / (C lam)
            inner = E.simplify(E.mul(E.MINUS_ONE, core.args[0]))
            return E.simplify(E.div(E.mul(E.MINUS_ONE, E.exp_(inner)),
                                    E.mul(E.num(C), E.num(lam))))
    return None


def _split_constant(s):
    if s.kind == "mul":
        const_parts, rest = [], []
        for f in s.args:
            if not E.free_symbols(f) - set(E.DEFAULT_BINDINGS):
                const_parts.append(f)
            else:
                rest.append(f)
        if const_parts and rest:
            try:
                C = E.evaluate(Expr("mul", const_parts), {})
            except DomainError:
                return Fraction(1), s
            core = rest[0] if len(rest) == 1 else Expr("mul", rest)
            return C, core
    return Fraction(1), s


def _recip_poly_antideriv(poly, x):
    if len(poly) == 1:
        (g,) = poly
        return E.simplify(E.div(x, E.num(g)))
    if len(poly) == 2:
        g, bco = poly
        # int dx/(b x + g) = log|b x + g| / b
        u = E.simplify(E.add(E.mul(E.num(bco), x), E.num(g)))
        return E.simplify(E.div(E.log_(E.fn("abs", u)), E.num(bco)))
    g, bco, al = poly
    if al == 0:
        return _recip_poly_antideriv([g, bco], x)
    disc = bco * bco - 4 * al * g
    w = E.simplify(E.add(E.mul(E.num(2 * al), x), E.num(bco)))  # 2a x + b
    if disc == 0:
        return E.simplify(E.div(E.num(-2), w))
    if (disc < 0) if not isinstance(disc, float) else disc < 0:
        rt = _sqrt_value(-disc)
        return E.simplify(E.mul(E.div(E.num(2), rt),
                                E.fn("arctan", E.div(w, rt))))
    rt = _sqrt_value(disc)
    ratio = E.div(E.add(w, E.neg(rt)), E.add(w, rt))
    return E.simplify(E.div(E.log_(E.fn("abs", ratio)), rt))


def _recip_power_antideriv(C, lin, g, u, x):
    beta, alpha = lin
    if (isinstance(g, Fraction) and g == 1) or g == 1.0:
        return E.simplify(E.div(E.log_(E.fn("abs", u)),
                                E.mul(E.num(C), E.num(alpha))))
    one_minus_g = (1 - g) if isinstance(g, Fraction) else 1.0 - g
    denom = E.mul(E.num(C), E.num(alpha), E.num(one_minus_g))
    return E.simplify(E.div(E.pow_(u, E.num(one_minus_g)), denom))


# ---------------------------------------------------------------------------
# the invariant triple

@dataclass
class InvariantTriple:
    I: Fn1
    J: Expr
    K: Expr
    symbolic_I: bool
    sqrt_a: Expr
    a: Expr
    b: Expr
    c: Expr
    domain: tuple
    flipped: bool


def compute_invariants(eq):
    """I, J, K of a time-autonomous parabolic equation.

    J and K are symbolic; I is symbolic when 1/sqrt(a) matches the pattern
    table, otherwise a quadrature sampler anchored at the domain base point.
    """
    a, b, c, flipped = normalize(eq)
    window = probe_window(eq.domain)
    s = symbolic_sqrt(a, window)
    sp = E.differentiate(s, VAR)
    J = E.simplify(E.add(sp, E.neg(E.div(b, s))))
    Jp = E.differentiate(J, VAR)
    K = E.simplify(E.add(E.mul(E.HALF, s, Jp),
                         E.mul(E.num(Fraction(-1, 4)), E.pow_(J, 2)),
                         c))
    recip = E.simplify(E.div(E.ONE, s))
    F = antiderivative_recip(s, window)
    if F is not None:
        I = Fn1(expr=F, derivative=recip)
    else:
        I = quadrature_fn1(recip, eq.domain, base_point(eq.domain))
    return InvariantTriple(I=I, J=J, K=K, symbolic_I=F is not None,
                           sqrt_a=s, a=a, b=b, c=c, domain=eq.domain,
                           flipped=flipped)


# ---------------------------------------------------------------------------
# equivalence-transformation oracle

class Fn2:
    """Function of (x, t): symbolic Expr over {x, t} or a plain callable.
    Derivatives are symbolic when an Expr is given, else 2nd-order central
    differences at h = 1e-5."""

    _H = 1e-5

    def __init__(self, expr=None, f=None):
        if expr is None and f is None:
            raise ValueError("Fn2 needs an expression or a callable")
        self.expr = E.simplify(E.to_expr(expr)) if expr is not None else None
        self._f = f

    def __call__(self, x, t):
        if self.expr is not None:
            return E.evaluate(self.expr, {"x": x, "t": t})
        return self._f(x, t)

    def _fd(self, x, t, dx, dt):
        h = self._H
        if dx == 1 and dt == 0:
            return (self(x + h, t) - self(x - h, t)) / (2 * h)
        if dx == 0 and dt == 1:
            return (self(x, t + h) - self(x, t - h)) / (2 * h)
        if dx == 2 and dt == 0:
            return (self(x + h, t) - 2 * self(x, t) + self(x - h, t)) / (h * h)
        raise ValueError("unsupported derivative order")

    def d(self, x, t, dx=0, dt=0):
        if self.expr is not None:
            e = self.expr
            if dx:
                e = E.differentiate(e, "x", dx)
            if dt:
                e = E.differentiate(e, "t", dt)
            return E.evaluate(e, {"x": x, "t": t})
        return self._fd(x, t, dx, dt)


def transformed_coefficients(eq, T, X, theta):
    """Numeric samplers (a~, b~, c~)(x, t) for the equivalence transformation
    t~ = T(t), x~ = X(x,t), u~ = theta(x,t) u:

        a~ = X_x^2/T' * a
        b~ = X_x/T' * [b - 2a theta_x/theta + a X_xx/X_x - X_t/X_x]
        c~ = 1/T' * [c - b theta_x/theta + 2a (theta_x/theta)^2
                     - a theta_xx/theta + theta_t/theta]

    Verification oracle only; raises DegenerateTransform when a Jacobian
    factor vanishes at a probed point.
    """
    a, b, c, _ = normalize(eq)

    def coeff(x):
        return (E.evaluate(a, {VAR: x}), E.evaluate(b, {VAR: x}),
                E.evaluate(c, {VAR: x}))

    def jacobians(x, t):
        Tp = T.d(t)
        Xx = X.d(x, t, dx=1)
        th = theta(x, t)
        if abs(Tp) < 1e-12 or abs(Xx) < 1e-12 or abs(th) < 1e-12:
            raise DegenerateTransform(
                "T'=%g, X_x=%g, theta=%g at (x=%g, t=%g)" % (Tp, Xx, th, x, t))
        return Tp, Xx, th

    def a_t(x, t):
        av, _, _ = coeff(x)
        Tp, Xx, _ = jacobians(x, t)
        return Xx * Xx / Tp * av

    def b_t(x, t):
        av, bv, _ = coeff(x)
        Tp, Xx, th = jacobians(x, t)
        gx = theta.d(x, t, dx=1) / th
        return Xx / Tp * (bv - 2 * av * gx + av * X.d(x, t, dx=2) / Xx
                          - X.d(x, t, dt=1) / Xx)

    def c_t(x, t):
        av, bv, cv = coeff(x)
        Tp, _, th = jacobians(x, t)
        gx = theta.d(x, t, dx=1) / th
        return (cv - bv * gx + 2 * av * gx * gx
                - av * theta.d(x, t, dx=2) / th
                + theta.d(x, t, dt=1) / th) / Tp

    return a_t, b_t, c_t


def numeric_invariant_K(afun, bfun, cfun, x, h=1e-4):
    """K at x from numeric coefficient samplers, via central differences."""
    def s(z):
        return math.sqrt(afun(z))

    def J(z):
        sp = (s(z + h) - s(z - h)) / (2 * h)
        return sp - bfun(z) / s(z)

    Jp = (J(x + h) - J(x - h)) / (2 * h)
    return 0.5 * s(x) * Jp - 0.25 * J(x) ** 2 + cfun(x)
