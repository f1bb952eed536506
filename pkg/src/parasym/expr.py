"""Immutable symbolic expression trees with the small closed grammar used
throughout the package: rational/float constants, named constants, one or more
variables, +, *, ^, and a fixed set of elementary functions.

Everything here is a pure function of immutable values; trees are safe to share
between threads.  `simplify` produces a canonical-ish normal form (sums and
products flattened, numeric parts folded, children sorted by a deterministic
key) and is idempotent.  Zero-testing and polynomial matching first try exact
coefficient extraction and fall back to deterministic-point sampling.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction


class ExprError(Exception):
    pass


class DomainError(ExprError):
    """Evaluation left the real domain (log of non-positive, 0^negative, ...)."""


class UnboundIdentifier(ExprError):
    pass


FUNCTIONS = (
    "exp", "log", "sin", "cos", "tan", "sinh", "cosh", "tanh",
    "arctan", "arctanh", "sqrt", "abs",
)

_KIND_RANK = {"num": 0, "sym": 1}


class Expr:
    """One node of an expression tree.

    kind: 'num' | 'sym' | 'add' | 'mul' | 'pow' | 'neg' | 'div' | one of
    FUNCTIONS | 'besseli' (internal, not parseable).
    """

    __slots__ = ("kind", "args", "value", "_hash", "_key")

    def __init__(self, kind, args=(), value=None):
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "args", tuple(args))
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "_hash", None)
        object.__setattr__(self, "_key", None)

    def __setattr__(self, name, value):
        raise AttributeError("Expr is immutable")

    def __hash__(self):
        h = object.__getattribute__(self, "_hash")
        if h is None:
            h = hash((self.kind, self.args, self.value))
            object.__setattr__(self, "_hash", h)
        return h

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        return (self.kind == other.kind and self.value == other.value
                and self.args == other.args)

    def __repr__(self):
        return "Expr<%s>" % to_text(self)

    # convenience arithmetic for building trees in code
    def __add__(self, other):
        return add(self, to_expr(other))

    def __radd__(self, other):
        return add(to_expr(other), self)

    def __sub__(self, other):
        return add(self, mul(num(-1), to_expr(other)))

    def __rsub__(self, other):
        return add(to_expr(other), mul(num(-1), self))

    def __mul__(self, other):
        return mul(self, to_expr(other))

    def __rmul__(self, other):
        return mul(to_expr(other), self)

    def __truediv__(self, other):
        return div(self, to_expr(other))

    def __rtruediv__(self, other):
        return div(to_expr(other), self)

    def __pow__(self, other):
        return pow_(self, to_expr(other))

    def __neg__(self):
        return neg(self)


# ---------------------------------------------------------------------------
# constructors

def num(v):
    if isinstance(v, bool):
        raise TypeError("bool is not a number")
    if isinstance(v, int):
        v = Fraction(v)
    if isinstance(v, Fraction) or isinstance(v, float):
        return Expr("num", (), v)
    raise TypeError("unsupported numeric payload %r" % (v,))


ZERO = num(0)
ONE = num(1)
MINUS_ONE = num(-1)
HALF = num(Fraction(1, 2))


def sym(name):
    return Expr("sym", (), name)


def to_expr(v):
    if isinstance(v, Expr):
        return v
    if isinstance(v, str):
        return sym(v)
    return num(v)


def add(*args):
    return Expr("add", [to_expr(a) for a in args])


def mul(*args):
    return Expr("mul", [to_expr(a) for a in args])


def pow_(b, e):
    return Expr("pow", (to_expr(b), to_expr(e)))


def neg(e):
    return Expr("neg", (to_expr(e),))


def div(a, b):
    return Expr("div", (to_expr(a), to_expr(b)))


def fn(name, arg):
    if name not in FUNCTIONS:
        raise ValueError("unknown function %r" % name)
    return Expr(name, (to_expr(arg),))


def exp_(e):
    return fn("exp", e)


def log_(e):
    return fn("log", e)


def sqrt_(e):
    return fn("sqrt", e)


def besseli(nu, z):
    """Modified Bessel I_nu(z) node (internal; order must be numeric)."""
    return Expr("besseli", (to_expr(nu), to_expr(z)))


def is_num(e, v=None):
    if e.kind != "num":
        return False
    return True if v is None else e.value == v


# ---------------------------------------------------------------------------
# deterministic ordering

def sort_key(e):
    k = object.__getattribute__(e, "_key")
    if k is None:
        if e.kind == "num":
            k = (0, "", float(e.value), ())
        elif e.kind == "sym":
            k = (1, e.value, 0.0, ())
        else:
            k = (2, e.kind, 0.0, tuple(sort_key(a) for a in e.args))
        object.__setattr__(e, "_key", k)
    return k


# ---------------------------------------------------------------------------
# simplification

def _fold_pow(b, e):
    """Exact numeric power, or None if it cannot be done exactly/safely."""
    bv, ev = b.value, e.value
    if isinstance(bv, Fraction) and isinstance(ev, Fraction):
        if ev.denominator == 1:
            n = int(ev)
            if abs(n) > 64:
                return None
            if bv == 0 and n < 0:
                return None
            try:
                return num(bv ** n)
            except (OverflowError, ZeroDivisionError):
                return None
        # fractional exponent: exact only for perfect roots of nonnegatives
        if bv < 0:
            return None
        root = _exact_root(bv, ev.denominator)
        if root is None:
            return None
        return _fold_pow(num(root), num(Fraction(ev.numerator)))
    # at least one float: fold numerically
    try:
        r = float(bv) ** float(ev)
    except (OverflowError, ValueError, ZeroDivisionError):
        return None
    if isinstance(r, complex) or not math.isfinite(r):
        return None
    return num(r)


def _exact_root(q, n):
    """q**(1/n) as an exact Fraction, or None."""
    def iroot(m):
        if m < 0:
            return None
        r = round(m ** (1.0 / n)) if m > 0 else 0
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand ** n == m:
                return cand
        return None

    a = iroot(q.numerator)
    b = iroot(q.denominator)
    if a is None or b is None:
        return None
    return Fraction(a, b)


def _make_pow(b, e):
    """pow with local rewrites; children already simplified."""
    if is_num(e):
        if e.value == 0:
            return ONE
        if e.value == 1:
            return b
    if is_num(b):
        if b.value == 1:
            return ONE
        if b.value == 0 and is_num(e) and e.value > 0:
            return ZERO
        if is_num(e):
            folded = _fold_pow(b, e)
            if folded is not None:
                return folded
    if b.kind == "pow" and is_num(b.args[1]) and is_num(e):
        inner = b.args[1]
        # (u^p)^q -> u^(pq) when q is an integer (always valid)
        if isinstance(e.value, Fraction) and e.value.denominator == 1:
            return _make_pow(b.args[0], _mul_nums(inner, e))
    if (b.kind == "mul" and b.args and is_num(b.args[0]) and is_num(e)
            and isinstance(e.value, Fraction) and e.value.denominator == 1):
        # (c*rest)^n -> c^n * rest^n for integer n
        c = _fold_pow(b.args[0], e)
        if c is not None:
            rest = b.args[1:]
            rest_e = rest[0] if len(rest) == 1 else Expr("mul", rest)
            return _simplify_mul([c, _make_pow(rest_e, e)])
    return Expr("pow", (b, e))


def _mul_nums(a, b):
    v = a.value * b.value
    if isinstance(v, Fraction):
        return num(v)
    return num(float(v))


def _coeff_split(t):
    """term -> (numeric coefficient, rest Expr or None for pure numbers)."""
    if t.kind == "num":
        return t.value, None
    if t.kind == "mul" and t.args and is_num(t.args[0]):
        rest = t.args[1:]
        if not rest:
            return t.args[0].value, None
        return t.args[0].value, (rest[0] if len(rest) == 1 else Expr("mul", rest))
    return Fraction(1), t


def _num_add(a, b):
    r = a + b
    return r if isinstance(r, Fraction) else float(r)


def _rebuild_term(coeff, rest):
    if rest is None:
        return num(coeff)
    if coeff == 1:
        return rest
    if coeff == 0:
        return ZERO
    if rest.kind == "mul":
        return Expr("mul", (num(coeff),) + rest.args)
    return Expr("mul", (num(coeff), rest))


def _simplify_add(args):
    terms = []
    const = Fraction(0)
    for a in args:
        if a.kind == "add":
            terms.extend(a.args)
        else:
            terms.append(a)
    coeffs = {}
    order = []
    for t in terms:
        if t.kind == "num":
            const = _num_add(const, t.value)
            continue
        c, rest = _coeff_split(t)
        if rest is None:
            const = _num_add(const, c)
            continue
        if rest not in coeffs:
            coeffs[rest] = c
            order.append(rest)
        else:
            coeffs[rest] = _num_add(coeffs[rest], c)
    out = []
    for rest in order:
        c = coeffs[rest]
        if c == 0:
            continue
        out.append(_rebuild_term(c, rest))
    out.sort(key=sort_key)
    if const != 0 or not out:
        out.insert(0, num(const))
    if len(out) == 1:
        return out[0]
    return Expr("add", out)


def _simplify_mul(args):
    factors = []
    const = Fraction(1)
    stack = list(args)
    while stack:
        a = stack.pop(0)
        if a.kind == "mul":
            stack = list(a.args) + stack
        elif a.kind == "num":
            v = const * a.value
            const = v if isinstance(v, Fraction) else float(v)
        else:
            factors.append(a)
    if const == 0:
        return ZERO
    # merge powers of equal bases
    exps = {}
    order = []
    for f in factors:
        if f.kind == "pow":
            base, e = f.args
        else:
            base, e = f, ONE
        if base not in exps:
            exps[base] = [e]
            order.append(base)
        else:
            exps[base].append(e)
    out = []
    for base in order:
        es = exps[base]
        etot = es[0] if len(es) == 1 else simplify(Expr("add", es))
        p = _make_pow(base, etot)
        if p.kind == "num":
            v = const * p.value
            const = v if isinstance(v, Fraction) else float(v)
        elif p.kind == "mul":
            # constant split out by _make_pow
            for g in p.args:
                if g.kind == "num":
                    v = const * g.value
                    const = v if isinstance(v, Fraction) else float(v)
                else:
                    out.append(g)
        else:
            out.append(p)
    if const == 0:
        return ZERO
    out.sort(key=sort_key)
    if not out:
        return num(const)
    if const != 1:
        out.insert(0, num(const))
    if len(out) == 1:
        return out[0]
    return Expr("mul", out)


_FN_ZERO_VALUES = {
    "exp": ONE, "log": None, "sin": ZERO, "cos": ONE, "tan": ZERO,
    "sinh": ZERO, "cosh": ONE, "tanh": ZERO, "arctan": ZERO, "arctanh": ZERO,
}


def _simplify_fn(kind, a):
    if kind == "sqrt":
        return _make_pow(a, HALF)
    if kind == "abs":
        if a.kind == "num":
            return num(abs(a.value))
        if a.kind == "abs":
            return a
        if a.kind == "pow" and is_num(a.args[1]):
            e = a.args[1].value
            if isinstance(e, Fraction) and e.denominator == 1 and e % 2 == 0:
                return a
        if a.kind == "mul" and is_num(a.args[0]) and a.args[0].value < 0:
            rest = a.args[1:]
            rest_e = rest[0] if len(rest) == 1 else Expr("mul", rest)
            return _simplify_mul([num(abs(a.args[0].value)), Expr("abs", (rest_e,))])
        return Expr("abs", (a,))
    if is_num(a, 0) and _FN_ZERO_VALUES.get(kind) is not None:
        return _FN_ZERO_VALUES[kind]
    if kind == "exp" and a.kind == "log":
        return a.args[0]
    if kind == "log":
        if is_num(a, 1):
            return ZERO
        if a.kind == "exp":
            return a.args[0]
    return Expr(kind, (a,))


def simplify(e):
    if e.kind in ("num", "sym"):
        return e
    args = [simplify(a) for a in e.args]
    k = e.kind
    if k == "neg":
        return _simplify_mul([MINUS_ONE, args[0]])
    if k == "div":
        return _simplify_mul([args[0], _make_pow(args[1], MINUS_ONE)])
    if k == "add":
        return _simplify_add(args)
    if k == "mul":
        return _simplify_mul(args)
    if k == "pow":
        return _make_pow(args[0], args[1])
    if k == "besseli":
        return Expr("besseli", args)
    return _simplify_fn(k, args[0])


# ---------------------------------------------------------------------------
# differentiation

_FN_DERIV = {
    "exp": lambda u: fn("exp", u),
    "log": lambda u: div(ONE, u),
    "sin": lambda u: fn("cos", u),
    "cos": lambda u: neg(fn("sin", u)),
    "tan": lambda u: add(ONE, pow_(fn("tan", u), 2)),
    "sinh": lambda u: fn("cosh", u),
    "cosh": lambda u: fn("sinh", u),
    "tanh": lambda u: add(ONE, neg(pow_(fn("tanh", u), 2))),
    "arctan": lambda u: div(ONE, add(ONE, pow_(u, 2))),
    "arctanh": lambda u: div(ONE, add(ONE, neg(pow_(u, 2)))),
}


def _d(e, var):
    k = e.kind
    if k == "num":
        return ZERO
    if k == "sym":
        return ONE if e.value == var else ZERO
    if k == "add":
        return Expr("add", [_d(a, var) for a in e.args])
    if k == "mul":
        terms = []
        for i, a in enumerate(e.args):
            da = _d(a, var)
            if is_num(da, 0):
                continue
            terms.append(Expr("mul", e.args[:i] + (da,) + e.args[i + 1:]))
        return Expr("add", terms) if terms else ZERO
    if k == "pow":
        b, ex = e.args
        db, dex = _d(b, var), _d(ex, var)
        terms = []
        if not is_num(db, 0):
            terms.append(mul(ex, pow_(b, add(ex, MINUS_ONE)), db))
        if not is_num(dex, 0):
            terms.append(mul(e, fn("log", b), dex))
        return Expr("add", terms) if terms else ZERO
    if k == "neg":
        return neg(_d(e.args[0], var))
    if k == "div":
        a, b = e.args
        return div(add(mul(_d(a, var), b), neg(mul(a, _d(b, var)))), pow_(b, 2))
    if k == "sqrt":
        u = e.args[0]
        return mul(HALF, pow_(u, num(Fraction(-1, 2))), _d(u, var))
    if k == "abs":
        u = e.args[0]
        return mul(u, pow_(fn("abs", u), MINUS_ONE), _d(u, var))
    if k == "besseli":
        nu, z = e.args
        if nu.kind != "num":
            raise ExprError("besseli order must be numeric")
        dz = _d(z, var)
        lower = besseli(num(nu.value - 1), z)
        upper = besseli(num(nu.value + 1), z)
        return mul(HALF, add(lower, upper), dz)
    if k in _FN_DERIV:
        u = e.args[0]
        return mul(_FN_DERIV[k](u), _d(u, var))
    raise ExprError("cannot differentiate node kind %r" % k)


def differentiate(e, var="x", order=1):
    if order < 1:
        raise ValueError("order must be >= 1")
    out = simplify(e)
    for _ in range(order):
        out = simplify(_d(out, var))
    return out


# ---------------------------------------------------------------------------
# evaluation

DEFAULT_BINDINGS = {"pi": math.pi}

_FN_EVAL = {
    "exp": math.exp, "sin": math.sin, "cos": math.cos, "tan": math.tan,
    "sinh": math.sinh, "cosh": math.cosh, "tanh": math.tanh,
    "arctan": math.atan,
}


def evaluate(e, bindings=None):
    env = dict(DEFAULT_BINDINGS)
    if bindings:
        env.update(bindings)
    try:
        v = _ev(e, env)
    except OverflowError as exc:
        raise DomainError(str(exc)) from exc
    if not math.isfinite(v):
        raise DomainError("non-finite result")
    return v


def _ev(e, env):
    k = e.kind
    if k == "num":
        return float(e.value)
    if k == "sym":
        try:
            return float(env[e.value])
        except KeyError:
            raise UnboundIdentifier(e.value) from None
    if k == "add":
        return math.fsum(_ev(a, env) for a in e.args)
    if k == "mul":
        r = 1.0
        for a in e.args:
            r *= _ev(a, env)
        return r
    if k == "pow":
        b = _ev(e.args[0], env)
        ex = _ev(e.args[1], env)
        if b == 0.0 and ex < 0:
            raise DomainError("0^negative")
        if b < 0:
            # allow integer exponents only
            if ex != round(ex):
                raise DomainError("negative base with fractional exponent")
            return b ** int(round(ex))
        return b ** ex
    if k == "neg":
        return -_ev(e.args[0], env)
    if k == "div":
        d = _ev(e.args[1], env)
        if d == 0.0:
            raise DomainError("division by zero")
        return _ev(e.args[0], env) / d
    if k == "log":
        u = _ev(e.args[0], env)
        if u <= 0.0:
            raise DomainError("log of non-positive")
        return math.log(u)
    if k == "sqrt":
        u = _ev(e.args[0], env)
        if u < 0.0:
            raise DomainError("sqrt of negative")
        return math.sqrt(u)
    if k == "abs":
        return abs(_ev(e.args[0], env))
    if k == "arctanh":
        u = _ev(e.args[0], env)
        if abs(u) >= 1.0:
            raise DomainError("arctanh outside (-1,1)")
        return math.atanh(u)
    if k == "besseli":
        from . import special
        return special.iv(_ev(e.args[0], env), _ev(e.args[1], env))
    if k in _FN_EVAL:
        return _FN_EVAL[k](_ev(e.args[0], env))
    raise ExprError("cannot evaluate node kind %r" % k)


# ---------------------------------------------------------------------------
# structural helpers

def free_symbols(e):
    if e.kind == "sym":
        return {e.value}
    out = set()
    for a in e.args:
        out |= free_symbols(a)
    return out


def contains_symbol(e, name):
    if e.kind == "sym":
        return e.value == name
    return any(contains_symbol(a, name) for a in e.args)


def substitute(e, mapping):
    """Replace symbols by expressions; result simplified."""
    return simplify(_subst(e, {k: to_expr(v) for k, v in mapping.items()}))


def _subst(e, mapping):
    if e.kind == "sym":
        return mapping.get(e.value, e)
    if not e.args:
        return e
    return Expr(e.kind, [_subst(a, mapping) for a in e.args], e.value)


_MAX_POLY_DEGREE = 64


def as_polynomial(e, var):
    """Coefficient list [c0, c1, ...] of e as a polynomial in `var` with
    var-free Expr coefficients, or None if e is not polynomial in var."""
    e = simplify(e)
    coeffs = _poly(e, var)
    if coeffs is None:
        return None
    return [simplify(c) for c in coeffs]


def _poly_mul(p, q):
    if len(p) + len(q) - 2 > _MAX_POLY_DEGREE:
        return None
    out = [[] for _ in range(len(p) + len(q) - 1)]
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j].append(mul(a, b))
    return [Expr("add", terms) if terms else ZERO for terms in out]


def _poly(e, var):
    if not contains_symbol(e, var):
        return [e]
    k = e.kind
    if k == "sym":
        return [ZERO, ONE]
    if k == "add":
        parts = []
        for a in e.args:
            p = _poly(a, var)
            if p is None:
                return None
            parts.append(p)
        n = max(len(p) for p in parts)
        out = []
        for i in range(n):
            terms = [p[i] for p in parts if i < len(p)]
            out.append(Expr("add", terms))
        return out
    if k == "mul":
        acc = [ONE]
        for a in e.args:
            p = _poly(a, var)
            if p is None:
                return None
            acc = _poly_mul(acc, p)
            if acc is None:
                return None
        return acc
    if k == "pow":
        b, ex = e.args
        if contains_symbol(ex, var):
            return None
        if not (is_num(ex) and isinstance(ex.value, Fraction)
                and ex.value.denominator == 1 and ex.value >= 0):
            return None
        n = int(ex.value)
        if n > _MAX_POLY_DEGREE:
            return None
        p = _poly(b, var)
        if p is None:
            return None
        acc = [ONE]
        for _ in range(n):
            acc = _poly_mul(acc, p)
            if acc is None:
                return None
        return acc
    return None


# ---------------------------------------------------------------------------
# zero testing & polynomial matching (symbolic first, then sampling)

_SAMPLE_SEED = 20250823


def _chebyshev_points(lo, hi, n):
    pts = []
    for i in range(n):
        theta = math.pi * (2 * i + 1) / (2 * n)
        pts.append(0.5 * (lo + hi) + 0.5 * (hi - lo) * math.cos(theta))
    return pts


def _sample_interval(interval):
    lo, hi = interval
    if math.isinf(lo) and math.isinf(hi):
        return -3.0, 3.0
    if math.isinf(hi):
        return lo + 0.1 * max(1.0, abs(lo)), lo + 4.0 * max(1.0, abs(lo))
    if math.isinf(lo):
        return hi - 4.0 * max(1.0, abs(hi)), hi - 0.1 * max(1.0, abs(hi))
    w = hi - lo
    return lo + 0.05 * w, hi - 0.05 * w


def _auto_bindings(e, var, bindings, rng):
    env = dict(bindings or {})
    for name in sorted(free_symbols(e) - {var} - set(env) - set(DEFAULT_BINDINGS)):
        env[name] = rng.uniform(0.5, 2.0)
    return env


def is_zero(e, var="x", interval=(-3.0, 3.0), bindings=None, tol=1e-9):
    """Decide whether e is identically zero on the interval.

    Polynomial normalization first; otherwise sampling at 7 deterministic
    points plus 50 random confirmation points (fixed seed).
    """
    e = simplify(e)
    if e.kind == "num":
        return e.value == 0
    coeffs = as_polynomial(e, var)
    if coeffs is not None and all(c.kind == "num" for c in coeffs):
        return all(c.value == 0 for c in coeffs)
    rng = random.Random(_SAMPLE_SEED)
    env = _auto_bindings(e, var, bindings, rng)
    lo, hi = _sample_interval(interval)
    pts = _chebyshev_points(lo, hi, 7)
    pts += [rng.uniform(lo, hi) for _ in range(50)]
    scale = 1.0
    checked = 0
    for x in pts:
        env[var] = x
        try:
            v = evaluate(e, env)
            scale = max(scale, _magnitude(e, env))
        except DomainError:
            continue
        checked += 1
        if abs(v) > tol * scale:
            return False
    return checked >= 7


def _magnitude(e, env):
    """Rough size of the terms being cancelled, for relative tolerance."""
    if e.kind == "add":
        s = 0.0
        for a in e.args:
            try:
                s += abs(evaluate(a, env))
            except DomainError:
                return 1.0
        return s
    try:
        return abs(evaluate(e, env))
    except DomainError:
        return 1.0


def match_polynomial(e, var, degree, x="x", interval=(-3.0, 3.0),
                     bindings=None, tol=1e-9):
    """Coefficients [c0..c_degree] with e == sum c_i var^i identically, else None.

    `var` may be any expression in the spatial variable `x`.  Exact path when
    both are polynomial in x; otherwise least-squares over 7 sample points
    confirmed at 50 more.
    """
    e = simplify(e)
    var = simplify(to_expr(var))
    if not contains_symbol(e, x):
        return [e] + [ZERO] * degree
    # exact path: e polynomial in var when var is the bare variable
    if var.kind == "sym" and var.value == x:
        coeffs = as_polynomial(e, x)
        if coeffs is not None:
            if len(coeffs) > degree + 1:
                if all(is_zero(c, x, interval, bindings, tol)
                       for c in coeffs[degree + 1:]):
                    coeffs = coeffs[:degree + 1]
                else:
                    return None
            return coeffs + [ZERO] * (degree + 1 - len(coeffs))
    return _match_poly_sampled(e, var, degree, x, interval, bindings, tol)


def _match_poly_sampled(e, var, degree, x, interval, bindings, tol):
    import numpy as np

    rng = random.Random(_SAMPLE_SEED + 1)
    env = _auto_bindings(e, x, bindings, rng)
    lo, hi = _sample_interval(interval)

    def probe(pts):
        rows, vals, scale = [], [], 1.0
        for p in pts:
            env[x] = p
            try:
                v = evaluate(var, env)
                w = evaluate(e, env)
            except DomainError:
                continue
            rows.append([v ** i for i in range(degree + 1)])
            vals.append(w)
            scale = max(scale, abs(w), abs(v) ** degree)
        return np.array(rows), np.array(vals), scale

    A, yv, scale = probe(_chebyshev_points(lo, hi, max(7, degree + 3)))
    if len(yv) < degree + 2:
        return None
    coef, *_ = np.linalg.lstsq(A, yv, rcond=None)
    # confirm on 50 random points
    A2, y2, scale2 = probe([rng.uniform(lo, hi) for _ in range(50)])
    if len(y2) < 10:
        return None
    resid = max(float(np.max(np.abs(A @ coef - yv))),
                float(np.max(np.abs(A2 @ coef - y2))))
    if resid > tol * max(scale, scale2):
        return None
    return [_rationalize(float(c)) for c in coef]


def _rationalize(c, tol=1e-9):
    """Snap a float to a small exact rational when that is clearly right."""
    fr = Fraction(c).limit_denominator(1_000_000)
    if abs(float(fr) - c) <= tol * (1.0 + abs(c)):
        return num(fr)
    return num(c)


# ---------------------------------------------------------------------------
# printing

def _num_text(v):
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        return "%d/%d" % (v.numerator, v.denominator)
    return repr(v)


_PREC_ADD, _PREC_MUL, _PREC_POW, _PREC_NEG, _PREC_ATOM = 10, 20, 30, 35, 100


def _prec(e):
    k = e.kind
    if k == "add":
        return _PREC_ADD
    if k in ("mul", "div"):
        return _PREC_MUL
    if k == "neg":
        return _PREC_NEG
    if k == "pow":
        return _PREC_POW
    if k == "num":
        return _PREC_ATOM if (isinstance(e.value, float) and e.value >= 0) \
            or (isinstance(e.value, Fraction) and e.value >= 0
                and e.value.denominator == 1) else _PREC_MUL
    return _PREC_ATOM


def _paren(e, minprec):
    s = to_text(e)
    if _prec(e) < minprec:
        return "(" + s + ")"
    return s


def to_text(e):
    """Pretty infix form; re-parses to the same simplified tree."""
    k = e.kind
    if k == "num":
        return _num_text(e.value)
    if k == "sym":
        return e.value
    if k == "add":
        parts = [to_text(e.args[0])]
        for t in e.args[1:]:
            c, rest = _coeff_split(t)
            if c < 0:
                tt = _rebuild_term(-c, rest)
                parts.append(" - " + _paren(tt, _PREC_ADD + 1))
            else:
                parts.append(" + " + _paren(t, _PREC_ADD + 1))
        return "".join(parts)
    if k == "mul":
        numer, denom = [], []
        for f in e.args:
            if (f.kind == "pow" and is_num(f.args[1])
                    and f.args[1].value < 0):
                inv = _make_pow(f.args[0], num(-f.args[1].value))
                denom.append(inv)
            else:
                numer.append(f)
        neg_prefix = ""
        if numer and is_num(numer[0]) and numer[0].value == -1 and len(numer) > 1:
            neg_prefix = "-"
            numer = numer[1:]
        if not numer:
            ns = "1"
        else:
            # a "-" prefix acts as unary minus, which binds tighter than ^:
            # the leading factor needs parens if it is itself a power
            first_min = _PREC_NEG if neg_prefix else _PREC_MUL
            ns = "*".join(_paren(f, first_min if i == 0 else _PREC_MUL)
                          for i, f in enumerate(numer))
        if not denom:
            return neg_prefix + ns
        if len(denom) == 1 and _prec(denom[0]) >= _PREC_POW:
            ds = _paren(denom[0], _PREC_POW + 1)
        else:
            ds = "(" + "*".join(_paren(f, _PREC_MUL) for f in denom) + ")"
        return neg_prefix + ns + "/" + ds
    if k == "div":
        return _paren(e.args[0], _PREC_MUL) + "/" + _paren(e.args[1], _PREC_MUL + 1)
    if k == "neg":
        return "-" + _paren(e.args[0], _PREC_NEG)
    if k == "pow":
        b, ex = e.args
        if is_num(ex) and ex.value == Fraction(1, 2):
            return "sqrt(" + to_text(b) + ")"
        if is_num(ex) and ex.value == -1:
            return "1/" + _paren(b, _PREC_POW + 1)
        if is_num(ex) and ex.value < 0:
            inv = _make_pow(b, num(-ex.value))
            return "1/" + _paren(inv, _PREC_POW + 1)
        bs = _paren(b, _PREC_POW + 1)
        es = _paren(ex, _PREC_POW)
        return bs + "^" + es
    if k == "besseli":
        return "besseli(%s, %s)" % (to_text(e.args[0]), to_text(e.args[1]))
    return k + "(" + to_text(e.args[0]) + ")"


def to_sexpr(e):
    """Lisp-style serialization for machine diffing."""
    k = e.kind
    if k == "num":
        return _num_text(e.value)
    if k == "sym":
        return e.value
    op = {"add": "+", "mul": "*", "pow": "^", "neg": "neg", "div": "/"}.get(k, k)
    return "(" + " ".join([op] + [to_sexpr(a) for a in e.args]) + ")"
