"""Exact arithmetic kernel.

Rationals and the quadratic fields Q(sqrt d), multivariate polynomials and
rational functions over them, a safe expression parser, small matrix helpers
and a fraction-free linear solver.

Polynomial arithmetic and gcds are delegated to sympy's sparse rings; this
module owns normalization, canonical text and the solver.
"""
from __future__ import annotations

import ast
import math
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import sympy
from sympy.polys.domains import QQ
from sympy.polys.fields import FracField
from sympy.polys.orderings import lex


class ExactArithmeticError(ArithmeticError):
    pass


class ZeroDenominator(ExactArithmeticError, ZeroDivisionError):
    pass


class MixedExtensions(ExactArithmeticError, ValueError):
    pass


class RootNotInField(ExactArithmeticError, ValueError):
    pass


class NoSolution(ExactArithmeticError):
    """Inconsistent linear system; ``certificate`` is (row index, nonzero rhs) after elimination."""

    def __init__(self, certificate):
        super().__init__(f"inconsistent system (row {certificate[0]} reads 0 = {certificate[1]})")
        self.certificate = certificate


class NonUnique(ExactArithmeticError):
    def __init__(self, particular, kernel):
        super().__init__(f"solution not unique, kernel dimension {len(kernel)}")
        self.particular = particular
        self.kernel = kernel


class ParseError(ValueError):
    pass


# ---------------------------------------------------------------------------
# constants in Q(sqrt d)

def _squarefree(n: int) -> bool:
    if n in (0, 1):
        return False
    m = abs(n)
    p = 2
    while p * p <= m:
        if m % (p * p) == 0:
            return False
        p += 1
    return True


def _as_fraction(x) -> Fraction:
    if isinstance(x, bool) or isinstance(x, float):
        raise TypeError("floating point or boolean values are not exact constants")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def _int_root(n: int, k: int):
    """Exact k-th root of a non-negative integer, or None."""
    if n < 0:
        return None
    if k == 2:
        r = math.isqrt(n)
        return r if r * r == n else None
    lo, hi = 0, 1 << (n.bit_length() // k + 1)
    while lo < hi:
        mid = (lo + hi) // 2
        if mid**k < n:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo**k == n else None


def rational_root(c: Fraction, n: int):
    """Real n-th root of a rational if it is rational (positive root for even n), else None."""
    c = Fraction(c)
    if n == 1:
        return c
    if c < 0:
        if n % 2 == 0:
            return None
        r = rational_root(-c, n)
        return None if r is None else -r
    p, q = _int_root(c.numerator, n), _int_root(c.denominator, n)
    if p is None or q is None:
        return None
    return Fraction(p, q)


class FieldConstant:
    """a + b*sqrt(d) with rational a, b; d square-free or None (plain rational)."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a=0, b=0, d: int | None = None):
        if isinstance(a, FieldConstant):
            if b != 0 or d is not None:
                raise TypeError("cannot combine a FieldConstant with extra parts")
            a, b, d = a.a, a.b, a.d
        a, b = _as_fraction(a), _as_fraction(b)
        if d is not None:
            if not isinstance(d, int) or not _squarefree(d):
                raise ValueError(f"discriminant must be a square-free integer, got {d!r}")
        elif b != 0:
            raise ValueError("radical part requires a discriminant")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    def __setattr__(self, *_):
        raise AttributeError("FieldConstant is immutable")

    @staticmethod
    def sqrt(d: int) -> "FieldConstant":
        return FieldConstant(0, 1, d)

    @classmethod
    def coerce(cls, x) -> "FieldConstant":
        return x if isinstance(x, FieldConstant) else cls(x)

    def _joint(self, other: "FieldConstant"):
        if self.d is not None and other.d is not None and self.d != other.d:
            raise MixedExtensions(f"Q(sqrt {self.d}) vs Q(sqrt {other.d})")
        return self.d if self.d is not None else other.d

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __add__(self, other):
        try:
            o = FieldConstant.coerce(other)
        except TypeError:
            return NotImplemented
        return FieldConstant(self.a + o.a, self.b + o.b, self._joint(o))

    __radd__ = __add__

    def __neg__(self):
        return FieldConstant(-self.a, -self.b, self.d)

    def __sub__(self, other):
        try:
            o = FieldConstant.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = FieldConstant.coerce(other)
        except TypeError:
            return NotImplemented
        d = self._joint(o)
        dd = d if d is not None else 0
        return FieldConstant(self.a * o.a + dd * self.b * o.b, self.a * o.b + self.b * o.a, d)

    __rmul__ = __mul__

    def conjugate(self) -> "FieldConstant":
        return FieldConstant(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        dd = self.d if self.d is not None else 0
        return self.a * self.a - dd * self.b * self.b

    def inverse(self) -> "FieldConstant":
        n = self.norm()
        if n == 0:
            raise ZeroDenominator("division by zero constant")
        c = self.conjugate()
        return FieldConstant(c.a / n, c.b / n, self.d)

    def __truediv__(self, other):
        try:
            o = FieldConstant.coerce(other)
        except TypeError:
            return NotImplemented
        self._joint(o)
        return self * o.inverse()

    def __rtruediv__(self, other):
        return FieldConstant.coerce(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result, base = FieldConstant(1, 0, self.d), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        try:
            o = FieldConstant.coerce(other)
        except TypeError:
            return NotImplemented
        if self.b == 0 and o.b == 0:
            return self.a == o.a
        return self.d == o.d and self.a == o.a and self.b == o.b

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def nth_root(self, n: int, d: int | None = None) -> "FieldConstant":
        """An exact n-th root inside Q(sqrt d) (d defaults to this constant's field).

        Rational roots are preferred; otherwise b*sqrt(d) with b > 0 is tried
        for even n.  Raises RootNotInField when neither exists.
        """
        d = d if d is not None else self.d
        if n == 1:
            return self
        if self.b == 0:
            r = rational_root(self.a, n)
            if r is not None:
                return FieldConstant(r, 0, d)
            if d is not None and n % 2 == 0:
                # (b sqrt d)^n = b^n d^(n/2)
                bn = self.a / Fraction(d) ** (n // 2)
                b = rational_root(bn, n)
                if b is not None:
                    return FieldConstant(0, b, d)
        elif n == 2:
            # (x + y sqrt d)^2 = a + b sqrt d, try rational x, y
            dd = Fraction(self.d)
            # x^2 + d y^2 = a, 2xy = b  ->  x^4 - a x^2 + d b^2/4 = 0
            disc = self.a * self.a - dd * self.b * self.b
            s = rational_root(disc, 2)
            if s is not None:
                for x2 in ((self.a + s) / 2, (self.a - s) / 2):
                    x = rational_root(x2, 2)
                    if x:
                        return FieldConstant(x, self.b / (2 * x), self.d)
        raise RootNotInField(f"{self} has no exact {n}-th root in {field_name(d)}")

    def __repr__(self):
        return f"FieldConstant({self})"

    def __str__(self):
        return format_constant(self)


def field_name(d):
    return "Q" if d is None else f"Q(sqrt({d}))"


def _frac_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_constant(c: FieldConstant) -> str:
    if c.b == 0:
        return _frac_str(c.a)
    rad = f"sqrt({c.d})"
    if c.b == 1:
        rpart = rad
    elif c.b == -1:
        rpart = f"-{rad}"
    else:
        rpart = f"{_frac_str(c.b)}*{rad}"
    if c.a == 0:
        return rpart
    sign = "-" if rpart.startswith("-") else "+"
    return f"{_frac_str(c.a)} {sign} {rpart.lstrip('-')}"


def quad_arith(a: FieldConstant, b: FieldConstant, op: str) -> FieldConstant:
    """Field arithmetic on two constants; op is one of + - * /."""
    a, b = FieldConstant.coerce(a), FieldConstant.coerce(b)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# polynomial and rational function contexts

@lru_cache(maxsize=None)
def _domain(d):
    if d is None:
        return QQ
    return QQ.algebraic_field(sympy.sqrt(d))


def _to_domain(dom, c: FieldConstant, d):
    c = FieldConstant.coerce(c)
    if c.b == 0:
        return dom.convert(QQ(c.a.numerator, c.a.denominator)) if dom is not QQ else QQ(c.a.numerator, c.a.denominator)
    if c.d != d:
        raise MixedExtensions(f"constant in {field_name(c.d)} used in {field_name(d)}")
    return dom.from_sympy(sympy.Rational(c.a.numerator, c.a.denominator)
                          + sympy.Rational(c.b.numerator, c.b.denominator) * sympy.sqrt(d))


def _from_domain(x, d) -> FieldConstant:
    if d is None:
        return FieldConstant(Fraction(int(x.numerator), int(x.denominator)))
    rep = [Fraction(int(r.numerator), int(r.denominator)) for r in x.rep]
    if len(rep) == 0:
        return FieldConstant(0, 0, d)
    if len(rep) == 1:
        return FieldConstant(rep[0], 0, d)
    return FieldConstant(rep[1], rep[0], d)


class FunctionField:
    """Context: the field Q(sqrt d)(x_1, ..., x_n) with a fixed variable order.

    Variable order is the lexicographic order used by canonical text.
    """

    _cache: dict = {}

    def __new__(cls, variables: Sequence[str], d: int | None = None):
        key = (tuple(variables), d)
        inst = cls._cache.get(key)
        if inst is None:
            inst = super().__new__(cls)
            inst._init(tuple(variables), d)
            cls._cache[key] = inst
        return inst

    def _init(self, variables, d):
        if d is not None and not _squarefree(d):
            raise ValueError("discriminant must be square-free")
        if len(set(variables)) != len(variables):
            raise ValueError("duplicate variable names")
        self.variables = variables
        self.d = d
        self.domain = _domain(d)
        names = variables if variables else ("_u",)
        self.sym_field = FracField(",".join(names), self.domain, lex)
        self.ring = self.sym_field.ring
        self._dummy = not variables

    def __reduce__(self):
        return (FunctionField, (self.variables, self.d))

    def __repr__(self):
        return f"FunctionField({list(self.variables)}, d={self.d})"

    def index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def gen(self, name: str) -> "RationalFunction":
        return RationalFunction(self, self.sym_field.gens[self.index(name)])

    def gens(self):
        return [self.gen(v) for v in self.variables]

    def const(self, c) -> "RationalFunction":
        return RationalFunction(self, self.sym_field(self.ring(_to_domain(self.domain, c, self.d))))

    def zero(self):
        return RationalFunction(self, self.sym_field.zero)

    def one(self):
        return RationalFunction(self, self.sym_field.one)

    def coerce(self, x) -> "RationalFunction":
        if isinstance(x, RationalFunction):
            if x.ctx is self:
                return x
            return x.lift(self)
        if isinstance(x, Polynomial):
            return RationalFunction(self, self.sym_field(x.lift(self).raw))
        return self.const(x)

    def polynomial(self, raw) -> "Polynomial":
        return Polynomial(self, raw)

    def parse(self, text: str, extra: dict | None = None) -> "RationalFunction":
        ns = {v: self.gen(v) for v in self.variables}
        if extra:
            ns.update(extra)
        val = parse_expression(text, ns)
        return self.coerce(val)

    def extend(self, variables: Sequence[str]) -> "FunctionField":
        """Field with additional variables appended (existing order kept)."""
        new = list(self.variables) + [v for v in variables if v not in self.variables]
        return FunctionField(new, self.d)

    def with_discriminant(self, d) -> "FunctionField":
        return FunctionField(self.variables, d)


def _fmt_monomial(variables, exps) -> str:
    parts = []
    for v, e in zip(variables, exps):
        if e == 1:
            parts.append(v)
        elif e:
            parts.append(f"{v}^{e}")
    return "*".join(parts)


def _fmt_poly(ctx: FunctionField, raw) -> str:
    if not raw:
        return "0"
    out = []
    for exps, c in sorted(raw.terms(), key=lambda t: t[0], reverse=True):
        fc = _from_domain(c, ctx.d)
        mono = _fmt_monomial(ctx.variables, exps) if not ctx._dummy else ""
        cs = format_constant(fc)
        if fc.b != 0 and fc.a != 0:
            cs = f"({cs})"
        if mono:
            if cs == "1":
                term = mono
            elif cs == "-1":
                term = f"-{mono}"
            else:
                term = f"{cs}*{mono}"
        else:
            term = cs
        out.append(term)
    s = out[0]
    for t in out[1:]:
        s += f" - {t[1:]}" if t.startswith("-") else f" + {t}"
    return s


class Polynomial:
    """Immutable polynomial in a FunctionField's variables."""

    __slots__ = ("ctx", "raw")

    def __init__(self, ctx: FunctionField, raw):
        self.ctx = ctx
        self.raw = raw

    @property
    def variables(self):
        return self.ctx.variables

    def terms(self) -> dict:
        return {exps: _from_domain(c, self.ctx.d) for exps, c in self.raw.terms()}

    def _wrap(self, raw):
        return Polynomial(self.ctx, raw)

    def _other(self, o):
        if isinstance(o, Polynomial):
            return o.lift(self.ctx).raw
        return self.ctx.ring(_to_domain(self.ctx.domain, FieldConstant.coerce(o), self.ctx.d))

    def __add__(self, o):
        return self._wrap(self.raw + self._other(o))

    __radd__ = __add__

    def __sub__(self, o):
        return self._wrap(self.raw - self._other(o))

    def __rsub__(self, o):
        return self._wrap(self._other(o) - self.raw)

    def __mul__(self, o):
        return self._wrap(self.raw * self._other(o))

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(-self.raw)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        return self._wrap(self.raw**n)

    def __eq__(self, o):
        try:
            return self.raw == self._other(o)
        except (TypeError, MixedExtensions):
            return NotImplemented

    def __hash__(self):
        return hash(str(self))

    def __bool__(self):
        return bool(self.raw)

    def is_zero(self):
        return not self.raw

    def exquo(self, o: "Polynomial") -> "Polynomial":
        return self._wrap(self.raw.exquo(self._other(o)))

    def diff(self, name: str) -> "Polynomial":
        return self._wrap(self.raw.diff(self.ctx.ring.gens[self.ctx.index(name)]))

    def degree(self, name: str) -> int:
        return self.raw.degree(self.ctx.index(name))

    def total_degree(self) -> int:
        if not self.raw:
            return -1
        return max(sum(e) for e in self.raw.monoms())

    def coeff_in(self, name: str, k: int) -> "Polynomial":
        """Coefficient of name^k viewing the polynomial in that variable."""
        i = self.ctx.index(name)
        out = self.ctx.ring.zero
        for exps, c in self.raw.terms():
            if exps[i] == k:
                e = list(exps)
                e[i] = 0
                out += self.ctx.ring({tuple(e): c})
        return self._wrap(out)

    def leading_coefficient(self) -> FieldConstant:
        return _from_domain(self.raw.LC, self.ctx.d)

    def lift(self, ctx: FunctionField) -> "Polynomial":
        if ctx is self.ctx:
            return self
        names = [] if self.ctx._dummy else self.ctx.variables
        pos = [ctx.index(v) if v in ctx.variables else None for v in names]
        terms = {}
        for exps, c in self.raw.terms():
            e = [0] * max(len(ctx.variables), 1)
            for p, k, v in zip(pos, exps, names):
                if k and p is None:
                    raise KeyError(f"variable {v!r} does not exist in the target field")
                if p is not None:
                    e[p] = k
            terms[tuple(e)] = _to_domain(ctx.domain, _from_domain(c, self.ctx.d), ctx.d)
        return Polynomial(ctx, ctx.ring(terms))

    def __str__(self):
        return _fmt_poly(self.ctx, self.raw)

    def __repr__(self):
        return f"Polynomial({self})"


class RationalFunction:
    """Immutable element of a FunctionField.

    Equality is mathematical equality; ``numerator``/``denominator`` are the
    normalized pair (gcd 1, denominator monic in lex order).
    """

    __slots__ = ("ctx", "raw")

    def __init__(self, ctx: FunctionField, raw):
        self.ctx = ctx
        self.raw = raw

    def _other(self, o):
        if isinstance(o, RationalFunction):
            if o.ctx is self.ctx:
                return o.raw
            return o.lift(self.ctx).raw
        return self.ctx.coerce(o).raw

    def _wrap(self, raw):
        return RationalFunction(self.ctx, raw)

    def __add__(self, o):
        try:
            return self._wrap(self.raw + self._other(o))
        except TypeError:
            return NotImplemented

    __radd__ = __add__

    def __sub__(self, o):
        try:
            return self._wrap(self.raw - self._other(o))
        except TypeError:
            return NotImplemented

    def __rsub__(self, o):
        return self._wrap(self._other(o) - self.raw)

    def __mul__(self, o):
        try:
            return self._wrap(self.raw * self._other(o))
        except TypeError:
            return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, o):
        other = self._other(o)
        if not other:
            raise ZeroDenominator("division by the zero rational function")
        return self._wrap(self.raw / other)

    def __rtruediv__(self, o):
        if not self.raw:
            raise ZeroDenominator("division by the zero rational function")
        return self._wrap(self._other(o) / self.raw)

    def __neg__(self):
        return self._wrap(-self.raw)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0 and not self.raw:
            raise ZeroDenominator("negative power of zero")
        return self._wrap(self.raw**n)

    def __eq__(self, o):
        try:
            return not (self.raw - self._other(o))
        except (TypeError, MixedExtensions, KeyError):
            return NotImplemented

    def __hash__(self):
        return hash(self.canonical())

    def __bool__(self):
        return bool(self.raw)

    def is_zero(self) -> bool:
        return not self.raw

    def is_constant(self) -> bool:
        return self.raw.numer.is_ground and self.raw.denom.is_ground

    def constant_value(self) -> FieldConstant:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        n = _from_domain(self.raw.numer.LC if self.raw.numer else self.ctx.domain.zero, self.ctx.d)
        return n / _from_domain(self.raw.denom.LC, self.ctx.d)

    def _normalized_pair(self):
        num, den = self.raw.numer, self.raw.denom
        lc = den.LC
        if lc != self.ctx.domain.one:
            num = num.quo_ground(lc)
            den = den.quo_ground(lc)
        return num, den

    @property
    def numerator(self) -> Polynomial:
        return Polynomial(self.ctx, self._normalized_pair()[0])

    @property
    def denominator(self) -> Polynomial:
        return Polynomial(self.ctx, self._normalized_pair()[1])

    def diff(self, name: str) -> "RationalFunction":
        # quotient rule on the ring elements (sympy's field diff rejects algebraic ground domains)
        x = self.ctx.ring.gens[self.ctx.index(name)]
        num, den = self.raw.numer, self.raw.denom
        top = num.diff(x) * den - num * den.diff(x)
        return self._wrap(self.ctx.sym_field.new(top, den * den))

    def theta(self, name: str) -> "RationalFunction":
        """Euler derivative name * d/dname."""
        return self.diff(name) * self.ctx.gen(name)

    def subs(self, values: dict) -> "RationalFunction":
        """Substitute variables by RationalFunctions (or constants) of the same context."""
        num, den = self._normalized_pair()
        return _eval_poly(self.ctx, num, values) / _eval_poly(self.ctx, den, values)

    def lift(self, ctx: FunctionField) -> "RationalFunction":
        num, den = self._normalized_pair()
        n = Polynomial(self.ctx, num).lift(ctx).raw
        d = Polynomial(self.ctx, den).lift(ctx).raw
        return RationalFunction(ctx, ctx.sym_field(n) / ctx.sym_field(d))

    def free_variables(self) -> set:
        out = set()
        if self.ctx._dummy:
            return out
        for p in self._normalized_pair():
            for exps in p.monoms():
                out.update(v for v, e in zip(self.ctx.variables, exps) if e)
        return out

    def canonical(self) -> str:
        num, den = self._normalized_pair()
        ns = _fmt_poly(self.ctx, num)
        if den == self.ctx.ring.one:
            return ns
        ds = _fmt_poly(self.ctx, den)
        if len(num.terms()) > 1 or "/" in ns:
            ns = f"({ns})"
        if len(den.terms()) > 1:
            ds = f"({ds})"
        return f"{ns}/{ds}"

    __str__ = canonical

    def __repr__(self):
        return f"RationalFunction({self.canonical()})"


def _eval_poly(ctx, raw, values):
    acc = ctx.zero()
    gens = {v: ctx.coerce(values[v]) if v in values else ctx.gen(v) for v in ctx.variables}
    for exps, c in raw.terms():
        term = ctx.const(_from_domain(c, ctx.d))
        for v, e in zip(ctx.variables, exps):
            if e:
                term = term * gens[v] ** e
        acc = acc + term
    return acc


def normalize(f: RationalFunction) -> RationalFunction:
    """Return f with gcd-reduced, monic-denominator representation."""
    if not f.raw.denom:
        raise ZeroDenominator("zero denominator")
    num, den = f._normalized_pair()
    return RationalFunction(f.ctx, f.ctx.sym_field.raw_new(num, den))


def rational_function(ctx: FunctionField, numerator: Polynomial, denominator: Polynomial) -> RationalFunction:
    if not denominator.raw:
        raise ZeroDenominator("zero denominator")
    return normalize(RationalFunction(ctx, ctx.sym_field(numerator.lift(ctx).raw) / ctx.sym_field(denominator.lift(ctx).raw)))


# ---------------------------------------------------------------------------
# safe expression evaluation

_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)


def parse_expression(text: str, namespace: dict):
    """Evaluate an arithmetic expression over the objects in ``namespace``.

    Only + - * / ** (or ^), integer literals, parentheses and names from the
    namespace are accepted; anything else raises ParseError.
    """
    if not isinstance(text, str):
        raise ParseError(f"expected a string expression, got {type(text).__name__}")
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {text!r}: {exc.msg}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, int) and not isinstance(node.value, bool):
                return node.value
            raise ParseError(f"only integer literals are allowed, got {node.value!r}")
        if isinstance(node, ast.Name):
            if node.id not in namespace:
                raise ParseError(f"unknown name {node.id!r}")
            return namespace[node.id]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
            v = ev(node.operand)
            return v if isinstance(node.op, ast.UAdd) else -v
        if isinstance(node, ast.BinOp) and isinstance(node.op, _BINOPS):
            left, right = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                if isinstance(left, int) and isinstance(right, int):
                    return Fraction(left, right)
                if isinstance(left, (int, Fraction)) and not isinstance(right, (int, Fraction)):
                    return right.__rtruediv__(left)
                return left / right
            if not isinstance(right, int):
                raise ParseError("exponents must be integer literals")
            if isinstance(left, int) and right < 0:
                return Fraction(left) ** right
            return left**right
        raise ParseError(f"unsupported syntax in {text!r}: {type(node).__name__}")

    return ev(tree)


# ---------------------------------------------------------------------------
# matrices (lists of rows)

def identity(n: int, ctx: FunctionField):
    return [[ctx.one() if i == j else ctx.zero() for j in range(n)] for i in range(n)]


def mat_mul(A, B):
    n, m, p = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = None
            for k in range(m):
                a = A[i][k]
                if not a:
                    continue
                t = a * B[k][j]
                acc = t if acc is None else acc + t
            row.append(acc if acc is not None else A[i][0] * 0)
        out.append(row)
    return out


def mat_add(A, B):
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_sub(A, B):
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_scale(c, A):
    return [[c * a for a in row] for row in A]


def mat_map(f, A):
    return [[f(a) for a in row] for row in A]


def mat_equal(A, B) -> bool:
    return all(a == b for ra, rb in zip(A, B) for a, b in zip(ra, rb))


def mat_inv(A):
    """Gauss-Jordan inverse over the function field; raises ZeroDenominator if singular."""
    n = len(A)
    M = [list(row) + [A[0][0] * 0 + (1 if i == j else 0) for j in range(n)] for i, row in enumerate(A)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c]), None)
        if piv is None:
            raise ZeroDenominator("singular matrix")
        M[c], M[piv] = M[piv], M[c]
        inv = 1 / M[c][c]
        M[c] = [x * inv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c]:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [row[n:] for row in M]


def mat_str(A) -> str:
    return "[" + ",\n ".join("[" + ", ".join(str(x) for x in row) + "]" for row in A) + "]"


# ---------------------------------------------------------------------------
# fraction-free linear solving

class _IntDomain:
    """Fractions cleared to integers."""

    def split(self, x):
        x = Fraction(x)
        return x.numerator, x.denominator

    lcm = staticmethod(math.lcm)

    @staticmethod
    def exquo(a, b):
        q, r = divmod(a, b)
        if r:
            raise ArithmeticError("inexact division in Bareiss step")
        return q

    @staticmethod
    def size(a):
        return abs(a).bit_length()

    @staticmethod
    def to_field(a):
        return Fraction(a)

    zero = 0


class _PolyDomain:
    """RationalFunctions cleared to polynomials of one context."""

    def __init__(self, ctx: FunctionField):
        self.ctx = ctx
        self.zero = ctx.ring.zero

    def split(self, x):
        r = self.ctx.coerce(x).raw
        return r.numer, r.denom

    @staticmethod
    def lcm(a, b):
        return a.lcm(b)

    @staticmethod
    def exquo(a, b):
        return a.exquo(b)

    @staticmethod
    def size(a):
        return len(a.terms())

    def to_field(self, a):
        return RationalFunction(self.ctx, self.ctx.sym_field(a))


def _domain_for(entries):
    for e in entries:
        if isinstance(e, RationalFunction):
            return _PolyDomain(e.ctx)
    return _IntDomain()


def _echelon(rows, ncols, dom):
    """In-place fraction-free (Bareiss) row echelon form; returns pivot columns."""
    pivots = []
    prev = None
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        if r >= nrows:
            break
        cands = [i for i in range(r, nrows) if rows[i][c]]
        if not cands:
            continue
        best = min(cands, key=lambda i: (dom.size(rows[i][c]), i))
        rows[r], rows[best] = rows[best], rows[r]
        p = rows[r][c]
        for i in range(r + 1, nrows):
            a = rows[i][c]
            new = []
            for j in range(len(rows[i])):
                if j < c:
                    new.append(rows[i][j])
                    continue
                v = p * rows[i][j] - a * rows[r][j]
                if prev is not None and v:
                    v = dom.exquo(v, prev)
                new.append(v)
            new[c] = dom.zero
            rows[i] = new
        prev = p
        pivots.append(c)
        r += 1
    return pivots


def solve_linear(M, b):
    """Solve M x = b exactly.

    Entries may be ints/Fractions or RationalFunctions of one context.
    Returns the solution list; raises NoSolution (with certificate) or
    NonUnique (with a particular solution and a kernel basis).
    """
    nrows = len(M)
    if nrows != len(b):
        raise ValueError("row count mismatch between M and b")
    ncols = len(M[0]) if nrows else 0
    if any(len(row) != ncols for row in M):
        raise ValueError("M must be rectangular")
    dom = _domain_for([x for row in M for x in row] + list(b))
    rows = []
    for row, rhs in zip(M, b):
        parts = [dom.split(x) for x in list(row) + [rhs]]
        den = parts[0][1]
        for _, d in parts[1:]:
            den = dom.lcm(den, d)
        rows.append([n * dom.exquo(den, d) for n, d in parts])
    pivots = _echelon(rows, ncols, dom)
    rank = len(pivots)
    for i in range(rank, nrows):
        if rows[i][ncols]:
            raise NoSolution((i, dom.to_field(rows[i][ncols])))
    F = dom.to_field

    def back(rhs_col, free_values):
        x = [None] * ncols
        for j, v in free_values.items():
            x[j] = v
        for i in reversed(range(rank)):
            c = pivots[i]
            acc = F(rhs_col[i]) if rhs_col is not None else F(dom.zero)
            for j in range(c + 1, ncols):
                if rows[i][j] and x[j]:
                    acc = acc - F(rows[i][j]) * x[j]
            x[c] = acc / F(rows[i][c])
        return x

    zero = F(dom.zero)
    free = [j for j in range(ncols) if j not in pivots]
    rhs = [rows[i][ncols] for i in range(rank)]
    particular = back(rhs, {j: zero for j in free})
    if not free:
        return particular
    kernel = []
    for f in free:
        vals = {j: (F(dom.zero) + 1 if j == f else zero) for j in free}
        kernel.append(back(None, vals))
    raise NonUnique(particular, kernel)


def check_solution(M, x, b) -> bool:
    for row, rhs in zip(M, b):
        acc = rhs * 0
        for a, v in zip(row, x):
            acc = acc + a * v
        if acc != rhs:
            return False
    return True
