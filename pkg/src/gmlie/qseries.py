"""Truncated q-expansions on the exponent lattice (1/24)Z.

Exponents are stored as integer numerators over 24; coefficients are
FieldConstants.  ``order`` is exclusive: every exponent below it is trusted.
An order of ``None`` marks an exact (finite) expansion.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable

import sympy

from .exact import FieldConstant, format_constant

LATTICE = 24
DEFAULT_ORDER = 30


class LatticeOverflow(ValueError):
    pass


class UnsupportedWeight(ValueError):
    pass


class NotInvertible(ZeroDivisionError):
    pass


def _units(e) -> int:
    """Exponent (int/Fraction) to lattice units; raises if off the lattice."""
    u = Fraction(e) * LATTICE
    if u.denominator != 1:
        raise LatticeOverflow(f"exponent {e} is not on the (1/24)Z lattice")
    return int(u)


def _min(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _fc(x) -> FieldConstant:
    return FieldConstant.coerce(x)


class TruncatedSeries:
    """Immutable truncated series sum c_e q^e with e in (1/24)Z."""

    __slots__ = ("_c", "_order", "var")

    def __init__(self, coeffs: dict | None = None, order=DEFAULT_ORDER, var: str = "q"):
        c = {}
        o = None if order is None else _units(order)
        for e, v in (coeffs or {}).items():
            u = _units(e)
            v = _fc(v)
            if v and (o is None or u < o):
                c[u] = c.get(u, FieldConstant(0)) + v
        self._c = {k: v for k, v in c.items() if v}
        self._order = o
        self.var = var

    @classmethod
    def _raw(cls, coeffs: dict, order_units, var="q"):
        s = cls.__new__(cls)
        s._c = {k: v for k, v in coeffs.items() if v and (order_units is None or k < order_units)}
        s._order = order_units
        s.var = var
        return s

    @classmethod
    def constant(cls, c, order=None, var="q"):
        return cls({0: c}, order, var)

    @classmethod
    def monomial(cls, e, c=1, order=None, var="q"):
        return cls({e: c}, order, var)

    @classmethod
    def from_list(cls, coeffs: Iterable, order=None, var="q"):
        """Integer-exponent series from a coefficient list starting at exponent 0."""
        coeffs = list(coeffs)
        return cls({i: c for i, c in enumerate(coeffs)}, len(coeffs) if order is None else order, var)

    # -- inspection -----------------------------------------------------------
    @property
    def order(self):
        return None if self._order is None else Fraction(self._order, LATTICE)

    def coefficient(self, e) -> FieldConstant:
        u = _units(e)
        if self._order is not None and u >= self._order:
            raise ValueError(f"coefficient at {e} is beyond the truncation order {self.order}")
        return self._c.get(u, FieldConstant(0))

    __getitem__ = coefficient

    def items(self):
        """(exponent, coefficient) pairs in increasing exponent order."""
        return [(Fraction(k, LATTICE), v) for k, v in sorted(self._c.items())]

    def exponents(self):
        return [Fraction(k, LATTICE) for k in sorted(self._c)]

    def valuation(self):
        """Lowest exponent with a nonzero coefficient (None for the zero series)."""
        if not self._c:
            return None
        return Fraction(min(self._c), LATTICE)

    def is_zero(self) -> bool:
        return not self._c

    def coefficients_list(self, upto: int | None = None):
        """Coefficients at exponents 0..upto-1 (integer-exponent series)."""
        n = upto if upto is not None else int(self.order)
        return [self.coefficient(i) for i in range(n)]

    def field(self):
        ds = {v.d for v in self._c.values() if v.d is not None}
        return ds.pop() if ds else None

    # -- arithmetic -----------------------------------------------------------
    def _coerce(self, o):
        if isinstance(o, TruncatedSeries):
            return o
        return TruncatedSeries._raw({0: _fc(o)}, None, self.var)

    def truncate(self, order) -> "TruncatedSeries":
        o = _units(order)
        return TruncatedSeries._raw(self._c, _min(o, self._order), self.var)

    def __add__(self, o):
        try:
            o = self._coerce(o)
        except TypeError:
            return NotImplemented
        order = _min(self._order, o._order)
        c = dict(self._c)
        for k, v in o._c.items():
            c[k] = c[k] + v if k in c else v
        return TruncatedSeries._raw(c, order, self.var)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries._raw({k: -v for k, v in self._c.items()}, self._order, self.var)

    def __sub__(self, o):
        try:
            o = self._coerce(o)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def _val_units(self):
        return min(self._c) if self._c else self._order

    def __mul__(self, o):
        if not isinstance(o, TruncatedSeries):
            try:
                c = _fc(o)
            except TypeError:
                return NotImplemented
            return TruncatedSeries._raw({k: v * c for k, v in self._c.items()}, self._order, self.var)
        if (not self._c and self._order is None) or (not o._c and o._order is None):
            return TruncatedSeries._raw({}, None, self.var)
        a, b = self._val_units(), o._val_units()
        order = None
        if self._order is not None:
            order = self._order + b
        if o._order is not None:
            order = _min(order, o._order + a)
        out: dict = {}
        for k1, v1 in self._c.items():
            for k2, v2 in o._c.items():
                k = k1 + k2
                if order is not None and k >= order:
                    continue
                out[k] = out[k] + v1 * v2 if k in out else v1 * v2
        return TruncatedSeries._raw(out, order, self.var)

    __rmul__ = __mul__

    def shift(self, e) -> "TruncatedSeries":
        """Multiply by q^e."""
        u = _units(e)
        return TruncatedSeries._raw({k + u: v for k, v in self._c.items()},
                                    None if self._order is None else self._order + u, self.var)

    def _unit_part(self):
        """(leading units a, leading coefficient c, step s, list u_k of the unit series in x=q^s, relative precision in x-steps)."""
        if not self._c:
            raise NotInvertible("series has no nonzero coefficient below its truncation order")
        a = min(self._c)
        c = self._c[a]
        rest = [k - a for k in self._c if k != a]
        step = reduce(gcd, rest, 0) or LATTICE
        if self._order is None:
            nsteps = None
        else:
            rel = self._order - a
            nsteps = -(-rel // step)  # ceil: exponents a + s*k < order
        inv_c = c.inverse()
        top = max(self._c) - a
        n = (top // step + 1) if nsteps is None else nsteps
        u = [FieldConstant(0)] * max(n, 1)
        for k, v in self._c.items():
            i = (k - a) // step
            if i < len(u):
                u[i] = v * inv_c
        return a, c, step, u, nsteps

    def _from_unit(self, lead_units, coeff, step, g, nsteps, rel_units):
        out = {lead_units + step * i: coeff * v for i, v in enumerate(g) if v}
        order = None if rel_units is None else lead_units + rel_units
        return TruncatedSeries._raw(out, order, self.var)

    def power(self, p) -> "TruncatedSeries":
        """f**p for rational p: leading coefficient root must exist in the active field."""
        p = Fraction(p)
        a, c, step, u, nsteps = self._unit_part()
        if p.denominator == 1 and p >= 0 and nsteps is None:
            r = TruncatedSeries.constant(1, None, self.var)
            for _ in range(int(p)):
                r = r * self
            return r
        lead = a * p
        if lead.denominator != 1:
            raise LatticeOverflow(f"leading exponent {Fraction(a, LATTICE)} times {p} leaves the (1/24)Z lattice")
        if p.denominator == 1:
            cp = c ** int(p)
        else:
            cp = c.nth_root(p.denominator) ** p.numerator
        if nsteps is None:
            raise ValueError("non-integral powers need a truncated series")
        g = _miller(u, p, nsteps)
        rel = None if self._order is None else self._order - a
        return self._from_unit(int(lead), cp, step, g, nsteps, rel)

    def __pow__(self, n):
        if isinstance(n, int):
            if n >= 0 and self._order is not None:
                result = TruncatedSeries.constant(1, None, self.var)
                base, k = self, n
                while k:
                    if k & 1:
                        result = result * base
                    base = base * base
                    k >>= 1
                return result
            return self.power(n)
        if isinstance(n, Fraction):
            return self.power(n)
        return NotImplemented

    def inverse(self) -> "TruncatedSeries":
        return self.power(-1)

    def __truediv__(self, o):
        if isinstance(o, TruncatedSeries):
            return self * o.inverse()
        try:
            c = _fc(o)
        except TypeError:
            return NotImplemented
        return self * c.inverse()

    def __rtruediv__(self, o):
        return self.inverse() * o

    def nth_root(self, n: int) -> "TruncatedSeries":
        return nth_root(self, n)

    def theta(self) -> "TruncatedSeries":
        return theta_q(self)

    # -- comparison -----------------------------------------------------------
    def first_difference(self, other, order=None):
        """First exponent (below the common order) where the coefficients differ, with both values."""
        other = self._coerce(other)
        top = _min(self._order, other._order)
        if order is not None:
            top = _min(top, _units(order))
        keys = sorted(set(self._c) | set(other._c))
        for k in keys:
            if top is not None and k >= top:
                break
            a = self._c.get(k, FieldConstant(0))
            b = other._c.get(k, FieldConstant(0))
            if a != b:
                return Fraction(k, LATTICE), a, b
        return None

    def agrees_with(self, other, order=None) -> bool:
        return self.first_difference(other, order) is None

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            try:
                other = self._coerce(other)
            except TypeError:
                return NotImplemented
        return self._order == other._order and self._c == other._c

    def __hash__(self):
        return hash((self._order, tuple(sorted(self._c.items()))))

    def __str__(self):
        return format_series(self)

    def __repr__(self):
        return f"TruncatedSeries({self})"


def _miller(u, p: Fraction, n: int):
    """Coefficients of u(x)**p (u[0] == 1) up to x^(n-1) by J.C.P. Miller's recurrence."""
    g = [FieldConstant(0)] * n
    if n == 0:
        return g
    g[0] = FieldConstant(1)
    nz = [(j, uj) for j, uj in enumerate(u) if j and uj]
    for k in range(1, n):
        acc = FieldConstant(0)
        for j, uj in nz:
            if j > k:
                break
            gk = g[k - j]
            if gk:
                acc = acc + uj * gk * ((p + 1) * j - k)
        g[k] = acc * Fraction(1, k)
    return g


def _fmt_exp(e: Fraction, var: str) -> str:
    if e == 0:
        return ""
    if e == 1:
        return var
    if e.denominator == 1:
        return f"{var}^{e.numerator}"
    return f"{var}^({e.numerator}/{e.denominator})"


def format_series(s: TruncatedSeries) -> str:
    parts = []
    for e, c in s.items():
        mono = _fmt_exp(e, s.var)
        cs = format_constant(c)
        if c.b != 0 and c.a != 0:
            cs = f"({cs})"
        if not mono:
            parts.append(cs)
        elif cs == "1":
            parts.append(mono)
        elif cs == "-1":
            parts.append(f"-{mono}")
        else:
            parts.append(f"{cs}*{mono}")
    if s.order is not None:
        parts.append(f"O({_fmt_exp(s.order, s.var) or '1'})")
    if not parts:
        return "0"
    out = parts[0]
    for t in parts[1:]:
        out += f" - {t[1:]}" if t.startswith("-") else f" + {t}"
    return out


# ---------------------------------------------------------------------------

def theta_q(f: TruncatedSeries) -> TruncatedSeries:
    """q d/dq termwise."""
    return TruncatedSeries._raw({k: v * Fraction(k, LATTICE) for k, v in f._c.items()}, f._order, f.var)


def nth_root(f: TruncatedSeries, n: int) -> TruncatedSeries:
    """g with g**n == f to the truncation order.

    The leading coefficient's root is taken in the field of f's coefficients
    (rational roots preferred); RootNotInField otherwise.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if n == 1:
        return f
    a, c, step, u, nsteps = f._unit_part()
    if a % n:
        raise LatticeOverflow(f"leading exponent {Fraction(a, LATTICE)}/{n} leaves the (1/24)Z lattice")
    root_c = c.nth_root(n, f.field())
    if nsteps is None:
        nsteps = (max(f._c) - a) // step * n + 1
        g = _miller(u, Fraction(1, n), nsteps)
        cand = TruncatedSeries._raw({a // n + step * i: root_c * v for i, v in enumerate(g) if v}, None, f.var)
        if cand ** n == f:
            return cand
        raise ValueError("exact series has no finite n-th root; truncate it first")
    g = _miller(u, Fraction(1, n), nsteps)
    return f._from_unit(a // n, root_c, step, g, nsteps, f._order - a)


def exp_series(h: TruncatedSeries) -> TruncatedSeries:
    """exp(h) for h with positive valuation."""
    if h._order is None:
        raise ValueError("exp needs a truncated series")
    if h._c and min(h._c) <= 0:
        raise ValueError("exp needs a series with positive valuation")
    step = reduce(gcd, h._c.keys(), 0) or LATTICE
    n = -(-h._order // step)
    hs = {k // step: v for k, v in h._c.items()}
    g = [FieldConstant(0)] * n
    g[0] = FieldConstant(1)
    for k in range(1, n):
        acc = FieldConstant(0)
        for j, hj in hs.items():
            if j <= k and g[k - j]:
                acc = acc + hj * g[k - j] * j
        g[k] = acc * Fraction(1, k)
    return TruncatedSeries._raw({i * step: v for i, v in enumerate(g) if v}, h._order, h.var)


def log_series(u: TruncatedSeries) -> TruncatedSeries:
    """log(u) for a series with constant term 1: the primitive of theta(u)/u without constant term."""
    if u.valuation() != 0 or u.coefficient(0) != 1:
        raise ValueError("log needs constant term 1")
    d = theta_q(u) / u
    return TruncatedSeries._raw({k: v / Fraction(k, LATTICE) for k, v in d._c.items() if k}, d._order, u.var)


def compose(f: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
    """f(g) for f with non-negative integer exponents and g with positive integer valuation."""
    if any(k % LATTICE for k in f._c) or any(k % LATTICE for k in g._c):
        raise ValueError("compose needs integer exponents")
    b = g._val_units()
    if b is None or b <= 0:
        raise ValueError("inner series must have positive valuation")
    order = g._order
    if f._order is not None:
        order = _min(order, f._order // LATTICE * b)
    if f._c and min(f._c) < 0:
        raise ValueError("outer series must be a power series")
    top = max(f._c) // LATTICE if f._c else 0
    acc = TruncatedSeries._raw({}, order, g.var)
    for k in range(top, -1, -1):
        acc = (acc * g).truncate(Fraction(order, LATTICE)) if order is not None else acc * g
        c = f._c.get(k * LATTICE)
        if c:
            acc = acc + c
    return TruncatedSeries._raw(acc._c, order, g.var)


def revert(f: TruncatedSeries) -> TruncatedSeries:
    """Compositional inverse of f = x + O(x^2) by Lagrange inversion: [x^n] f^{-1} = (1/n)[x^{n-1}] (x/f)^n."""
    if f._order is None:
        raise ValueError("revert needs a truncated series")
    if f.valuation() != 1 or f.coefficient(1) != 1:
        raise ValueError("revert needs f = x + O(x^2)")
    n_max = f._order // LATTICE
    phi = (f.shift(-1)).inverse()  # x/f, known to order n_max - 1
    out = {}
    power = TruncatedSeries.constant(1, None, f.var)
    for n in range(1, n_max):
        power = power * phi
        out[n] = power.coefficient(n - 1) * Fraction(1, n)
    return TruncatedSeries(out, n_max, f.var)


# ---------------------------------------------------------------------------
# modular forms

_EIS_WEIGHTS = (2, 4, 6)


def eisenstein_constant(k: int) -> Fraction:
    """c_k = -2k/B_k for E_k = 1 + c_k sum sigma_{k-1}(n) q^n."""
    if k not in _EIS_WEIGHTS:
        raise UnsupportedWeight(f"weight {k} not supported (use 2, 4 or 6)")
    b = sympy.bernoulli(k)
    return Fraction(-2 * k) / Fraction(int(b.p), int(b.q))


def eisenstein(k: int, order=DEFAULT_ORDER) -> TruncatedSeries:
    c = eisenstein_constant(k)
    n = int(Fraction(order)) + (0 if Fraction(order).denominator == 1 else 1)
    coeffs = {0: 1}
    for m in range(1, n):
        if m < order:
            coeffs[m] = c * int(sympy.divisor_sigma(m, k - 1))
    return TruncatedSeries(coeffs, order)


@dataclass(frozen=True)
class EtaQuotientSpec:
    """prefactor * q^extra * prod eta(m tau)^e."""

    factors: tuple  # ((m, e), ...)
    prefactor: FieldConstant = FieldConstant(1)
    extra_q_power: Fraction = Fraction(0)

    def __post_init__(self):
        for m, e in self.factors:
            if not isinstance(m, int) or m < 1 or not isinstance(e, int):
                raise ValueError(f"bad eta factor ({m}, {e})")

    def leading_exponent(self) -> Fraction:
        return Fraction(self.extra_q_power) + sum(Fraction(m * e, LATTICE) for m, e in self.factors)


def _euler_product(n: int):
    """prod_{k>=1} (1 - x^k) coefficients up to x^(n-1), by direct multiplication."""
    p = [0] * n
    if n == 0:
        return p
    p[0] = 1
    for k in range(1, n):
        for i in range(n - 1, k - 1, -1):
            p[i] -= p[i - k]
    return p


def eta_quotient(spec: EtaQuotientSpec, order=DEFAULT_ORDER) -> TruncatedSeries:
    lead = spec.leading_exponent()
    rel = Fraction(order) - lead
    if rel <= 0:
        return TruncatedSeries({}, order)
    n = int(rel) + (0 if rel.denominator == 1 else 1)
    unit = [FieldConstant(1)] + [FieldConstant(0)] * (n - 1)
    base = [FieldConstant(c) for c in _euler_product(n)]
    for m, e in spec.factors:
        scaled = [FieldConstant(0)] * n
        for i in range(0, (n - 1) // m + 1):
            scaled[i * m] = base[i]
        powered = _miller(scaled, Fraction(e), n)
        unit = _mul_lists(unit, powered, n)
    coeffs = {lead + i: spec.prefactor * c for i, c in enumerate(unit) if c}
    return TruncatedSeries(coeffs, order)


def _mul_lists(a, b, n):
    out = [FieldConstant(0)] * n
    for i, x in enumerate(a):
        if not x:
            continue
        for j in range(0, n - i):
            y = b[j]
            if y:
                out[i + j] = out[i + j] + x * y
    return out


def eta(m: int = 1, e: int = 1, order=DEFAULT_ORDER) -> TruncatedSeries:
    return eta_quotient(EtaQuotientSpec(((m, e),)), order)


LEVELS = ("1*", "2", "3")
EXPONENT_R = {"1*": 6, "2": 4, "3": 3}


def _level(N) -> str:
    key = str(N).replace("star", "*")
    if key not in EXPONENT_R:
        raise ValueError(f"unknown level {N!r}; expected one of 1*, 2, 3")
    return key


@dataclass(frozen=True)
class WeightOneForms:
    """The weight-one forms A, B, C of a level with exponent r.

    When ``c_radicand`` is not 1 the true C equals c_radicand**(1/r) times the
    stored series ``C`` (the root lies outside every quadratic field).
    """

    N: str
    r: int
    A: TruncatedSeries
    B: TruncatedSeries
    C: TruncatedSeries
    c_radicand: Fraction = Fraction(1)


def _pad(order) -> Fraction:
    return Fraction(order) + 2


def form_ABC(N, order=DEFAULT_ORDER) -> WeightOneForms:
    key = _level(N)
    big = _pad(order)
    o = Fraction(order)
    if key == "3":
        e1, e3 = eta(1, 1, big + 2), eta(3, 1, big + 2)
        num = 27 * eta(3, 12, big + 2) + eta(1, 12, big + 2)
        A = nth_root(num, 3) / (e1 * e3)
        B = eta_quotient(EtaQuotientSpec(((1, 3), (3, -1))), big)
        C = eta_quotient(EtaQuotientSpec(((3, 3), (1, -1)), FieldConstant(3)), big)
        rad = Fraction(1)
    elif key == "2":
        num = 64 * eta(2, 24, big + 2) + eta(1, 24, big + 2)
        A = nth_root(num, 4) / eta_quotient(EtaQuotientSpec(((1, 2), (2, 2))), big + 2)
        B = eta_quotient(EtaQuotientSpec(((1, 4), (2, -2))), big)
        C = eta_quotient(EtaQuotientSpec(((2, 4), (1, -2)), FieldConstant(0, 2, 2)), big)
        rad = Fraction(1)
    else:
        E4, E6 = eisenstein(4, big), eisenstein(6, big)
        A = nth_root(E4, 4)
        E4_32 = A**6
        B = nth_root((E4_32 + E6) * Fraction(1, 2), 6)
        rad = Fraction(432)
        C = nth_root((E4_32 - E6) * Fraction(1, 2 * 432), 6)
    return WeightOneForms(key, EXPONENT_R[key], A.truncate(o), B.truncate(o), C.truncate(o), rad)


def hauptmodul(N, order=DEFAULT_ORDER) -> TruncatedSeries:
    f = form_ABC(N, _pad(order))
    return ((f.C / f.A) ** f.r * f.c_radicand).truncate(order)


def eisenstein_analogue(N, order=DEFAULT_ORDER) -> TruncatedSeries:
    """E = r theta(B)/B + r theta(C)/C."""
    f = form_ABC(N, _pad(order))
    E = theta_q(f.B) / f.B * f.r + theta_q(f.C) / f.C * f.r
    return E.truncate(order)


def named_form(name: str, N=None, order=DEFAULT_ORDER) -> TruncatedSeries:
    """Lookup used by the CLI: E2, E4, E6, eta, and A, B, C, alpha, E for a level."""
    key = name.strip()
    if key in ("E2", "E4", "E6"):
        return eisenstein(int(key[1]), order)
    if key == "eta":
        return eta(1, 1, order)
    if N is None:
        raise ValueError(f"form {name!r} needs a level")
    if key == "alpha":
        return hauptmodul(N, order)
    if key == "E":
        return eisenstein_analogue(N, order)
    if key in ("A", "B", "C"):
        return getattr(form_ABC(N, order), key)
    raise ValueError(f"unknown form {name!r}")
