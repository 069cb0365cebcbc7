"""Frobenius solutions at a point of maximal unipotent monodromy, mirror maps and the q-series bridge."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

from .exact import FunctionField, Polynomial, RationalFunction
from .gaussmanin import OperatorWord, parse_operator
from .geometry import Geometry
from .qmrings import CheckResult
from .qseries import (TruncatedSeries, eisenstein, eta, eisenstein_analogue, exp_series, form_ABC, hauptmodul,
                      revert, theta_q)


class NotMUM(ValueError):
    pass


class BridgeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# operators as sum_i z^i P_i(theta)

def theta_polynomials(L: OperatorWord):
    """[P_0, P_1, ...] (coefficient lists in theta) with L = z^s sum_i z^i P_i(theta) after clearing denominators."""
    ctx = L.ctx
    if len(ctx.variables) != 1:
        raise ValueError("Frobenius solutions need a one-variable operator")
    den = None
    for c in L.terms.values():
        d = c.denominator
        den = d if den is None else Polynomial(ctx, den.raw.lcm(d.raw))
    denf = RationalFunction(ctx, ctx.sym_field(den.raw)) if den is not None else ctx.one()
    table = {}
    for (j,), c in L.terms.items():
        num = (c * denf).numerator
        for (i,), a in num.terms().items():
            if not a.is_rational:
                raise ValueError("operator coefficients must be rational")
            table.setdefault(i, {})[j] = a.a
    if not table:
        raise ValueError("zero operator")
    lo = min(table)
    top = max(table)
    order = max(j for row in table.values() for j in row)
    return [[table.get(i, {}).get(j, Fraction(0)) for j in range(order + 1)] for i in range(lo, top + 1)], order


def _eps_eval(P, m, n):
    """P(m + eps) as a list of n eps-coefficients."""
    out = [Fraction(0)] * n
    for j, c in enumerate(P):
        if not c:
            continue
        for k in range(min(j, n - 1) + 1):
            out[k] += c * comb(j, k) * Fraction(m) ** (j - k)
    return out


def _eps_mul(a, b, n):
    out = [Fraction(0)] * n
    for i, x in enumerate(a):
        if x:
            for j in range(n - i):
                out[i + j] += x * b[j]
    return out


def _eps_div(a, b, n):
    if not b[0]:
        raise ZeroDivisionError("eps-series with zero constant term")
    out = [Fraction(0)] * n
    for k in range(n):
        acc = a[k] - sum(out[i] * b[k - i] for i in range(k))
        out[k] = acc / b[0]
    return out


@dataclass
class LogSeries:
    """sum_k L^k * parts[k](z) with L = log z."""

    parts: list
    var: str = "z"

    def theta(self) -> "LogSeries":
        out = [theta_q(p) for p in self.parts]
        for k in range(1, len(self.parts)):
            out[k - 1] = out[k - 1] + self.parts[k] * k
        return LogSeries(out, self.var)

    def scale(self, c) -> "LogSeries":
        return LogSeries([p * c for p in self.parts], self.var)

    def __add__(self, o):
        n = max(len(self.parts), len(o.parts))
        zero = self.parts[0] * 0
        a = self.parts + [zero] * (n - len(self.parts))
        b = o.parts + [zero] * (n - len(o.parts))
        return LogSeries([x + y for x, y in zip(a, b)], self.var)

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self.parts)

    def __str__(self):
        terms = []
        for k, p in enumerate(self.parts):
            if p.is_zero():
                continue
            s = str(p)
            terms.append(s if k == 0 else f"({s})*log({self.var})" + (f"^{k}" if k > 1 else ""))
        return " + ".join(terms) if terms else "0"


def local_basis(L: OperatorWord, order: int = 20):
    """Frobenius basis [w_0, ..., w_{n-1}] with w_k = sum_j L^{k-j}/(k-j)! A_j(z), A_0 = 1 + O(z)."""
    polys, n = theta_polynomials(L)
    P0 = polys[0]
    if any(P0[j] for j in range(n)) or not P0[n]:
        raise NotMUM("indicial polynomial is not a pure power of theta (exponents not all zero)")
    var = L.ctx.variables[0]
    a = [[Fraction(1)] + [Fraction(0)] * (n - 1)]
    for m in range(1, order):
        acc = [Fraction(0)] * n
        for i in range(1, len(polys)):
            if m - i < 0:
                break
            term = _eps_mul(_eps_eval(polys[i], m - i, n), a[m - i], n)
            acc = [x - y for x, y in zip(acc, term)]
        a.append(_eps_div(acc, _eps_eval(P0, m, n), n))
    A = [TruncatedSeries({m: a[m][j] for m in range(order)}, order, var) for j in range(n)]
    return [LogSeries([A[k - l] * Fraction(1, factorial(l)) for l in range(k + 1)], var) for k in range(n)]


def apply_operator(L: OperatorWord, w: LogSeries) -> LogSeries:
    polys, n = theta_polynomials(L)
    var = L.ctx.variables[0]
    out = None
    powers = [w]
    for _ in range(n):
        powers.append(powers[-1].theta())
    for i, P in enumerate(polys):
        acc = None
        for j, c in enumerate(P):
            if c:
                t = powers[j].scale(c)
                acc = t if acc is None else acc + t
        if acc is None:
            continue
        shifted = LogSeries([p.shift(i) for p in acc.parts], var)
        out = shifted if out is None else out + shifted
    return out


# ---------------------------------------------------------------------------
# mirror map

@dataclass
class MirrorMap:
    q_of_z: TruncatedSeries      # q = z exp(h(z))
    z_of_q: TruncatedSeries      # z = q + O(q^2)

    def round_trip_ok(self) -> bool:
        from .qseries import compose
        n = min(self.q_of_z.order, self.z_of_q.order)
        back = compose(_rename(self.z_of_q, "z"), self.q_of_z)
        return back.agrees_with(TruncatedSeries.monomial(1, 1, n, "z"), n)


def _rename(s: TruncatedSeries, var: str) -> TruncatedSeries:
    return TruncatedSeries(dict(s.items()), s.order, var)


def mirror_map(L: OperatorWord, order: int = 20) -> MirrorMap:
    basis = local_basis(L, order + 1)
    if len(basis) < 2:
        raise NotMUM("need a logarithmic solution for the mirror map")
    w0, w1 = basis[0], basis[1]
    if len(w1.parts) != 2:
        raise NotMUM("unexpected log structure")
    h = w1.parts[0] / w0.parts[0]
    q = exp_series(h.truncate(order)).shift(1).truncate(order)
    zq = revert(q)
    return MirrorMap(q, _rename(zq, "q"))


# ---------------------------------------------------------------------------
# evaluation of rational functions at series

def eval_polynomial(p: Polynomial, values: dict, order) -> TruncatedSeries:
    out = TruncatedSeries({}, order)
    for exps, c in p.terms().items():
        t = TruncatedSeries.constant(c, order)
        for v, e in zip(p.ctx.variables, exps):
            if e:
                t = t * values[v] ** e
        out = out + t
    return out


def eval_rational(f: RationalFunction, values: dict, order) -> TruncatedSeries:
    return eval_polynomial(f.numerator, values, order) / eval_polynomial(f.denominator, values, order)


# ---------------------------------------------------------------------------
# bridge for one-variable geometries

@dataclass
class BridgeData:
    z: TruncatedSeries            # z(q)
    X: TruncatedSeries            # square of the top gauge coordinate along the flow
    P: TruncatedSeries            # product of the two free gauge coordinates
    E: TruncatedSeries
    phi: RationalFunction         # dz(R) = phi(z) X
    psi: RationalFunction         # theta P + P^2 = psi(z) X^2
    kappa: Fraction
    r: int
    A2_over_X: Fraction
    order: int


def bridge_data(geo: Geometry, order: int = 20) -> BridgeData:
    """Gauge coordinates along the modular flow, as q-series, using the solved modular field."""
    from .vfsolver import EnhancedSpace
    from .qseries import EXPONENT_R
    if len(geo.variables) != 1 or not geo.bridge or "X" not in geo.bridge:
        raise BridgeError(f"{geo.name}: no one-variable bridge data")
    b = geo.bridge
    v = geo.variables[0]
    space = EnhancedSpace(geo)
    R = space.modular_fields()[0].field
    ctx = space.ctx
    sx, sp = ctx.gen(b["X"]), ctx.gen(b["P"])
    X = sx * sx
    phi = R[v] / X
    if phi.free_variables() - {v}:
        raise BridgeError("dz(R) is not phi(z) times the squared top coordinate")
    if R[b["X"]] != -sp * sx * sx:
        raise BridgeError("the top coordinate does not follow d s = -P s^2")
    psi = R[b["P"]] * sx / (X * X)
    if psi.free_variables() - {v}:
        raise BridgeError("the remaining component is not psi(z) times the squared coordinate")
    zctx = FunctionField([v])
    phi, psi = phi.lift(zctx), psi.lift(zctx)
    pad = order + 3
    L = parse_operator(geo.curve_pf or geo.pf[0], zctx)
    mm = mirror_map(L, pad)
    zq = mm.z_of_q
    Xq = theta_q(zq) / eval_rational(phi, {v: zq}, pad)
    Pq = theta_q(Xq) / Xq * Fraction(-1, 2)
    kappa_f = zctx.parse(b["alpha"]) / zctx.gen(v)
    kappa = kappa_f.constant_value().a
    r = EXPONENT_R[b["level"]]
    one = TruncatedSeries.constant(1, pad)
    Eq = (eval_rational(phi, {v: zq}, pad) * Xq * (zq.inverse() - (one - zq * kappa).inverse() * kappa)
          - Pq * (2 * r))
    c = Fraction(zctx.parse(b["A2_over_X"]).constant_value().a)
    return BridgeData(zq.truncate(order), Xq.truncate(order), Pq.truncate(order), Eq.truncate(order), phi, psi,
                      kappa, r, c, order)


def _cmp(cid, statement, lhs: TruncatedSeries, rhs: TruncatedSeries, order) -> CheckResult:
    diff = lhs.first_difference(rhs, order)
    if diff is None:
        return CheckResult(cid, statement, True, "")
    e, a, bb = diff
    return CheckResult(cid, statement, False, f"first difference at q^{e}: {a} vs {bb}")


def bridge_checks(geo: Geometry, order: int = 20) -> list:
    d = bridge_data(geo, order)
    N = geo.bridge["level"]
    v = geo.variables[0]
    forms = form_ABC(N, order + 2)
    out = []
    out.append(_cmp("bridge.hauptmodul", f"{geo.bridge['alpha']} (q) = (C/A)^{d.r} (level {N})",
                    d.z * d.kappa, hauptmodul(N, order), order))
    out.append(_cmp("bridge.A2", f"{d.A2_over_X} * {geo.bridge['X']}^2 (q) = A^2 (level {N})",
                    d.X * d.A2_over_X, (forms.A * forms.A).truncate(order), order))
    out.append(_cmp("bridge.E", "E(q) = r theta log(B C)", d.E, eisenstein_analogue(N, order), order))
    lhs = theta_q(d.P) + d.P * d.P
    rhs = eval_rational(d.psi, {v: d.z}, order + 2) * d.X * d.X
    out.append(_cmp("bridge.unused", f"theta P + P^2 = ({d.psi}) X^2 (remaining field component)",
                    lhs.truncate(order - 1), rhs.truncate(order - 1), order - 1))
    if N == "1*":
        out.append(_cmp("bridge.E4", "s22^4 (q) = E4(q)", d.X * d.X, eisenstein(4, order), order))
        out.append(_cmp("bridge.E2", "(1 - 864 z) s22^2 - 12 s21 s22 = E2(q)",
                        (TruncatedSeries.constant(1, order) - d.z * 864) * d.X - d.P * 12, eisenstein(2, order), order))
    if N == "3":
        pad = order + 4
        e1, e3 = eta(1, 1, pad), eta(3, 1, pad)
        cube = (eta(3, 12, pad) * 27 + eta(1, 12, pad)) / (e1 ** 3 * e3 ** 3)
        out.append(_cmp("bridge.A6", "-27 s33^6 (q) = ((27 eta(3t)^12 + eta(t)^12) / (eta(t)^3 eta(3t)^3))^2",
                        d.X ** 3 * -27, (cube * cube).truncate(order), order))
    return out
