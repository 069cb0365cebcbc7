"""Picard-Fuchs reduction to Gauss-Manin connection matrices in a chosen basis."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .exact import (FunctionField, NonUnique, NoSolution, RationalFunction, mat_add, mat_inv, mat_map,
                    mat_mul, mat_str, parse_expression, solve_linear)
from .geometry import Geometry, GaugeMatrix


class ReductionStuck(ArithmeticError):
    pass


class SingularGauge(ArithmeticError):
    pass


class OperatorWord:
    """Differential operator sum_m c_m(z) theta^m with coefficients on the left.

    theta_i acts as z_i d/dz_i; composition uses theta_i f = f theta_i + theta_i(f).
    """

    def __init__(self, ctx: FunctionField, terms: dict | None = None):
        self.ctx = ctx
        self.n = len(ctx.variables)
        self.terms = {m: c for m, c in (terms or {}).items() if not c.is_zero()}

    @classmethod
    def scalar(cls, ctx, f) -> "OperatorWord":
        return cls(ctx, {(0,) * len(ctx.variables): ctx.coerce(f)})

    @classmethod
    def theta(cls, ctx, i: int) -> "OperatorWord":
        m = [0] * len(ctx.variables)
        m[i] = 1
        return cls(ctx, {tuple(m): ctx.one()})

    def _lift(self, o) -> "OperatorWord":
        if isinstance(o, OperatorWord):
            return o
        return OperatorWord.scalar(self.ctx, o)

    def __add__(self, o):
        o = self._lift(o)
        t = dict(self.terms)
        for m, c in o.terms.items():
            t[m] = t[m] + c if m in t else c
        return OperatorWord(self.ctx, t)

    __radd__ = __add__

    def __neg__(self):
        return OperatorWord(self.ctx, {m: -c for m, c in self.terms.items()})

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) - self

    def theta_left(self, i: int) -> "OperatorWord":
        """theta_i composed on the left."""
        v = self.ctx.variables[i]
        t = {}
        for m, c in self.terms.items():
            mm = list(m)
            mm[i] += 1
            mm = tuple(mm)
            t[mm] = t[mm] + c if mm in t else c
            d = c.theta(v)
            if not d.is_zero():
                t[m] = t[m] + d if m in t else d
        return OperatorWord(self.ctx, t)

    def left_scale(self, f) -> "OperatorWord":
        f = self.ctx.coerce(f)
        return OperatorWord(self.ctx, {m: f * c for m, c in self.terms.items()})

    def __mul__(self, o):
        """Composition self o other."""
        if not isinstance(o, OperatorWord):
            return self.compose(OperatorWord.scalar(self.ctx, o))
        return self.compose(o)

    def __rmul__(self, o):
        return OperatorWord.scalar(self.ctx, o).compose(self)

    def compose(self, o: "OperatorWord") -> "OperatorWord":
        out = OperatorWord(self.ctx)
        cache = {(0,) * self.n: o}
        for m, c in self.terms.items():
            out = out + _theta_power(o, m, cache).left_scale(c)
        return out

    def __truediv__(self, o):
        if isinstance(o, OperatorWord):
            if any(sum(m) for m in o.terms):
                raise ValueError("cannot divide by a differential operator")
            o = o.terms.get((0,) * self.n, self.ctx.zero())
        return self.left_scale(1 / self.ctx.coerce(o))

    def __rtruediv__(self, o):
        if any(sum(m) for m in self.terms):
            raise ValueError("cannot divide by a differential operator")
        return OperatorWord.scalar(self.ctx, self.ctx.coerce(o) / self.terms.get((0,) * self.n, self.ctx.zero()))

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("operator powers must be non-negative integers")
        out = OperatorWord.scalar(self.ctx, 1)
        for _ in range(k):
            out = out.compose(self)
        return out

    def __eq__(self, o):
        d = self - o
        return not d.terms

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def coefficient(self, m) -> RationalFunction:
        return self.terms.get(tuple(m), self.ctx.zero())

    def apply(self, f: RationalFunction) -> RationalFunction:
        out = self.ctx.zero()
        for m, c in self.terms.items():
            g = self.ctx.coerce(f)
            for i, k in enumerate(m):
                for _ in range(k):
                    g = g.theta(self.ctx.variables[i])
            out = out + c * g
        return out

    def __str__(self):
        names = theta_names(self.ctx)
        parts = []
        for m in sorted(self.terms, key=lambda m: (-sum(m), tuple(-x for x in m))):
            c = self.terms[m]
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, m) if k)
            cs = str(c)
            if not mono:
                parts.append(f"({cs})")
            elif cs == "1":
                parts.append(mono)
            else:
                parts.append(f"({cs})*{mono}")
        return " + ".join(parts) if parts else "0"

    __repr__ = __str__


def _theta_power(o: OperatorWord, m, cache):
    m = tuple(m)
    if m in cache:
        return cache[m]
    i = max(j for j, k in enumerate(m) if k)
    prev = list(m)
    prev[i] -= 1
    r = _theta_power(o, prev, cache).theta_left(i)
    cache[m] = r
    return r


def theta_names(ctx: FunctionField):
    if len(ctx.variables) == 1:
        return ["theta"]
    return [f"theta{i + 1}" for i in range(len(ctx.variables))]


def parse_operator(text: str, ctx: FunctionField, extra: dict | None = None) -> OperatorWord:
    ns = {n: OperatorWord.theta(ctx, i) for i, n in enumerate(theta_names(ctx))}
    ns.update({v: OperatorWord.scalar(ctx, ctx.gen(v)) for v in ctx.variables})
    for k, v in (extra or {}).items():
        ns[k] = OperatorWord.scalar(ctx, v)
    val = parse_expression(text, ns)
    if not isinstance(val, OperatorWord):
        val = OperatorWord.scalar(ctx, val)
    return val


def pf_operators(geo: Geometry, ctx: FunctionField | None = None):
    ctx = ctx or geo.ctx
    return [parse_operator(p, ctx) for p in geo.pf]


def basis_operators(geo: Geometry, ctx: FunctionField | None = None):
    ctx = ctx or geo.ctx
    ys = geo.yukawa_values(ctx)
    out = []
    for pre, word in geo.basis:
        out.append(parse_operator(word, ctx).left_scale(ctx.parse(pre, ys)))
    return out


def _monomials(n, D):
    return [m for m in product(range(D + 1), repeat=n) if sum(m) <= D]


def reduce_word(word: OperatorWord, basis, operators, extra_degree: int = 3):
    """Coefficients c with word = sum c_j basis_j modulo the left ideal of the operators.

    Multiples theta^b o L with total degree <= D are used as ideal elements; D grows
    from the largest degree involved until the basis coefficients are determined.
    """
    ctx = word.ctx
    n = len(ctx.variables)
    base = max([word.degree()] + [b.degree() for b in basis] + [L.degree() for L in operators])
    for D in range(base, base + extra_degree + 1):
        mults = []
        for L in operators:
            for b in _monomials(n, D - L.degree()):
                mults.append(_theta_power(L, b, {(0,) * n: L}))
        monos = _monomials(n, D)
        cols = list(basis) + mults
        M = [[c.coefficient(m) for c in cols] for m in monos]
        rhs = [word.coefficient(m) for m in monos]
        try:
            sol = solve_linear(M, rhs)
        except NoSolution:
            continue
        except NonUnique as nu:
            if any(not v[j].is_zero() for v in nu.kernel for j in range(len(basis))):
                continue
            sol = nu.particular
        return [ctx.coerce(x) for x in sol[:len(basis)]]
    raise ReductionStuck(f"could not reduce {word} within degree {base + extra_degree}")


@dataclass
class ConnectionMatrix:
    """A_theta for each variable: theta_v(omega_j) = sum_k A[j][k] omega_k."""

    geometry: str
    variables: list
    theta_matrices: dict

    def d_matrix(self, v: str):
        """Matrix for d/dv instead of theta_v."""
        ctx = self.theta_matrices[v][0][0].ctx
        z = ctx.gen(v)
        return mat_map(lambda x: x / z, self.theta_matrices[v])

    def __str__(self):
        return "\n".join(f"A_theta_{v} = {mat_str(m)}" for v, m in self.theta_matrices.items())


def connection_matrix(geo: Geometry, ctx: FunctionField | None = None) -> ConnectionMatrix:
    ctx = ctx or geo.ctx
    ops = pf_operators(geo, ctx)
    basis = basis_operators(geo, ctx)
    mats = {}
    for i, v in enumerate(geo.variables):
        mats[v] = [reduce_word(b.theta_left(i), basis, ops) for b in basis]
    return ConnectionMatrix(geo.name, list(geo.variables), mats)


def gauge_transform(A_theta, S, var: str):
    """Connection matrix of the frame S*omega along theta_var: (theta S + S A) S^-1."""
    try:
        Sinv = mat_inv(S)
    except ZeroDivisionError as exc:
        raise SingularGauge(str(exc)) from None
    dS = mat_map(lambda x: x.theta(var), S)
    return mat_mul(mat_add(dS, mat_mul(S, A_theta)), Sinv)


def lift_matrix(M, ctx: FunctionField):
    return mat_map(lambda x: x.lift(ctx), M)


def enhanced_connection(geo: Geometry, gauge: GaugeMatrix | None = None):
    """(enhanced field, S over it, {var: A_theta over it})."""
    gauge = gauge or geo.gauge()
    ctx = FunctionField(list(geo.variables) + list(gauge.parameters))
    conn = connection_matrix(geo)
    A = {v: lift_matrix(m, ctx) for v, m in conn.theta_matrices.items()}
    return ctx, lift_matrix(gauge.entries, ctx), A


def flatness_defects(conn: ConnectionMatrix):
    """theta_i A_j + A_j A_i - theta_j A_i - A_i A_j for every pair (zero when flat)."""
    out = {}
    vs = conn.variables
    for a in range(len(vs)):
        for b in range(a + 1, len(vs)):
            vi, vj = vs[a], vs[b]
            Ai, Aj = conn.theta_matrices[vi], conn.theta_matrices[vj]
            lhs = mat_add(mat_map(lambda x: x.theta(vi), Aj), mat_mul(Aj, Ai))
            rhs = mat_add(mat_map(lambda x: x.theta(vj), Ai), mat_mul(Ai, Aj))
            out[(vi, vj)] = [[l - r for l, r in zip(rl, rr)] for rl, rr in zip(lhs, rhs)]
    return out


def is_flat(conn: ConnectionMatrix) -> bool:
    return all(x.is_zero() for d in flatness_defects(conn).values() for row in d for x in row)


def annihilates(geo: Geometry, conn: ConnectionMatrix) -> bool:
    """Each Picard-Fuchs operator maps omega_1 to zero under the connection."""
    ctx = geo.ctx
    n = geo.shape.b_n
    for L in pf_operators(geo, ctx):
        total = [ctx.zero()] * n
        cache = {}

        def vec(m):
            m = tuple(m)
            if m in cache:
                return cache[m]
            if not any(m):
                r = [ctx.one()] + [ctx.zero()] * (n - 1)
            else:
                i = max(j for j, k in enumerate(m) if k)
                p = list(m)
                p[i] -= 1
                prev = vec(p)
                A = conn.theta_matrices[geo.variables[i]]
                v = geo.variables[i]
                r = [prev[k].theta(v) + sum((prev[j] * A[j][k] for j in range(n)), ctx.zero()) for k in range(n)]
            cache[m] = r
            return r

        for m, c in L.terms.items():
            w = vec(m)
            total = [t + c * x for t, x in zip(total, w)]
        if any(not t.is_zero() for t in total):
            return False
    return True


def reduce(geo: Geometry) -> list:
    """A_theta for each variable, in variable order."""
    conn = connection_matrix(geo)
    return [conn.theta_matrices[v] for v in geo.variables]
