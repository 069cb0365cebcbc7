"""Modular and Lie vector fields on the enhanced moduli space, brackets and classification."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product

from .exact import (FieldConstant, FunctionField, NonUnique, NoSolution, Polynomial, RationalFunction, mat_mul,
                    solve_linear)
from .gaussmanin import enhanced_connection
from .geometry import Geometry, GaugeMatrix, lie_generators


class NotInSpan(ArithmeticError):
    pass


class VectorField:
    """sum_k X^k d/dx_k over a FunctionField whose variables are the coordinates."""

    def __init__(self, ctx: FunctionField, components: dict, name: str = ""):
        self.ctx = ctx
        self.components = {v: ctx.coerce(components.get(v, 0)) for v in ctx.variables}
        self.name = name

    def __getitem__(self, v):
        return self.components[v]

    def apply(self, f) -> RationalFunction:
        f = self.ctx.coerce(f)
        out = self.ctx.zero()
        for v, c in self.components.items():
            if not c.is_zero():
                out = out + c * f.diff(v)
        return out

    __call__ = apply

    def bracket(self, other: "VectorField") -> "VectorField":
        return VectorField(self.ctx, {v: self.apply(other[v]) - other.apply(self[v]) for v in self.ctx.variables})

    def __add__(self, o):
        return VectorField(self.ctx, {v: self[v] + o[v] for v in self.ctx.variables})

    def __sub__(self, o):
        return VectorField(self.ctx, {v: self[v] - o[v] for v in self.ctx.variables})

    def __neg__(self):
        return VectorField(self.ctx, {v: -self[v] for v in self.ctx.variables})

    def scale(self, c) -> "VectorField":
        return VectorField(self.ctx, {v: self[v] * c for v in self.ctx.variables})

    __rmul__ = scale

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components.values())

    def __eq__(self, o):
        return isinstance(o, VectorField) and (self - o).is_zero()

    def __str__(self):
        parts = []
        for v, c in self.components.items():
            if c.is_zero():
                continue
            cs = str(c)
            if cs == "1":
                parts.append(f"d/d{v}")
            elif cs == "-1":
                parts.append(f"-d/d{v}")
            else:
                parts.append(f"({cs})*d/d{v}")
        return " + ".join(parts) if parts else "0"

    __repr__ = __str__


@dataclass
class ModularSolution:
    name: str
    field: VectorField
    yukawa: dict                 # slot label -> solved value


class EnhancedSpace:
    """Gauss-Manin connection in the gauged frame S*omega over the enhanced coordinates."""

    def __init__(self, geo: Geometry, gauge: GaugeMatrix | None = None):
        self.geo = geo
        self.gauge: GaugeMatrix = gauge or geo.gauge()
        self.ctx, self.S, self.A_theta = enhanced_connection(geo, self.gauge)
        self.coords = list(self.ctx.variables)
        n = geo.shape.b_n
        # N_k with nabla_{d/dx_k}(S omega) = N_k S^{-1} (S omega); stored as N_k so no inverse is needed
        self.N = {}
        for v in geo.variables:
            z = self.ctx.gen(v)
            SA = mat_mul(self.S, self.A_theta[v])
            self.N[v] = [[SA[i][j] / z + self.S[i][j].diff(v) for j in range(n)] for i in range(n)]
        for p in self.gauge.parameters:
            self.N[p] = [[self.S[i][j].diff(p) for j in range(n)] for i in range(n)]

    def _solve(self, target_rows, slots):
        """Solve sum_k X_k N_k = T S for X and the unknown slots of T (linear)."""
        n = self.geo.shape.b_n
        ctx = self.ctx
        unknowns = len(self.coords) + len(slots)
        M, rhs = [], []
        for i in range(n):
            for j in range(n):
                row = [self.N[k][i][j] for k in self.coords]
                const = ctx.zero()
                slot_coeffs = [ctx.zero()] * len(slots)
                for l in range(n):
                    t = target_rows[i][l]
                    if t == "Y":
                        slot_coeffs[slots.index((i, l))] = self.S[l][j]
                    elif t != 0 and t != "0":
                        const = const + ctx.coerce(t) * self.S[l][j]
                M.append(row + [-c for c in slot_coeffs])
                rhs.append(const)
        sol = solve_linear(M, rhs)
        X = dict(zip(self.coords, sol[:len(self.coords)]))
        Y = {f"Y[{i + 1}][{l + 1}]": v for (i, l), v in zip(slots, sol[len(self.coords):unknowns])}
        return X, Y

    def modular_field(self, name: str) -> ModularSolution:
        pattern = self.geo.vf_shapes[name]
        slots = [(i, j) for i, row in enumerate(pattern) for j, x in enumerate(row) if x == "Y"]
        rows = [[x if x == "Y" else int(x) for x in row] for row in pattern]
        X, Y = self._solve(rows, slots)
        return ModularSolution(name, VectorField(self.ctx, X, name), Y)

    def modular_fields(self):
        return [self.modular_field(name) for name in self.geo.vf_shapes]

    def lie_fields(self):
        """[(name, VectorField)] realising each infinitesimal gauge direction."""
        out = []
        for p, g in lie_generators(self.gauge):
            X, _ = self._solve([[Fraction(x) for x in row] for row in g], [])
            out.append((f"Rg{p[1:]}", VectorField(self.ctx, X, f"Rg{p[1:]}")))
        return out

    def all_fields(self):
        fields = [(m.name, m.field) for m in self.modular_fields()]
        return fields + self.lie_fields()


def solve_modular(geo: Geometry, name: str | None = None) -> ModularSolution:
    space = EnhancedSpace(geo)
    return space.modular_field(name or next(iter(geo.vf_shapes)))


def solve_lie(geo: Geometry, g) -> VectorField:
    """Vector field R with nabla_R(S omega) = g (S omega) for a constant matrix g."""
    space = EnhancedSpace(geo)
    X, _ = space._solve([[Fraction(x) for x in row] for row in g], [])
    return VectorField(space.ctx, X)


def bracket(X: VectorField, Y: VectorField) -> VectorField:
    return X.bracket(Y)


# ---------------------------------------------------------------------------
# constant structure coefficients

def constant_span(target: VectorField, basis) -> list:
    """Rational constants c with target = sum c_i basis_i; raises NotInSpan."""
    ctx = target.ctx
    unknowns = len(basis)
    rows, rhs = [], []
    for v in ctx.variables:
        parts = [b[v] for b in basis] + [target[v]]
        den = None
        for f in parts:
            d = f.denominator
            den = d if den is None else _lcm(den, d)
        polys = [(f * RationalFunction(ctx, ctx.sym_field(den.raw))).numerator for f in parts]
        monos = set()
        for p in polys:
            monos.update(p.terms())
        for m in monos:
            rows.append([_as_number(polys[i].terms().get(m, 0)) for i in range(unknowns)])
            rhs.append(_as_number(polys[-1].terms().get(m, 0)))
    if not rows:
        return [Fraction(0)] * unknowns
    try:
        return solve_linear(rows, rhs)
    except NoSolution:
        raise NotInSpan(f"{target} is not a constant combination") from None
    except NonUnique as nu:
        return nu.particular


def _lcm(a: Polynomial, b: Polynomial) -> Polynomial:
    return Polynomial(a.ctx, a.raw.lcm(b.raw))


def _as_number(c):
    if isinstance(c, FieldConstant):
        if c.is_rational:
            return c.a
        raise NotInSpan("irrational structure constants are not supported")
    if isinstance(c, (int, Fraction)):
        return Fraction(c)
    raise NotInSpan("irrational structure constants are not supported")


def bracket_table(fields):
    """{(a, b): {c: coefficient}} for a < b in the given order; raises NotInSpan if not closed."""
    names = [n for n, _ in fields]
    vfs = [f for _, f in fields]
    table = {}
    for i, j in combinations(range(len(fields)), 2):
        br = vfs[i].bracket(vfs[j])
        coeffs = constant_span(br, vfs)
        table[(names[i], names[j])] = {names[k]: c for k, c in enumerate(coeffs) if c != 0}
    return table


def format_bracket(a, b, coeffs) -> str:
    if not coeffs:
        rhs = "0"
    else:
        parts = []
        for name, c in coeffs.items():
            if c == 1:
                parts.append(f"+ {name}")
            elif c == -1:
                parts.append(f"- {name}")
            elif c > 0:
                parts.append(f"+ {c}*{name}")
            else:
                parts.append(f"- {-c}*{name}")
        rhs = " ".join(parts)
        rhs = rhs[2:] if rhs.startswith("+ ") else "-" + rhs[2:]
    return f"[{a}, {b}] = {rhs}"


def jacobi_defects(fields):
    out = []
    for (na, a), (nb, b), (nc, c) in combinations(fields, 3):
        s = a.bracket(b.bracket(c)) + b.bracket(c.bracket(a)) + c.bracket(a.bracket(b))
        if not s.is_zero():
            out.append((na, nb, nc))
    return out


# ---------------------------------------------------------------------------
# abstract Lie algebra classification from structure constants

class StructureConstants:
    def __init__(self, names, table):
        self.names = list(names)
        self.dim = len(self.names)
        self.c = {}
        for (a, b), coeffs in table.items():
            i, j = self.names.index(a), self.names.index(b)
            vec = [Fraction(coeffs.get(n, 0)) for n in self.names]
            self.c[(i, j)] = vec
            self.c[(j, i)] = [-x for x in vec]

    def bracket(self, x, y):
        out = [Fraction(0)] * self.dim
        for i, xi in enumerate(x):
            if not xi:
                continue
            for j, yj in enumerate(y):
                if not yj or i == j:
                    continue
                for k, c in enumerate(self.c[(i, j)]):
                    if c:
                        out[k] += xi * yj * c
        return out

    def unit(self, i, c=Fraction(1)):
        v = [Fraction(0)] * self.dim
        v[i] = Fraction(c)
        return v

    def span_rank(self, vectors) -> int:
        from sympy.polys.matrices import DomainMatrix
        from sympy import QQ
        if not vectors:
            return 0
        return DomainMatrix([[QQ(x.numerator, x.denominator) for x in v] for v in vectors], (len(vectors), self.dim), QQ).rank()

    def derived(self, idx):
        return [self.bracket(self.unit(i), self.unit(j)) for i, j in combinations(idx, 2)]

    def is_subalgebra(self, idx) -> bool:
        base = [self.unit(i) for i in idx]
        r = self.span_rank(base)
        return all(self.span_rank(base + [v]) == r for v in self.derived(idx))

    def is_ideal(self, idx) -> bool:
        base = [self.unit(i) for i in idx]
        r = self.span_rank(base)
        for i in idx:
            for j in range(self.dim):
                if self.span_rank(base + [self.bracket(self.unit(j), self.unit(i))]) != r:
                    return False
        return True


_SCALARS = [Fraction(x) for x in (1, -1, 2, -2)] + [Fraction(1, 2), Fraction(-1, 2)]


def find_sl2_triple(sc: StructureConstants, idx):
    """(e, f, h) as (scalar, name) pairs from the given basis elements with
    [h,e] = 2e, [h,f] = -2f, [e,f] = h, or None."""
    for ie, i_f, ih in permutations(idx, 3):
        for ce, cf, ch in product(_SCALARS, repeat=3):
            e, f, h = sc.unit(ie, ce), sc.unit(i_f, cf), sc.unit(ih, ch)
            if (sc.bracket(h, e) == [2 * x for x in e] and sc.bracket(h, f) == [-2 * x for x in f]
                    and sc.bracket(e, f) == h):
                return ((ce, sc.names[ie]), (cf, sc.names[i_f]), (ch, sc.names[ih]))
    return None


def bianchi_v_basis(sc: StructureConstants, idx):
    """Basis (e1, e2, e3) of span(idx) with [e1,e2]=e2, [e1,e3]=e3, [e2,e3]=0, or None."""
    for i1 in idx:
        rest = [i for i in idx if i != i1]
        for c in _SCALARS:
            e1 = sc.unit(i1, c)
            e2, e3 = sc.unit(rest[0]), sc.unit(rest[1])
            if (sc.bracket(e1, e2) == e2 and sc.bracket(e1, e3) == e3
                    and not any(sc.bracket(e2, e3))):
                return ((c, sc.names[i1]), (Fraction(1), sc.names[rest[0]]), (Fraction(1), sc.names[rest[1]]))
    return None


@dataclass
class LieAlgebraReport:
    dimension: int
    closed: bool
    table: dict
    derived_dimension: int
    kind: str
    sl2_triple: tuple | None = None
    ideal: tuple | None = None
    ideal_basis: tuple | None = None
    complement: tuple | None = None
    notes: list = field(default_factory=list)

    def lines(self):
        out = [f"dimension {self.dimension}, closed under bracket: {self.closed}",
               f"derived algebra dimension {self.derived_dimension}", f"type: {self.kind}"]
        for (a, b), coeffs in self.table.items():
            out.append(format_bracket(a, b, coeffs))
        if self.sl2_triple:
            out.append("sl2 triple (e, f, h) = " + ", ".join(_fmt_scaled(x) for x in self.sl2_triple))
        if self.ideal:
            out.append(f"ideal {{{', '.join(self.ideal)}}} with Bianchi V basis "
                       + ", ".join(_fmt_scaled(x) for x in self.ideal_basis))
        out.extend(self.notes)
        return out


def _fmt_scaled(x):
    c, n = x
    if c == 1:
        return n
    if c == -1:
        return f"-{n}"
    return f"{c}*{n}"


def classify(fields) -> LieAlgebraReport:
    names = [n for n, _ in fields]
    try:
        table = bracket_table(fields)
    except NotInSpan as exc:
        return LieAlgebraReport(len(fields), False, {}, -1, "not closed", notes=[str(exc)])
    sc = StructureConstants(names, table)
    idx = list(range(sc.dim))
    dd = sc.span_rank(sc.derived(idx))
    if sc.dim == 3:
        triple = find_sl2_triple(sc, idx)
        kind = "sl2" if triple else ("solvable" if dd < 3 else "simple (not split sl2 in this basis)")
        return LieAlgebraReport(3, True, table, dd, kind, sl2_triple=triple)
    for ideal in combinations(idx, 3):
        if not sc.is_ideal(list(ideal)):
            continue
        comp = [i for i in idx if i not in ideal]
        bv = bianchi_v_basis(sc, list(ideal))
        triple = find_sl2_triple(sc, comp) if sc.is_subalgebra(comp) else None
        if bv and triple:
            return LieAlgebraReport(sc.dim, True, table, dd, "sl2 semidirect Bianchi V",
                                    sl2_triple=triple, ideal=tuple(sc.names[i] for i in ideal),
                                    ideal_basis=bv, complement=tuple(sc.names[i] for i in comp))
    return LieAlgebraReport(sc.dim, True, table, dd, "unclassified")
