"""Filtration shapes, gauge matrices, geometry presets and the config loader."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

from .exact import (FunctionField, ParseError, RationalFunction, mat_inv, mat_mul,
                    mat_map, parse_expression)


class SchemaError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class RankMismatch(ValueError):
    pass


class InconsistentPairing(ValueError):
    pass


# ---------------------------------------------------------------------------
# shapes

@dataclass(frozen=True)
class FiltrationShape:
    """Hodge ranks f_k (top Hodge piece first, in basis order), cumulative weight
    ranks {k: rank W_k} and constant pairing blocks {k: Phi_k} on Gr_k^W.

    W_k is spanned by the last rank(W_k) basis vectors.
    """

    b_n: int
    hodge_ranks: tuple
    weight_ranks: tuple          # ((k, rank W_k), ...) increasing in k
    pairing_blocks: tuple        # ((k, matrix), ...)

    def __post_init__(self):
        if sum(self.hodge_ranks) != self.b_n:
            raise RankMismatch(f"Hodge ranks {list(self.hodge_ranks)} do not sum to b_n = {self.b_n}")
        prev = 0
        for k, rk in self.weight_ranks:
            if rk < prev:
                raise RankMismatch("weight ranks must be non-decreasing")
            prev = rk
        if prev != self.b_n:
            raise RankMismatch(f"top weight rank {prev} differs from b_n = {self.b_n}")
        pieces = dict(self.graded_pieces())
        for k, phi in self.pairing_blocks:
            if k not in pieces:
                raise RankMismatch(f"pairing block for weight {k} but Gr_{k} is empty")
            dim = len(pieces[k])
            if len(phi) != dim or any(len(row) != dim for row in phi):
                raise RankMismatch(f"pairing block Phi_{k} must be {dim}x{dim}")
            if k % 2 == 1:
                for i in range(dim):
                    for j in range(dim):
                        if phi[i][j] != -phi[j][i]:
                            raise RankMismatch(f"Phi_{k} must be skew-symmetric (odd weight)")

    def hodge_block(self, i: int) -> int:
        acc = 0
        for blk, f in enumerate(self.hodge_ranks):
            acc += f
            if i < acc:
                return blk
        raise IndexError(i)

    def graded_pieces(self):
        """[(k, basis indices of Gr_k^W)] for nonempty graded pieces."""
        out = []
        prev = 0
        for k, rk in self.weight_ranks:
            if rk > prev:
                out.append((k, list(range(self.b_n - rk, self.b_n - prev))))
            prev = rk
        return out

    def weight_of(self, i: int) -> int:
        for k, idx in self.graded_pieces():
            if i in idx:
                return k
        raise IndexError(i)

    def allowed(self, i: int, j: int) -> bool:
        """May S[i][j] be nonzero (Hodge lower block-triangular, weight preserving)?"""
        if self.hodge_block(j) > self.hodge_block(i):
            return False
        return self.weight_of(j) <= self.weight_of(i)


def svar(i: int, j: int) -> str:
    return f"s{i + 1}{j + 1}"


@dataclass
class GaugeMatrix:
    size: int
    ctx: FunctionField               # field of the independent parameters
    entries: list                    # size x size RationalFunctions over ctx
    parameters: list                 # independent parameter names
    dependent: dict                  # name -> RationalFunction over ctx
    fixed: dict                      # name -> constant
    pattern: list                    # size x size of '0' | name

    def matrix(self, ctx: FunctionField | None = None):
        if ctx is None or ctx is self.ctx:
            return self.entries
        return mat_map(lambda x: x.lift(ctx), self.entries)

    def __str__(self):
        return "[" + ", ".join("[" + ", ".join(str(x) for x in row) + "]" for row in self.entries) + "]"


def _identity_value(name: str):
    return 1 if name[1] == name[2] and len(name) == 3 else 0


def gauge_shape(shape: FiltrationShape, normalize_top: bool = True) -> GaugeMatrix:
    n = shape.b_n
    names = [svar(i, j) for i in range(n) for j in range(n) if shape.allowed(i, j)]
    full = FunctionField(names)
    sub: dict[str, RationalFunction] = {}

    def value(name):
        return sub.get(name, full.gen(name))

    def S_full():
        return [[value(svar(i, j)) if shape.allowed(i, j) else full.zero() for j in range(n)] for i in range(n)]

    equations = []
    phis = dict(shape.pairing_blocks)
    for k, idx in shape.graded_pieces():
        phi = phis.get(k)
        if phi is None or all(x == 0 for row in phi for x in row):
            continue
        block = [[full.gen(svar(i, j)) if shape.allowed(i, j) else full.zero() for j in idx] for i in idx]
        Phi = [[full.const(Fraction(x)) for x in row] for row in phi]
        bt = [list(r) for r in zip(*block)]
        M = mat_mul(mat_mul(block, Phi), bt)
        for a in range(len(idx)):
            for b in range(len(idx)):
                e = M[a][b] - Phi[a][b]
                if not e.is_zero():
                    equations.append(e)
    pending = list(equations)
    while pending:
        eq = pending.pop(0).subs(sub) if sub else pending.pop(0)
        num = eq.numerator
        if num.is_zero():
            continue
        if num.total_degree() == 0:
            raise InconsistentPairing(f"pairing condition reduces to {num} = 0")
        cands = sorted(v for v in eq.free_variables() if num.degree(v) == 1)
        if not cands:
            raise InconsistentPairing(f"cannot solve {num} = 0 linearly for any gauge entry")
        v = cands[0]
        c1, c0 = num.coeff_in(v, 1), num.coeff_in(v, 0)
        sol = full.coerce(-c0) / full.coerce(c1)
        sub = {k: x.subs({v: sol}) for k, x in sub.items()}
        sub[v] = sol
    fixed = {}
    independent = [v for v in names if v not in sub]
    if normalize_top and shape.hodge_ranks[0] == 1 and "s11" in independent:
        fixed["s11"] = 1
        independent.remove("s11")
    ctx = FunctionField(independent)
    pin = {k: full.const(v) for k, v in fixed.items()}

    def final(name):
        if name in fixed:
            return ctx.const(fixed[name])
        x = value(name)
        if pin:
            x = x.subs(pin)
        return x.lift(ctx)

    entries = [[final(svar(i, j)) if shape.allowed(i, j) else ctx.zero() for j in range(n)] for i in range(n)]
    dependent = {k: final(k) for k in sub}
    pattern = [[svar(i, j) if shape.allowed(i, j) else "0" for j in range(n)] for i in range(n)]
    return GaugeMatrix(n, ctx, entries, independent, dependent, fixed, pattern)


def check_pairing(S: GaugeMatrix, shape: FiltrationShape) -> bool:
    """S_kk Phi_k S_kk^T == Phi_k on every graded piece (symbolically)."""
    phis = dict(shape.pairing_blocks)
    ctx = S.ctx
    for k, idx in shape.graded_pieces():
        if k not in phis:
            continue
        block = [[S.entries[i][j] for j in idx] for i in idx]
        Phi = [[ctx.const(Fraction(x)) for x in row] for row in phis[k]]
        bt = [list(r) for r in zip(*block)]
        M = mat_mul(mat_mul(block, Phi), bt)
        if any(M[a][b] != Phi[a][b] for a in range(len(idx)) for b in range(len(idx))):
            return False
    return True


def lie_generators(S: GaugeMatrix):
    """[(parameter, (dS/dp) S^-1 evaluated at S = Id)] with Fraction entries."""
    at_id = {p: S.ctx.const(_identity_value(p)) for p in S.parameters}
    inv = mat_inv(S.entries)
    out = []
    for p in S.parameters:
        dS = mat_map(lambda x: x.diff(p), S.entries)
        g = mat_mul(dS, inv)
        out.append((p, [[x.subs(at_id).constant_value().a for x in row] for row in g]))
    return out


# ---------------------------------------------------------------------------
# geometries

@dataclass
class Geometry:
    name: str
    variables: list
    pf: list                         # operator strings in theta/theta_i and the variables
    basis: list                      # [(prefactor string, theta-word string)]
    shape: FiltrationShape
    yukawa: dict                     # name -> expression string
    vf_shapes: dict                  # field name -> pattern rows of '0' | '1' | 'Y'
    curve_pf: str | None = None
    bridge: dict | None = None       # level data for the q-series bridge
    polytope: list | None = None     # lattice polygon of the mirror curve, when toric
    description: str = ""

    def __post_init__(self):
        if len(self.basis) != self.shape.b_n:
            raise RankMismatch(f"{self.name}: {len(self.basis)} basis words for b_n = {self.shape.b_n}")
        for vname, pat in self.vf_shapes.items():
            validate_target_shape(pat, self.shape, f"{self.name}.vf_shapes.{vname}")

    @property
    def ctx(self) -> FunctionField:
        return FunctionField(self.variables)

    def theta_names(self):
        if len(self.variables) == 1:
            return ["theta"]
        return [f"theta{i + 1}" for i in range(len(self.variables))]

    def yukawa_values(self, ctx: FunctionField | None = None) -> dict:
        ctx = ctx or self.ctx
        out = {}
        for k, text in self.yukawa.items():
            out[k] = ctx.parse(text, out)
        return out

    def parse(self, text: str, ctx: FunctionField | None = None) -> RationalFunction:
        ctx = ctx or self.ctx
        return ctx.parse(text, self.yukawa_values(ctx))

    def gauge(self) -> GaugeMatrix:
        return gauge_shape(self.shape)

    def enhanced_ctx(self) -> FunctionField:
        return FunctionField(list(self.variables) + self.gauge().parameters)


def validate_target_shape(pattern, shape: FiltrationShape, path: str):
    n = shape.b_n
    if len(pattern) != n or any(len(row) != n for row in pattern):
        raise SchemaError(path, f"target shape must be {n}x{n}")
    for i, row in enumerate(pattern):
        for j, x in enumerate(row):
            if x not in ("0", "1", "Y"):
                raise SchemaError(path, f"entry {x!r} must be '0', '1' or 'Y'")
            if x != "0" and shape.hodge_block(j) != shape.hodge_block(i) + 1:
                raise SchemaError(path, f"entry ({i + 1},{j + 1}) lies outside the first super-diagonal Hodge blocks")


def _shape(b_n, hodge, weight, pairing) -> FiltrationShape:
    return FiltrationShape(b_n, tuple(hodge), tuple(sorted(weight.items())),
                           tuple(sorted((k, tuple(tuple(Fraction(x) for x in r) for r in m)) for k, m in pairing.items())))


SKEW = [[0, -1], [1, 0]]


def _elliptic() -> Geometry:
    return Geometry(
        name="elliptic-1star", variables=["z"],
        pf=["theta^2 - 12*z*(6*theta + 5)*(6*theta + 1)"],
        basis=[("1", "1"), ("1 - 432*z", "theta")],
        shape=_shape(2, [1, 1], {1: 2}, {1: SKEW}),
        yukawa={}, vf_shapes={"R": [["0", "1"], ["0", "0"]]},
        curve_pf="theta^2 - 12*z*(6*theta + 5)*(6*theta + 1)",
        bridge={"level": "1*", "alpha": "432*z", "A2_over_X": "1", "X": "s22", "P": "s21"},
        description="family of elliptic curves with monodromy Gamma_0(1)*")


def _local_p2() -> Geometry:
    return Geometry(
        name="local-p2", variables=["z"],
        pf=["(theta^2 - 3*z*(3*theta + 1)*(3*theta + 2))*theta"],
        basis=[("1", "1"), ("1", "theta"), ("1/Y111", "theta^2")],
        shape=_shape(3, [1, 1, 1], {3: 2, 6: 3}, {3: SKEW, 6: [[0]]}),
        yukawa={"Y111": "-1/(3*(1 - 27*z))"},
        vf_shapes={"R": [["0", "Y", "0"], ["0", "0", "1"], ["0", "0", "0"]]},
        curve_pf="theta^2 - 3*z*(3*theta + 1)*(3*theta + 2)",
        bridge={"level": "3", "alpha": "27*z", "A2_over_X": "-3", "X": "s33", "P": "s32"},
        polytope=[[1, 0], [0, 1], [-1, -1]],
        description="mirror of the canonical bundle over P^2")


def _local_f2() -> Geometry:
    return Geometry(
        name="local-f2", variables=["z1", "z2"],
        pf=["theta1*(theta1 - 2*theta2) - 2*z1*(2*theta1 + 1)*theta1",
            "theta2^2 - z2*(theta1 - 2*theta2 - 1)*(theta1 - 2*theta2)"],
        basis=[("1", "1"), ("1", "theta1 - 2*theta2"), ("1", "theta1"), ("1/Y111", "theta1^2")],
        shape=_shape(4, [1, 2, 1], {3: 2, 4: 3, 5: 3, 6: 4}, {3: SKEW, 4: [[0]], 6: [[0]]}),
        yukawa={"Y111": "1/((1 - 4*z1)^2 - 64*z1^2*z2)"},
        vf_shapes={"R1": [["0", "Y", "Y", "0"], ["0", "0", "0", "0"], ["0", "0", "0", "1"], ["0", "0", "0", "0"]],
                   "R2": [["0", "Y", "Y", "0"], ["0", "0", "0", "1"], ["0", "0", "0", "0"], ["0", "0", "0", "0"]]},
        bridge={"level": "2"},
        polytope=[[1, 0], [0, 1], [-1, 0], [-2, -1]],
        description="mirror of the canonical bundle over the Hirzebruch surface F_2")


BUILTINS = {"elliptic-1star": _elliptic, "local-p2": _local_p2, "local-f2": _local_f2}


def list_geometries():
    return list(BUILTINS)


def get_geometry(name: str) -> Geometry:
    key = name.replace("1*", "1star")
    if key not in BUILTINS:
        raise KeyError(f"unknown geometry {name!r}; built-ins: {', '.join(BUILTINS)}")
    return BUILTINS[key]()


# ---------------------------------------------------------------------------
# config loading

_REQUIRED = ("variables", "pf", "basis", "hodge_ranks", "weight_ranks", "pairing_blocks")


def _req(table, key, path, typ):
    if key not in table:
        raise SchemaError(f"{path}.{key}" if path else key, "missing required field")
    val = table[key]
    if not isinstance(val, typ):
        raise SchemaError(f"{path}.{key}" if path else key, f"expected {typ if isinstance(typ, type) else typ[0]}")
    return val


def _int_keyed(table, path):
    out = {}
    for k, v in table.items():
        try:
            out[int(k)] = v
        except ValueError:
            raise SchemaError(f"{path}.{k}", "weight keys must be integers") from None
    return out


def _geometry_from_table(name: str, t: Mapping, path: str) -> Geometry:
    variables = _req(t, "variables", path, list)
    if not variables or not all(isinstance(v, str) and v.isidentifier() for v in variables):
        raise SchemaError(f"{path}.variables", "expected a non-empty list of identifiers")
    pf = _req(t, "pf", path, list)
    if not pf or not all(isinstance(p, str) for p in pf):
        raise SchemaError(f"{path}.pf", "expected a list of operator strings")
    basis_raw = _req(t, "basis", path, list)
    basis = []
    for i, b in enumerate(basis_raw):
        if isinstance(b, list) and len(b) == 1 and b[0] == "Omega":
            basis.append(("1", "1"))
        elif isinstance(b, list) and len(b) == 2 and all(isinstance(x, str) for x in b):
            basis.append((b[0], b[1]))
        else:
            raise SchemaError(f"{path}.basis[{i}]", 'expected ["Omega"] or ["prefactor", "theta-word"]')
    hodge = _req(t, "hodge_ranks", path, list)
    if not all(isinstance(x, int) and x > 0 for x in hodge):
        raise SchemaError(f"{path}.hodge_ranks", "expected positive integers")
    weight = _int_keyed(_req(t, "weight_ranks", path, dict), f"{path}.weight_ranks")
    pairing = _int_keyed(_req(t, "pairing_blocks", path, dict), f"{path}.pairing_blocks")
    for k, m in pairing.items():
        if not isinstance(m, list) or not all(isinstance(r, list) and all(isinstance(x, int) for x in r) for r in m):
            raise SchemaError(f"{path}.pairing_blocks.{k}", "expected an integer matrix")
    b_n = sum(hodge)
    if len(basis) != b_n:
        raise RankMismatch(f"{path}: {len(basis)} basis words but hodge ranks sum to {b_n}")
    try:
        shape = _shape(b_n, hodge, weight, pairing)
    except RankMismatch:
        raise
    graded = {k for k, _ in shape.graded_pieces()}
    missing = sorted(graded - set(pairing))
    if missing:
        raise SchemaError(f"{path}.pairing_blocks", f"missing pairing block for weight {missing[0]}")
    yukawa = t.get("yukawa", {})
    if not isinstance(yukawa, dict) or not all(isinstance(v, str) for v in yukawa.values()):
        raise SchemaError(f"{path}.yukawa", "expected a table of expression strings")
    shapes = t.get("vf_shapes", {})
    if isinstance(shapes, list):
        shapes = {f"R{i + 1}" if len(shapes) > 1 else "R": s for i, s in enumerate(shapes)}
    if not isinstance(shapes, dict):
        raise SchemaError(f"{path}.vf_shapes", "expected a table or list of pattern matrices")
    shapes = {k: [[str(x) for x in row] for row in v] for k, v in shapes.items()}
    curve = t.get("curve_pf")
    if curve is not None and not isinstance(curve, str):
        raise SchemaError(f"{path}.curve_pf", "expected an operator string")
    poly = t.get("polytope")
    if poly is not None and not (isinstance(poly, list) and all(
            isinstance(p, list) and len(p) == 2 and all(isinstance(x, int) for x in p) for p in poly)):
        raise SchemaError(f"{path}.polytope", "expected a list of integer 2-vectors")
    geo = Geometry(name=t.get("name", name), variables=list(variables), pf=list(pf), basis=basis, shape=shape,
                   yukawa=dict(yukawa), vf_shapes=shapes, curve_pf=curve, polytope=poly)
    _validate_expressions(geo, path)
    return geo


def _validate_expressions(geo: Geometry, path: str):
    ctx = geo.ctx
    try:
        ys = geo.yukawa_values(ctx)
    except ParseError as exc:
        raise SchemaError(f"{path}.yukawa", str(exc)) from None
    thetas = {t: ctx.one() for t in geo.theta_names()}
    for i, (pre, word) in enumerate(geo.basis):
        try:
            ctx.parse(pre, ys)
            parse_expression(word, {**thetas, **{v: ctx.gen(v) for v in geo.variables}})
        except (ParseError, ZeroDivisionError) as exc:
            raise SchemaError(f"{path}.basis[{i}]", str(exc)) from None
    for i, p in enumerate(geo.pf):
        try:
            parse_expression(p, {**thetas, **{v: ctx.gen(v) for v in geo.variables}})
        except ParseError as exc:
            raise SchemaError(f"{path}.pf[{i}]", str(exc)) from None


def load_geometries(text: str) -> list:
    """All geometries in a TOML document (one table per geometry, or a single top-level one)."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise SchemaError("<document>", f"not valid TOML: {exc}") from None
    if "variables" in doc or "pf" in doc:
        if "name" not in doc:
            raise SchemaError("name", "missing required field")
        return [_geometry_from_table(doc["name"], doc, "")]
    out = []
    for name, table in doc.items():
        if not isinstance(table, dict):
            raise SchemaError(name, "expected a table per geometry")
        out.append(_geometry_from_table(name, table, name))
    if not out:
        raise SchemaError("<document>", "no geometry found")
    return out


def load_geometry(text: str, name: str | None = None) -> Geometry:
    """Load one geometry: a built-in name or TOML config text."""
    key = text.strip().replace("1*", "1star")
    if key in BUILTINS:
        return BUILTINS[key]()
    geos = load_geometries(text)
    if name is None:
        if len(geos) != 1:
            raise SchemaError("<document>", "several geometries present; pass a name")
        return geos[0]
    for g in geos:
        if g.name == name:
            return g
    raise KeyError(name)
