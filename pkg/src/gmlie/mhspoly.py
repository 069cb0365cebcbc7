"""Mixed-Hodge ranks of the graded ring of a reflexive lattice polygon modulo the operators D_i."""
from __future__ import annotations

import random
from math import gcd
from dataclasses import dataclass
from fractions import Fraction

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .geometry import FiltrationShape


class NotStabilized(ArithmeticError):
    pass


class DegenerateParameters(ArithmeticError):
    pass


class NotReflexive(ValueError):
    pass


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points):
    """Vertices of the convex hull in counter-clockwise order (collinear points dropped)."""
    pts = sorted(set(tuple(p) for p in points))
    if len(pts) < 3:
        raise NotReflexive("a polygon needs at least three points")
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


class Polytope2D:
    """Lattice polygon with facets <n, x> <= c (n primitive)."""

    def __init__(self, points):
        self.vertices = convex_hull(points)
        self.facets = []
        for i, a in enumerate(self.vertices):
            b = self.vertices[(i + 1) % len(self.vertices)]
            n = (b[1] - a[1], a[0] - b[0])
            g = gcd(abs(n[0]), abs(n[1]))
            n = (n[0] // g, n[1] // g)
            self.facets.append((n, n[0] * a[0] + n[1] * a[1]))
        if any(c <= 0 for _, c in self.facets):
            raise NotReflexive("origin is not an interior point")
        if any(c != 1 for _, c in self.facets):
            raise NotReflexive("some facet is not at lattice distance one from the origin")
        self._cache = {}

    def points(self, k: int):
        """Lattice points m with m/k in the polygon (k >= 1); [(0, 0)] for k = 0."""
        if k < 0:
            raise ValueError("dilation must be non-negative")
        if k == 0:
            return [(0, 0)]
        if k not in self._cache:
            xs = [v[0] for v in self.vertices]
            ys = [v[1] for v in self.vertices]
            self._cache[k] = [(x, y) for x in range(k * min(xs), k * max(xs) + 1)
                              for y in range(k * min(ys), k * max(ys) + 1)
                              if all(n[0] * x + n[1] * y <= k * c for n, c in self.facets)]
        return self._cache[k]

    enumerate = points

    def face_codim(self, k: int, m) -> int:
        """Codimension of the smallest face of k*polygon containing m (0 = interior)."""
        if k == 0:
            return 0
        return sum(1 for n, c in self.facets if n[0] * m[0] + n[1] * m[1] == k * c)


def monomial_str(k: int, m) -> str:
    num, den = [], []
    for name, e in (("t0", k), ("t1", m[0]), ("t2", m[1])):
        if e > 0:
            num.append(name if e == 1 else f"{name}^{e}")
        elif e < 0:
            den.append(name if e == -1 else f"{name}^{-e}")
    s = "*".join(num) if num else "1"
    if den:
        s += "/" + (den[0] if len(den) == 1 else "(" + "*".join(den) + ")")
    return s


@dataclass
class MHSRanks:
    total: int
    degree_ranks: list            # rank of E^{-k} for k = 0..K
    ideal_ranks: dict             # j -> rank of I_j, j = 1, 2, 3
    hodge: dict                   # p -> rank F^p
    weight: dict                  # k -> rank W_k
    representatives: list
    parameters: dict
    degree_bound: int

    def graded_hodge(self):
        ps = sorted(self.hodge, reverse=True)
        out, prev = [], 0
        for p in ps:
            if self.hodge[p] > prev:
                out.append(self.hodge[p] - prev)
            prev = self.hodge[p]
        return out

    def key(self):
        return (self.total, tuple(self.degree_ranks), tuple(sorted(self.ideal_ranks.items())),
                tuple(self.representatives))


class _Quotient:
    def __init__(self, poly: Polytope2D, a: dict, bound: int):
        self.poly = poly
        self.index = {}
        for k in range(bound + 2):
            for m in poly.points(k):
                self.index[(k, m)] = len(self.index)
        n = len(self.index)
        rows = []
        for k in range(bound + 1):
            for m in poly.points(k):
                for i in range(3):
                    r = [QQ(0)] * n
                    r[self.index[(k, m)]] += k if i == 0 else m[i - 1]
                    for mj, aj in a.items():
                        c = 1 if i == 0 else mj[i - 1]
                        if c:
                            r[self.index[(k + 1, (m[0] + mj[0], m[1] + mj[1]))]] += QQ(aj.numerator, aj.denominator) * c
                    rows.append(r)
        self.rows = rows
        self.n = n
        self.r0 = self._rank(rows)

    def _rank(self, rows):
        if not rows:
            return 0
        return DomainMatrix(rows, (len(rows), self.n), QQ).rank()

    def unit(self, key):
        r = [QQ(0)] * self.n
        r[self.index[key]] = QQ(1)
        return r

    def rank_mod(self, keys) -> int:
        """Dimension of the image of span(keys) in the quotient."""
        return self._rank(self.rows + [self.unit(k) for k in keys]) - self.r0


def random_parameters(poly: Polytope2D, seed: int) -> dict:
    rng = random.Random(seed)
    return {m: Fraction(rng.randint(1, 97), rng.randint(1, 97)) * rng.choice((1, -1)) for m in poly.points(1)}


def quotient_ranks(poly: Polytope2D, a: dict | None = None, degree_bound: int = 6, seed: int = 0) -> MHSRanks:
    """Ranks of the degree and face filtrations on S / sum D_i S, truncated at degree_bound."""
    if degree_bound < 4:
        raise ValueError("degree_bound must be at least 4")
    a = a if a is not None else random_parameters(poly, seed)
    if any(v == 0 for v in a.values()) or set(a) != set(poly.points(1)):
        raise DegenerateParameters("every lattice point of the polygon needs a nonzero coefficient")
    q = _Quotient(poly, a, degree_bound)
    K = degree_bound - 2
    degree_ranks = [q.rank_mod([(k, m) for k in range(kk + 1) for m in poly.points(k)]) for kk in range(K + 1)]
    ideal = {}
    for j in (1, 2, 3):
        ideal[j] = q.rank_mod([(k, m) for k in range(1, K + 1) for m in poly.points(k) if poly.face_codim(k, m) < j])
    total = degree_ranks[-1]
    hodge = {3 - k: degree_ranks[k] for k in range(min(4, K + 1))}
    weight = {3: ideal[1], 4: ideal[3], 5: ideal[3], 6: total}
    reps = []
    chosen = []
    order = sorted(((k, m) for k in range(K + 1) for m in poly.points(k)),
                   key=lambda km: (km[0], poly.face_codim(*km), abs(km[1][0]) + abs(km[1][1]), km[1]))
    for km in order:
        if len(chosen) == total:
            break
        if q.rank_mod(chosen + [km]) > len(chosen):
            chosen.append(km)
            reps.append(monomial_str(*km))
    return MHSRanks(total, degree_ranks, ideal, hodge, weight, reps, dict(a), degree_bound)


def stable_ranks(poly: Polytope2D, degree_bound: int = 6, seed: int = 0) -> MHSRanks:
    """quotient_ranks checked across bounds (degree_bound - 1, degree_bound) and two parameter draws."""
    results = {}
    for s in (seed, seed + 1):
        lo = quotient_ranks(poly, random_parameters(poly, s), degree_bound - 1)
        hi = quotient_ranks(poly, random_parameters(poly, s), degree_bound)
        if (lo.total, lo.degree_ranks[:4], lo.ideal_ranks) != (hi.total, hi.degree_ranks[:4], hi.ideal_ranks):
            raise NotStabilized(f"ranks differ between degree bounds {degree_bound - 1} and {degree_bound}")
        results[s] = hi
    a, b = results[seed], results[seed + 1]
    if (a.total, a.degree_ranks, a.ideal_ranks) != (b.total, b.degree_ranks, b.ideal_ranks):
        raise DegenerateParameters("ranks differ between two random parameter draws")
    return a


def shape_from_ranks(r: MHSRanks) -> FiltrationShape:
    """FiltrationShape with the computed ranks and the polarization (Phi_3 = standard skew form)."""
    weights = {k: v for k, v in r.weight.items()}
    pieces = {}
    prev = 0
    for k in sorted(weights):
        if weights[k] > prev:
            pieces[k] = weights[k] - prev
        prev = weights[k]
    pairing = {}
    for k, d in pieces.items():
        if k == 3 and d == 2:
            pairing[k] = ((Fraction(0), Fraction(-1)), (Fraction(1), Fraction(0)))
        else:
            pairing[k] = tuple(tuple(Fraction(0) for _ in range(d)) for _ in range(d))
    return FiltrationShape(r.total, tuple(r.graded_hodge()), tuple(sorted(weights.items())),
                           tuple(sorted(pairing.items())))


def weight_rank(shape: FiltrationShape, k: int) -> int:
    out = 0
    for kk, rk in shape.weight_ranks:
        if kk <= k:
            out = rk
    return out


def matches_preset(r: MHSRanks, shape: FiltrationShape) -> bool:
    """Same total rank, graded Hodge ranks and W_3..W_6 ranks as the preset."""
    return (r.total == shape.b_n and list(r.graded_hodge()) == list(shape.hodge_ranks)
            and all(r.weight[k] == weight_rank(shape, k) for k in (3, 4, 5, 6)))
