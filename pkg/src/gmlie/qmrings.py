"""Graded differential rings of quasi-modular forms.

Two presentations are provided: C[E2, E4, E6] with the derivations dtau,
delta (= -12 d/dE2) and W, and R_N = C[alpha, A, B, C, E]/(B^r - (1-alpha)A^r,
C^r - alpha A^r) with dtau, H and F.  Elements are polynomials in the
generators kept in normal form (B^r and C^r rewritten), and every
derivation is the Leibniz extension of its generator images.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Mapping

from .exact import (FunctionField, NonUnique, NoSolution, Polynomial,
                    RationalFunction, solve_linear)
from .qseries import DEFAULT_ORDER, EXPONENT_R, TruncatedSeries, _level, eisenstein, form_ABC, theta_q


class UnknownDerivation(KeyError):
    pass


class NotClosed(ValueError):
    pass


ALIASES = {"∂τ": "dtau", "∂": "dtau", "d_tau": "dtau", "𝔡": "delta", "frak_d": "delta"}


def canonical_derivation(name: str) -> str:
    return ALIASES.get(name, name)


@dataclass
class GradedRingPresentation:
    name: str
    generators: list            # [(name, weight)]
    relations: list             # Polynomials (weight-homogeneous)
    derivations: dict           # name -> {generator: Polynomial}
    degrees: dict               # name -> weight shift
    level: str                  # "1" or a key of EXPONENT_R
    rewrite: dict = field(default_factory=dict)  # generator -> (exponent, replacement Polynomial)

    def __post_init__(self):
        self.ctx = FunctionField([g for g, _ in self.generators])
        self.weights = dict(self.generators)

    def gen(self, name: str) -> "RingElement":
        return RingElement(self, Polynomial(self.ctx, self.ctx.ring.gens[self.ctx.index(name)]))

    def element(self, x) -> "RingElement":
        if isinstance(x, RingElement):
            return x
        if isinstance(x, Polynomial):
            return RingElement(self, x)
        if isinstance(x, str):
            return self.parse(x)
        return RingElement(self, Polynomial(self.ctx, self.ctx.ring(x)))

    def parse(self, text: str) -> "RingElement":
        f = self.ctx.parse(text)
        if f.denominator != 1:
            raise ValueError(f"{text!r} is not a polynomial in the generators")
        return RingElement(self, f.numerator * f.denominator.leading_coefficient().inverse())

    def weight_of_monomial(self, exps) -> int:
        return sum(e * w for e, (_, w) in zip(exps, self.generators))

    def normal_form(self, p: Polynomial) -> Polynomial:
        if not self.rewrite:
            return p
        ring = self.ctx.ring
        out = ring.zero
        idx = {g: self.ctx.index(g) for g in self.rewrite}
        for exps, c in p.raw.terms():
            e = list(exps)
            factor = ring.one
            for g, (k, repl) in self.rewrite.items():
                i = idx[g]
                q, rem = divmod(e[i], k)
                if q:
                    e[i] = rem
                    factor = factor * repl.raw**q
            out += ring({tuple(e): c}) * factor
        return Polynomial(self.ctx, out)

    def derivation_names(self):
        return list(self.derivations)


class RingElement:
    """Normal-form element of a presentation."""

    __slots__ = ("pres", "poly")

    def __init__(self, pres: GradedRingPresentation, poly: Polynomial):
        self.pres = pres
        self.poly = pres.normal_form(poly)

    def _o(self, o):
        if isinstance(o, RingElement):
            return o.poly
        return o

    def __add__(self, o):
        return RingElement(self.pres, self.poly + self._o(o))

    __radd__ = __add__

    def __sub__(self, o):
        return RingElement(self.pres, self.poly - self._o(o))

    def __rsub__(self, o):
        return RingElement(self.pres, -self.poly + self._o(o))

    def __mul__(self, o):
        return RingElement(self.pres, self.poly * self._o(o))

    __rmul__ = __mul__

    def __neg__(self):
        return RingElement(self.pres, -self.poly)

    def __pow__(self, n: int):
        return RingElement(self.pres, self.poly**n)

    def __eq__(self, o):
        if isinstance(o, RingElement):
            return self.poly == o.poly
        return self.poly == self.pres.normal_form(Polynomial(self.pres.ctx, self.pres.ctx.ring(0)) + o)

    def __hash__(self):
        return hash(str(self.poly))

    def is_zero(self):
        return self.poly.is_zero()

    def weights(self) -> set:
        return {self.pres.weight_of_monomial(e) for e in self.poly.raw.monoms()}

    def is_homogeneous(self) -> bool:
        return len(self.weights()) <= 1

    def __str__(self):
        return str(self.poly)

    def __repr__(self):
        return f"RingElement({self.poly})"


def derive(el: RingElement, name: str) -> RingElement:
    """Leibniz extension of the named derivation's generator images."""
    pres = el.pres
    key = canonical_derivation(name)
    if key not in pres.derivations:
        raise UnknownDerivation(f"{name!r} is not a derivation of {pres.name}")
    images = pres.derivations[key]
    acc = Polynomial(pres.ctx, pres.ctx.ring.zero)
    for g, _ in pres.generators:
        img = images.get(g)
        if img is None or img.is_zero():
            continue
        part = el.poly.diff(g)
        if part.is_zero():
            continue
        acc = acc + part * img
    return RingElement(pres, acc)


def _p(ctx, text) -> Polynomial:
    f = ctx.parse(text)
    assert f.denominator == 1
    return f.numerator


def level_one_ring() -> GradedRingPresentation:
    pres = GradedRingPresentation(
        name="QM(SL2(Z))", generators=[("E2", 2), ("E4", 4), ("E6", 6)], relations=[],
        derivations={}, degrees={"dtau": 2, "delta": -2, "W": 0}, level="1")
    c = pres.ctx
    pres.derivations = {
        "dtau": {"E2": _p(c, "(E2^2 - E4)/12"), "E4": _p(c, "(E2*E4 - E6)/3"), "E6": _p(c, "(E2*E6 - E4^2)/2")},
        "delta": {"E2": _p(c, "-12")},
        "W": {"E2": _p(c, "2*E2"), "E4": _p(c, "4*E4"), "E6": _p(c, "6*E6")},
    }
    return pres


def level_ring(N) -> GradedRingPresentation:
    key = _level(N)
    r = EXPONENT_R[key]
    pres = GradedRingPresentation(
        name=f"R_{key}", generators=[("alpha", 0), ("A", 1), ("B", 1), ("C", 1), ("E", 2)],
        relations=[], derivations={}, degrees={"dtau": 2, "H": 0, "F": -2}, level=key)
    c = pres.ctx
    B_r = _p(c, f"B^{r} - (1 - alpha)*A^{r}")
    C_r = _p(c, f"C^{r} - alpha*A^{r}")
    pres.relations = [B_r, C_r]
    pres.rewrite = {"B": (r, _p(c, f"(1 - alpha)*A^{r}")), "C": (r, _p(c, f"alpha*A^{r}"))}
    # dtau A = (1/2r) A (E + (C^r - B^r)/A^(r-2)), with C^r - B^r reduced first
    diff_r = pres.normal_form(_p(c, f"C^{r} - B^{r}"))
    quotient = diff_r.exquo(_p(c, f"A^{r - 2}"))
    inv = Fraction(1, 2 * r)
    pres.derivations = {
        "dtau": {
            "alpha": _p(c, "alpha*(1 - alpha)*A^2"),
            "A": (_p(c, "A*E") + _p(c, "A") * quotient) * inv,
            "B": _p(c, "B*(E - A^2)") * inv,
            "C": _p(c, "C*(E + A^2)") * inv,
            "E": _p(c, "E^2 - A^4") * inv,
        },
        "H": {"A": _p(c, "A"), "B": _p(c, "B"), "C": _p(c, "C"), "E": _p(c, "2*E")},
        "F": {"E": _p(c, f"{-2 * r}")},
    }
    return pres


def presentation(N) -> GradedRingPresentation:
    if str(N) == "1":
        return level_one_ring()
    return level_ring(N)


# ---------------------------------------------------------------------------
# commutators

def _compose(pres, outer, inner, el):
    return derive(derive(el, inner), outer)


def test_monomials(pres: GradedRingPresentation, weight_bound: int = 24, zero_weight_degree: int = 2):
    """All normal-form monomials of weight <= bound; weight-0 generators up to the given degree."""
    gens = pres.generators
    ranges = []
    for g, w in gens:
        hi = zero_weight_degree if w == 0 else weight_bound // w
        if g in pres.rewrite:
            hi = min(hi, pres.rewrite[g][0] - 1)
        ranges.append(range(hi + 1))
    out = []
    for exps in product(*ranges):
        if pres.weight_of_monomial(exps) <= weight_bound:
            out.append(RingElement(pres, Polynomial(pres.ctx, pres.ctx.ring({tuple(exps): 1}))))
    return out


def commutator_table(pres: GradedRingPresentation, names, weight_bound: int = 24):
    """Structure constants: {(X, Y): {Z: c}} with [X, Y] = sum c Z on all test monomials."""
    names = [canonical_derivation(n) for n in names]
    for n in names:
        if n not in pres.derivations:
            raise UnknownDerivation(n)
    mons = test_monomials(pres, weight_bound)
    images = {n: [derive(m, n) for m in mons] for n in names}
    table = {}
    for i, x in enumerate(names):
        for y in names[i + 1:]:
            target = [derive(derive(m, y), x) - derive(derive(m, x), y) for m in mons]
            # rows: one per (test monomial, output monomial) coefficient
            keys = []
            for k, m in enumerate(mons):
                seen = set(target[k].poly.raw.monoms())
                for n in names:
                    seen |= set(images[n][k].poly.raw.monoms())
                keys.extend((k, e) for e in sorted(seen))
            M, b = [], []
            for k, e in keys:
                M.append([_coeff(images[n][k], e) for n in names])
                b.append(_coeff(target[k], e))
            try:
                sol = solve_linear(M, b) if M else [Fraction(0)] * len(names)
            except NoSolution:
                raise NotClosed(f"[{x}, {y}] is not a constant combination of {names}") from None
            except NonUnique as exc:
                sol = exc.particular
            table[(x, y)] = {n: c for n, c in zip(names, sol) if c}
    return table


def _coeff(el: RingElement, exps) -> Fraction:
    for e, c in el.poly.terms().items():
        if e == exps:
            return c.a
    return Fraction(0)


def bracket_from_table(table, x, y):
    if (x, y) in table:
        return dict(table[(x, y)])
    if (y, x) in table:
        return {k: -v for k, v in table[(y, x)].items()}
    if x == y:
        return {}
    raise KeyError((x, y))


# ---------------------------------------------------------------------------
# q-realization

class Realizer:
    """Substitutes generator q-expansions into ring elements (with power caching)."""

    def __init__(self, pres: GradedRingPresentation, order=DEFAULT_ORDER):
        self.pres = pres
        self.order = Fraction(order)
        self.c_radicand = Fraction(1)
        if pres.level == "1":
            self.series = {f"E{k}": eisenstein(k, order) for k in (2, 4, 6)}
            self.r = None
        else:
            f = form_ABC(pres.level, order)
            self.r = f.r
            self.c_radicand = f.c_radicand
            alpha = ((f.C / f.A) ** f.r * f.c_radicand).truncate(order)
            self.series = {"alpha": alpha, "A": f.A, "B": f.B, "C": f.C,
                           "E": (theta_q(f.B) / f.B * f.r + theta_q(f.C) / f.C * f.r).truncate(order)}
        self._powers = {g: [TruncatedSeries.constant(1)] for g in self.series}

    def power(self, g, k):
        cache = self._powers[g]
        while len(cache) <= k:
            cache.append((cache[-1] * self.series[g]).truncate(self.order))
        return cache[k]

    def c_residue(self, poly: Polynomial):
        """Common residue of the C-degree mod r (None when C is not rescaled)."""
        if self.c_radicand == 1:
            return None
        i = self.pres.ctx.index("C")
        res = {e[i] % self.r for e in poly.raw.monoms()}
        if len(res) > 1:
            raise ValueError("element is not homogeneous in the C-degree modulo r; its q-expansion "
                             "leaves every quadratic field")
        return res.pop() if res else 0

    def realize_polynomial(self, poly: Polynomial) -> TruncatedSeries:
        names = [g for g, _ in self.pres.generators]
        ci = names.index("C") if "C" in names else None
        self.c_residue(poly)
        acc = TruncatedSeries({}, self.order)
        for exps, c in poly.terms().items():
            term = TruncatedSeries.constant(c)
            for g, e in zip(names, exps):
                if e:
                    term = term * self.power(g, e)
            if ci is not None and self.c_radicand != 1:
                term = term * self.c_radicand ** (exps[ci] // self.r)
            acc = acc + term.truncate(self.order)
        return acc


def realize_q(el: RingElement, N=None, order=DEFAULT_ORDER, realizer: Realizer | None = None) -> TruncatedSeries:
    """q-expansion of el.

    For N = 1* the generator C is c^(1/6) times a rational series with c = 432;
    an element of C-degree j mod 6 is returned divided by c^(j/6).
    """
    if N is not None and str(N) != "1" and _level(N) != el.pres.level:
        raise ValueError(f"element of {el.pres.name} realized at level {N}")
    rz = realizer or Realizer(el.pres, order)
    return rz.realize_polynomial(el.poly)


@dataclass
class CheckResult:
    check_id: str
    statement: str
    ok: bool
    witness: str = ""
    flagged: bool = False


def _series_check(cid, statement, lhs: TruncatedSeries, rhs: TruncatedSeries, order) -> CheckResult:
    diff = lhs.first_difference(rhs, order)
    if diff is None:
        return CheckResult(cid, statement, True)
    e, a, b = diff
    return CheckResult(cid, statement, False, f"first difference at q^{e}: {a} vs {b}")


def verify_ring(N, order=DEFAULT_ORDER) -> list:
    """Check every relation and every dtau generator image on q-expansions."""
    pres = presentation(N)
    rz = Realizer(pres, order)
    out = []
    for i, rel in enumerate(pres.relations):
        s = rz.realize_polynomial(rel)
        zero = TruncatedSeries({}, order)
        out.append(_series_check(f"ring.{pres.name}.relation.{i + 1}", f"{rel} = 0", s, zero, order))
    for g, _ in pres.generators:
        lhs = theta_q(rz.series[g])
        rhs = realize_q(derive(pres.gen(g), "dtau"), realizer=rz)
        out.append(_series_check(f"ring.{pres.name}.dtau.{g}", f"dtau {g} = {pres.derivations['dtau'][g]}",
                                 lhs, rhs, Fraction(order) - 1))
    if pres.level == "1*":
        out.append(_series_check(f"ring.{pres.name}.E_is_E2", "E = E2", rz.series["E"], eisenstein(2, order), order))
    if pres.level != "1":
        out.append(_series_check(f"ring.{pres.name}.E_constant_term", "E has constant term 1",
                                 rz.series["E"].truncate(1), TruncatedSeries.constant(1, 1), 1))
    return out


# ---------------------------------------------------------------------------
# ring homomorphisms into function fields

@dataclass
class GeneratorImage:
    """Image of a generator: directly, or via its k-th power when only that is rational."""

    value: RationalFunction
    power: int = 1


def substitute(poly: Polynomial, images: Mapping[str, GeneratorImage]) -> RationalFunction:
    names = poly.ctx.variables
    ctx = next(iter(images.values())).value.ctx
    acc = ctx.zero()
    for exps, c in poly.terms().items():
        term = ctx.const(c)
        for g, e in zip(names, exps):
            if not e:
                continue
            img = images[g]
            if e % img.power:
                raise ValueError(f"{g}^{e} is not a power of the available {g}^{img.power}")
            term = term * img.value ** (e // img.power)
        acc = acc + term
    return acc


def check_derivation_images(pres: GradedRingPresentation, name: str, images: Mapping[str, GeneratorImage],
                            apply: Callable[[RationalFunction], RationalFunction]) -> list:
    """Check apply(phi(g)) = phi(D g) for every generator, in log-derivative form for power images.

    For a generator known through g^k: apply(phi(g^k)) / (k phi(g^k)) = phi(D(g)/g).
    Returns CheckResults with the residual as witness on failure.
    """
    key = canonical_derivation(name)
    out = []
    for g, _ in pres.generators:
        img = images[g]
        dg = pres.derivations[key].get(g)
        dg = dg if dg is not None else Polynomial(pres.ctx, pres.ctx.ring.zero)
        if img.power == 1:
            lhs = apply(img.value)
            rhs = substitute(pres.normal_form(dg), images)
            stmt = f"{name} {g} = {dg}"
        else:
            lhs = apply(img.value) / (img.value * img.power)
            quotient = pres.normal_form(dg).exquo(Polynomial(pres.ctx, pres.ctx.ring.gens[pres.ctx.index(g)]))
            rhs = substitute(quotient, images)
            stmt = f"{name} {g} / {g} = {quotient}  (via {g}^{img.power})"
        res = lhs - rhs
        out.append(CheckResult(f"{key}.{g}", stmt, res.is_zero(), "" if res.is_zero() else f"residual {res}"))
    return out
