"""Exact supremum of a ratio of polynomials over the probability simplex.

For ``N(p) / D(p)`` with ``D >= 0`` on the simplex, the supremum is attained
either at a vertex or at a point of some face's relative interior where the
restricted gradient of the ratio vanishes, i.e. ``D * dN - N * dD = 0``.  Each
face is parametrized by all but its last coordinate and the critical system is
solved symbolically.  Whenever that set is not finite the routine gives up
with :class:`SupUnavailable` and the caller falls back to a grid bound.

Where ``D`` vanishes the ratio is infinite or, at a common zero, a limit;
see :func:`simplex_sup` for how both are handled.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import sympy

Monomials = Mapping[tuple[int, ...], Fraction]

_DIGITS = 60
_EPS = sympy.Rational(1, 10**40)
_ROUND = 10**12


class SupUnavailable(Exception):
    """The critical set is not finite or could not be decided."""


@dataclass(frozen=True)
class SupResult:
    value: Fraction | float
    argmax: tuple[Fraction, ...]
    exact: bool


def _poly(coeffs: Monomials, subs: list, gens: list) -> sympy.Poly:
    expr = sympy.Integer(0)
    for counts, c in coeffs.items():
        if not c:
            continue
        term = sympy.Rational(c.numerator, c.denominator)
        for j, e in enumerate(counts):
            if e:
                term *= subs[j] ** e
        expr += term
    return sympy.Poly(sympy.expand(expr), *gens) if gens else sympy.Poly(expr, sympy.Symbol("_"))


def _eval(poly: sympy.Poly, point: tuple) -> sympy.Expr:
    return poly.as_expr().subs(dict(zip(poly.gens, point)), simultaneous=True)


def _to_fraction(x) -> Fraction:
    x = sympy.Rational(x)
    return Fraction(int(x.p), int(x.q))


def _candidate(num: sympy.Poly, den: sympy.Poly, point: tuple):
    """Ratio at ``point``: ``(value, exact)``; value is an upper rounding when inexact."""
    if all(sympy.sympify(c).is_Rational for c in point):
        nv, dv = _eval(num, point), _eval(den, point)
        if dv == 0:
            raise SupUnavailable("denominator vanishes inside a face")
        return _to_fraction(nv / dv), True
    nv = sympy.N(_eval(num, point), _DIGITS)
    dv = sympy.N(_eval(den, point), _DIGITS)
    if dv < _EPS:
        raise SupUnavailable("denominator vanishes inside a face")
    v = nv / dv
    return Fraction(int(sympy.ceiling(v * _ROUND)) + 1, _ROUND), False


def _face_points(num: sympy.Poly, den: sympy.Poly, gens: list) -> list[tuple]:
    g = sympy.gcd(num, den)
    if not g.is_ground:
        num, den = sympy.div(num, g)[0], sympy.div(den, g)[0]
    if len(gens) == 1:
        crit = den * num.diff(gens[0]) - num * den.diff(gens[0])
        if crit.is_zero:
            return [(sympy.Rational(1, 2),)]
        return [(x,) for x in sympy.Poly(crit, gens[0]).real_roots() if 0 < x < 1]
    system = [den * num.diff(u) - num * den.diff(u) for u in gens]
    if any(eq.is_zero for eq in system):
        # the ratio ignores that coordinate, so every value inside the face is
        # also taken on the edge where the coordinate is 0
        return []
    if len(gens) != 2:
        raise SupUnavailable("critical systems above two variables are not solved")
    g1, g2 = system
    h = sympy.gcd(g1, g2)
    if h.is_ground:
        return _plane_points(g1, g2, gens)
    # the gradient vanishes on the whole curve h = 0, so the ratio is constant
    # on each of its components: one reaching the boundary repeats a boundary
    # value, a closed one has a point where h_v = 0
    points = _plane_points(sympy.div(g1, h)[0], sympy.div(g2, h)[0], gens)
    h = sympy.Poly(sympy.sqf_part(h.as_expr()), *gens)
    hv = h.diff(gens[1])
    if not hv.is_zero:
        points += _plane_points(h, hv, gens)
    return points


def _plane_points(g1: sympy.Poly, g2: sympy.Poly, gens: list) -> list[tuple]:
    """Superset of the common zeros of ``g1, g2`` inside the open triangle.

    The resultant in the second variable gives every possible first
    coordinate; for each, all real roots of ``g1`` in range are kept.  Extra
    points are harmless because every candidate is a genuine point of the face.
    """
    u, v = gens
    if g1.is_ground or g2.is_ground:
        return []
    res = sympy.Poly(sympy.resultant(g1.as_expr(), g2.as_expr(), v), u)
    if res.is_zero:
        raise SupUnavailable("critical equations share a factor")
    points = []
    for u0 in res.real_roots():
        if not 0 < u0 < 1:
            continue
        for g in (g1, g2):
            if u0.is_Rational:
                line = sympy.Poly(g.as_expr().subs(u, u0), v)
                if line.is_zero:
                    continue
                vs = [x for x in line.real_roots() if 0 < x < 1 - u0]
            else:
                vs = _numeric_roots(g, u0, v)
                if vs is None:
                    continue
            points.extend((u0, x) for x in vs)
            break
        else:
            raise SupUnavailable("critical set contains a segment")
    return points


def _numeric_roots(g: sympy.Poly, u0, v) -> list | None:
    with mpmath.workdps(_DIGITS):
        uval = mpmath.mpf(str(sympy.N(u0, _DIGITS)))
        coeffs = [mpmath.mpf(0)] * (g.degree(v) + 1)
        for (eu, ev), c in g.terms():
            coeffs[ev] += mpmath.mpf(c.p) / c.q * uval**eu
        while coeffs and abs(coeffs[-1]) < mpmath.mpf(10) ** (-_DIGITS + 10):
            coeffs.pop()
        if not coeffs:
            return None
        if len(coeffs) == 1:
            return []
        roots = mpmath.polyroots(coeffs[::-1], maxsteps=200, extraprec=200, error=False)
        out = []
        for z in roots:
            if abs(mpmath.im(z)) < 1e-20:
                x = mpmath.re(z)
                if 0 < x < 1 - uval:
                    out.append(sympy.Float(mpmath.nstr(x, _DIGITS), _DIGITS))
        return out


def _restrict(mono: Monomials, face: tuple[int, ...]) -> dict:
    inside = set(face)
    return {c: v for c, v in mono.items() if v and all(e == 0 or j in inside for j, e in enumerate(c))}


def _vertex_limit(num: Monomials, den: Monomials, j: int, k: int, max_free: int) -> SupResult:
    """``limsup`` of the ratio at vertex ``j`` where both polynomials vanish.

    In the chart ``p_j = 1`` the ratio is ``N(1, t) / D(1, t)``; with ``a`` and
    ``b`` the lowest total degrees in ``t`` the limit is infinite if ``a < b``
    and otherwise the supremum over directions of the lowest-degree parts.
    """

    def lowest(mono):
        deg = min(sum(c) - c[j] for c, v in mono.items() if v)
        part = {c[:j] + c[j + 1 :]: v for c, v in mono.items() if v and sum(c) - c[j] == deg}
        return deg, part

    a, num_low = lowest(num)
    b, den_low = lowest(den)
    if a < b:
        return SupResult(math.inf, (), True)
    if k == 2:
        return SupResult(sum(num_low.values()) / sum(den_low.values()), (), True)
    return _sup(num_low, den_low, k - 1, max_free, allow_shared=False)


def simplex_sup(num: Monomials, den: Monomials, k: int, max_free: int = 2) -> SupResult:
    """Exact ``sup_{p in simplex} N(p)/D(p)`` (0/0 counts as 1).

    ``num`` and ``den`` map exponent vectors of length ``k`` to nonnegative
    coefficients of homogeneous polynomials of equal degree with ``N >= D``
    on the simplex.  Faces with more than ``max_free`` free parameters are not
    attempted.

    Nonnegative coefficients mean a polynomial vanishes somewhere inside a
    face only if it vanishes on the whole face.  Where ``D`` vanishes on a face
    and ``N`` does not, the ratio is infinite there; where both vanish at a
    vertex the limit is found by blowing the vertex up.  Both vanishing on a
    larger face is reported as :class:`SupUnavailable`.
    """
    if any(v < 0 for v in (*num.values(), *den.values())):
        raise ValueError("coefficients must be nonnegative")
    return _sup(num, den, k, max_free, allow_shared=True)


def _sup(num: Monomials, den: Monomials, k: int, max_free: int, allow_shared: bool) -> SupResult:
    if k - 1 > max_free:
        raise SupUnavailable(f"simplex of dimension {k - 1} exceeds {max_free}")
    if not any(num.values()):
        return SupResult(Fraction(1), tuple(Fraction(int(j == 0)) for j in range(k)), True)
    best: Fraction | float = -1
    best_point: tuple[Fraction, ...] = ()
    exact = True
    for size in range(1, k + 1):
        for face in itertools.combinations(range(k), size):
            nf, df = _restrict(num, face), _restrict(den, face)
            vertex = tuple(Fraction(int(j == face[0])) for j in range(k))
            if not df:
                if nf:
                    point = tuple(Fraction(1, size) if j in face else Fraction(0) for j in range(k))
                    return SupResult(math.inf, point, True)
                if size > 1 or not allow_shared:
                    raise SupUnavailable("numerator and denominator vanish on a face")
                res = _vertex_limit(num, den, face[0], k, max_free)
                found = [(vertex, res.value, res.exact)]
            elif size == 1:
                found = [(vertex, sum(nf.values()) / sum(df.values()), True)]
            else:
                gens = list(sympy.symbols(f"u0:{size - 1}"))
                subs = [sympy.Integer(0)] * k
                for i, j in enumerate(face[:-1]):
                    subs[j] = gens[i]
                subs[face[-1]] = 1 - sum(gens)
                npoly, dpoly = _poly(nf, subs, gens), _poly(df, subs, gens)
                found = []
                for pt in _face_points(npoly, dpoly, gens):
                    value, is_exact = _candidate(npoly, dpoly, pt)
                    coords = [Fraction(0)] * k
                    for i, j in enumerate(face[:-1]):
                        coords[j] = _approx(pt[i])
                    coords[face[-1]] = 1 - sum(coords)
                    found.append((tuple(coords), value, is_exact))
            for point, value, is_exact in found:
                if value > best:
                    best, best_point, exact = value, point, is_exact
                if value == math.inf:
                    return SupResult(math.inf, point, True)
    return SupResult(best, best_point, exact)


def _approx(x) -> Fraction:
    if sympy.sympify(x).is_Rational:
        return _to_fraction(x)
    return Fraction(str(sympy.N(x, 30))).limit_denominator(10**6)
