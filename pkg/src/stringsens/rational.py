"""Rational transfer functions: pole/zero structure, relative degree, and
Laurent expansion about a designated pole.

Transfer functions may be improper (numerator degree above denominator
degree); nothing here assumes properness.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, NearPoleError
from .polynomial import DEFAULT_CLUSTER_TOL, Poly, RootSet, from_roots, roots

DEFAULT_AXIS_TOL = 1e-7

# Guard distance (relative) below which evaluation at a point is refused as
# "at a pole".  Deliberately far below the 1e-9 grid perturbation used by
# frequency sweeps.
_EVAL_GUARD = 1e-12

_CONTOUR_Q0 = 64
_CONTOUR_QMAX = 4096
_CONTOUR_REL_TOL = 1e-10
_SNAP_REL = 1e-12


def _axis_scale(p: complex) -> float:
    return max(1.0, abs(p))


def _stable_eval(poly: Poly, root_set: RootSet, s: complex) -> complex:
    """Polynomial value that stays accurate near roots.

    Horner's recurrence loses all relative accuracy where the value drops
    below roundoff relative to the magnitude sum of its terms; inside that
    dead zone the product of root factors is exact to the accuracy of the
    computed roots themselves.
    """
    value = poly.eval(s)
    if poly.degree() < 1 or len(root_set) == 0:
        return value
    magnitude_sum = 0.0
    r = abs(s)
    for c in reversed(poly.coeffs):
        magnitude_sum = magnitude_sum * r + abs(c)
    if abs(value) > 1e-13 * magnitude_sum:
        return value
    acc = complex(poly.coeffs[-1])
    for z, m in root_set:
        acc *= (s - z) ** m
    return acc


class RationalTF:
    """Ratio of two real polynomials, reduced so that numerator and
    denominator share no root within the clustering tolerance."""

    __slots__ = ("num", "den", "cluster_tol", "__dict__")

    def __init__(self, num, den, cluster_tol: float = DEFAULT_CLUSTER_TOL):
        num = num if isinstance(num, Poly) else Poly(num)
        den = den if isinstance(den, Poly) else Poly(den)
        if den.is_zero:
            raise DomainError("transfer function denominator is the zero polynomial")
        self.cluster_tol = cluster_tol
        self.num, self.den = self._cancel(num, den, cluster_tol)

    @staticmethod
    def _cancel(num: Poly, den: Poly, tol: float):
        if num.is_zero or num.degree() == 0 or den.degree() == 0:
            return num, den
        nr = list(roots(num, tol))
        dr = list(roots(den, tol))
        cancelled = False
        for i, (z, mn) in enumerate(nr):
            for j, (w, md) in enumerate(dr):
                if md == 0 or mn == 0:
                    continue
                if abs(z - w) <= tol * _axis_scale(z):
                    k = min(mn, md)
                    mn -= k
                    md -= k
                    nr[i] = (z, mn)
                    dr[j] = (w, md)
                    cancelled = True
        if not cancelled:
            return num, den
        num_lead = num.coeffs[-1]
        den_lead = den.coeffs[-1]
        new_num = from_roots(RootSet(tuple((z, m) for z, m in nr if m > 0)), num_lead)
        new_den = from_roots(RootSet(tuple((z, m) for z, m in dr if m > 0)), den_lead)
        return new_num, new_den

    # -- structure -----------------------------------------------------------

    def __repr__(self):
        return f"RationalTF(num={list(self.num.coeffs)}, den={list(self.den.coeffs)})"

    def __mul__(self, other: "RationalTF") -> "RationalTF":
        tol = max(self.cluster_tol, other.cluster_tol)
        return RationalTF(self.num * other.num, self.den * other.den, tol)

    def relative_degree(self) -> int:
        """Denominator degree minus numerator degree (negative if improper)."""
        return self.den.degree() - self.num.degree()

    @cached_property
    def _poles(self) -> RootSet:
        if self.den.degree() == 0:
            return RootSet(())
        return roots(self.den, self.cluster_tol)

    @cached_property
    def _zeros(self) -> RootSet:
        if self.num.is_zero or self.num.degree() == 0:
            return RootSet(())
        return roots(self.num, self.cluster_tol)

    def poles(self) -> RootSet:
        return self._poles

    def zeros(self) -> RootSet:
        return self._zeros

    def crhp_poles(self, axis_tol: float = DEFAULT_AXIS_TOL):
        """Poles in the closed right half plane (Re >= 0 within tolerance)."""
        return [(p, m) for p, m in self._poles if p.real >= -axis_tol * _axis_scale(p)]

    def orhp_poles(self, axis_tol: float = DEFAULT_AXIS_TOL):
        """Poles strictly inside the right half plane."""
        return [(p, m) for p, m in self._poles if p.real > axis_tol * _axis_scale(p)]

    def axis_poles(self, axis_tol: float = DEFAULT_AXIS_TOL):
        """Poles on the imaginary axis (|Re| within tolerance)."""
        return [(p, m) for p, m in self._poles if abs(p.real) <= axis_tol * _axis_scale(p)]

    # -- evaluation ------------------------------------------------------------

    def _nearest_pole(self, s: complex):
        best, dist = None, np.inf
        for p, _ in self._poles:
            d = abs(s - p)
            if d < dist:
                best, dist = p, d
        return best, dist

    def eval(self, s) -> complex:
        """num(s)/den(s); refuses points within guard distance of a pole.

        Very close to a root, Horner evaluation of a polynomial is pure
        cancellation noise (the true value sinks below the roundoff floor
        of the coefficient sum); there the factored form built from the
        computed roots is used instead, which keeps full relative accuracy
        down to the guard distance."""
        s = complex(s)
        pole, dist = self._nearest_pole(s)
        if pole is not None and dist <= _EVAL_GUARD * _axis_scale(pole):
            raise NearPoleError(f"evaluation at {s} is within guard distance of pole {pole}", pole=pole)
        dv = _stable_eval(self.den, self._poles, s)
        if dv == 0:
            raise NearPoleError(f"denominator vanishes at {s}", pole=s)
        return _stable_eval(self.num, self._zeros, s) / dv

    __call__ = eval

    def _eval_many_unguarded(self, s):
        return self.num.eval_many(s) / self.den.eval_many(s)


@dataclass(frozen=True)
class LaurentExpansion:
    """Laurent coefficients of a transfer function about a pole.

    ``coeffs[i]`` is the coefficient of (s - center)**(min_order + i); the
    leading coefficient (order ``min_order = -multiplicity``) is nonzero.
    """

    center: complex
    min_order: int
    coeffs: tuple

    @property
    def multiplicity(self) -> int:
        return -self.min_order

    @property
    def max_order(self) -> int:
        return self.min_order + len(self.coeffs) - 1

    def coefficient(self, k: int) -> complex:
        if not self.min_order <= k <= self.max_order:
            raise DomainError(f"order {k} outside computed range "
                              f"[{self.min_order}, {self.max_order}]")
        return self.coeffs[k - self.min_order]

    def eval_series(self, s: complex) -> complex:
        """Partial-sum evaluation of the expansion at a point."""
        ds = complex(s) - self.center
        return sum(a * ds ** (self.min_order + i) for i, a in enumerate(self.coeffs))


def _contour_coefficients(g: RationalTF, p: complex, r: float, q: int, k_lo: int, k_hi: int):
    """Trapezoid discretization of the Cauchy coefficient integrals on a
    circle of radius r about p, for all orders k_lo..k_hi at once.

    With nodes s_j = p + r*exp(2*pi*i*j/q) the trapezoid rule turns each
    coefficient integral into a DFT bin of the node values, so one FFT
    yields every requested order.
    """
    theta = 2.0 * np.pi * np.arange(q) / q
    nodes = p + r * np.exp(1j * theta)
    vals = g._eval_many_unguarded(nodes)
    spectrum = np.fft.fft(vals) / q
    ks = np.arange(k_lo, k_hi + 1)
    return spectrum[np.mod(ks, q)] * r ** (-ks.astype(float))


def laurent_at(g: RationalTF, p: complex, m: int, num_terms: int,
               cluster_tol: float = DEFAULT_CLUSTER_TOL) -> LaurentExpansion:
    """Laurent expansion of ``g`` about the pole ``p`` of multiplicity ``m``.

    Coefficients are computed by contour integration on a circle centered
    at ``p`` whose radius is half the distance to the nearest other pole or
    zero (capped at 1), discretized by the trapezoid rule with the node
    count doubled until successive estimates agree.  ``num_terms``
    coefficients are returned, starting at order ``-m``; at least ``m + 1``
    are required so the leading coefficient and the next one are both
    produced.

    The result is checked against the claimed multiplicity: the order
    ``-m`` coefficient must be significant and the order ``-(m+1)`` test
    coefficient negligible.
    """
    p = complex(p)
    if m < 1:
        raise DomainError("pole multiplicity must be a positive integer")
    if num_terms < m + 1:
        raise DomainError(f"num_terms={num_terms} too small: need at least m+1={m + 1}")
    if num_terms + 2 > _CONTOUR_Q0:
        raise DomainError(f"num_terms={num_terms} exceeds the contour resolution "
                          f"({_CONTOUR_Q0 - 2} coefficients)")

    detected = [(z, mult) for z, mult in g.poles()
                if abs(z - p) <= cluster_tol * _axis_scale(p)]
    if not detected:
        raise DomainError(f"{p} is not within cluster tolerance of any pole")

    # Radius: half the distance to the nearest distinct singular point
    # (pole or zero), capped at 1.  The series converges up to the nearest
    # other pole; zeros are also excluded for safety.
    d_nearest = np.inf
    for z, _ in list(g.poles()) + list(g.zeros()):
        d = abs(z - p)
        if d > cluster_tol * _axis_scale(p):
            d_nearest = min(d_nearest, d)
    r = min(1.0, 0.5 * d_nearest) if np.isfinite(d_nearest) else 1.0

    k_lo, k_hi = -m - 1, num_terms - m - 1
    q = _CONTOUR_Q0
    prev = _contour_coefficients(g, p, r, q, k_lo, k_hi)
    while q < _CONTOUR_QMAX:
        q *= 2
        cur = _contour_coefficients(g, p, r, q, k_lo, k_hi)
        scale = max(np.max(np.abs(cur)), 1e-300)
        if np.max(np.abs(cur - prev)) <= _CONTOUR_REL_TOL * scale:
            prev = cur
            break
        prev = cur

    coeff_scale = float(np.max(np.abs(prev)))
    a_test = prev[0]           # order -(m+1), must vanish
    a_lead = prev[1]           # order -m
    if abs(a_lead) <= 1e-9 * coeff_scale:
        raise DomainError(
            f"multiplicity mismatch at {p}: the order {-m} coefficient is "
            "numerically zero (actual multiplicity is lower)")
    if abs(a_test) > 1e-6 * abs(a_lead):
        raise DomainError(
            f"multiplicity mismatch at {p}: the order {-(m + 1)} test "
            f"coefficient is significant (actual multiplicity exceeds {m})")

    out = []
    for a in prev[1:]:
        out.append(0j if abs(a) < _SNAP_REL * abs(a_lead) else complex(a))
    return LaurentExpansion(center=p, min_order=-m, coeffs=tuple(out))
