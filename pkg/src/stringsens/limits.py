"""Fundamental sensitivity limits for string networks.

Three analyses live here:

* ``hinf_lower_bound`` -- a lower bound on sup_N of the H-infinity norm of
  the network sensitivity, driven by the closed-right-half-plane poles of
  the loop and their Laurent data.  Any open-right-half-plane pole, or an
  imaginary-axis pole of multiplicity three or more, makes the supremum
  infinite; an axis pole of multiplicity two contributes the finite bound
  4 / (pi |a_{-1} sqrt(a_{-2})|) built from its Laurent coefficients.
* ``stable_for_all_gains`` -- whether 1/(1 + k PC) is stable for every
  gain k in the open interval (0,4), the exact gain range swept out by the
  string coupling eigenvalues.  Decided by locating imaginary-axis
  crossing gains and Routh-testing a midpoint of each subinterval.
* ``bode_integral`` / ``det_log_integral`` -- the sensitivity integral
  int_0^inf ln|S_N(j w)| dw and its determinant-form building blocks,
  which vanish whenever the gain-interval premise holds and the loop rolls
  off with relative degree at least two.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, PremiseError, StringSensError
from .polynomial import Poly, roots
from .rational import DEFAULT_AXIS_TOL, RationalTF, laurent_at
from .sensitivity import (
    eig_dirichlet,
    eig_pinned,
    log_abs_sensitivity,
    sensitivity_eigenproduct,
    sum_log_abs_factors,
)

GAIN_INTERVAL = (0.0, 4.0)

_BOUNDARY_REL = 1e-9
_ROUTH_ZERO_REL = 1e-12

# Poles/zeros this close (relative) to the imaginary axis get integration
# split points, since they pinch logarithmic features into the integrand.
_NEAR_AXIS_BAND = 1e-3


# ---------------------------------------------------------------------------
# Report records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundReport:
    """Verdict of the H-infinity lower-bound analysis.

    ``bound_value`` is the largest per-pole bound when the verdict is
    finite (0 when no constraint is active, inf in the degenerate case of
    a vanishing residue at a double axis pole).  ``laurent_pair`` holds
    (a_{-m}, a_{1-m}) for the contributing pole; ``axis_margin`` is that
    pole's distance from the imaginary axis.
    """

    verdict: str                    # "finite" | "unbounded"
    bound_value: float
    contributing_pole: complex | None
    multiplicity: int
    laurent_pair: tuple | None
    reason: str                     # orhp_pole | axis_multiplicity_ge_3 | axis_m2 | axis_m1 | no_crhp_poles
    axis_margin: float | None

    @property
    def bound_db(self) -> float | None:
        if self.verdict != "finite" or self.bound_value <= 0 or not math.isfinite(self.bound_value):
            return None
        return 20.0 * math.log10(self.bound_value)


@dataclass(frozen=True)
class GainCrossing:
    """A gain at which the closed loop acquires an imaginary-axis root."""

    k: float
    omega: float
    boundary: bool = False  # within 1e-9 of the gain-interval endpoint 4


@dataclass(frozen=True)
class StabilityReport:
    """Result of the gain-interval stability test on (0,4)."""

    stable_all_gains: bool
    critical_gains: tuple          # all positive crossings, ascending in k
    tested_gains: tuple            # (midpoint gain, stable) samples
    gain_interval: tuple = GAIN_INTERVAL


@dataclass(frozen=True)
class IntegralReport:
    """A sensitivity integral value with its accounting."""

    n: int
    value: float
    error_estimate: float
    split_points: tuple
    truncation_freq: float
    tail_estimate: float


# ---------------------------------------------------------------------------
# H-infinity lower bound
# ---------------------------------------------------------------------------

def hinf_lower_bound(loop: RationalTF, axis_tol: float = DEFAULT_AXIS_TOL) -> BoundReport:
    """Lower bound on sup over network sizes of the sensitivity H-infinity
    norm, from the closed-right-half-plane poles of the loop."""
    orhp = loop.orhp_poles(axis_tol)
    if orhp:
        p, m = max(orhp, key=lambda t: t[0].real)
        return BoundReport("unbounded", math.inf, p, m, None, "orhp_pole",
                           abs(p.real))

    axis = loop.axis_poles(axis_tol)
    heavy = [(p, m) for p, m in axis if m >= 3]
    if heavy:
        p, m = max(heavy, key=lambda t: t[1])
        return BoundReport("unbounded", math.inf, p, m, None,
                           "axis_multiplicity_ge_3", abs(p.real))

    doubles = [(p, m) for p, m in axis if m == 2]
    if doubles:
        best = None
        for p, m in doubles:
            exp = laurent_at(loop, p, 2, num_terms=3, cluster_tol=loop.cluster_tol)
            a_lead = exp.coefficient(-2)
            a_res = exp.coefficient(-1)
            denom = math.pi * abs(a_res) * math.sqrt(abs(a_lead))
            value = math.inf if denom == 0.0 else 4.0 / denom
            if best is None or value > best[0]:
                best = (value, p, (a_lead, a_res))
        value, p, pair = best
        return BoundReport("finite", value, p, 2, pair, "axis_m2", abs(p.real))

    if axis:
        p, m = axis[0]
        return BoundReport("finite", 0.0, p, m, None, "axis_m1", abs(p.real))

    return BoundReport("finite", 0.0, None, 0, None, "no_crhp_poles", None)


# ---------------------------------------------------------------------------
# Peak probing near a double axis pole
# ---------------------------------------------------------------------------

def _golden_max(f, a: float, b: float, iters: int = 60):
    """Golden-section maximization of f on [a, b]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - inv_phi * (b - a)
    x2 = a + inv_phi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv_phi * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv_phi * (b - a)
            f1 = f(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def probe_peak(loop: RationalTF, pole: complex, n: int, evaluate=None,
               grid_points: int = 240):
    """Locate the sensitivity peak that forms just above a double
    imaginary-axis pole as the network grows.

    The peak of |S_n(j w)| is searched in the window
    ``Im(pole) + (0, 4 pi |sqrt(a_{-2})| / (2n+1)]``, seeded at a quarter
    of the window, with golden-section refinement around the best grid
    sample.  Returns ``(omega_peak, peak_magnitude)``.
    """
    if evaluate is None:
        evaluate = sensitivity_eigenproduct
    exp = laurent_at(loop, pole, 2, num_terms=3, cluster_tol=loop.cluster_tol)
    step = math.pi * abs(np.sqrt(complex(exp.coefficient(-2)))) / (2 * n + 1)
    base = complex(pole).imag

    def mag(w: float) -> float:
        try:
            return abs(evaluate(loop, n, 1j * w))
        except StringSensError:
            return -math.inf

    offsets = np.linspace(4.0 * step / grid_points, 4.0 * step, grid_points)
    mags = np.array([mag(base + dw) for dw in offsets])
    i = int(np.argmax(mags))
    if not np.isfinite(mags[i]):
        raise DomainError("sensitivity could not be evaluated anywhere in the probe window")
    if i == len(offsets) - 1:
        warnings.warn("no interior local maximum in the probe window; "
                      "reporting the window-edge value", stacklevel=2)
    lo = base + offsets[max(i - 1, 0)]
    hi = base + offsets[min(i + 1, len(offsets) - 1)]
    w_peak, m_peak = _golden_max(mag, lo, hi)
    return float(w_peak), float(m_peak)


# ---------------------------------------------------------------------------
# Routh-Hurwitz test and gain crossings
# ---------------------------------------------------------------------------

def routh_hurwitz_stable(p: Poly, zero_tol: float = _ROUTH_ZERO_REL) -> bool:
    """True iff every root of ``p`` lies in the open left half plane.

    The full Routh array is built for arbitrary degree; stability requires
    every first-column entry to share the sign of the leading coefficient.
    A (numerically) zero first-column entry reports False: marginal or
    unstable, conservatively folded together.
    """
    p = p.trimmed()
    if p.is_zero:
        raise DomainError("the zero polynomial has no stability verdict")
    if p.degree() < 1:
        raise DomainError("stability is undefined for a constant")
    c = list(reversed(p.coeffs))  # descending
    scale = max(abs(x) for x in c)
    row0 = c[0::2]
    row1 = c[1::2]
    width = len(row0)
    row1 += [0.0] * (width - len(row1))

    lead_sign = 1.0 if c[0] > 0 else -1.0
    first_col = [c[0]]
    rows = [row0, row1]
    for _ in range(p.degree() - 1):
        prev, cur = rows[-2], rows[-1]
        if abs(cur[0]) <= zero_tol * scale:
            return False
        nxt = []
        for j in range(width - 1):
            a = prev[j + 1] if j + 1 < len(prev) else 0.0
            b = cur[j + 1] if j + 1 < len(cur) else 0.0
            nxt.append((cur[0] * a - prev[0] * b) / cur[0])
        nxt.append(0.0)
        first_col.append(cur[0])
        rows.append(nxt)
    first_col.append(rows[-1][0])

    for entry in first_col:
        if abs(entry) <= zero_tol * scale or entry * lead_sign < 0:
            return False
    return True


def gain_crossings(loop: RationalTF):
    """All positive gains k at which the characteristic polynomial
    den + k*num acquires an imaginary-axis root, with the crossing
    frequency.

    Writing G(w) = den(jw) * conj(num(jw)), the crossing condition
    den(jw) + k num(jw) = 0 with real k forces Im G(w) = 0 (a real odd
    polynomial in w, whose coefficients come from den(s) * num(-s)) and
    then k = -Re G(w) / |num(jw)|^2.

    Loops whose frequency response is real for every w (even loops such as
    1/s^2) destabilize along a gain continuum rather than at isolated
    crossings; the empty list is returned for them and midpoint testing in
    ``stable_for_all_gains`` still decides stability.
    """
    num, den = loop.num, loop.den
    if num.is_zero:
        raise DomainError("degenerate loop: zero numerator has no gain response")

    u = den * num.reflected()              # u(s) = den(s) * num(-s)
    im_coeffs = [0.0] * len(u.coeffs)
    for t, c in enumerate(u.coeffs):
        if t % 2 == 1:
            im_coeffs[t] = c if t % 4 == 1 else -c
    im_poly = Poly(im_coeffs).trimmed()
    if im_poly.is_zero:
        return []

    found = []
    if im_poly.degree() >= 1:
        candidates = roots(im_poly, cluster_tol=1e-9)
    else:
        candidates = []
    for z, _ in candidates:
        if abs(z.imag) > 1e-7 * max(1.0, abs(z)):
            continue
        w = abs(z.real)  # +/- w give the same crossing; report w >= 0
        nv = num.eval(1j * w)
        nn = abs(nv) ** 2
        if nn < 1e-300:
            continue
        dv = den.eval(1j * w)
        k = -(dv * nv.conjugate()).real / nn
        if not (math.isfinite(k) and k > 1e-12):
            continue
        # Root-splitting artifacts of multiple roots of Im G masquerade as
        # crossings; a genuine crossing leaves d + k n with essentially no
        # residual at jw relative to the cancelling terms.
        residual = abs(dv + k * nv)
        if residual > 1e-6 * max(abs(dv), k * abs(nv), 1e-300):
            continue
        found.append((k, w))

    found.sort()
    out = []
    for k, w in found:
        if out and abs(k - out[-1].k) <= 1e-9 * max(1.0, out[-1].k) \
                and abs(w - out[-1].omega) <= 1e-9 * max(1.0, out[-1].omega):
            continue
        boundary = abs(k - GAIN_INTERVAL[1]) <= _BOUNDARY_REL * GAIN_INTERVAL[1]
        out.append(GainCrossing(k=k, omega=w, boundary=boundary))
    return out


def characteristic(loop: RationalTF, k: float) -> Poly:
    """The closed-loop characteristic polynomial den + k*num, trimmed of
    leading-coefficient cancellation."""
    return (loop.den + loop.num.scale(k)).trimmed()


def stable_for_all_gains(loop: RationalTF) -> StabilityReport:
    """Test whether 1/(1 + k PC) is stable for every k in the open
    interval (0,4).

    The interval is partitioned at the interior crossing gains and one
    midpoint of each subinterval is Routh-tested; a crossing exactly at
    the endpoint 4 (within 1e-9) is reported with a boundary flag but does
    not negate stability, since the coupling eigenvalues never attain 4.
    """
    lo, hi = GAIN_INTERVAL
    crossings = gain_crossings(loop)
    interior = [c.k for c in crossings
                if lo + _BOUNDARY_REL < c.k < hi * (1.0 - _BOUNDARY_REL)]
    edges = [lo] + sorted(interior) + [hi]
    tested = []
    all_ok = True
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a <= 2 * _BOUNDARY_REL:
            continue
        mid = 0.5 * (a + b)
        try:
            ok = routh_hurwitz_stable(characteristic(loop, mid))
        except DomainError:
            ok = False
        tested.append((mid, ok))
        all_ok = all_ok and ok
    return StabilityReport(stable_all_gains=all_ok,
                           critical_gains=tuple(crossings),
                           tested_gains=tuple(tested))


# ---------------------------------------------------------------------------
# Sensitivity integrals
# ---------------------------------------------------------------------------

def _near_axis_split_points(polys, band: float = _NEAR_AXIS_BAND):
    """Positive frequencies |Im(root)| of near-axis roots of the given
    polynomials: the spots where the log integrand develops (integrable)
    singular features."""
    pts = []
    mags = [1.0]
    for poly in polys:
        if poly.is_zero or poly.degree() < 1:
            continue
        for z, _ in roots(poly):
            mags.append(abs(z))
            if abs(z.real) <= band * max(1.0, abs(z)) and abs(z.imag) > 0:
                pts.append(abs(z.imag))
    return pts, max(mags)


def _laddered_edges(edges):
    """Insert geometrically spaced sub-edges against both ends of every
    panel.  Split points sit at (integrable) logarithmic singularities of
    the integrand; without the ladder, a spike at the edge of a panel many
    decades wide falls between the first quadrature nodes and adaptive
    subdivision converges prematurely on a smooth-looking remainder."""
    refined = set(edges)
    for a, b in zip(edges[:-1], edges[1:]):
        width = b - a
        for scale in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6):
            refined.add(a + width * scale)
            refined.add(b - width * scale)
    return sorted(refined)


def _integrate_to_infinity(f, split_points, omega_cap: float, tol: float):
    """Adaptive integration of f over [0, inf): Gauss-Kronrod panels up to
    the truncation frequency, then the tail by the substitution w = cap/t.

    The error budget is split 80% across the finite panels and 20% for the
    tail; the truncation frequency is doubled until the tail value fits
    its share."""
    finite_budget = 0.8 * tol
    tail_budget = 0.2 * tol

    def tail_value(cap):
        def g(t):
            if t <= 0.0:
                return 0.0
            w = cap / t
            return f(w) * cap / (t * t)
        return integrate.quad(g, 0.0, 1.0, epsabs=tail_budget / 4.0,
                              epsrel=1e-9, limit=200)

    cap = omega_cap
    tail, tail_err = tail_value(cap)
    doublings = 0
    while abs(tail) > tail_budget and doublings < 40:
        cap *= 2.0
        tail, tail_err = tail_value(cap)
        doublings += 1

    splits = sorted({p for p in split_points if 0.0 < p < cap})
    edges = _laddered_edges([0.0] + splits + [cap])
    per_panel = finite_budget / (len(edges) - 1)
    total = 0.0
    err = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            val, aerr = integrate.quad(f, a, b, epsabs=per_panel,
                                       epsrel=1e-9, limit=400)
            total += val
            err += aerr
    return total + tail, err + tail_err, tuple(splits), cap, tail


def _guarded(f):
    """Retry with a relative nudge if a quadrature node lands exactly on a
    pole frequency (open rules make this essentially impossible, but the
    integrand must never abort a panel)."""
    def wrapped(w):
        try:
            return f(w)
        except StringSensError:
            return f(w * (1.0 + 1e-9) if w != 0.0 else 1e-12)
    return wrapped


def _check_integral_premise(loop: RationalTF, stability_check) -> None:
    rd = loop.relative_degree()
    if rd < 2:
        raise PremiseError(
            f"sensitivity integral requires at least two more poles than "
            f"zeros; relative degree is {rd}", premise="relative_degree")
    if not stability_check():
        raise PremiseError(
            "the loop is not stable across the gain interval (0,4); the "
            "integral relation is not asserted", premise="gain_stability")


def bode_integral(loop: RationalTF, n: int, tol: float = 1e-6,
                  evaluate_log=None, require_premise: bool = True) -> IntegralReport:
    """The sensitivity integral  int_0^inf ln |S_n(j w)| dw.

    Preconditions (stability over the gain interval and relative degree at
    least 2) are enforced by default; ``require_premise=False`` computes
    the number anyway for diagnostic use, with extra split points at the
    closed-loop axis roots that then appear.
    """
    if require_premise:
        _check_integral_premise(loop, lambda: stable_for_all_gains(loop).stable_all_gains)

    gains = np.concatenate([eig_pinned(n), eig_dirichlet(n - 1)])
    factor_polys = [characteristic(loop, float(k)) for k in gains]
    pts, max_mag = _near_axis_split_points([loop.num, loop.den] + factor_polys)
    cap = 100.0 * max(1.0, max_mag)

    if evaluate_log is None:
        def evaluate_log(w):
            return log_abs_sensitivity(loop, n, w)
    f = _guarded(evaluate_log)

    value, err, splits, cap, tail = _integrate_to_infinity(f, pts, cap, tol)
    return IntegralReport(n=n, value=value, error_estimate=err,
                          split_points=splits, truncation_freq=cap,
                          tail_estimate=tail)


def det_log_integral(loop: RationalTF, n: int, variant: str = "pinned",
                     tol: float = 1e-6, require_premise: bool = True) -> IntegralReport:
    """The determinant-form integral
    int_0^inf sum_k ln |1 + gain_k PC(j w)|^{-1} dw over the chosen
    coupling spectrum ("pinned" of size n, or the all-2 "dirichlet"
    variant).  Vanishes whenever every per-gain loop is stable and the
    relative degree is at least 2."""
    if variant == "pinned":
        gains = eig_pinned(n)
    elif variant == "dirichlet":
        gains = eig_dirichlet(n)
    else:
        raise DomainError(f"unknown coupling variant {variant!r}")

    if len(gains) == 0:
        return IntegralReport(n=n, value=0.0, error_estimate=0.0,
                              split_points=(), truncation_freq=0.0,
                              tail_estimate=0.0)

    factor_polys = [characteristic(loop, float(k)) for k in gains]
    if require_premise:
        def spectrum_stable():
            try:
                return all(routh_hurwitz_stable(q) for q in factor_polys)
            except DomainError:
                return False
        _check_integral_premise(loop, spectrum_stable)

    pts, max_mag = _near_axis_split_points([loop.num, loop.den] + factor_polys)
    cap = 100.0 * max(1.0, max_mag)
    f = _guarded(lambda w: -sum_log_abs_factors(loop, gains, w))
    value, err, splits, cap, tail = _integrate_to_infinity(f, pts, cap, tol)
    return IntegralReport(n=n, value=value, error_estimate=err,
                          split_points=splits, truncation_freq=cap,
                          tail_estimate=tail)
