"""Network sensitivity of the first agent in a string of N identical
plants under nearest-neighbour feedback.

The quantity of interest is the (1,1) entry of (I + P(s)C(s) L_N)^{-1},
where L_N is the tridiagonal string coupling matrix (diagonal 1,2,...,2,
off-diagonals -1).  Three evaluation routes are provided:

* ``sensitivity_linsolve`` -- solve the defining tridiagonal system; the
  oracle against which everything else is checked.
* ``sensitivity_eigenproduct`` -- a ratio of products over the closed-form
  eigenvalues of the coupling matrix and of its all-2 (Dirichlet) variant;
  well conditioned near the open-loop poles and overflow-safe in log form.
* ``sensitivity_mobius`` -- the closed form in the small root of the
  quadratic z^2 - (1/(PC) + 2) z + 1 = 0; O(1) per point, but it loses
  precision as |z| -> 1 and then refuses with ``ConditioningError``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ClosedLoopPoleError, ConditioningError, DomainError, StringSensError
from .rational import RationalTF

LINSOLVE_CAP = 2000

# Fall back from the Mobius closed form when |z| is this close to 1; the
# factors (1 - z^(2N))/(1 + z^(2N+1)) cancel catastrophically there, which
# is exactly the regime next to the open-loop poles.
MOBIUS_GUARD = 1e-6

_TINY_FACTOR = 1e-300


def eig_pinned(n: int) -> np.ndarray:
    """Eigenvalues of the string coupling matrix of size n (first diagonal
    entry 1, the rest 2): 2(1 - cos((2k-1)pi/(2n+1))), ascending, all in
    the open interval (0,4)."""
    if n < 1:
        raise DomainError("network size must be at least 1")
    k = np.arange(1, n + 1)
    return 2.0 * (1.0 - np.cos((2 * k - 1) * np.pi / (2 * n + 1)))


def eig_dirichlet(n: int) -> np.ndarray:
    """Eigenvalues of the all-2 tridiagonal variant of size n:
    2(1 - cos(k pi/(n+1))), ascending; n = 0 yields the empty spectrum."""
    if n < 0:
        raise DomainError("matrix size must be nonnegative")
    k = np.arange(1, n + 1)
    return 2.0 * (1.0 - np.cos(k * np.pi / (n + 1)))


@dataclass(frozen=True)
class StringLaplacian:
    """Tridiagonal coupling matrix in banded form."""

    n: int
    variant: str  # "pinned" (corner entry 1) or "dirichlet" (all 2)
    diag: np.ndarray
    offdiag: np.ndarray

    @classmethod
    def pinned(cls, n: int) -> "StringLaplacian":
        if n < 1:
            raise DomainError("network size must be at least 1")
        d = np.full(n, 2.0)
        d[0] = 1.0
        return cls(n, "pinned", d, np.full(max(n - 1, 0), -1.0))

    @classmethod
    def dirichlet(cls, n: int) -> "StringLaplacian":
        if n < 0:
            raise DomainError("matrix size must be nonnegative")
        return cls(n, "dirichlet", np.full(n, 2.0), np.full(max(n - 1, 0), -1.0))

    def to_dense(self) -> np.ndarray:
        out = np.diag(self.diag)
        if self.n > 1:
            out += np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        return out

    def eigenvalues(self) -> np.ndarray:
        return eig_pinned(self.n) if self.variant == "pinned" else eig_dirichlet(self.n)


def mobius_root(loop_value: complex) -> complex:
    """The root of z^2 - (1/v + 2) z + 1 = 0 with modulus at most 1.

    The larger root is computed first with the sign chosen to avoid
    cancellation, and the small root follows from the unit root product.
    """
    v = complex(loop_value)
    if v == 0:
        raise DomainError("loop value is zero: 1/(PC) undefined (sensitivity is 1 there)")
    b = 1.0 / v + 2.0
    sq = cmath.sqrt(b * b - 4.0)
    if (b.conjugate() * sq).real < 0.0:
        sq = -sq
    big = 0.5 * (b + sq)
    if big == 0:  # b = sq = 0 cannot happen (b*b - 4 = -4 then), defensive
        return 1.0 + 0j
    return 1.0 / big


def _power(z: complex, k: int) -> complex:
    """z**k for |z| <= 1, safely underflowing to 0 instead of raising."""
    if z == 0:
        return 0j
    w = k * cmath.log(z)
    if w.real < -745.0:
        return 0j
    return cmath.exp(w)


def sensitivity_mobius(loop: RationalTF, n: int, s: complex,
                       guard: float = MOBIUS_GUARD) -> complex:
    """Closed-form network sensitivity (1-z)(1-z^(2n))/(1+z^(2n+1))."""
    if n < 1:
        raise DomainError("network size must be at least 1")
    v = loop.eval(s)
    if v == 0:
        return 1.0 + 0j
    z = mobius_root(v)
    if abs(z) > 1.0 - guard:
        raise ConditioningError(
            f"|z| = {abs(z):.12f} is within the guard band of 1; "
            "use the eigenproduct form at this point")
    return (1.0 - z) * (1.0 - _power(z, 2 * n)) / (1.0 + _power(z, 2 * n + 1))


def _log_factors(v: complex, gains: np.ndarray):
    f = 1.0 + gains * v
    af = np.abs(f)
    if np.any(af < _TINY_FACTOR):
        raise ClosedLoopPoleError("a closed-loop factor vanished: evaluation at a closed-loop pole")
    return float(np.sum(np.log(af))), float(np.sum(np.angle(f)))


def sensitivity_eigenproduct(loop: RationalTF, n: int, s: complex) -> complex:
    """Network sensitivity as a ratio of closed-loop factor products over
    the two tridiagonal spectra, accumulated in log-magnitude/phase form so
    large networks near open-loop poles do not overflow."""
    if n < 1:
        raise DomainError("network size must be at least 1")
    v = loop.eval(s)
    num_mag, num_ph = _log_factors(v, eig_dirichlet(n - 1))
    den_mag, den_ph = _log_factors(v, eig_pinned(n))
    log_mag = num_mag - den_mag
    if log_mag > 709.0:
        raise ClosedLoopPoleError(
            f"sensitivity magnitude exceeds exp(709) at {s}: evaluation at a closed-loop pole")
    return cmath.exp(complex(log_mag, num_ph - den_ph))


def log_abs_sensitivity(loop: RationalTF, n: int, omega: float) -> float:
    """ln |S_n(j omega)| computed entirely in log form (never overflows)."""
    if n < 1:
        raise DomainError("network size must be at least 1")
    v = loop.eval(1j * omega)
    num_mag, _ = _log_factors(v, eig_dirichlet(n - 1))
    den_mag, _ = _log_factors(v, eig_pinned(n))
    return num_mag - den_mag


def sum_log_abs_factors(loop: RationalTF, gains: np.ndarray, omega: float) -> float:
    """Sum over the given gains of ln |1 + gain * PC(j omega)|."""
    v = loop.eval(1j * omega)
    mag, _ = _log_factors(v, np.asarray(gains, dtype=float))
    return mag


def sensitivity_linsolve(loop: RationalTF, n: int, s: complex,
                         cap: int = LINSOLVE_CAP) -> complex:
    """Defining oracle: solve (I + PC(s) L_n) x = e1 by tridiagonal
    elimination and return x_1."""
    if n < 1:
        raise DomainError("network size must be at least 1")
    if n > cap:
        raise DomainError(f"network size {n} exceeds the linsolve cap {cap}")
    v = loop.eval(s)
    lap = StringLaplacian.pinned(n)
    b = 1.0 + v * lap.diag.astype(complex)
    off = -v  # all off-diagonal entries equal

    # Forward elimination.
    w = np.empty(max(n - 1, 0), dtype=complex)
    g = np.empty(n, dtype=complex)
    piv = b[0]
    if abs(piv) < _TINY_FACTOR:
        raise ClosedLoopPoleError("zero pivot: evaluation at a closed-loop pole")
    if n > 1:
        w[0] = off / piv
    g[0] = 1.0 / piv  # right-hand side e1
    for i in range(1, n):
        piv = b[i] - off * w[i - 1]
        if abs(piv) < _TINY_FACTOR:
            raise ClosedLoopPoleError("zero pivot: evaluation at a closed-loop pole")
        if i < n - 1:
            w[i] = off / piv
        g[i] = (0.0 - off * g[i - 1]) / piv

    # Back substitution (only x_1 is needed, but the sweep is O(n) anyway).
    x = g[n - 1]
    for i in range(n - 2, -1, -1):
        x = g[i] - w[i] * x
    return complex(x)


def sensitivity_auto(loop: RationalTF, n: int, s: complex) -> complex:
    """Mobius closed form with automatic fallback to the eigenproduct form
    when the closed form is ill conditioned."""
    try:
        return sensitivity_mobius(loop, n, s)
    except (ConditioningError, DomainError):
        return sensitivity_eigenproduct(loop, n, s)


@dataclass(frozen=True)
class FrequencyGrid:
    """Frequency grid specification in rad/s.

    For the logarithmic scale ``points_per_decade`` is the sample density
    per decade; for the linear scale it is the total number of samples.
    """

    omega_min: float
    omega_max: float
    points_per_decade: int = 2000
    scale: str = "log"

    def __post_init__(self):
        if not self.omega_min < self.omega_max:
            raise DomainError("omega_min must be below omega_max")
        if self.scale not in ("log", "linear"):
            raise DomainError(f"unknown grid scale {self.scale!r}")
        if self.scale == "log" and self.omega_min <= 0:
            raise DomainError("logarithmic grids need omega_min > 0")
        if self.points_per_decade < 2:
            raise DomainError("grid needs at least 2 points")

    def omegas(self) -> np.ndarray:
        if self.scale == "log":
            decades = math.log10(self.omega_max / self.omega_min)
            count = max(2, int(round(self.points_per_decade * decades)))
            return np.geomspace(self.omega_min, self.omega_max, count)
        return np.linspace(self.omega_min, self.omega_max, max(2, self.points_per_decade))


@dataclass(frozen=True)
class SweepResult:
    """Sampled network sensitivity across a frequency grid.

    Failed points are carried as NaN gap markers, never as an abort.
    ``method`` is the requested evaluation route ("auto" resolves to the
    Mobius form with per-point eigenproduct fallback; the fallback count is
    recorded)."""

    n: int
    method: str
    omegas: np.ndarray
    values: np.ndarray
    log_mags: np.ndarray
    fallback_count: int = 0
    gap_count: int = 0


_METHODS = {
    "mobius": sensitivity_mobius,
    "eigenproduct": sensitivity_eigenproduct,
    "linsolve": sensitivity_linsolve,
}


def sweep(loop: RationalTF, n: int, grid: FrequencyGrid, method: str = "auto") -> SweepResult:
    """Evaluate the network sensitivity across a frequency grid.

    Grid points that land on a pole frequency of the loop are perturbed by
    1e-9 relative before evaluation.  Per-point evaluation errors become
    NaN gaps in the result.

    Peak widths near the open-loop poles shrink like 1/(2n+1), so use at
    least 10*n points across the decade containing a peak to resolve it.
    Points are independent (pure map over the grid), so callers may freely
    parallelize across grid chunks or across network sizes.
    """
    if method != "auto" and method not in _METHODS:
        raise DomainError(f"unknown evaluation method {method!r}")
    omegas = np.array(grid.omegas(), dtype=float)
    pole_freqs = [p.imag for p, _ in loop.axis_poles()]
    for i, w in enumerate(omegas):
        for pf in pole_freqs:
            if abs(w - pf) <= 1e-9 * max(1.0, abs(w)):
                omegas[i] = w * (1.0 + 1e-9) if w != 0.0 else 1e-9

    values = np.empty(len(omegas), dtype=complex)
    fallbacks = 0
    gaps = 0
    for i, w in enumerate(omegas):
        s = 1j * w
        try:
            if method == "auto":
                try:
                    values[i] = sensitivity_mobius(loop, n, s)
                except (ConditioningError, DomainError):
                    fallbacks += 1
                    values[i] = sensitivity_eigenproduct(loop, n, s)
            else:
                values[i] = _METHODS[method](loop, n, s)
        except StringSensError:
            values[i] = complex(np.nan, np.nan)
            gaps += 1

    with np.errstate(divide="ignore", invalid="ignore"):
        log_mags = np.log(np.abs(values))
    return SweepResult(n=n, method=method, omegas=omegas, values=values,
                       log_mags=log_mags, fallback_count=fallbacks, gap_count=gaps)
