"""Real-coefficient polynomials with complex evaluation and root finding.

Coefficients are stored in ascending power order: ``coeffs[k]`` multiplies
``s**k``.  This convention is used everywhere in the package, including the
CLI configuration format (note that most control texts print descending).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

DEFAULT_CLUSTER_TOL = 1e-6

_NEWTON_MAX_ITER = 80


class Poly:
    """Immutable real polynomial in the Laplace variable.

    The zero polynomial is represented as the single coefficient ``0.0``;
    any other polynomial carries a nonzero leading (highest power)
    coefficient.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        cs = [float(c) for c in coeffs]
        if not cs:
            raise DomainError("a polynomial needs at least one coefficient")
        while len(cs) > 1 and cs[-1] == 0.0:
            cs.pop()
        self.coeffs = tuple(cs)

    # -- basic structure ---------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coefficient_scale(self) -> float:
        return max(abs(c) for c in self.coeffs)

    def __repr__(self):
        return f"Poly({list(self.coeffs)})"

    def __eq__(self, other):
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    # -- evaluation and calculus -------------------------------------------

    def eval(self, s):
        """Evaluate at a real or complex point by the Horner recurrence."""
        acc = 0j if isinstance(s, complex) else 0.0
        for c in reversed(self.coeffs):
            acc = acc * s + c
        return acc

    __call__ = eval

    def eval_many(self, s):
        """Vectorized Horner evaluation over a numpy array of points."""
        acc = np.zeros_like(np.asarray(s), dtype=complex)
        for c in reversed(self.coeffs):
            acc = acc * s + c
        return acc

    def derivative(self) -> "Poly":
        if self.degree() == 0:
            return Poly([0.0])
        return Poly([k * c for k, c in enumerate(self.coeffs)][1:])

    # -- ring operations ----------------------------------------------------

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for k, c in enumerate(b):
            out[k] += c
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly([-c for c in self.coeffs])

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Poly):
            if self.is_zero or other.is_zero:
                return Poly([0.0])
            return Poly(np.convolve(self.coeffs, other.coeffs))
        return self.scale(float(other))

    __rmul__ = __mul__

    def scale(self, c: float) -> "Poly":
        return Poly([c * x for x in self.coeffs])

    def reflected(self) -> "Poly":
        """The polynomial q(s) = p(-s)."""
        return Poly([c if k % 2 == 0 else -c for k, c in enumerate(self.coeffs)])

    def trimmed(self, rel_tol: float = 1e-12) -> "Poly":
        """Drop leading coefficients that are negligible relative to the
        largest coefficient (degree drop when a gain cancels the leading
        term)."""
        if self.is_zero:
            return self
        scale = self.coefficient_scale()
        cs = list(self.coeffs)
        while len(cs) > 1 and abs(cs[-1]) <= rel_tol * scale:
            cs.pop()
        return Poly(cs)


@dataclass(frozen=True)
class RootSet:
    """Roots of a real polynomial as (location, multiplicity) pairs.

    Complex locations occur in exact conjugate pairs; the pair list is
    sorted by (real, imag) so equal root sets compare equal.
    """

    roots: tuple

    def total(self) -> int:
        return sum(m for _, m in self.roots)

    def locations(self):
        return [z for z, _ in self.roots]

    def multiplicity_near(self, z: complex, tol: float) -> int:
        best = 0
        for loc, m in self.roots:
            if abs(loc - z) <= tol * max(1.0, abs(loc)):
                best += m
        return best

    def __iter__(self):
        return iter(self.roots)

    def __len__(self):
        return len(self.roots)


def _newton_simple(q: Poly, dq: Poly, z: complex) -> complex:
    """Newton polish of a simple root of q, keeping the best iterate."""
    best, best_val = z, abs(q.eval(z))
    for _ in range(_NEWTON_MAX_ITER):
        dv = dq.eval(z)
        if dv == 0:
            break
        step = q.eval(z) / dv
        z = z - step
        val = abs(q.eval(z))
        if val < best_val:
            best, best_val = z, val
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            break
    return best


def _horner_magnitude(q: Poly, r: float) -> float:
    """Sum of |coefficient| * r^k: the scale against which Horner's
    roundoff must be judged."""
    acc = 0.0
    for c in reversed(q.coeffs):
        acc = acc * r + abs(c)
    return acc


def _consistent_multiple_root(derivs, c: complex, m: int) -> bool:
    """Backward test of the hypothesis that c is an m-fold root: every
    derivative below order m must evaluate to roundoff-level noise."""
    r = abs(c)
    for k in range(m):
        floor = 1e-13 * _horner_magnitude(derivs[k], r) + 1e-300
        if abs(derivs[k].eval(c)) > floor:
            return False
    return True


def _cluster(raw, tol):
    """Greedy merge of nearby raw roots into (centroid, count) clusters."""
    order = sorted(range(len(raw)), key=lambda i: (raw[i].real, raw[i].imag))
    clusters = []  # [sum, count]
    for i in order:
        z = raw[i]
        placed = False
        for c in clusters:
            centroid = c[0] / c[1]
            if abs(z - centroid) <= tol * max(1.0, abs(centroid)):
                c[0] += z
                c[1] += 1
                placed = True
                break
        if not placed:
            clusters.append([z, 1])
    return [(c[0] / c[1], c[1]) for c in clusters]


def _symmetrize(clusters, tol):
    """Enforce exact conjugate symmetry on clustered roots of a real
    polynomial: snap near-real roots onto the axis and average each
    complex root with its conjugate partner."""
    real_part = []
    plus = []
    minus = []
    for z, m in clusters:
        if abs(z.imag) <= tol * max(1.0, abs(z)):
            real_part.append((complex(z.real, 0.0), m))
        elif z.imag > 0:
            plus.append((z, m))
        else:
            minus.append((z, m))

    out = list(real_part)
    used = [False] * len(minus)
    for z, m in plus:
        best_j, best_d = -1, np.inf
        for j, (w, mw) in enumerate(minus):
            if used[j] or mw != m:
                continue
            d = abs(z - w.conjugate())
            if d < best_d:
                best_j, best_d = j, d
        if best_j >= 0 and best_d <= 10 * tol * max(1.0, abs(z)):
            used[best_j] = True
            avg = 0.5 * (z + minus[best_j][0].conjugate())
            out.append((avg, m))
            out.append((avg.conjugate(), m))
        else:
            # No clean partner (should not happen for real input); keep as-is.
            out.append((z, m))
    for j, (w, mw) in enumerate(minus):
        if not used[j]:
            out.append((w, mw))
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return out


def roots(p: Poly, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> RootSet:
    """All complex roots of ``p`` with multiplicities.

    Raw roots come from the companion-matrix eigenvalue method and are
    first merged at ``cluster_tol`` (relative to the root magnitude).
    A root of multiplicity m comes out of general-purpose finders as a
    cluster of diameter roughly eps**(1/m) -- far wider than any sane
    fixed tolerance once m >= 3 -- so nearby clusters are then merged
    agglomeratively under validation: the merged multiplicity hypothesis
    is polished by Newton iteration on the derivative of order m-1 (where
    the root is simple and Newton reaches machine accuracy) and accepted
    only if every lower derivative evaluates to roundoff-level noise
    there.  Genuinely distinct nearby roots fail that test and stay split.
    """
    if p.is_zero:
        raise DomainError("the zero polynomial has no defined root set")
    if p.degree() == 0:
        raise DomainError("a nonzero constant has no roots")
    raw = list(np.roots(p.coeffs[::-1]))
    clusters = _cluster(raw, cluster_tol)

    derivs = [p]
    for _ in range(p.degree()):
        derivs.append(derivs[-1].derivative())
    merge_cap = max(1e-2, 100.0 * cluster_tol)

    merged = True
    while merged:
        merged = False
        for i in range(len(clusters)):
            zi, mi = clusters[i]
            scale = max(1.0, abs(zi))
            for j in range(i + 1, len(clusters)):
                zj, mj = clusters[j]
                if abs(zi - zj) > merge_cap * scale:
                    continue
                m = mi + mj
                c0 = (zi * mi + zj * mj) / m
                c = _newton_simple(derivs[m - 1], derivs[m], c0)
                if abs(c - c0) > merge_cap * scale:
                    continue  # Newton ran off to an unrelated stationary point
                if _consistent_multiple_root(derivs, c, m):
                    clusters[i] = (c, m)
                    del clusters[j]
                    merged = True
                    break
            if merged:
                break

    polished = [(_newton_simple(derivs[m - 1], derivs[m], z), m) for z, m in clusters]
    return RootSet(tuple(_symmetrize(polished, cluster_tol)))


def from_roots(rs, leading: float = 1.0) -> Poly:
    """Expand a conjugate-closed root set into a real polynomial with the
    given leading coefficient.

    Conjugate pairs are multiplied out as real quadratic factors so the
    result is real by construction; input that is not closed under
    conjugation is rejected because the expansion would be complex.
    """
    pairs = list(rs)
    pairs.sort(key=lambda t: (t[0].real, t[0].imag))
    factors = []
    consumed = [False] * len(pairs)
    for i, (z, m) in enumerate(pairs):
        if consumed[i]:
            continue
        if abs(z.imag) <= 1e-12 * max(1.0, abs(z)):
            factors.append(([-z.real, 1.0], m))
            consumed[i] = True
            continue
        mate = -1
        for j in range(len(pairs)):
            if j == i or consumed[j]:
                continue
            w, mw = pairs[j]
            if mw == m and abs(w - z.conjugate()) <= 1e-9 * max(1.0, abs(z)):
                mate = j
                break
        if mate < 0:
            raise DomainError(
                f"root {z} of multiplicity {m} has no conjugate partner; "
                "the expansion would have complex coefficients"
            )
        consumed[i] = consumed[mate] = True
        factors.append(([abs(z) ** 2, -2.0 * z.real, 1.0], m))
    out = np.array([1.0])
    for coeffs, m in factors:
        for _ in range(m):
            out = np.convolve(out, coeffs)
    return Poly(out).scale(leading)
