"""Symbolic Glauber-Sudarshan P-distributions.

A distribution is a finite sum of terms
``coeff * d^dp/dgamma^dp d^dq/dgamma*^dq delta^2(gamma - center)``.
They are never evaluated pointwise; the contract is the term list, the exact
normally ordered moments and the singularity order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb, factorial

import numpy as np

MAX_FOCK = 12
MAX_MOMENT = 8
CAT_SERIES_CUT = 25
CAT_TERM_FLOOR = 1e-16


@dataclass(frozen=True)
class Term:
    coeff: complex
    center: complex
    dp: int
    dq: int


def _falling(n: int, k: int) -> int:
    return 0 if k > n else factorial(n) // factorial(n - k)


@dataclass(frozen=True)
class SymbolicQuasiProb:
    terms: tuple

    @classmethod
    def from_terms(cls, terms) -> "SymbolicQuasiProb":
        """Merge terms with equal ``(center, dp, dq)`` and drop exact zeros."""
        acc: dict = {}
        for t in terms:
            key = (complex(t.center), t.dp, t.dq)
            acc[key] = acc.get(key, 0) + complex(t.coeff)
        return cls(tuple(Term(c, *k) for k, c in acc.items() if c != 0))

    def __add__(self, other):
        return SymbolicQuasiProb.from_terms(self.terms + other.terms)

    def scaled(self, s: complex) -> "SymbolicQuasiProb":
        return SymbolicQuasiProb.from_terms(Term(s * t.coeff, t.center, t.dp, t.dq)
                                            for t in self.terms)

    def adjoint(self) -> "SymbolicQuasiProb":
        """Distribution of the adjoint operator: conjugate and swap derivative orders."""
        return SymbolicQuasiProb.from_terms(
            Term(np.conj(t.coeff), t.center, t.dq, t.dp) for t in self.terms)

    def mass(self) -> complex:
        """Sum of underived coefficients, the trace of the represented operator."""
        return complex(sum(t.coeff for t in self.terms if t.dp == 0 and t.dq == 0))

    def singularity_order(self) -> int:
        return max((t.dp + t.dq for t in self.terms), default=0)

    def moment(self, p: int, q: int) -> complex:
        return pdist_moment(self, p, q)


def _check_order(p: int, q: int) -> None:
    if p < 0 or q < 0 or p + q > MAX_MOMENT:
        raise ValueError(f"moment order p+q must lie in [0, {MAX_MOMENT}]")


def _unit_moment(center: complex, a: int, b: int, p: int, q: int) -> complex:
    """Moment of a unit-coefficient term; integration by parts moves derivatives."""
    if a > q or b > p:
        return 0j
    c = complex(center)
    val = (-1) ** (a + b) * _falling(q, a) * _falling(p, b)
    return val * c ** (q - a) * np.conj(c) ** (p - b)


def pdist_moment(dist: SymbolicQuasiProb, p: int, q: int) -> complex:
    """``int P(gamma) gamma*^p gamma^q d^2 gamma``, i.e. ``Tr[rho a^dag^p a^q]``."""
    _check_order(p, q)
    return complex(sum(t.coeff * _unit_moment(t.center, t.dp, t.dq, p, q)
                       for t in dist.terms))


def _check_fock(n: int) -> None:
    if int(n) != n or n < 0:
        raise ValueError(f"Fock index must be a nonnegative integer, got {n}")
    if n > MAX_FOCK:
        raise ValueError(f"Fock index {n} exceeds the supported maximum {MAX_FOCK}")


def pdist_fock(n: int) -> SymbolicQuasiProb:
    """``|n><n|``: ``L_n(-lap) delta^2`` with ``lap = d^2/dgamma dgamma*``."""
    _check_fock(n)
    return SymbolicQuasiProb.from_terms(Term(comb(n, m) / factorial(m), 0, m, m)
                                        for m in range(n + 1))


def m_poly_coeffs(n: int) -> list:
    """Coefficients of ``M_n(x) = sum_m sqrt(n+1) C(n,m) x^m / (m+1)!``."""
    return [math.sqrt(n + 1) * comb(n, m) / factorial(m + 1) for m in range(n + 1)]


def pdist_fock_offdiag(n: int) -> SymbolicQuasiProb:
    """``|n+1><n|``: ``-d/dgamma M_n(lap) delta^2``. Use ``.adjoint()`` for ``|n><n+1|``."""
    _check_fock(n + 1)
    return SymbolicQuasiProb.from_terms(Term(-c, 0, m + 1, m)
                                        for m, c in enumerate(m_poly_coeffs(n)))


def pdist_fock_operator(m: int, n: int) -> SymbolicQuasiProb:
    """``|m><n|`` for ``|m - n| <= 1``."""
    if m == n:
        return pdist_fock(m)
    if m == n + 1:
        return pdist_fock_offdiag(n)
    if n == m + 1:
        return pdist_fock_offdiag(m).adjoint()
    raise ValueError("only diagonal and nearest off-diagonal Fock operators are supported")


def _coherent_operator(a: complex, b: complex, series_cut: int) -> SymbolicQuasiProb:
    """``|a><b|`` for ``b in {a, -a}``.

    ``|a><a|`` is a delta at ``a``. For ``b = -a`` the operator equals
    ``<b|a> exp((a - b) d/dgamma) delta^2(gamma - b)`` with the exponential
    expanded to ``series_cut`` orders.
    """
    if a == b:
        return SymbolicQuasiProb((Term(1.0, a, 0, 0),))
    overlap = np.exp(-0.5 * abs(a) ** 2 - 0.5 * abs(b) ** 2 + np.conj(b) * a)
    shift = b - a
    terms = []
    for n in range(series_cut + 1):
        c = overlap * shift ** n / factorial(n)
        if n > 0 and abs(c) < CAT_TERM_FLOOR:
            break
        terms.append(Term(c, b, n, 0))
    return SymbolicQuasiProb.from_terms(terms)


def pdist_cat(alpha: complex, which: str, series_cut: int = CAT_SERIES_CUT) -> SymbolicQuasiProb:
    """P-distribution of ``|i><j|`` for the cat pair, ``which`` in ``ee, eo, oe, oo``."""
    if which not in ("ee", "eo", "oe", "oo"):
        raise ValueError(f"unknown component {which!r}")
    if series_cut < 1:
        raise ValueError("series_cut must be at least 1")
    alpha = complex(alpha)
    if alpha == 0:
        raise ValueError("alpha = 0 leaves the odd cat undefined")
    x = abs(alpha) ** 2
    norm = {"e": 1 / math.sqrt(2 + 2 * math.exp(-2 * x)),
            "o": 1 / math.sqrt(2 - 2 * math.exp(-2 * x))}
    sign = {"e": (1, 1), "o": (1, -1)}
    i, j = which
    out = SymbolicQuasiProb(())
    for si, a in zip(sign[i], (alpha, -alpha)):
        for sj, b in zip(sign[j], (alpha, -alpha)):
            out = out + _coherent_operator(a, b, series_cut).scaled(si * sj)
    return out.scaled(norm[i] * norm[j])


def pdist_fock_reference(n: int, theta_a: float, Delta: float,
                         partner: str = "next") -> SymbolicQuasiProb:
    """P-distribution of the reference-channel output on ``|2n>``."""
    from ..coarse import fock_reference_state

    rho = fock_reference_state(n, theta_a, Delta, partner)
    p = 2 * n + 1 if partner == "next" else 2 * n - 1
    e = 2 * n
    return (pdist_fock_operator(e, e).scaled(rho[0, 0])
            + pdist_fock_operator(p, p).scaled(rho[1, 1])
            + pdist_fock_operator(e, p).scaled(rho[0, 1])
            + pdist_fock_operator(p, e).scaled(rho[1, 0]))


@dataclass(frozen=True)
class TwoModeTerm:
    coeff: complex
    a: Term
    b: Term


@dataclass(frozen=True)
class TwoModePDist:
    terms: tuple

    def mass(self) -> complex:
        return complex(sum(t.coeff for t in self.terms
                           if t.a.dp + t.a.dq + t.b.dp + t.b.dq == 0))

    def singularity_order(self) -> int:
        return max((t.a.dp + t.a.dq + t.b.dp + t.b.dq for t in self.terms), default=0)

    def moment(self, pa: int, qa: int, pb: int, qb: int) -> complex:
        """``Tr[rho a^dag^pa a^qa (x) b^dag^pb b^qb]``; each term factorizes."""
        _check_order(pa, qa)
        _check_order(pb, qb)
        cache: dict = {}

        def unit(t, p, q):
            key = (t.center, t.dp, t.dq, p, q)
            if key not in cache:
                cache[key] = _unit_moment(t.center, t.dp, t.dq, p, q)
            return cache[key]

        total = 0j
        for t in self.terms:
            ma = unit(t.a, pa, qa)
            if ma:
                total += t.coeff * ma * unit(t.b, pb, qb)
        return complex(total)


def pdist_two_mode(coeffs, dists: dict, labels=("e", "o")) -> TwoModePDist:
    """``sum rho[(ik),(jl)] P_{|i><j|} (x) P_{|k><l|}``.

    ``dists`` maps ``"ij"`` strings to the per-mode distribution of ``|i><j|``.
    """
    rho = coeffs.matrix() if hasattr(coeffs, "matrix") else np.asarray(coeffs)
    d = len(labels)
    t = np.asarray(rho).reshape(d, d, d, d)
    terms = []
    for i, li in enumerate(labels):
        for k, lk in enumerate(labels):
            for j, lj in enumerate(labels):
                for l, ll in enumerate(labels):
                    c = t[i, k, j, l]
                    if c == 0:
                        continue
                    for ta in dists[li + lj].terms:
                        for tb in dists[lk + ll].terms:
                            terms.append(TwoModeTerm(c * ta.coeff * tb.coeff, ta, tb))
    return TwoModePDist(tuple(terms))


def fock_moment(rho: np.ndarray, p: int, q: int) -> complex:
    """``Tr[rho a^dag^p a^q]`` in the truncated Fock space."""
    n = rho.shape[0]
    a = np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1)
    op = np.linalg.matrix_power(a.T, p) @ np.linalg.matrix_power(a, q)
    return complex(np.trace(rho @ op))
