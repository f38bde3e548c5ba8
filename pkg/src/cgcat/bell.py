"""CHSH quantities for the cat Bell pair under both coarse-grainings.

The pair state is ``(|e>|o> + |o>|e>)/sqrt 2`` with ``|e>, |o>`` the even and
odd cat states. Angles enter through ``U(theta)`` on ``span{|e>, |o>}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .coarse import ResolutionWeights, decay
from .fockspace import (
    FockVector,
    OddEvenIndexMap,
    SubspaceRotation,
    cut_diagonal,
)

TSIRELSON = 2 * math.sqrt(2)


@dataclass(frozen=True)
class AngleQuad:
    theta_a: float
    theta_b: float
    theta_c: float
    theta_d: float

    def as_tuple(self):
        return (self.theta_a, self.theta_b, self.theta_c, self.theta_d)


def chsh_combination(E, a, b, c, d):
    """``E(a,b) + E(c,b) + E(a,d) - E(c,d)`` for any correlator ``E``."""
    return E(a, b) + E(c, b) + E(a, d) - E(c, d)


def F(a, b, c, d):
    """Angle function of the sharp correlator ``-cos 2(a+b)`` up to sign."""
    return (np.cos(2 * (a + b)) + np.cos(2 * (c + b))
            + np.cos(2 * (a + d)) - np.cos(2 * (c + d)))


def _phase(z: complex, fallback: float) -> float:
    return fallback if abs(z) < 1e-300 else -0.5 * np.angle(z) % np.pi


def _coordinate_ascent(x, tol=1e-10, max_iter=10_000):
    a, b, c, d = x
    val = F(a, b, c, d)
    for _ in range(max_iter):
        e = lambda t: np.exp(2j * t)
        a = _phase(e(b) + e(d), a)
        c = _phase(e(b) - e(d), c)
        b = _phase(e(a) + e(c), b)
        d = _phase(e(a) - e(c), d)
        new = F(a, b, c, d)
        if new - val < tol:
            val = max(val, new)
            break
        val = new
    return np.array([a, b, c, d]), float(F(a, b, c, d))


def maximize_F(resolution: int = 32, start=None):
    """Grid search over ``[0, pi)^4`` then exact coordinate-wise maximization.

    Each angle enters two cosines, so its conditional optimum is closed form.
    ``start`` skips the grid and refines from the given angles.
    """
    if start is None:
        if resolution < 32:
            raise ValueError("resolution must be at least 32 points per angle")
        g = np.arange(resolution) * np.pi / resolution
        # reduce the 4D grid: the best (c, d) for each (a, b) by broadcasting
        A, B, C, D = np.meshgrid(g, g, g, g, indexing="ij", sparse=True)
        vals = F(A, B, C, D)
        i = np.unravel_index(int(np.argmax(vals)), vals.shape)
        start = g[list(i)]
    x, val = _coordinate_ascent(np.asarray(start, dtype=float))
    return AngleQuad(*map(float, x)), val


@dataclass(frozen=True)
class BellSeries:
    A: float
    B: float
    alpha: complex
    delta: float
    k_cut: int
    n_terms: int


def _log_partial(alpha_abs2: float, parity: int, n_terms: int) -> np.ndarray:
    """``log(|alpha|^(2j) / j!)`` for ``j = 2n + parity``, ``n < n_terms``."""
    from scipy.special import gammaln

    j = 2 * np.arange(n_terms) + parity
    return j * math.log(alpha_abs2) - gammaln(j + 1)


def bell_series(alpha: complex, weights: ResolutionWeights) -> BellSeries:
    """Series ``A``, ``B`` with ``<e|O_delta|e> = 1 - A`` and ``<o|O_delta|o> = B - 1``.

    ``A = 2 C_e^2 sum_{k>=1} P(k) sum_{n=0}^{k-1} |alpha|^{4n}/(2n)!`` and
    ``B = 2 C_o^2 sum_{k>=1} P(k) sum_{n=0}^{k-1} |alpha|^{4n+2}/(2n+1)!``,
    with ``C_e^2 = 1/cosh|alpha|^2`` and ``C_o^2 = 1/sinh|alpha|^2``.
    """
    x = abs(complex(alpha)) ** 2
    if x == 0:
        raise ValueError("alpha = 0 leaves the odd cat undefined")
    k_cut = weights.k_cut
    n_terms = max(k_cut, 1)
    # normalized populations of |2n> and |2n+1>, computed in log space
    log_ce2 = -(x + math.log1p(math.exp(-2 * x)) - math.log(2))
    log_co2 = -(x + math.log1p(-math.exp(-2 * x)) - math.log(2))
    pe = np.exp(_log_partial(x, 0, n_terms) + log_ce2)
    po = np.exp(_log_partial(x, 1, n_terms) + log_co2)
    ce, co = np.cumsum(pe), np.cumsum(po)
    A = B = 0.0
    for k in range(1, k_cut + 1):
        A += weights[k] * ce[k - 1]
        B += weights[k] * co[k - 1]
    return BellSeries(2 * A, 2 * B, complex(alpha), weights.delta, k_cut, n_terms)


def bell_series_printed(alpha: complex, weights: ResolutionWeights) -> tuple:
    """The literal double sum ``sum_{k>=0} P(k) sum_{n<=k}`` for comparison only.

    It disagrees with the cut operators: at ``k = 0`` the cut is the parity,
    which leaves every even state at ``+1``.
    """
    x = abs(complex(alpha)) ** 2
    k_cut = weights.k_cut
    pe = np.exp(_log_partial(x, 0, k_cut + 1)) / math.cosh(x)
    po = np.exp(_log_partial(x, 1, k_cut + 1)) / math.sinh(x)
    ce, co = np.cumsum(pe), np.cumsum(po)
    A = 2 * sum(weights[k] * ce[k] for k in range(0, k_cut + 1))
    B = 2 * sum(weights[k] * co[k] for k in range(0, k_cut + 1))
    return A, B


def bracket(series: BellSeries) -> float:
    s = series.A + series.B
    return -1 + s - 0.25 * s * s


def correlator_resolution(series: BellSeries, theta_a, theta_b):
    """``E_ab = cos 2(theta_a + theta_b) X + (A - B)^2 / 4``."""
    return (np.cos(2 * (np.asarray(theta_a) + theta_b)) * bracket(series)
            + 0.25 * (series.A - series.B) ** 2)


def bell_resolution(alpha: complex, weights: ResolutionWeights) -> float:
    """Maximal CHSH value under resolution coarse-graining.

    The bracket ``X`` is never positive, so the maximum uses ``F = -2 sqrt 2``:
    ``B = 2 sqrt 2 |X| + (A - B)^2 / 2``.
    """
    s = bell_series(alpha, weights)
    return TSIRELSON * abs(bracket(s)) + 0.5 * (s.A - s.B) ** 2


def bell_reference(Delta: float) -> float:
    """Maximal CHSH value under reference coarse-graining, ``2 sqrt 2 exp(-4 Delta^2)``."""
    if Delta < 0:
        raise ValueError("Delta must be nonnegative")
    return TSIRELSON * decay(2, Delta) ** 2


def correlator_reference(theta_a, theta_b, Delta: float):
    """``E_ab = -exp(-4 Delta^2) cos 2(theta_a + theta_b)``."""
    return -decay(2, Delta) ** 2 * np.cos(2 * (np.asarray(theta_a) + theta_b))


def classical_crossing_reference() -> float:
    """``Delta`` at which the reference Bell value equals 2."""
    return math.sqrt(math.log(2) / 8)


def optimal_angles_reference(resolution: int = 32) -> AngleQuad:
    """Angles attaining ``2 sqrt 2 exp(-4 Delta^2)``: the ``F = -2 sqrt 2`` point."""
    q, _ = maximize_F(resolution)
    return AngleQuad(q.theta_a + np.pi / 2, q.theta_b, q.theta_c + np.pi / 2, q.theta_d)


# operator brute force

def smeared_cut_operator(weights: ResolutionWeights, n_max: int,
                         index_map: OddEvenIndexMap | None = None) -> np.ndarray:
    """``O_delta = sum_k P(k) O^k`` on the truncated space (diagonal)."""
    index_map = index_map or OddEvenIndexMap()
    diag = sum(weights[k] * cut_diagonal(int(k), index_map, n_max) for k in weights.ks())
    return np.diag(diag)


def operator_correlator(psi: np.ndarray, op_a: np.ndarray, op_b: np.ndarray) -> float:
    """``<psi| op_a (x) op_b |psi>`` for an amplitude matrix ``psi``."""
    return float(np.real(np.vdot(psi, op_a @ psi @ op_b.T)))


def rotated(op: np.ndarray, theta: float, e: FockVector, o: FockVector) -> np.ndarray:
    u = SubspaceRotation(theta, e, o).matrix()
    return u @ op @ u


def brute_force_chsh_max(psi: np.ndarray, op: np.ndarray, e: FockVector, o: FockVector,
                         grid: int = 32) -> float:
    """Maximize the operator CHSH combination over four angles.

    Correlators are tabulated on a ``grid x grid`` angle mesh, the best quadruple
    is located on that mesh and then refined by a local optimizer on the
    operator expression itself.
    """
    g = np.arange(grid) * np.pi / grid
    ops = [rotated(op, t, e, o) for t in g]
    table = np.array([[operator_correlator(psi, x, y) for y in ops] for x in ops])
    a, b, c, d = np.ix_(*(range(grid),) * 4)
    s = table[a, b] + table[c, b] + table[a, d] - table[c, d]
    start = g[list(np.unravel_index(int(np.argmax(s)), s.shape))]

    def neg(x):
        E = lambda p, q: operator_correlator(psi, rotated(op, p, e, o), rotated(op, q, e, o))
        return -chsh_combination(E, *x)

    res = minimize(neg, start, method="Nelder-Mead",
                   options={"xatol": 1e-9, "fatol": 1e-13, "maxiter": 4000})
    return float(max(-res.fun, s.max()))


def reference_operator_numeric(theta: float, Delta: float, e: FockVector, o: FockVector,
                               points: int = 2000) -> np.ndarray:
    """Parity observable rotated by ``U`` and averaged over a Gaussian in angle.

    ``U = Q + cos(t) A + sin(t) B`` with fixed ``Q, A, B``, so ``U P U`` is a
    quadratic form in ``(cos t, sin t)``. The trigonometric averages are taken
    with the trapezoid rule over ``theta +- 8 Delta``; nothing analytic about
    the Gaussian is used.
    """
    n = e.n_max + 1
    parity = np.diag((-1.0) ** np.arange(n))
    if Delta == 0:
        return rotated(parity, theta, e, o)
    t = np.linspace(theta - 8 * Delta, theta + 8 * Delta, points)
    w = np.exp(-0.5 * ((t - theta) / Delta) ** 2)
    w[[0, -1]] *= 0.5
    w /= w.sum()
    c, s = np.cos(t), np.sin(t)
    mc, ms, mcc, mss, mcs = (float(w @ x) for x in (c, s, c * c, s * s, c * s))
    ee, oo = np.outer(e.amp, e.amp.conj()), np.outer(o.amp, o.amp.conj())
    Q = np.eye(n) - ee - oo
    A = ee - oo
    B = np.outer(o.amp, e.amp.conj()) + np.outer(e.amp, o.amp.conj())
    P = parity
    return (Q @ P @ Q + mc * (A @ P @ Q + Q @ P @ A) + ms * (B @ P @ Q + Q @ P @ B)
            + mcc * A @ P @ A + mss * B @ P @ B + mcs * (A @ P @ B + B @ P @ A))
