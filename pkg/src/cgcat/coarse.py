"""Coarse-graining weights and non-selective measurement channels.

Two coarse-grainings are modelled:

* resolution: a discrete Gaussian mixture over the integer cut ``k`` of the
  dichotomic observables ``O^k``;
* reference: a Gaussian mixture over the rotation angle ``theta`` of a fixed
  observable, evaluated in closed form through :func:`smear_harmonic`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fockspace import (
    DensityOperator,
    FockVector,
    OddEvenIndexMap,
    SubspaceRotation,
    cut_diagonal,
    even_cat,
    fock_pair,
    odd_cat,
    symmetric_pair_state,
)

DELTA_INF = 20.0


@dataclass(frozen=True)
class ResolutionWeights:
    """Symmetric discrete Gaussian ``P(k)`` on ``-k_cut..k_cut``."""

    delta: float
    k_cut: int
    weights: dict = field(repr=False)
    convention: str = "printed"

    def ks(self) -> np.ndarray:
        return np.arange(-self.k_cut, self.k_cut + 1)

    def array(self) -> np.ndarray:
        return np.array([self.weights[int(k)] for k in self.ks()])

    def __getitem__(self, k: int) -> float:
        return self.weights.get(int(k), 0.0)


def _exponent(delta: float, convention: str) -> float:
    if convention == "printed":
        return 2.0 * delta
    if convention == "variance":
        return 2.0 * delta * delta
    raise ValueError(f"unknown weight convention {convention!r}")


def resolution_weights(delta: float, epsilon_tail: float = 1e-10,
                       convention: str = "printed") -> ResolutionWeights:
    """Discrete Gaussian ``P(k) ~ exp(-k^2 / (2 delta))``.

    ``convention="variance"`` uses ``exp(-k^2 / (2 delta^2))`` instead. The
    support is cut at the smallest ``k_cut`` whose two-sided tail mass is below
    ``epsilon_tail``.
    """
    delta = float(delta)
    if not delta > 0 or not math.isfinite(delta):
        raise ValueError(f"delta must be positive and finite, got {delta}")
    if not 0 < epsilon_tail <= 1e-6:
        raise ValueError("epsilon_tail must lie in (0, 1e-6]")
    s = _exponent(delta, convention)
    # unnormalized terms; the k=0 term is 1 so the sum is at least 1
    k_max = int(math.ceil(math.sqrt(s * (-math.log(epsilon_tail) + 10)))) + 2
    k = np.arange(0, k_max + 1)
    terms = np.exp(-(k * k) / s)
    total = terms[0] + 2 * terms[1:].sum()
    tail = 2 * np.cumsum(terms[::-1])[::-1] / total  # tail[j] = mass of |k| >= j
    k_cut = 0
    while k_cut + 1 < k.size and tail[k_cut + 1] >= epsilon_tail:
        k_cut += 1
    kept = terms[: k_cut + 1]
    norm = kept[0] + 2 * kept[1:].sum()
    weights = {0: float(kept[0] / norm)}
    for j in range(1, k_cut + 1):
        weights[j] = weights[-j] = float(kept[j] / norm)
    return ResolutionWeights(delta, k_cut, weights, convention)


def sharp_weights() -> ResolutionWeights:
    """The ``delta -> 0`` limit: all weight on ``k = 0``."""
    return ResolutionWeights(0.0, 0, {0: 1.0})


@dataclass(frozen=True)
class ReferenceSmear:
    Delta: float
    theta_center: float

    def __post_init__(self):
        if self.Delta < 0:
            raise ValueError("Delta must be nonnegative")

    def cos(self, m: int) -> float:
        return smear_harmonic(m, self.theta_center, self.Delta)

    def sin(self, m: int) -> float:
        return smear_harmonic(m, self.theta_center, self.Delta, kind="sin")


def decay(m: int, Delta: float, cap: float = DELTA_INF) -> float:
    """``exp(-m^2 Delta^2 / 2)``, set to exactly 0 beyond ``cap``."""
    if Delta < 0:
        raise ValueError("Delta must be nonnegative")
    if m != 0 and Delta > cap:
        return 0.0
    return math.exp(-0.5 * m * m * Delta * Delta)


def smear_harmonic(m: int, theta0: float, Delta: float, kind: str = "cos") -> float:
    """Gaussian average of ``cos(m theta)`` (or ``sin``) with mean ``theta0``, std ``Delta``."""
    f = {"cos": math.cos, "sin": math.sin}[kind]
    return decay(m, Delta) * f(m * theta0)


@dataclass(frozen=True)
class RefCatCoefficients:
    a: float
    b: float
    c: float
    d: float
    theta_a: float
    theta_b: float
    Delta: float

    def matrix(self) -> np.ndarray:
        """Post-measurement state on ``{|ee>, |eo>, |oe>, |oo>}``."""
        a, b, c, d = self.a, self.b, self.c, self.d
        return np.array([[a, b, c, d],
                         [b, 0.5 - a, d, -c],
                         [c, d, 0.5 - a, -b],
                         [d, -c, -b, a]])


def cat_reference_coefficients(theta_a: float, theta_b: float,
                               Delta: float) -> RefCatCoefficients:
    """Closed-form reference-channel output for the cat Bell pair."""
    e8, e16 = decay(4, Delta), decay(4 * math.sqrt(2), Delta)
    if Delta > DELTA_INF:
        e16 = 0.0
    ca, cb = math.cos(4 * theta_a), math.cos(4 * theta_b)
    sa, sb = math.sin(4 * theta_a), math.sin(4 * theta_b)
    cab, sab = math.cos(4 * theta_a + 4 * theta_b), math.sin(4 * theta_a + 4 * theta_b)
    a = (3 - e8 * (ca + cb) - e16 * cab) / 16
    b = (e8 * (sa - sb) - e16 * sab) / 16
    c = (e8 * (-sa + sb) - e16 * sab) / 16
    d = (1 - e8 * (ca + cb) + e16 * cab) / 16
    return RefCatCoefficients(a, b, c, d, theta_a, theta_b, Delta)


def branch_sum(rho: np.ndarray, projectors) -> np.ndarray:
    """Non-selective channel ``sum_P P rho P``."""
    return sum(p @ rho @ p for p in projectors)


def rotated_projectors(theta: float, e: FockVector, o: FockVector, k: int = 0,
                       index_map: OddEvenIndexMap | None = None):
    """``U P^k_+ U`` and ``U P^k_- U`` for the rotation on ``(e, o)``."""
    index_map = index_map or OddEvenIndexMap()
    u = SubspaceRotation(theta, e, o).matrix()
    diag = cut_diagonal(k, index_map, e.n_max)
    plus = (u * ((1 + diag) / 2)) @ u
    return plus, np.eye(u.shape[0]) - plus


def fock_resolution_channel(n: int, weights: ResolutionWeights, n_max: int | None = None,
                            index_map: OddEvenIndexMap | None = None) -> DensityOperator:
    """Resolution channel applied to ``|2n><2n|``.

    Each cut projector is diagonal in the Fock basis, so every branch keeps the
    input; the result is the input projector, built by explicit branch sums.
    """
    n_max = 2 * n + 1 if n_max is None else n_max
    if n < 0 or 2 * n > n_max:
        raise ValueError(f"|{2 * n}> exceeds n_max={n_max}")
    index_map = index_map or OddEvenIndexMap()
    rho = np.zeros((n_max + 1, n_max + 1))
    rho[2 * n, 2 * n] = 1.0
    out = np.zeros_like(rho)
    total = 0.0
    for k in weights.ks():
        d = cut_diagonal(int(k), index_map, n_max)
        p = np.diag((1 + d) / 2)
        out += weights[k] * branch_sum(rho, (p, np.eye(n_max + 1) - p))
        total += weights[k]
    # divide by the accumulated weight so rounding in sum P(k) cannot leak in
    return DensityOperator(out / total)


def fock_reference_state(n: int, theta_a: float, Delta: float,
                         partner: str = "next") -> np.ndarray:
    """Reference channel on ``|2n>`` with the rotation mixing ``|2n>`` and its partner.

    Returns the 2x2 matrix on ``{|2n>, |partner>}``; ``partner`` is ``"next"``
    for ``|2n+1>`` or ``"prev"`` for ``|2n-1>``. The result is the same for both.
    """
    if partner == "prev" and n < 1:
        raise ValueError("|2n-1> does not exist for n = 0")
    if partner not in ("next", "prev"):
        raise ValueError(f"unknown partner {partner!r}")
    if Delta < 0:
        raise ValueError("Delta must be nonnegative")
    c4 = smear_harmonic(4, theta_a, Delta)
    s4 = smear_harmonic(4, theta_a, Delta, kind="sin")
    return np.array([[3 + c4, s4], [s4, 1 - c4]]) / 4


def fock_reference_branch(n: int, theta: float, partner: str = "next") -> np.ndarray:
    """Sharp (single-angle) branch sum on ``|2n>``, returned on the 2x2 pair block."""
    e, o = fock_pair(n, 2 * n + 1, partner)
    plus, minus = rotated_projectors(theta, e, o)
    rho = e.projector().matrix
    out = branch_sum(rho, (plus, minus))
    idx = [2 * n, int(np.argmax(np.abs(o.amp)))]
    return out[np.ix_(idx, idx)].real


def cat_pair(alpha: complex, n_max: int):
    return even_cat(alpha, n_max), odd_cat(alpha, n_max)


def cat_bell_state(alpha: complex, n_max: int) -> np.ndarray:
    """``(|e>|o> + |o>|e>)/sqrt 2`` for the cat pair, as an amplitude matrix."""
    return symmetric_pair_state(*cat_pair(alpha, n_max))


def _sandwich(t: np.ndarray, p: np.ndarray, axes: tuple) -> np.ndarray:
    """``p`` applied on the left of ket axis ``axes[0]`` and the right of bra axis ``axes[1]``."""
    t = np.moveaxis(np.tensordot(p, t, axes=(1, axes[0])), 0, axes[0])
    return np.moveaxis(np.tensordot(t, p, axes=(axes[1], 0)), -1, axes[1])


def _two_mode_branches(rho4: np.ndarray, pa, pb) -> np.ndarray:
    """``sum (x (x) y) rho (x (x) y)`` over ``x`` in ``pa``, ``y`` in ``pb``."""
    da, db = pa[0].shape[0], pb[0].shape[0]
    t = rho4.reshape(da, db, da, db)
    out = np.zeros_like(t, dtype=np.result_type(t, *pa, *pb))
    for x in pa:
        tx = _sandwich(t, x, (0, 2))
        for y in pb:
            out += _sandwich(tx, y, (1, 3))
    return out.reshape(rho4.shape)


def sharp_two_mode_branch(rho: DensityOperator, theta_a: float, theta_b: float,
                          k: int, m: int, e: FockVector, o: FockVector,
                          index_map: OddEvenIndexMap | None = None) -> DensityOperator:
    """Four-branch post-measurement state ``rho_km`` of a sharp cut pair."""
    pa = rotated_projectors(theta_a, e, o, k, index_map)
    pb = rotated_projectors(theta_b, e, o, m, index_map)
    return DensityOperator(_two_mode_branches(rho.matrix, pa, pb), rho.dims)


def two_mode_resolution_channel(psi: np.ndarray, theta_a: float, theta_b: float,
                                weights: ResolutionWeights, e: FockVector,
                                o: FockVector,
                                index_map: OddEvenIndexMap | None = None) -> DensityOperator:
    """``sum_{k,m} P(k) P(m) rho_km`` for a two-mode pure state ``psi[m, n]``."""
    if psi.shape != (e.n_max + 1, e.n_max + 1):
        raise ValueError("state truncation does not match the rotation pair")
    rho = DensityOperator.from_pure_two_mode(psi)
    out = np.zeros_like(rho.matrix)
    for k in weights.ks():
        for m in weights.ks():
            w = weights[k] * weights[m]
            out += w * sharp_two_mode_branch(rho, theta_a, theta_b, int(k), int(m),
                                             e, o, index_map).matrix
    return DensityOperator(out, rho.dims)


def resolution_branches(psi: np.ndarray, theta_a: float, theta_b: float,
                        weights: ResolutionWeights, e: FockVector, o: FockVector,
                        index_map: OddEvenIndexMap | None = None) -> dict:
    """Map ``(k, m) -> rho_km`` over the weight support."""
    rho = DensityOperator.from_pure_two_mode(psi)
    return {(int(k), int(m)): sharp_two_mode_branch(rho, theta_a, theta_b, int(k), int(m),
                                                  e, o, index_map)
            for k in weights.ks() for m in weights.ks()}


def reference_channel_numeric(rho4: np.ndarray, theta_a: float, theta_b: float,
                              Delta: float, e: FockVector, o: FockVector,
                              nodes: int = 80) -> np.ndarray:
    """Gauss-Hermite average of sharp branch sums; oracle for the closed forms.

    The parity cut and the rotation both preserve ``span(e, o)``, so every
    projector is compressed to that span (after checking invariance) and the
    result is returned on ``{|ee>, |eo>, |oe>, |oo>}``.
    """
    from numpy.polynomial.hermite_e import hermegauss

    V = np.stack([e.amp, o.amp], axis=1)
    K = np.kron(V, V)
    small = K.conj().T @ rho4 @ K
    x, w = hermegauss(nodes)
    w = w / w.sum()

    def compressed(theta):
        out = []
        for p in rotated_projectors(theta, e, o):
            pv = p @ V
            ps = V.conj().T @ pv
            if np.abs(pv - V @ ps).max() > 1e-12:
                raise ValueError("projector does not preserve span(e, o)")
            out.append(ps)
        return out

    # the product rule factorizes: average each mode's branch superoperator first
    def superop(theta):
        S = np.zeros((2, 2, 2, 2), dtype=complex)
        for xi, wi in zip(x, w):
            for p in compressed(theta + Delta * xi):
                S += wi * np.einsum("ip,qj->ijpq", p, p)
        return S

    t = small.reshape(2, 2, 2, 2)
    out = np.einsum("ijpq,klrs,prqs->ikjl", superop(theta_a), superop(theta_b), t)
    return out.reshape(4, 4)
