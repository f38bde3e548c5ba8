"""Wigner-negativity quadrature, the sharp-cut negativity map and resolution mixtures.

Negativity is ``(1/2) int (|W| - W) = int max(-W, 0)``. Two-mode integrals
use per-mode feature tables: with a real Hermitian operator basis ``E_mu`` per
mode, ``W(beta, gamma) = sum R[mu, nu] F_mu(beta) G_nu(gamma)``. The 4D sum is
split into fixed-size chunks of ``beta`` points whose partial sums are reduced
in index order, so the result does not depend on the worker count.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .coarse import (
    ResolutionWeights,
    cat_bell_state,
    cat_pair,
    sharp_two_mode_branch,
)
from .fockspace import DensityOperator, OddEvenIndexMap
from .phasespace.wigner import (
    FockWignerBasis,
    TwoModeWigner,
    hermitian_coefficients,
    hermitian_features,
)

NORM_TOL = 2e-3
CHUNK = 64
DEFAULT_BUDGET = 2e10
SUPPORT_TOL = 1e-13


class GridBudgetError(MemoryError):
    pass


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor grid on a phase-space box, ``[-extent_re, extent_re] x [-extent_im, extent_im]``."""

    extent_re: float
    extent_im: float
    points_re: int = 81
    points_im: int = 81
    rule: str = "trapezoid"

    def __post_init__(self):
        if self.rule not in ("trapezoid", "gauss-legendre"):
            raise ValueError(f"unknown rule {self.rule!r}")
        if min(self.points_re, self.points_im) < 2 or min(self.extent_re, self.extent_im) <= 0:
            raise ValueError("grid needs at least two points and a positive extent per axis")

    @classmethod
    def square(cls, extent: float, points: int = 81, rule: str = "trapezoid"):
        return cls(extent, extent, points, points, rule)

    def _axis(self, extent: float, n: int):
        if self.rule == "trapezoid":
            x = np.linspace(-extent, extent, n)
            w = np.full(n, x[1] - x[0])
            w[[0, -1]] *= 0.5
        else:
            x, w = np.polynomial.legendre.leggauss(n)
            x, w = x * extent, w * extent
        return x, w

    def axes(self):
        return self._axis(self.extent_re, self.points_re), self._axis(self.extent_im, self.points_im)

    def nodes(self) -> np.ndarray:
        (x, _), (y, _) = self.axes()
        return (x[:, None] + 1j * y[None, :]).ravel()

    def weights(self) -> np.ndarray:
        (_, wx), (_, wy) = self.axes()
        return (wx[:, None] * wy[None, :]).ravel()

    @property
    def size(self) -> int:
        return self.points_re * self.points_im

    def volume(self) -> float:
        return 4 * self.extent_re * self.extent_im

    def refined(self, axis: str) -> "QuadratureGrid":
        """Same box with one axis doubled in resolution (``2P - 1`` points)."""
        if axis == "re":
            return QuadratureGrid(self.extent_re, self.extent_im, 2 * self.points_re - 1,
                                  self.points_im, self.rule)
        if axis == "im":
            return QuadratureGrid(self.extent_re, self.extent_im, self.points_re,
                                  2 * self.points_im - 1, self.rule)
        raise ValueError(f"axis must be 're' or 'im', got {axis!r}")


def cat_grid(alpha: complex, points_re: int = 81, points_im: int = 321) -> QuadratureGrid:
    """Default cat grid: half-width ``max(4, |alpha| + 4)``.

    Interference fringes of a real-``alpha`` cat run along ``Im beta``; the kinks
    of ``|W|`` they create are parallel to the grid, so that axis is sampled
    four times more densely.
    """
    e = max(4.0, abs(alpha) + 4.0)
    return QuadratureGrid(e, e, points_re, points_im)


def fock_grid(points: int = 81) -> QuadratureGrid:
    return QuadratureGrid.square(4.0, points)


def pasv_grid(r: float, points_re: int = 121, points_im: int = 121,
              width: float = 4.5) -> QuadratureGrid:
    """Box aligned with the squeezing ellipse: half-widths ``width e^-r`` and ``width e^r``."""
    return QuadratureGrid(width * math.exp(-r), width * math.exp(r), points_re, points_im)


@dataclass(frozen=True)
class NegativityResult:
    value: float
    integral_of_W: float
    grid: dict = field(default_factory=dict)
    reliable: bool = True
    diagnostics: tuple = ()

    def __post_init__(self):
        if self.value < 0:
            object.__setattr__(self, "value", 0.0)


def _result(value: float, integral: float, grids, diagnostics=()) -> NegativityResult:
    ok = abs(integral - 1) <= NORM_TOL
    diag = tuple(diagnostics)
    if not ok:
        diag += (f"integral of W is {integral:.6f}; grid may not cover the state",)
        warnings.warn(diag[-1], stacklevel=3)
    return NegativityResult(float(value), float(integral),
                            {k: asdict(g) for k, g in grids.items()}, ok, diag)


def negativity_single(W, grid: QuadratureGrid) -> NegativityResult:
    """``(1/2) int (|W| - W)`` of a real single-mode function on ``grid``."""
    vals = np.asarray(W(grid.nodes()))
    if np.iscomplexobj(vals):
        if np.abs(vals.imag).max() > 1e-10:
            raise ValueError("W has a non-negligible imaginary part")
        vals = vals.real
    w = grid.weights()
    neg = 0.5 * float(np.sum(w * (np.abs(vals) - vals)))
    return _result(neg, float(np.sum(w * vals)), {"grid": grid})


def contract_negativity(R: np.ndarray, Fa: np.ndarray, wa: np.ndarray, Fb: np.ndarray,
                        wb: np.ndarray, workers: int = 1, chunk: int = CHUNK) -> tuple:
    """Negativity and integral of ``W = Fa^T R Fb`` on weighted point sets."""
    G = R @ Fb
    n = Fa.shape[1]
    starts = list(range(0, n, chunk))

    def part(s):
        Wc = Fa[:, s:s + chunk].T @ G
        np.minimum(Wc, 0.0, out=Wc)
        return float(wa[s:s + chunk] @ (Wc @ wb))

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(part, starts))
    else:
        parts = [part(s) for s in starts]
    neg = 0.0
    for p in parts:
        neg += p
    integral = float((Fa @ wa) @ R @ (Fb @ wb))
    return -neg, integral


def negativity_two_mode(W: TwoModeWigner, grid_a: QuadratureGrid,
                        grid_b: QuadratureGrid | None = None, workers: int = 1,
                        budget: float = DEFAULT_BUDGET) -> NegativityResult:
    """``(1/2) int int (|W| - W) d^2beta d^2gamma`` on the product grid."""
    grid_b = grid_a if grid_b is None else grid_b
    pairs = float(grid_a.size) * grid_b.size
    if pairs > budget:
        raise GridBudgetError(f"{pairs:.3g} point pairs exceed the budget {budget:.3g}")
    Fa, Fb = W.features(grid_a.nodes(), grid_b.nodes())
    R = W.coefficients()
    neg, integral = contract_negativity(R, Fa, grid_a.weights(), Fb, grid_b.weights(), workers)
    return _result(neg, integral, {"grid_a": grid_a, "grid_b": grid_b})


def reduced_two_mode(rho: DensityOperator, tol: float = SUPPORT_TOL) -> TwoModeWigner:
    """Two-mode Wigner function of a Fock-space state on its per-mode supports.

    Each mode is restricted to the eigenvectors of its reduced state above
    ``tol`` times the largest eigenvalue; the state lives in their product.
    """
    Qs = []
    for keep in (0, 1):
        r = rho.partial_trace(keep)
        vals, vecs = np.linalg.eigh(0.5 * (r + r.conj().T))
        Qs.append(vecs[:, vals > tol * vals.max()])
    Qa, Qb = Qs
    K = np.kron(Qa, Qb)
    small = K.conj().T @ rho.matrix @ K
    return TwoModeWigner(small, FockWignerBasis(Qa), FockWignerBasis(Qb),
                         float(np.real(np.trace(small))))


def negativity_density(rho: DensityOperator, grid: QuadratureGrid, workers: int = 1,
                       budget: float = DEFAULT_BUDGET) -> NegativityResult:
    """Negativity of a truncated two-mode density operator."""
    return negativity_two_mode(reduced_two_mode(rho), grid, workers=workers, budget=budget)


@dataclass(frozen=True)
class NegativityMap:
    """``N_km`` for ``k`` in ``ks`` and ``m`` in ``ms`` (rows ``k``, columns ``m``)."""

    ks: tuple
    ms: tuple
    values: np.ndarray
    flags: tuple = ()

    def __getitem__(self, km) -> float:
        k, m = km
        return float(self.values[self.ks.index(k), self.ms.index(m)])

    def covers(self, ks, ms) -> bool:
        return set(ks) <= set(self.ks) and set(ms) <= set(self.ms)


def negativity_map(alpha: complex, theta_a: float, theta_b: float, k_range, m_range,
                   grid: QuadratureGrid, n_max: int = 20, workers: int = 1,
                   index_map: OddEvenIndexMap | None = None) -> NegativityMap:
    """Negativity of the sharp post-measurement state ``rho_km`` on a ``(k, m)`` grid.

    Cuts beyond the representable range give the same projectors as the range
    ends, so each distinct clipped pair is computed once.
    """
    if n_max < 20:
        raise ValueError("the negativity map needs n_max >= 20")
    index_map = index_map or OddEvenIndexMap()
    ks, ms = tuple(int(k) for k in k_range), tuple(int(m) for m in m_range)
    values = np.zeros((len(ks), len(ms)))
    if not ks or not ms:
        return NegativityMap(ks, ms, values)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        e, o = cat_pair(alpha, n_max)
        psi = cat_bell_state(alpha, n_max)
    flags = []
    tail = max(e.tail_mass, o.tail_mass)
    if tail > 1e-8:
        flags.append(f"cat truncation tail {tail:.2e} at n_max={n_max}")
    rho = DensityOperator.from_pure_two_mode(psi)
    lo, hi = index_map.cut_range(n_max)
    cache: dict = {}
    for i, k in enumerate(ks):
        for j, m in enumerate(ms):
            key = (int(np.clip(k, lo, hi)), int(np.clip(m, lo, hi)))
            if key not in cache:
                rkm = sharp_two_mode_branch(rho, theta_a, theta_b, *key, e, o, index_map)
                res = negativity_density(rkm, grid, workers)
                if not res.reliable:
                    flags.append(f"cell {key}: {res.diagnostics[-1]}")
                cache[key] = res.value
            values[i, j] = cache[key]
    return NegativityMap(ks, ms, values, tuple(flags))


def negativity_resolution(weights: ResolutionWeights, N_map: NegativityMap) -> float:
    """Weighted sum ``sum_{k,m} P(k) P(m) N_km`` over the weight support."""
    ks = [int(k) for k in weights.ks()]
    if not N_map.covers(ks, ks):
        raise ValueError("negativity map does not cover the weight support")
    p = np.array([weights[k] for k in ks])
    sub = np.array([[N_map[k, m] for m in ks] for k in ks])
    return float(p @ sub @ p)


def resolution_mixture_state(alpha: complex, theta_a: float, theta_b: float,
                             weights: ResolutionWeights, n_max: int = 20,
                             index_map: OddEvenIndexMap | None = None) -> DensityOperator:
    from .coarse import two_mode_resolution_channel

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        e, o = cat_pair(alpha, n_max)
        psi = cat_bell_state(alpha, n_max)
    return two_mode_resolution_channel(psi, theta_a, theta_b, weights, e, o, index_map)


def negativity_resolution_direct(alpha: complex, theta_a: float, theta_b: float,
                                 weights: ResolutionWeights, grid: QuadratureGrid,
                                 n_max: int = 20, workers: int = 1) -> NegativityResult:
    """Negativity of the mixed channel output itself, not of its branches."""
    rho = resolution_mixture_state(alpha, theta_a, theta_b, weights, n_max)
    return negativity_density(rho, grid, workers)


def truncated_cat_basis(alpha: complex, n_max: int) -> FockWignerBasis:
    """Cat pair as a Fock-table basis; matches the truncation used by the map."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        e, o = cat_pair(alpha, n_max)
    return FockWignerBasis(np.stack([e.amp, o.amp], axis=1))


def mixture_negativity_direct(components, grid: QuadratureGrid) -> float:
    """Negativity of ``sum_i p_i W_i`` for ``(p_i, TwoModeWigner)`` pairs.

    Evaluates the mixture pointwise; used as an oracle for structured states.
    """
    nodes, w = grid.nodes(), grid.weights()
    total = 0.0
    for s in range(0, nodes.size, CHUNK):
        b = nodes[s:s + CHUNK]
        vals = sum(p * np.real(Wi(b[:, None], nodes[None, :])) for p, Wi in components)
        total += float(w[s:s + CHUNK] @ (np.maximum(-vals, 0.0) @ w))
    return total


__all__ = [
    "GridBudgetError",
    "NegativityMap",
    "NegativityResult",
    "QuadratureGrid",
    "cat_grid",
    "contract_negativity",
    "fock_grid",
    "hermitian_coefficients",
    "hermitian_features",
    "mixture_negativity_direct",
    "negativity_density",
    "negativity_map",
    "negativity_resolution",
    "negativity_resolution_direct",
    "negativity_single",
    "negativity_two_mode",
    "pasv_grid",
    "reduced_two_mode",
    "resolution_mixture_state",
    "truncated_cat_basis",
]
