"""Truncated Fock-space engine.

States are stored as dense complex amplitude vectors indexed by photon number
``0..n_max``. Two-mode pure states are amplitude matrices ``psi[m, n]`` for
``|m>|n>``; two-mode density operators are ``(N*N, N*N)`` matrices with the
row index ``m*N + n``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.special import eval_genlaguerre, gammaln

TAIL_WARN = 1e-12


class TruncationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class FockVector:
    amp: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "amp", np.asarray(self.amp, dtype=complex))

    @property
    def n_max(self) -> int:
        return self.amp.size - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amp))

    def mean_photon(self) -> float:
        n = np.arange(self.amp.size)
        return float(np.sum(n * np.abs(self.amp) ** 2))

    def inner(self, other: "FockVector") -> complex:
        return complex(np.vdot(self.amp, other.amp))

    def projector(self) -> "DensityOperator":
        return DensityOperator(np.outer(self.amp, self.amp.conj()))

    def padded(self, n_max: int) -> "FockVector":
        if n_max < self.n_max:
            raise ValueError("cannot pad to a smaller truncation")
        amp = np.zeros(n_max + 1, dtype=complex)
        amp[: self.amp.size] = self.amp
        return FockVector(amp, self.tail_mass)


@dataclass(frozen=True)
class DensityOperator:
    """Density matrix; ``dims`` is ``(N,)`` for one mode or ``(N, N)`` for two."""

    matrix: np.ndarray
    dims: tuple = field(default=())

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if not self.dims:
            object.__setattr__(self, "dims", (m.shape[0],))
        if int(np.prod(self.dims)) != m.shape[0] or m.shape[0] != m.shape[1]:
            raise ValueError(f"matrix shape {m.shape} does not match dims {self.dims}")

    @property
    def n_max(self) -> int:
        return self.dims[0] - 1

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def min_eigenvalue(self) -> float:
        h = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(h)[0])

    def hermiticity_error(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())

    def check(self, herm_tol=1e-12, trace_tol=1e-10, psd_tol=1e-10) -> None:
        """Raise ``ValueError`` if the matrix is not a valid state."""
        if self.hermiticity_error() > herm_tol:
            raise ValueError(f"not Hermitian: {self.hermiticity_error():.3e}")
        if abs(self.trace() - 1) > trace_tol:
            raise ValueError(f"trace {self.trace()} != 1")
        if self.min_eigenvalue() < -psd_tol:
            raise ValueError(f"negative eigenvalue {self.min_eigenvalue():.3e}")

    def tensor4(self) -> np.ndarray:
        """Two-mode matrix reshaped to ``rho[a, b, c, d] = <ab|rho|cd>``."""
        if len(self.dims) != 2:
            raise ValueError("tensor4 requires a two-mode operator")
        na, nb = self.dims
        return self.matrix.reshape(na, nb, na, nb)

    def partial_trace(self, keep: int) -> np.ndarray:
        t = self.tensor4()
        return np.einsum("abcb->ac", t) if keep == 0 else np.einsum("abad->bd", t)

    @classmethod
    def from_pure_two_mode(cls, psi: np.ndarray) -> "DensityOperator":
        v = np.asarray(psi).ravel()
        return cls(np.outer(v, v.conj()), psi.shape)


def _normalized(amp: np.ndarray, full_norm_sq: float, what: str) -> FockVector:
    kept = float(np.sum(np.abs(amp) ** 2))
    if kept == 0.0:
        raise ValueError(f"{what}: zero-norm result")
    tail = max(0.0, 1.0 - kept / full_norm_sq) if np.isfinite(full_norm_sq) else 0.0
    if tail > TAIL_WARN:
        warnings.warn(f"{what}: truncation tail {tail:.2e} exceeds {TAIL_WARN:g}",
                      TruncationWarning, stacklevel=3)
    return FockVector(amp / math.sqrt(kept), tail)


def _check_nmax(n_max):
    if int(n_max) != n_max or n_max < 1:
        raise ValueError(f"n_max must be an integer >= 1, got {n_max}")
    return int(n_max)


def fock_state(n: int, n_max: int) -> FockVector:
    n_max = _check_nmax(n_max)
    if not 0 <= n <= n_max:
        raise ValueError(f"|{n}> not representable with n_max={n_max}")
    amp = np.zeros(n_max + 1, dtype=complex)
    amp[n] = 1.0
    return FockVector(amp)


def _coherent_amps(alpha: complex, n_max: int) -> np.ndarray:
    n = np.arange(n_max + 1)
    # alpha**n / sqrt(n!) in log space; alpha = 0 handled by the power convention 0**0 = 1
    mag = np.where(n == 0, 1.0,
                   np.exp(n * np.log(abs(alpha) or 1.0) - 0.5 * gammaln(n + 1)))
    if alpha == 0:
        mag = (n == 0).astype(float)
    return mag * np.exp(1j * np.angle(alpha) * n)


def coherent_state(alpha: complex, n_max: int) -> FockVector:
    """Coherent state truncated at ``n_max`` and renormalized."""
    n_max = _check_nmax(n_max)
    alpha = complex(alpha)
    if not np.isfinite(alpha):
        raise ValueError("alpha must be finite")
    amp = _coherent_amps(alpha, n_max)
    return _normalized(amp, math.exp(abs(alpha) ** 2), "coherent_state")


def even_cat(alpha: complex, n_max: int) -> FockVector:
    """Normalized ``|alpha> + |-alpha>``; supported on even photon numbers only."""
    n_max = _check_nmax(n_max)
    alpha = complex(alpha)
    if not np.isfinite(alpha):
        raise ValueError("alpha must be finite")
    amp = _coherent_amps(alpha, n_max)
    amp[1::2] = 0.0
    return _normalized(amp, math.cosh(abs(alpha) ** 2), "even_cat")


def odd_cat(alpha: complex, n_max: int) -> FockVector:
    """Normalized ``|alpha> - |-alpha>``; supported on odd photon numbers only."""
    n_max = _check_nmax(n_max)
    alpha = complex(alpha)
    if alpha == 0:
        raise ValueError("odd cat state is undefined at alpha = 0")
    if not np.isfinite(alpha):
        raise ValueError("alpha must be finite")
    amp = _coherent_amps(alpha, n_max)
    amp[0::2] = 0.0
    return _normalized(amp, math.sinh(abs(alpha) ** 2), "odd_cat")


def squeezed_vacuum(r: float, n_max: int) -> FockVector:
    """``S(r)|0>`` with ``S(r) = exp(r/2 (a^2 - a^dag^2))``.

    Amplitudes on ``|2n>`` are ``(-tanh r)^n sqrt((2n)!) / (2^n n!) / sqrt(cosh r)``.
    """
    n_max = _check_nmax(n_max)
    r = float(r)
    if abs(r) > 2:
        warnings.warn("squeezing |r| > 2 needs a very large truncation",
                      TruncationWarning, stacklevel=2)
    amp = np.zeros(n_max + 1, dtype=complex)
    n = np.arange(n_max // 2 + 1)
    t = math.tanh(r)
    log_mag = 0.5 * gammaln(2 * n + 1) - n * math.log(2) - gammaln(n + 1)
    if t == 0:
        amp[0] = 1.0
    else:
        log_mag = log_mag + n * math.log(abs(t))
        amp[0::2][: n.size] = np.sign(-t) ** n * np.exp(log_mag)
    return _normalized(amp / math.sqrt(math.cosh(r)), 1.0, "squeezed_vacuum")


def annihilation(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1)


def photon_added(state: FockVector, k: int) -> FockVector:
    """``(a^dag)^k |state>`` renormalized; the truncation grows by ``k``.

    The raw norm before renormalization is kept in ``raw_norm`` of the return
    via :func:`photon_added_norm`.
    """
    if k not in (1, 2):
        raise ValueError("only k in {1, 2} photon additions are supported")
    amp = state.padded(state.n_max + k).amp
    ad = annihilation(amp.size - 1).T
    for _ in range(k):
        amp = ad @ amp
    if np.linalg.norm(amp) == 0:
        raise ValueError("photon_added: zero-norm result")
    return FockVector(amp / np.linalg.norm(amp), state.tail_mass)


def photon_added_norm(state: FockVector, k: int) -> float:
    """``|| (a^dag)^k |state> ||`` computed in the padded truncated space."""
    amp = state.padded(state.n_max + k).amp
    ad = annihilation(amp.size - 1).T
    for _ in range(k):
        amp = ad @ amp
    return float(np.linalg.norm(amp))


@dataclass(frozen=True)
class OddEvenIndexMap:
    """Signed index ``n`` of the basis ``|o_n>`` to photon number.

    ``"appendix"``: ``o_n = |2n>`` (n >= 0), ``o_{-n} = |2n-1>`` (n >= 1); complete.
    ``"main"``: ``o_{-n} = |2n+1>`` (n >= 1); leaves ``|1>`` without an index.
    """

    convention: str = "appendix"

    def __post_init__(self):
        if self.convention not in ("appendix", "main"):
            raise ValueError(f"unknown index convention {self.convention!r}")

    def signed_index(self, n_max: int) -> np.ndarray:
        """Signed index for each photon number; unassigned numbers get ``None``."""
        out = np.empty(n_max + 1, dtype=object)
        for p in range(n_max + 1):
            if p % 2 == 0:
                out[p] = p // 2
            elif self.convention == "appendix":
                out[p] = -((p + 1) // 2)
            else:
                out[p] = -((p - 1) // 2) if p >= 3 else None
        return out

    def is_complete(self, n_max: int) -> bool:
        return all(v is not None for v in self.signed_index(n_max))

    def photon_number(self, index: int) -> int:
        if index >= 0:
            return 2 * index
        if self.convention == "appendix":
            return -2 * index - 1
        if index == 0:
            raise ValueError("index 0 is even")
        return -2 * index + 1

    def cut_range(self, n_max: int) -> tuple[int, int]:
        """Range of cuts ``k`` giving distinct projectors on ``0..n_max``."""
        idx = self.signed_index(n_max)
        vals = [v for v in idx if v is not None]
        return min(vals), max(vals) + 1


def cut_projectors(k: int, index_map: OddEvenIndexMap, n_max: int):
    """Diagonal projectors ``(P_plus, P_minus)`` of the dichotomic cut ``O^k``.

    ``P_plus`` covers basis states with signed index ``>= k``.
    """
    if not index_map.is_complete(n_max):
        raise ValueError(f"index convention {index_map.convention!r} is not a "
                         "bijection onto the truncated Fock basis")
    lo, hi = index_map.cut_range(n_max)
    if not lo <= k <= hi:
        raise ValueError(f"cut k={k} outside representable range [{lo}, {hi}]")
    idx = np.array(index_map.signed_index(n_max), dtype=int)
    plus = (idx >= k).astype(float)
    return np.diag(plus), np.diag(1.0 - plus)


def cut_diagonal(k: int, index_map: OddEvenIndexMap, n_max: int) -> np.ndarray:
    """Diagonal of ``O^k`` with ``k`` clipped to the representable range."""
    lo, hi = index_map.cut_range(n_max)
    p, _ = cut_projectors(int(np.clip(k, lo, hi)), index_map, n_max)
    return 2 * np.diag(p) - 1


@dataclass(frozen=True)
class CutObservable:
    """Dichotomic cut ``O^k = O^k_+ - O^k_-`` on the truncated space."""

    k: int
    index_map: OddEvenIndexMap = field(default_factory=OddEvenIndexMap)

    def projectors(self, n_max: int):
        return cut_projectors(self.k, self.index_map, n_max)

    def matrix(self, n_max: int) -> np.ndarray:
        plus, minus = self.projectors(n_max)
        return plus - minus


@dataclass(frozen=True)
class SubspaceRotation:
    """``U|e> = cos t|e> + sin t|o>``, ``U|o> = sin t|e> - cos t|o>``, identity elsewhere.

    ``U`` is Hermitian and unitary, so ``U^dag O U = U O U``.
    """

    theta: float
    e: FockVector
    o: FockVector

    def __post_init__(self):
        if self.e.n_max != self.o.n_max:
            raise ValueError("pair vectors must share a truncation")
        if abs(self.e.inner(self.o)) > 1e-10:
            raise ValueError("pair vectors must be orthogonal")

    def matrix(self) -> np.ndarray:
        e, o = self.e.amp, self.o.amp
        c, s = math.cos(self.theta), math.sin(self.theta)
        u = np.eye(e.size, dtype=complex)
        u -= np.outer(e, e.conj()) + np.outer(o, o.conj())
        u += np.outer(c * e + s * o, e.conj()) + np.outer(s * e - c * o, o.conj())
        return u

    def conjugate(self, op: np.ndarray) -> np.ndarray:
        u = self.matrix()
        return u.conj().T @ op @ u


def fock_pair(n: int, n_max: int, partner: str = "next"):
    """``(|2n>, |2n+1>)`` for ``partner="next"`` or ``(|2n>, |2n-1>)`` for ``"prev"``."""
    if partner == "next":
        p = 2 * n + 1
    elif partner == "prev":
        p = 2 * n - 1
    else:
        raise ValueError(f"unknown partner {partner!r}")
    if p < 0:
        raise ValueError(f"|{p}> does not exist")
    return fock_state(2 * n, n_max), fock_state(p, n_max)


def displaced_parity(beta: complex, n_max: int, pad: int | None = None) -> np.ndarray:
    """``D(beta) Parity D(beta)^dag`` restricted to ``0..n_max``.

    The displacement is exponentiated on a padded space so the restriction is
    accurate; this is the numeric oracle used to cross-check closed forms.
    """
    if pad is None:
        pad = 40 + int(8 * abs(beta) ** 2 + 8 * abs(beta) * math.sqrt(n_max + 1))
    dim = n_max + 1 + pad
    a = annihilation(dim - 1)
    d = expm(beta * a.T - np.conj(beta) * a)
    parity = (-1.0) ** np.arange(dim)
    return ((d * parity) @ d.conj().T)[: n_max + 1, : n_max + 1]


def wigner_reliable(beta: complex, n_max: int) -> bool:
    return abs(beta) ** 2 <= (n_max + 1) / 4 + 4


def wigner_numeric(rho, beta: complex) -> float:
    """Wigner function ``(2/pi) Tr[rho D(beta) P D(beta)^dag]``, normalized to 1.

    Accepts a :class:`DensityOperator`, a :class:`FockVector` or a matrix.
    """
    if isinstance(rho, FockVector):
        rho = rho.projector()
    m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)
    n_max = m.shape[0] - 1
    if not wigner_reliable(beta, n_max):
        warnings.warn(f"|beta|={abs(beta):.2f} beyond the reliable region for "
                      f"n_max={n_max}", TruncationWarning, stacklevel=2)
    return float(np.real(2 / np.pi * np.trace(m @ displaced_parity(beta, n_max))))


def wigner_operator_numeric(ket: FockVector, bra: FockVector, beta: complex) -> complex:
    """Wigner function of the operator ``|ket><bra|`` via displaced parity."""
    k = displaced_parity(beta, ket.n_max)
    return complex(2 / np.pi * (bra.amp.conj() @ k @ ket.amp))


def fock_wigner_table(points: np.ndarray, n_max: int) -> np.ndarray:
    """``T[m, n, p]`` = Wigner function of ``|m><n|`` at ``points[p]``.

    Uses the Laguerre form of the Fock matrix elements; cross-checked against
    :func:`displaced_parity` in the tests.
    """
    b = np.asarray(points, dtype=complex).ravel()
    x = 4 * np.abs(b) ** 2
    gauss = np.exp(-2 * np.abs(b) ** 2)
    n = n_max + 1
    table = np.empty((n, n, b.size), dtype=complex)
    for m in range(n):
        for k in range(m, n):
            pref = (-1) ** m * math.exp(0.5 * (gammaln(m + 1) - gammaln(k + 1)))
            val = 2 / np.pi * pref * (2 * b) ** (k - m) * gauss * eval_genlaguerre(m, k - m, x)
            table[m, k] = val
            table[k, m] = val.conj()
    return table


def two_mode_product(a: FockVector, b: FockVector) -> np.ndarray:
    return np.outer(a.amp, b.amp)


def symmetric_pair_state(e: FockVector, o: FockVector) -> np.ndarray:
    """``(|e>|o> + |o>|e>)/sqrt 2`` as an amplitude matrix."""
    return (np.outer(e.amp, o.amp) + np.outer(o.amp, e.amp)) / math.sqrt(2)
