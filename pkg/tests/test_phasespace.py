import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cgcat.coarse import cat_reference_coefficients, fock_reference_state
from cgcat.fockspace import coherent_state, even_cat, fock_state, odd_cat
from cgcat.phasespace import wigner as wg
from cgcat.phasespace.pdist import (
    MAX_FOCK,
    SymbolicQuasiProb,
    Term,
    fock_moment,
    m_poly_coeffs,
    pdist_cat,
    pdist_fock,
    pdist_fock_offdiag,
    pdist_fock_operator,
    pdist_fock_reference,
    pdist_moment,
    pdist_two_mode,
)
from cgcat.phasespace.wigner import (
    BasisValidationError,
    FockWignerBasis,
    TwoModeWigner,
    assemble_two_mode,
    coherent_operator_wigner,
    hermitian_coefficients,
    hermitian_features,
    hermitian_operator_basis,
    sample_points,
    wigner_basis_cat,
    wigner_basis_noon,
    wigner_basis_pasv,
)


def _grid(extent, n):
    x = np.linspace(-extent, extent, n)
    h = x[1] - x[0]
    return (x[:, None] + 1j * x[None, :]).ravel(), h * h


# Wigner bases

@pytest.mark.parametrize("alpha", [1.0, 2.0])
def test_cat_basis_oracle(alpha):
    assert wigner_basis_cat(alpha, n_max=30).oracle_error() < 1e-8


@pytest.mark.parametrize("N", [1, 3, 5])
def test_noon_basis_oracle(N):
    assert wigner_basis_noon(N, n_max=30).oracle_error() < 1e-12


@pytest.mark.parametrize("r", [0.3, 0.6, 0.8, 0.9])
def test_pasv_closed_forms_validate(r):
    b = wigner_basis_pasv(r, strict=True)
    assert b.oracle_error() < 1e-5
    assert "validated" in b.diagnostics[0]


def test_pasv_oracle_truncation_at_30():
    # closed forms are exact; the n_max=30 oracle is not converged at r=0.8
    e30 = wigner_basis_pasv(0.8, n_max=30, validate=False).oracle_error()
    e60 = wigner_basis_pasv(0.8, n_max=60, validate=False).oracle_error()
    assert e60 < 1e-6 < e30


def test_pasv_fallback_substitutes(monkeypatch):
    monkeypatch.setattr(wg, "_pasv_printed", lambda r: {
        k: (lambda b: 0 * b) for k in [(i, j) for i in "eo" for j in "eo"]})
    with pytest.warns(UserWarning):
        b = wigner_basis_pasv(0.5)
    assert "Fock-table" in b.diagnostics[0]
    assert b.oracle_error() < 1e-6
    with pytest.raises(BasisValidationError):
        wigner_basis_pasv(0.5, strict=True)


def test_pasv_rejects_large_r():
    with pytest.raises(ValueError):
        wigner_basis_pasv(2.0)


@pytest.mark.parametrize("N", [0, 2, 1.5])
def test_noon_rejects(N):
    with pytest.raises(ValueError):
        wigner_basis_noon(N)


def test_cat_rejects_zero():
    with pytest.raises(ValueError):
        wigner_basis_cat(0)


@pytest.mark.parametrize("basis", [wigner_basis_cat(2.0), wigner_basis_noon(3),
                                   wigner_basis_pasv(0.5)])
def test_basis_integrals_and_hermiticity(basis):
    pts, dA = _grid(9, 241)
    T = basis.table(pts)
    integral = T.sum(axis=-1) * dA
    assert np.abs(integral - np.eye(2)).max() < 1e-6
    assert np.abs(T[0, 1] - T[1, 0].conj()).max() < 1e-12
    assert np.abs(T[0, 0].imag).max() == 0 and np.abs(T[1, 1].imag).max() == 0


def test_vacuum_wigner_peak():
    assert coherent_operator_wigner(0, 0, 0).real == pytest.approx(2 / np.pi)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_hermitian_basis_orthonormal(d):
    E = hermitian_operator_basis(d)
    G = np.array([[np.trace(a @ b).real for b in E] for a in E])
    assert len(E) == d * d
    assert np.abs(G - np.eye(d * d)).max() < 1e-15
    assert all(np.abs(a - a.conj().T).max() == 0 for a in E)


@given(st.integers(0, 2**31 - 1))
def test_hermitian_coefficients_reconstruct(seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    rho = z @ z.conj().T
    R = hermitian_coefficients(rho, 2, 3)
    Ea, Eb = hermitian_operator_basis(2), hermitian_operator_basis(3)
    back = sum(R[m, n] * np.kron(A, B) for m, A in enumerate(Ea) for n, B in enumerate(Eb))
    assert np.abs(back - rho).max() < 1e-12


@given(st.floats(0, np.pi), st.floats(0, np.pi), st.floats(0, 1.2))
def test_two_mode_features_match_pointwise(ta, tb, D):
    W = assemble_two_mode(cat_reference_coefficients(ta, tb, D), wigner_basis_cat(1.5))
    rng = np.random.default_rng(0)
    b = rng.normal(size=7) + 1j * rng.normal(size=7)
    g = rng.normal(size=7) + 1j * rng.normal(size=7)
    Fa, Fb = W.features(b, g)
    viaR = np.einsum("mp,mn,np->p", Fa, W.coefficients(), Fb)
    direct = W(b, g)
    assert np.abs(viaR - direct.real).max() < 1e-13
    assert W.imaginary_residue(b, g) < 1e-13


def test_two_mode_normalization_is_trace():
    W = assemble_two_mode(cat_reference_coefficients(0.3, 0.5, 0.2), wigner_basis_cat(2.0))
    assert W.normalization == pytest.approx(1.0, abs=1e-15)


def test_assemble_rejects():
    b = wigner_basis_cat(1.0)
    with pytest.raises(ValueError):
        assemble_two_mode(np.triu(np.ones((4, 4))), b)
    with pytest.raises(ValueError):
        assemble_two_mode(np.eye(3) / 3, b)


def test_fock_basis_matches_closed_form_cat():
    from cgcat.negativity import truncated_cat_basis

    pts = sample_points(1.5)
    fb = truncated_cat_basis(1.0, 40)
    assert np.abs(fb.table(pts) - wigner_basis_cat(1.0).table(pts)).max() < 1e-12


def test_sample_points():
    p = sample_points(2.0)
    assert p.size == 25 and abs(p).max() == pytest.approx(2 * math.sqrt(2))


# P-distributions

def _rho(v):
    return np.outer(v.amp, v.amp.conj())


MOMENTS = [(p, q) for p in range(4) for q in range(4)]


@pytest.mark.parametrize("n", range(0, 7))
def test_fock_moments(n):
    d = pdist_fock(n)
    rho = _rho(fock_state(n, 12))
    for p, q in MOMENTS:
        assert abs(d.moment(p, q) - fock_moment(rho, p, q)) < 1e-8
    assert d.mass() == 1
    assert d.singularity_order() == 2 * n


@pytest.mark.parametrize("n", range(0, 6))
def test_fock_offdiag_moments(n):
    rho = np.zeros((12, 12))
    rho[n + 1, n] = 1
    for d, r in [(pdist_fock_offdiag(n), rho), (pdist_fock_offdiag(n).adjoint(), rho.T)]:
        for p, q in MOMENTS:
            assert abs(d.moment(p, q) - fock_moment(r, p, q)) < 1e-8


def test_m_poly_zero():
    assert m_poly_coeffs(0) == [1.0]


@pytest.mark.parametrize("alpha", [0.7, 1.0, 2.0])
@pytest.mark.parametrize("which", ["ee", "eo", "oe", "oo"])
def test_cat_moments(alpha, which):
    e, o = even_cat(alpha, 60), odd_cat(alpha, 60)
    v = {"e": e.amp, "o": o.amp}
    rho = np.outer(v[which[0]], v[which[1]].conj())
    d = pdist_cat(alpha, which)
    for p, q in MOMENTS:
        assert abs(d.moment(p, q) - fock_moment(rho, p, q)) < 1e-8
    assert d.singularity_order() >= 2 if which[0] == which[1] else True


@pytest.mark.parametrize("n", [1, 2, 4])
@pytest.mark.parametrize("partner", ["next", "prev"])
def test_fock_reference_moments(n, partner):
    d = pdist_fock_reference(n, 0.4, 0.3, partner)
    blk = fock_reference_state(n, 0.4, 0.3, partner)
    idx = [2 * n, 2 * n + 1 if partner == "next" else 2 * n - 1]
    rho = np.zeros((12, 12))
    rho[np.ix_(idx, idx)] = blk
    for p, q in MOMENTS:
        assert abs(d.moment(p, q) - fock_moment(rho, p, q)) < 1e-8
    assert d.singularity_order() >= 2


def test_two_mode_cat_moments():
    alpha, ta, tb, D = 1.2, 0.3, 1.1, 0.4
    coeffs = cat_reference_coefficients(ta, tb, D)
    dists = {w: pdist_cat(alpha, w) for w in ("ee", "eo", "oe", "oo")}
    P = pdist_two_mode(coeffs, dists)
    n = 30
    V = np.stack([even_cat(alpha, n).amp, odd_cat(alpha, n).amp], axis=1)
    K = np.kron(V, V)
    rho = K @ coeffs.matrix() @ K.conj().T
    a = np.diag(np.sqrt(np.arange(1, n + 1)), 1)
    I = np.eye(n + 1)
    for pa, qa, pb, qb in [(0, 0, 0, 0), (1, 1, 0, 0), (0, 1, 1, 0), (2, 1, 1, 2), (3, 3, 0, 1)]:
        opa = np.linalg.matrix_power(a.T, pa) @ np.linalg.matrix_power(a, qa)
        opb = np.linalg.matrix_power(a.T, pb) @ np.linalg.matrix_power(a, qb)
        ref = np.trace(rho @ np.kron(opa, opb))
        assert abs(P.moment(pa, qa, pb, qb) - ref) < 1e-8
    assert P.mass() == pytest.approx(1.0, abs=1e-12)
    assert P.singularity_order() >= 2


def test_coherent_delta_moments():
    alpha = 0.8 - 0.3j
    d = SymbolicQuasiProb((Term(1.0, alpha, 0, 0),))
    rho = _rho(coherent_state(alpha, 40))
    for p, q in MOMENTS:
        assert abs(d.moment(p, q) - fock_moment(rho, p, q)) < 1e-10
    assert d.singularity_order() == 0


def test_from_terms_merges():
    d = SymbolicQuasiProb.from_terms([Term(1, 0, 1, 1), Term(2, 0, 1, 1), Term(1, 1, 0, 0),
                                      Term(-1, 1, 0, 0)])
    assert d.terms == (Term(3, 0, 1, 1),)


def test_pdist_limits():
    with pytest.raises(ValueError):
        pdist_fock(MAX_FOCK + 1)
    with pytest.raises(ValueError):
        pdist_fock(-1)
    with pytest.raises(ValueError):
        pdist_moment(pdist_fock(1), 5, 5)
    with pytest.raises(ValueError):
        pdist_fock_operator(0, 3)
    with pytest.raises(ValueError):
        pdist_cat(1.0, "xy")
    with pytest.raises(ValueError):
        pdist_cat(0.0, "ee")
