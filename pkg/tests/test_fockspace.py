import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cgcat.coarse import resolution_weights
from cgcat.fockspace import (
    CutObservable,
    DensityOperator,
    FockVector,
    OddEvenIndexMap,
    SubspaceRotation,
    TruncationWarning,
    coherent_state,
    cut_diagonal,
    cut_projectors,
    displaced_parity,
    even_cat,
    fock_pair,
    fock_state,
    fock_wigner_table,
    odd_cat,
    photon_added,
    photon_added_norm,
    squeezed_vacuum,
    wigner_numeric,
)


def test_coherent_vacuum():
    v = coherent_state(0, 10)
    assert v.amp[0] == 1 and np.all(v.amp[1:] == 0)


def test_coherent_amplitude_ratios():
    v = coherent_state(1.0, 30)
    assert v.amp[1] / v.amp[0] == pytest.approx(1.0, abs=1e-14)
    assert v.amp[2] / v.amp[0] == pytest.approx(1 / math.sqrt(2), abs=1e-14)


def test_coherent_mean_photon():
    assert coherent_state(2.0, 40).mean_photon() == pytest.approx(4.0, abs=1e-8)


@pytest.mark.parametrize("alpha", [np.nan, np.inf])
def test_coherent_rejects_nonfinite(alpha):
    with pytest.raises(ValueError):
        coherent_state(alpha, 10)


def test_coherent_rejects_zero_truncation():
    with pytest.raises(ValueError):
        coherent_state(1.0, 0)


def test_coherent_truncation_warning():
    with pytest.warns(TruncationWarning):
        coherent_state(3.0, 10)


@pytest.mark.parametrize("ctor,alpha", [(coherent_state, 1.3), (even_cat, 1.7),
                                        (odd_cat, 0.9), (squeezed_vacuum, 0.6)])
def test_unit_norm(ctor, alpha):
    assert abs(ctor(alpha, 60).norm() - 1) < 1e-12


def test_cat_support_is_exact():
    e, o = even_cat(1.5, 40), odd_cat(1.5, 40)
    assert np.all(e.amp[1::2] == 0)
    assert np.all(o.amp[0::2] == 0)


def test_even_cat_small_alpha_is_vacuum():
    v = even_cat(1e-9, 10)
    assert abs(v.amp[0]) == pytest.approx(1.0, abs=1e-15)


def test_cat_orthogonality():
    assert abs(even_cat(2, 40).inner(odd_cat(2, 40))) < 1e-12


def test_odd_cat_rejects_zero():
    with pytest.raises(ValueError):
        odd_cat(0, 10)


def test_even_cat_matches_coherent_superposition():
    alpha = 1.0
    ne = (2 + 2 * math.exp(-2 * alpha ** 2)) ** -0.5
    v = ne * (coherent_state(alpha, 40).amp * math.exp(-alpha ** 2 / 2) * 0
              + _raw_coherent(alpha, 40) + _raw_coherent(-alpha, 40))
    assert np.abs(v - even_cat(alpha, 40).amp).max() < 1e-12


def _raw_coherent(alpha, n_max):
    n = np.arange(n_max + 1)
    return math.exp(-abs(alpha) ** 2 / 2) * np.array(
        [alpha ** k / math.sqrt(math.factorial(k)) for k in n], dtype=complex)


def test_squeezed_vacuum_r0_is_vacuum():
    v = squeezed_vacuum(0.0, 10)
    assert v.amp[0] == 1 and np.all(v.amp[1:] == 0)


def test_squeezed_vacuum_even_support():
    assert np.all(squeezed_vacuum(0.5, 60).amp[1::2] == 0)


def test_squeezed_vacuum_mean_photon():
    assert squeezed_vacuum(0.5, 60).mean_photon() == pytest.approx(math.sinh(0.5) ** 2, abs=1e-8)


def test_photon_added_vacuum():
    v = photon_added(fock_state(0, 5), 1)
    assert abs(v.amp[1]) == pytest.approx(1.0) and np.sum(np.abs(v.amp) ** 2) == pytest.approx(1.0)


def test_photon_added_r0_two_photons():
    v = photon_added(squeezed_vacuum(0, 10), 2)
    assert abs(v.amp[2]) == pytest.approx(1.0)


@pytest.mark.parametrize("r", [0.3, 0.8])
def test_photon_added_normalizations(r):
    sv = squeezed_vacuum(r, 80)
    assert 1 / photon_added_norm(sv, 1) == pytest.approx(1 / math.cosh(r), abs=1e-8)
    closed = 1 / (math.cosh(r) ** 2 * math.sqrt(2 + math.tanh(r) ** 2))
    assert 1 / photon_added_norm(sv, 2) == pytest.approx(closed, abs=1e-8)


def test_photon_added_rejects_k3():
    with pytest.raises(ValueError):
        photon_added(fock_state(0, 5), 3)


def test_index_map_appendix_is_bijective():
    m = OddEvenIndexMap("appendix")
    idx = list(m.signed_index(30))
    assert len(set(idx)) == 31 and None not in idx
    assert {p for p, i in enumerate(idx) if i >= 0} == set(range(0, 31, 2))
    assert all(m.photon_number(i) == p for p, i in enumerate(idx))


def test_index_map_main_text_leaves_one_photon_unassigned():
    m = OddEvenIndexMap("main")
    assert m.signed_index(10)[1] is None
    assert not m.is_complete(10)
    with pytest.raises(ValueError):
        cut_projectors(0, m, 10)


def test_parity_cut():
    p, q = cut_projectors(0, OddEvenIndexMap(), 20)
    assert np.array_equal(np.diag(p), (np.arange(21) % 2 == 0).astype(float))
    assert np.array_equal(p + q, np.eye(21))


@pytest.mark.parametrize("k", [-10, -3, 0, 2, 11])
def test_cut_projector_identity(k):
    p, q = cut_projectors(k, OddEvenIndexMap(), 20)
    assert np.array_equal(p + q, np.eye(21))
    assert set(np.unique(np.diag(p - q))) <= {-1.0, 1.0}


def test_cut_out_of_range():
    with pytest.raises(ValueError):
        cut_projectors(12, OddEvenIndexMap(), 20)


def test_parity_eigenstate():
    e = even_cat(1.3, 30)
    d = cut_diagonal(0, OddEvenIndexMap(), 30)
    assert np.abs(d * e.amp - e.amp).max() == 0


def test_resolution_operator_on_even_cat():
    alpha, n = 1.2, 40
    e = even_cat(alpha, n)
    w = resolution_weights(1.0)
    idx = OddEvenIndexMap()
    od = sum(w[k] * cut_diagonal(int(k), idx, n) for k in w.ks())
    # O_delta|e> = |e> - |M_e>, |M_e> = 2 sum_{k>=1} P(k) sum_{n<k} c_n |2n>
    m_e = np.zeros(n + 1, dtype=complex)
    for k in range(1, w.k_cut + 1):
        for j in range(k):
            m_e[2 * j] += 2 * w[k] * e.amp[2 * j]
    assert np.abs(od * e.amp - (e.amp - m_e)).max() < 1e-14


@given(st.floats(-6, 6), st.integers(0, 2**31 - 1))
def test_rotation_unitary(theta, seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(12, 2)) + 1j * rng.normal(size=(12, 2))
    q, _ = np.linalg.qr(z)
    u = SubspaceRotation(theta, FockVector(q[:, 0]), FockVector(q[:, 1])).matrix()
    assert np.abs(u.conj().T @ u - np.eye(12)).max() < 1e-12
    assert np.abs(u - u.conj().T).max() < 1e-12


def test_rotation_action():
    e, o = fock_pair(1, 5)
    u = SubspaceRotation(0.4, e, o).matrix()
    assert np.allclose(u @ e.amp, math.cos(0.4) * e.amp + math.sin(0.4) * o.amp)
    assert np.allclose(u @ o.amp, math.sin(0.4) * e.amp - math.cos(0.4) * o.amp)
    assert u[0, 0] == 1 and u[4, 4] == 1


def test_rotation_rejects_nonorthogonal():
    with pytest.raises(ValueError):
        SubspaceRotation(0.1, fock_state(0, 3), fock_state(0, 3))


@pytest.mark.parametrize("partner", ["next", "prev"])
def test_both_pair_conventions(partner):
    e, o = fock_pair(2, 8, partner)
    assert e.amp[4] == 1 and o.amp[5 if partner == "next" else 3] == 1


def test_prev_partner_needs_n_ge_1():
    with pytest.raises(ValueError):
        fock_pair(0, 5, "prev")


def test_density_operator_checks():
    rho = even_cat(1, 20).projector()
    rho.check()
    with pytest.raises(ValueError):
        DensityOperator(np.diag([0.5, 0.6])).check()
    with pytest.raises(ValueError):
        DensityOperator(np.diag([1.2, -0.2])).check()


def test_wigner_vacuum_and_one_photon():
    assert wigner_numeric(fock_state(0, 20), 0) == pytest.approx(2 / math.pi, abs=1e-12)
    assert wigner_numeric(fock_state(1, 20), 0) == pytest.approx(-2 / math.pi, abs=1e-12)


def test_wigner_flags_unreliable_points():
    with pytest.warns(TruncationWarning):
        wigner_numeric(fock_state(0, 4), 4.0)


def test_fock_table_matches_displaced_parity():
    pts = np.array([0.3 - 0.2j, -0.7 + 0.5j, 1.1 + 0.9j])
    T = fock_wigner_table(pts, 6)
    for p, z in enumerate(pts):
        K = displaced_parity(z, 6)
        assert np.abs(T[:, :, p] - 2 / np.pi * K.T).max() < 1e-10


@pytest.mark.parametrize("state", [coherent_state(1.5, 30), even_cat(2.0, 30),
                                   odd_cat(1.0, 30), squeezed_vacuum(0.5, 40),
                                   photon_added(squeezed_vacuum(0.5, 40), 1)])
def test_oracle_integrates_to_one(state):
    x = np.linspace(-6, 6, 121)
    h = x[1] - x[0]
    pts = (x[:, None] + 1j * x[None, :]).ravel()
    T = fock_wigner_table(pts, state.n_max)
    W = np.real(np.einsum("m,n,mnp->p", state.amp, state.amp.conj(), T))
    assert abs(W.sum() * h * h - 1) < 1e-4
    for z in pts[::1500]:
        if abs(z) < 3:
            assert W[list(pts).index(z)] == pytest.approx(wigner_numeric(state, z), abs=1e-9)


@pytest.mark.parametrize("k", [-4, 0, 3])
def test_cut_observable(k):
    c = CutObservable(k)
    m = c.matrix(20)
    assert set(np.unique(np.diag(m))) <= {-1.0, 1.0}
    assert np.array_equal(m @ m, np.eye(21))
    p, q = c.projectors(20)
    assert np.array_equal(p + q, np.eye(21))
