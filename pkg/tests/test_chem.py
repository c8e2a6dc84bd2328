import math
from itertools import product

import numpy as np
import pytest
from scipy import integrate
from scipy.special import erf

from vqe_forge.chem import (
    ANGSTROM_TO_BOHR,
    BondLengthOutOfRange,
    ContractedGaussian,
    ao_integrals,
    boys_f0,
    build_h2_hamiltonian,
    fermion_product,
    fermion_to_qubit,
    jordan_wigner,
    run_hartree_fock,
    spin_orbital_integrals,
    sto3g_hydrogen,
)
from vqe_forge.pauli import PauliTerm, exact_ground_energy, to_dense_matrix
from vqe_forge.statevector import basis_state, expectation

R_EQ_BOHR = 1.4
GRID = np.linspace(0.1, 3.0, 100)


# --- independent oracles -------------------------------------------------------

def quad_overlap(g, h):
    """Overlap of two z-axis-centered functions by 2D cylindrical quadrature."""
    def integrand(rho, z):
        p = np.array([rho, 0.0, z])
        return 2 * math.pi * rho * g(p) * h(p)
    zs = [g.center[2], h.center[2]]
    val, _ = integrate.dblquad(integrand, min(zs) - 12, max(zs) + 12, 0, 12,
                               epsabs=1e-12, epsrel=1e-12)
    return val


def _density_pairs(g):
    return [(a + b, ca * cb) for (a, ca), (b, cb) in product(g.primitives(), g.primitives())]


def radial_self_repulsion(g):
    """(11|11) as the Coulomb energy of the charge cloud g^2, by radial quadrature.

    Uses the point-charge-free potential of a spherical Gaussian cloud,
    (pi/p)^1.5 erf(sqrt(p) r) / r, instead of the Boys-function formula.
    """
    pairs = _density_pairs(g)

    def rho(r):
        return sum(w * math.exp(-p * r * r) for p, w in pairs)

    def phi(r):
        if r == 0:
            return sum(w * (math.pi / p) ** 1.5 * 2 * math.sqrt(p / math.pi) for p, w in pairs)
        return sum(w * (math.pi / p) ** 1.5 * erf(math.sqrt(p) * r) / r for p, w in pairs)

    val, _ = integrate.quad(lambda r: 4 * math.pi * r * r * rho(r) * phi(r), 0, 30,
                            epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def radial_own_nucleus_attraction(g):
    pairs = _density_pairs(g)
    val, _ = integrate.quad(
        lambda r: -4 * math.pi * r * sum(w * math.exp(-p * r * r) for p, w in pairs),
        0, 30, epsabs=1e-13, epsrel=1e-12)
    return val


def reference_hf_energy(r_bohr):
    """H2 minimal-basis RHF without an SCF loop: the occupied MO is fixed by symmetry."""
    ints = ao_integrals(sto3g_hydrogen((0, 0, 0)), sto3g_hydrogen((0, 0, r_bohr)))
    c = 1 / math.sqrt(2 * (1 + ints.overlap[0, 1]))
    v = np.array([c, c])
    h_gg = v @ ints.core @ v
    j_gg = np.einsum("i,j,k,l,ijkl->", v, v, v, v, ints.eri)
    return 2 * h_gg + j_gg + 1 / r_bohr


def fock_ladder(p, n, dagger):
    """Dense a_p (or a_p^dagger) from the occupation-number definition."""
    dim = 2**n
    m = np.zeros((dim, dim))
    for col in range(dim):
        occ = [(col >> (n - 1 - q)) & 1 for q in range(n)]
        if occ[p] == (1 if dagger else 0):
            continue
        sign = (-1) ** sum(occ[:p])
        occ[p] ^= 1
        row = int("".join(map(str, occ)), 2)
        m[row, col] = sign
    return m


def fock_hamiltonian(h1, h2, constant):
    n = h1.shape[0]
    a = [fock_ladder(p, n, False) for p in range(n)]
    ad = [fock_ladder(p, n, True) for p in range(n)]
    H = constant * np.eye(2**n)
    for p, q in product(range(n), repeat=2):
        H += h1[p, q] * ad[p] @ a[q]
    for p, q, r, s in product(range(n), repeat=4):
        H += 0.5 * h2[p, q, r, s] * ad[p] @ ad[q] @ a[s] @ a[r]
    return H


def pauli_projection_count(m, n, tol=1e-12):
    mats = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]),
            "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}
    count = 0
    for labels in product("IXYZ", repeat=n):
        P = np.array([[1]])
        for lab in labels:
            P = np.kron(P, mats[lab])
        if abs(np.trace(P @ m) / 2**n) > tol:
            count += 1
    return count


# --- basis and integrals --------------------------------------------------------

def test_sto3g_normalized():
    g = sto3g_hydrogen((0.3, -0.2, 1.0))
    h = run_ints = ao_integrals(g, sto3g_hydrogen((0.3, -0.2, 1.0)))
    np.testing.assert_allclose(run_ints.overlap, np.ones((2, 2)), atol=1e-10)
    assert g.exponents == (3.42525091, 0.62391373, 0.16885540)


def test_self_overlap_by_quadrature():
    g = sto3g_hydrogen((0, 0, 0))
    assert quad_overlap(g, g) == pytest.approx(1.0, abs=1e-9)


def test_overlap_at_1p4_bohr():
    g, h = sto3g_hydrogen((0, 0, 0)), sto3g_hydrogen((0, 0, R_EQ_BOHR))
    oracle = quad_overlap(g, h)
    S = ao_integrals(g, h, R_EQ_BOHR).overlap
    assert S[0, 1] == pytest.approx(oracle, abs=1e-9)
    assert oracle == pytest.approx(0.6593, abs=1e-4)


def test_gaussian_validation():
    with pytest.raises(ValueError):
        ContractedGaussian((0, 0, 0), (0.1, 1.0), (1.0, 1.0))
    with pytest.raises(ValueError):
        ContractedGaussian((0, 0, 0), (1.0, -0.1), (1.0, 1.0))


def test_boys_zero():
    assert boys_f0(0.0) == 1.0


@pytest.mark.parametrize("t", [1e-14, 1e-9, 1e-3, 0.5, 1.0, 7.3, 30.0, 200.0])
@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_boys_matches_quadrature(t):
    oracle, _ = integrate.quad(lambda x: math.exp(-t * x * x), 0, 1, epsabs=1e-14, epsrel=1e-14)
    assert boys_f0(t) == pytest.approx(oracle, rel=1e-12, abs=1e-14)


def test_boys_reference_values():
    assert boys_f0(1.0) == pytest.approx(0.746824, abs=1e-6)
    assert boys_f0(30.0) == pytest.approx(0.5 * math.sqrt(math.pi / 30), abs=1e-12)
    assert boys_f0(30.0) == pytest.approx(0.161802, abs=1e-6)


def test_boys_negative():
    with pytest.raises(ValueError):
        boys_f0(-0.1)


def test_ao_integral_symmetries():
    ints = ao_integrals(sto3g_hydrogen((0, 0, 0)), sto3g_hydrogen((0, 0, 2.1)), 2.1)
    np.testing.assert_allclose(np.diag(ints.overlap), [1, 1], atol=1e-12)
    assert ints.eri[0, 0, 0, 0] == pytest.approx(ints.eri[1, 1, 1, 1], abs=1e-12)
    eri = ints.eri
    for i, j, k, l in product(range(2), repeat=4):
        for perm in [(j, i, k, l), (i, j, l, k), (k, l, i, j), (l, k, j, i)]:
            assert eri[i, j, k, l] == pytest.approx(eri[perm], abs=1e-12)


def test_self_repulsion_by_radial_quadrature():
    g = sto3g_hydrogen((0, 0, 0))
    ints = ao_integrals(g, sto3g_hydrogen((0, 0, R_EQ_BOHR)))
    oracle = radial_self_repulsion(g)
    assert ints.eri[0, 0, 0, 0] == pytest.approx(oracle, abs=1e-9)
    assert oracle == pytest.approx(0.7746, abs=1e-3)


def test_own_nucleus_attraction_by_radial_quadrature():
    g = sto3g_hydrogen((0, 0, 0))
    far = ao_integrals(g, sto3g_hydrogen((0, 0, 1e3)))
    # the distant nucleus contributes about -1/1000
    assert far.nuclear[0, 0] == pytest.approx(radial_own_nucleus_attraction(g) - 1e-3, abs=1e-6)


def test_kinetic_against_finite_difference_laplacian(rng):
    g = sto3g_hydrogen((0, 0, 0))
    ints = ao_integrals(g, sto3g_hydrogen((0, 0, R_EQ_BOHR)))

    # T_00 = 1/2 * integral |grad g|^2, radial derivative by hand
    def dg(r):
        return sum(-2 * a * r * c * math.exp(-a * r * r) for a, c in g.primitives())
    oracle, _ = integrate.quad(lambda r: 0.5 * 4 * math.pi * r * r * dg(r) ** 2, 0, 30,
                               epsabs=1e-13, epsrel=1e-12)
    assert ints.kinetic[0, 0] == pytest.approx(oracle, abs=1e-10)


# --- Hartree-Fock ---------------------------------------------------------------

def test_hf_energy_at_1p4_bohr():
    sol = run_hartree_fock(R_EQ_BOHR / ANGSTROM_TO_BOHR)
    assert sol.hf_energy == pytest.approx(reference_hf_energy(R_EQ_BOHR), abs=1e-10)
    assert sol.hf_energy == pytest.approx(-1.1167, abs=1e-3)
    assert sol.iterations <= 2


def test_hf_d_0p7408():
    assert run_hartree_fock(0.7408).hf_energy == pytest.approx(-1.1167, abs=1e-3)


@pytest.mark.parametrize("d", [0.1, 0.5, 1.2, 2.5, 3.0])
def test_hf_matches_reference_recomputation(d):
    assert run_hartree_fock(d).hf_energy == pytest.approx(
        reference_hf_energy(d * ANGSTROM_TO_BOHR), abs=1e-10)


def test_nuclear_repulsion_one_bohr():
    sol = run_hartree_fock(1 / ANGSTROM_TO_BOHR)
    assert sol.nuclear_repulsion == pytest.approx(1.0, abs=1e-12)
    assert run_hartree_fock(0.529177).nuclear_repulsion == pytest.approx(1.0, abs=1e-6)


def test_orbital_energies_ascending():
    eps = run_hartree_fock(0.74).orbital_energies
    assert eps[0] < 0 < eps[1]


def test_mo_orthonormal_and_eri_symmetry():
    sol = run_hartree_fock(0.9)
    S = ao_integrals(sto3g_hydrogen((0, 0, 0)), sto3g_hydrogen((0, 0, 0.9 * ANGSTROM_TO_BOHR))).overlap
    C = sol.mo_coefficients
    np.testing.assert_allclose(C.T @ S @ C, np.eye(2), atol=1e-8)
    g = sol.eri_mo  # physicist <ij|kl>
    for i, j, k, l in product(range(2), repeat=4):
        for perm in [(j, i, l, k), (k, l, i, j), (l, k, j, i), (k, j, i, l), (i, l, k, j)]:
            assert g[i, j, k, l] == pytest.approx(g[perm], abs=1e-10)


@pytest.mark.parametrize("d", [0.01, 10.5, -1.0])
def test_bond_out_of_range(d):
    with pytest.raises(BondLengthOutOfRange):
        run_hartree_fock(d)


# --- Jordan-Wigner ------------------------------------------------------------

def test_number_operator():
    op = fermion_product([(0, True), (0, False)], 1)
    assert op.terms == (PauliTerm(0.5, {}), PauliTerm(-0.5, {0: "Z"}))


def test_anticommutation():
    n = 3
    for p, q in product(range(n), repeat=2):
        ab = to_dense_matrix(fermion_product([(p, False), (q, True)], n))
        ba = to_dense_matrix(fermion_product([(q, True), (p, False)], n))
        np.testing.assert_allclose(ab + ba, np.eye(2**n) * (p == q), atol=1e-14)


def test_h2_term_count_and_reality():
    h = build_h2_hamiltonian(0.7414)
    assert len(h) == 15
    assert all(abs(t.coefficient.imag) < 1e-10 for t in h)
    sol = run_hartree_fock(0.7414)
    h1, h2 = spin_orbital_integrals(sol)
    fock = fock_hamiltonian(h1, h2, sol.nuclear_repulsion)
    assert pauli_projection_count(fock, 4) == 15
    np.testing.assert_allclose(to_dense_matrix(h), fock, atol=1e-12)


@pytest.mark.parametrize("d", [0.3, 1.7, 2.9])
def test_jw_matches_fock_space_hamiltonian(d):
    sol = run_hartree_fock(d)
    h1, h2 = spin_orbital_integrals(sol)
    np.testing.assert_allclose(to_dense_matrix(jordan_wigner(sol)),
                               fock_hamiltonian(h1, h2, sol.nuclear_repulsion), atol=1e-12)


def test_generic_mapping_random_hermitian_integrals(rng):
    n = 3
    a = rng.normal(size=(n, n))
    h1 = a + a.T
    g = rng.normal(size=(n, n, n, n))
    # real physicist integrals with <pq|rs> = <qp|sr> = <rs|pq>
    g = g + g.transpose(1, 0, 3, 2)
    g = g + g.transpose(2, 3, 0, 1)
    h = fermion_to_qubit(h1, g, 0.4)
    np.testing.assert_allclose(to_dense_matrix(h), fock_hamiltonian(h1, g, 0.4), atol=1e-10)


def test_ground_energy_equilibrium():
    assert exact_ground_energy(build_h2_hamiltonian(0.7414)) == pytest.approx(-1.1372, abs=1e-4)


def test_dissociation_above_equilibrium():
    eq = exact_ground_energy(build_h2_hamiltonian(0.7414))
    assert exact_ground_energy(build_h2_hamiltonian(3.0)) > eq


def test_always_four_qubits():
    for d in (0.1, 0.74, 3.0):
        assert build_h2_hamiltonian(d).n_qubits == 4


def test_hamiltonian_cached():
    assert build_h2_hamiltonian(1.1) is build_h2_hamiltonian(1.1)


@pytest.mark.parametrize("d", GRID)
def test_grid_invariants(d):
    sol = run_hartree_fock(d)
    h = build_h2_hamiltonian(d)
    e0 = exact_ground_energy(h)
    assert sol.hf_energy >= e0 - 1e-10
    assert expectation(basis_state(4, [1, 1, 0, 0]), h) == pytest.approx(sol.hf_energy, abs=1e-8)
    m = to_dense_matrix(h)
    number = sum(to_dense_matrix(fermion_product([(p, True), (p, False)], 4)) for p in range(4))
    assert np.max(np.abs(m @ number - number @ m)) < 1e-10
