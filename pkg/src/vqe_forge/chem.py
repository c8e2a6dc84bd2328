"""H2 in STO-3G: Gaussian integrals, restricted Hartree-Fock, Jordan-Wigner.

Lengths are accepted in angstrom at the public surface and converted once to
bohr; everything else is in atomic units.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np
from scipy.special import erf

from .pauli import (
    HERMITICITY_TOLERANCE,
    PauliTerm,
    QubitHamiltonian,
    canonicalize,
    multiply_terms,
)

ANGSTROM_TO_BOHR = 1.8897259886
MIN_BOND_ANGSTROM = 0.05
MAX_BOND_ANGSTROM = 10.0

# standard STO-3G hydrogen 1s (zeta = 1.24)
STO3G_H_EXPONENTS = (3.42525091, 0.62391373, 0.16885540)
STO3G_H_COEFFICIENTS = (0.15432897, 0.53532814, 0.44463454)

N_SPATIAL = 2
N_SPIN_ORBITALS = 4


class BondLengthOutOfRange(ValueError):
    pass


class NonConvergence(RuntimeError):
    pass


class HermiticityViolation(RuntimeError):
    pass


@dataclass(frozen=True)
class ContractedGaussian:
    """s-type contraction ``sum_k c_k exp(-a_k |r - center|^2)``.

    ``coefficients`` already include primitive normalization, so the function
    is evaluated directly from them.
    """

    center: tuple[float, float, float]
    exponents: tuple[float, ...]
    coefficients: tuple[float, ...]

    def __post_init__(self):
        if any(a <= 0 for a in self.exponents):
            raise ValueError("exponents must be positive")
        if list(self.exponents) != sorted(self.exponents, reverse=True):
            raise ValueError("exponents must be in descending order")
        if len(self.exponents) != len(self.coefficients):
            raise ValueError("exponent/coefficient length mismatch")

    def __call__(self, points: np.ndarray) -> np.ndarray:
        r2 = np.sum((np.asarray(points) - np.asarray(self.center)) ** 2, axis=-1)
        return sum(c * np.exp(-a * r2) for a, c in zip(self.exponents, self.coefficients))

    def primitives(self):
        return zip(self.exponents, self.coefficients)


def boys_f0(t: float) -> float:
    """``F0(t) = integral_0^1 exp(-t x^2) dx``."""
    if t < 0:
        raise ValueError(f"Boys function undefined for t={t}")
    if t < 1e-12:
        return 1.0 - t / 3.0 + t * t / 10.0 - t**3 / 42.0
    root = math.sqrt(t)
    return 0.5 * math.sqrt(math.pi / t) * float(erf(root))


def _primitive_norm(alpha: float) -> float:
    return (2.0 * alpha / math.pi) ** 0.75


def _overlap_prim(a: float, b: float, r2: float) -> float:
    p = a + b
    return (math.pi / p) ** 1.5 * math.exp(-a * b / p * r2)


def _kinetic_prim(a: float, b: float, r2: float) -> float:
    p = a + b
    mu = a * b / p
    return mu * (3.0 - 2.0 * mu * r2) * _overlap_prim(a, b, r2)


def _nuclear_prim(a, b, ra, rb, rc, charge=1.0) -> float:
    p = a + b
    rp = (a * ra + b * rb) / p
    r2 = float(np.sum((ra - rb) ** 2))
    rpc2 = float(np.sum((rp - rc) ** 2))
    return -charge * 2.0 * math.pi / p * math.exp(-a * b / p * r2) * boys_f0(p * rpc2)


def _eri_prim(a, b, c, d, ra, rb, rc, rd) -> float:
    # chemist (ab|cd)
    p, q = a + b, c + d
    rp = (a * ra + b * rb) / p
    rq = (c * rc + d * rd) / q
    rab2 = float(np.sum((ra - rb) ** 2))
    rcd2 = float(np.sum((rc - rd) ** 2))
    rpq2 = float(np.sum((rp - rq) ** 2))
    pre = 2.0 * math.pi**2.5 / (p * q * math.sqrt(p + q))
    return (
        pre
        * math.exp(-a * b / p * rab2 - c * d / q * rcd2)
        * boys_f0(p * q / (p + q) * rpq2)
    )


def _contracted_overlap(g: ContractedGaussian, h: ContractedGaussian) -> float:
    r2 = float(np.sum((np.asarray(g.center) - np.asarray(h.center)) ** 2))
    return sum(
        ca * cb * _overlap_prim(a, b, r2)
        for (a, ca), (b, cb) in product(g.primitives(), h.primitives())
    )


def sto3g_hydrogen(center) -> ContractedGaussian:
    """Unit-normalized STO-3G hydrogen 1s function centered at ``center`` (bohr)."""
    center = tuple(float(x) for x in center)
    coeffs = tuple(
        c * _primitive_norm(a) for a, c in zip(STO3G_H_EXPONENTS, STO3G_H_COEFFICIENTS)
    )
    g = ContractedGaussian(center, STO3G_H_EXPONENTS, coeffs)
    scale = 1.0 / math.sqrt(_contracted_overlap(g, g))
    return ContractedGaussian(center, STO3G_H_EXPONENTS, tuple(c * scale for c in coeffs))


@dataclass(frozen=True)
class AOIntegrals:
    overlap: np.ndarray
    kinetic: np.ndarray
    nuclear: np.ndarray
    eri: np.ndarray  # chemist (ij|kl)

    @property
    def core(self) -> np.ndarray:
        return self.kinetic + self.nuclear


def ao_integrals(g_a: ContractedGaussian, g_b: ContractedGaussian, bond: float | None = None) -> AOIntegrals:
    """Closed-form s-Gaussian integrals over the basis ``(g_a, g_b)``.

    Both functions double as the nuclear positions (unit charge each).
    ``bond`` (bohr) is only checked against the center separation.
    """
    basis = (g_a, g_b)
    centers = [np.asarray(g.center, dtype=float) for g in basis]
    if bond is not None:
        sep = float(np.linalg.norm(centers[0] - centers[1]))
        if not math.isclose(sep, bond, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(f"basis centers are {sep} bohr apart, not {bond}")
    n = len(basis)
    S = np.zeros((n, n))
    T = np.zeros((n, n))
    V = np.zeros((n, n))
    for i, j in product(range(n), repeat=2):
        ri, rj = centers[i], centers[j]
        r2 = float(np.sum((ri - rj) ** 2))
        for (a, ca), (b, cb) in product(basis[i].primitives(), basis[j].primitives()):
            w = ca * cb
            S[i, j] += w * _overlap_prim(a, b, r2)
            T[i, j] += w * _kinetic_prim(a, b, r2)
            for rc in centers:
                V[i, j] += w * _nuclear_prim(a, b, ri, rj, rc)
    eri = np.zeros((n, n, n, n))
    for i, j, k, l in product(range(n), repeat=4):
        if eri[i, j, k, l]:
            continue
        value = 0.0
        for (a, ca), (b, cb), (c, cc), (d, cd) in product(
            basis[i].primitives(), basis[j].primitives(),
            basis[k].primitives(), basis[l].primitives(),
        ):
            value += ca * cb * cc * cd * _eri_prim(
                a, b, c, d, centers[i], centers[j], centers[k], centers[l]
            )
        for idx in {(i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
                    (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i)}:
            eri[idx] = value
    return AOIntegrals(S, T, V, eri)


@dataclass(frozen=True)
class HartreeFockSolution:
    bond_length: float
    mo_coefficients: np.ndarray
    orbital_energies: np.ndarray
    hf_energy: float
    core_h_mo: np.ndarray
    eri_mo: np.ndarray  # physicist <ij|kl>
    nuclear_repulsion: float
    iterations: int = 0


def _inverse_sqrt(S: np.ndarray) -> np.ndarray:
    w, U = np.linalg.eigh(S)
    return U @ np.diag(w**-0.5) @ U.T


def _fix_signs(C: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each column made positive, for reproducible output
    C = C.copy()
    for k in range(C.shape[1]):
        pivot = np.argmax(np.abs(C[:, k]))
        if C[pivot, k] < 0:
            C[:, k] *= -1
    return C


def run_hartree_fock(d: float, *, max_iterations: int = 100, tol: float = 1e-10) -> HartreeFockSolution:
    """Restricted Hartree-Fock for H2 at bond length ``d`` in angstrom."""
    if not (MIN_BOND_ANGSTROM <= d <= MAX_BOND_ANGSTROM):
        raise BondLengthOutOfRange(
            f"bond length {d} A outside [{MIN_BOND_ANGSTROM}, {MAX_BOND_ANGSTROM}]"
        )
    bond = d * ANGSTROM_TO_BOHR
    g_a = sto3g_hydrogen((0.0, 0.0, 0.0))
    g_b = sto3g_hydrogen((0.0, 0.0, bond))
    ints = ao_integrals(g_a, g_b, bond)
    hcore = ints.core
    X = _inverse_sqrt(ints.overlap)
    e_nuc = 1.0 / bond

    P = np.zeros_like(hcore)
    e_old = None
    for iteration in range(1, max_iterations + 1):
        J = np.einsum("ijkl,kl->ij", ints.eri, P)
        K = np.einsum("ikjl,kl->ij", ints.eri, P)
        F = hcore + J - 0.5 * K
        eps, Cp = np.linalg.eigh(X.T @ F @ X)
        C = X @ Cp
        occ = C[:, :1]
        P = 2.0 * occ @ occ.T
        J = np.einsum("ijkl,kl->ij", ints.eri, P)
        K = np.einsum("ikjl,kl->ij", ints.eri, P)
        F = hcore + J - 0.5 * K
        e_elec = 0.5 * float(np.sum(P * (hcore + F)))
        if e_old is not None and abs(e_elec - e_old) < tol:
            break
        e_old = e_elec
    else:
        raise NonConvergence(f"RHF did not converge in {max_iterations} iterations at d={d}")

    C = _fix_signs(C)
    h_mo = C.T @ hcore @ C
    chem_mo = np.einsum("pi,qj,rk,sl,pqrs->ijkl", C, C, C, C, ints.eri)
    phys_mo = chem_mo.transpose(0, 2, 1, 3)  # <ij|kl> = (ik|jl)
    return HartreeFockSolution(
        bond_length=float(d),
        mo_coefficients=C,
        orbital_energies=eps,
        hf_energy=e_elec + e_nuc,
        core_h_mo=h_mo,
        eri_mo=phys_mo,
        nuclear_repulsion=e_nuc,
        iterations=iteration,
    )


def ladder(p: int, dagger: bool) -> tuple[PauliTerm, PauliTerm]:
    """Jordan-Wigner image of ``a_p`` (or ``a_p^dagger``) as two Pauli terms."""
    parity = [(q, "Z") for q in range(p)]
    sign = -0.5j if dagger else 0.5j
    return (
        PauliTerm(0.5, parity + [(p, "X")]),
        PauliTerm(sign, parity + [(p, "Y")]),
    )


def fermion_product(ops, n_qubits: int) -> QubitHamiltonian:
    """Qubit operator for a product of ladder operators ``[(p, dagger), ...]``."""
    terms = [PauliTerm(1.0)]
    for p, dagger in ops:
        factor = ladder(p, dagger)
        terms = [multiply_terms(t, f) for t in terms for f in factor]
    return canonicalize(QubitHamiltonian(n_qubits, tuple(terms)))


def spin_orbital_integrals(sol: HartreeFockSolution) -> tuple[np.ndarray, np.ndarray]:
    """Spin-orbital one-body ``h[p,q]`` and physicist two-body ``<pq|rs>``.

    Spin orbital ``2k`` is spatial orbital ``k`` spin up, ``2k+1`` spin down.
    """
    n = 2 * sol.core_h_mo.shape[0]
    h1 = np.zeros((n, n))
    h2 = np.zeros((n, n, n, n))
    for p, q in product(range(n), repeat=2):
        if p % 2 == q % 2:
            h1[p, q] = sol.core_h_mo[p // 2, q // 2]
    for p, q, r, s in product(range(n), repeat=4):
        if p % 2 == r % 2 and q % 2 == s % 2:
            h2[p, q, r, s] = sol.eri_mo[p // 2, q // 2, r // 2, s // 2]
    return h1, h2


def fermion_to_qubit(h1: np.ndarray, h2: np.ndarray, constant: float = 0.0,
                     cutoff: float = 1e-14) -> QubitHamiltonian:
    """Map ``sum h1[p,q] a+_p a_q + 1/2 sum <pq|rs> a+_p a+_q a_s a_r + constant``."""
    n = h1.shape[0]
    terms = [PauliTerm(constant)] if constant else []
    for p, q in product(range(n), repeat=2):
        if abs(h1[p, q]) > cutoff:
            op = fermion_product([(p, True), (q, False)], n)
            terms.extend(PauliTerm(h1[p, q] * t.coefficient, t.axes) for t in op)
    for p, q, r, s in product(range(n), repeat=4):
        if abs(h2[p, q, r, s]) > cutoff and p != q and r != s:
            op = fermion_product([(p, True), (q, True), (s, False), (r, False)], n)
            w = 0.5 * h2[p, q, r, s]
            terms.extend(PauliTerm(w * t.coefficient, t.axes) for t in op)
    return canonicalize(QubitHamiltonian(n, tuple(terms)))


def jordan_wigner(sol: HartreeFockSolution) -> QubitHamiltonian:
    h1, h2 = spin_orbital_integrals(sol)
    h = fermion_to_qubit(h1, h2, sol.nuclear_repulsion)
    worst = max((abs(t.coefficient.imag) for t in h), default=0.0)
    if worst >= HERMITICITY_TOLERANCE:
        raise HermiticityViolation(f"imaginary coefficient {worst:.3e} after mapping")
    real_terms = tuple(PauliTerm(t.coefficient.real, t.axes) for t in h)
    return QubitHamiltonian(h.n_qubits, real_terms)


@lru_cache(maxsize=1024)
def _cached_hamiltonian(d: float) -> QubitHamiltonian:
    return jordan_wigner(run_hartree_fock(d))


def build_h2_hamiltonian(d: float) -> QubitHamiltonian:
    """4-qubit H2 Hamiltonian (hartree, nuclear repulsion included) at ``d`` angstrom."""
    return _cached_hamiltonian(float(d))
