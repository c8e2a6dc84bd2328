"""Pauli strings and weighted Pauli sums.

Qubit 0 is the most significant bit of a computational-basis index, so the
label ``|1100>`` on four qubits is basis index 12.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

DROP_TOLERANCE = 1e-12
HERMITICITY_TOLERANCE = 1e-10
MAX_DENSE_QUBITS = 12
MAX_DIAGONAL_QUBITS = 14


class TooManyQubits(ValueError):
    """Raised when a dense realization would exceed the oracle size guard."""


class PauliAxis(str, enum.Enum):
    I = "I"
    X = "X"
    Y = "Y"
    Z = "Z"


# single-qubit products: (a, b) -> (phase, axis) with a*b = phase * axis
_PRODUCT = {
    ("X", "X"): (1, "I"), ("Y", "Y"): (1, "I"), ("Z", "Z"): (1, "I"),
    ("X", "Y"): (1j, "Z"), ("Y", "Z"): (1j, "X"), ("Z", "X"): (1j, "Y"),
    ("Y", "X"): (-1j, "Z"), ("Z", "Y"): (-1j, "X"), ("X", "Z"): (-1j, "Y"),
}

_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _normalize_axes(axes) -> tuple[tuple[int, str], ...]:
    if isinstance(axes, Mapping):
        items = axes.items()
    else:
        items = axes
    out = {}
    for index, axis in items:
        index = int(index)
        if index < 0:
            raise ValueError(f"negative qubit index {index}")
        label = PauliAxis(axis).value
        if index in out:
            raise ValueError(f"qubit {index} listed twice")
        if label != "I":
            out[index] = label
    return tuple(sorted(out.items()))


@dataclass(frozen=True)
class PauliTerm:
    """A coefficient times a tensor product of single-qubit Paulis.

    ``axes`` is a sorted tuple of ``(qubit, axis)`` pairs; qubits not listed
    carry the identity. Any mapping or iterable of pairs is accepted and
    normalized on construction.
    """

    coefficient: complex
    axes: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        coeff = complex(self.coefficient)
        if not (np.isfinite(coeff.real) and np.isfinite(coeff.imag)):
            raise ValueError(f"non-finite coefficient {self.coefficient!r}")
        object.__setattr__(self, "coefficient", coeff)
        object.__setattr__(self, "axes", _normalize_axes(self.axes))

    @property
    def max_index(self) -> int:
        return self.axes[-1][0] if self.axes else -1

    @property
    def label(self) -> str:
        return "".join(f"{a}{i}" for i, a in self.axes)

    def masks(self, n_qubits: int) -> tuple[int, int, int]:
        """Return ``(x_mask, z_mask, n_y)`` for basis-index arithmetic.

        Uses ``Y = i X Z`` so the term acts as ``i**n_y * X^x_mask Z^z_mask``.
        """
        x_mask = z_mask = 0
        n_y = 0
        for index, axis in self.axes:
            bit = 1 << (n_qubits - 1 - index)
            if axis in ("X", "Y"):
                x_mask |= bit
            if axis in ("Z", "Y"):
                z_mask |= bit
            if axis == "Y":
                n_y += 1
        return x_mask, z_mask, n_y


def multiply_terms(a: PauliTerm, b: PauliTerm) -> PauliTerm:
    """Operator product ``a @ b`` as a single Pauli term."""
    phase: complex = 1
    merged = dict(a.axes)
    for index, axis in b.axes:
        if index not in merged:
            merged[index] = axis
            continue
        p, result = _PRODUCT[(merged[index], axis)]
        phase *= p
        if result == "I":
            del merged[index]
        else:
            merged[index] = result
    return PauliTerm(a.coefficient * b.coefficient * phase, merged)


def _sort_key(term: PauliTerm):
    return term.axes


@dataclass(frozen=True)
class QubitHamiltonian:
    n_qubits: int
    terms: tuple[PauliTerm, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        terms = tuple(self.terms)
        for term in terms:
            if term.max_index >= self.n_qubits:
                raise ValueError(
                    f"term {term.label} acts outside {self.n_qubits} qubits"
                )
        object.__setattr__(self, "terms", terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __add__(self, other: "QubitHamiltonian") -> "QubitHamiltonian":
        n = max(self.n_qubits, other.n_qubits)
        return QubitHamiltonian(n, self.terms + other.terms)

    def scaled(self, factor: complex) -> "QubitHamiltonian":
        return QubitHamiltonian(
            self.n_qubits,
            tuple(PauliTerm(t.coefficient * factor, t.axes) for t in self.terms),
        )

    def is_hermitian(self, tol: float = HERMITICITY_TOLERANCE) -> bool:
        return all(abs(t.coefficient.imag) < tol for t in canonicalize(self).terms)

    @cached_property
    def grouped(self) -> tuple[tuple[int, tuple[tuple[int, complex], ...]], ...]:
        """Terms grouped by X-flip mask: ``((x_mask, ((z_mask, phase*coeff), ...)), ...)``.

        Every term in a group permutes basis states the same way, so one
        gathered copy of the state serves the whole group.
        """
        groups: dict[int, list[tuple[int, complex]]] = {}
        for term in self.terms:
            x_mask, z_mask, n_y = term.masks(self.n_qubits)
            groups.setdefault(x_mask, []).append((z_mask, term.coefficient * 1j**n_y))
        return tuple((x, tuple(zs)) for x, zs in sorted(groups.items()))

    @cached_property
    def diagonal_groups(self) -> tuple[tuple[int, np.ndarray], ...]:
        """Per X-flip mask, the diagonal ``D[j] = sum_k c_k i**n_y (-1)**popcount(j & z_k)``.

        Costs one length-2**n vector per distinct flip mask, so this is only
        meant for small registers (used for the 4-qubit chemistry workload).
        """
        if self.n_qubits > MAX_DIAGONAL_QUBITS:
            raise TooManyQubits(
                f"diagonal cache limited to {MAX_DIAGONAL_QUBITS} qubits"
            )
        index = np.arange(2**self.n_qubits, dtype=np.int64)
        out = []
        for x_mask, zs in self.grouped:
            diag = np.zeros(index.shape, dtype=complex)
            for z_mask, coeff in zs:
                parity = (np.bitwise_count(index & z_mask) & 1).astype(np.int8)
                diag += coeff * (1 - 2 * parity)
            if not np.any(diag.imag):
                diag = diag.real.copy()
            out.append((x_mask, diag))
        return tuple(out)


def canonicalize(h: QubitHamiltonian) -> QubitHamiltonian:
    """Merge like terms, drop ``|c| < 1e-12`` and sort by ``(index, axis)`` sequence.

    The identity term, having an empty sequence, always sorts first.
    """
    merged: dict[tuple, complex] = {}
    for term in h.terms:
        merged[term.axes] = merged.get(term.axes, 0j) + term.coefficient
    kept = [
        PauliTerm(c, axes) for axes, c in merged.items() if abs(c) >= DROP_TOLERANCE
    ]
    kept.sort(key=_sort_key)
    return QubitHamiltonian(h.n_qubits, tuple(kept))


def _check_dense(n_qubits: int) -> None:
    if n_qubits > MAX_DENSE_QUBITS:
        raise TooManyQubits(
            f"dense realization limited to {MAX_DENSE_QUBITS} qubits, got {n_qubits}"
        )


def term_matrix(term: PauliTerm, n_qubits: int) -> np.ndarray:
    _check_dense(n_qubits)
    axes = dict(term.axes)
    out = np.array([[term.coefficient]], dtype=complex)
    for q in range(n_qubits):
        out = np.kron(out, _MATRICES[axes.get(q, "I")])
    return out


def to_dense_matrix(h: QubitHamiltonian) -> np.ndarray:
    _check_dense(h.n_qubits)
    dim = 2**h.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for term in h.terms:
        out += term_matrix(term, h.n_qubits)
    return out


def exact_ground_energy(h: QubitHamiltonian) -> float:
    """Lowest eigenvalue of the dense Hermitian matrix of ``h``."""
    matrix = to_dense_matrix(h)
    return float(np.linalg.eigvalsh(matrix)[0])


def hamiltonian(n_qubits: int, terms: Iterable) -> QubitHamiltonian:
    """Convenience constructor from ``(coefficient, axes)`` pairs."""
    built = tuple(t if isinstance(t, PauliTerm) else PauliTerm(*t) for t in terms)
    return QubitHamiltonian(n_qubits, built)


def to_text(h: QubitHamiltonian) -> str:
    """One line per term: ``<real> <imag> <axis><index>...``."""
    lines = []
    for term in h.terms:
        c = term.coefficient
        parts = [repr(float(c.real)), repr(float(c.imag))]
        parts.extend(f"{a}{i}" for i, a in term.axes)
        lines.append(" ".join(parts))
    return "\n".join(lines) + ("\n" if lines else "")


def from_text(text: str, n_qubits: int | None = None) -> QubitHamiltonian:
    terms = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) < 2:
            raise ValueError(f"line {lineno}: expected '<real> <imag> [axes...]'")
        coeff = complex(float(fields[0]), float(fields[1]))
        axes = []
        for token in fields[2:]:
            axes.append((int(token[1:]), token[0]))
        terms.append(PauliTerm(coeff, axes))
    if n_qubits is None:
        n_qubits = max((t.max_index for t in terms), default=0) + 1
    return QubitHamiltonian(n_qubits, tuple(terms))
