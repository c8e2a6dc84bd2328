"""Dense state-vector simulator.

Amplitudes are stored as a flat complex128 array of length ``2**n``. Kernels
work on reshaped views of that array (qubit ``q`` is tensor axis ``q``, which
is the MSB-first convention of :mod:`vqe_forge.pauli`), so no gate is ever
expanded into a ``2**n x 2**n`` matrix.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .pauli import MAX_DIAGONAL_QUBITS, QubitHamiltonian

BYTES_PER_AMPLITUDE = 16
IMAGINARY_TOLERANCE = 1e-10


class GateKind(str, enum.Enum):
    PAULI_X = "PauliX"
    RY = "RY"
    CNOT = "CNOT"
    DOUBLE_EXCITATION = "DoubleExcitation"


_ARITY = {
    GateKind.PAULI_X: 1,
    GateKind.RY: 1,
    GateKind.CNOT: 2,
    GateKind.DOUBLE_EXCITATION: 4,
}
_PARAMETRIC = {GateKind.RY, GateKind.DOUBLE_EXCITATION}


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    wires: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        kind = GateKind(self.kind)
        wires = tuple(int(w) for w in self.wires)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "wires", wires)
        if len(wires) != _ARITY[kind]:
            raise ValueError(f"{kind.value} takes {_ARITY[kind]} wires, got {wires}")
        if len(set(wires)) != len(wires):
            raise ValueError(f"repeated wire in {wires}")
        if kind in _PARAMETRIC:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{kind.value} needs a finite angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ValueError(f"{kind.value} takes no angle")

    @classmethod
    def x(cls, wire: int) -> "Gate":
        return cls(GateKind.PAULI_X, (wire,))

    @classmethod
    def ry(cls, angle: float, wire: int) -> "Gate":
        return cls(GateKind.RY, (wire,), angle)

    @classmethod
    def cnot(cls, control: int, target: int) -> "Gate":
        return cls(GateKind.CNOT, (control, target))

    @classmethod
    def double_excitation(cls, angle: float, wires: Sequence[int]) -> "Gate":
        return cls(GateKind.DOUBLE_EXCITATION, tuple(wires), angle)


def gate_matrix(gate: Gate) -> np.ndarray:
    """The ``2**w x 2**w`` unitary on the gate's own wires (first wire = MSB)."""
    if gate.kind is GateKind.PAULI_X:
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if gate.kind is GateKind.CNOT:
        return np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
        )
    c, s = math.cos(gate.angle / 2), math.sin(gate.angle / 2)
    if gate.kind is GateKind.RY:
        return np.array([[c, -s], [s, c]], dtype=complex)
    m = np.eye(16, dtype=complex)
    m[0b1100, 0b1100] = c
    m[0b0011, 0b1100] = s
    m[0b1100, 0b0011] = -s
    m[0b0011, 0b0011] = c
    return m


class StateVector:
    """``2**n_qubits`` complex amplitudes, mutated in place by :func:`apply_gate`."""

    __slots__ = ("n_qubits", "amplitudes", "_spare")

    def __init__(self, n_qubits: int, amplitudes: np.ndarray | None = None):
        if n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        self.n_qubits = int(n_qubits)
        dim = 1 << self.n_qubits
        if amplitudes is None:
            amplitudes = np.zeros(dim, dtype=np.complex128)
            amplitudes[0] = 1.0
        else:
            amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128)
            if amplitudes.shape != (dim,):
                raise ValueError(
                    f"expected {dim} amplitudes for {n_qubits} qubits, got {amplitudes.shape}"
                )
        self.amplitudes = amplitudes
        self._spare: np.ndarray | None = None

    def spare(self) -> np.ndarray:
        # scratch buffer for out-of-place kernels; reusing it avoids a fresh
        # large allocation (and its page faults) on every gate
        if self._spare is None or self._spare.shape != self.amplitudes.shape:
            self._spare = np.empty_like(self.amplitudes)
        return self._spare

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        a = self.amplitudes
        return a.real * a.real + a.imag * a.imag

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def __repr__(self) -> str:
        return f"StateVector(n_qubits={self.n_qubits})"


def basis_state(n_qubits: int, bits: Sequence[int]) -> StateVector:
    if len(bits) != n_qubits:
        raise ValueError(f"got {len(bits)} bits for {n_qubits} qubits")
    index = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"bits must be 0/1, got {b!r}")
        index = (index << 1) | int(b)
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(n_qubits, amps)


def _split(state: StateVector, wire: int) -> np.ndarray:
    n = state.n_qubits
    return state.amplitudes.reshape(1 << wire, 2, 1 << (n - wire - 1))


def _slot(n: int, fixed: dict[int, int]) -> tuple:
    # length-1 slices keep the result a view even when every axis is fixed
    return tuple(
        slice(fixed[q], fixed[q] + 1) if q in fixed else slice(None) for q in range(n)
    )


def _rotate(lo: np.ndarray, hi: np.ndarray, c: float, s: float) -> None:
    # (lo, hi) <- (c*lo - s*hi, s*lo + c*hi), in place on views
    keep = lo.copy()
    lo *= c
    lo -= s * hi
    hi *= c
    hi += s * keep


_SMALL_ROW = 64


def _real_block_matmul(src: np.ndarray, dst: np.ndarray, m: np.ndarray, wire: int,
                       width: int, n: int, unit: int = 2) -> None:
    # dst <- m on wires [wire, wire + width) of an n-bit register stored as
    # ``unit`` floats per basis index (2 for a complex float view); a real
    # matrix acts on real and imaginary parts alike
    dim = 1 << width
    trailing = unit << (n - wire - width)  # floats per sub-block
    if dim * trailing <= _SMALL_ROW:
        # one GEMM against kron(m, I) beats many tiny batched products
        rows = (-1, dim * trailing)
        np.matmul(src.reshape(rows), np.kron(m, np.eye(trailing)).T, out=dst.reshape(rows))
    else:
        shape = (1 << wire, dim, trailing)
        np.matmul(m, src.reshape(shape), out=dst.reshape(shape))


def _apply_real_block(state: StateVector, m: np.ndarray, wire: int, width: int = 1) -> None:
    flat = state.amplitudes.view(np.float64)
    _real_block_matmul(flat, state.spare().view(np.float64), m, wire, width, state.n_qubits)
    state.amplitudes, state._spare = state._spare, state.amplitudes


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Apply ``gate`` to ``state`` and return ``state``.

    The state object is updated in place. Its amplitude buffer may be swapped
    with an internal scratch buffer, so references to ``state.amplitudes``
    taken before the call must not be relied on afterwards.
    """
    n = state.n_qubits
    if max(gate.wires) >= n:
        raise ValueError(f"wires {gate.wires} outside a {n}-qubit register")
    kind = gate.kind
    if kind is GateKind.PAULI_X:
        v = _split(state, gate.wires[0])
        v[:] = v[:, ::-1, :].copy()
    elif kind is GateKind.RY:
        _apply_real_block(state, gate_matrix(gate).real, gate.wires[0])
    elif kind is GateKind.CNOT:
        control, target = gate.wires
        t = state.tensor()
        off = _slot(n, {control: 1, target: 0})
        on = _slot(n, {control: 1, target: 1})
        keep = t[off].copy()
        t[off] = t[on]
        t[on] = keep
    else:
        a, b, c, d = gate.wires
        t = state.tensor()
        src = t[_slot(n, {a: 1, b: 1, c: 0, d: 0})]
        dst = t[_slot(n, {a: 0, b: 0, c: 1, d: 1})]
        half = gate.angle / 2
        _rotate(src, dst, math.cos(half), math.sin(half))
    return state


RY_BLOCK = 4


def apply_ry_layer(state: StateVector, angles: Sequence[float], wires: Sequence[int] | None = None) -> StateVector:
    """Apply ``RY(angles[k])`` on ``wires[k]`` for every k, fused for memory traffic.

    Runs of adjacent wires are grouped ``RY_BLOCK`` at a time and applied as one
    ``2**RY_BLOCK``-square Kronecker block, so the state is streamed once per
    group instead of once per gate. Same result as applying the gates in turn.
    """
    n = state.n_qubits
    wires = list(range(n)) if wires is None else [int(w) for w in wires]
    angles = [float(a) for a in angles]
    if len(angles) != len(wires):
        raise ValueError("need one angle per wire")
    if len(set(wires)) != len(wires) or any(not 0 <= w < n for w in wires):
        raise ValueError(f"wires {wires} must be distinct and inside a {n}-qubit register")
    pending = sorted(zip(wires, angles))
    while pending:
        group = [pending.pop(0)]
        while pending and len(group) < RY_BLOCK and pending[0][0] == group[-1][0] + 1:
            group.append(pending.pop(0))
        block = np.ones((1, 1))
        for _, angle in group:
            block = np.kron(block, gate_matrix(Gate.ry(angle, 0)).real)
        _apply_real_block(state, block, group[0][0], len(group))
    return state


CNOT_BLOCK = 4


@lru_cache(maxsize=None)
def _ladder_permutation(width: int) -> np.ndarray:
    # source index for every target index of CNOT(0,1) CNOT(1,2) ... on width+1 wires
    dim = 1 << (width + 1)
    target = np.empty(dim, dtype=np.intp)
    for i in range(dim):
        bits = [(i >> (width - k)) & 1 for k in range(width + 1)]
        for k in range(1, width + 1):
            bits[k] ^= bits[k - 1]
        target[i] = int("".join(map(str, bits)), 2)
    perm = np.argsort(target)
    perm.flags.writeable = False
    return perm


def apply_cnot_ladder(state: StateVector, start: int = 0, stop: int | None = None) -> StateVector:
    """Apply ``CNOT(q, q+1)`` for ``q = start .. stop-2`` in order.

    Consecutive CNOTs are fused ``CNOT_BLOCK`` at a time into one permutation
    pass over the state.
    """
    n = state.n_qubits
    stop = n if stop is None else stop
    if not 0 <= start < stop <= n:
        raise ValueError(f"ladder [{start}, {stop}) outside a {n}-qubit register")
    q = start
    while q < stop - 1:
        width = min(CNOT_BLOCK, stop - 1 - q)
        perm = _ladder_permutation(width)
        shape = (1 << q, 1 << (width + 1), 2 << (n - q - width - 1))
        src = state.amplitudes.view(np.float64).reshape(shape)
        out = state.spare().view(np.float64).reshape(shape)
        np.take(src, perm, axis=1, out=out)
        state.amplitudes, state._spare = state._spare, state.amplitudes
        q += width
    return state


CHUNK_QUBITS = 15


@lru_cache(maxsize=None)
def _ladder_matrix(n_wires: int) -> np.ndarray:
    perm = np.eye(1 << n_wires)
    if n_wires > 1:
        perm = perm[_ladder_permutation(n_wires - 1)]
    perm.flags.writeable = False
    return perm


def _ry_product(angles: Sequence[float], identity_first: bool = False) -> np.ndarray:
    # kron of RY matrices (optionally behind a 2x2 identity), built by broadcasting
    out = np.eye(2) if identity_first else np.ones((1, 1))
    for angle in angles:
        c, s = math.cos(angle / 2), math.sin(angle / 2)
        r = np.array([[c, -s], [s, c]])
        d = out.shape[0]
        out = (out[:, None, :, None] * r[None, :, None, :]).reshape(2 * d, 2 * d)
    return out


def _layer_windows(angles: Sequence[float], start: int, stop: int) -> list[tuple[int, int, np.ndarray]]:
    # (first wire, width, matrix) for wires [start, stop); every window but the
    # very first also covers the wire before it, the control of its first CNOT
    windows = []
    for a in range(start, stop, CNOT_BLOCK):
        b = min(a + CNOT_BLOCK, stop)
        if a == 0:
            windows.append((0, b, _ladder_matrix(b) @ _ry_product(angles[a:b])))
        else:
            rot = _ry_product(angles[a:b], identity_first=True)
            windows.append((a - 1, b - a + 1, _ladder_matrix(b - a + 1) @ rot))
    return windows


BLOCK_FLOATS = 1 << 16


def _column_width(high: int, local: int) -> int:
    # columns per block so that a (2**high, width) block stays cache sized
    return min(2 << local, max(2, BLOCK_FLOATS >> high))


def _run_windows(src: np.ndarray, spare: np.ndarray, windows, n: int, unit: int, pick: int = 0) -> np.ndarray:
    # apply windows in turn, ping-ponging between two buffers; returns the result buffer
    a, b = src, spare
    for wire, width, m in windows:
        if isinstance(m, list):
            m = m[pick]
        _real_block_matmul(a, b, m, wire, width, n, unit)
        a, b = b, a
    return a


def apply_ry_cnot_layer(state: StateVector, angles: Sequence[float]) -> StateVector:
    """One hardware-efficient layer: ``RY(angles[q])`` on every wire, then
    ``CNOT(q, q+1)`` for ``q = 0 .. n-2``.

    RYs and CNOTs are fused into windows of up to ``CNOT_BLOCK + 1`` wires. The
    state is viewed as a ``(2**high, 2**CHUNK_QUBITS)`` matrix: windows on the
    high wires run over cache-sized column blocks, the rest over one row at a
    time, so each layer streams the state twice whatever its size.
    """
    n = state.n_qubits
    if len(angles) != n:
        raise ValueError(f"need {n} angles, got {len(angles)}")
    high = max(0, n - CHUNK_QUBITS)
    local = n - high
    rows = state.amplitudes.view(np.float64).reshape(1 << high, 2 << local)

    high_windows = _layer_windows(angles, 0, high)
    if high_windows:
        width = _column_width(high, local)
        buf = np.empty((1 << high, width))
        spare = np.empty_like(buf)
        for col in range(0, 2 << local, width):
            np.copyto(buf, rows[:, col:col + width])
            rows[:, col:col + width] = _run_windows(buf, spare, high_windows, high, width)

    windows = _layer_windows(angles, high, n)
    if high and windows:
        # the first local window is block diagonal in the last high wire
        wire, width, m = windows[0]
        d = 1 << (width - 1)
        windows[0] = (0, width - 1, [m[:d, :d], m[d:, d:]])
        windows[1:] = [(w - high, wd, mat) for w, wd, mat in windows[1:]]
    buf = np.empty(2 << local)
    spare = np.empty_like(buf)
    for c in range(1 << high):
        np.copyto(buf, rows[c])
        rows[c] = _run_windows(buf, spare, windows, local, 2, c & 1)
    return state


def apply_circuit(state: StateVector, gates: Sequence[Gate]) -> StateVector:
    for gate in gates:
        apply_gate(state, gate)
    return state


def _expectation_diagonal(amps: np.ndarray, h: QubitHamiltonian) -> complex:
    total = 0j
    index = None
    for x_mask, diag in h.diagonal_groups:
        if x_mask == 0:
            probs = amps.real * amps.real + amps.imag * amps.imag
            total += np.dot(probs, diag)
            continue
        if index is None:
            index = np.arange(amps.size, dtype=np.int64)
        total += np.vdot(amps[index ^ x_mask], diag * amps)
    return complex(total)


_SIGN_SPLIT = 12


@lru_cache(maxsize=64)
def _parity_signs(bits: int, masks: tuple[int, ...]) -> np.ndarray:
    index = np.arange(1 << bits, dtype=np.int64)
    parity = np.bitwise_count(index[:, None] & np.array(masks, dtype=np.int64)[None, :]) & 1
    signs = 1.0 - 2.0 * parity
    signs.flags.writeable = False
    return signs


def _z_group_expectation(weights: np.ndarray, zs, n: int) -> complex:
    """``sum_k c_k sum_j w_j (-1)**popcount(j & z_k)`` as one matrix product.

    The sign factorizes over the high and low halves of the index, so the
    weights reshaped to ``(2**h, 2**low)`` are contracted against a
    small table of low-half signs and then against the high-half signs.
    """
    low = min(n, _SIGN_SPLIT)
    coeffs = np.array([c for _, c in zs])
    s_low = _parity_signs(low, tuple(z & ((1 << low) - 1) for z, _ in zs))
    s_high = _parity_signs(n - low, tuple(z >> low for z, _ in zs))
    partial = weights.reshape(1 << (n - low), 1 << low) @ s_low
    return complex(np.einsum("ck,ck,k->", partial, s_high, coeffs))


def _probability_z_expectation(state: StateVector, zs) -> complex:
    """Z-only group against ``|psi|**2``, computed one cached chunk at a time."""
    n = state.n_qubits
    high = max(0, n - CHUNK_QUBITS)
    low = min(n - high, _SIGN_SPLIT)
    coeffs = np.array([c for _, c in zs])
    s_low = _parity_signs(low, tuple(z & ((1 << low) - 1) for z, _ in zs))
    s_high = _parity_signs(n - low, tuple(z >> low for z, _ in zs))
    chunks = state.amplitudes.reshape(1 << high, -1)
    per_chunk = chunks.shape[1] >> low  # rows of s_high covered by one chunk
    partial = np.empty((1 << (n - low), len(zs)))
    for c in range(1 << high):
        a = chunks[c]
        probs = a.real * a.real + a.imag * a.imag
        np.matmul(probs.reshape(per_chunk, 1 << low), s_low, out=partial[c * per_chunk:(c + 1) * per_chunk])
    return complex(np.einsum("ck,ck,k->", partial, s_high, coeffs))


def _x_string_overlap(state: StateVector, x_mask: int) -> float:
    """``<psi|X...X|psi>``, which is real for any state."""
    n = state.n_qubits
    flip = tuple(
        slice(None, None, -1) if x_mask >> (n - 1 - q) & 1 else slice(None) for q in range(n)
    )
    return float(np.vdot(state.tensor()[flip].reshape(-1), state.amplitudes).real)


def _single_x_overlaps(state: StateVector, wires: Sequence[int]) -> dict[int, float]:
    """``<psi|X_q|psi>`` for each wire, in cache-sized blocks of the state."""
    n = state.n_qubits
    high = max(0, n - CHUNK_QUBITS)
    local = n - high
    rows = state.amplitudes.view(np.float64).reshape(1 << high, 2 << local)
    sums = dict.fromkeys(wires, 0.0)
    upper = [q for q in wires if q < high]
    if upper:
        width = _column_width(high, local)
        for col in range(0, 2 << local, width):
            block = rows[:, col:col + width]
            for q in upper:
                fv = block.reshape(1 << q, 2, 1 << (high - q - 1), width)
                sums[q] += np.einsum("ijk,ijk->", fv[:, 0], fv[:, 1])
    lower = [q for q in wires if q >= high]
    for c in range(1 << high if lower else 0):
        chunk = rows[c]
        for q in lower:
            fv = chunk.reshape(1 << (q - high), 2, 2 << (n - q - 1))
            sums[q] += np.einsum("ij,ij->", fv[:, 0, :], fv[:, 1, :])
    return {q: 2.0 * float(v) for q, v in sums.items()}


def _expectation_tensor(state: StateVector, h: QubitHamiltonian) -> complex:
    n = state.n_qubits
    t = state.tensor()
    total = 0j
    singles: dict[int, complex] = {}
    for x_mask, zs in h.grouped:
        if x_mask == 0:
            total += _probability_z_expectation(state, zs)
            continue
        elif len(zs) == 1 and zs[0][0] == 0:
            if x_mask & (x_mask - 1) == 0:
                singles[n - x_mask.bit_length()] = zs[0][1]
            else:
                total += zs[0][1] * _x_string_overlap(state, x_mask)
            continue
        else:
            flip = tuple(
                slice(None, None, -1) if x_mask >> (n - 1 - q) & 1 else slice(None)
                for q in range(n)
            )
            weights = np.conj(t[flip].reshape(-1)) * state.amplitudes
        total += _z_group_expectation(weights, zs, n)
    if singles:
        for q, value in _single_x_overlaps(state, list(singles)).items():
            total += singles[q] * value
    return complex(total)


def expectation(state: StateVector, h: QubitHamiltonian) -> float:
    """``Re <psi|H|psi>`` evaluated term by term from basis-index masks."""
    if h.n_qubits != state.n_qubits:
        raise ValueError(
            f"Hamiltonian has {h.n_qubits} qubits, state has {state.n_qubits}"
        )
    if state.n_qubits <= MAX_DIAGONAL_QUBITS:
        value = _expectation_diagonal(state.amplitudes, h)
    else:
        value = _expectation_tensor(state, h)
    if abs(value.imag) >= IMAGINARY_TOLERANCE:
        raise ValueError(
            f"expectation has imaginary part {value.imag:.3e}; Hamiltonian is not Hermitian"
        )
    return float(value.real)


def memory_estimate(n_qubits: int) -> int:
    """State-vector bytes for complex128 storage: ``2**n * 16``."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    return (1 << n_qubits) * BYTES_PER_AMPLITUDE
