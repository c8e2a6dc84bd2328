"""Variational loop: ansatz, energy, parameter-shift gradient, Adam."""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .pauli import QubitHamiltonian
from .statevector import Gate, StateVector, apply_gate, apply_ry_cnot_layer, basis_state, expectation

SHIFT = math.pi / 2
H2_REFERENCE_BITS = (1, 1, 0, 0)


class AnsatzKind(str, enum.Enum):
    H2_DOUBLE_EXCITATION = "H2DoubleExcitation"
    HARDWARE_EFFICIENT = "HardwareEfficient"


@dataclass(frozen=True)
class AnsatzSpec:
    kind: AnsatzKind = AnsatzKind.H2_DOUBLE_EXCITATION
    n_qubits: int = 4
    layers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", AnsatzKind(self.kind))
        if self.kind is AnsatzKind.H2_DOUBLE_EXCITATION and self.n_qubits != 4:
            raise ValueError("the H2 double-excitation ansatz needs exactly 4 qubits")
        if self.n_qubits < 1 or self.layers < 1:
            raise ValueError("n_qubits and layers must be >= 1")

    @classmethod
    def h2(cls) -> "AnsatzSpec":
        return cls(AnsatzKind.H2_DOUBLE_EXCITATION, 4, 1)

    @classmethod
    def hardware_efficient(cls, n_qubits: int, layers: int = 2) -> "AnsatzSpec":
        return cls(AnsatzKind.HARDWARE_EFFICIENT, n_qubits, layers)

    @property
    def n_params(self) -> int:
        if self.kind is AnsatzKind.H2_DOUBLE_EXCITATION:
            return 1
        return self.layers * self.n_qubits


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    max_iterations: int = 200
    gradient_tolerance: float | None = None

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("betas must lie in [0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.gradient_tolerance is not None and self.gradient_tolerance <= 0:
            raise ValueError("gradient_tolerance must be positive when set")

    @classmethod
    def standard(cls, **overrides) -> "AdamConfig":
        """200 iterations at learning rate 0.01."""
        return cls(**{"max_iterations": 200, **overrides})

    @classmethod
    def hpc(cls, **overrides) -> "AdamConfig":
        """300-iteration variant used for the cluster benchmarks."""
        return cls(**{"max_iterations": 300, **overrides})


@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n_params: int) -> "AdamState":
        return cls(np.zeros(n_params), np.zeros(n_params), 0)


@dataclass
class VqeResult:
    theta_star: np.ndarray
    energy: float
    trajectory: list[float]
    iterations_run: int
    wall_time: float
    shift_evaluations: int = 0
    converged: bool = False
    gradient_norm: float = field(default=math.nan)

    @property
    def energy_evaluations(self) -> int:
        return len(self.trajectory)

    @property
    def circuit_evaluations(self) -> int:
        return self.energy_evaluations + self.shift_evaluations


def prepare_ansatz(spec: AnsatzSpec, theta) -> StateVector:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size != spec.n_params:
        raise ValueError(f"ansatz takes {spec.n_params} parameters, got {theta.size}")
    if spec.kind is AnsatzKind.H2_DOUBLE_EXCITATION:
        state = basis_state(4, H2_REFERENCE_BITS)
        return apply_gate(state, Gate.double_excitation(theta[0], (0, 1, 2, 3)))
    n = spec.n_qubits
    state = StateVector(n)
    for layer in range(spec.layers):
        apply_ry_cnot_layer(state, theta[layer * n:(layer + 1) * n])
    return state


def energy(theta, h: QubitHamiltonian, spec: AnsatzSpec) -> float:
    return expectation(prepare_ansatz(spec, theta), h)


def gradient(theta, h: QubitHamiltonian, spec: AnsatzSpec) -> np.ndarray:
    """Two-term parameter-shift gradient with shift pi/2.

    Exact here: every parameter enters through a single-frequency rotation.
    """
    theta = np.asarray(theta, dtype=float).reshape(-1)
    grad = np.empty(theta.size)
    for k in range(theta.size):
        plus = theta.copy()
        plus[k] += SHIFT
        minus = theta.copy()
        minus[k] -= SHIFT
        grad[k] = 0.5 * (energy(plus, h, spec) - energy(minus, h, spec))
    return grad


def adam_step(state: AdamState, grad, theta, config: AdamConfig = AdamConfig()):
    """One bias-corrected Adam update; returns ``(new_theta, new_state)``."""
    grad = np.asarray(grad, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if grad.shape != theta.shape or state.m.shape != theta.shape:
        raise ValueError("gradient, parameters and optimizer state must have equal shapes")
    t = state.t + 1
    m = config.beta1 * state.m + (1 - config.beta1) * grad
    v = config.beta2 * state.v + (1 - config.beta2) * grad * grad
    m_hat = m / (1 - config.beta1**t)
    v_hat = v / (1 - config.beta2**t)
    new_theta = theta - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon)
    return new_theta, AdamState(m, v, t)


def run_vqe(h: QubitHamiltonian, spec: AnsatzSpec | None = None,
            config: AdamConfig | None = None, initial_theta=None) -> VqeResult:
    """Minimize ``<psi(theta)|H|psi(theta)>`` with Adam from ``initial_theta`` (zeros by default).

    The trajectory holds the energy before every Adam step plus the energy at
    the final parameters, so ``trajectory[-1]`` is the reported energy. With
    ``gradient_tolerance`` set the loop stops as soon as ``max|g|`` drops
    below it, without taking that step.
    """
    spec = spec or AnsatzSpec.h2()
    config = config or AdamConfig()
    start = time.perf_counter()
    if initial_theta is None:
        theta = np.zeros(spec.n_params)
    else:
        theta = np.array(initial_theta, dtype=float).reshape(-1)
        if theta.size != spec.n_params:
            raise ValueError(f"initial_theta needs {spec.n_params} entries")
    opt = AdamState.zeros(spec.n_params)
    trajectory: list[float] = []
    shifts = 0
    converged = False
    g_norm = math.nan
    steps = 0

    def evaluate(th) -> float:
        value = energy(th, h, spec)
        if not math.isfinite(value):
            raise FloatingPointError(
                f"non-finite energy {value} at step {steps}, theta={th.tolist()}"
            )
        return value

    for _ in range(config.max_iterations):
        trajectory.append(evaluate(theta))
        grad = gradient(theta, h, spec)
        shifts += 2 * spec.n_params
        g_norm = float(np.max(np.abs(grad)))
        if config.gradient_tolerance is not None and g_norm < config.gradient_tolerance:
            converged = True
            break
        theta, opt = adam_step(opt, grad, theta, config)
        steps += 1
    if not converged:
        trajectory.append(evaluate(theta))
    return VqeResult(
        theta_star=theta,
        energy=trajectory[-1],
        trajectory=trajectory,
        iterations_run=steps,
        wall_time=time.perf_counter() - start,
        shift_evaluations=shifts,
        converged=converged,
        gradient_norm=g_norm,
    )
