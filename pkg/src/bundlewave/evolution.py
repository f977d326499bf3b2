"""Time stepping for first-order systems i*hbar dpsi/dt = H(t) psi.

Two interchangeable one-step schemes:

* Crank-Nicolson: (I + i dt H_mid / 2 hbar) psi' = (I - i dt H_mid / 2 hbar) psi,
  with H_mid evaluated at the interval midpoint.  Unconditionally stable,
  second order, exactly norm-conserving for Hermitian H and exactly
  form-conserving for pseudo-Hermitian H.
* Midpoint exponential: psi' = expm(-i dt H_mid / hbar) psi, exact for
  time-independent H; useful as an independent route when cross-checking.

`EvolutionOperator` materialises the propagator between lattice times as a
dense matrix so that composition, inversion, and derivative probes can be
taken literally; it refuses off-lattice times and oversized systems.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .grid import FibreProduct, GridFunction, SpatialGrid1D, inner
from .algebra import MatrixOperator
from .reduction import HamiltonianFactory

DENSE_STATE_LIMIT = 1024
STEP_STATE_LIMIT = 4096
METHODS = ("crank-nicolson", "midpoint-exponential")


class EvolutionError(RuntimeError):
    """Unstable, oversized, or ill-posed evolution request."""


def hamiltonian_dense(factory: HamiltonianFactory, grid: SpatialGrid1D, t: float = 0.0) -> np.ndarray:
    """Dense (m N, m N) matrix of the Hamiltonian at time t."""
    return factory.at(t).dense(grid, t)


def _check_method(method: str) -> None:
    if method not in METHODS:
        raise EvolutionError(f"unknown evolution method {method!r}, expected one of {METHODS}")


def step_matrix(
    factory: HamiltonianFactory,
    grid: SpatialGrid1D,
    t: float,
    dt: float,
    method: str = "crank-nicolson",
) -> np.ndarray:
    """Dense one-step propagator over [t, t + dt] (dt may be negative)."""
    _check_method(method)
    h_mid = hamiltonian_dense(factory, grid, t + dt / 2.0)
    if method == "midpoint-exponential":
        return scipy.linalg.expm((-1j * dt / factory.hbar) * h_mid)
    eye = np.eye(h_mid.shape[0], dtype=complex)
    coeff = 1j * dt / (2.0 * factory.hbar)
    return np.linalg.solve(eye + coeff * h_mid, eye - coeff * h_mid)


@dataclass
class _CrankNicolsonCache:
    lu: object = None
    minus: np.ndarray | None = None


def evolve(
    initial: GridFunction,
    factory: HamiltonianFactory,
    dt: float,
    steps: int,
    t0: float = 0.0,
    method: str = "crank-nicolson",
    callback=None,
) -> GridFunction:
    """March `steps` steps of size dt from t0; returns the final state.

    `callback(t, state)`, if given, is invoked after every step.  The factory
    matrices are LU-cached when the Hamiltonian is time-independent.
    """
    _check_method(method)
    if initial.components != factory.dimension:
        raise EvolutionError(
            f"state has {initial.components} components, factory wants {factory.dimension}"
        )
    size = factory.dimension * initial.grid.npoints
    if size > STEP_STATE_LIMIT:
        raise EvolutionError(f"stacked state size {size} exceeds limit {STEP_STATE_LIMIT}")

    grid = initial.grid
    psi = initial.flatten()
    if not np.all(np.isfinite(psi)):
        raise EvolutionError("initial state is outside the finite range")
    cache = _CrankNicolsonCache()
    static = not factory.time_dependent
    unit = None  # cached exponential propagator for static factories

    for k in range(steps):
        t_mid = t0 + (k + 0.5) * dt
        if method == "midpoint-exponential":
            if unit is None or not static:
                h_mid = hamiltonian_dense(factory, grid, t_mid)
                unit = scipy.linalg.expm((-1j * dt / factory.hbar) * h_mid)
            psi = unit @ psi
        else:
            if cache.lu is None or not static:
                h_mid = hamiltonian_dense(factory, grid, t_mid)
                eye = np.eye(h_mid.shape[0], dtype=complex)
                coeff = 1j * dt / (2.0 * factory.hbar)
                cache.lu = scipy.linalg.lu_factor(eye + coeff * h_mid)
                cache.minus = eye - coeff * h_mid
            psi = scipy.linalg.lu_solve(cache.lu, cache.minus @ psi)
        if not np.all(np.isfinite(psi)):
            raise EvolutionError(f"state left the finite range at step {k + 1}")
        if callback is not None:
            callback(t0 + (k + 1) * dt, GridFunction.from_flat(grid, psi, factory.dimension))

    return GridFunction.from_flat(grid, psi, factory.dimension)


class EvolutionOperator:
    """Dense propagators between the times t0 + k dt, k = 0..steps.

    Backward requests return the inverse of the forward product, so
    U(a <- b) U(b <- a) = 1 identically.
    """

    def __init__(
        self,
        factory: HamiltonianFactory,
        grid: SpatialGrid1D,
        dt: float,
        steps: int,
        t0: float = 0.0,
        method: str = "crank-nicolson",
    ):
        _check_method(method)
        size = factory.dimension * grid.npoints
        if size > DENSE_STATE_LIMIT:
            raise EvolutionError(
                f"dense evolution operator of size {size} exceeds limit {DENSE_STATE_LIMIT}"
            )
        if steps < 1 or dt == 0:
            raise EvolutionError("need at least one step of nonzero size")
        self.factory = factory
        self.grid = grid
        self.dt = float(dt)
        self.steps = int(steps)
        self.t0 = float(t0)
        self.method = method
        self.times = self.t0 + self.dt * np.arange(self.steps + 1)
        self._step_cache: dict[int, np.ndarray] = {}

    def time_index(self, t: float) -> int:
        """Index of a lattice time; off-lattice times are refused."""
        k = int(round((t - self.t0) / self.dt))
        if k < 0 or k > self.steps or abs(self.times[min(max(k, 0), self.steps)] - t) > 1e-9 * max(abs(self.dt), 1.0):
            raise EvolutionError(f"time {t} is not on the evolution lattice")
        return k

    def _step(self, k: int) -> np.ndarray:
        if k not in self._step_cache:
            if not self.factory.time_dependent and self._step_cache:
                self._step_cache[k] = next(iter(self._step_cache.values()))
            else:
                self._step_cache[k] = step_matrix(
                    self.factory, self.grid, self.times[k], self.dt, self.method
                )
        return self._step_cache[k]

    def matrix(self, t_from: float, t_to: float) -> np.ndarray:
        """Dense U(t_to <- t_from) between two lattice times."""
        i, j = self.time_index(t_from), self.time_index(t_to)
        size = self.factory.dimension * self.grid.npoints
        out = np.eye(size, dtype=complex)
        if j >= i:
            for k in range(i, j):
                out = self._step(k) @ out
            return out
        for k in range(j, i):
            out = self._step(k) @ out
        return np.linalg.inv(out)

    def apply(self, state: GridFunction, t_from: float, t_to: float) -> GridFunction:
        flat = self.matrix(t_from, t_to) @ state.flatten()
        return GridFunction.from_flat(self.grid, flat, self.factory.dimension)


@dataclass
class Observable:
    """A named sesquilinear observable <psi, A psi> on stacked states."""

    label: str
    operator: MatrixOperator
    fibre_product: FibreProduct | None = None

    def value(self, state: GridFunction, t: float = 0.0) -> complex:
        return inner(state, self.operator.apply(state, t), self.fibre_product)


def expectation(
    operator: MatrixOperator,
    state: GridFunction,
    t: float = 0.0,
    fibre_product: FibreProduct | None = None,
) -> complex:
    """<psi, A psi> / <psi, psi>."""
    applied = operator.apply(state, t)
    return inner(state, applied, fibre_product) / inner(state, state, fibre_product)


def kg_charge(state: GridFunction) -> float:
    """Conserved charge i * integral(phi* dphi/dt - phi dphi/dt*) dx of the
    free scalar field, evaluated on a two-component canonical state."""
    if state.components != 2:
        raise EvolutionError("the scalar-field charge needs a canonical two-component state")
    phi, phidot = state.values[0], state.values[1]
    density = 1j * (np.conj(phi) * phidot - phi * np.conj(phidot))
    return float(np.real(state.grid.spacing * np.sum(density)))
