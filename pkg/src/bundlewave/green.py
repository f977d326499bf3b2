"""Retarded kernels dual to the time steppers.

For a time-independent Hermitian H with weighted-orthonormal eigenpairs
(E_a, v_a), the retarded kernel

    G(t, s) = theta(t - s) * (1 / i hbar) * sum_a v_a v_a^dag exp(-i E_a (t-s)/hbar)

recovers the evolved state through psi(t) = i hbar h G(t, s) psi(s), h the
grid spacing.  theta(0) = 0: the kernel vanishes on and before the source
time, and propagation requests with t <= s are refused rather than silently
evaluated.

The four-component kernel carries an extra right factor of the time Clifford
generator and weights its source accordingly.  The second-order scalar field
gets a sine kernel over the spatial frequency operator plus a two-slot form
whose first slot is a source-time derivative, taken by central difference
over adjacent source slices.  A Born iteration builds kernels of a perturbed
operator from the free ones by trapezoidal time quadrature, with the
coincidence limit Id/(i hbar h) at the interval ends.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import kron_component_matrix, dirac_gammas
from .grid import GridFunction, SpatialGrid1D, derivative_matrix
from .reduction import HamiltonianFactory
from .evolution import hamiltonian_dense, DENSE_STATE_LIMIT

MAX_BORN_ORDER = 3


class GreenError(RuntimeError):
    """Retardation violations, missing slices, or unusable spectra."""


# ---------------------------------------------------------------------------
# Eigenbasis kernels for first-order Hermitian systems


@dataclass
class EigenBasis:
    """Weighted-orthonormal eigenpairs of a dense Hermitian Hamiltonian.

    Modes are columns normalised so that h * v_a^dag v_b = delta_ab, hence
    h * sum_a v_a v_a^dag = Id.
    """

    energies: np.ndarray
    modes: np.ndarray
    grid: SpatialGrid1D
    dimension: int
    hbar: float

    @classmethod
    def from_dense(
        cls,
        h_dense: np.ndarray,
        grid: SpatialGrid1D,
        dimension: int,
        hbar: float = 1.0,
        label: str = "dense",
        hermiticity_tol: float = 1e-10,
    ) -> "EigenBasis":
        size = dimension * grid.npoints
        if h_dense.shape != (size, size):
            raise GreenError(
                f"dense Hamiltonian of shape {h_dense.shape} does not fit "
                f"{dimension} components on {grid.npoints} points"
            )
        if size > DENSE_STATE_LIMIT:
            raise GreenError(f"eigenbasis of size {size} exceeds limit {DENSE_STATE_LIMIT}")
        scale = max(1.0, float(np.max(np.abs(h_dense))))
        defect = float(np.max(np.abs(h_dense - h_dense.conj().T)))
        if defect > hermiticity_tol * scale:
            raise GreenError(
                f"Hamiltonian {label!r} is not Hermitian (defect {defect:.3e}); "
                f"eigenbasis kernels need a Hermitian operator"
            )
        energies, vectors = np.linalg.eigh(0.5 * (h_dense + h_dense.conj().T))
        modes = vectors / np.sqrt(grid.spacing)
        return cls(energies, modes, grid, dimension, hbar)

    @classmethod
    def from_factory(
        cls,
        factory: HamiltonianFactory,
        grid: SpatialGrid1D,
        t: float = 0.0,
        hermiticity_tol: float = 1e-10,
    ) -> "EigenBasis":
        return cls.from_dense(
            hamiltonian_dense(factory, grid, t),
            grid,
            factory.dimension,
            factory.hbar,
            factory.label,
            hermiticity_tol,
        )

    def completeness_defect(self) -> float:
        size = self.modes.shape[0]
        resolved = self.grid.spacing * (self.modes @ self.modes.conj().T)
        return float(np.max(np.abs(resolved - np.eye(size))))

    def propagator(self, t: float, s: float) -> np.ndarray:
        """Unitary U(t <- s) = sum_a v_a exp(-i E_a (t-s)/hbar) v_a^dag * h."""
        phases = np.exp(-1j * self.energies * (t - s) / self.hbar)
        return self.grid.spacing * ((self.modes * phases) @ self.modes.conj().T)


def retarded_kernel(basis: EigenBasis, t: float, s: float) -> np.ndarray:
    """The one-component-convention retarded kernel; zero for t <= s."""
    size = basis.modes.shape[0]
    if t <= s:
        return np.zeros((size, size), dtype=complex)
    return basis.propagator(t, s) / (1j * basis.hbar * basis.grid.spacing)


def retarded_kernel_dirac(basis: EigenBasis, t: float, s: float) -> np.ndarray:
    """Four-component kernel: the plain kernel times the time generator."""
    if basis.dimension != 4:
        raise GreenError("the four-component kernel needs a four-component basis")
    gamma0 = kron_component_matrix(dirac_gammas().matrix(0), basis.grid.npoints)
    return retarded_kernel(basis, t, s) @ gamma0


def propagate_retarded(
    basis: EigenBasis, state: GridFunction, t: float, s: float, dirac: bool = False
) -> GridFunction:
    """psi(t) = i hbar h G(t,s) psi(s), with the source weighted by the time
    generator in the four-component convention."""
    if t <= s:
        raise GreenError(f"retarded propagation needs t > s, got t={t}, s={s}")
    source = state.flatten()
    if dirac:
        gamma0 = kron_component_matrix(dirac_gammas().matrix(0), basis.grid.npoints)
        kernel = retarded_kernel_dirac(basis, t, s)
        source = gamma0 @ source
    else:
        kernel = retarded_kernel(basis, t, s)
    flat = (1j * basis.hbar * basis.grid.spacing) * (kernel @ source)
    return GridFunction.from_flat(basis.grid, flat, basis.dimension)


def chain_kernels(
    later: np.ndarray, earlier: np.ndarray, hbar: float, spacing: float
) -> np.ndarray:
    """G(t, s) = i hbar h G(t, u) G(u, s) for t > u > s."""
    return (1j * hbar * spacing) * (later @ earlier)


# ---------------------------------------------------------------------------
# Second-order scalar field


@dataclass
class ScalarFieldKernel:
    """Sine kernel of d^2 phi/dt^2 = -(Omega^2) phi (+ constant-potential
    phase), Omega^2 = -c^2 d^2/dx^2 + (m c^2/hbar)^2 + constant shifts.

    `frequencies` and `modes` diagonalise the dense spatial operator with the
    same weighted normalisation as `EigenBasis`.
    """

    frequencies: np.ndarray
    modes: np.ndarray
    grid: SpatialGrid1D
    hbar: float
    charge: float = 0.0
    scalar_potential: float = 0.0

    @classmethod
    def build(
        cls,
        grid: SpatialGrid1D,
        mass: float,
        hbar: float = 1.0,
        c: float = 1.0,
        charge: float = 0.0,
        scalar_potential: float = 0.0,
    ) -> "ScalarFieldKernel":
        """Diagonalise Omega^2 on the grid; the scalar potential must be a
        constant here (a uniform phase is the only closed form kept exact)."""
        if grid.npoints > DENSE_STATE_LIMIT:
            raise GreenError(f"kernel of size {grid.npoints} exceeds limit {DENSE_STATE_LIMIT}")
        # Composed first derivatives, matching the momentum-squared of the
        # canonical two-component operator.
        d1 = derivative_matrix(grid, order=1)
        omega_sq = -(c * c) * (d1 @ d1) + ((mass * c * c / hbar) ** 2) * np.eye(grid.npoints)
        omega_sq = 0.5 * (omega_sq + omega_sq.T)
        evals, vectors = np.linalg.eigh(omega_sq)
        if np.min(evals) < -1e-9:
            raise GreenError(f"spatial frequency operator has negative modes ({np.min(evals):.3e})")
        freqs = np.sqrt(np.clip(evals, 0.0, None))
        return cls(freqs, vectors / np.sqrt(grid.spacing), grid, hbar, charge, scalar_potential)

    def _phase(self, delta: float) -> complex:
        return np.exp(-1j * self.charge * self.scalar_potential * delta / self.hbar)

    def scalar(self, t: float, s: float) -> np.ndarray:
        """g(t, s); zero for t <= s."""
        n = self.grid.npoints
        if t <= s:
            return np.zeros((n, n), dtype=complex)
        delta = t - s
        sine = delta * np.sinc(self.frequencies * delta / np.pi)  # sin(w d)/w
        return self._phase(delta) * ((self.modes * sine) @ self.modes.conj().T)

    def scalar_rate(self, t: float, s: float) -> np.ndarray:
        """Analytic -d g / d(source time), for cross-checks of the sliced form."""
        n = self.grid.npoints
        if t <= s:
            return np.zeros((n, n), dtype=complex)
        delta = t - s
        sine = delta * np.sinc(self.frequencies * delta / np.pi)
        cosine = np.cos(self.frequencies * delta)
        inner = (self.modes * cosine) @ self.modes.conj().T
        softened = (self.modes * sine) @ self.modes.conj().T
        return self._phase(delta) * (inner - (1j * self.charge * self.scalar_potential / self.hbar) * softened)

    def vector(self, t: float, s: float, source_step: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
        """Two-slot kernel (acting on (phi, dphi/dt)) with the first slot's
        source-time derivative taken by central difference over the adjacent
        source slices s -+ source_step."""
        if t <= s:
            raise GreenError(f"the two-slot kernel needs t > s, got t={t}, s={s}")
        if t - s <= source_step:
            raise GreenError(
                f"adjacent source slices at spacing {source_step} leave the causal "
                f"region for t - s = {t - s}; shrink the step"
            )
        g_before = self.scalar(t, s - source_step)
        g_after = self.scalar(t, s + source_step)
        g_mid = self.scalar(t, s)
        return vector_from_slices(
            g_before, g_mid, g_after, source_step, self.charge, self.scalar_potential, self.hbar
        )

    def propagate(self, state: GridFunction, t: float, s: float, source_step: float = 1e-6) -> np.ndarray:
        """phi(t) = h * (first_slot phi(s) + g dphi/dt(s)) on a canonical state."""
        if state.components != 2:
            raise GreenError("scalar-field propagation needs a canonical two-component state")
        first, second = self.vector(t, s, source_step)
        return self.grid.spacing * (first @ state.values[0] + second @ state.values[1])


def vector_from_slices(
    g_before: np.ndarray | None,
    g_mid: np.ndarray | None,
    g_after: np.ndarray | None,
    source_step: float,
    charge: float = 0.0,
    scalar_potential: float = 0.0,
    hbar: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Assemble (-d_s g - (2e / i hbar) V g, g) from three source slices."""
    for name, slice_ in (("before", g_before), ("mid", g_mid), ("after", g_after)):
        if slice_ is None:
            raise GreenError(f"missing {name!r} source slice for the two-slot kernel")
    if g_before.shape != g_mid.shape or g_after.shape != g_mid.shape:
        raise GreenError("source slices disagree in shape")
    rate = -(g_after - g_before) / (2.0 * source_step)
    first = rate - (2.0 * charge / (1j * hbar)) * scalar_potential * g_mid
    return first, g_mid


# ---------------------------------------------------------------------------
# Born iteration


def born_kernel(
    basis: EigenBasis,
    perturbation: np.ndarray,
    t: float,
    s: float,
    order: int = 1,
    quad_points: int = 65,
) -> np.ndarray:
    """Order-k kernel of H0 + W from the free kernel of H0 by iterating

        G_k(t, s) = G_0(t, s) + h * integral_s^t G_0(t, s') W G_{k-1}(s', s) ds'

    with trapezoidal quadrature and the coincidence limit Id/(i hbar h) at
    the interval ends."""
    if not t > s:
        raise GreenError(f"the Born iteration needs t > s, got t={t}, s={s}")
    if order < 0 or order > MAX_BORN_ORDER:
        raise GreenError(f"Born order must lie in 0..{MAX_BORN_ORDER}, got {order}")
    if quad_points < 3:
        raise GreenError("need at least three quadrature points")
    size = basis.modes.shape[0]
    if perturbation.shape != (size, size):
        raise GreenError(
            f"perturbation shape {perturbation.shape} does not match state size {size}"
        )
    h = basis.grid.spacing
    coincidence = np.eye(size, dtype=complex) / (1j * basis.hbar * h)
    times = np.linspace(s, t, quad_points)
    dt = times[1] - times[0]

    def free(a: float, b: float) -> np.ndarray:
        return coincidence.copy() if a <= b else retarded_kernel(basis, a, b)

    # level[j] = G_level(times[j], s); j = 0 carries the coincidence limit.
    level = [free(tj, s) for tj in times]
    level[0] = coincidence
    for _ in range(order):
        new = []
        for j, tj in enumerate(times):
            if j == 0:
                new.append(coincidence)
                continue
            integrand = [free(tj, times[i]) @ perturbation @ level[i] for i in range(j + 1)]
            weights = np.full(j + 1, dt)
            weights[0] = weights[-1] = dt / 2.0
            integral = sum(w * g for w, g in zip(weights, integrand))
            new.append(free(tj, s) + h * integral)
        level = new
    return level[-1]


def green_morphism(
    kernel: np.ndarray,
    frame_at_target: np.ndarray,
    frame_at_source: np.ndarray,
    npoints: int,
) -> np.ndarray:
    """Kernel seen through fibre frames l: l(t')^{-1} G(t', t) l(t)."""
    left = kron_component_matrix(np.linalg.inv(frame_at_target), npoints)
    right = kron_component_matrix(frame_at_source, npoints)
    return left @ kernel @ right
