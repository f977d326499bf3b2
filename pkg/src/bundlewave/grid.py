"""1D spatial grids, multi-component grid functions and fibre inner products.

Two boundary treatments are supported:

* ``periodic`` -- N points on a ring of circumference L, spacing h = L/N,
  derivatives by Fourier (spectral) differentiation;
* ``reflecting`` -- N points spanning [0, L] endpoints included, spacing
  h = L/(N-1), derivatives by second-order central differences with the
  field treated as zero just outside the wall.

States are arrays of shape (components, N).  The discrete inner product is
h * sum_x  psi(x)^dagger . w(x) . chi(x) with a per-point Hermitian weight
w(x) (identity unless a fibre product says otherwise); it is conjugate-linear
in the first argument.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BOUNDARIES = ("periodic", "reflecting")


class GridError(ValueError):
    """Invalid grid construction or use of mismatched grids."""


@dataclass(frozen=True)
class SpatialGrid1D:
    """Uniform 1D grid with a boundary treatment."""

    npoints: int
    length: float
    boundary: str = "periodic"

    def __post_init__(self):
        if self.npoints < 2:
            raise GridError(f"need at least 2 grid points, got {self.npoints}")
        if self.length <= 0:
            raise GridError(f"grid length must be positive, got {self.length}")
        if self.boundary not in BOUNDARIES:
            raise GridError(
                f"unknown boundary {self.boundary!r}, expected one of {BOUNDARIES}"
            )

    @property
    def spacing(self) -> float:
        if self.boundary == "periodic":
            return self.length / self.npoints
        return self.length / (self.npoints - 1)

    @property
    def points(self) -> np.ndarray:
        return self.spacing * np.arange(self.npoints)

    @property
    def wavenumbers(self) -> np.ndarray:
        """Fourier wavenumbers in FFT ordering (periodic grids only)."""
        if self.boundary != "periodic":
            raise GridError("wavenumbers are defined for periodic grids only")
        return 2.0 * np.pi * np.fft.fftfreq(self.npoints, d=self.spacing)

    def nearest_index(self, x: float) -> int:
        if self.boundary == "periodic":
            return int(np.rint(x / self.spacing)) % self.npoints
        idx = int(np.rint(x / self.spacing))
        return min(max(idx, 0), self.npoints - 1)


def derivative_values(grid: SpatialGrid1D, values: np.ndarray, order: int = 1) -> np.ndarray:
    """Differentiate sampled values along the last axis, `order` times.

    Spectral differentiation on periodic grids; second-order central
    differences (zero just outside the walls) on reflecting grids.
    """
    if order < 0:
        raise GridError(f"derivative order must be non-negative, got {order}")
    values = np.asarray(values, dtype=complex)
    if values.shape[-1] != grid.npoints:
        raise GridError(
            f"value array has {values.shape[-1]} points, grid has {grid.npoints}"
        )
    if order == 0:
        return values.copy()
    if grid.boundary == "periodic":
        ik = (1j * grid.wavenumbers) ** order
        if order % 2 == 1 and grid.npoints % 2 == 0:
            # Odd derivatives of the unpaired Nyquist mode have no consistent
            # real representation; the standard choice drops it.
            ik[grid.npoints // 2] = 0.0
        return np.fft.ifft(ik * np.fft.fft(values, axis=-1), axis=-1)
    out = values
    for _ in range(order):
        out = _central_difference(grid, out)
    return out


def _central_difference(grid: SpatialGrid1D, values: np.ndarray) -> np.ndarray:
    h = grid.spacing
    padded = np.concatenate(
        [np.zeros(values.shape[:-1] + (1,)), values, np.zeros(values.shape[:-1] + (1,))],
        axis=-1,
    )
    return (padded[..., 2:] - padded[..., :-2]) / (2.0 * h)


def derivative_matrix(grid: SpatialGrid1D, order: int = 1) -> np.ndarray:
    """Dense N x N matrix of `derivative_values` acting on point values."""
    eye = np.eye(grid.npoints, dtype=complex)
    return derivative_values(grid, eye, order=order).T


@dataclass
class GridFunction:
    """A multi-component complex field sampled on a grid, shape (m, N)."""

    grid: SpatialGrid1D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=complex))
        if self.values.ndim != 2:
            raise GridError(f"values must be (components, npoints), got shape {self.values.shape}")
        if self.values.shape[1] != self.grid.npoints:
            raise GridError(
                f"values have {self.values.shape[1]} points, grid has {self.grid.npoints}"
            )

    @property
    def components(self) -> int:
        return self.values.shape[0]

    def component(self, i: int) -> np.ndarray:
        return self.values[i]

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())

    def flatten(self) -> np.ndarray:
        """Component-major flattening: index = component * N + point."""
        return self.values.reshape(-1)

    @classmethod
    def from_flat(cls, grid: SpatialGrid1D, flat: np.ndarray, components: int) -> "GridFunction":
        flat = np.asarray(flat, dtype=complex)
        if flat.size != components * grid.npoints:
            raise GridError(
                f"flat vector of size {flat.size} does not match "
                f"{components} components on {grid.npoints} points"
            )
        return cls(grid, flat.reshape(components, grid.npoints))

    def norm(self, fibre_product: "FibreProduct | None" = None) -> float:
        return float(np.sqrt(max(inner(self, self, fibre_product).real, 0.0)))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _require_same_grid(self, other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _require_same_grid(self, other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, scalar: complex) -> "GridFunction":
        return GridFunction(self.grid, self.values * scalar)

    __rmul__ = __mul__


def _require_same_grid(a: GridFunction, b: GridFunction):
    if a.grid != b.grid:
        raise GridError("grid functions live on different grids")
    if a.components != b.components:
        raise GridError(
            f"component mismatch: {a.components} vs {b.components}"
        )


@dataclass
class FibreProduct:
    """Per-point Hermitian positive-definite weight for the fibre product.

    `weights` is either a constant (m, m) matrix applied at every point or a
    per-point (N, m, m) array.
    """

    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=complex)
        if self.weights.ndim not in (2, 3):
            raise GridError(
                f"fibre product weights must be (m, m) or (N, m, m), got shape {self.weights.shape}"
            )
        if self.weights.shape[-1] != self.weights.shape[-2]:
            raise GridError("fibre product weight matrices must be square")
        self.validate()

    @property
    def components(self) -> int:
        return self.weights.shape[-1]

    def validate(self, tol: float = 1e-12):
        """Check Hermiticity exactly-ish and positive-definiteness per point."""
        w = self.weights if self.weights.ndim == 3 else self.weights[None, :, :]
        herm_defect = np.max(np.abs(w - np.conj(np.swapaxes(w, -1, -2))))
        if herm_defect > tol * max(1.0, np.max(np.abs(w))):
            raise GridError(f"fibre product weight is not Hermitian (defect {herm_defect:.3e})")
        eigs = np.linalg.eigvalsh(w)
        if np.min(eigs) <= 0:
            bad = int(np.argmin(np.min(eigs, axis=-1)))
            raise GridError(
                f"fibre product weight is not positive definite at point index {bad} "
                f"(min eigenvalue {np.min(eigs):.3e})"
            )

    def weight_at(self, npoints: int) -> np.ndarray:
        """Weights broadcast to shape (N, m, m)."""
        if self.weights.ndim == 3:
            if self.weights.shape[0] != npoints:
                raise GridError(
                    f"fibre product sampled at {self.weights.shape[0]} points, grid has {npoints}"
                )
            return self.weights
        return np.broadcast_to(self.weights, (npoints,) + self.weights.shape)

    @classmethod
    def identity(cls, components: int) -> "FibreProduct":
        return cls(np.eye(components))


def inner(a: GridFunction, b: GridFunction, fibre_product: FibreProduct | None = None) -> complex:
    """h * sum_x a(x)^dagger . w(x) . b(x), conjugate-linear in `a`."""
    _require_same_grid(a, b)
    h = a.grid.spacing
    if fibre_product is None:
        return complex(h * np.sum(np.conj(a.values) * b.values))
    if fibre_product.components != a.components:
        raise GridError(
            f"fibre product is {fibre_product.components}-dimensional, "
            f"state has {a.components} components"
        )
    w = fibre_product.weight_at(a.grid.npoints)
    wb = np.einsum("xij,jx->ix", w, b.values)
    return complex(h * np.sum(np.conj(a.values) * wb))


def discrete_delta(grid: SpatialGrid1D, x0: float) -> GridFunction:
    """Unit-mass discrete delta: 1/h at the grid point nearest x0."""
    values = np.zeros((1, grid.npoints), dtype=complex)
    values[0, grid.nearest_index(x0)] = 1.0 / grid.spacing
    return GridFunction(grid, values)
