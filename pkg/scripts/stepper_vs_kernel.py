"""Convergence of the rational stepper against exact kernel propagation.

The eigenbasis kernel propagates a static Hermitian system exactly, so the
difference to time stepping isolates the stepper's own error.  The table
shows the crank-nicolson error falling quadratically with the step size.

Example:

    python3 scripts/stepper_vs_kernel.py --points 32 --horizon 1.0
"""

import argparse
import sys

import numpy as np

from bundlewave.evolution import evolve
from bundlewave.green import EigenBasis, propagate_retarded
from bundlewave.grid import GridFunction, SpatialGrid1D
from bundlewave.reduction import schrodinger_hamiltonian


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=32)
    parser.add_argument("--length", type=float, default=2.0 * np.pi)
    parser.add_argument("--mass", type=float, default=1.0)
    parser.add_argument("--well-depth", type=float, default=0.4)
    parser.add_argument("--horizon", type=float, default=1.0)
    parser.add_argument("--coarsest-steps", type=int, default=25)
    parser.add_argument("--refinements", type=int, default=5)
    parser.add_argument("--width", type=float, default=0.6)
    parser.add_argument("--wavenumber", type=float, default=2.0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    grid = SpatialGrid1D(args.points, args.length)
    factory = schrodinger_hamiltonian(
        args.mass, potential=args.well_depth * np.cos(grid.points)
    )

    # A smooth packet keeps the excited energies moderate, so the phase error
    # of the stepper sits in its quadratic regime.
    x = grid.points
    packet = np.exp(-((x - args.length / 2) ** 2) / (2 * args.width**2))
    state = GridFunction(grid, (packet * np.exp(1j * args.wavenumber * x))[np.newaxis, :])
    state = (1.0 / state.norm()) * state

    basis = EigenBasis.from_factory(factory, grid)
    reference = propagate_retarded(basis, state, args.horizon, 0.0)

    sys.stdout.write("steps,dt,error,observed_order\n")
    previous = None
    for level in range(args.refinements):
        steps = args.coarsest_steps * 2**level
        dt = args.horizon / steps
        stepped = evolve(state, factory, dt=dt, steps=steps, method="crank-nicolson")
        error = (stepped - reference).norm()
        order = "" if previous is None else f"{np.log2(previous / error):.3f}"
        sys.stdout.write(f"{steps},{dt:.6e},{error:.6e},{order}\n")
        previous = error
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
