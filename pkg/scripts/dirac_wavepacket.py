"""March a four-component wave packet and tabulate norm and centre position.

Example:

    python3 scripts/dirac_wavepacket.py --points 64 --steps 200 --dt 0.005
"""

import argparse
import sys

import numpy as np

from bundlewave.algebra import MatrixOperator
from bundlewave.evolution import evolve, expectation
from bundlewave.grid import GridFunction, SpatialGrid1D
from bundlewave.reduction import Potentials, dirac_hamiltonian


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=64)
    parser.add_argument("--length", type=float, default=2.0 * np.pi)
    parser.add_argument("--mass", type=float, default=1.0)
    parser.add_argument("--charge", type=float, default=0.0)
    parser.add_argument("--well-depth", type=float, default=0.0,
                        help="amplitude of a cosine scalar potential")
    parser.add_argument("--wavenumber", type=float, default=4.0)
    parser.add_argument("--width", type=float, default=0.5)
    parser.add_argument("--dt", type=float, default=0.005)
    parser.add_argument("--steps", type=int, default=200)
    parser.add_argument("--method", default="crank-nicolson",
                        choices=("crank-nicolson", "midpoint-exponential"))
    parser.add_argument("--every", type=int, default=10, help="report every k-th step")
    parser.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    grid = SpatialGrid1D(args.points, args.length)
    x = grid.points

    pots = None
    if args.well_depth != 0.0:
        pots = Potentials(scalar=args.well_depth * np.cos(2.0 * np.pi * x / grid.length))
    factory = dirac_hamiltonian(args.mass, args.charge, pots)

    values = np.zeros((4, grid.npoints), dtype=complex)
    packet = np.exp(-((x - grid.length / 2) ** 2) / (2 * args.width**2))
    values[0] = packet * np.exp(1j * args.wavenumber * x)
    state = GridFunction(grid, values)
    state = (1.0 / state.norm()) * state

    position = MatrixOperator.from_fields(x[:, None, None] * np.eye(4)[None, :, :])
    lines = ["step,time,norm,center"]

    def report(step: int, t: float, s: GridFunction) -> None:
        center = float(np.real(expectation(position, s, t)))
        lines.append(f"{step},{t:.6f},{s.norm():.12f},{center:.6f}")

    report(0, 0.0, state)
    counter = {"k": 0}

    def callback(t: float, s: GridFunction) -> None:
        counter["k"] += 1
        if counter["k"] % args.every == 0:
            report(counter["k"], t, s)

    evolve(state, factory, dt=args.dt, steps=args.steps, method=args.method,
           callback=callback)

    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
