//! Shared fixtures for the benchmark targets.

use she_core::{build_lattice, Boundary, Field, Lattice};

/// Desk-sized lattice used across the solver benchmarks: `[-5, 5]` with
/// `dx = 0.1`, `dt = 0.004`, horizon `0.5`.
pub fn desk_lattice() -> Lattice {
    build_lattice(5.0, 0.1, 0.004, 0.5, Boundary::DirichletZero).expect("valid fixture")
}

/// A smooth bump initial condition on the given lattice.
pub fn bump(lattice: Lattice) -> Field {
    Field::from_fn(lattice, |x| (-x * x / 2.0).exp()).expect("valid fixture")
}
