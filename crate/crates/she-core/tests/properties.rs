//! Property-based invariants across the public API.

use proptest::prelude::*;
use she_core::{
    build_lattice, from_label, sample_noise, weighted_sup_norm, Boundary, Field, Lattice,
};

fn small_lattice() -> Lattice {
    build_lattice(2.0, 0.1, 0.004, 0.1, Boundary::DirichletZero).unwrap()
}

fn field_values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-10.0f64..10.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weighted_norm_shrinks_with_heavier_weight(
        values in field_values(41),
        lam1 in 0.0f64..3.0,
        extra in 0.0f64..3.0,
    ) {
        let lat = small_lattice();
        let f = Field::new(lat, values).unwrap();
        let n1 = weighted_sup_norm(&f, lam1).unwrap();
        let n2 = weighted_sup_norm(&f, lam1 + extra).unwrap();
        prop_assert!(n2 <= n1 + 1e-12, "norm grew: {n1} -> {n2}");
    }

    #[test]
    fn weighted_norm_is_absolutely_homogeneous(
        values in field_values(41),
        lam in 0.0f64..3.0,
        c in -5.0f64..5.0,
    ) {
        let lat = small_lattice();
        let f = Field::new(lat.clone(), values.clone()).unwrap();
        let scaled = Field::new(lat, values.iter().map(|v| c * v).collect()).unwrap();
        let lhs = weighted_sup_norm(&scaled, lam).unwrap();
        let rhs = c.abs() * weighted_sup_norm(&f, lam).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn weighted_norm_satisfies_triangle_inequality(
        a in field_values(41),
        b in field_values(41),
        lam in 0.0f64..3.0,
    ) {
        let lat = small_lattice();
        let fa = Field::new(lat.clone(), a.clone()).unwrap();
        let fb = Field::new(lat.clone(), b.clone()).unwrap();
        let sum = Field::new(lat, a.iter().zip(&b).map(|(x, y)| x + y).collect()).unwrap();
        let lhs = weighted_sup_norm(&sum, lam).unwrap();
        let rhs = weighted_sup_norm(&fa, lam).unwrap() + weighted_sup_norm(&fb, lam).unwrap();
        prop_assert!(lhs <= rhs + 1e-12, "{lhs} > {rhs}");
    }

    #[test]
    fn noise_rows_stream_identically(seed in any::<u64>(), i in 0usize..25) {
        let lat = small_lattice();
        let sheet = sample_noise(&lat, seed);
        let mut row = vec![0.0; lat.n_space()];
        she_core::noise::noise_row_into(&lat, seed, i, &mut row);
        prop_assert_eq!(&row[..], sheet.row(i));
    }

    #[test]
    fn noise_cells_add_over_time_splits(
        seed in any::<u64>(),
        split in 1usize..24,
        j in 0usize..41,
    ) {
        // Summing a column over [0, split) and [split, 25) matches the full
        // column sum exactly: the sheet is one fixed table of increments.
        let lat = small_lattice();
        let sheet = sample_noise(&lat, seed);
        let total: f64 = (0..25).map(|i| sheet.row(i)[j]).sum();
        let first: f64 = (0..split).map(|i| sheet.row(i)[j]).sum();
        let second: f64 = (split..25).map(|i| sheet.row(i)[j]).sum();
        prop_assert!((first + second - total).abs() <= 1e-12 * total.abs().max(1.0));
    }

    #[test]
    fn linear_coefficients_evaluate_like_their_label(
        a in -4.0f64..4.0,
        u in -50.0f64..50.0,
    ) {
        let label = format!("linear:{a}");
        let c = from_label(&label).unwrap();
        prop_assert_eq!(c.eval(0.3, -1.0, u), a * u);
    }

    #[test]
    fn summed_labels_evaluate_to_the_sum(
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        u in -20.0f64..20.0,
    ) {
        let sum = from_label(&format!("linear:{a}+const:{b}")).unwrap();
        let expect = a * u + b;
        prop_assert!((sum.eval(0.0, 0.0, u) - expect).abs() <= 1e-12 * expect.abs().max(1.0));
    }

    #[test]
    fn em_step_is_linear_in_zero_noise_drift(
        level in -3.0f64..3.0,
    ) {
        // One explicit step from a constant profile under pure drift lands
        // exactly on u + dt * b on the periodic lattice.
        let lat = build_lattice(2.0, 0.1, 0.004, 0.1, Boundary::Periodic).unwrap();
        let u0 = Field::constant(lat.clone(), level).unwrap();
        let zero_row = vec![0.0; lat.n_space()];
        let sigma = from_label("zero").unwrap();
        let b = from_label("const:1").unwrap();
        let next = she_core::em_step(&u0, &zero_row, &sigma, &b, 0.0).unwrap();
        for &v in next.values() {
            prop_assert!((v - (level + 0.004)).abs() <= 1e-15 * level.abs().max(1.0));
        }
    }
}
