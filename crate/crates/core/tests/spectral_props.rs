use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use schro_maxlab::{
    Complex64, ExponentParams, FrequencyGrid, SpectralFunction, SpectralSampler, SpectrumKind,
};

fn sample(dim: usize, m: usize, seed: u64) -> SpectralFunction {
    let grid = FrequencyGrid::new(dim, 2.0 * PI, m).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpectralSampler::new(grid, SpectrumKind::Gaussian { decay: 0.5 }).sample(&mut rng)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn propagation_preserves_every_sobolev_norm(
        seed in any::<u64>(), t in -5.0f64..5.0, s in -2.0f64..3.0, a in 0.5f64..4.0, dim in 1usize..3,
    ) {
        let f = sample(dim, 12, seed);
        let p = ExponentParams::new(a, 0.5, dim).unwrap();
        let g = f.propagate(t, &p).unwrap();
        prop_assert!(rel(g.h_s_norm(s), f.h_s_norm(s)) < 1e-12);
    }

    #[test]
    fn semigroup_law(seed in any::<u64>(), t in -3.0f64..3.0, u in -3.0f64..3.0, a in 0.5f64..4.0) {
        let f = sample(1, 16, seed);
        let p = ExponentParams::new(a, 0.5, 1).unwrap();
        let two_step = f.propagate(u, &p).unwrap().propagate(t, &p).unwrap();
        let one_step = f.propagate(t + u, &p).unwrap();
        let diff = two_step.sub(&one_step).unwrap().h_s_norm(0.0);
        prop_assert!(diff <= 1e-12 * f.h_s_norm(0.0) * (1.0 + (t.abs() + u.abs()) * 16f64.powf(a)));
    }

    #[test]
    fn lattice_matches_direct_evaluation(seed in any::<u64>(), t in 0.0f64..1.0, dim in 1usize..3) {
        let f = sample(dim, 6, seed);
        let p = ExponentParams::new(2.0, 0.5, dim).unwrap();
        let res = 16;
        let field = f.evaluate_lattice(t, &p, res).unwrap();
        let points: Vec<f64> = (0..field.values.len())
            .flat_map(|i| field.point(i)[..dim].to_vec())
            .collect();
        let direct = f.evaluate(t, &p, &points).unwrap();
        let scale = f.h_s_norm(0.0);
        for (l, d) in field.values.iter().zip(&direct) {
            prop_assert!((l - d).norm() < 1e-12 * scale);
        }
    }

    #[test]
    fn lattice_round_trip(seed in any::<u64>(), extra in 0usize..9, dim in 1usize..3) {
        let f = sample(dim, 5, seed);
        let field = f.evaluate_lattice(0.0, &ExponentParams::new(2.0, 0.5, dim).unwrap(), 11 + extra).unwrap();
        let back = SpectralFunction::from_lattice(*f.grid(), &field).unwrap();
        let diff = back.sub(&f).unwrap().h_s_norm(0.0);
        prop_assert!(diff < 1e-12 * f.h_s_norm(0.0));
        prop_assert!(rel(field.l2_norm_sq(), f.l2_norm_sq()) < 1e-12);
    }

    #[test]
    fn dyadic_pieces_reassemble(seed in any::<u64>(), s in 0.0f64..2.0) {
        let f = sample(2, 9, seed);
        let pieces = f.dyadic_decompose();
        let mut sum = SpectralFunction::zeros(*f.grid());
        let mut energy = 0.0;
        for (k, piece) in pieces.iter().enumerate() {
            sum = sum.add(piece).unwrap();
            energy += piece.h_s_norm(s).powi(2);
            let (lo, hi) = if k == 0 { (0.0, 1.0) } else { (2f64.powi(k as i32 - 1), 2f64.powi(k as i32)) };
            for (i, c) in piece.coeffs().iter().enumerate() {
                if c.norm() > 0.0 {
                    let r = f.grid().norm(i);
                    prop_assert!((k == 0 || r > lo) && r <= hi);
                }
            }
        }
        prop_assert_eq!(sum, f.clone());
        prop_assert!(rel(energy, f.h_s_norm(s).powi(2)) < 1e-12);
    }

    #[test]
    fn bessel_lowers_regularity(seed in any::<u64>(), s in 0.0f64..2.0, r in -1.0f64..1.0) {
        let f = sample(1, 10, seed);
        prop_assert!(rel(f.bessel_apply(s).h_s_norm(r + s), f.h_s_norm(r)) < 1e-12);
    }

    #[test]
    fn lipschitz_bound_holds(seed in any::<u64>(), t in 0.0f64..1.0, dt in 0.0f64..0.1) {
        let f = sample(1, 8, seed);
        let p = ExponentParams::new(2.0, 0.5, 1).unwrap();
        let bound = f.lipschitz_time_bound(t, t + dt, &p);
        let a = f.evaluate_lattice(t, &p, 40).unwrap();
        let b = f.evaluate_lattice(t + dt, &p, 40).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).norm() <= bound * (1.0 + 1e-12) + 1e-15);
        }
    }
}

#[test]
fn identity_at_time_zero() {
    for seed in 0..20 {
        let f = sample(2, 7, seed);
        let p = ExponentParams::new(1.7, 0.5, 2).unwrap();
        assert_eq!(f.propagate(0.0, &p).unwrap(), f);
    }
}

#[test]
fn constant_mode_is_stationary() {
    let grid = FrequencyGrid::new(1, 2.0 * PI, 4).unwrap();
    let f = SpectralFunction::sample_symbol(grid, |xi| {
        if xi[0] == 0.0 { Complex64::new(2.0 * PI, 0.0) } else { Complex64::new(0.0, 0.0) }
    })
    .unwrap();
    let p = ExponentParams::new(2.0, 0.5, 1).unwrap();
    for v in f.evaluate(0.37, &p, &[0.0, 1.0, -2.0]).unwrap() {
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }
}
