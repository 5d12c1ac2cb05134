use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use schro_maxlab::maximal::maximal_field;
use schro_maxlab::{
    Complex64, ExponentParams, FrequencyGrid, SpectralFunction, SpectralSampler, SpectrumKind, TimeSet,
};

fn sample(seed: u64) -> SpectralFunction {
    let grid = FrequencyGrid::new(1, 2.0 * PI, 10).unwrap();
    SpectralSampler::new(grid, SpectrumKind::default()).sample(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn times() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, 1..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn subadditive(s1 in any::<u64>(), s2 in any::<u64>(), ts in times()) {
        let (f, g) = (sample(s1), sample(s2));
        let e = TimeSet::from_points(ts).unwrap();
        let p = ExponentParams::new(2.0, 0.5, 1).unwrap();
        let mf = maximal_field(&f, &e, &p, 48).unwrap();
        let mg = maximal_field(&g, &e, &p, 48).unwrap();
        let ms = maximal_field(&f.add(&g).unwrap(), &e, &p, 48).unwrap();
        for ((s, a), b) in ms.max_values.iter().zip(&mf.max_values).zip(&mg.max_values) {
            prop_assert!(*s <= (a + b) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn homogeneous(seed in any::<u64>(), re in -3.0f64..3.0, im in -3.0f64..3.0, ts in times()) {
        let f = sample(seed);
        let c = Complex64::new(re, im);
        let e = TimeSet::from_points(ts).unwrap();
        let p = ExponentParams::new(2.0, 0.5, 1).unwrap();
        let base = maximal_field(&f, &e, &p, 48).unwrap();
        let scaled = maximal_field(&f.scale(c), &e, &p, 48).unwrap();
        for (s, b) in scaled.max_values.iter().zip(&base.max_values) {
            prop_assert!((s - c.norm() * b).abs() <= 1e-12 * (1.0 + c.norm() * b));
        }
    }

    #[test]
    fn monotone_in_the_time_set(seed in any::<u64>(), ts in times(), more in times()) {
        let f = sample(seed);
        let e = TimeSet::from_points(ts).unwrap();
        let bigger = e.union(&TimeSet::from_points(more).unwrap()).unwrap();
        let p = ExponentParams::new(2.0, 0.5, 1).unwrap();
        let small = maximal_field(&f, &e, &p, 48).unwrap();
        let large = maximal_field(&f, &bigger, &p, 48).unwrap();
        for (l, s) in large.max_values.iter().zip(&small.max_values) {
            prop_assert!(l >= s);
        }
        prop_assert!(large.l2_sq >= small.l2_sq);
    }
}
