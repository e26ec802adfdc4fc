mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_set, sample_all, DESIGNS};
use sis_invariance::fiber::dimension_function;
use sis_invariance::frames::frame_bounds;
use sis_invariance::invariance::{cutoff_set, rank_sum_test};
use sis_invariance::oracle::invariance_oracle;
use sis_invariance::{Complex64, FrequencyGrid, SampledSpectrum};

const TOL: f64 = 1e-8;

fn grid() -> FrequencyGrid {
    FrequencyGrid::new(32, 4).unwrap()
}

fn draw_on(seed: u64, design: usize, grid: &FrequencyGrid) -> Vec<SampledSpectrum> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_all(&random_set(&mut rng, DESIGNS[design % DESIGNS.len()]), grid)
}

fn draw(seed: u64, design: usize) -> Vec<SampledSpectrum> {
    draw_on(seed, design, &grid())
}

fn verdicts(phi: &[SampledSpectrum]) -> Vec<bool> {
    (2..=6).map(|n| rank_sum_test(phi, n, &grid(), TOL).unwrap().invariant).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adding_a_generator_never_lowers_the_dimension(seed in any::<u64>(), design in 0usize..4) {
        let phi = draw(seed, design);
        let extra = draw(seed ^ 0x9e37_79b9, 0);
        let before = dimension_function(&phi, &grid(), TOL).unwrap();
        let mut more = phi.clone();
        more.push(extra[0].clone());
        let after = dimension_function(&more, &grid(), TOL).unwrap();
        for (a, b) in before.ranks.iter().zip(&after.ranks) {
            prop_assert!(b >= a && *b <= a + 1);
        }
    }

    #[test]
    fn unitary_mixing_preserves_verdicts(seed in any::<u64>(), design in 0usize..4, theta in 0.0..std::f64::consts::TAU) {
        let phi = draw(seed, design);
        prop_assume!(phi.len() >= 2);
        let (c, s) = (Complex64::new(theta.cos(), 0.0), Complex64::from_polar(theta.sin(), 0.7));
        let mut mixed = phi.clone();
        mixed[0] = &phi[0].scale(c) + &phi[1].scale(-s.conj());
        mixed[1] = &phi[0].scale(s) + &phi[1].scale(c);
        prop_assert_eq!(verdicts(&phi), verdicts(&mixed));
        let (a, b) = (frame_bounds(&phi, &grid(), TOL).unwrap(), frame_bounds(&mixed, &grid(), TOL).unwrap());
        prop_assert!((a.upper - b.upper).abs() <= 1e-9 * a.upper);
    }

    #[test]
    fn scaling_a_generator_preserves_verdicts(seed in any::<u64>(), design in 0usize..4, exp in -6i32..=6) {
        let phi = draw(seed, design);
        let mut scaled = phi.clone();
        scaled[0] = phi[0].scale(Complex64::new(10f64.powi(exp), 0.0));
        prop_assert_eq!(verdicts(&phi), verdicts(&scaled));
    }

    #[test]
    fn frame_bounds_ignore_generator_order(seed in any::<u64>(), design in 0usize..4) {
        let phi = draw(seed, design);
        let mut reversed = phi.clone();
        reversed.reverse();
        let (a, b) = (frame_bounds(&phi, &grid(), TOL).unwrap(), frame_bounds(&reversed, &grid(), TOL).unwrap());
        prop_assert!((a.lower - b.lower).abs() <= 1e-9 * a.upper);
        prop_assert!((a.upper - b.upper).abs() <= 1e-9 * a.upper);
    }

    #[test]
    fn cutoffs_partition_every_generator(seed in any::<u64>(), design in 0usize..4, n in 1usize..=9) {
        let phi = draw(seed, design);
        let set = cutoff_set(&phi, n).unwrap();
        for (j, s) in phi.iter().enumerate() {
            for idx in 0..s.values().len() {
                let hits: Vec<Complex64> =
                    set.families.iter().map(|f| f[j].values()[idx]).filter(|v| *v != Complex64::new(0.0, 0.0)).collect();
                prop_assert!(hits.len() <= 1);
                prop_assert_eq!(hits.first().copied().unwrap_or_default(), s.values()[idx]);
            }
        }
    }

    #[test]
    fn oracle_agrees_with_rank_test(seed in any::<u64>(), design in 0usize..4, n in 2usize..=6) {
        let g = FrequencyGrid::new(24, 4).unwrap();
        let phi = draw_on(seed, design, &g);
        let rank = rank_sum_test(&phi, n, &g, TOL).unwrap().invariant;
        let oracle = invariance_oracle(&phi, n, &g, 1e-6).unwrap().invariant;
        prop_assert_eq!(rank, oracle);
    }
}
