#![allow(dead_code)]

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;
use sis_invariance::spectrum::indicator_of;
use sis_invariance::{Complex64, FrequencyGrid, PiecewiseConstantSpectrum, SampledSpectrum};

/// Piecewise-constant spectra on `[-4, 4)` with breakpoints in `(1/8)ℤ`.
pub const DENOMINATOR: i64 = 8;
pub const HALF_WIDTH: i64 = 4;
pub const CELLS: usize = (2 * HALF_WIDTH * DENOMINATOR) as usize;

pub fn chi(grid: &FrequencyGrid, intervals: &[(i64, i64)]) -> SampledSpectrum {
    indicator_of(intervals).sample(grid).unwrap()
}

/// Spectrum taking `values[c]` on `[-4 + c/8, -4 + (c+1)/8)`.
pub fn from_cells(values: &[Complex64]) -> PiecewiseConstantSpectrum {
    assert_eq!(values.len(), CELLS);
    let breaks: Vec<Ratio<i64>> =
        (0..=CELLS as i64).map(|c| Ratio::new(c - HALF_WIDTH * DENOMINATOR, DENOMINATOR)).collect();
    PiecewiseConstantSpectrum::new(&breaks, values).unwrap()
}

fn small_complex<R: Rng>(rng: &mut R) -> Complex64 {
    loop {
        let z = Complex64::new(rng.gen_range(-3..=3) as f64, rng.gen_range(-3..=3) as f64);
        if z.norm() > 0.0 {
            return z;
        }
    }
}

/// Integer unit `j ∈ [-4, 4)` containing cell `c`.
fn unit_of(c: usize) -> i64 {
    c as i64 / DENOMINATOR - HALF_WIDTH
}

/// Random values on a random union of cells.
fn random_cells<R: Rng>(rng: &mut R, allowed: impl Fn(i64) -> bool) -> Vec<Complex64> {
    let density = rng.gen_range(0.1..0.6);
    let mut v: Vec<Complex64> = (0..CELLS)
        .map(|c| if allowed(unit_of(c)) && rng.gen_bool(density) { small_complex(rng) } else { Complex64::new(0.0, 0.0) })
        .collect();
    if v.iter().all(|z| z.norm() == 0.0) {
        let candidates: Vec<usize> = (0..CELLS).filter(|&c| allowed(unit_of(c))).collect();
        v[*candidates.choose(rng).unwrap()] = small_complex(rng);
    }
    v
}

/// How a random generator set is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Design {
    /// Independent random cells.
    Free,
    /// Each generator lives on integer units of one residue class mod `n0`.
    Residue,
    /// A residue design mixed by a random integer matrix.
    Mixed,
    /// `f` and `μ f` with `μ` ℤ-periodic.
    Multiplier,
}

pub const DESIGNS: [Design; 4] = [Design::Free, Design::Residue, Design::Mixed, Design::Multiplier];

pub fn random_set<R: Rng>(rng: &mut R, design: Design) -> Vec<PiecewiseConstantSpectrum> {
    let m = rng.gen_range(1..=3);
    let cells: Vec<Vec<Complex64>> = match design {
        Design::Free => (0..m).map(|_| random_cells(rng, |_| true)).collect(),
        Design::Residue | Design::Mixed => {
            let n0 = *[2i64, 3, 4, 6].choose(rng).unwrap();
            let base: Vec<Vec<Complex64>> = (0..m)
                .map(|_| {
                    let r = rng.gen_range(0..n0);
                    random_cells(rng, |j| j.rem_euclid(n0) == r)
                })
                .collect();
            if design == Design::Residue {
                base
            } else {
                (0..m)
                    .map(|_| {
                        let w: Vec<f64> = (0..m).map(|_| rng.gen_range(-2..=2) as f64).collect();
                        (0..CELLS).map(|c| (0..m).map(|j| base[j][c] * w[j]).sum()).collect()
                    })
                    .collect()
            }
        }
        Design::Multiplier => {
            let f = random_cells(rng, |_| true);
            let mut out = vec![f.clone()];
            for _ in 1..m {
                let mu: Vec<Complex64> = (0..DENOMINATOR).map(|_| small_complex(rng)).collect();
                out.push((0..CELLS).map(|c| f[c] * mu[c % DENOMINATOR as usize]).collect());
            }
            out
        }
    };
    cells.iter().map(|v| from_cells(v)).collect()
}

pub fn sample_all(set: &[PiecewiseConstantSpectrum], grid: &FrequencyGrid) -> Vec<SampledSpectrum> {
    set.iter().map(|s| s.sample(grid).unwrap()).collect()
}
