//! Invariance under translations by `1/n`.
//!
//! For `n ≥ 1` the line splits into the `nℤ`-periodic cells
//! `B_k = ⋃_j [k + nj, k + 1 + nj)`, `k = 0..n`. The cutoff `P_k φ` keeps
//! `φ̂` on `B_k` only. A space `S(Φ)` is `1/n`-invariant exactly when
//! `rank G_Φ(ω) = Σ_k rank G_{P_kΦ}(ω)` for almost every `ω`; on the grid
//! "almost every" becomes "every evaluated cell".

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::{check_rel_tol, common_grid, flush_small, gramian_at, gramian_rank, rank_field};
use crate::spectrum::{FrequencyGrid, SampledSpectrum};

/// Default largest `n` tried by [`invariance_order`].
pub const DEFAULT_N_MAX: usize = 16;

/// Whether `ω ∈ B_k` for the partition of order `n`.
pub fn in_partition(n: usize, k: usize, omega: f64) -> Result<bool> {
    check_cell(n, k)?;
    Ok(residue(omega.floor() as i64, n) == k)
}

fn check_cell(n: usize, k: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("partition order n must be ≥ 1".into()));
    }
    if k >= n {
        return Err(Error::IndexOutOfRange { index: k, len: n });
    }
    Ok(())
}

/// `k mod n` in `0..n`.
pub(crate) fn residue(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// `P_k φ`: the samples of `φ̂·χ_{B_k}`.
pub fn cutoff(s: &SampledSpectrum, n: usize, k: usize) -> Result<SampledSpectrum> {
    check_cell(n, k)?;
    // ω_i ∈ [0, 1), so ⌊ω_i + j⌋ = j on the lattice.
    Ok(s.map(|_, j, v| if residue(j, n) == k { v } else { Complex64::zero() }))
}

/// Cutoff families `Φ^k = P_k Φ`, `k = 0..n`.
#[derive(Clone, Debug)]
pub struct CutoffSet {
    pub n: usize,
    pub families: Vec<Vec<SampledSpectrum>>,
}

pub fn cutoff_set(phi: &[SampledSpectrum], n: usize) -> Result<CutoffSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("partition order n must be ≥ 1".into()));
    }
    let families = (0..n).map(|k| phi.iter().map(|s| cutoff(s, n, k)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
    Ok(CutoffSet { n, families })
}

/// Ranks at the first cell where the rank-sum identity fails.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellDiagnostic {
    pub omega_index: usize,
    pub omega: f64,
    pub rank: usize,
    pub rank_sum: usize,
    pub cutoff_ranks: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceVerdict {
    pub n: usize,
    pub invariant: bool,
    /// Number of cells where `rank G ≠ Σ_k rank G^k`.
    pub failing_cells: usize,
    pub first_failure: Option<CellDiagnostic>,
    /// `rank G ≤ Σ_k rank G^k` at every cell.
    pub subadditive: bool,
    pub rel_tol: f64,
    #[serde(skip)]
    pub ranks: Vec<usize>,
    #[serde(skip)]
    pub rank_sums: Vec<usize>,
}

impl InvarianceVerdict {
    /// Fraction of cells failing the rank-sum identity.
    pub fn failing_fraction(&self) -> f64 {
        self.failing_cells as f64 / self.ranks.len().max(1) as f64
    }

    /// CSV with columns `omega,rank,rank_sum`.
    pub fn write_csv<W: std::io::Write>(&self, grid: &FrequencyGrid, mut out: W) -> std::io::Result<()> {
        writeln!(out, "omega,rank,rank_sum")?;
        for (i, (r, s)) in self.ranks.iter().zip(&self.rank_sums).enumerate() {
            writeln!(out, "{},{},{}", grid.omega(i), r, s)?;
        }
        Ok(())
    }
}

/// Generators with small samples flushed, plus the base rank field, shared
/// by every test on the same family.
pub(crate) struct RankContext {
    grid: FrequencyGrid,
    rel_tol: f64,
    flushed: Vec<SampledSpectrum>,
    ranks: Vec<usize>,
}

impl RankContext {
    pub(crate) fn new(phi: &[SampledSpectrum], grid: &FrequencyGrid, rel_tol: f64) -> Result<Self> {
        let own = common_grid(phi)?;
        if own != *grid {
            return Err(Error::GridMismatch("generators are not sampled on the requested grid".into()));
        }
        check_rel_tol(rel_tol)?;
        let flushed: Vec<_> = phi.iter().map(|s| flush_small(s, rel_tol)).collect();
        let ranks = rank_field(&flushed, rel_tol);
        Ok(Self { grid: *grid, rel_tol, flushed, ranks })
    }

    pub(crate) fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub(crate) fn verdict(&self, n: usize) -> Result<InvarianceVerdict> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be ≥ 1".into()));
        }
        let cutoffs = cutoff_set(&self.flushed, n)?;
        let per_cell: Vec<Vec<usize>> = (0..self.grid.samples_per_unit())
            .into_par_iter()
            .map(|i| cutoffs.families.iter().map(|fam| gramian_rank(&gramian_at(fam, i), self.rel_tol)).collect())
            .collect();

        let mut failing_cells = 0;
        let mut first_failure = None;
        let mut subadditive = true;
        let mut rank_sums = Vec::with_capacity(per_cell.len());
        for (i, cutoff_ranks) in per_cell.into_iter().enumerate() {
            let rank = self.ranks[i];
            let rank_sum: usize = cutoff_ranks.iter().sum();
            subadditive &= rank <= rank_sum;
            if rank != rank_sum {
                failing_cells += 1;
                if first_failure.is_none() {
                    first_failure =
                        Some(CellDiagnostic { omega_index: i, omega: self.grid.omega(i), rank, rank_sum, cutoff_ranks });
                }
            }
            rank_sums.push(rank_sum);
        }
        Ok(InvarianceVerdict {
            n,
            invariant: failing_cells == 0,
            failing_cells,
            first_failure,
            subadditive,
            rel_tol: self.rel_tol,
            ranks: self.ranks.clone(),
            rank_sums,
        })
    }

    /// First cell where the fiber space is not a coordinate subspace.
    pub(crate) fn ti_failure(&self) -> Option<usize> {
        (0..self.grid.samples_per_unit()).find(|&i| {
            let active = (0..self.grid.fiber_len())
                .filter(|&r| self.flushed.iter().any(|s| !s.fiber_slice(i)[r].is_zero()))
                .count();
            active != self.ranks[i]
        })
    }
}

/// Rank-sum test for `1/n`-invariance.
pub fn rank_sum_test(phi: &[SampledSpectrum], n: usize, grid: &FrequencyGrid, rel_tol: f64) -> Result<InvarianceVerdict> {
    RankContext::new(phi, grid, rel_tol)?.verdict(n)
}

/// Translation invariance certificate: at every cell the rank of `G_Φ`
/// equals the number of nonzero fiber rows, so the fiber space is spanned by
/// coordinate vectors.
pub fn ti_check(phi: &[SampledSpectrum], grid: &FrequencyGrid, rel_tol: f64) -> Result<bool> {
    Ok(RankContext::new(phi, grid, rel_tol)?.ti_failure().is_none())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeclaredOrder {
    Exact(usize),
    /// Invariant for every tested `n ≤ n_max`.
    AtLeast(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorViolation {
    pub n: usize,
    pub divisor: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderResult {
    pub declared: DeclaredOrder,
    pub n_max: usize,
    pub verdicts: Vec<InvarianceVerdict>,
    /// Invariant `n` with a non-invariant divisor.
    pub divisor_violations: Vec<DivisorViolation>,
    /// Invariant `n` that do not divide the declared order.
    pub non_dividing: Vec<usize>,
    /// No subgroup-law violations.
    pub consistent: bool,
    /// Run only when every tested `n` passes.
    pub ti_check: Option<bool>,
}

impl OrderResult {
    pub fn verdict(&self, n: usize) -> Option<&InvarianceVerdict> {
        self.verdicts.iter().find(|v| v.n == n)
    }

    pub fn is_invariant(&self, n: usize) -> Option<bool> {
        if n == 1 {
            return Some(true);
        }
        self.verdict(n).map(|v| v.invariant)
    }
}

pub(crate) fn order_from_context(ctx: &RankContext, n_max: usize) -> Result<OrderResult> {
    if n_max < 2 {
        return Err(Error::InvalidArgument(format!("n_max must be ≥ 2, got {n_max}")));
    }
    let verdicts = (2..=n_max).into_par_iter().map(|n| ctx.verdict(n)).collect::<Result<Vec<_>>>()?;
    let invariant = |n: usize| n == 1 || verdicts[n - 2].invariant;

    let all_pass = verdicts.iter().all(|v| v.invariant);
    let largest = (2..=n_max).rev().find(|&n| invariant(n)).unwrap_or(1);
    let declared = if all_pass { DeclaredOrder::AtLeast(n_max) } else { DeclaredOrder::Exact(largest) };

    let mut divisor_violations = Vec::new();
    for n in (2..=n_max).filter(|&n| invariant(n)) {
        for d in (2..n).filter(|d| n % d == 0) {
            if !invariant(d) {
                divisor_violations.push(DivisorViolation { n, divisor: d });
            }
        }
    }
    let non_dividing: Vec<usize> = match declared {
        DeclaredOrder::Exact(order) => (2..=n_max).filter(|&n| invariant(n) && order % n != 0).collect(),
        DeclaredOrder::AtLeast(_) => Vec::new(),
    };
    let consistent = divisor_violations.is_empty() && non_dividing.is_empty();
    let ti_check = all_pass.then(|| ctx.ti_failure().is_none());
    Ok(OrderResult { declared, n_max, verdicts, divisor_violations, non_dividing, consistent, ti_check })
}

/// Largest `n ≤ n_max` with `1/n`-invariance, or "at least `n_max`".
pub fn invariance_order(phi: &[SampledSpectrum], n_max: usize, grid: &FrequencyGrid, rel_tol: f64) -> Result<OrderResult> {
    order_from_context(&RankContext::new(phi, grid, rel_tol)?, n_max)
}

/// For a single generator: per cell, the number of residue classes mod `n`
/// met by the support of the fiber. The space is `1/n`-invariant iff this is
/// at most one everywhere.
pub fn residue_support_profile(phi: &[SampledSpectrum], n: usize, rel_tol: f64) -> Result<Vec<usize>> {
    let [s] = phi else {
        return Err(Error::InvalidArgument(format!(
            "residue support profile needs exactly one generator, got {}",
            phi.len()
        )));
    };
    if n == 0 {
        return Err(Error::InvalidArgument("n must be ≥ 1".into()));
    }
    check_rel_tol(rel_tol)?;
    let tol = rel_tol * s.max_abs();
    let grid = s.grid();
    Ok((0..grid.samples_per_unit())
        .map(|i| {
            let mut seen = vec![false; n];
            for (k, v) in grid.offsets().zip(s.fiber_slice(i)) {
                if v.norm() > tol {
                    seen[residue(k, n)] = true;
                }
            }
            seen.iter().filter(|&&b| b).count()
        })
        .collect())
}

/// Measures of the rank level sets `E_j = {ω ∈ [0,1) : rank G(ω) = j}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSets {
    /// Cells with rank `j`, `j = 0..=m`.
    pub counts: Vec<usize>,
    pub measures: Vec<f64>,
}

impl LevelSets {
    pub(crate) fn from_ranks(ranks: &[usize], m: usize) -> Self {
        let mut counts = vec![0; m + 1];
        for &r in ranks {
            counts[r] += 1;
        }
        let measures = counts.iter().map(|&c| c as f64 / ranks.len() as f64).collect();
        Self { counts, measures }
    }

    /// `Σ_{j<n} (n-j)|E_j|`.
    pub fn zero_set_bound(&self, n: usize) -> f64 {
        self.measures.iter().enumerate().take(n).map(|(j, e)| (n - j) as f64 * e).sum()
    }
}

pub fn rank_level_sets(phi: &[SampledSpectrum], grid: &FrequencyGrid, rel_tol: f64) -> Result<LevelSets> {
    let ctx = RankContext::new(phi, grid, rel_tol)?;
    Ok(LevelSets::from_ranks(ctx.ranks(), phi.len()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorZeroSet {
    pub generator: usize,
    /// Measure of `{ω ∈ I : |φ̂_h(ω)| ≤ rel_tol·max|φ̂_h|}` on the grid.
    pub measured: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroSetCheck {
    pub n: usize,
    pub interval: [f64; 2],
    pub level_sets: LevelSets,
    /// `Σ_{j<n} (n-j)|E_j|`.
    pub bound: f64,
    /// `n - m`, reported when `n > m`.
    pub generic_bound: Option<f64>,
    /// Discretization slack `2n/M`.
    pub slack: f64,
    pub generators: Vec<GeneratorZeroSet>,
    pub pass: bool,
}

pub(crate) fn zero_set_from_context(ctx: &RankContext, n: usize, start: f64) -> Result<ZeroSetCheck> {
    let grid = ctx.grid;
    let k_half = grid.fiber_half_width() as f64;
    let end = start + n as f64;
    if !start.is_finite() || start < -k_half || end > k_half {
        return Err(Error::InvalidArgument(format!(
            "interval [{start}, {end}) does not fit in the fiber window [-{k_half}, {k_half})"
        )));
    }
    let verdict = ctx.verdict(n)?;
    if !verdict.invariant {
        return Err(Error::Hypothesis(format!(
            "the space is not 1/{n}-invariant ({} failing cells), so the zero-set bound does not apply",
            verdict.failing_cells
        )));
    }

    let m = ctx.flushed.len();
    let level_sets = LevelSets::from_ranks(ctx.ranks(), m);
    let bound = level_sets.zero_set_bound(n);
    let slack = 2.0 * n as f64 / grid.samples_per_unit() as f64;
    let cell = 1.0 / grid.samples_per_unit() as f64;
    let generators: Vec<_> = ctx
        .flushed
        .iter()
        .enumerate()
        .map(|(h, s)| {
            let mut zeros = 0usize;
            for i in 0..grid.samples_per_unit() {
                for (k, v) in grid.offsets().zip(s.fiber_slice(i)) {
                    let x = grid.frequency(i, k);
                    if x >= start && x < end && v.is_zero() {
                        zeros += 1;
                    }
                }
            }
            let measured = zeros as f64 * cell;
            GeneratorZeroSet { generator: h, measured, pass: measured >= bound - slack }
        })
        .collect();
    let pass = generators.iter().all(|g| g.pass);
    Ok(ZeroSetCheck {
        n,
        interval: [start, end],
        level_sets,
        bound,
        generic_bound: (n > m).then(|| (n - m) as f64),
        slack,
        generators,
        pass,
    })
}

/// Lower bound on the zero sets of the generator spectra over `[start, start + n)`
/// implied by `1/n`-invariance. Refuses non-invariant input.
pub fn zero_set_bound_check(
    phi: &[SampledSpectrum],
    n: usize,
    start: f64,
    grid: &FrequencyGrid,
    rel_tol: f64,
) -> Result<ZeroSetCheck> {
    zero_set_from_context(&RankContext::new(phi, grid, rel_tol)?, n, start)
}

/// `h(ω) = e^{-2πiω/n} Σ_{j=-k}^{n-1-k} e^{2πij/n} χ_{B_{k+j}}(ω)`: a
/// unimodular ℤ-periodic function equal to `e^{-2πiω/n}` on `B_k`.
pub fn modulation_h(n: usize, k: usize, omega: f64) -> Result<Complex64> {
    check_cell(n, k)?;
    let (n_i, k_i) = (n as i64, k as i64);
    let mut sum = Complex64::zero();
    for j in -k_i..n_i - k_i {
        if in_partition(n, (k_i + j) as usize, omega)? {
            sum += Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
        }
    }
    Ok(Complex64::from_polar(1.0, -2.0 * PI * omega / n as f64) * sum)
}
