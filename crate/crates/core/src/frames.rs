//! Frame bounds of integer-translate systems.
//!
//! The translates of `Φ` form a frame for their closed span with optimal
//! bounds `A = ess inf λ_min⁺(G_Φ(ω))` and `B = ess sup λ_max(G_Φ(ω))`,
//! where `λ_min⁺` is the smallest nonzero eigenvalue. On the grid the
//! essential extrema become plain extrema over cells.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::{common_grid, gramian_at, hermitian_eigenvalues, ZERO_FLOOR};
use crate::invariance::{cutoff_set, RankContext};
use crate::spectrum::{FrequencyGrid, SampledSpectrum};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
    pub lower_at: f64,
    pub upper_at: f64,
    pub parseval: bool,
}

fn is_parseval(lower: f64, upper: f64, rel_tol: f64) -> bool {
    (lower - 1.0).abs() <= 10.0 * rel_tol && (upper - 1.0).abs() <= 10.0 * rel_tol
}

/// Frame bounds of the integer translates of `Φ` for their closed span.
pub fn frame_bounds(phi: &[SampledSpectrum], grid: &FrequencyGrid, rel_tol: f64) -> Result<FrameBounds> {
    let own = common_grid(phi)?;
    if own != *grid {
        return Err(Error::GridMismatch("generators are not sampled on the requested grid".into()));
    }
    let per_cell: Vec<Option<(f64, f64)>> = (0..grid.samples_per_unit())
        .into_par_iter()
        .map(|i| {
            let eig = hermitian_eigenvalues(&gramian_at(phi, i))?;
            let lmax = eig.last().copied().unwrap_or(0.0);
            if lmax <= ZERO_FLOOR {
                return Ok(None);
            }
            let threshold = rel_tol * lmax;
            let lmin = eig.iter().copied().find(|&v| v > threshold).unwrap_or(lmax);
            Ok(Some((lmin, lmax)))
        })
        .collect::<Result<_>>()?;

    let mut best: Option<(f64, usize, f64, usize)> = None;
    for (i, cell) in per_cell.iter().enumerate() {
        let Some((lo, hi)) = *cell else { continue };
        best = Some(match best {
            None => (lo, i, hi, i),
            Some((a, ai, b, bi)) => {
                let (a, ai) = if lo < a { (lo, i) } else { (a, ai) };
                let (b, bi) = if hi > b { (hi, i) } else { (b, bi) };
                (a, ai, b, bi)
            }
        });
    }
    let (lower, li, upper, ui) = best.ok_or(Error::TrivialSpace)?;
    Ok(FrameBounds {
        lower,
        upper,
        lower_at: grid.omega(li),
        upper_at: grid.omega(ui),
        parseval: is_parseval(lower, upper, rel_tol),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffFrame {
    pub k: usize,
    /// Generators with a nonzero cutoff.
    pub members: Vec<usize>,
    /// `None` for a trivial `U_k`.
    pub bounds: Option<FrameBounds>,
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffFrameReport {
    pub n: usize,
    pub original: FrameBounds,
    pub per_k: Vec<CutoffFrame>,
    pub union: FrameBounds,
    pub union_within: bool,
    /// Relative slack used for the comparisons, `10·rel_tol`.
    pub slack: f64,
    pub pass: bool,
}

/// Frame bounds of every cutoff family `P_kΦ` and of their union, compared
/// against the bounds of `Φ`. Requires `1/n`-invariance.
pub fn cutoff_frame_check(phi: &[SampledSpectrum], n: usize, grid: &FrequencyGrid, rel_tol: f64) -> Result<CutoffFrameReport> {
    let verdict = RankContext::new(phi, grid, rel_tol)?.verdict(n)?;
    if !verdict.invariant {
        return Err(Error::Hypothesis(format!(
            "the space is not 1/{n}-invariant ({} failing cells), so cutoff frames need not inherit the bounds",
            verdict.failing_cells
        )));
    }
    let original = frame_bounds(phi, grid, rel_tol)?;
    let slack = 10.0 * rel_tol;
    let within = |b: &FrameBounds| {
        original.lower * (1.0 - slack) <= b.lower && b.upper <= original.upper * (1.0 + slack)
    };

    let cutoffs = cutoff_set(phi, n)?;
    let mut per_k = Vec::with_capacity(n);
    let mut union = Vec::new();
    for (k, family) in cutoffs.families.into_iter().enumerate() {
        let members: Vec<usize> = (0..family.len()).filter(|&j| !family[j].is_zero()).collect();
        let nonzero: Vec<SampledSpectrum> = members.iter().map(|&j| family[j].clone()).collect();
        let bounds = if nonzero.is_empty() { None } else { Some(frame_bounds(&nonzero, grid, rel_tol)?) };
        let ok = bounds.as_ref().is_none_or(within);
        per_k.push(CutoffFrame { k, members, bounds, within: ok });
        union.extend(nonzero);
    }
    let union = frame_bounds(&union, grid, rel_tol)?;
    let union_within = within(&union);
    let pass = union_within && per_k.iter().all(|c| c.within);
    Ok(CutoffFrameReport { n, original, per_k, union, union_within, slack, pass })
}
