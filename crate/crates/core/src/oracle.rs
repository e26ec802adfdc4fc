//! Membership oracle by least-squares projection of fibers.
//!
//! A function `f` lies in `S(Φ)` iff its fiber `f̂_ω` lies in the span of the
//! generator fibers for almost every `ω`. The oracle measures the relative
//! distance of a target fiber to that span cell by cell. It shares no code
//! path with the Gramian rank test: no eigenvalues, no sample flushing.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::{common_grid, fiber_matrix, FiberMatrix, FiberVector};
use crate::spectrum::{FrequencyGrid, SampledSpectrum};

/// Default relative membership tolerance.
pub const DEFAULT_ORACLE_TOL: f64 = 1e-6;

/// `T_θ f`: samples multiplied by `e^{-2πiθ(ω_i + k)}`.
pub fn translate(s: &SampledSpectrum, theta: f64) -> SampledSpectrum {
    if theta == 0.0 {
        return s.clone();
    }
    let grid = *s.grid();
    s.map(|i, k, v| v * Complex64::from_polar(1.0, -2.0 * PI * theta * grid.frequency(i, k)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    /// `‖t - proj(t)‖ / ‖t‖`, in `[0, 1]`.
    pub residual: f64,
    /// Coefficients `a` with `proj(t) = F a`; zero on dropped columns.
    pub coefficients: DVector<Complex64>,
}

/// Least-squares projection of `target` onto the column span of `basis`.
///
/// Columns with norm `≤ tol` are dropped; the rest are normalized and
/// factored by column-pivoted QR, keeping pivots above `tol`.
pub fn project(target: &DVector<Complex64>, basis: &DMatrix<Complex64>, tol: f64) -> Result<Projection> {
    if target.len() != basis.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "target has length {} but basis columns have length {}",
            target.len(),
            basis.nrows()
        )));
    }
    let m = basis.ncols();
    let mut coefficients = DVector::zeros(m);
    let target_norm = target.norm();
    if target_norm <= tol {
        return Ok(Projection { residual: 0.0, coefficients });
    }

    let kept: Vec<(usize, f64)> =
        (0..m).map(|j| (j, basis.column(j).norm())).filter(|&(_, norm)| norm > tol).collect();
    if kept.is_empty() {
        return Ok(Projection { residual: 1.0, coefficients });
    }
    let a = DMatrix::from_fn(basis.nrows(), kept.len(), |r, c| {
        let (j, norm) = kept[c];
        basis[(r, j)] / norm
    });
    let qr = a.col_piv_qr();
    let r = qr.r();
    let rank = (0..r.nrows().min(r.ncols())).take_while(|&i| r[(i, i)].norm() > tol).count();
    if rank == 0 {
        return Ok(Projection { residual: 1.0, coefficients });
    }

    let q = qr.q();
    let q_r = q.columns(0, rank);
    let qtb = q_r.adjoint() * target;
    let projected = q_r * &qtb;
    let residual = ((target - projected).norm() / target_norm).clamp(0.0, 1.0);

    let r_lead = r.view((0, 0), (rank, rank)).into_owned();
    let z = r_lead
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::Numerical("singular triangular factor in projection".into()))?;
    let mut y = DVector::zeros(kept.len());
    y.rows_mut(0, rank).copy_from(&z);
    qr.p().inv_permute_rows(&mut y);
    for (c, &(j, norm)) in kept.iter().enumerate() {
        coefficients[j] = y[c] / norm;
    }
    Ok(Projection { residual, coefficients })
}

/// Relative residual of one fiber against a fiber matrix.
pub fn fiber_residual(target: &FiberVector, basis: &FiberMatrix, tol: f64) -> Result<Projection> {
    project(&target.entries, &basis.matrix, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipVerdict {
    pub n: usize,
    pub member: bool,
    pub max_residual: f64,
    pub worst_omega: f64,
    pub tol: f64,
    /// Per base point of `[0, n)`, ordered by frequency.
    #[serde(skip)]
    pub residuals: Vec<f64>,
    /// Per base point, the discretized `nℤ`-periodic multiplier.
    #[serde(skip)]
    pub coefficients: Vec<Complex64>,
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    Ok(())
}

fn normalized(s: &SampledSpectrum) -> SampledSpectrum {
    let peak = s.max_abs();
    if peak > 0.0 {
        s.scale(Complex64::new(1.0 / peak, 0.0))
    } else {
        s.clone()
    }
}

/// Whether `g ∈ span{T_{j/n} f : j ∈ ℤ}`, i.e. `ĝ = μ f̂` for an
/// `nℤ`-periodic `μ`. Tested on the refined fibers `(ĝ(ω + qn))_q`,
/// `ω ∈ [0, n)`.
pub fn refined_membership(g: &SampledSpectrum, f: &SampledSpectrum, n: usize, tol: f64) -> Result<MembershipVerdict> {
    check_tol(tol)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be ≥ 1".into()));
    }
    let grid = common_grid(&[g.clone(), f.clone()])?;
    let k_half = grid.fiber_half_width() as i64;
    if (n as i64) > k_half {
        return Err(Error::InvalidGrid(format!(
            "fiber half-width {k_half} cannot hold refined fibers of step {n}"
        )));
    }
    let (g, f) = (normalized(g), normalized(f));
    let m = grid.samples_per_unit();
    let points: Vec<(usize, usize)> = (0..n).flat_map(|r| (0..m).map(move |i| (r, i))).collect();
    let results: Vec<Projection> = points
        .par_iter()
        .map(|&(r, i)| {
            let offsets: Vec<i64> = grid.offsets().filter(|k| (k - r as i64).rem_euclid(n as i64) == 0).collect();
            let target = DVector::from_iterator(offsets.len(), offsets.iter().map(|&k| g.get(i, k)));
            let basis = DMatrix::from_iterator(offsets.len(), 1, offsets.iter().map(|&k| f.get(i, k)));
            project(&target, &basis, tol)
        })
        .collect::<Result<_>>()?;

    let residuals: Vec<f64> = results.iter().map(|p| p.residual).collect();
    let (worst, max_residual) = argmax(&residuals);
    let (r, i) = points[worst];
    Ok(MembershipVerdict {
        n,
        member: max_residual <= tol,
        max_residual,
        worst_omega: r as f64 + grid.omega(i),
        tol,
        residuals,
        coefficients: results.iter().map(|p| p.coefficients[0]).collect(),
    })
}

/// First index of the maximum.
fn argmax(values: &[f64]) -> (usize, f64) {
    values.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub n: usize,
    pub invariant: bool,
    pub max_residual: f64,
    pub worst_generator: usize,
    pub worst_omega_index: usize,
    pub worst_omega: f64,
    pub tol: f64,
    /// Per cell, the largest residual over generators.
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

impl OracleVerdict {
    /// CSV with columns `omega,residual`.
    pub fn write_csv<W: std::io::Write>(&self, grid: &FrequencyGrid, mut out: W) -> std::io::Result<()> {
        writeln!(out, "omega,residual")?;
        for (i, r) in self.residuals.iter().enumerate() {
            writeln!(out, "{},{:e}", grid.omega(i), r)?;
        }
        Ok(())
    }
}

/// `1/n`-invariance by direct membership: every `T_{1/n} φ_j` must have its
/// fibers in the span of the generator fibers at every cell.
pub fn invariance_oracle(phi: &[SampledSpectrum], n: usize, grid: &FrequencyGrid, tol: f64) -> Result<OracleVerdict> {
    check_tol(tol)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be ≥ 1".into()));
    }
    let own = common_grid(phi)?;
    if own != *grid {
        return Err(Error::GridMismatch("generators are not sampled on the requested grid".into()));
    }
    let phi: Vec<SampledSpectrum> = phi.iter().map(normalized).collect();
    let shifted: Vec<SampledSpectrum> = phi.iter().map(|s| translate(s, 1.0 / n as f64)).collect();

    let per_cell: Vec<(f64, usize)> = (0..grid.samples_per_unit())
        .into_par_iter()
        .map(|i| {
            let basis = fiber_matrix(&phi, i)?;
            let mut worst = (f64::NEG_INFINITY, 0);
            for (j, s) in shifted.iter().enumerate() {
                let target = crate::fiber::fiber(s, i)?;
                let res = fiber_residual(&target, &basis, tol)?.residual;
                if res > worst.0 {
                    worst = (res, j);
                }
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;

    let residuals: Vec<f64> = per_cell.iter().map(|c| c.0).collect();
    let (cell, max_residual) = argmax(&residuals);
    Ok(OracleVerdict {
        n,
        invariant: max_residual <= tol,
        max_residual,
        worst_generator: per_cell[cell].1,
        worst_omega_index: cell,
        worst_omega: grid.omega(cell),
        tol,
        residuals,
    })
}
