//! Fibers, fiber matrices, the Gramian field and numerical ranks.
//!
//! The fiber of `φ` at `ω` is the sequence `(φ̂(ω + k))_k`. For generators
//! `Φ = {φ_1, …, φ_m}` the fiber matrix `F(ω)` has the fibers as columns and
//! the Gramian is `G_{ij}(ω) = Σ_k φ̂_i(ω+k) conj(φ̂_j(ω+k))`, i.e.
//! `G = (F*F)ᵀ`. Its rank is the dimension of the fiber space at `ω`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectrum::{FrequencyGrid, SampledSpectrum};

/// Largest eigenvalue at or below which a matrix counts as zero.
pub const ZERO_FLOOR: f64 = 1e-300;

/// Default relative rank tolerance.
pub const DEFAULT_REL_TOL: f64 = 1e-8;

const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct FiberVector {
    pub index: usize,
    /// Entry `j` is `φ̂(ω_i + j - K)`.
    pub entries: DVector<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiberMatrix {
    pub index: usize,
    /// `2K × m`, column `j` is the fiber of generator `j`.
    pub matrix: DMatrix<Complex64>,
}

impl FiberMatrix {
    pub fn generators(&self) -> usize {
        self.matrix.ncols()
    }

    /// Rows whose norm exceeds `tol`.
    pub fn active_rows(&self, tol: f64) -> usize {
        self.matrix.row_iter().filter(|row| row.norm() > tol).count()
    }
}

pub fn fiber(s: &SampledSpectrum, i: usize) -> Result<FiberVector> {
    let m = s.grid().samples_per_unit();
    if i >= m {
        return Err(Error::IndexOutOfRange { index: i, len: m });
    }
    Ok(FiberVector { index: i, entries: DVector::from_column_slice(s.fiber_slice(i)) })
}

/// The common grid of a generator family.
pub fn common_grid(phi: &[SampledSpectrum]) -> Result<FrequencyGrid> {
    let first = phi.first().ok_or_else(|| Error::InvalidArgument("empty generator family".into()))?;
    let grid = *first.grid();
    if let Some(j) = phi.iter().position(|s| *s.grid() != grid) {
        return Err(Error::GridMismatch(format!("generator {j} is sampled on a different grid than generator 0")));
    }
    Ok(grid)
}

fn check_grid(phi: &[SampledSpectrum], grid: &FrequencyGrid) -> Result<()> {
    let own = common_grid(phi)?;
    if own != *grid {
        return Err(Error::GridMismatch("generators are not sampled on the requested grid".into()));
    }
    Ok(())
}

pub fn fiber_matrix(phi: &[SampledSpectrum], i: usize) -> Result<FiberMatrix> {
    let grid = common_grid(phi)?;
    if i >= grid.samples_per_unit() {
        return Err(Error::IndexOutOfRange { index: i, len: grid.samples_per_unit() });
    }
    let rows = grid.fiber_len();
    let mut data = Vec::with_capacity(rows * phi.len());
    for s in phi {
        data.extend_from_slice(s.fiber_slice(i));
    }
    Ok(FiberMatrix { index: i, matrix: DMatrix::from_vec(rows, phi.len(), data) })
}

/// `G(ω_i)` for generators already known to share a grid.
pub(crate) fn gramian_at(phi: &[SampledSpectrum], i: usize) -> DMatrix<Complex64> {
    let m = phi.len();
    let mut g = DMatrix::zeros(m, m);
    for a in 0..m {
        let fa = phi[a].fiber_slice(i);
        for b in a..m {
            let fb = phi[b].fiber_slice(i);
            let v: Complex64 = fa.iter().zip(fb).map(|(x, y)| x * y.conj()).sum();
            g[(a, b)] = v;
            g[(b, a)] = v.conj();
        }
    }
    for a in 0..m {
        g[(a, a)].im = 0.0;
    }
    g
}

#[derive(Clone, Debug)]
pub struct GramianField {
    grid: FrequencyGrid,
    matrices: Vec<DMatrix<Complex64>>,
}

impl GramianField {
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn at(&self, i: usize) -> &DMatrix<Complex64> {
        &self.matrices[i]
    }

    pub fn matrices(&self) -> &[DMatrix<Complex64>] {
        &self.matrices
    }

    pub fn generators(&self) -> usize {
        self.matrices.first().map_or(0, |g| g.nrows())
    }

    /// Ascending eigenvalues per cell.
    pub fn eigenvalues(&self) -> Result<Vec<Vec<f64>>> {
        self.matrices.par_iter().map(hermitian_eigenvalues).collect()
    }

    /// CSV with columns `omega,lambda_1,…,lambda_m` (ascending).
    pub fn write_eigenvalue_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let eig = self.eigenvalues().map_err(std::io::Error::other)?;
        write!(out, "omega")?;
        for j in 1..=self.generators() {
            write!(out, ",lambda_{j}")?;
        }
        writeln!(out)?;
        for (i, row) in eig.iter().enumerate() {
            write!(out, "{}", self.grid.omega(i))?;
            for v in row {
                write!(out, ",{v:e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

pub fn gramian_field(phi: &[SampledSpectrum], grid: &FrequencyGrid) -> Result<GramianField> {
    check_grid(phi, grid)?;
    let matrices = (0..grid.samples_per_unit()).into_par_iter().map(|i| gramian_at(phi, i)).collect();
    Ok(GramianField { grid: *grid, matrices })
}

fn max_asymmetry(a: &DMatrix<Complex64>) -> (f64, f64) {
    let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for r in 0..a.nrows() {
        for c in r..a.ncols() {
            worst = worst.max((a[(r, c)] - a[(c, r)].conj()).norm());
        }
    }
    (worst, scale)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!("{}×{} matrix is not square", a.nrows(), a.ncols())));
    }
    let (asym, scale) = max_asymmetry(a);
    if asym > HERMITIAN_TOL * scale.max(1.0) {
        return Err(Error::NotHermitian(asym));
    }
    let mut eig: Vec<f64> = match a.nrows() {
        0 => Vec::new(),
        1 => vec![a[(0, 0)].re],
        _ => a.clone().symmetric_eigenvalues().iter().copied().collect(),
    };
    if eig.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Count of eigenvalues above `rel_tol · max(λ_max, ZERO_FLOOR)`; zero when
/// `λ_max ≤ ZERO_FLOOR`.
pub fn numerical_rank(a: &DMatrix<Complex64>, rel_tol: f64) -> Result<usize> {
    let eig = hermitian_eigenvalues(a)?;
    Ok(rank_from_eigenvalues(&eig, rel_tol))
}

pub(crate) fn rank_from_eigenvalues(eig: &[f64], rel_tol: f64) -> usize {
    let lmax = eig.iter().copied().fold(0.0, f64::max);
    if lmax <= ZERO_FLOOR {
        return 0;
    }
    let threshold = rel_tol * lmax.max(ZERO_FLOOR);
    eig.iter().filter(|&&v| v > threshold).count()
}

/// Rank of a Gramian after diagonal equilibration `D^{-1/2} G D^{-1/2}`.
///
/// Generators with zero diagonal are dropped first. The result is unchanged
/// when any single generator is rescaled, which a plain relative threshold
/// cannot guarantee once generators differ in scale by more than `1/rel_tol`.
pub fn gramian_rank(g: &DMatrix<Complex64>, rel_tol: f64) -> usize {
    let active: Vec<usize> = (0..g.nrows()).filter(|&j| g[(j, j)].re > ZERO_FLOOR).collect();
    match active.len() {
        0 => 0,
        1 => 1,
        n => {
            let inv_sqrt: Vec<f64> = active.iter().map(|&j| 1.0 / g[(j, j)].re.sqrt()).collect();
            let c = DMatrix::from_fn(n, n, |r, s| g[(active[r], active[s])] * (inv_sqrt[r] * inv_sqrt[s]));
            // Equilibrated Gramians of finite data are Hermitian by construction.
            numerical_rank(&c, rel_tol).unwrap_or(n)
        }
    }
}

/// Zero every sample with `|φ̂| ≤ rel_tol · max|φ̂|`.
///
/// Rank analysis, active-row counting and zero-set measurement all use this
/// single notion of "φ̂ vanishes here".
pub fn flush_small(s: &SampledSpectrum, rel_tol: f64) -> SampledSpectrum {
    let tol = rel_tol * s.max_abs();
    s.map(|_, _, v| if v.norm() <= tol { Complex64::zero() } else { v })
}

/// Per-cell ranks of a Gramian field.
#[derive(Clone, Debug, PartialEq)]
pub struct RankProfile {
    pub grid: FrequencyGrid,
    pub ranks: Vec<usize>,
    pub rel_tol: f64,
}

impl RankProfile {
    /// CSV with columns `omega,rank`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "omega,rank")?;
        for (i, r) in self.ranks.iter().enumerate() {
            writeln!(out, "{},{}", self.grid.omega(i), r)?;
        }
        Ok(())
    }
}

/// Ranks of the Gramians of already flushed generators.
pub(crate) fn rank_field(phi: &[SampledSpectrum], rel_tol: f64) -> Vec<usize> {
    let grid = *phi[0].grid();
    (0..grid.samples_per_unit()).into_par_iter().map(|i| gramian_rank(&gramian_at(phi, i), rel_tol)).collect()
}

pub(crate) fn check_rel_tol(rel_tol: f64) -> Result<()> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidArgument(format!("rel_tol must lie in (0, 1), got {rel_tol}")));
    }
    Ok(())
}

/// Dimension function `ω ↦ dim 𝒥(ω) = rank G_Φ(ω)` on the grid.
pub fn dimension_function(phi: &[SampledSpectrum], grid: &FrequencyGrid, rel_tol: f64) -> Result<RankProfile> {
    check_grid(phi, grid)?;
    check_rel_tol(rel_tol)?;
    let flushed: Vec<_> = phi.iter().map(|s| flush_small(s, rel_tol)).collect();
    Ok(RankProfile { grid: *grid, ranks: rank_field(&flushed, rel_tol), rel_tol })
}
