//! Generator Fourier transforms and their samples on the frequency lattice.
//!
//! A generator is described by a [`GeneratorSpec`] and evaluated on a
//! [`FrequencyGrid`] into a [`SampledSpectrum`], whose entry `(i, k)` is
//! `φ̂(ω_i + k)` for base cell `i` and fiber offset `k ∈ [-K, K)`.
//!
//! Transform convention: `φ̂(ω) = ∫ φ(x) e^{-2πixω} dx`, so translation by
//! `a` multiplies the transform by `e^{-2πiaω}`.

mod filters;
mod rational;

use std::f64::consts::{PI, SQRT_2};
use std::ops::Range;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use filters::{daubechies_filter, DAUBECHIES_NAMES};
pub use rational::Rational;

/// Default truncated product depth for Daubechies spectra.
pub const DEFAULT_PRODUCT_DEPTH: u32 = 20;

/// Where inside each base cell `[i/M, (i+1)/M)` the grid samples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// `ω_i = (i + 1/2) / M`. Never lands on a rational breakpoint with
    /// denominator dividing `M`.
    #[default]
    Midpoint,
    /// `ω_i = i / M`.
    Left,
}

#[derive(Deserialize)]
struct RawGrid {
    #[serde(alias = "M")]
    samples_per_unit: usize,
    #[serde(alias = "K")]
    fiber_half_width: usize,
    #[serde(default)]
    sampling: Sampling,
}

/// Discretization of the base window `[0, 1)` into `M` cells and the fiber
/// index range `k ∈ [-K, K)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct FrequencyGrid {
    samples_per_unit: usize,
    fiber_half_width: usize,
    sampling: Sampling,
}

impl TryFrom<RawGrid> for FrequencyGrid {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        Self::with_sampling(raw.samples_per_unit, raw.fiber_half_width, raw.sampling)
    }
}

impl FrequencyGrid {
    pub fn new(samples_per_unit: usize, fiber_half_width: usize) -> Result<Self> {
        Self::with_sampling(samples_per_unit, fiber_half_width, Sampling::Midpoint)
    }

    pub fn with_sampling(samples_per_unit: usize, fiber_half_width: usize, sampling: Sampling) -> Result<Self> {
        if samples_per_unit < 2 {
            return Err(Error::InvalidGrid(format!("samples_per_unit must be ≥ 2, got {samples_per_unit}")));
        }
        if fiber_half_width < 1 {
            return Err(Error::InvalidGrid("fiber_half_width must be ≥ 1".into()));
        }
        // Keep rational grid points representable in i64.
        if samples_per_unit > 1 << 24 || fiber_half_width > 1 << 24 {
            return Err(Error::InvalidGrid("grid dimensions exceed 2^24".into()));
        }
        Ok(Self { samples_per_unit, fiber_half_width, sampling })
    }

    /// `M`
    pub fn samples_per_unit(&self) -> usize {
        self.samples_per_unit
    }

    /// `K`
    pub fn fiber_half_width(&self) -> usize {
        self.fiber_half_width
    }

    pub fn sampling(&self) -> Sampling {
        self.sampling
    }

    /// Fiber length `2K`.
    pub fn fiber_len(&self) -> usize {
        2 * self.fiber_half_width
    }

    /// Total number of lattice points `2K·M`.
    pub fn len(&self) -> usize {
        self.fiber_len() * self.samples_per_unit
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Fiber offsets `-K..K`.
    pub fn offsets(&self) -> Range<i64> {
        let k = self.fiber_half_width as i64;
        -k..k
    }

    /// Base frequency of cell `i` as an exact rational.
    pub fn omega_exact(&self, i: usize) -> Ratio<i64> {
        let m = self.samples_per_unit as i64;
        match self.sampling {
            Sampling::Midpoint => Ratio::new(2 * i as i64 + 1, 2 * m),
            Sampling::Left => Ratio::new(i as i64, m),
        }
    }

    pub fn omega(&self, i: usize) -> f64 {
        let shift = match self.sampling {
            Sampling::Midpoint => 0.5,
            Sampling::Left => 0.0,
        };
        (i as f64 + shift) / self.samples_per_unit as f64
    }

    /// Lattice frequency `ω_i + k`.
    pub fn frequency(&self, i: usize, k: i64) -> f64 {
        self.omega(i) + k as f64
    }

    /// Flat index of `(i, k)` in a sample array (`i`-major).
    pub fn index(&self, i: usize, k: i64) -> usize {
        i * self.fiber_len() + (k + self.fiber_half_width as i64) as usize
    }

    /// The same grid with the fiber half-width changed.
    pub fn with_fiber_half_width(&self, fiber_half_width: usize) -> Result<Self> {
        Self::with_sampling(self.samples_per_unit, fiber_half_width, self.sampling)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Segment {
    start: Ratio<i64>,
    end: Ratio<i64>,
    value: Complex64,
}

/// A compactly supported step function with rational breakpoints, kept in
/// canonical form: only nonzero pieces, adjacent equal pieces merged.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseConstantSpectrum {
    segments: Vec<Segment>,
}

impl PiecewiseConstantSpectrum {
    /// Build from `breakpoints[0] < … < breakpoints[n]` and one value per
    /// half-open interval `[b_j, b_{j+1})`.
    pub fn new(breakpoints: &[Ratio<i64>], values: &[Complex64]) -> Result<Self> {
        if breakpoints.is_empty() && values.is_empty() {
            return Ok(Self::zero());
        }
        if values.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidSpectrum(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                values.len()
            )));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSpectrum(format!(
                "breakpoints not strictly increasing: {} then {}",
                w[0], w[1]
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidSpectrum(format!("non-finite value {v}")));
        }

        let mut segments: Vec<Segment> = Vec::new();
        for (w, &value) in breakpoints.windows(2).zip(values) {
            if value.is_zero() {
                continue;
            }
            match segments.last_mut() {
                Some(last) if last.end == w[0] && last.value == value => last.end = w[1],
                _ => segments.push(Segment { start: w[0], end: w[1], value }),
            }
        }
        Ok(Self { segments })
    }

    pub fn zero() -> Self {
        Self { segments: Vec::new() }
    }

    /// Indicator of a union of disjoint half-open intervals.
    pub fn indicator(intervals: &[(Ratio<i64>, Ratio<i64>)]) -> Result<Self> {
        let mut sorted = intervals.to_vec();
        sorted.sort();
        let mut breakpoints = Vec::new();
        let mut values = Vec::new();
        for (a, b) in sorted {
            if a >= b {
                return Err(Error::InvalidSpectrum(format!("empty interval [{a}, {b})")));
            }
            match breakpoints.last() {
                Some(&last) if last > a => {
                    return Err(Error::InvalidSpectrum("overlapping intervals".into()));
                }
                Some(&last) if last == a => {}
                Some(_) => {
                    values.push(Complex64::zero());
                    breakpoints.push(a);
                }
                None => breakpoints.push(a),
            }
            values.push(Complex64::new(1.0, 0.0));
            breakpoints.push(b);
        }
        Self::new(&breakpoints, &values)
    }

    pub fn is_zero(&self) -> bool {
        self.segments.is_empty()
    }

    /// Canonical breakpoints and values (zero gaps between separated pieces
    /// are explicit).
    pub fn breakpoints_and_values(&self) -> (Vec<Ratio<i64>>, Vec<Complex64>) {
        let mut breakpoints = Vec::new();
        let mut values = Vec::new();
        for seg in &self.segments {
            match breakpoints.last() {
                Some(&last) if last == seg.start => {}
                Some(_) => {
                    values.push(Complex64::zero());
                    breakpoints.push(seg.start);
                }
                None => breakpoints.push(seg.start),
            }
            values.push(seg.value);
            breakpoints.push(seg.end);
        }
        (breakpoints, values)
    }

    /// Nonzero pieces as `(start, end, value)`.
    pub fn pieces(&self) -> impl Iterator<Item = (Ratio<i64>, Ratio<i64>, Complex64)> + '_ {
        self.segments.iter().map(|s| (s.start, s.end, s.value))
    }

    pub fn value_at(&self, omega: Ratio<i64>) -> Complex64 {
        let idx = self.segments.partition_point(|s| s.start <= omega);
        match idx.checked_sub(1).map(|j| &self.segments[j]) {
            Some(seg) if omega < seg.end => seg.value,
            _ => Complex64::zero(),
        }
    }

    /// Least common denominator of all breakpoints.
    pub fn common_denominator(&self) -> i64 {
        self.segments
            .iter()
            .flat_map(|s| [s.start.denom(), s.end.denom()])
            .fold(1i64, |acc, d| acc.lcm(d))
    }

    /// Exact measure of `{ω ∈ [a, b) : φ̂(ω) ≠ 0}`.
    pub fn support_measure(&self, a: Ratio<i64>, b: Ratio<i64>) -> Result<Ratio<i64>> {
        if a >= b {
            return Err(Error::InvalidArgument(format!("empty interval [{a}, {b})")));
        }
        Ok(self
            .segments
            .iter()
            .map(|s| {
                let lo = s.start.max(a);
                let hi = s.end.min(b);
                if hi > lo { hi - lo } else { Ratio::zero() }
            })
            .sum())
    }

    /// Measure of the whole support.
    pub fn total_support_measure(&self) -> Ratio<i64> {
        self.segments.iter().map(|s| s.end - s.start).sum()
    }

    /// Sample on `grid`, requiring every breakpoint to land on a cell edge.
    pub fn sample(&self, grid: &FrequencyGrid) -> Result<SampledSpectrum> {
        let d = self.common_denominator();
        if grid.samples_per_unit() as i64 % d != 0 {
            return Err(Error::GridMisaligned { samples_per_unit: grid.samples_per_unit(), denominator: d });
        }
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.samples_per_unit() {
            let omega = grid.omega_exact(i);
            for k in grid.offsets() {
                values.push(self.value_at(omega + k));
            }
        }
        SampledSpectrum::new(*grid, values)
    }
}

/// Convenience for building an indicator from integer interval endpoints.
pub fn indicator_of(intervals: &[(i64, i64)]) -> PiecewiseConstantSpectrum {
    let iv: Vec<_> = intervals.iter().map(|&(a, b)| (Ratio::from_integer(a), Ratio::from_integer(b))).collect();
    PiecewiseConstantSpectrum::indicator(&iv).expect("valid integer intervals")
}

/// Low-pass filter of a Daubechies scaling function, by name or by taps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DaubechiesFilter {
    /// `"D2"`, `"D4"`, `"D6"` or `"D8"` (number of taps).
    Named(String),
    Coefficients(Vec<f64>),
}

impl DaubechiesFilter {
    pub fn coefficients(&self) -> Result<Vec<f64>> {
        let taps = match self {
            DaubechiesFilter::Named(name) => daubechies_filter(name)
                .ok_or_else(|| {
                    Error::InvalidSpectrum(format!("unknown Daubechies filter {name:?}, expected one of {DAUBECHIES_NAMES:?}"))
                })?
                .to_vec(),
            DaubechiesFilter::Coefficients(c) => c.clone(),
        };
        if taps.is_empty() || taps.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSpectrum("filter taps must be finite and nonempty".into()));
        }
        let sum: f64 = taps.iter().sum();
        if (sum - SQRT_2).abs() > 1e-12 {
            return Err(Error::InvalidSpectrum(format!("filter taps sum to {sum}, expected √2 within 1e-12")));
        }
        Ok(taps)
    }
}

fn default_depth() -> u32 {
    DEFAULT_PRODUCT_DEPTH
}

/// Description of one generator's Fourier transform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    PiecewiseConstant {
        breakpoints: Vec<Rational>,
        values: Vec<Complex64>,
    },
    /// Box function convolved with itself `order` times: `(e^{-iπω} sinc ω)^{order+1}`.
    Bspline { order: u32 },
    /// Scaling function of a two-scale filter: `∏_{j=1..depth} m₀(ω/2^j)`.
    Daubechies {
        filter: DaubechiesFilter,
        #[serde(default = "default_depth")]
        depth: u32,
    },
    /// `φ̂(ω) = exp(-π (width·ω)²)`.
    Gaussian { width: f64 },
    /// Raw samples laid out `i`-major, `values[i·2K + (k+K)] = φ̂(ω_i + k)`.
    Samples {
        grid: FrequencyGrid,
        values: Vec<Complex64>,
    },
}

impl GeneratorSpec {
    pub fn piecewise(breakpoints: &[Ratio<i64>], values: &[Complex64]) -> Self {
        GeneratorSpec::PiecewiseConstant {
            breakpoints: breakpoints.iter().copied().map(Rational::from).collect(),
            values: values.to_vec(),
        }
    }

    pub fn from_piecewise(spectrum: &PiecewiseConstantSpectrum) -> Self {
        let (b, v) = spectrum.breakpoints_and_values();
        Self::piecewise(&b, &v)
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            GeneratorSpec::PiecewiseConstant { .. } => "piecewise_constant",
            GeneratorSpec::Bspline { .. } => "bspline",
            GeneratorSpec::Daubechies { .. } => "daubechies",
            GeneratorSpec::Gaussian { .. } => "gaussian",
            GeneratorSpec::Samples { .. } => "samples",
        }
    }

    /// The exact step function for the piecewise-constant variant.
    pub fn as_piecewise(&self) -> Option<Result<PiecewiseConstantSpectrum>> {
        match self {
            GeneratorSpec::PiecewiseConstant { breakpoints, values } => {
                let b: Vec<_> = breakpoints.iter().map(|r| r.0).collect();
                Some(PiecewiseConstantSpectrum::new(&b, values))
            }
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GeneratorSpec::PiecewiseConstant { .. } => self.as_piecewise().unwrap().map(|_| ()),
            GeneratorSpec::Bspline { .. } => Ok(()),
            GeneratorSpec::Daubechies { filter, depth } => {
                if *depth < 1 {
                    return Err(Error::InvalidSpectrum("daubechies depth must be ≥ 1".into()));
                }
                filter.coefficients().map(|_| ())
            }
            GeneratorSpec::Gaussian { width } => {
                if !(width.is_finite() && *width > 0.0) {
                    return Err(Error::InvalidSpectrum(format!("gaussian width must be positive, got {width}")));
                }
                Ok(())
            }
            GeneratorSpec::Samples { grid, values } => {
                if values.len() != grid.len() {
                    return Err(Error::InvalidSpectrum(format!(
                        "samples array has length {}, expected 2K·M = {}",
                        values.len(),
                        grid.len()
                    )));
                }
                check_finite(values)
            }
        }
    }

    /// Point evaluation of `φ̂(ω)`. Not available for raw samples.
    pub fn value_at(&self, omega: f64) -> Result<Complex64> {
        match self {
            GeneratorSpec::PiecewiseConstant { .. } => {
                let pc = self.as_piecewise().unwrap()?;
                let exact = Ratio::<i64>::approximate_float(omega)
                    .ok_or_else(|| Error::InvalidArgument(format!("cannot represent {omega} as a rational")))?;
                Ok(pc.value_at(exact))
            }
            GeneratorSpec::Bspline { order } => Ok(bspline_value(*order, omega)),
            GeneratorSpec::Daubechies { filter, depth } => {
                let taps = filter.coefficients()?;
                let v = daubechies_value(&taps, *depth, omega);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::Numerical(format!("non-finite product at ω = {omega}")));
                }
                Ok(v)
            }
            GeneratorSpec::Gaussian { width } => Ok(Complex64::new((-PI * (width * omega).powi(2)).exp(), 0.0)),
            GeneratorSpec::Samples { .. } => {
                Err(Error::InvalidArgument("sampled generators have no point evaluator".into()))
            }
        }
    }
}

fn check_finite(values: &[Complex64]) -> Result<()> {
    match values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        Some(pos) => Err(Error::InvalidSpectrum(format!("non-finite sample at flat index {pos}"))),
        None => Ok(()),
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

fn bspline_value(order: u32, omega: f64) -> Complex64 {
    let base = Complex64::from_polar(1.0, -PI * omega) * sinc(omega);
    base.powu(order + 1)
}

/// Two-scale symbol `m₀(ξ) = 2^{-1/2} Σ_n h_n e^{-2πinξ}`.
fn two_scale_symbol(taps: &[f64], xi: f64) -> Complex64 {
    let s: Complex64 = taps
        .iter()
        .enumerate()
        .map(|(n, &h)| Complex64::from_polar(h, -2.0 * PI * n as f64 * xi))
        .sum();
    s / SQRT_2
}

fn daubechies_value(taps: &[f64], depth: u32, omega: f64) -> Complex64 {
    let mut prod = Complex64::new(1.0, 0.0);
    let mut xi = omega;
    for _ in 0..depth {
        xi *= 0.5;
        prod *= two_scale_symbol(taps, xi);
    }
    prod
}

/// Samples `φ̂(ω_i + k)` of one generator on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSpectrum {
    grid: FrequencyGrid,
    values: Vec<Complex64>,
}

impl SampledSpectrum {
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidSpectrum(format!(
                "sample array has length {}, expected {}",
                values.len(),
                grid.len()
            )));
        }
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    pub fn zero(grid: FrequencyGrid) -> Self {
        Self { grid, values: vec![Complex64::zero(); grid.len()] }
    }

    /// Build by evaluating `f(ω_i + k)` at every lattice point.
    pub fn from_fn(grid: FrequencyGrid, mut f: impl FnMut(f64) -> Complex64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.samples_per_unit() {
            for k in grid.offsets() {
                values.push(f(grid.frequency(i, k)));
            }
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, i: usize, k: i64) -> Complex64 {
        self.values[self.grid.index(i, k)]
    }

    /// Entries `φ̂(ω_i + k)` for `k = -K..K`.
    pub fn fiber_slice(&self, i: usize) -> &[Complex64] {
        let len = self.grid.fiber_len();
        &self.values[i * len..(i + 1) * len]
    }

    /// Apply `f(ω, k, value)` pointwise.
    pub fn map(&self, mut f: impl FnMut(usize, i64, Complex64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.grid.samples_per_unit() {
            for k in self.grid.offsets() {
                values.push(f(i, k, self.get(i, k)));
            }
        }
        Self { grid: self.grid, values }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    /// Riemann sum `(1/M) Σ |φ̂|²` over the lattice.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.grid.samples_per_unit() as f64
    }
}

impl std::ops::Add for &SampledSpectrum {
    type Output = SampledSpectrum;

    fn add(self, rhs: &SampledSpectrum) -> SampledSpectrum {
        assert_eq!(self.grid, rhs.grid, "adding spectra on different grids");
        SampledSpectrum {
            grid: self.grid,
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Evaluate a generator on the lattice of `grid`.
pub fn evaluate(spec: &GeneratorSpec, grid: &FrequencyGrid) -> Result<SampledSpectrum> {
    spec.validate()?;
    match spec {
        GeneratorSpec::PiecewiseConstant { .. } => spec.as_piecewise().unwrap()?.sample(grid),
        GeneratorSpec::Samples { grid: own, values } => {
            if own != grid {
                return Err(Error::GridMismatch(format!(
                    "samples declared on M={}, K={} ({:?}) but evaluated on M={}, K={} ({:?})",
                    own.samples_per_unit(),
                    own.fiber_half_width(),
                    own.sampling(),
                    grid.samples_per_unit(),
                    grid.fiber_half_width(),
                    grid.sampling()
                )));
            }
            SampledSpectrum::new(*grid, values.clone())
        }
        GeneratorSpec::Daubechies { filter, depth } => {
            let taps = filter.coefficients()?;
            let s = SampledSpectrum::from_fn(*grid, |w| daubechies_value(&taps, *depth, w));
            s.map_err(|_| Error::Numerical("Daubechies product produced non-finite values".into()))
        }
        GeneratorSpec::Bspline { order } => SampledSpectrum::from_fn(*grid, |w| bspline_value(*order, w)),
        GeneratorSpec::Gaussian { width } => {
            SampledSpectrum::from_fn(*grid, |w| Complex64::new((-PI * (width * w).powi(2)).exp(), 0.0))
        }
    }
}

/// Energy `(1/M) Σ_{K ≤ |k+½| < 2K} |φ̂(ω_i + k)|²` discarded by truncating
/// fibers to `[-K, K)`, estimated on a grid of doubled half-width. `None`
/// for raw samples, which cannot be extended.
pub fn tail_energy(spec: &GeneratorSpec, grid: &FrequencyGrid) -> Result<Option<f64>> {
    if matches!(spec, GeneratorSpec::Samples { .. }) {
        return Ok(None);
    }
    let wide = grid.with_fiber_half_width(2 * grid.fiber_half_width())?;
    let s = evaluate(spec, &wide)?;
    let k_half = grid.fiber_half_width() as i64;
    let mut tail = 0.0;
    for i in 0..wide.samples_per_unit() {
        for k in wide.offsets() {
            if k < -k_half || k >= k_half {
                tail += s.get(i, k).norm_sqr();
            }
        }
    }
    Ok(Some(tail / grid.samples_per_unit() as f64))
}

/// Convert a rational to `f64` for reporting.
pub fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Ratio<i64> {
        Ratio::from_integer(n)
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn unit_interval() {
        let s = PiecewiseConstantSpectrum::new(&[r(0), r(1)], &[one()]).unwrap();
        assert_eq!(s.value_at(Ratio::new(1, 2)), one());
        assert_eq!(s.value_at(r(0)), one());
        assert_eq!(s.value_at(r(1)), Complex64::zero());
        assert_eq!(s.value_at(r(-1)), Complex64::zero());
        assert_eq!(s.total_support_measure(), r(1));
    }

    #[test]
    fn canonical_form_drops_zero_interval() {
        let s = PiecewiseConstantSpectrum::new(&[r(0), r(1), r(2), r(3)], &[one(), Complex64::zero(), one()]).unwrap();
        assert_eq!(s, indicator_of(&[(0, 1), (2, 3)]));
        assert_eq!(s.pieces().count(), 2);
        let (b, v) = s.breakpoints_and_values();
        assert_eq!(b, vec![r(0), r(1), r(2), r(3)]);
        assert_eq!(v, vec![one(), Complex64::zero(), one()]);
    }

    #[test]
    fn canonical_form_merges_equal_neighbours() {
        let s = PiecewiseConstantSpectrum::new(&[r(0), r(1), r(2)], &[one(), one()]).unwrap();
        assert_eq!(s, indicator_of(&[(0, 2)]));
    }

    #[test]
    fn rejects_repeated_breakpoint() {
        let err = PiecewiseConstantSpectrum::new(&[r(0), r(1), r(1), r(2)], &[one(), one(), one()]);
        assert!(matches!(err, Err(Error::InvalidSpectrum(_))));
    }

    #[test]
    fn rejects_non_finite_and_bad_lengths() {
        assert!(PiecewiseConstantSpectrum::new(&[r(0), r(1)], &[Complex64::new(f64::NAN, 0.0)]).is_err());
        assert!(PiecewiseConstantSpectrum::new(&[r(0), r(1)], &[one(), one()]).is_err());
    }

    #[test]
    fn support_measure_examples() {
        let s = indicator_of(&[(0, 1), (2, 3)]);
        assert_eq!(s.support_measure(r(-5), r(5)).unwrap(), r(2));
        assert_eq!(s.support_measure(r(0), r(2)).unwrap(), r(1));
        assert_eq!(PiecewiseConstantSpectrum::zero().support_measure(r(-3), r(7)).unwrap(), r(0));
        assert!(s.support_measure(r(2), r(2)).is_err());
    }

    #[test]
    fn misaligned_grid_is_refused() {
        let s = PiecewiseConstantSpectrum::new(&[r(0), Ratio::new(1, 3)], &[one()]).unwrap();
        let grid = FrequencyGrid::new(8, 2).unwrap();
        assert!(matches!(s.sample(&grid), Err(Error::GridMisaligned { denominator: 3, .. })));
        assert!(s.sample(&FrequencyGrid::new(9, 2).unwrap()).is_ok());
    }

    #[test]
    fn grid_validation() {
        assert!(FrequencyGrid::new(1, 4).is_err());
        assert!(FrequencyGrid::new(4, 0).is_err());
        let g = FrequencyGrid::new(4, 2).unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g.offsets().collect::<Vec<_>>(), vec![-2, -1, 0, 1]);
        assert_eq!(g.omega(0), 0.125);
        assert_eq!(g.omega_exact(3), Ratio::new(7, 8));
        let left = FrequencyGrid::with_sampling(4, 2, Sampling::Left).unwrap();
        assert_eq!(left.omega(3), 0.75);
    }

    #[test]
    fn grid_json_uses_short_aliases() {
        let g: FrequencyGrid = serde_json::from_str(r#"{"M": 16, "K": 3}"#).unwrap();
        assert_eq!((g.samples_per_unit(), g.fiber_half_width(), g.sampling()), (16, 3, Sampling::Midpoint));
        assert!(serde_json::from_str::<FrequencyGrid>(r#"{"M": 1, "K": 3}"#).is_err());
    }

    #[test]
    fn box_spectrum_values() {
        let haar = GeneratorSpec::Bspline { order: 0 };
        assert_eq!(haar.value_at(0.0).unwrap(), one());
        // ∫₀¹ e^{-2πiωx} dx at ω = 1/2, by midpoint quadrature.
        let n = 200_000;
        let quad: Complex64 = (0..n)
            .map(|j| {
                let x = (j as f64 + 0.5) / n as f64;
                Complex64::from_polar(1.0 / n as f64, -PI * x)
            })
            .sum();
        let v = haar.value_at(0.5).unwrap();
        assert!((v - quad).norm() < 1e-9, "{v} vs {quad}");
        assert!((v.norm() - 2.0 / PI).abs() < 1e-12);
        assert!((v - Complex64::new(0.0, -2.0 / PI)).norm() < 1e-12);
    }

    #[test]
    fn daubechies_is_normalized_at_origin() {
        for name in DAUBECHIES_NAMES {
            let spec = GeneratorSpec::Daubechies { filter: DaubechiesFilter::Named(name.to_string()), depth: 20 };
            assert!((spec.value_at(0.0).unwrap() - one()).norm() < 1e-10, "{name}");
        }
    }

    #[test]
    fn d2_product_matches_box() {
        // The two-tap filter is the Haar filter; its infinite product is the box transform.
        let spec = GeneratorSpec::Daubechies { filter: DaubechiesFilter::Named("D2".into()), depth: 40 };
        for &w in &[0.3, 1.7, -2.25, 5.5] {
            let got = spec.value_at(w).unwrap();
            let want = bspline_value(0, w);
            assert!((got - want).norm() < 1e-9, "ω={w}: {got} vs {want}");
        }
    }

    #[test]
    fn daubechies_filter_must_sum_to_sqrt2() {
        let bad = GeneratorSpec::Daubechies { filter: DaubechiesFilter::Coefficients(vec![0.5, 0.5]), depth: 20 };
        assert!(bad.validate().is_err());
        let unknown = GeneratorSpec::Daubechies { filter: DaubechiesFilter::Named("D5".into()), depth: 20 };
        assert!(unknown.validate().is_err());
        let zero_depth = GeneratorSpec::Daubechies { filter: DaubechiesFilter::Named("D4".into()), depth: 0 };
        assert!(zero_depth.validate().is_err());
    }

    #[test]
    fn samples_require_matching_grid() {
        let grid = FrequencyGrid::new(4, 2).unwrap();
        let spec = GeneratorSpec::Samples { grid, values: vec![one(); grid.len()] };
        assert!(evaluate(&spec, &grid).is_ok());
        let other = FrequencyGrid::new(8, 2).unwrap();
        assert!(matches!(evaluate(&spec, &other), Err(Error::GridMismatch(_))));
        let short = GeneratorSpec::Samples { grid, values: vec![one(); 3] };
        assert!(short.validate().is_err());
    }

    #[test]
    fn piecewise_sampling_matches_pointwise_lookup() {
        let s = PiecewiseConstantSpectrum::new(
            &[Ratio::new(-3, 2), Ratio::new(1, 4), r(1), Ratio::new(9, 4)],
            &[Complex64::new(0.5, -1.0), Complex64::new(2.0, 0.0), Complex64::new(0.0, 3.0)],
        )
        .unwrap();
        for sampling in [Sampling::Midpoint, Sampling::Left] {
            let grid = FrequencyGrid::with_sampling(8, 3, sampling).unwrap();
            let sampled = s.sample(&grid).unwrap();
            for i in 0..8 {
                for k in grid.offsets() {
                    assert_eq!(sampled.get(i, k), s.value_at(grid.omega_exact(i) + k));
                }
            }
        }
    }

    #[test]
    fn tail_energy_of_box_is_small_and_positive() {
        let grid = FrequencyGrid::new(64, 16).unwrap();
        let tail = tail_energy(&GeneratorSpec::Bspline { order: 0 }, &grid).unwrap().unwrap();
        // ∫_{|ω|>16} sinc² ≈ 2/(π²·16)
        assert!(tail > 0.0 && tail < 2.0 / (PI * PI * 16.0) * 1.1, "{tail}");
        let inside = tail_energy(&GeneratorSpec::from_piecewise(&indicator_of(&[(0, 1)])), &grid).unwrap();
        assert_eq!(inside, Some(0.0));
    }

    #[test]
    fn evaluate_is_deterministic() {
        let grid = FrequencyGrid::new(32, 8).unwrap();
        let spec = GeneratorSpec::Daubechies { filter: DaubechiesFilter::Named("D6".into()), depth: 20 };
        assert_eq!(evaluate(&spec, &grid).unwrap(), evaluate(&spec, &grid).unwrap());
    }

    #[test]
    fn generator_spec_json_shape() {
        let json = r#"{"type":"piecewise_constant","breakpoints":["0","1/2"],"values":[[1,0]]}"#;
        let spec: GeneratorSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec, GeneratorSpec::piecewise(&[r(0), Ratio::new(1, 2)], &[one()]));
        let back = serde_json::to_string(&spec).unwrap();
        assert_eq!(back, r#"{"type":"piecewise_constant","breakpoints":["0","1/2"],"values":[[1.0,0.0]]}"#);
        let d: GeneratorSpec = serde_json::from_str(r#"{"type":"daubechies","filter":"D4"}"#).unwrap();
        assert_eq!(d, GeneratorSpec::Daubechies { filter: DaubechiesFilter::Named("D4".into()), depth: 20 });
        assert!(serde_json::from_str::<GeneratorSpec>(r#"{"type":"wavelet"}"#).is_err());
    }
}
