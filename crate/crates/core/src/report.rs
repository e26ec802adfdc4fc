//! The analysis pipeline and its JSON / CSV outputs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::AnalysisConfig;
use crate::error::{Error, Result};
use crate::fiber::gramian_field;
use crate::frames::{cutoff_frame_check, frame_bounds, CutoffFrameReport, FrameBounds};
use crate::invariance::{order_from_context, zero_set_from_context, DeclaredOrder, LevelSets, OrderResult, RankContext, ZeroSetCheck};
use crate::oracle::{invariance_oracle, OracleVerdict};
use crate::spectrum::{evaluate, ratio_to_f64, tail_energy, FrequencyGrid, SampledSpectrum};

pub const SCHEMA: &str = "sis-invariance/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSummary {
    pub index: usize,
    pub kind: String,
    /// `(1/M) Σ |φ̂|²` over the truncated lattice.
    pub energy: f64,
    pub max_abs: f64,
    /// Energy beyond the fiber window, when the generator can be extended.
    pub tail_energy: Option<f64>,
    /// Exact `|supp φ̂|` for piecewise-constant generators, as `"p/q"`.
    pub support_measure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportBudget {
    pub level_sets: LevelSets,
    pub zero_sets: Vec<ZeroSetCheck>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FramesBlock {
    #[serde(rename = "A")]
    pub lower: f64,
    #[serde(rename = "B")]
    pub upper: f64,
    pub parseval: bool,
    pub bounds: FrameBounds,
    pub cutoff: Option<CutoffFrameReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleBlock {
    pub verdicts: Vec<OracleVerdict>,
    /// Oracle and rank test agree for every tested `n`.
    pub agreement: bool,
    pub disagreements: Vec<usize>,
}

/// Per-cell data for the CSV bundle. Not part of the JSON report.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldData {
    pub grid: FrequencyGrid,
    pub dimension: Vec<usize>,
    pub eigenvalues: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub schema: String,
    pub config: AnalysisConfig,
    pub generators: Vec<GeneratorSummary>,
    pub dimension: LevelSets,
    pub order: Option<OrderResult>,
    pub ti_check: bool,
    pub support: Option<SupportBudget>,
    pub frames: Option<FramesBlock>,
    pub oracle: Option<OracleBlock>,
    /// Order search obeys the subgroup law.
    pub consistent: bool,
    pub warnings: Vec<String>,
    pub caveats: Vec<String>,
    #[serde(skip)]
    pub fields: Option<FieldData>,
}

impl InvarianceReport {
    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn declared_order(&self) -> Option<DeclaredOrder> {
        self.order.as_ref().map(|o| o.declared)
    }
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.at_stage(name))
}

/// Run every enabled analysis on the configured generators.
pub fn run_analysis(config: &AnalysisConfig) -> Result<InvarianceReport> {
    config.validate()?;
    let grid = config.grid;
    let m = config.generators.len();
    let mut warnings = Vec::new();
    let mut caveats = vec![
        "almost-everywhere statements are checked at every evaluated grid cell; null sets are not represented".to_string(),
        "essential infima and suprema are taken as minima and maxima over grid cells".to_string(),
    ];

    let phi: Vec<SampledSpectrum> =
        stage("evaluate generators", config.generators.iter().map(|g| evaluate(g, &grid)).collect())?;

    let mut generators = Vec::with_capacity(m);
    for (index, (spec, s)) in config.generators.iter().zip(&phi).enumerate() {
        let tail = stage("tail energy", tail_energy(spec, &grid))?;
        let support = match spec.as_piecewise() {
            Some(pc) => Some(stage("support measure", pc)?.total_support_measure()),
            None => None,
        };
        if let Some(t) = tail.filter(|&t| t > 0.0) {
            caveats.push(format!("generator {index}: truncation to |k| < K discards energy {t:.3e}"));
        }
        generators.push(GeneratorSummary {
            index,
            kind: spec.type_name().to_string(),
            energy: s.energy(),
            max_abs: s.max_abs(),
            tail_energy: tail,
            support_measure: support.map(|r| r.to_string()),
        });
    }

    let ctx = stage("rank analysis", RankContext::new(&phi, &grid, config.rel_tol))?;
    let dimension = LevelSets::from_ranks(ctx.ranks(), m);
    let ti_check = ctx.ti_failure().is_none();

    let need_verdicts = config.analyses.order || config.analyses.support_bounds || config.analyses.frames || config.analyses.oracle;
    let order = if need_verdicts { Some(stage("order search", order_from_context(&ctx, config.n_max))?) } else { None };

    let mut consistent = true;
    if let Some(o) = &order {
        if !o.consistent {
            consistent = false;
            for v in &o.divisor_violations {
                warnings.push(format!("subgroup law violated: 1/{} passes but divisor {} fails (numerical tolerance)", v.n, v.divisor));
            }
            for n in &o.non_dividing {
                warnings.push(format!("subgroup law violated: 1/{n} passes but does not divide the declared order"));
            }
        }
    }

    if ti_check && m == 1 {
        if let Some(measure) = generators[0].support_measure.as_ref() {
            let r: num_rational::Ratio<i64> = measure.parse::<crate::spectrum::Rational>().map(|r| r.0).unwrap_or_default();
            if ratio_to_f64(r) > 1.0 {
                warnings.push(format!("translation-invariance certificate with support measure {measure} > 1"));
            }
        }
    }

    let invariant_ns: Vec<usize> =
        order.as_ref().map(|o| o.verdicts.iter().filter(|v| v.invariant).map(|v| v.n).collect()).unwrap_or_default();

    let support = if config.analyses.support_bounds {
        let k_half = grid.fiber_half_width();
        let mut zero_sets = Vec::new();
        for &n in &invariant_ns {
            let start = if n <= k_half {
                0.0
            } else if n <= 2 * k_half {
                -(k_half as f64)
            } else {
                caveats.push(format!("zero-set check for n = {n} skipped: interval longer than the fiber window"));
                continue;
            };
            zero_sets.push(stage("support bounds", zero_set_from_context(&ctx, n, start))?);
        }
        if !invariant_ns.is_empty() {
            caveats.push(format!("zero-set measurements carry a grid slack of 2n/M (M = {})", grid.samples_per_unit()));
        }
        let pass = zero_sets.iter().all(|z| z.pass);
        if !pass {
            warnings.push("measured zero set below the invariance lower bound".into());
        }
        Some(SupportBudget { level_sets: dimension.clone(), zero_sets, pass })
    } else {
        None
    };

    let frames = if config.analyses.frames {
        match frame_bounds(&phi, &grid, config.rel_tol) {
            Ok(bounds) => {
                let cutoff_n = match order.as_ref().map(|o| o.declared) {
                    Some(DeclaredOrder::Exact(n)) if n >= 2 => Some(n),
                    Some(DeclaredOrder::AtLeast(n)) => Some(n),
                    _ => None,
                };
                let cutoff = match cutoff_n {
                    Some(n) => Some(stage("cutoff frames", cutoff_frame_check(&phi, n, &grid, config.rel_tol))?),
                    None => None,
                };
                if cutoff.as_ref().is_some_and(|c| !c.pass) {
                    warnings.push("cutoff frame bounds exceed the bounds of the original system".into());
                }
                Some(FramesBlock { lower: bounds.lower, upper: bounds.upper, parseval: bounds.parseval, bounds, cutoff })
            }
            Err(Error::TrivialSpace) => {
                warnings.push("frame bounds skipped: trivial space".into());
                None
            }
            Err(e) => return Err(e.at_stage("frame bounds")),
        }
    } else {
        None
    };

    let oracle = if config.analyses.oracle {
        let verdicts: Vec<OracleVerdict> =
            stage("oracle", (2..=config.n_max).map(|n| invariance_oracle(&phi, n, &grid, config.oracle_tol)).collect())?;
        let disagreements: Vec<usize> = verdicts
            .iter()
            .filter(|v| order.as_ref().and_then(|o| o.is_invariant(v.n)).is_some_and(|rank| rank != v.invariant))
            .map(|v| v.n)
            .collect();
        for n in &disagreements {
            warnings.push(format!("oracle and rank test disagree at n = {n}"));
        }
        Some(OracleBlock { agreement: disagreements.is_empty(), disagreements, verdicts })
    } else {
        None
    };

    let field = stage("gramian field", gramian_field(&phi, &grid))?;
    let eigenvalues = stage("eigenvalues", field.eigenvalues())?;
    let fields = Some(FieldData { grid, dimension: ctx.ranks().to_vec(), eigenvalues });

    Ok(InvarianceReport {
        schema: SCHEMA.to_string(),
        config: config.clone(),
        generators,
        dimension,
        order: if config.analyses.order { order } else { None },
        ti_check,
        support,
        frames,
        oracle,
        consistent,
        warnings,
        caveats,
        fields,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    CsvBundle,
}

fn write_file(path: &Path, data: &[u8]) -> Result<()> {
    fs::write(path, data).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to a Vec cannot fail");
    buf
}

/// Write the report as one JSON file at `location`, or as a directory of CSV
/// files. Returns the paths written.
pub fn emit_report(report: &InvarianceReport, format: ReportFormat, location: &Path) -> Result<Vec<PathBuf>> {
    match format {
        ReportFormat::Json => {
            write_file(location, report.to_json()?.as_bytes())?;
            Ok(vec![location.to_path_buf()])
        }
        ReportFormat::CsvBundle => {
            let fields = report
                .fields
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("report carries no per-cell data (was it reparsed from JSON?)".into()))?;
            fs::create_dir_all(location).map_err(|source| Error::Io { path: location.to_path_buf(), source })?;
            let grid = fields.grid;
            let mut files: Vec<(PathBuf, Vec<u8>)> = Vec::new();

            files.push((
                location.join("dimension.csv"),
                csv_bytes(|out| {
                    use std::io::Write;
                    writeln!(out, "omega,dimension")?;
                    for (i, d) in fields.dimension.iter().enumerate() {
                        writeln!(out, "{},{}", grid.omega(i), d)?;
                    }
                    Ok(())
                }),
            ));
            files.push((
                location.join("eigenvalues.csv"),
                csv_bytes(|out| {
                    use std::io::Write;
                    write!(out, "omega")?;
                    for j in 1..=report.generators.len() {
                        write!(out, ",lambda_{j}")?;
                    }
                    writeln!(out)?;
                    for (i, row) in fields.eigenvalues.iter().enumerate() {
                        write!(out, "{}", grid.omega(i))?;
                        for v in row {
                            write!(out, ",{v:e}")?;
                        }
                        writeln!(out)?;
                    }
                    Ok(())
                }),
            ));
            if let Some(order) = &report.order {
                for v in &order.verdicts {
                    files.push((location.join(format!("rank_n{}.csv", v.n)), csv_bytes(|out| v.write_csv(&grid, out))));
                }
            }
            if let Some(oracle) = &report.oracle {
                for v in &oracle.verdicts {
                    files.push((location.join(format!("residual_n{}.csv", v.n)), csv_bytes(|out| v.write_csv(&grid, out))));
                }
            }
            for (path, data) in &files {
                write_file(path, data)?;
            }
            Ok(files.into_iter().map(|(p, _)| p).collect())
        }
    }
}
