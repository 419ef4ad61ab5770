//! Seeded Monte-Carlo benchmark harness: generate a test problem, add noise
//! at each configured level, pick parameters per trial, solve with every
//! configured method, and aggregate mean relative errors into a report.
//!
//! Reproducibility contract: a report is a pure function of
//! `(ExperimentConfig, seed)`. Every trial derives its own RNG stream from
//! `(seed, level index, trial index)`, so trials are independent of
//! execution order, and aggregation always sums in ascending trial order.
//! Running trials in parallel therefore yields byte-identical reports.

use crate::error::{Error, Result};
use crate::filters::{MethodFamily, RegMethod, DEFAULT_FAMILIES};
use crate::linalg::{dct_matrix, random_orthogonal, svd, DenseMatrix, SvdFactorization};
use crate::noise::{colored_noise, white_noise, RngStream};
use crate::problems::{ProblemKind, TestProblem};
use crate::select::{
    optimal_for_family, relative_error_for_method, select_shared, DiscrepancySpec,
};

/// Orthonormal basis used to color noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// Left singular vectors of the problem matrix.
    Svd,
    /// A fresh random orthogonal matrix drawn per trial.
    RandOrth,
    /// The discrete cosine transform basis.
    Dct,
}

impl BasisKind {
    pub fn token(self) -> &'static str {
        match self {
            BasisKind::Svd => "svd",
            BasisKind::RandOrth => "randorth",
            BasisKind::Dct => "dct",
        }
    }

    pub fn parse(s: &str) -> Option<BasisKind> {
        [BasisKind::Svd, BasisKind::RandOrth, BasisKind::Dct]
            .into_iter()
            .find(|b| b.token() == s)
    }
}

/// Noise model applied to the exact right-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    White,
    Colored { alpha: f64, basis: BasisKind },
}

/// How the regularization parameter is chosen in each trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    /// Newton-solved discrepancy `mu` shared by all `mu`-tuned methods plus
    /// the minimal discrepancy truncation index for truncated SVD.
    Discrepancy,
    /// Per-method search for the parameter minimizing the true error
    /// (requires knowing the exact solution; a best-case baseline).
    Optimal,
}

/// Full description of one benchmark run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub n: usize,
    /// Relative noise levels `||e|| / ||b_true||`, each in (0, 1).
    pub noise_levels: Vec<f64>,
    pub noise: NoiseKind,
    pub methods: Vec<MethodFamily>,
    pub runs: usize,
    /// Discrepancy safety factor, at least 1.
    pub eta: f64,
    pub seed: u64,
    pub mode: SelectionMode,
}

impl ExperimentConfig {
    /// Defaults matching the reference experiments: n = 200, four noise
    /// levels from 10% down to 0.1%, white noise, the four standard
    /// methods, 1000 runs, eta = 1, discrepancy selection.
    pub fn new(problem: ProblemKind) -> ExperimentConfig {
        ExperimentConfig {
            problem,
            n: 200,
            noise_levels: vec![0.10, 0.01, 0.005, 0.001],
            noise: NoiseKind::White,
            methods: DEFAULT_FAMILIES.to_vec(),
            runs: 1000,
            eta: 1.0,
            seed: 0,
            mode: SelectionMode::Discrepancy,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs < 1 {
            return Err(Error::InvalidParam {
                name: "runs",
                details: "at least one run is required".into(),
            });
        }
        if self.n < 4 {
            return Err(Error::InvalidParam {
                name: "n",
                details: format!("problem size must be at least 4, got {}", self.n),
            });
        }
        if self.noise_levels.is_empty() {
            return Err(Error::InvalidParam {
                name: "noise_levels",
                details: "at least one noise level is required".into(),
            });
        }
        for &level in &self.noise_levels {
            if !(level > 0.0 && level < 1.0) {
                return Err(Error::InvalidParam {
                    name: "noise_levels",
                    details: format!("levels must lie strictly in (0, 1), got {level}"),
                });
            }
        }
        if self.eta < 1.0 || !self.eta.is_finite() {
            return Err(Error::InvalidParam {
                name: "eta",
                details: format!("eta must be finite and at least 1, got {}", self.eta),
            });
        }
        if let NoiseKind::Colored { alpha, .. } = self.noise {
            if alpha < 0.0 || !alpha.is_finite() {
                return Err(Error::InvalidParam {
                    name: "alpha",
                    details: format!("alpha must be nonnegative and finite, got {alpha}"),
                });
            }
        }
        Ok(())
    }
}

/// Aggregate statistics of one (noise level, method) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    pub mean_rel_err: f64,
    /// Sample standard deviation (zero for a single included run).
    pub std_rel_err: f64,
    /// Trials included in the mean.
    pub runs: usize,
    /// Trials excluded at this level because the discrepancy target was
    /// infeasible.
    pub excluded: usize,
}

/// One report row: every method's statistics at one noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRow {
    pub noise_level: f64,
    pub cells: Vec<CellStats>,
}

/// Benchmark outcome: one row per noise level, one column per method.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    /// Method column labels, in configured order.
    pub methods: Vec<String>,
    pub rows: Vec<LevelRow>,
}

fn method_mu(method: &RegMethod) -> Option<f64> {
    use crate::filters::CutParam;
    match *method {
        RegMethod::TikhonovIdentity { mu }
        | RegMethod::FrMod { mu }
        | RegMethod::ShiftK { mu }
        | RegMethod::Scaled { mu }
        | RegMethod::ScaledK { mu }
        | RegMethod::Theta { mu, .. }
        | RegMethod::CutK(CutParam::Mu(mu)) => Some(mu),
        RegMethod::Tsvd { .. } | RegMethod::CutK(CutParam::K(_)) => None,
    }
}

// One Monte-Carlo trial: draw noise, select parameters, solve with every
// method. Ok(None) marks a trial excluded because the discrepancy target
// was infeasible for this draw.
fn run_trial(
    problem: &TestProblem,
    factorization: &SvdFactorization,
    fixed_basis: Option<&DenseMatrix>,
    config: &ExperimentConfig,
    level: f64,
    level_idx: usize,
    trial_idx: usize,
) -> Result<Option<Vec<f64>>> {
    let trial_stream = RngStream::new(config.seed, 0)
        .substream(level_idx as u64)
        .substream(trial_idx as u64);
    let noise_stream = trial_stream.substream(2);

    let e = match config.noise {
        NoiseKind::White => white_noise(&problem.b_true, level, &noise_stream)?,
        NoiseKind::Colored { alpha, basis } => {
            let fresh;
            let basis_matrix = match basis {
                BasisKind::RandOrth => {
                    let mut rng = trial_stream.substream(1).rng();
                    fresh = random_orthogonal(problem.b_true.len(), &mut rng);
                    &fresh
                }
                _ => fixed_basis.expect("fixed basis prepared for svd/dct"),
            };
            colored_noise(basis_matrix, alpha, level, &problem.b_true, &noise_stream)?
        }
    };
    let b = problem.b_true.add(&e);
    let epsilon = e.norm();
    let sp = crate::filters::to_spectral(factorization, &b);

    let methods: Vec<RegMethod> = match config.mode {
        SelectionMode::Discrepancy => {
            let spec = DiscrepancySpec::new(config.eta, epsilon)?;
            let selection = match select_shared(&sp, &spec) {
                Ok(s) => s,
                Err(Error::DiscrepancyUnattainable { .. })
                | Err(Error::NoiseDominatesData { .. }) => return Ok(None),
                Err(other) => return Err(other),
            };
            let methods: Vec<RegMethod> = config
                .methods
                .iter()
                .map(|f| f.instantiate(selection.mu, selection.tsvd_k))
                .collect();
            // Every mu-tuned method must see the identical shared mu.
            debug_assert!(methods
                .iter()
                .all(|m| method_mu(m).is_none_or(|v| v == selection.mu)));
            methods
        }
        SelectionMode::Optimal => {
            let mut methods = Vec::with_capacity(config.methods.len());
            for family in &config.methods {
                methods.push(optimal_for_family(&sp, family, &problem.x_true)?.method);
            }
            methods
        }
    };

    let mut errors = Vec::with_capacity(methods.len());
    for method in &methods {
        errors.push(relative_error_for_method(&sp, method, &problem.x_true)?);
    }
    Ok(Some(errors))
}

fn serial_outcomes(
    problem: &TestProblem,
    factorization: &SvdFactorization,
    fixed_basis: Option<&DenseMatrix>,
    config: &ExperimentConfig,
    level: f64,
    level_idx: usize,
) -> Result<Vec<Option<Vec<f64>>>> {
    (0..config.runs)
        .map(|t| {
            run_trial(
                problem,
                factorization,
                fixed_basis,
                config,
                level,
                level_idx,
                t,
            )
        })
        .collect()
}

#[cfg(feature = "parallel")]
fn parallel_outcomes(
    problem: &TestProblem,
    factorization: &SvdFactorization,
    fixed_basis: Option<&DenseMatrix>,
    config: &ExperimentConfig,
    level: f64,
    level_idx: usize,
) -> Result<Vec<Option<Vec<f64>>>> {
    use rayon::prelude::*;
    (0..config.runs)
        .into_par_iter()
        .map(|t| {
            run_trial(
                problem,
                factorization,
                fixed_basis,
                config,
                level,
                level_idx,
                t,
            )
        })
        .collect()
}

/// Runs the experiment with explicit control over trial parallelism. The
/// report is byte-identical either way; this entry point exists so that the
/// equality is testable. Without the `parallel` feature both paths are
/// serial.
pub fn run_experiment_with_parallelism(
    config: &ExperimentConfig,
    parallel: bool,
) -> Result<ExperimentReport> {
    config.validate()?;
    let problem = config.problem.build(config.n)?;
    let factorization = svd(&problem.a)?;
    let fixed_basis = match config.noise {
        NoiseKind::Colored {
            basis: BasisKind::Svd,
            ..
        } => Some(factorization.u.clone()),
        NoiseKind::Colored {
            basis: BasisKind::Dct,
            ..
        } => Some(dct_matrix(problem.b_true.len())),
        _ => None,
    };

    let mut rows = Vec::with_capacity(config.noise_levels.len());
    for (level_idx, &level) in config.noise_levels.iter().enumerate() {
        #[cfg(feature = "parallel")]
        let outcomes = if parallel {
            parallel_outcomes(
                &problem,
                &factorization,
                fixed_basis.as_ref(),
                config,
                level,
                level_idx,
            )?
        } else {
            serial_outcomes(
                &problem,
                &factorization,
                fixed_basis.as_ref(),
                config,
                level,
                level_idx,
            )?
        };
        #[cfg(not(feature = "parallel"))]
        let outcomes = {
            let _ = parallel;
            serial_outcomes(
                &problem,
                &factorization,
                fixed_basis.as_ref(),
                config,
                level,
                level_idx,
            )?
        };

        // Aggregate in ascending trial order: two passes, mean then sample
        // standard deviation.
        let mut excluded = 0usize;
        let mut per_method: Vec<Vec<f64>> = vec![Vec::new(); config.methods.len()];
        for outcome in outcomes {
            match outcome {
                Some(errors) => {
                    for (column, error) in per_method.iter_mut().zip(errors) {
                        column.push(error);
                    }
                }
                None => excluded += 1,
            }
        }
        if excluded as f64 > 0.01 * config.runs as f64 {
            return Err(Error::ExcessiveExclusions {
                excluded,
                total: config.runs,
            });
        }
        let cells = per_method
            .iter()
            .map(|errors| {
                let included = errors.len();
                let mean = errors.iter().sum::<f64>() / included as f64;
                let variance = if included > 1 {
                    errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>()
                        / (included - 1) as f64
                } else {
                    0.0
                };
                CellStats {
                    mean_rel_err: mean,
                    std_rel_err: variance.sqrt(),
                    runs: included,
                    excluded,
                }
            })
            .collect();
        rows.push(LevelRow {
            noise_level: level,
            cells,
        });
    }

    Ok(ExperimentReport {
        methods: config.methods.iter().map(|f| f.token()).collect(),
        rows,
    })
}

/// Runs the configured experiment. Trials execute in parallel when the
/// `parallel` feature is enabled (the default); results do not depend on it.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with_parallelism(config, cfg!(feature = "parallel"))
}

/// Output encoding for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl ReportFormat {
    pub fn token(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
        }
    }

    pub fn parse(s: &str) -> Option<ReportFormat> {
        [ReportFormat::Csv, ReportFormat::Markdown]
            .into_iter()
            .find(|f| f.token() == s)
    }
}

/// Serializes a report. CSV rows carry full precision (shortest
/// round-trip decimals, so parsing them back reproduces the exact values);
/// the markdown table mirrors the layout of a published comparison table
/// with two-significant-digit means.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => {
            let mut out =
                String::from("noise_level,method,mean_rel_err,std_rel_err,runs,excluded\n");
            for row in &report.rows {
                for (method, cell) in report.methods.iter().zip(&row.cells) {
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        row.noise_level,
                        method,
                        cell.mean_rel_err,
                        cell.std_rel_err,
                        cell.runs,
                        cell.excluded
                    ));
                }
            }
            out
        }
        ReportFormat::Markdown => {
            let mut out = String::from("| noise level |");
            for method in &report.methods {
                out.push_str(&format!(" {method} |"));
            }
            out.push('\n');
            out.push_str("| --- |");
            for _ in &report.methods {
                out.push_str(" --- |");
            }
            out.push('\n');
            for row in &report.rows {
                out.push_str(&format!("| {} |", row.noise_level));
                for cell in &row.cells {
                    out.push_str(&format!(" {:.2e} |", cell.mean_rel_err));
                }
                out.push('\n');
            }
            out
        }
    }
}
