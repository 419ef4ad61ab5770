//! Regularization methods as diagonal modifications of the squared spectrum.
//!
//! Every method here solves `min ||Ax - b||` through the SVD by replacing the
//! squared singular values `sigma_j^2` with `sigma_j^2 + d_j^2` and weighting
//! the spectral coefficients accordingly; the methods differ only in the
//! diagonal `d_j^2` they add. Classical Tikhonov adds a constant `mu^2`;
//! truncated SVD and the cut operator zero out trailing components; the
//! shifted, scaled, and blended variants add `mu^2`-sized terms only past a
//! truncation index `k` chosen so the modified diagonal stays nonincreasing.
//!
//! The filter-factor view is equivalent: component `j` of the naive inverse
//! solution is damped by `phi_j = sigma_j^2 / (sigma_j^2 + d_j^2)`, and
//! [`filter_factors`] evaluates the same numbers from the closed forms, which
//! is what the consistency tests pin down.

use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, SvdFactorization, Vector, DEFAULT_RANK_TOL};

/// A least-squares problem rotated into its singular basis:
/// `min || diag(sigma) x~ - b~ ||` with `x = V x~`, `b~ = U^T b`.
#[derive(Debug, Clone)]
pub struct SpectralProblem {
    /// Singular values, nonincreasing, length `n`.
    pub sigma: Vector,
    /// Rotated data `U^T b`, length `m >= n`; the tail `m - n` components are
    /// outside the range of `A` and only contribute to residuals.
    pub b_tilde: Vector,
    /// Right singular vectors, `n x n`.
    pub v: crate::linalg::DenseMatrix,
    /// Numerical rank of `sigma` at [`DEFAULT_RANK_TOL`].
    pub rank: usize,
}

/// Rotates `b` into the singular basis of a factored matrix.
pub fn to_spectral(f: &SvdFactorization, b: &Vector) -> SpectralProblem {
    assert_eq!(f.u.rows(), b.len(), "to_spectral: dimension mismatch");
    let b_tilde = f.u.transpose().matvec(b);
    SpectralProblem {
        sigma: f.sigma.clone(),
        b_tilde,
        v: f.v.clone(),
        rank: numerical_rank(f.sigma.as_slice(), DEFAULT_RANK_TOL),
    }
}

/// Parameter for the cut operator: either the threshold `mu` (components with
/// `sigma_j <= mu` are cut) or an explicit index `k` (the first `k` are kept).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutParam {
    Mu(f64),
    K(usize),
}

/// A regularization method with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegMethod {
    /// Truncated SVD: keep the first `k` components unchanged, drop the rest.
    Tsvd { k: usize },
    /// Classical Tikhonov with the identity operator: add `mu^2` everywhere.
    TikhonovIdentity { mu: f64 },
    /// Frobenius-closest modification: raise every squared singular value
    /// below `mu^2` up to `mu^2`, leave the rest alone.
    FrMod { mu: f64 },
    /// Shift past a truncation index: add `mu^2` only after the largest `k`
    /// for which the modified diagonal stays nonincreasing.
    ShiftK { mu: f64 },
    /// Cut: zero out every component with `sigma_j <= mu` (or past an
    /// explicit `k`); equivalent to truncated SVD.
    CutK(CutParam),
    /// Scaled shift anchored at the largest singular value: component `j`
    /// moves to `sigma_1^2 (sigma_j^2 + mu^2) / (sigma_1^2 + mu^2)`.
    Scaled { mu: f64 },
    /// Scaled shift applied only past the largest feasible `k`.
    ScaledK { mu: f64 },
    /// Blend between [`RegMethod::ShiftK`] (`theta = 0`) and
    /// [`RegMethod::ScaledK`] (`theta = 1`).
    Theta { mu: f64, theta: f64 },
}

impl RegMethod {
    /// Family name as used in CSV headers and on the command line.
    pub fn family_token(&self) -> String {
        match self {
            RegMethod::Tsvd { .. } => "tsvd".into(),
            RegMethod::TikhonovIdentity { .. } => "tik".into(),
            RegMethod::FrMod { .. } => "frmod".into(),
            RegMethod::ShiftK { .. } => "shiftk".into(),
            RegMethod::CutK(_) => "cutk".into(),
            RegMethod::Scaled { .. } => "scaled".into(),
            RegMethod::ScaledK { .. } => "scaledk".into(),
            RegMethod::Theta { theta, .. } => format!("theta:{theta}"),
        }
    }
}

/// A method family with any structural parameter fixed but the regularization
/// strength left open; the benchmark harness instantiates one per trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodFamily {
    Tsvd,
    TikhonovIdentity,
    FrMod,
    ShiftK,
    CutK,
    Scaled,
    ScaledK,
    Theta { theta: f64 },
}

/// Column order of the classical comparison tables.
pub const DEFAULT_FAMILIES: [MethodFamily; 4] = [
    MethodFamily::FrMod,
    MethodFamily::TikhonovIdentity,
    MethodFamily::ShiftK,
    MethodFamily::Tsvd,
];

impl MethodFamily {
    pub fn token(&self) -> String {
        match self {
            MethodFamily::Tsvd => "tsvd".into(),
            MethodFamily::TikhonovIdentity => "tik".into(),
            MethodFamily::FrMod => "frmod".into(),
            MethodFamily::ShiftK => "shiftk".into(),
            MethodFamily::CutK => "cutk".into(),
            MethodFamily::Scaled => "scaled".into(),
            MethodFamily::ScaledK => "scaledk".into(),
            MethodFamily::Theta { theta } => format!("theta:{theta}"),
        }
    }

    /// Parses a family token; `theta:<value>` takes a blend weight in `[0, 1]`.
    pub fn parse(tok: &str) -> Option<MethodFamily> {
        match tok {
            "tsvd" => Some(MethodFamily::Tsvd),
            "tik" => Some(MethodFamily::TikhonovIdentity),
            "frmod" => Some(MethodFamily::FrMod),
            "shiftk" => Some(MethodFamily::ShiftK),
            "cutk" => Some(MethodFamily::CutK),
            "scaled" => Some(MethodFamily::Scaled),
            "scaledk" => Some(MethodFamily::ScaledK),
            _ => {
                let theta: f64 = tok.strip_prefix("theta:")?.parse().ok()?;
                if (0.0..=1.0).contains(&theta) {
                    Some(MethodFamily::Theta { theta })
                } else {
                    None
                }
            }
        }
    }

    /// Whether the family is tuned by `mu` (everything except truncated SVD).
    pub fn uses_mu(&self) -> bool {
        !matches!(self, MethodFamily::Tsvd)
    }

    /// Binds the family to concrete parameters: `mu` for the `mu`-tuned
    /// families, `tsvd_k` for truncated SVD.
    pub fn instantiate(&self, mu: f64, tsvd_k: usize) -> RegMethod {
        match self {
            MethodFamily::Tsvd => RegMethod::Tsvd { k: tsvd_k },
            MethodFamily::TikhonovIdentity => RegMethod::TikhonovIdentity { mu },
            MethodFamily::FrMod => RegMethod::FrMod { mu },
            MethodFamily::ShiftK => RegMethod::ShiftK { mu },
            MethodFamily::CutK => RegMethod::CutK(CutParam::Mu(mu)),
            MethodFamily::Scaled => RegMethod::Scaled { mu },
            MethodFamily::ScaledK => RegMethod::ScaledK { mu },
            MethodFamily::Theta { theta } => RegMethod::Theta { mu, theta: *theta },
        }
    }
}

/// The diagonal a method adds to the squared spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalModification {
    /// Additive terms `d_j^2`, one per singular value.
    pub dsq: Vec<f64>,
    /// Truncation or junction index where the method defines one: the number
    /// of leading components left unmodified.
    pub k_effective: Option<usize>,
    /// True for cut-type methods, whose zeroed trailing components are
    /// intentional rather than a loss of information.
    pub cut: bool,
}

fn validate_mu(mu: f64) -> Result<()> {
    if mu < 0.0 || !mu.is_finite() {
        return Err(Error::InvalidParam {
            name: "mu",
            details: format!("mu must be nonnegative and finite, got {mu}"),
        });
    }
    Ok(())
}

fn validate_theta(theta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParam {
            name: "theta",
            details: format!("theta must lie in [0, 1], got {theta}"),
        });
    }
    Ok(())
}

fn validate_k(k: usize, n: usize) -> Result<()> {
    if k > n {
        return Err(Error::InvalidParam {
            name: "k",
            details: format!("truncation index {k} exceeds spectrum length {n}"),
        });
    }
    Ok(())
}

/// Largest `k` in `[0, n-1]` with `sigma_k^2 >= sigma_{k+1}^2 + mu^2`
/// (1-based indexing in the inequality), i.e. the longest head that stays
/// nonincreasing when `mu^2` is added to the tail.
pub fn shift_truncation_index(sigma: &[f64], mu: f64) -> usize {
    let n = sigma.len();
    let mu2 = mu * mu;
    for k in (1..n).rev() {
        if sigma[k - 1] * sigma[k - 1] >= sigma[k] * sigma[k] + mu2 {
            return k;
        }
    }
    0
}

/// Number of singular values strictly above `mu`: the cut index with
/// `sigma_{k+1} <= mu < sigma_k`.
pub fn cut_truncation_index(sigma: &[f64], mu: f64) -> usize {
    sigma.iter().filter(|&&s| s > mu).count()
}

/// Largest `k` in `[0, n-1]` with
/// `sigma_k^2 (sigma_1^2 + theta mu^2) >= sigma_1^2 (sigma_{k+1}^2 + mu^2)`:
/// the junction rule for the blended family. At `theta = 1` the index is
/// always at least 1.
pub fn theta_truncation_index(sigma: &[f64], mu: f64, theta: f64) -> usize {
    let n = sigma.len();
    if n == 0 {
        return 0;
    }
    let s1sq = sigma[0] * sigma[0];
    let mu2 = mu * mu;
    for k in (1..n).rev() {
        let lhs = sigma[k - 1] * sigma[k - 1] * (s1sq + theta * mu2);
        let rhs = s1sq * (sigma[k] * sigma[k] + mu2);
        if lhs >= rhs {
            return k;
        }
    }
    0
}

// Blended-family tail term. theta = 0 and theta = 1 specialize exactly to
// the shift and scaled forms so the identities relating them are bitwise.
fn theta_tail_dsq(s1sq: f64, mu: f64, theta: f64, sjsq: f64) -> f64 {
    let mu2 = mu * mu;
    if mu2 == 0.0 {
        return 0.0;
    }
    if theta == 0.0 {
        mu2
    } else {
        mu2 / (s1sq + theta * mu2) * (s1sq - theta * sjsq)
    }
}

/// Builds the diagonal modification a method adds to the squared spectrum.
pub fn build_modification(method: &RegMethod, sigma: &[f64]) -> Result<DiagonalModification> {
    debug_assert!(sigma.windows(2).all(|w| w[0] >= w[1]), "sigma not sorted");
    let n = sigma.len();
    let cut_at = |k: usize| -> DiagonalModification {
        let dsq = (0..n)
            .map(|j| if j < k { 0.0 } else { -(sigma[j] * sigma[j]) })
            .collect();
        DiagonalModification {
            dsq,
            k_effective: Some(k),
            cut: true,
        }
    };
    match *method {
        RegMethod::Tsvd { k } => {
            validate_k(k, n)?;
            Ok(cut_at(k))
        }
        RegMethod::CutK(CutParam::K(k)) => {
            validate_k(k, n)?;
            Ok(cut_at(k))
        }
        RegMethod::CutK(CutParam::Mu(mu)) => {
            validate_mu(mu)?;
            Ok(cut_at(cut_truncation_index(sigma, mu)))
        }
        RegMethod::TikhonovIdentity { mu } => {
            validate_mu(mu)?;
            Ok(DiagonalModification {
                dsq: vec![mu * mu; n],
                k_effective: None,
                cut: false,
            })
        }
        RegMethod::FrMod { mu } => {
            validate_mu(mu)?;
            let mu2 = mu * mu;
            Ok(DiagonalModification {
                dsq: sigma.iter().map(|&s| (mu2 - s * s).max(0.0)).collect(),
                k_effective: None,
                cut: false,
            })
        }
        RegMethod::ShiftK { mu } => {
            validate_mu(mu)?;
            let k = shift_truncation_index(sigma, mu);
            let mu2 = mu * mu;
            Ok(DiagonalModification {
                dsq: (0..n).map(|j| if j < k { 0.0 } else { mu2 }).collect(),
                k_effective: Some(k),
                cut: false,
            })
        }
        RegMethod::Scaled { mu } => {
            validate_mu(mu)?;
            let s1sq = if n > 0 { sigma[0] * sigma[0] } else { 0.0 };
            Ok(DiagonalModification {
                dsq: sigma
                    .iter()
                    .map(|&s| theta_tail_dsq(s1sq, mu, 1.0, s * s))
                    .collect(),
                k_effective: None,
                cut: false,
            })
        }
        RegMethod::ScaledK { mu } => {
            theta_modification_at_k(sigma, mu, 1.0, theta_truncation_index(sigma, mu, 1.0))
        }
        RegMethod::Theta { mu, theta } => {
            validate_theta(theta)?;
            theta_modification_at_k(sigma, mu, theta, theta_truncation_index(sigma, mu, theta))
        }
    }
}

/// Blended-family modification at an explicit junction index `k`, leaving the
/// first `k` components unmodified. `theta = 0` reproduces the shift method
/// at that `k`, `theta = 1` the scaled method.
pub fn theta_modification_at_k(
    sigma: &[f64],
    mu: f64,
    theta: f64,
    k: usize,
) -> Result<DiagonalModification> {
    validate_mu(mu)?;
    validate_theta(theta)?;
    let n = sigma.len();
    validate_k(k, n)?;
    let s1sq = if n > 0 { sigma[0] * sigma[0] } else { 0.0 };
    let dsq = (0..n)
        .map(|j| {
            if j < k {
                0.0
            } else {
                theta_tail_dsq(s1sq, mu, theta, sigma[j] * sigma[j])
            }
        })
        .collect();
    Ok(DiagonalModification {
        dsq,
        k_effective: Some(k),
        cut: false,
    })
}

/// How the spectral solver treats a positive singular value whose modified
/// weight vanished for a non-cut reason.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolvePolicy {
    /// Error out: information was lost that the method did not intend to drop.
    Strict,
    /// Zero the component and record its index.
    Lenient,
}

/// A spectral solve result: coefficients in the singular basis and the
/// back-rotated solution.
#[derive(Debug, Clone)]
pub struct SpectralSolution {
    pub x: Vector,
    pub coefficients: Vector,
    /// Indices zeroed under [`SolvePolicy::Lenient`] that strict mode would
    /// have rejected.
    pub annihilated: Vec<usize>,
}

/// Solves the problem with a prebuilt modification.
///
/// Componentwise: `x~_j = sigma_j b~_j / (sigma_j^2 + dsq_j)` where the
/// denominator is positive; exact-zero singular values get the minimal-norm
/// value 0; zero denominators at cut-type tails are the method's intent and
/// also give 0. Any other vanishing (or negative) denominator means the
/// modification silently discards data, which `Strict` rejects.
// The solve walks four parallel arrays by component index.
#[allow(clippy::needless_range_loop)]
pub fn solve_with_modification(
    sp: &SpectralProblem,
    modification: &DiagonalModification,
    policy: SolvePolicy,
) -> Result<SpectralSolution> {
    let n = sp.sigma.len();
    assert_eq!(modification.dsq.len(), n, "modification length mismatch");
    assert!(sp.b_tilde.len() >= n, "spectral data shorter than sigma");
    let mut coeffs = vec![0.0; n];
    let mut annihilated = Vec::new();
    for j in 0..n {
        let s = sp.sigma[j];
        if s == 0.0 {
            continue;
        }
        let denom = s * s + modification.dsq[j];
        if denom > 0.0 {
            coeffs[j] = s * sp.b_tilde[j] / denom;
        } else if modification.cut && modification.k_effective.is_some_and(|k| j >= k) {
            // Intentional cut.
        } else if sp.b_tilde[j] != 0.0 {
            match policy {
                SolvePolicy::Strict => {
                    return Err(Error::UnregularizedNullComponent { index: j });
                }
                SolvePolicy::Lenient => annihilated.push(j),
            }
        }
    }
    let coefficients = Vector::new(coeffs)?;
    let x = sp.v.matvec(&coefficients);
    Ok(SpectralSolution {
        x,
        coefficients,
        annihilated,
    })
}

/// Builds the method's modification and solves in one step.
pub fn solve_spectral(
    sp: &SpectralProblem,
    method: &RegMethod,
    policy: SolvePolicy,
) -> Result<SpectralSolution> {
    let modification = build_modification(method, sp.sigma.as_slice())?;
    solve_with_modification(sp, &modification, policy)
}

// Filter factor with a zero-denominator convention of 0.
fn ratio_or_zero(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Filter factors from the closed forms: component `j` of the naive inverse
/// solution is weighted by the returned `phi_j in [0, 1]`. Consistent with
/// `sigma_j^2 / (sigma_j^2 + dsq_j)` from [`build_modification`] (with zero
/// denominators mapping to 0).
pub fn filter_factors(sigma: &[f64], method: &RegMethod) -> Result<Vec<f64>> {
    let n = sigma.len();
    let tik = |s: f64, mu: f64| ratio_or_zero(s * s, s * s + mu * mu);
    match *method {
        RegMethod::Tsvd { k } => {
            validate_k(k, n)?;
            Ok((0..n).map(|j| if j < k { 1.0 } else { 0.0 }).collect())
        }
        RegMethod::CutK(param) => {
            let k = match param {
                CutParam::K(k) => {
                    validate_k(k, n)?;
                    k
                }
                CutParam::Mu(mu) => {
                    validate_mu(mu)?;
                    cut_truncation_index(sigma, mu)
                }
            };
            Ok((0..n).map(|j| if j < k { 1.0 } else { 0.0 }).collect())
        }
        RegMethod::TikhonovIdentity { mu } => {
            validate_mu(mu)?;
            Ok(sigma.iter().map(|&s| tik(s, mu)).collect())
        }
        RegMethod::FrMod { mu } => {
            validate_mu(mu)?;
            Ok(sigma
                .iter()
                .map(|&s| {
                    if s >= mu {
                        if s == 0.0 {
                            0.0
                        } else {
                            1.0
                        }
                    } else {
                        s * s / (mu * mu)
                    }
                })
                .collect())
        }
        RegMethod::ShiftK { mu } => {
            validate_mu(mu)?;
            let k = shift_truncation_index(sigma, mu);
            Ok((0..n)
                .map(|j| if j < k { 1.0 } else { tik(sigma[j], mu) })
                .collect())
        }
        RegMethod::Scaled { mu } => {
            validate_mu(mu)?;
            theta_filter_factors_at_k(sigma, mu, 1.0, 0)
        }
        RegMethod::ScaledK { mu } => {
            validate_mu(mu)?;
            let k = theta_truncation_index(sigma, mu, 1.0);
            theta_filter_factors_at_k(sigma, mu, 1.0, k)
        }
        RegMethod::Theta { mu, theta } => {
            validate_mu(mu)?;
            validate_theta(theta)?;
            let k = theta_truncation_index(sigma, mu, theta);
            theta_filter_factors_at_k(sigma, mu, theta, k)
        }
    }
}

/// Blended-family filter factors at an explicit junction index: 1 before
/// `k`, then `sigma_j^2 (sigma_1^2 + theta mu^2) / (sigma_1^2 (sigma_j^2 +
/// mu^2))`. The `theta = 0` and `theta = 1` ends reproduce the shift and
/// scaled factors at that `k`, which makes the blend affine in `theta`
/// componentwise as long as one `k` is shared.
pub fn theta_filter_factors_at_k(sigma: &[f64], mu: f64, theta: f64, k: usize) -> Result<Vec<f64>> {
    validate_mu(mu)?;
    validate_theta(theta)?;
    let n = sigma.len();
    validate_k(k, n)?;
    let s1sq = if n > 0 { sigma[0] * sigma[0] } else { 0.0 };
    let mu2 = mu * mu;
    Ok((0..n)
        .map(|j| {
            if j < k {
                return if sigma[j] == 0.0 { 0.0 } else { 1.0 };
            }
            let sjsq = sigma[j] * sigma[j];
            ratio_or_zero(sjsq * (s1sq + theta * mu2), s1sq * (sjsq + mu2))
        })
        .collect())
}

/// Renders filter factors for several methods as CSV with columns
/// `j,sigma,phi_<method>...`; `j` is 1-based.
pub fn filter_factors_csv(sigma: &[f64], methods: &[RegMethod]) -> Result<String> {
    let mut header = String::from("j,sigma");
    let mut columns = Vec::with_capacity(methods.len());
    for m in methods {
        header.push_str(&format!(",phi_{}", m.family_token()));
        columns.push(filter_factors(sigma, m)?);
    }
    let mut out = header;
    out.push('\n');
    for (j, &s) in sigma.iter().enumerate() {
        out.push_str(&format!("{},{}", j + 1, s));
        for col in &columns {
            out.push_str(&format!(",{}", col[j]));
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{svd, DenseMatrix};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn dsq_of(method: RegMethod, sigma: &[f64]) -> Vec<f64> {
        build_modification(&method, sigma).unwrap().dsq
    }

    #[test]
    fn hand_checked_modifications() {
        let sigma = [2.0, 1.0, 0.5];

        let m = build_modification(&RegMethod::FrMod { mu: 1.0 }, &sigma).unwrap();
        assert_eq!(m.dsq, vec![0.0, 0.0, 0.75]);
        assert_eq!(m.k_effective, None);

        let m = build_modification(&RegMethod::ShiftK { mu: 1.0 }, &sigma).unwrap();
        assert_eq!(m.dsq, vec![0.0, 1.0, 1.0]);
        assert_eq!(m.k_effective, Some(1));

        let m = build_modification(&RegMethod::TikhonovIdentity { mu: 0.5 }, &sigma).unwrap();
        assert_eq!(m.dsq, vec![0.25, 0.25, 0.25]);

        let m = build_modification(&RegMethod::Tsvd { k: 2 }, &sigma).unwrap();
        assert_eq!(m.dsq, vec![0.0, 0.0, -0.25]);
        assert!(m.cut);

        let m = build_modification(&RegMethod::Scaled { mu: 1.0 }, &[2.0, 1.0]).unwrap();
        assert_eq!(m.dsq[0], 0.0);
        assert!((m.dsq[1] - 0.6).abs() <= 1e-15);

        // Scaled junction rule keeps two components here: with mu = 1,
        // sigma_2^2 (sigma_1^2 + 1) = 5 >= sigma_1^2 (sigma_3^2 + 1) = 5.
        let m = build_modification(&RegMethod::ScaledK { mu: 1.0 }, &sigma).unwrap();
        assert_eq!(m.k_effective, Some(2));
        assert_eq!(m.dsq[0], 0.0);
        assert_eq!(m.dsq[1], 0.0);
        assert!((m.dsq[2] - 0.75).abs() <= 1e-15);

        // Blend at theta = 1/2: junction drops to k = 1, tail from the
        // closed form with c = mu^2 / (sigma_1^2 + theta mu^2) = 2/9.
        let m = build_modification(
            &RegMethod::Theta {
                mu: 1.0,
                theta: 0.5,
            },
            &sigma,
        )
        .unwrap();
        assert_eq!(m.k_effective, Some(1));
        assert_eq!(m.dsq[0], 0.0);
        assert!((m.dsq[1] - 2.0 / 9.0 * 3.5).abs() <= 1e-15);
        assert!((m.dsq[2] - 2.0 / 9.0 * 3.875).abs() <= 1e-15);
    }

    #[test]
    fn cut_rules() {
        let sigma = [3.0, 2.0, 1.0];
        let m = build_modification(&RegMethod::CutK(CutParam::Mu(2.0)), &sigma).unwrap();
        assert_eq!(m.k_effective, Some(1));
        assert_eq!(m.dsq, vec![0.0, -4.0, -1.0]);
        // mu >= sigma_1 cuts everything, mu < sigma_n keeps everything.
        let m = build_modification(&RegMethod::CutK(CutParam::Mu(3.0)), &sigma).unwrap();
        assert_eq!(m.k_effective, Some(0));
        let m = build_modification(&RegMethod::CutK(CutParam::Mu(0.5)), &sigma).unwrap();
        assert_eq!(m.k_effective, Some(3));
        assert_eq!(m.dsq, vec![0.0, 0.0, 0.0]);
        let m = build_modification(&RegMethod::CutK(CutParam::K(2)), &sigma).unwrap();
        assert_eq!(m.dsq, vec![0.0, 0.0, -1.0]);
    }

    #[test]
    fn theta_edges_match_shift_and_scaled() {
        let sigma = [4.0, 2.5, 1.3, 0.7, 0.05];
        for mu in [0.0, 0.3, 1.1, 5.0] {
            let shift = dsq_of(RegMethod::ShiftK { mu }, &sigma);
            let k = shift_truncation_index(&sigma, mu);
            let theta0 = theta_modification_at_k(&sigma, mu, 0.0, k).unwrap();
            assert_eq!(theta0.dsq, shift, "mu {mu}");

            let scaled = build_modification(&RegMethod::ScaledK { mu }, &sigma).unwrap();
            let theta1 = build_modification(&RegMethod::Theta { mu, theta: 1.0 }, &sigma).unwrap();
            assert_eq!(theta1.dsq, scaled.dsq, "mu {mu}");
            assert_eq!(theta1.k_effective, scaled.k_effective);
        }
    }

    #[test]
    fn junction_rules_can_disagree_across_theta() {
        // k is nondecreasing in theta but not constant: here the shift rule
        // keeps one component while the scaled rule keeps two.
        let sigma = [2.0, 1.2, 0.89];
        assert_eq!(shift_truncation_index(&sigma, 1.0), 1);
        assert_eq!(theta_truncation_index(&sigma, 1.0, 0.0), 1);
        assert_eq!(theta_truncation_index(&sigma, 1.0, 1.0), 2);
    }

    #[test]
    fn parameter_validation() {
        let sigma = [1.0, 0.5];
        for bad in [
            RegMethod::TikhonovIdentity { mu: -1.0 },
            RegMethod::FrMod { mu: f64::NAN },
            RegMethod::Theta {
                mu: 1.0,
                theta: 1.5,
            },
            RegMethod::Theta {
                mu: 1.0,
                theta: -0.1,
            },
            RegMethod::Tsvd { k: 3 },
            RegMethod::CutK(CutParam::K(5)),
        ] {
            assert!(
                matches!(
                    build_modification(&bad, &sigma),
                    Err(Error::InvalidParam { .. })
                ),
                "{bad:?}"
            );
            assert!(filter_factors(&sigma, &bad).is_err(), "{bad:?}");
        }
    }

    fn identity_spectral(sigma: &[f64], b: &[f64]) -> SpectralProblem {
        SpectralProblem {
            sigma: Vector::new(sigma.to_vec()).unwrap(),
            b_tilde: Vector::new(b.to_vec()).unwrap(),
            v: DenseMatrix::identity(sigma.len()),
            rank: numerical_rank(sigma, DEFAULT_RANK_TOL),
        }
    }

    #[test]
    fn spectral_solve_hand_case() {
        let sp = identity_spectral(&[2.0, 1.0], &[2.0, 1.0]);
        let sol = solve_spectral(
            &sp,
            &RegMethod::TikhonovIdentity { mu: 1.0 },
            SolvePolicy::Strict,
        )
        .unwrap();
        assert_eq!(sol.x.as_slice(), &[0.8, 0.5]);
        assert!(sol.annihilated.is_empty());
    }

    #[test]
    fn tsvd_equals_cut_bitwise() {
        let sigma = [3.0, 1.7, 0.4, 0.09];
        let sp = identity_spectral(&sigma, &[1.0, -2.0, 0.5, 3.0]);
        for k in 0..=4usize {
            let a = solve_spectral(&sp, &RegMethod::Tsvd { k }, SolvePolicy::Strict).unwrap();
            let b =
                solve_spectral(&sp, &RegMethod::CutK(CutParam::K(k)), SolvePolicy::Strict).unwrap();
            assert_eq!(a.x.as_slice(), b.x.as_slice());
        }
        // The mu-parameterized cut picks the same index as the threshold rule.
        let viak = solve_spectral(&sp, &RegMethod::Tsvd { k: 2 }, SolvePolicy::Strict).unwrap();
        let viamu = solve_spectral(
            &sp,
            &RegMethod::CutK(CutParam::Mu(0.4)),
            SolvePolicy::Strict,
        )
        .unwrap();
        assert_eq!(viak.x.as_slice(), viamu.x.as_slice());
    }

    #[test]
    fn tsvd_keeps_leading_components_exactly() {
        let sp = identity_spectral(&[2.0, 1.0, 0.5], &[4.0, 3.0, 1.0]);
        let sol = solve_spectral(&sp, &RegMethod::Tsvd { k: 2 }, SolvePolicy::Strict).unwrap();
        assert_eq!(sol.x.as_slice(), &[2.0, 3.0, 0.0]);
    }

    #[test]
    fn zero_singular_values_get_minimal_norm_components() {
        let sp = identity_spectral(&[2.0, 0.0], &[2.0, 5.0]);
        let sol = solve_spectral(
            &sp,
            &RegMethod::TikhonovIdentity { mu: 0.0 },
            SolvePolicy::Strict,
        )
        .unwrap();
        assert_eq!(sol.x.as_slice(), &[1.0, 0.0]);
        assert!(sol.annihilated.is_empty());
    }

    #[test]
    fn strict_rejects_accidental_annihilation() {
        let sp = identity_spectral(&[2.0, 1.0], &[1.0, 1.0]);
        let modification = DiagonalModification {
            dsq: vec![-4.0, 0.0],
            k_effective: None,
            cut: false,
        };
        assert!(matches!(
            solve_with_modification(&sp, &modification, SolvePolicy::Strict),
            Err(Error::UnregularizedNullComponent { index: 0 })
        ));
        let sol = solve_with_modification(&sp, &modification, SolvePolicy::Lenient).unwrap();
        assert_eq!(sol.x.as_slice(), &[0.0, 1.0]);
        assert_eq!(sol.annihilated, vec![0]);
        // A zero data component makes the same modification harmless.
        let sp0 = identity_spectral(&[2.0, 1.0], &[0.0, 1.0]);
        let sol = solve_with_modification(&sp0, &modification, SolvePolicy::Strict).unwrap();
        assert_eq!(sol.x.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn hand_checked_filter_factors() {
        let sigma = [2.0, 1.0, 0.5];
        let phi = filter_factors(&sigma, &RegMethod::TikhonovIdentity { mu: 1.0 }).unwrap();
        assert_eq!(phi, vec![0.8, 0.5, 0.2]);
        let phi = filter_factors(&sigma, &RegMethod::FrMod { mu: 1.0 }).unwrap();
        assert_eq!(phi, vec![1.0, 1.0, 0.25]);
        let phi = filter_factors(&sigma, &RegMethod::ShiftK { mu: 1.0 }).unwrap();
        assert_eq!(phi, vec![1.0, 0.5, 0.2]);
        let phi = filter_factors(&sigma, &RegMethod::Tsvd { k: 1 }).unwrap();
        assert_eq!(phi, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn to_spectral_preserves_data_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = DenseMatrix::from_fn(12, 8, |_, _| rng.sample(StandardNormal));
        let f = svd(&a).unwrap();
        let b = Vector::from_fn(12, |i| (i as f64 - 4.0) * 0.3);
        let sp = to_spectral(&f, &b);
        assert_eq!(sp.b_tilde.len(), 12);
        assert_eq!(sp.rank, 8);
        assert!((sp.b_tilde.norm() - b.norm()).abs() <= 1e-12 * b.norm());
    }

    #[test]
    fn csv_dump_golden() {
        let sigma = [2.0, 1.0];
        let csv = filter_factors_csv(
            &sigma,
            &[
                RegMethod::TikhonovIdentity { mu: 1.0 },
                RegMethod::Tsvd { k: 1 },
            ],
        )
        .unwrap();
        assert_eq!(csv, "j,sigma,phi_tik,phi_tsvd\n1,2,0.8,1\n2,1,0.5,0\n");
        let empty = filter_factors_csv(&sigma, &[]).unwrap();
        assert_eq!(empty, "j,sigma\n1,2\n2,1\n");
    }

    #[test]
    fn family_tokens_round_trip() {
        let fams = [
            MethodFamily::Tsvd,
            MethodFamily::TikhonovIdentity,
            MethodFamily::FrMod,
            MethodFamily::ShiftK,
            MethodFamily::CutK,
            MethodFamily::Scaled,
            MethodFamily::ScaledK,
            MethodFamily::Theta { theta: 0.25 },
        ];
        for f in fams {
            assert_eq!(MethodFamily::parse(&f.token()), Some(f));
        }
        assert_eq!(MethodFamily::parse("bogus"), None);
        assert_eq!(MethodFamily::parse("theta:1.5"), None);
        assert_eq!(MethodFamily::parse("theta:abc"), None);
        assert_eq!(
            MethodFamily::Theta { theta: 0.5 }
                .instantiate(2.0, 0)
                .family_token(),
            "theta:0.5"
        );
    }

    // All methods, parameterized for property checks.
    fn all_methods(mu: f64, theta: f64, k: usize) -> Vec<RegMethod> {
        vec![
            RegMethod::Tsvd { k },
            RegMethod::TikhonovIdentity { mu },
            RegMethod::FrMod { mu },
            RegMethod::ShiftK { mu },
            RegMethod::CutK(CutParam::Mu(mu)),
            RegMethod::Scaled { mu },
            RegMethod::ScaledK { mu },
            RegMethod::Theta { mu, theta },
        ]
    }

    fn sorted_spectrum(raw: Vec<f64>) -> Vec<f64> {
        let mut s: Vec<f64> = raw.into_iter().map(|e: f64| 10f64.powf(e)).collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s
    }

    proptest! {
        #[test]
        fn filter_factors_stay_in_unit_interval_and_match_dsq(
            exps in proptest::collection::vec(-6.0..1.0f64, 1..12),
            mu_exp in -6.0..1.0f64,
            theta in 0.0..=1.0f64,
            kfrac in 0.0..=1.0f64,
        ) {
            let sigma = sorted_spectrum(exps);
            let mu = 10f64.powf(mu_exp);
            let k = ((sigma.len() as f64) * kfrac) as usize;
            for method in all_methods(mu, theta, k) {
                let phi = filter_factors(&sigma, &method).unwrap();
                let m = build_modification(&method, &sigma).unwrap();
                let mut prev = f64::INFINITY;
                for (j, &p) in phi.iter().enumerate() {
                    prop_assert!((0.0..=1.0).contains(&p), "{method:?} phi[{j}] = {p}");
                    prop_assert!(p <= prev + 1e-12, "{method:?}: phi increases at {j}");
                    prev = p;
                    let denom = sigma[j] * sigma[j] + m.dsq[j];
                    let from_dsq = if denom == 0.0 { 0.0 } else { sigma[j] * sigma[j] / denom };
                    prop_assert!(
                        (p - from_dsq).abs() <= 1e-12,
                        "{method:?} at {j}: closed form {p} vs dsq route {from_dsq}"
                    );
                }
            }
        }

        #[test]
        fn junction_methods_keep_diagonal_nonincreasing(
            exps in proptest::collection::vec(-6.0..1.0f64, 2..12),
            mu_exp in -6.0..1.0f64,
            theta in 0.0..=1.0f64,
        ) {
            let sigma = sorted_spectrum(exps);
            let mu = 10f64.powf(mu_exp);
            for method in [
                RegMethod::ShiftK { mu },
                RegMethod::ScaledK { mu },
                RegMethod::Theta { mu, theta },
            ] {
                let m = build_modification(&method, &sigma).unwrap();
                let diag: Vec<f64> = sigma
                    .iter()
                    .zip(&m.dsq)
                    .map(|(&s, &d)| s * s + d)
                    .collect();
                for w in diag.windows(2) {
                    prop_assert!(
                        w[0] >= w[1] - 1e-12 * w[0].abs().max(1.0),
                        "{method:?}: diagonal increases ({} -> {})",
                        w[0],
                        w[1]
                    );
                }
                // The rule picks the largest feasible k: one step further
                // breaks the junction inequality.
                let k = m.k_effective.unwrap();
                if k + 1 < sigma.len() {
                    let th = match method {
                        RegMethod::ShiftK { .. } => 0.0,
                        RegMethod::ScaledK { .. } => 1.0,
                        RegMethod::Theta { theta, .. } => theta,
                        _ => unreachable!(),
                    };
                    let s1sq = sigma[0] * sigma[0];
                    let lhs = sigma[k] * sigma[k] * (s1sq + th * mu * mu);
                    let rhs = s1sq * (sigma[k + 1] * sigma[k + 1] + mu * mu);
                    prop_assert!(lhs < rhs, "{method:?}: k = {k} is not maximal");
                }
            }
        }

        #[test]
        fn scaled_junction_always_keeps_first_component(
            exps in proptest::collection::vec(-6.0..1.0f64, 2..12),
            mu_exp in -6.0..1.0f64,
        ) {
            let sigma = sorted_spectrum(exps);
            let k = theta_truncation_index(&sigma, 10f64.powf(mu_exp), 1.0);
            prop_assert!(k >= 1);
        }
    }
}
