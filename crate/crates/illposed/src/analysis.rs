//! Conditioning and norm diagnostics for the regularization methods, plus a
//! verification suite for the inequalities that justify them.
//!
//! The central quantities are the condition number of the regularized normal
//! equations, `kappa = largest / smallest positive entry of sigma_j^2 +
//! d_j^2`, and the Frobenius norm of the regularization operator,
//! `sqrt(sum |d_j^2|)`. [`verify_propositions`] evaluates the comparison
//! claims between methods (which method conditions better, which adds less)
//! on a concrete spectrum and reports one verdict per claim.
//!
//! Comparison policy: inequalities get a relative slack of 1e-12; claims of
//! strict inequality additionally require a relative margin above 1e-12 and
//! are downgraded to their nonstrict form when the spectrum makes the
//! theoretical margin too small to resolve in floating point. Equivalences
//! are checked in both directions by probing the parameter on either side of
//! the stated threshold. A claim whose regime precondition fails (for
//! example a truncation index of zero where a formula needs at least one
//! untouched component) is reported as not applicable, never as a failure.

use crate::error::{Error, Result};
use crate::filters::{
    build_modification, cut_truncation_index, shift_truncation_index, theta_modification_at_k,
    theta_truncation_index, CutParam, RegMethod,
};
use crate::linalg::Vector;

/// Conditioning summary of one method on one spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodDiagnostics {
    /// Condition number of the regularized normal equations.
    pub kappa: f64,
    /// Frobenius norm of the regularization operator.
    pub frob_norm_l: f64,
    /// Truncation or junction index, for the methods that have one.
    pub k_effective: Option<usize>,
    /// Regularization strength, for the `mu`-tuned methods.
    pub mu: Option<f64>,
}

/// Condition number of the modified normal-equations matrix: the ratio of
/// the largest to the smallest positive entry of `sigma_j^2 + dsq_j`.
/// Entries that are zero or negative (the tail of a cut) are excluded, in
/// line with defining conditioning through positive singular values only.
pub fn kappa_normal(sigma: &[f64], dsq: &[f64]) -> Result<f64> {
    assert_eq!(sigma.len(), dsq.len(), "kappa_normal: length mismatch");
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for (s, d) in sigma.iter().zip(dsq) {
        let v = s * s + d;
        if v > 0.0 {
            max = max.max(v);
            min = min.min(v);
        }
    }
    if !max.is_finite() {
        return Err(Error::InvalidParam {
            name: "dsq",
            details: "modified spectrum has no positive entries".into(),
        });
    }
    Ok(max / min)
}

/// Frobenius norm of the regularization operator with squared diagonal
/// `dsq`: `sqrt(sum |dsq_j|)`. The cut methods store negative entries
/// `-sigma_j^2`, whose operator magnitude is `sigma_j^2`, hence the absolute
/// value.
pub fn frob_norm_reg(sigma: &[f64], dsq: &[f64]) -> f64 {
    debug_assert_eq!(sigma.len(), dsq.len());
    debug_assert!(
        sigma
            .iter()
            .zip(dsq)
            .all(|(s, d)| s * s + d >= -1e-12 * (s * s + d.abs())),
        "modified spectrum entry below zero"
    );
    dsq.iter().map(|d| d.abs()).sum::<f64>().sqrt()
}

/// Relative Euclidean error `||x - x_true|| / ||x_true||`.
pub fn relative_error(x: &Vector, x_true: &Vector) -> Result<f64> {
    let norm = x_true.norm();
    if norm == 0.0 {
        return Err(Error::InvalidParam {
            name: "x_true",
            details: "relative error is undefined for a zero reference".into(),
        });
    }
    Ok(x.sub(x_true).norm() / norm)
}

/// Computes both diagnostics for a method on a spectrum.
pub fn diagnostics(sigma: &[f64], method: &RegMethod) -> Result<MethodDiagnostics> {
    let modification = build_modification(method, sigma)?;
    let mu = match *method {
        RegMethod::TikhonovIdentity { mu }
        | RegMethod::FrMod { mu }
        | RegMethod::ShiftK { mu }
        | RegMethod::Scaled { mu }
        | RegMethod::ScaledK { mu }
        | RegMethod::Theta { mu, .. }
        | RegMethod::CutK(CutParam::Mu(mu)) => Some(mu),
        RegMethod::Tsvd { .. } | RegMethod::CutK(CutParam::K(_)) => None,
    };
    Ok(MethodDiagnostics {
        kappa: kappa_normal(sigma, &modification.dsq)?,
        frob_norm_l: frob_norm_reg(sigma, &modification.dsq),
        k_effective: modification.k_effective,
        mu,
    })
}

/// Outcome of one claim check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

/// One verified claim: its identifier, the two compared values, and the
/// verdict. For not-applicable claims the sides are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaimCheck {
    pub id: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub verdict: Verdict,
}

const REL_SLACK: f64 = 1e-12;

fn scale_of(lhs: f64, rhs: f64) -> f64 {
    lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE)
}

fn le_claim(id: &'static str, lhs: f64, rhs: f64) -> ClaimCheck {
    let verdict = if lhs <= rhs + REL_SLACK * scale_of(lhs, rhs) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    ClaimCheck {
        id,
        lhs,
        rhs,
        verdict,
    }
}

// Strict inequality: requires a resolvable margin beyond the slack.
fn lt_claim(id: &'static str, lhs: f64, rhs: f64) -> ClaimCheck {
    let verdict = if rhs - lhs > REL_SLACK * scale_of(lhs, rhs) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    ClaimCheck {
        id,
        lhs,
        rhs,
        verdict,
    }
}

fn eq_claim(id: &'static str, lhs: f64, rhs: f64) -> ClaimCheck {
    let verdict = if (lhs - rhs).abs() <= REL_SLACK * scale_of(lhs, rhs) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    ClaimCheck {
        id,
        lhs,
        rhs,
        verdict,
    }
}

fn na_claim(id: &'static str) -> ClaimCheck {
    ClaimCheck {
        id,
        lhs: f64::NAN,
        rhs: f64::NAN,
        verdict: Verdict::NotApplicable,
    }
}

fn kappa_of(sigma: &[f64], method: &RegMethod) -> Result<f64> {
    kappa_normal(sigma, &build_modification(method, sigma)?.dsq)
}

fn frob_of(sigma: &[f64], method: &RegMethod) -> Result<f64> {
    Ok(frob_norm_reg(
        sigma,
        &build_modification(method, sigma)?.dsq,
    ))
}

// Relative offset used when probing an equivalence threshold from each side.
const PROBE_OFFSET: f64 = 1e-6;

/// Verifies the comparison claims between the methods on one spectrum at one
/// `(mu, theta)` pair and returns one [`ClaimCheck`] per claim.
///
/// The claims, grouped by id:
/// - `kappa-capped-by-unregularized`, `frmod-tik-kappa-order`,
///   `frmod-le-tik-above-threshold`, `tik-lt-frmod-below-threshold`: neither
///   Tikhonov nor the Frobenius-closest modification conditions worse than
///   the unregularized normal equations, and which of the two wins flips at
///   `mu^2 = sigma_1 sigma_n` (probed from both sides).
/// - `shift-kappa-closed-form`, `shift-kappa-le-tik`, `shift-kappa-le-frmod`,
///   `shift-norm-lt-tik`: the shifted cut conditions at least as well as
///   both while adding a strictly smaller operator.
/// - `cut-kappa-closed-form`, `cut-kappa-le-frmod-below-sigma-k`,
///   `frmod-kappa-lt-cut-above-sigma-k`, `cut-kappa-le-shift`,
///   `cut-form-le-shift-form-below`, `shift-form-lt-cut-form-above`,
///   `cut-norm-le-shift-norm`: the pure cut against the others, with
///   thresholds at `sigma_k` and `sqrt(sigma_k^2 - sigma_n^2)`.
/// - `scaled-kappa-matches-tik`, `scaled-norm-lt-tik`,
///   `scaledk-kappa-matches-tik`, `scaledk-norm-lt-tail-bound`,
///   `tail-bound-lt-tik-norm`, `scaledk-norm-le-frmod`,
///   `scaledk-norm-lt-shift`, `scaledk-norm-le-scaled`: the scaled variants
///   reproduce Tikhonov's conditioning at strictly smaller operator norm.
/// - `theta-norm-monotone`, `theta-kappa-monotone`, `theta-kappa-affine`,
///   `theta-kappa-formula`: along the blended family the norm decreases and
///   the condition number increases in `theta`, affinely between the two
///   endpoints at a junction index feasible for the whole family.
///
/// Requires `sigma` nonincreasing and nonnegative with `n >= 2`, finite
/// `mu >= 0`, and `theta` in `[0, 1]`.
pub fn verify_propositions(sigma: &[f64], mu: f64, theta: f64) -> Result<Vec<ClaimCheck>> {
    let n = sigma.len();
    if n < 2 {
        return Err(Error::InvalidParam {
            name: "sigma",
            details: "proposition checks need a spectrum of length at least 2".into(),
        });
    }
    if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) || sigma.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidParam {
            name: "sigma",
            details: "spectrum must be nonincreasing, nonnegative, and finite".into(),
        });
    }
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::InvalidParam {
            name: "mu",
            details: format!("mu must be nonnegative and finite, got {mu}"),
        });
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParam {
            name: "theta",
            details: format!("theta must lie in [0, 1], got {theta}"),
        });
    }

    let s1 = sigma[0];
    let sn = sigma[n - 1];
    let s1sq = s1 * s1;
    let snsq = sn * sn;
    let musq = mu * mu;
    let tik = RegMethod::TikhonovIdentity { mu };
    let frmod = RegMethod::FrMod { mu };
    let mut checks = Vec::with_capacity(27);

    // Strictness is only asserted where the theoretical margin is resolvable;
    // otherwise the claim falls back to its nonstrict form.
    let resolvable = |margin_rel: f64| margin_rel > 1e3 * REL_SLACK;

    // Tikhonov versus the Frobenius-closest modification. Regime: full rank
    // and sigma_n <= mu <= sigma_1.
    if sn > 0.0 && (sn..=s1).contains(&mu) {
        let kf = kappa_of(sigma, &frmod)?;
        let kt = kappa_of(sigma, &tik)?;
        let kplain = kappa_normal(sigma, &vec![0.0; n])?;
        checks.push(le_claim(
            "kappa-capped-by-unregularized",
            kf.max(kt),
            kplain,
        ));
        // At the given mu the better-conditioned method is decided by the
        // side of mu^2 = sigma_1 sigma_n.
        checks.push(if musq >= s1 * sn {
            le_claim("frmod-tik-kappa-order", kf, kt)
        } else {
            le_claim("frmod-tik-kappa-order", kt, kf)
        });
    } else {
        checks.push(na_claim("kappa-capped-by-unregularized"));
        checks.push(na_claim("frmod-tik-kappa-order"));
    }
    // Both directions of the equivalence, probed just off the threshold.
    if sn > 0.0 {
        let mu_crit = (s1 * sn).sqrt();
        let above = mu_crit * (1.0 + PROBE_OFFSET);
        checks.push(if above <= s1 {
            le_claim(
                "frmod-le-tik-above-threshold",
                kappa_of(sigma, &RegMethod::FrMod { mu: above })?,
                kappa_of(sigma, &RegMethod::TikhonovIdentity { mu: above })?,
            )
        } else {
            na_claim("frmod-le-tik-above-threshold")
        });
        let below = mu_crit * (1.0 - PROBE_OFFSET);
        checks.push(if below >= sn && mu_crit < s1 {
            lt_claim(
                "tik-lt-frmod-below-threshold",
                kappa_of(sigma, &RegMethod::TikhonovIdentity { mu: below })?,
                kappa_of(sigma, &RegMethod::FrMod { mu: below })?,
            )
        } else {
            na_claim("tik-lt-frmod-below-threshold")
        });
    } else {
        checks.push(na_claim("frmod-le-tik-above-threshold"));
        checks.push(na_claim("tik-lt-frmod-below-threshold"));
    }

    // The shifted cut with its junction rule. All its claims need at least
    // one untouched component.
    let k0 = shift_truncation_index(sigma, mu);
    let shift = RegMethod::ShiftK { mu };
    if k0 >= 1 && (mu > 0.0 || sn > 0.0) {
        checks.push(eq_claim(
            "shift-kappa-closed-form",
            kappa_of(sigma, &shift)?,
            s1sq / (snsq + musq),
        ));
    } else {
        checks.push(na_claim("shift-kappa-closed-form"));
    }
    if k0 >= 1 {
        let ks = kappa_of(sigma, &shift)?;
        let kt = kappa_of(sigma, &tik)?;
        checks.push(if mu == 0.0 {
            eq_claim("shift-kappa-le-tik", ks, kt)
        } else if resolvable(musq / (s1sq + musq)) {
            lt_claim("shift-kappa-le-tik", ks, kt)
        } else {
            le_claim("shift-kappa-le-tik", ks, kt)
        });
        checks.push(if mu == 0.0 {
            na_claim("shift-kappa-le-frmod")
        } else {
            let kf = kappa_of(sigma, &frmod)?;
            if sn == 0.0 {
                // Without full rank the two coincide exactly.
                eq_claim("shift-kappa-le-frmod", ks, kf)
            } else if resolvable(snsq / (snsq + musq)) {
                lt_claim("shift-kappa-le-frmod", ks, kf)
            } else {
                le_claim("shift-kappa-le-frmod", ks, kf)
            }
        });
        checks.push(if mu > 0.0 {
            lt_claim(
                "shift-norm-lt-tik",
                frob_of(sigma, &shift)?,
                (n as f64).sqrt() * mu,
            )
        } else {
            na_claim("shift-norm-lt-tik")
        });
    } else {
        checks.push(na_claim("shift-kappa-le-tik"));
        checks.push(na_claim("shift-kappa-le-frmod"));
        checks.push(na_claim("shift-norm-lt-tik"));
    }

    // The pure cut. Its condition number is that of the kept leading block;
    // comparisons against the continuous methods flip at thresholds in mu,
    // which are probed with the index held fixed.
    let kc = cut_truncation_index(sigma, mu);
    if kc >= 1 {
        let cut_at_kc = RegMethod::CutK(CutParam::K(kc));
        let kcut = kappa_of(sigma, &cut_at_kc)?;
        let sk = sigma[kc - 1];
        checks.push(eq_claim("cut-kappa-closed-form", kcut, s1sq / (sk * sk)));

        let below = sk * (1.0 - PROBE_OFFSET);
        checks.push(if below >= sn {
            le_claim(
                "cut-kappa-le-frmod-below-sigma-k",
                kcut,
                kappa_of(sigma, &RegMethod::FrMod { mu: below })?,
            )
        } else {
            na_claim("cut-kappa-le-frmod-below-sigma-k")
        });
        let above = sk * (1.0 + PROBE_OFFSET);
        checks.push(if above <= s1 {
            lt_claim(
                "frmod-kappa-lt-cut-above-sigma-k",
                kappa_of(sigma, &RegMethod::FrMod { mu: above })?,
                kcut,
            )
        } else {
            na_claim("frmod-kappa-lt-cut-above-sigma-k")
        });
    } else {
        checks.push(na_claim("cut-kappa-closed-form"));
        checks.push(na_claim("cut-kappa-le-frmod-below-sigma-k"));
        checks.push(na_claim("frmod-kappa-lt-cut-above-sigma-k"));
    }

    // Cut versus shifted cut at the shift rule's index: under that rule
    // mu <= sqrt(sigma_k^2 - sigma_n^2) always holds and conditioning can
    // only improve by cutting. The threshold itself is probed on the two
    // closed forms sigma_1^2 / sigma_k^2 and sigma_1^2 / (sigma_n^2 + mu^2),
    // whose comparison the claim is about.
    if k0 >= 1 {
        let sk0sq = sigma[k0 - 1] * sigma[k0 - 1];
        checks.push(le_claim(
            "cut-kappa-le-shift",
            kappa_of(sigma, &RegMethod::CutK(CutParam::K(k0)))?,
            kappa_of(sigma, &shift)?,
        ));
        let lhs = s1sq / sk0sq;
        let below_denom = sk0sq * (1.0 - PROBE_OFFSET);
        checks.push(if below_denom > snsq {
            le_claim("cut-form-le-shift-form-below", lhs, s1sq / below_denom)
        } else {
            na_claim("cut-form-le-shift-form-below")
        });
        checks.push(lt_claim(
            "shift-form-lt-cut-form-above",
            s1sq / (sk0sq * (1.0 + PROBE_OFFSET)),
            lhs,
        ));
    } else {
        checks.push(na_claim("cut-kappa-le-shift"));
        checks.push(na_claim("cut-form-le-shift-form-below"));
        checks.push(na_claim("shift-form-lt-cut-form-above"));
    }

    // With the cut rule's index, sigma_{k+1} <= mu < sigma_k, so the cut
    // operator's norm cannot exceed the shift operator's at the same index.
    checks.push(le_claim(
        "cut-norm-le-shift-norm",
        frob_of(sigma, &RegMethod::CutK(CutParam::Mu(mu)))?,
        ((n - kc) as f64).sqrt() * mu,
    ));

    // The scaled modification: same conditioning as Tikhonov, smaller norm.
    if s1 > 0.0 && (mu > 0.0 || sn > 0.0) {
        let scaled = RegMethod::Scaled { mu };
        checks.push(eq_claim(
            "scaled-kappa-matches-tik",
            kappa_of(sigma, &scaled)?,
            kappa_of(sigma, &tik)?,
        ));
        checks.push(if mu > 0.0 {
            lt_claim(
                "scaled-norm-lt-tik",
                frob_of(sigma, &scaled)?,
                (n as f64).sqrt() * mu,
            )
        } else {
            na_claim("scaled-norm-lt-tik")
        });
    } else {
        checks.push(na_claim("scaled-kappa-matches-tik"));
        checks.push(na_claim("scaled-norm-lt-tik"));
    }

    // The scaled modification with its junction rule.
    let scaledk = RegMethod::ScaledK { mu };
    let k1 = theta_truncation_index(sigma, mu, 1.0);
    if s1 > 0.0 && (mu > 0.0 || sn > 0.0) {
        checks.push(eq_claim(
            "scaledk-kappa-matches-tik",
            kappa_of(sigma, &scaledk)?,
            kappa_of(sigma, &tik)?,
        ));
    } else {
        checks.push(na_claim("scaledk-kappa-matches-tik"));
    }
    if mu > 0.0 && s1 > 0.0 {
        let frk = frob_of(sigma, &scaledk)?;
        let mid = ((n - k1) as f64).sqrt() * mu;
        checks.push(if resolvable(musq / (s1sq + musq)) {
            lt_claim("scaledk-norm-lt-tail-bound", frk, mid)
        } else {
            le_claim("scaledk-norm-lt-tail-bound", frk, mid)
        });
        checks.push(lt_claim(
            "tail-bound-lt-tik-norm",
            mid,
            (n as f64).sqrt() * mu,
        ));
    } else {
        checks.push(na_claim("scaledk-norm-lt-tail-bound"));
        checks.push(na_claim("tail-bound-lt-tik-norm"));
    }

    // Scaled-with-junction versus the Frobenius-closest modification, at the
    // index bracketing mu^2 / sigma_1.
    if mu > 0.0 && mu < s1 {
        let kstar = cut_truncation_index(sigma, musq / s1);
        let lhs = frob_norm_reg(sigma, &theta_modification_at_k(sigma, mu, 1.0, kstar)?.dsq);
        checks.push(le_claim(
            "scaledk-norm-le-frmod",
            lhs,
            frob_of(sigma, &frmod)?,
        ));
    } else {
        checks.push(na_claim("scaledk-norm-le-frmod"));
    }

    // Norm relations among the junction methods at a shared index.
    if mu > 0.0 && s1 > 0.0 {
        let frk = frob_of(sigma, &scaledk)?;
        let shift_norm_at_k1 = ((n - k1) as f64).sqrt() * mu;
        checks.push(if resolvable(musq / (s1sq + musq)) {
            lt_claim("scaledk-norm-lt-shift", frk, shift_norm_at_k1)
        } else {
            le_claim("scaledk-norm-lt-shift", frk, shift_norm_at_k1)
        });
        let fr_scaled = frob_of(sigma, &RegMethod::Scaled { mu })?;
        let skq = sigma[k1 - 1] * sigma[k1 - 1];
        checks.push(if resolvable((s1sq - skq) / s1sq) {
            lt_claim("scaledk-norm-le-scaled", frk, fr_scaled)
        } else {
            le_claim("scaledk-norm-le-scaled", frk, fr_scaled)
        });
    } else {
        checks.push(na_claim("scaledk-norm-lt-shift"));
        checks.push(na_claim("scaledk-norm-le-scaled"));
    }

    // Blended family along a theta grid: operator norm nonincreasing,
    // condition number nondecreasing (strictly increasing overall when the
    // junction index stays at least 1 and mu > 0).
    let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut norms = Vec::with_capacity(grid.len());
    for &t in &grid {
        norms.push(frob_of(sigma, &RegMethod::Theta { mu, theta: t })?);
    }
    let monotone = norms
        .windows(2)
        .all(|w| w[1] <= w[0] + REL_SLACK * scale_of(w[0], w[1]));
    checks.push(ClaimCheck {
        id: "theta-norm-monotone",
        lhs: norms[0],
        rhs: norms[grid.len() - 1],
        verdict: if monotone {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    });
    if k0 >= 1 && (mu > 0.0 || sn > 0.0) {
        let mut kappas = Vec::with_capacity(grid.len());
        for &t in &grid {
            kappas.push(kappa_of(sigma, &RegMethod::Theta { mu, theta: t })?);
        }
        let nondecreasing = kappas
            .windows(2)
            .all(|w| w[1] >= w[0] - REL_SLACK * scale_of(w[0], w[1]));
        let strict_ok = if mu > 0.0 && resolvable(musq / (s1sq + musq)) {
            kappas[grid.len() - 1] - kappas[0] > REL_SLACK * kappas[0]
        } else {
            true
        };
        checks.push(ClaimCheck {
            id: "theta-kappa-monotone",
            lhs: kappas[0],
            rhs: kappas[grid.len() - 1],
            verdict: if nondecreasing && strict_ok {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
        });
    } else {
        checks.push(na_claim("theta-kappa-monotone"));
    }

    // At a junction index feasible for every theta (the theta = 0 rule's
    // index works for all of them), the condition number is affine in theta
    // and matches its closed form.
    if k0 >= 1 && (mu > 0.0 || sn > 0.0) {
        let kap_at = |t: f64| -> Result<f64> {
            kappa_normal(sigma, &theta_modification_at_k(sigma, mu, t, k0)?.dsq)
        };
        let k_theta = kap_at(theta)?;
        checks.push(eq_claim(
            "theta-kappa-affine",
            k_theta,
            (1.0 - theta) * kap_at(0.0)? + theta * kap_at(1.0)?,
        ));
        checks.push(eq_claim(
            "theta-kappa-formula",
            k_theta,
            (s1sq + theta * musq) / (snsq + musq),
        ));
    } else {
        checks.push(na_claim("theta-kappa-affine"));
        checks.push(na_claim("theta-kappa-formula"));
    }

    Ok(checks)
}

/// Pass/fail/not-applicable tallies for one claim across a suite run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClaimTally {
    pub pass: usize,
    pub fail: usize,
    pub not_applicable: usize,
}

/// Outcome of [`verify_proposition_suite`]: per-claim tallies in claim
/// order, plus the details of every failing check.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub trials: usize,
    pub tallies: Vec<(&'static str, ClaimTally)>,
    /// (trial index, mu, theta, failing check) for each failure.
    pub failures: Vec<(usize, f64, f64, ClaimCheck)>,
}

impl SuiteOutcome {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs [`verify_propositions`] over seeded random spectra: per trial, `n`
/// singular values drawn log-uniform over [1e-3, 1] and sorted, `mu`
/// log-uniform over [sigma_n, sigma_1], and the blend weight cycling
/// through {0, 1/4, 1/2, 3/4, 1}. The spectrum range keeps every strict
/// claim's margin numerically resolvable.
pub fn verify_proposition_suite(seed: u64, trials: usize, n: usize) -> Result<SuiteOutcome> {
    use rand::Rng;

    if trials == 0 {
        return Err(Error::InvalidParam {
            name: "trials",
            details: "at least one trial is required".into(),
        });
    }
    if n < 2 {
        return Err(Error::InvalidParam {
            name: "n",
            details: "spectra need at least two singular values".into(),
        });
    }
    const THETA_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut tallies: Vec<(&'static str, ClaimTally)> = Vec::new();
    let mut failures = Vec::new();
    for trial in 0..trials {
        let mut rng = crate::noise::RngStream::new(seed, 0)
            .substream(trial as u64)
            .rng();
        let mut sigma: Vec<f64> = (0..n)
            .map(|_| 10f64.powf(rng.random_range(-3.0..0.0)))
            .collect();
        sigma.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let (lo, hi) = (sigma[n - 1].ln(), sigma[0].ln());
        let mu = (lo + rng.random_range(0.0..1.0) * (hi - lo)).exp();
        let theta = THETA_GRID[trial % THETA_GRID.len()];
        for check in verify_propositions(&sigma, mu, theta)? {
            let tally = match tallies.iter_mut().find(|(id, _)| *id == check.id) {
                Some((_, t)) => t,
                None => {
                    tallies.push((check.id, ClaimTally::default()));
                    &mut tallies.last_mut().unwrap().1
                }
            };
            match check.verdict {
                Verdict::Pass => tally.pass += 1,
                Verdict::Fail => {
                    tally.fail += 1;
                    failures.push((trial, mu, theta, check));
                }
                Verdict::NotApplicable => tally.not_applicable += 1,
            }
        }
    }
    Ok(SuiteOutcome {
        trials,
        tallies,
        failures,
    })
}

/// Serializes claim checks as CSV with columns `claim,lhs,rhs,verdict`.
/// Not-applicable rows carry NaN sides.
pub fn render_report(checks: &[ClaimCheck]) -> String {
    let mut out = String::from("claim,lhs,rhs,verdict\n");
    for c in checks {
        let verdict = match c.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "na",
        };
        out.push_str(&format!(
            "{},{:.12e},{:.12e},{}\n",
            c.id, c.lhs, c.rhs, verdict
        ));
    }
    out
}
