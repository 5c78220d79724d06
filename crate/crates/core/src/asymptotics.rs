//! Asymptotic covariance of the scaled estimator and its Monte Carlo
//! verification.
//!
//! The scaled deviation S_T(β̂ − β) of the misspecified GLS estimator is
//! asymptotically normal with a sandwich covariance that has two equivalent
//! expressions: a finite-T matrix limit
//! (ZᵀΛ⁻¹Z)⁻¹ ZᵀΛ⁻¹ΣΛ⁻¹Z (ZᵀΛ⁻¹Z)⁻¹, and a spectral form
//! 2π [∫f_v⁻¹dH]⁻¹ ∫(f_u/f_v²)dH [∫f_v⁻¹dH]⁻¹ over the design's spectral
//! measure. Computing both and comparing them against the empirical
//! covariance of simulated deviations is the point of this module; neither
//! route overrides the other.

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::design::{Design, SpectralMeasure};
use crate::estimators::{
    fgls_ar_parts, ArFitMethod, GlsFrequencySolver, GlsTimeSolver, OlsSolver,
};
use crate::processes::{AcvfSeq, ArModelSpec, LinearFilterSpec, SpectralDensity};
use crate::rng::derive_seed;
use crate::toeplitz::{levinson, ToeplitzCov};
use crate::{Error, Result};

const TWO_PI: f64 = std::f64::consts::TAU;
/// Two-sided 1% normal critical value for the kurtosis statistic.
const KURTOSIS_Z_LIMIT: f64 = 2.575_829_303_549_021;

/// Finite-T sandwich (ZᵀΛ⁻¹Z)⁻¹ ZᵀΛ⁻¹ΣΛ⁻¹Z (ZᵀΛ⁻¹Z)⁻¹ with Λ built from
/// the hypothesized autocovariance and Σ from the true one.
///
/// Λ⁻¹ is applied through the Levinson factorization; Σ is materialized
/// densely (it appears only as a middle factor), which guards T ≤ 4096.
pub fn cv_matrix_limit(
    design: &Design,
    acvf_u: &AcvfSeq,
    acvf_v: &AcvfSeq,
) -> Result<DMatrix<f64>> {
    let t = design.t();
    let z = design.scaling().z;
    let fact = levinson(acvf_v, t)?;
    let w = fact.apply_inverse(&z)?;

    let bread = symmetrize(&(z.transpose() * &w));
    let sigma = ToeplitzCov::new(acvf_u.clone(), t)?.materialize()?;
    let meat = symmetrize(&(w.transpose() * (&sigma * &w)));

    let chol = Cholesky::new(bread).ok_or(Error::SingularSystem {
        context: "inverting ZᵀΛ⁻¹Z",
    })?;
    let inv = chol.inverse();
    Ok(symmetrize(&(&inv * meat * &inv)))
}

/// Spectral sandwich 2π [∫f_v⁻¹dH]⁻¹ ∫(f_u/f_v²)dH [∫f_v⁻¹dH]⁻¹.
///
/// Atoms are summed exactly; any tabulated density component is integrated
/// by trapezoid on its grid. The result is symmetrized.
pub fn cv_spectral(
    h: &SpectralMeasure,
    f_u: &SpectralDensity,
    f_v: &SpectralDensity,
) -> Result<DMatrix<f64>> {
    let bread = h.integrate(|w| 1.0 / f_v.evaluate(w));
    let meat = h.integrate(|w| f_u.evaluate(w) / f_v.evaluate(w).powi(2));
    let chol = Cholesky::new(symmetrize(&bread)).ok_or(Error::SingularSystem {
        context: "inverting ∫f_v⁻¹dH",
    })?;
    let inv = chol.inverse();
    Ok(symmetrize(&(&inv * meat * &inv)) * TWO_PI)
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    0.5 * (m + m.transpose())
}

fn check_psd(m: &DMatrix<f64>, what: &'static str) -> Result<()> {
    let scale = m.abs().max().max(1.0);
    let min_eig = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -1e-10 * scale {
        return Err(Error::InvalidParameter(format!(
            "{what} is not positive semidefinite (eigenvalue {min_eig:.3e})"
        )));
    }
    Ok(())
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn from_rows(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, rows.first().map_or(0, Vec::len), |i, j| rows[i][j])
}

fn max_norm_gap(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

/// Max-norm gaps between the covariance routes that were available.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Discrepancy {
    pub spectral_vs_matrix: Option<f64>,
    pub spectral_vs_empirical: Option<f64>,
    pub matrix_vs_empirical: Option<f64>,
}

/// The asymptotic covariance computed up to three ways: spectral integral
/// (needs an analytic measure), finite-T matrix limit, and the empirical
/// second moment of simulated scaled deviations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub cv_spectral: Option<Vec<Vec<f64>>>,
    /// (T, matrix) pairs for each requested finite-T evaluation.
    pub cv_matrix: Vec<(usize, Vec<Vec<f64>>)>,
    pub cv_empirical: Vec<Vec<f64>>,
    pub discrepancy: Discrepancy,
}

impl CovarianceReport {
    pub fn new(
        cv_spectral: Option<DMatrix<f64>>,
        cv_matrix: Vec<(usize, DMatrix<f64>)>,
        cv_empirical: DMatrix<f64>,
    ) -> Result<Self> {
        if let Some(m) = &cv_spectral {
            check_psd(m, "spectral covariance")?;
        }
        for (_, m) in &cv_matrix {
            check_psd(m, "matrix-limit covariance")?;
        }
        check_psd(&cv_empirical, "empirical covariance")?;

        let last_matrix = cv_matrix.last().map(|(_, m)| m);
        let discrepancy = Discrepancy {
            spectral_vs_matrix: cv_spectral
                .as_ref()
                .zip(last_matrix)
                .map(|(s, m)| max_norm_gap(s, m)),
            spectral_vs_empirical: cv_spectral
                .as_ref()
                .map(|s| max_norm_gap(s, &cv_empirical)),
            matrix_vs_empirical: last_matrix.map(|m| max_norm_gap(m, &cv_empirical)),
        };
        Ok(Self {
            cv_spectral: cv_spectral.map(|m| rows_of(&m)),
            cv_matrix: cv_matrix
                .into_iter()
                .map(|(t, m)| (t, rows_of(&m)))
                .collect(),
            cv_empirical: rows_of(&cv_empirical),
            discrepancy,
        })
    }

    pub fn spectral(&self) -> Option<DMatrix<f64>> {
        self.cv_spectral.as_deref().map(from_rows)
    }

    pub fn matrix_at(&self, t: usize) -> Option<DMatrix<f64>> {
        self.cv_matrix
            .iter()
            .find(|(tt, _)| *tt == t)
            .map(|(_, m)| from_rows(m))
    }

    pub fn empirical(&self) -> DMatrix<f64> {
        from_rows(&self.cv_empirical)
    }

    /// The preferred target for normality testing: spectral when available,
    /// otherwise the last matrix-limit entry.
    pub fn target(&self) -> Option<(DMatrix<f64>, &'static str)> {
        if self.cv_spectral.is_some() {
            return self.spectral().map(|m| (m, "spectral"));
        }
        self.cv_matrix
            .last()
            .map(|(_, m)| (from_rows(m), "matrix"))
    }
}

/// One estimator entry in a Monte Carlo study.
#[derive(Debug, Clone)]
pub enum StudyMethod {
    Ols,
    /// Time-domain GLS with a fixed hypothesized autocovariance.
    GlsTime { label: String, acvf: AcvfSeq },
    /// Frequency-domain GLS with a fixed hypothesized density.
    GlsFrequency {
        label: String,
        density: SpectralDensity,
    },
    /// Feasible GLS re-estimating AR(N) coefficients per replicate.
    FglsAr { order: usize, fit: ArFitMethod },
}

impl StudyMethod {
    pub fn label(&self) -> String {
        match self {
            StudyMethod::Ols => "ols".into(),
            StudyMethod::GlsTime { label, .. } => label.clone(),
            StudyMethod::GlsFrequency { label, .. } => label.clone(),
            StudyMethod::FglsAr { order, fit } => {
                let f = match fit {
                    ArFitMethod::YuleWalker => "yw",
                    ArFitMethod::OlsResidualRegression => "olsrr",
                };
                format!("fgls_ar{order}_{f}")
            }
        }
    }
}

/// A complete study specification. Per-replicate seeds derive from the
/// master seed counter-style, so results do not depend on thread count.
#[derive(Debug, Clone)]
pub struct McStudyConfig {
    pub design: Design,
    pub error: LinearFilterSpec,
    pub beta: DVector<f64>,
    pub methods: Vec<StudyMethod>,
    pub replicates: usize,
    pub seed: u64,
}

impl McStudyConfig {
    fn validate(&self) -> Result<()> {
        if self.replicates < 100 {
            return Err(Error::InvalidParameter(format!(
                "need at least 100 replicates, got {}",
                self.replicates
            )));
        }
        if self.beta.len() != self.design.d() {
            return Err(Error::DimensionMismatch {
                expected: self.design.d(),
                actual: self.beta.len(),
            });
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("no methods requested".into()));
        }
        Ok(())
    }
}

/// Results for one method in a study.
#[derive(Debug, Clone)]
pub struct MethodStudy {
    pub label: String,
    /// R×d matrix of scaled deviations S_T(β̂ − β).
    pub samples: DMatrix<f64>,
    pub covariance: CovarianceReport,
    pub normality: NormalityReport,
}

/// Study output, one entry per requested method.
#[derive(Debug, Clone)]
pub struct McStudyOutcome {
    pub methods: Vec<MethodStudy>,
}

enum Prepared {
    Ols(OlsSolver),
    GlsTime(GlsTimeSolver),
    GlsFrequency(GlsFrequencySolver),
    FglsAr { order: usize, fit: ArFitMethod },
}

impl Prepared {
    fn fit(&self, design: &Design, y: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            Prepared::Ols(s) => s.fit_beta(y),
            Prepared::GlsTime(s) => s.fit_beta(y),
            Prepared::GlsFrequency(s) => s.fit_beta(y).map(|(b, _)| b),
            Prepared::FglsAr { order, fit } => {
                fgls_ar_parts(design, y, *order, *fit).map(|r| r.beta())
            }
        }
    }
}

/// The hypothesized (density, autocovariance) pair a method is implicitly
/// weighting with, used to compute its covariance targets.
fn hypothesized_pair(
    method: &StudyMethod,
    acvf_u: &AcvfSeq,
    t: usize,
) -> Result<(Option<SpectralDensity>, Option<AcvfSeq>)> {
    match method {
        StudyMethod::Ols => Ok((
            Some(SpectralDensity::constant(1.0 / TWO_PI)?),
            Some(AcvfSeq::white(1.0, 0)?),
        )),
        StudyMethod::GlsTime { acvf, .. } => {
            Ok((SpectralDensity::from_acvf(acvf).ok(), Some(acvf.clone())))
        }
        StudyMethod::GlsFrequency { density, .. } => {
            Ok((Some(density.clone()), density.acvf(t - 1).ok()))
        }
        StudyMethod::FglsAr { order, .. } => {
            // probability limit of the fitted coefficients: the Yule-Walker
            // projection of the true autocovariance at this order
            let fact = levinson(acvf_u, order + 1)?;
            let kappa: Vec<f64> = (1..=*order).map(|i| -fact.coefficient(i, *order)).collect();
            let ar = ArModelSpec::new(kappa, fact.variances()[*order])?;
            Ok((
                Some(SpectralDensity::from_ar(&ar)?),
                Some(ar.acvf(t - 1)?),
            ))
        }
    }
}

/// Run the study: simulate errors, form y = Xβ + u, fit every method, and
/// assemble covariance and normality reports per method.
///
/// Replicate failures abort with the replicate index and seed. Identical
/// configurations produce bit-identical sample matrices.
pub fn mc_study(config: &McStudyConfig) -> Result<McStudyOutcome> {
    config.validate()?;
    let design = &config.design;
    let t = design.t();
    let d = design.d();
    let r = config.replicates;
    let scaling = design.scaling();

    let prepared: Vec<Prepared> = config
        .methods
        .iter()
        .map(|m| -> Result<Prepared> {
            Ok(match m {
                StudyMethod::Ols => Prepared::Ols(OlsSolver::new(design)?),
                StudyMethod::GlsTime { acvf, .. } => {
                    Prepared::GlsTime(GlsTimeSolver::new(design, acvf)?)
                }
                StudyMethod::GlsFrequency { density, .. } => {
                    Prepared::GlsFrequency(GlsFrequencySolver::new(design, density)?)
                }
                StudyMethod::FglsAr { order, fit } => Prepared::FglsAr {
                    order: *order,
                    fit: *fit,
                },
            })
        })
        .collect::<Result<_>>()?;

    let x = design.x();
    let mean = x * &config.beta;
    let per_replicate: Vec<Vec<DVector<f64>>> = (0..r)
        .into_par_iter()
        .map(|rep| {
            let seed = derive_seed(config.seed, rep as u64);
            let run = || -> Result<Vec<DVector<f64>>> {
                let u = config.error.simulate(t, seed);
                let y = &mean + DVector::from_vec(u);
                prepared
                    .iter()
                    .map(|p| {
                        let beta_hat = p.fit(design, &y)?;
                        Ok(DVector::from_fn(d, |i, _| {
                            scaling.s[i] * (beta_hat[i] - config.beta[i])
                        }))
                    })
                    .collect()
            };
            run().map_err(|e| Error::ReplicateFailed {
                replicate: rep,
                seed,
                source: Box::new(e),
            })
        })
        .collect::<std::result::Result<_, _>>()?;

    // truth side, exact for the finite filter
    let acvf_u = config.error.acvf(t - 1)?;
    let f_u = config.error.spectral_density()?;
    let matrix_route_ok = t <= crate::toeplitz::MATERIALIZE_MAX;

    let mut methods = Vec::with_capacity(config.methods.len());
    for (mi, method) in config.methods.iter().enumerate() {
        let mut samples = DMatrix::zeros(r, d);
        for (rep, fits) in per_replicate.iter().enumerate() {
            samples.set_row(rep, &fits[mi].transpose());
        }

        let (f_v, acvf_v) = hypothesized_pair(method, &acvf_u, t)?;
        let spectral = match (design.measure(), &f_v) {
            (Some(h), Some(fv)) => Some(cv_spectral(h, &f_u, fv)?),
            _ => None,
        };
        let matrix = match (&acvf_v, matrix_route_ok) {
            (Some(av), true) => vec![(t, cv_matrix_limit(design, &acvf_u, av)?)],
            _ => Vec::new(),
        };
        let empirical = second_moment(&samples);
        let covariance = CovarianceReport::new(spectral, matrix, empirical)?;

        let (target, route) = covariance.target().ok_or(Error::SingularSystem {
            context: "selecting a covariance target (no route available)",
        })?;
        let normality = normality_report(&samples, &target, route, None)?;

        methods.push(MethodStudy {
            label: method.label(),
            samples,
            covariance,
            normality,
        });
    }
    Ok(McStudyOutcome { methods })
}

/// Second moment about zero, (1/R) Σ v vᵀ — the estimand has mean zero.
pub fn second_moment(samples: &DMatrix<f64>) -> DMatrix<f64> {
    let r = samples.nrows() as f64;
    symmetrize(&(samples.transpose() * samples / r))
}

/// Distribution diagnostics of scaled-deviation samples against N(0, C).
///
/// All statistics are pure functions of the stored samples and target, so a
/// report can be reproduced from its inputs. Thresholds are the 1%
/// asymptotic cutoffs by default and are policy, not baked truth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalityReport {
    /// Kolmogorov–Smirnov statistic per component, samples standardized by
    /// the target's diagonal.
    pub ks: Vec<f64>,
    pub ks_cutoff: f64,
    pub ks_pass: bool,
    /// Multivariate skewness b₁ of the whitened samples.
    pub mardia_skewness: f64,
    /// R·b₁/6, asymptotically χ² with d(d+1)(d+2)/6 degrees of freedom.
    pub skewness_stat: f64,
    pub skewness_threshold: f64,
    pub skewness_pass: bool,
    /// Multivariate kurtosis b₂ of the whitened samples (→ d(d+2)).
    pub mardia_kurtosis: f64,
    /// Normalized kurtosis statistic, asymptotically standard normal.
    pub kurtosis_stat: f64,
    pub kurtosis_threshold: f64,
    pub kurtosis_pass: bool,
    /// ‖empirical − target‖_max / ‖target‖_max.
    pub cov_rel_err: f64,
    pub target: Vec<Vec<f64>>,
    pub target_route: String,
}

/// Compare R×d scaled-deviation samples against the N(0, target) law.
///
/// `ks_cutoff` defaults to 1.63/√R, the asymptotic 1% critical value.
pub fn normality_report(
    samples: &DMatrix<f64>,
    target: &DMatrix<f64>,
    target_route: &str,
    ks_cutoff: Option<f64>,
) -> Result<NormalityReport> {
    let r = samples.nrows();
    let d = samples.ncols();
    if r < 100 {
        return Err(Error::InvalidParameter(format!(
            "need at least 100 samples, got {r}"
        )));
    }
    if target.nrows() != d || target.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: target.nrows(),
        });
    }
    Cholesky::new(symmetrize(target)).ok_or(Error::SingularSystem {
        context: "factoring the target covariance",
    })?;

    let rf = r as f64;
    let ks_cutoff = ks_cutoff.unwrap_or(1.63 / rf.sqrt());
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");

    let mut ks = Vec::with_capacity(d);
    for c in 0..d {
        let sd = target[(c, c)].sqrt();
        let mut z: Vec<f64> = samples.column(c).iter().map(|v| v / sd).collect();
        z.sort_by(f64::total_cmp);
        let mut stat = 0.0f64;
        for (i, zi) in z.iter().enumerate() {
            let phi = std_normal.cdf(*zi);
            stat = stat
                .max(((i + 1) as f64 / rf - phi).abs())
                .max((phi - i as f64 / rf).abs());
        }
        ks.push(stat);
    }
    let ks_pass = ks.iter().all(|s| *s < ks_cutoff);

    // The shape statistics are affine-invariant, so whiten with the sample
    // mean and covariance; that is the studentization under which the
    // χ² / normal reference thresholds hold.
    let mean = samples.row_sum().transpose() / rf;
    let mut s = DMatrix::<f64>::zeros(d, d);
    for i in 0..r {
        let c = samples.row(i).transpose() - &mean;
        s += &c * c.transpose();
    }
    s /= rf;
    let sample_chol = Cholesky::new(symmetrize(&s)).ok_or(Error::SingularSystem {
        context: "factoring the sample covariance of the deviations",
    })?;
    let whitened: Vec<DVector<f64>> = (0..r)
        .map(|i| {
            let x = samples.row(i).transpose() - &mean;
            sample_chol
                .l_dirty()
                .solve_lower_triangular(&x)
                .expect("nonsingular Cholesky factor")
        })
        .collect();

    let mut b1 = 0.0;
    for a in &whitened {
        for b in &whitened {
            b1 += a.dot(b).powi(3);
        }
    }
    b1 /= rf * rf;
    let skew_df = (d * (d + 1) * (d + 2)) as f64 / 6.0;
    let skewness_stat = rf * b1 / 6.0;
    let skewness_threshold = ChiSquared::new(skew_df)
        .expect("positive dof")
        .inverse_cdf(0.99);

    let b2 = whitened
        .iter()
        .map(|a| a.norm_squared().powi(2))
        .sum::<f64>()
        / rf;
    let dd = d as f64;
    let kurtosis_stat = (b2 - dd * (dd + 2.0)) / (8.0 * dd * (dd + 2.0) / rf).sqrt();

    let empirical = second_moment(samples);
    let cov_rel_err = max_norm_gap(&empirical, target) / target.abs().max();

    Ok(NormalityReport {
        ks,
        ks_cutoff,
        ks_pass,
        mardia_skewness: b1,
        skewness_stat,
        skewness_threshold,
        skewness_pass: skewness_stat < skewness_threshold,
        mardia_kurtosis: b2,
        kurtosis_stat,
        kurtosis_threshold: KURTOSIS_Z_LIMIT,
        kurtosis_pass: kurtosis_stat.abs() < KURTOSIS_Z_LIMIT,
        cov_rel_err,
        target: rows_of(target),
        target_route: target_route.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{builtin_design, DesignKind};
    use crate::processes::InnovationLaw;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;
    use std::f64::consts::PI;

    fn ar1_truth() -> (LinearFilterSpec, AcvfSeq, SpectralDensity) {
        let ar = ArModelSpec::new(vec![0.5], 1.0).unwrap();
        let spec = LinearFilterSpec::from_ar(&ar, InnovationLaw::Gaussian).unwrap();
        let acvf = ar.acvf(4095).unwrap();
        let f = SpectralDensity::from_ar(&ar).unwrap();
        (spec, acvf, f)
    }

    #[test]
    fn cv_matrix_white_white_intercept_is_one() {
        let design = builtin_design(&[DesignKind::Intercept], 64).unwrap();
        let white = AcvfSeq::white(1.0, 0).unwrap();
        let c = cv_matrix_limit(&design, &white, &white).unwrap();
        assert_abs_diff_eq!(c[(0, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cv_matrix_ar1_intercept_approaches_four() {
        let design = builtin_design(&[DesignKind::Intercept], 2048).unwrap();
        let (_, acvf_u, _) = ar1_truth();
        let white = AcvfSeq::white(1.0, 0).unwrap();
        let c = cv_matrix_limit(&design, &acvf_u, &white).unwrap();
        assert_abs_diff_eq!(c[(0, 0)], 4.0, epsilon = 0.02 * 4.0);
    }

    #[test]
    fn cv_spectral_hand_values() {
        let (_, _, f_u) = ar1_truth();
        let pair = builtin_design(
            &[DesignKind::CosinePair {
                omega1: PI / 2.0,
                omega2: PI,
            }],
            16,
        )
        .unwrap();
        let h = pair.measure().unwrap();

        let c_true = cv_spectral(h, &f_u, &f_u).unwrap();
        assert_abs_diff_eq!(c_true[(0, 0)], 4.0 / 7.0, epsilon = 1e-10);

        let white = SpectralDensity::constant(1.0 / TWO_PI).unwrap();
        let c_ols = cv_spectral(h, &f_u, &white).unwrap();
        assert_abs_diff_eq!(c_ols[(0, 0)], 0.622_222_222_222_222, epsilon = 1e-10);
    }

    #[test]
    fn cv_spectral_single_atom_ignores_weighting() {
        let (_, _, f_u) = ar1_truth();
        let intercept = builtin_design(&[DesignKind::Intercept], 8).unwrap();
        let h = intercept.measure().unwrap();
        let expect = TWO_PI * f_u.evaluate(0.0);

        let choices = [
            SpectralDensity::constant(1.0).unwrap(),
            f_u.clone(),
            SpectralDensity::from_ar(&ArModelSpec::new(vec![-0.3], 2.0).unwrap()).unwrap(),
        ];
        for f_v in &choices {
            let c = cv_spectral(h, &f_u, f_v).unwrap();
            assert_abs_diff_eq!(c[(0, 0)], expect, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(expect, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn cv_spectral_correct_weighting_is_efficient() {
        let (_, _, f_u) = ar1_truth();
        let pair = builtin_design(
            &[DesignKind::CosinePair {
                omega1: PI / 2.0,
                omega2: PI,
            }],
            16,
        )
        .unwrap();
        let h = pair.measure().unwrap();
        let best = cv_spectral(h, &f_u, &f_u).unwrap();
        for f_v in [
            SpectralDensity::constant(0.5).unwrap(),
            SpectralDensity::from_ar(&ArModelSpec::new(vec![0.2], 1.0).unwrap()).unwrap(),
            SpectralDensity::from_ar(&ArModelSpec::new(vec![-0.4], 1.0).unwrap()).unwrap(),
        ] {
            let other = cv_spectral(h, &f_u, &f_v).unwrap();
            let diff = other - &best;
            let min_eig = diff
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            assert!(min_eig >= -1e-10, "efficiency ordering violated: {min_eig}");
        }

        // with f_v = f_u the sandwich collapses to 2π[∫f_u⁻¹dH]⁻¹
        let bread = h.integrate(|w| 1.0 / f_u.evaluate(w));
        let collapsed = TWO_PI * bread.try_inverse().unwrap();
        assert_abs_diff_eq!((collapsed - best).abs().max(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn spectral_and_matrix_routes_agree() {
        let (_, acvf_u, f_u) = ar1_truth();
        let design = builtin_design(&[DesignKind::Cosine { omega: PI / 2.0 }], 1024).unwrap();
        let h = design.measure().unwrap();
        let spectral = cv_spectral(h, &f_u, &f_u).unwrap();
        let matrix = cv_matrix_limit(&design, &acvf_u, &acvf_u).unwrap();
        let rel = (&spectral - &matrix).abs().max() / spectral.abs().max();
        assert!(rel < 2e-2, "relative gap {rel}");
    }

    fn small_study(seed: u64) -> McStudyConfig {
        let (error, acvf_u, _) = ar1_truth();
        let design = builtin_design(&[DesignKind::Intercept], 256).unwrap();
        let truth = AcvfSeq::new(
            acvf_u.values()[..256].to_vec(),
            acvf_u.tail_bound(),
        )
        .unwrap();
        McStudyConfig {
            design,
            error,
            beta: DVector::from_vec(vec![1.0]),
            methods: vec![
                StudyMethod::Ols,
                StudyMethod::GlsTime {
                    label: "gls_time_true".into(),
                    acvf: truth,
                },
            ],
            replicates: 120,
            seed,
        }
    }

    #[test]
    fn mc_study_is_reproducible() {
        let a = mc_study(&small_study(5)).unwrap();
        let b = mc_study(&small_study(5)).unwrap();
        for (ma, mb) in a.methods.iter().zip(&b.methods) {
            assert_eq!(ma.samples, mb.samples);
        }
        let c = mc_study(&small_study(6)).unwrap();
        assert_ne!(a.methods[0].samples, c.methods[0].samples);
    }

    #[test]
    fn mc_study_vanishing_noise_gives_zero_deviations() {
        let design = builtin_design(&[DesignKind::Intercept], 128).unwrap();
        let error = LinearFilterSpec::white(1e-20, InnovationLaw::Gaussian).unwrap();
        let config = McStudyConfig {
            design,
            error,
            beta: DVector::from_vec(vec![2.0]),
            methods: vec![StudyMethod::Ols],
            replicates: 100,
            seed: 1,
        };
        let out = mc_study(&config).unwrap();
        let max_dev = out.methods[0].samples.abs().max();
        assert!(max_dev < 1e-6, "max deviation {max_dev}");
        assert!(out.methods[0].covariance.empirical()[(0, 0)] < 1e-12);
    }

    #[test]
    fn normality_accepts_the_null() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let r = 5000;
        let target = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 0.5]);
        let chol = Cholesky::new(target.clone()).unwrap();
        let mut samples = DMatrix::zeros(r, 2);
        for i in 0..r {
            let z = DVector::from_fn(2, |_, _| rng.sample::<f64, _>(StandardNormal));
            let x = chol.l() * z;
            samples.set_row(i, &x.transpose());
        }
        let rep = normality_report(&samples, &target, "supplied", None).unwrap();
        assert!(rep.ks_pass, "ks = {:?} cutoff {}", rep.ks, rep.ks_cutoff);
        assert!(rep.skewness_pass);
        assert!(rep.kurtosis_pass);
        assert!(rep.cov_rel_err < 0.1);
    }

    #[test]
    fn normality_rejects_skewed_samples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let r = 5000;
        // centered exponential: mean 0, variance 1, skewness 2
        let mut samples = DMatrix::zeros(r, 1);
        for i in 0..r {
            let u: f64 = rng.random();
            samples[(i, 0)] = -(1.0 - u).ln() - 1.0;
        }
        let target = DMatrix::from_element(1, 1, 1.0);
        let rep = normality_report(&samples, &target, "supplied", None).unwrap();
        assert!(!rep.skewness_pass, "stat {}", rep.skewness_stat);
    }

    #[test]
    fn normality_report_is_rerunnable() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let samples = DMatrix::from_fn(200, 1, |_, _| rng.sample::<f64, _>(StandardNormal));
        let target = DMatrix::from_element(1, 1, 1.0);
        let a = normality_report(&samples, &target, "supplied", None).unwrap();
        let b = normality_report(&samples, &target, "supplied", None).unwrap();
        assert_eq!(a.ks, b.ks);
        assert_eq!(a.skewness_stat, b.skewness_stat);
        assert_eq!(a.kurtosis_stat, b.kurtosis_stat);
    }
}
