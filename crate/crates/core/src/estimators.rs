//! Regression estimators: OLS, time-domain GLS under a hypothesized error
//! covariance, its frequency-domain analogue built on periodograms, and
//! feasible GLS with AR coefficients estimated from OLS residuals.

use std::io::{Read, Write};
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::design::Design;
use crate::processes::{AcvfSeq, ArModelSpec, SpectralDensity};
use crate::toeplitz::{levinson, LevinsonFactorization};
use crate::{Error, Result};

const TWO_PI: f64 = std::f64::consts::TAU;
/// Relative bound on the imaginary residue of the assembled frequency-domain
/// system; it vanishes analytically by conjugate symmetry.
const IMAG_RESIDUE_TOL: f64 = 1e-8;

/// Observed series y paired with the design that generated its mean.
#[derive(Debug, Clone)]
pub struct RegressionSample {
    design: Design,
    y: DVector<f64>,
}

impl RegressionSample {
    pub fn new(design: Design, y: DVector<f64>) -> Result<Self> {
        if y.len() != design.t() {
            return Err(Error::DimensionMismatch {
                expected: design.t(),
                actual: y.len(),
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("y must be finite".into()));
        }
        Ok(Self { design, y })
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    /// CSV with the design columns followed by `y`, one row per t.
    pub fn to_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = self.design.labels().to_vec();
        header.push("y".into());
        w.write_record(&header)
            .map_err(|e| Error::Parse(e.to_string()))?;
        for r in 0..self.design.t() {
            let mut row: Vec<String> = (0..self.design.d())
                .map(|c| format!("{}", self.design.x()[(r, c)]))
                .collect();
            row.push(format!("{}", self.y[r]));
            w.write_record(&row).map_err(|e| Error::Parse(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }
}

/// Read a sample whose CSV carries the named design columns plus `y`.
pub fn read_sample_csv<R: Read>(reader: R, labels: &[String]) -> Result<RegressionSample> {
    let mut r = csv::Reader::from_reader(reader);
    let headers: Vec<String> = r
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut col_index = Vec::with_capacity(labels.len());
    for label in labels {
        let idx = headers
            .iter()
            .position(|h| h == label)
            .ok_or_else(|| Error::Parse(format!("missing design column `{label}`")))?;
        col_index.push(idx);
    }
    let y_idx = headers
        .iter()
        .position(|h| h == "y")
        .ok_or_else(|| Error::Parse("missing column `y`".into()))?;

    let mut xs: Vec<Vec<f64>> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| Error::Parse("short CSV row".into()))?
                .parse()
                .map_err(|e| Error::Parse(format!("bad number: {e}")))
        };
        xs.push(col_index.iter().map(|&i| parse(i)).collect::<Result<_>>()?);
        ys.push(parse(y_idx)?);
    }
    let t = ys.len();
    let x = DMatrix::from_fn(t, labels.len(), |i, j| xs[i][j]);
    let design = Design::new(x, labels.to_vec())?;
    RegressionSample::new(design, DVector::from_vec(ys))
}

/// Which estimator produced a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodTag {
    Ols,
    GlsTime,
    GlsFrequency,
    FglsAr,
}

/// Method-specific metadata carried alongside a fit.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FitAux {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_hat: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_method: Option<String>,
    /// Largest relative imaginary residue seen while assembling the
    /// frequency-domain system.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub imag_residue_rel: Option<f64>,
    /// Share of the ω = 2π term in the weighted periodogram trace; dominant
    /// for designs with spectral mass at frequency zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_frequency_share: Option<f64>,
}

/// Estimate β̂ with optional scaled deviation S_T(β̂ − β) from simulations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub method: MethodTag,
    pub beta_hat: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaled_dev: Option<Vec<f64>>,
    #[serde(default)]
    pub aux: FitAux,
}

impl FitResult {
    fn new(method: MethodTag, beta_hat: DVector<f64>, aux: FitAux) -> Result<Self> {
        if beta_hat.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem {
                context: "assembling the estimate (non-finite coefficients)",
            });
        }
        Ok(Self {
            method,
            beta_hat: beta_hat.iter().copied().collect(),
            scaled_dev: None,
            aux,
        })
    }

    pub fn beta(&self) -> DVector<f64> {
        DVector::from_vec(self.beta_hat.clone())
    }

    /// Attach S_T(β̂ − β) for a known true β (simulation mode).
    pub fn with_scaled_dev(mut self, s: &DVector<f64>, beta_true: &DVector<f64>) -> Self {
        let dev: Vec<f64> = (0..self.beta_hat.len())
            .map(|i| s[i] * (self.beta_hat[i] - beta_true[i]))
            .collect();
        self.scaled_dev = Some(dev);
        self
    }
}

/// Thin-QR least squares with a rank guard on the R diagonal.
fn qr_least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let qr = QrSolver::new(x)?;
    qr.solve(y)
}

/// Reusable thin QR of a fixed matrix.
struct QrSolver {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
}

impl QrSolver {
    fn new(x: &DMatrix<f64>) -> Result<Self> {
        let d = x.ncols();
        let qr = x.clone().qr();
        let q = qr.q();
        let r = qr.r();
        let diag_max = (0..d).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
        if diag_max == 0.0 || (0..d).any(|i| r[(i, i)].abs() < 1e-10 * diag_max) {
            return Err(Error::RankDeficient);
        }
        Ok(Self { q, r })
    }

    fn solve(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        let qty = self.q.transpose() * y;
        self.r
            .solve_upper_triangular(&qty)
            .ok_or(Error::RankDeficient)
    }
}

/// Ordinary least squares β̂ = (XᵀX)⁻¹Xᵀy via orthogonal decomposition.
pub fn ols(sample: &RegressionSample) -> Result<FitResult> {
    let solver = OlsSolver::new(&sample.design)?;
    let beta = solver.fit_beta(&sample.y)?;
    FitResult::new(MethodTag::Ols, beta, FitAux::default())
}

/// OLS with the design decomposition prepared once.
pub struct OlsSolver {
    qr: QrSolver,
}

impl OlsSolver {
    pub fn new(design: &Design) -> Result<Self> {
        Ok(Self {
            qr: QrSolver::new(design.x())?,
        })
    }

    pub fn fit_beta(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.qr.solve(y)
    }
}

/// Time-domain GLS under a hypothesized autocovariance, prepared once and
/// reusable across many y vectors sharing the same design.
///
/// The factorization whitens the regression (Δ^{−1/2}L X, Δ^{−1/2}L y), so
/// the hypothesized inverse covariance is applied without ever being formed.
pub struct GlsTimeSolver {
    fact: LevinsonFactorization,
    qr: QrSolver,
}

impl GlsTimeSolver {
    pub fn new(design: &Design, acvf_v: &AcvfSeq) -> Result<Self> {
        let fact = levinson(acvf_v, design.t())?;
        let xw = fact.whiten(design.x())?;
        let qr = QrSolver::new(&xw)?;
        Ok(Self { fact, qr })
    }

    pub fn fit_beta(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        let yw = DVector::from_vec(self.fact.whiten_vec(y.as_slice())?);
        self.qr.solve(&yw)
    }
}

/// β̃(Λ) = (XᵀΛ⁻¹X)⁻¹XᵀΛ⁻¹y with the Toeplitz covariance built from the
/// hypothesized autocovariance.
pub fn gls_time(sample: &RegressionSample, acvf_v: &AcvfSeq) -> Result<FitResult> {
    let solver = GlsTimeSolver::new(&sample.design, acvf_v)?;
    let beta = solver.fit_beta(&sample.y)?;
    FitResult::new(MethodTag::GlsTime, beta, FitAux::default())
}

/// Discrete transforms D(ω_j) = Σ_t x_t e^{ιtω_j} at the Fourier frequencies
/// ω_j = 2πj/T, j = 1..=T, up to the phase e^{ιω_j} which cancels in every
/// periodogram product.
fn column_transforms(x: &DMatrix<f64>, fft: &Arc<dyn Fft<f64>>) -> Vec<Vec<Complex<f64>>> {
    (0..x.ncols())
        .map(|c| {
            let mut buf: Vec<Complex<f64>> =
                x.column(c).iter().map(|&v| Complex::new(v, 0.0)).collect();
            fft.process(&mut buf);
            buf
        })
        .collect()
}

fn vector_transform(y: &DVector<f64>, fft: &Arc<dyn Fft<f64>>) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = y.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft.process(&mut buf);
    buf
}

/// Periodograms of the design and the design/response cross terms at the T
/// Fourier frequencies 2πt/T, t = 1..T (the t = T entry aliases ω = 0).
#[derive(Debug, Clone)]
pub struct PeriodogramSet {
    pub frequencies: Vec<f64>,
    /// J_xx(ω) = (2πT)⁻¹ (Σ x_t e^{ιtω})(Σ x_tᵀ e^{−ιtω}); Hermitian PSD of rank ≤ 1.
    pub jxx: Vec<DMatrix<Complex<f64>>>,
    /// J_xY(ω) = (2πT)⁻¹ (Σ x_t e^{ιtω})(Σ Y_t e^{−ιtω}).
    pub jxy: Vec<DVector<Complex<f64>>>,
}

/// Compute the full periodogram set by FFT of each design column and of y.
pub fn periodograms(sample: &RegressionSample) -> Result<PeriodogramSet> {
    let t = sample.design.t();
    let d = sample.design.d();
    if t < 2 {
        return Err(Error::InvalidParameter("periodograms need T ≥ 2".into()));
    }
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_inverse(t);
    let dx = column_transforms(sample.design.x(), &fft);
    let dy = vector_transform(&sample.y, &fft);
    let norm = 1.0 / (TWO_PI * t as f64);

    let mut frequencies = Vec::with_capacity(t);
    let mut jxx = Vec::with_capacity(t);
    let mut jxy = Vec::with_capacity(t);
    for j in 1..=t {
        let idx = j % t;
        frequencies.push(TWO_PI * j as f64 / t as f64);
        let v = DVector::from_fn(d, |i, _| dx[i][idx]);
        jxx.push(DMatrix::from_fn(d, d, |a, b| v[a] * v[b].conj() * norm));
        jxy.push(DVector::from_fn(d, |a, _| v[a] * dy[idx].conj() * norm));
    }
    Ok(PeriodogramSet {
        frequencies,
        jxx,
        jxy,
    })
}

/// Frequency-domain GLS under a hypothesized spectral density, prepared once
/// per (design, density) and reusable across y vectors.
pub struct GlsFrequencySolver {
    t: usize,
    d: usize,
    fft: Arc<dyn Fft<f64>>,
    /// w_j = 1/f_v(2πj/T), j = 1..=T, premultiplied by (2πT)⁻¹.
    weights: Vec<f64>,
    dx: Vec<Vec<Complex<f64>>>,
    bread: Cholesky<f64, Dyn>,
    imag_residue_rel: f64,
    zero_frequency_share: f64,
}

impl GlsFrequencySolver {
    pub fn new(design: &Design, f_v: &SpectralDensity) -> Result<Self> {
        let t = design.t();
        let d = design.d();
        if t < 2 {
            return Err(Error::InvalidParameter(
                "frequency-domain estimation needs T ≥ 2".into(),
            ));
        }
        let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_inverse(t);
        let dx = column_transforms(design.x(), &fft);
        let norm = 1.0 / (TWO_PI * t as f64);
        let weights: Vec<f64> = (1..=t)
            .map(|j| norm / f_v.evaluate(TWO_PI * j as f64 / t as f64))
            .collect();

        let mut acc = DMatrix::<Complex<f64>>::zeros(d, d);
        let mut trace_total = 0.0;
        let mut trace_zero = 0.0;
        for j in 1..=t {
            let idx = j % t;
            let w = weights[j - 1];
            let mut trace = 0.0;
            for a in 0..d {
                for b in 0..d {
                    acc[(a, b)] += dx[a][idx] * dx[b][idx].conj() * w;
                }
                trace += dx[a][idx].norm_sqr() * w;
            }
            trace_total += trace;
            if j == t {
                trace_zero = trace;
            }
        }

        let max_mag = acc.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let max_im = acc.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let imag_residue_rel = if max_mag > 0.0 { max_im / max_mag } else { 0.0 };
        if imag_residue_rel >= IMAG_RESIDUE_TOL {
            return Err(Error::ImaginaryResidue {
                residue: imag_residue_rel,
                tol: IMAG_RESIDUE_TOL,
            });
        }
        let bread_real = DMatrix::from_fn(d, d, |a, b| 0.5 * (acc[(a, b)].re + acc[(b, a)].re));
        let bread = Cholesky::new(bread_real).ok_or(Error::SingularSystem {
            context: "factoring the weighted periodogram sum",
        })?;

        Ok(Self {
            t,
            d,
            fft,
            weights,
            dx,
            bread,
            imag_residue_rel,
            zero_frequency_share: if trace_total > 0.0 {
                trace_zero / trace_total
            } else {
                0.0
            },
        })
    }

    pub fn fit_beta(&self, y: &DVector<f64>) -> Result<(DVector<f64>, FitAux)> {
        if y.len() != self.t {
            return Err(Error::DimensionMismatch {
                expected: self.t,
                actual: y.len(),
            });
        }
        let dy = vector_transform(y, &self.fft);
        let mut rhs = DVector::<Complex<f64>>::zeros(self.d);
        for j in 1..=self.t {
            let idx = j % self.t;
            let w = self.weights[j - 1];
            let yconj = dy[idx].conj() * w;
            for a in 0..self.d {
                rhs[a] += self.dx[a][idx] * yconj;
            }
        }
        let max_mag = rhs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let max_im = rhs.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let rhs_residue = if max_mag > 0.0 { max_im / max_mag } else { 0.0 };
        if rhs_residue >= IMAG_RESIDUE_TOL {
            return Err(Error::ImaginaryResidue {
                residue: rhs_residue,
                tol: IMAG_RESIDUE_TOL,
            });
        }
        let beta = self.bread.solve(&rhs.map(|z| z.re));
        let aux = FitAux {
            imag_residue_rel: Some(self.imag_residue_rel.max(rhs_residue)),
            zero_frequency_share: Some(self.zero_frequency_share),
            ..FitAux::default()
        };
        Ok((beta, aux))
    }
}

/// β̄(f_v) = [Σ_t f_v⁻¹(2πt/T) J_xx]⁻¹ Σ_t f_v⁻¹(2πt/T) J_xY over the T
/// Fourier frequencies.
pub fn gls_frequency(sample: &RegressionSample, f_v: &SpectralDensity) -> Result<FitResult> {
    let solver = GlsFrequencySolver::new(&sample.design, f_v)?;
    let (beta, aux) = solver.fit_beta(&sample.y)?;
    FitResult::new(MethodTag::GlsFrequency, beta, aux)
}

/// How the AR coefficients of the residual model are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArFitMethod {
    /// Solve the sample Yule-Walker equations; always yields a stationary fit.
    YuleWalker,
    /// Regress û_t on its lags; can produce a non-stationary fit, which is
    /// rejected.
    OlsResidualRegression,
}

impl ArFitMethod {
    fn name(&self) -> &'static str {
        match self {
            ArFitMethod::YuleWalker => "yule_walker",
            ArFitMethod::OlsResidualRegression => "ols_residual_regression",
        }
    }
}

/// Biased sample autocovariances of a series out to `max_lag`.
pub fn sample_acvf(u: &[f64], max_lag: usize) -> Vec<f64> {
    let t = u.len();
    (0..=max_lag)
        .map(|k| u.iter().zip(&u[k..]).map(|(a, b)| a * b).sum::<f64>() / t as f64)
        .collect()
}

fn fit_ar_yule_walker(u: &[f64], order: usize) -> Result<(Vec<f64>, f64)> {
    let eta = sample_acvf(u, order);
    let acvf = AcvfSeq::new(eta, 0.0)?;
    let fact = levinson(&acvf, order + 1)?;
    let kappa: Vec<f64> = (1..=order).map(|i| -fact.coefficient(i, order)).collect();
    Ok((kappa, fact.variances()[order]))
}

fn fit_ar_ols(u: &[f64], order: usize) -> Result<(Vec<f64>, f64)> {
    let t = u.len();
    let rows = t - order;
    let x = DMatrix::from_fn(rows, order, |r, c| u[order + r - 1 - c]);
    let y = DVector::from_fn(rows, |r, _| u[order + r]);
    let kappa = qr_least_squares(&x, &y)?;
    let resid = &y - &x * &kappa;
    let sigma2 = resid.norm_squared() / rows as f64;
    Ok((kappa.iter().copied().collect(), sigma2))
}

/// Feasible GLS: OLS residuals → AR(N) coefficient estimate → hypothesized
/// autocovariance → time-domain GLS. The fitted coefficients and innovation
/// variance are recorded in `aux`.
pub fn fgls_ar(
    sample: &RegressionSample,
    order: usize,
    fit: ArFitMethod,
) -> Result<FitResult> {
    fgls_ar_parts(&sample.design, &sample.y, order, fit)
}

pub(crate) fn fgls_ar_parts(
    design: &Design,
    y: &DVector<f64>,
    order: usize,
    fit: ArFitMethod,
) -> Result<FitResult> {
    let t = design.t();
    if order == 0 {
        return Err(Error::InvalidParameter("AR order must be ≥ 1".into()));
    }
    if t <= 10 * order {
        return Err(Error::InvalidParameter(format!(
            "need T > 10·N for feasible GLS, got T = {t}, N = {order}"
        )));
    }

    let first = OlsSolver::new(design)?.fit_beta(y)?;
    let residuals = y - design.x() * &first;
    let y_scale = y.iter().map(|v| v.abs()).fold(1.0, f64::max);
    if residuals.iter().map(|v| v.abs()).fold(0.0, f64::max) <= 1e-12 * y_scale {
        return Err(Error::DegenerateResiduals);
    }

    let u: Vec<f64> = residuals.iter().copied().collect();
    let (kappa, sigma2) = match fit {
        ArFitMethod::YuleWalker => fit_ar_yule_walker(&u, order)?,
        ArFitMethod::OlsResidualRegression => fit_ar_ols(&u, order)?,
    };
    let ar = ArModelSpec::new(kappa.clone(), sigma2).map_err(|e| match e {
        Error::NonStationaryAr { modulus } => Error::NonStationaryArFit { modulus },
        other => other,
    })?;
    let acvf = ar.acvf(t - 1)?;
    let solver = GlsTimeSolver::new(design, &acvf)?;
    let beta = solver.fit_beta(y)?;
    FitResult::new(
        MethodTag::FglsAr,
        beta,
        FitAux {
            kappa_hat: Some(kappa),
            sigma2_hat: Some(sigma2),
            fit_method: Some(fit.name().into()),
            ..FitAux::default()
        },
    )
}
