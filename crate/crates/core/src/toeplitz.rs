//! Toeplitz autocovariance matrices and their triangular factorization.
//!
//! For a stationary autocovariance sequence η the T×T covariance has entries
//! η_{|i−j|}. The Levinson-Durbin recursion yields a unit lower-triangular L
//! and positive diagonal Δ with Λ⁻¹ = LᵀΔ⁻¹L: row k of L holds the
//! coefficients of the best linear predictor of order k, Δ the prediction
//! variances. Everything downstream applies Λ⁻¹ through this factorization;
//! the dense Cholesky route on the materialized matrix is retained as the
//! in-repo oracle for small T.

use nalgebra::DMatrix;

use crate::processes::AcvfSeq;
use crate::{Error, Result};

/// Dense materialization guard.
pub const MATERIALIZE_MAX: usize = 4096;
/// Dense-oracle guard.
pub const DENSE_ORACLE_MAX: usize = 512;
/// ς² below this multiple of η_0 counts as a breakdown rather than round-off.
const BREAKDOWN_REL: f64 = 1e-12;
/// Column-block width for blocked inverse application.
const BLOCK: usize = 64;

/// Toeplitz covariance Λ_T with entry (i, j) = η_{|i−j|}.
///
/// Lags beyond the stored sequence are treated as exactly zero (banded
/// Toeplitz); a warning is logged when the sequence's tail bound says that
/// truncation is not negligible.
#[derive(Debug, Clone)]
pub struct ToeplitzCov {
    acvf: AcvfSeq,
    dim: usize,
}

impl ToeplitzCov {
    pub fn new(acvf: AcvfSeq, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be ≥ 1".into()));
        }
        if acvf.tail_bound() > 1e-8 {
            log::warn!(
                "building a {dim}×{dim} Toeplitz covariance from an autocovariance with tail bound {:.3e}; lags beyond {} are truncated to zero",
                acvf.tail_bound(),
                acvf.max_lag()
            );
        }
        Ok(Self { acvf, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn acvf(&self) -> &AcvfSeq {
        &self.acvf
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.acvf.value(i.abs_diff(j) as i64)
    }

    /// Dense symmetric materialization, guarded at T ≤ 4096.
    pub fn materialize(&self) -> Result<DMatrix<f64>> {
        if self.dim > MATERIALIZE_MAX {
            return Err(Error::DimensionGuard {
                dim: self.dim,
                max: MATERIALIZE_MAX,
            });
        }
        Ok(DMatrix::from_fn(self.dim, self.dim, |i, j| self.entry(i, j)))
    }
}

/// Dense-Cholesky inverse of the materialized covariance; the slow truth the
/// factorized path is tested against. Guarded at T ≤ 512.
pub fn dense_inverse(cov: &ToeplitzCov) -> Result<DMatrix<f64>> {
    if cov.dim() > DENSE_ORACLE_MAX {
        return Err(Error::DimensionGuard {
            dim: cov.dim(),
            max: DENSE_ORACLE_MAX,
        });
    }
    cov.materialize()?
        .cholesky()
        .map(|c| c.inverse())
        .ok_or(Error::SingularSystem {
            context: "dense Cholesky of the Toeplitz covariance",
        })
}

/// Levinson-Durbin factorization Λ⁻¹ = LᵀΔ⁻¹L.
///
/// Stage k (k = 1..T−1) stores the coefficients a_{1k}..a_{kk} minimizing
/// E[(V_t + c₁V_{t−1} + … + c_kV_{t−k})²]; ς_k² is the attained minimum and
/// ς_0² = η_0. Row t of L is (a_{tt}, …, a_{1t}, 1, 0, …).
#[derive(Debug, Clone)]
pub struct LevinsonFactorization {
    dim: usize,
    /// Stage rows concatenated; stage t at offset t(t−1)/2, length t, stored
    /// as (a_{tt}, a_{t−1,t}, …, a_{1t}) so row t aligns with v[0..t].
    rows: Vec<f64>,
    variances: Vec<f64>,
    zero_extended: bool,
}

/// Run the Levinson-Durbin recursion on η out to dimension T.
///
/// Lags the sequence does not provide are taken as zero. A nonpositive
/// prediction variance (below 1e−12·η_0) aborts with the offending stage.
pub fn levinson(acvf: &AcvfSeq, dim: usize) -> Result<LevinsonFactorization> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be ≥ 1".into()));
    }
    let eta = |k: usize| acvf.value(k as i64);
    let eta0 = eta(0);
    let floor = BREAKDOWN_REL * eta0;

    let mut rows = vec![0.0; dim * (dim - 1) / 2];
    let mut variances = Vec::with_capacity(dim);
    variances.push(eta0);

    // a holds −φ in natural order: a[i−1] = a_{ik} for the current stage k.
    let mut a: Vec<f64> = Vec::with_capacity(dim);
    let mut scratch: Vec<f64> = Vec::with_capacity(dim);

    for k in 1..dim {
        let prev_var = variances[k - 1];
        let mut acc = eta(k);
        for i in 1..k {
            acc += a[i - 1] * eta(k - i);
        }
        let reflection = acc / prev_var;

        scratch.clear();
        scratch.extend((1..k).map(|i| a[i - 1] - reflection * a[k - i - 1]));
        scratch.push(-reflection);
        std::mem::swap(&mut a, &mut scratch);

        let var = prev_var * (1.0 - reflection * reflection);
        if !(var.is_finite() && var > floor) {
            return Err(Error::LevinsonBreakdown { stage: k, value: var });
        }
        variances.push(var);

        let off = k * (k - 1) / 2;
        for j in 0..k {
            rows[off + j] = a[k - 1 - j];
        }
    }

    Ok(LevinsonFactorization {
        dim,
        rows,
        variances,
        zero_extended: acvf.max_lag() + 1 < dim,
    })
}

impl LevinsonFactorization {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Prediction variances ς_0², …, ς_{T−1}².
    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// Whether lags beyond the supplied autocovariance were taken as zero.
    pub fn zero_extended(&self) -> bool {
        self.zero_extended
    }

    /// Stage-t row (a_{tt}, …, a_{1t}); empty for t = 0.
    pub fn row(&self, t: usize) -> &[f64] {
        let off = t * (t - 1) / 2;
        &self.rows[off..off + t]
    }

    /// Coefficient a_{ik} for 1 ≤ i ≤ k ≤ T−1.
    pub fn coefficient(&self, i: usize, k: usize) -> f64 {
        self.row(k)[k - i]
    }

    /// In-place e = L v over `lanes` interleaved columns (row-major T×lanes).
    fn apply_l_block(&self, w: &mut [f64], lanes: usize) {
        debug_assert_eq!(w.len(), self.dim * lanes);
        for t in (1..self.dim).rev() {
            let row = self.row(t);
            let (head, tail) = w.split_at_mut(t * lanes);
            let out = &mut tail[..lanes];
            for (j, &c) in row.iter().enumerate() {
                let src = &head[j * lanes..(j + 1) * lanes];
                for (o, s) in out.iter_mut().zip(src) {
                    *o += c * s;
                }
            }
        }
    }

    /// out = Lᵀ w over `lanes` interleaved columns.
    fn apply_lt_block(&self, w: &[f64], out: &mut [f64], lanes: usize) {
        debug_assert_eq!(w.len(), self.dim * lanes);
        out.copy_from_slice(w);
        for t in 1..self.dim {
            let row = self.row(t);
            let wt = &w[t * lanes..(t + 1) * lanes];
            for (j, &c) in row.iter().enumerate() {
                let dst = &mut out[j * lanes..(j + 1) * lanes];
                for (d, s) in dst.iter_mut().zip(wt) {
                    *d += c * s;
                }
            }
        }
    }

    fn scale_by_inverse_variances(&self, w: &mut [f64], lanes: usize) {
        for (t, &v) in self.variances.iter().enumerate() {
            for x in &mut w[t * lanes..(t + 1) * lanes] {
                *x /= v;
            }
        }
    }

    /// Λ⁻¹ v for a single column.
    pub fn apply_inverse_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: v.len(),
            });
        }
        let mut w = v.to_vec();
        self.apply_l_block(&mut w, 1);
        self.scale_by_inverse_variances(&mut w, 1);
        let mut out = vec![0.0; self.dim];
        self.apply_lt_block(&w, &mut out, 1);
        Ok(out)
    }

    /// Λ⁻¹ B computed as LᵀΔ⁻¹LB, column-blocked, never forming Λ⁻¹.
    /// Cost O(T²·m) for an T×m right-hand side.
    pub fn apply_inverse(&self, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if b.nrows() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: b.nrows(),
            });
        }
        let t = self.dim;
        let mut result = DMatrix::<f64>::zeros(t, b.ncols());
        let mut scratch = vec![0.0; t * BLOCK.min(b.ncols().max(1))];
        let mut out = scratch.clone();
        let mut col = 0;
        while col < b.ncols() {
            let m = BLOCK.min(b.ncols() - col);
            let w = &mut scratch[..t * m];
            for i in 0..t {
                for (l, slot) in w[i * m..(i + 1) * m].iter_mut().enumerate() {
                    *slot = b[(i, col + l)];
                }
            }
            self.apply_l_block(w, m);
            self.scale_by_inverse_variances(w, m);
            let o = &mut out[..t * m];
            self.apply_lt_block(w, o, m);
            for i in 0..t {
                for (l, &v) in o[i * m..(i + 1) * m].iter().enumerate() {
                    result[(i, col + l)] = v;
                }
            }
            col += m;
        }
        Ok(result)
    }

    /// Δ^{−1/2} L v — the whitening transform behind the GLS normal equations.
    pub fn whiten_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: v.len(),
            });
        }
        let mut w = v.to_vec();
        self.apply_l_block(&mut w, 1);
        for (t, x) in w.iter_mut().enumerate() {
            *x /= self.variances[t].sqrt();
        }
        Ok(w)
    }

    /// Δ^{−1/2} L B, column by column.
    pub fn whiten(&self, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if b.nrows() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: b.nrows(),
            });
        }
        let mut out = DMatrix::<f64>::zeros(self.dim, b.ncols());
        for c in 0..b.ncols() {
            let col = self.whiten_vec(b.column(c).as_slice())?;
            out.set_column(c, &nalgebra::DVector::from_vec(col));
        }
        Ok(out)
    }

    /// Exact induced norms (‖Λ⁻¹‖₁, ‖Λ⁻¹‖_∞), accumulated from column
    /// blocks of Λ⁻¹·I without ever storing the full inverse.
    ///
    /// The reconstruction is symmetric and centro-symmetric, so only the
    /// first ⌈T/2⌉ columns are applied; the mirrored half contributes its
    /// absolute sums by reversal.
    pub fn inverse_norms(&self) -> (f64, f64) {
        let t = self.dim;
        let mut col_sums = vec![0.0; t];
        let mut row_sums = vec![0.0; t];
        let half = t.div_ceil(2);

        let mut scratch = vec![0.0; t * BLOCK.min(half)];
        let mut out = scratch.clone();
        let mut col = 0;
        while col < half {
            let m = BLOCK.min(half - col);
            let w = &mut scratch[..t * m];
            w.fill(0.0);
            for l in 0..m {
                w[(col + l) * m + l] = 1.0;
            }
            self.apply_l_block(w, m);
            self.scale_by_inverse_variances(w, m);
            let o = &mut out[..t * m];
            self.apply_lt_block(w, o, m);

            for l in 0..m {
                let j = col + l;
                let mirror = t - 1 - j;
                let mut sum = 0.0;
                for i in 0..t {
                    let v = o[i * m + l].abs();
                    sum += v;
                    row_sums[i] += v;
                    if mirror != j {
                        row_sums[t - 1 - i] += v;
                    }
                }
                col_sums[j] = sum;
                if mirror != j {
                    col_sums[mirror] = sum;
                }
            }
            col += m;
        }

        let l1 = col_sums.iter().copied().fold(0.0, f64::max);
        let linf = row_sums.iter().copied().fold(0.0, f64::max);
        (l1, linf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::{ArModelSpec, LinearFilterSpec};
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    fn ar1_acvf(max_lag: usize) -> AcvfSeq {
        ArModelSpec::new(vec![0.5], 1.0).unwrap().acvf(max_lag).unwrap()
    }

    fn ma1_acvf() -> AcvfSeq {
        AcvfSeq::new(vec![1.25, 0.5], 0.0).unwrap()
    }

    #[test]
    fn materialize_small_cases() {
        let white = ToeplitzCov::new(AcvfSeq::new(vec![1.0, 0.0], 0.0).unwrap(), 2).unwrap();
        assert_eq!(white.materialize().unwrap(), DMatrix::identity(2, 2));

        let ma1 = ToeplitzCov::new(ma1_acvf(), 3).unwrap();
        let m = ma1.materialize().unwrap();
        let expect = DMatrix::from_row_slice(
            3,
            3,
            &[1.25, 0.5, 0.0, 0.5, 1.25, 0.5, 0.0, 0.5, 1.25],
        );
        assert_eq!(m, expect);

        let ar1 = ToeplitzCov::new(ar1_acvf(1), 2).unwrap();
        let eig = ar1.materialize().unwrap().symmetric_eigen().eigenvalues;
        let mut eig: Vec<f64> = eig.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(eig[0], 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn materialize_guard() {
        let cov = ToeplitzCov::new(AcvfSeq::white(1.0, 0).unwrap(), 5000).unwrap();
        assert!(matches!(
            cov.materialize(),
            Err(Error::DimensionGuard { .. })
        ));
    }

    #[test]
    fn levinson_white_noise_is_identity() {
        let fact = levinson(&AcvfSeq::white(1.0, 3).unwrap(), 4).unwrap();
        for t in 1..4 {
            assert!(fact.row(t).iter().all(|&c| c == 0.0));
        }
        assert_eq!(fact.variances(), &[1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn levinson_ar1_example() {
        // η = (4/3, 2/3, 1/3): a_{11} = −0.5, ς_1² = 1; a_{12} = −0.5, a_{22} = 0, ς_2² = 1
        let fact = levinson(&ar1_acvf(2), 3).unwrap();
        assert_abs_diff_eq!(fact.variances()[0], 4.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fact.coefficient(1, 1), -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(fact.variances()[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fact.coefficient(1, 2), -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(fact.coefficient(2, 2), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fact.variances()[2], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn levinson_ma1_approaches_ar_expansion() {
        // Order-k predictors of an MA(1) approach its AR(∞) coefficients
        // a_i = (−0.5)^i; the dense oracle checks the reconstruction.
        let fact = levinson(&ma1_acvf(), 64).unwrap();
        assert_abs_diff_eq!(fact.coefficient(1, 63), -0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(fact.coefficient(2, 63), 0.25, epsilon = 1e-6);
        assert_abs_diff_eq!(fact.variances()[63], 1.0, epsilon = 1e-6);

        let cov = ToeplitzCov::new(ma1_acvf(), 64).unwrap();
        let dense = dense_inverse(&cov).unwrap();
        let reconstructed = fact
            .apply_inverse(&DMatrix::identity(64, 64))
            .unwrap();
        let gap = (&reconstructed - &dense).abs().max();
        assert!(gap < 1e-10, "max gap {gap}");
    }

    #[test]
    fn levinson_breakdown_reports_stage() {
        // η_1 = η_0 makes the order-1 prediction variance collapse.
        let acvf = AcvfSeq::new(vec![1.0, 1.0], 0.0).unwrap();
        match levinson(&acvf, 3) {
            Err(Error::LevinsonBreakdown { stage, .. }) => assert_eq!(stage, 1),
            other => panic!("expected breakdown, got {other:?}"),
        }
    }

    #[test]
    fn prediction_variances_nonincreasing() {
        for acvf in [ar1_acvf(63), ma1_acvf()] {
            let fact = levinson(&acvf, 64).unwrap();
            for w in fact.variances().windows(2) {
                assert!(w[1] <= w[0] + 1e-12);
            }
        }
    }

    #[test]
    fn apply_inverse_identity_acvf_is_identity() {
        let fact = levinson(&AcvfSeq::white(1.0, 0).unwrap(), 8).unwrap();
        let b = DMatrix::from_fn(8, 3, |i, j| (i * 3 + j) as f64);
        assert_eq!(fact.apply_inverse(&b).unwrap(), b);
    }

    #[test]
    fn apply_inverse_ar1_first_column() {
        // Tridiagonal inverse of the AR(1) covariance: Λ⁻¹ e₁ has entries
        // (1, −φ, 0, 0, 0) for unit innovation variance.
        let fact = levinson(&ar1_acvf(4), 5).unwrap();
        let mut e1 = vec![0.0; 5];
        e1[0] = 1.0;
        let col = fact.apply_inverse_vec(&e1).unwrap();
        let expect = [1.0, -0.5, 0.0, 0.0, 0.0];
        for (got, want) in col.iter().zip(expect) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn apply_inverse_matches_dense_solve() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let t = 128;
        // SPD-consistent autocovariance from a random two-sided filter
        let coeffs: std::collections::BTreeMap<i64, f64> = (-3..=3)
            .map(|l| (l, if l == 0 { 1.0 } else { rng.random::<f64>() * 0.2 }))
            .collect();
        let spec =
            LinearFilterSpec::new(coeffs, 1.0, crate::processes::InnovationLaw::Gaussian)
                .unwrap();
        let acvf = spec.acvf(t - 1).unwrap();

        let fact = levinson(&acvf, t).unwrap();
        let b = DMatrix::from_fn(t, 4, |_, _| rng.random::<f64>() - 0.5);
        let fast = fact.apply_inverse(&b).unwrap();

        let dense = dense_inverse(&ToeplitzCov::new(acvf, t).unwrap()).unwrap();
        let slow = &dense * &b;
        let rel = (&fast - &slow).abs().max() / slow.abs().max();
        assert!(rel < 1e-10, "relative gap {rel}");
    }

    #[test]
    fn apply_inverse_rejects_dimension_mismatch() {
        let fact = levinson(&AcvfSeq::white(1.0, 0).unwrap(), 4).unwrap();
        let b = DMatrix::zeros(5, 1);
        assert!(matches!(
            fact.apply_inverse(&b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn inverse_norms_identity_and_ar1() {
        let fact = levinson(&AcvfSeq::white(1.0, 0).unwrap(), 16).unwrap();
        let (l1, linf) = fact.inverse_norms();
        assert_eq!((l1, linf), (1.0, 1.0));

        // rows (−φ, 1+φ², −φ): both induced norms equal (1+φ)²
        let fact = levinson(&ar1_acvf(15), 16).unwrap();
        let (l1, linf) = fact.inverse_norms();
        assert_abs_diff_eq!(l1, 2.25, epsilon = 1e-10);
        assert_abs_diff_eq!(linf, 2.25, epsilon = 1e-10);
    }

    #[test]
    fn inverse_norms_match_bruteforce() {
        let acvf = ArModelSpec::new(vec![0.5, -0.25], 1.0)
            .unwrap()
            .acvf(40)
            .unwrap();
        let fact = levinson(&acvf, 41).unwrap();
        let (l1, linf) = fact.inverse_norms();

        let dense = fact.apply_inverse(&DMatrix::identity(41, 41)).unwrap();
        let mut bf_l1 = 0.0f64;
        let mut bf_linf = 0.0f64;
        for j in 0..41 {
            bf_l1 = bf_l1.max(dense.column(j).iter().map(|v| v.abs()).sum());
            bf_linf = bf_linf.max(dense.row(j).iter().map(|v| v.abs()).sum());
        }
        assert_abs_diff_eq!(l1, bf_l1, epsilon = 1e-12);
        assert_abs_diff_eq!(linf, bf_linf, epsilon = 1e-12);
    }

    #[test]
    fn whitening_matches_normal_equations() {
        let acvf = ar1_acvf(31);
        let fact = levinson(&acvf, 32).unwrap();
        let x = DMatrix::from_fn(32, 2, |i, j| ((i + 1) * (j + 2)) as f64 / 10.0);
        let y = DVector::from_fn(32, |i, _| (i as f64 * 0.37).sin());

        let xw = fact.whiten(&x).unwrap();
        let yw = DVector::from_vec(fact.whiten_vec(y.as_slice()).unwrap());

        let lhs = xw.transpose() * &xw;
        let rhs_dense =
            x.transpose() * fact.apply_inverse(&DMatrix::from_column_slice(32, 1, y.as_slice())).unwrap();
        let lhs2 = x.transpose() * fact.apply_inverse(&x).unwrap();
        assert_abs_diff_eq!((lhs.clone() - lhs2).abs().max(), 0.0, epsilon = 1e-10);
        let rhs = xw.transpose() * &yw;
        assert_abs_diff_eq!((rhs - rhs_dense).abs().max(), 0.0, epsilon = 1e-10);
    }
}
