//! Fixed regressor designs, column scaling, sample correlation limits, and
//! the spectral measures attached to the built-in design library.

use std::f64::consts::PI;
use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Fixed T×d regressor matrix with column labels and, for built-in designs,
/// the analytic spectral measure of the scaled columns.
#[derive(Debug, Clone)]
pub struct Design {
    x: DMatrix<f64>,
    labels: Vec<String>,
    measure: Option<SpectralMeasure>,
}

impl Design {
    /// A design needs d ≥ 1 finite columns, none identically zero, and T ≥ d.
    pub fn new(x: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        if x.ncols() == 0 || x.nrows() < x.ncols() {
            return Err(Error::InvalidParameter(format!(
                "design must have 1 ≤ d ≤ T, got T = {}, d = {}",
                x.nrows(),
                x.ncols()
            )));
        }
        if labels.len() != x.ncols() {
            return Err(Error::DimensionMismatch {
                expected: x.ncols(),
                actual: labels.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "design entries must be finite".into(),
            ));
        }
        for c in 0..x.ncols() {
            if x.column(c).iter().all(|v| *v == 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "design column {} ({}) is identically zero",
                    c, labels[c]
                )));
            }
        }
        Ok(Self {
            x,
            labels,
            measure: None,
        })
    }

    fn with_measure(mut self, measure: Option<SpectralMeasure>) -> Self {
        self.measure = measure;
        self
    }

    pub fn t(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn measure(&self) -> Option<&SpectralMeasure> {
        self.measure.as_ref()
    }

    /// Column scales s_i = √(Σ_t x_{it}²) and the unit-norm columns Z = X·S⁻¹.
    pub fn scaling(&self) -> ScalingInfo {
        let s2: Vec<f64> = (0..self.d())
            .map(|c| self.x.column(c).iter().map(|v| v * v).sum())
            .collect();
        let s: Vec<f64> = s2.iter().map(|v| v.sqrt()).collect();
        let mut z = self.x.clone();
        for c in 0..self.d() {
            let inv = 1.0 / s[c];
            z.column_mut(c).iter_mut().for_each(|v| *v *= inv);
        }
        ScalingInfo {
            s: DVector::from_vec(s),
            s_squared: s2,
            z,
        }
    }

    /// Scaled sample cross-correlations at lag k:
    /// entry (i, j) = (s_i s_j)⁻¹ Σ_{t=1}^{T−k} x_{it} x_{j,t+k}.
    ///
    /// The k = 0 diagonal is exactly 1 (numerator and normalizer are the
    /// same sum).
    pub fn sample_rho(&self, k: usize) -> Result<DMatrix<f64>> {
        let t = self.t();
        if k >= t {
            return Err(Error::InvalidParameter(format!(
                "lag k = {k} out of range for T = {t}"
            )));
        }
        let s2: Vec<f64> = (0..self.d())
            .map(|c| self.x.column(c).iter().map(|v| v * v).sum())
            .collect();
        let s: Vec<f64> = s2.iter().map(|v| v.sqrt()).collect();
        let d = self.d();
        let mut out = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let num: f64 = (0..t - k)
                    .map(|r| self.x[(r, i)] * self.x[(r + k, j)])
                    .sum();
            let denom = if i == j && k == 0 { s2[i] } else { s[i] * s[j] };
                out[(i, j)] = num / denom;
            }
        }
        Ok(out)
    }

    /// Explosive single-column design x_t = base^t. Useful as a diagnostic
    /// counterexample; carries no spectral measure.
    pub fn geometric(base: f64, t: usize) -> Result<Self> {
        if !(base.is_finite() && base > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "geometric base must exceed 1, got {base}"
            )));
        }
        if (t as f64) * base.ln() > 700.0 {
            return Err(Error::InvalidParameter(format!(
                "geometric design overflows f64 at T = {t}"
            )));
        }
        let x = DMatrix::from_fn(t, 1, |r, _| base.powi(r as i32 + 1));
        Design::new(x, vec![format!("geom({base})")])
    }

    /// Write as CSV: header row of labels, one row per t.
    pub fn to_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.labels.iter())
            .map_err(|e| Error::Parse(e.to_string()))?;
        for r in 0..self.t() {
            let row: Vec<String> = (0..self.d()).map(|c| format!("{}", self.x[(r, c)])).collect();
            w.write_record(&row).map_err(|e| Error::Parse(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }

    /// Read back a design written by [`Design::to_csv`].
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let labels: Vec<String> = r
            .headers()
            .map_err(|e| Error::Parse(e.to_string()))?
            .iter()
            .map(str::to_owned)
            .collect();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            let row: std::result::Result<Vec<f64>, _> =
                rec.iter().map(str::parse::<f64>).collect();
            rows.push(row.map_err(|e| Error::Parse(format!("bad number: {e}")))?);
        }
        let t = rows.len();
        let d = labels.len();
        if rows.iter().any(|row| row.len() != d) {
            return Err(Error::Parse("ragged CSV rows".into()));
        }
        let x = DMatrix::from_fn(t, d, |i, j| rows[i][j]);
        Design::new(x, labels)
    }
}

/// Column scales and the unit-norm scaled design.
#[derive(Debug, Clone)]
pub struct ScalingInfo {
    pub s: DVector<f64>,
    pub s_squared: Vec<f64>,
    pub z: DMatrix<f64>,
}

/// One design column family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DesignKind {
    Intercept,
    LinearTrend,
    /// cos(ω₀ t) with ω₀ strictly inside (0, π).
    Cosine { omega: f64 },
    /// Equal-mass pair of cosines at ω₁ ≠ ω₂ in (0, π]; a frequency at π is
    /// damped by 1/√2 so each of the four atoms ±ω₁, ±ω₂ carries mass ¼.
    CosinePair { omega1: f64, omega2: f64 },
    /// (−1)^t.
    Alternating,
}

impl DesignKind {
    fn validate(&self) -> Result<()> {
        match *self {
            DesignKind::Cosine { omega } => {
                if !(omega > 0.0 && omega < PI) {
                    return Err(Error::InvalidParameter(format!(
                        "cosine frequency must lie in (0, π), got {omega}"
                    )));
                }
            }
            DesignKind::CosinePair { omega1, omega2 } => {
                for w in [omega1, omega2] {
                    if !(w > 0.0 && w <= PI) {
                        return Err(Error::InvalidParameter(format!(
                            "cosine_pair frequencies must lie in (0, π], got {w}"
                        )));
                    }
                }
                if omega1 == omega2 {
                    return Err(Error::InvalidParameter(
                        "cosine_pair frequencies must be distinct".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn label(&self) -> String {
        match *self {
            DesignKind::Intercept => "intercept".into(),
            DesignKind::LinearTrend => "trend".into(),
            DesignKind::Cosine { omega } => format!("cos({omega:.4})"),
            DesignKind::CosinePair { omega1, omega2 } => {
                format!("pair({omega1:.4};{omega2:.4})")
            }
            DesignKind::Alternating => "alt".into(),
        }
    }

    fn value(&self, t: usize) -> f64 {
        let tf = t as f64;
        match *self {
            DesignKind::Intercept => 1.0,
            DesignKind::LinearTrend => tf,
            DesignKind::Cosine { omega } => (omega * tf).cos(),
            DesignKind::CosinePair { omega1, omega2 } => {
                boundary_weight(omega1) * (omega1 * tf).cos()
                    + boundary_weight(omega2) * (omega2 * tf).cos()
            }
            DesignKind::Alternating => {
                if t % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// Atom frequencies and masses of the scaled column's spectral measure.
    fn atoms(&self) -> Vec<(f64, f64)> {
        match *self {
            DesignKind::Intercept | DesignKind::LinearTrend => vec![(0.0, 1.0)],
            DesignKind::Cosine { omega } => vec![(omega, 0.5), (-omega, 0.5)],
            DesignKind::CosinePair { omega1, omega2 } => vec![
                (omega1, 0.25),
                (-omega1, 0.25),
                (omega2, 0.25),
                (-omega2, 0.25),
            ],
            DesignKind::Alternating => vec![(PI, 1.0)],
        }
    }
}

/// A cosine at the boundary frequency π concentrates twice the energy of an
/// interior one; damp it so the column's measure still has unit total mass.
fn boundary_weight(omega: f64) -> f64 {
    if omega == PI {
        0.5f64.sqrt()
    } else {
        1.0
    }
}

/// Build a design from one column per kind, plus the joint spectral measure
/// when the columns are asymptotically orthogonal (an intercept/trend pair,
/// which shares the zero-frequency atom with known cross mass √3/2, is also
/// supported). Overlapping frequencies otherwise leave the measure unset.
pub fn builtin_design(kinds: &[DesignKind], t: usize) -> Result<Design> {
    if kinds.is_empty() {
        return Err(Error::InvalidParameter("design needs ≥ 1 column".into()));
    }
    for k in kinds {
        k.validate()?;
    }
    if t < kinds.len() {
        return Err(Error::InvalidParameter(format!(
            "T = {t} too small for d = {}",
            kinds.len()
        )));
    }
    let d = kinds.len();
    let x = DMatrix::from_fn(t, d, |r, c| kinds[c].value(r + 1));
    let labels = kinds.iter().map(DesignKind::label).collect();
    let design = Design::new(x, labels)?;
    Ok(design.with_measure(composite_measure(kinds)))
}

fn composite_measure(kinds: &[DesignKind]) -> Option<SpectralMeasure> {
    let d = kinds.len();
    let per_col: Vec<Vec<(f64, f64)>> = kinds.iter().map(DesignKind::atoms).collect();

    // Cross masses are known only for disjoint frequency sets and for the
    // intercept/trend pair; anything else is left without a measure.
    let mut cross: Vec<(usize, usize, f64, f64)> = Vec::new(); // (i, j, ω, mass)
    for i in 0..d {
        for j in i + 1..d {
            let shared: Vec<f64> = per_col[i]
                .iter()
                .filter(|(w, _)| per_col[j].iter().any(|(v, _)| v == w))
                .map(|(w, _)| *w)
                .collect();
            if shared.is_empty() {
                continue;
            }
            let pair = (kinds[i], kinds[j]);
            let trend_pair = matches!(
                pair,
                (DesignKind::Intercept, DesignKind::LinearTrend)
                    | (DesignKind::LinearTrend, DesignKind::Intercept)
            );
            if trend_pair && shared == [0.0] {
                cross.push((i, j, 0.0, 3f64.sqrt() / 2.0));
            } else {
                return None;
            }
        }
    }

    let mut freqs: Vec<f64> = per_col
        .iter()
        .flatten()
        .map(|(w, _)| *w)
        .collect();
    freqs.sort_by(f64::total_cmp);
    freqs.dedup();

    let atoms = freqs
        .into_iter()
        .map(|w| {
            let mut mass = DMatrix::zeros(d, d);
            for (c, atoms) in per_col.iter().enumerate() {
                if let Some((_, m)) = atoms.iter().find(|(v, _)| *v == w) {
                    mass[(c, c)] = *m;
                }
            }
            for &(i, j, cw, cm) in &cross {
                if cw == w {
                    mass[(i, j)] = cm;
                    mass[(j, i)] = cm;
                }
            }
            (w, mass)
        })
        .collect();

    SpectralMeasure::new(atoms, None).ok()
}

/// Grid-tabulated matrix density over a uniform grid spanning [−π, π].
#[derive(Debug, Clone)]
pub struct TabulatedMatrixDensity {
    values: Vec<DMatrix<f64>>,
}

impl TabulatedMatrixDensity {
    pub fn new(values: Vec<DMatrix<f64>>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidParameter(
                "tabulated density needs at least two grid points".into(),
            ));
        }
        let d = values[0].nrows();
        if values.iter().any(|m| m.nrows() != d || m.ncols() != d) {
            return Err(Error::InvalidParameter(
                "tabulated density matrices must share one square shape".into(),
            ));
        }
        Ok(Self { values })
    }

    fn dim(&self) -> usize {
        self.values[0].nrows()
    }

    /// Trapezoid of g(ω)·density(ω) over the tabulation grid.
    fn integrate<F: Fn(f64) -> f64>(&self, g: &F) -> DMatrix<f64> {
        let n = self.values.len();
        let h = 2.0 * PI / (n - 1) as f64;
        let mut acc = DMatrix::zeros(self.dim(), self.dim());
        for (j, m) in self.values.iter().enumerate() {
            let omega = -PI + h * j as f64;
            let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            acc += m * (w * h * g(omega));
        }
        acc
    }

    fn check_even(&self) -> bool {
        let n = self.values.len();
        (0..n).all(|j| {
            let diff = (&self.values[j] - &self.values[n - 1 - j]).abs().max();
            diff <= 1e-10
        })
    }
}

/// Matrix spectral measure: symmetric PSD atom masses at ±ω plus an optional
/// tabulated density, with R(k) = ∫ e^{ικω} dH(ω).
#[derive(Debug, Clone)]
pub struct SpectralMeasure {
    atoms: Vec<(f64, DMatrix<f64>)>,
    density: Option<TabulatedMatrixDensity>,
}

impl SpectralMeasure {
    /// Validates frequency range, evenness, PSD increments, a unit diagonal
    /// of the total mass R(0), and nonsingularity of R(0).
    pub fn new(
        atoms: Vec<(f64, DMatrix<f64>)>,
        density: Option<TabulatedMatrixDensity>,
    ) -> Result<Self> {
        if atoms.is_empty() && density.is_none() {
            return Err(Error::InvalidParameter("empty spectral measure".into()));
        }
        let d = atoms
            .first()
            .map(|(_, m)| m.nrows())
            .or_else(|| density.as_ref().map(|t| t.dim()))
            .unwrap();

        for (w, m) in &atoms {
            if !(-PI..=PI).contains(w) {
                return Err(Error::InvalidParameter(format!(
                    "atom frequency {w} outside [−π, π]"
                )));
            }
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: m.nrows(),
                });
            }
            if (m - m.transpose()).abs().max() > 1e-12 {
                return Err(Error::InvalidParameter(
                    "atom masses must be symmetric".into(),
                ));
            }
            let min_eig = m
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            if min_eig < -1e-10 * (1.0 + m.abs().max()) {
                return Err(Error::InvalidParameter(format!(
                    "atom at ω = {w} is not positive semidefinite (eigenvalue {min_eig:.3e})"
                )));
            }
        }

        // evenness: every interior atom needs a mirror of equal mass
        for (w, m) in &atoms {
            if *w != 0.0 && w.abs() != PI {
                let mirror = atoms.iter().find(|(v, _)| *v == -*w);
                let ok = mirror
                    .map(|(_, mm)| (m - mm).abs().max() <= 1e-12)
                    .unwrap_or(false);
                if !ok {
                    return Err(Error::InvalidParameter(format!(
                        "measure is uneven: no matching atom at ω = {}",
                        -w
                    )));
                }
            }
        }
        if let Some(dens) = &density {
            if dens.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: dens.dim(),
                });
            }
            if !dens.check_even() {
                return Err(Error::InvalidParameter(
                    "tabulated density is uneven".into(),
                ));
            }
        }

        let measure = Self { atoms, density };
        let total = measure.integrate(|_| 1.0);
        for i in 0..d {
            if (total[(i, i)] - 1.0).abs() > 1e-8 {
                return Err(Error::InvalidParameter(format!(
                    "total measure diagonal entry {i} is {}, expected 1",
                    total[(i, i)]
                )));
            }
        }
        let svd = total.clone().svd(false, false);
        let smin = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        if smin <= 1e-12 * smax {
            return Err(Error::SingularSystem {
                context: "checking R(0) of the spectral measure",
            });
        }
        Ok(measure)
    }

    pub fn dim(&self) -> usize {
        self.atoms
            .first()
            .map(|(_, m)| m.nrows())
            .or_else(|| self.density.as_ref().map(|t| t.dim()))
            .unwrap()
    }

    pub fn atoms(&self) -> &[(f64, DMatrix<f64>)] {
        &self.atoms
    }

    /// ∫ g(ω) dH(ω): atoms summed exactly, density by trapezoid.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> DMatrix<f64> {
        let d = self.dim();
        let mut acc = DMatrix::zeros(d, d);
        for (w, m) in &self.atoms {
            acc += m * g(*w);
        }
        if let Some(dens) = &self.density {
            acc += dens.integrate(&g);
        }
        acc
    }

    /// R(k) = ∫ e^{ικω} dH(ω); real by evenness.
    pub fn r_of(&self, k: usize) -> DMatrix<f64> {
        self.integrate(|w| (k as f64 * w).cos())
    }
}

/// Thresholds for the regressor-condition verdicts. All four limits concern
/// extrapolations from finite grids, so they are explicit and overridable.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GrenanderThresholds {
    /// Minimum relative growth of s² over the last grid step (no-plateau).
    pub growth_min: f64,
    /// Maximum admissible final x_T²/s_T² ratio.
    pub last_ratio_max: f64,
    /// Cauchy tolerance for successive ρ̂ differences.
    pub cauchy_tol: f64,
    /// Maximum admissible condition number of R̂(0).
    pub cond_max: f64,
}

impl Default for GrenanderThresholds {
    fn default() -> Self {
        Self {
            growth_min: 1e-3,
            last_ratio_max: 1e-2,
            cauchy_tol: 1e-2,
            cond_max: 1e6,
        }
    }
}

/// Per-condition pass/fail verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrenanderVerdicts {
    pub gren1: bool,
    pub gren2: bool,
    pub gren3: bool,
    pub gren4: bool,
}

/// Numeric evidence for the four regressor conditions over a T-grid, plus
/// verdicts that are a pure function of the stored numbers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrenanderReport {
    pub t_grid: Vec<usize>,
    pub labels: Vec<String>,
    /// s_iT² per grid point per column.
    pub s_squared: Vec<Vec<f64>>,
    /// x_iT²/s_iT² per grid point per column.
    pub last_obs_ratio: Vec<Vec<f64>>,
    /// ρ̂_ij(k) per grid point, indexed \[grid\]\[k\]\[i\]\[j\].
    pub rho: Vec<Vec<Vec<Vec<f64>>>>,
    /// 1/T-extrapolated limits of ρ̂_ij(k), indexed \[k\]\[i\]\[j\].
    pub rho_limits: Vec<Vec<Vec<f64>>>,
    /// Condition number of R̂(0) at the largest grid point.
    pub cond_r0: f64,
    pub thresholds: GrenanderThresholds,
    pub verdicts: GrenanderVerdicts,
}

impl GrenanderReport {
    /// Recompute the verdicts from the stored fields alone.
    pub fn recompute_verdicts(&self) -> GrenanderVerdicts {
        let th = &self.thresholds;
        let g = self.t_grid.len();
        let d = self.labels.len();

        let gren1 = (0..d).all(|c| {
            let grows = (1..g).all(|m| self.s_squared[m][c] > self.s_squared[m - 1][c]);
            let last = self.s_squared[g - 1][c];
            let prev = self.s_squared[g - 2][c];
            grows && (last - prev) / last > th.growth_min
        });

        let gren2 = (0..d).all(|c| {
            let first = self.last_obs_ratio[0][c];
            let last = self.last_obs_ratio[g - 1][c];
            last <= first && last < th.last_ratio_max
        });

        let gren3 = (0..self.rho[0].len()).all(|k| {
            (0..d).all(|i| {
                (0..d).all(|j| {
                    (1..g).all(|m| {
                        (self.rho[m][k][i][j] - self.rho[m - 1][k][i][j]).abs() < th.cauchy_tol
                    })
                })
            })
        });

        let gren4 = self.cond_r0.is_finite() && self.cond_r0 < th.cond_max;

        GrenanderVerdicts {
            gren1,
            gren2,
            gren3,
            gren4,
        }
    }
}

/// Evaluate a design family over an increasing T-grid (≥ 3 points) and test
/// the four regressor conditions at the given thresholds.
pub fn grenander_diagnose<F>(
    family: F,
    t_grid: &[usize],
    k_max: usize,
    thresholds: GrenanderThresholds,
) -> Result<GrenanderReport>
where
    F: Fn(usize) -> Result<Design>,
{
    if t_grid.len() < 3 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "T grid must be increasing with at least 3 points".into(),
        ));
    }
    if k_max >= t_grid[0] {
        return Err(Error::InvalidParameter(format!(
            "k_max = {k_max} must be below the smallest grid point {}",
            t_grid[0]
        )));
    }

    let mut labels = Vec::new();
    let mut s_squared = Vec::new();
    let mut last_obs_ratio = Vec::new();
    let mut rho = Vec::new();

    for (gi, &t) in t_grid.iter().enumerate() {
        let design = family(t)?;
        if gi == 0 {
            labels = design.labels().to_vec();
        } else if design.labels() != labels.as_slice() {
            return Err(Error::InvalidParameter(
                "design family changed shape across the grid".into(),
            ));
        }
        let scal = design.scaling();
        s_squared.push(scal.s_squared.clone());
        last_obs_ratio.push(
            (0..design.d())
                .map(|c| {
                    let xt = design.x()[(t - 1, c)];
                    xt * xt / scal.s_squared[c]
                })
                .collect(),
        );
        let mut per_k = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            let m = design.sample_rho(k)?;
            per_k.push(matrix_rows(&m));
        }
        rho.push(per_k);
    }

    let g = t_grid.len();
    let d = labels.len();
    // two-point extrapolation in 1/T from the last two grid values
    let (ta, tb) = (t_grid[g - 2] as f64, t_grid[g - 1] as f64);
    let rho_limits: Vec<Vec<Vec<f64>>> = (0..=k_max)
        .map(|k| {
            (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| {
                            let a = rho[g - 2][k][i][j];
                            let b = rho[g - 1][k][i][j];
                            let c = (b - a) / (1.0 / ta - 1.0 / tb);
                            b + c / tb
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let r0 = &rho[g - 1][0];
    let r0m = DMatrix::from_fn(d, d, |i, j| 0.5 * (r0[i][j] + r0[j][i]));
    let eigs = r0m.symmetric_eigen().eigenvalues;
    let emax = eigs.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let emin = eigs.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let cond_r0 = if emin > 0.0 { emax / emin } else { f64::INFINITY };

    let mut report = GrenanderReport {
        t_grid: t_grid.to_vec(),
        labels,
        s_squared,
        last_obs_ratio,
        rho,
        rho_limits,
        cond_r0,
        thresholds,
        verdicts: GrenanderVerdicts {
            gren1: false,
            gren2: false,
            gren3: false,
            gren4: false,
        },
    };
    report.verdicts = report.recompute_verdicts();
    Ok(report)
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}
