//! Finite-difference models of `±sgn(x) d²/dx²` and random C-symmetric
//! instances.
//!
//! The grid is staggered, `x_j = (j − N/2 − 1/2) h` with `h = 2L/N`, so no
//! node sits on the sign jump. `D₂` is the Dirichlet second difference on
//! `[−L, L]` and `J = diag(sgn x_j)`; `JH = ±D₂` is real symmetric, so `H`
//! is exactly J-self-adjoint in both orientations.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angles;
use crate::c_operator::COperator;
use crate::csymmetry::{spectral_c_for_j_nonnegative, CsymmetryReport};
use crate::error::{KreinError, Result};
use crate::linalg::{self, CMat};
use crate::space::KreinSpace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    half_length: f64,
}

impl GridSpec {
    /// `n` grid points on `[−half_length, half_length]`; `n` must be even
    /// and positive.
    pub fn new(n: usize, half_length: f64) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return Err(KreinError::InvalidGrid(format!(
                "point count must be even and positive, got {n}"
            )));
        }
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(KreinError::InvalidGrid(format!(
                "half-length must be positive, got {half_length}"
            )));
        }
        Ok(Self { n, half_length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        let half = (self.n / 2) as f64;
        (1..=self.n).map(|j| (j as f64 - half - 0.5) * h).collect()
    }

    /// Dirichlet second difference `h^-2 tridiag(1, −2, 1)`.
    pub fn second_difference(&self) -> CMat {
        let inv_h2 = self.spacing().powi(-2);
        CMat::from_fn(self.n, self.n, |i, k| {
            let v = match i.abs_diff(k) {
                0 => -2.0,
                1 => 1.0,
                _ => 0.0,
            };
            Complex64::new(v * inv_h2, 0.0)
        })
    }

    pub fn fundamental_symmetry(&self) -> Result<KreinSpace> {
        let signs: Vec<i32> = self.nodes().iter().map(|&x| if x > 0.0 { 1 } else { -1 }).collect();
        KreinSpace::from_signature(&signs)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `H = J D₂`, which is J-nonpositive.
    #[serde(alias = "j-nonpositive")]
    JNonpositive,
    /// `H = −J D₂`, so that `JH = −D₂ ⪰ 0`.
    #[default]
    #[serde(alias = "j-nonnegative")]
    JNonnegative,
}

impl FromStr for Orientation {
    type Err = KreinError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "j-nonpositive" | "j_nonpositive" => Ok(Self::JNonpositive),
            "j-nonnegative" | "j_nonnegative" => Ok(Self::JNonnegative),
            other => Err(KreinError::InvalidInput(format!(
                "unknown orientation {other:?} (expected j-nonpositive or j-nonnegative)"
            ))),
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::JNonpositive => "j-nonpositive",
            Self::JNonnegative => "j-nonnegative",
        })
    }
}

/// The model matrix and its Krein space.
pub fn sgn_laplacian(spec: &GridSpec, orientation: Orientation) -> Result<(CMat, KreinSpace)> {
    let space = spec.fundamental_symmetry()?;
    let jd = space.j() * spec.second_difference();
    let h = match orientation {
        Orientation::JNonpositive => jd,
        Orientation::JNonnegative => -jd,
    };
    Ok((h, space))
}

/// A C-symmetry of the model. In the J-nonpositive orientation
/// its C is taken from `−H`, which has the same commutant.
pub fn model_c(spec: &GridSpec, orientation: Orientation) -> Result<(CMat, CsymmetryReport)> {
    let (h, space) = sgn_laplacian(spec, orientation)?;
    let report = match orientation {
        Orientation::JNonnegative => spectral_c_for_j_nonnegative(&space, &h)?,
        Orientation::JNonpositive => spectral_c_for_j_nonnegative(&space, &(-&h))?,
    };
    Ok((h, report))
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub half_length: f64,
    pub c_norm: f64,
    /// Condition number of `JC`.
    pub metric_condition: f64,
    pub boundedness_margin: f64,
}

fn sweep_row(spec: &GridSpec, c: &COperator) -> SweepRow {
    SweepRow {
        n: spec.n(),
        half_length: spec.half_length(),
        c_norm: c.norm(),
        metric_condition: c.metric_condition(),
        boundedness_margin: angles::boundedness_margin(c.transition()),
    }
}

/// `‖C_N‖`, `cond(JC_N)` and the angle margin per grid. Rows follow the
/// order of `specs`.
pub fn conditioning_sweep(specs: &[GridSpec], orientation: Orientation) -> Result<Vec<SweepRow>> {
    specs
        .par_iter()
        .map(|spec| {
            let (_, report) = model_c(spec, orientation)?;
            let c = report.c.as_ref().expect("positive report carries C");
            Ok(sweep_row(spec, c))
        })
        .collect()
}

/// Control model `H = diag(−D₂, −1)` with `J = diag(I, −1)`. It commutes
/// with `J`, so its C is `J` and `‖C‖ = 1` for every grid.
pub fn control_laplacian(spec: &GridSpec) -> Result<(CMat, KreinSpace)> {
    let n = spec.n();
    let mut h = CMat::zeros(n + 1, n + 1);
    h.view_mut((0, 0), (n, n)).copy_from(&(-spec.second_difference()));
    h[(n, n)] = Complex64::new(-1.0, 0.0);
    let mut signs = vec![1; n];
    signs.push(-1);
    Ok((h, KreinSpace::from_signature(&signs)?))
}

pub fn control_sweep(specs: &[GridSpec]) -> Result<Vec<SweepRow>> {
    specs
        .par_iter()
        .map(|spec| {
            let (h, space) = control_laplacian(spec)?;
            let report = spectral_c_for_j_nonnegative(&space, &h)?;
            let c = report.c.as_ref().expect("positive report carries C");
            Ok(sweep_row(spec, c))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct TransitionRow {
    pub k: u32,
    pub t_norm: f64,
    pub c_norm: f64,
    /// `(1 + ‖T‖) / (1 − ‖T‖)`.
    pub predicted: f64,
    pub boundedness_margin: f64,
}

/// 2×2 transition operators with `‖T‖ = 1 − 10^-k`.
pub fn transition_sweep(exponents: &[u32]) -> Result<Vec<TransitionRow>> {
    let space = KreinSpace::from_signature(&[1, -1])?;
    exponents
        .iter()
        .map(|&k| {
            let t = 1.0 - 10f64.powi(-(k as i32));
            let block = CMat::from_element(1, 1, Complex64::new(t, 0.0));
            let op = crate::transition::TransitionOperator::from_block(space.clone(), block)?;
            let c = COperator::from_transition(&op)?;
            Ok(TransitionRow {
                k,
                t_norm: op.norm(),
                c_norm: c.norm(),
                predicted: (1.0 + t) / (1.0 - t),
                boundedness_margin: angles::boundedness_margin(&op),
            })
        })
        .collect()
}

/// The `count` smallest `|λ|`, ascending.
pub fn smallest_magnitudes(h: &CMat, count: usize) -> Result<Vec<f64>> {
    let mut mags: Vec<f64> = linalg::general_eigenvalues(h)?
        .iter()
        .map(|v| v.norm())
        .collect();
    mags.sort_by(f64::total_cmp);
    mags.truncate(count);
    Ok(mags)
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementRow {
    pub n: usize,
    pub smallest: Vec<f64>,
    /// Largest relative change against the previous grid.
    pub relative_change: Option<f64>,
}

/// Smallest eigenvalue magnitudes as the grid is refined.
pub fn refinement_study(
    ns: &[usize],
    half_length: f64,
    orientation: Orientation,
    count: usize,
) -> Result<Vec<RefinementRow>> {
    let smallest: Vec<(usize, Vec<f64>)> = ns
        .par_iter()
        .map(|&n| {
            let (h, _) = sgn_laplacian(&GridSpec::new(n, half_length)?, orientation)?;
            Ok((n, smallest_magnitudes(&h, count)?))
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<RefinementRow> = Vec::with_capacity(smallest.len());
    for (n, values) in smallest {
        let relative_change = rows.last().map(|prev| {
            prev.smallest
                .iter()
                .zip(&values)
                .map(|(a, b)| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max)
        });
        rows.push(RefinementRow {
            n,
            smallest: values,
            relative_change,
        });
    }
    Ok(rows)
}

/// `H = ρ^-1 D ρ` and `C = J ρ²` for `ρ = e^{Q/2}`, where `D` is Hermitian
/// and commutes with `J`. Then `JH` is Hermitian and `HC = CH`.
fn conjugated_instance(space: &KreinSpace, d: &CMat, q: &CMat) -> Result<(CMat, CMat)> {
    let c = COperator::from_generator(space, q)?;
    let rho = linalg::hermitian_function(q, |x| (0.5 * x).exp());
    let rho_inv = linalg::hermitian_function(q, |x| (-0.5 * x).exp());
    Ok((rho_inv * d * rho, c.matrix().clone()))
}

fn check_spectrum(space: &KreinSpace, spectrum: &[f64]) -> Result<()> {
    if spectrum.len() != space.dim() {
        return Err(KreinError::DimensionMismatch {
            expected: space.dim(),
            found: spectrum.len(),
        });
    }
    Ok(())
}

/// Deterministic instance: `D` carries the first `n+` entries of
/// `spectrum` on the positive basis of `J` and the rest on the negative
/// basis. With `J = diag(1, −1)`, `Q = ln 2 σ_x` and spectrum `(0.8, −0.8)`
/// this gives `H = [[1, 0.6], [−0.6, −1]]`.
pub fn csymmetric_from_generator(
    space: &KreinSpace,
    spectrum: &[f64],
    q: &CMat,
) -> Result<(CMat, CMat)> {
    check_spectrum(space, spectrum)?;
    let basis = adapted_basis(space, None);
    let d = linalg::from_eigen(spectrum, &basis);
    conjugated_instance(space, &d, q)
}

fn adapted_basis(space: &KreinSpace, rotations: Option<(CMat, CMat)>) -> CMat {
    let (plus, minus) = match rotations {
        Some((a, b)) => (space.basis_plus() * a, space.basis_minus() * b),
        None => (space.basis_plus().clone(), space.basis_minus().clone()),
    };
    let mut out = CMat::zeros(space.dim(), space.dim());
    out.columns_mut(0, plus.ncols()).copy_from(&plus);
    out.columns_mut(plus.ncols(), minus.ncols()).copy_from(&minus);
    out
}

/// Random J-self-adjoint `H` with prescribed real spectrum and a known
/// C-symmetry `C_true = J e^Q` with `‖Q‖ = ln(conditioning)`, so that
/// `‖C_true‖ = conditioning`.
pub fn random_csymmetric<R: Rng + ?Sized>(
    space: &KreinSpace,
    spectrum: &[f64],
    conditioning: f64,
    rng: &mut R,
) -> Result<(CMat, CMat)> {
    check_spectrum(space, spectrum)?;
    if !(conditioning >= 1.0 && conditioning.is_finite()) {
        return Err(KreinError::InvalidInput(format!(
            "conditioning must be at least 1, got {conditioning}"
        )));
    }
    let (np, nm) = (space.n_plus(), space.n_minus());
    let rotations = (
        linalg::random_unitary(rng, np),
        linalg::random_unitary(rng, nm),
    );
    let d = linalg::from_eigen(spectrum, &adapted_basis(space, Some(rotations)));

    let k = linalg::random_gaussian(rng, nm, np);
    let q_raw = space.basis_minus() * &k * space.basis_plus().adjoint();
    let q_raw = &q_raw + q_raw.adjoint();
    let norm = linalg::op_norm(&q_raw);
    let q = if norm > 0.0 {
        q_raw.scale(conditioning.ln() / norm)
    } else {
        q_raw
    };
    conjugated_instance(space, &d, &q)
}
