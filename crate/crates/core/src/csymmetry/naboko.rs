//! The resolvent integral `ε ∫ ‖(H − ξ − iε)^-1 f‖² dξ / ‖f‖²` along
//! horizontal lines above the real axis.
//!
//! For Hermitian `H` the integral equals `π` for every `ε`. It stays bounded
//! in `ε` exactly when `H` is similar to a Hermitian matrix, and grows like
//! `ε^{-2(m-1)}` near a Jordan block of size `m`.
//!
//! The whole real line is integrated: the window `[−X, X]` directly, the two
//! tails through `ξ = ±X/u` with `u ∈ (0, 1]`, where the integrand tends to
//! the finite limit `ε/X` as `u → 0`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::csymmetry::eigensystem::COMPLEX_TOL;
use crate::error::{KreinError, Result};
use crate::linalg::{self, CMat, CVec};

pub const DEFAULT_EPSILONS: [f64; 4] = [1e-3, 1e-2, 1e-1, 1.0];
pub const DEFAULT_QUAD_POINTS: usize = 8;
pub const DEFAULT_REL_TOL: f64 = 1e-6;
const MAX_PANELS: usize = 4000;

#[derive(Debug, Clone, Serialize)]
pub struct NabokoPoint {
    pub epsilon: f64,
    pub value: f64,
    /// Quadrature error estimate for `value`.
    pub error: f64,
    /// Part of `value` contributed by `|ξ| > X`.
    pub tail: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NabokoEstimate {
    pub points: Vec<NabokoPoint>,
    /// Largest value over the grid; infinite for non-real spectrum.
    pub sup: f64,
    pub divergent: bool,
    pub complex_spectrum: bool,
    pub xi_window: f64,
}

/// Settings for [`naboko_estimate`].
#[derive(Debug, Clone)]
pub struct NabokoOptions {
    pub epsilons: Vec<f64>,
    /// Half-width `X` of the directly integrated window; defaults to
    /// `4 (spectral radius + 1)`.
    pub xi_window: Option<f64>,
    /// Initial panels per window segment.
    pub quad_points: usize,
    pub rel_tol: f64,
}

impl Default for NabokoOptions {
    fn default() -> Self {
        Self {
            epsilons: DEFAULT_EPSILONS.to_vec(),
            xi_window: None,
            quad_points: DEFAULT_QUAD_POINTS,
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

pub fn naboko_estimate(h: &CMat, f: &CVec, options: &NabokoOptions) -> Result<NabokoEstimate> {
    let n = linalg::ensure_square(h)?;
    if f.len() != n {
        return Err(KreinError::DimensionMismatch {
            expected: n,
            found: f.len(),
        });
    }
    let f_norm2 = f.norm_squared();
    if f_norm2 == 0.0 {
        return Err(KreinError::InvalidInput("f must be nonzero".into()));
    }
    if options.epsilons.is_empty() || options.epsilons.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(KreinError::InvalidInput(
            "epsilons must be a nonempty list of positive numbers".into(),
        ));
    }

    let eigenvalues = linalg::general_eigenvalues(h)?;
    let radius = eigenvalues.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let window = match options.xi_window {
        Some(w) if w < radius || w <= 0.0 => {
            return Err(KreinError::WindowTooSmall { window: w, radius })
        }
        Some(w) => w,
        None => 4.0 * (radius + 1.0),
    };
    let scale = radius.max(1.0);
    if eigenvalues.iter().any(|v| v.im.abs() > COMPLEX_TOL * scale) {
        return Ok(NabokoEstimate {
            points: Vec::new(),
            sup: f64::INFINITY,
            divergent: true,
            complex_spectrum: true,
            xi_window: window,
        });
    }
    let centers: Vec<f64> = eigenvalues.iter().map(|v| v.re).collect();

    let mut epsilons = options.epsilons.clone();
    epsilons.sort_by(f64::total_cmp);
    epsilons.dedup();

    let points: Vec<NabokoPoint> = epsilons
        .par_iter()
        .map(|&epsilon| {
            let problem = LineIntegral {
                h,
                f,
                f_norm2,
                epsilon,
                window,
            };
            problem.integrate(&centers, options.quad_points.max(1), options.rel_tol)
        })
        .collect();

    let sup = points.iter().map(|p| p.value).fold(0.0, f64::max);
    let divergent = match points.as_slice() {
        [first, second, ..] => {
            first.value / second.value >= (second.epsilon / first.epsilon).sqrt()
        }
        _ => false,
    };
    Ok(NabokoEstimate {
        points,
        sup,
        divergent,
        complex_spectrum: false,
        xi_window: window,
    })
}

#[derive(Clone, Copy, PartialEq)]
enum Map {
    Direct,
    RightTail,
    LeftTail,
}

struct LineIntegral<'a> {
    h: &'a CMat,
    f: &'a CVec,
    f_norm2: f64,
    epsilon: f64,
    window: f64,
}

impl LineIntegral<'_> {
    fn integrand(&self, xi: f64) -> f64 {
        let z = Complex64::new(xi, self.epsilon);
        let shifted = self.h - CMat::identity(self.h.nrows(), self.h.nrows()) * z;
        match shifted.lu().solve(self.f) {
            Some(x) => self.epsilon * x.norm_squared() / self.f_norm2,
            None => f64::INFINITY,
        }
    }

    fn mapped(&self, map: Map, s: f64) -> f64 {
        match map {
            Map::Direct => self.integrand(s),
            Map::RightTail => self.integrand(self.window / s) * self.window / (s * s),
            Map::LeftTail => self.integrand(-self.window / s) * self.window / (s * s),
        }
    }

    fn panel(&self, map: Map, lo: f64, hi: f64) -> Panel {
        let (value, error) = gauss_kronrod(|s| self.mapped(map, s), lo, hi);
        Panel {
            map,
            lo,
            hi,
            value,
            error,
        }
    }

    fn integrate(&self, centers: &[f64], initial: usize, rel_tol: f64) -> NabokoPoint {
        let mut breaks = vec![-self.window, self.window];
        for &c in centers {
            for offset in [0.0, -self.epsilon, self.epsilon, -10.0 * self.epsilon, 10.0 * self.epsilon] {
                let x = c + offset;
                if x > -self.window && x < self.window {
                    breaks.push(x);
                }
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * self.window);

        let mut heap = BinaryHeap::new();
        for pair in breaks.windows(2) {
            let width = (pair[1] - pair[0]) / initial as f64;
            for k in 0..initial {
                let lo = pair[0] + width * k as f64;
                let hi = if k + 1 == initial { pair[1] } else { lo + width };
                heap.push(self.panel(Map::Direct, lo, hi));
            }
        }
        heap.push(self.panel(Map::RightTail, 0.0, 1.0));
        heap.push(self.panel(Map::LeftTail, 0.0, 1.0));

        loop {
            let (value, error) = totals(&heap);
            if error <= rel_tol * value.abs() || heap.len() >= MAX_PANELS {
                break;
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.lo + worst.hi);
            if mid <= worst.lo || mid >= worst.hi {
                heap.push(worst);
                break;
            }
            heap.push(self.panel(worst.map, worst.lo, mid));
            heap.push(self.panel(worst.map, mid, worst.hi));
        }

        let mut panels = heap.into_vec();
        panels.sort_by(|a, b| (a.map as u8, a.lo).partial_cmp(&(b.map as u8, b.lo)).unwrap_or(Ordering::Equal));
        let value = compensated_sum(panels.iter().map(|p| p.value));
        let error = compensated_sum(panels.iter().map(|p| p.error));
        let tail = compensated_sum(panels.iter().filter(|p| p.map != Map::Direct).map(|p| p.value));
        NabokoPoint {
            epsilon: self.epsilon,
            value,
            error,
            tail,
        }
    }
}

struct Panel {
    map: Map,
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn totals(heap: &BinaryHeap<Panel>) -> (f64, f64) {
    heap.iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
}

fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Weights of the embedded 7-point Gauss rule at the odd Kronrod nodes.
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod estimate and its difference from the 7-point Gauss rule.
fn gauss_kronrod(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for (k, (&x, &w)) in KRONROD_NODES.iter().zip(&KRONROD_WEIGHTS).enumerate() {
        let pair = if x == 0.0 {
            f(center)
        } else {
            f(center - half * x) + f(center + half * x)
        };
        kronrod += w * pair;
        if k % 2 == 1 {
            gauss += GAUSS_WEIGHTS[k / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real_rows;
    use std::f64::consts::PI;

    fn e(n: usize, k: usize) -> CVec {
        let mut v = CVec::zeros(n);
        v[k] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn rule_is_exact_on_polynomials() {
        let (v, err) = gauss_kronrod(|x| x.powi(6) - 3.0 * x, -1.0, 2.0);
        assert!((v - (128.0 + 1.0) / 7.0 + 4.5).abs() < 1e-12);
        assert!(err < 1e-12);
    }

    #[test]
    fn hermitian_gives_pi() {
        let h = from_real_rows(&[&[1.0, 0.5], &[0.5, -2.0]]);
        let f = e(2, 0) + e(2, 1);
        let est = naboko_estimate(&h, &f, &NabokoOptions::default()).unwrap();
        for p in &est.points {
            assert!((p.value - PI).abs() < 1e-5, "{} at {}", p.value, p.epsilon);
        }
        assert!(!est.divergent);
    }

    #[test]
    fn jordan_block_closed_form() {
        // (H - z)^-1 e2 = (-1/z², -1/z): ε ∫ |z|^-4 + |z|^-2 dξ = π/(2ε²) + π
        let h = from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let est = naboko_estimate(&h, &e(2, 1), &NabokoOptions::default()).unwrap();
        for p in &est.points {
            let exact = PI / (2.0 * p.epsilon * p.epsilon) + PI;
            assert!((p.value - exact).abs() < 1e-5 * exact);
        }
        assert!(est.divergent);
    }

    #[test]
    fn complex_spectrum_flagged() {
        let h = from_real_rows(&[&[1.0, 2.0], &[-2.0, -1.0]]);
        let est = naboko_estimate(&h, &e(2, 0), &NabokoOptions::default()).unwrap();
        assert!(est.complex_spectrum && est.sup.is_infinite());
    }

    #[test]
    fn window_must_cover_spectrum() {
        let h = linalg::real_diag(&[3.0, -1.0]);
        let options = NabokoOptions {
            xi_window: Some(2.0),
            ..NabokoOptions::default()
        };
        assert!(matches!(
            naboko_estimate(&h, &e(2, 0), &options),
            Err(KreinError::WindowTooSmall { .. })
        ));
    }
}
