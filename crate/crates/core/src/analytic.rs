//! Closed forms for CHSH with rank-one measurements on the maximally
//! entangled qutrit pair.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::inequality::Party;
use crate::linalg::ComplexMatrix;
use crate::quantum::{Effect, MeasurementSet};

const NORM_TOL: f64 = 1e-12;

/// Alice's `x1, x2` and Bob's `y1, y2`, each of norm at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorPair4 {
    pub x1: Vec<Complex64>,
    pub x2: Vec<Complex64>,
    pub y1: Vec<Complex64>,
    pub y2: Vec<Complex64>,
}

impl VectorPair4 {
    pub fn new(x1: Vec<Complex64>, x2: Vec<Complex64>, y1: Vec<Complex64>, y2: Vec<Complex64>) -> Result<Self> {
        let v = Self { x1, x2, y1, y2 };
        v.validate()?;
        Ok(v)
    }

    fn all(&self) -> [&Vec<Complex64>; 4] {
        [&self.x1, &self.x2, &self.y1, &self.y2]
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.x1.len();
        if n == 0 || n > 3 || self.all().iter().any(|v| v.len() != n) {
            return Err(Error::Dimension("vectors must share a length between 1 and 3".into()));
        }
        for v in self.all() {
            let norm = norm(v);
            if norm > 1.0 + NORM_TOL {
                return Err(Error::InvalidArgument(format!("vector norm {norm} exceeds 1")));
            }
        }
        Ok(())
    }

    /// Real vectors at angles `π/4, 0` (Alice) and `π/8, 3π/8` (Bob) in the
    /// span of the first two basis vectors of `C^d`.
    pub fn optimal(d: usize) -> Result<Self> {
        if !(2..=3).contains(&d) {
            return Err(Error::InvalidArgument(format!("optimal vectors are defined for d = 2, 3, got {d}")));
        }
        let at = |t: f64| {
            let mut v = vec![Complex64::new(0.0, 0.0); d];
            v[0] = Complex64::new(t.cos(), 0.0);
            v[1] = Complex64::new(t.sin(), 0.0);
            v
        };
        Self::new(at(PI / 4.0), at(0.0), at(PI / 8.0), at(3.0 * PI / 8.0))
    }

    /// `U v` for all four vectors.
    pub fn rotated(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.dim() != self.x1.len() {
            return Err(Error::Dimension("unitary and vectors differ in dimension".into()));
        }
        Self::new(u.mul_vec(&self.x1), u.mul_vec(&self.x2), u.mul_vec(&self.y1), u.mul_vec(&self.y2))
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨x, y⟩`, conjugate-linear in `x`.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn overlaps(v: &VectorPair4) -> [f64; 4] {
    [
        inner(&v.x1, &v.y1).norm_sqr(),
        inner(&v.x1, &v.y2).norm_sqr(),
        inner(&v.x2, &v.y1).norm_sqr(),
        inner(&v.x2, &v.y2).norm_sqr(),
    ]
}

/// `|x1·y1|² + |x1·y2|² + |x2·y1|² − |x2·y2|²`.
pub fn chsh_overlap_sum(v: &VectorPair4) -> Result<f64> {
    v.validate()?;
    let [a, b, c, e] = overlaps(v);
    Ok(a + b + c - e)
}

/// CHSH violation on the maximally entangled qutrit pair with
/// `E_i = |x_i⟩⟨x_i|`, `F_j = |ȳ_j⟩⟨ȳ_j|`:
/// `−2/3 + (1/3)(|x1·y1|² + |x1·y2|² + |x2·y1|² − |x2·y2|²)`.
pub fn chsh_form_value(v: &VectorPair4) -> Result<f64> {
    Ok(-2.0 / 3.0 + chsh_overlap_sum(v)? / 3.0)
}

/// The switched variant: `−4/3 + (1/3)(|x1·y1|² − |x1·y2|² − |x2·y1|² − |x2·y2|²)`.
pub fn chsh_switched_form_value(v: &VectorPair4) -> Result<f64> {
    v.validate()?;
    let [a, b, c, e] = overlaps(v);
    Ok(-4.0 / 3.0 + (a - b - c - e) / 3.0)
}

/// Maximum of the overlap sum over vectors of norm at most one: `√2 + 1`.
pub fn tsirelson_chsh_max() -> f64 {
    SQRT_2 + 1.0
}

/// Largest CHSH violation of `ρ_3(α)`: `max{0, α(3√2+1)/9 − 4/9}`.
pub fn chsh_max_violation_d3(alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} is outside [0, 1]")));
    }
    Ok((alpha * (3.0 * SQRT_2 + 1.0) / 9.0 - 4.0 / 9.0).max(0.0))
}

/// CHSH threshold of the isotropic state for `d = 2` and `d = 3`.
pub fn alpha_max_chsh(d: usize) -> Result<f64> {
    match d {
        2 => Ok(FRAC_1_SQRT_2),
        3 => Ok(4.0 / (3.0 * SQRT_2 + 1.0)),
        _ => Err(Error::InvalidArgument(format!("no closed form for d = {d}"))),
    }
}

/// `E_i = |x_i⟩⟨x_i|` for Alice and `F_j = |ȳ_j⟩⟨ȳ_j|` for Bob. Vectors are
/// used as given, so a sub-unit vector yields a non-projective effect.
pub fn rank_one_measurements(v: &VectorPair4) -> Result<(MeasurementSet, MeasurementSet)> {
    v.validate()?;
    let conj = |y: &[Complex64]| y.iter().map(|z| z.conj()).collect::<Vec<_>>();
    let a = MeasurementSet::new(
        Party::A,
        vec![
            Effect::new(ComplexMatrix::outer(&v.x1))?,
            Effect::new(ComplexMatrix::outer(&v.x2))?,
        ],
    )?;
    let b = MeasurementSet::new(
        Party::B,
        vec![
            Effect::new(ComplexMatrix::outer(&conj(&v.y1)))?,
            Effect::new(ComplexMatrix::outer(&conj(&v.y2)))?,
        ],
    )?;
    Ok((a, b))
}
