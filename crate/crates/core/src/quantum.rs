//! States, two-outcome measurements and the evaluation of Bell expressions.
//!
//! The bipartite space is `C^d ⊗ C^d` with the product basis indexed
//! Alice-major: `|a b⟩ -> a * d + b`.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::{BellInequality, Party, Transform};
use crate::linalg::ComplexMatrix;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const EFFECT_EIGEN_TOL: f64 = 1e-10;
pub const IMAGINARY_TOL: f64 = 1e-10;

/// Outcome-1 element `E` of a two-outcome POVM `(E, I - E)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    op: ComplexMatrix,
}

impl Effect {
    /// Checks Hermiticity and `0 <= E <= I` (eigenvalues within 1e-10).
    pub fn new(op: ComplexMatrix) -> Result<Self> {
        if !op.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::InvalidArgument(format!(
                "effect is not Hermitian (defect {:e})",
                op.hermitian_defect()
            )));
        }
        let eig = op.hermitian_eigen();
        let (lo, hi) = (eig.values[0], *eig.values.last().unwrap());
        if lo < -EFFECT_EIGEN_TOL || hi > 1.0 + EFFECT_EIGEN_TOL {
            return Err(Error::InvalidArgument(format!(
                "effect eigenvalues [{lo}, {hi}] leave [0, 1]"
            )));
        }
        Ok(Self { op })
    }

    pub(crate) fn from_projector(op: ComplexMatrix) -> Self {
        Self { op }
    }

    /// `|φ⟩⟨φ|` for `φ` renormalized to unit length.
    pub fn projector(phi: &[Complex64]) -> Result<Self> {
        let norm = phi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        let unit: Vec<Complex64> = phi.iter().map(|z| z / norm).collect();
        Ok(Self::from_projector(ComplexMatrix::outer(&unit)))
    }

    pub fn zero(d: usize) -> Self {
        Self::from_projector(ComplexMatrix::zeros(d))
    }

    pub fn identity(d: usize) -> Self {
        Self::from_projector(ComplexMatrix::identity(d))
    }

    /// `I - E`, the effect of the other outcome.
    pub fn complement(&self) -> Self {
        Self {
            op: &ComplexMatrix::identity(self.dim()) - &self.op,
        }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn op(&self) -> &ComplexMatrix {
        &self.op
    }

    pub fn trace(&self) -> f64 {
        self.op.trace().re
    }

    /// Largest entry of `|E² - E|`.
    pub fn projective_defect(&self) -> f64 {
        (&self.op * &self.op).max_abs_diff(&self.op)
    }

    pub fn is_projective(&self, tol: f64) -> bool {
        self.projective_defect() <= tol
    }
}

/// One party's list of effects, one per setting.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    party: Party,
    effects: Vec<Effect>,
}

impl MeasurementSet {
    pub fn new(party: Party, effects: Vec<Effect>) -> Result<Self> {
        if let Some(first) = effects.first() {
            let d = first.dim();
            if effects.iter().any(|e| e.dim() != d) {
                return Err(Error::Dimension("effects of one party differ in dimension".into()));
            }
        }
        Ok(Self { party, effects })
    }

    pub fn party(&self) -> Party {
        self.party
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.effects.first().map(Effect::dim)
    }
}

/// Maximally entangled `(1/√d) Σ_k |kk⟩`.
pub fn max_entangled(d: usize) -> Result<Vec<Complex64>> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("local dimension must be >= 2, got {d}")));
    }
    let mut psi = vec![Complex64::new(0.0, 0.0); d * d];
    let amp = 1.0 / (d as f64).sqrt();
    for k in 0..d {
        psi[k * d + k] = Complex64::new(amp, 0.0);
    }
    Ok(psi)
}

/// Bipartite `d ⊗ d` density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    d: usize,
    op: ComplexMatrix,
}

impl DensityMatrix {
    /// Checks Hermitian, unit trace (1e-12) and positivity (min eigenvalue >= -1e-10).
    pub fn new(d: usize, op: ComplexMatrix) -> Result<Self> {
        if op.dim() != d * d {
            return Err(Error::Dimension(format!(
                "state has dimension {}, expected {}",
                op.dim(),
                d * d
            )));
        }
        if !op.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::InvalidArgument("density matrix is not Hermitian".into()));
        }
        let tr = op.trace();
        if (tr - 1.0).norm() > 1e-12 {
            return Err(Error::InvalidArgument(format!("trace {tr} is not 1")));
        }
        if op.hermitian_eigen().values[0] < -EFFECT_EIGEN_TOL {
            return Err(Error::InvalidArgument("density matrix is not positive".into()));
        }
        Ok(Self { d, op })
    }

    pub fn local_dim(&self) -> usize {
        self.d
    }

    pub fn op(&self) -> &ComplexMatrix {
        &self.op
    }

    #[inline]
    fn at(&self, a: usize, b: usize, a2: usize, b2: usize) -> Complex64 {
        self.op[(a * self.d + b, a2 * self.d + b2)]
    }

    /// `tr(ρ (E ⊗ F))`
    pub fn expectation(&self, e: &ComplexMatrix, f: &ComplexMatrix) -> Complex64 {
        let d = self.d;
        let mut s = Complex64::new(0.0, 0.0);
        for a in 0..d {
            for b in 0..d {
                for a2 in 0..d {
                    let ea = e[(a2, a)];
                    if ea == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for b2 in 0..d {
                        s += self.at(a, b, a2, b2) * ea * f[(b2, b)];
                    }
                }
            }
        }
        s
    }

    /// `Tr_B[ρ (I ⊗ M)]`, so that `tr(E · result) = tr(ρ (E ⊗ M))`.
    pub fn reduce_onto_a(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let d = self.d;
        ComplexMatrix::from_fn(d, |a, a2| {
            let mut s = Complex64::new(0.0, 0.0);
            for b in 0..d {
                for b2 in 0..d {
                    s += self.at(a, b, a2, b2) * m[(b2, b)];
                }
            }
            s
        })
    }

    /// `Tr_A[ρ (M ⊗ I)]`, so that `tr(F · result) = tr(ρ (M ⊗ F))`.
    pub fn reduce_onto_b(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let d = self.d;
        ComplexMatrix::from_fn(d, |b, b2| {
            let mut s = Complex64::new(0.0, 0.0);
            for a in 0..d {
                for a2 in 0..d {
                    s += self.at(a, b, a2, b2) * m[(a2, a)];
                }
            }
            s
        })
    }

    /// The state with Alice's and Bob's subsystems exchanged.
    pub fn swapped(&self) -> Self {
        let d = self.d;
        let sw = |k: usize| (k % d) * d + k / d;
        Self {
            d,
            op: ComplexMatrix::from_fn(d * d, |r, c| self.op[(sw(r), sw(c))]),
        }
    }
}

/// Isotropic state `α |ψ_d⟩⟨ψ_d| + (1 - α) I / d²`.
pub fn isotropic_state(d: usize, alpha: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} is outside [0, 1]")));
    }
    let psi = max_entangled(d)?;
    let n = d * d;
    let mixed = (1.0 - alpha) / n as f64;
    let op = ComplexMatrix::from_fn(n, |i, j| {
        let mut z = psi[i] * psi[j].conj() * alpha;
        if i == j {
            z += mixed;
        }
        z
    });
    Ok(DensityMatrix { d, op })
}

/// Outcome-1 probabilities `q_{i0}`, `q_{0j}` and `q_{ij}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationVector {
    pub p_a: Vec<f64>,
    pub p_b: Vec<f64>,
    /// Row-major `m_a x m_b`.
    pub p_ab: Vec<f64>,
}

impl CorrelationVector {
    pub fn m_a(&self) -> usize {
        self.p_a.len()
    }

    pub fn m_b(&self) -> usize {
        self.p_b.len()
    }

    pub fn joint(&self, i: usize, j: usize) -> f64 {
        self.p_ab[i * self.m_b() + j]
    }

    /// Largest amount by which `max(0, q_i0 + q_0j - 1) <= q_ij <= min(q_i0, q_0j)`
    /// (or `0 <= q <= 1` for the marginals) is violated; zero when all hold.
    pub fn frechet_excess(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for &p in self.p_a.iter().chain(&self.p_b) {
            worst = worst.max(-p).max(p - 1.0);
        }
        for i in 0..self.m_a() {
            for j in 0..self.m_b() {
                let (pa, pb, q) = (self.p_a[i], self.p_b[j], self.joint(i, j));
                worst = worst
                    .max((pa + pb - 1.0).max(0.0) - q)
                    .max(q - pa.min(pb));
            }
        }
        worst
    }

    pub fn satisfies_frechet(&self, tol: f64) -> bool {
        self.frechet_excess() <= tol
    }
}

fn real_part(z: Complex64) -> Result<f64> {
    if z.im.abs() > IMAGINARY_TOL {
        return Err(Error::ImaginaryResidue(z.im));
    }
    Ok(z.re)
}

fn check_sets(rho: &DensityMatrix, a: &MeasurementSet, b: &MeasurementSet) -> Result<()> {
    for set in [a, b] {
        if let Some(d) = set.dim() {
            if d != rho.local_dim() {
                return Err(Error::Dimension(format!(
                    "party {} effects have dimension {d}, state has local dimension {}",
                    set.party(),
                    rho.local_dim()
                )));
            }
        }
    }
    Ok(())
}

pub fn correlations(rho: &DensityMatrix, a: &MeasurementSet, b: &MeasurementSet) -> Result<CorrelationVector> {
    check_sets(rho, a, b)?;
    let id = ComplexMatrix::identity(rho.local_dim());
    let p_a = a
        .effects()
        .iter()
        .map(|e| real_part(rho.expectation(e.op(), &id)))
        .collect::<Result<_>>()?;
    let p_b = b
        .effects()
        .iter()
        .map(|f| real_part(rho.expectation(&id, f.op())))
        .collect::<Result<_>>()?;
    let mut p_ab = Vec::with_capacity(a.len() * b.len());
    for e in a.effects() {
        for f in b.effects() {
            p_ab.push(real_part(rho.expectation(e.op(), f.op()))?);
        }
    }
    Ok(CorrelationVector { p_a, p_b, p_ab })
}

/// `a·q - bound`; positive means the correlations violate the inequality.
pub fn evaluate(ineq: &BellInequality, q: &CorrelationVector) -> Result<f64> {
    if q.m_a() != ineq.m_a() || q.m_b() != ineq.m_b() {
        return Err(Error::Dimension(format!(
            "correlations are {}x{}, inequality is {}x{}",
            q.m_a(),
            q.m_b(),
            ineq.m_a(),
            ineq.m_b()
        )));
    }
    let mut v = -(ineq.bound() as f64);
    for i in 0..ineq.m_a() {
        v += ineq.marg_a()[i] as f64 * q.p_a[i];
    }
    for j in 0..ineq.m_b() {
        v += ineq.marg_b()[j] as f64 * q.p_b[j];
    }
    for i in 0..ineq.m_a() {
        for j in 0..ineq.m_b() {
            let c = ineq.joint(i, j);
            if c != 0 {
                v += c as f64 * q.joint(i, j);
            }
        }
    }
    Ok(v)
}

pub fn violation(
    ineq: &BellInequality,
    rho: &DensityMatrix,
    a: &MeasurementSet,
    b: &MeasurementSet,
) -> Result<f64> {
    if a.party() != Party::A || b.party() != Party::B {
        return Err(Error::InvalidArgument("measurement sets must be (A, B)".into()));
    }
    evaluate(ineq, &correlations(rho, a, b)?)
}

/// Projector onto a Haar-random `rank`-dimensional subspace of `C^d`.
pub fn random_projective_measurement<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Result<Effect> {
    if rank < 1 || rank >= d {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} must lie in 1..={} for d = {d}",
            d.saturating_sub(1)
        )));
    }
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(rank);
    while basis.len() < rank {
        let mut v: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        for u in &basis {
            let dot: Complex64 = u.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= dot * ui;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            basis.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    let mut p = ComplexMatrix::zeros(d);
    for u in &basis {
        p = &p + &ComplexMatrix::outer(u);
    }
    Ok(Effect::from_projector(p))
}

/// Where the affine violation `V(α) = α V(1) + (1 - α) V(0)` of fixed
/// measurements crosses zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    /// Crossing point clamped into `[0, 1]`.
    pub alpha: f64,
    /// Unclamped `-V(0) / (V(1) - V(0))`.
    pub raw: f64,
    pub v0: f64,
    pub v1: f64,
    pub status: CrossingStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossingStatus {
    Inside,
    /// `V(1) < 0`: these measurements never violate.
    NeverViolating,
    /// `V(0) > 0`: violated even by the maximally mixed state.
    AlwaysViolating,
}

pub fn alpha_crossing(
    ineq: &BellInequality,
    d: usize,
    a: &MeasurementSet,
    b: &MeasurementSet,
) -> Result<Crossing> {
    let v0 = violation(ineq, &isotropic_state(d, 0.0)?, a, b)?;
    let v1 = violation(ineq, &isotropic_state(d, 1.0)?, a, b)?;
    if v1 == v0 {
        return Err(Error::Degenerate);
    }
    let raw = -v0 / (v1 - v0);
    let status = if v1 < 0.0 {
        CrossingStatus::NeverViolating
    } else if v0 > 0.0 {
        CrossingStatus::AlwaysViolating
    } else {
        CrossingStatus::Inside
    };
    let alpha = match status {
        CrossingStatus::NeverViolating => 1.0,
        CrossingStatus::AlwaysViolating => 0.0,
        CrossingStatus::Inside => raw.clamp(0.0, 1.0),
    };
    Ok(Crossing {
        alpha,
        raw,
        v0,
        v1,
        status,
    })
}

/// Measurements matching `t.apply(ineq)`: flips become `I - E`, settings are
/// reordered, and a party swap exchanges the sets (evaluate those on
/// [`DensityMatrix::swapped`]).
pub fn transform_measurements(
    t: &Transform,
    a: &MeasurementSet,
    b: &MeasurementSet,
) -> Result<(MeasurementSet, MeasurementSet)> {
    let (post_a, post_b) = if t.swap_parties { (b, a) } else { (a, b) };
    if post_a.len() != t.perm_a.len() || post_b.len() != t.perm_b.len() {
        return Err(Error::Dimension("measurement counts do not match the transform".into()));
    }
    let map = |set: &MeasurementSet, perm: &[usize], flip: &[bool]| -> Vec<Effect> {
        perm.iter()
            .map(|&i| {
                let e = &set.effects()[i];
                if flip[i] {
                    e.complement()
                } else {
                    e.clone()
                }
            })
            .collect()
    };
    Ok((
        MeasurementSet::new(Party::A, map(post_a, &t.perm_a, &t.flip_a))?,
        MeasurementSet::new(Party::B, map(post_b, &t.perm_b, &t.flip_b))?,
    ))
}

/// Parses the measurement file format: records
///
/// ```text
/// effect <A|B> <index> <proj|complement|zero|identity>
/// re0 im0 re1 im1 ...
/// ```
///
/// where the second line gives `|φ⟩` (renormalized on load). `proj` is
/// `|φ⟩⟨φ|`, `complement` is `I - |φ⟩⟨φ|`; `zero` and `identity` ignore the
/// vector. Indices are 1-based and must cover `1..=m` for each party.
pub fn parse_measurements(text: &str) -> Result<(MeasurementSet, MeasurementSet)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut records: Vec<(Party, usize, Effect, usize)> = Vec::new();
    let mut dim: Option<usize> = None;

    while let Some((n, header)) = lines.next() {
        let tok: Vec<&str> = header.split_whitespace().collect();
        if tok.len() != 4 || tok[0] != "effect" {
            return Err(Error::parse(n, "expected `effect <A|B> <index> <kind>`"));
        }
        let party = match tok[1] {
            "A" => Party::A,
            "B" => Party::B,
            other => return Err(Error::parse(n, format!("unknown party `{other}`"))),
        };
        let index: usize = tok[2]
            .parse()
            .ok()
            .filter(|&k| k >= 1)
            .ok_or_else(|| Error::parse(n, format!("bad setting index `{}`", tok[2])))?;
        let kind = tok[3];
        let (vn, vline) = lines
            .next()
            .ok_or_else(|| Error::parse(n + 1, "missing amplitude line"))?;
        let reals = vline
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| Error::parse(vn, format!("`{t}` is not a number"))))
            .collect::<Result<Vec<f64>>>()?;
        if reals.is_empty() || reals.len() % 2 != 0 {
            return Err(Error::parse(vn, "amplitude line needs 2d reals"));
        }
        let d = reals.len() / 2;
        if *dim.get_or_insert(d) != d {
            return Err(Error::parse(vn, "effects have different dimensions"));
        }
        let phi: Vec<Complex64> = reals.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        let effect = match kind {
            "proj" => Effect::projector(&phi).map_err(|e| Error::parse(vn, e.to_string()))?,
            "complement" => Effect::projector(&phi)
                .map_err(|e| Error::parse(vn, e.to_string()))?
                .complement(),
            "zero" => Effect::zero(d),
            "identity" => Effect::identity(d),
            other => return Err(Error::parse(n, format!("unknown effect kind `{other}`"))),
        };
        records.push((party, index, effect, n));
    }

    let build = |party: Party| -> Result<MeasurementSet> {
        let mut mine: Vec<(usize, Effect, usize)> = records
            .iter()
            .filter(|r| r.0 == party)
            .map(|r| (r.1, r.2.clone(), r.3))
            .collect();
        mine.sort_by_key(|r| r.0);
        for (k, (idx, _, line)) in mine.iter().enumerate() {
            if *idx != k + 1 {
                return Err(Error::parse(*line, format!("party {party} indices must be 1..=m without gaps or repeats")));
            }
        }
        MeasurementSet::new(party, mine.into_iter().map(|r| r.1).collect())
    };
    let a = build(Party::A)?;
    let b = build(Party::B)?;
    Ok((a, b))
}

/// Writes projective effects in the measurement file format. Effects of
/// rank other than `0`, `1`, `d - 1` or `d` have no single-vector form.
pub fn write_measurements(a: &MeasurementSet, b: &MeasurementSet) -> Result<String> {
    let mut s = String::new();
    for set in [a, b] {
        for (k, e) in set.effects().iter().enumerate() {
            let d = e.dim();
            let rank = e.trace().round() as usize;
            let eig = e.op().hermitian_eigen();
            let (kind, phi) = if rank == 0 {
                ("zero", vec![Complex64::new(0.0, 0.0); d])
            } else if rank == d {
                ("identity", vec![Complex64::new(0.0, 0.0); d])
            } else if rank == 1 {
                ("proj", eig.vectors[d - 1].clone())
            } else if rank == d - 1 {
                ("complement", eig.vectors[0].clone())
            } else {
                return Err(Error::InvalidArgument(format!(
                    "effect {} {} has rank {rank}, not expressible with one vector",
                    set.party(),
                    k + 1
                )));
            };
            // fix the global phase so the first non-negligible amplitude is real and positive
            let pivot = phi.iter().find(|z| z.norm() > 1e-8).copied();
            let phase = pivot.map_or(Complex64::new(1.0, 0.0), |z| z.conj() / z.norm());
            let _ = writeln!(s, "effect {} {} {kind}", set.party(), k + 1);
            let amps: Vec<String> = phi
                .iter()
                .map(|z| z * phase)
                .flat_map(|z| [z.re, z.im])
                .map(|x| format!("{x}"))
                .collect();
            let _ = writeln!(s, "{}", amps.join(" "));
        }
    }
    Ok(s)
}
