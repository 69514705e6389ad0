//! Two-party, two-outcome Bell inequalities in Collins–Gisin notation.
//!
//! An inequality is stored as exact integer coefficients on the marginal
//! probabilities `q_{i0}`, `q_{0j}` and the joint probabilities `q_{ij}`,
//! together with the integer right-hand side. Everything in this module is
//! exact; floating point never touches it.

mod equivalence;
mod transform;

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use equivalence::{
    are_equivalent, canonical_form, canonicalize, canonicalize_relabeling, inclusion_digraph, includes,
    relabeling_canonical_form, to_dot, InclusionWitness,
};
pub use transform::Transform;

/// One of the two parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::A => Party::B,
            Party::B => Party::A,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::A => "A",
            Party::B => "B",
        })
    }
}

/// A Bell inequality `Σ a_{i0} q_{i0} + Σ a_{0j} q_{0j} + Σ a_{ij} q_{ij} <= bound`.
///
/// Setting indices are zero-based in this API. Equality compares the
/// coefficients and the bound; the optional label is ignored.
#[derive(Debug, Clone, Eq, Serialize, Deserialize)]
pub struct BellInequality {
    name: Option<String>,
    marg_a: Vec<i64>,
    marg_b: Vec<i64>,
    /// Row-major `m_a x m_b`; entry `i * m_b + j` is the coefficient of `q_{ij}`.
    joint: Vec<i64>,
    bound: i64,
}

impl PartialEq for BellInequality {
    fn eq(&self, other: &Self) -> bool {
        self.marg_a == other.marg_a
            && self.marg_b == other.marg_b
            && self.joint == other.joint
            && self.bound == other.bound
    }
}

impl BellInequality {
    /// Builds an inequality; `joint[i][j]` is the coefficient of `q_{ij}`
    /// (Alice setting `i`, Bob setting `j`).
    pub fn new(
        marg_a: Vec<i64>,
        marg_b: Vec<i64>,
        joint: Vec<Vec<i64>>,
        bound: i64,
    ) -> Result<Self> {
        if marg_a.is_empty() || marg_b.is_empty() {
            return Err(Error::Dimension(
                "an inequality needs at least one setting per party".into(),
            ));
        }
        if joint.len() != marg_a.len() {
            return Err(Error::Dimension(format!(
                "joint has {} rows, expected m_A = {}",
                joint.len(),
                marg_a.len()
            )));
        }
        let m_b = marg_b.len();
        let mut flat = Vec::with_capacity(marg_a.len() * m_b);
        for (i, row) in joint.into_iter().enumerate() {
            if row.len() != m_b {
                return Err(Error::Dimension(format!(
                    "joint row {i} has {} entries, expected m_B = {m_b}",
                    row.len()
                )));
            }
            flat.extend(row);
        }
        Ok(Self::from_parts(marg_a, marg_b, flat, bound))
    }

    pub(crate) fn from_parts(marg_a: Vec<i64>, marg_b: Vec<i64>, joint: Vec<i64>, bound: i64) -> Self {
        debug_assert_eq!(joint.len(), marg_a.len() * marg_b.len());
        Self {
            name: None,
            marg_a,
            marg_b,
            joint,
            bound,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn m_a(&self) -> usize {
        self.marg_a.len()
    }

    pub fn m_b(&self) -> usize {
        self.marg_b.len()
    }

    pub fn settings(&self, party: Party) -> usize {
        match party {
            Party::A => self.m_a(),
            Party::B => self.m_b(),
        }
    }

    pub fn marg_a(&self) -> &[i64] {
        &self.marg_a
    }

    pub fn marg_b(&self) -> &[i64] {
        &self.marg_b
    }

    pub fn joint(&self, i: usize, j: usize) -> i64 {
        self.joint[i * self.m_b() + j]
    }

    pub fn joint_rows(&self) -> impl Iterator<Item = &[i64]> {
        self.joint.chunks(self.m_b())
    }

    pub fn bound(&self) -> i64 {
        self.bound
    }

    /// Coefficient tuple `(m_a, m_b, bound, marg_a, marg_b, joint row-major)`;
    /// its lexicographic order is the order `canonical_form` minimizes.
    pub fn key(&self) -> Vec<i64> {
        let mut key = Vec::with_capacity(3 + self.marg_a.len() + self.marg_b.len() + self.joint.len());
        key.push(self.m_a() as i64);
        key.push(self.m_b() as i64);
        key.push(self.bound);
        key.extend_from_slice(&self.marg_a);
        key.extend_from_slice(&self.marg_b);
        key.extend_from_slice(&self.joint);
        key
    }

    /// Exchanges the roles of Alice and Bob.
    pub fn transposed(&self) -> Self {
        let (m_a, m_b) = (self.m_a(), self.m_b());
        let mut joint = vec![0; m_a * m_b];
        for i in 0..m_a {
            for j in 0..m_b {
                joint[j * m_a + i] = self.joint[i * m_b + j];
            }
        }
        Self {
            name: self.name.clone(),
            marg_a: self.marg_b.clone(),
            marg_b: self.marg_a.clone(),
            joint,
            bound: self.bound,
        }
    }

    /// Exchanges outcomes 0 and 1 of setting `k` of `party` (switching).
    pub fn flip_outcome(&self, party: Party, k: usize) -> Result<Self> {
        let m = self.settings(party);
        if k >= m {
            return Err(Error::IndexOutOfRange { party, index: k, m });
        }
        let mut out = self.clone();
        out.flip_in_place(party, k);
        Ok(out)
    }

    pub(crate) fn flip_in_place(&mut self, party: Party, k: usize) {
        let m_b = self.m_b();
        match party {
            Party::A => {
                let old = self.marg_a[k];
                self.marg_a[k] = -old;
                for j in 0..m_b {
                    let c = self.joint[k * m_b + j];
                    self.marg_b[j] += c;
                    self.joint[k * m_b + j] = -c;
                }
                self.bound -= old;
            }
            Party::B => {
                let old = self.marg_b[k];
                self.marg_b[k] = -old;
                for i in 0..self.m_a() {
                    let c = self.joint[i * m_b + k];
                    self.marg_a[i] += c;
                    self.joint[i * m_b + k] = -c;
                }
                self.bound -= old;
            }
        }
    }

    /// Reorders settings: new Alice setting `k` is old setting `perm_a[k]`.
    pub(crate) fn permuted(&self, perm_a: &[usize], perm_b: &[usize]) -> Self {
        let m_b = self.m_b();
        let marg_a = perm_a.iter().map(|&i| self.marg_a[i]).collect();
        let marg_b = perm_b.iter().map(|&j| self.marg_b[j]).collect();
        let mut joint = Vec::with_capacity(self.joint.len());
        for &i in perm_a {
            for &j in perm_b {
                joint.push(self.joint[i * m_b + j]);
            }
        }
        Self {
            name: self.name.clone(),
            marg_a,
            marg_b,
            joint,
            bound: self.bound,
        }
    }

    /// Keeps the first `n_a` Alice and `n_b` Bob settings, i.e. fixes the
    /// remaining measurements to always output 0.
    pub fn truncated(&self, n_a: usize, n_b: usize) -> Result<Self> {
        if n_a == 0 || n_b == 0 || n_a > self.m_a() || n_b > self.m_b() {
            return Err(Error::Dimension(format!(
                "cannot truncate {}x{} to {n_a}x{n_b}",
                self.m_a(),
                self.m_b()
            )));
        }
        let perm_a: Vec<usize> = (0..n_a).collect();
        let perm_b: Vec<usize> = (0..n_b).collect();
        Ok(self.permuted(&perm_a, &perm_b))
    }

    /// Left-hand side for a deterministic strategy (`alice[i]`, `bob[j]` are outcomes).
    pub fn deterministic_value(&self, alice: &[bool], bob: &[bool]) -> i64 {
        let mut v = 0;
        for (i, &oa) in alice.iter().enumerate() {
            if !oa {
                continue;
            }
            v += self.marg_a[i];
            for (j, &ob) in bob.iter().enumerate() {
                if ob {
                    v += self.joint(i, j);
                }
            }
        }
        for (j, &ob) in bob.iter().enumerate() {
            if ob {
                v += self.marg_b[j];
            }
        }
        v
    }

    /// Maximum of the left-hand side over all deterministic local strategies.
    ///
    /// The outer loop enumerates the smaller party; the other party's best
    /// response decomposes per setting.
    pub fn classical_max(&self) -> Result<i64> {
        let total = self.m_a() + self.m_b();
        if total > 30 {
            return Err(Error::TooLarge(total));
        }
        let ineq = if self.m_a() <= self.m_b() {
            self.clone()
        } else {
            self.transposed()
        };
        let (m_a, m_b) = (ineq.m_a(), ineq.m_b());
        let mut best = i64::MIN;
        for mask in 0u64..(1u64 << m_a) {
            let mut v = 0;
            for i in 0..m_a {
                if mask >> i & 1 == 1 {
                    v += ineq.marg_a[i];
                }
            }
            for j in 0..m_b {
                let mut col = ineq.marg_b[j];
                for i in 0..m_a {
                    if mask >> i & 1 == 1 {
                        col += ineq.joint[i * m_b + j];
                    }
                }
                v += col.max(0);
            }
            best = best.max(v);
        }
        Ok(best)
    }

    /// XOR-game coefficients `c[i][j]` such that the inequality reads
    /// `Σ c_{ij} x_{ij} <= bound` with `x_{ij} = q_{i0} + q_{0j} - 2 q_{ij}`,
    /// or `None` when the marginals are not the row/column sums of `c`.
    pub fn xor_game_form(&self) -> Option<Vec<Vec<Rational64>>> {
        let (m_a, m_b) = (self.m_a(), self.m_b());
        for i in 0..m_a {
            let row: i64 = (0..m_b).map(|j| self.joint(i, j)).sum();
            if 2 * self.marg_a[i] != -row {
                return None;
            }
        }
        for j in 0..m_b {
            let col: i64 = (0..m_a).map(|i| self.joint(i, j)).sum();
            if 2 * self.marg_b[j] != -col {
                return None;
            }
        }
        Some(
            (0..m_a)
                .map(|i| {
                    (0..m_b)
                        .map(|j| Rational64::new(-self.joint(i, j), 2))
                        .collect()
                })
                .collect(),
        )
    }

    /// Rebuilds an inequality from XOR-game coefficients; every `c_{ij}`
    /// must be a half-integer.
    pub fn from_xor_game(c: &[Vec<Rational64>], bound: i64) -> Result<Self> {
        let m_a = c.len();
        let m_b = c.first().map_or(0, Vec::len);
        let mut joint = Vec::with_capacity(m_a);
        for row in c {
            if row.len() != m_b {
                return Err(Error::Dimension("ragged XOR coefficient matrix".into()));
            }
            let mut r = Vec::with_capacity(m_b);
            for &x in row {
                let twice = x * Rational64::from_integer(-2);
                if !twice.is_integer() {
                    return Err(Error::InvalidArgument(format!(
                        "XOR coefficient {x} is not a half-integer"
                    )));
                }
                r.push(twice.to_integer());
            }
            joint.push(r);
        }
        let marg_a = (0..m_a)
            .map(|i| c[i].iter().sum::<Rational64>())
            .map(|s| s.to_integer())
            .collect();
        let marg_b = (0..m_b)
            .map(|j| (0..m_a).map(|i| c[i][j]).sum::<Rational64>())
            .map(|s| s.to_integer())
            .collect();
        Self::new(marg_a, marg_b, joint, bound)
    }

    /// Serializes to the `cg` text format; round-trips through [`parse_cg`].
    pub fn to_cg_string(&self) -> String {
        let mut s = String::new();
        if let Some(name) = &self.name {
            s.push_str(&format!("# {name}\n"));
        }
        s.push_str(&format!("cg {} {} {}\n", self.m_a(), self.m_b(), self.bound));
        s.push_str(&join(self.marg_a.iter()));
        s.push('\n');
        for j in 0..self.m_b() {
            let row = std::iter::once(self.marg_b[j]).chain((0..self.m_a()).map(|i| self.joint(i, j)));
            s.push_str(&join(row));
            s.push('\n');
        }
        s
    }
}

fn join<T: ToString>(it: impl IntoIterator<Item = T>) -> String {
    it.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Parses the `cg` text format:
///
/// ```text
/// cg <m_A> <m_B> <bound>
/// <marg_A[1]> ... <marg_A[m_A]>
/// <marg_B[j]> <joint[1][j]> ... <joint[m_A][j]>     (one line per Bob setting)
/// ```
///
/// Blank lines and lines starting with `#` are ignored.
pub fn parse_cg(text: &str) -> Result<BellInequality> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "empty inequality file"))?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some("cg") {
        return Err(Error::parse(hline, "header must start with `cg`"));
    }
    let fields = ints(hline, tok)?;
    if fields.len() != 3 {
        return Err(Error::parse(hline, "header must be `cg <m_A> <m_B> <bound>`"));
    }
    let (m_a, m_b, bound) = (fields[0], fields[1], fields[2]);
    if m_a < 1 || m_b < 1 {
        return Err(Error::parse(hline, "m_A and m_B must be at least 1"));
    }
    let (m_a, m_b) = (m_a as usize, m_b as usize);

    let (mline, marg) = lines
        .next()
        .ok_or_else(|| Error::parse(hline + 1, "missing marginal line for party A"))?;
    let marg_a = ints(mline, marg.split_whitespace())?;
    if marg_a.len() != m_a {
        return Err(Error::parse(
            mline,
            format!("expected {m_a} entries for marg_A, found {}", marg_a.len()),
        ));
    }

    let mut marg_b = Vec::with_capacity(m_b);
    let mut joint = vec![vec![0; m_b]; m_a];
    let mut last = mline;
    for j in 0..m_b {
        let (n, line) = lines
            .next()
            .ok_or_else(|| Error::parse(last + 1, format!("missing row for Bob setting {}", j + 1)))?;
        let row = ints(n, line.split_whitespace())?;
        if row.len() != m_a + 1 {
            return Err(Error::parse(
                n,
                format!("expected {} entries in row {}, found {}", m_a + 1, j + 1, row.len()),
            ));
        }
        marg_b.push(row[0]);
        for i in 0..m_a {
            joint[i][j] = row[i + 1];
        }
        last = n;
    }
    if let Some((n, _)) = lines.next() {
        return Err(Error::parse(n, "trailing content after the last row"));
    }
    BellInequality::new(marg_a, marg_b, joint, bound)
}

fn ints<'a>(line: usize, tok: impl Iterator<Item = &'a str>) -> Result<Vec<i64>> {
    tok.map(|t| {
        t.parse::<i64>()
            .map_err(|_| Error::parse(line, format!("`{t}` is not an integer")))
    })
    .collect()
}

impl FromStr for BellInequality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_cg(s)
    }
}

impl fmt::Display for BellInequality {
    /// Collins–Gisin table: Alice's settings are columns, Bob's are rows.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = &self.name {
            writeln!(f, "{n}:")?;
        }
        write!(f, "{:>4} |", "")?;
        for a in &self.marg_a {
            write!(f, " {a:>3}")?;
        }
        writeln!(f)?;
        for j in 0..self.m_b() {
            write!(f, "{:>4} |", self.marg_b[j])?;
            for i in 0..self.m_a() {
                write!(f, " {:>3}", self.joint(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "<= {}", self.bound)
    }
}
