//! Canonical forms, equivalence and inclusion.
//!
//! Both searches walk the outcome-flip states exhaustively (at most
//! `2 * 2^(m_A + m_B)`, i.e. 2048 for 5+5 settings) and handle the setting
//! permutations by sorting and backtracking instead of enumerating them.

use serde::{Deserialize, Serialize};

use super::{BellInequality, Party, Transform};

fn flipped(base: &BellInequality, mask_a: u32, mask_b: u32) -> BellInequality {
    let mut f = base.clone();
    for i in 0..base.m_a() {
        if mask_a >> i & 1 == 1 {
            f.flip_in_place(Party::A, i);
        }
    }
    for j in 0..base.m_b() {
        if mask_b >> j & 1 == 1 {
            f.flip_in_place(Party::B, j);
        }
    }
    f
}

fn bits(mask: u32, n: usize) -> Vec<bool> {
    (0..n).map(|i| mask >> i & 1 == 1).collect()
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for k in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Every ordering of `0..values.len()` that lists `values` in ascending order.
fn sorted_orderings(values: &[i64]) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by_key(|&i| (values[i], i));
    let mut out = vec![Vec::new()];
    for group in idx.chunk_by(|&x, &y| values[x] == values[y]) {
        let perms = permutations(group);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                perms.iter().map(move |p| {
                    let mut v = prefix.clone();
                    v.extend_from_slice(p);
                    v
                })
            })
            .collect();
    }
    out
}

/// Canonical representative of the equivalence class and a transform
/// mapping `ineq` onto it.
///
/// The representative minimizes [`BellInequality::key`] lexicographically
/// over the whole group (party swap, setting permutations, outcome flips).
pub fn canonicalize(ineq: &BellInequality) -> (BellInequality, Transform) {
    canonicalize_in(ineq, true)
}

/// As [`canonicalize`], over relabelings only (party swap and setting
/// permutations, no outcome flips).
pub fn canonicalize_relabeling(ineq: &BellInequality) -> (BellInequality, Transform) {
    canonicalize_in(ineq, false)
}

fn canonicalize_in(ineq: &BellInequality, flips: bool) -> (BellInequality, Transform) {
    let mut best: Option<(Vec<i64>, Transform)> = None;
    for swap in [false, true] {
        let base = if swap {
            ineq.transposed()
        } else {
            ineq.clone()
        };
        let (m_a, m_b) = (base.m_a(), base.m_b());
        let (top_a, top_b) = if flips { (1u32 << m_a, 1u32 << m_b) } else { (1, 1) };
        for mask_a in 0..top_a {
            for mask_b in 0..top_b {
                let f = flipped(&base, mask_a, mask_b);
                let mut sorted_a = f.marg_a().to_vec();
                sorted_a.sort_unstable();
                let mut sorted_b = f.marg_b().to_vec();
                sorted_b.sort_unstable();
                let mut prefix = vec![m_a as i64, m_b as i64, f.bound()];
                prefix.extend(&sorted_a);
                prefix.extend(&sorted_b);
                if let Some((key, _)) = &best {
                    if prefix.as_slice() > &key[..prefix.len()] {
                        continue;
                    }
                }
                for perm_b in sorted_orderings(f.marg_b()) {
                    let rows: Vec<Vec<i64>> = (0..m_a)
                        .map(|i| perm_b.iter().map(|&j| f.joint(i, j)).collect())
                        .collect();
                    let mut perm_a: Vec<usize> = (0..m_a).collect();
                    perm_a.sort_by(|&x, &y| (f.marg_a()[x], &rows[x]).cmp(&(f.marg_a()[y], &rows[y])));
                    let mut key = prefix.clone();
                    for &i in &perm_a {
                        key.extend(&rows[i]);
                    }
                    if best.as_ref().is_none_or(|(k, _)| key < *k) {
                        let t = Transform {
                            swap_parties: swap,
                            perm_a,
                            perm_b,
                            flip_a: bits(mask_a, m_a),
                            flip_b: bits(mask_b, m_b),
                        };
                        best = Some((key, t));
                    }
                }
            }
        }
    }
    let (_, t) = best.expect("group is never empty");
    let canon = t.apply(ineq).expect("transform built for this inequality");
    (canon, t)
}

pub fn canonical_form(ineq: &BellInequality) -> BellInequality {
    canonicalize(ineq).0
}

pub fn relabeling_canonical_form(ineq: &BellInequality) -> BellInequality {
    canonicalize_relabeling(ineq).0
}

/// Returns a transform mapping `a` onto `b` when the two are equivalent.
pub fn are_equivalent(a: &BellInequality, b: &BellInequality) -> Option<Transform> {
    let (ca, ta) = canonicalize(a);
    let (cb, tb) = canonicalize(b);
    if ca != cb {
        return None;
    }
    Some(ta.then(&tb.inverse()).expect("canonical forms have equal dimensions"))
}

/// Certificate that `larger` includes `smaller`: applying `transform` to
/// the larger inequality and keeping the leading `kept_a x kept_b` block
/// reproduces the smaller one exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InclusionWitness {
    pub transform: Transform,
    pub kept_a: usize,
    pub kept_b: usize,
}

impl InclusionWitness {
    pub fn verify(&self, larger: &BellInequality, smaller: &BellInequality) -> bool {
        self.transform
            .apply(larger)
            .and_then(|x| x.truncated(self.kept_a, self.kept_b))
            .is_ok_and(|x| x == *smaller)
    }

    /// Measurements of the larger inequality fixed to a deterministic
    /// outcome: `(party, setting, outcome)`, zero-based settings.
    pub fn fixed_measurements(&self) -> Vec<(Party, usize, u8)> {
        let t = &self.transform;
        let mut out = Vec::new();
        // post-swap labels -> source labels
        let src = |p: Party| if t.swap_parties { p.other() } else { p };
        for &i in t.perm_a.iter().skip(self.kept_a) {
            out.push((src(Party::A), i, t.flip_a[i] as u8));
        }
        for &j in t.perm_b.iter().skip(self.kept_b) {
            out.push((src(Party::B), j, t.flip_b[j] as u8));
        }
        out.sort();
        out
    }
}

struct InclusionSearch<'a> {
    f: &'a BellInequality,
    small: &'a BellInequality,
    sel_a: Vec<usize>,
    sel_b: Vec<usize>,
    used_a: Vec<bool>,
    used_b: Vec<bool>,
}

impl InclusionSearch<'_> {
    fn bob(&mut self, l: usize) -> bool {
        if l == self.small.m_b() {
            return self.alice(0);
        }
        for j in 0..self.f.m_b() {
            if self.used_b[j] || self.f.marg_b()[j] != self.small.marg_b()[l] {
                continue;
            }
            self.used_b[j] = true;
            self.sel_b.push(j);
            if self.bob(l + 1) {
                return true;
            }
            self.sel_b.pop();
            self.used_b[j] = false;
        }
        false
    }

    fn alice(&mut self, k: usize) -> bool {
        if k == self.small.m_a() {
            return true;
        }
        for i in 0..self.f.m_a() {
            if self.used_a[i] || self.f.marg_a()[i] != self.small.marg_a()[k] {
                continue;
            }
            let column_ok = self
                .sel_b
                .iter()
                .enumerate()
                .all(|(l, &j)| self.f.joint(i, j) == self.small.joint(k, l));
            if !column_ok {
                continue;
            }
            self.used_a[i] = true;
            self.sel_a.push(i);
            if self.alice(k + 1) {
                return true;
            }
            self.sel_a.pop();
            self.used_a[i] = false;
        }
        false
    }
}

fn complete(selected: &[usize], n: usize) -> Vec<usize> {
    let mut perm = selected.to_vec();
    perm.extend((0..n).filter(|i| !selected.contains(i)));
    perm
}

/// Whether `larger` includes `smaller`: some equivalent form of `larger`
/// agrees with `smaller` on the leading block, bound included, so fixing
/// the remaining measurements to deterministic outcomes yields `smaller`.
pub fn includes(larger: &BellInequality, smaller: &BellInequality) -> Option<InclusionWitness> {
    for swap in [false, true] {
        let base = if swap {
            larger.transposed()
        } else {
            larger.clone()
        };
        let (m_a, m_b) = (base.m_a(), base.m_b());
        if m_a < smaller.m_a() || m_b < smaller.m_b() {
            continue;
        }
        for mask_a in 0u32..(1 << m_a) {
            for mask_b in 0u32..(1 << m_b) {
                let f = flipped(&base, mask_a, mask_b);
                if f.bound() != smaller.bound() {
                    continue;
                }
                let mut search = InclusionSearch {
                    f: &f,
                    small: smaller,
                    sel_a: Vec::new(),
                    sel_b: Vec::new(),
                    used_a: vec![false; m_a],
                    used_b: vec![false; m_b],
                };
                if search.bob(0) {
                    return Some(InclusionWitness {
                        transform: Transform {
                            swap_parties: swap,
                            perm_a: complete(&search.sel_a, m_a),
                            perm_b: complete(&search.sel_b, m_b),
                            flip_a: bits(mask_a, m_a),
                            flip_b: bits(mask_b, m_b),
                        },
                        kept_a: smaller.m_a(),
                        kept_b: smaller.m_b(),
                    });
                }
            }
        }
    }
    None
}

/// Transitively reduced inclusion arcs `(from, to)` among named
/// inequalities, sorted by name; self-loops are excluded.
///
/// Mutually including (equivalent) inequalities are collapsed first; the
/// members of such a class are joined by a directed cycle in name order.
pub fn inclusion_digraph(list: &[BellInequality]) -> Vec<(String, String)> {
    let mut items: Vec<(String, &BellInequality)> = list
        .iter()
        .enumerate()
        .map(|(k, x)| (x.name().map_or_else(|| format!("#{}", k + 1), str::to_string), x))
        .collect();
    items.sort_by(|x, y| x.0.cmp(&y.0));
    let n = items.len();

    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            reach[i][j] = i != j && includes(items[i].1, items[j].1).is_some();
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] && i != j {
                    reach[i][j] = true;
                }
            }
        }
    }

    // class representative = lowest index (first name) among mutually reachable nodes
    let rep: Vec<usize> = (0..n)
        .map(|i| (0..=i).find(|&j| j == i || (reach[i][j] && reach[j][i])).unwrap())
        .collect();
    let reps: Vec<usize> = (0..n).filter(|&i| rep[i] == i).collect();

    let mut arcs = Vec::new();
    for &c in &reps {
        for &d in &reps {
            if c == d || !reach[c][d] {
                continue;
            }
            let implied = reps
                .iter()
                .any(|&e| e != c && e != d && reach[c][e] && reach[e][d]);
            if !implied {
                arcs.push((items[c].0.clone(), items[d].0.clone()));
            }
        }
        let members: Vec<usize> = (0..n).filter(|&i| rep[i] == c).collect();
        if members.len() > 1 {
            for w in 0..members.len() {
                let next = members[(w + 1) % members.len()];
                arcs.push((items[members[w]].0.clone(), items[next].0.clone()));
            }
        }
    }
    arcs.sort();
    arcs
}

/// `digraph inclusion { "a" -> "b"; ... }`
pub fn to_dot(arcs: &[(String, String)]) -> String {
    let mut s = String::from("digraph inclusion {\n");
    for (a, b) in arcs {
        s.push_str(&format!("  \"{a}\" -> \"{b}\";\n"));
    }
    s.push_str("}\n");
    s
}
