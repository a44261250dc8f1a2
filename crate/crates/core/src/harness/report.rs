use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::BallHistogram;
use crate::error::{Error, Result};
use crate::treestats::{enumerate_shapes, limit_probability_of_code, CanonicalCode};

/// Shapes whose expected count falls below this are reported but not tested.
pub const MIN_EXPECTED_COUNT: f64 = 25.0;

/// A reference law on ball codes. Codes missing from `probs` have
/// probability 0 when `complete`; otherwise their mass is unknown and only
/// the listed total is used.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitLaw {
    pub k: usize,
    pub r: usize,
    pub probs: BTreeMap<CanonicalCode, f64>,
}

impl LimitLaw {
    pub fn new(k: usize, r: usize, probs: BTreeMap<CanonicalCode, f64>) -> LimitLaw {
        LimitLaw { k, r, probs }
    }

    /// The skeleton-tree law on every enumerated shape (even-level branching
    /// at most `max_children`, at most `max_vertices` vertices) plus every
    /// code in `extra`.
    pub fn skeleton<'a>(
        k: usize,
        r: usize,
        max_children: usize,
        max_vertices: usize,
        extra: impl IntoIterator<Item = &'a CanonicalCode>,
    ) -> Result<LimitLaw> {
        let mut probs = BTreeMap::new();
        for t in enumerate_shapes(k, r, max_children, max_vertices)? {
            probs.insert(t.code(), t.limit_probability());
        }
        let mut law = LimitLaw { k, r, probs };
        law.extend(extra);
        Ok(law)
    }

    /// Adds the closed-form limit probability of each code not yet listed.
    pub fn extend<'a>(&mut self, codes: impl IntoIterator<Item = &'a CanonicalCode>) {
        for c in codes {
            if !self.probs.contains_key(c) {
                let p = limit_probability_of_code(self.k, self.r, c);
                self.probs.insert(c.clone(), p);
            }
        }
    }

    pub fn probability(&self, code: &CanonicalCode) -> f64 {
        self.probs.get(code).copied().unwrap_or(0.0)
    }

    pub fn listed_mass(&self) -> f64 {
        self.probs.values().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShapeRow {
    pub code: CanonicalCode,
    pub tree: bool,
    pub count: u64,
    pub empirical: f64,
    pub limit: f64,
    pub expected: f64,
    pub z: Option<f64>,
    pub tested: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareReport {
    pub k: usize,
    pub r: usize,
    pub n: Option<usize>,
    pub observations: u64,
    pub rows: Vec<ShapeRow>,
    /// Total variation distance; listed limit mass not covered by the table
    /// counts as unobserved mass.
    pub tv: f64,
    pub non_tree_mass: f64,
    pub listed_limit_mass: f64,
    pub max_abs_z: f64,
    pub tested_shapes: usize,
}

impl CompareReport {
    /// True when every tested shape lies within `sigmas` standard deviations.
    pub fn within(&self, sigmas: f64) -> bool {
        self.max_abs_z <= sigmas
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "k={} r={} n={} observations={}",
            self.k,
            self.r,
            self.n.map_or("limit".to_string(), |n| n.to_string()),
            self.observations
        );
        let _ = writeln!(
            s,
            "TV={:.6} non-tree mass={:.6} max|z|={:.3} tested shapes={}",
            self.tv, self.non_tree_mass, self.max_abs_z, self.tested_shapes
        );
        let _ = writeln!(s, "{:>10} {:>10} {:>10} {:>8}  code", "count", "empirical", "limit", "z");
        for row in &self.rows {
            let z = row.z.map_or("-".to_string(), |z| format!("{z:.3}"));
            let _ = writeln!(
                s,
                "{:>10} {:>10.6} {:>10.6} {:>8}  {}",
                row.count, row.empirical, row.limit, z, row.code
            );
        }
        s
    }
}

/// Per-shape comparison of a histogram with a reference law.
pub fn compare_report(empirical: &BallHistogram, limit: &LimitLaw) -> Result<CompareReport> {
    if (empirical.k, empirical.r) != (limit.k, limit.r) {
        return Err(Error::Mismatch(format!(
            "histogram has (k,r) = ({},{}), law has ({},{})",
            empirical.k, empirical.r, limit.k, limit.r
        )));
    }
    let n = empirical.observations as f64;
    let mut codes: Vec<&CanonicalCode> = empirical.iter().map(|(c, _)| c).collect();
    codes.extend(limit.probs.keys().filter(|c| empirical.count(c) == 0));
    codes.sort();
    let mut rows = Vec::with_capacity(codes.len());
    let mut abs_diff = 0.0;
    let mut max_abs_z: f64 = 0.0;
    let mut tested_shapes = 0;
    for code in codes {
        let count = empirical.count(code);
        let e = if n > 0.0 { count as f64 / n } else { 0.0 };
        let l = limit.probability(code);
        abs_diff += (e - l).abs();
        let expected = n * l;
        let tested = expected >= MIN_EXPECTED_COUNT && l < 1.0;
        let z = (l > 0.0 && l < 1.0).then(|| (count as f64 - expected) / (n * l * (1.0 - l)).sqrt());
        if tested {
            tested_shapes += 1;
            max_abs_z = max_abs_z.max(z.expect("0 < l < 1").abs());
        }
        rows.push(ShapeRow {
            code: code.clone(),
            tree: code.is_tree(),
            count,
            empirical: e,
            limit: l,
            expected,
            z,
            tested,
        });
    }
    let listed = limit.listed_mass();
    let tv = 0.5 * (abs_diff + (1.0 - listed).max(0.0));
    Ok(CompareReport {
        k: empirical.k,
        r: empirical.r,
        n: empirical.n,
        observations: empirical.observations,
        rows,
        tv,
        non_tree_mass: empirical.non_tree_mass(),
        listed_limit_mass: listed,
        max_abs_z,
        tested_shapes,
    })
}
