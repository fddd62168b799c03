//! Step graphons and their degree statistics.
//!
//! A [`StepGraphon`] partitions `[0, 1]` into consecutive blocks of the given
//! masses and is constant on every product of two blocks. Two-block
//! stochastic block models ([`SbmParams`]) and the one-parameter family of
//! equal-degree block models ([`FamilyPoint`]) convert into step graphons.
//!
//! For a step kernel the degree function `d_W(x) = ∫ W(x, y) dy` is constant
//! on each block, so every integral below is a finite sum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `∑ block_masses = 1`.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Adjacent normalized degree levels closer than this are merged.
pub const LEVEL_MERGE_TOLERANCE: f64 = 1e-12;

/// Two-block stochastic block model. The first block has mass `k1`, the
/// second `1 - k1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub k1: f64,
    pub p1: f64,
    pub p2: f64,
    pub q: f64,
}

impl SbmParams {
    pub fn new(k1: f64, p1: f64, p2: f64, q: f64) -> Result<Self> {
        let params = Self { k1, p1, p2, q };
        params.validate()?;
        Ok(params)
    }

    pub fn k2(&self) -> f64 {
        1.0 - self.k1
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k1 > 0.0 && self.k1 < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "block mass k1 = {} must lie in (0, 1)",
                self.k1
            )));
        }
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("q", self.q)] {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "edge probability {name} = {p} must lie in (0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn to_graphon(&self) -> Result<StepGraphon> {
        sbm_to_graphon(self)
    }
}

/// Builds the 2-block step graphon `[[p1, q], [q, p2]]` with masses
/// `(k1, 1 - k1)` and lower bound `min(p1, p2, q)`.
pub fn sbm_to_graphon(params: &SbmParams) -> Result<StepGraphon> {
    params.validate()?;
    let SbmParams { k1, p1, p2, q } = *params;
    StepGraphon::from_parts(vec![k1, 1.0 - k1], vec![p1, q, q, p2], Some(p1.min(p2).min(q)))
}

/// A member of the equal-degree family of block models: densities
/// `(p1, p2, q) = base + tau * (1/k1, k1/k2², -1/k2)`.
///
/// `k1` is a fixed family parameter shared by every member, and doubles as
/// the mass of the first block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyPoint {
    pub base: [f64; 3],
    pub k1: f64,
    pub tau: f64,
}

impl FamilyPoint {
    pub fn new(base: [f64; 3], k1: f64, tau: f64) -> Result<Self> {
        let fp = Self { base, k1, tau };
        fp.to_sbm()?;
        Ok(fp)
    }

    pub fn direction(&self) -> [f64; 3] {
        let k2 = 1.0 - self.k1;
        [1.0 / self.k1, self.k1 / (k2 * k2), -1.0 / k2]
    }

    pub fn densities(&self) -> [f64; 3] {
        let dir = self.direction();
        [
            self.base[0] + self.tau * dir[0],
            self.base[1] + self.tau * dir[1],
            self.base[2] + self.tau * dir[2],
        ]
    }

    pub fn to_sbm(&self) -> Result<SbmParams> {
        family_point_to_sbm(self)
    }
}

pub fn family_point_to_sbm(fp: &FamilyPoint) -> Result<SbmParams> {
    if !(fp.k1 > 0.0 && fp.k1 < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "family parameter k1 = {} must lie in (0, 1)",
            fp.k1
        )));
    }
    if fp.base.iter().any(|&b| !(b > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "family base point {:?} must be positive",
            fp.base
        )));
    }
    let [p1, p2, q] = fp.densities();
    SbmParams::new(fp.k1, p1, p2, q).map_err(|_| {
        Error::InvalidParameter(format!(
            "tau = {} moves the family point to (p1, p2, q) = ({p1}, {p2}, {q}), outside (0, 1]^3",
            fp.tau
        ))
    })
}

/// Piecewise-constant symmetric kernel on `[0, 1]²` bounded below by
/// `lower_bound > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepGraphon {
    block_masses: Vec<f64>,
    /// Row-major `blocks × blocks`.
    values: Vec<f64>,
    lower_bound: f64,
}

impl StepGraphon {
    /// `lower_bound = None` takes the smallest kernel value.
    pub fn new(block_masses: Vec<f64>, values: Vec<Vec<f64>>, lower_bound: Option<f64>) -> Result<Self> {
        let k = block_masses.len();
        if values.len() != k || values.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidGraphon(format!(
                "values must be a {k}x{k} matrix to match {k} block masses"
            )));
        }
        Self::from_parts(block_masses, values.concat(), lower_bound)
    }

    fn from_parts(block_masses: Vec<f64>, values: Vec<f64>, lower_bound: Option<f64>) -> Result<Self> {
        let k = block_masses.len();
        if k == 0 {
            return Err(Error::InvalidGraphon("at least one block is required".into()));
        }
        debug_assert_eq!(values.len(), k * k);
        if let Some(m) = block_masses.iter().find(|m| !(**m > 0.0)) {
            return Err(Error::InvalidGraphon(format!("block mass {m} is not positive")));
        }
        let total: f64 = block_masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidGraphon(format!(
                "block masses sum to {total}, expected 1"
            )));
        }
        for a in 0..k {
            for b in (a + 1)..k {
                if values[a * k + b] != values[b * k + a] {
                    return Err(Error::InvalidGraphon(format!("values not symmetric at ({a}, {b})")));
                }
            }
        }
        let min_value = values.iter().copied().fold(f64::INFINITY, f64::min);
        let lower_bound = lower_bound.unwrap_or(min_value);
        if !(lower_bound > 0.0) {
            return Err(Error::InvalidGraphon(format!(
                "lower bound {lower_bound} must be positive"
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= lower_bound && **v <= 1.0)) {
            return Err(Error::InvalidGraphon(format!(
                "kernel value {v} outside [{lower_bound}, 1]"
            )));
        }
        Ok(Self {
            block_masses,
            values,
            lower_bound,
        })
    }

    /// The constant kernel `W ≡ p`.
    pub fn constant(p: f64) -> Result<Self> {
        Self::from_parts(vec![1.0], vec![p], Some(p))
    }

    pub fn num_blocks(&self) -> usize {
        self.block_masses.len()
    }

    pub fn block_masses(&self) -> &[f64] {
        &self.block_masses
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    /// Kernel value between blocks `a` and `b`.
    pub fn value(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.num_blocks() + b]
    }

    pub fn values(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.num_blocks()).map(<[f64]>::to_vec).collect()
    }

    /// Block containing `x ∈ [0, 1]`. Blocks are left-closed; `x = 1` falls in
    /// the last block.
    pub fn block_of(&self, x: f64) -> usize {
        let mut acc = 0.0;
        let last = self.num_blocks() - 1;
        for (a, m) in self.block_masses[..last].iter().enumerate() {
            acc += m;
            if x < acc {
                return a;
            }
        }
        last
    }

    /// `W(x, y)`.
    pub fn kernel(&self, x: f64, y: f64) -> f64 {
        self.value(self.block_of(x), self.block_of(y))
    }

    /// Per-block degree `d_a = ∑_b m_b W_ab`.
    pub fn degree_function(&self) -> Vec<f64> {
        let k = self.num_blocks();
        (0..k)
            .map(|a| {
                self.block_masses
                    .iter()
                    .enumerate()
                    .map(|(b, m)| m * self.value(a, b))
                    .sum()
            })
            .collect()
    }

    /// `D(W) = ∑_a m_a d_a`.
    pub fn total_degree(&self) -> f64 {
        self.block_masses
            .iter()
            .zip(self.degree_function())
            .map(|(m, d)| m * d)
            .sum()
    }

    /// The monotone rearrangement of `d_W / D(W)`.
    pub fn normalized_degree_profile(&self) -> DegreeProfile {
        let total = self.total_degree();
        let mut pairs: Vec<(f64, f64)> = self
            .degree_function()
            .into_iter()
            .map(|d| d / total)
            .zip(self.block_masses.iter().copied())
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut masses: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut levels: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut group_start = f64::NAN;
        for (level, mass) in pairs {
            match (masses.last_mut(), levels.last_mut()) {
                (Some(m), Some(l)) if (level - group_start).abs() <= LEVEL_MERGE_TOLERANCE => {
                    *l = (*l * *m + level * mass) / (*m + mass);
                    *m += mass;
                }
                _ => {
                    group_start = level;
                    masses.push(mass);
                    levels.push(level);
                }
            }
        }
        if levels.len() == 1 {
            levels[0] = 1.0 / masses[0];
        }
        DegreeProfile { masses, levels }
    }

    /// Relabels blocks: block `a` of the result is block `perm[a]` of `self`.
    /// The kernel is unchanged up to a measure-preserving rearrangement.
    pub fn permute_blocks(&self, perm: &[usize]) -> Result<Self> {
        let k = self.num_blocks();
        let mut seen = vec![false; k];
        if perm.len() != k || perm.iter().any(|&p| p >= k || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidParameter(format!(
                "{perm:?} is not a permutation of {k} blocks"
            )));
        }
        let masses = perm.iter().map(|&p| self.block_masses[p]).collect();
        let values = (0..k * k).map(|idx| self.value(perm[idx / k], perm[idx % k])).collect();
        Self::from_parts(masses, values, Some(self.lower_bound))
    }
}

/// Free-function form of [`StepGraphon::degree_function`].
pub fn degree_function(w: &StepGraphon) -> Vec<f64> {
    w.degree_function()
}

pub fn total_degree(w: &StepGraphon) -> f64 {
    w.total_degree()
}

pub fn normalized_degree_profile(w: &StepGraphon) -> DegreeProfile {
    w.normalized_degree_profile()
}

/// Nondecreasing step function on `[0, 1]`: `levels[i]` on a segment of
/// length `masses[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeProfile {
    pub masses: Vec<f64>,
    pub levels: Vec<f64>,
}

impl DegreeProfile {
    fn breakpoints(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut cuts: Vec<f64> = self
            .masses
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        if let Some(last) = cuts.last_mut() {
            *last = 1.0;
        }
        cuts
    }

    /// Level at position `t ∈ [0, 1]`.
    pub fn level_at(&self, t: f64) -> f64 {
        let cuts = self.breakpoints();
        let idx = cuts.partition_point(|&c| c <= t).min(self.levels.len() - 1);
        self.levels[idx]
    }

    /// Levels at the `n` equal-mass quantile midpoints `(i + 1/2)/n`.
    pub fn quantiles(&self, n: usize) -> Vec<f64> {
        let cuts = self.breakpoints();
        let last = self.levels.len() - 1;
        let mut idx = 0;
        (0..n)
            .map(|i| {
                let t = (i as f64 + 0.5) / n as f64;
                while idx < last && cuts[idx] <= t {
                    idx += 1;
                }
                self.levels[idx]
            })
            .collect()
    }

    /// `∫ |f(t) - g(t)| dt` for the two step functions.
    pub fn l1_distance(&self, other: &DegreeProfile) -> f64 {
        let mut cuts: Vec<f64> = self.breakpoints();
        cuts.extend(other.breakpoints());
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let mut prev = 0.0;
        let (mut i, mut j) = (0, 0);
        let (a_cuts, b_cuts) = (self.breakpoints(), other.breakpoints());
        let mut acc = 0.0;
        for cut in cuts {
            let width = cut - prev;
            if width > 0.0 {
                let mid = prev + 0.5 * width;
                while i + 1 < self.levels.len() && a_cuts[i] <= mid {
                    i += 1;
                }
                while j + 1 < other.levels.len() && b_cuts[j] <= mid {
                    j += 1;
                }
                acc += width * (self.levels[i] - other.levels[j]).abs();
            }
            prev = cut;
        }
        acc
    }
}

/// The smallest `δ` for which `(w0, w1)` is a `δ`-exceptional pair: the
/// infimum over measure-preserving bijections `φ` of
/// `∫ |d_{W0}(φ(x))/D(W0) - d_{W1}(x)/D(W1)| dx`.
///
/// The infimum is attained by pairing the monotone rearrangements, so this is
/// the L1 distance between the two sorted degree profiles.
pub fn delta_separation(w0: &StepGraphon, w1: &StepGraphon) -> f64 {
    w0.normalized_degree_profile()
        .l1_distance(&w1.normalized_degree_profile())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GraphonDoc {
    Sbm {
        sbm: SbmParams,
    },
    Family {
        family: FamilyPoint,
    },
    Constant {
        constant: f64,
    },
    Explicit {
        block_masses: Vec<f64>,
        values: Vec<Vec<f64>>,
        #[serde(default)]
        lower_bound: Option<f64>,
    },
}

#[derive(Serialize)]
struct ExplicitDoc {
    block_masses: Vec<f64>,
    values: Vec<Vec<f64>>,
    lower_bound: f64,
}

impl TryFrom<GraphonDoc> for StepGraphon {
    type Error = Error;

    fn try_from(doc: GraphonDoc) -> Result<Self> {
        match doc {
            GraphonDoc::Sbm { sbm } => sbm_to_graphon(&sbm),
            GraphonDoc::Family { family } => sbm_to_graphon(&family_point_to_sbm(&family)?),
            GraphonDoc::Constant { constant } => StepGraphon::constant(constant),
            GraphonDoc::Explicit {
                block_masses,
                values,
                lower_bound,
            } => StepGraphon::new(block_masses, values, lower_bound),
        }
    }
}

impl Serialize for StepGraphon {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ExplicitDoc {
            block_masses: self.block_masses.clone(),
            values: self.values(),
            lower_bound: self.lower_bound,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StepGraphon {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = GraphonDoc::deserialize(deserializer)?;
        StepGraphon::try_from(doc).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn sbm(k1: f64, p1: f64, p2: f64, q: f64) -> StepGraphon {
        SbmParams::new(k1, p1, p2, q).unwrap().to_graphon().unwrap()
    }

    fn family(tau: f64) -> StepGraphon {
        FamilyPoint::new([0.5, 0.5, 0.5], 0.5, tau)
            .unwrap()
            .to_sbm()
            .unwrap()
            .to_graphon()
            .unwrap()
    }

    #[test]
    fn sbm_construction() {
        let w = sbm(0.5, 0.8, 0.2, 0.5);
        assert_eq!(w.block_masses(), &[0.5, 0.5]);
        assert_eq!(w.values(), vec![vec![0.8, 0.5], vec![0.5, 0.2]]);
        assert_eq!(w.lower_bound(), 0.2);

        let c = sbm(0.5, 0.5, 0.5, 0.5);
        assert!(c.values().iter().flatten().all(|&v| v == 0.5));
        assert_eq!(c.kernel(0.1, 0.9), 0.5);

        assert!(SbmParams::new(0.3, 0.0, 0.5, 0.5).is_err());
        assert!(SbmParams::new(0.3, 0.5, 1.5, 0.5).is_err());
        assert!(SbmParams::new(1.0, 0.5, 0.5, 0.5).is_err());
    }

    #[test]
    fn family_points() {
        let p = FamilyPoint {
            base: [0.5; 3],
            k1: 0.5,
            tau: 0.1,
        }
        .to_sbm()
        .unwrap();
        assert_abs_diff_eq!(p.p1, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(p.p2, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(p.q, 0.3, epsilon = 1e-15);

        let p = FamilyPoint {
            base: [0.5; 3],
            k1: 0.5,
            tau: 0.0,
        }
        .to_sbm()
        .unwrap();
        assert_eq!((p.p1, p.p2, p.q), (0.5, 0.5, 0.5));

        assert!(FamilyPoint::new([0.5; 3], 0.5, 0.3).is_err());
    }

    #[test]
    fn degrees() {
        let c = StepGraphon::constant(0.3).unwrap();
        assert_eq!(c.degree_function(), vec![0.3]);
        assert_eq!(c.total_degree(), 0.3);

        let w = sbm(0.5, 0.8, 0.2, 0.5);
        let d = w.degree_function();
        assert_abs_diff_eq!(d[0], 0.65, epsilon = 1e-15);
        assert_abs_diff_eq!(d[1], 0.35, epsilon = 1e-15);
        assert_abs_diff_eq!(w.total_degree(), 0.5, epsilon = 1e-15);

        assert_eq!(sbm(0.25, 1.0, 1.0, 1.0).total_degree(), 1.0);

        for tau in [-0.2, -0.05, 0.0, 0.1, 0.24] {
            for d in family(tau).degree_function() {
                assert_abs_diff_eq!(d, 0.5, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn profiles() {
        let p = StepGraphon::constant(0.4).unwrap().normalized_degree_profile();
        assert_eq!(p.levels, vec![1.0]);
        assert_eq!(p.masses, vec![1.0]);

        let p = sbm(0.5, 0.8, 0.2, 0.5).normalized_degree_profile();
        assert_eq!(p.masses, vec![0.5, 0.5]);
        assert_abs_diff_eq!(p.levels[0], 0.7, epsilon = 1e-14);
        assert_abs_diff_eq!(p.levels[1], 1.3, epsilon = 1e-14);

        let reference = family(0.0).normalized_degree_profile();
        for tau in [-0.2, 0.15, 0.24] {
            assert_eq!(family(tau).normalized_degree_profile(), reference);
        }
    }

    #[test]
    fn delta_examples() {
        let w = sbm(0.5, 0.8, 0.2, 0.5);
        assert_eq!(delta_separation(&w, &w), 0.0);
        let c = StepGraphon::constant(0.5).unwrap();
        assert_abs_diff_eq!(delta_separation(&w, &c), 0.3, epsilon = 1e-14);
        assert_eq!(delta_separation(&family(-0.1), &family(0.2)), 0.0);
    }

    #[test]
    fn quantiles_follow_profile() {
        let p = sbm(0.5, 0.8, 0.2, 0.5).normalized_degree_profile();
        let q = p.quantiles(4);
        assert_abs_diff_eq!(q[0], 0.7, epsilon = 1e-14);
        assert_abs_diff_eq!(q[1], 0.7, epsilon = 1e-14);
        assert_abs_diff_eq!(q[2], 1.3, epsilon = 1e-14);
        assert_abs_diff_eq!(q[3], 1.3, epsilon = 1e-14);
        assert_eq!(p.level_at(0.25), q[0]);
        assert_eq!(p.level_at(1.0), q[3]);
    }

    #[test]
    fn rejects_malformed_graphons() {
        assert!(StepGraphon::new(vec![0.5, 0.4], vec![vec![0.5; 2]; 2], None).is_err());
        assert!(StepGraphon::new(vec![0.5, 0.5], vec![vec![0.5, 0.4], vec![0.5, 0.5]], None).is_err());
        assert!(StepGraphon::new(vec![1.0], vec![vec![0.5]], Some(0.6)).is_err());
        assert!(StepGraphon::new(vec![1.0], vec![vec![0.0]], None).is_err());
        assert!(StepGraphon::new(vec![0.5, 0.5], vec![vec![0.5]], None).is_err());
    }

    #[test]
    fn json_forms() {
        let w: StepGraphon = serde_json::from_str(r#"{"sbm": {"k1": 0.5, "p1": 0.8, "p2": 0.2, "q": 0.5}}"#).unwrap();
        assert_eq!(w, sbm(0.5, 0.8, 0.2, 0.5));

        let text = serde_json::to_string(&w).unwrap();
        assert_eq!(
            text,
            r#"{"block_masses":[0.5,0.5],"values":[[0.8,0.5],[0.5,0.2]],"lower_bound":0.2}"#
        );
        let back: StepGraphon = serde_json::from_str(&text).unwrap();
        assert_eq!(back, w);

        let f: StepGraphon =
            serde_json::from_str(r#"{"family": {"base": [0.5, 0.5, 0.5], "k1": 0.5, "tau": 0.1}}"#).unwrap();
        assert_eq!(f, family(0.1));

        assert!(serde_json::from_str::<StepGraphon>(r#"{"sbm": {"k1": 0.5, "p1": 0, "p2": 0.2, "q": 0.5}}"#).is_err());
    }

    fn arb_graphon() -> impl Strategy<Value = StepGraphon> {
        (1usize..=4)
            .prop_flat_map(|k| {
                (
                    prop::collection::vec(0.05f64..1.0, k),
                    prop::collection::vec(0.05f64..=1.0, k * k),
                )
            })
            .prop_map(|(raw, vals)| {
                let k = raw.len();
                let total: f64 = raw.iter().sum();
                let mut masses: Vec<f64> = raw.iter().map(|m| m / total).collect();
                let head: f64 = masses[..k - 1].iter().sum();
                masses[k - 1] = 1.0 - head;
                let values = (0..k)
                    .map(|a| (0..k).map(|b| vals[a.min(b) * k + a.max(b)]).collect())
                    .collect();
                StepGraphon::new(masses, values, None).unwrap()
            })
    }

    proptest! {
        #[test]
        fn degree_bounds(w in arb_graphon()) {
            let l = w.lower_bound();
            let total = w.total_degree();
            prop_assert!(total >= l - 1e-15 && total <= 1.0 + 1e-15);
            for d in w.degree_function() {
                prop_assert!(d >= l - 1e-15 && d <= 1.0 + 1e-15);
            }
        }

        #[test]
        fn profile_is_normalized(w in arb_graphon()) {
            let p = w.normalized_degree_profile();
            let mean: f64 = p.masses.iter().zip(&p.levels).map(|(m, l)| m * l).sum();
            prop_assert!((mean - 1.0).abs() <= 1e-12);
            prop_assert!(p.levels.windows(2).all(|pair| pair[0] <= pair[1]));
            prop_assert!((p.masses.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn delta_is_a_pseudometric(a in arb_graphon(), b in arb_graphon(), c in arb_graphon()) {
            let ab = delta_separation(&a, &b);
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - delta_separation(&b, &a)).abs() <= 1e-12);
            prop_assert!(delta_separation(&a, &a) <= 1e-12);
            prop_assert!(ab <= delta_separation(&a, &c) + delta_separation(&c, &b) + 1e-12);
        }

        #[test]
        fn delta_ignores_block_order(a in arb_graphon(), b in arb_graphon(), shift in 0usize..4) {
            let k = a.num_blocks();
            let perm: Vec<usize> = (0..k).map(|i| (i + shift) % k).collect();
            let permuted = a.permute_blocks(&perm).unwrap();
            prop_assert!((delta_separation(&a, &b) - delta_separation(&permuted, &b)).abs() <= 1e-12);
        }

        #[test]
        fn family_members_are_inseparable(k1 in 0.2f64..0.8, t0 in -1.0f64..1.0, t1 in -1.0f64..1.0) {
            let base = [0.5, 0.5, 0.5];
            // Scale tau into the admissible interval for this k1.
            let k2 = 1.0 - k1;
            let limit = 0.45 * (k1.min(k2 * k2 / k1).min(k2));
            let w0 = FamilyPoint::new(base, k1, t0 * limit).unwrap().to_sbm().unwrap().to_graphon().unwrap();
            let w1 = FamilyPoint::new(base, k1, t1 * limit).unwrap().to_sbm().unwrap().to_graphon().unwrap();
            prop_assert!(delta_separation(&w0, &w1) <= 1e-12);
        }
    }
}
