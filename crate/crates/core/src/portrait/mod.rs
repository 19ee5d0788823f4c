//! Exact angle arithmetic on ℝ/ℤ and critical portraits.
//!
//! A critical portrait of degree `d` is a family of finite angle sets
//! ("blocks") such that each block collapses to one angle under `θ ↦ dθ`,
//! distinct blocks are unlinked on the circle, and the block sizes account
//! for the `d − 1` critical points counted with multiplicity.

mod angle;
mod enumerate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use angle::{Angle, OrbitSummary};
pub use enumerate::{enumerate_portraits, EnumerationLimits};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PortraitError {
    #[error("angle denominator must be positive")]
    ZeroDenominator,
    #[error("cannot parse angle `{0}`")]
    Parse(String),
    #[error("a portrait block needs at least two distinct angles, got {0}")]
    BlockTooSmall(usize),
    #[error("angle {0} appears twice in one block")]
    DuplicateAngle(Angle),
    #[error("blocks share angle {0}; linkage is undefined")]
    SharedAngle(Angle),
    #[error("degree must be at least 2, got {0}")]
    Degree(u32),
    #[error("portrait is not valid: {0}")]
    Invalid(String),
    #[error("enumeration exceeded its cap of {0}")]
    ResourceCap(usize),
}

/// Strictly increasing set of at least two angles.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct PortraitBlock {
    angles: Vec<Angle>,
}

impl PortraitBlock {
    pub fn new(mut angles: Vec<Angle>) -> Result<Self, PortraitError> {
        angles.sort();
        if let Some(w) = angles.windows(2).find(|w| w[0] == w[1]) {
            return Err(PortraitError::DuplicateAngle(w[0].clone()));
        }
        if angles.len() < 2 {
            return Err(PortraitError::BlockTooSmall(angles.len()));
        }
        Ok(Self { angles })
    }

    pub fn angles(&self) -> &[Angle] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Number of critical points (with multiplicity) the block accounts for.
    pub fn multiplicity(&self) -> usize {
        self.angles.len() - 1
    }

    pub fn smallest(&self) -> &Angle {
        &self.angles[0]
    }

    fn arc_of(&self, t: &Angle) -> Option<usize> {
        match self.angles.binary_search(t) {
            Ok(_) => None,
            Err(0) => Some(self.angles.len() - 1),
            Err(i) => Some(i - 1),
        }
    }
}

impl<'de> Deserialize<'de> for PortraitBlock {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let angles = Vec::<Angle>::deserialize(d)?;
        PortraitBlock::new(angles).map_err(serde::de::Error::custom)
    }
}

/// True when all of `b` lies in one complementary arc of `a`.
pub fn blocks_unlinked(a: &PortraitBlock, b: &PortraitBlock) -> Result<bool, PortraitError> {
    let mut arc = None;
    let mut same = true;
    for t in b.angles() {
        let k = a.arc_of(t).ok_or_else(|| PortraitError::SharedAngle(t.clone()))?;
        match arc {
            None => arc = Some(k),
            Some(prev) if prev != k => same = false,
            _ => {}
        }
    }
    Ok(same)
}

/// Degree plus blocks, kept in canonical order (blocks by smallest angle).
///
/// The type does not enforce (CP1)–(CP3); use [`validate_portrait`] or
/// [`CriticalPortrait::validated`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CriticalPortrait {
    degree: u32,
    blocks: Vec<PortraitBlock>,
}

impl CriticalPortrait {
    pub fn new(degree: u32, mut blocks: Vec<PortraitBlock>) -> Result<Self, PortraitError> {
        if degree < 2 {
            return Err(PortraitError::Degree(degree));
        }
        blocks.sort_by(|x, y| x.smallest().cmp(y.smallest()));
        Ok(Self { degree, blocks })
    }

    /// Builds from nested `(num, den)` pairs; convenient in tests and examples.
    pub fn from_fracs(degree: u32, blocks: &[&[(u64, u64)]]) -> Result<Self, PortraitError> {
        let blocks = blocks
            .iter()
            .map(|b| PortraitBlock::new(b.iter().map(|&(n, d)| Angle::frac(n, d)).collect()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(degree, blocks)
    }

    pub fn validated(self) -> Result<Self, PortraitError> {
        let report = validate_portrait(&self);
        if report.valid {
            Ok(self)
        } else {
            Err(PortraitError::Invalid(report.summary()))
        }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn blocks(&self) -> &[PortraitBlock] {
        &self.blocks
    }

    /// Common image `m_d(Θ_j)` of block `j` (its smallest angle's image).
    pub fn block_image(&self, j: usize) -> Angle {
        self.blocks[j].smallest().times(self.degree)
    }

    /// Complex-conjugate portrait `θ ↦ −θ`.
    pub fn conjugate(&self) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|b| PortraitBlock::new(b.angles().iter().map(Angle::negated).collect()).expect("negation is injective"))
            .collect();
        Self::new(self.degree, blocks).expect("degree unchanged")
    }

    /// Largest denominator among all angles.
    pub fn max_den(&self) -> num_bigint::BigUint {
        self.blocks
            .iter()
            .flat_map(|b| b.angles())
            .map(|a| a.den().clone())
            .max()
            .unwrap_or_else(|| num_bigint::BigUint::from(1u32))
    }
}

/// `{{1/12,7/12}}` style, blocks in canonical order.
impl std::fmt::Display for CriticalPortrait {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (j, b) in self.blocks.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{")?;
            for (k, a) in b.angles().iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}

impl<'de> Deserialize<'de> for CriticalPortrait {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            degree: u32,
            blocks: Vec<PortraitBlock>,
        }
        let raw = Raw::deserialize(d)?;
        CriticalPortrait::new(raw.degree, raw.blocks).map_err(serde::de::Error::custom)
    }
}

/// Outcome of one portrait axiom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub passed: bool,
    /// Indices of offending blocks (one for CP1, a pair for CP2, all for CP3).
    pub offending: Vec<usize>,
    pub detail: Option<String>,
}

impl PropertyCheck {
    fn pass() -> Self {
        Self { passed: true, offending: Vec::new(), detail: None }
    }

    fn fail(offending: Vec<usize>, detail: String) -> Self {
        Self { passed: false, offending, detail: Some(detail) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub degree: u32,
    pub valid: bool,
    pub cp1: PropertyCheck,
    pub cp2: PropertyCheck,
    pub cp3: PropertyCheck,
}

impl ValidationReport {
    pub fn summary(&self) -> String {
        [("CP1", &self.cp1), ("CP2", &self.cp2), ("CP3", &self.cp3)]
            .iter()
            .filter(|(_, c)| !c.passed)
            .map(|(n, c)| format!("{n}: {}", c.detail.clone().unwrap_or_default()))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Checks (CP1)–(CP3). Failures are reported, never raised.
pub fn validate_portrait(p: &CriticalPortrait) -> ValidationReport {
    let d = p.degree();
    let mut cp1 = PropertyCheck::pass();
    for (j, block) in p.blocks().iter().enumerate() {
        let first = block.smallest().times(d);
        if let Some(bad) = block.angles().iter().find(|t| t.times(d) != first) {
            cp1 = PropertyCheck::fail(
                vec![j],
                format!("block {j}: {} ↦ {first} but {bad} ↦ {}", block.smallest(), bad.times(d)),
            );
            break;
        }
    }

    let mut cp2 = PropertyCheck::pass();
    'pairs: for i in 0..p.blocks().len() {
        for j in i + 1..p.blocks().len() {
            match blocks_unlinked(&p.blocks()[i], &p.blocks()[j]) {
                Ok(true) => {}
                Ok(false) => {
                    cp2 = PropertyCheck::fail(vec![i, j], format!("blocks {i} and {j} are linked"));
                    break 'pairs;
                }
                Err(e) => {
                    cp2 = PropertyCheck::fail(vec![i, j], format!("blocks {i} and {j}: {e}"));
                    break 'pairs;
                }
            }
        }
    }

    let total: usize = p.blocks().iter().map(PortraitBlock::multiplicity).sum();
    let cp3 = if total == d as usize - 1 {
        PropertyCheck::pass()
    } else {
        PropertyCheck::fail(
            (0..p.blocks().len()).collect(),
            format!("Σ(#Θ_j − 1) = {total}, expected {}", d - 1),
        )
    };

    ValidationReport { degree: d, valid: cp1.passed && cp2.passed && cp3.passed, cp1, cp2, cp3 }
}

/// Degree-2 portrait `{θ/2, (θ+1)/2}`.
pub fn quadratic_portrait(theta: &Angle) -> CriticalPortrait {
    let block = PortraitBlock::new(vec![theta.preimage(2, 0), theta.preimage(2, 1)]).expect("halves differ by 1/2");
    CriticalPortrait::new(2, vec![block]).expect("degree 2")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortraitClass {
    StrictlyPreperiodic,
    ContainsPeriodic,
}

/// `ContainsPeriodic` iff some angle of some block is periodic under `m_d`.
pub fn classify_portrait(p: &CriticalPortrait) -> Result<PortraitClass, PortraitError> {
    let report = validate_portrait(p);
    if !report.valid {
        return Err(PortraitError::Invalid(report.summary()));
    }
    let periodic = p
        .blocks()
        .iter()
        .flat_map(|b| b.angles())
        .any(|t| t.orbit(p.degree()).is_periodic());
    Ok(if periodic { PortraitClass::ContainsPeriodic } else { PortraitClass::StrictlyPreperiodic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn block(fr: &[(u64, u64)]) -> PortraitBlock {
        PortraitBlock::new(fr.iter().map(|&(n, d)| Angle::frac(n, d)).collect()).unwrap()
    }

    #[test]
    fn unlinked_examples() {
        let a = block(&[(1, 12), (7, 12)]);
        assert!(!blocks_unlinked(&a, &block(&[(1, 4), (3, 4)])).unwrap());
        assert!(blocks_unlinked(&a, &block(&[(1, 5), (2, 5)])).unwrap());
        let c = block(&[(0, 1), (1, 3), (2, 3)]);
        assert!(blocks_unlinked(&c, &block(&[(1, 9), (2, 9)])).unwrap());
        assert!(matches!(
            blocks_unlinked(&a, &block(&[(1, 12), (1, 2)])),
            Err(PortraitError::SharedAngle(_))
        ));
    }

    #[test]
    fn unlinked_across_zero() {
        let a = block(&[(1, 3), (2, 3)]);
        assert!(blocks_unlinked(&a, &block(&[(5, 6), (1, 6)])).unwrap());
        assert!(!blocks_unlinked(&a, &block(&[(1, 2), (1, 6)])).unwrap());
    }

    #[test]
    fn validation_examples() {
        let p = CriticalPortrait::from_fracs(2, &[&[(1, 12), (7, 12)]]).unwrap();
        assert!(validate_portrait(&p).valid);
        let p = CriticalPortrait::from_fracs(3, &[&[(0, 1), (1, 3), (2, 3)]]).unwrap();
        assert!(validate_portrait(&p).valid);
        let p = CriticalPortrait::from_fracs(3, &[&[(0, 1), (1, 2)]]).unwrap();
        let r = validate_portrait(&p);
        assert!(!r.valid);
        assert!(!r.cp1.passed);
        assert!(!r.cp3.passed);
    }

    #[test]
    fn linked_pair_fails_cp2() {
        let p = CriticalPortrait::from_fracs(3, &[&[(0, 1), (1, 3)], &[(1, 6), (1, 2)]]).unwrap();
        let r = validate_portrait(&p);
        assert!(r.cp1.passed);
        assert!(!r.cp2.passed);
        assert_eq!(r.cp2.offending, vec![0, 1]);
    }

    #[test]
    fn two_block_cubic_is_valid() {
        let p = CriticalPortrait::from_fracs(3, &[&[(1, 6), (1, 2)], &[(0, 1), (2, 3)]]).unwrap();
        assert!(validate_portrait(&p).valid);
        assert_eq!(p.blocks()[0].smallest(), &Angle::zero());
    }

    #[test]
    fn quadratic_examples() {
        assert_eq!(
            quadratic_portrait(&Angle::frac(1, 6)),
            CriticalPortrait::from_fracs(2, &[&[(1, 12), (7, 12)]]).unwrap()
        );
        assert_eq!(
            quadratic_portrait(&Angle::zero()),
            CriticalPortrait::from_fracs(2, &[&[(0, 1), (1, 2)]]).unwrap()
        );
        assert_eq!(
            quadratic_portrait(&Angle::frac(1, 2)),
            CriticalPortrait::from_fracs(2, &[&[(1, 4), (3, 4)]]).unwrap()
        );
    }

    #[test]
    fn classification_examples() {
        let c = |t: (u64, u64)| classify_portrait(&quadratic_portrait(&Angle::frac(t.0, t.1))).unwrap();
        assert_eq!(c((1, 6)), PortraitClass::StrictlyPreperiodic);
        assert_eq!(c((0, 1)), PortraitClass::ContainsPeriodic);
        assert_eq!(c((1, 2)), PortraitClass::StrictlyPreperiodic);
        let bad = CriticalPortrait::from_fracs(3, &[&[(0, 1), (1, 2)]]).unwrap();
        assert!(classify_portrait(&bad).is_err());
    }

    #[test]
    fn portrait_json_shape() {
        let p = CriticalPortrait::from_fracs(2, &[&[(1, 12), (7, 12)]]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"degree":2,"blocks":[[{"num":1,"den":12},{"num":7,"den":12}]]}"#);
        let back: CriticalPortrait = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    fn small_angle() -> impl Strategy<Value = Angle> {
        (1u64..200).prop_flat_map(|den| (0..den).prop_map(move |n| Angle::frac(n, den)))
    }

    proptest! {
        #[test]
        fn orbit_length_bounded_by_denominator(t in small_angle(), d in 2u32..6) {
            let o = t.orbit(d);
            let den: u64 = num_traits::ToPrimitive::to_u64(t.den()).unwrap();
            prop_assert!((o.preperiod + o.period) as u64 <= den);
            for k in 0..o.orbit.len() - 1 {
                prop_assert_eq!(o.orbit[k].times(d), o.orbit[k + 1].clone());
            }
            prop_assert_eq!(o.orbit.last().unwrap().times(d), o.orbit[o.preperiod].clone());
        }

        #[test]
        fn quadratic_portrait_always_valid(t in small_angle()) {
            prop_assert!(validate_portrait(&quadratic_portrait(&t)).valid);
        }

        #[test]
        fn unlinked_is_symmetric(
            xs in proptest::collection::btree_set(0u64..60, 4..8)
        ) {
            let v: Vec<Angle> = xs.into_iter().map(|n| Angle::frac(n, 60)).collect();
            let mid = v.len() / 2;
            let a = PortraitBlock::new(v[..mid].to_vec()).unwrap();
            let b = PortraitBlock::new(v[mid..].to_vec()).unwrap();
            prop_assert_eq!(blocks_unlinked(&a, &b).unwrap(), blocks_unlinked(&b, &a).unwrap());
        }
    }
}
