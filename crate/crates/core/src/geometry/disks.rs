//! Nested disk systems of round disks and their two validators.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{modulus, pulled_back_area, AnnulusSpec, Disk, GeometryError, TestMap};
use crate::scalar::Real;

/// `x ∈ D'' ⊆ D' ⊆ D`, labelled by `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct DiskTriple<T> {
    pub label: Complex<T>,
    pub inner: Disk<T>,
    pub mid: Disk<T>,
    pub outer: Disk<T>,
}

impl<T: Real> DiskTriple<T> {
    /// Checked constructor; deserialized triples are checked only by
    /// [`validate_m_nested`], which reports the failure as data.
    pub fn new(label: Complex<T>, inner: Disk<T>, mid: Disk<T>, outer: Disk<T>) -> Result<Self, GeometryError> {
        let t = Self { label, inner, mid, outer };
        if let Some(reason) = t.inclusion_failure() {
            return Err(GeometryError::InvalidDisk(reason));
        }
        Ok(t)
    }

    fn inclusion_failure(&self) -> Option<String> {
        for d in [&self.inner, &self.mid, &self.outer] {
            if let Err(e) = d.check() {
                return Some(e.to_string());
            }
        }
        if !self.inner.contains_point(self.label) {
            return Some("label outside D''".into());
        }
        if !self.inner.is_within(&self.mid) {
            return Some("D'' not inside D'".into());
        }
        if !self.mid.is_within(&self.outer) {
            return Some("D' not inside D".into());
        }
        None
    }

    /// `mod(D ∖ closure D')`, zero when `D'` is not compactly inside `D`.
    pub fn gap_modulus(&self) -> T {
        if !self.mid.is_compactly_within(&self.outer) {
            return T::zero();
        }
        AnnulusSpec::circle_pair(self.outer, self.mid).and_then(|a| modulus(&a)).unwrap_or(T::zero())
    }
}

/// Triples whose outer disks are pairwise nested or disjoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct NestedDiskSystem<T> {
    triples: Vec<DiskTriple<T>>,
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for NestedDiskSystem<T> {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let triples = Vec::<DiskTriple<T>>::deserialize(de)?;
        Self::new(triples).map_err(serde::de::Error::custom)
    }
}

impl<T: Real> NestedDiskSystem<T> {
    pub fn new(triples: Vec<DiskTriple<T>>) -> Result<Self, GeometryError> {
        for (i, t) in triples.iter().enumerate() {
            for d in [&t.inner, &t.mid, &t.outer] {
                d.check()?;
            }
            if !t.outer.contains_point(t.label) {
                return Err(GeometryError::InvalidSystem(format!("label {} lies outside its disk", t.label)));
            }
            for s in &triples[..i] {
                if s.label == t.label {
                    return Err(GeometryError::InvalidSystem(format!("duplicate label {}", t.label)));
                }
                let (a, b) = (&s.outer, &t.outer);
                let nested = (a.is_within(b) || b.is_within(a)) && !a.same_as(b);
                if a.meets(b) && !nested {
                    return Err(GeometryError::InvalidSystem(format!(
                        "disks of {} and {} overlap without nesting",
                        s.label, t.label
                    )));
                }
            }
        }
        Ok(Self { triples })
    }

    pub fn triples(&self) -> &[DiskTriple<T>] {
        &self.triples
    }

    /// Indices `y ≠ x` with `D_y ⊆ D_x`.
    fn contained_in(&self, x: usize) -> Vec<usize> {
        let ox = &self.triples[x].outer;
        (0..self.triples.len()).filter(|&y| y != x && self.triples[y].outer.is_within(ox)).collect()
    }

    /// The disks making up `V_x`: maximal among those strictly inside `D_x`.
    /// They are pairwise disjoint, so areas add.
    fn v_parts(&self, x: usize) -> Vec<usize> {
        let inside = self.contained_in(x);
        inside
            .iter()
            .copied()
            .filter(|&y| !inside.iter().any(|&z| z != y && self.triples[y].outer.is_within(&self.triples[z].outer)))
            .collect()
    }

    /// Smallest disk containing every outer disk.
    pub fn hull(&self) -> Option<Disk<T>> {
        let first = self.triples.first()?;
        let mut lo = first.outer.c;
        let mut hi = first.outer.c;
        for t in &self.triples {
            let o = t.outer;
            lo = Complex::new(lo.re.min(o.c.re - o.r), lo.im.min(o.c.im - o.r));
            hi = Complex::new(hi.re.max(o.c.re + o.r), hi.im.max(o.c.im + o.r));
        }
        let c = (lo + hi) / (T::one() + T::one());
        let r = self.triples.iter().fold(T::zero(), |m, t| m.max((t.outer.c - c).norm() + t.outer.r));
        Some(Disk { c, r })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum NestedViolation<T> {
    /// `x ∈ D'' ⊆ D' ⊆ D` fails.
    Inclusion { label: Complex<T>, reason: String },
    /// `D_y ⊆ D_x` meets `D''_x` without lying in `D'_x`.
    Containment { label: Complex<T>, inner_label: Complex<T> },
    /// `mod(D_x ∖ closure D'_x) < m`.
    Modulus { label: Complex<T>, modulus: T },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MNestedReport<T> {
    pub m: T,
    pub passed: bool,
    /// `None` for an empty system.
    pub min_modulus: Option<T>,
    pub min_modulus_label: Option<Complex<T>>,
    pub moduli: Vec<T>,
    pub violations: Vec<NestedViolation<T>>,
}

pub fn validate_m_nested<T: Real>(system: &NestedDiskSystem<T>, m: T) -> MNestedReport<T> {
    let ts = system.triples();
    let mut violations = Vec::new();
    for t in ts {
        if let Some(reason) = t.inclusion_failure() {
            violations.push(NestedViolation::Inclusion { label: t.label, reason });
        }
    }
    for (x, tx) in ts.iter().enumerate() {
        for y in system.contained_in(x) {
            let dy = &ts[y].outer;
            if dy.meets(&tx.inner) && !dy.is_within(&tx.mid) {
                violations.push(NestedViolation::Containment { label: tx.label, inner_label: ts[y].label });
            }
        }
    }
    let moduli: Vec<T> = ts.iter().map(DiskTriple::gap_modulus).collect();
    let mut min: Option<(T, Complex<T>)> = None;
    for (t, &md) in ts.iter().zip(&moduli) {
        if min.map_or(true, |(v, _)| md < v) {
            min = Some((md, t.label));
        }
        if md < m {
            violations.push(NestedViolation::Modulus { label: t.label, modulus: md });
        }
    }
    MNestedReport {
        m,
        passed: violations.is_empty(),
        min_modulus: min.map(|p| p.0),
        min_modulus_label: min.map(|p| p.1),
        moduli,
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelRatio<T> {
    pub label: Complex<T>,
    /// Number of disks making up `V_x`.
    pub parts: usize,
    /// `max_h Area(ρ*, h(V_x)) / Area(ρ*, h(D_x))`.
    pub worst_ratio: T,
    /// Index of the map attaining it.
    pub worst_map: Option<usize>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatteredReport<T> {
    pub lambda: T,
    pub maps: usize,
    pub passed: bool,
    pub labels: Vec<LabelRatio<T>>,
}

/// Checks `Area(ρ*, h(V_x)) ≤ λ Area(ρ*, h(D_x))` for every label and every
/// supplied map. The maps are samples of the univalent family, so a pass
/// is evidence rather than proof.
pub fn validate_scattered<T: Real>(
    system: &NestedDiskSystem<T>,
    maps: &[TestMap<T>],
    lambda: T,
) -> Result<ScatteredReport<T>, GeometryError> {
    let outers: Vec<Disk<T>> = system.triples().iter().map(|t| t.outer).collect();
    for (index, h) in maps.iter().enumerate() {
        h.admissible(&outers).map_err(|reason| GeometryError::MapHitsOrigin { index, reason })?;
    }
    let mut labels = Vec::new();
    for (x, tx) in system.triples().iter().enumerate() {
        let parts = system.v_parts(x);
        let mut worst = T::zero();
        let mut worst_map = None;
        if !parts.is_empty() {
            for (k, h) in maps.iter().enumerate() {
                let whole = pulled_back_area(h, &tx.outer);
                let v = parts.iter().fold(T::zero(), |s, &y| s + pulled_back_area(h, &system.triples()[y].outer));
                let ratio = v / whole;
                if worst_map.is_none() || ratio > worst {
                    worst = ratio;
                    worst_map = Some(k);
                }
            }
        }
        labels.push(LabelRatio { label: tx.label, parts: parts.len(), worst_ratio: worst, worst_map, passed: worst <= lambda });
    }
    Ok(ScatteredReport { lambda, maps: maps.len(), passed: labels.iter().all(|l| l.passed), labels })
}
