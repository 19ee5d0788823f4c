use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use super::{blocks_unlinked, validate_portrait, Angle, CriticalPortrait, PortraitBlock, PortraitError};

/// Caps on the brute-force search.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationLimits {
    pub max_portraits: usize,
    pub max_nodes: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        Self { max_portraits: 200_000, max_nodes: 20_000_000 }
    }
}

/// All valid degree-`d` portraits whose angles have denominator ≤ `max_den`,
/// in canonical order.
pub fn enumerate_portraits(
    d: u32,
    max_den: u64,
    limits: EnumerationLimits,
) -> Result<Vec<CriticalPortrait>, PortraitError> {
    if d < 2 {
        return Err(PortraitError::Degree(d));
    }
    let max_den = max_den.max(1);

    // Fibres of m_d restricted to the denominator bound.
    let mut fibres: BTreeMap<Angle, Vec<Angle>> = BTreeMap::new();
    for den in 1..=max_den {
        for num in 0..den {
            if num_integer::gcd(num, den) != 1 && !(num == 0 && den == 1) {
                continue;
            }
            let t = Angle::frac(num, den);
            fibres.entry(t.times(d)).or_default().push(t);
        }
    }

    // Candidate blocks: subsets of one fibre with 2..=d elements.
    let budget = d as usize - 1;
    let mut candidates: Vec<PortraitBlock> = Vec::new();
    for fibre in fibres.values_mut() {
        fibre.sort();
        let max_size = fibre.len().min(budget + 1);
        for size in 2..=max_size {
            for_each_subset(fibre, size, &mut |s| {
                candidates.push(PortraitBlock::new(s.to_vec()).expect("distinct sorted angles"));
            });
        }
        if candidates.len() > limits.max_nodes {
            return Err(PortraitError::ResourceCap(limits.max_nodes));
        }
    }
    candidates.sort_by(|a, b| a.smallest().cmp(b.smallest()).then_with(|| a.angles().cmp(b.angles())));

    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    let mut nodes = 0usize;
    search(&candidates, 0, budget, &mut chosen, &mut out, d, &mut nodes, &limits)?;
    out.sort_by(|a, b| compare_portraits(a, b));
    out.dedup();
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn search(
    cands: &[PortraitBlock],
    start: usize,
    remaining: usize,
    chosen: &mut Vec<usize>,
    out: &mut Vec<CriticalPortrait>,
    d: u32,
    nodes: &mut usize,
    limits: &EnumerationLimits,
) -> Result<(), PortraitError> {
    *nodes += 1;
    if *nodes > limits.max_nodes {
        return Err(PortraitError::ResourceCap(limits.max_nodes));
    }
    if remaining == 0 {
        let blocks = chosen.iter().map(|&i| cands[i].clone()).collect();
        let p = CriticalPortrait::new(d, blocks)?;
        debug_assert!(validate_portrait(&p).valid);
        out.push(p);
        if out.len() > limits.max_portraits {
            return Err(PortraitError::ResourceCap(limits.max_portraits));
        }
        return Ok(());
    }
    for i in start..cands.len() {
        let b = &cands[i];
        if b.multiplicity() > remaining {
            continue;
        }
        let compatible = chosen
            .iter()
            .all(|&j| matches!(blocks_unlinked(&cands[j], b), Ok(true)));
        if !compatible {
            continue;
        }
        chosen.push(i);
        search(cands, i + 1, remaining - b.multiplicity(), chosen, out, d, nodes, limits)?;
        chosen.pop();
    }
    Ok(())
}

fn for_each_subset(items: &[Angle], size: usize, f: &mut impl FnMut(&[Angle])) {
    fn rec(items: &[Angle], size: usize, start: usize, acc: &mut Vec<Angle>, f: &mut impl FnMut(&[Angle])) {
        if acc.len() == size {
            f(acc);
            return;
        }
        for i in start..items.len() {
            if items.len() - i < size - acc.len() {
                break;
            }
            acc.push(items[i].clone());
            rec(items, size, i + 1, acc, f);
            acc.pop();
        }
    }
    rec(items, size, 0, &mut Vec::new(), f);
}

fn compare_portraits(a: &CriticalPortrait, b: &CriticalPortrait) -> std::cmp::Ordering {
    let key = |p: &CriticalPortrait| -> Vec<Vec<(u64, u64)>> {
        p.blocks()
            .iter()
            .map(|bl| {
                bl.angles()
                    .iter()
                    .map(|t| (t.num().to_u64().unwrap_or(u64::MAX), t.den().to_u64().unwrap_or(u64::MAX)))
                    .collect()
            })
            .collect()
    };
    a.blocks()
        .iter()
        .map(|b| b.angles().to_vec())
        .cmp(b.blocks().iter().map(|b| b.angles().to_vec()))
        .then_with(|| key(a).cmp(&key(b)))
}
