//! Directions determined by the graph of a function on F_{q0}.
//!
//! The directions of f are the slopes (f(x) - f(y))/(x - y) over all pairs
//! x ≠ y. Writing N for their number and r for the maximal p-power such that
//! every line with a determined direction through a graph point meets the
//! graph in a multiple of r points, (N, r) falls into a trichotomy: r = 1
//! with N ≥ (q0+3)/2, F_r a subfield with q0/r + 1 ≤ N ≤ (q0-1)/(r-1), or
//! r = q0 with N = 1. For r > 2 the graph is additionally F_r-linear.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::field::{Fe, FieldTower};
use crate::linalg::{FqSubspace, FqVector};
use crate::linset::build_linear_set;

/// A function f: F_{q0} -> F_{q0} as a full value table indexed by encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphMap {
    pub table: Vec<Fe>,
}

impl GraphMap {
    pub fn from_table(tw: &FieldTower, table: Vec<Fe>) -> Result<GraphMap> {
        if table.len() as u64 != tw.order() {
            return Err(Error::AmbientMismatch(tw.order() as usize, table.len()));
        }
        Ok(GraphMap { table })
    }

    /// The F_q-linear map sending the power-basis element θ^j to images[j].
    pub fn from_linear_images(tw: &FieldTower, images: &[Fe]) -> Result<GraphMap> {
        if images.len() != tw.h() as usize {
            return Err(Error::AmbientMismatch(tw.h() as usize, images.len()));
        }
        let table = (0..tw.order() as u32)
            .map(|x| {
                let digits = tw.flatten_elem(Fe(x));
                let mut acc = Fe::ZERO;
                for (&d, &img) in digits.iter().zip(images) {
                    if d != 0 {
                        acc = tw.add(acc, tw.mul(tw.sub_elem(d), img));
                    }
                }
                acc
            })
            .collect();
        Ok(GraphMap { table })
    }

    /// Decode idx < order^h into a linear map: digit j picks the image of θ^j.
    pub fn from_linear_index(tw: &FieldTower, mut idx: u64) -> Result<GraphMap> {
        let images: Vec<Fe> = (0..tw.h())
            .map(|_| {
                let v = Fe((idx % tw.order()) as u32);
                idx /= tw.order();
                v
            })
            .collect();
        GraphMap::from_linear_images(tw, &images)
    }

    pub fn apply(&self, x: Fe) -> Fe {
        self.table[x.0 as usize]
    }

    pub fn is_additive(&self, tw: &FieldTower) -> bool {
        let n = tw.order() as u32;
        (0..n).all(|x| (0..n).all(|y| self.apply(tw.add(Fe(x), Fe(y))) == tw.add(self.apply(Fe(x)), self.apply(Fe(y)))))
    }

    /// The graph {(x, f(x))} as an F_q-subspace of F_{q0}^2; requires f
    /// F_q-linear (additive with f(0) = 0 and stable under F_q-scaling).
    pub fn graph_subspace(&self, tw: &FieldTower) -> Result<FqSubspace> {
        let vecs: Vec<FqVector> = (0..tw.order() as u32)
            .map(|x| FqVector::new(vec![Fe(x), self.apply(Fe(x))]))
            .collect();
        let sub = FqSubspace::from_vectors(tw, 2, &vecs)?;
        // linearity of f is exactly "the graph has q0 = q^rank vectors"
        if tw.q().pow(sub.rank() as u32) != tw.order() {
            return Err(Error::InfeasibleScope("graph is not an F_q-subspace".into()));
        }
        Ok(sub)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionCount {
    /// Number of determined directions.
    pub n: u64,
    /// Maximal r = p^s dividing every relevant line count.
    pub r: u64,
    pub directions: BTreeSet<u32>,
}

/// Count directions over all pairs, then find r from per-line graph counts.
pub fn count_directions(tw: &FieldTower, f: &GraphMap) -> DirectionCount {
    let n = tw.order() as u32;
    let mut directions = BTreeSet::new();
    for x in 0..n {
        for y in 0..x {
            let dy = tw.sub_fe(f.apply(Fe(x)), f.apply(Fe(y)));
            let dx = tw.sub_fe(Fe(x), Fe(y));
            directions.insert(tw.div(dy, dx).0);
        }
    }
    // line through (x, f(x)) with slope d meets the graph in
    // |{t : f(x+t) - f(x) = d t}| points; r divides every such count
    let mut min_val = u32::MAX;
    for &d in &directions {
        for x in 0..n {
            let fx = f.apply(Fe(x));
            let mut count = 0u64;
            for t in 0..n {
                let lhs = tw.sub_fe(f.apply(tw.add(Fe(x), Fe(t))), fx);
                if lhs == tw.mul(Fe(d), Fe(t)) {
                    count += 1;
                }
            }
            let mut val = 0u32;
            while count % tw.p() as u64 == 0 {
                count /= tw.p() as u64;
                val += 1;
            }
            min_val = min_val.min(val);
            if min_val == 0 {
                break;
            }
        }
        if min_val == 0 {
            break;
        }
    }
    let r = (tw.p() as u64).pow(min_val.min(tw.e() * tw.h()));
    DirectionCount { n: directions.len() as u64, r, directions }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrichotomyCase {
    /// r = 1 and (q0+3)/2 ≤ N ≤ q0+1.
    Generic,
    /// F_r is a proper subfield and q0/r + 1 ≤ N ≤ (q0-1)/(r-1).
    Subfield,
    /// r = q0 and N = 1: f is a line.
    Affine,
}

#[derive(Debug, Clone)]
pub struct TrichotomyReport {
    pub count: DirectionCount,
    pub case: TrichotomyCase,
    /// Set when 2 < r < q0: the translated graph was verified F_r-linear.
    pub fr_linearity_verified: bool,
}

fn log_p(p: u32, r: u64) -> Option<u32> {
    let mut s = 0;
    let mut acc = 1u64;
    while acc < r {
        acc *= p as u64;
        s += 1;
    }
    (acc == r).then_some(s)
}

/// Classify (N, r), verify the case bounds, and for 2 < r < q0 verify that
/// the graph (translated to pass through the origin) is F_r-linear.
pub fn check_trichotomy(tw: &FieldTower, f: &GraphMap) -> Result<TrichotomyReport> {
    let count = count_directions(tw, f);
    let q0 = tw.order();
    let (n, r) = (count.n, count.r);
    let case = if r == q0 {
        if n != 1 {
            return Err(Error::InfeasibleScope(format!("r = q0 = {q0} but N = {n}")));
        }
        TrichotomyCase::Affine
    } else if r == 1 {
        // (q0+3)/2 rounds up: N is an integer
        let lo = (q0 + 3).div_ceil(2);
        if !(n >= lo && n <= q0 + 1) {
            return Err(Error::InfeasibleScope(format!("r = 1 but N = {n} outside [{lo}, {}]", q0 + 1)));
        }
        TrichotomyCase::Generic
    } else {
        let s_exp = log_p(tw.p(), r)
            .filter(|s| (tw.e() * tw.h()) % s == 0)
            .ok_or_else(|| Error::InfeasibleScope(format!("r = {r} is not a subfield order of {q0}")))?;
        let _ = s_exp;
        if !(n >= q0 / r + 1 && n <= (q0 - 1) / (r - 1)) {
            return Err(Error::InfeasibleScope(format!(
                "N = {n} outside [{}, {}] for r = {r}",
                q0 / r + 1,
                (q0 - 1) / (r - 1)
            )));
        }
        TrichotomyCase::Subfield
    };
    let mut fr_linearity_verified = false;
    if r > 2 && r < q0 {
        let s_exp = log_p(tw.p(), r).unwrap();
        let f0 = f.apply(Fe::ZERO);
        let g = |x: Fe| tw.sub_fe(f.apply(x), f0);
        let gamma = (0..q0 as u32)
            .map(Fe)
            .find(|&x| tw.frob_p_iter(x, s_exp) == x && tw.degree_over_p(x) == s_exp)
            .ok_or_else(|| Error::InfeasibleScope(format!("no generator of the order-{r} subfield")))?;
        for x in 0..q0 as u32 {
            for y in 0..q0 as u32 {
                if g(tw.add(Fe(x), Fe(y))) != tw.add(g(Fe(x)), g(Fe(y))) {
                    return Err(Error::InfeasibleScope(format!("r = {r} > 2 but the graph is not additive")));
                }
            }
            if g(tw.mul(gamma, Fe(x))) != tw.mul(gamma, g(Fe(x))) {
                return Err(Error::InfeasibleScope(format!("r = {r} > 2 but the graph is not F_{r}-homogeneous")));
            }
        }
        fr_linearity_verified = true;
    }
    Ok(TrichotomyReport { count, case, fr_linearity_verified })
}

/// For F_q-linear f the directions are exactly the points of the linear set
/// of the graph subspace; checks |directions| = |L_graph|.
pub fn directions_match_linear_set(tw: &FieldTower, f: &GraphMap) -> Result<bool> {
    let count = count_directions(tw, f);
    let u = f.graph_subspace(tw)?;
    if u.rank() == 0 {
        return Ok(count.n == 1 && count.directions.contains(&0));
    }
    let ls = build_linear_set(tw, &u)?;
    Ok(ls.size() as u64 == count.n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_map() {
        let tw = FieldTower::new(2, 1, 4, None).unwrap();
        let f = GraphMap::from_table(&tw, (0..16).map(Fe).collect()).unwrap();
        let c = count_directions(&tw, &f);
        assert_eq!((c.n, c.r), (1, 16));
        let rep = check_trichotomy(&tw, &f).unwrap();
        assert_eq!(rep.case, TrichotomyCase::Affine);
    }

    #[test]
    fn constant_map() {
        let tw = FieldTower::new(2, 1, 3, None).unwrap();
        let f = GraphMap::from_table(&tw, vec![Fe(5); 8]).unwrap();
        let c = count_directions(&tw, &f);
        assert_eq!((c.n, c.r), (1, 8));
    }

    #[test]
    fn frobenius_on_f4() {
        // x ↦ x² on F_4: N = 3 directions, r = 2
        let tw = FieldTower::new(2, 1, 2, None).unwrap();
        let table = (0..4).map(|x| tw.mul(Fe(x), Fe(x))).collect();
        let f = GraphMap::from_table(&tw, table).unwrap();
        let c = count_directions(&tw, &f);
        assert_eq!((c.n, c.r), (3, 2));
        let rep = check_trichotomy(&tw, &f).unwrap();
        assert_eq!(rep.case, TrichotomyCase::Subfield);
        assert!(directions_match_linear_set(&tw, &f).unwrap());
    }

    #[test]
    fn all_self_maps_of_f4_classify() {
        // exhaustive trichotomy over all 256 functions F_4 -> F_4
        let tw = FieldTower::new(2, 1, 2, None).unwrap();
        let mut generic = 0u32;
        for idx in 0..256u32 {
            let table: Vec<Fe> = (0..4).map(|j| Fe((idx >> (2 * j)) & 3)).collect();
            let f = GraphMap::from_table(&tw, table).unwrap();
            let rep = check_trichotomy(&tw, &f).unwrap();
            if rep.case == TrichotomyCase::Generic {
                // case 1 forces N ≥ ⌈(q0+3)/2⌉ = 4
                assert!(rep.count.n >= 4);
                generic += 1;
            }
        }
        assert!(generic > 0);
    }

    #[test]
    fn exhaustive_linear_maps_on_f8() {
        // all 512 F_2-linear maps on F_8 classify and match their linear sets
        let tw = FieldTower::new(2, 1, 3, None).unwrap();
        for idx in 0..tw.order().pow(3) {
            let f = GraphMap::from_linear_index(&tw, idx).unwrap();
            let rep = check_trichotomy(&tw, &f).unwrap();
            assert!(directions_match_linear_set(&tw, &f).unwrap(), "map {idx}");
            if rep.count.r > 2 && rep.count.r < tw.order() {
                assert!(rep.fr_linearity_verified);
            }
        }
    }
}
