//! Linear sets: projective points of PG(r-1, q^h) hit by an F_q-subspace,
//! each carrying its weight.
//!
//! Two independent weight routes are kept deliberately separate: vector
//! counting (q^w - 1 vectors of U per weight-w point) and field reduction
//! (intersecting U with the flattened line of the point). Tests and the
//! verification suites cross-check them.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::{Fe, FieldTower};
use crate::linalg::{FqSubspace, FqVector};

/// A point of PG(r-1, q^h), normalized so the first nonzero coordinate is 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjPoint {
    coords: Vec<u32>,
}

impl ProjPoint {
    /// Normalize a nonzero vector to its projective representative.
    pub fn from_vector(tw: &FieldTower, v: &FqVector) -> Result<ProjPoint> {
        let Some(lead) = v.coords.iter().find(|c| !c.is_zero()) else {
            return Err(Error::ZeroSubspace);
        };
        let inv = tw.inv(*lead);
        Ok(ProjPoint {
            coords: v.coords.iter().map(|&c| tw.mul(c, inv).0).collect(),
        })
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn to_vector(&self) -> FqVector {
        FqVector::new(self.coords.iter().map(|&c| Fe(c)).collect())
    }

    /// The F_q-subspace {λ v : λ ∈ F_{q^h}} of rank h, flattened.
    pub fn flattened_line(&self, tw: &FieldTower) -> FqSubspace {
        let rows: Vec<Vec<u8>> = (0..tw.h())
            .map(|i| {
                let scale = tw.pow(tw.theta(), i as u64);
                let scaled = FqVector::new(self.coords.iter().map(|&c| tw.mul(Fe(c), scale)).collect());
                scaled.flatten(tw)
            })
            .collect();
        FqSubspace::from_flat_rows(tw, self.coords.len() * tw.h() as usize, rows)
    }
}

/// A linear set with per-point weights, plus the defining parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSet {
    pub q: u64,
    pub h: u32,
    pub r: usize,
    pub rank: usize,
    pub points: BTreeMap<ProjPoint, u32>,
}

impl LinearSet {
    pub fn size(&self) -> usize {
        self.points.len()
    }

    /// Multiset of weights as weight -> number of points.
    pub fn weight_spectrum(&self) -> BTreeMap<u32, usize> {
        let mut spec = BTreeMap::new();
        for &w in self.points.values() {
            *spec.entry(w).or_insert(0) += 1;
        }
        spec
    }

    pub fn weight_of(&self, p: &ProjPoint) -> Option<u32> {
        self.points.get(p).copied()
    }

    pub fn min_weight(&self) -> u32 {
        self.points.values().copied().min().unwrap_or(0)
    }

    pub fn max_weight(&self) -> u32 {
        self.points.values().copied().max().unwrap_or(0)
    }

    /// Same point set, ignoring weights.
    pub fn same_points(&self, other: &LinearSet) -> bool {
        self.points.len() == other.points.len()
            && self.points.keys().zip(other.points.keys()).all(|(a, b)| a == b)
    }
}

/// Compute L_U with weights by counting the q^w - 1 nonzero vectors of U on
/// each point.
pub fn build_linear_set(tw: &FieldTower, u: &FqSubspace) -> Result<LinearSet> {
    if u.rank() == 0 {
        return Err(Error::ZeroSubspace);
    }
    let r = u.ambient_r(tw);
    let mut counts: BTreeMap<ProjPoint, u64> = BTreeMap::new();
    let mut err = None;
    u.for_each_vector(tw, |flat| {
        if err.is_some() || flat.iter().all(|&d| d == 0) {
            return;
        }
        let v = FqVector::from_flat(tw, flat);
        match ProjPoint::from_vector(tw, &v) {
            Ok(p) => *counts.entry(p).or_insert(0) += 1,
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let q = tw.q() as u64;
    let mut points = BTreeMap::new();
    for (p, c) in counts {
        let w = vector_count_to_weight(q, c)?;
        points.insert(p, w);
    }
    Ok(LinearSet {
        q: tw.q(),
        h: tw.h(),
        r,
        rank: u.rank(),
        points,
    })
}

/// Invert c = q^w - 1; any other count signals an arithmetic bug upstream.
pub fn vector_count_to_weight(q: u64, count: u64) -> Result<u32> {
    let mut pow = 1u64;
    for w in 1..64 {
        pow = pow.saturating_mul(q);
        if pow - 1 == count {
            return Ok(w);
        }
        if pow - 1 > count {
            break;
        }
    }
    Err(Error::NonPowerCount(count))
}

/// Independent weight oracle: w(P) = dim_q(U ∩ field-reduced line of P).
pub fn field_reduction_weight(tw: &FieldTower, u: &FqSubspace, p: &ProjPoint) -> Result<u32> {
    let line = p.flattened_line(tw);
    Ok(u.intersect(tw, &line)?.rank() as u32)
}

/// Recompute every weight of `ls` by field reduction and compare.
pub fn weights_agree_by_field_reduction(tw: &FieldTower, u: &FqSubspace, ls: &LinearSet) -> Result<bool> {
    for (p, &w) in &ls.points {
        if field_reduction_weight(tw, u, p)? != w {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Identity Σ_P (q^{w(P)} - 1) = q^k - 1 for a rank-k subspace.
pub fn vector_count_identity_holds(ls: &LinearSet) -> bool {
    let q = ls.q as u128;
    let total: u128 = ls.points.values().map(|&w| q.pow(w) - 1).sum();
    total == q.pow(ls.rank as u32) - 1
}

/// Dense point-id table for PG(1, q^h): id 0 is <(0,1)>, id 1 + enc(y) is
/// <(1,y)>. Total order + 1 ids.
pub fn point_id(_tw: &FieldTower, p: &ProjPoint) -> usize {
    debug_assert_eq!(p.coords.len(), 2);
    if p.coords[0] == 0 {
        0
    } else {
        debug_assert_eq!(p.coords[0], 1);
        1 + p.coords[1] as usize
    }
}

pub fn point_from_id(tw: &FieldTower, id: usize) -> ProjPoint {
    if id == 0 {
        ProjPoint { coords: vec![0, 1] }
    } else {
        debug_assert!(id <= tw.order() as usize);
        ProjPoint { coords: vec![1, (id - 1) as u32] }
    }
}
