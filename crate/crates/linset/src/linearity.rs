//! Algebraic and geometric fields of linearity.
//!
//! The algebraic side asks whether U itself is closed under F_{q^s}-scalar
//! multiplication. The geometric side asks whether some other F_{q^s}-linear
//! subspace W defines the same point set L_W = L_U.
//!
//! F_{q^s}-subspaces are handled through a second tower with the same
//! defining polynomial over F_p, so top-field encodings coincide and vectors
//! move between the towers unchanged.
//!
//! Two independent geometric routes are provided: an exhaustive cached
//! catalog of the point-set masks of every F_{q^s}-linear set on the line,
//! and a pruned incremental search that grows a candidate W inside the union
//! of the lines of L_U. The verification suites cross-check them.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::field::{Fe, FieldTower};
use crate::linalg::{FqSubspace, FqVector};
use crate::linset::{build_linear_set, point_id, LinearSet, ProjPoint};

/// Largest PG(1, q^h) the u128 point masks can hold: order + 1 point ids.
const MASK_POINT_LIMIT: u64 = 127;

/// Divisors of n in increasing order.
pub fn divisors(n: u32) -> Vec<u32> {
    let mut d: Vec<u32> = (1..=n).filter(|i| n % i == 0).collect();
    d.sort_unstable();
    d
}

/// Whether U is closed under multiplication by F_{q^s} (s must divide h).
/// Closure under one generator of F_{q^s} over F_q suffices.
pub fn is_fqs_linear(tw: &FieldTower, u: &FqSubspace, s: u32) -> Result<bool> {
    if tw.h() % s != 0 {
        return Err(Error::NotADivisor(s, tw.h()));
    }
    if s == 1 {
        return Ok(true);
    }
    let gamma = tw.subfield_generator(s)?;
    for v in u.basis_vectors(tw) {
        let scaled = FqVector::new(v.coords.iter().map(|&c| tw.mul(c, gamma)).collect());
        if !u.contains(tw, &scaled.flatten(tw)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All s dividing h with U closed under F_{q^s}; always contains 1.
pub fn algebraic_fields(tw: &FieldTower, u: &FqSubspace) -> Result<Vec<u32>> {
    let mut out = vec![];
    for s in divisors(tw.h()) {
        if is_fqs_linear(tw, u, s)? {
            out.push(s);
        }
    }
    Ok(out)
}

pub fn algebraic_max_field(tw: &FieldTower, u: &FqSubspace) -> Result<u32> {
    Ok(*algebraic_fields(tw, u)?.last().unwrap())
}

/// The tower with ground field F_{q^s} and the same top field, sharing the
/// defining polynomial so element encodings agree.
pub fn subfield_tower(tw: &FieldTower, s: u32) -> Result<FieldTower> {
    if tw.h() % s != 0 {
        return Err(Error::NotADivisor(s, tw.h()));
    }
    FieldTower::new(tw.p(), tw.e() * s, tw.h() / s, Some(tw.defining_poly().to_vec()))
}

/// Re-express an F_{q^s}-subspace (rows over `tower2`) as the F_q-subspace
/// it is: each tower2 basis vector contributes s F_q-basis vectors
/// γ^j v, j < s, with γ generating F_{q^s} over F_q.
pub fn witness_to_base(tw: &FieldTower, tower2: &FieldTower, rows2: &[Vec<u8>]) -> Result<FqSubspace> {
    let s = tw.h() / tower2.h();
    let r = rows2.first().map_or(0, |r| r.len()) / tower2.h() as usize;
    let gamma = if s == 1 { Fe::ONE } else { tw.subfield_generator(s)? };
    let mut vecs = vec![];
    for row in rows2 {
        let v = FqVector::from_flat(tower2, row);
        let mut scale = Fe::ONE;
        for _ in 0..s {
            vecs.push(FqVector::new(v.coords.iter().map(|&c| tw.mul(c, scale)).collect()));
            scale = tw.mul(scale, gamma);
        }
    }
    FqSubspace::from_vectors(tw, r, &vecs)
}

/// Point-set mask of a linear set on PG(1, q^h), one bit per point id.
pub fn point_mask(tw: &FieldTower, ls: &LinearSet) -> Result<u128> {
    if ls.r != 2 || tw.order() > MASK_POINT_LIMIT {
        return Err(Error::InfeasibleScope(format!(
            "point masks need r = 2 and field order at most {MASK_POINT_LIMIT}"
        )));
    }
    let mut mask = 0u128;
    for p in ls.points.keys() {
        mask |= 1u128 << point_id(tw, p);
    }
    Ok(mask)
}

/// All point-set masks of F_{q^s}-linear sets on PG(1, q^h), with one
/// minimal-rank representative (tower2 flat rows) per mask.
pub struct Catalog {
    pub masks: HashMap<u128, Vec<Vec<u8>>>,
}

impl Catalog {
    pub fn build(tw: &FieldTower, s: u32) -> Result<Catalog> {
        if tw.order() > MASK_POINT_LIMIT {
            return Err(Error::InfeasibleScope(format!(
                "catalog needs field order at most {MASK_POINT_LIMIT}"
            )));
        }
        let tower2 = subfield_tower(tw, s)?;
        let d2 = 2 * tower2.h() as usize;
        let mut masks: HashMap<u128, Vec<Vec<u8>>> = HashMap::new();
        for k2 in 1..=d2 {
            crate::linalg::enumerate_subspaces(&tower2, d2, k2, None, |w| {
                let mut mask = 0u128;
                w.for_each_vector(&tower2, |flat| {
                    if flat.iter().any(|&d| d != 0) {
                        let v = FqVector::from_flat(&tower2, flat);
                        let p = ProjPoint::from_vector(tw, &v).unwrap();
                        mask |= 1u128 << point_id(tw, &p);
                    }
                });
                masks.entry(mask).or_insert_with(|| w.rows().to_vec());
            })?;
        }
        Ok(Catalog { masks })
    }

    pub fn lookup(&self, mask: u128) -> Option<&Vec<Vec<u8>>> {
        self.masks.get(&mask)
    }
}

/// Caller-owned cache of catalogs keyed by (field spec, s).
#[derive(Default)]
pub struct GeoCache {
    map: HashMap<(String, u32), Catalog>,
}

impl GeoCache {
    pub fn new() -> GeoCache {
        GeoCache::default()
    }

    pub fn get_or_build(&mut self, tw: &FieldTower, s: u32) -> Result<&Catalog> {
        let key = (tw.spec_string(), s);
        if !self.map.contains_key(&key) {
            let cat = Catalog::build(tw, s)?;
            self.map.insert(key.clone(), cat);
        }
        Ok(self.map.get(&key).unwrap())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeoStatus {
    /// An F_{q^s}-linear subspace with the same point set, as an F_q-subspace.
    Witness(FqSubspace),
    Absent,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct LinearityReport {
    pub algebraic: Vec<u32>,
    pub algebraic_max_s: u32,
    /// Status per divisor s > 1 of h.
    pub geometric: BTreeMap<u32, GeoStatus>,
    /// Largest s with a geometric witness (1 if none beyond the trivial one).
    pub geometric_max_s: u32,
}

/// Full linearity report for U via the catalog route.
pub fn linearity_report(tw: &FieldTower, u: &FqSubspace, cache: &mut GeoCache) -> Result<LinearityReport> {
    let algebraic = algebraic_fields(tw, u)?;
    let algebraic_max_s = *algebraic.last().unwrap();
    let ls = build_linear_set(tw, u)?;
    let mut geometric = BTreeMap::new();
    let mut geometric_max_s = 1;
    for s in divisors(tw.h()).into_iter().filter(|&s| s > 1) {
        let status = match point_mask(tw, &ls) {
            Err(_) => GeoStatus::Inconclusive,
            Ok(mask) => {
                let cat = cache.get_or_build(tw, s)?;
                match cat.lookup(mask) {
                    Some(rows2) => {
                        let tower2 = subfield_tower(tw, s)?;
                        GeoStatus::Witness(witness_to_base(tw, &tower2, rows2)?)
                    }
                    None => GeoStatus::Absent,
                }
            }
        };
        if matches!(status, GeoStatus::Witness(_)) {
            geometric_max_s = s;
        }
        geometric.insert(s, status);
    }
    Ok(LinearityReport {
        algebraic,
        algebraic_max_s,
        geometric,
        geometric_max_s,
    })
}

/// Outcome of the pruned incremental search.
#[derive(Debug, Clone)]
pub struct PrunedOutcome {
    /// Witness as tower2 flat rows, if found.
    pub witness: Option<Vec<Vec<u8>>>,
    pub visited: u64,
    /// True when the budget ran out before the search space was exhausted.
    pub truncated: bool,
}

/// Second, independent geometric route: grow an F_{q^s}-subspace W from
/// vectors lying on the points of L_U, pruning any partial span that hits a
/// point outside L_U, until L_W = L_U or the space is exhausted.
pub fn geometric_witness_pruned(
    tw: &FieldTower,
    u: &FqSubspace,
    s: u32,
    budget: u64,
) -> Result<PrunedOutcome> {
    let ls = build_linear_set(tw, u)?;
    let r = ls.r;
    if ls.points.len() > 127 {
        return Err(Error::InfeasibleScope("pruned search handles at most 127 points".into()));
    }
    // local bit index over the points of L_U; anything else prunes
    let index: HashMap<ProjPoint, u32> = ls
        .points
        .keys()
        .enumerate()
        .map(|(i, p)| (p.clone(), i as u32))
        .collect();
    let target: u128 = if ls.points.len() == 128 {
        u128::MAX
    } else {
        (1u128 << ls.points.len()) - 1
    };
    let tower2 = subfield_tower(tw, s)?;
    let d2 = r * tower2.h() as usize;

    // candidate vectors: every nonzero v of F_{q^h}^r whose point lies in L_U
    let q2 = tower2.q() as usize;
    let total = q2.checked_pow(d2 as u32).ok_or_else(|| {
        Error::InfeasibleScope("candidate space too large for the pruned search".into())
    })?;
    let mut candidates: Vec<Vec<u8>> = vec![];
    for idx in 1..total {
        let flat = crate::linalg::flat_from_index(&tower2, idx, d2);
        let v = FqVector::from_flat(&tower2, &flat);
        let p = ProjPoint::from_vector(tw, &v)?;
        if index.contains_key(&p) {
            candidates.push(flat);
        }
    }

    struct Ctx<'a> {
        tw: &'a FieldTower,
        tower2: &'a FieldTower,
        index: &'a HashMap<ProjPoint, u32>,
        candidates: &'a [Vec<u8>],
        target: u128,
        d2: usize,
        budget: u64,
        visited: u64,
        truncated: bool,
        seen: HashSet<Vec<Vec<u8>>>,
    }

    fn span_mask(ctx: &Ctx, w: &FqSubspace) -> Option<u128> {
        let mut mask = 0u128;
        let mut outside = false;
        w.for_each_vector(ctx.tower2, |flat| {
            if outside || flat.iter().all(|&d| d == 0) {
                return;
            }
            let v = FqVector::from_flat(ctx.tower2, flat);
            let p = ProjPoint::from_vector(ctx.tw, &v).unwrap();
            match ctx.index.get(&p) {
                Some(&b) => mask |= 1u128 << b,
                None => outside = true,
            }
        });
        (!outside).then_some(mask)
    }

    fn dfs(ctx: &mut Ctx, w: &FqSubspace, mask: u128, start: usize) -> Option<Vec<Vec<u8>>> {
        if mask == ctx.target {
            return Some(w.rows().to_vec());
        }
        if w.rank() == ctx.d2 {
            return None;
        }
        for i in start..ctx.candidates.len() {
            if ctx.visited >= ctx.budget {
                ctx.truncated = true;
                return None;
            }
            let cand = &ctx.candidates[i];
            if w.contains(ctx.tower2, cand) {
                continue;
            }
            let mut rows = w.rows().to_vec();
            rows.push(cand.clone());
            let next = FqSubspace::from_flat_rows(ctx.tower2, cand.len(), rows);
            if !ctx.seen.insert(next.rows().to_vec()) {
                continue;
            }
            ctx.visited += 1;
            let Some(next_mask) = span_mask(ctx, &next) else {
                continue;
            };
            if let Some(found) = dfs(ctx, &next, next_mask, i + 1) {
                return Some(found);
            }
            if ctx.truncated {
                return None;
            }
        }
        None
    }

    let mut ctx = Ctx {
        tw,
        tower2: &tower2,
        index: &index,
        candidates: &candidates,
        target,
        d2,
        budget,
        visited: 0,
        truncated: false,
        seen: HashSet::new(),
    };
    let zero = FqSubspace::zero(d2);
    let witness = dfs(&mut ctx, &zero, 0, 0);
    let truncated = witness.is_none() && ctx.truncated;
    Ok(PrunedOutcome {
        witness,
        visited: ctx.visited,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f64() -> FieldTower {
        FieldTower::new(2, 1, 6, None).unwrap()
    }

    fn subline_f8(tw: &FieldTower) -> FqSubspace {
        let f8 = tw.subfield_elements(3).unwrap();
        let mut gens = vec![];
        for &x in &f8 {
            gens.push(FqVector::new(vec![x, Fe::ZERO]));
            gens.push(FqVector::new(vec![Fe::ZERO, x]));
        }
        FqSubspace::from_vectors(tw, 2, &gens).unwrap()
    }

    #[test]
    fn subline_is_f8_linear() {
        let tw = f64();
        let u = subline_f8(&tw);
        assert_eq!(algebraic_fields(&tw, &u).unwrap(), vec![1, 3]);
        assert_eq!(algebraic_max_field(&tw, &u).unwrap(), 3);
    }

    /// A rank-4 club whose heavy 3-space is not a subfield: no geometric
    /// field beyond F_2.
    fn proper_club(tw: &FieldTower) -> FqSubspace {
        let th = tw.theta();
        let gens = vec![
            FqVector::new(vec![Fe::ONE, Fe::ZERO]),
            FqVector::new(vec![th, Fe::ZERO]),
            FqVector::new(vec![tw.mul(th, th), Fe::ZERO]),
            FqVector::new(vec![Fe::ZERO, Fe::ONE]),
        ];
        FqSubspace::from_vectors(tw, 2, &gens).unwrap()
    }

    #[test]
    fn club_is_only_f2_linear() {
        let tw = f64();
        let u = proper_club(&tw);
        assert_eq!(u.rank(), 4);
        assert_eq!(algebraic_fields(&tw, &u).unwrap(), vec![1]);
        let mut cache = GeoCache::new();
        let report = linearity_report(&tw, &u, &mut cache).unwrap();
        assert_eq!(report.geometric_max_s, 1);
        assert!(report.geometric.values().all(|st| *st == GeoStatus::Absent));
    }

    #[test]
    fn subfield_product_club_is_geometrically_a_subline() {
        // U = F_8 x F_2 has club weights {(3,1),(1,8)} but its point set is
        // the whole subline PG(1,8), so the geometric field exceeds the
        // algebraic one.
        let tw = f64();
        let f8 = tw.subfield_elements(3).unwrap();
        let mut gens: Vec<FqVector> = f8.iter().map(|&x| FqVector::new(vec![x, Fe::ZERO])).collect();
        gens.push(FqVector::new(vec![Fe::ZERO, Fe::ONE]));
        let u = FqSubspace::from_vectors(&tw, 2, &gens).unwrap();
        assert_eq!(algebraic_fields(&tw, &u).unwrap(), vec![1]);
        let mut cache = GeoCache::new();
        let report = linearity_report(&tw, &u, &mut cache).unwrap();
        assert_eq!(report.geometric_max_s, 3);
        let GeoStatus::Witness(w) = &report.geometric[&3] else {
            panic!("expected a subline witness");
        };
        let ls_u = build_linear_set(&tw, &u).unwrap();
        let ls_w = build_linear_set(&tw, w).unwrap();
        assert!(ls_u.same_points(&ls_w));
        assert_ne!(ls_u.weight_spectrum(), ls_w.weight_spectrum());
    }

    #[test]
    fn catalog_finds_subline_witness() {
        let tw = f64();
        let u = subline_f8(&tw);
        let mut cache = GeoCache::new();
        let report = linearity_report(&tw, &u, &mut cache).unwrap();
        assert!(report.algebraic.contains(&3));
        assert_eq!(report.geometric_max_s, 3);
        let GeoStatus::Witness(w) = &report.geometric[&3] else {
            panic!("expected a witness at s = 3");
        };
        let ls_u = build_linear_set(&tw, &u).unwrap();
        let ls_w = build_linear_set(&tw, w).unwrap();
        assert!(ls_u.same_points(&ls_w));
        assert!(is_fqs_linear(&tw, w, 3).unwrap());
    }

    #[test]
    fn pruned_matches_catalog_on_subline() {
        let tw = f64();
        let u = subline_f8(&tw);
        let out = geometric_witness_pruned(&tw, &u, 3, 1_000_000).unwrap();
        let rows2 = out.witness.expect("pruned search finds the subline witness");
        let tower2 = subfield_tower(&tw, 3).unwrap();
        let w = witness_to_base(&tw, &tower2, &rows2).unwrap();
        let ls_u = build_linear_set(&tw, &u).unwrap();
        let ls_w = build_linear_set(&tw, &w).unwrap();
        assert!(ls_u.same_points(&ls_w));
    }

    #[test]
    fn pruned_absent_on_club() {
        let tw = FieldTower::new(2, 1, 4, None).unwrap();
        let th = tw.theta();
        let gens = vec![
            FqVector::new(vec![Fe::ONE, Fe::ZERO]),
            FqVector::new(vec![th, Fe::ZERO]),
            FqVector::new(vec![Fe::ZERO, Fe::ONE]),
        ];
        let u = FqSubspace::from_vectors(&tw, 2, &gens).unwrap();
        assert_eq!(u.rank(), 3);
        let out = geometric_witness_pruned(&tw, &u, 2, 1_000_000).unwrap();
        assert!(out.witness.is_none());
        assert!(!out.truncated);
    }

    #[test]
    fn fqs_linear_weights_are_multiples_of_s() {
        // every F_4-linear subspace of F_16^2 has all weights divisible by 2
        // and at least 2
        let tw = FieldTower::new(2, 1, 4, None).unwrap();
        let tower2 = subfield_tower(&tw, 2).unwrap();
        for k2 in 1..=4usize {
            crate::linalg::enumerate_subspaces(&tower2, 4, k2, None, |w2| {
                let w = witness_to_base(&tw, &tower2, w2.rows()).unwrap();
                assert_eq!(w.rank(), 2 * k2);
                assert!(is_fqs_linear(&tw, &w, 2).unwrap());
                let ls = build_linear_set(&tw, &w).unwrap();
                for &wt in ls.points.values() {
                    assert!(wt >= 2 && wt % 2 == 0);
                }
            })
            .unwrap();
        }
    }

    #[test]
    fn cross_tower_encodings_agree() {
        let tw = f64();
        let tower2 = subfield_tower(&tw, 2).unwrap();
        assert_eq!(tower2.order(), tw.order());
        assert_eq!(tower2.q(), 4);
        // multiplication agrees element-wise since the defining poly is shared
        for a in [3u32, 17, 40] {
            for b in [5u32, 23, 61] {
                assert_eq!(tw.mul(Fe(a), Fe(b)), tower2.mul(Fe(a), Fe(b)));
            }
        }
    }
}
