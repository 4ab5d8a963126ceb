//! Explicit families: the block construction (one heavy point, all other
//! points of weight 2), sublines, and clubs.
//!
//! The block construction works in Σ* = PG(k-1, q^h) with k = rs + 2. The
//! basis splits into r blocks A_i of size s plus a final pair. The vertex Π
//! is spanned by the in-block differences ⟨e_{i,j} - α e_{i,j+1}⟩, the
//! bridges ⟨e_{i,s} - β_i e_{i+1,s}⟩ and ⟨e_{rs+1} - α e_{rs+2}⟩, with α of
//! degree s over F_q and β_i outside F_{q^s}. The projection onto
//! Ω = span(⟨e_{rs}⟩, ⟨e_{rs+2}⟩) is a rank-k linear set with one point of
//! weight rs and q^{rs} points of weight 2, and it carries an F_{q^s}-linear
//! witness of F_{q^s}-rank r + 1.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{Fe, FieldTower};
use crate::linalg::{FqSubspace, FqVector};
use crate::projection::ProjectionScene;

#[derive(Debug, Clone)]
pub struct ConstructionParams {
    pub s: u32,
    pub r: usize,
    pub alpha: Fe,
    /// r - 1 bridge elements outside F_{q^s}.
    pub betas: Vec<Fe>,
}

impl ConstructionParams {
    pub fn k(&self) -> usize {
        self.r * self.s as usize + 2
    }
}

/// Validate parameters and assemble the projection scene.
pub fn build_scene(tw: &FieldTower, params: &ConstructionParams) -> Result<ProjectionScene> {
    let s = params.s;
    let r = params.r;
    if s < 2 || tw.h() % s != 0 {
        return Err(Error::InvalidParams(format!("s = {s} must be at least 2 and divide h = {}", tw.h())));
    }
    let k = params.k();
    if k > tw.h() as usize {
        return Err(Error::InvalidParams(format!("k = {k} exceeds h = {}", tw.h())));
    }
    if tw.degree_over_q(params.alpha) != s {
        return Err(Error::InvalidParams("alpha must have degree s over the ground field".into()));
    }
    if params.betas.len() != r - 1 {
        return Err(Error::InvalidParams(format!("expected {} bridge elements", r - 1)));
    }
    for &b in &params.betas {
        if tw.frob_iter(b, s) == b {
            return Err(Error::InvalidParams("bridge elements must lie outside the degree-s subfield".into()));
        }
    }
    let e = |i: usize| {
        let mut v = vec![Fe::ZERO; k];
        v[i] = Fe::ONE;
        v
    };
    let diff = |i: usize, j: usize, c: Fe| {
        let mut v = e(i);
        v[j] = tw.neg(c);
        v
    };
    let su = s as usize;
    let mut pi_rows = vec![];
    for i in 0..r {
        for j in 0..su - 1 {
            pi_rows.push(diff(i * su + j, i * su + j + 1, params.alpha));
        }
    }
    for (i, &beta) in params.betas.iter().enumerate() {
        pi_rows.push(diff(i * su + su - 1, (i + 1) * su + su - 1, beta));
    }
    pi_rows.push(diff(k - 2, k - 1, params.alpha));
    let omega_rows = vec![e(r * su - 1), e(k - 1)];
    ProjectionScene::new(tw, k, pi_rows, omega_rows)
}

/// Closed form of the projection: a σ point (λ_1, ..., λ_k) lands on
/// (χ1, χ2) with
/// χ1 = Σ_i β_i···β_{r-1} (α^{s-1} λ_{i,1} + ... + λ_{i,s}) and
/// χ2 = λ_{rs+2} + α λ_{rs+1}.
pub fn chi_image(tw: &FieldTower, params: &ConstructionParams, lambdas: &[Fe]) -> (Fe, Fe) {
    let su = params.s as usize;
    let r = params.r;
    let mut chi1 = Fe::ZERO;
    for i in 0..r {
        let mut block = Fe::ZERO;
        for j in 0..su {
            // Horner accumulation of α^{s-1}λ_{i,1} + ... + λ_{i,s}
            block = tw.add(tw.mul(block, params.alpha), lambdas[i * su + j]);
        }
        let mut coef = Fe::ONE;
        for &b in &params.betas[i..] {
            coef = tw.mul(coef, b);
        }
        chi1 = tw.add(chi1, tw.mul(coef, block));
    }
    let k = params.k();
    let chi2 = tw.add(lambdas[k - 1], tw.mul(params.alpha, lambdas[k - 2]));
    (chi1, chi2)
}

/// The rank-k F_q-subspace of F_{q^h}^2 given by the closed form directly,
/// without going through the scene. Independent route for cross-checks.
pub fn chi_subspace(tw: &FieldTower, params: &ConstructionParams) -> Result<FqSubspace> {
    let k = params.k();
    let mut vecs = vec![];
    for i in 0..k {
        let mut lambdas = vec![Fe::ZERO; k];
        lambdas[i] = Fe::ONE;
        let (chi1, chi2) = chi_image(tw, params, &lambdas);
        vecs.push(FqVector::new(vec![chi1, chi2]));
    }
    FqSubspace::from_vectors(tw, 2, &vecs)
}

/// The F_{q^s}-linear witness of the construction: all (B_1 γ_1 + ... + γ_r, γ_{r+1})
/// with γ_i ∈ F_{q^s}, as an F_q-subspace of rank (r+1)s.
pub fn witness_subspace(tw: &FieldTower, params: &ConstructionParams) -> Result<FqSubspace> {
    let sub = tw.subfield_elements(params.s)?;
    let mut vecs = vec![];
    for i in 0..params.r {
        let mut coef = Fe::ONE;
        for &b in &params.betas[i..] {
            coef = tw.mul(coef, b);
        }
        for &g in &sub {
            vecs.push(FqVector::new(vec![tw.mul(coef, g), Fe::ZERO]));
        }
    }
    for &g in &sub {
        vecs.push(FqVector::new(vec![Fe::ZERO, g]));
    }
    FqSubspace::from_vectors(tw, 2, &vecs)
}

/// Draw bridge elements until the scene validates; deterministic in the seed.
pub fn sample_params(tw: &FieldTower, s: u32, r: usize, rng: &mut ChaCha8Rng) -> Result<ConstructionParams> {
    let alpha = tw.subfield_generator(s)?;
    for _ in 0..1000 {
        let betas: Vec<Fe> = (0..r.saturating_sub(1))
            .map(|_| Fe(rng.gen_range(1..tw.order() as u32)))
            .collect();
        if betas.iter().any(|&b| tw.frob_iter(b, s) == b) {
            continue;
        }
        let params = ConstructionParams { s, r, alpha, betas };
        if build_scene(tw, &params).is_ok() {
            return Ok(params);
        }
    }
    Err(Error::ConstraintInfeasible("no valid bridge elements found".into()))
}

/// U = F_{q^s}·(1,0) + F_{q^s}·(0,1): the subline PG(1, q^s).
pub fn build_subline(tw: &FieldTower, s: u32) -> Result<FqSubspace> {
    let sub = tw.subfield_elements(s)?;
    let mut vecs = vec![];
    for &x in &sub {
        vecs.push(FqVector::new(vec![x, Fe::ZERO]));
        vecs.push(FqVector::new(vec![Fe::ZERO, x]));
    }
    FqSubspace::from_vectors(tw, 2, &vecs)
}

/// A rank-k i-club: one point of weight i, (q^k - q^i)/(q - 1) of weight 1.
/// The heavy space is spanned by powers of a degree-h generator so that the
/// club is not a subline in disguise.
pub fn build_club(tw: &FieldTower, i: u32, k: u32) -> Result<FqSubspace> {
    if i == 0 || k <= i || k > 2 * tw.h() {
        return Err(Error::InvalidParams(format!("need 0 < i < k, got i = {i}, k = {k}")));
    }
    let th = tw.theta();
    let mut vecs = vec![];
    let mut pow = Fe::ONE;
    for _ in 0..i {
        vecs.push(FqVector::new(vec![pow, Fe::ZERO]));
        pow = tw.mul(pow, th);
    }
    let mut pow = Fe::ONE;
    for _ in 0..k - i {
        vecs.push(FqVector::new(vec![Fe::ZERO, pow]));
        pow = tw.mul(pow, th);
    }
    let u = FqSubspace::from_vectors(tw, 2, &vecs)?;
    if u.rank() != k as usize {
        return Err(Error::InvalidParams(format!("club generators are dependent at rank {}", u.rank())));
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linset::build_linear_set;
    use rand::SeedableRng;
    use std::collections::BTreeMap;

    fn params(tw: &FieldTower, s: u32, r: usize, seed: u64) -> ConstructionParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sample_params(tw, s, r, &mut rng).unwrap()
    }

    #[test]
    fn h4_s2_r1_is_a_subline_spectrum() {
        let tw = FieldTower::new(2, 1, 4, None).unwrap();
        let p = params(&tw, 2, 1, 1);
        let scene = build_scene(&tw, &p).unwrap();
        let ls = scene.project_sigma(&tw).unwrap();
        // q^{rs} + 1 = 5 points; with rs = 2 the heavy point also has weight 2
        assert_eq!(ls.size(), 5);
        assert_eq!(ls.weight_spectrum(), BTreeMap::from([(2, 5)]));
    }

    #[test]
    fn h6_s3_r1_spectrum() {
        let tw = FieldTower::new(2, 1, 6, None).unwrap();
        let p = params(&tw, 3, 1, 2);
        let scene = build_scene(&tw, &p).unwrap();
        let ls = scene.project_sigma(&tw).unwrap();
        assert_eq!(ls.size(), 9);
        assert_eq!(ls.weight_spectrum(), BTreeMap::from([(2, 8), (3, 1)]));
    }

    #[test]
    fn h6_s2_r2_spectrum() {
        let tw = FieldTower::new(2, 1, 6, None).unwrap();
        let p = params(&tw, 2, 2, 3);
        let scene = build_scene(&tw, &p).unwrap();
        let ls = scene.project_sigma(&tw).unwrap();
        assert_eq!(ls.size(), 17);
        assert_eq!(ls.weight_spectrum(), BTreeMap::from([(2, 16), (4, 1)]));
    }

    #[test]
    fn closed_form_matches_scene() {
        let tw = FieldTower::new(2, 1, 6, None).unwrap();
        for (s, r, seed) in [(2u32, 2usize, 4u64), (3, 1, 5)] {
            let p = params(&tw, s, r, seed);
            let scene = build_scene(&tw, &p).unwrap();
            let u_scene = scene.projected_subspace(&tw).unwrap();
            let u_chi = chi_subspace(&tw, &p).unwrap();
            let ls_scene = build_linear_set(&tw, &u_scene).unwrap();
            let ls_chi = build_linear_set(&tw, &u_chi).unwrap();
            assert!(ls_scene.same_points(&ls_chi), "s={s} r={r}");
            // per-point check of the χ formula
            for digits in crate::projection::sigma_points(&tw, p.k()) {
                let v = crate::projection::digits_to_fe(&tw, &digits);
                let img = scene.project(&tw, &v).unwrap();
                let (chi1, chi2) = chi_image(&tw, &p, &v);
                // projective equality
                assert_eq!(tw.mul(img[0], chi2), tw.mul(img[1], chi1));
                assert!(!(chi1.is_zero() && chi2.is_zero()));
            }
        }
    }

    #[test]
    fn witness_has_same_points() {
        let tw = FieldTower::new(2, 1, 6, None).unwrap();
        let p = params(&tw, 3, 1, 6);
        let scene = build_scene(&tw, &p).unwrap();
        let ls = scene.project_sigma(&tw).unwrap();
        let w = witness_subspace(&tw, &p).unwrap();
        assert_eq!(w.rank(), (p.r + 1) * p.s as usize);
        assert!(crate::linearity::is_fqs_linear(&tw, &w, p.s).unwrap());
        let ls_w = build_linear_set(&tw, &w).unwrap();
        assert!(ls.same_points(&ls_w));
    }

    #[test]
    fn subline_and_club_shapes() {
        let tw = FieldTower::new(2, 1, 6, None).unwrap();
        let sub = build_subline(&tw, 3).unwrap();
        let ls = build_linear_set(&tw, &sub).unwrap();
        assert_eq!(ls.weight_spectrum(), BTreeMap::from([(3, 9)]));
        let club = build_club(&tw, 3, 4).unwrap();
        let ls = build_linear_set(&tw, &club).unwrap();
        assert_eq!(ls.weight_spectrum(), BTreeMap::from([(1, 8), (3, 1)]));
    }
}
