//! Text and JSON formats: subspace files, scene files, linear-set JSON, CSV.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fe, FieldTower};
use crate::linalg::{FqSubspace, FqVector};
use crate::linset::{LinearSet, ProjPoint};
use crate::projection::ProjectionScene;

/// Serde mirror of LinearSet: points sorted by encoded coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearSetJson {
    pub q: u64,
    pub h: u32,
    pub r: usize,
    pub rank: usize,
    pub points: Vec<PointJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointJson {
    pub coords: Vec<u32>,
    pub weight: u32,
}

impl LinearSetJson {
    pub fn from_linear_set(ls: &LinearSet) -> LinearSetJson {
        // BTreeMap iteration is already sorted by coordinate encoding
        let points = ls
            .points
            .iter()
            .map(|(p, &w)| PointJson { coords: p.coords().to_vec(), weight: w })
            .collect();
        LinearSetJson { q: ls.q, h: ls.h, r: ls.r, rank: ls.rank, points }
    }

    pub fn to_linear_set(&self, tw: &FieldTower) -> Result<LinearSet> {
        let mut points = std::collections::BTreeMap::new();
        for p in &self.points {
            let v = FqVector::new(p.coords.iter().map(|&c| Fe(c)).collect());
            points.insert(ProjPoint::from_vector(tw, &v)?, p.weight);
        }
        Ok(LinearSet { q: self.q, h: self.h, r: self.r, rank: self.rank, points })
    }
}

/// CSV rendering of a linear set: one point per row.
pub fn linear_set_csv(ls: &LinearSet) -> String {
    let mut out = String::from("coords,weight\n");
    for (p, w) in &ls.points {
        let coords: Vec<String> = p.coords().iter().map(|c| c.to_string()).collect();
        out.push_str(&format!("{},{w}\n", coords.join(" ")));
    }
    out
}

/// Serialize a subspace: header "r=<r> q=<p^e> h=<h>", then one basis vector
/// per line as comma-separated element encodings.
pub fn write_subspace(tw: &FieldTower, u: &FqSubspace) -> String {
    let mut out = format!("r={} q={}^{} h={}\n", u.ambient_r(tw), tw.p(), tw.e(), tw.h());
    for v in u.basis_vectors(tw) {
        let row: Vec<String> = v.coords.iter().map(|c| c.0.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn header_field<'a>(part: Option<&'a str>, key: &str) -> Result<&'a str> {
    part.and_then(|p| p.strip_prefix(key))
        .and_then(|p| p.strip_prefix('='))
        .ok_or_else(|| Error::Parse(format!("expected {key}=<value> in header")))
}

fn parse_row(tw: &FieldTower, line: &str, width: usize) -> Result<Vec<Fe>> {
    let coords: Vec<Fe> = line
        .split(',')
        .map(|t| {
            let v: u32 = t.trim().parse().map_err(|_| Error::Parse(format!("bad element encoding {t:?}")))?;
            if v as u64 >= tw.order() {
                return Err(Error::Parse(format!("encoding {v} out of range for field of order {}", tw.order())));
            }
            Ok(Fe(v))
        })
        .collect::<Result<_>>()?;
    if coords.len() != width {
        return Err(Error::Parse(format!("expected {width} coordinates, found {}", coords.len())));
    }
    Ok(coords)
}

/// Parse the subspace format; the header must agree with the given tower.
pub fn parse_subspace(tw: &FieldTower, text: &str) -> Result<FqSubspace> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty subspace file".into()))?;
    let mut parts = header.split_whitespace();
    let r: usize = header_field(parts.next(), "r")?
        .parse()
        .map_err(|_| Error::Parse("bad r in header".into()))?;
    let q_spec = header_field(parts.next(), "q")?;
    let h: u32 = header_field(parts.next(), "h")?
        .parse()
        .map_err(|_| Error::Parse("bad h in header".into()))?;
    let expect = format!("{}^{}", tw.p(), tw.e());
    if q_spec != expect || h != tw.h() {
        return Err(Error::Parse(format!(
            "header q={q_spec} h={h} does not match field {expect}:{}",
            tw.h()
        )));
    }
    let mut vectors = vec![];
    for line in lines {
        vectors.push(FqVector::new(parse_row(tw, line, r)?));
    }
    FqSubspace::from_vectors(tw, r, &vectors)
}

/// Serialize a scene: field spec line, k=<k>, pi=<t> then t rows,
/// omega=<r> then r rows; rows share the subspace element encoding.
pub fn write_scene(tw: &FieldTower, scene: &ProjectionScene) -> String {
    let mut out = format!("{}\nk={}\n", tw.spec_string(), scene.k);
    let emit = |out: &mut String, rows: &[Vec<Fe>]| {
        for row in rows {
            let cells: Vec<String> = row.iter().map(|c| c.0.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
    };
    out.push_str(&format!("pi={}\n", scene.pi_rows().len()));
    emit(&mut out, scene.pi_rows());
    out.push_str(&format!("omega={}\n", scene.omega_rows().len()));
    emit(&mut out, scene.omega_rows());
    out
}

/// Parse a scene file; returns the tower it declares plus the validated scene.
pub fn parse_scene(text: &str) -> Result<(FieldTower, ProjectionScene)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let spec = lines.next().ok_or_else(|| Error::Parse("empty scene file".into()))?;
    let tw = crate::field::parse_field_spec(spec.trim())?;
    let k: usize = header_field(lines.next(), "k")?
        .parse()
        .map_err(|_| Error::Parse("bad k".into()))?;
    let t: usize = header_field(lines.next(), "pi")?
        .parse()
        .map_err(|_| Error::Parse("bad pi count".into()))?;
    let mut pi_rows = vec![];
    for _ in 0..t {
        let line = lines.next().ok_or_else(|| Error::Parse("missing pi row".into()))?;
        pi_rows.push(parse_row(&tw, line, k)?);
    }
    let r: usize = header_field(lines.next(), "omega")?
        .parse()
        .map_err(|_| Error::Parse("bad omega count".into()))?;
    let mut omega_rows = vec![];
    for _ in 0..r {
        let line = lines.next().ok_or_else(|| Error::Parse("missing omega row".into()))?;
        omega_rows.push(parse_row(&tw, line, k)?);
    }
    let scene = ProjectionScene::new(&tw, k, pi_rows, omega_rows)?;
    Ok((tw, scene))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_scene, ConstructionParams};
    use crate::linset::build_linear_set;

    #[test]
    fn subspace_roundtrip() {
        let tw = FieldTower::new(2, 1, 4, None).unwrap();
        let u = FqSubspace::from_vectors(
            &tw,
            2,
            &[
                FqVector::new(vec![Fe::ONE, Fe(7)]),
                FqVector::new(vec![tw.theta(), Fe(3)]),
            ],
        )
        .unwrap();
        let text = write_subspace(&tw, &u);
        assert!(text.starts_with("r=2 q=2^1 h=4\n"));
        let back = parse_subspace(&tw, &text).unwrap();
        assert_eq!(u, back);
    }

    #[test]
    fn subspace_header_mismatch() {
        let tw = FieldTower::new(2, 1, 4, None).unwrap();
        assert!(parse_subspace(&tw, "r=2 q=3^1 h=4\n1,2\n").is_err());
        assert!(parse_subspace(&tw, "r=2 q=2^1 h=4\n1,2,3\n").is_err());
        assert!(parse_subspace(&tw, "r=2 q=2^1 h=4\n1,99\n").is_err());
    }

    #[test]
    fn linear_set_json_roundtrip() {
        let tw = FieldTower::new(2, 1, 4, None).unwrap();
        let u = FqSubspace::from_vectors(
            &tw,
            2,
            &[
                FqVector::new(vec![Fe::ONE, Fe::ZERO]),
                FqVector::new(vec![Fe::ZERO, Fe::ONE]),
                FqVector::new(vec![tw.theta(), Fe(5)]),
            ],
        )
        .unwrap();
        let ls = build_linear_set(&tw, &u).unwrap();
        let js = LinearSetJson::from_linear_set(&ls);
        let text = serde_json::to_string(&js).unwrap();
        let parsed: LinearSetJson = serde_json::from_str(&text).unwrap();
        let back = parsed.to_linear_set(&tw).unwrap();
        assert_eq!(ls, back);
        // points emitted in sorted coordinate order
        let coords: Vec<_> = js.points.iter().map(|p| p.coords.clone()).collect();
        let mut sorted = coords.clone();
        sorted.sort();
        assert_eq!(coords, sorted);
    }

    #[test]
    fn scene_roundtrip() {
        let tw = FieldTower::new(2, 1, 4, None).unwrap();
        let alpha = tw.subfield_generator(2).unwrap();
        let params = ConstructionParams { s: 2, r: 1, alpha, betas: vec![] };
        let scene = build_scene(&tw, &params).unwrap();
        let text = write_scene(&tw, &scene);
        let (tw2, scene2) = parse_scene(&text).unwrap();
        assert_eq!(tw.spec_string(), tw2.spec_string());
        assert_eq!(scene.pi_rows(), scene2.pi_rows());
        assert_eq!(scene.omega_rows(), scene2.omega_rows());
        let a = scene.project_sigma(&tw).unwrap();
        let b = scene2.project_sigma(&tw2).unwrap();
        assert!(a.same_points(&b));
    }
}
