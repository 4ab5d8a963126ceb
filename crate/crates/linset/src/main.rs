//! Command-line interface: every library operation as a subcommand with
//! JSON (default) or CSV output.
//!
//! Exit codes: 0 success, 1 domain error, 2 verification violation, 64 usage.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use linset::construct::{build_club, build_scene, chi_subspace, sample_params};
use linset::directions::{check_trichotomy, GraphMap, TrichotomyCase};
use linset::field::{parse_field_spec, Fe, FieldTower};
use linset::io::{linear_set_csv, parse_scene, parse_subspace, write_scene, write_subspace, LinearSetJson};
use linset::linearity::{linearity_report, GeoCache, GeoStatus};
use linset::linset::build_linear_set;
use linset::projection::{check_pi_line_bounds, orbit_rep, type_orbit};
use linset::verify::{run_suite, Scope, SuiteConfig};
use linset::{Error, Result};

#[derive(Parser)]
#[command(name = "linset", disable_help_subcommand = true)]
struct Cli {
    /// Output format: json or csv
    #[arg(long, global = true)]
    format: Option<String>,
    /// key=value file mirroring the flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for parallel suites (0 = all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Describe a field tower p^e:h
    Field {
        #[arg(long)]
        field: String,
    },
    /// Type orbit and coset counts of an element
    Orbit {
        #[arg(long)]
        field: String,
        #[arg(long)]
        alpha: u32,
    },
    /// Build the linear set of a subspace file
    Linset {
        #[arg(long)]
        field: String,
        #[arg(long)]
        subspace: PathBuf,
    },
    /// Algebraic and geometric fields of linearity
    Geolin {
        #[arg(long)]
        field: String,
        #[arg(long)]
        subspace: PathBuf,
    },
    /// Project a point, or the whole subgeometry, through a scene
    Project {
        #[arg(long)]
        scene: PathBuf,
        /// Comma-separated point coordinates in Σ
        #[arg(long)]
        point: Option<String>,
    },
    /// Find and classify the Π-lines of a scene, with bound checks
    Pilines {
        #[arg(long)]
        scene: PathBuf,
    },
    /// Build a Construction scene and its linear set
    Construct {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        h: u32,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        blocks: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Build a club subspace and its linear set
    Club {
        #[arg(long)]
        field: String,
        #[arg(long)]
        i: u32,
        #[arg(long)]
        k: u32,
    },
    /// Direction count and trichotomy case of a map on F_q0
    Directions {
        #[arg(long)]
        q0: u64,
        /// Value table as comma-separated encodings, or "linear:<images>"
        #[arg(long)]
        map: String,
    },
    /// Run a verification suite
    Verify {
        suite: String,
        #[arg(long)]
        q: Option<u32>,
        #[arg(long)]
        h: Option<u32>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        w: Option<u32>,
        #[arg(long)]
        scope: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
    },
}

fn read_config(path: &PathBuf) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line without '=': {line:?}")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn config_get<T: std::str::FromStr>(cfg: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    match cfg.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| Error::Parse(format!("bad config value for {key}: {v:?}"))),
    }
}

fn parse_fe_list(text: &str, tw: &FieldTower) -> Result<Vec<Fe>> {
    text.split(',')
        .map(|t| {
            let v: u32 = t.trim().parse().map_err(|_| Error::Parse(format!("bad encoding {t:?}")))?;
            if v as u64 >= tw.order() {
                return Err(Error::Parse(format!("encoding {v} out of range")));
            }
            Ok(Fe(v))
        })
        .collect()
}

/// Factor a prime power q0 = p^n.
fn prime_power(q0: u64) -> Result<(u32, u32)> {
    for p in 2..=q0 {
        if q0 % p == 0 {
            let mut n = 0;
            let mut acc = q0;
            while acc % p == 0 {
                acc /= p;
                n += 1;
            }
            if acc != 1 {
                return Err(Error::Parse(format!("{q0} is not a prime power")));
            }
            return Ok((p as u32, n));
        }
    }
    Err(Error::Parse(format!("{q0} is not a prime power")))
}

struct Output {
    format: String,
}

impl Output {
    fn emit(&self, value: serde_json::Value, csv: Option<String>) -> Result<()> {
        if self.format == "csv" {
            match csv {
                Some(text) => print!("{text}"),
                None => return Err(Error::Parse("this subcommand has no CSV form".into())),
            }
        } else {
            println!("{}", serde_json::to_string_pretty(&value).map_err(|e| Error::Parse(e.to_string()))?);
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<u8> {
    let file_cfg = match &cli.config {
        Some(path) => read_config(path)?,
        None => BTreeMap::new(),
    };
    let format = cli
        .format
        .or_else(|| file_cfg.get("format").cloned())
        .unwrap_or_else(|| "json".to_string());
    if format != "json" && format != "csv" {
        return Err(Error::Parse(format!("unknown format {format:?}")));
    }
    let jobs = match cli.jobs {
        Some(j) => j,
        None => config_get(&file_cfg, "jobs")?.unwrap_or(0),
    };
    let out = Output { format };

    match cli.cmd {
        Cmd::Field { field } => {
            let tw = parse_field_spec(&field)?;
            out.emit(
                json!({
                    "spec": tw.spec_string(),
                    "p": tw.p(),
                    "e": tw.e(),
                    "h": tw.h(),
                    "q": tw.q(),
                    "order": tw.order(),
                    "theta": tw.theta().0,
                }),
                Some(format!(
                    "p,e,h,q,order,theta\n{},{},{},{},{},{}\n",
                    tw.p(),
                    tw.e(),
                    tw.h(),
                    tw.q(),
                    tw.order(),
                    tw.theta().0
                )),
            )?;
        }
        Cmd::Orbit { field, alpha } => {
            let tw = parse_field_spec(&field)?;
            let a = Fe(alpha);
            let orbit = type_orbit(&tw, a)?;
            let degree = tw.degree_over_q(a);
            let cosets = orbit.len() as u64 / (tw.q() - 1);
            out.emit(
                json!({
                    "degree": degree,
                    "orbit_size": orbit.len(),
                    "cosets": cosets,
                    "rep": orbit_rep(&tw, a)?.0,
                }),
                Some(format!("degree,orbit_size,cosets\n{degree},{},{cosets}\n", orbit.len())),
            )?;
        }
        Cmd::Linset { field, subspace } => {
            let tw = parse_field_spec(&field)?;
            let u = parse_subspace(&tw, &std::fs::read_to_string(subspace)?)?;
            let ls = build_linear_set(&tw, &u)?;
            let spectrum: BTreeMap<String, usize> =
                ls.weight_spectrum().into_iter().map(|(w, n)| (w.to_string(), n)).collect();
            let mut value = serde_json::to_value(LinearSetJson::from_linear_set(&ls)).unwrap();
            value["spectrum"] = json!(spectrum);
            out.emit(value, Some(linear_set_csv(&ls)))?;
        }
        Cmd::Geolin { field, subspace } => {
            let tw = parse_field_spec(&field)?;
            let u = parse_subspace(&tw, &std::fs::read_to_string(subspace)?)?;
            let mut cache = GeoCache::new();
            let rep = linearity_report(&tw, &u, &mut cache)?;
            let geometric: BTreeMap<String, &str> = rep
                .geometric
                .iter()
                .map(|(s, st)| {
                    let name = match st {
                        GeoStatus::Witness(_) => "witness",
                        GeoStatus::Absent => "none",
                        GeoStatus::Inconclusive => "inconclusive",
                    };
                    (s.to_string(), name)
                })
                .collect();
            let csv = {
                let mut text = String::from("s,status\n");
                for (s, st) in &geometric {
                    text.push_str(&format!("{s},{st}\n"));
                }
                text
            };
            out.emit(
                json!({
                    "algebraic": rep.algebraic,
                    "algebraic_max_s": rep.algebraic_max_s,
                    "geometric": geometric,
                    "geometric_max_s": rep.geometric_max_s,
                }),
                Some(csv),
            )?;
        }
        Cmd::Project { scene, point } => {
            let (tw, sc) = parse_scene(&std::fs::read_to_string(scene)?)?;
            match point {
                Some(text) => {
                    let coords = parse_fe_list(&text, &tw)?;
                    if coords.len() != sc.k {
                        return Err(Error::Parse(format!("expected {} coordinates", sc.k)));
                    }
                    let img = sc.project(&tw, &coords)?;
                    let enc: Vec<u32> = img.iter().map(|c| c.0).collect();
                    out.emit(json!({ "image": enc }), Some(format!("image\n{enc:?}\n")))?;
                }
                None => {
                    let ls = sc.project_sigma(&tw)?;
                    let value = serde_json::to_value(LinearSetJson::from_linear_set(&ls)).unwrap();
                    out.emit(value, Some(linear_set_csv(&ls)))?;
                }
            }
        }
        Cmd::Pilines { scene } => {
            let (tw, sc) = parse_scene(&std::fs::read_to_string(scene)?)?;
            let lines = sc.find_pi_lines(&tw)?;
            let report = check_pi_line_bounds(&tw, &sc)?;
            let items: Vec<serde_json::Value> = lines
                .iter()
                .map(|l| {
                    json!({
                        "alpha": l.alpha.0,
                        "orbit_rep": l.orbit_rep.0,
                        "degree": l.degree,
                        "image": l.image.coords(),
                        "rank2_point": l.rank2_point.iter().map(|c| c.0).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let csv = {
                let mut text = String::from("alpha,orbit_rep,degree,image\n");
                for l in &lines {
                    text.push_str(&format!("{},{},{},{:?}\n", l.alpha.0, l.orbit_rep.0, l.degree, l.image.coords()));
                }
                text
            };
            out.emit(
                json!({
                    "lines": items,
                    "line_count": report.line_count,
                    "saturated_points": report.saturated_points,
                    "full_fibers": report.full_fibers,
                    "violations": report.violations,
                }),
                Some(csv),
            )?;
            if !report.violations.is_empty() {
                return Ok(2);
            }
        }
        Cmd::Construct { q, h, s, blocks, seed } => {
            let tw = FieldTower::new(q, 1, h, None)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let params = sample_params(&tw, s, blocks, &mut rng)?;
            let scene = build_scene(&tw, &params)?;
            let u = chi_subspace(&tw, &params)?;
            let ls = build_linear_set(&tw, &u)?;
            out.emit(
                json!({
                    "alpha": params.alpha.0,
                    "betas": params.betas.iter().map(|b| b.0).collect::<Vec<_>>(),
                    "k": params.k(),
                    "scene": write_scene(&tw, &scene),
                    "subspace": write_subspace(&tw, &u),
                    "linear_set": serde_json::to_value(LinearSetJson::from_linear_set(&ls)).unwrap(),
                }),
                None,
            )?;
        }
        Cmd::Club { field, i, k } => {
            let tw = parse_field_spec(&field)?;
            let u = build_club(&tw, i, k)?;
            let ls = build_linear_set(&tw, &u)?;
            out.emit(
                json!({
                    "subspace": write_subspace(&tw, &u),
                    "linear_set": serde_json::to_value(LinearSetJson::from_linear_set(&ls)).unwrap(),
                }),
                Some(linear_set_csv(&ls)),
            )?;
        }
        Cmd::Directions { q0, map } => {
            let (p, n) = prime_power(q0)?;
            let tw = FieldTower::new(p, 1, n, None)?;
            let f = if let Some(images) = map.strip_prefix("linear:") {
                GraphMap::from_linear_images(&tw, &parse_fe_list(images, &tw)?)?
            } else {
                GraphMap::from_table(&tw, parse_fe_list(&map, &tw)?)?
            };
            match check_trichotomy(&tw, &f) {
                Ok(rep) => {
                    let case = match rep.case {
                        TrichotomyCase::Generic => "r=1",
                        TrichotomyCase::Subfield => "subfield",
                        TrichotomyCase::Affine => "r=q0",
                    };
                    out.emit(
                        json!({
                            "N": rep.count.n,
                            "r": rep.count.r,
                            "case": case,
                            "bounds_ok": true,
                        }),
                        Some(format!("N,r,case,bounds_ok\n{},{},{case},true\n", rep.count.n, rep.count.r)),
                    )?;
                }
                Err(Error::InfeasibleScope(msg)) => {
                    let c = linset::directions::count_directions(&tw, &f);
                    out.emit(
                        json!({
                            "N": c.n,
                            "r": c.r,
                            "case": "violation",
                            "bounds_ok": false,
                            "detail": msg,
                        }),
                        Some(format!("N,r,case,bounds_ok\n{},{},violation,false\n", c.n, c.r)),
                    )?;
                    return Ok(2);
                }
                Err(e) => return Err(e),
            }
        }
        Cmd::Verify { suite, q, h, k, w, scope, seed, budget } => {
            let scope_text = scope.or_else(|| file_cfg.get("scope").cloned());
            let scope = match scope_text.as_deref() {
                None | Some("exhaustive") => Scope::Exhaustive,
                Some("sample") => Scope::Sample,
                Some(other) => return Err(Error::Parse(format!("unknown scope {other:?}"))),
            };
            let env_budget = std::env::var("LINSET_BUDGET").ok().and_then(|v| v.parse().ok());
            let defaults = SuiteConfig::default();
            let cfg = SuiteConfig {
                q: q.or(config_get(&file_cfg, "q")?),
                h: h.or(config_get(&file_cfg, "h")?),
                k: k.or(config_get(&file_cfg, "k")?),
                w: w.or(config_get(&file_cfg, "w")?),
                scope,
                seed: seed.or(config_get(&file_cfg, "seed")?).unwrap_or(defaults.seed),
                budget: budget
                    .or(config_get(&file_cfg, "budget")?)
                    .or(env_budget)
                    .unwrap_or(defaults.budget),
                jobs,
            };
            let rep = run_suite(&suite, &cfg)?;
            let csv = {
                let mut text = String::from("key,value\n");
                text.push_str(&format!("suite,{}\nvisited,{}\npass,{}\n", rep.suite, rep.visited, rep.pass));
                for (k, v) in &rep.witnesses_histogram {
                    text.push_str(&format!("{k:?},{v}\n"));
                }
                text
            };
            let pass = rep.pass;
            out.emit(serde_json::to_value(&rep).unwrap(), Some(csv))?;
            if !pass {
                return Ok(2);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own help/version output with success status
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(64);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
