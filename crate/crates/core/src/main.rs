use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use k3mirror::diaggrp::{dual_group, parse_group_literal, subgroups_between, SymmetryGroup};
use k3mirror::invpoly::{enumerate_form_p, transpose, InvertiblePolynomial};
use k3mirror::lattices::{classify, make, mirror_invariants, verify_mirror_decomposition};
use k3mirror::pipeline::{self, bounding_groups, group_from_generators, Format};
use k3mirror::weights::{admissible_families, check_prime, normalize, WeightSystem};
use k3mirror::{Error, Result};

#[derive(Parser)]
#[command(name = "k3mirror", version, about = "p-cyclic K3 surfaces from invertible polynomials and their mirrors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List polynomials x^p + f and the groups between J_W and SL_W.
    Enumerate {
        #[arg(long)]
        prime: u32,
        /// Restrict to one weight system, `w1,w2,w3,w4,d`.
        #[arg(long)]
        weights: Option<String>,
    },
    /// Fixed locus invariants, (r,a) and the mirror check for one pair.
    Analyze {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        prime: u32,
        /// Extra generators, joined with j_W.
        #[arg(long, conflicts_with = "group_index")]
        group: Option<String>,
        /// Select the group by |G/J_W|.
        #[arg(long)]
        group_index: Option<usize>,
    },
    /// Transposed polynomial and dual group.
    Dual {
        #[arg(long)]
        poly: String,
        #[arg(long, default_value = "")]
        group: String,
    },
    /// Rank, signature and discriminant of a lattice expression.
    Lattice {
        #[arg(long)]
        expr: String,
    },
    /// Mirror row of a classification row.
    Mirror {
        #[arg(long)]
        prime: u32,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        a: u32,
    },
    /// Regenerate a table and diff it against the golden data.
    VerifyTables {
        #[arg(long)]
        prime: u32,
        #[arg(long, value_enum, default_value_t = OutputFormat::Md)]
        format: OutputFormat,
        #[arg(long)]
        golden: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
    Md,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Json => Format::Json,
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Md => Format::Markdown,
        }
    }
}

#[derive(Serialize)]
struct GroupListing {
    index: usize,
    generators: Vec<String>,
}

#[derive(Serialize)]
struct PolynomialListing {
    yonemura_no: Option<String>,
    weight_system: String,
    polynomial: String,
    sl_index: usize,
    groups: Vec<GroupListing>,
}

#[derive(Serialize)]
struct DualListing {
    polynomial: String,
    group_generators: Vec<String>,
    index: usize,
    dual_polynomial: String,
    dual_group_generators: Vec<String>,
    dual_group_index: usize,
}

#[derive(Serialize)]
struct MirrorListing {
    p: u32,
    r: u32,
    a: u32,
    mirror_r: u32,
    mirror_a: u32,
    #[serde(rename = "S")]
    s_name: String,
    #[serde(rename = "T")]
    t_name: String,
    mirror_tabulated: bool,
    decomposition_verified: bool,
}

fn json(value: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn parse_weights(s: &str) -> Result<WeightSystem> {
    let nums: Vec<u32> = s
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::Parse { what: "weights", msg: format!("bad number {t:?}") }))
        .collect::<Result<_>>()?;
    let [a, b, c, e, d] = nums[..] else {
        return Err(Error::Parse { what: "weights", msg: "expected w1,w2,w3,w4,d".into() });
    };
    Ok(normalize([a, b, c, e], d)?.system)
}

fn pick_group(w: &InvertiblePolynomial, group: Option<&str>, index: Option<usize>) -> Result<SymmetryGroup> {
    let (j, sl) = bounding_groups(w)?;
    if !j.is_subgroup_of(&sl) {
        return Err(Error::InvalidPair(w.to_string(), "weights do not satisfy the Calabi-Yau condition".into()));
    }
    if let Some(text) = group {
        return group_from_generators(w, &parse_group_literal(text)?);
    }
    let Some(n) = index else { return Ok(j) };
    let hits: Vec<SymmetryGroup> = subgroups_between(&j, &sl)?.into_iter().filter(|h| h.index_over(&j) == n).collect();
    match hits.len() {
        1 => Ok(hits.into_iter().next().expect("one")),
        0 => Err(Error::InvalidPair(w.to_string(), format!("no group with |G/J_W| = {n}"))),
        _ => {
            let listed: Vec<String> = hits
                .iter()
                .map(|h| h.generators_over(&j).iter().map(ToString::to_string).collect::<Vec<_>>().join(";"))
                .collect();
            Err(Error::Ambiguous(format!("{} groups with |G/J_W| = {n}, pass --group with one of: {}", hits.len(), listed.join(" | "))))
        }
    }
}

fn enumerate(p: u32, weights: Option<&str>) -> Result<String> {
    check_prime(p)?;
    let only = weights.map(parse_weights).transpose()?;
    let mut out = Vec::new();
    for fam in admissible_families(p)? {
        if only.is_some_and(|ws| ws != fam.weight_system) {
            continue;
        }
        for w in enumerate_form_p(&fam.weight_system, p) {
            let (j, sl) = bounding_groups(&w)?;
            let groups = subgroups_between(&j, &sl)?
                .iter()
                .map(|h| GroupListing {
                    index: h.index_over(&j),
                    generators: h.generators_over(&j).iter().map(ToString::to_string).collect(),
                })
                .collect();
            out.push(PolynomialListing {
                yonemura_no: pipeline::golden().find(p, &w).map(|e| e.no.clone()),
                weight_system: fam.weight_system.to_string(),
                polynomial: w.to_string(),
                sl_index: sl.index_over(&j),
                groups,
            });
        }
    }
    if let Some(ws) = only {
        if out.is_empty() {
            return Err(Error::BadWeights(format!("{ws} admits no polynomial of the form x^{p} + f")));
        }
    }
    json(&out)
}

fn dual(poly: &str, group: &str) -> Result<String> {
    let w: InvertiblePolynomial = poly.parse()?;
    let g = group_from_generators(&w, &parse_group_literal(group)?)?;
    let (j, _) = bounding_groups(&w)?;
    let wt = transpose(&w);
    let gt = dual_group(&g, w.matrix())?;
    let (jt, _) = bounding_groups(&wt)?;
    let gens = |h: &SymmetryGroup, base: &SymmetryGroup| h.generators_over(base).iter().map(ToString::to_string).collect();
    json(&DualListing {
        polynomial: w.to_string(),
        group_generators: gens(&g, &j),
        index: g.index_over(&j),
        dual_polynomial: wt.to_string(),
        dual_group_generators: gens(&gt, &jt),
        dual_group_index: gt.index_over(&jt),
    })
}

fn mirror(p: u32, r: u32, a: u32) -> Result<String> {
    let row = classify(p, r, a)?;
    let (mr, ma) = mirror_invariants(p, r, a)?;
    json(&MirrorListing {
        p,
        r,
        a,
        mirror_r: mr,
        mirror_a: ma,
        s_name: row.s_name.clone(),
        t_name: row.t_name.clone(),
        mirror_tabulated: classify(p, mr, ma).is_ok(),
        decomposition_verified: verify_mirror_decomposition(p, r, a)?,
    })
}

fn run(cli: Cli) -> Result<(String, bool)> {
    Ok(match cli.command {
        Command::Enumerate { prime, weights } => (enumerate(prime, weights.as_deref())?, true),
        Command::Analyze { poly, prime, group, group_index } => {
            check_prime(prime)?;
            let w: InvertiblePolynomial = poly.parse()?;
            let g = pick_group(&w, group.as_deref(), group_index)?;
            (json(&pipeline::analyze(&w, &g, prime)?)?, true)
        }
        Command::Dual { poly, group } => (dual(&poly, &group)?, true),
        Command::Lattice { expr } => (json(&make(&expr)?.summary()?)?, true),
        Command::Mirror { prime, r, a } => (mirror(prime, r, a)?, true),
        Command::VerifyTables { prime, format, golden } => {
            let report = match golden {
                Some(path) => pipeline::verify_tables_with(&pipeline::load_golden(&path)?, prime)?,
                None => pipeline::verify_tables(prime)?,
            };
            (pipeline::render(&report, format.into()), report.is_clean())
        }
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((text, clean)) => {
            println!("{}", text.trim_end());
            if clean {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
