//! End-to-end analysis of a pair `(W, G)`, its dual `(W^T, G^T)`, and the
//! regeneration of the full tables for one prime with a diff against the
//! embedded golden data.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diaggrp::{dual_group, full_group, grading_group, sl_subgroup, subgroups_between, DiagonalSymmetry, SymmetryGroup};
use crate::error::{Error, Result};
use crate::fixedlocus::resolve_fixed_locus;
use crate::invpoly::{enumerate_form_p, transpose, ExponentMatrix, InvertiblePolynomial};
use crate::weights::{admissible_families, check_prime, normalize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenRow {
    pub index: usize,
    pub r: u32,
    pub a: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenEntry {
    pub no: String,
    pub weights: [u32; 4],
    pub degree: u32,
    pub polynomial: String,
    pub sl_index: usize,
    pub rows: Vec<GoldenRow>,
    pub dual: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenTable {
    pub prime: u32,
    pub entries: Vec<GoldenEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenTables {
    pub tables: Vec<GoldenTable>,
}

const GOLDEN_JSON: &str = include_str!("../data/golden_tables.json");

pub fn golden() -> &'static GoldenTables {
    static CELL: OnceLock<GoldenTables> = OnceLock::new();
    CELL.get_or_init(|| serde_json::from_str(GOLDEN_JSON).expect("embedded golden_tables.json is valid"))
}

pub fn load_golden(path: &Path) -> Result<GoldenTables> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

impl GoldenTables {
    pub fn table(&self, p: u32) -> Option<&GoldenTable> {
        self.tables.iter().find(|t| t.prime == p)
    }

    /// Entry whose polynomial is `w` up to relabeling.
    pub fn find(&self, p: u32, w: &InvertiblePolynomial) -> Option<&GoldenEntry> {
        let key = w.canonical().0;
        self.table(p)?
            .entries
            .iter()
            .find(|e| e.polynomial.parse::<InvertiblePolynomial>().is_ok_and(|g| g.canonical().0 == key))
    }
}

/// Everything computed for one pair and its dual.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalysisRecord {
    pub yonemura_no: Option<String>,
    pub weight_system: String,
    pub polynomial: String,
    pub p: u32,
    /// Generators of `G` beyond `j_W`.
    pub group_generators: Vec<String>,
    pub index: usize,
    pub sl_index: usize,
    pub r: u32,
    pub a: u32,
    pub g: Option<u32>,
    pub n: u32,
    pub k: Option<u32>,
    pub dual_polynomial: String,
    pub dual_polynomial_no: Option<String>,
    pub dual_group_generators: Vec<String>,
    pub dual_group_index: usize,
    pub dual_r: u32,
    pub dual_a: u32,
    pub mirror_check: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn strings(gs: &[DiagonalSymmetry]) -> Vec<String> {
    gs.iter().map(ToString::to_string).collect()
}

/// `J_W`, `SL_W` of a polynomial.
pub fn bounding_groups(w: &InvertiblePolynomial) -> Result<(SymmetryGroup, SymmetryGroup)> {
    Ok((grading_group(w), sl_subgroup(&full_group(w.matrix())?)))
}

pub fn analyze(w: &InvertiblePolynomial, g: &SymmetryGroup, p: u32) -> Result<AnalysisRecord> {
    analyze_with(golden(), w, g, p)
}

pub fn analyze_with(tables: &GoldenTables, w: &InvertiblePolynomial, g: &SymmetryGroup, p: u32) -> Result<AnalysisRecord> {
    let (j, sl) = bounding_groups(w)?;
    if !j.is_subgroup_of(g) || !g.is_subgroup_of(&sl) {
        return Err(Error::InvalidPair(w.to_string(), "group must lie between J_W and SL_W".into()));
    }
    let (f, l) = resolve_fixed_locus(w, g, p)?;
    let wt = transpose(w);
    let gt = dual_group(g, w.matrix())?;
    let (jt, _) = bounding_groups(&wt)?;
    let (_, lt) = resolve_fixed_locus(&wt, &gt, p)?;

    let mut notes = Vec::new();
    let entry = tables.find(p, w);
    if let Some(e) = entry {
        let index = g.index_over(&j);
        for row in e.rows.iter().filter(|row| row.index == index && (row.r, row.a) == (l.r, l.a)) {
            for n in row.notes.iter().flatten() {
                if !notes.contains(n) {
                    notes.push(n.clone());
                }
            }
        }
    }
    Ok(AnalysisRecord {
        yonemura_no: entry.map(|e| e.no.clone()),
        weight_system: w.weight_system().to_string(),
        polynomial: w.to_string(),
        p,
        group_generators: strings(&g.generators_over(&j)),
        index: g.index_over(&j),
        sl_index: sl.index_over(&j),
        r: l.r,
        a: l.a,
        g: f.g,
        n: f.n,
        k: f.k,
        dual_polynomial: wt.to_string(),
        dual_polynomial_no: tables.find(p, &wt).map(|e| e.no.clone()),
        dual_group_generators: strings(&gt.generators_over(&jt)),
        dual_group_index: gt.index_over(&jt),
        dual_r: lt.r,
        dual_a: lt.a,
        mirror_check: l.r <= 20 && (lt.r, lt.a) == (20 - l.r, l.a),
        notes,
    })
}

/// Build `G = <j_W, extra>` on `w` from a group literal.
pub fn group_from_generators(w: &InvertiblePolynomial, extra: &[DiagonalSymmetry]) -> Result<SymmetryGroup> {
    grading_group(w).join(extra)
}

/// All pairs `(W, G)` for the prime: every polynomial of every admissible
/// weight system, with every group between `J_W` and `SL_W`.
pub fn regenerate_pairs(p: u32) -> Result<Vec<(InvertiblePolynomial, SymmetryGroup)>> {
    let mut out = Vec::new();
    for fam in admissible_families(p)? {
        for w in enumerate_form_p(&fam.weight_system, p) {
            let (j, sl) = bounding_groups(&w)?;
            for h in subgroups_between(&j, &sl)? {
                out.push((w.clone(), h));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub no: String,
    pub polynomial: String,
    pub field: String,
    pub expected: String,
    pub found: String,
}

/// Dual assignment of a labelled golden row, e.g. `g1 -> g2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelledDual {
    pub no: String,
    pub label: String,
    pub dual_no: String,
    pub dual_label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub prime: u32,
    pub polynomials: usize,
    pub pairs: usize,
    pub golden_rows: usize,
    pub records: Vec<AnalysisRecord>,
    pub labelled_duals: Vec<LabelledDual>,
    pub mismatches: Vec<Mismatch>,
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn verify_tables(p: u32) -> Result<VerifyReport> {
    verify_tables_with(golden(), p)
}

struct Checker<'a> {
    p: u32,
    mismatches: Vec<Mismatch>,
    entry: &'a GoldenEntry,
}

impl Checker<'_> {
    fn expect(&mut self, field: &str, expected: impl ToString, found: impl ToString) {
        let (expected, found) = (expected.to_string(), found.to_string());
        if expected != found {
            self.mismatches.push(Mismatch {
                no: self.entry.no.clone(),
                polynomial: self.entry.polynomial.clone(),
                field: format!("p={} {field}", self.p),
                expected,
                found,
            });
        }
    }
}

/// Group `<J_W, gens>` of a golden row, moved to canonical coordinates.
fn golden_row_group(entry: &GoldenEntry, row: &GoldenRow) -> Result<Option<(InvertiblePolynomial, SymmetryGroup)>> {
    let Some(gens) = &row.generators else { return Ok(None) };
    let w: InvertiblePolynomial = entry.polynomial.parse()?;
    let gens: Vec<DiagonalSymmetry> = gens.iter().map(|g| g.parse()).collect::<Result<_>>()?;
    let (canon, perm) = w.canonical();
    let h = group_from_generators(&w, &gens)?.permute(perm);
    Ok(Some((canon, h)))
}

pub fn verify_tables_with(tables: &GoldenTables, p: u32) -> Result<VerifyReport> {
    check_prime(p)?;
    let pairs = regenerate_pairs(p)?;
    let records: Vec<AnalysisRecord> = pairs
        .par_iter()
        .map(|(w, h)| analyze_with(tables, w, h, p))
        .collect::<Result<_>>()?;

    let empty = GoldenTable { prime: p, entries: Vec::new() };
    let table = tables.table(p).unwrap_or(&empty);
    let mut mismatches = Vec::new();
    let mut labelled_duals = Vec::new();
    let mut notes = Vec::new();

    let mut by_poly: HashMap<ExponentMatrix, Vec<(usize, &AnalysisRecord)>> = HashMap::new();
    for (i, rec) in records.iter().enumerate() {
        by_poly.entry(*pairs[i].0.matrix()).or_default().push((i, rec));
    }
    let mut seen_polys = std::collections::HashSet::new();

    for entry in &table.entries {
        let mut ck = Checker { p, mismatches: Vec::new(), entry };
        let golden_poly: InvertiblePolynomial = match entry.polynomial.parse() {
            Ok(w) => w,
            Err(e) => {
                ck.expect("polynomial", &entry.polynomial, e);
                mismatches.append(&mut ck.mismatches);
                continue;
            }
        };
        let ws = golden_poly.weight_system();
        let printed = normalize(entry.weights, entry.degree).map(|n| n.system.to_string());
        let computed = normalize(ws.weights, ws.degree).map(|n| n.system.to_string());
        ck.expect("weights", printed.unwrap_or_else(|e| e.to_string()), computed?);
        let canon = golden_poly.canonical().0;
        seen_polys.insert(*canon.matrix());
        let Some(recs) = by_poly.get(canon.matrix()) else {
            ck.expect("regenerated", "present", "missing");
            mismatches.append(&mut ck.mismatches);
            continue;
        };
        ck.expect("|SL/J|", entry.sl_index, recs[0].1.sl_index);

        let mut expected: Vec<(usize, u32, u32)> = entry.rows.iter().map(|r| (r.index, r.r, r.a)).collect();
        let mut found: Vec<(usize, u32, u32)> = recs.iter().map(|(_, r)| (r.index, r.r, r.a)).collect();
        expected.sort_unstable();
        found.sort_unstable();
        ck.expect("rows (|G/J|,r,a)", format!("{expected:?}"), format!("{found:?}"));

        for (_, rec) in recs {
            ck.expect("BHCR dual", &entry.dual, rec.dual_polynomial_no.as_deref().unwrap_or("?"));
            ck.expect("dual index", entry.sl_index / rec.index.max(1), rec.dual_group_index);
            ck.expect(&format!("mirror of index {}", rec.index), true, rec.mirror_check);
            if rec.notes.iter().any(|n| !notes.contains(n)) {
                notes.extend(rec.notes.iter().map(|n| format!("No. {} |G/J|={}: {n}", entry.no, rec.index)));
            }
        }

        for row in entry.rows.iter().filter(|r| r.generators.is_some()) {
            let label = row.label.clone().unwrap_or_else(|| "?".into());
            let (_, h) = golden_row_group(entry, row)?.expect("row has generators");
            let hit = recs.iter().find(|(i, _)| pairs[*i].1 == h);
            let Some((i, rec)) = hit else {
                ck.expect(&format!("row {label}"), "present", "missing");
                continue;
            };
            ck.expect(&format!("row {label} (r,a)"), format!("{},{}", row.r, row.a), format!("{},{}", rec.r, rec.a));
            let (w, g) = &pairs[*i];
            let dual_label = dual_row_label(table, w, g)?;
            labelled_duals.push(LabelledDual {
                no: entry.no.clone(),
                label,
                dual_no: rec.dual_polynomial_no.clone().unwrap_or_else(|| "?".into()),
                dual_label,
            });
        }

        if let Some(dual_entry) = table.entries.iter().find(|e| e.no == entry.dual) {
            for row in &entry.rows {
                let want = (entry.sl_index / row.index.max(1), 20 - row.r.min(20), row.a);
                let present = dual_entry.rows.iter().any(|d| (d.index, d.r, d.a) == want);
                ck.expect(&format!("golden dual row for |G/J|={} (r,a)=({},{})", row.index, row.r, row.a), true, present);
            }
        } else {
            ck.expect("golden dual entry", &entry.dual, "absent");
        }
        mismatches.append(&mut ck.mismatches);
    }

    for (w, _) in &pairs {
        if seen_polys.insert(*w.matrix()) {
            mismatches.push(Mismatch {
                no: "-".into(),
                polynomial: w.to_string(),
                field: format!("p={p} regenerated"),
                expected: "absent".into(),
                found: "extra polynomial".into(),
            });
        }
    }

    Ok(VerifyReport {
        prime: p,
        polynomials: by_poly.len(),
        pairs: pairs.len(),
        golden_rows: table.entries.iter().map(|e| e.rows.len()).sum(),
        records,
        labelled_duals,
        mismatches,
        notes,
    })
}

/// Label of the golden row whose group is the dual of `g`.
fn dual_row_label(table: &GoldenTable, w: &InvertiblePolynomial, g: &SymmetryGroup) -> Result<Option<String>> {
    let wt = transpose(w);
    let gt = dual_group(g, w.matrix())?;
    let (canon, perm) = wt.canonical();
    let gt = gt.permute(perm);
    for entry in &table.entries {
        for row in entry.rows.iter().filter(|r| r.label.is_some()) {
            if let Some((gw, h)) = golden_row_group(entry, row)? {
                if gw == canon && h == gt {
                    return Ok(row.label.clone());
                }
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

fn opt(x: Option<u32>) -> String {
    x.map_or("-".into(), |v| v.to_string())
}

pub fn render(report: &VerifyReport, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(report).expect("plain data"),
        Format::Csv => render_csv(report),
        Format::Markdown => render_markdown(report),
    }
}

fn render_csv(report: &VerifyReport) -> String {
    let mut out = String::from("no,polynomial,weights,p,generators,index,sl_index,r,a,g,n,k,dual_no,dual_index,dual_r,dual_a,mirror_check\n");
    for r in &report.records {
        let _ = writeln!(
            out,
            "{},{},\"{}\",{},\"{}\",{},{},{},{},{},{},{},{},{},{},{},{}",
            r.yonemura_no.as_deref().unwrap_or("-"),
            r.polynomial,
            r.weight_system,
            r.p,
            r.group_generators.join(";"),
            r.index,
            r.sl_index,
            r.r,
            r.a,
            opt(r.g),
            r.n,
            opt(r.k),
            r.dual_polynomial_no.as_deref().unwrap_or("-"),
            r.dual_group_index,
            r.dual_r,
            r.dual_a,
            r.mirror_check
        );
    }
    out
}

fn render_markdown(report: &VerifyReport) -> String {
    let mut out = format!(
        "# p = {}\n\n{} polynomials, {} pairs, {} golden rows, {} mismatches\n\n",
        report.prime,
        report.polynomials,
        report.pairs,
        report.golden_rows,
        report.mismatches.len()
    );
    out.push_str("| No. | polynomial | weights | G/J gens | \\|G/J\\| | (r,a) | (g,n,k) | dual | \\|Gᵀ/J\\| | mirror |\n");
    out.push_str("|---|---|---|---|---|---|---|---|---|---|\n");
    for r in &report.records {
        let _ = writeln!(
            out,
            "| {} | `{}` | {} | {} | {} | ({},{}) | ({},{},{}) | {} | {} | {} |",
            r.yonemura_no.as_deref().unwrap_or("-"),
            r.polynomial,
            r.weight_system,
            r.group_generators.join("; "),
            r.index,
            r.r,
            r.a,
            opt(r.g),
            r.n,
            opt(r.k),
            r.dual_polynomial_no.as_deref().unwrap_or("-"),
            r.dual_group_index,
            if r.mirror_check { "ok" } else { "FAIL" }
        );
    }
    if !report.labelled_duals.is_empty() {
        out.push_str("\n## Labelled groups\n\n");
        for d in &report.labelled_duals {
            let _ = writeln!(out, "- No. {} {}: dual is No. {} {}", d.no, d.label, d.dual_no, d.dual_label.as_deref().unwrap_or("?"));
        }
    }
    if !report.notes.is_empty() {
        out.push_str("\n## Notes\n\n");
        for n in &report.notes {
            let _ = writeln!(out, "- {n}");
        }
    }
    if !report.mismatches.is_empty() {
        out.push_str("\n## Mismatches\n\n");
        for m in &report.mismatches {
            let _ = writeln!(out, "- No. {} `{}` {}: expected {}, found {}", m.no, m.polynomial, m.field, m.expected, m.found);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(s: &str) -> InvertiblePolynomial {
        s.parse().unwrap()
    }

    #[test]
    fn analyze_example_13d() {
        let w = poly("x^2+y^3+z^8+w^24");
        let (j, sl) = bounding_groups(&w).unwrap();
        let rec = analyze(&w, &j, 3).unwrap();
        assert_eq!((rec.r, rec.a), (8, 1));
        assert_eq!(rec.yonemura_no.as_deref(), Some("13d"));
        assert_eq!(rec.dual_polynomial_no.as_deref(), Some("13d"));
        assert_eq!(rec.dual_group_index, 2);
        assert!(rec.mirror_check);
        assert!(rec.notes.is_empty());

        let rec = analyze(&w, &sl, 3).unwrap();
        assert_eq!((rec.r, rec.a, rec.k), (12, 1, Some(3)));
        assert_eq!(rec.dual_group_index, 1);
        assert_eq!(rec.notes.len(), 1);
        assert!(rec.notes[0].contains("k=3"));
    }

    #[test]
    fn analyze_example_21a() {
        let w = poly("x^2*w+y^5+z^5+w^5");
        let (_, sl) = bounding_groups(&w).unwrap();
        let rec = analyze(&w, &sl, 5).unwrap();
        assert_eq!((rec.r, rec.a), (18, 1));
        assert_eq!(rec.yonemura_no.as_deref(), Some("21a"));
        assert_eq!(rec.dual_polynomial_no.as_deref(), Some("6c"));
        assert_eq!(rec.dual_group_index, 1);
        assert!(rec.mirror_check);
    }

    #[test]
    fn analyze_example_87() {
        let w = poly("x^2*z+x*y^2+y*z^3+w^13");
        let (j, sl) = bounding_groups(&w).unwrap();
        assert_eq!(j, sl);
        let rec = analyze(&w, &j, 13).unwrap();
        assert_eq!((rec.r, rec.a), (10, 1));
        assert_eq!(rec.yonemura_no.as_deref(), Some("87"));
        assert_eq!(rec.dual_polynomial_no.as_deref(), Some("87"));
        assert!(rec.mirror_check);
    }

    #[test]
    fn analyze_rejects_bad_pairs() {
        let w = poly("x^2+y^3+z^8+w^24");
        let full = full_group(w.matrix()).unwrap();
        assert!(matches!(analyze(&w, &full, 3), Err(Error::InvalidPair(..))));
        let trivial = SymmetryGroup::trivial(*w.matrix());
        assert!(matches!(analyze(&w, &trivial, 3), Err(Error::InvalidPair(..))));
    }

    #[test]
    fn mirror_is_an_involution() {
        let w = poly("x^2+y^5+z^5+x*w^5");
        let (j, _) = bounding_groups(&w).unwrap();
        let rec = analyze(&w, &j, 5).unwrap();
        let wt = transpose(&w);
        let gt = dual_group(&j, w.matrix()).unwrap();
        let back = analyze(&wt, &gt, 5).unwrap();
        assert_eq!((back.dual_r, back.dual_a), (rec.r, rec.a));
        assert_eq!((back.r, back.a), (rec.dual_r, rec.dual_a));
    }

    #[test]
    fn verify_p13() {
        let report = verify_tables(13).unwrap();
        assert_eq!(report.records.len(), 1);
        assert!(report.is_clean(), "{:?}", report.mismatches);
    }

    #[test]
    fn verify_flags_transcription_errors() {
        let mut tables = golden().clone();
        let t = tables.tables.iter_mut().find(|t| t.prime == 13).unwrap();
        t.entries[0].rows[0].r = 12;
        let report = verify_tables_with(&tables, 13).unwrap();
        assert!(!report.is_clean());
        assert!(report.mismatches.iter().any(|m| m.field.contains("rows")));
    }

    #[test]
    fn renders_all_formats() {
        let report = verify_tables(13).unwrap();
        let json: serde_json::Value = serde_json::from_str(&render(&report, Format::Json)).unwrap();
        assert_eq!(json["records"][0]["yonemura_no"], "87");
        assert_eq!(json["records"][0]["mirror_check"], true);
        let csv = render(&report, Format::Csv);
        assert_eq!(csv.lines().count(), 2);
        assert!(render(&report, Format::Markdown).contains("| 87 |"));
    }
}
