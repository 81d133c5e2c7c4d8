//! Even lattices given by Gram matrices, their discriminant groups and
//! signatures, the classification of p-elementary invariant lattices of
//! order-p non-symplectic automorphisms, and the mirror-lattice check.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::check_prime;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    pub gram: Vec<Vec<i64>>,
    pub label: Option<String>,
}

impl Lattice {
    pub fn new(gram: Vec<Vec<i64>>, label: Option<String>) -> Result<Self> {
        let n = gram.len();
        if gram.iter().any(|row| row.len() != n) {
            return Err(Error::Lattice("Gram matrix is not square".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::Lattice("Gram matrix is not symmetric".into()));
                }
            }
        }
        Ok(Self { gram, label })
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.gram[i][i] % 2 == 0)
    }

    pub fn determinant(&self) -> BigInt {
        let m = to_rational(&self.gram);
        rational_det(m).to_integer()
    }

    /// Gram matrix multiplied by `n`.
    pub fn scaled(&self, n: i64) -> Self {
        Self {
            gram: self.gram.iter().map(|r| r.iter().map(|x| x * n).collect()).collect(),
            label: self.label.as_ref().map(|l| format!("{l}({n})")),
        }
    }

    /// The dual lattice rescaled by `n`, i.e. Gram matrix `n G^-1`; it must
    /// come out integral and even.
    pub fn dual_scaled(&self, n: i64) -> Result<Self> {
        let inv = rational_inverse(to_rational(&self.gram))
            .ok_or_else(|| Error::Lattice("degenerate lattice has no dual".into()))?;
        let scale = BigRational::from_integer(BigInt::from(n));
        let mut gram = Vec::with_capacity(inv.len());
        for row in inv {
            let mut out = Vec::with_capacity(row.len());
            for x in row {
                let y = x * &scale;
                if !y.is_integer() {
                    return Err(Error::Lattice(format!("dual scaled by {n} is not integral")));
                }
                out.push(y.to_integer().to_i64().expect("small entries"));
            }
            gram.push(out);
        }
        let dual = Self { gram, label: self.label.as_ref().map(|l| format!("{l}*({n})")) };
        if !dual.is_even() {
            return Err(Error::Lattice(format!("dual scaled by {n} is not even")));
        }
        Ok(dual)
    }

    pub fn direct_sum(parts: &[Lattice]) -> Self {
        let n: usize = parts.iter().map(Lattice::rank).sum();
        let mut gram = vec![vec![0; n]; n];
        let mut off = 0;
        for p in parts {
            for (i, row) in p.gram.iter().enumerate() {
                for (j, &x) in row.iter().enumerate() {
                    gram[off + i][off + j] = x;
                }
            }
            off += p.rank();
        }
        let labels: Vec<String> = parts.iter().filter_map(|p| p.label.clone()).collect();
        Self { gram, label: (labels.len() == parts.len()).then(|| labels.join("+")) }
    }

    pub fn discriminant(&self) -> DiscriminantInvariants {
        let invariant_factors: Vec<BigInt> = smith_diagonal(&self.gram).into_iter().filter(|d| !d.is_one()).collect();
        let order = invariant_factors.iter().fold(BigInt::one(), |acc, d| acc * d);
        let p_elementary_for = match invariant_factors.first() {
            Some(first) if invariant_factors.iter().all(|d| d == first) && is_prime(first) => Some(first.clone()),
            _ => None,
        };
        DiscriminantInvariants {
            length: invariant_factors.len(),
            order,
            p_elementary_for,
            invariant_factors,
        }
    }

    /// `(t_plus, t_minus)`, zero eigenvalues rejected.
    pub fn signature(&self) -> Result<(usize, usize)> {
        signature(&self.gram)
    }

    pub fn summary(&self) -> Result<LatticeSummary> {
        let disc = self.discriminant();
        Ok(LatticeSummary {
            label: self.label.clone(),
            rank: self.rank(),
            signature: self.signature()?,
            determinant: self.determinant().to_string(),
            even: self.is_even(),
            invariant_factors: disc.invariant_factors.iter().map(|d| d.to_string()).collect(),
        })
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = &self.label {
            writeln!(f, "{l}")?;
        }
        for row in &self.gram {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:>3}")).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LatticeSummary {
    pub label: Option<String>,
    pub rank: usize,
    pub signature: (usize, usize),
    pub determinant: String,
    pub even: bool,
    pub invariant_factors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscriminantInvariants {
    pub invariant_factors: Vec<BigInt>,
    pub length: usize,
    pub order: BigInt,
    pub p_elementary_for: Option<BigInt>,
}

impl DiscriminantInvariants {
    /// Length `a` if the group is `(Z/p)^a`; unimodular counts as `a = 0`.
    pub fn p_elementary_length(&self, p: u32) -> Option<usize> {
        let p = BigInt::from(p);
        self.invariant_factors.iter().all(|d| *d == p).then_some(self.length)
    }
}

fn is_prime(n: &BigInt) -> bool {
    let Some(n) = n.to_u64() else { return false };
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn to_rational(m: &[Vec<i64>]) -> Vec<Vec<BigRational>> {
    m.iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect())
        .collect()
}

fn rational_det(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let pivot = m[c][c].clone();
        det *= &pivot;
        for r in c + 1..n {
            if m[r][c].is_zero() {
                continue;
            }
            let f = &m[r][c] / &pivot;
            for k in c..n {
                let v = &f * &m[c][k];
                m[r][k] -= v;
            }
        }
    }
    det
}

fn rational_inverse(mut m: Vec<Vec<BigRational>>) -> Option<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero())?;
        m.swap(p, c);
        inv.swap(p, c);
        let pivot = m[c][c].clone();
        for k in 0..n {
            m[c][k] = &m[c][k] / &pivot;
            inv[c][k] = &inv[c][k] / &pivot;
        }
        for r in 0..n {
            if r == c || m[r][c].is_zero() {
                continue;
            }
            let f = m[r][c].clone();
            for k in 0..n {
                let a = &f * &m[c][k];
                m[r][k] -= a;
                let b = &f * &inv[c][k];
                inv[r][k] -= b;
            }
        }
    }
    Some(inv)
}

/// Diagonal of the Smith normal form, absolute values, including zeros and ones.
pub fn smith_diagonal(gram: &[Vec<i64>]) -> Vec<BigInt> {
    let mut m: Vec<Vec<BigInt>> = gram.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut diag = Vec::new();
    for t in 0..rows.min(cols) {
        loop {
            // smallest nonzero entry of the remaining block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if !m[i][j].is_zero() && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                diag.extend(std::iter::repeat_n(BigInt::zero(), rows.min(cols) - t));
                return diag;
            };
            m.swap(t, bi);
            for row in m.iter_mut() {
                row.swap(t, bj);
            }
            let mut clean = true;
            for i in t + 1..rows {
                let q = m[i][t].div_floor(&m[t][t]);
                if !q.is_zero() {
                    for j in t..cols {
                        let v = &q * &m[t][j];
                        m[i][j] -= v;
                    }
                }
                clean &= m[i][t].is_zero();
            }
            for j in t + 1..cols {
                let q = m[t][j].div_floor(&m[t][t]);
                if !q.is_zero() {
                    for i in t..rows {
                        let v = &q * &m[i][t];
                        m[i][j] -= v;
                    }
                }
                clean &= m[t][j].is_zero();
            }
            if !clean {
                continue;
            }
            let pivot = m[t][t].clone();
            let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !m[i][j].is_multiple_of(&pivot)));
            match offender {
                Some(i) => {
                    for j in t..cols {
                        let v = m[i][j].clone();
                        m[t][j] += v;
                    }
                }
                None => {
                    diag.push(pivot.abs());
                    break;
                }
            }
        }
    }
    diag
}

/// Signature by exact congruence diagonalization.
pub fn signature(gram: &[Vec<i64>]) -> Result<(usize, usize)> {
    let mut m = to_rational(gram);
    let n = m.len();
    let (mut pos, mut neg) = (0, 0);
    for k in 0..n {
        if m[k][k].is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !m[j][j].is_zero()) {
                m.swap(k, j);
                for row in m.iter_mut() {
                    row.swap(k, j);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| !m[k][j].is_zero()) {
                // replace e_k by e_k + e_j; the new diagonal entry is 2 m[k][j]
                for c in 0..n {
                    let v = m[j][c].clone();
                    m[k][c] += v;
                }
                for r in 0..n {
                    let v = m[r][j].clone();
                    m[r][k] += v;
                }
            } else {
                return Err(Error::Lattice("degenerate Gram matrix".into()));
            }
        }
        let pivot = m[k][k].clone();
        if pivot.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for r in k + 1..n {
            if m[r][k].is_zero() {
                continue;
            }
            let f = &m[r][k] / &pivot;
            for c in k..n {
                let v = &f * &m[k][c];
                m[r][c] -= v;
            }
        }
        for r in k + 1..n {
            m[k][r] = BigRational::zero();
            m[r][k] = BigRational::zero();
        }
    }
    Ok((pos, neg))
}

pub fn hyperbolic_plane() -> Lattice {
    Lattice { gram: vec![vec![0, 1], vec![1, 0]], label: Some("U".into()) }
}

/// Negative definite `A_n`.
pub fn root_a(n: usize) -> Lattice {
    let mut gram = vec![vec![0; n]; n];
    for i in 0..n {
        gram[i][i] = -2;
        if i + 1 < n {
            gram[i][i + 1] = 1;
            gram[i + 1][i] = 1;
        }
    }
    Lattice { gram, label: Some(format!("A{n}")) }
}

/// Negative definite `E_n` for n = 6, 7, 8: a chain of n-1 roots with one
/// more attached to the third.
pub fn root_e(n: usize) -> Result<Lattice> {
    if !(6..=8).contains(&n) {
        return Err(Error::Lattice(format!("no root lattice E{n}")));
    }
    let mut l = root_a(n - 1);
    let mut gram = vec![vec![0; n]; n];
    for (i, row) in l.gram.iter().enumerate() {
        gram[i][..n - 1].copy_from_slice(row);
    }
    gram[n - 1][n - 1] = -2;
    gram[2][n - 1] = 1;
    gram[n - 1][2] = 1;
    l.gram = gram;
    l.label = Some(format!("E{n}"));
    Ok(l)
}

/// `K_p`, for p = 3 mod 4.
pub fn k_lattice(p: i64) -> Result<Lattice> {
    if p.rem_euclid(4) != 3 {
        return Err(Error::CongruenceViolation { p, need: 3 });
    }
    Ok(Lattice { gram: vec![vec![-(p + 1) / 2, 1], vec![1, -2]], label: Some(format!("K{p}")) })
}

/// `H_p`, for p = 1 mod 4.
pub fn h_lattice(p: i64) -> Result<Lattice> {
    if p.rem_euclid(4) != 1 {
        return Err(Error::CongruenceViolation { p, need: 1 });
    }
    Ok(Lattice { gram: vec![vec![(p - 1) / 2, 1], vec![1, -2]], label: Some(format!("H{p}")) })
}

/// Build a lattice from an expression such as `U+U(3)+A2^5` or `H5+A4*(5)`.
/// Summands: `U`, `An`, `E6`/`E7`/`E8`, `Kp`, `Hp`, each optionally followed
/// by `*` (dual), `(n)` (scaling) and `^k` (repetition).
pub fn make(expr: &str) -> Result<Lattice> {
    let text: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    let text = text.replace('⊕', "+");
    if text.is_empty() {
        return Err(Error::parse("lattice expression", "empty"));
    }
    let mut parts = Vec::new();
    for token in text.split('+') {
        let (lattice, count) = parse_summand(token)?;
        parts.extend(std::iter::repeat_n(lattice, count));
    }
    let mut l = Lattice::direct_sum(&parts);
    l.label = Some(text);
    Ok(l)
}

fn parse_summand(token: &str) -> Result<(Lattice, usize)> {
    let err = |msg: &str| Error::parse("lattice expression", format!("{msg} in {token:?}"));
    let name_end = token.char_indices().nth(1).map_or(token.len(), |(i, _)| i);
    let (name, rest) = token.split_at(name_end);
    let digits_end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
    let (digits, mut rest) = rest.split_at(digits_end);
    let index: Option<i64> = if digits.is_empty() { None } else { Some(digits.parse().map_err(|_| err("bad index"))?) };

    let mut base = match (name, index) {
        ("U", None) => hyperbolic_plane(),
        ("A", Some(n)) if n >= 1 => root_a(usize::try_from(n).map_err(|_| err("bad index"))?),
        ("E", Some(n)) => root_e(usize::try_from(n).map_err(|_| err("bad index"))?)?,
        ("K", Some(p)) => k_lattice(p)?,
        ("H", Some(p)) => h_lattice(p)?,
        _ => return Err(err("unknown summand")),
    };
    let dual = rest.starts_with('*');
    if dual {
        rest = &rest[1..];
    }
    let mut scale = None;
    if let Some(inner) = rest.strip_prefix('(') {
        let close = inner.find(')').ok_or_else(|| err("missing ')'"))?;
        scale = Some(inner[..close].parse::<i64>().map_err(|_| err("bad scale"))?);
        rest = &inner[close + 1..];
    }
    let mut count = 1;
    if let Some(k) = rest.strip_prefix('^') {
        count = k.parse().map_err(|_| err("bad exponent"))?;
        rest = "";
    }
    if !rest.is_empty() {
        return Err(err("trailing characters"));
    }
    match (dual, scale) {
        (true, Some(n)) => base = base.dual_scaled(n)?,
        (true, None) => return Err(err("dual needs a scale, e.g. E6*(3)")),
        (false, Some(n)) => base = base.scaled(n),
        (false, None) => {}
    }
    if scale == Some(0) {
        return Err(err("scale 0"));
    }
    Ok((base, count))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub p: u32,
    pub r: u32,
    pub a: u32,
    pub g: Option<u32>,
    pub n: u32,
    pub k: Option<u32>,
    #[serde(rename = "T")]
    pub t_name: String,
    #[serde(rename = "S")]
    pub s_name: String,
}

impl ClassificationRow {
    pub fn m(&self) -> u32 {
        (22 - self.r) / (self.p - 1)
    }
}

const CLASSIFICATION_JSON: &str = include_str!("../data/classification.json");

pub fn classification() -> &'static [ClassificationRow] {
    static CELL: OnceLock<Vec<ClassificationRow>> = OnceLock::new();
    CELL.get_or_init(|| serde_json::from_str(CLASSIFICATION_JSON).expect("embedded classification.json is valid"))
}

pub fn classify(p: u32, r: u32, a: u32) -> Result<&'static ClassificationRow> {
    check_prime(p)?;
    classification()
        .iter()
        .find(|row| row.p == p && row.r == r && row.a == a)
        .ok_or(Error::NoSuchRow { p, r, a })
}

/// Rows whose invariant lattice admits no mirror: their transcendental
/// lattice does not split off a hyperbolic plane.
pub const MIRROR_EXCLUSIONS: [(u32, u32, u32); 3] = [(3, 20, 1), (5, 6, 4), (7, 4, 3)];

pub fn is_mirror_hyperbolic(p: u32, r: u32, a: u32) -> bool {
    !MIRROR_EXCLUSIONS.contains(&(p, r, a))
}

pub fn mirror_invariants(p: u32, r: u32, a: u32) -> Result<(u32, u32)> {
    classify(p, r, a)?;
    if !is_mirror_hyperbolic(p, r, a) {
        return Err(Error::NotMirrorHyperbolic { p, r, a });
    }
    Ok((20 - r, a))
}

/// `(m, a)` coordinates of the rows for one prime, `m = (22 - r)/(p - 1)`.
pub fn ma_points(p: u32) -> Result<Vec<(u32, u32)>> {
    check_prime(p)?;
    Ok(classification().iter().filter(|row| row.p == p).map(|row| (row.m(), row.a)).collect())
}

/// Rank, signature and discriminant invariant factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsometryTriple {
    pub rank: usize,
    pub signature: (usize, usize),
    pub invariant_factors: Vec<BigInt>,
}

impl IsometryTriple {
    pub fn of(l: &Lattice) -> Result<Self> {
        Ok(Self { rank: l.rank(), signature: l.signature()?, invariant_factors: l.discriminant().invariant_factors })
    }

    /// The triple of an even hyperbolic p-elementary lattice of rank `r`.
    pub fn hyperbolic(p: u32, r: u32, a: u32) -> Self {
        let r = r as usize;
        Self {
            rank: r,
            signature: (1, r - 1),
            invariant_factors: vec![BigInt::from(p); a as usize],
        }
    }
}

/// Whether the row's transcendental lattice is `U` plus a lattice with the
/// invariants of the mirror: the `S` lattice of row `(p, 20-r, a)` when it
/// is tabulated, otherwise the hyperbolic p-elementary triple `(20-r, a)`.
pub fn verify_mirror_decomposition(p: u32, r: u32, a: u32) -> Result<bool> {
    let row = classify(p, r, a)?;
    if !is_mirror_hyperbolic(p, r, a) {
        return Err(Error::NotMirrorHyperbolic { p, r, a });
    }
    let mut tokens: Vec<&str> = row.t_name.split('+').collect();
    let Some(pos) = tokens.iter().position(|t| *t == "U") else {
        return Ok(false);
    };
    tokens.remove(pos);
    let rest = IsometryTriple::of(&make(&tokens.join("+"))?)?;
    let target = match classify(p, 20 - r, a) {
        Ok(mirror) => IsometryTriple::of(&make(&mirror.s_name)?)?,
        Err(Error::NoSuchRow { .. }) => IsometryTriple::hyperbolic(p, 20 - r, a),
        Err(e) => return Err(e),
    };
    Ok(rest == target)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowCheck {
    pub p: u32,
    pub r: u32,
    pub a: u32,
    pub s_ok: bool,
    pub t_ok: bool,
}

/// `S` must be even of signature `(1, r-1)` and `T` even of signature
/// `(2, 20-r)`, both p-elementary of length `a`.
pub fn check_row(row: &ClassificationRow) -> Result<RowCheck> {
    let fits = |l: &Lattice, sig: (usize, usize)| -> Result<bool> {
        Ok(l.is_even()
            && l.signature()? == sig
            && l.discriminant().p_elementary_length(row.p) == Some(row.a as usize))
    };
    let r = row.r as usize;
    Ok(RowCheck {
        p: row.p,
        r: row.r,
        a: row.a,
        s_ok: fits(&make(&row.s_name)?, (1, r - 1))?,
        t_ok: fits(&make(&row.t_name)?, (2, 20 - r))?,
    })
}
