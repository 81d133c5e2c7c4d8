//! Diagonal symmetries, written additively as vectors in `(Q/Z)^4`, and the
//! finite groups they form: `G_W`, `J_W`, `SL_W`, the groups in between and
//! the dual group of a pair.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::invpoly::{ExponentMatrix, InvertiblePolynomial};

/// Reduce into `[0, 1)`.
pub fn frac(x: Rational64) -> Rational64 {
    x - x.floor()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DiagonalSymmetry(pub [Rational64; 4]);

impl DiagonalSymmetry {
    pub fn new(coords: [Rational64; 4]) -> Self {
        Self(coords.map(frac))
    }

    pub fn zero() -> Self {
        Self([Rational64::zero(); 4])
    }

    pub fn from_ratios(pairs: [(i64, i64); 4]) -> Self {
        Self::new(pairs.map(|(n, d)| Rational64::new(n, d)))
    }

    /// `1/p` in slot `var`, zero elsewhere.
    pub fn unit(var: usize, p: u32) -> Self {
        let mut c = [Rational64::zero(); 4];
        c[var] = Rational64::new(1, p.into());
        Self(c)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new([0, 1, 2, 3].map(|i| self.0[i] + other.0[i]))
    }

    pub fn neg(&self) -> Self {
        Self::new(self.0.map(|x| -x))
    }

    pub fn scale(&self, k: Rational64) -> Self {
        Self::new(self.0.map(|x| x * k))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn order(&self) -> i64 {
        self.0.iter().fold(1, |acc, x| acc.lcm(x.denom()))
    }

    pub fn has_integral_sum(&self) -> bool {
        self.0.iter().sum::<Rational64>().is_integer()
    }

    /// `A g` is integral, i.e. every monomial of the host is invariant.
    pub fn is_symmetry_of(&self, host: &ExponentMatrix) -> bool {
        (0..4).all(|i| {
            (0..4)
                .map(|j| self.0[j] * host.get(i, j))
                .sum::<Rational64>()
                .is_integer()
        })
    }

    pub fn permute(&self, perm: [usize; 4]) -> Self {
        Self(perm.map(|i| self.0[i]))
    }

    /// Vanishing coordinates.
    pub fn zero_support(&self) -> Vec<usize> {
        (0..4).filter(|&i| self.0[i].is_zero()).collect()
    }
}

impl fmt::Display for DiagonalSymmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for DiagonalSymmetry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::parse("group element", format!("{s:?} needs 4 coordinates")));
        }
        let mut c = [Rational64::zero(); 4];
        for (slot, part) in c.iter_mut().zip(&parts) {
            *slot = parse_fraction(part)?;
        }
        Ok(Self::new(c))
    }
}

fn parse_fraction(s: &str) -> Result<Rational64> {
    let bad = || Error::parse("group element", format!("bad fraction {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Rational64::new(n, d))
        }
        None => Ok(Rational64::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// `g1;g2;...`, each a comma separated 4-tuple. Empty input means no generators.
pub fn parse_group_literal(s: &str) -> Result<Vec<DiagonalSymmetry>> {
    s.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect()
}

/// A finite group of diagonal symmetries of `host`, fully enumerated.
#[derive(Debug, Clone)]
pub struct SymmetryGroup {
    pub host: ExponentMatrix,
    pub generators: Vec<DiagonalSymmetry>,
    elements: Vec<DiagonalSymmetry>,
}

impl PartialEq for SymmetryGroup {
    fn eq(&self, other: &Self) -> bool {
        self.host == other.host && self.elements == other.elements
    }
}

impl Eq for SymmetryGroup {}

impl SymmetryGroup {
    pub fn generate(host: ExponentMatrix, generators: Vec<DiagonalSymmetry>) -> Result<Self> {
        if let Some(bad) = generators.iter().find(|g| !g.is_symmetry_of(&host)) {
            return Err(Error::InvalidPair(
                host.to_string(),
                format!("({bad}) is not a symmetry of the polynomial"),
            ));
        }
        let elements = closure(&generators);
        Ok(Self { host, generators, elements })
    }

    pub fn trivial(host: ExponentMatrix) -> Self {
        Self { host, generators: Vec::new(), elements: vec![DiagonalSymmetry::zero()] }
    }

    /// Sorted elements.
    pub fn elements(&self) -> &[DiagonalSymmetry] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, g: &DiagonalSymmetry) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    pub fn is_subgroup_of(&self, other: &Self) -> bool {
        self.elements.iter().all(|g| other.contains(g))
    }

    /// `|self / sub|`.
    pub fn index_over(&self, sub: &Self) -> usize {
        self.order() / sub.order()
    }

    /// Add generators to `self` and close up.
    pub fn join(&self, extra: &[DiagonalSymmetry]) -> Result<Self> {
        let mut gens = self.generators.clone();
        gens.extend_from_slice(extra);
        Self::generate(self.host, gens)
    }

    /// Lexicographically smallest generators of `self` modulo `base`, chosen
    /// greedily.
    pub fn generators_over(&self, base: &Self) -> Vec<DiagonalSymmetry> {
        let mut span: HashSet<DiagonalSymmetry> = base.elements.iter().copied().collect();
        let mut gens = base.generators.clone();
        let mut extra = Vec::new();
        for e in &self.elements {
            if span.len() == self.order() {
                break;
            }
            if !span.contains(e) {
                extra.push(*e);
                gens.push(*e);
                span = closure(&gens).into_iter().collect();
            }
        }
        extra
    }

    /// Relabel coordinates along with the host polynomial.
    pub fn permute(&self, perm: [usize; 4]) -> Self {
        let mut elements: Vec<DiagonalSymmetry> = self.elements.iter().map(|g| g.permute(perm)).collect();
        elements.sort();
        Self {
            host: self.host.permute(perm),
            generators: self.generators.iter().map(|g| g.permute(perm)).collect(),
            elements,
        }
    }
}

fn closure(generators: &[DiagonalSymmetry]) -> Vec<DiagonalSymmetry> {
    let zero = DiagonalSymmetry::zero();
    let mut seen: HashSet<DiagonalSymmetry> = HashSet::from([zero]);
    let mut frontier = vec![zero];
    while let Some(a) = frontier.pop() {
        for g in generators {
            let b = a.add(g);
            if seen.insert(b) {
                frontier.push(b);
            }
        }
    }
    let mut out: Vec<DiagonalSymmetry> = seen.into_iter().collect();
    out.sort();
    out
}

/// `G_W`: generated by the columns of `A^-1`.
pub fn full_group(a: &ExponentMatrix) -> Result<SymmetryGroup> {
    let inv = a.inverse()?;
    let gens = (0..4)
        .map(|j| DiagonalSymmetry::new([0, 1, 2, 3].map(|i| inv[i][j])))
        .collect();
    SymmetryGroup::generate(*a, gens)
}

/// `j_W = (w1/d, ..., w4/d)`.
pub fn grading_operator(w: &InvertiblePolynomial) -> DiagonalSymmetry {
    let ws = w.weight_system();
    DiagonalSymmetry::new(ws.weights.map(|x| Rational64::new(x.into(), ws.degree.into())))
}

pub fn grading_group(w: &InvertiblePolynomial) -> SymmetryGroup {
    SymmetryGroup::generate(*w.matrix(), vec![grading_operator(w)]).expect("j_W is a symmetry")
}

/// Elements with integral coordinate sum.
pub fn sl_subgroup(g: &SymmetryGroup) -> SymmetryGroup {
    let elements: Vec<DiagonalSymmetry> = g.elements.iter().filter(|e| e.has_integral_sum()).copied().collect();
    let mut out = SymmetryGroup { host: g.host, generators: Vec::new(), elements };
    out.generators = out.generators_over(&SymmetryGroup::trivial(g.host));
    out
}

/// Every group `H` with `j ⊆ H ⊆ s`, largest first. Each carries the
/// generators of `j` followed by its lexicographically smallest generators
/// over `j`.
pub fn subgroups_between(j: &SymmetryGroup, s: &SymmetryGroup) -> Result<Vec<SymmetryGroup>> {
    if !j.is_subgroup_of(s) {
        return Err(Error::Inconsistent("lower group is not contained in upper group".into()));
    }
    let mut found: BTreeSet<Vec<DiagonalSymmetry>> = BTreeSet::new();
    let mut groups: Vec<SymmetryGroup> = Vec::new();
    let mut push = |h: SymmetryGroup, groups: &mut Vec<SymmetryGroup>| {
        if found.insert(h.elements.clone()) {
            groups.push(h);
        }
    };
    for e in &s.elements {
        if !j.contains(e) {
            push(j.join(&[*e])?, &mut groups);
        }
    }
    push(j.clone(), &mut groups);
    let mut done = 0;
    while done < groups.len() {
        let b = done;
        for a in 0..b {
            let mut gens = groups[a].generators.clone();
            gens.extend_from_slice(&groups[b].generators);
            let joined = SymmetryGroup::generate(j.host, gens)?;
            push(joined, &mut groups);
        }
        done += 1;
    }
    let mut out: Vec<SymmetryGroup> = groups
        .into_iter()
        .map(|mut h| {
            let extra = h.generators_over(j);
            h.generators = j.generators.iter().copied().chain(extra).collect();
            h
        })
        .collect();
    out.sort_by(|a, b| b.order().cmp(&a.order()).then_with(|| a.generators.cmp(&b.generators)));
    Ok(out)
}

/// `{g ∈ G_{W^T} : g A h^T ∈ Z for all h ∈ G}`, hosted by `A^T`.
pub fn dual_group(g: &SymmetryGroup, a: &ExponentMatrix) -> Result<SymmetryGroup> {
    let at = a.transpose();
    let host_full = full_group(&at)?;
    let pairing = |x: &DiagonalSymmetry, h: &DiagonalSymmetry| -> bool {
        let mut s = Rational64::zero();
        for i in 0..4 {
            for k in 0..4 {
                s += x.0[i] * a.get(i, k) * h.0[k];
            }
        }
        s.is_integer()
    };
    let hs: &[DiagonalSymmetry] = if g.generators.is_empty() { &g.elements } else { &g.generators };
    let elements: Vec<DiagonalSymmetry> = host_full
        .elements
        .iter()
        .filter(|x| hs.iter().all(|h| pairing(x, h)))
        .copied()
        .collect();
    let mut out = SymmetryGroup { host: at, generators: Vec::new(), elements };
    out.generators = out.generators_over(&SymmetryGroup::trivial(at));
    Ok(out)
}
