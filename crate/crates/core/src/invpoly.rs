//! Invertible polynomials in four variables: exponent matrices, their
//! Fermat/chain/loop decomposition, transposition and enumeration of the
//! polynomials `x_j^p + f` for a weight system.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::weights::WeightSystem;

pub const VARIABLES: [char; 4] = ['x', 'y', 'z', 'w'];

/// `rows[i][j]` is the exponent of variable `j` in monomial `i`. Row `i` is
/// the monomial whose pure-power variable is `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentMatrix {
    pub rows: [[u32; 4]; 4],
}

impl ExponentMatrix {
    pub fn new(rows: [[u32; 4]; 4]) -> Self {
        Self { rows }
    }

    pub fn diagonal(exps: [u32; 4]) -> Self {
        let mut rows = [[0; 4]; 4];
        for i in 0..4 {
            rows[i][i] = exps[i];
        }
        Self { rows }
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        i64::from(self.rows[i][j])
    }

    pub fn transpose(&self) -> Self {
        let mut rows = [[0; 4]; 4];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.rows[j][i];
            }
        }
        Self { rows }
    }

    pub fn determinant(&self) -> i64 {
        let m: Vec<Vec<i64>> = (0..4)
            .map(|i| (0..4).map(|j| self.get(i, j)).collect())
            .collect();
        det_i64(&m)
    }

    /// Exact inverse, or `NotInvertible` when the determinant vanishes.
    pub fn inverse(&self) -> Result<[[Rational64; 4]; 4]> {
        let det = self.determinant();
        if det == 0 {
            return Err(Error::NotInvertible(format!("{self} has determinant 0")));
        }
        let mut inv = [[Rational64::zero(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                // inverse[i][j] = cofactor(j, i) / det
                let minor: Vec<Vec<i64>> = (0..4)
                    .filter(|&r| r != j)
                    .map(|r| (0..4).filter(|&c| c != i).map(|c| self.get(r, c)).collect())
                    .collect();
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                inv[i][j] = Rational64::new(sign * det_i64(&minor), det);
            }
        }
        Ok(inv)
    }

    /// Off-diagonal target of row `i`, if any.
    pub fn pointer(&self, i: usize) -> Option<usize> {
        (0..4).find(|&j| j != i && self.rows[i][j] > 0)
    }

    /// Relabel variables: new variable `k` is old variable `perm[k]`.
    pub fn permute(&self, perm: [usize; 4]) -> Self {
        let mut rows = [[0; 4]; 4];
        for (k, row) in rows.iter_mut().enumerate() {
            for (l, e) in row.iter_mut().enumerate() {
                *e = self.rows[perm[k]][perm[l]];
            }
        }
        Self { rows }
    }

    fn monomial(&self, i: usize) -> String {
        let mut parts = Vec::new();
        for j in 0..4 {
            match self.rows[i][j] {
                0 => {}
                1 => parts.push(VARIABLES[j].to_string()),
                e => parts.push(format!("{}^{e}", VARIABLES[j])),
            }
        }
        parts.join("*")
    }
}

impl fmt::Display for ExponentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let monos: Vec<String> = (0..4).map(|i| self.monomial(i)).collect();
        f.write_str(&monos.join("+"))
    }
}

fn det_i64(m: &[Vec<i64>]) -> i64 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        n => (0..n)
            .map(|c| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(k, _)| k != c)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect();
                let sign = if c % 2 == 0 { 1 } else { -1 };
                sign * m[0][c] * det_i64(&minor)
            })
            .sum(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Block {
    Fermat { var: usize, exponent: u32 },
    /// `vars[0]^e0 vars[1] + vars[1]^e1 vars[2] + ... + vars[last]^e_last`
    Chain { vars: Vec<usize>, exponents: Vec<u32> },
    /// Like a chain, but the last monomial points back to `vars[0]`.
    Loop { vars: Vec<usize>, exponents: Vec<u32> },
}

impl Block {
    pub fn vars(&self) -> Vec<usize> {
        match self {
            Block::Fermat { var, .. } => vec![*var],
            Block::Chain { vars, .. } | Block::Loop { vars, .. } => vars.clone(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Block::Fermat { .. } => "fermat",
            Block::Chain { .. } => "chain",
            Block::Loop { .. } => "loop",
        }
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |vs: &[usize]| vs.iter().map(|&v| VARIABLES[v].to_string()).collect::<Vec<_>>();
        let exps = |es: &[u32]| es.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",");
        match self {
            Block::Fermat { var, exponent } => write!(f, "Fermat({},{exponent})", VARIABLES[*var]),
            Block::Chain { vars, exponents } => {
                write!(f, "Chain({}; {})", names(vars).join("->"), exps(exponents))
            }
            Block::Loop { vars, exponents } => {
                write!(f, "Loop({}; {})", names(vars).join(","), exps(exponents))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomicDecomposition {
    pub blocks: Vec<Block>,
}

/// Split the exponent matrix into Fermat, chain and loop blocks.
pub fn decompose(m: &ExponentMatrix) -> Result<AtomicDecomposition> {
    let mut indegree = [0usize; 4];
    let mut next = [None; 4];
    for i in 0..4 {
        if m.rows[i][i] < 2 {
            return Err(Error::NotInvertible(format!(
                "monomial {i} of {m} has no power of {} with exponent >= 2",
                VARIABLES[i]
            )));
        }
        let off: Vec<usize> = (0..4).filter(|&j| j != i && m.rows[i][j] > 0).collect();
        match off.as_slice() {
            [] => {}
            [j] if m.rows[i][*j] == 1 => {
                next[i] = Some(*j);
                indegree[*j] += 1;
            }
            _ => {
                return Err(Error::NotInvertible(format!(
                    "monomial {} is not of atomic type",
                    m.monomial(i)
                )))
            }
        }
    }
    if let Some(v) = (0..4).find(|&v| indegree[v] > 1) {
        return Err(Error::NotInvertible(format!(
            "variable {} is multiplied into more than one monomial",
            VARIABLES[v]
        )));
    }

    let mut seen = [false; 4];
    let mut blocks = Vec::new();
    for start in 0..4 {
        if seen[start] || indegree[start] != 0 {
            continue;
        }
        let mut vars = vec![start];
        seen[start] = true;
        let mut cur = start;
        while let Some(n) = next[cur] {
            vars.push(n);
            seen[n] = true;
            cur = n;
        }
        let exponents = vars.iter().map(|&v| m.rows[v][v]).collect::<Vec<_>>();
        blocks.push(if vars.len() == 1 {
            Block::Fermat { var: start, exponent: exponents[0] }
        } else {
            Block::Chain { vars, exponents }
        });
    }
    for start in 0..4 {
        if seen[start] {
            continue;
        }
        let mut vars = vec![start];
        seen[start] = true;
        let mut cur = next[start].expect("unvisited variables lie on cycles");
        while cur != start {
            vars.push(cur);
            seen[cur] = true;
            cur = next[cur].expect("cycle");
        }
        let exponents = vars.iter().map(|&v| m.rows[v][v]).collect();
        blocks.push(Block::Loop { vars, exponents });
    }
    blocks.sort_by_key(|b| b.vars().into_iter().min());

    if m.determinant() == 0 {
        return Err(Error::NotInvertible(format!("{m} has determinant 0")));
    }
    Ok(AtomicDecomposition { blocks })
}

/// Row sums of `m^-1`, scaled to integer weights over a common degree.
pub fn weights_from_matrix(m: &ExponentMatrix) -> Result<WeightSystem> {
    let inv = m.inverse()?;
    let q: Vec<Rational64> = inv.iter().map(|row| row.iter().sum()).collect();
    if q.iter().any(|x| *x <= Rational64::zero()) {
        return Err(Error::NotInvertible(format!("{m} has a nonpositive weight")));
    }
    let d = q.iter().fold(1i64, |acc, x| acc.lcm(x.denom()));
    let w: Vec<u32> = q
        .iter()
        .map(|x| u32::try_from((x * d).to_integer()).expect("small weights"))
        .collect();
    WeightSystem::new([w[0], w[1], w[2], w[3]], u32::try_from(d).expect("small degree"))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InvertiblePolynomial {
    matrix: ExponentMatrix,
    weights: WeightSystem,
}

impl InvertiblePolynomial {
    pub fn from_matrix(matrix: ExponentMatrix) -> Result<Self> {
        decompose(&matrix)?;
        let weights = weights_from_matrix(&matrix)?;
        Ok(Self { matrix, weights })
    }

    pub fn matrix(&self) -> &ExponentMatrix {
        &self.matrix
    }

    /// Per-variable weights; sorted only for canonical polynomials.
    pub fn weight_system(&self) -> WeightSystem {
        self.weights
    }

    pub fn decomposition(&self) -> AtomicDecomposition {
        decompose(&self.matrix).expect("validated at construction")
    }

    pub fn is_calabi_yau(&self) -> bool {
        crate::weights::is_calabi_yau(&self.weights)
    }

    /// The variable `v` appearing only as `v^p`, if there is one. Two such
    /// variables are interchangeable, so the first is returned.
    pub fn p_variable(&self, p: u32) -> Option<usize> {
        (0..4).find(|&v| {
            self.matrix.rows[v][v] == p && (0..4).all(|j| j == v || (self.matrix.rows[v][j] == 0 && self.matrix.rows[j][v] == 0))
        })
    }

    pub fn permute(&self, perm: [usize; 4]) -> Self {
        let matrix = self.matrix.permute(perm);
        let weights = WeightSystem {
            weights: perm.map(|i| self.weights.weights[i]),
            degree: self.weights.degree,
        };
        Self { matrix, weights }
    }

    /// Canonical relabeling: weights nonincreasing, ties broken by the
    /// smallest diagonal exponents, then by the smallest pointer targets
    /// (a pure power counts as pointing past `w`). Returns the permutation used
    /// (new variable `k` is old variable `perm[k]`).
    pub fn canonical(&self) -> (Self, [usize; 4]) {
        let w = self.weights.weights;
        let mut best: Option<(([u32; 4], [usize; 4]), [usize; 4])> = None;
        for perm in permutations4() {
            if (0..3).any(|k| w[perm[k]] < w[perm[k + 1]]) {
                continue;
            }
            let m = self.matrix.permute(perm);
            let key = ([0, 1, 2, 3].map(|i| m.rows[i][i]), [0, 1, 2, 3].map(|i| m.pointer(i).unwrap_or(4)));
            if best.as_ref().is_none_or(|(b, _)| key < *b) {
                best = Some((key, perm));
            }
        }
        let (_, perm) = best.expect("sorting permutation exists");
        (self.permute(perm), perm)
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical().0 == *self
    }
}

/// The Berglund–Hübsch transpose.
pub fn transpose(w: &InvertiblePolynomial) -> InvertiblePolynomial {
    InvertiblePolynomial::from_matrix(w.matrix.transpose()).expect("transpose of an invertible polynomial is invertible")
}

pub fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    if (0..4).all(|i| p.contains(&i)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// All invertible `x_j^p + f(other variables)` of the given weights, up to
/// weight-preserving relabeling, in canonical form and sorted.
pub fn enumerate_form_p(ws: &WeightSystem, p: u32) -> Vec<InvertiblePolynomial> {
    let w = ws.weights;
    let d = ws.degree;
    let mut found = BTreeSet::new();
    for j in (0..4).filter(|&j| p * w[j] == d) {
        let others: Vec<usize> = (0..4).filter(|&i| i != j).collect();
        let choices: Vec<Option<usize>> = std::iter::once(None).chain(others.iter().map(|&i| Some(i))).collect();
        for &t0 in &choices {
            for &t1 in &choices {
                for &t2 in &choices {
                    let targets = [t0, t1, t2];
                    if let Some(m) = solve_exponents(ws, j, p, &others, &targets) {
                        if let Ok(poly) = InvertiblePolynomial::from_matrix(m) {
                            found.insert(poly.canonical().0);
                        }
                    }
                }
            }
        }
    }
    found.into_iter().collect()
}

fn solve_exponents(
    ws: &WeightSystem,
    j: usize,
    p: u32,
    others: &[usize],
    targets: &[Option<usize>; 3],
) -> Option<ExponentMatrix> {
    let pointed: Vec<usize> = targets.iter().flatten().copied().collect();
    let distinct: BTreeSet<usize> = pointed.iter().copied().collect();
    if distinct.len() != pointed.len() {
        return None;
    }
    let mut rows = [[0u32; 4]; 4];
    rows[j][j] = p;
    for (&i, &t) in others.iter().zip(targets) {
        if t == Some(i) {
            return None;
        }
        let rest = ws.degree.checked_sub(t.map_or(0, |t| ws.weights[t]))?;
        if rest % ws.weights[i] != 0 || rest / ws.weights[i] < 2 {
            return None;
        }
        rows[i][i] = rest / ws.weights[i];
        if let Some(t) = t {
            rows[i][t] = 1;
        }
    }
    Some(ExponentMatrix::new(rows))
}

impl fmt::Display for InvertiblePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.matrix.fmt(f)
    }
}

impl FromStr for ExponentMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if text.is_empty() {
            return Err(Error::parse("polynomial", "empty input"));
        }
        let mut rows: [Option<[u32; 4]>; 4] = [None; 4];
        for mono in text.split('+') {
            let exps = parse_monomial(mono)?;
            let main: Vec<usize> = (0..4).filter(|&v| exps[v] >= 2).collect();
            let &[v] = main.as_slice() else {
                return Err(Error::NotInvertible(format!(
                    "monomial {mono:?} must contain exactly one variable with exponent >= 2"
                )));
            };
            if rows[v].is_some() {
                return Err(Error::NotInvertible(format!(
                    "two monomials are pure powers of {}",
                    VARIABLES[v]
                )));
            }
            rows[v] = Some(exps);
        }
        let mut out = [[0; 4]; 4];
        for v in 0..4 {
            out[v] = rows[v].ok_or_else(|| {
                Error::NotInvertible(format!("no monomial with a power of {}", VARIABLES[v]))
            })?;
        }
        Ok(ExponentMatrix::new(out))
    }
}

fn parse_monomial(mono: &str) -> Result<[u32; 4]> {
    if mono.is_empty() {
        return Err(Error::parse("polynomial", "empty monomial"));
    }
    let mut exps = [0u32; 4];
    let mut chars = mono.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '*' {
            continue;
        }
        let v = VARIABLES
            .iter()
            .position(|&x| x == c)
            .ok_or_else(|| Error::parse("polynomial", format!("unexpected character {c:?} in {mono:?}")))?;
        let mut e = 1u32;
        if chars.peek() == Some(&'^') {
            chars.next();
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            e = digits
                .parse()
                .map_err(|_| Error::parse("polynomial", format!("missing exponent in {mono:?}")))?;
        }
        exps[v] += e;
    }
    Ok(exps)
}

impl FromStr for InvertiblePolynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_matrix(s.parse()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(s: &str) -> InvertiblePolynomial {
        s.parse().unwrap()
    }

    #[test]
    fn decompose_examples() {
        let d = decompose(&ExponentMatrix::diagonal([2, 3, 8, 24])).unwrap();
        assert_eq!(d.blocks.len(), 4);
        assert!(d.blocks.iter().all(|b| b.kind() == "fermat"));

        let d = poly("x^2+y^5+z^5+x*w^5").decomposition();
        assert_eq!(
            d.blocks,
            vec![
                Block::Chain { vars: vec![3, 0], exponents: vec![5, 2] },
                Block::Fermat { var: 1, exponent: 5 },
                Block::Fermat { var: 2, exponent: 5 },
            ]
        );

        let d = poly("x^3+y^3*z+y*z^3+w^6").decomposition();
        assert_eq!(
            d.blocks,
            vec![
                Block::Fermat { var: 0, exponent: 3 },
                Block::Loop { vars: vec![1, 2], exponents: vec![3, 3] },
                Block::Fermat { var: 3, exponent: 6 },
            ]
        );
    }

    #[test]
    fn decompose_rejects_bad_shapes() {
        let bad = [
            "x^2*y^2+y^3+z^3+w^3",
            "x^2*y+z^2*y+y^3+w^3",
            "x*y+y^2+z^2+w^2",
        ];
        for s in bad {
            assert!(matches!(s.parse::<InvertiblePolynomial>(), Err(Error::NotInvertible(_))), "{s}");
        }
        let m = ExponentMatrix::new([[1, 0, 0, 0], [0, 2, 0, 0], [0, 0, 2, 0], [0, 0, 0, 2]]);
        assert!(matches!(decompose(&m), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn weights_examples() {
        let ws = weights_from_matrix(&ExponentMatrix::diagonal([2, 3, 8, 24])).unwrap();
        assert_eq!((ws.weights, ws.degree), ([12, 8, 3, 1], 24));
        let ws = poly("x^2*w+y^5+z^5+w^5").weight_system();
        assert_eq!((ws.weights, ws.degree), ([2, 1, 1, 1], 5));
        let ws = weights_from_matrix(&ExponentMatrix::diagonal([7, 7, 7, 7])).unwrap();
        assert_eq!((ws.weights, ws.degree), ([1, 1, 1, 1], 7));
    }

    #[test]
    fn weights_are_row_sums_of_inverse() {
        let w = poly("x^2+y^5+z^5+x*w^5");
        let inv = w.matrix().inverse().unwrap();
        let ws = w.weight_system();
        for i in 0..4 {
            let s: Rational64 = inv[i].iter().sum();
            assert_eq!(s, Rational64::new(ws.weights[i].into(), ws.degree.into()));
        }
    }

    #[test]
    fn transpose_examples() {
        let w = poly("x^2+y^3+z^8+w^24");
        assert_eq!(transpose(&w), w);
        let w = poly("x^2+y^5+z^5+x*w^5");
        let t = transpose(&w);
        assert_eq!(t.to_string(), "x^2*w+y^5+z^5+w^5");
        assert_eq!(transpose(&t), w);
        assert_eq!(
            t.decomposition().blocks[0],
            Block::Chain { vars: vec![0, 3], exponents: vec![2, 5] }
        );
    }

    #[test]
    fn parse_print_round_trip() {
        for s in ["x^3+y^3*z+y*z^3+w^6", "x^2*w+y^5+z^5+w^5", "x^2+y^3+z^7+y*w^28"] {
            assert_eq!(poly(s).to_string(), s);
        }
        assert_eq!(poly("x^2 + y^5 + z^5 + xw^5").to_string(), "x^2+y^5+z^5+x*w^5");
        assert_eq!(poly("w^5+z^5+y^5+x^2w").to_string(), "x^2*w+y^5+z^5+w^5");
        assert!(matches!("x^2+y^5+z^5".parse::<InvertiblePolynomial>(), Err(Error::NotInvertible(_))));
        assert!(matches!("x^2+q^5".parse::<ExponentMatrix>(), Err(Error::Parse { .. })));
        assert!(matches!("x^+y^2".parse::<ExponentMatrix>(), Err(Error::Parse { .. })));
        assert!(matches!("".parse::<ExponentMatrix>(), Err(Error::Parse { .. })));
    }

    #[test]
    fn enumerate_examples() {
        let ws = WeightSystem::new([5, 4, 3, 3], 15).unwrap();
        let got: Vec<String> = enumerate_form_p(&ws, 3).iter().map(|w| w.to_string()).collect();
        assert_eq!(got.len(), 2);
        assert!(got.contains(&"x^3+y^3*z+z^4*w+w^5".to_string()), "{got:?}");
        assert!(got.contains(&"x^3+y^3*z+z^5+w^5".to_string()), "{got:?}");

        let five = enumerate_form_p(&ws, 5);
        assert_eq!(five.len(), 1);
        assert_eq!(five[0].to_string(), "x^3+y^3*z+z^5+w^5");
        let v = five[0].p_variable(5).unwrap();
        assert_eq!(ws.weights[v], 3);

        let ws = WeightSystem::new([21, 14, 6, 1], 42).unwrap();
        let got: Vec<String> = enumerate_form_p(&ws, 7).iter().map(|w| w.to_string()).collect();
        for s in ["x^2+y^3+z^7+w^42", "x^2+y^3+z^7+x*w^21", "x^2+y^3+z^7+y*w^28"] {
            assert!(got.contains(&s.to_string()), "{s} not in {got:?}");
        }
    }

    #[test]
    fn canonical_sorts_weights() {
        let w = poly("x^3+y^3*z+y*z^3+w^6");
        assert!(w.is_canonical());
        let shuffled = w.permute([3, 1, 0, 2]);
        assert_eq!(shuffled.canonical().0, w);
        let (c, perm) = poly("x^2+y^3*x+z^5+w^15").canonical();
        assert!(c.weight_system().is_sorted());
        assert_eq!(poly("x^2+y^3*x+z^5+w^15").permute(perm), c);
    }

    #[test]
    fn p_variable_requires_isolated_fermat() {
        let w = poly("x^3+y^3*z+z^5+w^5");
        assert_eq!(w.p_variable(5), Some(3));
        assert_eq!(w.p_variable(3), Some(0));
        assert_eq!(poly("x^2*w+y^5+z^5+w^5").p_variable(5), Some(1));
        assert_eq!(poly("x^2+y^5+z^5+x*w^5").p_variable(2), None);
    }
}
