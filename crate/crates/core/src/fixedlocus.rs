//! Fixed locus of `sigma_p` on the resolved quotient `X_{W,G}`.
//!
//! Points of the quotient are classified by their set of nonzero
//! coordinates. Write `Gamma = C* . G`; an element of `Gamma` is
//! `g + q w mod Z` with `w` the weight vector. A stratum with nonzero
//! coordinates `N` is fixed by `sigma_p` iff some element of
//! `sigma_p + Gamma` vanishes on `N`. Over each A_{m-1} point the action on
//! the exceptional chain is read off a toric local model.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::Zero;
use serde::Serialize;

use crate::diaggrp::{self, frac, DiagonalSymmetry, SymmetryGroup};
use crate::error::{Error, Result};
use crate::invpoly::{ExponentMatrix, InvertiblePolynomial, VARIABLES};
use crate::lattices::{classification, ClassificationRow};
use crate::weights::{check_prime, WeightSystem};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TorusRepresentative {
    pub base: DiagonalSymmetryView,
    pub shift: String,
    pub value: DiagonalSymmetryView,
    pub zero_support: Vec<usize>,
}

/// Serializable wrapper printing a symmetry as `a,b,c,d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiagonalSymmetryView(pub DiagonalSymmetry);

impl Serialize for DiagonalSymmetryView {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

fn weight_vector(ws: &WeightSystem) -> [Rational64; 4] {
    ws.weights.map(|x| Rational64::from_integer(x.into()))
}

fn shifted(base: &DiagonalSymmetry, w: &[Rational64; 4], q: Rational64) -> DiagonalSymmetry {
    DiagonalSymmetry::new([0, 1, 2, 3].map(|i| base.0[i] + q * w[i]))
}

/// Shifts `q` in `[0,1)` for which `base + q w` vanishes in coordinate `i`.
fn shifts_killing(base: &DiagonalSymmetry, w: &[Rational64; 4], i: usize) -> Vec<Rational64> {
    let wi = w[i].to_integer();
    (0..wi)
        .map(|t| frac((Rational64::from_integer(t) - base.0[i]) / w[i]))
        .collect()
}

/// All `base + q w mod Z` vanishing on every coordinate of `zero`.
fn vanishing_values(base: &DiagonalSymmetry, w: &[Rational64; 4], zero: &[usize]) -> Vec<DiagonalSymmetry> {
    let mut out: Vec<DiagonalSymmetry> = shifts_killing(base, w, zero[0])
        .into_iter()
        .map(|q| shifted(base, w, q))
        .filter(|v| zero.iter().all(|&i| v.0[i].is_zero()))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Every `gamma + q w mod Z` with at least one vanishing coordinate.
pub fn representatives(gamma: &DiagonalSymmetry, ws: &WeightSystem) -> Vec<TorusRepresentative> {
    let w = weight_vector(ws);
    let mut shifts: BTreeSet<Rational64> = BTreeSet::new();
    for i in 0..4 {
        shifts.extend(shifts_killing(gamma, &w, i));
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for q in shifts {
        let value = shifted(gamma, &w, q);
        if seen.insert(value) {
            out.push(TorusRepresentative {
                base: DiagonalSymmetryView(*gamma),
                shift: q.to_string(),
                value: DiagonalSymmetryView(value),
                zero_support: value.zero_support(),
            });
        }
    }
    out
}

/// Elements of `Gamma = C* . G` vanishing on `zero`.
fn stabilizer(group: &[DiagonalSymmetry], w: &[Rational64; 4], zero: &[usize]) -> BTreeSet<DiagonalSymmetry> {
    group.iter().flat_map(|g| vanishing_values(g, w, zero)).collect()
}

/// Elements of `sigma + Gamma` vanishing on `zero`.
fn sigma_values(sigma: &DiagonalSymmetry, group: &[DiagonalSymmetry], w: &[Rational64; 4], zero: &[usize]) -> BTreeSet<DiagonalSymmetry> {
    group.iter().flat_map(|g| vanishing_values(&sigma.add(g), w, zero)).collect()
}

/// Genus of a quasismooth degree `d` curve in `P(w1,w2,w3)`.
pub fn curve_genus(d: u32, w1: u32, w2: u32, w3: u32) -> Result<u32> {
    let [d, a, b, c] = [d, w1, w2, w3].map(i64::from);
    if [d, a, b, c].contains(&0) {
        return Err(Error::NonIntegerGenus(format!("degree {d} with weights ({a},{b},{c})")));
    }
    let r = |n: i64, m: i64| Rational64::new(n, m);
    let twice = r(d * d, a * b * c)
        - Rational64::from_integer(d) * (r(a.gcd(&b), a * b) + r(a.gcd(&c), a * c) + r(b.gcd(&c), b * c))
        + r(a.gcd(&d), a)
        + r(b.gcd(&d), b)
        + r(c.gcd(&d), c)
        - 1;
    let g = twice / 2;
    if !g.is_integer() || g < Rational64::zero() {
        return Err(Error::NonIntegerGenus(format!("{g} for degree {d} in P({a},{b},{c})")));
    }
    Ok(u32::try_from(g.to_integer()).expect("small genus"))
}

/// Genus of the base of a degree `deg` cover of a genus `g_cover` curve with
/// the given ramification indices over the cover's points.
pub fn riemann_hurwitz(g_cover: u32, deg: u32, ram: &[u32]) -> Result<u32> {
    if deg == 0 {
        return Err(Error::Inconsistent("cover of degree 0".into()));
    }
    let excess: i64 = ram.iter().map(|&e| i64::from(e) - 1).sum();
    let lhs = 2 * i64::from(g_cover) - 2 - excess;
    let deg = i64::from(deg);
    if lhs % (2 * deg) != 0 {
        return Err(Error::Inconsistent(format!(
            "2*{g_cover}-2 - {excess} is not {deg}*(2g-2) for an integer g"
        )));
    }
    let g = lhs / (2 * deg) + 1;
    u32::try_from(g).map_err(|_| Error::Inconsistent(format!("negative base genus {g}")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SingularPoint {
    /// Vanishing coordinates of the stratum, e.g. `z=w=0`.
    pub location: String,
    pub isotropy_order: u32,
    pub count: u32,
}

impl SingularPoint {
    pub fn exceptional_curve_count(&self) -> u32 {
        self.isotropy_order - 1
    }
}

impl fmt::Display for SingularPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = if self.count == 1 { String::new() } else { self.count.to_string() };
        write!(f, "{c}A{} at {}", self.isotropy_order - 1, self.location)
    }
}

fn zero_label(nonzero: &[usize]) -> String {
    let zeros: Vec<String> = (0..4).filter(|i| !nonzero.contains(i)).map(|i| VARIABLES[i].to_string()).collect();
    format!("{}=0", zeros.join("="))
}

/// A stratum of `Y_W` with at most two nonzero coordinates.
#[derive(Debug, Clone)]
struct Stratum {
    nonzero: Vec<usize>,
    /// Coordinates transverse to the stratum inside the surface chart.
    slice: [usize; 2],
    /// Points of `Y_W` (modulo `C*`) on the stratum.
    points: u32,
    /// Primitive exponent difference of the two monomials, for lines.
    direction: Option<(i64, i64)>,
}

fn line_points(m: &ExponentMatrix, a: usize, b: usize) -> Option<(u32, (i64, i64))> {
    let monos: Vec<usize> = (0..4)
        .filter(|&i| (0..4).all(|j| j == a || j == b || m.rows[i][j] == 0))
        .collect();
    let &[i, k] = monos.as_slice() else {
        return None;
    };
    let u = (m.get(i, a) - m.get(k, a), m.get(i, b) - m.get(k, b));
    let g = u.0.abs().gcd(&u.1.abs());
    Some((u32::try_from(g).expect("small"), (u.0 / g, u.1 / g)))
}

fn strata(m: &ExponentMatrix) -> Vec<Stratum> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in a + 1..4 {
            if let Some((points, dir)) = line_points(m, a, b) {
                let rest: Vec<usize> = (0..4).filter(|&i| i != a && i != b).collect();
                out.push(Stratum { nonzero: vec![a, b], slice: [rest[0], rest[1]], points, direction: Some(dir) });
            }
        }
    }
    for a in 0..4 {
        if let Some(j) = m.pointer(a) {
            let rest: Vec<usize> = (0..4).filter(|&i| i != a && i != j).collect();
            out.push(Stratum { nonzero: vec![a], slice: [rest[0], rest[1]], points: 1, direction: None });
        }
    }
    out
}

/// Number of orbits of `G` on the points of a stratum.
fn quotient_points(s: &Stratum, group: &[DiagonalSymmetry]) -> u32 {
    let Some((ua, ub)) = s.direction else {
        return s.points;
    };
    let (a, b) = (s.nonzero[0], s.nonzero[1]);
    let orbit = group
        .iter()
        .map(|g| frac(g.0[a] * ua + g.0[b] * ub).denom().to_owned())
        .fold(1i64, |acc, d| acc.lcm(&d));
    s.points / u32::try_from(orbit).expect("small")
}

/// Cyclic quotient singularities of `Y_W` coming from the weighted ambient space.
pub fn ambient_singularities(w: &InvertiblePolynomial) -> Vec<SingularPoint> {
    let wv = weight_vector(&w.weight_system());
    let trivial = [DiagonalSymmetry::zero()];
    strata(w.matrix())
        .into_iter()
        .filter(|s| s.points > 0)
        .filter_map(|s| {
            let m = stabilizer(&trivial, &wv, &s.nonzero).len();
            (m >= 2).then(|| SingularPoint {
                location: zero_label(&s.nonzero),
                isotropy_order: u32::try_from(m).expect("small"),
                count: s.points,
            })
        })
        .collect()
}

/// Singularities of `X_W / (G/J_W)` coming from points with extra isotropy
/// in `G`. Each ambient `A_{m0-1}` point with isotropy `m` under `C* . G`
/// carries `m0` torus-fixed points on its resolution chain, each becoming
/// an `A_{m/m0-1}` point of the quotient.
pub fn symplectic_fixed_points(w: &InvertiblePolynomial, g: &SymmetryGroup) -> Vec<SingularPoint> {
    let wv = weight_vector(&w.weight_system());
    let trivial = [DiagonalSymmetry::zero()];
    strata(w.matrix())
        .into_iter()
        .filter(|s| s.points > 0)
        .filter_map(|s| {
            let m0 = stabilizer(&trivial, &wv, &s.nonzero).len();
            let m = stabilizer(g.elements(), &wv, &s.nonzero).len();
            (m > m0).then(|| SingularPoint {
                location: zero_label(&s.nonzero),
                isotropy_order: u32::try_from(m / m0).expect("small"),
                count: u32::try_from(m0).expect("small") * quotient_points(&s, g.elements()),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FixedLocusInvariants {
    /// Genus of the distinguished curve; `None` when no curve is fixed.
    pub g: Option<u32>,
    pub n: u32,
    pub k: Option<u32>,
}

impl fmt::Display for FixedLocusInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |x: Option<u32>| x.map_or("-".to_string(), |v| v.to_string());
        write!(f, "(g,n,k)=({},{},{})", opt(self.g), self.n, opt(self.k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LatticeInvariants {
    pub p: u32,
    pub r: u32,
    pub a: u32,
    pub m: u32,
    pub mu: u32,
}

impl LatticeInvariants {
    pub fn new(p: u32, r: u32, a: u32) -> Result<Self> {
        check_prime(p)?;
        if r > 22 || (22 - r) % (p - 1) != 0 {
            return Err(Error::Inconsistent(format!("rank {r} incompatible with p={p}")));
        }
        let m = (22 - r) / (p - 1);
        if a > m {
            return Err(Error::Inconsistent(format!("a={a} exceeds m={m}")));
        }
        Ok(Self { p, r, a, m, mu: 24 / (p - 1) })
    }
}

/// `(g,n,k)` to `(r,a)` for a fixed locus containing a curve.
pub fn invariants_from_gnk(p: u32, f: &FixedLocusInvariants) -> Result<LatticeInvariants> {
    check_prime(p)?;
    let (Some(g), Some(k)) = (f.g, f.k) else {
        return Err(Error::Inconsistent("no fixed curve, (r,a) is not determined by (g,n,k)".into()));
    };
    if p == 13 {
        if (g, f.n, k) != (0, 9, 0) {
            return Err(Error::Inconsistent(format!("p=13 forces (0,9,0), got {f}")));
        }
        return LatticeInvariants::new(13, 10, 1);
    }
    let (base, step, n_of_m): (i64, i64, fn(i64) -> i64) = match p {
        3 => (8, 2, |m| 10 - m),
        5 => (6, 4, |m| 16 - 3 * m),
        _ => (4, 6, |m| 18 - 5 * m),
    };
    let (g, k) = (i64::from(g), i64::from(k));
    let r = base + step * (1 - g + k);
    if !(0..=22).contains(&r) || (22 - r) % i64::from(p - 1) != 0 {
        return Err(Error::Inconsistent(format!("{f} gives rank {r}")));
    }
    let m = (22 - r) / i64::from(p - 1);
    let a = m - 2 * g;
    if a < 0 {
        return Err(Error::Inconsistent(format!("{f} gives a={a}")));
    }
    if n_of_m(m) != i64::from(f.n) {
        return Err(Error::Inconsistent(format!("{f}: expected n={} for m={m}", n_of_m(m))));
    }
    LatticeInvariants::new(p, u32::try_from(r).expect("checked"), u32::try_from(a).expect("checked"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixedCurve {
    pub location: String,
    pub genus_on_surface: u32,
    pub cover_degree: u32,
    pub ramification: Vec<u32>,
    pub genus: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StratumContribution {
    pub location: String,
    pub points: u32,
    pub isotropy_order: u32,
    pub fixed_exceptional_curves: u32,
    pub isolated_points: u32,
}

/// Full account of the fixed locus, kept for reports and diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixedLocus {
    pub curves: Vec<FixedCurve>,
    pub strata: Vec<StratumContribution>,
    pub invariants: FixedLocusInvariants,
}

struct Context<'a> {
    m: &'a ExponentMatrix,
    ws: WeightSystem,
    w: [Rational64; 4],
    group: &'a [DiagonalSymmetry],
    sigma: DiagonalSymmetry,
}

impl Context<'_> {
    fn curve(&self, missing: usize) -> Result<Option<FixedCurve>> {
        let nonzero: Vec<usize> = (0..4).filter(|&i| i != missing).collect();
        if sigma_values(&self.sigma, self.group, &self.w, &nonzero).is_empty() {
            return Ok(None);
        }
        let ws = &self.ws.weights;
        let genus_on_surface = curve_genus(self.ws.degree, ws[nonzero[0]], ws[nonzero[1]], ws[nonzero[2]])?;
        let kernel = self.group.iter().filter(|g| !vanishing_values(g, &self.w, &nonzero).is_empty()).count();
        let stab = |zero: &[usize]| {
            let s = self.group.iter().filter(|g| !vanishing_values(g, &self.w, zero).is_empty()).count();
            u32::try_from(s / kernel).expect("small")
        };
        let mut ramification = Vec::new();
        for (x, &a) in nonzero.iter().enumerate() {
            for &b in &nonzero[x + 1..] {
                if let Some((count, _)) = line_points(self.m, a, b) {
                    let e = stab(&[a, b]);
                    ramification.extend(std::iter::repeat_n(e, count as usize));
                }
            }
        }
        for &a in &nonzero {
            if self.m.pointer(a).is_some() {
                ramification.push(stab(&[a]));
            }
        }
        let cover_degree = u32::try_from(self.group.len() / kernel).expect("small");
        let genus = riemann_hurwitz(genus_on_surface, cover_degree, &ramification)?;
        Ok(Some(FixedCurve { location: format!("{}=0", VARIABLES[missing]), genus_on_surface, cover_degree, ramification, genus }))
    }

    /// Toric model of `sigma` over the `A_{m-1}` chain at a stratum point.
    /// Returns `None` when `sigma` moves the stratum's points.
    fn local(&self, s: &Stratum) -> Result<Option<StratumContribution>> {
        let stab = stabilizer(self.group, &self.w, &s.nonzero);
        let m = stab.len();
        let reps = sigma_values(&self.sigma, self.group, &self.w, &s.nonzero);
        let Some(rho) = reps.first() else {
            return Ok(None);
        };
        let [u, v] = s.slice;
        if m > 1 {
            let step = Rational64::new(1, i64::try_from(m).expect("small"));
            let gen = stab.iter().find(|h| h.0[u] == step).ok_or_else(|| {
                Error::Inconsistent(format!("isotropy at {} is not cyclic on the slice", zero_label(&s.nonzero)))
            })?;
            if !frac(gen.0[u] + gen.0[v]).is_zero() {
                return Err(Error::Inconsistent(format!(
                    "isotropy at {} is not of type A",
                    zero_label(&s.nonzero)
                )));
            }
        }
        let (a, b) = (rho.0[u], rho.0[v]);
        let mi = i64::try_from(m).expect("small");
        let c: Vec<Rational64> = (0..=mi).map(|j| frac(a * (mi - j) - b * j)).collect();
        let fixed = (1..m).filter(|&j| c[j].is_zero()).count();
        let isolated = (0..m).filter(|&j| !c[j].is_zero() && !c[j + 1].is_zero()).count();
        let points = quotient_points(s, self.group);
        Ok(Some(StratumContribution {
            location: zero_label(&s.nonzero),
            points,
            isotropy_order: u32::try_from(m).expect("small"),
            fixed_exceptional_curves: u32::try_from(fixed).expect("small"),
            isolated_points: u32::try_from(isolated).expect("small"),
        }))
    }
}

fn check_pair(w: &InvertiblePolynomial, g: &SymmetryGroup, p: u32) -> Result<usize> {
    check_prime(p)?;
    let invalid = |why: String| Error::InvalidPair(w.to_string(), why);
    let var = w.p_variable(p).ok_or_else(|| invalid(format!("no variable appears only as a {p}-th power")))?;
    if !w.is_calabi_yau() {
        return Err(invalid(format!("weights {} do not sum to the degree", w.weight_system())));
    }
    if g.host != *w.matrix() {
        return Err(invalid("group belongs to a different polynomial".into()));
    }
    if !diaggrp::grading_group(w).is_subgroup_of(g) {
        return Err(invalid("group does not contain j_W".into()));
    }
    if g.elements().iter().any(|e| !e.has_integral_sum()) {
        return Err(invalid("group is not contained in SL_W".into()));
    }
    Ok(var)
}

/// Fixed curves, isolated points and `(g,n,k)` of `sigma_p` on `X_{W,G}`.
pub fn fixed_locus(w: &InvertiblePolynomial, g: &SymmetryGroup, p: u32) -> Result<FixedLocus> {
    let var = check_pair(w, g, p)?;
    let ws = w.weight_system();
    let ctx = Context { m: w.matrix(), ws, w: weight_vector(&ws), group: g.elements(), sigma: DiagonalSymmetry::unit(var, p) };

    let mut curves = Vec::new();
    for missing in 0..4 {
        if let Some(c) = ctx.curve(missing)? {
            curves.push(c);
        }
    }
    let mut strata_out = Vec::new();
    let mut exceptional = 0;
    let mut isolated = 0;
    for s in strata(w.matrix()).into_iter().filter(|s| s.points > 0) {
        if let Some(c) = ctx.local(&s)? {
            exceptional += c.points * c.fixed_exceptional_curves;
            isolated += c.points * c.isolated_points;
            strata_out.push(c);
        }
    }

    let mut genera: Vec<u32> = curves.iter().map(|c| c.genus).collect();
    genera.extend(std::iter::repeat_n(0, exceptional as usize));
    genera.sort_unstable_by(|a, b| b.cmp(a));
    if genera.iter().filter(|&&x| x > 0).count() > 1 {
        return Err(Error::Inconsistent(format!("more than one fixed curve of positive genus: {genera:?}")));
    }
    let invariants = match genera.first() {
        Some(&top) => FixedLocusInvariants { g: Some(top), n: isolated, k: Some(u32::try_from(genera.len() - 1).expect("small")) },
        None => FixedLocusInvariants { g: None, n: isolated, k: None },
    };
    Ok(FixedLocus { curves, strata: strata_out, invariants })
}

#[derive(Serialize)]
struct Diagnostic<'a> {
    polynomial: String,
    group_order: usize,
    prime: u32,
    fixed_locus: &'a FixedLocus,
    candidates: Vec<&'a ClassificationRow>,
}

/// `(g,n,k)` and `(r,a)` for a pair, checked against the classification.
pub fn resolve_fixed_locus(
    w: &InvertiblePolynomial,
    g: &SymmetryGroup,
    p: u32,
) -> Result<(FixedLocusInvariants, LatticeInvariants)> {
    let locus = fixed_locus(w, g, p)?;
    let f = locus.invariants;
    let candidates: Vec<&ClassificationRow> = classification()
        .iter()
        .filter(|row| row.p == p && row.g == f.g && row.k == f.k && row.n == f.n)
        .collect();
    let dump = |candidates: Vec<&ClassificationRow>| {
        serde_json::to_string(&Diagnostic { polynomial: w.to_string(), group_order: g.order(), prime: p, fixed_locus: &locus, candidates })
            .expect("plain data")
    };
    match candidates.as_slice() {
        [row] => {
            let lattice = LatticeInvariants::new(p, row.r, row.a)?;
            if f.g.is_some() {
                let derived = invariants_from_gnk(p, &f)?;
                if derived != lattice {
                    return Err(Error::Inconsistent(format!(
                        "{f} gives (r,a)=({},{}) but the matching row is ({},{})",
                        derived.r, derived.a, row.r, row.a
                    )));
                }
            }
            Ok((f, lattice))
        }
        [] => Err(Error::NoConfiguration(dump(candidates))),
        _ => Err(Error::Ambiguous(dump(candidates))),
    }
}
