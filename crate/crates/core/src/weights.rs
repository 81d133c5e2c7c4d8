//! Weight systems `(w1,w2,w3,w4;d)` of weighted projective 3-spaces and the
//! embedded list of weight systems that carry a polynomial `x^p + f`.

use std::fmt;
use std::sync::OnceLock;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Primes for which p-cyclic K3 surfaces of the form `x^p + f` exist (p odd).
pub const PRIMES: [u32; 4] = [3, 5, 7, 13];

pub fn check_prime(p: u32) -> Result<()> {
    if PRIMES.contains(&p) {
        Ok(())
    } else {
        Err(Error::UnsupportedPrime(p))
    }
}

/// Integer weights and degree. `gcd(w) = 1` always holds; the weights are
/// listed per variable, so they are only sorted after [`normalize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WeightSystem {
    pub weights: [u32; 4],
    pub degree: u32,
}

impl WeightSystem {
    pub fn new(weights: [u32; 4], degree: u32) -> Result<Self> {
        if weights.contains(&0) {
            return Err(Error::ZeroWeight);
        }
        if degree == 0 {
            return Err(Error::BadWeights("degree must be positive".into()));
        }
        let g = weights.iter().fold(0u32, |acc, &w| acc.gcd(&w));
        if g != 1 {
            return Err(Error::BadWeights(format!(
                "weights {weights:?} are not normalized (gcd {g})"
            )));
        }
        Ok(Self { weights, degree })
    }

    pub fn is_sorted(&self) -> bool {
        self.weights.windows(2).all(|w| w[0] >= w[1])
    }

    /// Fractional weight `w_i / d` as a reduced pair.
    pub fn fraction(&self, i: usize) -> (u32, u32) {
        let g = self.weights[i].gcd(&self.degree);
        (self.weights[i] / g, self.degree / g)
    }

    /// Indices `i` with `p * w_i = d`.
    pub fn power_slots(&self, p: u32) -> Vec<usize> {
        (0..4).filter(|&i| p * self.weights[i] == self.degree).collect()
    }
}

impl fmt::Display for WeightSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, e] = self.weights;
        write!(f, "({a},{b},{c},{e};{})", self.degree)
    }
}

/// Result of [`normalize`]: the sorted system plus the variable permutation,
/// `permutation[i]` being the input slot that landed in position `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Normalized {
    pub system: WeightSystem,
    pub permutation: [usize; 4],
}

/// Divide out the common gcd and sort weights into nonincreasing order.
/// Ties keep their input order.
pub fn normalize(weights: [u32; 4], degree: u32) -> Result<Normalized> {
    if weights.contains(&0) {
        return Err(Error::ZeroWeight);
    }
    if degree == 0 {
        return Err(Error::BadWeights("degree must be positive".into()));
    }
    let g = weights.iter().fold(0u32, |acc, &w| acc.gcd(&w));
    if degree % g != 0 {
        return Err(Error::BadWeights(format!(
            "degree {degree} not divisible by weight gcd {g}"
        )));
    }
    let mut permutation = [0, 1, 2, 3];
    permutation.sort_by(|&i, &j| weights[j].cmp(&weights[i]).then(i.cmp(&j)));
    let sorted = permutation.map(|i| weights[i] / g);
    Ok(Normalized {
        system: WeightSystem::new(sorted, degree / g)?,
        permutation,
    })
}

pub fn is_calabi_yau(ws: &WeightSystem) -> bool {
    ws.weights.iter().sum::<u32>() == ws.degree
}

/// One admissible weight system with its catalogue number and the primes
/// for which a polynomial `x^p + f` exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyEntry {
    pub yonemura_no: String,
    pub weight_system: WeightSystem,
    pub admissible_primes: Vec<u32>,
}

#[derive(Deserialize)]
struct FamilyRecord {
    no: String,
    weights: [u32; 4],
    degree: u32,
    primes: Vec<u32>,
}

const FAMILIES_JSON: &str = include_str!("../data/families.json");

/// All embedded families, in catalogue order.
pub fn families() -> &'static [FamilyEntry] {
    static CELL: OnceLock<Vec<FamilyEntry>> = OnceLock::new();
    CELL.get_or_init(|| {
        parse_families(FAMILIES_JSON).expect("embedded families.json is valid")
    })
}

pub fn parse_families(json: &str) -> Result<Vec<FamilyEntry>> {
    let records: Vec<FamilyRecord> = serde_json::from_str(json)?;
    records
        .into_iter()
        .map(|r| {
            let ws = WeightSystem::new(r.weights, r.degree)?;
            if !ws.is_sorted() {
                return Err(Error::BadWeights(format!("family {} not sorted", r.no)));
            }
            for &p in &r.primes {
                check_prime(p)?;
                if ws.power_slots(p).is_empty() {
                    return Err(Error::BadWeights(format!(
                        "family {}: no weight with {p}*w = d",
                        r.no
                    )));
                }
            }
            Ok(FamilyEntry {
                yonemura_no: r.no,
                weight_system: ws,
                admissible_primes: r.primes,
            })
        })
        .collect()
}

pub fn families_to_json(entries: &[FamilyEntry]) -> String {
    let join = |xs: &[u32]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
    let lines: Vec<String> = entries
        .iter()
        .map(|e| {
            format!(
                "  {{\"no\": {}, \"weights\": [{}], \"degree\": {}, \"primes\": [{}]}}",
                serde_json::Value::from(e.yonemura_no.as_str()),
                join(&e.weight_system.weights),
                e.weight_system.degree,
                join(&e.admissible_primes)
            )
        })
        .collect();
    format!("[\n{}\n]\n", lines.join(",\n"))
}

pub fn admissible_families(p: u32) -> Result<Vec<FamilyEntry>> {
    check_prime(p)?;
    Ok(families()
        .iter()
        .filter(|f| f.admissible_primes.contains(&p))
        .cloned()
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        let n = normalize([12, 8, 3, 1], 24).unwrap();
        assert_eq!(n.system, WeightSystem::new([12, 8, 3, 1], 24).unwrap());
        assert_eq!(n.permutation, [0, 1, 2, 3]);

        let n = normalize([2, 4, 6, 8], 20).unwrap();
        assert_eq!(n.system.weights, [4, 3, 2, 1]);
        assert_eq!(n.system.degree, 10);
        assert_eq!(n.permutation, [3, 2, 1, 0]);

        let n = normalize([5, 2, 2, 1], 10).unwrap();
        assert_eq!(n.system.weights, [5, 2, 2, 1]);
        assert_eq!(n.permutation, [0, 1, 2, 3]);
    }

    #[test]
    fn normalize_errors() {
        assert!(matches!(normalize([1, 0, 2, 3], 6), Err(Error::ZeroWeight)));
        assert!(matches!(normalize([2, 2, 4, 4], 7), Err(Error::BadWeights(_))));
    }

    #[test]
    fn normalize_is_idempotent() {
        for raw in [[7, 4, 3, 1], [4, 7, 3, 1], [6, 3, 9, 12], [1, 1, 1, 1]] {
            let once = normalize(raw, raw.iter().sum()).unwrap().system;
            let twice = normalize(once.weights, once.degree).unwrap();
            assert_eq!(once, twice.system);
            assert_eq!(twice.permutation, [0, 1, 2, 3]);
        }
    }

    #[test]
    fn calabi_yau_flag() {
        assert!(is_calabi_yau(&WeightSystem::new([12, 8, 3, 1], 24).unwrap()));
        assert!(is_calabi_yau(&WeightSystem::new([1, 1, 1, 1], 4).unwrap()));
        assert!(!is_calabi_yau(&WeightSystem::new([1, 1, 1, 1], 5).unwrap()));
    }

    #[test]
    fn family_counts() {
        assert_eq!(families().len(), 41);
        let p13 = admissible_families(13).unwrap();
        assert_eq!(p13.len(), 1);
        assert_eq!(p13[0].yonemura_no, "87");
        assert_eq!(p13[0].weight_system.weights, [5, 4, 3, 1]);
        assert_eq!(p13[0].weight_system.degree, 13);

        let p7 = admissible_families(7).unwrap();
        let has = |w: [u32; 4], d: u32, no: &str| {
            p7.iter()
                .any(|f| f.weight_system.weights == w && f.weight_system.degree == d && f.yonemura_no == no)
        };
        assert!(has([21, 14, 6, 1], 42, "14"));
        assert!(has([3, 2, 1, 1], 7, "66"));

        // distinct weight rows of the p=3 table, counted by hand: 28
        assert_eq!(admissible_families(3).unwrap().len(), 28);
        assert_eq!(admissible_families(5).unwrap().len(), 10);
        assert_eq!(admissible_families(7).unwrap().len(), 6);
        assert!(matches!(admissible_families(11), Err(Error::UnsupportedPrime(11))));
    }

    #[test]
    fn family_invariants() {
        for f in families() {
            assert!(is_calabi_yau(&f.weight_system), "{}", f.yonemura_no);
            assert!(f.weight_system.is_sorted());
            for &p in &f.admissible_primes {
                assert!(!f.weight_system.power_slots(p).is_empty());
            }
        }
    }

    #[test]
    fn families_json_round_trips() {
        let text = families_to_json(families());
        assert_eq!(text, FAMILIES_JSON);
    }
}
