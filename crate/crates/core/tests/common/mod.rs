//! Lattice strategy and a determinantal-divisor Smith form oracle.

use num_integer::Integer;
use proptest::prelude::*;

const SUMMANDS: [(&str, usize); 13] = [
    ("U", 2),
    ("A1", 1),
    ("A2", 2),
    ("A3", 3),
    ("A4", 4),
    ("A6", 6),
    ("E6", 6),
    ("E7", 7),
    ("E8", 8),
    ("K3", 2),
    ("K7", 2),
    ("H5", 2),
    ("H13", 2),
];

pub fn block_sum() -> impl Strategy<Value = String> {
    prop::collection::vec((0..SUMMANDS.len(), 1i64..5), 1..5)
        .prop_filter("rank at most 9", |parts| parts.iter().map(|(i, _)| SUMMANDS[*i].1).sum::<usize>() <= 9)
        .prop_map(|parts| {
            parts
                .iter()
                .map(|&(i, n)| if n == 1 { SUMMANDS[i].0.to_string() } else { format!("{}({n})", SUMMANDS[i].0) })
                .collect::<Vec<_>>()
                .join("+")
        })
}

fn det(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            let Some(r) = (k + 1..n).find(|&r| m[r][k] != 0) else { return 0 };
            m.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    if n == 0 { 1 } else { sign * m[n - 1][n - 1] }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n).filter(|s| s.count_ones() as usize == k).map(|s| (0..n).filter(|i| s >> i & 1 == 1).collect()).collect()
}

/// Invariant factors other than 1, from gcds of all k x k minors.
pub fn smith_by_minors(gram: &[Vec<i64>]) -> Vec<i128> {
    let n = gram.len();
    let mut divisors = vec![1i128];
    for k in 1..=n {
        let mut d = 0i128;
        let sets = subsets(n, k);
        for rows in &sets {
            for cols in &sets {
                let minor = rows.iter().map(|&r| cols.iter().map(|&c| i128::from(gram[r][c])).collect()).collect();
                d = d.gcd(&det(minor));
            }
        }
        divisors.push(d);
    }
    divisors.windows(2).map(|w| w[1] / w[0]).filter(|&e| e != 1).collect()
}
