//! Reference implementations written straight from the definitions, sharing
//! no code with the library beyond the complex scalar type.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeSet;

use qdel_core::C64 as C;

/// Bits of `x` as a `'0'/'1'` string of length `m`, position 1 first.
pub fn bits_of(x: usize, m: usize) -> String {
    (0..m).map(|k| if (x >> (m - 1 - k)) & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn index_of(s: &str) -> usize {
    s.chars().fold(0, |acc, c| acc * 2 + usize::from(c == '1'))
}

/// Removes the character at 1-based position `i`.
pub fn drop_char(s: &str, i: usize) -> String {
    s.chars().enumerate().filter(|&(k, _)| k + 1 != i).map(|(_, c)| c).collect()
}

/// `{ x with position i removed : x in set, x_i = b }`.
pub fn delta(set: &[&str], i: usize, b: char) -> BTreeSet<String> {
    set.iter()
        .filter(|x| x.chars().nth(i - 1) == Some(b))
        .map(|x| drop_char(x, i))
        .collect()
}

pub fn c1_holds(n: usize, a: &[&str], b: &[&str]) -> bool {
    for i1 in 1..=n {
        for i2 in 1..=n {
            for b1 in ['0', '1'] {
                for b2 in ['0', '1'] {
                    if !delta(a, i1, b1).is_disjoint(&delta(b, i2, b2)) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

pub fn c2_holds(n: usize, a: &[&str], b: &[&str]) -> bool {
    for i1 in 1..=n {
        for i2 in 1..=n {
            for bit in ['0', '1'] {
                let ia = delta(a, i1, bit).intersection(&delta(a, i2, bit)).count();
                let ib = delta(b, i1, bit).intersection(&delta(b, i2, bit)).count();
                if a.len() * ib != b.len() * ia {
                    return false;
                }
            }
        }
    }
    true
}

/// Dense square complex matrix as nested rows.
pub type Dense = Vec<Vec<C>>;

pub fn zeros(d: usize) -> Dense {
    vec![vec![C::new(0.0, 0.0); d]; d]
}

/// `Tr_i ρ = Σ_{x,y} ρ_{xy} δ(x_i, y_i) |x∖i⟩⟨y∖i|`, every index pair
/// visited explicitly.
pub fn partial_trace(rho: &Dense, m: usize, i: usize) -> Dense {
    let mut out = zeros(1 << (m - 1));
    for x in 0..1usize << m {
        for y in 0..1usize << m {
            let (sx, sy) = (bits_of(x, m), bits_of(y, m));
            if sx.as_bytes()[i - 1] != sy.as_bytes()[i - 1] {
                continue;
            }
            let (r, c) = (index_of(&drop_char(&sx, i)), index_of(&drop_char(&sy, i)));
            out[r][c] += rho[x][y];
        }
    }
    out
}

/// Encoded state `α/√|A| Σ|a⟩ + β/√|B| Σ|b⟩` as an amplitude vector.
pub fn encoded(n: usize, a: &[&str], b: &[&str], alpha: C, beta: C) -> Vec<C> {
    let mut v = vec![C::new(0.0, 0.0); 1 << n];
    for x in a {
        v[index_of(x)] += alpha / (a.len() as f64).sqrt();
    }
    for y in b {
        v[index_of(y)] += beta / (b.len() as f64).sqrt();
    }
    v
}

pub fn outer(v: &[C]) -> Dense {
    v.iter().map(|p| v.iter().map(|q| p * q.conj()).collect()).collect()
}

/// `D_i(ρ)` expanded over deletion sets:
/// `Σ_c |α|²/|A| Σ_{Δ_{i,c}(A)²} + αβ̄/√(|A||B|) Σ_{Δ_{i,c}(A)×Δ_{i,c}(B)}
///  + ᾱβ/√(|A||B|) Σ_{Δ_{i,c}(B)×Δ_{i,c}(A)} + |β|²/|B| Σ_{Δ_{i,c}(B)²}`.
pub fn deleted_closed_form(n: usize, a: &[&str], b: &[&str], alpha: C, beta: C, i: usize) -> Dense {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let caa = C::new(alpha.norm_sqr() / na, 0.0);
    let cbb = C::new(beta.norm_sqr() / nb, 0.0);
    let cab = alpha * beta.conj() / (na * nb).sqrt();
    let cba = alpha.conj() * beta / (na * nb).sqrt();
    let mut out = zeros(1 << (n - 1));
    for c in ['0', '1'] {
        let (da, db) = (delta(a, i, c), delta(b, i, c));
        let blocks = [(&da, &da, caa), (&da, &db, cab), (&db, &da, cba), (&db, &db, cbb)];
        for (rows, cols, coef) in blocks {
            for x in rows {
                for y in cols {
                    out[index_of(x)][index_of(y)] += coef;
                }
            }
        }
    }
    out
}

/// Normalized `P ρ P` for the basis projector onto `support`.
pub fn projected(rho: &Dense, support: &[usize]) -> Option<Dense> {
    let p: f64 = support.iter().map(|&j| rho[j][j].re).sum();
    if p <= 1e-12 {
        return None;
    }
    let mut out = zeros(rho.len());
    for &r in support {
        for &c in support {
            out[r][c] = rho[r][c] / p;
        }
    }
    Some(out)
}

pub fn max_diff(x: &Dense, y: &Dense) -> f64 {
    x.iter()
        .flatten()
        .zip(y.iter().flatten())
        .map(|(p, q)| (p - q).norm())
        .fold(0.0, f64::max)
}

pub fn mat_mul(x: &Dense, y: &Dense) -> Dense {
    let d = x.len();
    (0..d)
        .map(|r| (0..d).map(|c| (0..d).map(|k| x[r][k] * y[k][c]).sum()).collect())
        .collect()
}

pub fn trace(x: &Dense) -> C {
    (0..x.len()).map(|k| x[k][k]).sum()
}

pub const FOUR_A: [&str; 2] = ["0000", "1111"];
pub const FOUR_B: [&str; 6] = ["0011", "0101", "1001", "0110", "1010", "1100"];
pub const EIGHT_A: [&str; 2] = ["00001001", "01101111"];
pub const EIGHT_B: [&str; 2] = ["00001111", "01101001"];
