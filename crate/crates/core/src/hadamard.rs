//! Hadamard matrices of every order up to 64 for which one exists.
//!
//! Orders are built from Sylvester doubling, the two Paley constructions
//! over finite fields `GF(p^m)`, and Kronecker products with `H₂`.

use crate::{Error, Result};

pub type SignMatrix = Vec<Vec<i8>>;

pub const MAX_ORDER: usize = 64;

/// A Hadamard matrix of order `n`.
pub fn hadamard(n: usize) -> Result<SignMatrix> {
    if n == 0 || n > MAX_ORDER || !(n <= 2 || n % 4 == 0) {
        return Err(Error::UnsupportedHadamardOrder(n));
    }
    construct(n).ok_or(Error::UnsupportedHadamardOrder(n))
}

/// Orders supported by [`hadamard`].
pub fn supported_orders() -> Vec<usize> {
    (1..=MAX_ORDER).filter(|&n| hadamard(n).is_ok()).collect()
}

fn construct(n: usize) -> Option<SignMatrix> {
    if n == 1 {
        return Some(vec![vec![1]]);
    }
    if n.is_power_of_two() {
        return construct(n / 2).map(|h| kron_h2(&h));
    }
    if let Some(field) = Field::of_order(n - 1) {
        if (n - 1) % 4 == 3 {
            return Some(paley_one(&field));
        }
    }
    if n % 2 == 0 {
        if let Some(field) = Field::of_order(n / 2 - 1) {
            if (n / 2 - 1) % 4 == 1 {
                return Some(paley_two(&field));
            }
        }
        return construct(n / 2).map(|h| kron_h2(&h));
    }
    None
}

/// `H₂ ⊗ H`.
fn kron_h2(h: &SignMatrix) -> SignMatrix {
    let n = h.len();
    let mut out = vec![vec![0i8; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = h[i][j];
            out[i][j + n] = h[i][j];
            out[i + n][j] = h[i][j];
            out[i + n][j + n] = -h[i][j];
        }
    }
    out
}

/// Order `q + 1`, `q ≡ 3 (mod 4)`.
fn paley_one(f: &Field) -> SignMatrix {
    let q = f.order();
    let n = q + 1;
    let mut h = vec![vec![0i8; n]; n];
    for j in 1..n {
        h[0][j] = 1;
        h[j][0] = -1;
    }
    for a in 0..q {
        for b in 0..q {
            h[a + 1][b + 1] = f.chi(f.sub(a, b));
        }
    }
    for (i, row) in h.iter_mut().enumerate() {
        row[i] += 1;
    }
    h
}

/// Order `2(q + 1)`, `q ≡ 1 (mod 4)`.
fn paley_two(f: &Field) -> SignMatrix {
    let q = f.order();
    let m = q + 1;
    let mut c = vec![vec![0i8; m]; m];
    for j in 1..m {
        c[0][j] = 1;
        c[j][0] = 1;
    }
    for a in 0..q {
        for b in 0..q {
            c[a + 1][b + 1] = f.chi(f.sub(a, b));
        }
    }
    let mut h = vec![vec![0i8; 2 * m]; 2 * m];
    for i in 0..m {
        for j in 0..m {
            let block: [[i8; 2]; 2] = match c[i][j] {
                0 => [[1, -1], [-1, -1]],
                s => [[s, s], [s, -s]],
            };
            for (di, row) in block.iter().enumerate() {
                for (dj, &v) in row.iter().enumerate() {
                    h[2 * i + di][2 * j + dj] = v;
                }
            }
        }
    }
    h
}

/// `GF(p^m)` for `m ≤ 3`; elements are encoded as base-`p` digit strings of
/// their polynomial coefficients.
struct Field {
    p: usize,
    m: usize,
    /// Low-order coefficients of the monic modulus.
    modulus: Vec<usize>,
    squares: Vec<bool>,
}

impl Field {
    fn of_order(q: usize) -> Option<Field> {
        if q < 2 {
            return None;
        }
        let p = (2..=q).find(|d| q % d == 0)?;
        let mut m = 0;
        let mut r = q;
        while r % p == 0 {
            r /= p;
            m += 1;
        }
        if r != 1 || m > 3 {
            return None;
        }
        let modulus = if m == 1 { Vec::new() } else { irreducible(p, m) };
        let mut field = Field {
            p,
            m,
            modulus,
            squares: Vec::new(),
        };
        let mut squares = vec![false; q];
        for a in 1..q {
            squares[field.mul(a, a)] = true;
        }
        field.squares = squares;
        Some(field)
    }

    fn order(&self) -> usize {
        self.p.pow(self.m as u32)
    }

    fn digits(&self, mut a: usize) -> Vec<usize> {
        (0..self.m)
            .map(|_| {
                let d = a % self.p;
                a /= self.p;
                d
            })
            .collect()
    }

    fn encode(&self, digits: &[usize]) -> usize {
        digits.iter().rev().fold(0, |acc, &d| acc * self.p + d)
    }

    fn sub(&self, a: usize, b: usize) -> usize {
        let (da, db) = (self.digits(a), self.digits(b));
        let d: Vec<usize> = da.iter().zip(&db).map(|(x, y)| (x + self.p - y) % self.p).collect();
        self.encode(&d)
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        let p = self.p;
        let (da, db) = (self.digits(a), self.digits(b));
        let mut prod = vec![0usize; 2 * self.m];
        for (i, x) in da.iter().enumerate() {
            for (j, y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        // x^m ≡ -Σ modulus[i]·x^i
        for deg in (self.m..2 * self.m).rev() {
            let c = prod[deg];
            if c == 0 {
                continue;
            }
            prod[deg] = 0;
            for (i, &r) in self.modulus.iter().enumerate() {
                let idx = deg - self.m + i;
                prod[idx] = (prod[idx] + c * (p - r)) % p;
            }
        }
        self.encode(&prod[..self.m])
    }

    fn chi(&self, a: usize) -> i8 {
        if a == 0 {
            0
        } else if self.squares[a] {
            1
        } else {
            -1
        }
    }
}

/// First monic polynomial of degree `m ≤ 3` over `GF(p)` without roots,
/// which for these degrees means irreducible.
fn irreducible(p: usize, m: usize) -> Vec<usize> {
    let count = p.pow(m as u32);
    (0..count)
        .map(|code| {
            let mut c = code;
            (0..m)
                .map(|_| {
                    let d = c % p;
                    c /= p;
                    d
                })
                .collect::<Vec<_>>()
        })
        .find(|low| {
            (0..p).all(|x| {
                let mut v = 1usize;
                for &c in low.iter().rev() {
                    v = (v * x + c) % p;
                }
                v != 0
            })
        })
        .expect("an irreducible polynomial exists for every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_hadamard(h: &SignMatrix) -> bool {
        let n = h.len();
        h.iter().all(|r| r.len() == n && r.iter().all(|&v| v == 1 || v == -1))
            && (0..n).all(|i| {
                (0..n).all(|j| {
                    let dot: i64 = (0..n).map(|k| (h[i][k] * h[j][k]) as i64).sum();
                    dot == if i == j { n as i64 } else { 0 }
                })
            })
    }

    #[test]
    fn all_orders_up_to_64() {
        let orders = supported_orders();
        let mut expected = vec![1, 2];
        expected.extend((4..=64).step_by(4));
        assert_eq!(orders, expected);
        for n in orders {
            assert!(is_hadamard(&hadamard(n).unwrap()), "order {n}");
        }
    }

    #[test]
    fn unsupported_orders() {
        for n in [0, 3, 5, 6, 10, 66, 68] {
            assert_eq!(hadamard(n), Err(Error::UnsupportedHadamardOrder(n)));
        }
    }

    #[test]
    fn sylvester_four() {
        let h = hadamard(4).unwrap();
        assert_eq!(h[0], vec![1, 1, 1, 1]);
        assert_eq!(h[3], vec![1, -1, -1, 1]);
    }

    #[test]
    fn finite_field_arithmetic() {
        for q in [9, 25, 27] {
            let f = Field::of_order(q).unwrap();
            // every nonzero element has a multiplicative inverse
            for a in 1..q {
                assert!((1..q).any(|b| f.mul(a, b) == 1), "GF({q}) element {a}");
            }
            assert_eq!(f.squares.iter().filter(|&&s| s).count(), (q - 1) / 2);
        }
        assert!(Field::of_order(12).is_none());
    }
}
