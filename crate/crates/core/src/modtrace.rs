//! Exact traces of integer matrix powers by multi-modular arithmetic.
//!
//! `tr(M^k)` is computed modulo enough word-size primes that their product
//! exceeds `2 n ||M||^k`, then recovered by CRT into the symmetric range.
//! Primes are small enough that a full row of products sums in a `u64`
//! before reduction.

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::matrix::Matrix;

/// Keep all half-powers in memory up to this dimension.
const STORE_POWERS_LIMIT: usize = 256;

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Largest `b` with `terms * (2^b)^2 <= 2^64`.
fn prime_bits(terms: usize) -> u32 {
    let log = usize::BITS - terms.max(1).leading_zeros();
    ((64 - log) / 2).min(31)
}

/// Primes below `2^bits`, descending, whose product exceeds `bound`.
fn primes_exceeding(bound: &BigInt, bits: u32) -> Vec<u64> {
    let mut out = Vec::new();
    let mut product = BigInt::one();
    let mut c = (1u64 << bits) - 1;
    while &product <= bound {
        while !is_prime(c) {
            c -= 1;
        }
        out.push(c);
        product *= c;
        c -= 1;
    }
    out
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % p as u128) as u64;
        }
        b = (b as u128 * b as u128 % p as u128) as u64;
        e >>= 1;
    }
    r
}

fn residue(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p)).to_u64().expect("residue below p")
}

/// Combines residues into the unique value in `(-m/2, m/2]`.
fn crt_symmetric(residues: &[u64], primes: &[u64]) -> BigInt {
    let mut x = BigInt::zero();
    let mut m = BigInt::one();
    for (&r, &p) in residues.iter().zip(primes) {
        let xr = residue(&x, p);
        let mr = residue(&m, p);
        let t = ((r + p - xr) % p) as u128 * pow_mod(mr, p - 2, p) as u128 % p as u128;
        x += &m * BigInt::from(t as u64);
        m *= p;
    }
    if (&x << 1u32) > m {
        x -= m;
    }
    x
}

fn bound(n: usize, row_norm: BigInt, upto: usize) -> BigInt {
    let base = if row_norm.is_zero() { BigInt::one() } else { row_norm };
    BigInt::from(2 * n.max(1)) * num_traits::pow(base, upto)
}

/// `x * y` mod `p`, row-major `n x n`.
fn mul_mod(x: &[u64], y: &[u64], n: usize, p: u64, out: &mut [u64], acc: &mut [u64]) {
    for i in 0..n {
        acc.fill(0);
        for l in 0..n {
            let a = x[i * n + l];
            if a == 0 {
                continue;
            }
            for (s, &b) in acc.iter_mut().zip(&y[l * n..(l + 1) * n]) {
                *s += a * b;
            }
        }
        for (o, s) in out[i * n..(i + 1) * n].iter_mut().zip(acc.iter()) {
            *o = s % p;
        }
    }
}

/// `tr(x y)` mod `p`.
fn trace_of_product(x: &[u64], y: &[u64], n: usize, p: u64) -> u64 {
    let mut t = 0u64;
    for i in 0..n {
        let s: u64 = (0..n).map(|l| x[i * n + l] * y[l * n + i]).sum();
        t = (t + s % p) % p;
    }
    t
}

fn traces_mod(a: &[u64], n: usize, upto: usize, p: u64) -> Vec<u64> {
    let diag = |m: &[u64]| (0..n).fold(0u64, |t, i| (t + m[i * n + i]) % p);
    let mut acc = vec![0u64; n];
    let mut out = Vec::with_capacity(upto);
    if n <= STORE_POWERS_LIMIT {
        let half = upto.div_ceil(2);
        let mut powers = vec![a.to_vec()];
        while powers.len() < half {
            let mut next = vec![0u64; n * n];
            mul_mod(powers.last().unwrap(), a, n, p, &mut next, &mut acc);
            powers.push(next);
        }
        out.extend(powers.iter().map(|m| diag(m)));
        let top = &powers[half - 1];
        for lower in &powers[..upto - half] {
            out.push(trace_of_product(top, lower, n, p));
        }
    } else {
        let mut cur = a.to_vec();
        let mut next = vec![0u64; n * n];
        out.push(diag(&cur));
        for _ in 1..upto {
            mul_mod(&cur, a, n, p, &mut next, &mut acc);
            std::mem::swap(&mut cur, &mut next);
            out.push(diag(&cur));
        }
    }
    out
}

/// `tr(m^k)` for `k = 1..=upto`, exactly.
pub(crate) fn integer_traces(m: &Matrix<BigInt>, upto: usize) -> Vec<BigInt> {
    if upto == 0 {
        return Vec::new();
    }
    let n = m.rows();
    let row_norm = (0..n)
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<BigInt>())
        .max()
        .unwrap_or_default();
    let primes = primes_exceeding(&bound(n, row_norm, upto), prime_bits(n));
    let per_prime: Vec<Vec<u64>> = primes
        .iter()
        .map(|&p| {
            let a: Vec<u64> = m.entries().iter().map(|x| residue(x, p)).collect();
            traces_mod(&a, n, upto, p)
        })
        .collect();
    (0..upto)
        .map(|k| {
            let rs: Vec<u64> = per_prime.iter().map(|t| t[k]).collect();
            crt_symmetric(&rs, &primes)
        })
        .collect()
}

/// Gaussian-integer product mod `p`, with real and imaginary parts stored
/// separately.
fn cmul_mod(x: (&[u64], &[u64]), y: (&[u64], &[u64]), n: usize, p: u64, out: (&mut [u64], &mut [u64])) {
    let mut acc_re = vec![0u64; n];
    let mut acc_im = vec![0u64; n];
    for i in 0..n {
        acc_re.fill(0);
        acc_im.fill(0);
        for l in 0..n {
            let (a, b) = (x.0[i * n + l], x.1[i * n + l]);
            if a == 0 && b == 0 {
                continue;
            }
            let nb = (p - b) % p;
            let (yr, yi) = (&y.0[l * n..(l + 1) * n], &y.1[l * n..(l + 1) * n]);
            for j in 0..n {
                acc_re[j] += a * yr[j] + nb * yi[j];
                acc_im[j] += a * yi[j] + b * yr[j];
            }
        }
        for j in 0..n {
            out.0[i * n + j] = acc_re[j] % p;
            out.1[i * n + j] = acc_im[j] % p;
        }
    }
}

fn complex_traces_mod(re: &[u64], im: &[u64], n: usize, upto: usize, p: u64) -> Vec<(u64, u64)> {
    let mut cur = (re.to_vec(), im.to_vec());
    let mut next = (vec![0u64; n * n], vec![0u64; n * n]);
    let diag = |m: &(Vec<u64>, Vec<u64>)| {
        (0..n).fold((0u64, 0u64), |(r, s), i| ((r + m.0[i * n + i]) % p, (s + m.1[i * n + i]) % p))
    };
    let mut out = vec![diag(&cur)];
    for _ in 1..upto {
        cmul_mod((&cur.0, &cur.1), (re, im), n, p, (&mut next.0, &mut next.1));
        std::mem::swap(&mut cur, &mut next);
        out.push(diag(&cur));
    }
    out
}

/// `tr(m^k)` for `k = 1..=upto` over the Gaussian integers, exactly.
pub(crate) fn gaussian_integer_traces(m: &Matrix<Complex<BigInt>>, upto: usize) -> Vec<Complex<BigInt>> {
    if upto == 0 {
        return Vec::new();
    }
    let n = m.rows();
    let row_norm = (0..n)
        .map(|i| m.row(i).iter().map(|z| z.re.abs() + z.im.abs()).sum::<BigInt>())
        .max()
        .unwrap_or_default();
    let primes = primes_exceeding(&bound(n, row_norm, upto), prime_bits(2 * n));
    let per_prime: Vec<Vec<(u64, u64)>> = primes
        .iter()
        .map(|&p| {
            let re: Vec<u64> = m.entries().iter().map(|z| residue(&z.re, p)).collect();
            let im: Vec<u64> = m.entries().iter().map(|z| residue(&z.im, p)).collect();
            complex_traces_mod(&re, &im, n, upto, p)
        })
        .collect();
    (0..upto)
        .map(|k| {
            let re: Vec<u64> = per_prime.iter().map(|t| t[k].0).collect();
            let im: Vec<u64> = per_prime.iter().map(|t| t[k].1).collect();
            Complex::new(crt_symmetric(&re, &primes), crt_symmetric(&im, &primes))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::power_traces;
    use proptest::prelude::*;

    fn int_matrix(n: usize, xs: &[i64]) -> Matrix<BigInt> {
        Matrix::from_rows((0..n).map(|i| xs[i * n..(i + 1) * n].iter().map(|&x| BigInt::from(x)).collect()).collect())
    }

    #[test]
    fn small_primes_fit_accumulators() {
        assert_eq!(prime_bits(64), 28);
        assert!(primes_exceeding(&BigInt::from(1u64 << 40), 20).len() >= 2);
        assert_eq!(crt_symmetric(&[2, 4], &[5, 7]), BigInt::from(-3));
    }

    #[test]
    fn large_entries() {
        let big = 1i64 << 40;
        let m = int_matrix(2, &[big, -3, 7, -big]);
        assert_eq!(integer_traces(&m, 6), power_traces(&m, 6));
    }

    proptest! {
        #[test]
        fn matches_direct_powers(n in 1usize..7, xs in proptest::collection::vec(-1000i64..1000, 49), upto in 0usize..9) {
            let m = int_matrix(n, &xs);
            prop_assert_eq!(integer_traces(&m, upto), power_traces(&m, upto));
        }

        #[test]
        fn gaussian_matches_direct_powers(n in 1usize..5, xs in proptest::collection::vec(-50i64..50, 32), upto in 0usize..7) {
            let m = Matrix::from_rows((0..n).map(|i| (0..n).map(|j| Complex::new(BigInt::from(xs[2 * (i * n + j)]), BigInt::from(xs[2 * (i * n + j) + 1]))).collect()).collect());
            prop_assert_eq!(gaussian_integer_traces(&m, upto), power_traces(&m, upto));
        }
    }
}
