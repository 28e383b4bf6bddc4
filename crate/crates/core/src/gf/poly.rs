//! Dense polynomials over a prime field, coefficients stored low-to-high.
//!
//! Only what the tower construction needs: reduction, products modulo a
//! modulus, powering, gcd and Rabin's irreducibility test.

pub(crate) fn trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn inv_mod(a: u32, p: u32) -> u32 {
    // p is prime, Fermat
    let mut result = 1u64;
    let mut base = a as u64 % p as u64;
    let mut exp = p as u64 - 2;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        exp >>= 1;
    }
    result as u32
}

pub(crate) fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let m = trim(m.to_vec());
    let dm = m.len() - 1;
    let lead_inv = inv_mod(m[dm], p) as u64;
    let mut r = trim(a.to_vec());
    while r.len() > dm {
        let top = r.len() - 1;
        let c = r[top] as u64 * lead_inv % p as u64;
        let shift = top - dm;
        for (i, &mi) in m.iter().enumerate() {
            let sub = c * mi as u64 % p as u64;
            r[shift + i] = ((r[shift + i] as u64 + p as u64 - sub) % p as u64) as u32;
        }
        r = trim(r);
    }
    r
}

pub(crate) fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + ai as u64 * bj as u64) % p as u64;
        }
    }
    trim(out.into_iter().map(|c| c as u32).collect())
}

pub(crate) fn mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    rem(&mul(a, b, p), m, p)
}

pub(crate) fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let len = a.len().max(b.len());
    let out = (0..len)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

pub(crate) fn powmod(base: &[u32], mut exp: u128, m: &[u32], p: u32) -> Vec<u32> {
    let mut result = vec![1u32];
    let mut b = rem(base, m, p);
    while exp > 0 {
        if exp & 1 == 1 {
            result = mulmod(&result, &b, m, p);
        }
        b = mulmod(&b, &b, m, p);
        exp >>= 1;
    }
    rem(&result, m, p)
}

pub(crate) fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn prime_factors(mut k: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= k {
        if k.is_multiple_of(d) {
            out.push(d);
            while k.is_multiple_of(d) {
                k /= d;
            }
        }
        d += 1;
    }
    if k > 1 {
        out.push(k);
    }
    out
}

/// Rabin's test: `f` of degree k is irreducible over F_p iff x^(p^k) = x mod f
/// and gcd(x^(p^(k/r)) - x, f) = 1 for every prime r dividing k.
pub(crate) fn is_irreducible(f: &[u32], p: u32) -> bool {
    let f = trim(f.to_vec());
    if f.len() < 2 {
        return false;
    }
    let k = f.len() - 1;
    if k == 1 {
        return true;
    }
    let x = vec![0u32, 1];
    let x_pow = |j: usize| -> Vec<u32> {
        let mut cur = x.clone();
        for _ in 0..j {
            cur = powmod(&cur, p as u128, &f, p);
        }
        cur
    };
    if sub(&x_pow(k), &x, p) != Vec::<u32>::new() {
        return false;
    }
    for r in prime_factors(k) {
        let g = gcd(&sub(&x_pow(k / r), &x, p), &f, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// Smallest monic irreducible of degree `k`, ordering candidates by the
/// integer sum(a_i p^i) of their non-leading coefficients.
pub(crate) fn smallest_irreducible(p: u32, k: usize) -> Vec<u32> {
    if k == 1 {
        return vec![0, 1];
    }
    let total = (p as u64).pow(k as u32);
    for code in 0..total {
        let mut f = Vec::with_capacity(k + 1);
        let mut c = code;
        for _ in 0..k {
            f.push((c % p as u64) as u32);
            c /= p as u64;
        }
        f.push(1);
        if f[0] != 0 && is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_irreducibles() {
        assert_eq!(smallest_irreducible(3, 2), vec![1, 0, 1]);
        assert_eq!(smallest_irreducible(5, 2), vec![2, 0, 1]);
        assert_eq!(smallest_irreducible(2, 2), vec![1, 1, 1]);
        assert!(is_irreducible(&[1, 1, 0, 1], 2));
        assert!(!is_irreducible(&[0, 1, 1], 3));
        assert!(!is_irreducible(&[1, 0, 1], 5));
    }

    #[test]
    fn quartic_with_quadratic_factors_is_rejected() {
        // (x^2+1)^2 over F_3 has no roots but is reducible
        let f = mul(&[1, 0, 1], &[1, 0, 1], 3);
        assert!(!is_irreducible(&f, 3));
    }
}
