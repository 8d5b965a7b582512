//! Exact arithmetic in `Z[θ]` with `θ = 2cos(π/N)`.
//!
//! Every entry of the geometric representation of a Coxeter group is an
//! integer combination of powers of `θ` where `N` is the lcm of the finite
//! Coxeter-matrix entries. Elements are stored as coefficient vectors of
//! length `deg(minpoly θ)`, reduced modulo the (monic, integral) minimal
//! polynomial.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Integer polynomial helpers, coefficients in ascending degree.
fn poly_trim(p: &mut Vec<i64>) {
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
}

/// Exact division of integer polynomials where `d` is monic.
fn poly_div_exact(n: &[i64], d: &[i64]) -> Vec<i64> {
    let mut rem = n.to_vec();
    let dd = d.len() - 1;
    assert_eq!(*d.last().unwrap(), 1, "divisor must be monic");
    if rem.len() < d.len() {
        return vec![0];
    }
    let mut q = vec![0i64; rem.len() - dd];
    for i in (0..q.len()).rev() {
        let c = rem[i + dd];
        q[i] = c;
        if c != 0 {
            for (j, &dj) in d.iter().enumerate() {
                rem[i + j] -= c * dj;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0), "division was not exact");
    q
}

/// Cyclotomic polynomial `Φ_m`.
pub fn cyclotomic(m: u64) -> Vec<i64> {
    // z^m - 1 divided by Φ_d for all proper divisors d.
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in 1..m {
        if m.is_multiple_of(d) {
            num = poly_div_exact(&num, &cyclotomic(d));
        }
    }
    poly_trim(&mut num);
    num
}

/// The polynomials `C_k(x)` with `C_k(z + 1/z) = z^k + z^{-k}`.
fn chebyshev_like(k: usize) -> Vec<i64> {
    let mut prev = vec![2i64];
    if k == 0 {
        return prev;
    }
    let mut cur = vec![0i64, 1];
    for _ in 1..k {
        let mut next = vec![0i64; cur.len() + 1];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= c;
        }
        poly_trim(&mut next);
        prev = cur;
        cur = next;
    }
    cur
}

/// Minimal polynomial of `2cos(π/n)` for `n ≥ 4` (monic, integral).
pub fn minimal_polynomial_2cos(n: u64) -> Vec<i64> {
    let phi = cyclotomic(2 * n);
    let d = (phi.len() - 1) / 2;
    let mut psi = vec![0i64; d + 1];
    psi[0] = phi[d];
    for k in 1..=d {
        let c = phi[d + k];
        if c == 0 {
            continue;
        }
        for (i, &t) in chebyshev_like(k).iter().enumerate() {
            psi[i] += c * t;
        }
    }
    poly_trim(&mut psi);
    psi
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Number field context `Q(θ)`, `θ = 2cos(π/N)`.
#[derive(Clone, Debug)]
pub struct NumberField {
    n: u64,
    /// Monic minimal polynomial, ascending coefficients (length `degree + 1`).
    minpoly: Vec<i64>,
    /// `θ^j` for `j ≥ degree`, reduced.
    reduction: Vec<Vec<i64>>,
    /// Fixed-point lower/upper bounds of `θ^k · 2^SCALE_BITS`.
    pow_lo: Vec<i128>,
    pow_hi: Vec<i128>,
}

const SCALE_BITS: u32 = 62;
const BISECT_BITS: u64 = 100;

pub type FieldElem = Vec<i64>;

impl NumberField {
    /// Field for the given `N`. For `N ≤ 3` every `2cos(π/m)` with `m | N`
    /// is an integer, so the field degenerates to `Q`.
    pub fn new(n: u64) -> Self {
        if n <= 3 {
            return NumberField {
                n,
                minpoly: vec![-1, 1],
                reduction: vec![],
                pow_lo: vec![1i128 << SCALE_BITS],
                pow_hi: vec![1i128 << SCALE_BITS],
            };
        }
        let minpoly = minimal_polynomial_2cos(n);
        let deg = minpoly.len() - 1;
        // θ^deg = -Σ minpoly[i] θ^i, then shift upwards far enough for
        // both products and the Chebyshev-like polynomials of degree ≤ N.
        let mut reduction = Vec::new();
        let mut cur: Vec<i64> = minpoly[..deg].iter().map(|c| -c).collect();
        for _ in 0..deg.max(n as usize) {
            reduction.push(cur.clone());
            let top = cur[deg - 1];
            let mut next = vec![0i64; deg];
            for i in (1..deg).rev() {
                next[i] = cur[i - 1];
            }
            for i in 0..deg {
                next[i] -= top * minpoly[i];
            }
            cur = next;
        }
        let mut field = NumberField { n, minpoly, reduction, pow_lo: vec![], pow_hi: vec![] };
        let (lo, hi) = field.isolate_theta(BISECT_BITS);
        let (pl, ph) = Self::power_bounds(&lo, &hi, BISECT_BITS, deg);
        field.pow_lo = pl;
        field.pow_hi = ph;
        field
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.minpoly.len() - 1
    }

    pub fn minimal_polynomial(&self) -> &[i64] {
        &self.minpoly
    }

    pub fn zero(&self) -> FieldElem {
        vec![0; self.degree()]
    }

    pub fn from_int(&self, v: i64) -> FieldElem {
        let mut e = self.zero();
        e[0] = v;
        e
    }

    /// `2cos(π/m)` for `m` dividing `N`, or `m = 0` (∞) which gives 2.
    pub fn two_cos_pi_over(&self, m: u64) -> FieldElem {
        if m == 0 {
            return self.from_int(2);
        }
        if m == 2 {
            return self.zero();
        }
        if self.degree() == 1 {
            let v = match m {
                1 => -2,
                2 => 0,
                3 => 1,
                _ => panic!("2cos(pi/{m}) is not rational"),
            };
            return self.from_int(v);
        }
        assert!(self.n.is_multiple_of(m), "m = {m} does not divide N = {}", self.n);
        let cheb = chebyshev_like((self.n / m) as usize);
        self.reduce_poly(&cheb)
    }

    fn reduce_poly(&self, p: &[i64]) -> FieldElem {
        let deg = self.degree();
        let mut out = vec![0i64; deg];
        for (i, &c) in p.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if i < deg {
                out[i] = out[i].checked_add(c).expect("field coefficient overflow");
            } else {
                for (j, &r) in self.reduction[i - deg].iter().enumerate() {
                    out[j] = c
                        .checked_mul(r)
                        .and_then(|t| out[j].checked_add(t))
                        .expect("field coefficient overflow");
                }
            }
        }
        out
    }

    pub fn add_assign(&self, a: &mut [i64], b: &[i64]) {
        for (x, &y) in a.iter_mut().zip(b) {
            *x = x.checked_add(y).expect("field coefficient overflow");
        }
    }

    pub fn mul(&self, a: &[i64], b: &[i64]) -> FieldElem {
        let deg = self.degree();
        if deg == 1 {
            return vec![a[0].checked_mul(b[0]).expect("field coefficient overflow")];
        }
        let mut prod = vec![0i64; 2 * deg - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                if y != 0 {
                    prod[i + j] = x
                        .checked_mul(y)
                        .and_then(|t| prod[i + j].checked_add(t))
                        .expect("field coefficient overflow");
                }
            }
        }
        self.reduce_poly(&prod)
    }

    pub fn is_zero(a: &[i64]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    /// Floating approximation (diagnostics only).
    pub fn approx(&self, a: &[i64]) -> f64 {
        let theta = if self.degree() == 1 { 1.0 } else { 2.0 * (std::f64::consts::PI / self.n as f64).cos() };
        a.iter().rev().fold(0.0, |acc, &c| acc * theta + c as f64)
    }

    /// Exact sign of the real number represented by `a`.
    pub fn sign(&self, a: &[i64]) -> Ordering {
        if self.degree() == 1 {
            return a[0].cmp(&0);
        }
        if Self::is_zero(a) {
            return Ordering::Equal;
        }
        if let Some(s) = self.sign_fixed_point(a) {
            return s;
        }
        let mut bits = 2 * BISECT_BITS;
        loop {
            if let Some(s) = self.sign_big(a, bits) {
                return s;
            }
            bits *= 2;
            assert!(bits <= 1 << 16, "sign refinement did not converge");
        }
    }

    fn sign_fixed_point(&self, a: &[i64]) -> Option<Ordering> {
        let mut lo: i128 = 0;
        let mut hi: i128 = 0;
        for (k, &c) in a.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let c = c as i128;
            let (l, h) = if c > 0 {
                (c.checked_mul(self.pow_lo[k])?, c.checked_mul(self.pow_hi[k])?)
            } else {
                (c.checked_mul(self.pow_hi[k])?, c.checked_mul(self.pow_lo[k])?)
            };
            lo = lo.checked_add(l)?;
            hi = hi.checked_add(h)?;
        }
        if lo > 0 {
            Some(Ordering::Greater)
        } else if hi < 0 {
            Some(Ordering::Less)
        } else {
            None
        }
    }

    fn sign_big(&self, a: &[i64], bits: u64) -> Option<Ordering> {
        let (lo, hi) = self.isolate_theta(bits);
        // p(θ)·2^{bits·(deg-1)} bounded using monotone powers (θ > 0).
        let deg = self.degree();
        let mut lower = BigInt::zero();
        let mut upper = BigInt::zero();
        for (k, &c) in a.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let shift = bits * (deg as u64 - 1 - k as u64);
            let lo_k: BigInt = lo.pow(k as u32) << shift;
            let hi_k: BigInt = hi.pow(k as u32) << shift;
            let c = BigInt::from(c);
            if c.is_positive() {
                lower += &c * &lo_k;
                upper += &c * &hi_k;
            } else {
                lower += &c * &hi_k;
                upper += &c * &lo_k;
            }
        }
        if lower.is_positive() {
            Some(Ordering::Greater)
        } else if upper.is_negative() {
            Some(Ordering::Less)
        } else {
            None
        }
    }

    /// Sign of `minpoly(x / 2^bits)`.
    fn minpoly_sign_at(&self, x: &BigInt, bits: u64) -> Ordering {
        let deg = self.degree() as u64;
        let mut acc = BigInt::zero();
        for (j, &c) in self.minpoly.iter().enumerate() {
            if c == 0 {
                continue;
            }
            acc += (BigInt::from(c) * x.pow(j as u32)) << (bits * (deg - j as u64));
        }
        if acc.is_positive() {
            Ordering::Greater
        } else if acc.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }

    /// Integers `lo < hi = lo + 1` with `lo / 2^bits ≤ θ ≤ hi / 2^bits`.
    ///
    /// `θ` is the largest root of the minimal polynomial, so the polynomial is
    /// negative just below it and positive above it.
    fn isolate_theta(&self, bits: u64) -> (BigInt, BigInt) {
        let theta = 2.0 * (std::f64::consts::PI / self.n as f64).cos();
        let scale = |v: f64| -> BigInt {
            // v · 2^bits, via 2^40 integer steps to stay within f64 precision.
            let base = (v * (1u64 << 40) as f64).floor() as i64;
            BigInt::from(base) << (bits - 40)
        };
        let mut lo = scale(theta - 1e-7);
        let mut hi = scale(theta + 1e-7) + BigInt::one();
        assert_eq!(self.minpoly_sign_at(&lo, bits), Ordering::Less, "bad lower bracket for θ");
        assert_eq!(self.minpoly_sign_at(&hi, bits), Ordering::Greater, "bad upper bracket for θ");
        while &hi - &lo > BigInt::one() {
            let mid: BigInt = (&lo + &hi) >> 1;
            match self.minpoly_sign_at(&mid, bits) {
                Ordering::Less => lo = mid,
                Ordering::Greater => hi = mid,
                Ordering::Equal => unreachable!("θ is irrational for N ≥ 4"),
            }
        }
        (lo, hi)
    }

    fn power_bounds(lo: &BigInt, hi: &BigInt, bits: u64, deg: usize) -> (Vec<i128>, Vec<i128>) {
        let mut pl = Vec::with_capacity(deg);
        let mut ph = Vec::with_capacity(deg);
        for k in 0..deg {
            let shift = bits * k as u64;
            let l: BigInt = (lo.pow(k as u32) << SCALE_BITS) >> shift;
            let h: BigInt = ((hi.pow(k as u32) << SCALE_BITS) >> shift) + BigInt::one();
            pl.push(i128::try_from(l).expect("power bound fits i128"));
            ph.push(i128::try_from(h).expect("power bound fits i128"));
        }
        (pl, ph)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_small() {
        assert_eq!(cyclotomic(1), vec![-1, 1]);
        assert_eq!(cyclotomic(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic(8), vec![1, 0, 0, 0, 1]);
        assert_eq!(cyclotomic(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn minpoly_known_values() {
        // 2cos(π/4) = √2
        assert_eq!(minimal_polynomial_2cos(4), vec![-2, 0, 1]);
        // 2cos(π/5) = golden ratio: x² - x - 1
        assert_eq!(minimal_polynomial_2cos(5), vec![-1, -1, 1]);
        // 2cos(π/7): x³ - x² - 2x + 1
        assert_eq!(minimal_polynomial_2cos(7), vec![1, -2, -1, 1]);
    }

    #[test]
    fn minpoly_vanishes_numerically() {
        for n in 4..40u64 {
            let p = minimal_polynomial_2cos(n);
            let theta = 2.0 * (std::f64::consts::PI / n as f64).cos();
            let v: f64 = p.iter().rev().fold(0.0, |acc, &c| acc * theta + c as f64);
            assert!(v.abs() < 1e-8, "n = {n}: {v}");
        }
    }

    #[test]
    fn two_cos_values_match_floats() {
        let f = NumberField::new(21);
        assert_eq!(f.degree(), 6);
        for m in [3u64, 7, 21] {
            let e = f.two_cos_pi_over(m);
            let want = 2.0 * (std::f64::consts::PI / m as f64).cos();
            assert!((f.approx(&e) - want).abs() < 1e-9);
        }
        assert_eq!(f.two_cos_pi_over(3), f.from_int(1));
    }

    #[test]
    fn sign_agrees_with_float_away_from_zero() {
        let f = NumberField::new(21);
        let c7 = f.two_cos_pi_over(7);
        let mut e = c7.clone();
        f.add_assign(&mut e, &f.from_int(-2));
        assert_eq!(f.sign(&e), Ordering::Less);
        assert_eq!(f.sign(&c7), Ordering::Greater);
        // θ·θ - 4 < 0
        let t = f.two_cos_pi_over(21);
        let mut sq = f.mul(&t, &t);
        f.add_assign(&mut sq, &f.from_int(-4));
        assert_eq!(f.sign(&sq), Ordering::Less);
    }

    #[test]
    fn big_path_matches_fixed_point() {
        let f = NumberField::new(7);
        let t = f.two_cos_pi_over(7);
        for a in -5i64..=5 {
            for b in -5i64..=5 {
                let mut e = f.mul(&t, &f.from_int(a));
                f.add_assign(&mut e, &f.from_int(b));
                let fast = f.sign(&e);
                let big = if FieldElemExt::is_zero(&e) { Ordering::Equal } else { f.sign_big(&e, 300).unwrap() };
                assert_eq!(fast, big);
            }
        }
    }

    trait FieldElemExt {
        fn is_zero(&self) -> bool;
    }
    impl FieldElemExt for Vec<i64> {
        fn is_zero(&self) -> bool {
            NumberField::is_zero(self)
        }
    }
}
