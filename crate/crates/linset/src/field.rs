//! Exact arithmetic in a tower F_p ⊆ F_q ⊆ F_{q^h} with q = p^e.
//!
//! The top field F_{q^h} = F_{p^{eh}} is realised as F_p[x]/(f) for a monic
//! irreducible f of degree e·h. Elements are stored as integer encodings
//! Σ coeffs[i]·p^i (little-endian base-p digits of the coefficient vector),
//! so encodings are stable across runs for a fixed defining polynomial.
//! The ground field F_q lives inside the top field as the set of solutions
//! of x^q = x; no second arithmetic engine is kept.

use crate::error::{Error, Result};

/// Element of the top field, as its integer encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fe(pub u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Log/antilog tables for fields up to [`TABLE_LIMIT`] elements.
struct MulTables {
    exp: Vec<u32>, // length 2*(order-1), exp[i] = g^i
    log: Vec<u32>, // length order, log[enc] defined for enc != 0
}

const TABLE_LIMIT: u64 = 1 << 20;
const ORDER_LIMIT: u64 = 1 << 24;

pub struct FieldTower {
    p: u32,
    e: u32,
    h: u32,
    n: u32, // e*h
    q: u64,
    order: u64,
    poly: Vec<u32>,
    custom_poly: bool,
    tables: Option<MulTables>,
    frob_p: Vec<u32>, // x -> x^p
    gamma: Fe,        // generator of the F_q copy over F_p (1 when e = 1)
    theta: Fe,        // degree-h generator over F_q; power basis for flattening
    sub_elems: Vec<Fe>,
    sub_index: Vec<u8>, // encoding -> index in sub_elems, 0xff if absent
    sub_add: Vec<u8>,   // q*q
    sub_mul: Vec<u8>,
    sub_neg: Vec<u8>,
    sub_inv: Vec<u8>, // index 0 unused
    enc_of_flat: Vec<u32>,
    flat_of_enc: Vec<u32>,
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn checked_pow(p: u32, n: u32) -> Option<u64> {
    let mut acc = 1u64;
    for _ in 0..n {
        acc = acc.checked_mul(p as u64)?;
        if acc > ORDER_LIMIT {
            return None;
        }
    }
    Some(acc)
}

// ---- polynomial helpers over F_p (construction-time only) ----

fn poly_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_mul(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += (x as u64) * (y as u64);
        }
    }
    let mut out: Vec<u32> = out.iter().map(|&v| (v % p as u64) as u32).collect();
    poly_trim(&mut out);
    out
}

/// Remainder of a modulo the monic polynomial m.
fn poly_rem(p: u32, a: &[u32], m: &[u32]) -> Vec<u32> {
    let mut a = a.to_vec();
    poly_trim(&mut a);
    let dm = m.len() - 1;
    while a.len() > dm {
        let lead = *a.last().unwrap();
        let shift = a.len() - 1 - dm;
        if lead != 0 {
            for (i, &c) in m.iter().enumerate() {
                let idx = i + shift;
                let v = (a[idx] as u64 + (p as u64 - 1) * lead as u64 * c as u64) % p as u64;
                a[idx] = v as u32;
            }
        }
        a.pop();
        poly_trim(&mut a);
        if a.is_empty() {
            break;
        }
    }
    a
}

fn poly_gcd(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    poly_trim(&mut a);
    poly_trim(&mut b);
    while !b.is_empty() {
        // make b monic for the remainder step
        let lead = *b.last().unwrap();
        if lead != 1 {
            let inv = mod_inverse(lead, p);
            for c in b.iter_mut() {
                *c = ((*c as u64 * inv as u64) % p as u64) as u32;
            }
        }
        let r = poly_rem(p, &a, &b);
        a = b;
        b = r;
    }
    a
}

fn mod_inverse(a: u32, p: u32) -> u32 {
    // p is prime
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

/// x^(p^k) mod m, by repeated p-th powering.
fn poly_frobenius_power(p: u32, k: u32, m: &[u32]) -> Vec<u32> {
    let mut x = vec![0u32, 1];
    x = poly_rem(p, &x, m);
    for _ in 0..k {
        x = poly_pow(p, &x, p as u64, m);
    }
    x
}

fn poly_pow(p: u32, a: &[u32], mut exp: u64, m: &[u32]) -> Vec<u32> {
    let mut result = vec![1u32];
    let mut base = poly_rem(p, a, m);
    while exp > 0 {
        if exp & 1 == 1 {
            result = poly_rem(p, &poly_mul(p, &result, &base), m);
        }
        base = poly_rem(p, &poly_mul(p, &base, &base), m);
        exp >>= 1;
    }
    result
}

fn is_irreducible(p: u32, f: &[u32]) -> bool {
    let n = (f.len() - 1) as u32;
    if n == 0 {
        return false;
    }
    // x^(p^n) == x mod f, and gcd(x^(p^(n/t)) - x, f) = 1 for each prime t | n.
    let xn = poly_frobenius_power(p, n, f);
    let mut xn_minus_x = xn.clone();
    while xn_minus_x.len() < 2 {
        xn_minus_x.push(0);
    }
    xn_minus_x[1] = (xn_minus_x[1] + p - 1) % p;
    poly_trim(&mut xn_minus_x);
    if !xn_minus_x.is_empty() {
        return false;
    }
    let mut n_fac = n;
    let mut t = 2;
    while t <= n_fac {
        if n_fac % t == 0 {
            let mut xd = poly_frobenius_power(p, n / t, f);
            while xd.len() < 2 {
                xd.push(0);
            }
            xd[1] = (xd[1] + p - 1) % p;
            poly_trim(&mut xd);
            let g = poly_gcd(p, &xd, f);
            if g.len() != 1 {
                return false;
            }
            while n_fac % t == 0 {
                n_fac /= t;
            }
        }
        t += 1;
    }
    true
}

/// Lexicographically least monic irreducible of degree n over F_p, ordered by
/// the integer encoding of the non-leading coefficients.
fn default_poly(p: u32, n: u32) -> Vec<u32> {
    let bound = checked_pow(p, n).expect("order guard checked earlier");
    for m in 0..bound {
        let mut f = Vec::with_capacity(n as usize + 1);
        let mut rest = m;
        for _ in 0..n {
            f.push((rest % p as u64) as u32);
            rest /= p as u64;
        }
        f.push(1);
        if is_irreducible(p, &f) {
            return f;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists")
}

fn factor_u64(mut n: u64) -> Vec<u64> {
    let mut out = vec![];
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl FieldTower {
    pub fn new(p: u32, e: u32, h: u32, poly: Option<Vec<u32>>) -> Result<FieldTower> {
        if !is_prime(p) {
            return Err(Error::NonPrime(p));
        }
        if e == 0 || h == 0 {
            return Err(Error::InvalidParams("e and h must be positive".into()));
        }
        let n = e * h;
        let order = checked_pow(p, n)
            .ok_or_else(|| Error::TooLarge(0, ORDER_LIMIT as u128))?;
        let (poly, custom_poly) = match poly {
            Some(f) => {
                if f.len() != n as usize + 1 || f.last() != Some(&1) {
                    return Err(Error::DegreeMismatch {
                        want: n as usize,
                        got: f.len().saturating_sub(1),
                    });
                }
                if f.iter().any(|&c| c >= p) {
                    return Err(Error::Parse("polynomial coefficient out of range".into()));
                }
                if !is_irreducible(p, &f) {
                    return Err(Error::ReduciblePolynomial(p));
                }
                (f, true)
            }
            None => (default_poly(p, n), false),
        };

        let mut tw = FieldTower {
            p,
            e,
            h,
            n,
            q: checked_pow(p, e).unwrap(),
            order,
            poly,
            custom_poly,
            tables: None,
            frob_p: vec![],
            gamma: Fe::ZERO,
            theta: Fe::ZERO,
            sub_elems: vec![],
            sub_index: vec![],
            sub_add: vec![],
            sub_mul: vec![],
            sub_neg: vec![],
            sub_inv: vec![],
            enc_of_flat: vec![],
            flat_of_enc: vec![],
        };
        if order <= TABLE_LIMIT {
            tw.build_mul_tables();
        }
        tw.build_frobenius();
        tw.build_subfield_tables()?;
        tw.build_flattening();
        Ok(tw)
    }

    fn enc_to_poly(&self, enc: u32) -> Vec<u32> {
        let mut out = vec![];
        let mut rest = enc as u64;
        while rest > 0 {
            out.push((rest % self.p as u64) as u32);
            rest /= self.p as u64;
        }
        out
    }

    fn poly_to_enc(&self, poly: &[u32]) -> u32 {
        let mut enc = 0u64;
        for &c in poly.iter().rev() {
            enc = enc * self.p as u64 + c as u64;
        }
        enc as u32
    }

    fn mul_slow(&self, a: Fe, b: Fe) -> Fe {
        let pa = self.enc_to_poly(a.0);
        let pb = self.enc_to_poly(b.0);
        let prod = poly_rem(self.p, &poly_mul(self.p, &pa, &pb), &self.poly);
        Fe(self.poly_to_enc(&prod))
    }

    fn build_mul_tables(&mut self) {
        let order = self.order as usize;
        let m = order as u64 - 1;
        let factors = factor_u64(m);
        let g = (2..order as u32)
            .map(Fe)
            .find(|&g| {
                factors
                    .iter()
                    .all(|&f| self.pow_slow(g, m / f) != Fe::ONE)
            })
            .expect("a multiplicative generator exists");
        let mut exp = vec![0u32; 2 * (order - 1)];
        let mut log = vec![0u32; order];
        let mut cur = Fe::ONE;
        for (i, slot) in exp.iter_mut().take(order - 1).enumerate() {
            *slot = cur.0;
            log[cur.0 as usize] = i as u32;
            cur = self.mul_slow(cur, g);
        }
        debug_assert_eq!(cur, Fe::ONE);
        for i in 0..order - 1 {
            exp[order - 1 + i] = exp[i];
        }
        self.tables = Some(MulTables { exp, log });
    }

    fn pow_slow(&self, a: Fe, exp: u64) -> Fe {
        let pa = self.enc_to_poly(a.0);
        Fe(self.poly_to_enc(&poly_pow(self.p, &pa, exp, &self.poly)))
    }

    fn build_frobenius(&mut self) {
        self.frob_p = (0..self.order as u32)
            .map(|enc| self.pow(Fe(enc), self.p as u64).0)
            .collect();
    }

    fn build_subfield_tables(&mut self) -> Result<()> {
        // γ: least encoding generating exactly the F_q copy over F_p
        self.gamma = if self.e == 1 {
            Fe::ONE
        } else {
            (0..self.order as u32)
                .map(Fe)
                .find(|&x| self.frob_p_iter(x, self.e) == x && self.degree_over_p(x) == self.e)
                .expect("F_q embeds in F_{q^h}")
        };
        let sub_elems: Vec<Fe> = (0..self.order as u32)
            .map(Fe)
            .filter(|&x| self.frob_p_iter(x, self.e) == x)
            .collect();
        debug_assert_eq!(sub_elems.len() as u64, self.q);
        let q = self.q as usize;
        let mut sub_index = vec![0xffu8; self.order as usize];
        for (i, &x) in sub_elems.iter().enumerate() {
            sub_index[x.0 as usize] = i as u8;
        }
        let mut sub_add = vec![0u8; q * q];
        let mut sub_mul = vec![0u8; q * q];
        let mut sub_neg = vec![0u8; q];
        let mut sub_inv = vec![0u8; q];
        for i in 0..q {
            for j in 0..q {
                sub_add[i * q + j] = sub_index[self.add(sub_elems[i], sub_elems[j]).0 as usize];
                sub_mul[i * q + j] = sub_index[self.mul(sub_elems[i], sub_elems[j]).0 as usize];
            }
            sub_neg[i] = sub_index[self.neg(sub_elems[i]).0 as usize];
            if i > 0 {
                sub_inv[i] = sub_index[self.inv(sub_elems[i]).0 as usize];
            }
        }
        self.sub_elems = sub_elems;
        self.sub_index = sub_index;
        self.sub_add = sub_add;
        self.sub_mul = sub_mul;
        self.sub_neg = sub_neg;
        self.sub_inv = sub_inv;
        Ok(())
    }

    fn build_flattening(&mut self) {
        // θ: least encoding of degree h over F_q; basis 1, θ, ..., θ^{h-1}
        self.theta = (0..self.order as u32)
            .map(Fe)
            .find(|&x| self.degree_over_q(x) == self.h)
            .expect("the top field is generated by one element over F_q");
        let h = self.h as usize;
        let q = self.q as usize;
        let mut theta_pows = Vec::with_capacity(h);
        let mut cur = Fe::ONE;
        for _ in 0..h {
            theta_pows.push(cur);
            cur = self.mul(cur, self.theta);
        }
        let order = self.order as usize;
        let mut enc_of_flat = vec![u32::MAX; order];
        let mut flat_of_enc = vec![u32::MAX; order];
        let mut digits = vec![0usize; h];
        for flat in 0..order {
            let mut acc = Fe::ZERO;
            for (i, &d) in digits.iter().enumerate() {
                if d != 0 {
                    acc = self.add(acc, self.mul(self.sub_elems[d], theta_pows[i]));
                }
            }
            enc_of_flat[flat] = acc.0;
            debug_assert_eq!(flat_of_enc[acc.0 as usize], u32::MAX, "flattening not bijective");
            flat_of_enc[acc.0 as usize] = flat as u32;
            // odometer
            for d in digits.iter_mut() {
                *d += 1;
                if *d < q {
                    break;
                }
                *d = 0;
            }
        }
        self.enc_of_flat = enc_of_flat;
        self.flat_of_enc = flat_of_enc;
    }

    // ---- accessors ----

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn e(&self) -> u32 {
        self.e
    }
    pub fn h(&self) -> u32 {
        self.h
    }
    pub fn q(&self) -> u64 {
        self.q
    }
    pub fn order(&self) -> u64 {
        self.order
    }
    pub fn defining_poly(&self) -> &[u32] {
        &self.poly
    }
    pub fn q_embedding(&self) -> Fe {
        self.gamma
    }
    pub fn theta(&self) -> Fe {
        self.theta
    }

    /// Field spec string "p^e:h[:poly-hex]"; the poly part is emitted only for
    /// a caller-supplied polynomial.
    pub fn spec_string(&self) -> String {
        let base = format!("{}^{}:{}", self.p, self.e, self.h);
        if self.custom_poly {
            format!("{}:{:x}", base, self.poly_to_enc_full())
        } else {
            base
        }
    }

    fn poly_to_enc_full(&self) -> u64 {
        let mut enc = 0u64;
        for &c in self.poly.iter().rev() {
            enc = enc * self.p as u64 + c as u64;
        }
        enc
    }

    // ---- arithmetic ----

    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if self.p == 2 {
            return Fe(a.0 ^ b.0);
        }
        let mut out = 0u64;
        let (mut x, mut y) = (a.0 as u64, b.0 as u64);
        let mut mult = 1u64;
        let p = self.p as u64;
        while x > 0 || y > 0 {
            out += mult * ((x % p + y % p) % p);
            x /= p;
            y /= p;
            mult *= p;
        }
        Fe(out as u32)
    }

    pub fn neg(&self, a: Fe) -> Fe {
        if self.p == 2 {
            return a;
        }
        let mut out = 0u64;
        let mut x = a.0 as u64;
        let mut mult = 1u64;
        let p = self.p as u64;
        while x > 0 {
            out += mult * ((p - x % p) % p);
            x /= p;
            mult *= p;
        }
        Fe(out as u32)
    }

    pub fn sub_fe(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.is_zero() || b.is_zero() {
            return Fe::ZERO;
        }
        match &self.tables {
            Some(t) => {
                let la = t.log[a.0 as usize] as usize;
                let lb = t.log[b.0 as usize] as usize;
                Fe(t.exp[la + lb])
            }
            None => self.mul_slow(a, b),
        }
    }

    pub fn inv(&self, a: Fe) -> Fe {
        assert!(!a.is_zero(), "inverse of zero");
        match &self.tables {
            Some(t) => {
                let la = t.log[a.0 as usize] as usize;
                let m = self.order as usize - 1;
                Fe(t.exp[(m - la) % m])
            }
            None => self.pow_slow(a, self.order - 2),
        }
    }

    pub fn div(&self, a: Fe, b: Fe) -> Fe {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: Fe, exp: u64) -> Fe {
        if a.is_zero() {
            return if exp == 0 { Fe::ONE } else { Fe::ZERO };
        }
        match &self.tables {
            Some(t) => {
                let m = self.order - 1;
                let la = t.log[a.0 as usize] as u64;
                let idx = (la % m * (exp % m)) % m;
                Fe(t.exp[idx as usize])
            }
            None => self.pow_slow(a, exp),
        }
    }

    /// x^(p^k)
    pub fn frob_p_iter(&self, mut x: Fe, k: u32) -> Fe {
        for _ in 0..k {
            x = Fe(self.frob_p[x.0 as usize]);
        }
        x
    }

    /// x^(q^s)
    pub fn frob_iter(&self, x: Fe, s: u32) -> Fe {
        self.frob_p_iter(x, s * self.e)
    }

    pub fn degree_over_p(&self, x: Fe) -> u32 {
        (1..=self.n)
            .find(|&d| self.frob_p_iter(x, d) == x)
            .expect("every element is fixed by the full Frobenius orbit")
    }

    /// Least s ≥ 1 with x^(q^s) = x; always divides h.
    pub fn degree_over_q(&self, x: Fe) -> u32 {
        (1..=self.h)
            .find(|&s| self.frob_iter(x, s) == x)
            .expect("every element is fixed by x -> x^(q^h)")
    }

    /// The q^s elements of the subfield F_{q^s}, sorted by encoding.
    pub fn subfield_elements(&self, s: u32) -> Result<Vec<Fe>> {
        if s == 0 || self.h % s != 0 {
            return Err(Error::NotADivisor(s, self.h));
        }
        Ok((0..self.order as u32)
            .map(Fe)
            .filter(|&x| self.frob_iter(x, s) == x)
            .collect())
    }

    /// Least-encoding element of degree exactly s over F_q (generates F_{q^s}).
    pub fn subfield_generator(&self, s: u32) -> Result<Fe> {
        if s == 0 || self.h % s != 0 {
            return Err(Error::NotADivisor(s, self.h));
        }
        Ok((0..self.order as u32)
            .map(Fe)
            .find(|&x| self.degree_over_q(x) == s)
            .expect("F_{q^s} has a generator"))
    }

    pub fn in_ground_field(&self, x: Fe) -> bool {
        self.sub_index[x.0 as usize] != 0xff
    }

    // ---- F_q copy as indices 0..q ----

    pub fn sub_elem(&self, i: u8) -> Fe {
        self.sub_elems[i as usize]
    }

    /// Index of x in the F_q copy, if it lies there.
    pub fn sub_index_of(&self, x: Fe) -> Option<u8> {
        let i = self.sub_index[x.0 as usize];
        (i != 0xff).then_some(i)
    }

    #[inline]
    pub fn sidx_add(&self, a: u8, b: u8) -> u8 {
        self.sub_add[a as usize * self.q as usize + b as usize]
    }
    #[inline]
    pub fn sidx_mul(&self, a: u8, b: u8) -> u8 {
        self.sub_mul[a as usize * self.q as usize + b as usize]
    }
    #[inline]
    pub fn sidx_neg(&self, a: u8) -> u8 {
        self.sub_neg[a as usize]
    }
    #[inline]
    pub fn sidx_inv(&self, a: u8) -> u8 {
        debug_assert!(a != 0);
        self.sub_inv[a as usize]
    }

    // ---- flattening of F_{q^h} over F_q ----

    /// Coordinates of x w.r.t. the power basis 1, θ, ..., θ^{h-1}, as
    /// F_q-copy indices.
    pub fn flatten_elem(&self, x: Fe) -> Vec<u8> {
        let mut flat = self.flat_of_enc[x.0 as usize] as u64;
        let q = self.q;
        (0..self.h)
            .map(|_| {
                let d = (flat % q) as u8;
                flat /= q;
                d
            })
            .collect()
    }

    pub fn unflatten_elem(&self, digits: &[u8]) -> Fe {
        debug_assert_eq!(digits.len(), self.h as usize);
        let mut flat = 0u64;
        for &d in digits.iter().rev() {
            flat = flat * self.q + d as u64;
        }
        Fe(self.enc_of_flat[flat as usize])
    }
}

/// Parse "p^e:h[:poly-hex]" (also accepts "p:h" for e = 1).
pub fn parse_field_spec(spec: &str) -> Result<FieldTower> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() < 2 || parts.len() > 3 {
        return Err(Error::Parse(format!("bad field spec `{spec}`")));
    }
    let (p, e) = match parts[0].split_once('^') {
        Some((p, e)) => (
            p.parse::<u32>().map_err(|_| Error::Parse(format!("bad prime `{p}`")))?,
            e.parse::<u32>().map_err(|_| Error::Parse(format!("bad exponent `{e}`")))?,
        ),
        None => (
            parts[0]
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad prime `{}`", parts[0])))?,
            1,
        ),
    };
    let h = parts[1]
        .parse::<u32>()
        .map_err(|_| Error::Parse(format!("bad degree `{}`", parts[1])))?;
    let poly = if parts.len() == 3 {
        let mut enc = u64::from_str_radix(parts[2], 16)
            .map_err(|_| Error::Parse(format!("bad poly-hex `{}`", parts[2])))?;
        let mut coeffs = vec![];
        while enc > 0 {
            coeffs.push((enc % p as u64) as u32);
            enc /= p as u64;
        }
        Some(coeffs)
    } else {
        None
    };
    FieldTower::new(p, e, h, poly)
}
