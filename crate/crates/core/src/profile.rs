//! Fingerprint grouping of generators by weighted value profile.
//!
//! Two generators receive the same fingerprint exactly when their
//! weighted value multisets are proportional, in which case every
//! normalized statistic (mean, oscillation, deviation distribution)
//! coincides. Family-wide scans then run once per class instead of once
//! per generator, which collapses highly symmetric families by several
//! orders of magnitude.
//!
//! The fingerprint of a generator G is sum(w_i * phi(v_i)) / sum(w_i)
//! in two prime fields, where phi hashes the value bits. Weights enter
//! through their exact dyadic decomposition, so the residue of a weight
//! is an exact field embedding and proportional profiles always collide.
//! Distinct profiles separate with overwhelming probability; a zero
//! weight-sum residue falls back to a singleton class, which is always
//! sound because classes only ever merge work, never skip it.

use std::collections::HashMap;

use crate::family::Family;
use crate::numeric::decompose;
use crate::space::{CellSet, Space};

const P1: u64 = (1 << 61) - 1;
const P2: u64 = 9223372036854775783;
const SALT1: u64 = 0x9e37_79b9_7f4a_7c15;
const SALT2: u64 = 0xd1b5_4a32_d192_ed03;

#[inline]
fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
fn addmod(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    (if s >= p as u128 { s - p as u128 } else { s }) as u64
}

#[inline]
fn submod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + (p - b)
    }
}

fn powmod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, p);
        }
        base = mulmod(base, base, p);
        exp >>= 1;
    }
    acc
}

fn invmod(a: u64, p: u64) -> u64 {
    powmod(a, p - 2, p)
}

/// splitmix64 finalizer over the value bits, salted per prime.
#[inline]
fn mix(bits: u64, salt: u64) -> u64 {
    let mut z = bits.wrapping_add(salt);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Prefix sums of weight residues and weighted value hashes in one
/// prime field, with per-run extraction.
struct Fingerprinter {
    p: u64,
    weighted_hash_prefix: Vec<u64>,
    weight_prefix: Vec<u64>,
}

impl Fingerprinter {
    fn new(p: u64, salt: u64, values: &[f64], space: &Space) -> Self {
        let n = space.len();
        let mut pow2: HashMap<i32, u64> = HashMap::new();
        let mut weighted_hash_prefix = Vec::with_capacity(n + 1);
        let mut weight_prefix = Vec::with_capacity(n + 1);
        weighted_hash_prefix.push(0);
        weight_prefix.push(0);
        let mut ph = 0u64;
        let mut pm = 0u64;
        debug_assert_eq!(values.len(), n);
        for (i, &v) in values.iter().enumerate() {
            let (m, e) = decompose(space.weight(i as u32));
            let scale = *pow2.entry(e).or_insert_with(|| {
                if e >= 0 {
                    powmod(2, e as u64, p)
                } else {
                    invmod(powmod(2, (-e) as u64, p), p)
                }
            });
            let wres = mulmod(m % p, scale, p);
            // Hash in [1, p-1] so a value can never annihilate its weight.
            let vres = mix(v.to_bits(), salt) % (p - 1) + 1;
            ph = addmod(ph, mulmod(wres, vres, p), p);
            pm = addmod(pm, wres, p);
            weighted_hash_prefix.push(ph);
            weight_prefix.push(pm);
        }
        Self {
            p,
            weighted_hash_prefix,
            weight_prefix,
        }
    }

    /// Normalized fingerprint of a member, or None when the weight-sum
    /// residue is zero and the ratio is undefined.
    fn key(&self, cells: &CellSet, inv_cache: &mut HashMap<u64, u64>) -> Option<u64> {
        let mut h = 0u64;
        let mut m = 0u64;
        for &(lo, hi) in cells.runs() {
            h = addmod(
                h,
                submod(
                    self.weighted_hash_prefix[hi as usize],
                    self.weighted_hash_prefix[lo as usize],
                    self.p,
                ),
                self.p,
            );
            m = addmod(
                m,
                submod(
                    self.weight_prefix[hi as usize],
                    self.weight_prefix[lo as usize],
                    self.p,
                ),
                self.p,
            );
        }
        if m == 0 {
            return None;
        }
        let p = self.p;
        let inv = *inv_cache.entry(m).or_insert_with(|| invmod(m, p));
        Some(mulmod(h, inv, p))
    }
}

/// One equivalence class of generators.
#[derive(Clone, Copy, Debug)]
pub struct ClassInfo {
    /// Member with the fewest cells; statistics run on this one.
    pub representative: usize,
    /// Lowest generator index in the class, used for argmax ties.
    pub first_gen: usize,
    pub size: usize,
}

/// Partition of a family into profile classes, in first-seen order.
#[derive(Clone, Debug)]
pub struct DistributionClasses {
    pub class_of_gen: Vec<usize>,
    pub classes: Vec<ClassInfo>,
}

/// Groups generators whose weighted value profiles are proportional.
pub fn distribution_classes(
    values: &[f64],
    family: &Family,
    space: &Space,
) -> DistributionClasses {
    let fp1 = Fingerprinter::new(P1, SALT1, values, space);
    let fp2 = Fingerprinter::new(P2, SALT2, values, space);
    let mut inv1: HashMap<u64, u64> = HashMap::new();
    let mut inv2: HashMap<u64, u64> = HashMap::new();
    let mut by_key: HashMap<(u64, u64), usize> = HashMap::new();
    let mut class_of_gen = Vec::with_capacity(family.len());
    let mut classes: Vec<ClassInfo> = Vec::new();
    for g in 0..family.len() {
        let member = family.member(g);
        let keys = fp1
            .key(member, &mut inv1)
            .zip(fp2.key(member, &mut inv2));
        let class = match keys {
            Some(key) => *by_key.entry(key).or_insert(classes.len()),
            None => classes.len(),
        };
        if class == classes.len() {
            classes.push(ClassInfo {
                representative: g,
                first_gen: g,
                size: 1,
            });
        } else {
            let info = &mut classes[class];
            info.size += 1;
            if member.len() < family.member(info.representative).len() {
                info.representative = g;
            }
        }
        class_of_gen.push(class);
    }
    DistributionClasses {
        class_of_gen,
        classes,
    }
}
