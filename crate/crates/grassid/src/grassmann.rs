//! Truncated unitary Grassmann algebra G_n over GF(p^t): blade arithmetic,
//! the four order-2 automorphisms and their gradings, homogeneous projection,
//! and the support/weight/dominant-part statistics.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::field::{FieldError, FieldParams, FieldScalar};

/// Hard cap on the truncation; blades are stored as u128 bitmasks.
pub const MAX_TRUNCATION: u16 = 128;

/// Truncations at or below this size use a dense scratch table for products.
const DENSE_LIMIT: u16 = 14;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum GrassmannError {
    #[error("truncation {0} exceeds the supported maximum {max}", max = MAX_TRUNCATION)]
    TruncationTooLarge(u16),
    #[error("generator index {index} outside truncation 1..={n}")]
    IndexOutOfRange { index: u16, n: u16 },
    #[error("blade indices must be strictly increasing")]
    UnsortedBlade,
    #[error("elements from different truncations: {0} vs {1}")]
    MixedTruncation(u16, u16),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("enumeration would produce {would} elements, over the budget {budget}")]
    EnumerationBudget { would: u128, budget: u64 },
}

/// Support of one basis blade: a strictly increasing set of generator indices
/// in 1..=n, stored as a bitmask (bit i-1 set means e_i is present).
/// The empty support is the unit 1_G.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BladeSupport(pub u128);

impl BladeSupport {
    pub const ONE: BladeSupport = BladeSupport(0);

    pub fn from_indices(indices: &[u16], n: u16) -> Result<Self, GrassmannError> {
        let mut mask = 0u128;
        let mut last = 0u16;
        for &i in indices {
            if i == 0 || i > n {
                return Err(GrassmannError::IndexOutOfRange { index: i, n });
            }
            if i <= last {
                return Err(GrassmannError::UnsortedBlade);
            }
            last = i;
            mask |= 1u128 << (i - 1);
        }
        Ok(BladeSupport(mask))
    }

    pub fn indices(&self) -> Vec<u16> {
        let mut out = Vec::with_capacity(self.len());
        let mut m = self.0;
        while m != 0 {
            let j = m.trailing_zeros() as u16;
            out.push(j + 1);
            m &= m - 1;
        }
        out
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }
}

/// Product of two blades: `None` when the supports intersect (e_i^2 = 0),
/// otherwise the merge sign and the union support. The sign is the parity of
/// the number of index crossings when merging the two increasing sequences.
pub fn blade_mul(a: BladeSupport, b: BladeSupport) -> Option<(i8, BladeSupport)> {
    if a.0 & b.0 != 0 {
        return None;
    }
    Some((merge_sign(a.0, b.0), BladeSupport(a.0 | b.0)))
}

#[inline]
fn merge_sign(a: u128, b: u128) -> i8 {
    let mut inv = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        // generators of `a` that must cross over this factor of `b`
        inv += (a >> j >> 1).count_ones();
        bb &= bb - 1;
    }
    if inv & 1 == 0 {
        1
    } else {
        -1
    }
}

/// One of the four sign assignments on generators inducing a Z2-grading.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradingSpec {
    /// All generators negated (phi_0).
    Canonical,
    /// Odd-indexed generators negated (phi_infinity).
    Alternating,
    /// The first k generators negated, the rest fixed (phi_{k*}); k >= 0.
    FirstKStar(u16),
    /// The first k generators fixed, the rest negated (phi_k); k >= 1.
    FirstK(u16),
}

impl GradingSpec {
    /// Bitmask of negated generator indices within truncation n.
    pub fn negated_mask(&self, n: u16) -> u128 {
        let all: u128 = if n == 128 { !0 } else { (1u128 << n) - 1 };
        match *self {
            GradingSpec::Canonical => all,
            GradingSpec::Alternating => {
                // indices 1, 3, 5, ... live at bit positions 0, 2, 4, ...
                let pat = 0x5555_5555_5555_5555_5555_5555_5555_5555u128;
                pat & all
            }
            GradingSpec::FirstKStar(k) => {
                let k = k.min(n);
                if k == 0 {
                    0
                } else if k >= 128 {
                    all
                } else {
                    ((1u128 << k) - 1) & all
                }
            }
            GradingSpec::FirstK(k) => {
                let k = k.min(n);
                let low = if k == 0 {
                    0
                } else if k >= 128 {
                    all
                } else {
                    (1u128 << k) - 1
                };
                all & !low
            }
        }
    }

    /// Z2-parity of a blade under this grading.
    pub fn blade_parity(&self, blade: BladeSupport, n: u16) -> u8 {
        ((blade.0 & self.negated_mask(n)).count_ones() & 1) as u8
    }

    pub fn valid(&self) -> bool {
        !matches!(self, GradingSpec::FirstK(0))
    }
}

impl fmt::Display for GradingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradingSpec::Canonical => write!(f, "canonical"),
            GradingSpec::Alternating => write!(f, "alternating"),
            GradingSpec::FirstKStar(k) => write!(f, "kstar:{k}"),
            GradingSpec::FirstK(k) => write!(f, "k:{k}"),
        }
    }
}

/// Finitely supported F-linear combination of blades in G_n.
/// Terms are sorted by support mask and never hold zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrassmannElement {
    n: u16,
    terms: Vec<(u128, FieldScalar)>,
}

impl GrassmannElement {
    pub fn truncation(&self) -> u16 {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (BladeSupport, FieldScalar)> + '_ {
        self.terms.iter().map(|&(m, c)| (BladeSupport(m), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff_of(&self, blade: BladeSupport) -> Option<FieldScalar> {
        self.terms
            .binary_search_by_key(&blade.0, |&(m, _)| m)
            .ok()
            .map(|i| self.terms[i].1)
    }

    /// Union of all term supports.
    pub fn supp(&self) -> Vec<u16> {
        let mut m = 0u128;
        for &(mask, _) in &self.terms {
            m |= mask;
        }
        BladeSupport(m).indices()
    }

    /// Support-length: the largest blade size present (0 for the zero element).
    pub fn wt(&self) -> usize {
        self.terms
            .iter()
            .map(|&(m, _)| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Dominant part: the sum of terms of maximal support size; dom(0) = 0.
    pub fn dom(&self) -> GrassmannElement {
        let w = self.wt();
        if self.is_zero() {
            return self.clone();
        }
        GrassmannElement {
            n: self.n,
            terms: self
                .terms
                .iter()
                .copied()
                .filter(|&(m, _)| m.count_ones() as usize == w)
                .collect(),
        }
    }

    /// True when the whole element lies in the non-unitary part (no 1_G term).
    pub fn is_nonunitary(&self) -> bool {
        self.terms.first().map_or(true, |&(m, _)| m != 0)
    }
}

impl fmt::Display for GrassmannElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (mask, c)) in self.terms.iter().enumerate() {
            let (neg, mag) = c.balanced_parts();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let blade = BladeSupport(*mask);
            let coeff = format!("{mag}");
            let blade_str = if blade.is_empty() {
                "1".to_string()
            } else {
                blade
                    .indices()
                    .iter()
                    .map(|i| format!("e{i}"))
                    .collect::<String>()
            };
            if coeff == "1" && !blade.is_empty() {
                write!(f, "{blade_str}")?;
            } else if blade.is_empty() {
                write!(f, "{}", wrap_coeff(&coeff))?;
            } else {
                write!(f, "{}*{blade_str}", wrap_coeff(&coeff))?;
            }
        }
        Ok(())
    }
}

fn wrap_coeff(c: &str) -> String {
    if c.contains('+') || c.contains('-') {
        format!("({c})")
    } else {
        c.to_string()
    }
}

thread_local! {
    static DENSE_SCRATCH: RefCell<(Vec<Option<FieldScalar>>, Vec<u32>)> =
        const { RefCell::new((Vec::new(), Vec::new())) };
}

/// Algebra context: the field and the truncation. All element operations go
/// through this handle; elements of mismatched truncation are rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrassmannAlgebra {
    field: FieldParams,
    n: u16,
}

impl GrassmannAlgebra {
    pub fn new(field: FieldParams, n: u16) -> Result<Self, GrassmannError> {
        if n > MAX_TRUNCATION {
            return Err(GrassmannError::TruncationTooLarge(n));
        }
        Ok(GrassmannAlgebra { field, n })
    }

    pub fn field(&self) -> &FieldParams {
        &self.field
    }

    pub fn truncation(&self) -> u16 {
        self.n
    }

    fn check(&self, a: &GrassmannElement) -> Result<(), GrassmannError> {
        if a.n != self.n {
            return Err(GrassmannError::MixedTruncation(a.n, self.n));
        }
        Ok(())
    }

    pub fn zero(&self) -> GrassmannElement {
        GrassmannElement {
            n: self.n,
            terms: Vec::new(),
        }
    }

    pub fn one(&self) -> GrassmannElement {
        self.from_terms(vec![(BladeSupport::ONE, self.field.one())])
            .unwrap()
    }

    pub fn generator(&self, i: u16) -> Result<GrassmannElement, GrassmannError> {
        let b = BladeSupport::from_indices(&[i], self.n)?;
        self.from_terms(vec![(b, self.field.one())])
    }

    pub fn blade(&self, indices: &[u16]) -> Result<GrassmannElement, GrassmannError> {
        let b = BladeSupport::from_indices(indices, self.n)?;
        self.from_terms(vec![(b, self.field.one())])
    }

    /// Builds an element from (blade, coefficient) pairs, merging duplicates
    /// and dropping zeros.
    pub fn from_terms(
        &self,
        terms: Vec<(BladeSupport, FieldScalar)>,
    ) -> Result<GrassmannElement, GrassmannError> {
        let mut map: BTreeMap<u128, FieldScalar> = BTreeMap::new();
        for (b, c) in terms {
            if b.0 >= (1u128 << self.n) && self.n < 128 {
                return Err(GrassmannError::IndexOutOfRange {
                    index: (128 - b.0.leading_zeros()) as u16,
                    n: self.n,
                });
            }
            let e = map.entry(b.0).or_insert_with(|| self.field.zero());
            *e = self.field.add(*e, c);
        }
        Ok(GrassmannElement {
            n: self.n,
            terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    pub fn add(
        &self,
        a: &GrassmannElement,
        b: &GrassmannElement,
    ) -> Result<GrassmannElement, GrassmannError> {
        self.check(a)?;
        self.check(b)?;
        let mut out = Vec::with_capacity(a.terms.len() + b.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < a.terms.len() && j < b.terms.len() {
            match a.terms[i].0.cmp(&b.terms[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a.terms[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b.terms[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = self.field.add(a.terms[i].1, b.terms[j].1);
                    if !c.is_zero() {
                        out.push((a.terms[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a.terms[i..]);
        out.extend_from_slice(&b.terms[j..]);
        Ok(GrassmannElement { n: self.n, terms: out })
    }

    pub fn sub(
        &self,
        a: &GrassmannElement,
        b: &GrassmannElement,
    ) -> Result<GrassmannElement, GrassmannError> {
        let nb = self.scale(self.field.neg(self.field.one()), b)?;
        self.add(a, &nb)
    }

    pub fn scale(
        &self,
        c: FieldScalar,
        a: &GrassmannElement,
    ) -> Result<GrassmannElement, GrassmannError> {
        self.check(a)?;
        if c.is_zero() {
            return Ok(self.zero());
        }
        Ok(GrassmannElement {
            n: self.n,
            terms: a
                .terms
                .iter()
                .map(|&(m, x)| (m, self.field.mul(c, x)))
                .filter(|(_, x)| !x.is_zero())
                .collect(),
        })
    }

    /// Bilinear product. Uses a dense scratch table for small truncations and
    /// a tree map beyond that.
    pub fn mul(
        &self,
        a: &GrassmannElement,
        b: &GrassmannElement,
    ) -> Result<GrassmannElement, GrassmannError> {
        self.check(a)?;
        self.check(b)?;
        if a.terms.is_empty() || b.terms.is_empty() {
            return Ok(self.zero());
        }
        if self.n <= DENSE_LIMIT {
            return Ok(self.mul_dense(a, b));
        }
        let mut map: BTreeMap<u128, FieldScalar> = BTreeMap::new();
        for &(ma, ca) in &a.terms {
            for &(mb, cb) in &b.terms {
                if ma & mb != 0 {
                    continue;
                }
                let s = merge_sign(ma, mb);
                let mut c = self.field.mul(ca, cb);
                if s < 0 {
                    c = self.field.neg(c);
                }
                let e = map.entry(ma | mb).or_insert_with(|| self.field.zero());
                *e = self.field.add(*e, c);
            }
        }
        Ok(GrassmannElement {
            n: self.n,
            terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    fn mul_dense(&self, a: &GrassmannElement, b: &GrassmannElement) -> GrassmannElement {
        DENSE_SCRATCH.with(|cell| {
            let (ref mut table, ref mut touched) = *cell.borrow_mut();
            let size = 1usize << self.n;
            if table.len() < size {
                table.resize(size, None);
            }
            for &(ma, ca) in &a.terms {
                for &(mb, cb) in &b.terms {
                    if ma & mb != 0 {
                        continue;
                    }
                    let s = merge_sign(ma, mb);
                    let mut c = self.field.mul(ca, cb);
                    if s < 0 {
                        c = self.field.neg(c);
                    }
                    let idx = (ma | mb) as usize;
                    match table[idx] {
                        Some(prev) => table[idx] = Some(self.field.add(prev, c)),
                        None => {
                            table[idx] = Some(c);
                            touched.push(idx as u32);
                        }
                    }
                }
            }
            touched.sort_unstable();
            let mut terms = Vec::with_capacity(touched.len());
            for &idx in touched.iter() {
                if let Some(c) = table[idx as usize].take() {
                    if !c.is_zero() {
                        terms.push((idx as u128, c));
                    }
                }
            }
            touched.clear();
            GrassmannElement { n: self.n, terms }
        })
    }

    pub fn pow(&self, a: &GrassmannElement, e: u64) -> Result<GrassmannElement, GrassmannError> {
        self.check(a)?;
        let mut acc = self.one();
        let mut base = a.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base)?;
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base)?;
            }
        }
        Ok(acc)
    }

    /// Applies the grading automorphism blade-wise: each blade picks up -1 for
    /// every negated generator in its support.
    pub fn apply_automorphism(
        &self,
        spec: GradingSpec,
        a: &GrassmannElement,
    ) -> Result<GrassmannElement, GrassmannError> {
        self.check(a)?;
        let neg = spec.negated_mask(self.n);
        Ok(GrassmannElement {
            n: self.n,
            terms: a
                .terms
                .iter()
                .map(|&(m, c)| {
                    if (m & neg).count_ones() & 1 == 1 {
                        (m, self.field.neg(c))
                    } else {
                        (m, c)
                    }
                })
                .collect(),
        })
    }

    /// Homogeneous component 2^(-1) (g + (-1)^parity phi(g)).
    pub fn homogeneous_component(
        &self,
        spec: GradingSpec,
        a: &GrassmannElement,
        parity: u8,
    ) -> Result<GrassmannElement, GrassmannError> {
        self.check(a)?;
        let neg = spec.negated_mask(self.n);
        let terms = a
            .terms
            .iter()
            .copied()
            .filter(|&(m, _)| ((m & neg).count_ones() & 1) as u8 == parity)
            .collect();
        Ok(GrassmannElement { n: self.n, terms })
    }

    /// Checks that an element is homogeneous of the given parity (the zero
    /// element counts as homogeneous of any parity).
    pub fn is_homogeneous(&self, spec: GradingSpec, a: &GrassmannElement, parity: u8) -> bool {
        let neg = spec.negated_mask(self.n);
        a.terms
            .iter()
            .all(|&(m, _)| ((m & neg).count_ones() & 1) as u8 == parity)
    }

    /// All blades of the given parity with support size <= max_wt, in
    /// ascending mask order.
    pub fn homogeneous_blades(
        &self,
        spec: GradingSpec,
        parity: u8,
        max_wt: usize,
    ) -> Vec<BladeSupport> {
        let neg = spec.negated_mask(self.n);
        let mut out = Vec::new();
        collect_blades(self.n, max_wt, |mask| {
            if ((mask & neg).count_ones() & 1) as u8 == parity {
                out.push(BladeSupport(mask));
            }
        });
        out.sort();
        out
    }

    /// Every F-linear combination of parity-homogeneous blades of support
    /// size <= max_wt, in a deterministic odometer order starting at 0.
    pub fn enumerate_homogeneous(
        &self,
        spec: GradingSpec,
        parity: u8,
        max_wt: usize,
        budget: u64,
    ) -> Result<Vec<GrassmannElement>, GrassmannError> {
        let blades = self.homogeneous_blades(spec, parity, max_wt);
        let q = self.field.q() as u128;
        let mut count: u128 = 1;
        for _ in 0..blades.len() {
            count = count.saturating_mul(q);
            if count > budget as u128 {
                return Err(GrassmannError::EnumerationBudget {
                    would: count,
                    budget,
                });
            }
        }
        let scalars: Vec<FieldScalar> = self.field.enumerate().collect();
        let mut out = Vec::with_capacity(count as usize);
        let mut digits = vec![0usize; blades.len()];
        loop {
            let terms: Vec<_> = digits
                .iter()
                .zip(&blades)
                .filter(|&(&d, _)| d != 0)
                .map(|(&d, &b)| (b, scalars[d]))
                .collect();
            out.push(self.from_terms(terms)?);
            // odometer increment
            let mut i = 0;
            loop {
                if i == digits.len() {
                    return Ok(out);
                }
                digits[i] += 1;
                if digits[i] < scalars.len() {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
        }
    }
}

fn collect_blades(n: u16, max_wt: usize, mut f: impl FnMut(u128)) {
    // Depth-first enumeration of subsets of {1..n} with size <= max_wt.
    fn rec(n: u16, start: u16, left: usize, acc: u128, f: &mut impl FnMut(u128)) {
        f(acc);
        if left == 0 {
            return;
        }
        for i in start..n {
            rec(n, i + 1, left - 1, acc | (1u128 << i), f);
        }
    }
    rec(n, 0, max_wt.min(n as usize), 0, &mut f);
}
