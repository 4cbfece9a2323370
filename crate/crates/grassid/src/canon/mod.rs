//! Normal forms modulo the four identity bases: SS-shaped terms, the SS total
//! order, leading/bad-term analysis, generator families, and the reduction
//! engines. Each ideal variant sits behind the [`strategy::IdealStrategy`]
//! trait and is selected by name at runtime.

mod engine;
mod gen;
mod strategy;

pub use engine::{reduce, reduce_traced, replay_trace, straighten_psi, Trace, TraceStep};
pub use gen::{gen_ft, gen_gm, gen_ideal_basis, gen_rt, gm_term_count, LabeledPoly};
pub use strategy::{make_strategy, strategy_for, strategy_names, IdealStrategy};

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::field::{FieldParams, FieldScalar};
use crate::freealg::{FreeAlgError, FreePolynomial, Var, Word};
use crate::grassmann::GradingSpec;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum CanonError {
    #[error("beg part must list y-variables then z-variables with strictly increasing indices")]
    MalformedBeg,
    #[error("beg exponent {exp} outside 1..={max}", max = p - 1)]
    BegExponent { exp: u32, p: u32 },
    #[error("psi must be a strictly increasing even-length letter sequence")]
    MalformedPsi,
    #[error("p-polynomial exponent {exp} must be a positive multiple of {p} below {pq}")]
    PExponent { exp: u32, p: u32, pq: u32 },
    #[error("p-polynomials only involve even variables")]
    POddVariable,
    #[error("grading parameter k must be >= 1 for this ideal")]
    BadK,
    #[error("unknown ideal `{0}`; expected I1, I2, I3 or I4")]
    UnknownIdeal(String),
    #[error("empty canonical form has no leading term")]
    EmptyForm,
    #[error("partition of 1..={m} is not strictly increasing / even-odd sized as required")]
    BadPartition { m: u32 },
    #[error(transparent)]
    Algebra(#[from] FreeAlgError),
    #[error("term is not SS-shaped: {0}")]
    NotSs(String),
}

/// Which identity basis a reduction works modulo.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdealKind {
    I1,
    I2,
    I3 { k: u32 },
    I4 { k: u32 },
}

impl fmt::Display for IdealKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdealKind::I1 => write!(f, "I1"),
            IdealKind::I2 => write!(f, "I2"),
            IdealKind::I3 { k } => write!(f, "I3(k={k})"),
            IdealKind::I4 { k } => write!(f, "I4(k={k})"),
        }
    }
}

/// An ideal variant plus the field it works over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealSpec {
    pub kind: IdealKind,
    pub field: FieldParams,
}

impl IdealSpec {
    pub fn new(kind: IdealKind, field: FieldParams) -> Result<Self, CanonError> {
        if let IdealKind::I4 { k: 0 } = kind {
            return Err(CanonError::BadK);
        }
        Ok(IdealSpec { kind, field })
    }

    /// The grading whose identity set this basis describes.
    pub fn matching_grading(&self) -> GradingSpec {
        match self.kind {
            IdealKind::I1 => GradingSpec::Canonical,
            IdealKind::I2 => GradingSpec::Alternating,
            IdealKind::I3 { k } => GradingSpec::FirstKStar(k as u16),
            IdealKind::I4 { k } => GradingSpec::FirstK(k as u16),
        }
    }

    pub fn k(&self) -> Option<u32> {
        match self.kind {
            IdealKind::I3 { k } | IdealKind::I4 { k } => Some(k),
            _ => None,
        }
    }
}

/// An SS-shaped normal-form term: a power product `beg` (y-variables before
/// z-variables, ascending, exponents in 1..p-1) followed by a multilinear
/// product of two-letter brackets `psi`, stored straightened: the flat letter
/// sequence is strictly increasing and brackets pair consecutive letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrTerm {
    beg: Vec<(Var, u32)>,
    psi: Vec<Var>,
}

impl PrTerm {
    pub fn new(beg: Vec<(Var, u32)>, psi: Vec<Var>, field: &FieldParams) -> Result<Self, CanonError> {
        let p = field.p();
        for w in beg.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(CanonError::MalformedBeg);
            }
        }
        for &(_, e) in &beg {
            if e == 0 || e > p - 1 {
                return Err(CanonError::BegExponent { exp: e, p });
            }
        }
        if psi.len() % 2 != 0 {
            return Err(CanonError::MalformedPsi);
        }
        for w in psi.windows(2) {
            if w[0] >= w[1] {
                return Err(CanonError::MalformedPsi);
            }
        }
        Ok(PrTerm { beg, psi })
    }

    pub fn one() -> Self {
        PrTerm {
            beg: Vec::new(),
            psi: Vec::new(),
        }
    }

    pub fn is_one(&self) -> bool {
        self.beg.is_empty() && self.psi.is_empty()
    }

    pub fn beg(&self) -> &[(Var, u32)] {
        &self.beg
    }

    pub fn psi(&self) -> &[Var] {
        &self.psi
    }

    pub fn psi_brackets(&self) -> impl Iterator<Item = (Var, Var)> + '_ {
        self.psi.chunks(2).map(|c| (c[0], c[1]))
    }

    /// Flattened beg word (letters with multiplicity).
    pub fn beg_word(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for &(v, e) in &self.beg {
            for _ in 0..e {
                out.push(v);
            }
        }
        out
    }

    /// The whole term as a free polynomial (beg word times expanded brackets).
    pub fn to_free_polynomial(&self, field: &FieldParams) -> FreePolynomial {
        let mut acc = FreePolynomial::monomial(field.clone(), Word(self.beg_word()), field.one());
        for (a, b) in self.psi_brackets() {
            let bracket = crate::freealg::commutator(&[
                FreePolynomial::variable(field.clone(), a),
                FreePolynomial::variable(field.clone(), b),
            ])
            .expect("two arguments");
            acc = acc.mul(&bracket).expect("same field");
        }
        acc
    }
}

impl fmt::Display for PrTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        for &(v, e) in &self.beg {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        if !self.psi.is_empty() {
            if !first {
                write!(f, "*")?;
            }
            for (a, b) in self.psi_brackets() {
                write!(f, "[{a},{b}]")?;
            }
        }
        Ok(())
    }
}

/// Per-term degree statistics from the normal-form bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermStats {
    /// Occurrences of each variable across beg and psi.
    pub deg_per_var: BTreeMap<Var, u32>,
    pub deg_y: u32,
    pub deg_z: u32,
    pub deg: u32,
    /// Variables present anywhere in the term.
    pub vars: BTreeSet<Var>,
    /// Even variables appearing in beg but not in psi.
    pub yym: BTreeSet<Var>,
    /// Lowest-index odd variable with positive exponent in beg, if any.
    pub pr_z: Option<Var>,
    pub deg_z_beg: u32,
    pub deg_y_psi: u32,
    pub deg_z_psi: u32,
}

pub fn term_stats(u: &PrTerm) -> TermStats {
    let mut deg_per_var: BTreeMap<Var, u32> = BTreeMap::new();
    let mut deg_z_beg = 0;
    for &(v, e) in u.beg() {
        *deg_per_var.entry(v).or_insert(0) += e;
        if !v.is_even() {
            deg_z_beg += e;
        }
    }
    let mut deg_y_psi = 0;
    let mut deg_z_psi = 0;
    for &v in u.psi() {
        *deg_per_var.entry(v).or_insert(0) += 1;
        if v.is_even() {
            deg_y_psi += 1;
        } else {
            deg_z_psi += 1;
        }
    }
    let deg_y: u32 = deg_per_var
        .iter()
        .filter(|(v, _)| v.is_even())
        .map(|(_, e)| *e)
        .sum();
    let deg_z: u32 = deg_per_var
        .iter()
        .filter(|(v, _)| !v.is_even())
        .map(|(_, e)| *e)
        .sum();
    let psi_vars: BTreeSet<Var> = u.psi().iter().copied().collect();
    let yym = u
        .beg()
        .iter()
        .map(|&(v, _)| v)
        .filter(|v| v.is_even() && !psi_vars.contains(v))
        .collect();
    let pr_z = u.beg().iter().map(|&(v, _)| v).find(|v| !v.is_even());
    TermStats {
        vars: deg_per_var.keys().copied().collect(),
        deg: deg_y + deg_z,
        deg_y,
        deg_z,
        deg_per_var,
        yym,
        pr_z,
        deg_z_beg,
        deg_y_psi,
        deg_z_psi,
    }
}

/// Right-lexicographic word comparison; the shorter word pads as smaller.
fn right_lex(a: &[Var], b: &[Var]) -> Ordering {
    let mut i = a.len();
    let mut j = b.len();
    loop {
        if i == 0 && j == 0 {
            return Ordering::Equal;
        }
        if i == 0 {
            return Ordering::Less;
        }
        if j == 0 {
            return Ordering::Greater;
        }
        i -= 1;
        j -= 1;
        match a[i].cmp(&b[j]) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
}

/// The SS total order: total degree, then right-lex on the flattened beg,
/// then right-lex on the psi letters.
pub fn ss_compare(u: &PrTerm, v: &PrTerm) -> Ordering {
    let du: u32 = u.beg().iter().map(|&(_, e)| e).sum::<u32>() + u.psi().len() as u32;
    let dv: u32 = v.beg().iter().map(|&(_, e)| e).sum::<u32>() + v.psi().len() as u32;
    du.cmp(&dv)
        .then_with(|| right_lex(&u.beg_word(), &v.beg_word()))
        .then_with(|| right_lex(u.psi(), v.psi()))
}

/// Membership flags for the nested normal-form families. The k-parameterised
/// flags are only meaningful for I3/I4 specs and are None otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SsFlags {
    pub ss: bool,
    pub ss0: bool,
    pub ss1: Option<bool>,
    pub ss2: Option<bool>,
    pub ss3: Option<bool>,
}

pub fn ss_class(u: &PrTerm, spec: &IdealSpec) -> SsFlags {
    let p = spec.field.p();
    let st = term_stats(u);
    let exps_ok = u.beg().iter().all(|&(_, e)| e >= 1 && e <= p - 1);
    let psi_multilinear = u.psi().windows(2).all(|w| w[0] < w[1]) && u.psi().len() % 2 == 0;
    let ss = exps_ok && psi_multilinear;
    let ss0 = ss
        && u.psi().is_empty()
        && u
            .beg()
            .iter()
            .all(|&(v, e)| v.is_even() || e <= 1);
    let (ss1, ss2, ss3) = match spec.kind {
        IdealKind::I3 { k } | IdealKind::I4 { k } => {
            let ss1 = ss && st.deg_z <= k + 1;
            let ss2 = ss && st.deg_y_psi <= k && st.deg_z_beg + st.deg_y_psi <= k + 1;
            let boundary = st.deg_z_beg + st.deg_y_psi == k + 1;
            let prz_in_psi = st
                .pr_z
                .map(|z| u.psi().contains(&z))
                .unwrap_or(false);
            let ss3 = ss2 && (!boundary || !prz_in_psi);
            (Some(ss1), Some(ss2), Some(ss3))
        }
        _ => (None, None, None),
    };
    SsFlags { ss, ss0, ss1, ss2, ss3 }
}

/// The class the reduction for this ideal promises to land in.
pub fn conforms(u: &PrTerm, spec: &IdealSpec) -> bool {
    let flags = ss_class(u, spec);
    match spec.kind {
        IdealKind::I1 => flags.ss0,
        IdealKind::I2 => flags.ss,
        IdealKind::I3 { k } => flags.ss && term_stats(u).deg_z <= k,
        IdealKind::I4 { .. } => flags.ss3.unwrap_or(false),
    }
}

/// A bracket-free polynomial in even variables whose variable degrees are
/// positive multiples of p below pq; the constant 1 is the trivial one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PMono(pub Vec<(u32, u32)>);

impl PMono {
    pub fn one() -> Self {
        PMono(Vec::new())
    }

    pub fn word(&self) -> Word {
        let mut letters = Vec::new();
        for &(i, e) in &self.0 {
            for _ in 0..e {
                letters.push(Var::Y(i));
            }
        }
        Word(letters)
    }
}

impl fmt::Display for PMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, &(idx, e)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "y{idx}^{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PPolynomial {
    field: FieldParams,
    terms: BTreeMap<PMono, FieldScalar>,
}

impl PPolynomial {
    pub fn zero(field: FieldParams) -> Self {
        PPolynomial {
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(field: FieldParams) -> Self {
        let c = field.one();
        let mut s = Self::zero(field);
        s.terms.insert(PMono::one(), c);
        s
    }

    pub fn constant(field: FieldParams, c: FieldScalar) -> Self {
        let mut s = Self::zero(field);
        if !c.is_zero() {
            s.terms.insert(PMono::one(), c);
        }
        s
    }

    /// Validates a monomial's exponents: positive multiples of p, sorted
    /// indices. Reductions only ever emit exponents below pq; larger ones are
    /// accepted here so scalar-function experiments like y^(pq) - y^p can be
    /// expressed directly.
    pub fn monomial(
        field: FieldParams,
        mono: PMono,
        c: FieldScalar,
    ) -> Result<Self, CanonError> {
        let p = field.p();
        let pq = p as u64 * field.q();
        for w in mono.0.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(CanonError::MalformedBeg);
            }
        }
        for &(_, e) in &mono.0 {
            if e == 0 || e % p != 0 || (e as u64) > pq {
                return Err(CanonError::PExponent {
                    exp: e,
                    p,
                    pq: pq as u32,
                });
            }
        }
        let mut s = Self::zero(field);
        if !c.is_zero() {
            s.terms.insert(mono, c);
        }
        Ok(s)
    }

    /// The strict p-polynomial bound: every exponent below pq. Reduction
    /// outputs always satisfy this.
    pub fn is_strict(&self) -> bool {
        let bound = self.field.p() as u64 * self.field.q();
        self.terms
            .keys()
            .all(|m| m.0.iter().all(|&(_, e)| (e as u64) < bound))
    }

    pub fn field(&self) -> &FieldParams {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&PMono::one())
                .map(|c| self.field.is_one(c))
                .unwrap_or(false)
    }

    /// True when the polynomial is a single constant c * 1.
    pub fn as_constant(&self) -> Option<FieldScalar> {
        if self.terms.is_empty() {
            return Some(self.field.zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&PMono::one()) {
                return Some(*c);
            }
        }
        None
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PMono, &FieldScalar)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, mono: PMono, c: FieldScalar) {
        let e = self
            .terms
            .entry(mono.clone())
            .or_insert_with(|| self.field.zero());
        *e = self.field.add(*e, c);
        if e.is_zero() {
            self.terms.remove(&mono);
        }
    }

    pub fn add(&self, other: &PPolynomial) -> PPolynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }

    pub fn scale(&self, c: FieldScalar) -> PPolynomial {
        let mut out = Self::zero(self.field.clone());
        for (m, x) in &self.terms {
            let v = self.field.mul(c, *x);
            if !v.is_zero() {
                out.terms.insert(m.clone(), v);
            }
        }
        out
    }

    pub fn variables(&self) -> BTreeSet<u32> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|&(i, _)| i))
            .collect()
    }

    /// Evaluates at a scalar point, variable index -> value.
    pub fn eval_scalars(&self, point: &BTreeMap<u32, FieldScalar>) -> FieldScalar {
        let mut acc = self.field.zero();
        for (m, c) in &self.terms {
            let mut t = *c;
            for &(i, e) in &m.0 {
                let x = point.get(&i).copied().unwrap_or_else(|| self.field.zero());
                t = self.field.mul(t, self.field.pow(x, e as u64));
            }
            acc = self.field.add(acc, t);
        }
        acc
    }

    pub fn to_free_polynomial(&self) -> FreePolynomial {
        let mut out = FreePolynomial::zero(self.field.clone());
        for (m, c) in &self.terms {
            out = out
                .add(&FreePolynomial::monomial(self.field.clone(), m.word(), *c))
                .expect("same field");
        }
        out
    }
}

impl fmt::Display for PPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
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
            let mag_str = format!("{mag}");
            if m.0.is_empty() {
                write!(f, "{mag_str}")?;
            } else if mag_str == "1" {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag_str}*{m}")?;
            }
        }
        Ok(())
    }
}

/// A reduction result: pairwise-distinct SS terms with nonzero p-polynomial
/// coefficients, listed in ascending SS order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub ideal: IdealSpec,
    pairs: Vec<(PPolynomial, PrTerm)>,
}

impl CanonicalForm {
    pub fn new(ideal: IdealSpec, mut pairs: Vec<(PPolynomial, PrTerm)>) -> Self {
        pairs.retain(|(f, _)| !f.is_zero());
        pairs.sort_by(|a, b| ss_compare(&a.1, &b.1));
        CanonicalForm { ideal, pairs }
    }

    pub fn zero(ideal: IdealSpec) -> Self {
        CanonicalForm {
            ideal,
            pairs: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(PPolynomial, PrTerm)] {
        &self.pairs
    }

    pub fn terms(&self) -> impl Iterator<Item = &PrTerm> {
        self.pairs.iter().map(|(_, u)| u)
    }

    /// SS-maximal term.
    pub fn leading_term(&self) -> Result<&PrTerm, CanonError> {
        self.pairs
            .last()
            .map(|(_, u)| u)
            .ok_or(CanonError::EmptyForm)
    }

    /// Terms matching the leading term per the bad-term bookkeeping: same
    /// total multidegree, same beg z-degrees away from pr_z, one less at
    /// pr_z, and beg y-degrees at least the leading term's.
    pub fn bad_terms(&self) -> Result<Vec<&PrTerm>, CanonError> {
        let lt = self.leading_term()?;
        let lt_stats = term_stats(lt);
        let lt_beg: BTreeMap<Var, u32> = lt.beg().iter().copied().collect();
        let mut out = Vec::new();
        for (_, u) in &self.pairs {
            if u == lt {
                continue;
            }
            let st = term_stats(u);
            if st.deg_per_var != lt_stats.deg_per_var {
                continue;
            }
            let u_beg: BTreeMap<Var, u32> = u.beg().iter().copied().collect();
            if lt_stats.deg_z_beg > 0 {
                let prz = lt_stats.pr_z.expect("deg_z_beg > 0");
                let zs: BTreeSet<Var> = lt_beg
                    .keys()
                    .chain(u_beg.keys())
                    .copied()
                    .filter(|v| !v.is_even())
                    .collect();
                let mut ok = true;
                for z in zs {
                    let in_lt = lt_beg.get(&z).copied().unwrap_or(0);
                    let in_u = u_beg.get(&z).copied().unwrap_or(0);
                    if z == prz {
                        if in_u + 1 != in_lt {
                            ok = false;
                            break;
                        }
                    } else if in_lt != in_u {
                        ok = false;
                        break;
                    }
                }
                if !ok {
                    continue;
                }
            }
            let ys_ok = lt_beg
                .iter()
                .filter(|(v, _)| v.is_even())
                .all(|(v, &e)| u_beg.get(v).copied().unwrap_or(0) >= e);
            if !ys_ok {
                continue;
            }
            out.push(u);
        }
        Ok(out)
    }

    /// The distinguished bad term: the SS-maximal one, when any exists.
    pub fn lbt(&self) -> Result<Option<&PrTerm>, CanonError> {
        let bad = self.bad_terms()?;
        Ok(bad.into_iter().max_by(|a, b| ss_compare(a, b)))
    }

    /// Expands the whole form back into the free algebra.
    pub fn to_free_polynomial(&self) -> FreePolynomial {
        let field = &self.ideal.field;
        let mut out = FreePolynomial::zero(field.clone());
        for (fp, u) in &self.pairs {
            let lhs = fp.to_free_polynomial();
            let rhs = u.to_free_polynomial(field);
            out = out.add(&lhs.mul(&rhs).expect("same field")).expect("same field");
        }
        out
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pairs.is_empty() {
            return write!(f, "0");
        }
        // Pairs are held in ascending SS order; print leading term first.
        for (i, (fp, u)) in self.pairs.iter().rev().enumerate() {
            // Fold a plain constant into the sign/joiner; parenthesise real
            // p-polynomials.
            let (joiner_neg, coeff_part) = match fp.as_constant() {
                Some(c) => {
                    let (neg, mag) = c.balanced_parts();
                    let s = format!("{mag}");
                    if s == "1" {
                        (neg, None)
                    } else {
                        (neg, Some(crate::parse::wrap(&s)))
                    }
                }
                None => (false, Some(format!("({fp})"))),
            };
            if i == 0 {
                if joiner_neg {
                    write!(f, "-")?;
                }
            } else if joiner_neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match (coeff_part, u.is_one()) {
                (None, _) => write!(f, "{u}")?,
                (Some(cp), true) => write!(f, "{cp} * 1")?,
                (Some(cp), false) => write!(f, "{cp} * {u}")?,
            }
        }
        Ok(())
    }
}
