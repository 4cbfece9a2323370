//! The free Z2-graded associative algebra F<X> on even variables y_i and odd
//! variables z_j: words, polynomials, left-normed commutator expansion,
//! graded substitution, and evaluation into a graded Grassmann algebra.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::field::{FieldError, FieldParams, FieldScalar};
use crate::grassmann::{GradingSpec, GrassmannAlgebra, GrassmannElement, GrassmannError};

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum FreeAlgError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
    #[error("commutator needs at least two arguments, got {0}")]
    CommutatorArity(usize),
    #[error("image of {var} has parity {found}, expected {expected}")]
    ParityViolation { var: Var, found: u8, expected: u8 },
    #[error("no image assigned for {0}")]
    MissingAssignment(Var),
    #[error("polynomials over different fields")]
    MixedFields,
    #[error("variable index must be >= 1")]
    ZeroIndex,
}

/// A graded variable: y_i (even) or z_i (odd), with index >= 1.
///
/// The derived order is y_1 < y_2 < ... < z_1 < z_2 < ..., the variable order
/// used throughout the normal-form machinery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Y(u32),
    Z(u32),
}

impl Var {
    pub fn parity(&self) -> u8 {
        match self {
            Var::Y(_) => 0,
            Var::Z(_) => 1,
        }
    }

    pub fn index(&self) -> u32 {
        match self {
            Var::Y(i) | Var::Z(i) => *i,
        }
    }

    pub fn is_even(&self) -> bool {
        matches!(self, Var::Y(_))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Y(i) => write!(f, "y{i}"),
            Var::Z(i) => write!(f, "z{i}"),
        }
    }
}

/// A word in the free algebra; the empty word is the unit.
///
/// Words order by length first, then letter-by-letter from the left. This is
/// the internal map-key order, distinct from the SS order on normal forms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<Var>);

impl Word {
    pub fn one() -> Self {
        Word(Vec::new())
    }

    pub fn letter(v: Var) -> Self {
        Word(vec![v])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Z2-degree: the number of odd letters mod 2.
    pub fn parity(&self) -> u8 {
        (self.0.iter().filter(|v| !v.is_even()).count() & 1) as u8
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Finitely supported linear combination of words over GF(p^t).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreePolynomial {
    field: FieldParams,
    terms: BTreeMap<Word, FieldScalar>,
}

impl FreePolynomial {
    pub fn zero(field: FieldParams) -> Self {
        FreePolynomial {
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(field: FieldParams) -> Self {
        let mut p = Self::zero(field);
        let c = p.field.one();
        p.terms.insert(Word::one(), c);
        p
    }

    pub fn variable(field: FieldParams, v: Var) -> Self {
        let mut p = Self::zero(field);
        let c = p.field.one();
        p.terms.insert(Word::letter(v), c);
        p
    }

    pub fn monomial(field: FieldParams, w: Word, c: FieldScalar) -> Self {
        let mut p = Self::zero(field);
        if !c.is_zero() {
            p.terms.insert(w, c);
        }
        p
    }

    pub fn field(&self) -> &FieldParams {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &FieldScalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff_of(&self, w: &Word) -> Option<&FieldScalar> {
        self.terms.get(w)
    }

    /// All variables appearing in some term.
    pub fn variables(&self) -> BTreeSet<Var> {
        self.terms
            .keys()
            .flat_map(|w| w.0.iter().copied())
            .collect()
    }

    fn check_field(&self, other: &FreePolynomial) -> Result<(), FreeAlgError> {
        if self.field != other.field {
            return Err(FreeAlgError::MixedFields);
        }
        Ok(())
    }

    pub fn add(&self, other: &FreePolynomial) -> Result<FreePolynomial, FreeAlgError> {
        self.check_field(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            let e = out
                .terms
                .entry(w.clone())
                .or_insert_with(|| out.field.zero());
            *e = out.field.add(*e, *c);
            if e.is_zero() {
                out.terms.remove(w);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &FreePolynomial) -> Result<FreePolynomial, FreeAlgError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> FreePolynomial {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = self.field.neg(*c);
        }
        out
    }

    pub fn scale(&self, c: FieldScalar) -> FreePolynomial {
        if c.is_zero() {
            return FreePolynomial::zero(self.field.clone());
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = self.field.mul(c, *v);
        }
        out
    }

    pub fn mul(&self, other: &FreePolynomial) -> Result<FreePolynomial, FreeAlgError> {
        self.check_field(other)?;
        let mut out = FreePolynomial::zero(self.field.clone());
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                let w = wa.concat(wb);
                let c = self.field.mul(*ca, *cb);
                let e = out
                    .terms
                    .entry(w)
                    .or_insert_with(|| self.field.zero());
                *e = self.field.add(*e, c);
            }
        }
        out.terms.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<FreePolynomial, FreeAlgError> {
        let mut acc = FreePolynomial::one(self.field.clone());
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// True when every variable of the polynomial occurs in every term.
    pub fn is_essential(&self) -> bool {
        let vars = self.variables();
        self.terms.keys().all(|w| {
            let in_word: BTreeSet<Var> = w.0.iter().copied().collect();
            vars.iter().all(|v| in_word.contains(v))
        })
    }
}

impl fmt::Display for FreePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::parse::format_free_polynomial(self, f)
    }
}

/// Left-normed commutator [f1, ..., fn] = [[f1, ..., f(n-1)], fn].
pub fn commutator(args: &[FreePolynomial]) -> Result<FreePolynomial, FreeAlgError> {
    if args.len() < 2 {
        return Err(FreeAlgError::CommutatorArity(args.len()));
    }
    let mut acc = args[0].clone();
    for b in &args[1..] {
        let ab = acc.mul(b)?;
        let ba = b.mul(&acc)?;
        acc = ab.sub(&ba)?;
    }
    Ok(acc)
}

/// Substitution endomorphism data: variable -> polynomial, parity preserving.
/// Unassigned variables map to themselves.
#[derive(Debug, Clone)]
pub struct PolyAssignment {
    map: BTreeMap<Var, FreePolynomial>,
}

impl PolyAssignment {
    pub fn new() -> Self {
        PolyAssignment {
            map: BTreeMap::new(),
        }
    }

    pub fn assign(&mut self, v: Var, image: FreePolynomial) -> Result<(), FreeAlgError> {
        for (w, _) in image.terms() {
            if w.parity() != v.parity() {
                return Err(FreeAlgError::ParityViolation {
                    var: v,
                    found: w.parity(),
                    expected: v.parity(),
                });
            }
        }
        self.map.insert(v, image);
        Ok(())
    }

    pub fn get(&self, v: Var) -> Option<&FreePolynomial> {
        self.map.get(&v)
    }
}

impl Default for PolyAssignment {
    fn default() -> Self {
        Self::new()
    }
}

/// Applies a graded endomorphism; variables without an image are fixed.
pub fn substitute(
    f: &FreePolynomial,
    a: &PolyAssignment,
) -> Result<FreePolynomial, FreeAlgError> {
    let field = f.field().clone();
    let mut out = FreePolynomial::zero(field.clone());
    for (w, c) in f.terms() {
        let mut acc = FreePolynomial::monomial(field.clone(), Word::one(), *c);
        for &v in &w.0 {
            match a.get(v) {
                Some(img) => acc = acc.mul(img)?,
                None => acc = acc.mul(&FreePolynomial::variable(field.clone(), v))?,
            }
        }
        out = out.add(&acc)?;
    }
    Ok(out)
}

/// Evaluation data: variable -> homogeneous Grassmann element of matching
/// parity in a fixed grading.
#[derive(Debug, Clone)]
pub struct ElementAssignment {
    grading: GradingSpec,
    map: BTreeMap<Var, GrassmannElement>,
}

impl ElementAssignment {
    pub fn new(grading: GradingSpec) -> Self {
        ElementAssignment {
            grading,
            map: BTreeMap::new(),
        }
    }

    pub fn grading(&self) -> GradingSpec {
        self.grading
    }

    pub fn assign(
        &mut self,
        v: Var,
        image: GrassmannElement,
        algebra: &GrassmannAlgebra,
    ) -> Result<(), FreeAlgError> {
        if !algebra.is_homogeneous(self.grading, &image, v.parity()) {
            return Err(FreeAlgError::ParityViolation {
                var: v,
                found: 1 - v.parity(),
                expected: v.parity(),
            });
        }
        self.map.insert(v, image);
        Ok(())
    }

    pub fn get(&self, v: Var) -> Option<&GrassmannElement> {
        self.map.get(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &GrassmannElement)> {
        self.map.iter()
    }
}

/// Homomorphic evaluation of f under a total assignment.
pub fn evaluate(
    f: &FreePolynomial,
    a: &ElementAssignment,
    algebra: &GrassmannAlgebra,
) -> Result<GrassmannElement, FreeAlgError> {
    let mut out = algebra.zero();
    for (w, c) in f.terms() {
        let mut acc = algebra.one();
        for &v in &w.0 {
            let img = a.get(v).ok_or(FreeAlgError::MissingAssignment(v))?;
            acc = algebra.mul(&acc, img)?;
            if acc.is_zero() {
                break;
            }
        }
        out = algebra.add(&out, &algebra.scale(*c, &acc)?)?;
    }
    Ok(out)
}
