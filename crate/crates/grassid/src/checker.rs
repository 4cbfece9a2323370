//! Identity verification and witness construction: exhaustive and randomized
//! substitution checking, scalar witness search for p-polynomials, and the
//! dominant-part witness substitutions that certify non-membership.

use std::collections::BTreeMap;
use std::fmt;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::canon::{ss_class, term_stats, PPolynomial, PrTerm};
use crate::field::{FieldParams, FieldScalar};
use crate::freealg::{evaluate, ElementAssignment, FreeAlgError, FreePolynomial, Var};
use crate::grassmann::{GradingSpec, GrassmannAlgebra, GrassmannElement, GrassmannError};

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum CheckerError {
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
    #[error(transparent)]
    Algebra(#[from] FreeAlgError),
    #[error("scalar witness search supports at most {max} variables, got {got}")]
    ArityBudget { max: usize, got: usize },
    #[error("term does not lie in the class required by this witness case: {0}")]
    ClassMismatch(String),
    #[error("witness construction needs truncation {0}, beyond the supported maximum")]
    TruncationOverflow(u32),
}

/// How an identity check runs and how much work it may spend.
#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub grading: GradingSpec,
    pub n: u16,
    pub mode: CheckMode,
    /// Maximum number of evaluations; exhaustive checks refuse larger spaces.
    pub budget: u64,
}

#[derive(Debug, Clone)]
pub enum CheckMode {
    Exhaustive { max_wt: usize },
    Random { trials: u32, seed: u64 },
}

impl CheckConfig {
    pub fn exhaustive(grading: GradingSpec, n: u16, max_wt: usize) -> Self {
        CheckConfig {
            grading,
            n,
            mode: CheckMode::Exhaustive { max_wt },
            budget: 10_000_000,
        }
    }

    pub fn random(grading: GradingSpec, n: u16, trials: u32, seed: u64) -> Self {
        CheckConfig {
            grading,
            n,
            mode: CheckMode::Random { trials, seed },
            budget: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails {
        assignment: Vec<(Var, GrassmannElement)>,
        value: GrassmannElement,
    },
    Inconclusive {
        evaluations: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub evaluations: u64,
}

impl CheckReport {
    pub fn holds(&self) -> bool {
        matches!(self.verdict, Verdict::Holds)
    }

    /// Machine-readable key=value lines.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        match &self.verdict {
            Verdict::Holds => out.push_str("verdict=holds\n"),
            Verdict::Inconclusive { .. } => out.push_str("verdict=inconclusive\n"),
            Verdict::Fails { assignment, value } => {
                out.push_str("verdict=fails\n");
                for (v, img) in assignment {
                    out.push_str(&format!("witness.{v}={img}\n"));
                }
                out.push_str(&format!("value={value}\n"));
            }
        }
        out.push_str(&format!("evaluations={}\n", self.evaluations));
        out
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.verdict {
            Verdict::Holds => write!(f, "holds after {} evaluations", self.evaluations),
            Verdict::Inconclusive { evaluations } => {
                write!(f, "inconclusive after {evaluations} evaluations")
            }
            Verdict::Fails { assignment, value } => {
                writeln!(f, "fails; witness:")?;
                for (v, img) in assignment {
                    writeln!(f, "  {v} -> {img}")?;
                }
                write!(f, "  value = {value}")
            }
        }
    }
}

/// Dense uniform sampling: independent coefficients over F on every
/// parity-homogeneous blade of support size <= max_wt.
pub fn random_homogeneous_dense(
    alg: &GrassmannAlgebra,
    grading: GradingSpec,
    parity: u8,
    max_wt: usize,
    rng: &mut ChaCha8Rng,
) -> GrassmannElement {
    let blades = alg.homogeneous_blades(grading, parity, max_wt);
    let scalars: Vec<FieldScalar> = alg.field().enumerate().collect();
    let terms: Vec<_> = blades
        .into_iter()
        .map(|b| (b, scalars[rng.gen_range(0..scalars.len())]))
        .collect();
    alg.from_terms(terms).expect("blades from this algebra")
}

/// Sparse stratified sampling for high-volume soundness sweeps: a handful of
/// blades drawn per support size, so low weights stay represented.
pub fn random_homogeneous_sparse(
    alg: &GrassmannAlgebra,
    grading: GradingSpec,
    parity: u8,
    max_wt: usize,
    terms: usize,
    rng: &mut ChaCha8Rng,
) -> GrassmannElement {
    let blades = alg.homogeneous_blades(grading, parity, max_wt);
    if blades.is_empty() {
        return alg.zero();
    }
    let mut by_wt: BTreeMap<usize, Vec<_>> = BTreeMap::new();
    for &b in &blades {
        by_wt.entry(b.len()).or_default().push(b);
    }
    let strata: Vec<_> = by_wt.values().collect();
    let scalars: Vec<FieldScalar> = alg.field().enumerate().collect();
    let mut out = Vec::new();
    for _ in 0..terms {
        let s = strata[rng.gen_range(0..strata.len())];
        let b = s[rng.gen_range(0..s.len())];
        out.push((b, scalars[rng.gen_range(0..scalars.len())]));
    }
    alg.from_terms(out).expect("blades from this algebra")
}

/// Checks whether f is a graded identity under the given configuration.
///
/// Exhaustive mode iterates every assignment drawn from the enumerated
/// homogeneous span (a proof for that truncation when it holds); random mode
/// samples dense homogeneous elements, trial i seeded with seed + i.
pub fn check_identity(f: &FreePolynomial, cfg: &CheckConfig) -> Result<CheckReport, CheckerError> {
    let alg = GrassmannAlgebra::new(f.field().clone(), cfg.n)?;
    let vars: Vec<Var> = f.variables().into_iter().collect();
    match cfg.mode {
        CheckMode::Exhaustive { max_wt } => {
            let mut domains: Vec<Vec<GrassmannElement>> = Vec::new();
            let mut total: u128 = 1;
            for &v in &vars {
                let dom =
                    match alg.enumerate_homogeneous(cfg.grading, v.parity(), max_wt, cfg.budget) {
                        Ok(d) => d,
                        Err(GrassmannError::EnumerationBudget { .. }) => {
                            return Ok(CheckReport {
                                verdict: Verdict::Inconclusive { evaluations: 0 },
                                evaluations: 0,
                            });
                        }
                        Err(e) => return Err(e.into()),
                    };
                total = total.saturating_mul(dom.len() as u128);
                if total > cfg.budget as u128 {
                    return Ok(CheckReport {
                        verdict: Verdict::Inconclusive { evaluations: 0 },
                        evaluations: 0,
                    });
                }
                domains.push(dom);
            }
            let mut idx = vec![0usize; vars.len()];
            let mut evaluations = 0u64;
            loop {
                let mut a = ElementAssignment::new(cfg.grading);
                for (i, &v) in vars.iter().enumerate() {
                    a.assign(v, domains[i][idx[i]].clone(), &alg)?;
                }
                let value = evaluate(f, &a, &alg)?;
                evaluations += 1;
                if !value.is_zero() {
                    return Ok(CheckReport {
                        verdict: Verdict::Fails {
                            assignment: vars
                                .iter()
                                .map(|&v| (v, a.get(v).unwrap().clone()))
                                .collect(),
                            value,
                        },
                        evaluations,
                    });
                }
                // odometer
                let mut i = 0;
                loop {
                    if i == vars.len() {
                        return Ok(CheckReport {
                            verdict: Verdict::Holds,
                            evaluations,
                        });
                    }
                    idx[i] += 1;
                    if idx[i] < domains[i].len() {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
                if vars.is_empty() {
                    return Ok(CheckReport {
                        verdict: Verdict::Holds,
                        evaluations,
                    });
                }
            }
        }
        CheckMode::Random { trials, seed } => {
            let max_wt = (cfg.n as usize).min(6);
            let run_trial = |i: u32| -> Result<Option<(u32, Vec<(Var, GrassmannElement)>, GrassmannElement)>, CheckerError> {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
                let mut a = ElementAssignment::new(cfg.grading);
                for &v in &vars {
                    let img =
                        random_homogeneous_dense(&alg, cfg.grading, v.parity(), max_wt, &mut rng);
                    a.assign(v, img, &alg)?;
                }
                let value = evaluate(f, &a, &alg)?;
                if value.is_zero() {
                    Ok(None)
                } else {
                    Ok(Some((
                        i,
                        vars.iter()
                            .map(|&v| (v, a.get(v).unwrap().clone()))
                            .collect(),
                        value,
                    )))
                }
            };
            let found = (0..trials)
                .into_par_iter()
                .find_map_first(|i| run_trial(i).transpose());
            match found {
                None => Ok(CheckReport {
                    verdict: Verdict::Holds,
                    evaluations: trials as u64,
                }),
                Some(Err(e)) => Err(e),
                Some(Ok((i, assignment, value))) => Ok(CheckReport {
                    verdict: Verdict::Fails { assignment, value },
                    evaluations: i as u64 + 1,
                }),
            }
        }
    }
}

/// Replays a failing report: re-evaluates the recorded assignment and checks
/// the recorded value comes back.
pub fn replay_failure(
    f: &FreePolynomial,
    cfg: &CheckConfig,
    report: &CheckReport,
) -> Result<bool, CheckerError> {
    let Verdict::Fails { assignment, value } = &report.verdict else {
        return Ok(false);
    };
    let alg = GrassmannAlgebra::new(f.field().clone(), cfg.n)?;
    let mut a = ElementAssignment::new(cfg.grading);
    for (v, img) in assignment {
        a.assign(*v, img.clone(), &alg)?;
    }
    Ok(&evaluate(f, &a, &alg)? == value && !value.is_zero())
}

/// Exhaustive scalar witness search for a p-polynomial: a tuple of scalars
/// where it evaluates nonzero, or None when it vanishes on all of F^n.
pub fn scalar_witness(
    f: &PPolynomial,
) -> Result<Option<Vec<(u32, FieldScalar)>>, CheckerError> {
    let vars: Vec<u32> = f.variables().into_iter().collect();
    if vars.len() > 4 {
        return Err(CheckerError::ArityBudget {
            max: 4,
            got: vars.len(),
        });
    }
    let field = f.field().clone();
    let scalars: Vec<FieldScalar> = field.enumerate().collect();
    let mut idx = vec![0usize; vars.len()];
    loop {
        let point: BTreeMap<u32, FieldScalar> = vars
            .iter()
            .zip(&idx)
            .map(|(&v, &i)| (v, scalars[i]))
            .collect();
        if !f.eval_scalars(&point).is_zero() {
            return Ok(Some(point.into_iter().collect()));
        }
        let mut i = 0;
        loop {
            if i == vars.len() {
                return Ok(None);
            }
            idx[i] += 1;
            if idx[i] < scalars.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if vars.is_empty() {
            return Ok(None);
        }
    }
}

/// Which theorem's proof map to transcribe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessCase {
    /// Canonical grading, SS0 terms.
    Can,
    /// Alternating grading, any SS term.
    Inf,
    /// phi_{k*} grading, terms with total z-degree <= k.
    KStar(u32),
    /// phi_k grading, SS3 terms below the boundary.
    KCase1(u32),
    /// phi_k grading, SS3 terms exactly at the boundary.
    KCase2(u32),
}

impl WitnessCase {
    pub fn grading(&self) -> GradingSpec {
        match *self {
            WitnessCase::Can => GradingSpec::Canonical,
            WitnessCase::Inf => GradingSpec::Alternating,
            WitnessCase::KStar(k) => GradingSpec::FirstKStar(k as u16),
            WitnessCase::KCase1(k) | WitnessCase::KCase2(k) => GradingSpec::FirstK(k as u16),
        }
    }
}

/// A parity-respecting assignment transcribed from a theorem proof, plus the
/// support size its dominant part must reach.
#[derive(Debug, Clone)]
pub struct Witness {
    pub grading: GradingSpec,
    pub truncation: u16,
    pub images: BTreeMap<Var, GrassmannElement>,
    pub expected_support: usize,
}

/// Role of each variable of the term, in the layout the proofs use.
struct Roles {
    /// beg y-variables in order, with exponent and whether they sit in psi.
    beg_y: Vec<(Var, u32, bool)>,
    psi_only_y: Vec<Var>,
    beg_z: Vec<(Var, u32, bool)>,
    psi_only_z: Vec<Var>,
    brackets: usize,
}

fn roles_of(u: &PrTerm) -> Roles {
    let in_psi = |v: Var| u.psi().contains(&v);
    let mut beg_y = Vec::new();
    let mut beg_z = Vec::new();
    for &(v, e) in u.beg() {
        if v.is_even() {
            beg_y.push((v, e, in_psi(v)));
        } else {
            beg_z.push((v, e, in_psi(v)));
        }
    }
    let beg_vars: std::collections::BTreeSet<Var> = u.beg().iter().map(|&(v, _)| v).collect();
    let mut psi_only_y = Vec::new();
    let mut psi_only_z = Vec::new();
    for &v in u.psi() {
        if beg_vars.contains(&v) {
            continue;
        }
        if v.is_even() {
            psi_only_y.push(v);
        } else {
            psi_only_z.push(v);
        }
    }
    Roles {
        beg_y,
        psi_only_y,
        beg_z,
        psi_only_z,
        brackets: u.psi().len() / 2,
    }
}

/// The support size the dominant part must reach for each case.
pub fn expected_support(u: &PrTerm, case: WitnessCase) -> usize {
    let r = roles_of(u);
    let sum_a: u32 = r.beg_y.iter().map(|&(_, e, _)| e).sum();
    let sum_b: u32 = r.beg_z.iter().map(|&(_, e, _)| e).sum();
    let psi_letters = 2 * r.brackets;
    match case {
        WitnessCase::Can => 2 * r.beg_y.len() + r.beg_z.len(),
        WitnessCase::Inf | WitnessCase::KStar(_) | WitnessCase::KCase1(_) => {
            (2 * sum_a + 2 * sum_b) as usize + psi_letters
        }
        WitnessCase::KCase2(_) => (2 * sum_a + 2 * sum_b) as usize + psi_letters - 1,
    }
}

fn check_class(u: &PrTerm, case: WitnessCase, field: &FieldParams) -> Result<(), CheckerError> {
    let st = term_stats(u);
    match case {
        WitnessCase::Can => {
            let spec = crate::canon::IdealSpec::new(crate::canon::IdealKind::I1, field.clone())
                .expect("I1 is valid");
            if !ss_class(u, &spec).ss0 {
                return Err(CheckerError::ClassMismatch(format!("{u} is not in SS0")));
            }
        }
        WitnessCase::Inf => {}
        WitnessCase::KStar(k) => {
            if st.deg_z > k {
                return Err(CheckerError::ClassMismatch(format!(
                    "{u} has z-degree {} > k = {k}",
                    st.deg_z
                )));
            }
        }
        WitnessCase::KCase1(k) => {
            let spec =
                crate::canon::IdealSpec::new(crate::canon::IdealKind::I4 { k }, field.clone())
                    .map_err(|_| CheckerError::ClassMismatch("k must be >= 1".into()))?;
            if ss_class(u, &spec).ss3 != Some(true) || st.deg_z_beg + st.deg_y_psi > k {
                return Err(CheckerError::ClassMismatch(format!(
                    "{u} is not an interior SS3 term for k = {k}"
                )));
            }
        }
        WitnessCase::KCase2(k) => {
            let spec =
                crate::canon::IdealSpec::new(crate::canon::IdealKind::I4 { k }, field.clone())
                    .map_err(|_| CheckerError::ClassMismatch("k must be >= 1".into()))?;
            if ss_class(u, &spec).ss3 != Some(true) || st.deg_z_beg + st.deg_y_psi != k + 1 {
                return Err(CheckerError::ClassMismatch(format!(
                    "{u} is not a boundary SS3 term for k = {k}"
                )));
            }
        }
    }
    Ok(())
}

/// Transcribes the proof's substitution for the given case. The image index
/// arithmetic follows the displayed formulas through running exponent totals.
pub fn build_witness(
    u: &PrTerm,
    case: WitnessCase,
    field: &FieldParams,
) -> Result<Witness, CheckerError> {
    check_class(u, case, field)?;
    let r = roles_of(u);
    // Plan images as (variable, lone generator, pair list) over abstract
    // indices, then materialise once the needed truncation is known.
    let mut plan: Vec<(Var, Option<u32>, Vec<(u32, u32)>, bool)> = Vec::new();
    // the bool marks "add the unit": only the canonical case uses 1 + pair.

    match case {
        WitnessCase::Can => {
            let n = r.beg_y.len() as u32;
            for (i, &(v, _, _)) in r.beg_y.iter().enumerate() {
                let i = i as u32;
                plan.push((v, None, vec![(2 * i + 1, 2 * i + 2)], true));
            }
            for (j, &(v, _, _)) in r.beg_z.iter().enumerate() {
                plan.push((v, Some(2 * n + j as u32 + 1), vec![], false));
            }
        }
        WitnessCase::Inf => {
            // y-side on even indices: pairs (4l-2, 4l), lones interleaved
            let mut a_total = 0u32;
            let mut ypsi_seen = 0u32;
            for &(v, e, in_psi) in &r.beg_y {
                if !in_psi {
                    let pairs = (a_total + 1..=a_total + e)
                        .map(|l| (4 * l - 2 + 2 * ypsi_seen, 4 * l + 2 * ypsi_seen))
                        .collect();
                    plan.push((v, None, pairs, false));
                } else {
                    let base = 4 * a_total + 2 * (ypsi_seen + 1);
                    let pairs = (1..=e).map(|l| (base + 4 * l - 2, base + 4 * l)).collect();
                    plan.push((v, Some(base), pairs, false));
                    ypsi_seen += 1;
                }
                a_total += e;
            }
            for &v in &r.psi_only_y {
                let base = 4 * a_total + 2 * (ypsi_seen + 1);
                plan.push((v, Some(base), vec![], false));
                ypsi_seen += 1;
            }
            let m = 4 * a_total + 2 * ypsi_seen;
            // z-side: odd lones and (odd, M+2l) pairs
            let mut b_total = 0u32;
            let mut zpsi_seen = 0u32;
            for &(v, e, in_psi) in &r.beg_z {
                if !in_psi {
                    let pairs = (b_total + 1..=b_total + e)
                        .map(|l| (2 * (l + zpsi_seen) - 1, m + 2 * l))
                        .collect();
                    plan.push((v, None, pairs, false));
                } else {
                    let lone = 2 * b_total + 2 * (zpsi_seen + 1) - 1;
                    let pairs = (b_total + 1..=b_total + e)
                        .map(|l| (2 * (l + zpsi_seen + 1) - 1, m + 2 * l))
                        .collect();
                    plan.push((v, Some(lone), pairs, false));
                    zpsi_seen += 1;
                }
                b_total += e;
            }
            for &v in &r.psi_only_z {
                let lone = 2 * b_total + 2 * (zpsi_seen + 1) - 1;
                plan.push((v, Some(lone), vec![], false));
                zpsi_seen += 1;
            }
        }
        WitnessCase::KStar(k) => {
            // y-side shifted by k; z-side pairs (small, Q + small)
            let mut a_total = 0u32;
            let mut ypsi_seen = 0u32;
            for &(v, e, in_psi) in &r.beg_y {
                if !in_psi {
                    let pairs = (a_total + 1..=a_total + e)
                        .map(|l| (k + 2 * l - 1 + ypsi_seen, k + 2 * l + ypsi_seen))
                        .collect();
                    plan.push((v, None, pairs, false));
                } else {
                    let base = k + 2 * a_total + ypsi_seen + 1;
                    let pairs = (1..=e).map(|l| (base + 2 * l - 1, base + 2 * l)).collect();
                    plan.push((v, Some(base), pairs, false));
                    ypsi_seen += 1;
                }
                a_total += e;
            }
            for &v in &r.psi_only_y {
                let base = k + 2 * a_total + ypsi_seen + 1;
                plan.push((v, Some(base), vec![], false));
                ypsi_seen += 1;
            }
            let q = k + 2 * a_total + ypsi_seen;
            let mut b_total = 0u32;
            let mut zpsi_seen = 0u32;
            for &(v, e, in_psi) in &r.beg_z {
                if !in_psi {
                    let pairs = (b_total + 1..=b_total + e)
                        .map(|l| (l + zpsi_seen, q + l))
                        .collect();
                    plan.push((v, None, pairs, false));
                } else {
                    let lone = b_total + zpsi_seen + 1;
                    let pairs = (b_total + 1..=b_total + e)
                        .map(|l| (l + zpsi_seen + 1, q + l))
                        .collect();
                    plan.push((v, Some(lone), pairs, false));
                    zpsi_seen += 1;
                }
                b_total += e;
            }
            for &v in &r.psi_only_z {
                let lone = b_total + zpsi_seen + 1;
                plan.push((v, Some(lone), vec![], false));
                zpsi_seen += 1;
            }
        }
        WitnessCase::KCase1(k) => {
            // y-pairs above k, psi-y lones on small indices
            let mut a_total = 0u32;
            let mut ypsi_seen = 0u32;
            for &(v, e, in_psi) in &r.beg_y {
                let pairs: Vec<(u32, u32)> = (a_total + 1..=a_total + e)
                    .map(|l| (k + 2 * l - 1, k + 2 * l))
                    .collect();
                if !in_psi {
                    plan.push((v, None, pairs, false));
                } else {
                    plan.push((v, Some(ypsi_seen + 1), pairs, false));
                    ypsi_seen += 1;
                }
                a_total += e;
            }
            for &v in &r.psi_only_y {
                plan.push((v, Some(ypsi_seen + 1), vec![], false));
                ypsi_seen += 1;
            }
            let total_ypsi = ypsi_seen;
            let big_r = k + 2 * a_total;
            let mut b_total = 0u32;
            let mut zpsi_seen = 0u32;
            for &(v, e, in_psi) in &r.beg_z {
                if !in_psi {
                    let pairs = (b_total + 1..=b_total + e)
                        .map(|l| (big_r + l + zpsi_seen, total_ypsi + l))
                        .collect();
                    plan.push((v, None, pairs, false));
                } else {
                    let lone = big_r + b_total + zpsi_seen + 1;
                    let pairs = (b_total + 1..=b_total + e)
                        .map(|l| (big_r + zpsi_seen + 1 + l, total_ypsi + l))
                        .collect();
                    plan.push((v, Some(lone), pairs, false));
                    zpsi_seen += 1;
                }
                b_total += e;
            }
            let big_s = big_r + b_total + zpsi_seen;
            for (j, &v) in r.psi_only_z.iter().enumerate() {
                plan.push((v, Some(big_s + j as u32 + 1), vec![], false));
            }
        }
        WitnessCase::KCase2(k) => {
            // z-side first: pr(z) takes e_{k+1} plus one fewer pair; small
            // indices stay below k+1 for the y lones.
            let mut b_total = 0u32;
            let mut zpsi_seen = 0u32;
            let mut first_z = true;
            for &(v, e, in_psi) in &r.beg_z {
                if first_z {
                    debug_assert!(!in_psi, "SS3 boundary keeps pr(z) out of psi");
                    let pairs = (1..e).map(|l| (k + l + 1, l)).collect();
                    plan.push((v, Some(k + 1), pairs, false));
                    b_total += e;
                    first_z = false;
                    continue;
                }
                if !in_psi {
                    let pairs = (b_total..b_total + e)
                        .map(|l| (k + l + 1 + zpsi_seen, l))
                        .collect();
                    plan.push((v, None, pairs, false));
                } else {
                    let lone = k + b_total + zpsi_seen + 1;
                    let pairs = (1..=e)
                        .map(|l| (k + b_total + zpsi_seen + 1 + l, l + b_total - 1))
                        .collect();
                    plan.push((v, Some(lone), pairs, false));
                    zpsi_seen += 1;
                }
                b_total += e;
            }
            for &v in &r.psi_only_z {
                let lone = k + b_total + zpsi_seen + 1;
                plan.push((v, Some(lone), vec![], false));
                zpsi_seen += 1;
            }
            let m = k + b_total + zpsi_seen;
            let mut a_total = 0u32;
            let mut ypsi_seen = 0u32;
            for &(v, e, in_psi) in &r.beg_y {
                let pairs: Vec<(u32, u32)> = (a_total + 1..=a_total + e)
                    .map(|l| (m + 2 * l - 1, m + 2 * l))
                    .collect();
                if !in_psi {
                    plan.push((v, None, pairs, false));
                } else {
                    plan.push((v, Some(b_total + ypsi_seen), pairs, false));
                    ypsi_seen += 1;
                }
                a_total += e;
            }
            for &v in &r.psi_only_y {
                plan.push((v, Some(b_total + ypsi_seen), vec![], false));
                ypsi_seen += 1;
            }
        }
    }

    let mut max_index = 0u32;
    for (_, lone, pairs, _) in &plan {
        if let Some(l) = lone {
            max_index = max_index.max(*l);
        }
        for &(a, b) in pairs {
            max_index = max_index.max(a).max(b);
        }
    }
    if max_index > crate::grassmann::MAX_TRUNCATION as u32 {
        return Err(CheckerError::TruncationOverflow(max_index));
    }
    let n = max_index.max(1) as u16;
    let alg = GrassmannAlgebra::new(field.clone(), n)?;
    let grading = case.grading();
    let mut images = BTreeMap::new();
    for (v, lone, pairs, with_unit) in plan {
        let mut img = alg.zero();
        if with_unit {
            img = alg.add(&img, &alg.one())?;
        }
        if let Some(l) = lone {
            img = alg.add(&img, &alg.generator(l as u16)?)?;
        }
        for (a, b) in pairs {
            // product e_a e_b in the displayed order, sign included
            let blade = alg.mul(&alg.generator(a as u16)?, &alg.generator(b as u16)?)?;
            img = alg.add(&img, &blade)?;
        }
        if !alg.is_homogeneous(grading, &img, v.parity()) {
            return Err(CheckerError::ClassMismatch(format!(
                "image of {v} is not parity-{} homogeneous under {grading}",
                v.parity()
            )));
        }
        images.insert(v, img);
    }
    Ok(Witness {
        grading,
        truncation: n,
        images,
        expected_support: expected_support(u, case),
    })
}

/// Evaluation outcome of a term under a witness assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominantReport {
    pub dom_support: Vec<u16>,
    pub weight: usize,
    pub nonzero: bool,
}

impl DominantReport {
    pub fn to_kv(&self) -> String {
        format!(
            "nonzero={}\nweight={}\nsupport={}\n",
            self.nonzero,
            self.weight,
            self.dom_support
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

/// Evaluates the term under the witness and reports its dominant part.
pub fn certify_dominant(
    u: &PrTerm,
    w: &Witness,
    field: &FieldParams,
) -> Result<DominantReport, CheckerError> {
    let alg = GrassmannAlgebra::new(field.clone(), w.truncation)?;
    let mut a = ElementAssignment::new(w.grading);
    for (&v, img) in &w.images {
        a.assign(v, img.clone(), &alg)?;
    }
    let poly = u.to_free_polynomial(field);
    let value = evaluate(&poly, &a, &alg)?;
    let dom = value.dom();
    Ok(DominantReport {
        dom_support: dom.supp(),
        weight: dom.wt(),
        nonzero: !dom.is_zero(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::{gen_ideal_basis, IdealKind, IdealSpec, PMono};
    use crate::parse::parse_polynomial;

    fn f3() -> FieldParams {
        FieldParams::new(3, 1).unwrap()
    }

    #[test]
    fn check_identity_examples() {
        let f = f3();
        // z1 z2 + z2 z1 holds exhaustively on the canonical grading in G_3
        let p = parse_polynomial("z1*z2 + z2*z1", &f).unwrap();
        let cfg = CheckConfig::exhaustive(GradingSpec::Canonical, 3, 3);
        let report = check_identity(&p, &cfg).unwrap();
        assert!(report.holds(), "{report}");

        // z1 z2 holds on phi_{1*} (every odd image contains e_1)
        let p = parse_polynomial("z1*z2", &f).unwrap();
        let cfg = CheckConfig::random(GradingSpec::FirstKStar(1), 6, 50, 9);
        assert!(check_identity(&p, &cfg).unwrap().holds());

        // but fails on the canonical grading
        let cfg = CheckConfig::exhaustive(GradingSpec::Canonical, 2, 2);
        let report = check_identity(&p, &cfg).unwrap();
        assert!(!report.holds());
        assert!(replay_failure(&p, &cfg, &report).unwrap());
    }

    #[test]
    fn random_reports_are_replayable_and_deterministic() {
        let f = f3();
        let p = parse_polynomial("y1*y2", &f).unwrap();
        let cfg = CheckConfig::random(GradingSpec::Canonical, 4, 20, 42);
        let r1 = check_identity(&p, &cfg).unwrap();
        let r2 = check_identity(&p, &cfg).unwrap();
        assert_eq!(r1, r2);
        assert!(!r1.holds(), "y1*y2 = 1 at y=1 is nonzero");
        assert!(replay_failure(&p, &cfg, &r1).unwrap());
        assert!(r1.to_kv().contains("verdict=fails"));
    }

    #[test]
    fn exhaustive_budget_refusal() {
        let f = f3();
        let p = parse_polynomial("[x1,x2,x3]".replace('x', "y").as_str(), &f).unwrap();
        let mut cfg = CheckConfig::exhaustive(GradingSpec::Canonical, 6, 6);
        cfg.budget = 100;
        let report = check_identity(&p, &cfg).unwrap();
        assert!(matches!(
            report.verdict,
            Verdict::Inconclusive { evaluations: 0 }
        ));
    }

    #[test]
    fn scalar_witness_examples() {
        let f = f3();
        // y1^p has the witness 1
        let fp =
            PPolynomial::monomial(f.clone(), PMono(vec![(1, 3)]), f.one()).unwrap();
        let w = scalar_witness(&fp).unwrap().unwrap();
        assert_eq!(w.len(), 1);

        // y1^(pq) - y1^p is the scalar-zero function
        let mut g = PPolynomial::monomial(f.clone(), PMono(vec![(1, 9)]), f.one()).unwrap();
        g = g.add(&PPolynomial::monomial(f.clone(), PMono(vec![(1, 3)]), f.from_int(-1)).unwrap());
        assert_eq!(scalar_witness(&g).unwrap(), None);

        // y1^p - y2^p has a witness with y1 = 1, y2 = 0
        let mut h = PPolynomial::monomial(f.clone(), PMono(vec![(1, 3)]), f.one()).unwrap();
        h = h.add(&PPolynomial::monomial(f.clone(), PMono(vec![(2, 3)]), f.from_int(-1)).unwrap());
        let w = scalar_witness(&h).unwrap().unwrap();
        let point: BTreeMap<u32, FieldScalar> = w.into_iter().collect();
        assert!(!h.eval_scalars(&point).is_zero());
    }

    #[test]
    fn witness_can_case() {
        let f = f3();
        // u = z1 z2: z1 -> e1, z2 -> e2, dominant support {1,2}
        let u = PrTerm::new(vec![(Var::Z(1), 1), (Var::Z(2), 1)], vec![], &f).unwrap();
        let w = build_witness(&u, WitnessCase::Can, &f).unwrap();
        assert_eq!(w.expected_support, 2);
        let cert = certify_dominant(&u, &w, &f).unwrap();
        assert!(cert.nonzero);
        assert_eq!(cert.dom_support, vec![1, 2]);
        assert_eq!(cert.weight, w.expected_support);
    }

    #[test]
    fn witness_inf_case_spec_example() {
        let f = f3();
        // u = y1 (exponent 1, no brackets): y1 -> e2 e4
        let u = PrTerm::new(vec![(Var::Y(1), 1)], vec![], &f).unwrap();
        let w = build_witness(&u, WitnessCase::Inf, &f).unwrap();
        let img = w.images.get(&Var::Y(1)).unwrap();
        let alg = GrassmannAlgebra::new(f.clone(), w.truncation).unwrap();
        assert_eq!(img, &alg.blade(&[2, 4]).unwrap());
        let cert = certify_dominant(&u, &w, &f).unwrap();
        assert!(cert.nonzero);
        assert_eq!(cert.weight, 2);
    }

    #[test]
    fn witness_kcase1_spec_example() {
        let f = f3();
        // k = 1, u = z1: the display gives the pair e_{R+1} e_{l1-n1+1} = e2 e1
        let u = PrTerm::new(vec![(Var::Z(1), 1)], vec![], &f).unwrap();
        let w = build_witness(&u, WitnessCase::KCase1(1), &f).unwrap();
        let alg = GrassmannAlgebra::new(f.clone(), w.truncation).unwrap();
        let img = w.images.get(&Var::Z(1)).unwrap();
        // e2 e1 = -e1e2
        let expect = alg
            .scale(f.from_int(-1), &alg.blade(&[1, 2]).unwrap())
            .unwrap();
        assert_eq!(img, &expect);
        let cert = certify_dominant(&u, &w, &f).unwrap();
        assert!(cert.nonzero);
        assert_eq!(cert.dom_support, vec![1, 2]);
    }

    #[test]
    fn witness_class_mismatch() {
        let f = f3();
        // a term with brackets is not SS0
        let u = PrTerm::new(vec![], vec![Var::Y(1), Var::Y(2)], &f).unwrap();
        assert!(matches!(
            build_witness(&u, WitnessCase::Can, &f),
            Err(CheckerError::ClassMismatch(_))
        ));
        // z-degree over k for KStar
        let u = PrTerm::new(vec![(Var::Z(1), 1), (Var::Z(2), 1)], vec![], &f).unwrap();
        assert!(build_witness(&u, WitnessCase::KStar(1), &f).is_err());
    }

    #[test]
    fn witness_adequacy_sample() {
        let f = f3();
        // a richer mixed term for each case
        let u_can = PrTerm::new(
            vec![(Var::Y(1), 2), (Var::Y(2), 1), (Var::Z(1), 1), (Var::Z(2), 1)],
            vec![],
            &f,
        )
        .unwrap();
        let u_mixed = PrTerm::new(
            vec![(Var::Y(1), 2), (Var::Z(1), 1)],
            vec![Var::Y(1), Var::Y(2), Var::Z(2), Var::Z(3)],
            &f,
        )
        .unwrap();
        let u_k1 = PrTerm::new(vec![(Var::Z(1), 1)], vec![Var::Y(1), Var::Y(2)], &f).unwrap();
        let u_k2 = PrTerm::new(
            vec![(Var::Z(1), 1), (Var::Z(2), 1)],
            vec![Var::Y(1), Var::Y(2)],
            &f,
        )
        .unwrap();

        for (u, case) in [
            (&u_can, WitnessCase::Can),
            (&u_mixed, WitnessCase::Inf),
            (&u_mixed, WitnessCase::KStar(4)),
            (&u_k1, WitnessCase::KCase1(4)),
            (&u_k2, WitnessCase::KCase2(3)),
        ] {
            let w = build_witness(u, case, &f).unwrap();
            let cert = certify_dominant(u, &w, &f).unwrap();
            assert!(cert.nonzero, "case {case:?} on {u}");
            assert_eq!(
                cert.weight, w.expected_support,
                "support size mismatch for {case:?} on {u}"
            );
        }
    }

    #[test]
    fn generators_hold_and_separate() {
        let f = f3();
        // every I1 generator holds on the canonical grading (tiny exhaustive)
        let i1 = IdealSpec::new(IdealKind::I1, f.clone()).unwrap();
        for g in gen_ideal_basis(&i1) {
            let vars = g.poly.variables().len();
            let cfg = if vars <= 2 {
                CheckConfig::exhaustive(GradingSpec::Canonical, 3, 3)
            } else {
                CheckConfig::random(GradingSpec::Canonical, 8, 60, 3)
            };
            assert!(
                check_identity(&g.poly, &cfg).unwrap().holds(),
                "{} should hold",
                g.label
            );
        }
        // separation: [y1,y2] from I1 fails on the alternating grading
        let p = parse_polynomial("[y1,y2]", &f).unwrap();
        let cfg = CheckConfig::random(GradingSpec::Alternating, 8, 80, 5);
        assert!(!check_identity(&p, &cfg).unwrap().holds());
    }
}
