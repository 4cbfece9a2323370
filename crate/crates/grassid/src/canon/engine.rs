//! The rewrite engine.
//!
//! Straightening into the power-product-times-brackets basis handles every
//! ideal: adjacent out-of-order letters split into a swapped word plus a
//! bracket correction, brackets are central, bracket products alternate in
//! their letters, odd p-th powers die, and even p-th powers are pulled into
//! the p-polynomial coefficient with exponents folded through y^(pq) = y^p.
//!
//! On top of that, I1 commutes y-letters freely and anticommutes z-letters
//! (no brackets survive), I3 kills any term with more than k odd letters, and
//! I4 runs extra phases: terms whose brackets hold more than k even letters
//! die, oversize beg z-blocks are rewritten through the g-family relation,
//! boundary terms saturated at the leading z-variable vanish, and the
//! remaining boundary terms are eliminated through a per-multidegree linear
//! solve over generated relation instances.

use std::collections::{BTreeMap, BTreeSet};

use super::{CanonicalForm, IdealKind, IdealSpec, PMono, PPolynomial, PrTerm};
use crate::field::{FieldParams, FieldScalar};
use crate::freealg::{FreePolynomial, Var, Word};

/// Hard cap on rewrite steps per reduce call; exceeding it is a defect.
const STEP_BUDGET: u64 = 1_000_000;

/// One replayable rewrite step: the consumed piece and its replacement, both
/// as expanded free polynomials. Steps with equal before and after (pure
/// regroupings) are not recorded.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub tag: &'static str,
    pub before: FreePolynomial,
    pub after: FreePolynomial,
}

pub type Trace = Vec<TraceStep>;

/// Rewrites f into canonical form modulo the chosen basis.
pub fn reduce(f: &FreePolynomial, spec: &IdealSpec) -> CanonicalForm {
    reduce_traced(f, spec, false).0
}

pub fn reduce_traced(
    f: &FreePolynomial,
    spec: &IdealSpec,
    want_trace: bool,
) -> (CanonicalForm, Trace) {
    let mut eng = Engine::new(spec, want_trace);
    let mut work: Vec<RawTerm> = f
        .terms()
        .map(|(w, c)| RawTerm {
            coeff: *c,
            word: w.0.clone(),
            psi: Vec::new(),
            ppow: Vec::new(),
        })
        .collect();
    eng.straighten_all(&mut work);
    if let IdealKind::I4 { k } = spec.kind {
        eng.run_i4_phases(k);
    }
    let pairs = eng.collect_pairs();
    let form = CanonicalForm::new(spec.clone(), pairs);
    (form, eng.trace)
}

/// Applies every traced step to f and checks the final state equals the
/// expansion of the canonical form.
pub fn replay_trace(f: &FreePolynomial, trace: &Trace, result: &CanonicalForm) -> bool {
    let mut state = f.clone();
    for step in trace {
        let delta = match step.after.sub(&step.before) {
            Ok(d) => d,
            Err(_) => return false,
        };
        state = match state.add(&delta) {
            Ok(s) => s,
            Err(_) => return false,
        };
    }
    state == result.to_free_polynomial()
}

/// In-flight term: an unnormalised word, flat bracket letters (consecutive
/// pairs multiply the word on the right), and extracted p-power exponents
/// (multiplying on the left).
#[derive(Debug, Clone)]
struct RawTerm {
    coeff: FieldScalar,
    word: Vec<Var>,
    psi: Vec<Var>,
    ppow: Vec<(u32, u32)>,
}

#[derive(Debug, Clone, Default)]
struct Solution {
    /// violator -> replacement combination over later columns.
    rewrites: BTreeMap<PrTerm, Vec<(PMono, PrTerm, FieldScalar)>>,
    /// violators with no derivable rewrite; emitted as-is.
    residuals: BTreeSet<PrTerm>,
}

struct Engine<'a> {
    spec: &'a IdealSpec,
    field: FieldParams,
    p: u32,
    q: u64,
    steps: u64,
    want_trace: bool,
    trace: Trace,
    /// Normalised accumulator: term -> p-monomial -> coefficient.
    accum: BTreeMap<PrTerm, BTreeMap<PMono, FieldScalar>>,
    /// Cached boundary solutions per stripped multidegree.
    solutions: BTreeMap<Vec<(Var, u32)>, Solution>,
}

impl<'a> Engine<'a> {
    fn new(spec: &'a IdealSpec, want_trace: bool) -> Self {
        Engine {
            spec,
            field: spec.field.clone(),
            p: spec.field.p(),
            q: spec.field.q(),
            steps: 0,
            want_trace,
            trace: Vec::new(),
            accum: BTreeMap::new(),
            solutions: BTreeMap::new(),
        }
    }

    fn tick(&mut self) {
        self.steps += 1;
        if self.steps > STEP_BUDGET {
            panic!(
                "reduction exceeded the {STEP_BUDGET}-step budget for {}; \
                 this is a defect, not an output",
                self.spec.kind
            );
        }
    }

    fn push_trace(&mut self, tag: &'static str, before: &RawTerm, after: &[RawTerm]) {
        if !self.want_trace {
            return;
        }
        let before_poly = raw_to_poly(before, &self.field);
        let mut after_poly = FreePolynomial::zero(self.field.clone());
        for t in after {
            after_poly = after_poly
                .add(&raw_to_poly(t, &self.field))
                .expect("same field");
        }
        self.trace.push(TraceStep {
            tag,
            before: before_poly,
            after: after_poly,
        });
    }

    fn trace_kill(&mut self, tag: &'static str, before: &RawTerm) {
        if !self.want_trace {
            return;
        }
        self.trace.push(TraceStep {
            tag,
            before: raw_to_poly(before, &self.field),
            after: FreePolynomial::zero(self.field.clone()),
        });
    }

    /// Drives every raw term to normal shape and accumulates it.
    fn straighten_all(&mut self, work: &mut Vec<RawTerm>) {
        while let Some(term) = work.pop() {
            self.tick();
            if term.coeff.is_zero() {
                continue;
            }
            // I3: any term with more than k odd letters dies.
            if let IdealKind::I3 { k } = self.spec.kind {
                let zcount = term.word.iter().filter(|v| !v.is_even()).count()
                    + term.psi.iter().filter(|v| !v.is_even()).count();
                if zcount as u32 > k {
                    self.trace_kill("KILL-ZCOUNT", &term);
                    continue;
                }
            }
            if let Some(i) = find_descent(&term.word) {
                let a = term.word[i + 1];
                let b = term.word[i];
                if matches!(self.spec.kind, IdealKind::I1) {
                    // y commutes with everything; distinct z's anticommute.
                    let mut swapped = term.clone();
                    swapped.word.swap(i, i + 1);
                    if !a.is_even() && !b.is_even() {
                        swapped.coeff = self.field.neg(swapped.coeff);
                    }
                    self.push_trace("SWAP", &term, std::slice::from_ref(&swapped));
                    work.push(swapped);
                } else {
                    // b a = a b - [a, b]
                    let mut swapped = term.clone();
                    swapped.word.swap(i, i + 1);
                    let mut bracketed = term.clone();
                    bracketed.word.remove(i + 1);
                    bracketed.word.remove(i);
                    bracketed.psi.push(a);
                    bracketed.psi.push(b);
                    bracketed.coeff = self.field.neg(bracketed.coeff);
                    self.push_trace("SWAP", &term, &[swapped.clone(), bracketed.clone()]);
                    work.push(swapped);
                    work.push(bracketed);
                }
                continue;
            }
            let Some(collected) = self.collect_word(term) else {
                continue;
            };
            let Some(normal) = self.normalize_psi_step(collected) else {
                continue;
            };
            self.accumulate(normal);
        }
    }

    /// Sorted word -> beg letters plus extracted p-powers. Returns None when
    /// an odd power kills the term.
    fn collect_word(&mut self, term: RawTerm) -> Option<RawTerm> {
        let p = self.p;
        let mut beg_word: Vec<Var> = Vec::with_capacity(term.word.len());
        let mut ppow = term.ppow.clone();
        let mut folded = false;
        let mut i = 0;
        while i < term.word.len() {
            let v = term.word[i];
            let mut j = i;
            while j < term.word.len() && term.word[j] == v {
                j += 1;
            }
            let e = (j - i) as u32;
            if v.is_even() {
                if e >= p {
                    let mut s = e / p;
                    let r = e % p;
                    while s as u64 > self.q - 1 {
                        s -= (self.q - 1) as u32;
                        folded = true;
                    }
                    ppow.push((v.index(), s * p));
                    beg_word.extend(std::iter::repeat(v).take(r as usize));
                } else {
                    beg_word.extend(std::iter::repeat(v).take(e as usize));
                }
            } else {
                let cap = if matches!(self.spec.kind, IdealKind::I1) {
                    2
                } else {
                    p
                };
                if e >= cap {
                    let tag = if cap == 2 { "KILL-ZSQ" } else { "KILL-ZP" };
                    self.trace_kill(tag, &term);
                    return None;
                }
                beg_word.extend(std::iter::repeat(v).take(e as usize));
            }
            i = j;
        }
        ppow.sort_unstable();
        let mut merged: Vec<(u32, u32)> = Vec::with_capacity(ppow.len());
        let cap = ((self.q - 1) * p as u64) as u32;
        for (idx, e) in ppow {
            if let Some(last) = merged.last_mut() {
                if last.0 == idx {
                    last.1 += e;
                    while last.1 > cap {
                        last.1 -= cap;
                        folded = true;
                    }
                    continue;
                }
            }
            merged.push((idx, e));
        }
        let out = RawTerm {
            coeff: term.coeff,
            word: beg_word,
            psi: term.psi.clone(),
            ppow: merged,
        };
        if folded {
            self.push_trace("P-PERIOD", &term, std::slice::from_ref(&out));
        }
        Some(out)
    }

    /// Alternation of the bracket letters: kill on repeats, otherwise sort
    /// with the permutation sign.
    fn normalize_psi_step(&mut self, term: RawTerm) -> Option<RawTerm> {
        if term.psi.is_empty() {
            return Some(term);
        }
        match normalize_psi(&term.psi) {
            None => {
                self.trace_kill("PSI-KILL", &term);
                None
            }
            Some((sign, letters)) => {
                if letters == term.psi {
                    return Some(term);
                }
                let mut out = term.clone();
                out.psi = letters;
                if sign < 0 {
                    out.coeff = self.field.neg(out.coeff);
                }
                self.push_trace("PSI-SORT", &term, std::slice::from_ref(&out));
                Some(out)
            }
        }
    }

    fn accumulate(&mut self, t: RawTerm) {
        debug_assert!(find_descent(&t.word).is_none());
        let term = PrTerm {
            beg: word_to_beg(&t.word),
            psi: t.psi,
        };
        let mono = PMono(t.ppow);
        let slot = self
            .accum
            .entry(term)
            .or_default()
            .entry(mono)
            .or_insert_with(|| self.field.zero());
        *slot = self.field.add(*slot, t.coeff);
    }

    fn take_entries(&mut self) -> Vec<(PrTerm, PMono, FieldScalar)> {
        let accum = std::mem::take(&mut self.accum);
        let mut out = Vec::new();
        for (term, monos) in accum {
            for (m, c) in monos {
                if !c.is_zero() {
                    out.push((term.clone(), m, c));
                }
            }
        }
        out
    }

    fn collect_pairs(&mut self) -> Vec<(PPolynomial, PrTerm)> {
        let mut out = Vec::new();
        for (term, monos) in std::mem::take(&mut self.accum) {
            let mut fp = PPolynomial::zero(self.field.clone());
            for (m, c) in monos {
                if !c.is_zero() {
                    fp.add_term(m, c);
                }
            }
            if !fp.is_zero() {
                out.push((fp, term));
            }
        }
        out
    }

    // ---- I4 phases ----

    fn run_i4_phases(&mut self, k: u32) {
        // Phase A: bracket y-degree cap and beg z-block shrinking.
        loop {
            let mut work: Vec<RawTerm> = Vec::new();
            for (term, mono, coeff) in self.take_entries() {
                self.tick();
                let st = super::term_stats(&term);
                if st.deg_y_psi > k {
                    self.trace_kill("KILL-PSI-Y", &raw_of(&term, &mono, coeff));
                    continue;
                }
                if st.deg_z_beg + st.deg_y_psi >= k + 2 {
                    let m = k - st.deg_y_psi + 2;
                    let pieces = self.zbeg_rewrite(&term, &mono, coeff, m);
                    self.push_trace("REWRITE-ZBEG", &raw_of(&term, &mono, coeff), &pieces);
                    work.extend(pieces);
                    continue;
                }
                self.accumulate(raw_of(&term, &mono, coeff));
            }
            if work.is_empty() {
                break;
            }
            self.straighten_all(&mut work);
        }
        // Phase B: terms at the boundary are dependent modulo the basis;
        // saturated ones vanish, the rest run through a local linear solve
        // that eliminates every pivot-expressible term toward SS-smaller ones.
        loop {
            let mut work: Vec<RawTerm> = Vec::new();
            let mut substituted = false;
            for (term, mono, coeff) in self.take_entries() {
                self.tick();
                if !at_boundary(&term, k) {
                    self.accumulate(raw_of(&term, &mono, coeff));
                    continue;
                }
                if kills_identically(&term, self.p, k) {
                    self.trace_kill("KILL-PRZ-SAT", &raw_of(&term, &mono, coeff));
                    continue;
                }
                let key = multideg_of(&term);
                if !self.solutions.contains_key(&key) {
                    let sol = self.solve_multidegree(&key, k);
                    self.solutions.insert(key.clone(), sol);
                }
                let sol = &self.solutions[&key];
                if let Some(repl) = sol.rewrites.get(&term).cloned() {
                    let mut after = Vec::new();
                    for (pm, u, s) in &repl {
                        let merged = self.pmono_mul(&mono, pm);
                        let c = self.field.mul(coeff, *s);
                        after.push(raw_of(u, &merged, c));
                    }
                    self.push_trace("BOUNDARY-SOLVE", &raw_of(&term, &mono, coeff), &after);
                    work.extend(after);
                    substituted = true;
                } else {
                    // No derivable rewrite; the term stays (sound, but
                    // outside the target class).
                    self.accumulate(raw_of(&term, &mono, coeff));
                }
            }
            if work.is_empty() {
                if !substituted {
                    break;
                }
                continue;
            }
            self.straighten_all(&mut work);
            // Substituted pieces are phase-A conformant (relation rows were
            // reduced through phase A), so only boundary checks loop.
        }
    }

    /// w_1..w_m * Psi = -sum over nonempty even T of (-2)^(-|T|/2) f_T(w) * Psi,
    /// applied to the first m letters of the beg z-block.
    fn zbeg_rewrite(
        &self,
        term: &PrTerm,
        mono: &PMono,
        coeff: FieldScalar,
        m: u32,
    ) -> Vec<RawTerm> {
        let (yword, zblock) = split_beg(term);
        debug_assert!(zblock.len() >= m as usize);
        let prefix = &zblock[..m as usize];
        let rest = &zblock[m as usize..];
        let inv_neg2 = self.field.inv(self.field.from_int(-2)).expect("p > 2");
        let mut out = Vec::new();
        for mask in 1u32..(1 << m) {
            if mask.count_ones() % 2 != 0 {
                continue;
            }
            let (t_letters, complement) = split_by_mask(prefix, mask);
            let mut word = yword.clone();
            word.extend_from_slice(&complement);
            word.extend_from_slice(rest);
            let mut psi = term.psi().to_vec();
            psi.extend_from_slice(&t_letters);
            let c_t = self.field.pow(inv_neg2, (t_letters.len() / 2) as u64);
            let c = self.field.neg(self.field.mul(coeff, c_t));
            out.push(RawTerm {
                coeff: c,
                word,
                psi,
                ppow: mono.0.clone(),
            });
        }
        out
    }

    fn pmono_mul(&self, a: &PMono, b: &PMono) -> PMono {
        let mut map: BTreeMap<u32, u32> = BTreeMap::new();
        for &(i, e) in a.0.iter().chain(b.0.iter()) {
            *map.entry(i).or_insert(0) += e;
        }
        let cap = ((self.q - 1) * self.p as u64) as u32;
        PMono(
            map.into_iter()
                .map(|(i, mut e)| {
                    while e > cap {
                        e -= cap;
                    }
                    (i, e)
                })
                .collect(),
        )
    }

    // ---- boundary solver ----

    /// Builds relation instances inside one stripped multidegree, reduces
    /// them through the earlier phases, and eliminates violator columns by
    /// Gaussian elimination. Violators the relations cannot pivot stay as
    /// residuals.
    fn solve_multidegree(&mut self, key: &[(Var, u32)], k: u32) -> Solution {
        let mut violators: Vec<PrTerm> = enumerate_ss_terms(key, self.p)
            .into_iter()
            .filter(|u| {
                at_boundary(u, k)
                    && super::term_stats(u).deg_y_psi <= k
                    && !kills_identically(u, self.p, k)
            })
            .collect();
        if violators.is_empty() {
            return Solution::default();
        }
        // Eliminate terms carrying pr(z) inside a bracket first, then the
        // remaining boundary terms, SS-larger before SS-smaller.
        violators.sort_by(|a, b| {
            let va = prz_in_psi(a);
            let vb = prz_in_psi(b);
            vb.cmp(&va).then_with(|| super::ss_compare(b, a))
        });

        let mut rows: Vec<BTreeMap<(PMono, PrTerm), FieldScalar>> = Vec::new();
        for v in &violators {
            for q in self.instance_pool(v, k) {
                let row = self.reduce_instance(q, k);
                if !row.is_empty() {
                    rows.push(row);
                }
            }
        }

        // Columns: violators (trivial p-part) in descending SS order first.
        let mut columns: Vec<(PMono, PrTerm)> = Vec::new();
        let mut seen: BTreeSet<(PMono, PrTerm)> = BTreeSet::new();
        for v in &violators {
            let col = (PMono::one(), v.clone());
            if seen.insert(col.clone()) {
                columns.push(col);
            }
        }
        let mut others: Vec<(PMono, PrTerm)> = rows
            .iter()
            .flat_map(|r| r.keys().cloned())
            .filter(|c| !seen.contains(c))
            .collect();
        others.sort();
        others.dedup();
        columns.extend(others);
        let col_index: BTreeMap<&(PMono, PrTerm), usize> =
            columns.iter().zip(0..).collect();
        let ncols = columns.len();

        let mut mat: Vec<Vec<FieldScalar>> = rows
            .iter()
            .map(|r| {
                let mut row = vec![self.field.zero(); ncols];
                for (cpos, c) in r {
                    row[col_index[cpos]] = *c;
                }
                row
            })
            .collect();
        let mut pivot_row_of_col: Vec<Option<usize>> = vec![None; ncols];
        let mut rank = 0usize;
        for col in 0..ncols {
            let mut sel = None;
            for (r, row) in mat.iter().enumerate().skip(rank) {
                if !row[col].is_zero() {
                    sel = Some(r);
                    break;
                }
            }
            let Some(r) = sel else { continue };
            mat.swap(rank, r);
            let inv = self.field.inv(mat[rank][col]).expect("nonzero pivot");
            for x in mat[rank].iter_mut() {
                *x = self.field.mul(*x, inv);
            }
            for r2 in 0..mat.len() {
                if r2 != rank && !mat[r2][col].is_zero() {
                    let factor = mat[r2][col];
                    for cc in col..ncols {
                        let sub = self.field.mul(factor, mat[rank][cc]);
                        mat[r2][cc] = self.field.sub(mat[r2][cc], sub);
                    }
                }
            }
            pivot_row_of_col[col] = Some(rank);
            rank += 1;
            if rank == mat.len() {
                break;
            }
        }

        let mut sol = Solution::default();
        for (ci, v) in violators.iter().enumerate() {
            match pivot_row_of_col[ci] {
                Some(r) => {
                    // pivot row: v + sum_{c > ci} a_c col_c = 0
                    let mut repl = Vec::new();
                    for (cc, col) in columns.iter().enumerate().skip(ci + 1) {
                        let a = mat[r][cc];
                        if !a.is_zero() {
                            repl.push((col.0.clone(), col.1.clone(), self.field.neg(a)));
                        }
                    }
                    sol.rewrites.insert(v.clone(), repl);
                }
                None => {
                    sol.residuals.insert(v.clone());
                }
            }
        }
        sol
    }

    /// Candidate relation instances for one violator. Every instance is (an
    /// I2-congruent form of) a word-multiple of a generator-family member, so
    /// its straightened row is a valid congruence to zero.
    fn instance_pool(&self, v: &PrTerm, k: u32) -> Vec<Vec<RawTerm>> {
        let st = super::term_stats(v);
        let m = (k - st.deg_y_psi + 2) as usize;
        let (yword, beg_z) = split_beg(v);
        let brackets: Vec<(Var, Var)> = v.psi_brackets().collect();
        let mut pool = Vec::new();

        for (bi, &(a, b)) in brackets.iter().enumerate() {
            let psi_rest: Vec<Var> = brackets
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != bi)
                .flat_map(|(_, &(x, y))| [x, y])
                .collect();
            // Commutated instances: insert one bracket letter into the
            // g-arguments and bracket the whole member by the other.
            for (x, o) in [(a, b), (b, a)] {
                if x.is_even() {
                    continue;
                }
                let mut imgs = beg_z.clone();
                imgs.push(x);
                imgs.sort();
                if imgs.len() == m {
                    pool.push(self.commutated_instance(&yword, &imgs, &psi_rest, o));
                }
            }
            // Worded instances: pull one beg letter out as a word multiplier
            // and move both bracket letters into the g-arguments.
            if !a.is_even() && !b.is_even() {
                let mut tried = BTreeSet::new();
                for (wi, &w) in beg_z.iter().enumerate() {
                    if !tried.insert(w) {
                        continue;
                    }
                    let mut imgs: Vec<Var> = beg_z
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != wi)
                        .map(|(_, &x)| x)
                        .collect();
                    imgs.push(a);
                    imgs.push(b);
                    imgs.sort();
                    if imgs.len() == m {
                        pool.push(self.worded_instance(&yword, &imgs, &psi_rest, w, true));
                        pool.push(self.worded_instance(&yword, &imgs, &psi_rest, w, false));
                    }
                }
            }
        }
        pool
    }

    /// Yp * [g_m(imgs) * (psi_rest brackets), o], with the commutator already
    /// expanded through centrality of brackets: Leibniz over the f_T word
    /// letters only.
    fn commutated_instance(
        &self,
        yword: &[Var],
        imgs: &[Var],
        psi_rest: &[Var],
        o: Var,
    ) -> Vec<RawTerm> {
        let inv_neg2 = self.field.inv(self.field.from_int(-2)).expect("p > 2");
        let m = imgs.len() as u32;
        let mut out = Vec::new();
        for mask in 0u32..(1 << m) {
            if mask.count_ones() % 2 != 0 {
                continue;
            }
            let (t_letters, complement) = split_by_mask(imgs, mask);
            let coeff = self.field.pow(inv_neg2, (t_letters.len() / 2) as u64);
            for i in 0..complement.len() {
                let mut word = yword.to_vec();
                word.extend_from_slice(&complement[..i]);
                word.extend_from_slice(&complement[i + 1..]);
                let mut psi = t_letters.clone();
                psi.extend_from_slice(psi_rest);
                psi.push(complement[i]);
                psi.push(o);
                out.push(RawTerm {
                    coeff,
                    word,
                    psi,
                    ppow: Vec::new(),
                });
            }
        }
        out
    }

    /// Yp * w * g_m(imgs) * brackets (left) or with w appended to each f_T
    /// word (right).
    fn worded_instance(
        &self,
        yword: &[Var],
        imgs: &[Var],
        psi_rest: &[Var],
        w: Var,
        left: bool,
    ) -> Vec<RawTerm> {
        let inv_neg2 = self.field.inv(self.field.from_int(-2)).expect("p > 2");
        let m = imgs.len() as u32;
        let mut out = Vec::new();
        for mask in 0u32..(1 << m) {
            if mask.count_ones() % 2 != 0 {
                continue;
            }
            let (t_letters, complement) = split_by_mask(imgs, mask);
            let coeff = self.field.pow(inv_neg2, (t_letters.len() / 2) as u64);
            let mut word = yword.to_vec();
            if left {
                word.push(w);
                word.extend_from_slice(&complement);
            } else {
                word.extend_from_slice(&complement);
                word.push(w);
            }
            let mut psi = t_letters.clone();
            psi.extend_from_slice(psi_rest);
            out.push(RawTerm {
                coeff,
                word,
                psi,
                ppow: Vec::new(),
            });
        }
        out
    }

    /// Straightens an instance and runs phase A plus the saturation kill,
    /// returning its accumulator as a relation row.
    fn reduce_instance(
        &mut self,
        raw: Vec<RawTerm>,
        k: u32,
    ) -> BTreeMap<(PMono, PrTerm), FieldScalar> {
        let mut sub = Engine::new(self.spec, false);
        let mut work = raw;
        sub.straighten_all(&mut work);
        loop {
            let mut again: Vec<RawTerm> = Vec::new();
            for (term, mono, coeff) in sub.take_entries() {
                sub.tick();
                let st = super::term_stats(&term);
                if st.deg_y_psi > k {
                    continue;
                }
                if st.deg_z_beg + st.deg_y_psi >= k + 2 {
                    let m = k - st.deg_y_psi + 2;
                    again.extend(sub.zbeg_rewrite(&term, &mono, coeff, m));
                    continue;
                }
                if kills_identically(&term, sub.p, k) {
                    continue;
                }
                sub.accumulate(raw_of(&term, &mono, coeff));
            }
            if again.is_empty() {
                break;
            }
            sub.straighten_all(&mut again);
        }
        self.steps = self.steps.saturating_add(sub.steps);
        let mut row = BTreeMap::new();
        for (term, mono, coeff) in sub.take_entries() {
            row.insert((mono, term), coeff);
        }
        row
    }
}

fn find_descent(word: &[Var]) -> Option<usize> {
    word.windows(2).position(|w| w[0] > w[1])
}

fn word_to_beg(word: &[Var]) -> Vec<(Var, u32)> {
    let mut out: Vec<(Var, u32)> = Vec::new();
    for &v in word {
        if let Some(last) = out.last_mut() {
            if last.0 == v {
                last.1 += 1;
                continue;
            }
        }
        out.push((v, 1));
    }
    out
}

/// Straightens a flat bracket-letter sequence into its canonical alternating
/// form: None when a letter repeats (the product vanishes), otherwise the
/// accumulated sign and the ascending letters, paired consecutively.
pub fn straighten_psi(letters: &[Var]) -> Option<(i8, Vec<Var>)> {
    normalize_psi(letters)
}

/// Full alternation: None when a letter repeats, otherwise the sorting
/// permutation sign and the sorted letters.
fn normalize_psi(psi: &[Var]) -> Option<(i8, Vec<Var>)> {
    let mut letters = psi.to_vec();
    let mut sign = 1i8;
    for i in 1..letters.len() {
        let mut j = i;
        while j > 0 && letters[j - 1] > letters[j] {
            letters.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if letters.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((sign, letters))
}

/// Splits a slice by bitmask into (selected, complement).
fn split_by_mask(xs: &[Var], mask: u32) -> (Vec<Var>, Vec<Var>) {
    let mut sel = Vec::new();
    let mut rest = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        if mask & (1 << i) != 0 {
            sel.push(x);
        } else {
            rest.push(x);
        }
    }
    (sel, rest)
}

/// Flattened (y-word, z-block) of a term's beg.
fn split_beg(term: &PrTerm) -> (Vec<Var>, Vec<Var>) {
    let mut yword = Vec::new();
    let mut zblock = Vec::new();
    for &(v, e) in term.beg() {
        let target = if v.is_even() { &mut yword } else { &mut zblock };
        target.extend(std::iter::repeat(v).take(e as usize));
    }
    (yword, zblock)
}

fn raw_of(term: &PrTerm, mono: &PMono, coeff: FieldScalar) -> RawTerm {
    RawTerm {
        coeff,
        word: term.beg_word(),
        psi: term.psi().to_vec(),
        ppow: mono.0.clone(),
    }
}

fn raw_to_poly(t: &RawTerm, field: &FieldParams) -> FreePolynomial {
    let mut word: Vec<Var> = Vec::new();
    for &(i, e) in &t.ppow {
        word.extend(std::iter::repeat(Var::Y(i)).take(e as usize));
    }
    word.extend_from_slice(&t.word);
    let mut acc = FreePolynomial::monomial(field.clone(), Word(word), t.coeff);
    for pair in t.psi.chunks(2) {
        let br = crate::freealg::commutator(&[
            FreePolynomial::variable(field.clone(), pair[0]),
            FreePolynomial::variable(field.clone(), pair[1]),
        ])
        .expect("two arguments");
        acc = acc.mul(&br).expect("same field");
    }
    acc
}

/// Stripped multidegree of a term (beg plus psi letters).
fn multideg_of(term: &PrTerm) -> Vec<(Var, u32)> {
    let mut map: BTreeMap<Var, u32> = BTreeMap::new();
    for &(v, e) in term.beg() {
        *map.entry(v).or_insert(0) += e;
    }
    for &v in term.psi() {
        *map.entry(v).or_insert(0) += 1;
    }
    map.into_iter().collect()
}

/// Terms whose beg z-degree plus bracket y-degree hits exactly k+1.
fn at_boundary(u: &PrTerm, k: u32) -> bool {
    let st = super::term_stats(u);
    st.deg_z_beg + st.deg_y_psi == k + 1
}

/// Whether the leading beg z-variable also sits inside a bracket.
fn prz_in_psi(u: &PrTerm) -> bool {
    match super::term_stats(u).pr_z {
        Some(z) => u.psi().contains(&z),
        None => false,
    }
}

/// Boundary terms of the shape (pr_z)^(p-1) * brackets, with pr_z the only
/// beg z-variable and repeated inside a bracket, vanish identically on the
/// k-graded algebra: a nonzero evaluation would need p-1 + deg_Y(psi)
/// distinct generators among e_1..e_k, one more than the boundary allows.
fn kills_identically(u: &PrTerm, p: u32, k: u32) -> bool {
    if !at_boundary(u, k) || !prz_in_psi(u) {
        return false;
    }
    let zbeg: Vec<(Var, u32)> = u
        .beg()
        .iter()
        .copied()
        .filter(|(v, _)| !v.is_even())
        .collect();
    zbeg.len() == 1 && zbeg[0].1 == p - 1
}

/// All SS terms with the given multidegree: choose which variables
/// contribute one letter to psi (even count), the rest to beg exponents.
fn enumerate_ss_terms(key: &[(Var, u32)], p: u32) -> Vec<PrTerm> {
    let n = key.len();
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() % 2 != 0 {
            continue;
        }
        let mut beg = Vec::new();
        let mut psi = Vec::new();
        let mut ok = true;
        for (i, &(v, d)) in key.iter().enumerate() {
            let in_psi = mask & (1 << i) != 0;
            if in_psi && d == 0 {
                ok = false;
                break;
            }
            let beg_e = if in_psi { d - 1 } else { d };
            if in_psi {
                psi.push(v);
            }
            if beg_e > 0 {
                if beg_e > p - 1 {
                    ok = false;
                    break;
                }
                beg.push((v, beg_e));
            }
        }
        if ok {
            out.push(PrTerm { beg, psi });
        }
    }
    out
}
