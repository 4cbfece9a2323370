use grassid::canon::{reduce, IdealKind, IdealSpec};
use grassid::field::FieldParams;
use grassid::freealg::{evaluate, ElementAssignment, FreePolynomial, Var, Word};
use grassid::grassmann::{GradingSpec, GrassmannAlgebra};
use grassid::parse::parse_polynomial;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn random_assignment(
    alg: &GrassmannAlgebra,
    grading: GradingSpec,
    vars: &[Var],
    rng: &mut ChaCha8Rng,
) -> ElementAssignment {
    let mut a = ElementAssignment::new(grading);
    let scalars: Vec<_> = alg.field().enumerate().collect();
    for &v in vars {
        let blades = alg.homogeneous_blades(grading, v.parity(), 6);
        let mut by_wt: BTreeMap<usize, Vec<_>> = BTreeMap::new();
        for &b in &blades {
            by_wt.entry(b.len()).or_default().push(b);
        }
        let strata: Vec<_> = by_wt.values().collect();
        let mut terms = Vec::new();
        for _ in 0..8 {
            let s = strata[rng.gen_range(0..strata.len())];
            let b = s[rng.gen_range(0..s.len())];
            terms.push((b, scalars[rng.gen_range(0..scalars.len())]));
        }
        a.assign(v, alg.from_terms(terms).unwrap(), alg).unwrap();
    }
    a
}

fn check_sound(src: &str, kind: IdealKind, n: u16, trials: u32) {
    let f = FieldParams::new(3, 1).unwrap();
    let spec = IdealSpec::new(kind, f.clone()).unwrap();
    let p = parse_polynomial(src, &f).unwrap();
    let r = reduce(&p, &spec);
    println!("{kind} reduce({src}) = {r}");
    let expanded = r.to_free_polynomial();
    let grading = spec.matching_grading();
    let alg = GrassmannAlgebra::new(f.clone(), n).unwrap();
    let vars: Vec<Var> = p.variables().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut fails = 0;
    for _ in 0..trials {
        let a = random_assignment(&alg, grading, &vars, &mut rng);
        let lhs = evaluate(&p, &a, &alg).unwrap();
        let rhs = evaluate(&expanded, &a, &alg).unwrap();
        if lhs != rhs {
            fails += 1;
        }
    }
    println!("  soundness fails: {fails}/{trials}");
}

#[test]
fn stubborn_soundness() {
    // multidegree z1^3 z2 z3 inputs
    check_sound("z1*z3*z1*z2*z1", IdealKind::I4 { k: 2 }, 10, 200);
    check_sound("z1*z1*z3*z1*z2", IdealKind::I4 { k: 2 }, 10, 200);
    check_sound("z2*z1*z1*z1*z3", IdealKind::I4 { k: 2 }, 10, 200);
    check_sound("z1*z1*y1*z1", IdealKind::I4 { k: 2 }, 10, 200);
    check_sound("z1*z1*z2*y1*z1", IdealKind::I4 { k: 3 }, 10, 200);
    check_sound("y2*z1*z3*z1*z2*z1", IdealKind::I4 { k: 2 }, 12, 100);
}

#[test]
fn heavy_random_soundness_i42() {
    let f = FieldParams::new(3, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(123);
    let var_sets: Vec<Vec<Var>> = vec![
        vec![Var::Y(1), Var::Z(1), Var::Z(2), Var::Z(3)],
        vec![Var::Z(1), Var::Z(2), Var::Z(3), Var::Z(4)],
    ];
    for kind in [IdealKind::I4 { k: 2 }, IdealKind::I4 { k: 3 }] {
        let spec = IdealSpec::new(kind, f.clone()).unwrap();
        let grading = spec.matching_grading();
        let alg = GrassmannAlgebra::new(f.clone(), 10).unwrap();
        let mut fails = 0;
        for i in 0..60 {
            let vars = &var_sets[i % 2];
            let mut p = FreePolynomial::zero(f.clone());
            for _ in 0..rng.gen_range(1..=6) {
                let len = rng.gen_range(0..=6);
                let w = Word((0..len).map(|_| vars[rng.gen_range(0..vars.len())]).collect());
                p = p
                    .add(&FreePolynomial::monomial(
                        f.clone(),
                        w,
                        f.from_int(rng.gen_range(1..3)),
                    ))
                    .unwrap();
            }
            let r = reduce(&p, &spec).to_free_polynomial();
            for _ in 0..20 {
                let a = random_assignment(&alg, grading, vars, &mut rng);
                if evaluate(&p, &a, &alg).unwrap() != evaluate(&r, &a, &alg).unwrap() {
                    fails += 1;
                    println!("UNSOUND {kind}: {p}");
                    break;
                }
            }
        }
        println!("{kind}: heavy soundness fails = {fails}/60");
    }
}
