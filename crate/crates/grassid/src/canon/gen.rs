//! Generator constructions: the f_T / r_T products, the g_m sums, and the
//! full generator list of each identity basis.

use super::{CanonError, IdealKind, IdealSpec};
use crate::field::FieldParams;
use crate::freealg::{commutator, FreePolynomial, Var, Word};

/// A generator together with a short label for reports.
#[derive(Debug, Clone)]
pub struct LabeledPoly {
    pub label: String,
    pub poly: FreePolynomial,
}

fn zvar(field: &FieldParams, i: u32) -> FreePolynomial {
    FreePolynomial::variable(field.clone(), Var::Z(i))
}

fn yvar(field: &FieldParams, i: u32) -> FreePolynomial {
    FreePolynomial::variable(field.clone(), Var::Y(i))
}

fn check_partition(m: u32, t: &[u32], want_even: bool) -> Result<Vec<u32>, CanonError> {
    for w in t.windows(2) {
        if w[0] >= w[1] {
            return Err(CanonError::BadPartition { m });
        }
    }
    if t.iter().any(|&j| j == 0 || j > m) {
        return Err(CanonError::BadPartition { m });
    }
    if want_even != (t.len() % 2 == 0) {
        return Err(CanonError::BadPartition { m });
    }
    Ok((1..=m).filter(|i| !t.contains(i)).collect())
}

/// f_T(z_1..z_m) = z_{i_1}...z_{i_l} [z_{j_1},z_{j_2}]...[z_{j_{t-1}},z_{j_t}]
/// where T = (j_1 < ... < j_t) has even size and (i_r) is the complement.
pub fn gen_ft(field: &FieldParams, m: u32, t: &[u32]) -> Result<FreePolynomial, CanonError> {
    let complement = check_partition(m, t, true)?;
    let word = Word(complement.into_iter().map(Var::Z).collect());
    let mut acc = FreePolynomial::monomial(field.clone(), word, field.one());
    for pair in t.chunks(2) {
        let br = commutator(&[zvar(field, pair[0]), zvar(field, pair[1])])?;
        acc = acc.mul(&br)?;
    }
    Ok(acc)
}

/// r_T(y_1, z_1..z_m) = z_{i_1}...z_{i_l} [y_1,z_{j_1}][z_{j_2},z_{j_3}]...
/// where T = (j_1 < ... < j_t) has odd size.
pub fn gen_rt(field: &FieldParams, m: u32, t: &[u32]) -> Result<FreePolynomial, CanonError> {
    let complement = check_partition(m, t, false)?;
    let word = Word(complement.into_iter().map(Var::Z).collect());
    let mut acc = FreePolynomial::monomial(field.clone(), word, field.one());
    let first = commutator(&[yvar(field, 1), zvar(field, t[0])])?;
    acc = acc.mul(&first)?;
    for pair in t[1..].chunks(2) {
        let br = commutator(&[zvar(field, pair[0]), zvar(field, pair[1])])?;
        acc = acc.mul(&br)?;
    }
    Ok(acc)
}

/// Number of f_T summands in g_m: the even-size subsets of {1..m}.
pub fn gm_term_count(m: u32) -> u64 {
    if m == 0 {
        return 1;
    }
    1u64 << (m - 1)
}

/// g_m(z_1..z_m) = sum over even-size subsets T of (-2)^(-|T|/2) f_T, with
/// g_1(z) = z.
pub fn gen_gm(field: &FieldParams, m: u32) -> Result<FreePolynomial, CanonError> {
    if m == 0 {
        return Err(CanonError::BadPartition { m });
    }
    if m == 1 {
        return Ok(zvar(field, 1));
    }
    let inv_neg2 = field
        .inv(field.from_int(-2))
        .expect("p > 2 so -2 is invertible");
    let mut acc = FreePolynomial::zero(field.clone());
    // Iterate subsets of {1..m} by bitmask, keeping the even-size ones.
    for mask in 0u32..(1 << m) {
        if mask.count_ones() % 2 != 0 {
            continue;
        }
        let t: Vec<u32> = (1..=m).filter(|i| mask & (1 << (i - 1)) != 0).collect();
        let ft = gen_ft(field, m, &t)?;
        let coeff = field.pow(inv_neg2, (t.len() / 2) as u64);
        acc = acc.add(&ft.scale(coeff))?;
    }
    Ok(acc)
}

fn triple_commutator_patterns(field: &FieldParams) -> Vec<LabeledPoly> {
    let mut out = Vec::new();
    for bits in 0u8..8 {
        let v = |pos: u32| -> FreePolynomial {
            if bits & (1 << pos) == 0 {
                yvar(field, pos + 1)
            } else {
                zvar(field, pos + 1)
            }
        };
        let name = |pos: u32| -> String {
            if bits & (1 << pos) == 0 {
                format!("y{}", pos + 1)
            } else {
                format!("z{}", pos + 1)
            }
        };
        let poly = commutator(&[v(0), v(1), v(2)]).expect("three arguments");
        out.push(LabeledPoly {
            label: format!("[{},{},{}]", name(0), name(1), name(2)),
            poly,
        });
    }
    out
}

fn power_identities(field: &FieldParams) -> (LabeledPoly, LabeledPoly) {
    let p = field.p();
    let pq = p as u64 * field.q();
    let zp = LabeledPoly {
        label: format!("z1^{p}"),
        poly: zvar(field, 1).pow(p).expect("same field"),
    };
    let ypq = LabeledPoly {
        label: format!("y1^{pq} - y1^{p}"),
        poly: yvar(field, 1)
            .pow(pq as u32)
            .expect("same field")
            .sub(&yvar(field, 1).pow(p).expect("same field"))
            .expect("same field"),
    };
    (zp, ypq)
}

fn bracket_chain(field: &FieldParams, pairs: &[(Var, Var)]) -> FreePolynomial {
    let mut acc = FreePolynomial::one(field.clone());
    for &(a, b) in pairs {
        let br = commutator(&[
            FreePolynomial::variable(field.clone(), a),
            FreePolynomial::variable(field.clone(), b),
        ])
        .expect("two arguments");
        acc = acc.mul(&br).expect("same field");
    }
    acc
}

/// Concrete instances of every generator family of the basis, labelled.
pub fn gen_ideal_basis(spec: &IdealSpec) -> Vec<LabeledPoly> {
    let field = &spec.field;
    let mut out = Vec::new();
    match spec.kind {
        IdealKind::I1 => {
            out.push(LabeledPoly {
                label: "[y1,y2]".into(),
                poly: commutator(&[yvar(field, 1), yvar(field, 2)]).unwrap(),
            });
            out.push(LabeledPoly {
                label: "[y1,z2]".into(),
                poly: commutator(&[yvar(field, 1), zvar(field, 2)]).unwrap(),
            });
            out.push(LabeledPoly {
                label: "z1*z2 + z2*z1".into(),
                poly: zvar(field, 1)
                    .mul(&zvar(field, 2))
                    .unwrap()
                    .add(&zvar(field, 2).mul(&zvar(field, 1)).unwrap())
                    .unwrap(),
            });
            let (_, ypq) = power_identities(field);
            out.push(ypq);
        }
        IdealKind::I2 => {
            out.extend(triple_commutator_patterns(field));
            let (zp, ypq) = power_identities(field);
            out.push(zp);
            out.push(ypq);
        }
        IdealKind::I3 { k } => {
            out.extend(triple_commutator_patterns(field));
            let word = Word((1..=k + 1).map(Var::Z).collect());
            out.push(LabeledPoly {
                label: format!(
                    "z1*...*z{} (product of {} odd letters)",
                    k + 1,
                    k + 1
                ),
                poly: FreePolynomial::monomial(field.clone(), word, field.one()),
            });
            let (zp, ypq) = power_identities(field);
            out.push(zp);
            out.push(ypq);
        }
        IdealKind::I4 { k } => {
            if k % 2 == 1 {
                // (1): [y1,y2]...[yk,y_{k+1}]
                let pairs: Vec<_> = (0..(k + 1) / 2)
                    .map(|i| (Var::Y(2 * i + 1), Var::Y(2 * i + 2)))
                    .collect();
                out.push(LabeledPoly {
                    label: format!("family(1) k={k}"),
                    poly: bracket_chain(field, &pairs),
                });
            } else {
                // (2): [y1,y2]...[y_{k-1},y_k][y_{k+1},x], both parities of x
                let mut pairs: Vec<_> = (0..k / 2)
                    .map(|i| (Var::Y(2 * i + 1), Var::Y(2 * i + 2)))
                    .collect();
                pairs.push((Var::Y(k + 1), Var::Y(k + 2)));
                out.push(LabeledPoly {
                    label: format!("family(2) k={k} x=y{}", k + 2),
                    poly: bracket_chain(field, &pairs),
                });
                pairs.pop();
                pairs.push((Var::Y(k + 1), Var::Z(1)));
                out.push(LabeledPoly {
                    label: format!("family(2) k={k} x=z1"),
                    poly: bracket_chain(field, &pairs),
                });
            }
            // (3): g_{k-l+2}(z1..z_{k-l+2}) [y1,y2]...[y_{l-1},y_l], l even, 0 <= l <= k
            let mut l = 0;
            while l <= k {
                let m = k - l + 2;
                let g = gen_gm(field, m).unwrap();
                let pairs: Vec<_> = (0..l / 2)
                    .map(|i| (Var::Y(2 * i + 1), Var::Y(2 * i + 2)))
                    .collect();
                out.push(LabeledPoly {
                    label: format!("family(3) k={k} l={l}"),
                    poly: g.mul(&bracket_chain(field, &pairs)).unwrap(),
                });
                l += 2;
            }
            // (4): g_{k-l+2}(z..)[z_{k-l+3},y1][y2,y3]...[y_{l-1},y_l], l odd <= k
            let mut l = 1;
            while l <= k {
                let m = k - l + 2;
                let g = gen_gm(field, m).unwrap();
                let mut pairs = vec![(Var::Z(m + 1), Var::Y(1))];
                let mut i = 2;
                while i + 1 <= l {
                    pairs.push((Var::Y(i), Var::Y(i + 1)));
                    i += 2;
                }
                let cross = {
                    let mut acc = FreePolynomial::one(field.clone());
                    for &(a, b) in &pairs {
                        let br = commutator(&[
                            FreePolynomial::variable(field.clone(), a),
                            FreePolynomial::variable(field.clone(), b),
                        ])
                        .unwrap();
                        acc = acc.mul(&br).unwrap();
                    }
                    acc
                };
                out.push(LabeledPoly {
                    label: format!("family(4) k={k} l={l}"),
                    poly: g.mul(&cross).unwrap(),
                });
                l += 2;
            }
            // (5): [g_{k-l+2}(z..), y1][y2,y3]...[y_{l-1},y_l], l odd <= k
            let mut l = 1;
            while l <= k {
                let m = k - l + 2;
                let g = gen_gm(field, m).unwrap();
                let mut acc = commutator(&[g, yvar(field, 1)]).unwrap();
                let mut i = 2;
                while i + 1 <= l {
                    acc = acc
                        .mul(&commutator(&[yvar(field, i), yvar(field, i + 1)]).unwrap())
                        .unwrap();
                    i += 2;
                }
                out.push(LabeledPoly {
                    label: format!("family(5) k={k} l={l}"),
                    poly: acc,
                });
                l += 2;
            }
            // (6)-(8)
            out.extend(triple_commutator_patterns(field));
            let (zp, ypq) = power_identities(field);
            out.push(zp);
            out.push(ypq);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldParams;
    use crate::parse::parse_polynomial;

    fn f3() -> FieldParams {
        FieldParams::new(3, 1).unwrap()
    }

    #[test]
    fn ft_examples() {
        let f = f3();
        // f_empty(z1,z2) = z1 z2
        let e = gen_ft(&f, 2, &[]).unwrap();
        assert_eq!(e, parse_polynomial("z1*z2", &f).unwrap());
        // f_{(1,2)}(z1,z2) = [z1,z2]
        let b = gen_ft(&f, 2, &[1, 2]).unwrap();
        assert_eq!(b, parse_polynomial("[z1,z2]", &f).unwrap());
        // odd-size T rejected
        assert!(gen_ft(&f, 2, &[1]).is_err());
    }

    #[test]
    fn rt_example() {
        let f = f3();
        // r_{(1)}(y1; z1,z2) = z2 [y1,z1]
        let r = gen_rt(&f, 2, &[1]).unwrap();
        assert_eq!(r, parse_polynomial("z2*[y1,z1]", &f).unwrap());
    }

    #[test]
    fn gm_small() {
        let f = f3();
        assert_eq!(gen_gm(&f, 1).unwrap(), parse_polynomial("z1", &f).unwrap());
        // over GF(3), (-2)^(-1) = 1, so g_2 = z1 z2 + [z1,z2]
        let g2 = gen_gm(&f, 2).unwrap();
        assert_eq!(g2, parse_polynomial("z1*z2 + [z1,z2]", &f).unwrap());
        // over GF(5), (-2)^(-1) = inverse of 3 = 2
        let f5 = FieldParams::new(5, 1).unwrap();
        let g2 = gen_gm(&f5, 2).unwrap();
        assert_eq!(g2, parse_polynomial("z1*z2 + 2*[z1,z2]", &f5).unwrap());
    }

    #[test]
    fn gm_term_counts() {
        for m in 1..=6u32 {
            // number of even-size subsets of {1..m}
            let mut count = 0u64;
            for mask in 0u32..(1 << m) {
                if mask.count_ones() % 2 == 0 {
                    count += 1;
                }
            }
            assert_eq!(gm_term_count(m), count);
        }
    }

    #[test]
    fn basis_contents() {
        let f = f3();
        let i1 = IdealSpec::new(IdealKind::I1, f.clone()).unwrap();
        assert_eq!(gen_ideal_basis(&i1).len(), 4);

        let i3 = IdealSpec::new(IdealKind::I3 { k: 1 }, f.clone()).unwrap();
        let basis = gen_ideal_basis(&i3);
        let z1z2 = parse_polynomial("z1*z2", &f).unwrap();
        assert!(basis.iter().any(|g| g.poly == z1z2));

        // I4 k=2, l=2 includes g_2(z1,z2)[y1,y2]
        let i4 = IdealSpec::new(IdealKind::I4 { k: 2 }, f.clone()).unwrap();
        let basis = gen_ideal_basis(&i4);
        let expect = gen_gm(&f, 2)
            .unwrap()
            .mul(&parse_polynomial("[y1,y2]", &f).unwrap())
            .unwrap();
        assert!(basis.iter().any(|g| g.poly == expect));
        assert!(basis.iter().any(|g| g.label == "family(2) k=2 x=z1"));

        // I4 k=1 has no (1)/(2) beyond family(1), and l ranges shrink
        let i41 = IdealSpec::new(IdealKind::I4 { k: 1 }, f).unwrap();
        let basis = gen_ideal_basis(&i41);
        assert!(basis.iter().any(|g| g.label == "family(1) k=1"));
        assert!(basis.iter().any(|g| g.label == "family(3) k=1 l=0"));
        assert!(basis.iter().any(|g| g.label == "family(4) k=1 l=1"));
        assert!(basis.iter().any(|g| g.label == "family(5) k=1 l=1"));
    }
}
