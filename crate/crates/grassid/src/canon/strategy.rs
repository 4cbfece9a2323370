//! Strategy registry: each ideal variant behind a common trait, constructed
//! by name at runtime.

use super::engine::{reduce_traced, Trace};
use super::gen::{gen_ideal_basis, LabeledPoly};
use super::{conforms, CanonError, CanonicalForm, IdealKind, IdealSpec, PrTerm};
use crate::field::FieldParams;
use crate::freealg::FreePolynomial;
use crate::grassmann::GradingSpec;

/// One reduction strategy: a named ideal variant with its generator families,
/// target normal-form class, and rewrite pipeline.
pub trait IdealStrategy: Send + Sync {
    fn name(&self) -> &'static str;
    fn ideal(&self) -> &IdealSpec;
    /// The grading whose identities this basis captures.
    fn grading(&self) -> GradingSpec {
        self.ideal().matching_grading()
    }
    fn generators(&self) -> Vec<LabeledPoly> {
        gen_ideal_basis(self.ideal())
    }
    /// Whether a term lies in this strategy's output class.
    fn admits(&self, u: &PrTerm) -> bool {
        conforms(u, self.ideal())
    }
    fn reduce(&self, f: &FreePolynomial) -> CanonicalForm {
        reduce_traced(f, self.ideal(), false).0
    }
    fn reduce_traced(&self, f: &FreePolynomial) -> (CanonicalForm, Trace) {
        reduce_traced(f, self.ideal(), true)
    }
}

macro_rules! strategy_impl {
    ($ty:ident, $name:literal) => {
        pub struct $ty {
            spec: IdealSpec,
        }

        impl IdealStrategy for $ty {
            fn name(&self) -> &'static str {
                $name
            }
            fn ideal(&self) -> &IdealSpec {
                &self.spec
            }
        }
    };
}

strategy_impl!(CanonicalIdeal, "I1");
strategy_impl!(AlternatingIdeal, "I2");
strategy_impl!(KStarIdeal, "I3");
strategy_impl!(KIdeal, "I4");

/// Registered strategy names, in selection order.
pub fn strategy_names() -> &'static [&'static str] {
    &["I1", "I2", "I3", "I4"]
}

/// Looks a strategy up by name; I3 and I4 take the grading parameter k.
pub fn make_strategy(
    name: &str,
    field: FieldParams,
    k: Option<u32>,
) -> Result<Box<dyn IdealStrategy>, CanonError> {
    match name {
        "I1" | "i1" => Ok(Box::new(CanonicalIdeal {
            spec: IdealSpec::new(IdealKind::I1, field)?,
        })),
        "I2" | "i2" => Ok(Box::new(AlternatingIdeal {
            spec: IdealSpec::new(IdealKind::I2, field)?,
        })),
        "I3" | "i3" => Ok(Box::new(KStarIdeal {
            spec: IdealSpec::new(IdealKind::I3 { k: k.unwrap_or(0) }, field)?,
        })),
        "I4" | "i4" => {
            let k = k.ok_or(CanonError::BadK)?;
            Ok(Box::new(KIdeal {
                spec: IdealSpec::new(IdealKind::I4 { k }, field)?,
            }))
        }
        other => Err(CanonError::UnknownIdeal(other.to_string())),
    }
}

/// The strategy matching an already-built spec.
pub fn strategy_for(spec: &IdealSpec) -> Box<dyn IdealStrategy> {
    let (name, k) = match spec.kind {
        IdealKind::I1 => ("I1", None),
        IdealKind::I2 => ("I2", None),
        IdealKind::I3 { k } => ("I3", Some(k)),
        IdealKind::I4 { k } => ("I4", Some(k)),
    };
    make_strategy(name, spec.field.clone(), k).expect("spec already validated")
}
