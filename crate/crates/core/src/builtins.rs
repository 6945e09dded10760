//! Named canonical automata.
//!
//! Weyl automata use their variant names (`weyl-1d`, `bcc-a-plus`, ...).
//! Dirac automata prefix a Weyl name with `dirac-`, e.g. `dirac-bcc-a-plus`.

use crate::automaton::AutomatonDescriptor;
use crate::dirac::{dirac_descriptor, DiracDescriptor};
use crate::error::{QcaError, Result};
use crate::weyl::{self, WeylVariant};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    Weyl(WeylVariant),
    Dirac(DiracDescriptor),
}

impl Builtin {
    /// `theta` applies to the 2D Weyl family and `mass` to Dirac names.
    pub fn from_name(name: &str, theta: f64, mass: f64) -> Result<Self> {
        let unknown = || QcaError::InvalidDescriptor(format!("unknown built-in automaton `{name}`"));
        match name.strip_prefix("dirac-") {
            Some(rest) => {
                let w = WeylVariant::from_name(rest, theta).ok_or_else(unknown)?;
                Ok(Builtin::Dirac(DiracDescriptor::new(w, mass)?))
            }
            None => Ok(Builtin::Weyl(WeylVariant::from_name(name, theta).ok_or_else(unknown)?)),
        }
    }

    pub fn names() -> Vec<String> {
        let mut out: Vec<String> = WeylVariant::NAMES.iter().map(|s| s.to_string()).collect();
        out.extend(WeylVariant::NAMES.iter().map(|s| format!("dirac-{s}")));
        out
    }

    pub fn name(&self) -> String {
        match self {
            Builtin::Weyl(w) => w.name().to_string(),
            Builtin::Dirac(d) => format!("dirac-{}", d.weyl.name()),
        }
    }

    pub fn weyl(&self) -> WeylVariant {
        match self {
            Builtin::Weyl(w) => *w,
            Builtin::Dirac(d) => d.weyl,
        }
    }

    pub fn dimension(&self) -> usize {
        self.weyl().dimension()
    }

    pub fn descriptor(&self) -> AutomatonDescriptor {
        match self {
            Builtin::Weyl(w) => weyl::descriptor(w),
            Builtin::Dirac(d) => dirac_descriptor(d),
        }
    }
}
