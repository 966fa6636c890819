//! Inputs shared by the benchmarks.

use std::sync::Arc;

use conespec::corpus::{self, arc};
use conespec::glue::{glue, two_copies, Glued};
use conespec::{FiniteAlgebra, SpectralContext};

/// Corpus algebra by name, in the corpus matching the context.
pub fn named(ctx: SpectralContext, name: &str) -> Arc<FiniteAlgebra> {
    let list = match ctx {
        SpectralContext::Deitmar => corpus::monoid_corpus(),
        _ => corpus::ring_corpus(),
    };
    arc(list.into_iter().find(|(n, _)| n == name).unwrap_or_else(|| panic!("no corpus algebra {name}")).1)
}

/// Two copies of `Spec R` glued along the distinguished open of its smallest proper localization.
pub fn doubled(ctx: SpectralContext, name: &str) -> Glued {
    let r = named(ctx, name);
    let k = ctx
        .finite_localizations(&r)
        .unwrap()
        .into_iter()
        .filter(|k| !k.map().is_bijective())
        .min_by_key(|k| k.target().len())
        .unwrap();
    glue(&two_copies(ctx, &r, &k)).unwrap()
}
