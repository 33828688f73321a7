//! Pole structure of the inverse filter, two-path closed forms and dense
//! reference computations.

mod oracle;
mod pfe;
mod poly;
mod roots;
mod two_path;

use std::io::Write;

pub use oracle::{block_circulant, dense_equivalence_oracle};
pub use pfe::{
    edge_decay_rate, gamma_closed_form, gamma_from_bank, gamma_sequence, gamma_with_fallback, partial_fraction,
    DecayRates, GammaFallback, PartialFractionExpansion, DISTINCT_POLE_TOL, UNIT_CIRCLE_TOL,
};
pub use poly::{build_r, unit_circle_min_det, Polynomial, SelfReciprocalPoly};
pub use roots::{roots, RootSet, PAIRING_TOL, ROOT_RESIDUAL_TOL};
pub use two_path::{
    mmse_root_exclusion_mc, mmse_root_exclusion_prob, p_epsilon, p_epsilon_mc, random_two_path, two_path, McEstimate,
    TwoPathAnalysis, TwoPathOutcome,
};

use crate::error::Result;

/// Header of the pole table.
pub const POLE_TABLE_HEADER: [&str; 5] = ["index", "re", "im", "magnitude", "pair_index"];

/// Write one row per root; `pair_index` is empty for an unpaired root.
pub fn write_pole_table<W: Write>(set: &RootSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(POLE_TABLE_HEADER)?;
    for (i, (r, pair)) in set.roots.iter().zip(&set.pairing).enumerate() {
        w.write_record([
            i.to_string(),
            format!("{:.15e}", r.re),
            format!("{:.15e}", r.im),
            format!("{:.15e}", r.norm()),
            pair.map_or_else(String::new, |j| j.to_string()),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
