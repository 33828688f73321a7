//! Monte Carlo SER campaigns, baselines and result files.

mod campaign;
mod config;
mod mlse;
mod records;
pub mod selftest;

use num_complex::Complex64;

pub use campaign::{
    flat_fading_reference, qpsk_rayleigh_ser, run_campaign, variants, CampaignOutput, CampaignSummary, PointEstimate,
    Variant, BLOCK,
};
pub use config::{CampaignConfig, ProfileKind, SimScheme, MAX_MLSE_MEMORY};
pub use mlse::{mlse_viterbi, sequence_metric, TrellisState};
pub use records::{
    csv_string, emit_csv, emit_plot_data, parse_csv, plot_data_string, write_csv, SerRecord, CSV_HEADER,
};

use crate::error::{Error, Result};

/// Parse `"re,im"` into a complex number.
pub fn parse_complex_arg(s: &str) -> Result<Complex64> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("expected re,im, got {s:?}")))?;
    let part = |t: &str| -> Result<f64> {
        let v: f64 = t
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad number {t:?} in {s:?}")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Parse(format!("non-finite component in {s:?}")))
        }
    };
    Ok(Complex64::new(part(re)?, part(im)?))
}
