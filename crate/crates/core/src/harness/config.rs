//! Campaign configuration, read from flat TOML key-value files.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelProfile;
use crate::equalizer::EqualizerMode;
use crate::error::{Error, Result};
use crate::txrx::Scheme;

/// What a campaign point simulates: one of the four equalized links, the
/// Viterbi baseline on the same channel, or an `L = 1` fading reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimScheme {
    OfdmCp,
    ScfdeCp,
    ScfdeNocp,
    OfdmNocp,
    Mlse,
    Flat,
}

impl SimScheme {
    pub const ALL: [SimScheme; 6] = [
        SimScheme::OfdmCp,
        SimScheme::ScfdeCp,
        SimScheme::ScfdeNocp,
        SimScheme::OfdmNocp,
        SimScheme::Mlse,
        SimScheme::Flat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SimScheme::OfdmCp => "ofdm-cp",
            SimScheme::ScfdeCp => "scfde-cp",
            SimScheme::ScfdeNocp => "scfde-nocp",
            SimScheme::OfdmNocp => "ofdm-nocp",
            SimScheme::Mlse => "mlse",
            SimScheme::Flat => "flat",
        }
    }

    /// The equalized link carried, if any.
    pub fn link(self) -> Option<Scheme> {
        match self {
            SimScheme::OfdmCp => Some(Scheme::OfdmCp),
            SimScheme::ScfdeCp => Some(Scheme::ScfdeCp),
            SimScheme::ScfdeNocp => Some(Scheme::ScfdeNocp),
            SimScheme::OfdmNocp => Some(Scheme::OfdmNocp),
            SimScheme::Mlse | SimScheme::Flat => None,
        }
    }

    /// Whether the scheme is swept over the discard depths `D`.
    pub fn uses_discard(self) -> bool {
        matches!(self, SimScheme::ScfdeNocp | SimScheme::OfdmNocp)
    }

    pub fn has_cp(self) -> bool {
        matches!(self, SimScheme::OfdmCp | SimScheme::ScfdeCp)
    }
}

impl fmt::Display for SimScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SimScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SimScheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown scheme {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    /// `h_0 + h_1 z^d`.
    TwoPath,
    /// One tap.
    Flat,
    /// `taps` equal-power taps.
    Uniform,
    /// Explicit `tap_powers`.
    Custom,
}

/// Every key of a campaign file. Missing keys take the defaults of
/// [`CampaignConfig::default`]; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CampaignConfig {
    pub schemes: Vec<SimScheme>,
    pub profile: ProfileKind,
    /// Second-path delay `d` for `two-path`.
    pub delay: usize,
    /// Tap count for `uniform`.
    pub taps: usize,
    /// Per-tap powers; required for `custom`, `[p0, p1]` for `two-path`.
    pub tap_powers: Option<Vec<f64>>,
    /// Rescale tap powers to sum to one.
    pub normalize_taps: bool,
    pub nt: usize,
    pub nr: usize,
    pub equalizer: EqualizerMode,
    /// DFT size `N`.
    pub n: usize,
    /// Prefix length `C`; defaults to `L − 1`.
    pub cp: Option<usize>,
    /// Discard depths swept by the prefix-free schemes.
    pub d_list: Vec<usize>,
    pub snr_db: Vec<f64>,
    /// Channel realizations per SNR point.
    pub frames: usize,
    /// DFT frames sharing one channel realization.
    pub frames_per_realization: usize,
    /// Stop a point once this many symbol errors are seen; 0 never stops early.
    pub min_errors: u64,
    pub seed: u64,
    pub output: Option<String>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            schemes: vec![
                SimScheme::ScfdeCp,
                SimScheme::ScfdeNocp,
                SimScheme::Mlse,
                SimScheme::Flat,
            ],
            profile: ProfileKind::TwoPath,
            delay: 1,
            taps: 2,
            tap_powers: None,
            normalize_taps: true,
            nt: 1,
            nr: 1,
            equalizer: EqualizerMode::Mmse,
            n: 512,
            cp: None,
            d_list: vec![0, 4, 8, 12, 16, 20],
            snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0],
            frames: 200,
            frames_per_realization: 4,
            min_errors: 500,
            seed: 1,
            output: None,
        }
    }
}

/// Largest trellis memory accepted for the Viterbi baseline (`4^6` states).
pub const MAX_MLSE_MEMORY: usize = 6;

impl CampaignConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// The channel ensemble described by the profile keys.
    pub fn channel_profile(&self) -> Result<ChannelProfile> {
        let mut profile = match self.profile {
            ProfileKind::TwoPath => {
                let (p0, p1) = match self.tap_powers.as_deref() {
                    None => (0.5, 0.5),
                    Some([p0, p1]) => (*p0, *p1),
                    Some(other) => {
                        return Err(Error::Config(format!(
                            "two-path tap_powers needs two entries, got {}",
                            other.len()
                        )))
                    }
                };
                ChannelProfile::two_path_mimo(self.nt, self.nr, self.delay, p0, p1)?
            }
            ProfileKind::Flat => ChannelProfile::flat(self.nt, self.nr)?,
            ProfileKind::Uniform => ChannelProfile::uniform(self.nt, self.nr, self.taps)?,
            ProfileKind::Custom => {
                let powers = self
                    .tap_powers
                    .clone()
                    .ok_or_else(|| Error::Config("custom profile needs tap_powers".into()))?;
                ChannelProfile::new(self.nt, self.nr, powers)?
            }
        };
        if self.normalize_taps {
            let total = profile.total_power();
            if total <= 0.0 {
                return Err(Error::Config("tap powers sum to zero".into()));
            }
            let scaled: Vec<f64> = profile.tap_powers().iter().map(|p| p / total).collect();
            profile = match profile.delay() {
                Some(d) => ChannelProfile::two_path_mimo(self.nt, self.nr, d, scaled[0], scaled[d])?,
                None => ChannelProfile::new(self.nt, self.nr, scaled)?,
            };
        }
        Ok(profile)
    }

    pub fn channel_len(&self) -> Result<usize> {
        Ok(self.channel_profile()?.taps())
    }

    /// Prefix length, `L − 1` unless set.
    pub fn prefix_len(&self) -> Result<usize> {
        Ok(match self.cp {
            Some(c) => c,
            None => self.channel_len()? - 1,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.schemes.is_empty() {
            return fail("schemes must not be empty".into());
        }
        if self.snr_db.is_empty() {
            return fail("snr_db grid must not be empty".into());
        }
        if self.snr_db.iter().any(|s| s.is_nan()) {
            return fail("snr_db entries must be numbers".into());
        }
        if self.frames == 0 || self.frames_per_realization == 0 {
            return fail("frames and frames_per_realization must be at least 1".into());
        }
        let l = self.channel_len()?;
        if self.n < l {
            return fail(format!("DFT size {} is shorter than the channel length {l}", self.n));
        }
        let cp = self.prefix_len()?;
        if self.schemes.iter().any(|s| s.has_cp()) && cp + 1 < l {
            return fail(format!(
                "prefix length {cp} is shorter than the channel memory {}",
                l - 1
            ));
        }
        if cp > self.n {
            return fail(format!("prefix length {cp} exceeds the DFT size {}", self.n));
        }
        if self.schemes.iter().any(|s| s.uses_discard()) {
            if self.d_list.is_empty() {
                return fail("d_list must not be empty for prefix-free schemes".into());
            }
            if let Some(d) = self.d_list.iter().find(|&&d| 2 * d >= self.n) {
                return fail(format!(
                    "discard depth {d} leaves no interior in a {}-point window",
                    self.n
                ));
            }
        }
        if self.schemes.contains(&SimScheme::OfdmNocp)
            && self.d_list.iter().any(|&d| d > 0)
            && self.frames_per_realization < 3
        {
            return fail("ofdm-nocp with D > 0 needs frames_per_realization >= 3".into());
        }
        if self.schemes.contains(&SimScheme::Mlse) {
            if self.nt != 1 || self.nr != 1 {
                return fail("the mlse baseline is SISO only".into());
            }
            if l - 1 > MAX_MLSE_MEMORY {
                return fail(format!("mlse memory {} exceeds {MAX_MLSE_MEMORY}", l - 1));
            }
        }
        if self.equalizer == EqualizerMode::Mmse && self.snr_db.iter().any(|s| s.is_infinite()) {
            return fail("mmse needs a finite SNR".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = CampaignConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.channel_len().unwrap(), 2);
        assert_eq!(cfg.prefix_len().unwrap(), 1);
        assert_eq!(CampaignConfig::from_toml_str("").unwrap(), cfg);
    }

    #[test]
    fn roundtrip_through_toml() {
        let cfg = CampaignConfig {
            schemes: vec![SimScheme::OfdmNocp, SimScheme::Flat],
            profile: ProfileKind::Uniform,
            taps: 3,
            nt: 2,
            nr: 2,
            output: Some("out.csv".into()),
            ..CampaignConfig::default()
        };
        assert_eq!(CampaignConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }

    #[test]
    fn parses_flat_keys() {
        let cfg = CampaignConfig::from_toml_str(
            "schemes = [\"scfde-cp\", \"ofdm-nocp\"]\nprofile = \"two-path\"\ndelay = 3\nequalizer = \"zf\"\nn = 64\nd_list = [0, 8]\nsnr_db = [10.0, 20.0]\nframes = 5\nseed = 42\n",
        )
        .unwrap();
        assert_eq!(cfg.delay, 3);
        assert_eq!(cfg.equalizer, EqualizerMode::Zf);
        assert_eq!(cfg.channel_len().unwrap(), 4);
        assert_eq!(cfg.prefix_len().unwrap(), 3);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "unknown_key = 1",
            "schemes = [\"qam\"]",
            "snr_db = []",
            "frames = 0",
            "n = 1",
            "cp = 0\nschemes = [\"scfde-cp\"]",
            "d_list = [256]",
            "schemes = [\"mlse\"]\nnt = 2\nnr = 2",
            "schemes = [\"mlse\"]\nprofile = \"uniform\"\ntaps = 9",
            "profile = \"custom\"",
            "tap_powers = [1.0]",
            "schemes = [\"ofdm-nocp\"]\nframes_per_realization = 2",
            "snr_db = [inf]",
            "nt = 2\nnr = 1",
            "n = \"big\"",
        ] {
            assert!(
                matches!(CampaignConfig::from_toml_str(text), Err(Error::Config(_))),
                "{text}"
            );
        }
        assert!(CampaignConfig::from_toml_str("snr_db = [inf]\nequalizer = \"zf\"").is_ok());
    }

    #[test]
    fn tap_normalization() {
        let cfg = CampaignConfig {
            tap_powers: Some(vec![2.0, 6.0]),
            delay: 2,
            ..CampaignConfig::default()
        };
        assert_eq!(cfg.channel_profile().unwrap().tap_powers(), &[0.25, 0.0, 0.75]);
        let raw = CampaignConfig {
            normalize_taps: false,
            ..cfg
        };
        assert_eq!(raw.channel_profile().unwrap().tap_powers(), &[2.0, 0.0, 6.0]);
    }
}
