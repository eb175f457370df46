//! TOML run configurations. Unknown keys are rejected; relative paths are
//! taken relative to the directory of the config file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fracident::estimators::{Group, IdentOptions, ModelSpec, Regime};
use fracident::fracops::Convention;
use fracident::opcalc::{ParamSymbol, SignalId};
use fracident::simulate::SignalKind;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new(".")).join(p)
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionCfg {
    Rl,
    Caputo,
}

impl From<ConventionCfg> for Convention {
    fn from(c: ConventionCfg) -> Self {
        match c {
            ConventionCfg::Rl => Convention::RiemannLiouville,
            ConventionCfg::Caputo => Convention::Caputo,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeCfg {
    Homogeneous,
    EliminateInit,
    IdentifyInit,
}

impl From<RegimeCfg> for Regime {
    fn from(r: RegimeCfg) -> Self {
        match r {
            RegimeCfg::Homogeneous => Regime::Homogeneous,
            RegimeCfg::EliminateInit => Regime::EliminateInit,
            RegimeCfg::IdentifyInit => Regime::IdentifyInit,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SignalCfg {
    Ramp { slope: f64 },
    Sine { amplitude: f64, omega: f64 },
    SmoothStep { rise: f64 },
    PrbsSmoothed { hold: f64, seed: Option<u64> },
}

impl SignalCfg {
    pub fn kind(&self, seed: u64) -> SignalKind {
        match *self {
            SignalCfg::Ramp { slope } => SignalKind::Ramp { slope },
            SignalCfg::Sine { amplitude, omega } => SignalKind::Sine { amplitude, omega },
            SignalCfg::SmoothStep { rise } => SignalKind::SmoothStep { rise },
            SignalCfg::PrbsSmoothed { hold, seed: s } => SignalKind::PrbsSmoothed {
                hold,
                seed: s.unwrap_or(seed),
            },
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VoigtCfg {
    pub alpha: f64,
    pub e0: f64,
    pub e1: f64,
    #[serde(default = "default_convention")]
    pub convention: ConventionCfg,
    /// `eps(0)` under Caputo, `J^{1-alpha} eps(0+)` under RL.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<f64>,
}

fn default_convention() -> ConventionCfg {
    ConventionCfg::Rl
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WaveCfg {
    pub alpha: f64,
    pub c: f64,
}

/// `simulate`: also the layout of the manifest written next to the data.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SimulateCfg {
    pub horizon: f64,
    pub samples: usize,
    /// Omitted: noise-free.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    pub signal: SignalCfg,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub voigt: Option<VoigtCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wave: Option<WaveCfg>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OptionsCfg {
    pub n_extra: Option<u32>,
    pub theta2_extra: Option<u32>,
    pub t_min: Option<f64>,
    pub stride: Option<usize>,
    pub min_rcond: Option<f64>,
    pub coherence_tol: Option<f64>,
}

impl OptionsCfg {
    pub fn to_options(&self) -> IdentOptions {
        let d = IdentOptions::default();
        IdentOptions {
            n_extra: self.n_extra.or(d.n_extra),
            theta2_extra: self.theta2_extra.unwrap_or(d.theta2_extra),
            t_min: self.t_min.or(d.t_min),
            stride: self.stride.unwrap_or(d.stride),
            min_rcond: self.min_rcond.unwrap_or(d.min_rcond),
            coherence_tol: self.coherence_tol.unwrap_or(d.coherence_tol),
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GroupCfg {
    /// Order: `"0"`, `"1/2"`, or a symbol such as `"alpha"`.
    pub tag: String,
    /// Coefficient of the output, a Laurent polynomial in `s`.
    pub a: String,
    /// Coefficient of the input.
    pub b: String,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Voigt,
    Wave,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelCfg {
    pub preset: Option<Preset>,
    pub groups: Option<Vec<GroupCfg>>,
    pub convention: Option<ConventionCfg>,
    pub regime: Option<RegimeCfg>,
    pub theta2: Option<Vec<String>>,
    pub order_bound: Option<u32>,
    pub normalize_by: Option<String>,
    pub input_name: Option<String>,
    pub output_name: Option<String>,
}

impl ModelCfg {
    pub fn is_wave(&self) -> bool {
        self.preset == Some(Preset::Wave)
    }

    pub fn to_spec(&self) -> Result<ModelSpec> {
        let mut m = match (self.preset, &self.groups) {
            (Some(Preset::Wave), _) => bail!("the wave preset is not a grouped input/output model"),
            (Some(Preset::Voigt), None) => ModelSpec::voigt(),
            (Some(Preset::Voigt), Some(_)) => bail!("give either preset or groups, not both"),
            (None, Some(groups)) => {
                let groups = groups
                    .iter()
                    .map(|g| Group::parse(&g.tag, &g.a, &g.b))
                    .collect::<fracident::Result<Vec<_>>>()?;
                ModelSpec::new(groups)
            }
            (None, None) => bail!("model needs a preset or groups"),
        };
        if let Some(c) = self.convention {
            m.convention = c.into();
        }
        if let Some(r) = self.regime {
            m.regime = r.into();
        }
        if let Some(t) = &self.theta2 {
            m.theta2 = t.iter().map(ParamSymbol::new).collect();
        }
        if self.order_bound.is_some() {
            m.order_bound = self.order_bound;
        }
        if let Some(n) = &self.normalize_by {
            m.normalize_by = Some(ParamSymbol::new(n));
        }
        if let Some(s) = &self.input_name {
            m.input = SignalId::new(s);
        }
        if let Some(s) = &self.output_name {
            m.output = SignalId::new(s);
        }
        m.validate()?;
        Ok(m)
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Voigt,
    VoigtRl,
    VoigtCaputo,
    Wave,
    General,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum InitCfg {
    Identify,
    Eliminate,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct IdentifyCfg {
    pub method: Method,
    /// Input signal CSV (strain, or `h` for the wave method).
    pub input: PathBuf,
    /// Output signal CSV (stress, or `g`).
    pub output: PathBuf,
    pub init: Option<InitCfg>,
    pub distance: Option<f64>,
    pub speed: Option<f64>,
    #[serde(default)]
    pub options: OptionsCfg,
    pub model: Option<ModelCfg>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LowerCfg {
    pub model: ModelCfg,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TolerancesCfg {
    pub roundtrip: Option<f64>,
    pub runtime_secs: Option<f64>,
    pub ramp_spot: Option<f64>,
    pub noisy: Option<f64>,
    pub noisy_after: Option<f64>,
    pub gl: Option<f64>,
    pub oracle: Option<f64>,
    pub elimination: Option<f64>,
    pub caputo: Option<f64>,
    pub wave_delay: Option<f64>,
    pub wave_diffusion: Option<f64>,
    pub homomorphism: Option<f64>,
    pub cauchy: Option<f64>,
    pub gl_weights: Option<f64>,
    pub scaling: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkCfg {
    pub criteria: Option<Vec<u8>>,
    pub samples: Option<usize>,
    pub horizon: Option<f64>,
    pub snr_db: Option<f64>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: TolerancesCfg,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips() {
        let cfg: SimulateCfg = toml::from_str(
            "horizon = 2.0\nsamples = 11\n[signal]\nkind = \"prbs-smoothed\"\nhold = 0.5\n\
             [voigt]\nalpha = 0.5\ne0 = 2.0\ne1 = 1.0\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.voigt.as_ref().unwrap().convention, ConventionCfg::Rl);
        let back: SimulateCfg = toml::from_str(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<OptionsCfg>("stride = 2\nstrid = 3\n").is_err());
        assert!(toml::from_str::<SignalCfg>("kind = \"ramp\"\nslope = 1.0\nrise = 2.0\n").is_err());
    }

    #[test]
    fn options_fall_back_to_defaults() {
        let o: OptionsCfg = toml::from_str("theta2_extra = 0\n").unwrap();
        let opts = o.to_options();
        assert_eq!(opts.theta2_extra, 0);
        assert_eq!(opts.min_rcond, IdentOptions::default().min_rcond);
    }

    #[test]
    fn model_needs_exactly_one_source() {
        assert!(ModelCfg::default().to_spec().is_err());
        let both: ModelCfg = toml::from_str(
            "preset = \"voigt\"\ngroups = [{ tag = \"0\", a = \"1\", b = \"b0\" }]\n",
        )
        .unwrap();
        assert!(both.to_spec().is_err());
        let voigt: ModelCfg = toml::from_str("preset = \"voigt\"\nregime = \"identify-init\"\n").unwrap();
        assert_eq!(voigt.to_spec().unwrap().regime, Regime::IdentifyInit);
    }

    #[test]
    fn paths_resolve_against_config_dir() {
        let base = Path::new("/cfg/run.toml");
        assert_eq!(resolve(base, Path::new("d/x.csv")), PathBuf::from("/cfg/d/x.csv"));
        assert_eq!(resolve(base, Path::new("/abs.csv")), PathBuf::from("/abs.csv"));
    }
}
