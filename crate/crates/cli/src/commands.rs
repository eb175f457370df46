use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use fracident::benchmark::{self, BenchConfig, Outcome};
use fracident::estimators::{
    identify_diffusion_wave, identify_general, identify_voigt_hom, identify_voigt_inhom_caputo,
    identify_voigt_inhom_rl, wave_equation, IdentResult, InitMode, WaveKnown,
};
use fracident::fracops::Convention;
use fracident::opcalc::eliminate;
use fracident::signals::{add_white_noise, SampledSignal};
use fracident::simulate::{
    diffusion_wave_forward, singular_power, test_signal, voigt_forward, VoigtParams, WaveParams,
};

use crate::config::{
    self, BenchmarkCfg, IdentifyCfg, InitCfg, LowerCfg, Method, SimulateCfg,
};

/// Raised when the run itself worked but its verdict is negative.
#[derive(Debug)]
pub struct Rejected(pub String);

impl std::fmt::Display for Rejected {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Rejected {}

fn write_signal(path: &Path, s: &SampledSignal) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    s.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn read_signal(path: &Path) -> Result<SampledSignal> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    SampledSignal::read_csv(f).with_context(|| format!("reading {}", path.display()))
}

pub fn simulate(cfg_path: &Path, out: &Path, seed: Option<u64>) -> Result<()> {
    let mut cfg: SimulateCfg = config::load(cfg_path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if cfg.samples < 2 || !(cfg.horizon > 0.0) {
        bail!("need horizon > 0 and samples >= 2, got {} and {}", cfg.horizon, cfg.samples);
    }
    let dt = cfg.horizon / (cfg.samples - 1) as f64;
    let base = test_signal(&cfg.signal.kind(cfg.seed), cfg.horizon, dt)?;
    let (input, output) = match (&cfg.voigt, &cfg.wave) {
        (Some(v), None) => {
            let convention: Convention = v.convention.into();
            let eps = match (convention, v.init) {
                (_, None) => base,
                (Convention::Caputo, Some(e0)) => base.map(|x| x + e0),
                (Convention::RiemannLiouville, Some(p)) => {
                    base.axpy(1.0, &singular_power(p, v.alpha, dt, cfg.samples)?)?
                }
            };
            let p = VoigtParams {
                e0: v.e0,
                e1: v.e1,
                alpha: v.alpha,
                convention,
                init: v.init,
            };
            let sigma = voigt_forward(&eps, &p)?;
            (eps, sigma)
        }
        (None, Some(w)) => {
            let g = diffusion_wave_forward(&base, &WaveParams { alpha: w.alpha, c: w.c })?;
            (base, g)
        }
        _ => bail!("give exactly one of [voigt] and [wave]"),
    };
    let (input, output) = match cfg.snr_db {
        Some(snr) => (
            add_white_noise(&input, snr, cfg.seed)?,
            add_white_noise(&output, snr, cfg.seed.wrapping_add(1))?,
        ),
        None => (input, output),
    };
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_signal(&out.join("input.csv"), &input)?;
    write_signal(&out.join("output.csv"), &output)?;
    fs::write(out.join("manifest.toml"), toml::to_string(&cfg)?)?;
    println!("wrote input.csv, output.csv and manifest.toml to {}", out.display());
    Ok(())
}

fn run_identify(cfg: &IdentifyCfg, input: &SampledSignal, output: &SampledSignal) -> Result<IdentResult> {
    let opts = cfg.options.to_options();
    let mode = || match cfg.init {
        Some(InitCfg::Identify) => Ok(InitMode::Identify),
        Some(InitCfg::Eliminate) => Ok(InitMode::Eliminate),
        None => bail!("method {:?} needs init = \"identify\" or \"eliminate\"", cfg.method),
    };
    Ok(match cfg.method {
        Method::Voigt => identify_voigt_hom(input, output, &opts)?,
        Method::VoigtRl => identify_voigt_inhom_rl(input, output, mode()?, &opts)?,
        Method::VoigtCaputo => identify_voigt_inhom_caputo(input, output, mode()?, &opts)?,
        Method::Wave => {
            let known = match (cfg.distance, cfg.speed) {
                (Some(l), None) => WaveKnown::Distance(l),
                (None, Some(v)) => WaveKnown::Speed(v),
                (None, None) => WaveKnown::RatioOnly,
                _ => bail!("give at most one of distance and speed"),
            };
            identify_diffusion_wave(input, output, known, &opts)?
        }
        Method::General => {
            let model = cfg.model.as_ref().context("method general needs a [model] table")?;
            identify_general(&model.to_spec()?, input, output, &opts)?
        }
    })
}

pub fn identify(cfg_path: &Path, out: &Path) -> Result<()> {
    let cfg: IdentifyCfg = config::load(cfg_path)?;
    if cfg.model.is_some() && cfg.method != Method::General {
        bail!("[model] only applies to method = \"general\"");
    }
    let input = read_signal(&config::resolve(cfg_path, &cfg.input))?;
    let output = read_signal(&config::resolve(cfg_path, &cfg.output))?;
    let r = run_identify(&cfg, &input, &output)?;

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join("result.csv");
    let mut w = BufWriter::new(File::create(&path)?);
    r.write_csv(&mut w)?;
    w.flush()?;

    println!("t = {}", r.final_time());
    for (name, v) in r.estimates() {
        println!("{name} = {v}");
    }
    println!("coherence = {:e}", r.final_coherence());
    println!("min_sv = {:e}", r.final_min_sv());
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    if !r.is_coherent() {
        return Err(Rejected(format!(
            "coherence residual {:e} exceeds {:e}",
            r.final_coherence(),
            r.coherence_tol
        ))
        .into());
    }
    Ok(())
}

pub fn lower(cfg_path: &Path, out: Option<&Path>) -> Result<()> {
    let cfg: LowerCfg = config::load(cfg_path)?;
    let row0 = if cfg.model.is_wave() {
        wave_equation()
    } else {
        cfg.model.to_spec()?.prepare()?.stage2_row0
    };
    let e = eliminate(&row0)?;
    let mut text = String::new();
    text.push_str("grouped equation (slot per power of s):\n");
    for (tag, slot) in row0.slots() {
        text.push_str(&format!("[s^{tag}]\n{slot}\n"));
    }
    text.push_str(&format!("eliminated: det P divided by {}", e.content));
    if e.k > 0 {
        text.push_str(&format!(", times s^-{}", e.k));
    }
    text.push('\n');
    text.push_str(&format!("{}\n", e.equation));
    let monos: Vec<String> = e.equation.monomials().iter().map(ToString::to_string).collect();
    text.push_str(&format!("monomials: {}\n", monos.join(", ")));
    print!("{text}");
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("lower.txt"), &text)?;
    }
    Ok(())
}

fn bench_config(cfg: &BenchmarkCfg, seed: Option<u64>) -> BenchConfig {
    let d = BenchConfig::default();
    let t = &cfg.tolerances;
    let dt = d.tol.clone();
    BenchConfig {
        criteria: cfg.criteria.clone().unwrap_or(d.criteria),
        samples: cfg.samples.unwrap_or(d.samples),
        horizon: cfg.horizon.unwrap_or(d.horizon),
        snr_db: cfg.snr_db.unwrap_or(d.snr_db),
        seed: seed.or(cfg.seed).unwrap_or(d.seed),
        tol: benchmark::Tolerances {
            roundtrip: t.roundtrip.unwrap_or(dt.roundtrip),
            runtime: t.runtime_secs.map(Duration::from_secs_f64).unwrap_or(dt.runtime),
            ramp_spot: t.ramp_spot.unwrap_or(dt.ramp_spot),
            noisy: t.noisy.unwrap_or(dt.noisy),
            noisy_after: t.noisy_after.unwrap_or(dt.noisy_after),
            gl: t.gl.unwrap_or(dt.gl),
            oracle: t.oracle.unwrap_or(dt.oracle),
            elimination: t.elimination.unwrap_or(dt.elimination),
            caputo: t.caputo.unwrap_or(dt.caputo),
            wave_delay: t.wave_delay.unwrap_or(dt.wave_delay),
            wave_diffusion: t.wave_diffusion.unwrap_or(dt.wave_diffusion),
            homomorphism: t.homomorphism.unwrap_or(dt.homomorphism),
            cauchy: t.cauchy.unwrap_or(dt.cauchy),
            gl_weights: t.gl_weights.unwrap_or(dt.gl_weights),
            scaling: t.scaling.unwrap_or(dt.scaling),
        },
    }
}

pub fn benchmark(cfg_path: Option<&Path>, out: Option<&Path>, seed: Option<u64>) -> Result<()> {
    let cfg: BenchmarkCfg = match cfg_path {
        Some(p) => config::load(p)?,
        None => BenchmarkCfg::default(),
    };
    let outcomes: Vec<Outcome> = benchmark::run(&bench_config(&cfg, seed))?;
    let mut report = String::new();
    for o in &outcomes {
        report.push_str(&format!("{o}\n"));
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    report.push_str(&format!("{} passed, {failed} failed\n", outcomes.len() - failed));
    print!("{report}");
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("benchmark.txt"), &report)?;
    }
    if failed > 0 {
        return Err(Rejected(format!("{failed} criteria failed")).into());
    }
    Ok(())
}
