use anyhow::Context;

use qtsvm::data::{self, Example, GeneratorOptions, NoiseScale};
use qtsvm::rng;

use crate::manifest::{beside, Clock, RunManifest};
use crate::{Cli, CliError, GenerateArgs, NoiseReading};

pub(crate) fn options(example: Example, reading: NoiseReading, theta_pos: Option<&[f64]>) -> GeneratorOptions {
    let mut opts = GeneratorOptions::for_example(example);
    let level = match opts.noise {
        NoiseScale::StdDev(s) | NoiseScale::Variance(s) => s,
    };
    opts.noise = match reading {
        NoiseReading::Std => NoiseScale::StdDev(level),
        NoiseReading::Variance => NoiseScale::Variance(level),
    };
    if let Some([lo, hi]) = theta_pos {
        opts.example2_pos_theta = (*lo, *hi);
    }
    opts
}

pub fn run(a: &GenerateArgs, cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    let clock = Clock::start();
    let seed = cli.seed.unwrap_or(0);
    if !(0.0..1.0).contains(&a.noise_ratio) {
        return Err(CliError::usage(format!(
            "--noise-ratio must be in [0, 1), got {}",
            a.noise_ratio
        )));
    }
    if a.m == 0 {
        return Err(CliError::usage("--m must be at least 1"));
    }
    let example = Example::from_index(a.example).map_err(|e| CliError::usage(e.to_string()))?;
    let opts = options(example, a.noise_reading, a.theta_pos.as_deref());
    let clean = data::generate(example, a.m, seed, &opts)?;
    let flips = data::label_noise_indices(clean.len(), a.noise_ratio, rng::derive_seed(seed, "label-noise", 0))?;
    let d = clean.flip_labels(&flips)?;
    data::write_csv(&d, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    println!(
        "wrote {} rows ({} labels flipped) to {}",
        d.len(),
        flips.len(),
        a.out.display()
    );
    RunManifest::new("generate", argv, a, seed, &clock, vec![a.out.clone()])?.save(&beside(&a.out))?;
    Ok(())
}
