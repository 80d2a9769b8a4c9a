use anyhow::{anyhow, Context};

use qtsvm::data::{self, LabelColumn};
use qtsvm::eval::{accuracy, f1, Confusion};
use qtsvm::{Label, TrainedModel};

use crate::manifest::{beside, Clock, RunManifest};
use crate::{Cli, CliError, PredictArgs};

pub fn run(a: &PredictArgs, cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    let clock = Clock::start();
    let model = TrainedModel::load(&a.model)?;
    let n = model.dim();
    let raw = data::load_features_csv(&a.data)?;
    let (features, labels) = if raw.ncols() == n {
        (raw, None)
    } else if raw.ncols() == n + 1 {
        let d = data::load_csv(&a.data, &LabelColumn::Last, &a.positive_label)?;
        (d.features().clone(), Some(d.labels().to_vec()))
    } else {
        return Err(anyhow!(
            "{} has {} columns but the model expects n = {n} features (or {} with a trailing label column)",
            a.data.display(),
            raw.ncols(),
            n + 1
        )
        .into());
    };
    let predicted = model.predict_rows(&features)?;

    let mut w = csv::Writer::from_path(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    w.write_record(["prediction"]).context("writing predictions")?;
    for p in &predicted {
        w.write_record([p.as_i8().to_string()]).context("writing predictions")?;
    }
    w.flush().context("writing predictions")?;

    println!("{} predictions written to {}", predicted.len(), a.out.display());
    if let Some(truth) = labels {
        let c = Confusion::from_predictions(&truth, &predicted)?;
        println!("accuracy {:.6}", accuracy(&c)?);
        match f1(&c)? {
            Some(v) => println!("f1 {v:.6}"),
            None => println!("f1 NaN"),
        }
        println!(
            "positives predicted {} of {}",
            predicted.iter().filter(|&&p| p == Label::Positive).count(),
            predicted.len()
        );
    }
    RunManifest::new("predict", argv, a, cli.seed.unwrap_or(0), &clock, vec![a.out.clone()])?.save(&beside(&a.out))?;
    Ok(())
}
