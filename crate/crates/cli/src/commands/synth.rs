use std::io::Write;

use regime_seg::derived_seed;
use regime_seg::io::{
    write_labels, write_series, CorpusManifest, ManifestEntry, SeriesFormat, StandardizationScope,
};
use regime_seg::synthetic::{generate, MeanSpec, SynthConfig};
use regime_seg::Modality;

use crate::error::CliError;
use crate::{Format, SynthArgs};

fn config(args: &SynthArgs, seed: u64) -> Result<SynthConfig, CliError> {
    let modalities = args
        .modalities
        .iter()
        .map(|tag| {
            Modality::from_tag(tag.trim())
                .ok_or_else(|| CliError::Input(format!("unknown modality {tag:?}; use txt, aud or vid")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = SynthConfig {
        k_true: args.k,
        t: args.t,
        self_transition: args.self_transition,
        means: MeanSpec::Auto {
            min_separation: args.separation * args.noise,
        },
        covariance_scale: args.noise,
        modalities,
        decoupling: args.decoupling,
        seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Writes `conv000.csv`, `conv000.labels.csv`, ... and `manifest.json` into the output
/// directory, and echoes the configuration as JSON.
pub fn run(args: &SynthArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.conversations == 0 {
        return Err(CliError::Input("--conversations must be at least 1".into()));
    }
    config(args, args.seed.seed)?;
    let (format, ext) = match args.format {
        Format::Csv => (SeriesFormat::Csv, "csv"),
        Format::Json => (SeriesFormat::Json, "json"),
    };
    std::fs::create_dir_all(&args.out_dir)?;
    let mut manifest = CorpusManifest {
        conversations: Vec::new(),
        standardization_scope: StandardizationScope::PerConversation,
    };
    let mut configs = Vec::new();
    for i in 0..args.conversations {
        let cfg = config(args, derived_seed(args.seed.seed, i as u64))?;
        let (mut series, labels) = generate(&cfg)?;
        let id = format!("conv{i:03}");
        series.set_id(id.clone());
        let series_file = format!("{id}.{ext}");
        let labels_file = format!("{id}.labels.csv");
        write_series(&args.out_dir.join(&series_file), &series, format)?;
        write_labels(&args.out_dir.join(&labels_file), &labels, None)?;
        manifest.conversations.push(ManifestEntry {
            id,
            series: series_file.into(),
            labels: Some(labels_file.into()),
        });
        configs.push(cfg);
    }
    manifest.write(&args.out_dir.join("manifest.json"))?;
    writeln!(out, "{}", serde_json::to_string_pretty(&configs)?)?;
    Ok(())
}
