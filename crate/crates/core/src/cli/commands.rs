use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use stepsql::augment::{augment_corpus, perturb_columns, AugmentationConfig, ListingRecord, ParaphraseProvider, RuleParaphraser};
use stepsql::baseline::{Baseline, BaselineConfig, TriggerTable};
use stepsql::bridge::{build_submodels, BridgeClient};
use stepsql::eval::{ablation_matrix, split, synth_corpus, Dataset, Variant};
use stepsql::pipeline::{Pipeline, PipelineConfig};
use stepsql::records::{
    build_column_records, build_sqlgen_record, build_table_records, build_valuefill_record,
    downsample_negatives, gold_sqlgen_listing, read_corpus, write_corpus, write_jsonl,
};
use stepsql::schema::Schema;
use stepsql::sql::strip_values;
use stepsql::submodel::{ModelError, Submodels};

use super::args::{AskArgs, AugmentArgs, BuildArgs, Cli, Command, EvalArgs, Format, PipelineFlags, Subtask, SynthArgs};

const BRIDGE_TIMEOUT: Duration = Duration::from_secs(30);

/// Settings file read with `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CliConfig {
    pipeline: PipelineConfig,
    augment: AugmentationConfig,
    bridge_url: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VariantsFile {
    variant: Vec<Variant>,
}

fn need_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        bail!("{}: no such file", path.display());
    }
    Ok(())
}

fn need_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() && !p.is_dir() => bail!("{}: no such directory", p.display()),
        _ => Ok(()),
    }
}

fn load_schema(path: &Path) -> Result<Schema> {
    Schema::load(path).with_context(|| format!("loading schema {}", path.display()))
}

fn load_config(path: Option<&PathBuf>) -> Result<CliConfig> {
    let Some(path) = path else { return Ok(CliConfig::default()) };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn run(cli: Cli) -> Result<()> {
    let config = load_config(cli.config.as_ref())?;
    match cli.command {
        Command::Build(a) => build(a, &config),
        Command::Augment(a) => augment(a, &config),
        Command::Ask(a) => ask(a, &config),
        Command::Eval(a) => eval(a, &config),
        Command::Synth(a) => synth(a),
    }
}

fn build(a: BuildArgs, config: &CliConfig) -> Result<()> {
    need_file(&a.schema)?;
    need_file(&a.corpus)?;
    need_parent(&a.out)?;
    if a.perturb_columns && !matches!(a.subtask, Subtask::Column | Subtask::Sqlgen) {
        bail!("--perturb-columns applies to the column and sqlgen subtasks only");
    }
    let schema = load_schema(&a.schema)?;
    let corpus = read_corpus(&a.corpus, &schema).with_context(|| format!("reading {}", a.corpus.display()))?;
    let seed = a.seed.unwrap_or(config.augment.seed);
    let augment = AugmentationConfig { seed, ..config.augment.clone() };
    augment.validate()?;

    let perturb = |records: Vec<ListingRecord>| -> Result<Vec<ListingRecord>> {
        let mut out = records.clone();
        if a.perturb_columns {
            for (i, r) in records.iter().enumerate() {
                out.extend(perturb_columns(r, &schema, &augment, seed.wrapping_add(i as u64))?);
            }
        }
        Ok(out)
    };
    let count = match a.subtask {
        Subtask::Table => {
            let mut records: Vec<_> = corpus.iter().flat_map(|p| build_table_records(p, &schema)).collect();
            if let Some(keep) = a.keep_negatives {
                if !(0.0..=1.0).contains(&keep) {
                    bail!("--keep-negatives {keep} is not a probability");
                }
                records = downsample_negatives(records, keep, &mut ChaCha8Rng::seed_from_u64(seed));
            }
            write_jsonl(&a.out, &records)?;
            records.len()
        }
        Subtask::Column => {
            let records = corpus
                .iter()
                .flat_map(|p| build_column_records(p, &schema))
                .map(ListingRecord::Column)
                .collect();
            let records: Vec<_> = perturb(records)?
                .into_iter()
                .filter_map(|r| match r {
                    ListingRecord::Column(c) => Some(c),
                    ListingRecord::SqlGen(_) => None,
                })
                .collect();
            write_jsonl(&a.out, &records)?;
            records.len()
        }
        Subtask::Sqlgen => {
            let records = corpus
                .iter()
                .map(|p| build_sqlgen_record(p, &schema, &gold_sqlgen_listing(p, &schema)).map(ListingRecord::SqlGen))
                .collect::<Result<Vec<_>, _>>()?;
            let records: Vec<_> = perturb(records)?
                .into_iter()
                .filter_map(|r| match r {
                    ListingRecord::SqlGen(s) => Some(s),
                    ListingRecord::Column(_) => None,
                })
                .collect();
            write_jsonl(&a.out, &records)?;
            records.len()
        }
        Subtask::Valuefill => {
            let records = corpus
                .iter()
                .map(|p| {
                    let (templated, values) = strip_values(&p.gold_sql);
                    build_valuefill_record(p, &templated, &values)
                })
                .collect::<Result<Vec<_>, _>>()?;
            write_jsonl(&a.out, &records)?;
            records.len()
        }
    };
    println!("wrote {count} records to {}", a.out.display());
    Ok(())
}

fn augment(a: AugmentArgs, config: &CliConfig) -> Result<()> {
    need_file(&a.schema)?;
    need_file(&a.corpus)?;
    need_parent(&a.out)?;
    let schema = load_schema(&a.schema)?;
    let corpus = read_corpus(&a.corpus, &schema).with_context(|| format!("reading {}", a.corpus.display()))?;
    let mut cfg = config.augment.clone();
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if a.multiplier.is_some() {
        cfg.multiplier = a.multiplier;
    }
    cfg.keywords &= !a.no_keywords;
    cfg.paraphrase &= !a.no_paraphrase;
    let bridge_url = a.bridge_url.as_ref().or(config.bridge_url.as_ref());
    let provider: Box<dyn ParaphraseProvider> = match bridge_url {
        Some(url) => Box::new(BridgeClient::http(url, BRIDGE_TIMEOUT)),
        None => Box::new(RuleParaphraser),
    };
    let out = augment_corpus(&corpus, &schema, provider.as_ref(), &cfg)?;
    let pairs = if a.only_new { &out.pairs[out.counts.original..] } else { &out.pairs[..] };
    write_corpus(&a.out, pairs)?;
    let c = out.counts;
    println!("original {}", c.original);
    println!("keywords {}", c.keywords);
    println!("paraphrase {}", c.paraphrase);
    println!("total {}", c.total());
    if let Some(m) = cfg.multiplier {
        let target = (c.original as f64 * m).round() as usize;
        if c.total() < target {
            println!("target {target} not reached: only {} candidates", c.total());
        }
    }
    println!("wrote {} pairs to {}", pairs.len(), a.out.display());
    Ok(())
}

fn pipeline_config(flags: &PipelineFlags, base: &PipelineConfig) -> Result<PipelineConfig> {
    let mut cfg = base.clone();
    if let Some(b) = flags.beam {
        cfg.beam_width = b;
    }
    if let Some(t) = flags.table_threshold {
        cfg.table_threshold = t;
    }
    if let Some(k) = flags.top_k {
        cfg.top_k = k;
    }
    if flags.no_ner {
        cfg.ner = false;
    }
    if let Some(r) = flags.restore_mode {
        cfg.restore_mode = r;
    }
    for spec in &flags.backends {
        cfg.backends.set(spec).map_err(anyhow::Error::msg)?;
    }
    cfg.validate().map_err(anyhow::Error::msg)?;
    Ok(cfg)
}

/// Builds stage backends for a pipeline configuration; the baseline follows
/// the configured generation mode.
fn model_factory(schema: &Schema, bridge: Option<BridgeClient>) -> impl Fn(&PipelineConfig) -> Result<Submodels, ModelError> + '_ {
    move |cfg| {
        let baseline = Baseline::with_config(
            schema.clone(),
            TriggerTable::default(),
            BaselineConfig { mode: cfg.mode, ..BaselineConfig::default() },
        );
        build_submodels(&cfg.backends, &baseline, bridge.as_ref())
    }
}

fn bridge_client(flag: Option<&String>, config: &CliConfig) -> Option<BridgeClient> {
    flag.or(config.bridge_url.as_ref()).map(|url| BridgeClient::http(url, BRIDGE_TIMEOUT))
}

fn ask(a: AskArgs, config: &CliConfig) -> Result<()> {
    need_file(&a.schema)?;
    let schema = load_schema(&a.schema)?;
    let cfg = pipeline_config(&a.pipeline, &config.pipeline)?;
    let models = model_factory(&schema, bridge_client(a.pipeline.bridge_url.as_ref(), config))(&cfg)?;
    let pipeline = Pipeline::new(schema, models, cfg);
    let mut stdout = std::io::stdout().lock();
    match pipeline.run(&a.question) {
        Ok(out) => {
            match a.format {
                Format::Text => writeln!(stdout, "{}", out.sql)?,
                Format::Jsonl => writeln!(
                    stdout,
                    "{}",
                    serde_json::json!({ "sql": out.sql.to_string(), "mapping": out.mapping })
                )?,
            }
            if a.verbose {
                out.trace.write_jsonl(&mut stdout)?;
            }
            Ok(())
        }
        Err(failure) => {
            if a.verbose {
                failure.trace.write_jsonl(std::io::stderr().lock())?;
            }
            Err(failure.into())
        }
    }
}

fn dataset(spec: &str, schema: &Schema) -> Result<Dataset> {
    let (name, path) = match spec.split_once('=') {
        Some((n, p)) => (n.to_string(), PathBuf::from(p)),
        None => {
            let p = PathBuf::from(spec);
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| spec.to_string());
            (stem, p)
        }
    };
    need_file(&path)?;
    let pairs = read_corpus(&path, schema).with_context(|| format!("reading {}", path.display()))?;
    Ok(Dataset { name, pairs })
}

fn eval(a: EvalArgs, config: &CliConfig) -> Result<()> {
    need_file(&a.schema)?;
    if let Some(v) = &a.variants {
        need_file(v)?;
    }
    if let Some(out) = &a.out {
        need_parent(out)?;
    }
    let schema = load_schema(&a.schema)?;
    let mut datasets = a.corpora.iter().map(|c| dataset(c, &schema)).collect::<Result<Vec<_>>>()?;
    if let Some(ratio) = a.split {
        for d in &mut datasets {
            d.pairs = split(&d.pairs, ratio, a.seed)?.1;
        }
    }
    let variants = match &a.variants {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str::<VariantsFile>(&text)
                .with_context(|| format!("parsing {}", path.display()))?
                .variant
        }
        None => vec![Variant { name: "default".into(), config: pipeline_config(&a.pipeline, &config.pipeline)? }],
    };
    let bridge = bridge_client(a.pipeline.bridge_url.as_ref(), config);
    let report = ablation_matrix(&variants, &datasets, &schema, model_factory(&schema, bridge))?;
    let text = report.render_text();
    let rendered = match a.format {
        Format::Text => text.clone(),
        Format::Jsonl => report.render_jsonl(),
    };
    match &a.out {
        Some(out) => {
            fs::write(out, &rendered).with_context(|| format!("writing {}", out.display()))?;
            print!("{text}");
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    need_file(&a.schema)?;
    need_parent(&a.out)?;
    let typo_out = a.typo_out.clone().unwrap_or_else(|| {
        let stem = a.out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        a.out.with_file_name(format!("{stem}.typo.jsonl"))
    });
    need_parent(&typo_out)?;
    let schema = load_schema(&a.schema)?;
    let corpus = synth_corpus(&schema, a.n, a.seed)?;
    write_corpus(&a.out, &corpus.clean)?;
    write_corpus(&typo_out, &corpus.typo)?;
    println!("clean {} -> {}", corpus.clean.len(), a.out.display());
    println!("typo {} -> {}", corpus.typo.len(), typo_out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let flags = PipelineFlags {
            beam: Some(8),
            no_ner: true,
            restore_mode: Some(false),
            backends: vec!["all=bridge".into(), "valuefill=baseline".into()],
            ..PipelineFlags::default()
        };
        let cfg = pipeline_config(&flags, &PipelineConfig::default()).unwrap();
        assert_eq!(cfg.beam_width, 8);
        assert!(!cfg.ner && !cfg.restore_mode);
        assert!(cfg.backends.uses_bridge());
        assert_eq!(cfg.backends.valuefill, stepsql::pipeline::Backend::Baseline);
        let bad = PipelineFlags { top_k: Some(0), ..PipelineFlags::default() };
        assert!(pipeline_config(&bad, &PipelineConfig::default()).is_err());
    }

    #[test]
    fn config_file_sections() {
        let cfg: CliConfig = toml::from_str("bridge_url = \"http://x\"\n[pipeline]\nbeam_width = 2\n[augment]\nmultiplier = 5.0\n").unwrap();
        assert_eq!(cfg.pipeline.beam_width, 2);
        assert_eq!(cfg.augment.multiplier, Some(5.0));
        assert!(toml::from_str::<CliConfig>("nonsense = 1").is_err());
    }
}
