use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use grasp_core::config::{parse_key_list, ConfigOverrides};
use grasp_core::corpus::{ingest_pretagged, ingest_raw, read_pretagged, Augmenter};
use grasp_core::{fit, Example, Label, MetricSpec, MinerConfig, ResultBundle, Token, Vectorizer};

#[derive(Debug, Parser)]
#[command(name = "grasp", version, about = "Mine readable token patterns that separate two sets of texts")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn log_level(&self) -> &'static str {
        match self.verbose {
            0 => "warn",
            1 => "info",
            _ => "debug",
        }
    }
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Mine patterns from positive and negative examples.
    Extract(ExtractArgs),
    /// Print the English meaning of bundle patterns.
    Translate(TranslateArgs),
    /// Write one ternary feature row per input text.
    Vectorize(VectorizeArgs),
    /// Serve the report API for a bundle.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Positive examples (`.jsonl` pre-tagged, otherwise one text per line).
    #[arg(long)]
    pub pos: PathBuf,
    #[arg(long)]
    pub neg: PathBuf,
    /// `key = value` configuration file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub num_patterns: Option<usize>,
    #[arg(long)]
    pub gaps_allowed: Option<usize>,
    #[arg(long)]
    pub window_size: Option<usize>,
    #[arg(long)]
    pub alphabet_size: Option<usize>,
    #[arg(long)]
    pub min_coverage: Option<f64>,
    /// information_gain, precision or f_beta:<beta>.
    #[arg(long)]
    pub metric: Option<MetricSpec>,
    /// Standard attributes to keep, e.g. TEXT,POS,NER,SENTIMENT.
    #[arg(long)]
    pub attributes: Option<String>,
    #[arg(long)]
    pub max_slots: Option<usize>,
    #[arg(long)]
    pub beam_width: Option<usize>,
    /// Lexicon attribute, KEY=path to a word<TAB>value file. Repeatable.
    #[arg(long, value_name = "KEY=PATH")]
    pub lexicon: Vec<String>,
    /// Description template for a custom key, KEY=TEMPLATE. Repeatable.
    #[arg(long, value_name = "KEY=TEMPLATE")]
    pub describe: Vec<String>,
    /// Custom keys that may occur several times on one token.
    #[arg(long, value_name = "KEY[,KEY...]")]
    pub multi_valued: Vec<String>,
    /// Read inputs as pre-tagged JSON lines whatever their extension.
    #[arg(long)]
    pub pretagged: bool,
    #[arg(long)]
    pub out_json: PathBuf,
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TranslateArgs {
    #[arg(long)]
    pub json: PathBuf,
    /// Only this pattern (1-based).
    #[arg(long)]
    pub rank: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VectorizeArgs {
    #[arg(long)]
    pub json: PathBuf,
    /// One text per line, or pre-tagged JSON lines.
    #[arg(long)]
    pub texts: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub pretagged: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub json: PathBuf,
    #[arg(long, env = "GRASP_ADDR", default_value = "127.0.0.1:8000")]
    pub addr: String,
    /// Directory of explorer assets served at `/`.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract(a) => extract(&a),
        Command::Translate(a) => translate(&a, &mut std::io::stdout().lock()),
        Command::Vectorize(a) => vectorize(&a),
        Command::Serve(a) => serve(&a),
    }
}

fn is_pretagged(path: &Path, forced: bool) -> bool {
    forced || matches!(path.extension().and_then(|e| e.to_str()), Some("jsonl" | "json"))
}

fn flag_overrides(a: &ExtractArgs) -> Result<ConfigOverrides> {
    let cwd = Path::new("");
    let mut o = ConfigOverrides {
        num_patterns: a.num_patterns,
        alphabet_size: a.alphabet_size,
        max_slots: a.max_slots,
        gaps_allowed: a.gaps_allowed.map(Some),
        window_size: a.window_size,
        min_coverage: a.min_coverage,
        metric: a.metric,
        beam_width: a.beam_width,
        include_standard: a.attributes.as_deref().map(parse_key_list),
        ..ConfigOverrides::default()
    };
    for v in &a.lexicon {
        o.set("lexicon", v, cwd)?;
    }
    for v in &a.describe {
        o.set("describe", v, cwd)?;
    }
    for v in &a.multi_valued {
        o.set("multi_valued", v, cwd)?;
    }
    Ok(o)
}

/// Configuration file first, then flags.
pub fn resolve_config(a: &ExtractArgs) -> Result<MinerConfig> {
    let mut cfg = MinerConfig::default();
    let file = match &a.config {
        Some(path) => ConfigOverrides::load(path).with_context(|| format!("reading {}", path.display()))?,
        None => ConfigOverrides::default(),
    };
    let flags = flag_overrides(a)?;
    file.apply(&mut cfg)?;
    flags.apply(&mut cfg)?;
    let window_given = file.window_size.is_some() || flags.window_size.is_some();
    if let (Some(g), true) = (cfg.gaps_allowed, window_given) {
        log::warn!(
            "both gaps_allowed ({g}) and window_size ({}) given; gaps_allowed takes precedence",
            cfg.window_size
        );
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_examples(path: &Path, label: Label, pretagged: bool, aug: &Augmenter) -> Result<Vec<Example>> {
    let examples = if is_pretagged(path, pretagged) {
        ingest_pretagged(path, label, aug)
    } else {
        ingest_raw(path, label, aug)
    };
    examples.with_context(|| format!("reading {}", path.display()))
}

fn extract(a: &ExtractArgs) -> Result<()> {
    let cfg = resolve_config(a)?;
    let aug = cfg.augmenter()?;
    let pos = read_examples(&a.pos, Label::Positive, a.pretagged, &aug)?;
    let neg = read_examples(&a.neg, Label::Negative, a.pretagged, &aug)?;
    log::info!("{} positive, {} negative examples", pos.len(), neg.len());
    let bundle = fit(&pos, &neg, &cfg)?;
    log::info!("{} patterns", bundle.patterns.len());
    bundle
        .to_json(&a.out_json)
        .with_context(|| format!("writing {}", a.out_json.display()))?;
    if let Some(csv) = &a.out_csv {
        bundle.to_csv(csv).with_context(|| format!("writing {}", csv.display()))?;
    }
    Ok(())
}

fn load_bundle(path: &Path) -> Result<ResultBundle> {
    ResultBundle::load(path).with_context(|| format!("loading {}", path.display()))
}

pub fn translate(a: &TranslateArgs, out: &mut impl Write) -> Result<()> {
    let bundle = load_bundle(&a.json)?;
    match a.rank {
        Some(rank) => {
            let Some(p) = bundle.pattern(rank) else {
                bail!("no pattern with rank {rank} (bundle has {})", bundle.patterns.len());
            };
            writeln!(out, "{}", p.meaning)?;
        }
        None => {
            for p in &bundle.patterns {
                writeln!(out, "{}\t{}\t{}", p.rank, p.pattern, p.meaning)?;
            }
        }
    }
    Ok(())
}

/// Texts to vectorize, augmented like the training data. Raw input keeps
/// one example per line, blank lines included, so rows stay aligned.
fn vectorize_inputs(a: &VectorizeArgs, aug: &Augmenter) -> Result<Vec<Example>> {
    if is_pretagged(&a.texts, a.pretagged) {
        let file = File::open(&a.texts).with_context(|| format!("opening {}", a.texts.display()))?;
        return Ok(read_pretagged(BufReader::new(file), Label::Positive, aug)?.examples);
    }
    let file = File::open(&a.texts).with_context(|| format!("opening {}", a.texts.display()))?;
    let mut out = Vec::new();
    for (id, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let mut tokens: Vec<Token> = line.split_whitespace().map(Token::new).collect();
        aug.augment(&mut tokens);
        out.push(Example {
            id,
            label: Label::Positive,
            tokens,
            raw_text: line,
        });
    }
    Ok(out)
}

fn vectorize(a: &VectorizeArgs) -> Result<()> {
    let bundle = load_bundle(&a.json)?;
    let v = Vectorizer::new(&bundle)?;
    let texts = vectorize_inputs(a, v.augmenter())?;
    let file = File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut w = BufWriter::new(file);
    for ex in &texts {
        writeln!(w, "{}", v.vectorize(ex))?;
    }
    w.flush()?;
    Ok(())
}

fn serve(a: &ServeArgs) -> Result<()> {
    let bundle = Arc::new(load_bundle(&a.json)?);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(crate::server::serve(bundle, &a.addr, a.static_dir.clone()))
}
