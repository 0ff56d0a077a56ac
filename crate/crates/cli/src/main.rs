use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tonestudy_cli::calendar_io::read_calendar;
use tonestudy_cli::config::StudyConfig;
use tonestudy_cli::study_cmd::StudyInputs;
use tonestudy_cli::{
    calibrate_cmd, events_cmd, ingest, market_cmd, study_cmd, synth, tone_cmd, verify_cmd,
    CliError, Result,
};

#[derive(Parser)]
#[command(
    name = "tonestudy",
    version,
    about = "Media tone event studies: corpus screening, return-calibrated lexicons, \
             abnormal tone and its relation to announcement returns"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// JSON study configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<StudyConfig> {
        match &self.config {
            Some(path) => StudyConfig::load(path),
            None => Ok(StudyConfig::default()),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic market with planted tone and return effects.
    Synth {
        /// Output directory for corpus, prices, earnings and ground truth.
        #[arg(long)]
        out: PathBuf,
        /// Generator seed; overrides the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// JSON generator configuration.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Screen a raw JSONL corpus into clean, deduplicated documents.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Attrition counts per rejection rule.
        #[arg(long)]
        stats: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Train a return-calibrated lexicon on documents before a cutoff date.
    Calibrate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        returns: PathBuf,
        /// Seed word list with LM polarity labels.
        #[arg(long)]
        seed_words: PathBuf,
        /// Last training day (YYYY-MM-DD); later documents are not used.
        #[arg(long)]
        train_end: String,
        /// Lexicon CSV; a JSON sidecar with training metadata sits next to it.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        calendar: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Score documents against trained lexicons and build the tone factor.
    Tone {
        #[arg(long)]
        corpus: PathBuf,
        /// Directory of lexicon CSVs with JSON sidecars.
        #[arg(long)]
        lexicons: PathBuf,
        #[arg(long)]
        caps: PathBuf,
        #[arg(long)]
        calendar: PathBuf,
        /// Daily firm tone CSV.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        factor_out: PathBuf,
        /// Per-article tones, needed later for source-group splits.
        #[arg(long)]
        doc_tones: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Compute announcement-window returns, turnover and surprise measures.
    Market {
        #[arg(long)]
        prices: PathBuf,
        #[arg(long)]
        earnings: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Trading calendar; derived from the price file when omitted.
        #[arg(long)]
        calendar: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Build qualifying events, abnormal tone and residual tone measures.
    Events {
        #[arg(long)]
        tones: PathBuf,
        #[arg(long)]
        factor: PathBuf,
        #[arg(long)]
        controls: PathBuf,
        #[arg(long)]
        calendar: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Per-article residual tone allocations; requires --doc-tones.
        #[arg(long)]
        ratc_out: Option<PathBuf>,
        #[arg(long)]
        attrition_out: Option<PathBuf>,
        #[arg(long)]
        doc_tones: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Run the full pipeline and emit tables, figures and attrition reports.
    Study {
        #[arg(long)]
        docs: PathBuf,
        #[arg(long)]
        returns: PathBuf,
        #[arg(long)]
        prices: PathBuf,
        #[arg(long)]
        earnings: PathBuf,
        #[arg(long)]
        caps: PathBuf,
        #[arg(long)]
        seed_words: PathBuf,
        #[arg(long)]
        calendar: Option<PathBuf>,
        /// Comma-separated table ids.
        #[arg(long, value_delimiter = ',', default_value = "T3,T4,T5,T6")]
        tables: Vec<String>,
        /// Comma-separated figure ids.
        #[arg(long, value_delimiter = ',', default_value = "F4,F5,F6")]
        figures: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Cross-check production numeric kernels against brute-force oracles.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 100)]
        seeds: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn ensure_parent(path: &PathBuf) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::validation(format!("cannot create {}: {e}", dir.display())))?;
    }
    Ok(())
}

fn load_synth_config(path: Option<&PathBuf>, seed: Option<u64>) -> Result<synth::SynthConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::validation(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::validation(format!("{}: {e}", p.display())))?
        }
        None => synth::SynthConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { out, seed, config } => {
            let cfg = load_synth_config(config.as_ref(), seed)?;
            let truth = synth::gen_market(&cfg, &out)?;
            println!(
                "synth: {} firms, {} days, {} events, {} calibration cells -> {}",
                cfg.n_firms,
                cfg.n_days,
                truth.events.len(),
                truth.n_calibration_cells,
                out.display()
            );
        }
        Command::Ingest { input, output, stats, config } => {
            let cfg = config.load()?;
            for p in [Some(&output), stats.as_ref()].into_iter().flatten() {
                ensure_parent(p)?;
            }
            let st = ingest::run_ingest(&input, &output, stats.as_deref(), &cfg)?;
            println!(
                "ingest: kept {} of {} documents ({} rejected)",
                st.retained,
                st.input,
                st.rejected_total()
            );
        }
        Command::Calibrate { corpus, returns, seed_words, train_end, out, calendar, config } => {
            let cfg = config.load()?;
            ensure_parent(&out)?;
            let cal = calendar.as_deref().map(read_calendar).transpose()?;
            let meta = calibrate_cmd::run_calibrate(
                &corpus,
                &returns,
                &seed_words,
                &train_end,
                &out,
                cal.as_ref(),
                cfg.min_days,
            )?;
            println!(
                "calibrate: {} words from {} firm-day cells through {}",
                meta.vocab_size, meta.n_obs, meta.train_end
            );
        }
        Command::Tone { corpus, lexicons, caps, calendar, out, factor_out, doc_tones, config } => {
            let cfg = config.load()?;
            for p in [Some(&out), Some(&factor_out), doc_tones.as_ref()].into_iter().flatten() {
                ensure_parent(p)?;
            }
            let cal = read_calendar(&calendar)?;
            let (cells, days) = tone_cmd::run_tone(
                &corpus,
                &lexicons,
                &caps,
                &cal,
                &out,
                &factor_out,
                doc_tones.as_deref(),
                cfg.equal_weight,
            )?;
            println!("tone: {cells} firm-day tones, factor on {days} days");
        }
        Command::Market { prices, earnings, out, calendar, config } => {
            let cfg = config.load()?;
            ensure_parent(&out)?;
            let cal = calendar.as_deref().map(read_calendar).transpose()?;
            let st = market_cmd::run_market(&prices, &earnings, &out, cal.as_ref(), &cfg)?;
            println!("market: kept {} of {} announcements", st.retained, st.input);
        }
        Command::Events {
            tones,
            factor,
            controls,
            calendar,
            out,
            ratc_out,
            attrition_out,
            doc_tones,
            config,
        } => {
            let cfg = config.load()?;
            if ratc_out.is_some() && doc_tones.is_none() {
                return Err(CliError::validation("--ratc-out requires --doc-tones"));
            }
            for p in [Some(&out), ratc_out.as_ref(), attrition_out.as_ref()].into_iter().flatten() {
                ensure_parent(p)?;
            }
            let cal = read_calendar(&calendar)?;
            let doc_recs = doc_tones.as_deref().map(tone_cmd::load_doc_tones).transpose()?;
            let built = events_cmd::run_events(
                &tones,
                &factor,
                &controls,
                &cal,
                &out,
                ratc_out.as_deref(),
                attrition_out.as_deref(),
                doc_recs.as_deref(),
                &cfg,
            )?;
            println!(
                "events: {} qualifying events over {} quarters",
                built.events.len(),
                built.quarters.len()
            );
        }
        Command::Study {
            docs,
            returns,
            prices,
            earnings,
            caps,
            seed_words,
            calendar,
            tables,
            figures,
            out,
            config,
        } => {
            let cfg = config.load()?;
            let inputs = StudyInputs {
                docs,
                returns,
                prices,
                earnings,
                caps,
                seed_words,
                calendar,
            };
            let summary = study_cmd::run_study(&inputs, &tables, &figures, &out, &cfg)?;
            println!(
                "study: {} events scored, {} tables, {} figures -> {}",
                summary.n_scored_events,
                summary.tables.len(),
                summary.figures.len(),
                out.display()
            );
        }
        Command::Verify { suite, seeds, report } => {
            if let Some(p) = report.as_ref() {
                ensure_parent(p)?;
            }
            let reports = verify_cmd::run_verify(&suite, seeds, report.as_deref())?;
            for r in &reports {
                println!(
                    "verify {}: max deviation {:.3e} (tolerance {:.0e}) {}",
                    r.suite,
                    r.max_abs_deviation,
                    r.tolerance,
                    if r.pass { "ok" } else { "FAIL" }
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
