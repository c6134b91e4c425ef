use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use cskit_core::ablation::{partition, AblationSpec, SizeUnit};
use cskit_core::align::layerwise_scores;
use cskit_core::corpus::{read_corpus, CorpusReader, DocumentSource, IndexedCorpus, ReadOptions};
use cskit_core::detect::{CrossLingualEncoder, DetectedDocument, Detector, LexiconEncoder};
use cskit_core::remote::{ChatClient, RemoteGenerator, RemoteTokenClassifier, RemoteTranslator};
use cskit_core::stats::ReportFormat;
use cskit_core::synth::{
    allocate_and_synthesize, execute_mix, export_sft_records, plan_mix, Backends, BuiltinCounter,
    DictionaryGenerator, DictionaryTranslator, MixPlan, MixSettings, SftTask, SynthesisPlan,
    TokenCounter, TokenCsGenerator, Translator,
};
use cskit_core::tagging::Tagger;
use cskit_core::{CorpusStats, Document, LanguagePair, Lexicon};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{ClassifierKind, GeneratorKind, RunConfig};
use crate::report::RunReport;
use crate::{
    AblateArgs, BackendArgs, Command, CountArgs, DetectArgs, MexaArgs, MixArgs, SftArgs, StatsArgs,
    StatsFormat, SynthArgs,
};

pub fn run(command: Command, report: &mut RunReport) -> anyhow::Result<()> {
    apply_overrides(&command, &mut report.config);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(report.config.threads.unwrap_or(0))
        .build()
        .context("building the worker pool")?;
    pool.install(|| match command {
        Command::Detect(a) => detect(a, report),
        Command::Stats(a) => stats(a, report),
        Command::Ablate(a) => ablate(a, report),
        Command::Synthesize(a) => synthesize(a, report),
        Command::Mix(a) => mix(a, report),
        Command::SftExport(a) => sft_export(a, report),
        Command::Mexa(a) => mexa(a, report),
        Command::CountTokens(a) => count_tokens(a, report),
    })
}

fn apply_backend_overrides(b: &BackendArgs, cfg: &mut RunConfig) {
    if let Some(p) = &b.lexicon {
        cfg.lexicon = Some(p.clone());
    }
    if let Some(k) = b.backend {
        cfg.backend.generator = k;
    }
    if let Some(k) = b.max_terms {
        cfg.backend.max_terms = k;
    }
}

/// Folds subcommand flags into the config before anything runs, so the
/// echoed config is the one actually used.
fn apply_overrides(command: &Command, cfg: &mut RunConfig) {
    match command {
        Command::Detect(a) => {
            if let Some(p) = &a.lexicon {
                cfg.lexicon = Some(p.clone());
            }
            if let Some(t) = a.tau {
                cfg.detector.annt_similarity_threshold = t;
            }
            if let Some(w) = a.window {
                cfg.detector.alignment_window = w;
            }
            if let Some(k) = a.token_classifier {
                cfg.backend.token_classifier = k;
            }
        }
        Command::Ablate(a) => {
            if let Some(u) = a.size_unit {
                cfg.ablation.size_unit = u;
            }
        }
        Command::Synthesize(a) => {
            let s = &mut cfg.synthesis;
            if a.cs_type.is_some() {
                s.cs_type = a.cs_type;
            }
            if let Some(side) = a.side {
                s.side = side;
            }
            if a.budget.is_some() {
                s.budget = a.budget;
            }
            if let Some(d) = a.density {
                s.density = d;
            }
            if a.cap.is_some() {
                s.cap = a.cap;
            }
            apply_backend_overrides(&a.backend, cfg);
        }
        Command::Mix(a) => {
            if a.preset.is_some() {
                cfg.mix.preset = a.preset;
            }
            if a.budget.is_some() {
                cfg.mix.budget = a.budget;
            }
            if let Some(d) = a.density {
                cfg.synthesis.density = d;
            }
            apply_backend_overrides(&a.backend, cfg);
        }
        Command::SftExport(a) => {
            if !a.tasks.is_empty() {
                cfg.sft.tasks = a.tasks.clone();
            }
            cfg.sft.both_directions |= a.both_directions;
            apply_backend_overrides(&a.backend, cfg);
        }
        Command::Stats(_) | Command::Mexa(_) | Command::CountTokens(_) => {}
    }
}

fn read_options(cfg: &RunConfig, pair: Option<LanguagePair>) -> ReadOptions {
    if cfg.strict {
        ReadOptions::strict(pair)
    } else {
        ReadOptions::lenient(pair)
    }
}

fn optional_pair(cfg: &RunConfig) -> anyhow::Result<Option<LanguagePair>> {
    match cfg.pair {
        Some(_) => Ok(Some(cfg.language_pair()?)),
        None => Ok(None),
    }
}

fn note_read_warnings(report: &mut RunReport, input: &Path, count: usize) {
    if count > 0 {
        report.warn(format!("{}: skipped {count} malformed or invalid lines", input.display()));
        report.partial();
    }
}

struct JsonlOut {
    path: PathBuf,
    out: BufWriter<File>,
    count: usize,
}

impl JsonlOut {
    fn create(path: &Path) -> anyhow::Result<JsonlOut> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        Ok(JsonlOut {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
            count: 0,
        })
    }

    fn write<T: Serialize>(&mut self, record: &T) -> std::io::Result<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")?;
        self.count += 1;
        Ok(())
    }

    fn write_raw(&mut self, line: &[u8]) -> std::io::Result<()> {
        self.out.write_all(line)?;
        self.out.write_all(b"\n")?;
        self.count += 1;
        Ok(())
    }

    fn finish(mut self) -> anyhow::Result<usize> {
        self.out
            .flush()
            .with_context(|| format!("writing {}", self.path.display()))?;
        Ok(self.count)
    }
}

fn io_err(e: std::io::Error) -> cskit_core::Error {
    cskit_core::Error::RawIo(e)
}

fn write_text(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_lexicon(cfg: &RunConfig) -> anyhow::Result<Option<Arc<Lexicon>>> {
    cfg.lexicon
        .as_ref()
        .map(|p| {
            Lexicon::load(p)
                .map(Arc::new)
                .with_context(|| format!("loading lexicon {}", p.display()))
        })
        .transpose()
}

struct GenBackends {
    translator: Box<dyn Translator>,
    generator: Box<dyn TokenCsGenerator>,
}

fn generation_backends(cfg: &RunConfig, pair: &LanguagePair) -> anyhow::Result<GenBackends> {
    match cfg.backend.generator {
        GeneratorKind::Dictionary => {
            let Some(lex) = load_lexicon(cfg)? else {
                bail!("the dictionary backend needs a lexicon (--lexicon or `lexicon` in the config)");
            };
            Ok(GenBackends {
                translator: Box::new(DictionaryTranslator::new(lex.clone(), pair.clone())),
                generator: Box::new(
                    DictionaryGenerator::new(lex, pair.clone()).with_max_terms(cfg.backend.max_terms),
                ),
            })
        }
        GeneratorKind::Remote => Ok(GenBackends {
            translator: Box::new(RemoteTranslator::new(ChatClient::new(cfg.remote.clone())?)),
            generator: Box::new(RemoteGenerator::new(ChatClient::new(cfg.remote.clone())?)),
        }),
    }
}

/// Zero vectors, whose cosine with anything is 0.
struct NullEncoder;

impl CrossLingualEncoder for NullEncoder {
    fn dim(&self) -> usize {
        1
    }

    fn embed(&self, _text: &str) -> cskit_core::Result<Vec<f32>> {
        Ok(vec![0.0])
    }
}

fn detect(a: DetectArgs, report: &mut RunReport) -> anyhow::Result<()> {
    let cfg = report.config.clone();
    let pair = cfg.language_pair()?;
    cfg.detector.validate()?;
    report.input("corpus", &a.input);
    report.output("detected", &a.out);

    let encoder: Arc<dyn CrossLingualEncoder> = match load_lexicon(&cfg)? {
        Some(lex) => {
            report.input("lexicon", cfg.lexicon.as_deref().unwrap());
            Arc::new(LexiconEncoder::new(lex))
        }
        None => {
            report.warn("no lexicon given: sentence similarity is always 0, so sentence-level segments are all replacement");
            Arc::new(NullEncoder)
        }
    };
    let mut detector = Detector::new(pair.clone(), encoder, cfg.detector.clone())?;
    if cfg.backend.token_classifier == ClassifierKind::Remote {
        let client = ChatClient::new(cfg.remote.clone())?;
        detector = detector.with_token_classifier(Arc::new(RemoteTokenClassifier::new(client, pair.clone())));
    }

    let mut reader = read_corpus(&a.input, read_options(&cfg, Some(pair)))?;
    let mut out = JsonlOut::create(&a.out)?;
    let mut det = detector.detect_corpus(&mut reader, |d| out.write(&d).map_err(io_err))?;
    out.finish()?;
    det.read_warning_count = reader.warning_count();
    det.read_warnings = reader.warnings().to_vec();

    note_read_warnings(report, &a.input, det.read_warning_count);
    if det.error_count > 0 {
        report.warn(format!("{} documents failed detection and were written without segments", det.error_count));
        report.partial();
    }
    if det.degraded_documents > 0 {
        report.warn(format!(
            "{} documents fell back to the heuristic token classifier",
            det.degraded_documents
        ));
        report.partial();
    }
    report.summary = serde_json::to_value(&det)?;
    Ok(())
}

fn stats(a: StatsArgs, report: &mut RunReport) -> anyhow::Result<()> {
    let cfg = report.config.clone();
    report.input("detected", &a.input);
    if let Some(out) = &a.out {
        report.output("stats", out);
    }
    let mut reader: CorpusReader<_, DetectedDocument> =
        CorpusReader::open(&a.input, read_options(&cfg, optional_pair(&cfg)?))?;
    let mut stats = CorpusStats::default();
    for rec in &mut reader {
        stats.accumulate(&rec?);
    }
    note_read_warnings(report, &a.input, reader.warning_count());
    let format = match a.format {
        StatsFormat::Json => ReportFormat::Json,
        StatsFormat::Csv => ReportFormat::Csv,
        StatsFormat::Markdown => ReportFormat::Markdown,
    };
    let mut text = stats.render(format);
    if !text.ends_with('\n') {
        text.push('\n');
    }
    write_text(a.out.as_deref(), &text)?;
    report.summary = serde_json::from_str(&stats.to_json())?;
    Ok(())
}

fn detected_docs(
    path: &Path,
    opts: ReadOptions,
) -> anyhow::Result<impl Iterator<Item = cskit_core::Result<Document>>> {
    let reader: CorpusReader<_, DetectedDocument> = CorpusReader::open(path, opts)?;
    Ok(reader.map(|r| r.map(|d| d.doc)))
}

fn ablate(a: AblateArgs, report: &mut RunReport) -> anyhow::Result<()> {
    let cfg = report.config.clone();
    let unit = cfg.ablation.size_unit;
    let opts = read_options(&cfg, optional_pair(&cfg)?);
    let manifest_path = a.manifest.clone().unwrap_or_else(|| {
        let mut name = a.out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".manifest.jsonl");
        a.out.with_file_name(name)
    });
    report.input("main", &a.main);
    report.input("pool", &a.pool);
    report.output("corpus", &a.out);
    report.output("manifest", &manifest_path);

    let counter = BuiltinCounter;
    let counter_ref: Option<&dyn TokenCounter> = match unit {
        SizeUnit::Tokens => Some(&counter),
        SizeUnit::Documents => None,
    };
    let mut main_reader: CorpusReader<_, DetectedDocument> = CorpusReader::open(&a.main, opts.clone())?;
    let mut pool_reader: CorpusReader<_, DetectedDocument> = CorpusReader::open(&a.pool, opts.clone())?;
    let parts = partition(&mut main_reader, &mut pool_reader, counter_ref)?;
    note_read_warnings(report, &a.main, main_reader.warning_count());
    note_read_warnings(report, &a.pool, pool_reader.warning_count());

    let result = parts.build(AblationSpec {
        mode: a.mode,
        seed: cfg.seed,
        size_unit: unit,
    })?;
    let mut out = JsonlOut::create(&a.out)?;
    result.materialize(
        detected_docs(&a.main, opts.clone())?,
        detected_docs(&a.pool, opts)?,
        |d| out.write(&d).map_err(io_err),
    )?;
    out.finish()?;
    let manifest = File::create(&manifest_path).with_context(|| format!("creating {}", manifest_path.display()))?;
    let mut manifest = BufWriter::new(manifest);
    result.write_manifest(&mut manifest)?;
    manifest.flush()?;

    report.summary = json!({
        "mode": result.spec.mode,
        "size_unit": unit,
        "main_wcs": parts.m_wcs.len(),
        "main_wocs": parts.m_wocs.len(),
        "pool_wcs": parts.p_wcs.len(),
        "pool_wocs": parts.p_wocs.len(),
        "substituted_in": result.substituted_in.len(),
        "substituted_out": result.substituted_out.len(),
        "target_size": result.target_size,
        "output_size": result.output_size,
        "residual": result.residual,
    });
    Ok(())
}

/// Streams `source` to `out`, replacing rewritten documents and copying the
/// others byte for byte.
fn write_rewritten(
    source: &IndexedCorpus,
    modified: &BTreeMap<usize, Document>,
    out: &mut JsonlOut,
) -> anyhow::Result<()> {
    for i in 0..source.len() {
        match modified.get(&i) {
            Some(doc) => out.write(doc)?,
            None => out.write_raw(&source.raw_line(i)?)?,
        }
    }
    Ok(())
}

fn synthesize(a: SynthArgs, report: &mut RunReport) -> anyhow::Result<()> {
    let cfg = report.config.clone();
    let pair = cfg.language_pair()?;
    let s = &cfg.synthesis;
    let Some(cs_type) = s.cs_type else {
        bail!("a code-switching type is required (--type or synthesis.cs_type)");
    };
    let mut plan = SynthesisPlan::new(s.side, cs_type)
        .with_density(s.density)
        .with_cap(s.cap.unwrap_or(s.side.default_cap()))
        .with_seed(cfg.seed);
    if let Some(b) = s.budget {
        plan = plan.with_budget(b);
    }
    plan.validate()?;
    for w in plan.warnings() {
        report.warn(w);
    }
    report.input("corpus", &a.input);
    report.output("corpus", &a.out);

    let backends = generation_backends(&cfg, &pair)?;
    let source = IndexedCorpus::open(&a.input, read_options(&cfg, Some(pair.clone())))?;
    note_read_warnings(report, &a.input, source.warning_count());
    let tagger = Tagger::new(pair);
    let outcome = allocate_and_synthesize(
        &source,
        &plan,
        &tagger,
        &Backends {
            translator: backends.translator.as_ref(),
            generator: backends.generator.as_ref(),
            counter: &BuiltinCounter,
        },
    )?;
    let mut out = JsonlOut::create(&a.out)?;
    write_rewritten(&source, &outcome.modified, &mut out)?;
    out.finish()?;
    if let Some(log) = &a.log {
        report.output("log", log);
        let mut w = JsonlOut::create(log)?;
        for m in &outcome.log {
            w.write(m)?;
        }
        w.finish()?;
    }

    let acc = &outcome.report;
    if acc.shortfall.is_some_and(|s| s > 0) {
        report.warn(format!(
            "budget not reached: {} tokens short",
            acc.shortfall.unwrap_or_default()
        ));
        report.partial();
    }
    if acc.failures > 0 && cfg.backend.generator == GeneratorKind::Remote {
        report.warn(format!("{} sentences could not be rewritten by the backend", acc.failures));
        report.partial();
    }
    report.summary = json!({ "plan": plan, "accounting": acc });
    Ok(())
}

fn mix(a: MixArgs, report: &mut RunReport) -> anyhow::Result<()> {
    let cfg = report.config.clone();
    let pair = cfg.language_pair()?;
    let m = &cfg.mix;
    let plan = match (m.preset, m.allocations.is_empty()) {
        (Some(preset), true) => {
            let Some(budget) = m.budget else {
                bail!("a preset needs a total budget (--budget or mix.budget)");
            };
            plan_mix(preset, budget)
        }
        (None, false) => MixPlan::explicit(m.allocations.clone())?,
        (Some(_), false) => bail!("give either a preset or explicit mix.allocations, not both"),
        (None, true) => bail!("no mix given (--preset or mix.allocations)"),
    };
    let settings = MixSettings {
        seed: cfg.seed,
        sentence_density: cfg.synthesis.density,
        primary_cap: m.primary_cap,
        secondary_cap: m.secondary_cap,
    };
    report.input("primary", &a.primary_in);
    report.input("secondary", &a.secondary_in);
    report.output("primary", &a.primary_out);
    report.output("secondary", &a.secondary_out);

    let backends = generation_backends(&cfg, &pair)?;
    let opts = read_options(&cfg, Some(pair.clone()));
    let primary = IndexedCorpus::open(&a.primary_in, opts.clone())?;
    let secondary = IndexedCorpus::open(&a.secondary_in, opts)?;
    note_read_warnings(report, &a.primary_in, primary.warning_count());
    note_read_warnings(report, &a.secondary_in, secondary.warning_count());
    let tagger = Tagger::new(pair);
    let outcome = execute_mix(
        &primary,
        &secondary,
        &plan,
        &settings,
        &tagger,
        &Backends {
            translator: backends.translator.as_ref(),
            generator: backends.generator.as_ref(),
            counter: &BuiltinCounter,
        },
    )?;
    for (src, modified, path) in [
        (&primary, &outcome.primary, &a.primary_out),
        (&secondary, &outcome.secondary, &a.secondary_out),
    ] {
        let mut out = JsonlOut::create(path)?;
        write_rewritten(src, modified, &mut out)?;
        out.finish()?;
    }
    for run in &outcome.runs {
        for w in &run.report.warnings {
            report.warn(w.clone());
        }
        if let Some(short) = run.report.shortfall.filter(|&s| s > 0) {
            report.warn(format!(
                "budget not reached for {} {}: {short} tokens short",
                run.allocation.side.name(),
                run.allocation.cs_type.name()
            ));
            report.partial();
        }
    }
    report.summary = json!({ "plan": plan, "runs": outcome.runs, "total": outcome.total });
    Ok(())
}

#[derive(Deserialize)]
struct PairLine {
    source: String,
    target: String,
}

fn json_lines<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<impl Iterator<Item = anyhow::Result<T>>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let path = path.to_path_buf();
    Ok(BufReader::new(file)
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(move |(i, l)| {
            let l = l.with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&l).with_context(|| format!("{} line {}", path.display(), i + 1))
        }))
}

const SFT_CHUNK: usize = 1024;

fn sft_export(a: SftArgs, report: &mut RunReport) -> anyhow::Result<()> {
    let cfg = report.config.clone();
    let pair = optional_pair(&cfg)?;
    let src_lang = a
        .src_lang
        .clone()
        .or_else(|| pair.as_ref().map(|p| p.primary().to_string()))
        .context("source language needed (--src-lang or --pair)")?;
    let tgt_lang = a
        .tgt_lang
        .clone()
        .or_else(|| pair.as_ref().map(|p| p.secondary().to_string()))
        .context("target language needed (--tgt-lang or --pair)")?;
    let tasks = cfg.sft.tasks.clone();
    let mut directions = vec![(src_lang.clone(), tgt_lang.clone(), false)];
    if cfg.sft.both_directions {
        directions.push((tgt_lang.clone(), src_lang.clone(), true));
    }
    if a.generated.is_some() && (tasks.len() != 1 || directions.len() != 1) {
        bail!("--generated outputs fit exactly one task and one direction");
    }
    report.input("pairs", &a.pairs);
    report.output("records", &a.out);

    let generator: Option<Box<dyn TokenCsGenerator>> = match &a.generated {
        Some(g) => {
            report.input("generated", g);
            None
        }
        None => {
            let gen_pair = match &pair {
                Some(p) => p.clone(),
                None => format!("{src_lang}-{tgt_lang}").parse()?,
            };
            Some(generation_backends(&cfg, &gen_pair)?.generator)
        }
    };

    let mut out = JsonlOut::create(&a.out)?;
    let mut failures = 0usize;
    let mut per_task: BTreeMap<String, usize> = BTreeMap::new();
    for (src, tgt, swapped) in &directions {
        for &task in &tasks {
            let mut lines = json_lines::<PairLine>(&a.pairs)?;
            let mut generated = match &a.generated {
                Some(g) => Some(json_lines::<String>(g)?),
                None => None,
            };
            loop {
                let mut pairs = Vec::with_capacity(SFT_CHUNK);
                for line in lines.by_ref().take(SFT_CHUNK) {
                    let p = line?;
                    pairs.push(if *swapped { (p.target, p.source) } else { (p.source, p.target) });
                }
                if pairs.is_empty() {
                    break;
                }
                let (pairs, outputs) = match (&mut generated, &generator) {
                    (Some(g), _) => {
                        let outs = g.by_ref().take(pairs.len()).collect::<anyhow::Result<Vec<_>>>()?;
                        (pairs, outs)
                    }
                    (None, Some(gen)) => {
                        let mut kept = Vec::with_capacity(pairs.len());
                        let mut outs = Vec::with_capacity(pairs.len());
                        for (s, t) in pairs {
                            let r = match task {
                                SftTask::Annotation => gen.annotate(&s, src, tgt),
                                SftTask::Replacement => gen.replace(&s, src, tgt),
                            };
                            match r {
                                Ok(o) => {
                                    kept.push((s, t));
                                    outs.push(o);
                                }
                                Err(e) => {
                                    failures += 1;
                                    log::debug!("generation failed: {e}");
                                }
                            }
                        }
                        (kept, outs)
                    }
                    (None, None) => unreachable!(),
                };
                let records = export_sft_records(&pairs, &outputs, task, src, tgt)?;
                *per_task.entry(format!("{task:?}:{src}-{tgt}").to_lowercase()).or_default() += records.len();
                for r in &records {
                    out.write(r)?;
                }
            }
            if let Some(g) = &mut generated {
                if g.next().is_some() {
                    bail!("more generated outputs than parallel pairs");
                }
            }
        }
    }
    let written = out.finish()?;
    if failures > 0 {
        report.warn(format!("{failures} pairs skipped: the generator could not produce an output"));
        report.partial();
    }
    report.summary = json!({ "records": written, "by_task": per_task, "skipped": failures });
    Ok(())
}

fn mexa(a: MexaArgs, report: &mut RunReport) -> anyhow::Result<()> {
    let mut layers = Vec::new();
    for spec in &a.layers {
        let Some((e, f)) = spec.split_once(':') else {
            bail!("layer {spec:?} must be E_PATH:F_PATH");
        };
        let (e, f) = (PathBuf::from(e), PathBuf::from(f));
        report.input(&format!("layer{}_e", layers.len() + 1), &e);
        report.input(&format!("layer{}_f", layers.len() + 1), &f);
        layers.push((e, f));
    }
    let result = layerwise_scores(&layers);
    for l in &result.layers {
        match (l.score, &l.error) {
            (Some(s), _) => println!("layer {}\t{s:.6}", l.index),
            (None, Some(e)) => println!("layer {}\terror: {e}", l.index),
            (None, None) => unreachable!(),
        }
    }
    if let Some(out) = &a.out {
        report.output("json", out);
        std::fs::write(out, result.to_json() + "\n").with_context(|| format!("writing {}", out.display()))?;
    }
    if let Some(csv) = &a.csv {
        report.output("csv", csv);
        std::fs::write(csv, result.to_csv()).with_context(|| format!("writing {}", csv.display()))?;
    }
    let failed = result.failed();
    report.summary = serde_json::to_value(&result)?;
    if failed == result.layers.len() {
        bail!("every layer failed");
    }
    if failed > 0 {
        report.warn(format!("{failed} of {} layers failed", result.layers.len()));
        report.partial();
    }
    Ok(())
}

fn count_tokens(a: CountArgs, report: &mut RunReport) -> anyhow::Result<()> {
    let cfg = report.config.clone();
    report.input("corpus", &a.input);
    if let Some(out) = &a.out {
        report.output("counts", out);
    }
    let mut reader = read_corpus(&a.input, read_options(&cfg, optional_pair(&cfg)?))?;
    let counter = BuiltinCounter;
    let mut docs: BTreeMap<String, u64> = BTreeMap::new();
    let mut tokens: BTreeMap<String, u64> = BTreeMap::new();
    for doc in &mut reader {
        let doc = doc?;
        *tokens.entry(doc.lang.clone()).or_default() += counter.count(&doc.text, &doc.lang);
        *docs.entry(doc.lang).or_default() += 1;
    }
    note_read_warnings(report, &a.input, reader.warning_count());
    let summary = json!({
        "documents": docs.values().sum::<u64>(),
        "total_tokens": tokens.values().sum::<u64>(),
        "documents_by_lang": docs,
        "tokens_by_lang": tokens,
    });
    write_text(a.out.as_deref(), &(serde_json::to_string_pretty(&summary)? + "\n"))?;
    report.summary = summary;
    Ok(())
}
