use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use regretstream::analytics::{
    compare_groups, partition_users, reply_sentiment_split, response_report, standard_attributes, temporal_histogram,
    trait_observations, trait_tally, tweet_facts, user_metric_comparisons, TraitMap, TRAIT_SYMBOLS,
};
use regretstream::analytics::{aggregate_annotations, parse_annotations, AttributeRow};
use regretstream::classify::{ablate, predict_events, two_stage_train, ModelBundle, TrainConfig};
use regretstream::cleanup::{parse_whitelist, run_cleanup_with, CleanupConfig};
use regretstream::features::{featurize_corpus, FeatureGroup, TextResources};
use regretstream::ingest::{build_corpus_with, read_events, CollectionWindow, DuplicatePolicy};
use regretstream::synth::{generate, SynthConfig};
use regretstream::textkit::{Lexicon, PretaggedTags, ValenceTable, Wordlist};
use regretstream::{Corpus, Exec};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{CliError, Command, ResourceArgs};

type CliResult<T = ()> = Result<T, CliError>;

const METRICS: [&str; 6] = ["ntd", "nud", "users", "temporal", "response", "traits"];

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult {
    let mut w = create(path)?;
    w.write_all(bytes).and_then(|_| w.flush()).map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Validation(e.to_string()))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> CliResult {
    let mut w = csv::Writer::from_writer(create(path)?);
    for row in rows {
        w.serialize(row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Parses a JSON settings file, or returns the defaults when none is given.
fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => serde_json::from_str(&read_text(p)?)
            .map_err(|e| CliError::Validation(format!("{}: {e}", p.display()))),
    }
}

fn load_corpus(path: &Path) -> CliResult<Corpus> {
    Corpus::from_json(&read_text(path)?).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn save_corpus(path: &Path, corpus: &Corpus) -> CliResult {
    write_bytes(path, corpus.to_json()?.as_bytes())
}

fn resources(args: &ResourceArgs) -> CliResult<TextResources> {
    let mut res = TextResources::builtin();
    if let Some(p) = &args.lexicon {
        res.lexicon = Lexicon::load(p)?;
    }
    if let Some(p) = &args.valence {
        res.valence = ValenceTable::load(p)?;
    }
    if let Some(p) = &args.wordlist {
        res.wordlist = Wordlist::load(p)?;
    }
    if let Some(p) = &args.tags {
        res.pretagged = Some(PretaggedTags::load(p)?);
    }
    Ok(res)
}

fn load_events(path: &Path) -> CliResult<Vec<regretstream::Event>> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    Ok(read_events(BufReader::new(file))?)
}

pub fn run(command: Command) -> CliResult {
    let exec = Exec::default();
    match command {
        Command::Ingest { events, window, out, skip_duplicates } => {
            let [start, end, delete_end] = <[String; 3]>::try_from(window)
                .map_err(|_| CliError::Validation("--window needs START END DELETE_END".into()))?;
            let window = CollectionWindow::parse(&start, &end, &delete_end)?;
            let policy = if skip_duplicates { DuplicatePolicy::Skip } else { DuplicatePolicy::Reject };
            let corpus = build_corpus_with(&load_events(&events)?, window, policy)?;
            save_corpus(&out, &corpus)?;
            println!("{}", serde_json::to_string(&corpus.stats).unwrap_or_default());
        }
        Command::Clean { corpus, whitelist, config, out, report } => {
            let mut cfg: CleanupConfig = load_config(config.as_deref())?;
            if let Some(p) = whitelist {
                cfg.client_whitelist = parse_whitelist(&read_text(&p)?);
            }
            let (cleaned, rep) = run_cleanup_with(&load_corpus(&corpus)?, &cfg, exec)?;
            save_corpus(&out, &cleaned)?;
            write_json(&report, &rep)?;
            print!("{}", rep.to_table());
        }
        Command::Featurize { corpus, lexicon, valence, wordlist, tags, with_responses, out } => {
            let res = resources(&ResourceArgs {
                lexicon: Some(lexicon),
                valence: Some(valence),
                wordlist: Some(wordlist),
                tags,
            })?;
            let matrix = featurize_corpus(&load_corpus(&corpus)?, &res, with_responses, exec)?;
            let mut w = create(&out)?;
            matrix.write_to(&mut w)?;
            w.flush().map_err(|e| io_err(&out, e))?;
            println!("{} rows, vocabulary {}", matrix.rows.len(), matrix.vocab_size);
        }
        Command::Analyze { corpus, metrics, alpha, traits, resources: r, out } => {
            analyze(&load_corpus(&corpus)?, &metrics, alpha, traits.as_deref(), &resources(&r)?, &out, exec)?;
        }
        Command::AnnotateAgg { annotations, alpha, out } => {
            let items = parse_annotations(&read_text(&annotations)?)?;
            let summary = aggregate_annotations(&items, alpha)?;
            write_json(&out, &summary)?;
            println!(
                "{} items, unanimous {:.1}%, majority {:.1}%, regret p = {:.4}",
                summary.items.len(),
                100.0 * summary.unanimous_rate,
                100.0 * summary.majority_rate,
                summary.regret_test.p_two_sided
            );
        }
        Command::Train { corpus, config, seed, out, metrics, with_responses, resources: r } => {
            let mut cfg: TrainConfig = load_config(config.as_deref())?;
            if with_responses {
                cfg = cfg.with_response_mode();
            }
            let outcome = two_stage_train(&load_corpus(&corpus)?, &cfg, seed, &resources(&r)?, exec)?;
            write_bytes(&out, &outcome.bundle.to_bytes()?)?;
            let metrics = metrics.unwrap_or_else(|| sibling(&out, ".metrics.json"));
            write_json(&metrics, &outcome.report)?;
            let m = &outcome.report.held_out;
            println!(
                "held-out precision {:.3} recall {:.3} F1 {:.3} on {} test rows",
                m.precision, m.recall, m.f1, outcome.report.test_rows
            );
        }
        Command::Predict { bundle, events, out, resources: r } => {
            let bundle = ModelBundle::from_bytes(&std::fs::read(&bundle).map_err(|e| io_err(&bundle, e))?)?;
            let preds = predict_events(&bundle, &load_events(&events)?, &resources(&r)?, exec)?;
            write_csv(&out, &preds)?;
            let flagged = preds.iter().filter(|p| p.predicted_deleted).count();
            println!("{} tweets scored, {} predicted deleted", preds.len(), flagged);
        }
        Command::Ablate { corpus, config, groups, seed, out, resources: r } => {
            let cfg: TrainConfig = load_config(config.as_deref())?;
            let groups = groups
                .iter()
                .map(|g| g.trim().parse::<FeatureGroup>())
                .collect::<Result<Vec<_>, _>>()?;
            let report = ablate(&load_corpus(&corpus)?, &cfg, &groups, seed, &resources(&r)?, exec)?;
            write_json(&out, &report)?;
            write_csv(
                &out.with_extension("csv"),
                report.rows.iter().map(|row| AblationCsv {
                    group: row.group.name(),
                    precision: row.metrics.precision,
                    recall: row.metrics.recall,
                    f1: row.metrics.f1,
                    delta_precision: row.delta_precision,
                    delta_recall: row.delta_recall,
                    delta_f1: row.delta_f1,
                    relative_f1_pct: row.relative_f1_pct,
                }),
            )?;
            println!("baseline F1 {:.3}", report.baseline.f1);
            for row in &report.rows {
                println!("  without {:<18} F1 {:.3} ({:+.3})", row.group.name(), row.metrics.f1, row.delta_f1);
            }
        }
        Command::Synth { config, seed, out_events, out_ledger } => {
            let mut cfg: SynthConfig = load_config(config.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let output = generate(&cfg)?;
            let mut w = create(&out_events)?;
            regretstream::ingest::write_events(&mut w, &output.events)?;
            w.flush().map_err(|e| io_err(&out_events, e))?;
            write_bytes(&out_ledger, output.ledger.to_json()?.as_bytes())?;
            let e = &output.ledger.expected;
            println!(
                "{} events; {} tweets in window, {} deleted",
                output.events.len(),
                e.before.tweets,
                e.before.deleted
            );
        }
    }
    Ok(())
}

/// `path` with `suffix` appended to its file name.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

#[derive(Serialize)]
struct AblationCsv {
    group: &'static str,
    precision: f64,
    recall: f64,
    f1: f64,
    delta_precision: f64,
    delta_recall: f64,
    delta_f1: f64,
    relative_f1_pct: f64,
}

#[derive(Serialize)]
struct AttributeCsv<'a> {
    attribute: &'a str,
    basis: String,
    deleted_value: Option<f64>,
    non_deleted_value: Option<f64>,
    ntd: Option<f64>,
    p_value: Option<f64>,
    effect: Option<f64>,
    significant: Option<bool>,
    nud: Option<f64>,
    eligible_users: usize,
    users_higher_in_deleted: usize,
    users_higher_in_non_deleted: usize,
    note: Option<&'a str>,
}

impl<'a> From<&'a AttributeRow> for AttributeCsv<'a> {
    fn from(r: &'a AttributeRow) -> Self {
        AttributeCsv {
            attribute: &r.attribute,
            basis: serde_json::to_value(r.basis)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            deleted_value: r.deleted_value,
            non_deleted_value: r.non_deleted_value,
            ntd: r.ntd,
            p_value: r.test.as_ref().map(|t| t.p_two_sided),
            effect: r.test.as_ref().map(|t| t.effect),
            significant: r.test.as_ref().map(|t| t.significant),
            nud: r.nud,
            eligible_users: r.eligible_users,
            users_higher_in_deleted: r.users_higher_in_deleted,
            users_higher_in_non_deleted: r.users_higher_in_non_deleted,
            note: r.note.as_deref(),
        }
    }
}

#[derive(Serialize)]
struct UserCsv<'a> {
    metric: &'a str,
    median_deleters: f64,
    median_non_deleters: f64,
    u: f64,
    p_value: f64,
    effect: f64,
    significant: bool,
}

#[derive(Serialize)]
struct CcdfCsv<'a> {
    metric: &'a str,
    group: &'static str,
    value: f64,
    ccdf: f64,
}

#[derive(Serialize)]
struct HourCsv {
    hour: usize,
    deleted_pct: f64,
    non_deleted_pct: f64,
}

#[derive(Serialize)]
struct SentimentCsv {
    group: &'static str,
    replied: usize,
    positive: usize,
    negative: usize,
    neutral: usize,
    pct_positive: f64,
    pct_negative: f64,
    pct_neutral: f64,
}

#[derive(Serialize)]
struct TraitCsv {
    symbol: &'static str,
    count: u32,
}

fn analyze(
    corpus: &Corpus,
    metrics: &[String],
    alpha: f64,
    traits: Option<&Path>,
    res: &TextResources,
    out: &Path,
    exec: Exec,
) -> CliResult {
    let wanted: Vec<&str> = metrics.iter().map(|m| m.trim()).filter(|m| !m.is_empty()).collect();
    if let Some(bad) = wanted.iter().find(|m| !METRICS.contains(m)) {
        return Err(CliError::Validation(format!("unknown metric {bad:?}; expected one of {}", METRICS.join(","))));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Validation("--alpha must lie strictly between 0 and 1".into()));
    }
    let has = |m: &str| wanted.contains(&m);
    std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let facts = tweet_facts(corpus, res, exec)?;
    let partition = partition_users(corpus);

    if has("ntd") || has("nud") {
        let report = compare_groups(&facts, &standard_attributes(res), alpha, has("nud"), exec)?;
        write_json(&out.join("attributes.json"), &report)?;
        write_csv(&out.join("attributes.csv"), report.rows.iter().map(AttributeCsv::from))?;
    }
    if has("users") {
        let comps = user_metric_comparisons(corpus, &partition, alpha)?;
        write_json(&out.join("users.json"), &comps)?;
        write_csv(
            &out.join("users.csv"),
            comps.iter().map(|c| UserCsv {
                metric: &c.metric,
                median_deleters: c.median_deleters,
                median_non_deleters: c.median_non_deleters,
                u: c.test.statistic,
                p_value: c.test.p_two_sided,
                effect: c.test.effect,
                significant: c.test.significant,
            }),
        )?;
        let points = comps.iter().flat_map(|c| {
            let del = c.ccdf_deleters.iter().map(move |&(value, ccdf)| CcdfCsv { metric: &c.metric, group: "deleters", value, ccdf });
            let non = c.ccdf_non_deleters.iter().map(move |&(value, ccdf)| CcdfCsv { metric: &c.metric, group: "non_deleters", value, ccdf });
            del.chain(non)
        });
        write_csv(&out.join("users_ccdf.csv"), points)?;
    }
    if has("temporal") {
        let tweets = corpus.tweets();
        let del = temporal_histogram(tweets.iter().filter(|t| t.deleted));
        let non = temporal_histogram(tweets.iter().filter(|t| !t.deleted));
        write_csv(
            &out.join("temporal.csv"),
            (0..24).map(|hour| HourCsv { hour, deleted_pct: del[hour], non_deleted_pct: non[hour] }),
        )?;
    }
    if has("response") {
        let responses = response_report(corpus);
        let sentiment = reply_sentiment_split(corpus, &res.valence);
        write_json(
            &out.join("response.json"),
            &serde_json::json!({ "responses": responses, "reply_sentiment": sentiment }),
        )?;
        let row = |group, s: &regretstream::analytics::SentimentSplit| SentimentCsv {
            group,
            replied: s.replied,
            positive: s.positive,
            negative: s.negative,
            neutral: s.neutral,
            pct_positive: s.pct_positive(),
            pct_negative: s.pct_negative(),
            pct_neutral: s.pct_neutral(),
        };
        write_csv(
            &out.join("reply_sentiment.csv"),
            [row("deleted", &sentiment.deleted), row("non_deleted", &sentiment.non_deleted)],
        )?;
    }
    if has("traits") {
        let map = match traits {
            Some(p) => TraitMap::from_json(&read_text(p)?)?,
            None => TraitMap::builtin(),
        };
        let observations = trait_observations(&facts, &partition, &map, res);
        let tally = trait_tally(&observations, &map);
        write_json(&out.join("traits.json"), &serde_json::json!({ "observations": observations, "tally": tally }))?;
        write_csv(
            &out.join("traits.csv"),
            TRAIT_SYMBOLS.iter().map(|&symbol| TraitCsv { symbol, count: tally.count(symbol) }),
        )?;
    }
    println!("wrote {} report(s) to {}", wanted.len(), out.display());
    Ok(())
}
