use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use odqa_cli::app::{load_config, load_engine, EngineSources};
use odqa_core::corpus::{
    build_retrieval_samples, chunk_corpus, read_jsonl, split_dataset, write_jsonl,
    DocumentQuestionFilter,
};
use odqa_core::dense::{build_index, ProviderSpec};
use odqa_core::eval::{
    build_run, evaluate_reader, fm_at_k, question_key, GoldRecord, RetrievalSystem, RunRecord,
};
use odqa_core::fixtures::write_fixture_files;
use odqa_core::service::{Engine, QueryRequest, QueryResponse};
use odqa_core::{Article, ChunkStore, DenseIndex, QAPair};

#[derive(Parser)]
#[command(
    name = "qa",
    version,
    about = "Open-domain question answering over article collections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prepare articles and QA data.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Build dense indexes.
    #[command(subcommand)]
    Index(IndexCommand),
    /// Answer one question from the command line.
    Query(QueryArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
    /// Evaluate retrieval and reading.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Deterministic demo and test corpora.
    #[command(subcommand)]
    Fixture(FixtureCommand),
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Split articles (JSONL) into 100-200 token passages (JSONL).
    Chunk {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        min: Option<usize>,
        #[arg(long)]
        max: Option<usize>,
        #[arg(long, env = "QA_CONFIG")]
        config: Option<PathBuf>,
    },
    /// Seeded 70/10/20 split of a QA file into train/dev/test JSONL files.
    Split {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Label each question's context chunks as positive or negative.
    Samples {
        #[arg(long)]
        qa: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum IndexCommand {
    /// Embed every chunk and write the index file.
    Build {
        #[arg(long)]
        corpus: PathBuf,
        /// `baseline`, `endpoint:<url>` or `file:<path>`.
        #[arg(long)]
        provider: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// Baseline embedding dimension.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, env = "QA_CONFIG")]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SourceArgs {
    #[arg(long, env = "QA_CONFIG")]
    config: Option<PathBuf>,
    /// Chunk file (JSONL).
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Index file from `qa index build`.
    #[arg(long)]
    index: Option<PathBuf>,
}

impl SourceArgs {
    fn sources(&self) -> EngineSources {
        EngineSources {
            config: self.config.clone(),
            corpus: self.corpus.clone(),
            index: self.index.clone(),
        }
    }
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    question: String,
    /// Number of documents to return.
    #[arg(long, default_value_t = 5)]
    l: usize,
    #[arg(long)]
    date_from: Option<String>,
    #[arg(long)]
    date_to: Option<String>,
    /// Print every retrieval stage.
    #[arg(long)]
    explain: bool,
    /// Print the response as JSON.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    sources: SourceArgs,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    sources: SourceArgs,
    #[arg(long, env = "QA_BIND", default_value = "127.0.0.1:8080")]
    bind: SocketAddr,
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Produce a run file (ranked chunk ids per question).
    Run {
        #[arg(long)]
        system: RetrievalSystem,
        /// QA file (JSONL) supplying the questions.
        #[arg(long)]
        questions: PathBuf,
        /// Ranking depth; defaults to the pipeline's `n`.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        sources: SourceArgs,
    },
    /// FM@k of a run file against gold answers.
    Fm {
        #[arg(long)]
        run: PathBuf,
        /// QA file (JSONL) with the gold answers.
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "5,20,50")]
        ks: Vec<usize>,
        #[arg(long, env = "QA_CONFIG")]
        config: Option<PathBuf>,
        /// Write the full report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best-span EM and F1 of the reader on each question's answer passage.
    Reader {
        #[arg(long)]
        qa: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        /// Spans per passage; defaults to the pipeline's `m`.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, env = "QA_CONFIG")]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FixtureCommand {
    /// Write the demo, two-topic and synthetic corpora as JSONL.
    Write {
        #[arg(long, default_value = "fixtures")]
        out_dir: PathBuf,
    },
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| "warn,odqa_cli=info".into()),
        )
        .with_writer(std::io::stderr)
        .init();

    match Cli::parse().command {
        Command::Corpus(cmd) => corpus(cmd),
        Command::Index(IndexCommand::Build {
            corpus,
            provider,
            out,
            dim,
            config,
        }) => index_build(&corpus, provider, &out, dim, config.as_deref()),
        Command::Query(args) => query(args),
        Command::Serve(args) => serve(args),
        Command::Eval(cmd) => eval(cmd),
        Command::Fixture(FixtureCommand::Write { out_dir }) => {
            for path in write_fixture_files(&out_dir)? {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

fn corpus(cmd: CorpusCommand) -> Result<()> {
    match cmd {
        CorpusCommand::Chunk {
            input,
            out,
            min,
            max,
            config,
        } => {
            let cfg = load_config(config.as_deref())?;
            let min = min.unwrap_or(cfg.chunking.min_tokens);
            let max = max.unwrap_or(cfg.chunking.max_tokens);
            let articles: Vec<Article> = read_jsonl(&input)?;
            let chunks = chunk_corpus(&articles, min, max)?;
            write_jsonl(&out, &chunks)?;
            eprintln!("{} articles -> {} chunks", articles.len(), chunks.len());
        }
        CorpusCommand::Split {
            input,
            seed,
            out_dir,
        } => {
            let qa: Vec<QAPair> = read_jsonl(&input)?;
            let split = split_dataset(qa, seed, &DocumentQuestionFilter::default());
            std::fs::create_dir_all(&out_dir)?;
            write_jsonl(out_dir.join("train.jsonl"), &split.train)?;
            write_jsonl(out_dir.join("dev.jsonl"), &split.dev)?;
            write_jsonl(out_dir.join("test.jsonl"), &split.test)?;
            write_jsonl(out_dir.join("excluded.jsonl"), &split.excluded)?;
            eprintln!(
                "train {} / dev {} / test {} ({} document-specific questions excluded)",
                split.train.len(),
                split.dev.len(),
                split.test.len(),
                split.excluded.len()
            );
        }
        CorpusCommand::Samples { qa, corpus, out } => {
            let qa: Vec<QAPair> = read_jsonl(&qa)?;
            let chunks = ChunkStore::load(&corpus)?;
            let set = build_retrieval_samples(&qa, &chunks)?;
            write_jsonl(&out, &set.samples)?;
            eprintln!(
                "{} samples, {} questions dropped (answer not inside any chunk)",
                set.samples.len(),
                set.dropped
            );
        }
    }
    Ok(())
}

fn index_build(
    corpus: &Path,
    provider: Option<String>,
    out: &Path,
    dim: Option<usize>,
    config: Option<&Path>,
) -> Result<()> {
    let mut cfg = load_config(config)?;
    if let Some(p) = provider {
        cfg.embedding.provider = p;
    }
    if let Some(d) = dim {
        cfg.embedding.dimension = d;
    }
    let stoplist = cfg.stoplist()?;
    let spec = ProviderSpec::parse(&cfg.embedding.provider)?;
    let provider = spec.build(cfg.embedding.dimension, &stoplist, &cfg.embedding.endpoint)?;
    let chunks = ChunkStore::load(corpus)?;
    let index = build_index(&chunks, provider.as_ref())?;
    index.save(out)?;
    eprintln!(
        "indexed {} chunks with {} into {}",
        index.len(),
        index.fingerprint(),
        out.display()
    );
    Ok(())
}

fn query(args: QueryArgs) -> Result<()> {
    let (engine, _) = load_engine(&args.sources.sources())?;
    let engine = engine.with_max_top_k(args.l.max(1));
    let req = QueryRequest {
        question: args.question.clone(),
        top_k: args.l,
        date_from: args.date_from.clone(),
        date_to: args.date_to.clone(),
        include_timing: false,
    };
    let resp = engine.handle_query(&req)?;
    let mut out = String::new();
    if args.explain {
        out.push_str(&explain(&engine, &args.question, args.l)?);
    }
    if args.json {
        out.push_str(&serde_json::to_string_pretty(&resp)?);
        out.push('\n');
    } else {
        out.push_str(&render(&resp));
    }
    print!("{out}");
    Ok(())
}

fn explain(engine: &Engine, question: &str, l: usize) -> Result<String> {
    let r = engine.explain(question, l)?;
    let mut out = String::new();
    let top = |list: &odqa_core::RankedList| {
        list.iter()
            .take(10)
            .map(|e| format!("{} ({:.4})", e.chunk_id, e.score))
            .collect::<Vec<_>>()
            .join(", ")
    };
    writeln!(out, "dense top-10: {}", top(&r.dense))?;
    writeln!(out, "bm25+ top-10: {}", top(&r.bm25))?;
    writeln!(
        out,
        "pool: {} chunks in {} clusters",
        r.pool.len(),
        r.clusters.num_clusters
    )?;
    writeln!(out, "cluster sizes: {:?}", r.clusters.sizes())?;
    writeln!(out, "allocation: {:?}", r.allocation)?;
    writeln!(
        out,
        "selected: {}",
        r.selected.ids().collect::<Vec<_>>().join(", ")
    )?;
    writeln!(out)?;
    Ok(out)
}

fn render(resp: &QueryResponse) -> String {
    let mut out = String::new();
    if resp.date_filter_relaxed {
        out.push_str(
            "No documents in the requested date range; showing results from any date.\n\n",
        );
    }
    if resp.reader_fallback {
        out.push_str("Reader unavailable; answers come from the lexical baseline.\n\n");
    }
    for (i, d) in resp.documents.iter().enumerate() {
        let date = d
            .publish_date
            .map_or_else(|| "undated".to_string(), |d| d.to_string());
        let _ = writeln!(out, "{}. [{}] {} ({date})", i + 1, d.chunk_id, d.journal);
        if !d.title.is_empty() {
            let _ = writeln!(out, "   {}", d.title);
        }
        match d.doc_confidence {
            Some(c) => {
                let _ = writeln!(out, "   confidence {c:.4}");
            }
            None => out.push_str("   no answer found\n"),
        }
        for h in &d.highlights {
            let _ = writeln!(out, "   > {} ({:.4})", h.text, h.confidence);
        }
    }
    out
}

fn serve(args: ServeArgs) -> Result<()> {
    let (engine, _) = load_engine(&args.sources.sources())?;
    let health = engine.health();
    tracing::info!(
        status = %health.status,
        chunks = health.chunk_count,
        fingerprint = %health.index_fingerprint,
        "engine loaded"
    );
    for note in &health.notes {
        tracing::warn!("{note}");
    }
    let app = odqa_cli::router(Arc::new(engine));
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(args.bind)
            .await
            .with_context(|| format!("binding {}", args.bind))?;
        tracing::info!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

fn gold_records(path: &Path) -> Result<BTreeMap<String, GoldRecord>> {
    let qa: Vec<QAPair> = read_jsonl(path)?;
    let mut gold = BTreeMap::new();
    for (i, q) in qa.iter().enumerate() {
        let key = question_key(q, i);
        let record = GoldRecord {
            question_id: key.clone(),
            question: q.question.clone(),
            answer: q.answer.clone(),
        };
        if gold.insert(key.clone(), record).is_some() {
            bail!("duplicate question id `{key}` in {}", path.display());
        }
    }
    Ok(gold)
}

fn eval(cmd: EvalCommand) -> Result<()> {
    match cmd {
        EvalCommand::Run {
            system,
            questions,
            n,
            out,
            sources,
        } => {
            let cfg = load_config(sources.config.as_deref())?;
            let corpus = sources
                .corpus
                .or(cfg.corpus.clone())
                .context("no corpus given")?;
            let index_path = sources
                .index
                .or(cfg.index.clone())
                .context("no index given")?;
            let chunks = ChunkStore::load(&corpus)?;
            let index = DenseIndex::load(&index_path)?;
            let stoplist = cfg.stoplist()?;
            let provider = cfg.embedding_provider(&stoplist)?;
            index.check_provider(provider.as_ref())?;
            let qa: Vec<QAPair> = read_jsonl(&questions)?;
            let run = build_run(
                system,
                &qa,
                n.unwrap_or(cfg.pipeline.n),
                &cfg.pipeline.bm25,
                &index,
                provider.as_ref(),
                &chunks,
                &stoplist,
            )?;
            let records: Vec<RunRecord> = run
                .into_iter()
                .map(|(question_id, ranked_chunk_ids)| RunRecord {
                    question_id,
                    ranked_chunk_ids,
                })
                .collect();
            write_jsonl(&out, &records)?;
        }
        EvalCommand::Fm {
            run,
            gold,
            corpus,
            ks,
            config,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let records: Vec<RunRecord> = read_jsonl(&run)?;
            let run: BTreeMap<String, Vec<String>> = records
                .into_iter()
                .map(|r| (r.question_id, r.ranked_chunk_ids))
                .collect();
            let gold = gold_records(&gold)?;
            let chunks = ChunkStore::load(&corpus)?;
            let stoplist = cfg.stoplist()?;
            let encoder = cfg.embedding_provider(&stoplist)?;
            let report = fm_at_k(&run, &gold, &ks, &cfg.fuzzy, &chunks, encoder.as_ref())?;
            for (k, score) in &report.scores {
                println!("FM@{k}\t{score:.4}");
            }
            if !report.missing_questions.is_empty() {
                eprintln!(
                    "{} questions missing from the run",
                    report.missing_questions.len()
                );
            }
            if let Some(out) = out {
                std::fs::write(&out, serde_json::to_string_pretty(&report)?)?;
            }
        }
        EvalCommand::Reader {
            qa,
            corpus,
            m,
            config,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let qa: Vec<QAPair> = read_jsonl(&qa)?;
            let chunks = ChunkStore::load(&corpus)?;
            let stoplist = cfg.stoplist()?;
            let scorer = cfg.span_scorer(&stoplist);
            let report = evaluate_reader(
                &qa,
                &chunks,
                scorer.as_ref(),
                m.unwrap_or(cfg.pipeline.m),
                cfg.pipeline.max_span_len,
            )?;
            println!("EM\t{:.4}\nF1\t{:.4}", report.em, report.f1);
            if !report.skipped.is_empty() {
                eprintln!(
                    "{} questions skipped (answer not in any chunk)",
                    report.skipped.len()
                );
            }
            if let Some(out) = out {
                std::fs::write(&out, serde_json::to_string_pretty(&report)?)?;
            }
        }
    }
    Ok(())
}
