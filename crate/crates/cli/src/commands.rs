use std::collections::BTreeSet;
use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::Path;

use anyhow::anyhow;
use log::info;
use tagsim::baselines::{
    cosine_similarity_matrix, lsi_similarity_matrix, simrank_compute, LsiConfig, SimRankConfig,
};
use tagsim::corpus::{
    build_tag_resource_matrix, corpus_stats, group_bookmarks, ingest_assignments, Folksonomy,
    TagResourceMatrix,
};
use tagsim::evalharness::{
    generate_synthetic, run_retrieval_experiment, Method, MethodConfig, SplitSpec, SynthSpec,
};
use tagsim::expand::Expander;
use tagsim::search::SearchIndex;
use tagsim::simcore::{
    compute_similarities, format_sig, ConvergenceTrace, EngineConfig, SimilarityMatrix,
};

use crate::{Command, EngineArgs, EvalArgs, SimArgs, SynthArgs};

/// A failure with its exit status: 1 for bad invocations, 2 for bad data.
#[derive(Debug)]
pub enum CliError {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(e) | CliError::Data(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<tagsim::Error> for CliError {
    fn from(e: tagsim::Error) -> Self {
        match e {
            tagsim::Error::InvalidParameter { .. } | tagsim::Error::UnknownTag(_) => {
                CliError::Usage(e.into())
            }
            other => CliError::Data(other.into()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl fmt::Display) -> CliError {
    CliError::Usage(anyhow!("{msg}"))
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Data(anyhow!("{}: {e}", path.display()))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| io_error(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| io_error(path, e))
}

fn load_corpus(path: &Path) -> Result<(Folksonomy, TagResourceMatrix)> {
    let f = ingest_assignments(open(path)?)
        .map_err(|e| CliError::Data(anyhow!("{}: {e}", path.display())))?;
    let tr = build_tag_resource_matrix(&f)?;
    info!(
        "{}: {} users, {} resources, {} tags",
        path.display(),
        f.n_users(),
        f.n_resources(),
        f.n_tags()
    );
    Ok((f, tr))
}

fn load_similarity(path: &Path, n_tags: usize) -> Result<SimilarityMatrix> {
    let (st, _) = SimilarityMatrix::read_tsv(open(path)?)
        .map_err(|e| CliError::Data(anyhow!("{}: {e}", path.display())))?;
    if st.dim() != n_tags {
        return Err(CliError::Data(anyhow!(
            "{}: similarity matrix has dimension {} but the corpus has {} tags",
            path.display(),
            st.dim(),
            n_tags
        )));
    }
    Ok(st)
}

fn tag_indices(f: &Folksonomy, names: &[String]) -> Result<BTreeSet<usize>> {
    names
        .iter()
        .map(|n| {
            f.tags()
                .get(n)
                .ok_or_else(|| tagsim::Error::UnknownTag(n.clone()).into())
        })
        .collect()
}

impl EngineArgs {
    fn method_config(&self) -> Result<MethodConfig> {
        let cfg = MethodConfig {
            engine: EngineConfig {
                psi: self.psi,
                epsilon: self.epsilon,
                max_iters: self.max_iters,
                tau: self.tau,
                size_limit: self.size_limit,
                norm: self.norm,
            },
            simrank: SimRankConfig {
                c1: self.c1,
                c2: self.c2,
                iterations: self.simrank_iters,
            },
            lsi: LsiConfig {
                k: self.lsi_k,
                power_iterations: self.power_iters,
                seed: self.lsi_seed,
            },
        };
        cfg.engine.validate()?;
        cfg.simrank.validate()?;
        if cfg.lsi.k == 0 || cfg.lsi.power_iterations == 0 {
            return Err(usage("--lsi-k and --power-iters must be at least 1"));
        }
        Ok(cfg)
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Stats { input } => stats(&input),
        Command::Synth(args) => synth(&args),
        Command::Sim(args) => sim(&args),
        Command::Expand {
            input,
            sim,
            tags,
            k,
        } => expand(&input, &sim, &tags, k),
        Command::Enrich { input, sim, output } => enrich(&input, &sim, &output),
        Command::Query {
            input,
            sim,
            tags,
            q,
        } => query(&input, sim.as_deref(), &tags, q),
        Command::Eval(args) => eval(&args),
        Command::Trace { input, output } => trace(&input, output.as_deref()),
    }
}

fn stats(input: &Path) -> Result<()> {
    let (f, tr) = load_corpus(input)?;
    print!("{}", corpus_stats(&f, &tr));
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<()> {
    let spec = SynthSpec {
        n_users: args.users,
        n_resources: args.resources,
        n_tags: args.tags,
        n_bookmarks: args.bookmarks,
        tag_popularity_exponent: args.exponent,
        synonym_groups: args.synonym_groups,
        seed: args.seed,
        ..SynthSpec::default()
    };
    let f = generate_synthetic(&spec).map_err(usage)?;
    let mut buf = Vec::new();
    f.write_tsv(&mut buf)?;
    write_file(&args.output, &buf)
}

fn sim(args: &SimArgs) -> Result<()> {
    let cfg = args.engine.method_config()?;
    if args.trace.is_some() && args.method != Method::Mrs {
        return Err(usage("--trace is only available with --method mrs"));
    }
    if args.resources.is_some() && !matches!(args.method, Method::Mrs | Method::Simrank) {
        return Err(usage(
            "--resources is only available with --method mrs or simrank",
        ));
    }
    let (_, tr) = load_corpus(&args.input)?;
    let tau = cfg.engine.tau;
    let mut header: Vec<(&str, String)> = vec![("method", args.method.to_string())];
    let (st, sr) = match args.method {
        Method::None => return Err(usage("--method none has no similarity matrix")),
        Method::Mrs => {
            let out = compute_similarities(&tr, &cfg.engine)?;
            header.extend([
                ("psi", cfg.engine.psi.to_string()),
                ("epsilon", cfg.engine.epsilon.to_string()),
                ("max_iters", cfg.engine.max_iters.to_string()),
                ("norm", cfg.engine.norm.to_string()),
                ("iterations_run", out.trace.iterations_run.to_string()),
                ("converged", out.trace.converged.to_string()),
            ]);
            if let Some(path) = &args.trace {
                let mut buf = Vec::new();
                out.trace.write_tsv(&mut buf)?;
                write_file(path, &buf)?;
            }
            (out.st, Some(out.sr))
        }
        Method::Cosine => (cosine_similarity_matrix(&tr)?.sparsify(tau), None),
        Method::Simrank => {
            let (st, sr) = simrank_compute(&tr, &cfg.simrank)?;
            header.extend([
                ("c1", cfg.simrank.c1.to_string()),
                ("c2", cfg.simrank.c2.to_string()),
                ("iterations", cfg.simrank.iterations.to_string()),
            ]);
            (st.sparsify(tau), Some(sr.sparsify(tau)))
        }
        Method::Lsi => {
            let st = lsi_similarity_matrix(&tr, &cfg.lsi)?;
            header.extend([
                ("k", cfg.lsi.k.to_string()),
                ("power_iterations", cfg.lsi.power_iterations.to_string()),
                ("seed", cfg.lsi.seed.to_string()),
            ]);
            (st.sparsify(tau), None)
        }
    };
    header.push(("tau", tau.to_string()));
    let mut buf = Vec::new();
    st.write_tsv(&header, &mut buf)?;
    write_file(&args.output, &buf)?;
    if let (Some(path), Some(sr)) = (&args.resources, sr) {
        let mut buf = Vec::new();
        sr.write_tsv(&header, &mut buf)?;
        write_file(path, &buf)?;
    }
    Ok(())
}

fn expand(input: &Path, sim: &Path, tags: &[String], k: Option<usize>) -> Result<()> {
    let (f, tr) = load_corpus(input)?;
    let set = tag_indices(&f, tags)?;
    let st = load_similarity(sim, tr.n_tags())?;
    let res = Expander::new(&st, &tr)?.expand(&set, k)?;
    let mut out = io::stdout().lock();
    let original: Vec<&str> = res.original.iter().map(|&t| f.tags().name(t)).collect();
    let write = |out: &mut io::StdoutLock<'_>| -> io::Result<()> {
        writeln!(out, "# original={}", original.join(","))?;
        writeln!(out, "# k={}", res.k_used)?;
        for &(t, score) in &res.added {
            writeln!(out, "{}\t{}", f.tags().name(t), format_sig(score, 9))?;
        }
        Ok(())
    };
    write(&mut out).map_err(|e| CliError::Data(e.into()))
}

fn enrich(input: &Path, sim: &Path, output: &Path) -> Result<()> {
    let (f, tr) = load_corpus(input)?;
    let st = load_similarity(sim, tr.n_tags())?;
    let enriched = Expander::new(&st, &tr)?.enrich(&group_bookmarks(&f))?;
    let mut buf = Vec::new();
    f.from_bookmarks(&enriched).write_tsv(&mut buf)?;
    write_file(output, &buf)
}

fn query(input: &Path, sim: Option<&Path>, tags: &[String], q: usize) -> Result<()> {
    if q == 0 {
        return Err(usage("--q must be at least 1"));
    }
    let (f, tr) = load_corpus(input)?;
    let set = tag_indices(&f, tags)?;
    let index = SearchIndex::new(&tr);
    let res = match sim {
        Some(path) => {
            let st = load_similarity(path, tr.n_tags())?;
            index.query(&set, q, Some(&Expander::new(&st, &tr)?))?
        }
        None => index.query(&set, q, None)?,
    };
    res.write_tsv(f.resources(), io::stdout().lock())?;
    Ok(())
}

fn eval(args: &EvalArgs) -> Result<()> {
    let cfg = args.engine.method_config()?;
    let spec = SplitSpec {
        train_fraction: args.split,
        repeats: args.repeats,
        seed: args.seed,
    };
    spec.validate()?;
    if args.q.contains(&0) {
        return Err(usage("every --q value must be at least 1"));
    }
    let (f, _) = load_corpus(&args.input)?;
    let report = run_retrieval_experiment(&f, &spec, &args.methods, &args.q, &cfg)?;
    write_file(&args.output, report.to_json()?.as_bytes())?;
    if let Some(path) = &args.tsv {
        let mut buf = Vec::new();
        report.write_tsv(&mut buf)?;
        write_file(path, &buf)?;
    }
    Ok(())
}

fn trace(input: &Path, output: Option<&Path>) -> Result<()> {
    let t = ConvergenceTrace::read_tsv(open(input)?)
        .map_err(|e| CliError::Data(anyhow!("{}: {e}", input.display())))?;
    let mut buf = Vec::new();
    writeln!(buf, "k\tdelta_t\tdelta_r").map_err(|e| CliError::Data(e.into()))?;
    for s in &t.steps {
        writeln!(
            buf,
            "{}\t{}\t{}",
            s.k,
            format_sig(s.delta_t, 9),
            format_sig(s.delta_r, 9)
        )
        .map_err(|e| CliError::Data(e.into()))?;
    }
    match output {
        Some(path) => write_file(path, &buf),
        None => io::stdout()
            .write_all(&buf)
            .map_err(|e| CliError::Data(e.into())),
    }
}
