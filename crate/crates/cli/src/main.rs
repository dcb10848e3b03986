//! `ttorder`: cut spectra, orbital orderings, orbital entropies and ensemble experiments.
//!
//! Exit codes: 0 success, 2 malformed input or configuration, 3 invariant violation,
//! 4 exhaustive search too large without `--anneal`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ttorder::experiments::{run_ensemble, ExperimentConfig, Family};
use ttorder::io::{self, ManifestFile, MethodTiming, RunManifest};
use ttorder::ordering::{
    anneal_prefactor, anneal_weighted_prefactor, best_prefactor_exhaustive, best_weighted_prefactor,
    canonical_order, fiedler_order, AnnealConfig, OrderingResult, WarmStart, DEFAULT_EXHAUSTIVE_CAP,
};
use ttorder::rdm::{
    mutual_information, mutual_information_slater, rdm1_brute, rdm1_slater, rdm2_brute, rdm2_slater,
    von_neumann_entropy,
};
use ttorder::spectra::{
    check_inversion_symmetry, cut_spectrum_dense, cut_spectrum_sectors, prefactor, slater_cut_spectrum_block,
    CutSpectrum,
};
use ttorder::{correlated_tensor, CorrelatedState, Error, Ordering, PartialIsometry};

/// Largest accepted inversion-symmetry residual before the run counts as failed.
const RESIDUAL_LIMIT: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "ttorder", version, about = "Slater-determinant tensor spectra and orbital orderings")]
struct Cli {
    /// Worker threads for data-parallel work (default: all cores).
    #[arg(long, global = true, env = "TTORDER_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Singular values of one or all cuts, with the inversion-symmetry residual.
    Spectrum(SpectrumArgs),
    /// Compute an orbital ordering.
    Order(OrderArgs),
    /// One- and two-orbital density matrices, entropies and mutual information.
    Rdm(RdmArgs),
    /// Run a random-state ensemble and write per-method statistics.
    Experiment(ExperimentArgs),
    /// Randomized oracle checks of the closed-form identities.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct StateArgs {
    /// Orbital matrix as CSV (header row, N rows, L columns) or a superposition as JSON.
    #[arg(long, conflicts_with_all = ["n", "l"])]
    input: Option<PathBuf>,
    /// Seed of a random state when no input is given.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Particles of the random state.
    #[arg(long, requires = "l")]
    n: Option<usize>,
    /// Sites of the random state.
    #[arg(long, requires = "n")]
    l: Option<usize>,
    /// Family of the random state.
    #[arg(long, value_enum, default_value_t = FamilyArg::Slater)]
    family: FamilyArg,
    /// Relabel the sites first: comma-separated old labels in their new positions.
    #[arg(long, value_delimiter = ',')]
    permutation: Option<Vec<usize>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Slater,
    Weak,
    Strong,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Slater => Family::Slater,
            FamilyArg::Weak => Family::WeakCorrelated,
            FamilyArg::Strong => Family::StrongCorrelated,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpectrumMethod {
    /// SVD of the full matricization.
    Dense,
    /// SVD of each particle-number block.
    Sectors,
    /// Compound-matrix block formula (determinants only).
    Block,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    state: StateArgs,
    #[arg(long, conflicts_with = "all_cuts")]
    cut: Option<usize>,
    #[arg(long)]
    all_cuts: bool,
    #[arg(long, value_enum, default_value_t = SpectrumMethod::Sectors)]
    method: SpectrumMethod,
    #[arg(long, short, default_value = "spectrum.csv")]
    output: PathBuf,
    /// Write the CSV to stdout instead of a file.
    #[arg(long)]
    stdout: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderMethod {
    Canonical,
    Fiedler,
    Prefactor,
    Anneal,
    Weighted,
}

#[derive(Args)]
struct OrderArgs {
    #[command(flatten)]
    state: StateArgs,
    #[arg(long, value_enum)]
    method: OrderMethod,
    /// Labels placed in front (default: N for prefactor, L/2 for weighted).
    #[arg(long)]
    size: Option<usize>,
    /// Largest exhaustive search space.
    #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_CAP)]
    cap: u128,
    /// Fall back to annealing when the exhaustive search is too large.
    #[arg(long)]
    anneal: bool,
    #[arg(long, default_value_t = 1.0)]
    t0: f64,
    #[arg(long, default_value_t = 0.99)]
    decay: f64,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, value_enum, default_value_t = WarmArg::Fiedler)]
    warm_start: WarmArg,
    /// Also write the spectra of every cut before and after reordering.
    #[arg(long)]
    compare: bool,
    #[arg(long, short, default_value = "ordering.json")]
    output: PathBuf,
    #[arg(long)]
    stdout: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum WarmArg {
    Fiedler,
    Random,
}

#[derive(Args)]
struct RdmArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Site of the one-orbital matrix, or first site of the pair.
    #[arg(long)]
    i: Option<usize>,
    /// Second site of the pair.
    #[arg(long, requires = "i")]
    j: Option<usize>,
    /// Use the closed forms for a single determinant.
    #[arg(long)]
    closed_form: bool,
    #[arg(long, short, default_value = "mutual_information.csv")]
    output: PathBuf,
    #[arg(long)]
    stdout: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Ensemble configuration as JSON.
    #[arg(long, conflicts_with = "figure")]
    config: Option<PathBuf>,
    /// Reference configuration (N = 8, L = 16).
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=4))]
    figure: Option<u8>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    /// Render mean and quartile bands to plot.svg.
    #[arg(long)]
    plot: bool,
    /// Print the statistics CSV of every method to stdout.
    #[arg(long)]
    stdout: bool,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(Error::Consistency(_)) | Some(Error::Degenerate { .. }) => 3,
        Some(Error::CapExceeded { .. }) => 4,
        _ => 2,
    }
}

fn run(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Spectrum(a) => spectrum(a),
        Command::Order(a) => order(a),
        Command::Rdm(a) => rdm(a),
        Command::Experiment(a) => experiment(a),
        Command::Selftest(a) => selftest(a),
    }
}

fn load_state(a: &StateArgs) -> anyhow::Result<CorrelatedState> {
    let state = match (&a.input, a.n, a.l) {
        (Some(path), _, _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            if path.extension().is_some_and(|e| e == "json") {
                io::parse_state_json(&text)
            } else {
                io::parse_isometry_csv(&text).map(CorrelatedState::single)
            }
            .with_context(|| format!("parsing {}", path.display()))?
        }
        (None, Some(n), Some(l)) => ttorder::build_state(a.family.into(), n, l, a.seed)?,
        _ => return Err(Error::Validation("give --input or both --n and --l".into()).into()),
    };
    match &a.permutation {
        Some(p) => Ok(state.reorder(&Ordering::new(p.clone())?)?),
        None => Ok(state),
    }
}

fn emit(text: &str, path: &Path, stdout: bool) -> anyhow::Result<()> {
    if stdout {
        print!("{text}");
    } else {
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn determinant(state: &CorrelatedState) -> Option<PartialIsometry> {
    (state.terms().len() == 1).then(|| state.term_isometry(0).ok()).flatten()
}

fn spectrum(a: SpectrumArgs) -> anyhow::Result<()> {
    let state = load_state(&a.state)?;
    let l = state.modes();
    let cuts: Vec<usize> = match (a.cut, a.all_cuts) {
        (Some(k), _) => vec![k],
        (None, true) => (1..l).collect(),
        (None, false) => vec![l / 2],
    };
    let det = determinant(&state);
    let tensor = correlated_tensor(&state)?;
    let mut spectra: Vec<CutSpectrum> = Vec::new();
    for &k in &cuts {
        let s = match a.method {
            SpectrumMethod::Dense => cut_spectrum_dense(&tensor, k)?,
            SpectrumMethod::Sectors => cut_spectrum_sectors(&tensor, k)?,
            SpectrumMethod::Block => {
                let u = det.as_ref().ok_or_else(|| {
                    Error::Validation("the block formula needs a single determinant".into())
                })?;
                slater_cut_spectrum_block(u, k)?
            }
        };
        spectra.push(match (&det, s.prefactor) {
            (Some(u), None) => s.with_prefactor(prefactor(u, k)?),
            _ => s,
        });
    }
    let mut worst = 0.0f64;
    for s in &spectra {
        if s.prefactor.is_some() {
            let r = check_inversion_symmetry(s)?;
            worst = worst.max(r);
            eprintln!("cut {:>2}: rank {:>4}, prefactor {:e}, residual {:e}", s.cut, s.rank, s.prefactor.unwrap(), r);
        } else {
            eprintln!("cut {:>2}: rank {:>4}", s.cut, s.rank);
        }
    }
    emit(&io::write_spectra_csv(&spectra), &a.output, a.stdout)?;
    if worst >= RESIDUAL_LIMIT {
        return Err(Error::Consistency(format!("inversion-symmetry residual {worst:e}")).into());
    }
    Ok(())
}

fn anneal_config(a: &OrderArgs) -> anyhow::Result<AnnealConfig> {
    let cfg = AnnealConfig {
        t0: a.t0,
        decay: a.decay,
        max_iter: a.max_iter,
        seed: a.state.seed,
        warm_start: match a.warm_start {
            WarmArg::Fiedler => WarmStart::Fiedler,
            WarmArg::Random => WarmStart::Random,
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

fn order(a: OrderArgs) -> anyhow::Result<()> {
    let state = load_state(&a.state)?;
    let l = state.modes();
    let cfg = anneal_config(&a)?;
    let dominant = || state.term_isometry(state.dominant_term());
    let fiedler = || -> anyhow::Result<OrderingResult> {
        Ok(fiedler_order(&mutual_information(&correlated_tensor(&state)?)?))
    };
    let result = match a.method {
        OrderMethod::Canonical => canonical_order(l),
        OrderMethod::Fiedler => fiedler()?,
        OrderMethod::Prefactor => match best_prefactor_exhaustive(&dominant()?, a.size, a.cap) {
            Err(Error::CapExceeded { .. }) if a.anneal => {
                let f = fiedler()?.permutation;
                anneal_prefactor(&dominant()?, a.size, &cfg, Some(&f))?
            }
            r => r?,
        },
        OrderMethod::Anneal => {
            let f = fiedler()?.permutation;
            anneal_prefactor(&dominant()?, a.size, &cfg, Some(&f))?
        }
        OrderMethod::Weighted => match best_weighted_prefactor(&state, a.size, a.cap) {
            Err(Error::CapExceeded { .. }) if a.anneal => {
                let f = fiedler()?.permutation;
                anneal_weighted_prefactor(&state, a.size, &cfg, Some(&f))?
            }
            r => r?,
        },
    };
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(p) = result.objective {
        eprintln!("{}: objective {p:e}", result.method);
    }
    emit(&format!("{}\n", serde_json::to_string_pretty(&result)?), &a.output, a.stdout)?;
    if a.compare {
        let before = all_spectra(&state)?;
        let after = all_spectra(&state.reorder(&result.permutation)?)?;
        let stem = a.output.with_extension("");
        emit(&io::write_spectra_csv(&before), &stem.with_extension("before.csv"), a.stdout)?;
        emit(&io::write_spectra_csv(&after), &stem.with_extension("after.csv"), a.stdout)?;
    }
    Ok(())
}

fn all_spectra(state: &CorrelatedState) -> anyhow::Result<Vec<CutSpectrum>> {
    let t = correlated_tensor(state)?;
    let det = determinant(state);
    (1..state.modes())
        .map(|k| {
            let s = cut_spectrum_sectors(&t, k)?;
            Ok(match &det {
                Some(u) => s.with_prefactor(prefactor(u, k)?),
                None => s,
            })
        })
        .collect()
}

fn rdm(a: RdmArgs) -> anyhow::Result<()> {
    let state = load_state(&a.state)?;
    let det = determinant(&state);
    if a.closed_form && det.is_none() {
        return Err(Error::Validation("closed forms need a single determinant".into()).into());
    }
    let closed = det.filter(|_| a.closed_form);
    let tensor = correlated_tensor(&state)?;
    match (a.i, a.j) {
        (Some(i), None) => {
            let r = match &closed {
                Some(u) => rdm1_slater(u, i)?,
                None => rdm1_brute(&tensor, i)?,
            };
            eprintln!("entropy {}", von_neumann_entropy(&r.matrix)?);
            emit(&io::write_matrix_csv(&r.matrix, "occ"), &a.output, a.stdout)
        }
        (Some(i), Some(j)) => {
            let r = match &closed {
                Some(u) => rdm2_slater(u, i, j)?,
                None => rdm2_brute(&tensor, i, j)?,
            };
            eprintln!("entropy {}", von_neumann_entropy(&r.matrix)?);
            emit(&io::write_matrix_csv(&r.matrix, "occ"), &a.output, a.stdout)
        }
        _ => {
            let im = match &closed {
                Some(u) => mutual_information_slater(u)?,
                None => mutual_information(&tensor)?,
            };
            emit(&io::write_mutual_information_csv(&im), &a.output, a.stdout)
        }
    }
}

fn experiment(a: ExperimentArgs) -> anyhow::Result<()> {
    let mut cfg = match (&a.config, a.figure) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<ExperimentConfig>(&text)
                .map_err(Error::from)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        (None, Some(f)) => ExperimentConfig::figure(f, 400, 0)?,
        (None, None) => return Err(Error::Validation("give --config or --figure".into()).into()),
    };
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.validate()?;

    let start = Instant::now();
    let stats = run_ensemble(&cfg)?;
    eprintln!("{} trials in {:.1} s", cfg.trials, start.elapsed().as_secs_f64());
    if stats.fallbacks > 0 {
        eprintln!("{} spectra fell back to the dense path", stats.fallbacks);
    }
    for w in &stats.warnings {
        eprintln!("warning: {w}");
    }

    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let mut files = Vec::new();
    for m in &stats.methods {
        let name = format!("{}.csv", m.method);
        let text = io::write_stats_csv(&m.rows);
        fs::write(a.out_dir.join(&name), &text)?;
        if a.stdout {
            println!("# {}", m.method);
            print!("{text}");
        }
        files.push(ManifestFile { path: name, rows: m.rows.len() });
    }
    if a.plot {
        let title = format!("{:?}, N = {}, L = {}, {} trials", cfg.family, cfg.particles, cfg.modes, cfg.trials);
        fs::write(a.out_dir.join("plot.svg"), ttorder::plot::stats_svg(&title, &stats.methods))?;
    }
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config: cfg,
        trial_seeds: stats.trial_seeds.clone(),
        timings: stats
            .methods
            .iter()
            .map(|m| MethodTiming { method: m.method.to_string(), seconds: m.seconds })
            .collect(),
        fallbacks: stats.fallbacks,
        warnings: stats.warnings.clone(),
        files,
    };
    fs::write(a.out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    manifest.verify(&a.out_dir)?;
    for m in &stats.methods {
        eprintln!("{:<20} tail mean log10 sigma {:>8.3}", m.method, m.tail_mean(m.rows.len() * 3 / 5, m.rows.len()));
    }
    eprintln!("wrote {}", a.out_dir.display());
    Ok(())
}

fn selftest(a: SelftestArgs) -> anyhow::Result<()> {
    let reports = ttorder::selftest::run_all(a.seed)?;
    let mut failed = Vec::new();
    for r in &reports {
        let verdict = if r.passed() { "PASS" } else { "FAIL" };
        println!("{verdict} {:<18} cases {:>5}  max error {:e}  (limit {:e})", r.name, r.cases, r.max_error, r.tolerance);
        if !r.passed() {
            failed.push(r.name.clone());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(anyhow!(Error::Consistency(format!("failed suites: {}", failed.join(", ")))))
    }
}
