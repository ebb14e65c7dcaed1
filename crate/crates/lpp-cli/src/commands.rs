//! Subcommand definitions and their handlers. Every handler returns one [`Table`].

use std::fs;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use lpp_core::chainbounds::bounds_c;
use lpp_core::charged::{build_witness, estimate_cpx, scaling_check, verify_critical, Rational, WitnessGraph};
use lpp_core::euler::{partition_numbers, skeleton_rate};
use lpp_core::graph::{
    clt_experiment, heavy_edge_exponent, longest_path_profile, sample_window, skeleton_gap_pmf, skeleton_points,
    EdgeLaw,
};
use lpp_core::harness::{replicate, MonteCarloSummary, RngStream};
use lpp_core::ibm::{estimate_c_via_front, simulate_speed, Configuration, LetterLaw};
use lpp_core::mgs::{complexity_profile, estimate_cf, glynn_rhee_estimate, ChargeFamily, ChargeLaw1};
use lpp_core::pwit::{brw_min_displacement, coupled_tree, shortest_path, simulate_pwit, sparse_longest};
use lpp_core::words::{a_coefficients, classify, coupling_number, is_triangular, speed_series_lower, Word, WordClass};
use lpp_core::LppError;
use serde_json::Value;

use crate::output::{Cell, Table};

/// Failures surfaced to the user with exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Core(#[from] LppError),
    #[error("{0}")]
    Input(String),
}

impl CommandError {
    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            CommandError::Core(e) => match e {
                LppError::InvalidParameter(_) => "invalid_parameter",
                LppError::Resource(_) => "resource",
                LppError::Divergence(_) => "divergence",
                LppError::Numeric { .. } => "numeric",
                LppError::Internal(_) => "internal",
                LppError::GeodesicNotUnique(_) => "geodesic_not_unique",
            },
            CommandError::Input(_) => "input",
        }
    }
}

type Result<T> = std::result::Result<T, CommandError>;

/// Settings shared by every handler.
#[derive(Debug, Clone, Copy)]
pub struct Context {
    pub seed: u64,
    pub replicas: Option<usize>,
}

impl Context {
    fn reps(&self, default: usize) -> usize {
        self.replicas.unwrap_or(default)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Random graph windows: sampling, longest paths, fluctuations, skeletons, heavy tails.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Skeleton density and partition numbers.
    #[command(subcommand)]
    Euler(EulerCmd),
    /// The bin model: speed by front displacement and by the front-content formula.
    #[command(subcommand)]
    Ibm(IbmCmd),
    /// Word coefficients, classification and the series lower bound.
    #[command(subcommand)]
    Words(WordsCmd),
    /// Chain bounds on the growth constant.
    Bounds(BoundsArgs),
    /// Continuous-time tree, branching random walk, coupled tree and sparse graphs.
    #[command(subcommand)]
    Pwit(PwitCmd),
    /// Law of the shortest 0-to-(n-1) path length.
    Shortest(ShortestArgs),
    /// Two-charge graphs: estimates, criticality witnesses and scaling.
    #[command(subcommand)]
    Charged(ChargedCmd),
    /// Perfect simulation of the max-growth system.
    #[command(subcommand)]
    Mgs(MgsCmd),
}

pub fn run(cmd: &Command, ctx: &Context) -> Result<Table> {
    match cmd {
        Command::Graph(c) => run_graph(c, ctx),
        Command::Euler(c) => run_euler(c),
        Command::Ibm(c) => run_ibm(c, ctx),
        Command::Words(c) => run_words(c),
        Command::Bounds(a) => run_bounds(a),
        Command::Pwit(c) => run_pwit(c, ctx),
        Command::Shortest(a) => run_shortest(a, ctx),
        Command::Charged(c) => run_charged(c, ctx),
        Command::Mgs(c) => run_mgs(c, ctx),
    }
}

/// `--p` values, or `i/(grid+1)` for `i = 1..=grid` when `--grid` is given.
#[derive(Debug, Args)]
pub struct ProbGrid {
    /// Edge probabilities, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    p: Vec<f64>,
    /// Evenly spaced grid of this many interior points of (0, 1); overrides --p.
    #[arg(long)]
    grid: Option<usize>,
}

impl ProbGrid {
    fn values(&self) -> Result<Vec<f64>> {
        match self.grid {
            Some(0) => Err(CommandError::Input("--grid needs at least one point".into())),
            Some(g) => Ok((1..=g).map(|i| i as f64 / (g + 1) as f64).collect()),
            None => Ok(self.p.clone()),
        }
    }
}

fn summary_cells(s: &MonteCarloSummary) -> Vec<Cell> {
    vec![s.mean.into(), s.std_error().into(), s.ci95_halfwidth.into()]
}

fn joined<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

// ---------------------------------------------------------------- graph

#[derive(Debug, Subcommand)]
pub enum GraphCmd {
    /// Edge list of one window on vertices 0..=n.
    Sample {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
    },
    /// Longest path per vertex, L_n / n, over replicas (default 100).
    Longest {
        #[command(flatten)]
        probs: ProbGrid,
        #[arg(long, default_value_t = 2000)]
        n: usize,
    },
    /// Fluctuations of the longest path against the skeleton-cycle variance (default 200 replicas).
    Clt {
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 2000)]
        cycles: usize,
    },
    /// Empirical law of the gap between consecutive skeleton points (default 10000 replicas).
    Gaps {
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 6)]
        nmax: usize,
    },
    /// Skeleton points of one window on vertices 0..=n.
    Skeleton {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
    },
    /// Growth of the heaviest geodesic edge under Pareto weights (default 50 replicas).
    Heavy {
        /// Tail exponent of the weights, above 2.
        #[arg(long, default_value_t = 3.0)]
        s: f64,
        /// Window sizes, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "32,64,128")]
        sizes: Vec<usize>,
    },
}

fn run_graph(cmd: &GraphCmd, ctx: &Context) -> Result<Table> {
    match cmd {
        GraphCmd::Sample { n, p } => {
            let w = sample_window(*n, &EdgeLaw::Bernoulli(*p), &mut RngStream::new(ctx.seed, 0))?;
            let mut t = Table::new(&["i", "j"]);
            for j in 1..=w.n() {
                for i in 0..j {
                    if w.present(i, j) {
                        t.push(vec![i.into(), j.into()]);
                    }
                }
            }
            Ok(t)
        }
        GraphCmd::Longest { probs, n } => {
            let reps = ctx.reps(100);
            let mut t = Table::new(&["p", "n", "replicas", "estimate", "std_error", "ci95"]);
            for p in probs.values()? {
                let law = EdgeLaw::Bernoulli(p);
                law.validate()?;
                let samples: Vec<f64> = replicate(reps, ctx.seed, |rng| {
                    let w = sample_window(*n, &law, rng).expect("parameters validated");
                    *longest_path_profile(&w).iter().max().expect("window is nonempty") as f64 / *n as f64
                })
                .into_iter()
                .collect();
                let s = MonteCarloSummary::from_samples(&samples)?;
                let mut row = vec![p.into(), (*n).into(), reps.into()];
                row.extend(summary_cells(&s));
                t.push(row);
            }
            Ok(t)
        }
        GraphCmd::Clt { p, n, cycles } => {
            let r = clt_experiment(*p, *n, ctx.reps(200), *cycles, ctx.seed)?;
            let mut t = Table::new(&["p", "n", "c_hat", "sigma2", "ks", "ks_scaled", "cycles", "degenerate"]);
            t.push(vec![
                (*p).into(),
                (*n).into(),
                r.c_hat.into(),
                r.sigma2.into(),
                r.ks.into(),
                r.ks_scaled.into(),
                r.cycles.into(),
                r.degenerate.into(),
            ]);
            Ok(t)
        }
        GraphCmd::Gaps { p, nmax } => {
            let mut t = Table::new(&["n", "estimate", "ci95"]);
            for g in skeleton_gap_pmf(*p, *nmax, ctx.reps(10_000), ctx.seed)? {
                t.push(vec![g.n.into(), g.estimate.into(), g.ci95.into()]);
            }
            Ok(t)
        }
        GraphCmd::Skeleton { n, p } => {
            let w = sample_window(*n, &EdgeLaw::Bernoulli(*p), &mut RngStream::new(ctx.seed, 0))?;
            let report = skeleton_points(&w)?;
            let mut t = Table::new(&["index", "point"]);
            for (k, v) in report.points.iter().enumerate() {
                t.push(vec![k.into(), (*v).into()]);
            }
            Ok(t)
        }
        GraphCmd::Heavy { s, sizes } => {
            let r = heavy_edge_exponent(*s, sizes, ctx.reps(50), ctx.seed)?;
            let mut t = Table::new(&["n", "mean_heaviest_edge", "slope"]);
            for (n, m) in &r.points {
                t.push(vec![(*n).into(), (*m).into(), r.slope.into()]);
            }
            Ok(t)
        }
    }
}

// ---------------------------------------------------------------- euler

#[derive(Debug, Subcommand)]
pub enum EulerCmd {
    /// Skeleton density λ(p) and the mean gap 1/λ.
    Rate(ProbGrid),
    /// Partition numbers p(0..=nmax).
    Partitions {
        #[arg(long, default_value_t = 20)]
        nmax: usize,
    },
}

fn run_euler(cmd: &EulerCmd) -> Result<Table> {
    match cmd {
        EulerCmd::Rate(probs) => {
            let mut t = Table::new(&["p", "lambda", "mean_gap"]);
            for p in probs.values()? {
                let r = skeleton_rate(p)?;
                t.push(vec![p.into(), r.lambda.into(), r.mean_gap().into()]);
            }
            Ok(t)
        }
        EulerCmd::Partitions { nmax } => {
            let mut t = Table::new(&["n", "partitions"]);
            for (n, v) in partition_numbers(*nmax)?.into_iter().enumerate() {
                t.push(vec![n.into(), v.into()]);
            }
            Ok(t)
        }
    }
}

// ---------------------------------------------------------------- ibm

#[derive(Debug, Subcommand)]
pub enum IbmCmd {
    /// Front displacement per letter from one saturated ball (default 20 replicas).
    Speed {
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
    },
    /// `1 - E(1-p)^R` with R the front content, averaged after a burn-in (default 20 replicas).
    Front {
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
        #[arg(long, default_value_t = 1000)]
        burnin: usize,
    },
}

fn run_ibm(cmd: &IbmCmd, ctx: &Context) -> Result<Table> {
    let mut t = Table::new(&["p", "steps", "estimate", "std_error", "ci95"]);
    let (p, steps, s) = match cmd {
        IbmCmd::Speed { p, steps } => {
            let law = LetterLaw::Geometric(*p);
            let s = simulate_speed(&law, *steps, &Configuration::saturated_single(), ctx.reps(20), ctx.seed)?;
            (*p, *steps, s)
        }
        IbmCmd::Front { p, steps, burnin } => {
            (*p, *steps, estimate_c_via_front(*p, *steps, *burnin, ctx.reps(20), ctx.seed)?)
        }
    };
    let mut row = vec![p.into(), steps.into()];
    row.extend(summary_cells(&s));
    t.push(row);
    Ok(t)
}

// ---------------------------------------------------------------- words

#[derive(Debug, Subcommand)]
pub enum WordsCmd {
    /// Coefficients a_0..=a_nmax of the expansion at p = 1.
    An {
        #[arg(long, default_value_t = 8)]
        nmax: usize,
    },
    /// Class of a word given in display order (last-applied letter first).
    Classify {
        #[arg(long, value_delimiter = ',', required = true)]
        word: Vec<u32>,
    },
    /// Partial sum of the series lower bound over words of height at most hmax.
    Series {
        #[command(flatten)]
        probs: ProbGrid,
        #[arg(long, default_value_t = 6)]
        hmax: u32,
    },
}

fn run_words(cmd: &WordsCmd) -> Result<Table> {
    match cmd {
        WordsCmd::An { nmax } => {
            let mut t = Table::new(&["n", "a_n"]);
            for (n, a) in a_coefficients(*nmax)?.into_iter().enumerate() {
                t.push(vec![n.into(), a.into()]);
            }
            Ok(t)
        }
        WordsCmd::Classify { word } => {
            let w = Word::from_display(word)?;
            let class = match classify(&w) {
                WordClass::Good => "good",
                WordClass::Bad => "bad",
                WordClass::Ambivalent => "ambivalent",
            };
            let mut t = Table::new(&["word", "class", "triangular", "coupling_number"]);
            t.push(vec![
                joined(w.display_letters()).into(),
                class.into(),
                is_triangular(&w).into(),
                coupling_number(&w).into(),
            ]);
            Ok(t)
        }
        WordsCmd::Series { probs, hmax } => {
            let mut t = Table::new(&["p", "hmax", "lower"]);
            for p in probs.values()? {
                t.push(vec![p.into(), (*hmax).into(), speed_series_lower(p, *hmax)?.into()]);
            }
            Ok(t)
        }
    }
}

// ---------------------------------------------------------------- bounds

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    probs: ProbGrid,
    /// Chain orders, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "3,6,12")]
    k: Vec<usize>,
}

fn run_bounds(a: &BoundsArgs) -> Result<Table> {
    let mut t = Table::new(&["p", "k", "lower", "upper", "gap"]);
    for p in a.probs.values()? {
        for &k in &a.k {
            let b = bounds_c(p, k)?;
            t.push(vec![p.into(), k.into(), b.lower.into(), b.upper.into(), b.gap().into()]);
        }
    }
    Ok(t)
}

// ---------------------------------------------------------------- pwit

#[derive(Debug, Subcommand)]
pub enum PwitCmd {
    /// Population and generation sizes of the Yule tree against their means (default 10000 replicas).
    Sim {
        /// Times, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        t: Vec<f64>,
        /// Largest generation reported.
        #[arg(long, default_value_t = 4)]
        lmax: u32,
    },
    /// Leftmost particle of the branching random walk with selection, per generation (default 10 replicas).
    Brw {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        beam: usize,
    },
    /// One run of the coupled tree embedding.
    Coupled {
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Law of the longest path in a sparse graph on n vertices (default 1000 replicas).
    Sparse {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0.002)]
        p: f64,
    },
}

fn factorial(l: u32) -> f64 {
    (1..=l).map(f64::from).product()
}

fn run_pwit(cmd: &PwitCmd, ctx: &Context) -> Result<Table> {
    match cmd {
        PwitCmd::Sim { t: times, lmax } => {
            let t_max = times.iter().copied().fold(f64::NAN, f64::max);
            if !(t_max > 0.0) || times.iter().any(|x| !(*x >= 0.0)) {
                return Err(CommandError::Input("times must be nonnegative with a positive maximum".into()));
            }
            let runs = replicate(ctx.reps(10_000), ctx.seed, |rng| simulate_pwit(t_max, rng));
            let runs = runs.into_iter().collect::<std::result::Result<Vec<_>, _>>()?;
            let mut table = Table::new(&["t", "statistic", "mean", "std_error", "exact"]);
            for &t in times {
                let pop: Vec<f64> = runs.iter().map(|r| r.population(t) as f64).collect();
                let s = MonteCarloSummary::from_samples(&pop)?;
                table.push(vec![t.into(), "population".into(), s.mean.into(), s.std_error().into(), t.exp().into()]);
                for l in 0..=*lmax {
                    let z: Vec<f64> = runs.iter().map(|r| r.generation_count(t, l) as f64).collect();
                    let s = MonteCarloSummary::from_samples(&z)?;
                    let exact = t.powi(l as i32) / factorial(l);
                    table.push(vec![
                        t.into(),
                        format!("generation_{l}").into(),
                        s.mean.into(),
                        s.std_error().into(),
                        exact.into(),
                    ]);
                }
            }
            Ok(table)
        }
        PwitCmd::Brw { n, beam } => {
            let runs = replicate(ctx.reps(10), ctx.seed, |rng| brw_min_displacement(*n, *beam, rng));
            let per_gen: Vec<f64> = runs
                .into_iter()
                .map(|r| r.map(|m| m / *n as f64))
                .collect::<std::result::Result<_, _>>()?;
            let s = MonteCarloSummary::from_samples(&per_gen)?;
            let mut t = Table::new(&["n", "beam", "estimate", "std_error", "ci95"]);
            let mut row = vec![(*n).into(), (*beam).into()];
            row.extend(summary_cells(&s));
            t.push(row);
            Ok(t)
        }
        PwitCmd::Coupled { p, steps } => {
            let tree = coupled_tree(*p, *steps, &mut RngStream::new(ctx.seed, 0))?;
            let mut t = Table::new(&["index", "vertex", "time", "length", "parent", "parent_rank", "front"]);
            for (i, v) in tree.iter().enumerate() {
                t.push(vec![
                    i.into(),
                    v.kappa.into(),
                    v.time.into(),
                    v.length.into(),
                    v.parent.into(),
                    v.parent_rank.into(),
                    v.front.into(),
                ]);
            }
            Ok(t)
        }
        PwitCmd::Sparse { n, p } => {
            let r = sparse_longest(*n, *p, ctx.reps(1000), ctx.seed)?;
            let prediction = r.log_regime_prediction.unwrap_or(f64::NAN);
            let mut t = Table::new(&["length", "probability", "std_error", "first_moment", "gamma", "prediction"]);
            for &k in r.law.counts.keys() {
                let prob = r.law.prob(k);
                t.push(vec![
                    k.into(),
                    prob.into(),
                    r.law.std_error(prob).into(),
                    r.first_moment.into(),
                    r.gamma.into(),
                    prediction.into(),
                ]);
            }
            Ok(t)
        }
    }
}

// ---------------------------------------------------------------- shortest

#[derive(Debug, Args)]
pub struct ShortestArgs {
    /// Number of vertices.
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 0.3)]
    p: f64,
}

fn run_shortest(a: &ShortestArgs, ctx: &Context) -> Result<Table> {
    let law = shortest_path(a.n, a.p, ctx.reps(20_000), ctx.seed)?;
    let mut t = Table::new(&["length", "probability", "std_error"]);
    for &k in law.counts.keys() {
        let prob = law.prob(k);
        t.push(vec![k.into(), prob.into(), law.std_error(prob).into()]);
    }
    if law.infinite > 0 {
        let prob = law.prob_infinite();
        t.push(vec!["inf".into(), prob.into(), law.std_error(prob).into()]);
    }
    Ok(t)
}

// ---------------------------------------------------------------- charged

fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    Rational::parse(s).map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum ChargedCmd {
    /// Growth constant with unit charge w.p. p and charge x otherwise (default 100 replicas).
    Estimate {
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// The second charge; `-inf` gives the plain random graph.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
    /// Blue edge list of the criticality witness for a rational x (pairs not listed are red).
    Witness {
        #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
        x: Rational,
    },
    /// Criticality of a witness graph, built from --witness or read from --graph.
    Verify {
        /// Build the witness for this rational.
        #[arg(long, value_parser = parse_rational, allow_hyphen_values = true, conflicts_with = "graph")]
        witness: Option<Rational>,
        /// Edge list written by `charged witness` (CSV or JSON, columns n,i,j).
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Red charge; defaults to the witness value.
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
    },
    /// Both forms of the scaling relation between p and 1-p (default 100 replicas).
    Scaling {
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
}

/// Reads `(n, i, j)` rows in either encoding; the format is sniffed from the first byte.
fn read_witness(path: &PathBuf) -> Result<WitnessGraph> {
    let text = fs::read_to_string(path)
        .map_err(|e| CommandError::Input(format!("cannot read {}: {e}", path.display())))?;
    let bad = |what: &str| CommandError::Input(format!("{}: {what}", path.display()));
    let mut rows: Vec<[usize; 3]> = Vec::new();
    if text.trim_start().starts_with('[') {
        let v: Value = serde_json::from_str(&text).map_err(|e| bad(&e.to_string()))?;
        for obj in v.as_array().ok_or_else(|| bad("expected an array"))? {
            let field = |k: &str| obj.get(k).and_then(Value::as_u64).map(|x| x as usize).ok_or_else(|| bad(k));
            rows.push([field("n")?, field("i")?, field("j")?]);
        }
    } else {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("n,i,j") {
            return Err(bad("expected header n,i,j"));
        }
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let f: Vec<usize> =
                line.split(',').map(|x| x.trim().parse()).collect::<std::result::Result<_, _>>().map_err(|_| bad(line))?;
            let [n, i, j] = f[..] else { return Err(bad(line)) };
            rows.push([n, i, j]);
        }
    }
    let n = rows.first().map(|r| r[0]).ok_or_else(|| bad("no edges"))?;
    if rows.iter().any(|r| r[0] != n) {
        return Err(bad("inconsistent n"));
    }
    Ok(WitnessGraph::new(n, rows.iter().map(|r| (r[1], r[2])))?)
}

fn run_charged(cmd: &ChargedCmd, ctx: &Context) -> Result<Table> {
    match cmd {
        ChargedCmd::Estimate { p, x, n } => {
            let s = estimate_cpx(*p, *x, *n, ctx.reps(100), ctx.seed)?;
            let mut t = Table::new(&["p", "x", "n", "estimate", "std_error", "ci95"]);
            let mut row = vec![(*p).into(), (*x).into(), (*n).into()];
            row.extend(summary_cells(&s));
            t.push(row);
            Ok(t)
        }
        ChargedCmd::Witness { x } => {
            let g = build_witness(*x)?;
            let mut t = Table::new(&["n", "i", "j"]);
            for &(i, j) in &g.blue_edges {
                t.push(vec![g.n.into(), i.into(), j.into()]);
            }
            Ok(t)
        }
        ChargedCmd::Verify { witness, graph, x } => {
            let (g, x) = match (witness, graph) {
                (Some(r), _) => (build_witness(*r)?, x.unwrap_or(r.to_f64())),
                (None, Some(path)) => {
                    let x = x.ok_or_else(|| CommandError::Input("--graph needs --x".into()))?;
                    (read_witness(path)?, x)
                }
                (None, None) => return Err(CommandError::Input("give --witness or --graph".into())),
            };
            let c = verify_critical(&g, x)?;
            let (low, high) = c.certificate.clone().map(|(a, b)| (joined(a), joined(b))).unwrap_or_default();
            let mut t = Table::new(&[
                "n",
                "x",
                "admissible",
                "critical",
                "max_charge",
                "red_counts",
                "path_fewest_red",
                "path_most_red",
            ]);
            t.push(vec![
                g.n.into(),
                x.into(),
                c.admissible.into(),
                c.is_critical().into(),
                c.max_charge.into(),
                joined(&c.maximal_red_counts).into(),
                low.into(),
                high.into(),
            ]);
            Ok(t)
        }
        ChargedCmd::Scaling { p, x, n } => {
            let r = scaling_check(*p, *x, *n, ctx.reps(100), ctx.seed)?;
            let mut t = Table::new(&["form", "estimate", "std_error", "ci95"]);
            for (name, s) in [("direct", &r.direct), ("reciprocal", &r.reciprocal), ("same_charge", &r.same_charge)] {
                let mut row = vec![name.into()];
                row.extend(summary_cells(s));
                t.push(row);
            }
            Ok(t)
        }
    }
}

// ---------------------------------------------------------------- mgs

/// A charge law named on the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist {
    label: String,
    law: ChargeLaw1,
}

impl Dist {
    /// Mass of the unit charge for the atomic laws, NaN otherwise.
    fn unit_mass(&self) -> f64 {
        match self.law {
            ChargeLaw1::TwoAtom { p, .. } => p,
            _ => f64::NAN,
        }
    }
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    s.trim().parse().map_err(|_| format!("not a number: {s:?}"))
}

/// `shifted-exp`, `bernoulli:<p>`, `two-atom:<p>,<x>` or `truncated:<shift>,<level>`.
pub fn parse_dist(s: &str) -> std::result::Result<Dist, String> {
    let (name, params) = s.split_once(':').unwrap_or((s, ""));
    let nums: Vec<f64> =
        if params.is_empty() { Vec::new() } else { params.split(',').map(parse_f64).collect::<std::result::Result<_, _>>()? };
    let law = match (name, nums.as_slice()) {
        ("shifted-exp", []) => ChargeLaw1::ShiftedExp,
        ("bernoulli", [p]) => ChargeLaw1::TwoAtom { p: *p, x: f64::NEG_INFINITY },
        ("two-atom", [p, x]) => ChargeLaw1::TwoAtom { p: *p, x: *x },
        ("truncated", [shift, level]) => ChargeLaw1::Truncated { shift: *shift, level: *level },
        _ => {
            return Err(format!(
                "unknown law {s:?}; expected shifted-exp, bernoulli:<p>, two-atom:<p>,<x> or truncated:<shift>,<level>"
            ))
        }
    };
    law.validate().map_err(|e| e.to_string())?;
    Ok(Dist { label: s.to_string(), law })
}

#[derive(Debug, Subcommand)]
pub enum MgsCmd {
    /// Mean of N perfect samples and their cost.
    Estimate {
        #[arg(long, value_parser = parse_dist, default_value = "shifted-exp")]
        dist: Dist,
        /// Decoupling threshold; defaults to 0.7 for shifted-exp and 0 for atomic laws.
        #[arg(long)]
        ell: Option<f64>,
        /// Number of perfect samples.
        #[arg(long, default_value_t = 10_000)]
        n: usize,
    },
    /// Mean squared decoupling time over a grid of thresholds, for one or more laws.
    Complexity {
        /// Repeat the flag to compare laws.
        #[arg(long, value_parser = parse_dist, default_value = "shifted-exp")]
        dist: Vec<Dist>,
        /// Thresholds, comma separated; defaults to each law's default.
        #[arg(long, value_delimiter = ',')]
        ell: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
    /// Unbiased randomized-truncation estimate.
    GlynnRhee {
        /// `exp-tail:<shift>` for an unbounded exponential tail, otherwise a bounded law as in --dist.
        #[arg(long, default_value = "exp-tail:0.5")]
        family: String,
        /// Threshold for a bounded family; defaults as in `mgs estimate`.
        #[arg(long)]
        ell: Option<f64>,
        /// Geometric ratio of the truncation level law.
        #[arg(long, default_value_t = 0.1)]
        ratio: f64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
}

fn run_mgs(cmd: &MgsCmd, ctx: &Context) -> Result<Table> {
    match cmd {
        MgsCmd::Estimate { dist, ell, n } => {
            let ell = ell.unwrap_or(dist.law.default_ell());
            let e = estimate_cf(&dist.law, ell, *n, ctx.seed)?;
            let mut t = Table::new(&["estimate", "ci", "mean_Tstar_sq"]);
            t.push(vec![e.summary.mean.into(), e.summary.ci95_halfwidth.into(), e.mean_t_star_sq.into()]);
            Ok(t)
        }
        MgsCmd::Complexity { dist, ell, n } => {
            let mut t = Table::new(&["dist", "p", "ell", "mean_Tstar_sq"]);
            for d in dist {
                let grid = if ell.is_empty() { vec![d.law.default_ell()] } else { ell.clone() };
                for (l, cost) in complexity_profile(&d.law, &grid, *n, ctx.seed)? {
                    t.push(vec![d.label.as_str().into(), d.unit_mass().into(), l.into(), cost.into()]);
                }
            }
            Ok(t)
        }
        MgsCmd::GlynnRhee { family, ell, ratio, n } => {
            let fam = match family.strip_prefix("exp-tail:") {
                Some(shift) => ChargeFamily::ExpTail { shift: parse_f64(shift).map_err(CommandError::Input)? },
                None => {
                    let d = parse_dist(family).map_err(CommandError::Input)?;
                    let l = ell.unwrap_or(d.law.default_ell());
                    ChargeFamily::Bounded(d.law, l)
                }
            };
            let s = glynn_rhee_estimate(&fam, *ratio, *n, ctx.seed)?;
            let mut t = Table::new(&["estimate", "std_error", "ci95"]);
            t.push(summary_cells(&s));
            Ok(t)
        }
    }
}
