//! One function per subcommand. Each returns the finished JSON report.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;
use triprof::ego::{ego_parallel, ego_serial, EgoProfile};
use triprof::local::{compute_profiles, count_triangles_only, LocalProfile};
use triprof::oracle;
use triprof::sampling::{sample_edges, sample_mask, unbiased_estimate, SampleParams};
use triprof::theory::{
    check_theorem_conditions, edge_extremes, enumeration_size, evaluate_polynomials, ConditionForm,
    IdentityResiduals, LogBase, PolynomialValues, TheoremInputs, TheoremReport,
};
use triprof::{
    load_edge_list_with, Engine, EstimatedProfile, ExactProfile, ProfileVector, UndirectedGraph,
    VertexId,
};

use crate::report::{self, accuracy_ratio, mean_and_stddev, Echo, Envelope, GraphStats};
use crate::{
    BenchArgs, CliError, EgoArgs, EgoMode, GraphArgs, LogBaseArg, OracleArgs, PolysArgs,
    ProfileArgs, SparsifierArgs,
};

pub(crate) struct Context {
    engine: Engine,
    echo: Echo,
    no_timing: bool,
    started: Instant,
    graph: Option<GraphStats>,
    warnings: Vec<String>,
}

impl Context {
    pub(crate) fn new(engine: Engine, echo: Echo, no_timing: bool) -> Self {
        Context {
            engine,
            echo,
            no_timing,
            started: Instant::now(),
            graph: None,
            warnings: Vec::new(),
        }
    }

    fn load(&mut self, a: &GraphArgs) -> Result<UndirectedGraph, CliError> {
        let start = Instant::now();
        let file = File::open(&a.graph).map_err(|e| CliError::io(&a.graph, e))?;
        let g = load_edge_list_with(BufReader::new(file), a.vertex_count)
            .map_err(|e| CliError::at(&a.graph, e))?;
        self.engine.record("load", start, 0, 0);
        self.graph = Some(GraphStats {
            path: a.graph.display().to_string(),
            vertices: g.vertex_count(),
            edges: g.edge_count(),
        });
        Ok(g)
    }

    fn finish(&mut self, body: &impl Serialize) -> Result<Value, CliError> {
        let phases = self.engine.take_phases();
        report::assemble(
            Envelope {
                echo: &self.echo,
                graph: self.graph.as_ref(),
                phases: &phases,
                wall_clock: self.started.elapsed(),
                no_timing: self.no_timing,
                warnings: &self.warnings,
            },
            body,
        )
    }
}

fn write_tsv(
    path: &Path,
    header: &str,
    rows: impl Iterator<Item = String>,
) -> Result<(), CliError> {
    let io = |e| CliError::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(out, "{header}").map_err(io)?;
    for row in rows {
        writeln!(out, "{row}").map_err(io)?;
    }
    out.flush().map_err(io)
}

fn write_locals(path: &Path, g: &UndirectedGraph, locals: &[LocalProfile]) -> Result<(), CliError> {
    write_tsv(
        path,
        "vertex\tn0\tn1_e\tn1_d\tn2_e\tn2_c\tn3",
        locals.iter().enumerate().map(|(v, lp)| {
            let [a, b, c, d, e, f] = lp.to_array();
            format!("{}\t{a}\t{b}\t{c}\t{d}\t{e}\t{f}", g.label(v as VertexId))
        }),
    )
}

fn write_egos(
    path: &Path,
    g: &UndirectedGraph,
    rows: &[(VertexId, EgoProfile)],
) -> Result<(), CliError> {
    write_tsv(
        path,
        "center\tf0\tf1\tf2\tf3",
        rows.iter()
            .map(|(v, p)| format!("{}\t{}\t{}\t{}\t{}", g.label(*v), p.f0, p.f1, p.f2, p.f3)),
    )
}

#[derive(Serialize)]
#[serde(untagged)]
enum Global {
    Exact(ExactProfile),
    Estimated(EstimatedProfile),
}

type Ratios = ProfileVector<Option<f64>>;

#[derive(Serialize)]
struct ProfileBody {
    global: Global,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<ExactProfile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sampling: Option<Sampling>,
    #[serde(skip_serializing_if = "Option::is_none")]
    estimate: Option<EstimateSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    accuracy: Option<AccuracySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    local_path: Option<String>,
}

#[derive(Serialize)]
struct Sampling {
    p: f64,
    seed: u64,
    runs: u32,
}

#[derive(Serialize)]
struct SampledRun {
    seed: u64,
    kept_edges: usize,
    /// Exact profile of the sampled graph.
    sampled: ExactProfile,
    estimate: EstimatedProfile,
    #[serde(skip_serializing_if = "Option::is_none")]
    accuracy: Option<Ratios>,
}

#[derive(Serialize)]
struct EstimateSummary {
    mean: EstimatedProfile,
    stddev: ProfileVector<Option<f64>>,
    runs: Vec<SampledRun>,
}

#[derive(Serialize)]
struct AccuracySummary {
    /// Exact counts over the mean estimate.
    of_mean: Ratios,
    /// Mean and standard deviation of the per-run ratios.
    mean: Ratios,
    stddev: Ratios,
    /// Runs whose four ratios all lie in [0.9, 1.1].
    runs_within_10_percent: usize,
}

pub(crate) fn profile(ctx: &mut Context, a: &ProfileArgs) -> Result<Value, CliError> {
    let g = ctx.load(&a.graph)?;
    let Some(p) = a.p else {
        if a.runs != 1 || a.compare_exact {
            return Err(CliError::Usage(
                "--runs and --compare-exact need --p".into(),
            ));
        }
        let run = compute_profiles(&ctx.engine, &g)?;
        let local_path = match &a.local_out {
            Some(path) => {
                write_locals(path, &g, &run.locals)?;
                Some(path.display().to_string())
            }
            None => None,
        };
        return ctx.finish(&ProfileBody {
            global: Global::Exact(run.global),
            exact: None,
            sampling: None,
            estimate: None,
            accuracy: None,
            local_path,
        });
    };
    if a.local_out.is_some() {
        return Err(CliError::Usage(
            "--local-out is only available for exact runs (omit --p)".into(),
        ));
    }
    SampleParams::new(p, a.seed)?;

    let exact = match a.compare_exact {
        true => Some(compute_profiles(&ctx.engine, &g)?.global),
        false => None,
    };
    let mark = ctx.engine.phase_mark();
    let mut runs = Vec::with_capacity(a.runs as usize);
    for i in 0..a.runs {
        let seed = a.seed.wrapping_add(i as u64);
        let start = Instant::now();
        let (sample, mask) = sample_edges(&g, SampleParams::new(p, seed)?)?;
        ctx.engine.record("sample:edges", start, 0, 0);
        let sampled = compute_profiles(&ctx.engine, &sample)?.global;
        let estimate = unbiased_estimate(sampled.to_f64(), p)?;
        for (name, x) in report::ENTRY_NAMES.iter().zip(estimate.to_array()) {
            if x < 0.0 {
                ctx.warnings.push(format!(
                    "seed {seed}: estimate {name} = {x} is negative (sampling noise)"
                ));
            }
        }
        let accuracy = exact.map(|ex| {
            let r = accuracy_ratio(&ex, &estimate);
            for (name, ratio) in report::ENTRY_NAMES.iter().zip(r) {
                if ratio.is_none() {
                    ctx.warnings.push(format!(
                        "seed {seed}: estimate {name} is zero, accuracy ratio is null"
                    ));
                }
            }
            ProfileVector::from_array(r)
        });
        runs.push(SampledRun {
            seed,
            kept_edges: mask.kept(),
            sampled,
            estimate,
            accuracy,
        });
    }
    ctx.engine.coalesce_since(mark);

    let column = |i: usize| -> Vec<f64> { runs.iter().map(|r| r.estimate.to_array()[i]).collect() };
    let stats: [(Option<f64>, Option<f64>); 4] =
        std::array::from_fn(|i| mean_and_stddev(&column(i)));
    let mean = ProfileVector::from_array(stats.map(|s| s.0.unwrap_or(0.0)));
    let stddev = ProfileVector::from_array(stats.map(|s| s.1));

    let accuracy = exact.map(|ex| {
        let ratio_stats: [(Option<f64>, Option<f64>); 4] = std::array::from_fn(|i| {
            let col: Vec<f64> = runs
                .iter()
                .filter_map(|r| r.accuracy.and_then(|a| a.to_array()[i]))
                .collect();
            mean_and_stddev(&col)
        });
        let within = runs
            .iter()
            .filter(|r| {
                r.accuracy.is_some_and(|a| {
                    a.to_array()
                        .iter()
                        .all(|x| x.is_some_and(|x| (0.9..=1.1).contains(&x)))
                })
            })
            .count();
        AccuracySummary {
            of_mean: ProfileVector::from_array(accuracy_ratio(&ex, &mean)),
            mean: ProfileVector::from_array(ratio_stats.map(|s| s.0)),
            stddev: ProfileVector::from_array(ratio_stats.map(|s| s.1)),
            runs_within_10_percent: within,
        }
    });

    ctx.finish(&ProfileBody {
        global: Global::Estimated(mean),
        exact,
        sampling: Some(Sampling {
            p,
            seed: a.seed,
            runs: a.runs,
        }),
        estimate: Some(EstimateSummary { mean, stddev, runs }),
        accuracy,
        local_path: None,
    })
}

#[derive(Serialize)]
struct EgoRow {
    center: String,
    f0: u64,
    f1: u64,
    f2: u64,
    f3: u64,
}

#[derive(Serialize)]
struct EgoBody {
    mode: &'static str,
    centers: usize,
    /// Column sums over the centers.
    totals: EgoProfile,
    #[serde(skip_serializing_if = "Option::is_none")]
    table_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    table: Option<Vec<EgoRow>>,
}

fn read_centers(path: &Path, g: &UndirectedGraph) -> Result<Vec<VertexId>, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let index = g.label_index();
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        let label = line.trim();
        if label.is_empty() || label.starts_with('#') {
            continue;
        }
        match index.get(label) {
            Some(&v) => out.push(v),
            None => {
                return Err(CliError::Data(format!(
                    "{}:{}: unknown vertex label {label:?}",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(out)
}

pub(crate) fn ego(ctx: &mut Context, a: &EgoArgs) -> Result<Value, CliError> {
    let g = ctx.load(&a.graph)?;
    let n = g.vertex_count();
    let centers: Vec<VertexId> = if a.all {
        (0..n as VertexId).collect()
    } else if let Some(k) = a.random {
        if k > n {
            return Err(CliError::Usage(format!(
                "--random {k} exceeds the {n} vertices of the graph"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        let mut picked: Vec<VertexId> = rand::seq::index::sample(&mut rng, n, k)
            .into_iter()
            .map(|v| v as VertexId)
            .collect();
        picked.sort_unstable();
        picked
    } else {
        let path = a
            .centers
            .as_ref()
            .expect("clap enforces one center selection");
        read_centers(path, &g)?
    };

    let rows = match a.mode {
        EgoMode::Serial => ego_serial(&ctx.engine, &g, &centers)?,
        EgoMode::Parallel => ego_parallel(&ctx.engine, &g, &centers)?,
    };
    let totals = rows
        .iter()
        .fold(EgoProfile::default(), |t, (_, p)| EgoProfile {
            f0: t.f0 + p.f0,
            f1: t.f1 + p.f1,
            f2: t.f2 + p.f2,
            f3: t.f3 + p.f3,
        });
    let (table_path, table) = match &a.table_out {
        Some(path) => {
            write_egos(path, &g, &rows)?;
            (Some(path.display().to_string()), None)
        }
        None => (
            None,
            Some(
                rows.iter()
                    .map(|(v, p)| EgoRow {
                        center: g.label(*v).to_owned(),
                        f0: p.f0,
                        f1: p.f1,
                        f2: p.f2,
                        f3: p.f3,
                    })
                    .collect(),
            ),
        ),
    };
    ctx.finish(&EgoBody {
        mode: match a.mode {
            EgoMode::Serial => "serial",
            EgoMode::Parallel => "parallel",
        },
        centers: rows.len(),
        totals,
        table_path,
        table,
    })
}

#[derive(Serialize)]
struct OracleBody {
    global: ExactProfile,
    /// `None` above the 4-clique enumeration cap.
    four_cliques: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    local_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ego_path: Option<String>,
}

pub(crate) fn oracle(ctx: &mut Context, a: &OracleArgs) -> Result<Value, CliError> {
    let g = ctx.load(&a.graph)?;
    let start = Instant::now();
    let global = oracle::brute_force_profile(&g)?;
    let four_cliques = match g.vertex_count() <= oracle::DEFAULT_CLIQUE_CAP {
        true => Some(oracle::brute_force_four_cliques(&g)?),
        false => None,
    };
    ctx.engine.record("oracle:global", start, 0, 0);

    let local_path = match &a.local_out {
        Some(path) => {
            let start = Instant::now();
            let locals = oracle::brute_force_local(&g)?;
            ctx.engine.record("oracle:local", start, 0, 0);
            write_locals(path, &g, &locals)?;
            Some(path.display().to_string())
        }
        None => None,
    };
    let ego_path = match &a.ego_out {
        Some(path) => {
            let start = Instant::now();
            let rows = (0..g.vertex_count() as VertexId)
                .map(|v| Ok((v, oracle::brute_force_ego(&g, v)?)))
                .collect::<triprof::Result<Vec<_>>>()?;
            ctx.engine.record("oracle:ego", start, 0, 0);
            write_egos(path, &g, &rows)?;
            Some(path.display().to_string())
        }
        None => None,
    };
    ctx.finish(&OracleBody {
        global,
        four_cliques,
        local_path,
        ego_path,
    })
}

#[derive(Serialize)]
struct SparsifierBody {
    global: ExactProfile,
    theorem: TheoremReport,
}

pub(crate) fn sparsifier_check(ctx: &mut Context, a: &SparsifierArgs) -> Result<Value, CliError> {
    let g = ctx.load(&a.graph)?;
    if g.edge_count() == 0 {
        return Err(CliError::Usage(
            "the theorem conditions need at least one edge".into(),
        ));
    }
    let global = compute_profiles(&ctx.engine, &g)?.global;
    let extremes = edge_extremes(&ctx.engine, &g)?;
    let mut inputs = TheoremInputs::new(a.p, a.epsilon, a.gamma);
    inputs.log_base = match a.log_base {
        LogBaseArg::E => LogBase::E,
        LogBaseArg::Two => LogBase::Two,
    };
    if a.prefinal {
        inputs.form = ConditionForm::PreFinal;
    }
    let theorem = check_theorem_conditions(&global, &extremes, g.edge_count() as u64, inputs)?;
    for c in &theorem.conditions {
        if let Some(d) = &c.diagnostic {
            ctx.warnings.push(format!("{} condition: {d}", c.name));
        }
    }
    ctx.finish(&SparsifierBody { global, theorem })
}

#[derive(Serialize)]
struct PolyRun {
    seed: u64,
    kept_edges: usize,
    values: PolynomialValues,
    residuals: IdentityResiduals,
    /// Whether `y0..y3` equal the pipeline's profile of the sampled graph.
    matches_pipeline: bool,
}

#[derive(Serialize)]
struct PolyMoments {
    s1: f64,
    d1: f64,
    d2: f64,
    t1: f64,
    t2: f64,
}

#[derive(Serialize)]
struct PolysBody {
    p: f64,
    seed: u64,
    global: ExactProfile,
    /// Expectations under sampling with probability `p`.
    expected: PolyMoments,
    /// Means over the runs.
    mean: PolyMoments,
    runs: Vec<PolyRun>,
}

pub(crate) fn polys(ctx: &mut Context, a: &PolysArgs) -> Result<Value, CliError> {
    let g = ctx.load(&a.graph)?;
    let size = enumeration_size(&g);
    if size > a.max_enumeration {
        return Err(CliError::Usage(format!(
            "the graph has {size} connected triples to enumerate, above the budget of {}; \
             raise --max-enumeration to proceed",
            a.max_enumeration
        )));
    }
    SampleParams::new(a.p, a.seed)?;
    let global = compute_profiles(&ctx.engine, &g)?.global;

    let mark = ctx.engine.phase_mark();
    let mut runs = Vec::with_capacity(a.runs as usize);
    for i in 0..a.runs {
        let seed = a.seed.wrapping_add(i as u64);
        let mask = sample_mask(g.edge_count(), SampleParams::new(a.p, seed)?)?;
        let start = Instant::now();
        let values = evaluate_polynomials(&g, &mask)?;
        ctx.engine.record("polys:evaluate", start, 0, 0);
        let residuals = values.residuals(g.vertex_count() as u64);
        let pipeline = compute_profiles(&ctx.engine, &g.edge_filtered(mask.as_slice()))?.global;
        let matches_pipeline = pipeline == values.sampled_profile();
        if residuals != IdentityResiduals::default() || !matches_pipeline {
            return Err(CliError::Data(format!(
                "integrity: seed {seed}: polynomial identities fail \
                 (residuals {residuals:?}, pipeline match {matches_pipeline})"
            )));
        }
        runs.push(PolyRun {
            seed,
            kept_edges: mask.kept(),
            values,
            residuals,
            matches_pipeline,
        });
    }
    ctx.engine.coalesce_since(mark);

    let n = global.to_f64();
    let p = a.p;
    let k = runs.len() as f64;
    let avg = |f: fn(&PolynomialValues) -> u128| {
        runs.iter().map(|r| f(&r.values) as f64).sum::<f64>() / k
    };
    let body = PolysBody {
        p,
        seed: a.seed,
        global,
        expected: PolyMoments {
            s1: p * n.n1,
            d1: 2.0 * p * n.n2,
            d2: p * p * n.n2,
            t1: 3.0 * p * n.n3,
            t2: 3.0 * p * p * n.n3,
        },
        mean: PolyMoments {
            s1: avg(|v| v.s1),
            d1: avg(|v| v.d1),
            d2: avg(|v| v.d2),
            t1: avg(|v| v.t1),
            t2: avg(|v| v.t2),
        },
        runs,
    };
    ctx.finish(&body)
}

#[derive(Serialize)]
struct BenchTiming {
    triangles_only_seconds: f64,
    full_seconds: f64,
    /// Full over triangles-only, from the medians.
    ratio: f64,
    triangles_only_samples: Vec<f64>,
    full_samples: Vec<f64>,
}

#[derive(Serialize)]
struct BenchBody {
    repeats: u32,
    triangles: u128,
    global: ExactProfile,
    timing: Option<BenchTiming>,
}

pub(crate) fn median(xs: &[Duration]) -> f64 {
    let mut s: Vec<f64> = xs.iter().map(Duration::as_secs_f64).collect();
    s.sort_by(f64::total_cmp);
    let mid = s.len() / 2;
    match s.len() % 2 {
        1 => s[mid],
        _ => (s[mid - 1] + s[mid]) / 2.0,
    }
}

pub(crate) fn bench(ctx: &mut Context, a: &BenchArgs) -> Result<Value, CliError> {
    let g = ctx.load(&a.graph)?;
    let mut tri_times = Vec::new();
    let mut full_times = Vec::new();
    let mut triangles = 0;
    let mut global = ExactProfile::default();
    for r in 0..a.repeats {
        // phases of the last repetition are the ones reported
        ctx.engine.take_phases();
        let mut time_triangles = || -> Result<(), CliError> {
            let t = Instant::now();
            triangles = count_triangles_only(&ctx.engine, &g)?.global;
            tri_times.push(t.elapsed());
            Ok(())
        };
        let mut time_full = || -> Result<(), CliError> {
            let t = Instant::now();
            global = compute_profiles(&ctx.engine, &g)?.global;
            full_times.push(t.elapsed());
            Ok(())
        };
        if r % 2 == 0 {
            time_triangles()?;
            time_full()?;
        } else {
            time_full()?;
            time_triangles()?;
        }
        if global.n3 != triangles {
            return Err(CliError::Data(format!(
                "integrity: triangle counts disagree ({triangles} vs {})",
                global.n3
            )));
        }
    }
    let timing = (!ctx.no_timing).then(|| {
        let tri = median(&tri_times);
        let full = median(&full_times);
        BenchTiming {
            triangles_only_seconds: tri,
            full_seconds: full,
            ratio: full / tri,
            triangles_only_samples: tri_times.iter().map(Duration::as_secs_f64).collect(),
            full_samples: full_times.iter().map(Duration::as_secs_f64).collect(),
        }
    });
    ctx.finish(&BenchBody {
        repeats: a.repeats,
        triangles,
        global,
        timing,
    })
}
