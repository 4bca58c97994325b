use std::path::Path;

use chainamp::gaussian::{partition_function_from, ModeProbability};
use chainamp::ladder::{certify_ladder, Clause, ClauseOutcome};
use chainamp::oracle::{direct_phi, exhaustive_scc_check, quadrature_z, QuadratureSpec};
use chainamp::{
    build_j, build_k, build_ladder, closed_form_spectrum, gauge_null_space, spectral_decompose,
    verify_boundary_of_boundary, ChainComplex, Error, GraphDocument, LadderSpec, LinkValues,
    OrientedGraph, SccConfig,
};
use chainamp::{build_oscillator_k, pattern_match_laplacian, OscillatorParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{
    AmplitudeArgs, CertifyArgs, Format, InputArgs, LinkSource, OscillatorArgs, ProbabilityArgs,
    QuadratureArgs, Rule, Source, SpectrumArgs, SweepArgs,
};
use crate::output::{csv, emit, json as render, num, Failure};

/// Largest ladder `certify` accepts without `--allow-large`.
const CERTIFY_DEFAULT_MAX_N: usize = 40;
/// Relative agreement demanded between the analytic and quadrature `log Z`.
const ORACLE_TOLERANCE: f64 = 1e-6;
const ORACLE_TRAPEZOID_POINTS: usize = 200;
const ORACLE_TRAPEZOID_MAX_RANK: usize = 3;
const ORACLE_GH_ORDER: usize = 8;

struct Loaded {
    graph: OrientedGraph,
    cc: ChainComplex,
    document: Option<GraphDocument>,
    source: Value,
}

fn load(source: &Source) -> Result<Loaded, Failure> {
    match (&source.input, source.ladder) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))?;
            let doc = GraphDocument::from_json(&text)?;
            let graph = doc.graph()?;
            let cc = ChainComplex::from_graph(&graph)?;
            Ok(Loaded {
                graph,
                cc,
                document: Some(doc),
                source: json!({ "kind": "file", "path": path.display().to_string() }),
            })
        }
        (None, Some(n)) => {
            let graph = build_ladder(&LadderSpec::new(n)?);
            let cc = ChainComplex::from_graph(&graph)?;
            Ok(Loaded {
                graph,
                cc,
                document: None,
                source: json!({ "kind": "ladder", "n": n }),
            })
        }
        _ => unreachable!("clap enforces exactly one graph source"),
    }
}

fn link_values(loaded: &Loaded, spec: &LinkSource) -> Result<LinkValues, Failure> {
    let m = loaded.graph.link_count();
    match *spec {
        LinkSource::File => match &loaded.document {
            Some(doc) => doc.link_values(&loaded.graph)?.ok_or_else(|| {
                Failure::parse("input has no link_values; pass --links const:<v> or randint")
            }),
            None => Err(Failure::parse("--links file needs an --input graph")),
        },
        LinkSource::Constant(v) => Ok(LinkValues::from_slice(&vec![v; m])?),
        LinkSource::RandomIntegers { lo, hi, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let values: Vec<f64> = (0..m).map(|_| rng.gen_range(lo..=hi) as f64).collect();
            Ok(LinkValues::from_slice(&values)?)
        }
    }
}

/// A loaded graph with its link values and scales.
struct Problem {
    loaded: Loaded,
    e: LinkValues,
    links: LinkSource,
    config: SccConfig,
    hbar_beta: f64,
}

impl Problem {
    fn from_args(a: &AmplitudeArgs) -> Result<Self, Failure> {
        let config = SccConfig::new(a.scales.alpha, a.scales.beta)?;
        if !a.scales.hbar_beta.is_finite() || a.scales.hbar_beta <= 0.0 {
            return Err(Failure::validation(format!(
                "hbar-beta must be finite and positive, got {}",
                a.scales.hbar_beta
            )));
        }
        let loaded = load(&a.source)?;
        let links = a.links.clone().unwrap_or(if a.source.ladder.is_some() {
            LinkSource::Constant(1.0)
        } else {
            LinkSource::File
        });
        let e = link_values(&loaded, &links)?;
        Ok(Self {
            loaded,
            e,
            links,
            config,
            hbar_beta: a.scales.hbar_beta,
        })
    }

    fn seed(&self) -> Option<u64> {
        match self.links {
            LinkSource::RandomIntegers { seed, .. } => Some(seed),
            _ => None,
        }
    }

    /// Fields shared by every report about this problem.
    fn header(&self) -> serde_json::Map<String, Value> {
        let mut m = serde_json::Map::new();
        m.insert("source".into(), self.loaded.source.clone());
        m.insert("links".into(), json!(self.links.to_string()));
        m.insert("seed".into(), json!(self.seed()));
        m.insert("alpha".into(), json!(self.config.alpha()));
        m.insert("beta".into(), json!(self.config.beta()));
        m.insert("hbar_beta".into(), json!(self.hbar_beta));
        m.insert(
            "vertex_count".into(),
            json!(self.loaded.graph.vertex_count()),
        );
        m.insert("link_count".into(), json!(self.loaded.graph.link_count()));
        m.insert("link_values".into(), json!(self.e.as_vector().as_slice()));
        m
    }
}

fn finish(path: Option<&Path>, value: serde_json::Map<String, Value>) -> Result<(), Failure> {
    emit(path, &render(&Value::Object(value)))
}

pub fn validate(a: &InputArgs) -> Result<(), Failure> {
    let loaded = load(&a.source)?;
    let boundary = verify_boundary_of_boundary(&loaded.cc)?;
    let k = build_k(&loaded.cc, &SccConfig::default());
    let null = gauge_null_space(&k)?;
    let components = loaded.graph.component_count();

    let mut report = serde_json::Map::new();
    report.insert("source".into(), loaded.source.clone());
    report.insert("seed".into(), Value::Null);
    report.insert("vertex_count".into(), json!(loaded.graph.vertex_count()));
    report.insert("link_count".into(), json!(loaded.graph.link_count()));
    report.insert(
        "plaquette_count".into(),
        json!(loaded.graph.plaquette_count()),
    );
    report.insert("plaquettes_closed".into(), json!(true));
    report.insert(
        "boundary_of_boundary".into(),
        json!({ "holds": boundary.holds, "max_abs_entry": boundary.residual.amax() }),
    );
    report.insert("components".into(), json!(components));
    report.insert("connected".into(), json!(components == 1));
    report.insert("null_dimension".into(), json!(null.dimension()));
    report.insert(
        "null_dimension_matches_components".into(),
        json!(null.dimension() == components),
    );

    let values = match &loaded.document {
        Some(doc) => doc.link_values(&loaded.graph)?,
        None => None,
    };
    let source_report = match values {
        Some(e) => {
            let j = build_j(&loaded.cc, &e, &SccConfig::default())?;
            json!({ "divergence": j.divergence(), "divergence_free": j.is_divergence_free() })
        }
        None => Value::Null,
    };
    report.insert("source_vector".into(), source_report);
    finish(a.output.as_deref(), report)?;

    if !boundary.holds {
        return Err(Failure::validation(format!(
            "d1 * d2 != 0 (largest entry {})",
            boundary.residual.amax()
        )));
    }
    Ok(())
}

fn oracle_report(
    k: &chainamp::DifferenceMatrix,
    j: &chainamp::SourceVector,
    log_z: f64,
    rank: usize,
) -> Value {
    let spec = if rank <= ORACLE_TRAPEZOID_MAX_RANK {
        QuadratureSpec::trapezoid(ORACLE_TRAPEZOID_POINTS)
    } else {
        QuadratureSpec::gauss_hermite(ORACLE_GH_ORDER)
    };
    if rank > spec.max_rank() {
        return json!({
            "skipped": true,
            "reason": format!("row-space rank {rank} exceeds the quadrature limit {}", spec.max_rank()),
        });
    }
    // hbar_beta only rescales the reported exponent; log Z is compared
    // in natural units.
    match quadrature_z(k, j, &spec) {
        Ok(est) => {
            let rel = (est.log_z - log_z).abs() / log_z.abs().max(1.0);
            json!({
                "skipped": false,
                "rule": spec.rule,
                "log_z": est.log_z,
                "error_estimate": est.error_estimate,
                "evaluations": est.evaluations,
                "relative_difference": rel,
                "tolerance": ORACLE_TOLERANCE,
                "agrees": rel <= ORACLE_TOLERANCE,
            })
        }
        Err(err) => json!({ "skipped": true, "reason": err.to_string() }),
    }
}

pub fn amplitude(a: &AmplitudeArgs) -> Result<(), Failure> {
    let p = Problem::from_args(a)?;
    let k = build_k(&p.loaded.cc, &p.config);
    let j = build_j(&p.loaded.cc, &p.e, &p.config)?;
    let sd = spectral_decompose(&k)?;
    let result = partition_function_from(&sd, &j, p.hbar_beta)?;

    if a.format == Format::Csv {
        let rows: Vec<Vec<String>> = result
            .modes
            .iter()
            .map(|m| {
                vec![
                    m.index.to_string(),
                    num(m.a),
                    num(m.jhat),
                    num(m.jhat * m.jhat / (2.0 * m.a * p.hbar_beta)),
                ]
            })
            .collect();
        return emit(
            a.output.as_deref(),
            &csv(&["mode", "a", "jhat", "phi_term"], &rows),
        );
    }

    let mut report = p.header();
    report.insert("log_z".into(), json!(result.log_z));
    report.insert("exponent".into(), json!(result.exponent));
    report.insert("phi".into(), json!(result.phi()));
    report.insert("null_count".into(), json!(result.null_count));
    report.insert("rank".into(), json!(result.modes.len()));
    report.insert("modes".into(), json!(result.modes));
    if a.oracle {
        let oracle = oracle_report(&k, &j, result.log_z, result.modes.len());
        report.insert("oracle".into(), oracle);
    }
    finish(a.output.as_deref(), report)
}

/// Random integer link vector for one `(n, trial)` pair; independent of
/// thread scheduling.
fn trial_links(seed: u64, n: usize, trial: usize, len: usize, max_link: i64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | trial as u64);
    (0..len)
        .map(|_| rng.gen_range(-max_link..=max_link) as f64)
        .collect()
}

struct TrialResult {
    n: usize,
    trial: usize,
    report: chainamp::CertificationReport,
}

pub fn certify(a: &CertifyArgs) -> Result<(), Failure> {
    if a.n_min < 2
        || !a.n_min.is_multiple_of(2)
        || a.step == 0
        || !a.step.is_multiple_of(2)
        || a.n_max < a.n_min
    {
        return Err(Failure::validation(format!(
            "need an even n-min >= 2, n-max >= n-min and an even positive step (got {}..{} step {})",
            a.n_min, a.n_max, a.step
        )));
    }
    if a.n_max > CERTIFY_DEFAULT_MAX_N && !a.allow_large {
        return Err(Failure::validation(format!(
            "n-max {} exceeds {CERTIFY_DEFAULT_MAX_N}; pass --allow-large to proceed",
            a.n_max
        )));
    }
    if a.max_link < 0 {
        return Err(Failure::validation("max-link must be nonnegative"));
    }
    let sizes: Vec<usize> = (a.n_min..=a.n_max).step_by(a.step).collect();
    let specs = sizes
        .iter()
        .map(|&n| LadderSpec::with_scales(n, a.scales.alpha, a.scales.beta, a.scales.hbar_beta))
        .collect::<Result<Vec<_>, Error>>()?;
    let tuples: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|s| (0..a.trials).map(move |t| (s, t)))
        .collect();

    let mut results = tuples
        .par_iter()
        .map(|&(s, trial)| {
            let spec = &specs[s];
            let values = trial_links(a.seed, spec.n(), trial, spec.link_count(), a.max_link);
            let e = LinkValues::from_slice(&values)?;
            Ok(TrialResult {
                n: spec.n(),
                trial,
                report: certify_ladder(spec, &e)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    results.sort_by_key(|r| (r.n, r.trial));

    let first_failure = results
        .iter()
        .find(|r| !r.report.passed())
        .map(|r| (r.n, r.trial, r.report.failure_message().unwrap_or_default()));

    if a.format == Format::Csv {
        let rows: Vec<Vec<String>> = results
            .iter()
            .flat_map(|r| {
                r.report.clauses.iter().map(move |c| {
                    vec![
                        r.n.to_string(),
                        r.trial.to_string(),
                        format!("{:?}", c.clause),
                        num(c.residual),
                    ]
                })
            })
            .collect();
        emit(
            a.output.as_deref(),
            &csv(&["n", "trial", "clause", "residual"], &rows),
        )?;
    } else {
        let worst = |subset: &mut dyn Iterator<Item = &TrialResult>| -> Value {
            let mut by_clause = serde_json::Map::new();
            let subset: Vec<&TrialResult> = subset.collect();
            for clause in Clause::ALL {
                let outcomes: Vec<(&TrialResult, &ClauseOutcome)> = subset
                    .iter()
                    .map(|r| (*r, r.report.clause(clause)))
                    .collect();
                let Some(&(at, worst)) = outcomes
                    .iter()
                    .max_by(|x, y| x.1.residual.total_cmp(&y.1.residual))
                else {
                    continue;
                };
                by_clause.insert(
                    format!("{clause:?}"),
                    json!({
                        "description": clause.describe(),
                        "passed": outcomes.iter().all(|(_, o)| o.passed),
                        "worst_residual": worst.residual,
                        "tolerance": worst.tolerance,
                        "worst_at": { "n": at.n, "trial": at.trial },
                    }),
                );
            }
            Value::Object(by_clause)
        };
        let per_size: Vec<Value> = sizes
            .iter()
            .filter_map(|&n| {
                let group: Vec<&TrialResult> = results.iter().filter(|r| r.n == n).collect();
                let first = group.first()?;
                Some(json!({
                    "n": n,
                    "passed": group.iter().all(|r| r.report.passed()),
                    "numeric_spectrum": first.report.numeric_spectrum,
                    "clauses": worst(&mut group.iter().copied()),
                }))
            })
            .collect();

        let mut report = serde_json::Map::new();
        report.insert("seed".into(), json!(a.seed));
        report.insert("n_min".into(), json!(a.n_min));
        report.insert("n_max".into(), json!(a.n_max));
        report.insert("step".into(), json!(a.step));
        report.insert("trials".into(), json!(a.trials));
        report.insert("max_link".into(), json!(a.max_link));
        report.insert("alpha".into(), json!(a.scales.alpha));
        report.insert("beta".into(), json!(a.scales.beta));
        report.insert("hbar_beta".into(), json!(a.scales.hbar_beta));
        report.insert("cases".into(), json!(results.len()));
        report.insert("passed".into(), json!(first_failure.is_none()));
        report.insert("clauses".into(), worst(&mut results.iter()));
        report.insert("sizes".into(), Value::Array(per_size));
        report.insert(
            "first_failure".into(),
            match &first_failure {
                Some((n, trial, message)) => json!({ "n": n, "trial": trial, "message": message }),
                None => Value::Null,
            },
        );
        finish(a.output.as_deref(), report)?;
    }

    match first_failure {
        Some((n, trial, message)) => Err(Failure::validation(format!(
            "certification failed at n = {n}, trial = {trial}: {message}"
        ))),
        None => Ok(()),
    }
}

pub fn probability(a: &ProbabilityArgs) -> Result<(), Failure> {
    let p = Problem::from_args(&a.amplitude)?;
    let k = build_k(&p.loaded.cc, &p.config);
    let j = build_j(&p.loaded.cc, &p.e, &p.config)?;
    let sd = spectral_decompose(&k)?;
    let mode = ModeProbability::new(&sd, &j, a.mode, p.hbar_beta)?;
    if a.points < 2 {
        return Err(Failure::validation("points must be at least 2"));
    }
    let sigma = mode.variance().sqrt();
    let q_min = a.q_min.unwrap_or(mode.most_probable() - 10.0 * sigma);
    let q_max = a.q_max.unwrap_or(mode.most_probable() + 10.0 * sigma);
    if q_min.is_nan() || q_max.is_nan() || q_min >= q_max {
        return Err(Failure::validation(format!(
            "empty grid [{q_min}, {q_max}]"
        )));
    }
    let h = (q_max - q_min) / (a.points - 1) as f64;
    let grid: Vec<(f64, f64)> = (0..a.points)
        .map(|i| {
            let q = if i + 1 == a.points {
                q_max
            } else {
                q_min + i as f64 * h
            };
            (q, mode.density(q))
        })
        .collect();

    if a.amplitude.format == Format::Csv {
        let fixed = [
            a.mode.to_string(),
            num(mode.a),
            num(mode.jhat),
            num(mode.most_probable()),
        ];
        let rows: Vec<Vec<String>> = grid
            .iter()
            .map(|&(q, d)| {
                let mut row = fixed.to_vec();
                row.extend([num(q), num(d)]);
                row
            })
            .collect();
        let header = ["mode", "a", "jhat", "most_probable", "q0", "density"];
        return emit(a.amplitude.output.as_deref(), &csv(&header, &rows));
    }

    let integral =
        h * (grid.iter().map(|g| g.1).sum::<f64>() - 0.5 * (grid[0].1 + grid[grid.len() - 1].1));
    let mut report = p.header();
    report.insert("mode".into(), json!(a.mode));
    report.insert("a".into(), json!(mode.a));
    report.insert("jhat".into(), json!(mode.jhat));
    report.insert("most_probable".into(), json!(mode.most_probable()));
    report.insert("variance".into(), json!(mode.variance()));
    report.insert("trapezoid_integral".into(), json!(integral));
    report.insert(
        "grid".into(),
        Value::Array(
            grid.iter()
                .map(|&(q, d)| json!({ "q0": q, "density": d }))
                .collect(),
        ),
    );
    finish(a.amplitude.output.as_deref(), report)
}

pub fn oscillator(a: &OscillatorArgs) -> Result<(), Failure> {
    let params = OscillatorParams::new(a.m, a.k, a.k12, a.dt, a.n_time)?;
    let osc = build_oscillator_k(&params);
    let dim = osc.matrix.nrows();
    let rows: Vec<Vec<f64>> = (0..dim)
        .map(|r| osc.matrix.row(r).iter().copied().collect())
        .collect();

    if a.format == Format::Csv {
        let header: Vec<String> = (1..=dim).map(|c| format!("c{c}")).collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let body: Vec<Vec<String>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| num(x)).collect())
            .collect();
        return emit(a.output.as_deref(), &csv(&header, &body));
    }

    let ladder = LadderSpec::new(2 * a.n_time)?;
    let cc = ChainComplex::from_graph(&build_ladder(&ladder))?;
    let k = build_k(&cc, &ladder.config());
    let pattern = pattern_match_laplacian(&osc, &k)?;

    let mut report = serde_json::Map::new();
    report.insert("seed".into(), Value::Null);
    report.insert("params".into(), json!(params));
    report.insert("matrix".into(), json!(rows));
    report.insert(
        "ladder_comparison".into(),
        json!({
            "n": ladder.n(),
            "pattern_match": pattern.pattern_match,
            "exact_equal": pattern.exact_equal,
        }),
    );
    finish(a.output.as_deref(), report)
}

pub fn spectrum(a: &SpectrumArgs) -> Result<(), Failure> {
    let spec = LadderSpec::new(a.ladder)?;
    let closed = closed_form_spectrum(&spec);
    let mut header = vec!["j".to_string(), "family".into(), "eigenvalue".into()];
    header.extend((1..=spec.n()).map(|c| format!("c{c}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = closed
        .modes
        .iter()
        .map(|m| {
            let mut row = vec![
                m.j.to_string(),
                m.family.as_str().to_string(),
                num(m.eigenvalue),
            ];
            row.extend(m.vector.iter().map(|&x| num(x)));
            row
        })
        .collect();
    emit(a.output.as_deref(), &csv(&header, &rows))
}

pub fn oracle_quadrature(a: &QuadratureArgs) -> Result<(), Failure> {
    let p = Problem::from_args(&a.amplitude)?;
    let k = build_k(&p.loaded.cc, &p.config);
    let j = build_j(&p.loaded.cc, &p.e, &p.config)?;
    let mut spec = match a.rule {
        Rule::Trapezoid => QuadratureSpec::trapezoid(a.points.unwrap_or(ORACLE_TRAPEZOID_POINTS)),
        Rule::GaussHermite => QuadratureSpec::gauss_hermite(a.points.unwrap_or(ORACLE_GH_ORDER)),
    };
    spec.axis_bound = a.axis_bound;
    let estimate = quadrature_z(&k, &j, &spec)?;
    let analytic = partition_function_from(&spectral_decompose(&k)?, &j, p.hbar_beta)?;
    let rel = (estimate.log_z - analytic.log_z).abs() / analytic.log_z.abs().max(1.0);

    let mut report = p.header();
    report.insert("quadrature".into(), json!(spec));
    report.insert("rank".into(), json!(estimate.rank));
    report.insert("evaluations".into(), json!(estimate.evaluations));
    report.insert("log_z_quadrature".into(), json!(estimate.log_z));
    report.insert("error_estimate".into(), json!(estimate.error_estimate));
    report.insert("log_z_analytic".into(), json!(analytic.log_z));
    report.insert("relative_difference".into(), json!(rel));
    report.insert("tolerance".into(), json!(ORACLE_TOLERANCE));
    report.insert("agrees".into(), json!(rel <= ORACLE_TOLERANCE));
    finish(a.amplitude.output.as_deref(), report)
}

pub fn oracle_phi(a: &AmplitudeArgs) -> Result<(), Failure> {
    let p = Problem::from_args(a)?;
    let k = build_k(&p.loaded.cc, &p.config);
    let j = build_j(&p.loaded.cc, &p.e, &p.config)?;
    let direct = direct_phi(&k, &j, p.hbar_beta)?;
    let engine = partition_function_from(&spectral_decompose(&k)?, &j, p.hbar_beta)?.phi();
    let rel = (direct - engine).abs() / direct.abs().max(f64::MIN_POSITIVE);

    let mut report = p.header();
    report.insert("phi_direct".into(), json!(direct));
    report.insert("phi_engine".into(), json!(engine));
    report.insert(
        "relative_difference".into(),
        json!(if direct == engine { 0.0 } else { rel }),
    );

    // The closed form applies only to generated ladders.
    if let Some(n) = a.source.ladder {
        let spec = LadderSpec::with_scales(n, p.config.alpha(), p.config.beta(), p.hbar_beta)?;
        let closed = chainamp::ladder::phi_closed_form(&spec, &p.e)?;
        report.insert("phi_closed_form".into(), json!(closed));
    }
    finish(a.output.as_deref(), report)
}

pub fn oracle_scc_sweep(a: &SweepArgs) -> Result<(), Failure> {
    let report = exhaustive_scc_check(a.max_vertices, a.seed)?;
    let value = serde_json::to_value(&report).expect("report serializes");
    let mut map = value.as_object().cloned().unwrap_or_default();
    map.insert("passed".into(), json!(report.passed()));
    finish(a.output.as_deref(), map)?;
    if !report.passed() {
        return Err(Failure::validation(format!(
            "self-consistency sweep found {} failure(s); first: {}",
            report.failures.len(),
            report.failures[0]
        )));
    }
    Ok(())
}
