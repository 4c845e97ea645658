//! Subcommand implementations: orchestration of the library pipeline plus
//! manifest-stamped CSV output.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use anyhow::{bail, Context, Result};
use uniquerank::{
    apply_perturbation, attrirank, attribute_histogram_export, centrality, gamma_median_heuristic,
    load_graph, make_symmetric_graph, pagerank, refined_top_k_selection, run_grid, scatter_export,
    seeded_perturbation, similarity_matrix, top_k_by_score, uniquerank, uniqueness_scores,
    write_atomic, write_graph_files, write_grid_csv, AttributedGraph, CentralityKind, GridMetric,
    Method, Normalization, RankingConfig, ReplacementPolicy, SymmetricKind,
    DEFAULT_GAMMA_SAMPLE_PAIRS, DEFAULT_GAMMA_SEED,
};

use crate::manifest::Manifest;
use crate::{ChainArgs, Command, EvaluateArgs, HistogramArgs, InputArgs, KernelArgs, RankArgs,
    ScatterArgs, SynthArgs};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Rank(args) => rank(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Scatter(args) => scatter(args),
        Command::Synth(args) => synth(args),
        Command::Histogram(args) => histogram(args),
    }
}

// ---------------------------------------------------------------------------
// shared plumbing
// ---------------------------------------------------------------------------

fn load_input(input: &InputArgs, manifest: &mut Manifest) -> Result<AttributedGraph> {
    let normalization: Normalization = input.normalize.parse()?;
    let loaded = load_graph(&input.edges, &input.attributes, input.directed)?;
    let g = loaded.graph.normalize_attributes(normalization);

    manifest.set("edges_path", input.edges.display());
    manifest.set("attributes_path", input.attributes.display());
    manifest.digest("edges_sha256", &input.edges)?;
    manifest.digest("attributes_sha256", &input.attributes)?;
    manifest.set("directed", input.directed);
    manifest.set("normalization", normalization.as_str());
    manifest.set("node_count", g.node_count());
    manifest.set("edge_count", g.edge_count());
    manifest.set("self_loops_dropped", loaded.self_loops_dropped);
    manifest.set("duplicate_edges_dropped", loaded.duplicate_edges_dropped);

    manifest.args([
        "--edges".to_string(),
        input.edges.display().to_string(),
        "--attributes".to_string(),
        input.attributes.display().to_string(),
    ]);
    if input.directed {
        manifest.args(["--directed"]);
    }
    manifest.args(["--normalize".to_string(), normalization.as_str().to_string()]);
    Ok(g)
}

fn resolve_gamma(g: &AttributedGraph, kernel: &KernelArgs, manifest: &mut Manifest) -> Result<f64> {
    let gamma = match kernel.gamma {
        Some(value) => {
            manifest.set("gamma_mode", "fixed");
            manifest.args(["--gamma".to_string(), value.to_string()]);
            value
        }
        None => {
            let value = gamma_median_heuristic(g, DEFAULT_GAMMA_SAMPLE_PAIRS, DEFAULT_GAMMA_SEED)?;
            manifest.set(
                "gamma_mode",
                format!(
                    "median(pairs={DEFAULT_GAMMA_SAMPLE_PAIRS}, seed={DEFAULT_GAMMA_SEED})"
                ),
            );
            manifest.args(["--gamma-median"]);
            value
        }
    };
    manifest.set("gamma", gamma);
    Ok(gamma)
}

fn chain_config(chain: &ChainArgs, manifest: &mut Manifest) -> RankingConfig {
    let config = RankingConfig {
        damping: chain.d,
        alpha: chain.alpha,
        tolerance: chain.tolerance,
        max_iterations: chain.max_iterations,
        ..Default::default()
    };
    manifest.set("d", config.damping);
    manifest.set("alpha", config.alpha);
    manifest.set("tolerance", config.tolerance);
    manifest.set("max_iterations", config.max_iterations);
    manifest.set("init", "uniform");
    manifest.args([
        "--d".to_string(),
        config.damping.to_string(),
        "--alpha".to_string(),
        config.alpha.to_string(),
        "--tolerance".to_string(),
        config.tolerance.to_string(),
        "--max-iterations".to_string(),
        config.max_iterations.to_string(),
    ]);
    config
}

/// The two refinement readings this build uses (the source material is
/// ambiguous on both, so outputs carry the resolution).
fn stamp_refinement_resolution(manifest: &mut Manifest) {
    manifest.set("refine_tracker_init", "+inf");
    manifest.set("refine_tie_break", "b_count,score_sum,uniqueness,node_id");
}

fn parse_usize_list(raw: &str, flag: &str) -> Result<Vec<usize>> {
    let out: Vec<usize> = raw
        .split(',')
        .map(|p| p.trim().parse::<usize>().with_context(|| format!("{flag}: bad entry {p:?}")))
        .collect::<Result<_>>()?;
    if out.is_empty() {
        bail!("{flag} must list at least one value");
    }
    Ok(out)
}

fn parse_f64_list(raw: &str, flag: &str) -> Result<Vec<f64>> {
    let out: Vec<f64> = raw
        .split(',')
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("{flag}: bad entry {p:?}")))
        .collect::<Result<_>>()?;
    if out.is_empty() {
        bail!("{flag} must list at least one value");
    }
    Ok(out)
}

/// Expands `start:end:step` into an inclusive sweep, rounding each value to
/// nine decimals so labels stay readable.
fn parse_baseline_sweep(raw: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = raw.split(':').collect();
    if parts.len() != 3 {
        bail!("--baseline-thresholds must look like start:end:step, got {raw:?}");
    }
    let start: f64 = parts[0].parse().context("--baseline-thresholds start")?;
    let end: f64 = parts[1].parse().context("--baseline-thresholds end")?;
    let step: f64 = parts[2].parse().context("--baseline-thresholds step")?;
    if !(step > 0.0) || !start.is_finite() || !end.is_finite() || start > end {
        bail!("--baseline-thresholds needs start <= end and step > 0, got {raw:?}");
    }
    let mut out = Vec::new();
    for i in 0.. {
        let t = ((start + i as f64 * step) * 1e9).round() / 1e9;
        if t > end + 1e-9 {
            break;
        }
        out.push(t);
    }
    Ok(out)
}

fn method_scores(
    g: &AttributedGraph,
    s: &uniquerank::SimilarityMatrix,
    config: &RankingConfig,
    method: &Method,
) -> Result<Vec<f64>> {
    Ok(match method {
        Method::Uniquerank => uniquerank(g, s, config)?.scores,
        Method::Attrirank => attrirank(g, s, config)?.scores,
        Method::Pagerank => pagerank(g, config)?.scores,
        Method::Degree => centrality(g, CentralityKind::Degree)?,
        Method::Closeness => centrality(g, CentralityKind::Closeness)?,
        Method::Eigenvector => centrality(g, CentralityKind::Eigenvector)?,
        Method::Naive(_) => bail!("the naive baseline only exists inside evaluate grids"),
    })
}

// ---------------------------------------------------------------------------
// rank
// ---------------------------------------------------------------------------

fn rank(args: RankArgs) -> Result<()> {
    let mut manifest = Manifest::new("rank");
    let g = load_input(&args.input, &mut manifest)?;
    let method: Method = args.method.parse()?;
    if matches!(method, Method::Naive(_)) {
        bail!("the naive baseline only exists inside evaluate grids");
    }
    manifest.set("method", method.label());
    manifest.args(["--method".to_string(), method.label()]);

    let config = chain_config(&args.chain, &mut manifest);
    let gamma = resolve_gamma(&g, &args.kernel, &mut manifest)?;
    let s = similarity_matrix(&g, gamma)?;

    let k_final = args.top_k;
    let k_seed = args.seed_k.unwrap_or(k_final);
    manifest.set("k_seed", k_seed);
    manifest.set("k_final", k_final);
    manifest.args([
        "--top-k".to_string(),
        k_final.to_string(),
        "--seed-k".to_string(),
        k_seed.to_string(),
    ]);

    let scores = method_scores(&g, &s, &config, &method)?;
    let importance = match method {
        Method::Attrirank => scores.clone(),
        _ => attrirank(&g, &s, &config)?.scores,
    };
    let uniqueness = uniqueness_scores(&g, &s)?;

    let refine = matches!(method, Method::Uniquerank) && !args.no_refine;
    let selected = if refine {
        manifest.set("refine", "dominance");
        stamp_refinement_resolution(&mut manifest);
        refined_top_k_selection(&g, &s, &config, k_seed, k_final)?
    } else {
        manifest.set("refine", "none");
        manifest.args(["--no-refine"]);
        top_k_by_score(&scores, k_final)
    };
    let mut is_selected = vec![false; g.node_count()];
    for &v in &selected {
        is_selected[v] = true;
    }

    let order = top_k_by_score(&scores, g.node_count());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["node_label", "rank_position", "chain_score", "importance", "uniqueness", "refined"])?;
    for (position, &v) in order.iter().enumerate() {
        w.write_record(&[
            g.label_of(v),
            (position + 1).to_string(),
            scores[v].to_string(),
            importance[v].to_string(),
            uniqueness[v].to_string(),
            u8::from(is_selected[v]).to_string(),
        ])?;
    }
    let body = String::from_utf8(w.into_inner()?)?;
    write_atomic(&args.output, &(manifest.finish().render() + &body))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let mut manifest = Manifest::new("evaluate");
    let g = load_input(&args.input, &mut manifest)?;
    let config = chain_config(&args.chain, &mut manifest);
    let gamma = resolve_gamma(&g, &args.kernel, &mut manifest)?;
    let s = similarity_matrix(&g, gamma)?;

    let mut methods: Vec<Method> = args
        .methods
        .split(',')
        .map(|m| m.trim().parse::<Method>())
        .collect::<std::result::Result<_, _>>()?;
    if let Some(sweep) = &args.baseline_thresholds {
        for t in parse_baseline_sweep(sweep)? {
            methods.push(Method::Naive(t));
        }
        manifest.args(["--baseline-thresholds".to_string(), sweep.clone()]);
    }
    let top_k = parse_usize_list(&args.top_k, "--top-k")?;
    let thresholds = parse_f64_list(&args.thresholds, "--thresholds")?;
    let policy = ReplacementPolicy {
        search_hops: args.search_hops,
        distance_cap: args.distance_cap,
        include_removed_in_pairs: args.include_removed_in_pairs,
        ..Default::default()
    };

    let method_labels: Vec<String> = methods.iter().map(Method::label).collect();
    manifest.set("methods", method_labels.join(","));
    manifest.set("top_k", &args.top_k);
    manifest.set("thresholds", &args.thresholds);
    manifest.set("search_hops", policy.search_hops);
    manifest.set("distance_cap", policy.distance_cap);
    manifest.set("include_removed_in_pairs", policy.include_removed_in_pairs);
    stamp_refinement_resolution(&mut manifest);
    manifest.args([
        "--methods".to_string(),
        args.methods.clone(),
        "--top-k".to_string(),
        args.top_k.clone(),
        "--thresholds".to_string(),
        args.thresholds.clone(),
        "--search-hops".to_string(),
        policy.search_hops.to_string(),
        "--distance-cap".to_string(),
        policy.distance_cap.to_string(),
    ]);
    if policy.include_removed_in_pairs {
        manifest.args(["--include-removed-in-pairs"]);
    }

    let table = run_grid(&g, &s, &methods, &top_k, &thresholds, &policy, &config)?;
    let base = manifest.finish();
    for (metric, path) in [
        (GridMetric::EfficiencyReduction, &args.output_reduction),
        (GridMetric::ReplacementDistance, &args.output_distance),
    ] {
        let mut header = base.clone();
        header.push("metric", metric.as_str());
        write_grid_csv(&table, metric, &header, path)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// scatter
// ---------------------------------------------------------------------------

fn scatter(args: ScatterArgs) -> Result<()> {
    let mut manifest = Manifest::new("scatter");
    let g = load_input(&args.input, &mut manifest)?;
    let config = chain_config(&args.chain, &mut manifest);
    let gamma = resolve_gamma(&g, &args.kernel, &mut manifest)?;
    let s = similarity_matrix(&g, gamma)?;

    let k_final = args.top_k;
    let k_seed = args.seed_k.unwrap_or(k_final);
    manifest.set("k_seed", k_seed);
    manifest.set("k_final", k_final);
    manifest.args([
        "--top-k".to_string(),
        k_final.to_string(),
        "--seed-k".to_string(),
        k_seed.to_string(),
    ]);

    let importance = attrirank(&g, &s, &config)?.scores;
    let uniqueness = uniqueness_scores(&g, &s)?;
    let selected: BTreeSet<usize> = if args.no_refine {
        manifest.set("refine", "none");
        manifest.args(["--no-refine"]);
        let pi = uniquerank(&g, &s, &config)?.scores;
        top_k_by_score(&pi, k_final).into_iter().collect()
    } else {
        manifest.set("refine", "dominance");
        stamp_refinement_resolution(&mut manifest);
        refined_top_k_selection(&g, &s, &config, k_seed, k_final)?
            .into_iter()
            .collect()
    };
    scatter_export(&g, &importance, &uniqueness, &selected, &manifest.finish(), &args.output)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

fn synth(args: SynthArgs) -> Result<()> {
    let mut manifest = Manifest::new("synth");
    let kind: SymmetricKind = args.kind.parse()?;
    let g = make_symmetric_graph(kind, args.n)?;
    manifest.set("kind", kind.as_str());
    manifest.set("n", args.n);
    manifest.set("dims", args.dims);
    manifest.set("perturb", args.perturb);
    manifest.set("seed", args.seed);
    manifest.args([
        kind.as_str().to_string(),
        "--n".to_string(),
        args.n.to_string(),
        "--dims".to_string(),
        args.dims.to_string(),
        "--perturb".to_string(),
        args.perturb.to_string(),
        "--seed".to_string(),
        args.seed.to_string(),
    ]);

    let g = if args.perturb > 0 {
        let spec = seeded_perturbation(&g, args.dims, args.perturb, args.seed)?;
        let labels: Vec<String> = spec.perturbed_nodes.iter().map(|v| v.to_string()).collect();
        manifest.set("perturbed_nodes", labels.join(","));
        apply_perturbation(&g, &spec)?
    } else {
        g
    };
    manifest.set("node_count", g.node_count());
    manifest.set("edge_count", g.edge_count());

    write_graph_files(&g, &args.output_edges, &args.output_attributes)?;
    // Stamp the manifest onto both files; `#` lines are skipped on load.
    let header = manifest.finish().render();
    for path in [&args.output_edges, &args.output_attributes] {
        let content = std::fs::read_to_string(path)
            .with_context(|| format!("re-reading {}", path.display()))?;
        write_atomic(path, &(header.clone() + &content))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// histogram
// ---------------------------------------------------------------------------

fn histogram(args: HistogramArgs) -> Result<()> {
    let mut manifest = Manifest::new("histogram");
    let g = load_input(&args.input, &mut manifest)?;
    let selected = parse_selected(&args.selected_from, &g)?;
    manifest.set("selected_from", args.selected_from.display());
    manifest.digest("selected_from_sha256", &args.selected_from)?;
    manifest.set("selected_count", selected.len());
    manifest.set("bins", args.bins);
    manifest.args([
        "--selected-from".to_string(),
        args.selected_from.display().to_string(),
        "--bins".to_string(),
        args.bins.to_string(),
    ]);
    attribute_histogram_export(&g, &selected, args.bins, &manifest.finish(), &args.output)?;
    Ok(())
}

/// Reads the node labels flagged 1 in a ranking CSV's `refined` column (or a
/// scatter CSV's `selected` column) and maps them back to node ids.
fn parse_selected(path: &Path, g: &AttributedGraph) -> Result<BTreeSet<usize>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let data: String = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n");
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(data.as_bytes());
    let headers = reader.headers()?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == "node_label")
        .context("selected file has no node_label column")?;
    let flag_idx = headers
        .iter()
        .position(|h| h == "refined" || h == "selected")
        .context("selected file has no refined or selected column")?;

    let mut label_to_id = HashMap::new();
    for v in 0..g.node_count() {
        label_to_id.insert(g.label_of(v), v);
    }
    let mut out = BTreeSet::new();
    for record in reader.records() {
        let record = record?;
        if record.get(flag_idx) != Some("1") {
            continue;
        }
        let label = record.get(label_idx).unwrap_or_default();
        let id = label_to_id
            .get(label)
            .with_context(|| format!("selected file names unknown node {label:?}"))?;
        out.insert(*id);
    }
    Ok(out)
}
