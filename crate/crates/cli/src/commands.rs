//! Command implementations.

use std::path::{Path, PathBuf};
use std::time::Instant;

use lossless_core::analysis::{
    ensemble_average, generator_cluster_boundaries, jensen_report, paired_controller,
    subblock_gains, GainMatrix, Metric,
};
use lossless_core::lossless::{find_certificate, LosslessSystem};
use lossless_core::netgen::{generate_network_with_report, EnsembleConfig};
use lossless_core::numlin::{h2_norm, hinf_norm};
use lossless_core::swing::{harmonic_report, PowerNetwork, SwingModel};
use lossless_core::synth::{
    build_generalized_plant, close_loop, riccati_h2_shifted, static_hinf_controller, structured_h2_controller,
    Controller,
};
use lossless_core::{Error, StateSpace};
use serde_json::{json, Value};

use crate::formats::{
    gains_to_csv, parse_model, parse_network, read_text, rows, to_json_bytes, GainsFile,
    ModelInput, StateSpaceFile,
};
use crate::manifest::{sha256_hex, RunManifest};
use crate::{svg, Cli, CliError, Command, ControllerChoice, Format, MetricArg};

/// What a command produced. Nothing has been written yet.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<(PathBuf, Vec<u8>)>,
    pub manifest: Option<RunManifest>,
}

impl Outcome {
    fn text(stdout: String) -> Self {
        Self { stdout, files: Vec::new(), manifest: None }
    }
}

/// Manifest location for a primary output file.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// Runs `cli`, writes its files and prints its summary; returns the exit code.
pub fn execute(cli: &Cli) -> i32 {
    let result = run(cli).and_then(|out| {
        write_outputs(&out)?;
        Ok(out)
    });
    match result {
        Ok(out) => {
            print!("{}", out.stdout);
            0
        }
        Err(e) => {
            if cli.json {
                println!("{}", json!({"error": e.to_string(), "class": e.class_name(), "exit_code": e.exit_code()}));
            } else {
                eprintln!("error [{}]: {e}", e.class_name());
            }
            e.exit_code()
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_outputs(out: &Outcome) -> Result<(), CliError> {
    for (path, bytes) in &out.files {
        write_file(path, bytes)?;
    }
    if let (Some(m), Some((first, _))) = (&out.manifest, out.files.first()) {
        write_file(&manifest_path(first), &to_json_bytes(m))?;
    }
    Ok(())
}

/// Computes the outcome of `cli` inside a thread pool of the requested size.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(Error::InvalidConfig("--tol must be positive".into()).into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cli))
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Certify { model, output } => cmd_certify(cli, model, output.as_deref()),
        Command::Limits { model } => cmd_limits(cli, model),
        Command::Synthesize { model, controller, output } => cmd_synthesize(cli, model, *controller, output.as_deref()),
        Command::ClosedLoopNorms { model, controller } => cmd_closed_loop_norms(cli, model, controller),
        Command::GenNetwork { seed, config, clusters, buses, fixed_sizes, output } => {
            cmd_gen_network(cli, *seed, config.as_deref(), *clusters, *buses, *fixed_sizes, output)
        }
        Command::Gains { network, metric, lumped, ensemble, seed, config, controller, output, format, svg } => {
            let req = GainsRequest {
                network: network.clone(),
                metric: match metric {
                    MetricArg::H2 => Metric::H2,
                    MetricArg::Hinf => Metric::Hinf,
                },
                lumped: *lumped,
                ensemble: *ensemble,
                seed: *seed,
                config: config.clone(),
                controller: *controller,
                output: output.clone(),
                format: *format,
                svg: svg.clone(),
            };
            cmd_gains(cli, &req)
        }
    }
}

fn load_model(path: &Path) -> Result<ModelInput, CliError> {
    parse_model(&read_text(path)?)
}

fn state_space_of(model: &ModelInput) -> Result<StateSpace, CliError> {
    match model {
        ModelInput::StateSpace(sys) => Ok(sys.clone()),
        ModelInput::Network(net) => Ok(SwingModel::<f64>::from_network(net)?.sys().clone()),
    }
}

/// Networks come with the certificate `diag(M, I)`; raw models are certified.
fn lossless_of(model: &ModelInput, tol: f64) -> Result<LosslessSystem<f64>, CliError> {
    match model {
        ModelInput::StateSpace(sys) => Ok(LosslessSystem::certify(sys.clone(), tol)?),
        ModelInput::Network(net) => Ok(SwingModel::<f64>::from_network(net)?.plant().clone()),
    }
}

fn render(cli: &Cli, value: &Value, human: String) -> String {
    if cli.json {
        format!("{}\n", serde_json::to_string_pretty(value).expect("serializable"))
    } else {
        human
    }
}

fn cmd_certify(cli: &Cli, path: &Path, output: Option<&Path>) -> Result<Outcome, CliError> {
    let sys = state_space_of(&load_model(path)?)?;
    let cert = find_certificate(&sys, cli.tol)?;
    let report = json!({
        "certified": true,
        "P": rows(cert.p()),
        "residual_eq_a": cert.residual_eq_a,
        "residual_eq_b": cert.residual_eq_b,
        "min_eigenvalue": cert.min_eigenvalue,
    });
    let mut human = format!(
        "certified lossless (n = {})\n  |PA + A'P| = {:.3e}\n  |PB - C'|  = {:.3e}\n  lambda_min(P) = {:.6e}\nP =\n",
        sys.n(),
        cert.residual_eq_a,
        cert.residual_eq_b,
        cert.min_eigenvalue
    );
    for r in rows(cert.p()) {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:>14.6e}")).collect();
        human.push_str(&format!("  {}\n", cells.join(" ")));
    }
    let mut out = Outcome::text(render(cli, &report, human));
    if let Some(o) = output {
        out.files.push((o.to_path_buf(), to_json_bytes(&report)));
    }
    Ok(out)
}

fn cmd_limits(cli: &Cli, path: &Path) -> Result<Outcome, CliError> {
    let model = load_model(path)?;
    let plant = lossless_of(&model, cli.tol)?;
    let gamma_h2 = plant.h2_limit()?;
    let gamma_hinf = plant.hinf_limit().ok();
    let mut value = json!({ "gamma_h2": gamma_h2, "gamma_hinf": gamma_hinf });
    let mut human = format!("gamma_h2   = {gamma_h2:.10}\n");
    match gamma_hinf {
        Some(g) => human.push_str(&format!("gamma_hinf = {g:.10}\n")),
        None => human.push_str("gamma_hinf = undefined (nonzero feedthrough)\n"),
    }
    if let ModelInput::Network(net) = &model {
        let ids = net.generator_ids();
        let m = net.inertias()?;
        let hr = harmonic_report(&m)?;
        let jensen = jensen_report(&m)?;
        let mut contrib: Vec<(usize, f64, f64)> =
            ids.iter().zip(&m).zip(&hr.contributions).map(|((&id, &mk), &c)| (id, mk, c)).collect();
        contrib.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
        value["n_generators"] = json!(ids.len());
        value["harmonic_mean"] = json!(hr.harmonic_mean);
        value["gamma_sq_over_n"] = json!(hr.gamma_sq_over_n);
        value["jensen_gap"] = json!(jensen.gap);
        value["heterogeneity_index"] = json!(jensen.heterogeneity_index);
        value["contributions"] =
            contrib.iter().map(|&(id, mk, c)| json!({"bus": id, "inertia": mk, "share": c})).collect();
        human.push_str(&format!(
            "generators = {}\nharmonic mean of M = {:.6e}\ngamma_h2^2 / n = 2 / HM = {:.6e}\nJensen gap = {:.6e} (heterogeneity index {:.6e})\n",
            ids.len(),
            hr.harmonic_mean,
            hr.gamma_sq_over_n,
            jensen.gap,
            jensen.heterogeneity_index
        ));
        human.push_str("largest contributions 2/M_k to gamma_h2^2:\n");
        for &(id, mk, c) in contrib.iter().take(10) {
            human.push_str(&format!("  bus {id:>4}  M = {mk:.4e}  2/M = {c:.4e}\n"));
        }
    }
    Ok(Outcome::text(render(cli, &value, human)))
}

fn controller_for(plant: &LosslessSystem<f64>, choice: ControllerChoice) -> Result<Controller<f64>, CliError> {
    Ok(match choice {
        ControllerChoice::H2Structured => structured_h2_controller(plant)?,
        ControllerChoice::HinfStatic => static_hinf_controller(plant)?,
        ControllerChoice::H2Riccati => riccati_h2_shifted(&build_generalized_plant(plant.sys()))?.controller,
    })
}

fn choice_name(choice: ControllerChoice) -> &'static str {
    match choice {
        ControllerChoice::H2Structured => "h2-structured",
        ControllerChoice::HinfStatic => "hinf-static",
        ControllerChoice::H2Riccati => "h2-riccati",
    }
}

fn cmd_synthesize(cli: &Cli, path: &Path, choice: ControllerChoice, output: Option<&Path>) -> Result<Outcome, CliError> {
    let plant = lossless_of(&load_model(path)?, cli.tol)?;
    let k = controller_for(&plant, choice)?;
    let cl = close_loop(&build_generalized_plant(plant.sys()), &k)?;
    let (metric, achieved, limit) = match choice {
        ControllerChoice::HinfStatic => ("hinf", hinf_norm(&cl, cli.tol)?, plant.hinf_limit()?),
        _ => ("h2", h2_norm(&cl)?, plant.h2_limit()?),
    };
    let loop_shifted = choice == ControllerChoice::H2Riccati && !plant.sys().has_zero_feedthrough();
    let value = json!({
        "controller": choice_name(choice),
        "metric": metric,
        "achieved": achieved,
        "limit": limit,
        "loop_shifted": loop_shifted,
        "controller_order": k.k.n(),
    });
    let human = format!(
        "controller {} (order {}){}, {metric} norm\n  achieved = {achieved:.10}\n  limit    = {limit:.10}\n",
        choice_name(choice),
        k.k.n(),
        if loop_shifted { ", loop-shifted design" } else { "" }
    );
    let mut out = Outcome::text(render(cli, &value, human));
    if let Some(o) = output {
        out.files.push((o.to_path_buf(), to_json_bytes(&StateSpaceFile::from_sys(&k.k, Some(k.kind)))));
    }
    Ok(out)
}

fn cmd_closed_loop_norms(cli: &Cli, model: &Path, controller: &Path) -> Result<Outcome, CliError> {
    let sys = state_space_of(&load_model(model)?)?;
    let file: StateSpaceFile =
        serde_json::from_str(&read_text(controller)?).map_err(|e| CliError::Parse(e.to_string()))?;
    let k = file.to_controller()?;
    let cl = close_loop(&build_generalized_plant(&sys), &k)?;
    let h2 = match h2_norm(&cl) {
        Ok(v) => Some(v),
        Err(Error::NonzeroFeedthrough(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let hinf = hinf_norm(&cl, cli.tol)?;
    let value = json!({ "h2": h2, "hinf": hinf });
    let human = format!(
        "closed-loop H2   = {}\nclosed-loop Hinf = {hinf:.10}\n",
        h2.map_or("inf (nonzero feedthrough)".to_string(), |v| format!("{v:.10}"))
    );
    Ok(Outcome::text(render(cli, &value, human)))
}

fn load_config(path: Option<&Path>) -> Result<Option<EnsembleConfig>, CliError> {
    path.map(|p| serde_json::from_str(&read_text(p)?).map_err(|e| CliError::Parse(e.to_string()))).transpose()
}

fn input_digest(path: &Path) -> Result<String, CliError> {
    std::fs::read(path).map(|b| sha256_hex(&b)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn cmd_gen_network(
    cli: &Cli,
    seed: u64,
    config: Option<&Path>,
    clusters: Option<usize>,
    buses: Option<usize>,
    fixed_sizes: bool,
    output: &Path,
) -> Result<Outcome, CliError> {
    let mut cfg = match load_config(config)? {
        Some(c) => c,
        None if fixed_sizes => EnsembleConfig::fixed_sizes(),
        None => EnsembleConfig::default(),
    };
    if clusters.is_some() || buses.is_some() {
        let k = clusters.unwrap_or(cfg.n_clusters);
        let n = buses.unwrap_or(cfg.total_buses);
        cfg = EnsembleConfig { inertia_constants: cfg.inertia_constants, ..EnsembleConfig::with_size(k, n) };
    }
    cfg.seed = seed;
    let t = Instant::now();
    let (net, report) = generate_network_with_report(&cfg)?;
    let elapsed = t.elapsed().as_secs_f64();

    let bytes = to_json_bytes(&net);
    let config_value = json!({ "command": "gen-network", "config": cfg });
    let mut manifest = RunManifest::new("gen-network", &config_value, Some(seed));
    manifest.time("generate", elapsed);
    manifest.record(&output.display().to_string(), &bytes);

    let gens = net.generator_ids().len();
    let value = json!({
        "output": output.display().to_string(),
        "buses": net.buses.len(),
        "generators": gens,
        "lines": net.lines.len(),
        "report": report,
    });
    let human = format!(
        "wrote {} ({} buses, {} generators, {} lines)\n  cluster sizes {:?}\n  max load angle {:.2} deg, worst outage {:.2} deg, {} sizing iterations\n",
        output.display(),
        net.buses.len(),
        gens,
        net.lines.len(),
        report.cluster_sizes,
        report.max_angle.to_degrees(),
        report.max_outage_angle.to_degrees(),
        report.sizing_iterations
    );
    Ok(Outcome { stdout: render(cli, &value, human), files: vec![(output.to_path_buf(), bytes)], manifest: Some(manifest) })
}

/// Arguments of `gains`.
#[derive(Debug, Clone)]
pub struct GainsRequest {
    pub network: Option<PathBuf>,
    pub metric: Metric,
    pub lumped: bool,
    pub ensemble: Option<usize>,
    pub seed: Option<u64>,
    pub config: Option<PathBuf>,
    pub controller: Option<ControllerChoice>,
    pub output: PathBuf,
    pub format: Format,
    pub svg: Option<PathBuf>,
}

fn network_gains_with(net: &PowerNetwork, metric: Metric, choice: Option<ControllerChoice>) -> Result<GainMatrix, CliError> {
    let model = SwingModel::<f64>::from_network(net)?;
    let k = match choice {
        Some(c) => controller_for(model.plant(), c)?,
        None => paired_controller(model.plant(), metric)?,
    };
    let mut g = subblock_gains(model.sys(), &k, metric)?;
    g.bus_ids = model.generator_ids.clone();
    g.cluster_boundaries = generator_cluster_boundaries(net, &model.generator_ids);
    Ok(g)
}

fn gains_bytes(g: &GainMatrix, format: Format, title: &str) -> Vec<u8> {
    match format {
        Format::Csv => gains_to_csv(g),
        Format::Json => to_json_bytes(&GainsFile::from_gains(g)),
        Format::Svg => svg::heatmap(g, title).into_bytes(),
    }
}

fn cmd_gains(cli: &Cli, req: &GainsRequest) -> Result<Outcome, CliError> {
    let metric_name = match req.metric {
        Metric::H2 => "h2",
        Metric::Hinf => "hinf",
    };
    let mut summary = json!({ "metric": metric_name });
    let mut config_value = json!({
        "command": "gains",
        "metric": metric_name,
        "lumped": req.lumped,
        "controller": req.controller.map(choice_name),
        "format": format!("{:?}", req.format).to_lowercase(),
    });
    let t = Instant::now();
    let (gains, seed, title) = match (req.ensemble, &req.network) {
        (Some(_), Some(_)) => {
            return Err(Error::InvalidConfig("give either a network file or --ensemble, not both".into()).into())
        }
        (None, None) => return Err(Error::InvalidConfig("a network file or --ensemble is required".into()).into()),
        (Some(runs), None) => {
            if req.lumped || req.controller.is_some() {
                return Err(Error::InvalidConfig("--ensemble uses the paired controller on full networks".into()).into());
            }
            let mut cfg = load_config(req.config.as_deref())?.unwrap_or_else(EnsembleConfig::fixed_sizes);
            if let Some(s) = req.seed {
                cfg.seed = s;
            }
            let avg = ensemble_average(&cfg, runs, req.metric)?;
            config_value["ensemble"] = json!({ "runs": runs, "config": cfg });
            summary["seeds"] = json!(avg.seeds);
            summary["failed_seeds"] = json!(avg.failed_seeds);
            (avg.mean, Some(cfg.seed), format!("ensemble mean of {runs} networks, {metric_name}"))
        }
        (None, Some(path)) => {
            if req.seed.is_some() || req.config.is_some() {
                return Err(Error::InvalidConfig("--seed and --config apply to --ensemble only".into()).into());
            }
            config_value["network_sha256"] = json!(input_digest(path)?);
            let net = parse_network(&read_text(path)?)?;
            if req.lumped {
                let lumped = lossless_core::swing::lump(&net)?;
                summary["limit_full"] = json!(harmonic_report(&net.inertias()?)?.gamma_h2);
                summary["limit_lumped"] = json!(harmonic_report(&lumped.inertias()?)?.gamma_h2);
                let g = network_gains_with(&lumped, req.metric, req.controller)?;
                (g, None, format!("lumped network, {metric_name}"))
            } else {
                let m = net.inertias()?;
                summary["limit"] = json!(harmonic_report(&m)?.gamma_h2);
                (network_gains_with(&net, req.metric, req.controller)?, None, format!("{metric_name} gains"))
            }
        }
    };
    let elapsed = t.elapsed().as_secs_f64();

    let n = gains.n();
    let diag: Vec<f64> = (0..n).map(|i| gains.values[(i, i)]).collect();
    let dmin = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let dmax = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    summary["n"] = json!(n);
    summary["diagonal_min"] = json!(dmin);
    summary["diagonal_max"] = json!(dmax);
    summary["runtime_seconds"] = json!(elapsed);
    if req.metric == Metric::H2 {
        let total: f64 = gains.values.iter().map(|v| v * v).sum();
        summary["sum_of_squares"] = json!(total);
    }

    let mut manifest = RunManifest::new("gains", &config_value, seed);
    manifest.time("gains", elapsed);
    let mut files = Vec::new();
    let primary = gains_bytes(&gains, req.format, &title);
    manifest.record(&req.output.display().to_string(), &primary);
    files.push((req.output.clone(), primary));
    if let Some(path) = &req.svg {
        let bytes = svg::heatmap(&gains, &title).into_bytes();
        manifest.record(&path.display().to_string(), &bytes);
        files.push((path.clone(), bytes));
    }
    let human = format!(
        "{title}: {n}x{n} matrix written to {}\n  diagonal range [{dmin:.6e}, {dmax:.6e}]\n  computed in {elapsed:.2} s\n",
        req.output.display()
    );
    Ok(Outcome { stdout: render(cli, &summary, human), files, manifest: Some(manifest) })
}
