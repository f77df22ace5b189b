use std::path::PathBuf;

use grover_optics::analysis::{
    decohere_sweep, grover_success_closed_form, ifm_simulate, iteration_choices,
};
use grover_optics::circuit::{detector_probabilities, simulate as run_circuit};
use grover_optics::compiler::{compile, unitary_equiv};
use grover_optics::format::write_circuit;
use grover_optics::oracle::{
    calibrate_sigma, default_sigma_grid, electro_optic_oracle_net, is_monotone_within_stderr, lc_voltage,
    mean_noisy_distribution, noise_sweep, pockels_voltage, readout_table, NoiseModel, OracleSetting, RNG_ALGORITHM,
    TARGET_ERROR,
};
use grover_optics::state::uniform_superposition;
use grover_optics::{BitString, Circuit, CIRCUIT_TOL};
use serde_json::{json, Map, Value};

use crate::args::{CircuitArgs, Cli, Command, Common, ConfigFile, Format};
use crate::builtins::resolve;
use crate::error::{usage, CliError, CliResult};
use crate::output::{document, emit, fmt_f64, round, Cell, Table};

const DEFAULT_SAMPLES: usize = 1000;
const DEFAULT_SIZES: [usize; 5] = [4, 16, 64, 256, 1024];
const ORTHOGONALITY_TOL: f64 = 1e-12;

/// Flags after merging the config file; flags win.
struct Opts {
    format: Option<Format>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    sigma: f64,
    tol: f64,
    samples: usize,
}

impl Opts {
    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn only_json(&self, what: &str) -> CliResult<()> {
        if self.format == Some(Format::Csv) {
            return usage(format!("{what} writes JSON only"));
        }
        Ok(())
    }

    /// Noise model for `sigma`, insisting on a seed when it is positive.
    fn noise(&self, sigma: f64) -> CliResult<NoiseModel> {
        let seed = match (sigma > 0.0, self.seed) {
            (true, None) => return usage("--seed is required when sigma > 0"),
            (_, s) => s.unwrap_or(0),
        };
        Ok(NoiseModel::new(sigma, seed)?)
    }
}

fn load_config(common: &Common) -> CliResult<ConfigFile> {
    let Some(path) = &common.config else {
        return Ok(ConfigFile::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

fn opts(common: &Common, cfg: &ConfigFile) -> CliResult<Opts> {
    let o = Opts {
        format: common.format.or(cfg.format),
        out: common.out.clone().or(cfg.out.clone()),
        seed: common.seed.or(cfg.seed),
        sigma: common.sigma.or(cfg.sigma).unwrap_or(0.0),
        tol: common.tol.or(cfg.tol).unwrap_or(CIRCUIT_TOL),
        samples: common.samples.or(cfg.samples).unwrap_or(DEFAULT_SAMPLES),
    };
    if !(o.sigma.is_finite() && o.sigma >= 0.0) {
        return usage(format!("--sigma must be finite and non-negative, got {}", o.sigma));
    }
    if !(o.tol.is_finite() && o.tol > 0.0) {
        return usage(format!("--tol must be positive, got {}", o.tol));
    }
    if o.samples == 0 {
        return usage("--samples must be at least 1");
    }
    Ok(o)
}

fn parse_list<T: std::str::FromStr>(flag: &str, text: &str) -> CliResult<Vec<T>> {
    let items: Result<Vec<T>, _> = text.split(',').map(|s| s.trim().parse::<T>()).collect();
    match items {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => usage(format!("--{flag} expects a comma-separated list, got `{text}`")),
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    let cfg = load_config(&cli.common)?;
    let o = opts(&cli.common, &cfg)?;
    match cli.command {
        Command::Simulate(a) => simulate(&o, &merge_circuit(a, &cfg)),
        Command::Build(a) => build(&o, &merge_circuit(a, &cfg)),
        Command::Compile { input, oracle, iterations, report } => {
            let a = CircuitArgs {
                circuit: input.or(cfg.input.clone()),
                oracle: oracle.or(cfg.oracle.clone()),
                iterations: iterations.or(cfg.iterations),
            };
            compile_cmd(&o, &a, report.or(cfg.report.clone()))
        }
        Command::OracleCheck => oracle_check(&o),
        Command::NoiseSweep { sigmas } => noise_sweep_cmd(&o, sigmas.or(cfg.sigmas.clone())),
        Command::Ifm => ifm(&o),
        Command::GroverAbstract { sizes, k_max } => grover_abstract(&o, sizes.or(cfg.sizes.clone()), k_max.or(cfg.k_max)),
        Command::DecohereSweep { ratios, marked } => {
            decohere(&o, ratios.or(cfg.ratios.clone()), marked.or(cfg.marked.clone()))
        }
        Command::Fig3 => readout(&o),
    }
}

fn merge_circuit(a: CircuitArgs, cfg: &ConfigFile) -> CircuitArgs {
    CircuitArgs {
        circuit: a.circuit.or(cfg.circuit.clone()),
        oracle: a.oracle.or(cfg.oracle.clone()),
        iterations: a.iterations.or(cfg.iterations),
    }
}

fn circuit_of(a: &CircuitArgs) -> CliResult<Circuit> {
    let Some(src) = &a.circuit else {
        return usage("a circuit is required (--circuit, or --in for compile)");
    };
    resolve(src, a.oracle.as_deref(), a.iterations)
}

fn check_total(what: &str, total: f64, tol: f64) -> CliResult<()> {
    if (total - 1.0).abs() > tol {
        return Err(CliError::Internal(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

fn simulate(o: &Opts, a: &CircuitArgs) -> CliResult<()> {
    let c = circuit_of(a)?;
    let noise = o.noise(o.sigma)?;
    let outcomes = detector_probabilities(&c, &c.default_input())?;
    let probs: Vec<f64> = if o.sigma > 0.0 {
        mean_noisy_distribution(&c, &noise, o.samples)?
    } else {
        outcomes.iter().map(|x| x.probability).collect()
    };
    check_total("detector distribution", probs.iter().sum(), o.tol)?;
    let mut t = Table::new("detector-distribution", &["detector", "pol", "probability"]);
    for (x, p) in outcomes.iter().zip(&probs) {
        t.rows.push(vec![Cell::Int(x.detector as u64), Cell::Text(x.pol.to_string()), Cell::Num(*p)]);
    }
    t.extra.insert("circuit".into(), json!(c.name()));
    t.extra.insert("sigma".into(), json!(o.sigma));
    if o.sigma > 0.0 {
        t.extra.insert("seed".into(), json!(noise.seed()));
        t.extra.insert("samples".into(), json!(o.samples));
        t.extra.insert("rng".into(), json!(RNG_ALGORITHM));
    } else {
        let state = run_circuit(&c, &c.default_input())?;
        t.extra.insert("state".into(), serde_json::to_value(state.to_json(Some(c.registry().labels()))).map_err(|e| CliError::Internal(e.to_string()))?);
    }
    emit(o.out.as_deref(), &t.render(o.format(Format::Csv))?)
}

fn build(o: &Opts, a: &CircuitArgs) -> CliResult<()> {
    if o.format.is_some() {
        return usage("build writes a circuit file; --format does not apply");
    }
    let c = circuit_of(a)?;
    emit(o.out.as_deref(), &write_circuit(&c))
}

fn compile_cmd(o: &Opts, a: &CircuitArgs, report: Option<PathBuf>) -> CliResult<()> {
    o.only_json("compile")?;
    let c = circuit_of(a)?;
    let (out, rep) = compile(&c)?;
    let base = c.name().strip_suffix("-uncompiled").unwrap_or(c.name());
    let out = if base.ends_with("-compiled") { out } else { out.with_name(format!("{base}-compiled")) };
    let (ok, dev) = unitary_equiv(&c, &out, o.tol)?;
    let mut doc = match serde_json::to_value(&rep).map_err(|e| CliError::Internal(e.to_string()))? {
        Value::Object(m) => m,
        _ => unreachable!("reports serialize to objects"),
    };
    doc.insert("input".into(), json!(c.name()));
    doc.insert("equivalence_verified".into(), json!(rep.equivalence_verified && ok));
    doc.insert("max_unitary_deviation".into(), json!(dev));
    doc.insert("tolerance".into(), json!(o.tol));
    let text = write_circuit(&out);
    match &o.out {
        Some(p) => emit(Some(p), &text)?,
        None => {
            doc.insert("circuit".into(), json!(text));
        }
    }
    emit(report.as_deref(), &document("compile-report", doc))
}

fn oracle_check(o: &Opts) -> CliResult<()> {
    o.only_json("oracle-check")?;
    let settings = OracleSetting::electro_optic_settings();
    let uniform = uniform_superposition(2)?;
    let mut entries = Vec::new();
    let mut states = Vec::new();
    let mut marked = Vec::new();
    for s in &settings {
        let OracleSetting::ElectroOptic { pc, lc } = *s else { unreachable!("electro-optic settings") };
        let u = electro_optic_oracle_net(pc, lc);
        let m = s.marked()?;
        marked.push(m.value());
        states.push(&u * uniform.amplitudes());
        let rows: Vec<Vec<[f64; 2]>> =
            (0..4).map(|r| (0..4).map(|c| [round(u[(r, c)].re), round(u[(r, c)].im)]).collect()).collect();
        entries.push(json!({
            "setting": s.to_string(),
            "pockels_voltage": pockels_voltage(pc),
            "lc_voltage": lc_voltage(lc),
            "marked": m.to_string(),
            "detector": m.detector(),
            "net_unitary": rows,
        }));
    }
    let overlaps: Vec<Vec<f64>> =
        states.iter().map(|a| states.iter().map(|b| round(a.dotc(b).norm())).collect()).collect();
    let worst = (0..4)
        .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| states[i].dotc(&states[j]).norm())
        .fold(0.0, f64::max);
    let mut sorted = marked.clone();
    sorted.sort_unstable();
    let bijection = sorted == [0, 1, 2, 3];
    let orthogonal = worst <= ORTHOGONALITY_TOL;
    let mut doc = Map::new();
    doc.insert("settings".into(), Value::Array(entries));
    doc.insert("bijection".into(), json!(bijection));
    doc.insert("orthogonality".into(), json!(overlaps));
    doc.insert("max_overlap".into(), json!(worst));
    doc.insert("orthogonal".into(), json!(orthogonal));
    emit(o.out.as_deref(), &document("oracle-check", doc))?;
    if !(bijection && orthogonal) {
        return Err(CliError::Internal("electro-optic oracle check failed".into()));
    }
    Ok(())
}

fn noise_sweep_cmd(o: &Opts, sigmas: Option<String>) -> CliResult<()> {
    let grid = match sigmas {
        Some(s) => parse_list::<f64>("sigmas", &s)?,
        None => default_sigma_grid(),
    };
    let top = grid.iter().copied().fold(0.0, f64::max);
    let noise = o.noise(top)?;
    let points = noise_sweep(&grid, o.samples, noise.seed())?;
    let star = calibrate_sigma(&points, TARGET_ERROR);
    let mut t = Table::new("noise-sweep", &["sigma", "mean_error", "stderr"]);
    for p in &points {
        t.rows.push(vec![Cell::Num(p.sigma), Cell::Num(p.mean_error), Cell::Num(p.stderr)]);
    }
    t.extra.insert("seed".into(), json!(noise.seed()));
    t.extra.insert("samples".into(), json!(o.samples));
    t.extra.insert("rng".into(), json!(RNG_ALGORITHM));
    t.extra.insert("target_error".into(), json!(TARGET_ERROR));
    t.extra.insert("sigma_star".into(), json!(star.map(round)));
    t.extra.insert("monotone".into(), json!(is_monotone_within_stderr(&points)));
    let format = o.format(Format::Csv);
    if format == Format::Csv {
        let s = star.map_or("not reached".to_string(), fmt_f64);
        eprintln!("sigma* for mean error {TARGET_ERROR}: {s}");
    }
    emit(o.out.as_deref(), &t.render(format)?)
}

fn ifm(o: &Opts) -> CliResult<()> {
    let mut t = Table::new("ifm", &["marked", "port", "pol", "probability", "computer_ran"]);
    for m in BitString::all(2)? {
        let r = ifm_simulate(&m)?;
        check_total(&format!("outcomes for {m}"), r.total(), o.tol)?;
        for x in &r.outcomes {
            t.rows.push(vec![
                Cell::Text(m.to_string()),
                Cell::Text(x.port.to_string()),
                Cell::Text(x.pol.to_string()),
                Cell::Num(x.probability),
                Cell::Bool(x.computer_ran),
            ]);
        }
    }
    emit(o.out.as_deref(), &t.render(o.format(Format::Csv))?)
}

fn grover_abstract(o: &Opts, sizes: Option<String>, k_max: Option<usize>) -> CliResult<()> {
    let sizes = match sizes {
        Some(s) => parse_list::<usize>("sizes", &s)?,
        None => DEFAULT_SIZES.to_vec(),
    };
    let mut t = Table::new("grover-abstract", &["N", "k", "success", "rule"]);
    for &n_db in &sizes {
        let ch = iteration_choices(n_db);
        for (rule, k) in [("floor", ch.floor), ("round", ch.round), ("ceil", ch.ceil)] {
            let p = grover_success_closed_form(n_db, k)?;
            t.rows.push(vec![Cell::Int(n_db as u64), Cell::Int(k as u64), Cell::Num(p), Cell::Text(rule.into())]);
        }
        for k in k_max.map_or(0..0, |m| 0..m + 1) {
            let p = grover_success_closed_form(n_db, k)?;
            t.rows.push(vec![Cell::Int(n_db as u64), Cell::Int(k as u64), Cell::Num(p), Cell::Text("sweep".into())]);
        }
    }
    emit(o.out.as_deref(), &t.render(o.format(Format::Csv))?)
}

fn decohere(o: &Opts, ratios: Option<String>, marked: Option<String>) -> CliResult<()> {
    let ratios = match ratios {
        Some(s) => parse_list::<f64>("ratios", &s)?,
        None => (0..=12).map(|i| i as f64 / 4.0).collect(),
    };
    let m: BitString = match marked {
        Some(s) => s.parse()?,
        None => BitString::new(0, 2)?,
    };
    let mut t = Table::new("decohere-sweep", &["delta_l_over_l_c", "gamma", "visibility"]);
    for p in decohere_sweep(&m, &ratios)? {
        t.rows.push(vec![Cell::Num(p.ratio), Cell::Num(p.gamma), Cell::Num(p.visibility)]);
    }
    t.extra.insert("marked".into(), json!(m.to_string()));
    emit(o.out.as_deref(), &t.render(o.format(Format::Csv))?)
}

fn readout(o: &Opts) -> CliResult<()> {
    let noise = o.noise(o.sigma)?;
    let mut sigmas = vec![0.0];
    if o.sigma > 0.0 {
        sigmas.push(o.sigma);
    }
    let mut t = Table::new("readout-table", &["sigma", "setting", "marked", "p1", "p2", "p3", "p4", "off_diagonal"]);
    for &sigma in &sigmas {
        let table = readout_table(sigma, o.samples, noise.seed())?;
        for (row, s) in OracleSetting::electro_optic_settings().iter().enumerate() {
            let m = s.marked()?;
            let p = table[row];
            check_total(&format!("row {s}"), p.iter().sum(), o.tol)?;
            let mut cells = vec![Cell::Num(sigma), Cell::Text(s.to_string()), Cell::Text(m.to_string())];
            cells.extend(p.iter().map(|&x| Cell::Num(x)));
            cells.push(Cell::Num(1.0 - p[m.value()]));
            t.rows.push(cells);
        }
    }
    if o.sigma > 0.0 {
        t.extra.insert("seed".into(), json!(noise.seed()));
        t.extra.insert("samples".into(), json!(o.samples));
        t.extra.insert("rng".into(), json!(RNG_ALGORITHM));
    }
    emit(o.out.as_deref(), &t.render(o.format(Format::Csv))?)
}
