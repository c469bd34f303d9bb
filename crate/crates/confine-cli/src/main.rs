//! Command-line front end: models -> kernels -> spectra -> survival curves ->
//! oracle comparisons, with machine-readable CSV/JSON outputs and a run
//! manifest per command.
//!
//! Exit codes: 0 success, 2 validation/comparison fail, 3 input malformed,
//! 4 unsupported parameters, 5 numerical failure.

use clap::{Parser, Subcommand, ValueEnum};
use confine::models::{DensitySpec, Domain, LevyModel};
use confine::quasipotential::QuasiPotentialKernel;
use confine::spectral::{self, SpectralDecomposition};
use confine::{kernels, mc, thm, wiener};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const MANIFEST_SCHEMA_VERSION: u64 = 1;

#[derive(Parser)]
#[command(name = "confine", version, about = "Confinement probabilities for 1-D Levy processes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a model descriptor against the admissibility rules.
    Validate {
        /// model descriptor JSON file
        model: PathBuf,
    },
    /// Export the quasi-potential kernel Phi on a uniform grid (default), or
    /// the convolution kernel k(y) of the factored generator with --conv.
    Kernel {
        /// model descriptor JSON file (omit when --from-grid is given)
        model: Option<PathBuf>,
        /// interval as "lo,hi"
        #[arg(long, allow_hyphen_values = true, default_value = "-1,1")]
        domain: String,
        /// grid points per axis
        #[arg(long, default_value_t = 129)]
        n: usize,
        /// dump the convolution kernel rows (y, k(y)) instead of Phi
        #[arg(long)]
        conv: bool,
        /// re-export a previously dumped Phi grid instead of building one
        #[arg(long)]
        from_grid: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Eigenvalues and leading data of the quasi-potential operator.
    Spectrum {
        model: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true, default_value = "-1,1")]
        domain: String,
        /// Nystrom nodes
        #[arg(long, default_value_t = 128)]
        n: usize,
        /// eigenpairs to report
        #[arg(long, default_value_t = 8)]
        k: usize,
        /// read the kernel from a Phi grid dump instead of a model
        #[arg(long)]
        from_grid: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Survival curve p(t, Delta) over a time grid.
    Survive {
        model: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value = "-1,1")]
        domain: String,
        /// time grid "t1..t2:steps" (linear) or "t1..t2:steps:geom"
        #[arg(long)]
        times: String,
        #[arg(long, value_enum)]
        method: Method,
        /// Nystrom nodes (series/asymptotic)
        #[arg(long, default_value_t = 128)]
        n: usize,
        /// eigenpairs kept in the series
        #[arg(long, default_value_t = 24)]
        k: usize,
        /// Monte Carlo paths
        #[arg(long, default_value_t = 100_000)]
        paths: u64,
        /// Monte Carlo time step
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Brownian-bridge crossing correction (Gaussian models)
        #[arg(long)]
        bridge: bool,
        #[arg(long)]
        antithetic: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare survival curves referenced by run manifests.
    Compare {
        /// manifest JSON files; the first curve is the reference
        manifests: Vec<PathBuf>,
        /// absolute tolerance floor (3-sigma MC bands widen it pointwise)
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// Re-execute the command recorded in a run manifest.
    Rerun { manifest: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Method {
    Series,
    Asymptotic,
    Mc,
    Oracle,
}

impl Method {
    fn label(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Asymptotic => "asymptotic",
            Method::Mc => "mc",
            Method::Oracle => "oracle",
        }
    }
}

struct CliError {
    code: u8,
    msg: String,
}

impl CliError {
    fn malformed(msg: impl Into<String>) -> Self {
        Self { code: 3, msg: msg.into() }
    }
}

impl From<confine::Error> for CliError {
    fn from(e: confine::Error) -> Self {
        let code = match &e {
            confine::Error::Numerical(_) | confine::Error::Quadrature { .. } => 5,
            _ => 4,
        };
        Self { code, msg: e.to_string() }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&cli.cmd, &argv) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}

fn dispatch(cmd: &Cmd, argv: &[String]) -> CliResult<u8> {
    match cmd {
        Cmd::Validate { model } => cmd_validate(model, argv),
        Cmd::Kernel { model, domain, n, conv, from_grid, out } => {
            cmd_kernel(model.as_deref(), domain, *n, *conv, from_grid.as_deref(), out, argv)
        }
        Cmd::Spectrum { model, domain, n, k, from_grid, out } => {
            cmd_spectrum(model.as_deref(), domain, *n, *k, from_grid.as_deref(), out, argv)
        }
        Cmd::Survive {
            model, domain, times, method, n, k, paths, dt, seed, bridge, antithetic, out,
        } => cmd_survive(
            model, domain, times, *method, *n, *k, *paths, *dt, *seed, *bridge, *antithetic, out,
            argv,
        ),
        Cmd::Compare { manifests, tol } => cmd_compare(manifests, *tol),
        Cmd::Rerun { manifest } => cmd_rerun(manifest),
    }
}

// --- shared plumbing -------------------------------------------------------

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::malformed(format!("cannot read {}: {e}", path.display())))
}

fn load_model(path: &Path) -> CliResult<LevyModel> {
    let text = read_file(path)?;
    LevyModel::from_json(&text).map_err(|e| CliError::malformed(e.to_string()))
}

fn parse_domain(spec: &str) -> CliResult<Domain> {
    let mut intervals = Vec::new();
    for part in spec.split(';') {
        let nums: Vec<&str> = part.split(',').collect();
        if nums.len() != 2 {
            return Err(CliError::malformed(format!(
                "domain part '{part}' is not 'lo,hi'"
            )));
        }
        let lo: f64 = nums[0]
            .trim()
            .parse()
            .map_err(|_| CliError::malformed(format!("bad number '{}'", nums[0])))?;
        let hi: f64 = nums[1]
            .trim()
            .parse()
            .map_err(|_| CliError::malformed(format!("bad number '{}'", nums[1])))?;
        intervals.push((lo, hi));
    }
    Domain::new(intervals).map_err(CliError::from)
}

/// "t1..t2:steps[:geom]" -> sample times.
fn parse_times(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::malformed(format!("time grid '{spec}' is not 't1..t2:steps[:geom]'"));
    let (range, rest) = spec.split_once(':').ok_or_else(bad)?;
    let (t1s, t2s) = range.split_once("..").ok_or_else(bad)?;
    let t1: f64 = t1s.trim().parse().map_err(|_| bad())?;
    let t2: f64 = t2s.trim().parse().map_err(|_| bad())?;
    let (steps_s, geom) = match rest.split_once(':') {
        None => (rest, false),
        Some((s, "geom")) => (s, true),
        Some(_) => return Err(bad()),
    };
    let steps: usize = steps_s.trim().parse().map_err(|_| bad())?;
    if steps == 0 || !(t1 > 0.0) || !(t2 >= t1) {
        return Err(CliError::malformed(format!(
            "time grid '{spec}' needs 0 < t1 <= t2 and steps >= 1"
        )));
    }
    if geom && steps > 1 && t1 == t2 {
        return Err(CliError::malformed("geometric grid needs t1 < t2"));
    }
    let mut out = Vec::with_capacity(steps);
    for i in 0..steps {
        let u = if steps == 1 { 0.0 } else { i as f64 / (steps - 1) as f64 };
        out.push(if geom { t1 * (t2 / t1).powf(u) } else { t1 + (t2 - t1) * u });
    }
    Ok(out)
}

/// Quasi-potential kernel for the model on [lo, hi], plus the factor the
/// sampled Phi values (and eigenvalues of B) must be multiplied by.
fn phi_kernel(model: &LevyModel, lo: f64, hi: f64) -> CliResult<(QuasiPotentialKernel, f64)> {
    match &model.density {
        DensitySpec::None => {
            if model.gamma != 0.0 {
                return Err(confine::Error::Unsupported(
                    "closed-form Gaussian kernel requires zero drift".into(),
                )
                .into());
            }
            if model.a <= 0.0 {
                return Err(confine::Error::Parameter(
                    "Gaussian model needs a > 0".into(),
                )
                .into());
            }
            // Phi scales as 1/A against the unit-diffusion Green's function
            Ok((QuasiPotentialKernel::wiener(hi, -lo), 1.0 / model.a))
        }
        DensitySpec::Stable { alpha, beta } => {
            if model.gamma != 0.0 {
                return Err(confine::Error::Unsupported(
                    "closed-form stable kernel requires zero drift".into(),
                )
                .into());
            }
            let c = (hi - lo) / 2.0;
            let mut k = QuasiPotentialKernel::stable(*alpha, *beta, c)?;
            // non-symmetric intervals go through the shift reduction
            k.neg = -lo;
            k.pos = hi;
            Ok((k, 1.0))
        }
        DensitySpec::VarianceGamma { .. }
        | DensitySpec::NormalInverseGaussian { .. }
        | DensitySpec::Meixner { .. }
        | DensitySpec::DampedStable { .. } => {
            if (hi + lo).abs() > 1e-12 {
                return Err(confine::Error::Unsupported("the general kernel construction runs on symmetric intervals; shift the domain to [-c, c]".to_string())
                .into());
            }
            let conv = kernels::build_kernel(model)?;
            let data = thm::general_construction(&conv, hi, 96)?;
            let grid = data.grid_kernel(257, 1.0)?;
            Ok((grid, 1.0))
        }
        DensitySpec::CompoundPoisson { .. } => Err(confine::Error::Unsupported(
            "finite-activity models use the potential pipeline, which has no \
             interval quasi-potential kernel here"
                .into(),
        )
        .into()),
        DensitySpec::Custom(_) => Err(confine::Error::Unsupported(
            "custom densities are a library-only feature".into(),
        )
        .into()),
    }
}

fn scaled_eigensystem(
    kernel: &QuasiPotentialKernel,
    scale: f64,
    n: usize,
    k: usize,
) -> CliResult<SpectralDecomposition> {
    let sys = spectral::assemble(kernel, n)?;
    let mut dec = spectral::eigensystem(&sys, k)?;
    if scale != 1.0 {
        for l in dec.eigenvalues.iter_mut() {
            *l *= scale;
        }
    }
    Ok(dec)
}

fn write_output(path: &Path, content: &str) -> CliResult<()> {
    std::fs::write(path, content)
        .map_err(|e| CliError::malformed(format!("cannot write {}: {e}", path.display())))
}

fn write_manifest(
    command: &str,
    argv: &[String],
    model: Option<&LevyModel>,
    domain: Option<&Domain>,
    params: Value,
    outputs: &[&Path],
    started: Instant,
) -> CliResult<Value> {
    let manifest = json!({
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "command": command,
        "argv": argv,
        "model": model.map(|m| m.to_json_value()),
        "domain": domain.map(|d| d.intervals().iter().map(|&(a, b)| json!([a, b])).collect::<Vec<_>>()),
        "params": params,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_s": started.elapsed().as_secs_f64(),
        "outputs": outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });
    if let Some(primary) = outputs.first() {
        let mpath = manifest_path(primary);
        write_output(&mpath, &format!("{}\n", serde_json::to_string_pretty(&manifest).unwrap()))?;
    }
    Ok(manifest)
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

// --- validate --------------------------------------------------------------

fn cmd_validate(model_path: &Path, argv: &[String]) -> CliResult<u8> {
    let started = Instant::now();
    let model = load_model(model_path)?;
    let report = model.validate();
    for c in &report.checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let manifest = write_manifest(
        "validate",
        argv,
        Some(&model),
        None,
        json!({}),
        &[],
        started,
    )?;
    println!("manifest: {}", serde_json::to_string(&manifest).unwrap());
    Ok(if report.all_pass() { 0 } else { 2 })
}

// --- kernel ----------------------------------------------------------------

fn cmd_kernel(
    model_path: Option<&Path>,
    domain_spec: &str,
    n: usize,
    conv: bool,
    from_grid: Option<&Path>,
    out: &Path,
    argv: &[String],
) -> CliResult<u8> {
    let started = Instant::now();
    if let Some(grid_path) = from_grid {
        let (kernel, header) = read_phi_grid(grid_path)?;
        let (xs, phi) = kernel.grid_data().expect("imported kernel is grid-backed");
        let text = phi_grid_csv(&header, xs, phi);
        write_output(out, &text)?;
        write_manifest(
            "kernel",
            argv,
            None,
            None,
            json!({"from_grid": grid_path.display().to_string()}),
            &[out],
            started,
        )?;
        return Ok(0);
    }
    let model_path = model_path
        .ok_or_else(|| CliError::malformed("kernel needs a model file or --from-grid"))?;
    let model = load_model(model_path)?;
    let domain = parse_domain(domain_spec)?;
    let (lo, hi) = domain.single()?;
    if n < 2 {
        return Err(confine::Error::Grid("kernel dump needs n >= 2".into()).into());
    }

    let text = if conv {
        let kernel = kernels::build_kernel(&model)?;
        let header = json!({
            "A_half": kernel.a_half,
            "singularity": kernel.singularity.label(),
            "gamma_shift": kernel.gamma_shift,
        });
        let mut s = format!("# {header}\ny,k\n");
        let span = hi - lo;
        for i in 0..n {
            let y = -span + (i as f64 + 0.5) * 2.0 * span / n as f64;
            if y == 0.0 {
                continue;
            }
            s.push_str(&format!("{},{}\n", y, kernel.eval(y)));
        }
        s
    } else {
        let (kernel, scale) = phi_kernel(&model, lo, hi)?;
        let xs: Vec<f64> = (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect();
        let mut phi = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                phi[i * n + j] = scale * kernel.eval(xs[i], xs[j]);
            }
        }
        let header = json!({
            "kind": kernel.kind.label(),
            "domain": [lo, hi],
            "n": n,
            "conditioning": kernel.conditioning(),
        });
        phi_grid_csv(&header, &xs, &phi)
    };
    write_output(out, &text)?;
    write_manifest(
        "kernel",
        argv,
        Some(&model),
        Some(&domain),
        json!({"n": n, "conv": conv}),
        &[out],
        started,
    )?;
    Ok(0)
}

fn phi_grid_csv(header: &Value, xs: &[f64], phi: &[f64]) -> String {
    let n = xs.len();
    let mut s = format!("# {header}\nx,y,phi\n");
    for i in 0..n {
        for j in 0..n {
            s.push_str(&format!("{},{},{}\n", xs[i], xs[j], phi[i * n + j]));
        }
    }
    s
}

/// Parses a Phi grid dump back into a grid-backed kernel; numbers round-trip
/// bit-exactly through the shortest-representation float formatting.
fn read_phi_grid(path: &Path) -> CliResult<(QuasiPotentialKernel, Value)> {
    let text = read_file(path)?;
    let mut lines = text.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| CliError::malformed("empty Phi grid file"))?;
    let header: Value = header_line
        .strip_prefix("# ")
        .and_then(|h| serde_json::from_str(h).ok())
        .ok_or_else(|| CliError::malformed("missing '# {json}' header line"))?;
    let n = header["n"]
        .as_u64()
        .ok_or_else(|| CliError::malformed("header lacks 'n'"))? as usize;
    let dom = header["domain"]
        .as_array()
        .and_then(|a| Some((a.first()?.as_f64()?, a.get(1)?.as_f64()?)))
        .ok_or_else(|| CliError::malformed("header lacks 'domain'"))?;
    if (dom.0 + dom.1).abs() > 1e-12 {
        return Err(confine::Error::Unsupported(
            "grid import requires a symmetric domain".into(),
        )
        .into());
    }
    let conditioning = header["conditioning"].as_f64().unwrap_or(1.0);
    let mut xs = vec![0.0f64; n];
    let mut phi = vec![0.0f64; n * n];
    let mut rows = 0usize;
    for line in lines {
        if line.starts_with('x') || line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let parse = |p: Option<&str>| -> CliResult<f64> {
            p.and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| CliError::malformed(format!("bad CSV row '{line}'")))
        };
        let x = parse(parts.next())?;
        let _y = parse(parts.next())?;
        let v = parse(parts.next())?;
        if rows >= n * n {
            return Err(CliError::malformed("more rows than n*n"));
        }
        xs[rows / n] = x;
        phi[rows] = v;
        rows += 1;
    }
    if rows != n * n {
        return Err(CliError::malformed(format!("expected {} rows, found {rows}", n * n)));
    }
    let kernel = QuasiPotentialKernel::from_grid(dom.1, xs, phi, conditioning)?;
    Ok((kernel, header))
}

// --- spectrum --------------------------------------------------------------

fn cmd_spectrum(
    model_path: Option<&Path>,
    domain_spec: &str,
    n: usize,
    k: usize,
    from_grid: Option<&Path>,
    out: &Path,
    argv: &[String],
) -> CliResult<u8> {
    let started = Instant::now();
    let (kernel, scale, model, domain) = if let Some(grid_path) = from_grid {
        let (kernel, _) = read_phi_grid(grid_path)?;
        (kernel, 1.0, None, None)
    } else {
        let model_path = model_path
            .ok_or_else(|| CliError::malformed("spectrum needs a model file or --from-grid"))?;
        let model = load_model(model_path)?;
        let domain = parse_domain(domain_spec)?;
        let (lo, hi) = domain.single()?;
        let (kernel, scale) = phi_kernel(&model, lo, hi)?;
        (kernel, scale, Some(model), Some(domain))
    };
    let dec = scaled_eigensystem(&kernel, scale, n, k)?;
    let (lambda1, c1) = spectral::leading_asymptotics(&dec)?;
    let result = json!({
        "eigenvalues": dec
            .eigenvalues
            .iter()
            .map(|l| json!({"re": l.re, "im": l.im}))
            .collect::<Vec<_>>(),
        "lambda1": lambda1,
        "c1": c1,
        "n": n,
        "kernel_kind": kernel.kind.label(),
    });
    write_output(out, &format!("{}\n", serde_json::to_string_pretty(&result).unwrap()))?;
    write_manifest(
        "spectrum",
        argv,
        model.as_ref(),
        domain.as_ref(),
        json!({"n": n, "k": k}),
        &[out],
        started,
    )?;
    Ok(0)
}

// --- survive ---------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn cmd_survive(
    model_path: &Path,
    domain_spec: &str,
    times_spec: &str,
    method: Method,
    n: usize,
    k: usize,
    paths: u64,
    dt: f64,
    seed: u64,
    bridge: bool,
    antithetic: bool,
    out: &Path,
    argv: &[String],
) -> CliResult<u8> {
    let started = Instant::now();
    let model = load_model(model_path)?;
    let domain = parse_domain(domain_spec)?;
    let times = parse_times(times_spec)?;
    if !domain.contains(0.0) {
        return Err(confine::Error::Domain(
            "survival curves start the process at 0, which must lie in the domain".into(),
        )
        .into());
    }

    let mut rows: Vec<(f64, f64, f64)> = Vec::with_capacity(times.len());
    match method {
        Method::Series | Method::Asymptotic => {
            let (lo, hi) = domain.single()?;
            let (kernel, scale) = phi_kernel(&model, lo, hi)?;
            let dec = scaled_eigensystem(&kernel, scale, n, k.min(n))?;
            if method == Method::Series {
                let est = spectral::survival_series(&dec, &times)?;
                for ((&t, &p), &e) in times.iter().zip(&est.values).zip(&est.errors) {
                    rows.push((t, p, e));
                }
            } else {
                let est = spectral::asymptotic_survival(&dec, &times)?;
                for (&t, &p) in times.iter().zip(&est.values) {
                    rows.push((t, p, 0.0));
                }
            }
        }
        Method::Oracle => {
            if !matches!(model.density, DensitySpec::None) || model.gamma != 0.0 {
                return Err(confine::Error::Unsupported(
                    "the closed-form oracle covers driftless Gaussian models only".into(),
                )
                .into());
            }
            let (lo, hi) = domain.single()?;
            for &t in &times {
                // unit-diffusion time change t -> A t
                rows.push((t, wiener::p2(hi, -lo, model.a * t, 1e-12), 0.0));
            }
        }
        Method::Mc => {
            let cfg = mc::SimConfig {
                n_paths: paths,
                dt,
                seed,
                bridge_correction: bridge,
                antithetic,
            };
            for &t in &times {
                let est = mc::estimate_survival(&model, &domain, t, &cfg)?;
                rows.push((t, est.p_hat, est.stderr));
            }
        }
    }

    let mut text = String::from("t,p,method,err\n");
    for (t, p, e) in &rows {
        text.push_str(&format!("{},{},{},{}\n", t, p, method.label(), e));
    }
    write_output(out, &text)?;
    write_manifest(
        "survive",
        argv,
        Some(&model),
        Some(&domain),
        json!({
            "times": times_spec,
            "method": method.label(),
            "n": n,
            "k": k,
            "paths": paths,
            "dt": dt,
            "seed": seed,
            "bridge": bridge,
            "antithetic": antithetic,
        }),
        &[out],
        started,
    )?;
    Ok(0)
}

// --- compare ---------------------------------------------------------------

struct Curve {
    label: String,
    t: Vec<f64>,
    p: Vec<f64>,
    err: Vec<f64>,
}

fn read_curve_from_manifest(path: &Path) -> CliResult<Curve> {
    let manifest: Value = serde_json::from_str(&read_file(path)?)
        .map_err(|e| CliError::malformed(format!("{}: {e}", path.display())))?;
    let csv_path = manifest["outputs"]
        .as_array()
        .and_then(|a| a.iter().find_map(|v| v.as_str().filter(|s| s.ends_with(".csv"))))
        .ok_or_else(|| {
            CliError::malformed(format!("{}: no CSV output listed", path.display()))
        })?;
    let text = read_file(Path::new(csv_path))?;
    let mut curve = Curve {
        label: csv_path.to_string(),
        t: Vec::new(),
        p: Vec::new(),
        err: Vec::new(),
    };
    for line in text.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(CliError::malformed(format!("bad curve row '{line}'")));
        }
        let num = |s: &str| -> CliResult<f64> {
            s.trim()
                .parse()
                .map_err(|_| CliError::malformed(format!("bad number '{s}'")))
        };
        curve.t.push(num(parts[0])?);
        curve.p.push(num(parts[1])?);
        curve.err.push(num(parts[3])?);
    }
    if curve.t.is_empty() {
        return Err(CliError::malformed(format!("{csv_path}: empty curve")));
    }
    Ok(curve)
}

fn cmd_compare(manifests: &[PathBuf], tol: f64) -> CliResult<u8> {
    if manifests.len() < 2 {
        return Err(CliError::malformed(
            "compare needs at least two run manifests",
        ));
    }
    let curves: Vec<Curve> = manifests
        .iter()
        .map(|p| read_curve_from_manifest(p))
        .collect::<CliResult<Vec<_>>>()?;
    let reference = &curves[0];
    let mut all_pass = true;
    println!("reference: {}", reference.label);
    println!("curve,max_deviation,allowed,verdict");
    for c in &curves[1..] {
        if c.t.len() != reference.t.len()
            || c.t.iter().zip(&reference.t).any(|(a, b)| (a - b).abs() > 1e-12)
        {
            return Err(confine::Error::Grid(format!(
                "time grids differ between {} and {}",
                reference.label, c.label
            ))
            .into());
        }
        let mut max_dev = 0.0f64;
        let mut allowed = tol;
        let mut pass = true;
        for i in 0..c.t.len() {
            let dev = (c.p[i] - reference.p[i]).abs();
            let band = tol.max(3.0 * (c.err[i] + reference.err[i]));
            max_dev = max_dev.max(dev);
            allowed = allowed.max(band);
            if dev > band {
                pass = false;
            }
        }
        all_pass &= pass;
        println!(
            "{},{},{},{}",
            c.label,
            max_dev,
            allowed,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(if all_pass { 0 } else { 2 })
}

// --- rerun -----------------------------------------------------------------

fn cmd_rerun(path: &Path) -> CliResult<u8> {
    let manifest: Value = serde_json::from_str(&read_file(path)?)
        .map_err(|e| CliError::malformed(format!("{}: {e}", path.display())))?;
    let argv: Vec<String> = manifest["argv"]
        .as_array()
        .map(|a| {
            a.iter()
                .filter_map(|v| v.as_str().map(|s| s.to_string()))
                .collect()
        })
        .ok_or_else(|| CliError::malformed("manifest lacks 'argv'"))?;
    if argv.first().map(String::as_str) == Some("rerun") {
        return Err(CliError::malformed("refusing to rerun a rerun manifest"));
    }
    let mut full = vec!["confine".to_string()];
    full.extend(argv.iter().cloned());
    let cli = Cli::try_parse_from(&full)
        .map_err(|e| CliError::malformed(format!("manifest argv does not parse: {e}")))?;
    dispatch(&cli.cmd, &argv)
}
