//! Verb implementations. Each returns the process exit code: 0 success,
//! 1 check failure, 2 configuration error, 3 numerical failure.

use std::fs;
use std::path::Path;

use landscape_core::landscape::{solve_landscape_with, SolveOptions};
use landscape_core::verify::{all_hard_pass, run_battery};
use landscape_core::*;

use crate::artifact::{write_artifact, Meta};
use crate::cli::{
    BoxcountArgs, CompareArgs, DualArgs, EnsembleArgs, Figure4Args, GridArgs, IdsArgs,
    PotentialInput, SolveArgs, VerifyArgs,
};
use crate::config::{parse_dist, parse_ensemble_file, GridFile};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

/// Map a core error to the exit code contract.
pub fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidDomain(_)
        | Error::InvalidPartition(_)
        | Error::DegenerateCube(_)
        | Error::IncompatiblePeriod { .. }
        | Error::InvalidPotential(_)
        | Error::InvalidDistribution(_)
        | Error::ConstantPotential
        | Error::Mismatch(_)
        | Error::Parity { .. }
        | Error::MuTooSmall { .. }
        | Error::ScaleTooLarge { .. }
        | Error::Window(_)
        | Error::ParameterRange(_)
        | Error::MemoryGuard(_)
        | Error::Parse(_) => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

/// Output context shared by every verb: where relative artifacts land and
/// whether informational lines print.
pub struct Ctx {
    pub out_dir: std::path::PathBuf,
    pub quiet: bool,
}

impl Ctx {
    fn path(&self, p: &Path) -> std::path::PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.out_dir.join(p)
        }
    }

    fn say(&self, line: std::fmt::Arguments) {
        if !self.quiet {
            println!("{line}");
        }
    }
}

macro_rules! say {
    ($ctx:expr, $($arg:tt)*) => { $ctx.say(format_args!($($arg)*)) };
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn write_or_die(path: &Path, meta: &Meta, body: &str) -> Result<()> {
    write_artifact(path, meta, body).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

impl PotentialInput {
    /// Materialize the potential plus a one-line config echo.
    pub fn resolve(&self) -> Result<(PotentialField, String, Vec<u64>)> {
        if let Some(path) = &self.potential {
            let field = PotentialField::from_text(&read_file(path)?)?;
            let desc = format!("potential_file={}", path.display());
            return Ok((field, desc, vec![]));
        }
        let (d, k, dist_str) = match (self.d, self.k, &self.dist) {
            (Some(d), Some(k), Some(s)) => (d, k, s),
            _ => {
                return Err(Error::Parse(
                    "either --potential FILE or all of --d, --k, --dist are required".into(),
                ))
            }
        };
        let dist = parse_dist(dist_str)?;
        let t = make_torus(d, k)?;
        let field = PotentialField::anderson(t, &dist, self.seed, self.realization)?;
        let desc = format!(
            "d={d} k={k} dist={} seed={} realization={}",
            dist.describe(),
            self.seed,
            self.realization
        );
        Ok((field, desc, vec![self.seed]))
    }
}

impl GridArgs {
    /// Default: `points` log-spaced values in [1e-3 (4d + Vmax), 4d + Vmax],
    /// raised to the box-counting floor 1/K^2 with a warning.
    pub fn resolve(&self, d: usize, k: usize, vmax: f64) -> Result<Vec<f64>> {
        let top = 4.0 * d as f64 + vmax;
        let floor = 1.0 / (k as f64 * k as f64);
        let hi = self.mu_max.unwrap_or(top);
        let mut lo = self.mu_min.unwrap_or(1e-3 * top);
        if lo < floor {
            eprintln!("warning: mu_min {lo:.3e} below the box-counting domain; clipped to 1/K^2 = {floor:.3e}");
            lo = floor;
        }
        log_grid(lo, hi, self.points)
    }
}

pub fn cmd_solve(args: &SolveArgs, ctx: &Ctx) -> Result<u8> {
    let (field, desc, seeds) = args.input.resolve()?;
    let t = field.torus();
    let h = assemble(t, field)?;
    let opts = SolveOptions {
        allow_constant: args.allow_constant,
        ..SolveOptions::default()
    };
    let l = solve_landscape_with(&h, &opts)?;
    let meta = Meta::new("solve", desc, seeds)
        .with("residual_tol", format!("{:.1e}", opts.residual_tol))
        .with("residual_achieved", format!("{:.3e}", l.residual_norm()));
    let out = ctx.path(&args.out);
    write_or_die(&out, &meta, &l.to_text())?;
    say!(
        ctx,
        "solved landscape on (Z/{}Z)^{}: min u = {:.6e}, residual = {:.3e} -> {}",
        t.k(),
        t.d(),
        l.min_u(),
        l.residual_norm(),
        out.display()
    );
    Ok(EXIT_OK)
}

pub fn cmd_ids(args: &IdsArgs, ctx: &Ctx) -> Result<u8> {
    let (field, desc, seeds) = args.input.resolve()?;
    let t = field.torus();
    let vmax = field.vmax();
    let h = assemble(t, field)?;
    let grid = args.grid.resolve(t.d(), t.k(), vmax)?;
    let opts = CountOptions {
        dense_limit: args.dense_limit,
    };
    let curve = ids_curve(&h, &grid, &opts)?;
    let meta = Meta::new("ids", desc, seeds).with("dense_limit", args.dense_limit.to_string());
    let out = ctx.path(&args.out);
    write_or_die(&out, &meta, &curve.to_csv())?;
    say!(
        ctx,
        "IDS curve ({} points) -> {}",
        curve.len(),
        out.display()
    );
    Ok(EXIT_OK)
}

pub fn cmd_boxcount(args: &BoxcountArgs, ctx: &Ctx) -> Result<u8> {
    let l = LandscapeField::from_text(&read_file(&args.landscape)?)?;
    let t = l.torus();
    let max_w = l.effective().iter().cloned().fold(0.0, f64::max);
    let grid = args.grid.resolve(t.d(), t.k(), max_w)?;
    let shift = args
        .shift
        .as_ref()
        .map(|s| parse_shift(s, t.d()))
        .transpose()?;
    let curve = match &shift {
        Some(a) => landscape_core::boxcount::nu_curve_shifted(&l, &grid, Some(a))?,
        None => nu_curve(&l, &grid)?,
    };
    if !curve.is_nondecreasing() {
        eprintln!(
            "warning: N_u curve is not monotone across a re-partition boundary; check the field"
        );
    }
    let desc = format!(
        "landscape_file={} shift={:?}",
        args.landscape.display(),
        shift.unwrap_or_default()
    );
    let meta = Meta::new("boxcount", desc, vec![]);
    let out = ctx.path(&args.out);
    write_or_die(&out, &meta, &curve.to_csv())?;
    say!(
        ctx,
        "N_u curve ({} points) -> {}",
        curve.len(),
        out.display()
    );
    Ok(EXIT_OK)
}

fn parse_shift(s: &str, d: usize) -> Result<Vec<usize>> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse()
                .map_err(|e| Error::Parse(format!("bad shift {tok:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    if parts.len() != d {
        return Err(Error::Parse(format!(
            "shift has {} components, expected {d}",
            parts.len()
        )));
    }
    Ok(parts)
}

pub fn cmd_compare(args: &CompareArgs, ctx: &Ctx) -> Result<u8> {
    let n = CountingCurve::from_csv(&read_file(&args.ids)?)?;
    let l = LandscapeField::from_text(&read_file(&args.landscape)?)?;
    let mut report = upper_bound_check(&n, &l)?;
    report.fitted = fit_scaling(&n, &l).ok();
    let desc = format!(
        "ids={} landscape={}",
        args.ids.display(),
        args.landscape.display()
    );
    let meta = Meta::new("compare", desc, vec![]);
    let out = ctx.path(&args.out);
    write_or_die(&out, &meta, &report.to_csv())?;
    match report.fitted {
        Some((c1, c2, dist)) => say!(
            ctx,
            "practical law fit: N(mu) ~ {c1:.4} N_u({c2:.4} mu), sup distance {dist:.4}"
        ),
        None => say!(ctx, "practical law fit unavailable (degenerate curves)"),
    }
    if report.passed() {
        say!(
            ctx,
            "upper landscape law holds on all {} grid points -> {}",
            report.rows.len(),
            out.display()
        );
        Ok(EXIT_OK)
    } else {
        println!(
            "upper landscape law VIOLATED at {} of {} grid points -> {}",
            report.violations.len(),
            report.rows.len(),
            out.display()
        );
        for v in report.violations.iter().take(5) {
            println!(
                "  mu = {:.6e}: N = {:.6e} > N_u(4d mu) = {:.6e}",
                v.mu, v.lhs, v.rhs
            );
        }
        Ok(EXIT_CHECK)
    }
}

pub fn cmd_dual(args: &DualArgs, ctx: &Ctx) -> Result<u8> {
    let (field, desc, seeds) = args.input.resolve()?;
    let t = field.torus();
    if t.k() % 2 != 0 {
        return Err(Error::Parity { k: t.k() });
    }
    let vmax = field.vmax();
    let h = assemble(t, field)?;
    let grid = args.grid.resolve(t.d(), t.k(), vmax)?;
    let opts = CountOptions::default();
    let deviation = dual_identity_check(&h, &grid, &opts)?;
    let body = four_column_curves(&h, &grid, &opts)?;
    let meta = Meta::new("dual", desc, seeds).with("identity_max_deviation", deviation.to_string());
    let out = ctx.path(&args.out);
    write_or_die(&out, &meta, &body)?;
    say!(
        ctx,
        "dual curves -> {}; identity max deviation {deviation}",
        out.display()
    );
    if deviation == 0 {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_CHECK)
    }
}

/// CSV `mu,N,Nu,Nu_dual` for one Hamiltonian; the dual column holds
/// N_u~(4d + Vmax - mu) and reads `NaN` outside the box-counting domain.
fn four_column_curves(h: &Hamiltonian, grid: &[f64], opts: &CountOptions) -> Result<String> {
    let n = ids_curve(h, grid, opts)?;
    let l = solve_landscape(h)?;
    let ld = solve_landscape(&h.dual())?;
    let top = h.top_of_spectrum();
    let k = h.torus().k() as f64;
    let floor = 1.0 / (k * k);
    let mut body = String::from("mu,N,Nu,Nu_dual\n");
    for (i, &mu) in grid.iter().enumerate() {
        let nu = box_counting(&l, mu)?;
        let mu_dual = top - mu;
        let nud = if mu_dual >= floor {
            box_counting(&ld, mu_dual)?
        } else {
            f64::NAN
        };
        body.push_str(&format!(
            "{},{},{},{}\n",
            curve::fmt17(mu),
            curve::fmt17(n.values[i]),
            curve::fmt17(nu),
            curve::fmt17(nud)
        ));
    }
    Ok(body)
}

pub fn cmd_ensemble(args: &EnsembleArgs, ctx: &Ctx) -> Result<u8> {
    let file = parse_ensemble_file(&read_file(&args.config)?)?;
    let torus = make_torus(file.d, file.k)?;
    let dist = file.distribution.to_spec();
    let realizations = args.realizations.unwrap_or(file.realizations);
    let master_seed = args.master_seed.unwrap_or(file.master_seed);
    let with_dual = args.dual || file.dual;
    let vmax = dist.ess_sup();
    let grid = resolve_grid_file(file.grid.as_ref(), file.d, file.k, vmax)?;
    let cfg = EnsembleConfig {
        torus,
        dist: dist.clone(),
        realizations,
        master_seed,
        grid,
        with_dual,
        count_options: CountOptions {
            dense_limit: file.dense_limit.unwrap_or(4096),
        },
        allow_constant: file.allow_constant,
        keep_realizations: false,
    };
    let res = run_ensemble(&cfg)?;
    // CSV
    let mut body = if with_dual {
        String::from("mu,mean_N,se_N,mean_Nu,se_Nu,mean_Nu_dual,se_Nu_dual\n")
    } else {
        String::from("mu,mean_N,se_N,mean_Nu,se_Nu\n")
    };
    for i in 0..res.grid.len() {
        body.push_str(&format!(
            "{},{},{},{},{}",
            curve::fmt17(res.grid[i]),
            curve::fmt17(res.mean_n[i]),
            curve::fmt17(res.se_n[i]),
            curve::fmt17(res.mean_nu[i]),
            curve::fmt17(res.se_nu[i])
        ));
        if with_dual {
            body.push_str(&format!(
                ",{},{}",
                curve::fmt17(res.mean_nu_dual.as_ref().unwrap()[i]),
                curve::fmt17(res.se_nu_dual.as_ref().unwrap()[i])
            ));
        }
        body.push('\n');
    }
    let desc = format!(
        "d={} k={} dist={} realizations={realizations} master_seed={master_seed} dual={with_dual}",
        file.d,
        file.k,
        dist.describe()
    );
    let csv_path = ctx.path(&args.out_prefix.with_extension("csv"));
    let meta = Meta::new("ensemble", desc.clone(), vec![master_seed]);
    write_or_die(&csv_path, &meta, &body)?;

    // tail fit, when requested; the tail theory assumes inf supp P0 = 0 and
    // the harness refuses rather than auto-shifting
    let mut tail_echo = serde_json::Value::Null;
    if let Some(tail) = &file.tail {
        if dist.ess_inf() > 0.0 {
            return Err(Error::ParameterRange(format!(
                "tail fit needs inf supp P0 = 0, but the distribution starts at {}",
                dist.ess_inf()
            )));
        }
        let curve = CountingCurve::new(
            res.grid.clone(),
            res.mean_n.clone(),
            CurveKind::MeanN,
            CurveMeta::default(),
        )?;
        let window = tail_window(file.k, &res.grid, tail.mu_hi, tail.k_star)?;
        let fit_window = (window.0.max(tail.mu_lo), window.1);
        match lifschitz_fit_excluding(&curve, fit_window) {
            Ok((slope, excluded)) => {
                say!(
                    ctx,
                    "Lifschitz fit on [{:.4e}, {:.4}]: slope {slope:.4} ({} empty points excluded)",
                    fit_window.0,
                    fit_window.1,
                    excluded.len()
                );
                tail_echo = serde_json::json!({
                    "window": [fit_window.0, fit_window.1],
                    "slope": slope,
                    "excluded_points": excluded,
                });
            }
            Err(e) => {
                say!(ctx, "Lifschitz fit unavailable: {e}");
                tail_echo = serde_json::json!({ "error": e.to_string() });
            }
        }
    }

    // metadata sidecar
    let sidecar = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": "ensemble",
        "config": desc,
        "config_hash": format!("{:016x}", crate::artifact::fnv1a(desc.as_bytes())),
        "master_seed": master_seed,
        "realizations": realizations,
        "grid_points": res.grid.len(),
        "tail": tail_echo,
    });
    let meta_path = ctx.path(&args.out_prefix.with_extension("meta.json"));
    fs::write(&meta_path, serde_json::to_string_pretty(&sidecar).unwrap())
        .map_err(|e| Error::Parse(format!("{}: {e}", meta_path.display())))?;
    say!(
        ctx,
        "ensemble means over {realizations} realizations -> {} (+ {})",
        csv_path.display(),
        meta_path.display()
    );
    Ok(EXIT_OK)
}

fn resolve_grid_file(grid: Option<&GridFile>, d: usize, k: usize, vmax: f64) -> Result<Vec<f64>> {
    let top = 4.0 * d as f64 + vmax;
    let floor = 1.0 / (k as f64 * k as f64);
    match grid {
        Some(GridFile {
            explicit: Some(values),
            ..
        }) => Ok(values.clone()),
        Some(g) => {
            let lo = g.mu_min.unwrap_or(1e-3 * top).max(floor);
            let hi = g.mu_max.unwrap_or(top);
            log_grid(lo, hi, g.points.unwrap_or(200))
        }
        None => log_grid((1e-3 * top).max(floor), top, 200),
    }
}

pub fn cmd_verify(args: &VerifyArgs, ctx: &Ctx) -> Result<u8> {
    let rows = run_battery(args.seed, args.trials)?;
    println!(
        "{:<30} {:>5} {:>7} {:>9} {:>14}  result",
        "oracle", "hard", "trials", "failures", "value"
    );
    for r in &rows {
        let value = r
            .value
            .map(|v| format!("{v:.6}"))
            .unwrap_or_else(|| "-".into());
        let result = if r.passed() { "PASS" } else { "FAIL" };
        println!(
            "{:<30} {:>5} {:>7} {:>9} {:>14}  {result}",
            r.name,
            if r.hard { "yes" } else { "no" },
            r.trials,
            r.failures,
            value
        );
    }
    if let Some(path) = &args.csv {
        let mut body = String::from("oracle,hard,trials,failures,value,detail\n");
        for r in &rows {
            body.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.name,
                r.hard,
                r.trials,
                r.failures,
                r.value.map(|v| v.to_string()).unwrap_or_default(),
                r.detail
            ));
        }
        let meta = Meta::new(
            "verify",
            format!("seed={} trials={}", args.seed, args.trials),
            vec![args.seed],
        );
        write_or_die(&ctx.path(path), &meta, &body)?;
    }
    if all_hard_pass(&rows) {
        println!("all hard oracles passed");
        Ok(EXIT_OK)
    } else {
        println!("HARD ORACLE FAILURES PRESENT");
        Ok(EXIT_CHECK)
    }
}

pub fn cmd_figure4(args: &Figure4Args, ctx: &Ctx) -> Result<u8> {
    let t = make_torus(1, 300)?;
    let dist = DistributionSpec::Uniform { lo: 0.0, hi: 10.0 };
    let field = PotentialField::anderson(t, &dist, args.seed, 0)?;
    let h = assemble(t, field)?;
    let (grid, _) = default_mu_grid(1, 300, 10.0, 200)?;
    let opts = CountOptions::default();
    let body = four_column_curves(&h, &grid, &opts)?;
    // the practical-law fit goes into the metadata
    let n = ids_curve(&h, &grid, &opts)?;
    let l = solve_landscape(&h)?;
    let (c1, c2, dist_sup) = fit_scaling(&n, &l)?;
    let desc = format!("d=1 k=300 dist=uniform[0,10] seed={}", args.seed);
    let meta = Meta::new("figure4", desc, vec![args.seed]).with(
        "fit",
        format!("c1={c1:.6} c2={c2:.6} sup_distance={dist_sup:.6}"),
    );
    let out = ctx.path(&args.out);
    write_or_die(&out, &meta, &body)?;
    say!(
        ctx,
        "figure-4 curves (seed {}) -> {}; fit N(mu) ~ {c1:.4} N_u({c2:.4} mu), sup distance {dist_sup:.4}",
        args.seed,
        out.display()
    );
    if let Some(script) = &args.plot_script {
        let script = ctx.path(script);
        write_plot_script(&script, &out)?;
        say!(ctx, "plot script -> {}", script.display());
    }
    Ok(EXIT_OK)
}

fn write_plot_script(script: &Path, csv: &Path) -> Result<()> {
    let csv = csv.display();
    let mut content = String::from("# gnuplot script for the figure-4 reproduction\n");
    content.push_str("set datafile separator \",\"\n");
    content.push_str(
        "set logscale x\nset xlabel \"mu\"\nset ylabel \"counting functions\"\nset key left top\n",
    );
    content.push_str(&format!(
        "plot \"{csv}\" every ::1 using 1:2 with steps title \"N\", \\\n     \"{csv}\" every ::1 using 1:3 with steps title \"N_u\", \\\n     \"{csv}\" every ::1 using 1:4 with steps title \"N_u dual\"\n"
    ));
    fs::write(script, content).map_err(|e| Error::Parse(format!("{}: {e}", script.display())))
}

pub fn run_command(cli: &crate::cli::Cli) -> Result<u8> {
    use crate::cli::Command::*;
    let ctx = Ctx {
        out_dir: cli.out_dir.clone(),
        quiet: cli.quiet,
    };
    match &cli.command {
        Solve(a) => cmd_solve(a, &ctx),
        Ids(a) => cmd_ids(a, &ctx),
        Boxcount(a) => cmd_boxcount(a, &ctx),
        Compare(a) => cmd_compare(a, &ctx),
        Dual(a) => cmd_dual(a, &ctx),
        Ensemble(a) => cmd_ensemble(a, &ctx),
        Verify(a) => cmd_verify(a, &ctx),
        Figure4(a) => cmd_figure4(a, &ctx),
    }
}
