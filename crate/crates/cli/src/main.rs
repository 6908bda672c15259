//! `cvnet`: fidelities, optimal resources, entanglement figures and sweeps for
//! continuous-variable teleportation networks.
//!
//! Exit codes: 0 on success, 1 when `verify` finds a failing suite, 2 on bad
//! input.

mod table;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cvnet_core::gaussian::{ResourceClass, ResourceSpec};
use cvnet_core::localize::{localizable_eta, localized_epr_eta};
use cvnet_core::measures::{eof_symmetric, eta_generalized, EntanglementReport, LogBase};
use cvnet_core::optimize::{d_n_opt, network_objective, numerical_optimum, optimal_fidelity, BiasRange};
use cvnet_core::sweep::{run_sweep, SweepConfig, CSV_HEADER};
use cvnet_core::teleport::{fidelity_network, Gain, ProtocolParams};
use cvnet_core::verify::{run_verify, VerifyConfig};
use serde::Serialize;

use table::{Cell, Table};

#[derive(Parser, Debug)]
#[command(name = "cvnet", version, about = "Continuous-variable teleportation network calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Output::Csv)]
    output: Output,

    /// Logarithm base for entanglement measures.
    #[arg(long = "log-base", global = true, value_enum, default_value_t = Base::Two)]
    log_base: Base,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Output {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
enum Base {
    #[value(name = "2")]
    #[serde(rename = "2")]
    Two,
    #[value(name = "e")]
    #[serde(rename = "e")]
    E,
}

impl From<Base> for LogBase {
    fn from(b: Base) -> Self {
        match b {
            Base::Two => LogBase::Two,
            Base::E => LogBase::E,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Teleportation fidelity for one resource (CM pipeline).
    Fidelity(FidelityArgs),
    /// Optimal bias, gain and fidelity, closed form and numerical.
    Optimize(SpecArgs),
    /// Entanglement figures of a resource.
    Entanglement(SpecArgs),
    /// Two-mode entanglement localized by momentum detections.
    Localize(SpecArgs),
    /// Table over average squeezing for several network sizes.
    Sweep(SweepArgs),
    /// Cross-check closed forms, CM pipeline, optimizer, localization and Monte Carlo.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Serialize)]
struct SpecArgs {
    /// Number of modes.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    n_modes: usize,
    /// Noise of the momentum-squeezed input.
    #[arg(long, default_value_t = 1.0)]
    n1: f64,
    /// Noise of the position-squeezed inputs.
    #[arg(long, default_value_t = 1.0)]
    n2: f64,
    /// Average squeezing.
    #[arg(long)]
    rbar: f64,
    /// Squeezing bias; defaults to the optimal one.
    #[arg(long, allow_hyphen_values = true)]
    d: Option<f64>,
    /// Allow |d| > rbar (negative single-mode squeezing).
    #[arg(long)]
    unconstrained: bool,
}

#[derive(Args, Debug, Serialize)]
struct FidelityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    spec: SpecArgs,
    /// Feed-forward gain of the cooperating parties; defaults to the optimal one.
    #[arg(long, allow_hyphen_values = true)]
    gain: Option<f64>,
    #[arg(long, default_value_t = 0)]
    sender: usize,
    #[arg(long, default_value_t = 1)]
    receiver: usize,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[arg(long = "N-list", value_delimiter = ',', default_values_t = [2usize, 3, 4, 8, 20, 50])]
    #[serde(rename = "N_list")]
    n_list: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    n1: f64,
    #[arg(long, default_value_t = 1.0)]
    n2: f64,
    #[arg(long = "rbar-min", default_value_t = 0.0)]
    rbar_min: f64,
    #[arg(long = "rbar-max", default_value_t = 2.0)]
    rbar_max: f64,
    #[arg(long, default_value_t = 41)]
    steps: usize,
    #[arg(long)]
    unconstrained: bool,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long, default_value_t = VerifyConfig::default().seed)]
    seed: u64,
    /// Monte Carlo samples per spec.
    #[arg(long, default_value_t = VerifyConfig::default().samples)]
    samples: u64,
    /// Corrupt the closed-form p-variance to check that the suite notices.
    #[arg(long = "inject-fault", hide = true)]
    inject_fault: bool,
}

#[derive(Serialize)]
struct Echo<'a, T: Serialize> {
    #[serde(flatten)]
    args: &'a T,
    output: Output,
    log_base: Base,
}

enum Failure {
    Usage(String),
    Verification(String),
}

impl From<cvnet_core::Error> for Failure {
    fn from(e: cvnet_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<String, Failure>;

fn range(unconstrained: bool) -> BiasRange {
    if unconstrained {
        BiasRange::Unconstrained
    } else {
        BiasRange::Constrained
    }
}

impl SpecArgs {
    fn class(&self) -> Result<ResourceClass, Failure> {
        Ok(ResourceClass::new(self.n_modes, self.n1, self.n2, self.rbar)?)
    }

    /// Resource with the requested bias, or the optimal one.
    fn spec(&self) -> Result<ResourceSpec, Failure> {
        let class = self.class()?;
        let d = match self.d {
            Some(d) => d,
            None => optimal_fidelity(&class, range(self.unconstrained))?.d_opt,
        };
        if !d.is_finite() {
            return Err(Failure::Usage(format!("d must be finite, got {d}")));
        }
        Ok(if self.unconstrained { class.with_bias_unconstrained(d)? } else { class.with_bias(d)? })
    }
}

fn render<C: Serialize>(table: &Table, command: &str, args: &C, cli: &Cli) -> String {
    match cli.output {
        Output::Csv => table.to_csv(),
        Output::Json => table.to_json(command, &Echo { args, output: cli.output, log_base: cli.log_base }),
    }
}

fn cmd_fidelity(args: &FidelityArgs, cli: &Cli) -> CmdResult {
    let spec = args.spec.spec()?;
    let gain = match args.gain {
        Some(g) => Gain::Fixed(g),
        None => Gain::Optimal,
    };
    let out = fidelity_network(&spec, &ProtocolParams::new(args.sender, args.receiver, gain)?)?;
    let mut t = Table::new(&["N", "n1", "n2", "rbar", "d", "gain", "var_x_rel", "var_p_tot", "fidelity"]);
    t.push(vec![
        spec.n_modes().into(),
        spec.n1().into(),
        spec.n2().into(),
        spec.rbar().into(),
        spec.d().into(),
        out.gain_used.into(),
        out.var_x_rel.into(),
        out.var_p_tot.into(),
        out.fidelity.into(),
    ]);
    Ok(render(&t, "fidelity", args, cli))
}

fn cmd_optimize(args: &SpecArgs, cli: &Cli) -> CmdResult {
    let class = args.class()?;
    let cf = optimal_fidelity(&class, range(args.unconstrained))?;
    let r = class.rbar();
    let d_bounds = if args.unconstrained { (-r - 1.0, r + 1.0) } else { (-r, r) };
    let num = numerical_optimum(network_objective(class), d_bounds, (-3.0, 3.0))?;
    let mut t = Table::new(&["method", "N", "n1", "n2", "rbar", "d_opt", "g_opt", "F_opt", "eta_N", "clamped"]);
    for (method, res) in [("closed-form", cf), ("numerical", num)] {
        t.push(vec![
            method.into(),
            class.n_modes().into(),
            class.n1().into(),
            class.n2().into(),
            r.into(),
            res.d_opt.into(),
            res.g_opt.into(),
            res.fidelity_opt.into(),
            res.eta_n.into(),
            res.clamped.into(),
        ]);
    }
    Ok(render(&t, "optimize", args, cli))
}

fn cmd_entanglement(args: &SpecArgs, cli: &Cli) -> CmdResult {
    let spec = args.spec()?;
    let rep = EntanglementReport::for_spec(&spec, cli.log_base.into())?;
    let mut t = Table::new(&["N", "rbar", "d", "eta", "eta_N", "E_F", "E_T", "E_F_loc", "E_tau"]);
    t.push(vec![
        spec.n_modes().into(),
        spec.rbar().into(),
        spec.d().into(),
        rep.eta.into(),
        rep.eta_n.into(),
        rep.e_f.into(),
        rep.e_t.into(),
        rep.e_f_loc.into(),
        rep.e_tau.into(),
    ]);
    Ok(render(&t, "entanglement", args, cli))
}

fn cmd_localize(args: &SpecArgs, cli: &Cli) -> CmdResult {
    let spec = args.spec()?;
    let eta_loc = localizable_eta(&spec)?;
    let eta_epr = localized_epr_eta(&spec)?;
    let class = spec.class();
    let mut t = Table::new(&["N", "rbar", "d", "d_N_opt", "eta_loc", "eta_epr", "eta_N", "E_F_loc"]);
    t.push(vec![
        spec.n_modes().into(),
        spec.rbar().into(),
        spec.d().into(),
        d_n_opt(class.n_modes(), class.n1(), class.n2(), class.rbar()).into(),
        eta_loc.into(),
        eta_epr.into(),
        eta_generalized(class).into(),
        eof_symmetric(eta_loc, cli.log_base.into())?.into(),
    ]);
    Ok(render(&t, "localize", args, cli))
}

fn cmd_sweep(args: &SweepArgs, cli: &Cli) -> CmdResult {
    let config = SweepConfig {
        n_list: args.n_list.clone(),
        n1: args.n1,
        n2: args.n2,
        rbar_min: args.rbar_min,
        rbar_max: args.rbar_max,
        steps: args.steps,
        range: range(args.unconstrained),
        log_base: cli.log_base.into(),
    };
    let rows = run_sweep(&config)?;
    let columns: Vec<&'static str> = CSV_HEADER.split(',').collect();
    let mut t = Table::new(&columns);
    for r in rows {
        t.push(vec![
            r.n_modes.into(),
            r.rbar.into(),
            r.f_opt.into(),
            r.f_equal.into(),
            r.f_unbiased.into(),
            r.f_worst.into(),
            r.eta_n.into(),
            r.e_t.into(),
            r.e_f_loc.into(),
            r.e_tau.into(),
        ]);
    }
    Ok(render(&t, "sweep", args, cli))
}

fn cmd_verify(args: &VerifyArgs, cli: &Cli) -> CmdResult {
    if args.samples < 2 {
        return Err(Failure::Usage(format!("need at least 2 samples, got {}", args.samples)));
    }
    let reports =
        run_verify(&VerifyConfig { seed: args.seed, samples: args.samples, inject_fault: args.inject_fault })?;
    let mut t = Table::new(&["suite", "max_deviation", "tolerance", "passed", "worst_point"]);
    for r in &reports {
        t.push(vec![
            r.name.into(),
            r.max_deviation.into(),
            r.tolerance.into(),
            r.passed.into(),
            Cell::Text(r.worst_point.clone()),
        ]);
    }
    let text = render(&t, "verify", args, cli);
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| {
            format!(
                "suite '{}' failed: deviation {:e} > {:e} at {}",
                r.name, r.max_deviation, r.tolerance, r.worst_point
            )
        })
        .collect();
    if failed.is_empty() {
        Ok(text)
    } else {
        print!("{text}");
        Err(Failure::Verification(failed.join("\n")))
    }
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Fidelity(a) => cmd_fidelity(a, cli),
        Command::Optimize(a) => cmd_optimize(a, cli),
        Command::Entanglement(a) => cmd_entanglement(a, cli),
        Command::Localize(a) => cmd_localize(a, cli),
        Command::Sweep(a) => cmd_sweep(a, cli),
        Command::Verify(a) => cmd_verify(a, cli),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            // a closed pipe is not an error worth reporting
            let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}
