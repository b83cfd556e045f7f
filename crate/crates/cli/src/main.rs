//! `qmac`: command-line front end for the region calculators and decoder simulations.

mod checks;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qmac::format::to_json_rounded;
use qmac::gaussian::{
    compare_regions, ea_bosonic_region, ea_bosonic_region_numeric, eta_grid, region_sweep,
    sweep_csv, BosonicMacParams, SweepRow,
};
use qmac::info::{ea_cc_region, ea_q_region, lsd_q_region, LsdRegion, RateRegion};
use qmac::qmat::{channel_from_json, named_channel, KrausChannel, PureState};
use qmac::seqdecode::ea_sequential_protocol;
use qmac::simuldecode::{simulate_mac, DecoderMode};
use qmac::QmacError;

#[derive(Parser)]
#[command(
    name = "qmac",
    version,
    about = "Entanglement-assisted channel and MAC laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Successive,
    Simultaneous,
}

impl From<Mode> for DecoderMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Successive => DecoderMode::Successive,
            Mode::Simultaneous => DecoderMode::Simultaneous,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Assisted bosonic region (closed form and numeric), the unassisted outer bound and their comparison.
    GaussianRegion {
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        nsa: f64,
        #[arg(long)]
        nsb: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV of regions over an evenly spaced transmissivity grid on [0, 1].
    GaussianSweep {
        #[arg(long)]
        nsa: f64,
        #[arg(long)]
        nsb: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vertex-by-vertex containment of the unassisted outer bound in the assisted region.
    CompareYs {
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        nsa: f64,
        #[arg(long)]
        nsb: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assisted point-to-point sequential decoder over random codes.
    SimulateSeq {
        /// Built-in name (`identity:d`, `depolarizing:p[:d]`, `amplitude-damping:g`) or JSON path.
        #[arg(long)]
        channel: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        messages: usize,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Schmidt probabilities of the shared state (default: maximally entangled).
        #[arg(long, value_delimiter = ',')]
        schmidt: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assisted two-sender decoder (successive or simultaneous) over random code pairs.
    SimulateMac {
        /// Built-in two-input name (`cnot-mac`, `adder-mac`) or JSON path.
        #[arg(long)]
        channel: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long = "l", default_value_t = 2)]
        l: usize,
        #[arg(long = "m", default_value_t = 2)]
        m: usize,
        #[arg(long, value_enum, default_value = "simultaneous")]
        mode: Mode,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, value_delimiter = ',')]
        schmidt_a: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        schmidt_b: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assisted classical and quantum regions and the coherent-information region of a two-input channel.
    EaRegion {
        #[arg(long)]
        channel: String,
        #[arg(long, value_delimiter = ',')]
        schmidt_a: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        schmidt_b: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the invariant suite; exits 1 if any check fails.
    Check,
}

/// Failure carrying the process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<QmacError> for Failure {
    fn from(e: QmacError) -> Self {
        let code = match e {
            QmacError::DimensionCap { .. } | QmacError::EnumerationCap { .. } => 4,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 3,
        message: format!("{}: {e}", path.display()),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    let mut body = text.to_string();
    if !body.ends_with('\n') {
        body.push('\n');
    }
    match out {
        Some(p) => std::fs::write(p, body).map_err(|e| io_failure(p, e)),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(body.as_bytes()).map_err(|e| Failure {
                code: 3,
                message: format!("stdout: {e}"),
            })
        }
    }
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let text = to_json_rounded(value).map_err(|e| Failure {
        code: 2,
        message: e.to_string(),
    })?;
    emit(&text, out)
}

/// A JSON file when the path exists, a built-in name otherwise.
fn load_channel(spec: &str) -> Result<KrausChannel, Failure> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
        return Ok(channel_from_json(&text)?);
    }
    Ok(named_channel(spec)?)
}

fn shared_state(
    labels: [&str; 2],
    dim: usize,
    schmidt: Option<&[f64]>,
) -> Result<PureState, Failure> {
    Ok(match schmidt {
        None => PureState::max_entangled(labels[0], labels[1], dim)?,
        Some(p) => {
            if p.len() != dim {
                return Err(Failure {
                    code: 2,
                    message: format!(
                        "{} Schmidt probabilities for input dimension {dim}",
                        p.len()
                    ),
                });
            }
            PureState::schmidt_diagonal(labels[0], labels[1], p)?
        }
    })
}

fn mac_inputs(
    ch: &KrausChannel,
    a: Option<&[f64]>,
    b: Option<&[f64]>,
) -> Result<(PureState, PureState), Failure> {
    let dims = ch.in_space().dims();
    if dims.len() != 2 {
        return Err(Failure {
            code: 2,
            message: format!("channel has {} inputs, expected 2", dims.len()),
        });
    }
    Ok((
        shared_state(["A'", "A"], dims[0], a)?,
        shared_state(["B'", "B"], dims[1], b)?,
    ))
}

#[derive(Serialize)]
struct GaussianRegionReport {
    params: BosonicMacParams,
    closed_form: RateRegion,
    numeric: RateRegion,
    yen_shapiro: RateRegion,
    sum_gap: f64,
    contains: bool,
}

#[derive(Serialize)]
struct EaRegionReport {
    ea_cc: RateRegion,
    ea_q: RateRegion,
    coherent: LsdRegion,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::GaussianRegion {
            eta,
            nsa,
            nsb,
            format,
            out,
        } => {
            let p = BosonicMacParams::new(eta, nsa, nsb)?;
            let cmp = compare_regions(&p)?;
            match format {
                Format::Json => emit_json(
                    &GaussianRegionReport {
                        params: p,
                        closed_form: ea_bosonic_region(&p)?,
                        numeric: ea_bosonic_region_numeric(&p)?,
                        yen_shapiro: cmp.ys,
                        sum_gap: cmp.sum_gap,
                        contains: cmp.ea_contains_ys,
                    },
                    out.as_deref(),
                ),
                Format::Csv => {
                    let row = SweepRow {
                        eta,
                        ea: cmp.ea,
                        ys: cmp.ys,
                        sum_gap: cmp.sum_gap,
                    };
                    emit(&sweep_csv(&[row]), out.as_deref())
                }
            }
        }
        Command::GaussianSweep {
            nsa,
            nsb,
            steps,
            out,
        } => {
            let rows = region_sweep(nsa, nsb, &eta_grid(steps)?)?;
            emit(&sweep_csv(&rows), out.as_deref())
        }
        Command::CompareYs { eta, nsa, nsb, out } => {
            let p = BosonicMacParams::new(eta, nsa, nsb)?;
            emit_json(&compare_regions(&p)?, out.as_deref())
        }
        Command::SimulateSeq {
            channel,
            n,
            messages,
            delta,
            trials,
            seed,
            schmidt,
            out,
        } => {
            let ch = load_channel(&channel)?;
            if ch.num_inputs() != 1 {
                return Err(Failure {
                    code: 2,
                    message: format!("channel has {} inputs, expected 1", ch.num_inputs()),
                });
            }
            let phi = shared_state(["A'", "A"], ch.in_space().dim(), schmidt.as_deref())?;
            let report = ea_sequential_protocol(&ch, &phi, n, messages, delta, seed, trials)?;
            emit_json(&report, out.as_deref())
        }
        Command::SimulateMac {
            channel,
            n,
            l,
            m,
            mode,
            delta,
            seed,
            trials,
            schmidt_a,
            schmidt_b,
            out,
        } => {
            let ch = load_channel(&channel)?;
            let (phi, psi) = mac_inputs(&ch, schmidt_a.as_deref(), schmidt_b.as_deref())?;
            let report = simulate_mac(&ch, &phi, &psi, n, l, m, mode.into(), delta, seed, trials)?;
            emit_json(&report, out.as_deref())
        }
        Command::EaRegion {
            channel,
            schmidt_a,
            schmidt_b,
            out,
        } => {
            let ch = load_channel(&channel)?;
            let (phi, psi) = mac_inputs(&ch, schmidt_a.as_deref(), schmidt_b.as_deref())?;
            let report = EaRegionReport {
                ea_cc: ea_cc_region(&ch, &phi, &psi)?,
                ea_q: ea_q_region(&ch, &phi, &psi)?,
                coherent: lsd_q_region(&ch, &phi, &psi)?,
            };
            emit_json(&report, out.as_deref())
        }
        Command::Check => {
            let results = checks::run_all();
            let mut text = String::new();
            for r in &results {
                let tag = if r.passed { "PASS" } else { "FAIL" };
                text.push_str(&format!("{tag} {}: {}\n", r.name, r.detail));
            }
            emit(&text, None)?;
            if results.iter().all(|r| r.passed) {
                Ok(())
            } else {
                Err(Failure {
                    code: 1,
                    message: "invariant suite failed".into(),
                })
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
