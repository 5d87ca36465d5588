//! Command-line front end. Exit codes: 0 ok, 2 input error, 3 constraint
//! violation or invalid instance, 4 unsupported combination.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::mac_region::{boundary_records, boundary_trace};
use crate::model::{ChannelState, PolicyMetrics, SystemParams};
use crate::montecarlo::{
    classify, direction_seed, ergodic_evaluate, ergodic_evaluate_multiantenna, sample_channels,
    sample_multiantenna_channel, scaling_sweep, DEFAULT_TRIALS,
};
use crate::multiantenna::DirectionMethod;
use crate::oracle::{oracle_aircomp, oracle_mac, random_instance, GridSpec};
use crate::policies::{computation_optimal, mac_mse_tuple, mac_optimal, PolicyKind};
use crate::record::{write_records, OutputFormat, Record};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONSTRAINT: i32 = 3;
pub const EXIT_UNSUPPORTED: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "aircomp",
    version,
    about = "AirComp Tx-Rx scaling policies and scaling-law simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads for parallel sections (default: rayon's choice).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output format: csv | json-lines.
    #[arg(long, global = true, default_value = "csv")]
    pub format: OutputFormat,
    /// Write records here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct InstanceArgs {
    /// Comma-separated channel gains.
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<String>,
    /// File with one channel gain per line (`#` comments allowed).
    #[arg(long)]
    pub channels: Option<PathBuf>,
    /// Number of sensors; with `--seed`, sample Rayleigh gains.
    #[arg(long)]
    pub sensors: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct PhysArgs {
    /// Peak transmit power P.
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub power: f64,
    /// Noise power sigma^2.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub noise: f64,
}

#[derive(Args, Debug, Clone)]
pub struct PolicyArgs {
    /// optimal | inversion | greedy | first-iota
    #[arg(long, default_value = "optimal")]
    pub policy: String,
    /// sqrt | half | const:<n> | table:<i1,i2,...> (first-iota only).
    #[arg(long)]
    pub iota: Option<String>,
}

impl PolicyArgs {
    fn kind(&self) -> Result<PolicyKind> {
        PolicyKind::from_tag(&self.policy, self.iota.as_deref())
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve one instance with a policy.
    Eval {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        phys: PhysArgs,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Ergodic ACM/APC of a policy under Rayleigh fading.
    Ergodic {
        #[arg(long, default_value_t = 10)]
        sensors: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[command(flatten)]
        phys: PhysArgs,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Ergodic estimates over a list of sensor counts.
    Scaling {
        /// Comma-separated, strictly increasing sensor counts.
        #[arg(long)]
        k_list: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[command(flatten)]
        phys: PhysArgs,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Boundary of the two-sensor MAC MSE region.
    Region {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        phys: PhysArgs,
        /// Points per boundary edge.
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
    /// Sum-MSE optimal MAC estimation policy for one instance.
    Mac {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        phys: PhysArgs,
    },
    /// Multi-antenna receiver on sampled CN(0,1) channels.
    Multiantenna {
        #[arg(long)]
        antennas: usize,
        #[arg(long, default_value_t = 10)]
        sensors: usize,
        #[arg(long)]
        seed: u64,
        /// select | random:<trials>
        #[arg(long, default_value = "select")]
        method: DirectionMethod,
        /// Also try the antenna basis vectors in random search.
        #[arg(long)]
        include_basis: bool,
        /// Average over this many channel draws instead of solving one.
        #[arg(long)]
        trials: Option<usize>,
        #[command(flatten)]
        phys: PhysArgs,
    },
    /// Compare closed forms against the grid oracles.
    Verify {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        phys: PhysArgs,
        /// Check this many random instances (needs `--seed`) instead of one.
        #[arg(long)]
        instances: Option<usize>,
        /// Largest K of random instances.
        #[arg(long, default_value_t = 6)]
        max_sensors: usize,
        /// Grid points of the AirComp oracle.
        #[arg(long, default_value_t = 100_001)]
        resolution: usize,
        /// Grid points per axis of the MAC oracle.
        #[arg(long, default_value_t = 101)]
        mac_resolution: usize,
    },
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidInstance(_) | Error::ConstraintViolation(_) => EXIT_CONSTRAINT,
        Error::Unsupported(_) => EXIT_UNSUPPORTED,
        Error::DimensionMismatch { .. }
        | Error::Config(_)
        | Error::Domain(_)
        | Error::Parse(_)
        | Error::Io(_) => EXIT_INPUT,
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            eprintln!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli) -> Result<String> {
    let (records, summary) = match cli.threads {
        None => dispatch(&cli.command)?,
        Some(0) => return Err(Error::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?
            .install(|| dispatch(&cli.command))?,
    };
    match &cli.output {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path)?);
            write_records(&mut out, &records, cli.format)?;
            out.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            write_records(&mut out, &records, cli.format)?;
            out.flush()?;
        }
    }
    Ok(summary)
}

fn dispatch(command: &Command) -> Result<(Vec<Record>, String)> {
    match command {
        Command::Eval {
            instance,
            phys,
            policy,
        } => run_eval(instance, phys, policy),
        Command::Ergodic {
            sensors,
            seed,
            trials,
            phys,
            policy,
        } => run_ergodic(*sensors, *seed, *trials, phys, policy),
        Command::Scaling {
            k_list,
            seed,
            trials,
            phys,
            policy,
        } => run_scaling(k_list, *seed, *trials, phys, policy),
        Command::Region {
            instance,
            phys,
            grid,
        } => run_region(instance, phys, *grid),
        Command::Mac { instance, phys } => run_mac(instance, phys),
        Command::Multiantenna {
            antennas,
            sensors,
            seed,
            method,
            include_basis,
            trials,
            phys,
        } => {
            let method = match (*method, *include_basis) {
                (DirectionMethod::Random { trials, .. }, true) => DirectionMethod::Random {
                    trials,
                    include_basis: true,
                },
                (DirectionMethod::Select, true) => {
                    return Err(Error::Unsupported(
                        "--include-basis applies to random search only".into(),
                    ))
                }
                (m, false) => m,
            };
            run_multiantenna(*antennas, *sensors, *seed, method, *trials, phys)
        }
        Command::Verify {
            instance,
            phys,
            instances,
            max_sensors,
            resolution,
            mac_resolution,
        } => run_verify(
            instance,
            phys,
            *instances,
            *max_sensors,
            *resolution,
            *mac_resolution,
        ),
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<T>()
                .map_err(|_| Error::Parse(format!("invalid {what} {:?}", tok.trim())))
        })
        .collect()
}

/// Resolve the single instance source into validated parameters and channels.
pub fn load_instance(src: &InstanceArgs, phys: &PhysArgs) -> Result<(SystemParams, ChannelState)> {
    let conflict =
        || Error::Config("use exactly one of --h, --channels or --sensors/--seed".into());
    let channels = match (&src.h, &src.channels) {
        (Some(_), Some(_)) => return Err(conflict()),
        (Some(_), None) | (None, Some(_)) if src.seed.is_some() => return Err(conflict()),
        (Some(list), None) => ChannelState::from_gains(&parse_list::<f64>(list, "gain")?)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
            ChannelState::parse_text(&text)?
        }
        (None, None) => {
            let seed = src
                .seed
                .ok_or_else(|| Error::Config("sampling channels requires --seed".into()))?;
            let k = src.sensors.unwrap_or(SystemParams::default().sensor_count);
            SystemParams::new(k, phys.power, phys.noise)?;
            sample_channels(k, seed, 0)
        }
    };
    if let Some(k) = src.sensors {
        if k != channels.len() {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: channels.len(),
            });
        }
    }
    let params = SystemParams::new(channels.len(), phys.power, phys.noise)?;
    Ok((params, channels))
}

fn run_eval(
    src: &InstanceArgs,
    phys: &PhysArgs,
    policy: &PolicyArgs,
) -> Result<(Vec<Record>, String)> {
    let (params, channels) = load_instance(src, phys)?;
    let kind = policy.kind()?;
    let sol = kind.solve(&params, &channels)?;
    let metrics = PolicyMetrics::evaluate(&params, &channels, &sol.policy)?;
    let mut record = Record::new();
    record
        .push_text("policy", kind.to_string())
        .push_int("K", params.sensor_count as i64)
        .push_int("critical_number", sol.critical_number as i64);
    record.extend(sol.policy.to_record(&channels, &metrics));
    let summary = format!(
        "eval: policy={kind} K={} i*={} mse={} pw={}",
        params.sensor_count, sol.critical_number, metrics.mse, metrics.power
    );
    Ok((vec![record], summary))
}

fn run_ergodic(
    sensors: usize,
    seed: u64,
    trials: usize,
    phys: &PhysArgs,
    policy: &PolicyArgs,
) -> Result<(Vec<Record>, String)> {
    let params = SystemParams::new(sensors, phys.power, phys.noise)?;
    let est = ergodic_evaluate(&params, &policy.kind()?, trials, seed)?;
    let mut summary = format!(
        "ergodic: policy={} K={} trials={} acm={} (se {}) apc={} (se {})",
        est.policy,
        est.sensor_count,
        est.trials,
        est.mean_mse_per_k,
        est.mse_std_error(),
        est.mean_pw_per_k,
        est.pw_std_error()
    );
    if est.mse_diverging {
        summary.push_str(" [acm running mean not settling]");
    }
    Ok((vec![est.to_record()], summary))
}

fn run_scaling(
    k_list: &str,
    seed: u64,
    trials: usize,
    phys: &PhysArgs,
    policy: &PolicyArgs,
) -> Result<(Vec<Record>, String)> {
    let ks = parse_list::<usize>(k_list, "sensor count")?;
    let template = SystemParams::new(1, phys.power, phys.noise)?;
    let series = scaling_sweep(&policy.kind()?, &ks, trials, seed, &template)?;
    let class = classify(&series);
    let summary = format!(
        "scaling: policy={} acm_slope={:.4} apc_slope={:.4} computation={} energy={}",
        series.policy,
        series.acm_slope,
        series.apc_slope,
        class.computation_effective,
        class.energy_efficient
    );
    Ok((
        series.estimates.iter().map(|e| e.to_record()).collect(),
        summary,
    ))
}

fn run_region(src: &InstanceArgs, phys: &PhysArgs, grid: usize) -> Result<(Vec<Record>, String)> {
    let (params, channels) = load_instance(src, phys)?;
    let points = boundary_trace(&params, &channels, grid)?;
    let records = boundary_records(&channels, &points);
    let summary = format!("region: {} boundary points", records.len());
    Ok((records, summary))
}

fn run_mac(src: &InstanceArgs, phys: &PhysArgs) -> Result<(Vec<Record>, String)> {
    let (params, channels) = load_instance(src, phys)?;
    let policy = mac_optimal(&params, &channels)?;
    let mse = mac_mse_tuple(&params, &channels, &policy.tx_scales)?;
    let sum: f64 = mse.iter().sum();
    let rx = channels.to_sensor_order(&policy.rx_scales);
    let tx = channels.to_sensor_order(&policy.tx_scales);
    let mse = channels.to_sensor_order(&mse);
    let mut record = Record::new();
    record.push_int("K", params.sensor_count as i64);
    for (prefix, values) in [("a", &rx), ("b", &tx), ("mse", &mse)] {
        for (k, v) in values.iter().enumerate() {
            record.push_float(format!("{prefix}{}", k + 1), *v);
        }
    }
    record.push_float("sum_mse", sum);
    Ok((
        vec![record],
        format!("mac: K={} sum_mse={sum}", params.sensor_count),
    ))
}

fn run_multiantenna(
    antennas: usize,
    sensors: usize,
    seed: u64,
    method: DirectionMethod,
    trials: Option<usize>,
    phys: &PhysArgs,
) -> Result<(Vec<Record>, String)> {
    let params = SystemParams::new(sensors, phys.power, phys.noise)?;
    if antennas == 0 {
        return Err(Error::Config("--antennas must be at least 1".into()));
    }
    if let Some(trials) = trials {
        let est = ergodic_evaluate_multiantenna(&params, antennas, method, trials, seed)?;
        let summary = format!(
            "multiantenna: {} K={} acm={} apc={}",
            est.policy, est.sensor_count, est.mean_mse_per_k, est.mean_pw_per_k
        );
        return Ok((vec![est.to_record()], summary));
    }
    let ch = sample_multiantenna_channel(antennas, sensors, seed, 0);
    let sol = method.solve(&params, &ch, direction_seed(seed, 0))?;
    let mut record = Record::new();
    record
        .push_text("method", method.to_string())
        .push_int("antennas", antennas as i64)
        .push_int("K", sensors as i64)
        .push_int("critical_number", sol.critical_number as i64)
        .push_float("mse", sol.mse)
        .push_float("pw", sol.power)
        .push_int("candidate", sol.candidate as i64);
    for (n, z) in sol.direction.components().iter().enumerate() {
        record
            .push_float(format!("v{}_re", n + 1), z.re)
            .push_float(format!("v{}_im", n + 1), z.im);
    }
    let summary = format!(
        "multiantenna: method={method} N={antennas} K={sensors} i*={} mse={} pw={}",
        sol.critical_number, sol.mse, sol.power
    );
    Ok((vec![record], summary))
}

fn verify_one(
    index: usize,
    params: &SystemParams,
    channels: &ChannelState,
    resolution: usize,
    mac_resolution: usize,
) -> Result<(Record, f64)> {
    let sol = computation_optimal(params, channels)?;
    let metrics = PolicyMetrics::evaluate(params, channels, &sol.policy)?;
    let oracle = oracle_aircomp(
        params,
        channels,
        &GridSpec::for_instance(params, channels, resolution),
    )?;
    let gap = metrics.mse - oracle.mse;
    let mut r = Record::new();
    r.push_int("index", index as i64)
        .push_int("K", params.sensor_count as i64)
        .push_float("power", params.peak_power)
        .push_float("noise", params.noise_power)
        .push_int("critical_number", sol.critical_number as i64)
        .push_float("mse", metrics.mse)
        .push_float("oracle_mse", oracle.mse)
        .push_float("gap", gap);
    if params.sensor_count <= 3 {
        let mac = mac_optimal(params, channels)?;
        let sum: f64 = mac_mse_tuple(params, channels, &mac.tx_scales)?
            .iter()
            .sum();
        let mac_oracle = oracle_mac(params, channels, mac_resolution)?;
        r.push_float("mac_sum_mse", sum)
            .push_float("mac_oracle_sum_mse", mac_oracle.sum_mse);
    } else {
        r.push_text("mac_sum_mse", "na")
            .push_text("mac_oracle_sum_mse", "na");
    }
    Ok((r, gap))
}

fn run_verify(
    src: &InstanceArgs,
    phys: &PhysArgs,
    instances: Option<usize>,
    max_sensors: usize,
    resolution: usize,
    mac_resolution: usize,
) -> Result<(Vec<Record>, String)> {
    let checked: Vec<(Record, f64)> = match instances {
        Some(n) => {
            if src.h.is_some() || src.channels.is_some() {
                return Err(Error::Config(
                    "--instances cannot be combined with --h or --channels".into(),
                ));
            }
            let seed = src
                .seed
                .ok_or_else(|| Error::Config("--instances requires --seed".into()))?;
            if max_sensors == 0 {
                return Err(Error::Config("--max-sensors must be at least 1".into()));
            }
            (0..n)
                .map(|i| {
                    let inst = random_instance(max_sensors, seed, i as u64);
                    verify_one(i, &inst.params, &inst.channels, resolution, mac_resolution)
                })
                .collect::<Result<_>>()?
        }
        None => {
            let (params, channels) = load_instance(src, phys)?;
            vec![verify_one(
                0,
                &params,
                &channels,
                resolution,
                mac_resolution,
            )?]
        }
    };
    let worst = checked.iter().map(|c| c.1.abs()).fold(0.0, f64::max);
    let summary = format!(
        "verify: {} instances, max |mse - oracle| = {worst:e}",
        checked.len()
    );
    Ok((checked.into_iter().map(|c| c.0).collect(), summary))
}
