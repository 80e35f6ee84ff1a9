use std::error::Error;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use manet_sim::analysis::{
    expected_neighbors, expected_walk_length_series, hitting_time_oracle, StaticDeployment,
};
use manet_sim::engine::SimTime;
use manet_sim::scenario::{parse_scenario, ScenarioConfig};
use manet_sim::sim::{run_to_csv, Protocol};

#[derive(Parser)]
#[command(
    name = "manet-sim",
    about = "MANET random-walk routing simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario under one protocol over a set of seeds and emit
    /// time-binned delivery/drop counts as CSV.
    Simulate(SimulateArgs),
    /// Print expected neighbor counts, walk-length series partial sums,
    /// and oracle hitting times for a scenario's initial deployment.
    Analyze(AnalyzeArgs),
    /// Built-in scenario files.
    Scenario {
        #[command(subcommand)]
        command: ScenarioCommand,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file path, or a built-in name like 'paper-6node'.
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    protocol: Protocol,
    /// Seed set: a single seed, 'A..B' (inclusive), or a comma list.
    #[arg(long, default_value = "1..20")]
    seeds: String,
    /// Bin width in seconds.
    #[arg(long, default_value_t = 0.25)]
    bin_width: f64,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    scenario: String,
    /// Truncation depth of the walk-length series.
    #[arg(long = "series-K", default_value_t = 20)]
    series_k: usize,
    /// Also print the exact expected hop count between two nodes.
    #[arg(long, num_args = 2, value_names = ["SRC", "DST"])]
    oracle: Option<Vec<usize>>,
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// Write a built-in scenario file to stdout.
    Print { name: String },
}

fn load_scenario(spec: &str) -> Result<ScenarioConfig, Box<dyn Error>> {
    if let Some(builtin) = ScenarioConfig::builtin(spec) {
        return Ok(builtin);
    }
    let text =
        fs::read_to_string(spec).map_err(|e| format!("cannot read scenario '{spec}': {e}"))?;
    Ok(parse_scenario(&text)?)
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>, Box<dyn Error>> {
    let spec = spec.trim();
    if let Some((a, b)) = spec.split_once("..") {
        let lo: u64 = a.parse().map_err(|_| format!("invalid seed '{a}'"))?;
        let hi: u64 = b.parse().map_err(|_| format!("invalid seed '{b}'"))?;
        if lo > hi {
            return Err(format!("empty seed range '{spec}'").into());
        }
        return Ok((lo..=hi).collect());
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| format!("invalid seed '{s}'").into())
        })
        .collect()
}

fn simulate(args: &SimulateArgs) -> Result<(), Box<dyn Error>> {
    let config = load_scenario(&args.scenario)?;
    let seeds = parse_seeds(&args.seeds)?;
    if args.bin_width.is_nan() || args.bin_width <= 0.0 {
        return Err("bin width must be positive".into());
    }
    let bin_width = SimTime::from_secs_f64(args.bin_width);
    let (csv, summaries) = run_to_csv(&config, args.protocol, &seeds, bin_width);
    match &args.out {
        Some(path) => {
            fs::write(path, &csv)?;
            for (seed, s) in &summaries {
                println!(
                    "summary protocol={} seed={} injected={} delivered={} dropped={} in_flight={}",
                    args.protocol,
                    seed,
                    s.injected,
                    s.delivered,
                    s.dropped_total(),
                    s.in_flight
                );
            }
        }
        None => {
            print!("{csv}");
            for (seed, s) in &summaries {
                eprintln!(
                    "summary protocol={} seed={} injected={} delivered={} dropped={} in_flight={}",
                    args.protocol,
                    seed,
                    s.injected,
                    s.delivered,
                    s.dropped_total(),
                    s.in_flight
                );
            }
        }
    }
    for (seed, s) in &summaries {
        let accounted = s.delivered + s.dropped_total() + s.in_flight;
        assert_eq!(
            s.injected, accounted,
            "conservation violated for seed {seed}"
        );
    }
    Ok(())
}

fn analyze(args: &AnalyzeArgs) -> Result<(), Box<dyn Error>> {
    let config = load_scenario(&args.scenario)?;
    let dep = StaticDeployment::new(config.nodes.clone(), config.range_m);
    let n = dep.positions.len();

    println!("metric,a,b,value");
    let mut total = 0.0;
    for node in 0..n {
        let e = expected_neighbors(&dep, node)?;
        total += e;
        println!("expected_neighbors,{node},,{e}");
    }
    let mean = total / n as f64;
    println!("expected_neighbors_mean,,,{mean}");

    // Series inputs from the initial deployment: F_k is the fraction of
    // ordered node pairs within k radio ranges of each other.
    let distances = dep.distances();
    let pairs = (n * (n - 1)) as f64;
    let cdf: Vec<f64> = (1..=args.series_k)
        .map(|k| {
            let reach = k as f64 * dep.range_m;
            let within = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|&(i, j)| i != j && distances[i][j] <= reach)
                .count();
            within as f64 / pairs
        })
        .collect();
    for (i, s) in expected_walk_length_series(mean, &cdf)?.iter().enumerate() {
        println!("series_partial_sum,{},,{s}", i + 1);
    }

    if let Some(pair) = &args.oracle {
        let (src, dst) = (pair[0], pair[1]);
        if src >= n || dst >= n {
            return Err(format!("oracle nodes must be < {n}").into());
        }
        let h = hitting_time_oracle(&dep.adjacency(), src, dst)?;
        println!("hitting_time,{src},{dst},{h}");
    }
    Ok(())
}

fn real_main() -> Result<(), Box<dyn Error>> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Analyze(args) => analyze(args),
        Command::Scenario { command } => match command {
            ScenarioCommand::Print { name } => {
                let config = ScenarioConfig::builtin(name)
                    .ok_or_else(|| format!("unknown built-in scenario '{name}'"))?;
                print!("{}", config.serialize());
                Ok(())
            }
        },
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
