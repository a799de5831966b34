use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qkdnet::cli::{self, CliError, Overrides};
use qkdnet::config::Config;
use qkdnet::security::SchemeKindTag;

/// Security assessment and key-aware scheduling for QKD relay networks.
#[derive(Parser)]
#[command(name = "qkdnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Security verdict and least secure path for each attack.
    Assess(Common),
    /// Minimum number of nodes that cut Alice off from Bob.
    Attack(Common),
    /// Simulate a key exchange and write its transcript.
    Exchange(Common),
    /// Run the scheduler and audit every slot.
    Simulate(Common),
    /// Run the scheduler for each V and compare against the oracle.
    Sweep(Common),
    /// Solve the optimal-utility benchmark.
    Oracle(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Multipath,
    M0,
}

#[derive(Args)]
struct Common {
    /// TOML configuration document.
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Horizon in slots.
    #[arg(long = "slots", short = 'T')]
    horizon: Option<u64>,
    #[arg(long = "v", short = 'V')]
    v: Option<f64>,
    /// Comma-separated V values for `sweep`.
    #[arg(long = "v-list", value_delimiter = ',')]
    v_list: Option<Vec<f64>>,
    #[arg(long)]
    csv: Option<String>,
    #[arg(long)]
    summary: Option<String>,
    /// Transcript output path for `exchange`.
    #[arg(long, short = 'o')]
    out: Option<String>,
    #[arg(long)]
    key_bits: Option<usize>,
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Comma-separated compromised nodes; replaces the document's attack.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    attack: Option<Vec<String>>,
    /// Run the exhaustive secrecy oracle after `exchange`.
    #[arg(long)]
    oracle: bool,
    /// List every minimum strongest attack.
    #[arg(long)]
    all: bool,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            horizon: self.horizon,
            v: self.v,
            v_list: self.v_list.clone(),
            csv: self.csv.clone(),
            summary: self.summary.clone(),
            transcript: self.out.clone(),
            key_bits: self.key_bits,
            kind: self.kind.map(|k| match k {
                Kind::Multipath => SchemeKindTag::Multipath,
                Kind::M0 => SchemeKindTag::M0,
            }),
            attack: self.attack.clone(),
            oracle: self.oracle,
            all_minimal: self.all,
        }
    }
}

fn load(common: &Common) -> Result<Config, CliError> {
    let path = common.config.display().to_string();
    let text = std::fs::read_to_string(&common.config).map_err(|source| CliError::File {
        path: path.clone(),
        source,
    })?;
    let mut cfg = Config::parse(&text).map_err(|e| {
        CliError::Config(qkdnet::config::ConfigError::Invalid {
            location: path,
            message: e.to_string(),
        })
    })?;
    common.overrides().apply(&mut cfg);
    Ok(cfg)
}

type Handler = fn(&Config, &mut dyn Write) -> cli::CliResult;

fn main() -> ExitCode {
    let args = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let (common, run): (&Common, Handler) = match &args.command {
        Command::Assess(c) => (c, cli::cmd_assess),
        Command::Attack(c) => (c, cli::cmd_attack),
        Command::Exchange(c) => (c, cli::cmd_exchange),
        Command::Simulate(c) => (c, cli::cmd_simulate),
        Command::Sweep(c) => (c, cli::cmd_sweep),
        Command::Oracle(c) => (c, cli::cmd_oracle),
    };
    let result = load(common).and_then(|cfg| run(&cfg, &mut out));
    let _ = out.flush();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
