use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use shadescope::profile::ConfigProfile;

#[derive(Debug, Parser)]
#[command(
    name = "shadescope",
    version,
    about = "Visibility attribution for I2P routers"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
    Csv,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Router NetDB directory (the router's `netDb/`).
    #[arg(long, global = true, env = "SHADESCOPE_NETDB")]
    pub netdb: Option<PathBuf>,
    /// LeaseSet file, one LeaseSet per line.
    #[arg(long, global = true)]
    pub leasesets: Option<PathBuf>,
    /// UTC date for routing keys, yyyyMMdd. Defaults to today.
    #[arg(long, global = true)]
    pub date: Option<String>,
    /// Floodfills probed between console re-checks.
    #[arg(long = "batch", global = true, default_value_t = 5)]
    pub batch: usize,
    /// Probe budget. Defaults to every known floodfill.
    #[arg(long, global = true)]
    pub max_probes: Option<usize>,
    /// Seed for probe order shuffling (and simulation, if the spec has none).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Output file. `lookup` writes its probe log here, `simulate` its hit
    /// curves; other commands write their normal output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summarize a NetDB snapshot: totals, floodfills, shade histogram.
    Scan(ScanArgs),
    /// Classify one router by local, console and floodfill lookups.
    Lookup(LookupArgs),
    /// Find eepsites whose routing key is XOR-nearest to a floodfill.
    XorAssoc(XorAssocArgs),
    /// Derive the b32 address of a destination file.
    B32(B32Args),
    /// Generate a synthetic overlay and run probe experiments on it.
    Simulate(SimulateArgs),
    /// Print a router.config profile that keeps the router out of the NetDB.
    Genconfig(GenconfigArgs),
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// NetDB directory; overrides --netdb.
    pub dir: Option<PathBuf>,
    /// Emit one row per record instead of the summary.
    #[arg(long)]
    pub records: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceKind {
    /// Local snapshot only; no console or probes.
    Snapshot,
    /// Console and floodfill probes answered by a generated overlay.
    Sim,
}

#[derive(Debug, Args)]
pub struct LookupArgs {
    /// Router hash (base64 or hex). May start with `-`.
    #[arg(allow_hyphen_values = true)]
    pub hash: String,
    #[arg(long, value_enum, default_value_t = SourceKind::Snapshot)]
    pub source: SourceKind,
    /// Network spec JSON for `--source sim`.
    #[arg(long)]
    pub sim_spec: Option<PathBuf>,
    /// Probability that a simulated probe fails.
    #[arg(long, default_value_t = 0.0)]
    pub failure_rate: f64,
}

#[derive(Debug, Args)]
pub struct XorAssocArgs {
    /// Floodfill hash (base64 or hex). May start with `-`.
    #[arg(allow_hyphen_values = true)]
    pub target: String,
    /// Warn if the target is not a floodfill in the snapshot.
    #[arg(long)]
    pub require_floodfill: bool,
    /// Print the per-eepsite distance table.
    #[arg(long)]
    pub distances: bool,
}

#[derive(Debug, Args)]
pub struct B32Args {
    /// Destination file: raw bytes (e.g. eepPriv.dat) or base64 text.
    pub dest_file: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Network spec JSON.
    pub spec_file: PathBuf,
    /// `per-shade` (first router of each shade), `exclusive`, `published`,
    /// `random:<n>`, or comma-separated hashes.
    #[arg(long, default_value = "per-shade", allow_hyphen_values = true)]
    pub targets: String,
    /// Probability that a simulated probe fails.
    #[arg(long, default_value_t = 0.0)]
    pub failure_rate: f64,
    /// Also write the published records as a NetDB directory.
    #[arg(long)]
    pub write_netdb: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenconfigArgs {
    #[arg(value_parser = parse_profile)]
    pub profile: ConfigProfile,
}

fn parse_profile(s: &str) -> Result<ConfigProfile, String> {
    s.parse()
}
