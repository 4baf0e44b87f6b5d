use std::path::PathBuf;

use spinelect::election::{DrawValue, ElectionConfig, NodeId};
use spinelect::simnet::LatencyModel;

pub mod analyze;
pub mod bench;
pub mod elect;
pub mod replay;
pub mod scenario;

/// Failure channel for every subcommand. The process exit contract is
/// stable: 0 success, 1 runtime or liveness failure, 2 usage error.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or inputs; exits 2.
    Usage(String),
    /// The run itself failed; exits 1.
    Runtime(String),
    /// Outcome already reported on stdout/stderr; just set the code.
    Status(i32),
}

impl CliError {
    pub fn exit(self) -> ! {
        match self {
            CliError::Usage(msg) => {
                eprintln!("error: {msg}");
                std::process::exit(2)
            }
            CliError::Runtime(msg) => {
                eprintln!("error: {msg}");
                std::process::exit(1)
            }
            CliError::Status(code) => std::process::exit(code),
        }
    }
}

pub type CmdResult = Result<(), CliError>;

/// Directory for artifacts when no explicit target is given: the
/// `SPINELECT_OUT_DIR` environment variable, else the working directory.
pub fn out_dir() -> PathBuf {
    std::env::var_os("SPINELECT_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Letters for desk-sized clusters, `n<id>` beyond.
pub fn node_name(id: NodeId) -> String {
    if id.0 < 26 {
        ((b'A' + id.0 as u8) as char).to_string()
    } else {
        format!("n{}", id.0)
    }
}

/// Protocol knobs shared by `elect` and `bench`.
#[derive(Debug, clap::Args)]
pub struct ProtocolFlags {
    /// Cluster size v; nodes get ids 0..v.
    #[arg(long)]
    pub nodes: Option<u32>,
    /// Launch threshold in (0, 1); only draws strictly above it count.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Consecutive winning draws required to launch a candidacy.
    #[arg(long, value_name = "LEN")]
    pub streak: Option<u32>,
    /// First-grant-wins voting: nodes grant at most one vote per round.
    #[arg(long, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    pub optimized: Option<bool>,
}

impl ProtocolFlags {
    pub fn apply(&self, cfg: &mut ElectionConfig) -> Result<(), CliError> {
        if let Some(n) = self.nodes {
            cfg.nodes = n;
        }
        if let Some(t) = self.threshold {
            cfg.threshold = threshold_value(t)?;
        }
        if let Some(r) = self.streak {
            cfg.streak_len = r;
        }
        if let Some(o) = self.optimized {
            cfg.optimized = o;
        }
        Ok(())
    }
}

pub fn threshold_value(t: f64) -> Result<DrawValue, CliError> {
    DrawValue::from_f64(t).map_err(|_| {
        CliError::Usage(format!(
            "threshold must be strictly between 0 and 1, got {t}"
        ))
    })
}

/// `fixed:MS` or `uniform:LO:HI`, in virtual milliseconds.
pub fn parse_latency(s: &str) -> Result<LatencyModel, String> {
    let bad_number = |part: &str| format!("bad number {part:?} in latency {s:?}");
    match s.split(':').collect::<Vec<_>>().as_slice() {
        ["fixed", ms] => Ok(LatencyModel::Fixed {
            ms: ms.parse().map_err(|_| bad_number(ms))?,
        }),
        ["uniform", lo, hi] => Ok(LatencyModel::UniformRange {
            lo_ms: lo.parse().map_err(|_| bad_number(lo))?,
            hi_ms: hi.parse().map_err(|_| bad_number(hi))?,
        }),
        _ => Err(format!(
            "latency must be fixed:MS or uniform:LO:HI, got {s:?}"
        )),
    }
}

pub fn latency_summary(m: &LatencyModel) -> String {
    match m {
        LatencyModel::Fixed { ms } => format!("fixed {ms} ms"),
        LatencyModel::UniformRange { lo_ms, hi_ms } => format!("uniform {lo_ms}..{hi_ms} ms"),
        LatencyModel::Scripted { .. } => "scripted".to_string(),
    }
}

/// A `NODE:AT_MS` fault coordinate from the command line.
#[derive(Debug, Clone, Copy)]
pub struct NodeAt {
    pub node: u32,
    pub at: u64,
}

pub fn parse_node_at(s: &str) -> Result<NodeAt, String> {
    let err = || format!("expected NODE:AT_MS, got {s:?}");
    let (node, at) = s.split_once(':').ok_or_else(err)?;
    Ok(NodeAt {
        node: node.parse().map_err(|_| err())?,
        at: at.parse().map_err(|_| err())?,
    })
}

pub fn describe_config(cfg: &ElectionConfig, seed: u64, latency: &LatencyModel) -> String {
    format!(
        "seed {}, {} nodes, threshold {}, streak {}, {} voting, latency {}",
        seed,
        cfg.nodes,
        cfg.threshold,
        cfg.streak_len,
        if cfg.optimized {
            "first-grant-wins"
        } else {
            "regrant"
        },
        latency_summary(latency),
    )
}
