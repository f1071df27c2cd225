use std::path::PathBuf;
use std::process::ExitCode;

use spinflow::commands::{
    cmd_demag_check, cmd_galerkin_converge, cmd_refine, cmd_run, cmd_sweep_epsilon,
    cmd_uniqueness, CmdError,
};
use spinflow::config::{load_config, reseed};

const USAGE: &str = "usage: spinflow <command> --config <path> [--out <dir>] [--seed <u64>]

commands:
  run                single trajectory with diagnostics CSV and snapshots
  sweep-epsilon      epsilon continuation; pairwise final-state distances
  galerkin-converge  Galerkin truncation refinement study
  refine             joint space-time refinement with observed orders
  uniqueness         two nearby runs with the Q1/Q2 monitor
  demag-check        demagnetizing-field self check (3D only)";

fn run() -> Result<(), CmdError> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let command = args
        .first()
        .ok_or_else(|| CmdError::Config(format!("missing command\n{USAGE}")))?
        .clone();
    let mut config_path: Option<PathBuf> = None;
    let mut out: Option<PathBuf> = None;
    let mut seed: Option<u64> = None;
    let mut i = 1;
    while i < args.len() {
        let take = |i: usize| -> Result<&str, CmdError> {
            args.get(i + 1)
                .map(String::as_str)
                .ok_or_else(|| CmdError::Config(format!("{} needs a value", args[i])))
        };
        match args[i].as_str() {
            "--config" => {
                config_path = Some(PathBuf::from(take(i)?));
                i += 2;
            }
            "--out" => {
                out = Some(PathBuf::from(take(i)?));
                i += 2;
            }
            "--seed" => {
                seed = Some(
                    take(i)?
                        .parse()
                        .map_err(|e| CmdError::Config(format!("bad --seed: {e}")))?,
                );
                i += 2;
            }
            other => {
                return Err(CmdError::Config(format!("unknown argument `{other}`\n{USAGE}")));
            }
        }
    }
    let config_path =
        config_path.ok_or_else(|| CmdError::Config(format!("--config is required\n{USAGE}")))?;
    let mut cfg = load_config(&config_path).map_err(|e| CmdError::Config(e.to_string()))?;
    if let Some(dir) = out {
        cfg.out_dir = dir;
    }
    if let Some(s) = seed {
        reseed(&mut cfg, s);
    }
    match command.as_str() {
        "run" => cmd_run(&cfg),
        "sweep-epsilon" => cmd_sweep_epsilon(&cfg),
        "galerkin-converge" => cmd_galerkin_converge(&cfg),
        "refine" => cmd_refine(&cfg),
        "uniqueness" => cmd_uniqueness(&cfg),
        "demag-check" => cmd_demag_check(&cfg),
        other => Err(CmdError::Config(format!("unknown command `{other}`\n{USAGE}"))),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spinflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
