mod commands;
mod config;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use iwasawa_core::Error;

use config::Report;

#[derive(Parser, Debug)]
#[command(name = "iwasawa", version, about = "Iwasawa-algebra and Stickelberger computations, reported as JSON")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for character and orbit loops.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomly generated inputs.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Frobenius orbits on the characters of (Z/p^n)^d.
    Orbits(OrbitArgs),
    /// Per-level ranks and orders of a Sinnott module.
    ModuleStats(ModuleArgs),
    /// p-adic limit of ranks or orders of a Sinnott module.
    SinnottLimit(LimitArgs),
    /// Normic-system axioms, level splitting and the ψ isomorphism.
    NormicCheck(NormicArgs),
    /// Zeta numerator, class number and layer class numbers of a curve.
    Zeta(ZetaArgs),
    /// Modified Stickelberger series, θ and Ω factors.
    Stickelberger(TowerArgs),
    /// Class-number identity and main-conjecture comparison.
    ImcVerify(ImcArgs),
}

#[derive(Args, Debug)]
pub struct OrbitArgs {
    #[arg(long)]
    pub ell: u64,
    #[arg(long)]
    pub p: u64,
    #[arg(long, default_value_t = 1)]
    pub d: u32,
    #[arg(long)]
    pub n: u32,
}

#[derive(Args, Debug)]
pub struct ModuleArgs {
    /// JSON module description; without it a random torsion module is drawn from --seed.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Highest level reported (and explicit level of a random module).
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    #[arg(long)]
    pub ell: Option<u64>,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub d: Option<u32>,
    /// Also write the per-level table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LimitArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// rank_zl, rank_ell or order.
    #[arg(long)]
    pub kind: String,
    #[arg(long)]
    pub pi: u32,
}

#[derive(Args, Debug)]
pub struct NormicArgs {
    #[arg(long)]
    pub spec: PathBuf,
}

#[derive(Args, Debug)]
pub struct ZetaArgs {
    /// Curve descriptor (P1, weierstrass:…, plane:…, hyperelliptic:…) or a JSON file.
    #[arg(long)]
    pub curve: String,
    #[arg(long)]
    pub q: Option<u64>,
    /// Report layer class numbers h(F_m), m ≤ n, of the constant Z_p-tower.
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub n: u32,
}

#[derive(Args, Debug, Clone)]
pub struct TowerArgs {
    /// arithmetic or carlitz.
    #[arg(long, default_value = "arithmetic")]
    pub tower: String,
    #[arg(long)]
    pub curve: Option<String>,
    #[arg(long)]
    pub q: Option<u64>,
    /// Carlitz prime, a monic irreducible polynomial in t.
    #[arg(long)]
    pub frak_p: Option<String>,
    /// Arithmetic tower: the characteristic of the constant Z_p-extension.
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub ell: u64,
    /// Arithmetic: Γ level. Carlitz: torsion level of the prime (Γ sits one level lower).
    #[arg(long)]
    pub n: u32,
    #[arg(long = "set-S", value_delimiter = ',')]
    pub set_s: Vec<String>,
    #[arg(long)]
    pub v0: Option<String>,
    #[arg(long)]
    pub truncation: Option<u32>,
    #[arg(long)]
    pub precision: Option<u32>,
}

#[derive(Args, Debug)]
pub struct ImcArgs {
    #[command(flatten)]
    pub tower: TowerArgs,
    /// raw or bridged.
    #[arg(long = "identity-mode", default_value = "bridged")]
    pub identity_mode: String,
}

pub enum Outcome {
    Ok(serde_json::Value),
    /// A complete report whose verdict is a hard error, with the exit code to use.
    Verdict(serde_json::Value, u8),
}

fn exit_code(e: &Error) -> u8 {
    if e.is_cross_check() {
        3
    } else {
        2
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let (mut config, outcome) = match &cli.command {
        Command::Orbits(a) => commands::orbits(a),
        Command::ModuleStats(a) => commands::module_stats(a, cli.seed),
        Command::SinnottLimit(a) => commands::sinnott_limit(a),
        Command::NormicCheck(a) => commands::normic_check(a),
        Command::Zeta(a) => commands::zeta(a),
        Command::Stickelberger(a) => commands::stickelberger(a),
        Command::ImcVerify(a) => commands::imc_verify(a),
    };
    if config.seed.is_none() {
        config.seed = cli.seed;
    }
    let (status, result, code) = match outcome {
        Ok(Outcome::Ok(v)) => ("ok".to_string(), v, 0),
        Ok(Outcome::Verdict(v, code)) => ("failed".to_string(), v, code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = exit_code(&e);
            let body = serde_json::json!({ "error": e.to_string() });
            let status = if code == 3 { "cross_check_failed" } else { "invalid_input" };
            (status.to_string(), body, code)
        }
    };
    let report = Report::new(&config, &status, &result);
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    if let Err(e) = emit(cli.out.as_ref(), &text) {
        eprintln!("error: writing report: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::cross("x")), 3);
        assert_eq!(exit_code(&Error::Overflow("x".into())), 3);
        assert_eq!(exit_code(&Error::EllEqualsP(3)), 2);
        assert_eq!(exit_code(&Error::Parse("x".into())), 2);
        assert_eq!(exit_code(&Error::Truncation("x".into())), 2);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
