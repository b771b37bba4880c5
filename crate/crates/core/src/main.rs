//! Batch CLI: parse an experiment config, dispatch to the library modules,
//! and emit recurrence tables, quadrature rules, Gram weights, moment
//! comparisons, and verification reports as deterministic artifacts.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use levyfock::config::{Experiment, RawConfig};
use levyfock::extfock::{compositions_of, ExtOps};
use levyfock::orthopoly::{golub_welsch, stieltjes};
use levyfock::verify;

#[derive(Parser)]
#[command(name = "levyfock", version, about = "Jacobi field of a Lévy process at finite truncation: coefficients, quadrature, Gram weights, and cross-representation verification")]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Fock level truncation n_max (overrides the config).
    #[arg(long, global = true)]
    levels: Option<usize>,

    /// Jacobi recurrence truncation N (overrides the config).
    #[arg(long = "jacobi-trunc", global = true)]
    jacobi_trunc: Option<usize>,

    /// Single-particle ℓ₂ truncation K (overrides the config).
    #[arg(long = "ell-trunc", global = true)]
    ell_trunc: Option<usize>,

    /// Tolerance for verification checks (overrides the config).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// RNG seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the recurrence coefficients (n, aₙ, bₙ₊₁) as coeffs.csv.
    Coeffs,
    /// Emit the Gaussian quadrature rule (sᵢ, wᵢ) as quadrature.csv.
    Quadrature,
    /// Emit the Gram weights K_α per multiplicity pattern as gram.csv.
    Gram,
    /// Emit vacuum moments from both representations and the cumulant
    /// oracle as moments.csv.
    Moments,
    /// Run every structural check and emit verify.json plus moments.csv.
    Verify,
}

fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

fn load(cli: &Cli) -> Result<Experiment, String> {
    let path = cli.config.as_ref().ok_or("--config is required")?;
    let mut raw = RawConfig::from_path(path).map_err(|e| e.to_string())?;
    if let Some(n) = cli.levels {
        raw.truncation.levels = Some(n);
    }
    if let Some(n) = cli.jacobi_trunc {
        raw.truncation.jacobi = Some(n);
    }
    if let Some(k) = cli.ell_trunc {
        raw.truncation.ell = Some(k);
    }
    if let Some(t) = cli.tol {
        raw.tol = t;
    }
    if let Some(s) = cli.seed {
        raw.seed = s;
    }
    if let Some(out) = &cli.out {
        raw.output_dir = Some(out.display().to_string());
    }
    let exp = raw.resolve().map_err(|e| e.to_string())?;
    if exp.ell_raised {
        eprintln!(
            "warning: ell truncation raised to {} to keep one level above n_max = {}",
            exp.ell, exp.n_max
        );
    }
    Ok(exp)
}

fn out_path(exp: &Experiment, file: &str) -> Result<PathBuf, String> {
    let dir = PathBuf::from(exp.output_dir.as_deref().unwrap_or("."));
    std::fs::create_dir_all(&dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    Ok(dir.join(file))
}

fn write_file(path: &PathBuf, content: &str) -> Result<(), String> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    f.write_all(content.as_bytes())
        .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_coeffs(exp: &Experiment) -> Result<(), String> {
    let coeffs = stieltjes(&exp.model, exp.jacobi_n).map_err(|e| e.to_string())?;
    if coeffs.terminated() {
        eprintln!(
            "note: recurrence terminates at order {} (finitely supported measure)",
            coeffs.order()
        );
    }
    let mut out = String::from("n,a_n,b_n_plus_1\n");
    for n in 0..coeffs.order() {
        let a = coeffs.a(n).map_err(|e| e.to_string())?;
        let b = coeffs.b(n + 1).unwrap_or(0.0);
        out.push_str(&format!("{n},{},{}\n", sig17(a), sig17(b)));
    }
    write_file(&out_path(exp, "coeffs.csv")?, &out)
}

fn cmd_quadrature(exp: &Experiment) -> Result<(), String> {
    let coeffs = stieltjes(&exp.model, exp.jacobi_n).map_err(|e| e.to_string())?;
    let quad = golub_welsch(&coeffs).map_err(|e| e.to_string())?;
    let mut out = String::from("i,node,weight\n");
    for (i, p) in quad.iter().enumerate() {
        out.push_str(&format!("{i},{},{}\n", sig17(p.node), sig17(p.weight)));
    }
    write_file(&out_path(exp, "quadrature.csv")?, &out)
}

fn cmd_gram(exp: &Experiment) -> Result<(), String> {
    let coeffs = stieltjes(&exp.model, exp.n_max + 1).map_err(|e| e.to_string())?;
    let ops = ExtOps::new(&exp.grid, &coeffs);
    let mut out = String::from("alpha,weight,size,k_alpha\n");
    for n in 1..=exp.n_max {
        for comp in compositions_of(n) {
            let k = ops.k_alpha(&comp).map_err(|e| e.to_string())?;
            out.push_str(&format!(
                "\"{comp}\",{},{},{}\n",
                comp.weight(),
                comp.size(),
                sig17(k)
            ));
        }
    }
    write_file(&out_path(exp, "gram.csv")?, &out)
}

fn moments_csv(exp: &Experiment) -> Result<String, String> {
    let coeffs = stieltjes(&exp.model, exp.n_max + 1).map_err(|e| e.to_string())?;
    let kmax = exp.n_max.min(6);
    let mut out = String::from("phi_index,k,value_ext,value_std,value_oracle,max_deviation\n");
    for (i, phi) in exp.test_functions.iter().enumerate() {
        let rows = verify::moment_table(phi, &exp.model, &coeffs, kmax, 1e-10)
            .map_err(|e| e.to_string())?;
        for r in rows {
            out.push_str(&format!(
                "{i},{},{},{},{},{}\n",
                r.k,
                sig17(r.value_ext),
                sig17(r.value_std),
                sig17(r.value_oracle),
                sig17(r.max_deviation)
            ));
        }
    }
    Ok(out)
}

fn cmd_moments(exp: &Experiment) -> Result<(), String> {
    let csv = moments_csv(exp)?;
    write_file(&out_path(exp, "moments.csv")?, &csv)
}

fn cmd_verify(exp: &Experiment) -> Result<bool, String> {
    let report = verify::property_suite(exp);
    for c in &report.checks {
        println!(
            "{} {}: deviation {:.3e} (threshold {:.1e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.deviation,
            c.threshold
        );
    }
    let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    write_file(&out_path(exp, "verify.json")?, &(json + "\n"))?;
    let csv = moments_csv(exp)?;
    write_file(&out_path(exp, "moments.csv")?, &csv)?;
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exp = match load(&cli) {
        Ok(exp) => exp,
        Err(msg) => {
            eprintln!("config error: {msg}");
            return ExitCode::from(2);
        }
    };
    let run = match &cli.command {
        Command::Coeffs => cmd_coeffs(&exp).map(|()| true),
        Command::Quadrature => cmd_quadrature(&exp).map(|()| true),
        Command::Gram => cmd_gram(&exp).map(|()| true),
        Command::Moments => cmd_moments(&exp).map(|()| true),
        Command::Verify => cmd_verify(&exp),
    };
    match run {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
