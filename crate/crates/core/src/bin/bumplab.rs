use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bumplab::bumps::PenaltyFn;
use bumplab::functionals::{QuasiconcaveFn, Variant};
use bumplab::sharpness::{
    bump_stability, certify_divergence, entropy_sharpness, partials_csv, ContinuumWeightPair, DivergenceCertificate, EntropyReport,
    DEFAULT_CUTOFFS, DEFAULT_SCALES, DEFAULT_THRESHOLD,
};
use bumplab::verify::{minimize_report, rows_csv, sweep, Context, MinimizeOutcome, Report, SweepConfig, TheoremId};
use bumplab::Error;

/// Verification laboratory for entropy-bump two-weight inequalities.
#[derive(Parser)]
#[command(name = "bumplab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep random instances against one theorem. Exit 0 pass, 1 violation, 2 input error.
    Verify(VerifyArgs),
    /// Testing-integral partials and bump uniformity for the continuum constructions.
    Sharpness(SharpnessArgs),
    /// Re-evaluate and shrink the first violation recorded in a report.
    Minimize(MinimizeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Lorentz,
    Maximal,
}

#[derive(Args)]
struct VerifyArgs {
    /// One of embed-carleson, embed-haar, lerner-2sided, shift-2sided, para-2sided,
    /// one-sided, sawyer-K, bellman-m, conv-gap, orlicz-entropy, one-weight.
    theorem: String,
    /// JSON file with the same keys as the flags; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    depth_max: Option<usize>,
    /// Penalty preset such as alpha:t or alpha:log2.
    #[arg(long)]
    alpha: Option<String>,
    /// Young preset such as young:tln2 or young:loglog:eps=1.
    #[arg(long)]
    young: Option<String>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Multiplier on the asserted constant, for fault injection.
    #[arg(long)]
    constant_scale: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstructionArg {
    Fundamental,
    Entropy,
    GeneralP,
}

#[derive(Args)]
struct SharpnessArgs {
    #[arg(value_enum)]
    construction: ConstructionArg,
    /// Profile preset for fundamental and general-p, e.g. psi:s, psi:llogl, psi:log2.
    #[arg(long)]
    psi: Option<String>,
    /// Non-integrable penalty preset for the entropy construction.
    #[arg(long)]
    alpha: Option<String>,
    /// Companion penalty preset for the entropy construction.
    #[arg(long, default_value = "alpha:t")]
    beta: String,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Comma-separated cutoffs X.
    #[arg(long, value_delimiter = ',')]
    cutoffs: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct MinimizeArgs {
    report: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Input and I/O errors, reported with exit code 2.
enum Failure {
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn write(path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            Ok(())
        }
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn verify(args: VerifyArgs) -> Result<u8, Failure> {
    let theorem: TheoremId = args.theorem.parse()?;
    let mut cfg = match &args.config {
        Some(p) => SweepConfig::from_json(&read(p)?)?,
        None => SweepConfig::default(),
    };
    if let Some(x) = args.seed {
        cfg.seed = x;
    }
    if args.trials.is_some() {
        cfg.trials = args.trials;
    }
    if let Some(x) = args.depth_max {
        cfg.depth_max = x;
        cfg.depth_min = cfg.depth_min.min(x);
    }
    if let Some(x) = args.alpha {
        cfg.alpha = x;
    }
    if let Some(x) = args.young {
        cfg.young = x;
    }
    if let Some(v) = args.variant {
        cfg.variant = Some(match v {
            VariantArg::Lorentz => Variant::Lorentz,
            VariantArg::Maximal => Variant::Maximal,
        });
    }
    if let Some(x) = args.tolerance {
        cfg.tolerance = x;
    }
    if let Some(x) = args.jobs {
        cfg.jobs = x;
    }
    if let Some(x) = args.constant_scale {
        cfg.constant_scale = x;
    }
    let out = args.out.or(cfg.out.clone().map(PathBuf::from));
    let csv = args.csv.or(cfg.csv.clone().map(PathBuf::from));
    let ctx = Context::new(theorem, &cfg)?;
    let (report, rows) = sweep(&ctx)?;
    write(&out, &report.to_json())?;
    if csv.is_some() {
        write(&csv, &rows_csv(&rows))?;
    }
    eprintln!(
        "{}: {} trials, {} failures, {} errors, max ratio {:.6}",
        theorem, report.trials, report.failures, report.errors, report.max_ratio
    );
    Ok(if report.passed { 0 } else { 1 })
}

#[derive(Serialize)]
struct SharpnessOutput {
    construction: &'static str,
    profile: String,
    p: f64,
    divergence: DivergenceCertificate,
    bump: f64,
    bump_wider: f64,
    bump_change: f64,
}

fn sharpness(args: SharpnessArgs) -> Result<u8, Failure> {
    let cutoffs = args.cutoffs.unwrap_or(DEFAULT_CUTOFFS.to_vec());
    let mismatch = |m: &str| Failure::Input(m.into());
    match args.construction {
        ConstructionArg::Entropy => {
            if args.psi.is_some() {
                return Err(mismatch("the entropy construction takes --alpha, not --psi"));
            }
            let alpha = PenaltyFn::preset(args.alpha.as_deref().unwrap_or("alpha:const"))?;
            let beta = PenaltyFn::preset(&args.beta)?;
            let r: EntropyReport = entropy_sharpness(alpha, beta, &cutoffs, args.threshold)?;
            write(&args.out, &serde_json::to_string_pretty(&r).expect("report serializes"))?;
            if args.csv.is_some() {
                write(&args.csv, &partials_csv(&r.divergence.partials, Some(r.bump.b_observed)))?;
            }
        }
        c => {
            if args.alpha.is_some() {
                return Err(mismatch("fundamental and general-p constructions take --psi, not --alpha"));
            }
            let psi = QuasiconcaveFn::preset(args.psi.as_deref().unwrap_or("psi:s"))?;
            let (name, pair) = match c {
                ConstructionArg::Fundamental => {
                    if args.p != 2.0 {
                        return Err(mismatch("--p applies to the general-p construction"));
                    }
                    ("fundamental_psi", ContinuumWeightPair::fundamental(psi.clone()))
                }
                _ => ("general_p", ContinuumWeightPair::general_p(psi.clone(), args.p)?),
            };
            let divergence = certify_divergence(&pair, &cutoffs, args.threshold)?;
            let (base, wider, change) = bump_stability(&pair, DEFAULT_SCALES)?;
            if args.csv.is_some() {
                write(&args.csv, &partials_csv(&divergence.partials, Some(base.b_observed)))?;
            }
            let out = SharpnessOutput {
                construction: name,
                profile: psi.name().to_string(),
                p: args.p,
                divergence,
                bump: base.b_observed,
                bump_wider: wider.b_observed,
                bump_change: change,
            };
            write(&args.out, &serde_json::to_string_pretty(&out).expect("report serializes"))?;
        }
    }
    Ok(0)
}

fn minimize(args: MinimizeArgs) -> Result<u8, Failure> {
    let report = Report::from_json(&read(&args.report)?)?;
    let outcome = minimize_report(&report)?;
    write(&args.out, &serde_json::to_string_pretty(&outcome).expect("outcome serializes"))?;
    Ok(match outcome {
        MinimizeOutcome::Minimized { .. } | MinimizeOutcome::NotMinimizable { .. } => 1,
        _ => 0,
    })
}

/// Runs one command line and returns its exit code.
fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Sharpness(a) => sharpness(a),
        Command::Minimize(a) => minimize(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            2
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scratch(name: &str) -> String {
        let dir = std::env::temp_dir().join(format!("bumplab-cli-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir.join(name).to_string_lossy().into_owned()
    }

    fn cli(args: &[&str]) -> u8 {
        run(std::iter::once("bumplab").chain(args.iter().copied()))
    }

    fn report(path: &str) -> Report {
        Report::from_json(&fs::read_to_string(path).unwrap()).unwrap()
    }

    fn json(path: &str) -> serde_json::Value {
        serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
    }

    #[test]
    fn verify_passes_with_report_and_csv() {
        let (out, csv) = (scratch("haar.json"), scratch("haar.csv"));
        assert_eq!(cli(&["verify", "embed-haar", "--trials", "200", "--seed", "3", "--out", &out, "--csv", &csv]), 0);
        let r = report(&out);
        assert!(r.passed && r.max_ratio < 1.0);
        assert_eq!(r.trials, 200);
        assert!(r.verify_hash());
        let table = fs::read_to_string(&csv).unwrap();
        assert_eq!(table.lines().count(), 201);
        assert!(table.starts_with("trial,lhs,rhs,ratio,passed,error"));
    }

    #[test]
    fn verify_scalar_theorem_passes() {
        let out = scratch("conv.json");
        assert_eq!(cli(&["verify", "conv-gap", "--trials", "500", "--out", &out]), 0);
        assert_eq!(report(&out).failures, 0);
    }

    #[test]
    fn config_file_mirrors_flags() {
        let (cfg, out) = (scratch("cfg.json"), scratch("cfg-out.json"));
        fs::write(&cfg, r#"{"seed": 5, "trials": 40, "depth_max": 4, "alpha": "alpha:log2", "variant": "lorentz"}"#).unwrap();
        assert_eq!(cli(&["verify", "lerner-2sided", "--config", &cfg, "--out", &out]), 0);
        let r = report(&out);
        assert_eq!((r.config.seed, r.trials, r.config.depth_max), (5, 40, 4));
        assert_eq!((r.config.alpha.as_str(), r.config.variant), ("alpha:log2", Some(Variant::Lorentz)));
        assert_eq!(cli(&["verify", "lerner-2sided", "--seed", "6", "--config", &cfg, "--out", &out]), 0);
        assert_eq!(report(&out).config.seed, 6);
    }

    #[test]
    fn input_errors_exit_2() {
        let bad = scratch("bad.json");
        fs::write(&bad, "{ not json").unwrap();
        assert_eq!(cli(&["verify", "embed-haar", "--config", &bad]), 2);
        let unknown = scratch("unknown.json");
        fs::write(&unknown, r#"{"sead": 1}"#).unwrap();
        assert_eq!(cli(&["verify", "embed-haar", "--config", &unknown]), 2);
        assert_eq!(cli(&["verify", "no-such-theorem"]), 2);
        assert_eq!(cli(&["verify", "embed-haar", "--alpha", "alpha:zzz"]), 2);
        assert_eq!(cli(&["verify", "embed-haar", "--alpha", "alpha:const"]), 2);
        assert_eq!(cli(&["verify", "embed-haar", "--tolerance", "2"]), 2);
        assert_eq!(cli(&["verify", "embed-haar", "--bogus"]), 2);
        assert_eq!(cli(&["minimize", &scratch("missing.json")]), 2);
        assert_eq!(cli(&["--version"]), 0);
    }

    #[test]
    fn injected_violation_exits_1_and_minimizes() {
        let (out, min) = (scratch("fault.json"), scratch("fault-min.json"));
        assert_eq!(cli(&["verify", "embed-haar", "--trials", "30", "--constant-scale", "0.001", "--out", &out]), 1);
        let r = report(&out);
        let f = r.first_failure.as_ref().unwrap();
        assert!(!f.tolerance_artifact);
        assert!(f.minimized.as_ref().unwrap().depth <= 2);
        assert_eq!(cli(&["minimize", &out, "--out", &min]), 1);
        let outcome: MinimizeOutcome = serde_json::from_str(&fs::read_to_string(&min).unwrap()).unwrap();
        assert!(matches!(outcome, MinimizeOutcome::Minimized { minimized, .. } if minimized.depth <= 2));
    }

    #[test]
    fn minimize_passing_report_exits_0() {
        let (out, min) = (scratch("clean.json"), scratch("clean-min.json"));
        assert_eq!(cli(&["verify", "sawyer-K", "--trials", "20", "--out", &out]), 0);
        assert_eq!(cli(&["minimize", &out, "--out", &min]), 0);
        assert_eq!(fs::read_to_string(&min).unwrap().trim(), "\"no_violation\"");
    }

    #[test]
    fn sharpness_identity_partials_match_closed_form() {
        let (out, csv) = (scratch("psi_s.json"), scratch("psi_s.csv"));
        assert_eq!(cli(&["sharpness", "fundamental", "--psi", "psi:s", "--out", &out, "--csv", &csv]), 0);
        let text = fs::read_to_string(&csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x,log_x,two_log_x,lower_partial,exact_partial,bump_sup");
        let mut n = 0;
        for line in lines {
            let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            assert!((v[2] - v[3]).abs() <= 1e-8 * v[2]);
            assert!(v[4] > v[3]);
            n += 1;
        }
        assert_eq!(n, 4);
        assert_eq!(json(&out)["divergence"]["verdict"], "divergent");
    }

    #[test]
    fn sharpness_verdicts() {
        let out = scratch("entropy.json");
        assert_eq!(cli(&["sharpness", "entropy", "--out", &out]), 0);
        assert_eq!(json(&out)["divergence"]["verdict"], "divergent");
        assert_eq!(cli(&["sharpness", "entropy", "--alpha", "alpha:t"]), 2);
        let out = scratch("log2.json");
        assert_eq!(cli(&["sharpness", "fundamental", "--psi", "psi:log2", "--out", &out]), 0);
        assert_eq!(json(&out)["divergence"]["verdict"], "bounded");
    }

    #[test]
    fn sharpness_preset_mismatch_exits_2() {
        assert_eq!(cli(&["sharpness", "entropy", "--psi", "psi:s"]), 2);
        assert_eq!(cli(&["sharpness", "fundamental", "--alpha", "alpha:t"]), 2);
        assert_eq!(cli(&["sharpness", "fundamental", "--psi", "psi:nope"]), 2);
        assert_eq!(cli(&["sharpness", "fundamental", "--p", "3"]), 2);
    }
}
