//! Command line driver: convert and verify single equations, build and
//! inspect table caches, run searches and ladders, and measure elimination
//! rates. Structured results go to stdout as JSON (one object per line for
//! record streams); human summaries go to stderr. Exit codes: 0 success,
//! 1 not found / exhausted, 2 usage error, 3 data or cache error.

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use num_traits::One;
use pegg::equations::{
    convert_to_resultant, generate_identity, pegg_report, validate_original, ExponentTriple,
    OriginalEquation, Permutation,
};
use pegg::numtheory::log2_big;
use pegg::residue_tables::{
    build_skipahead_table, default_spec, load_skipahead, measure_rates, projected_skipahead_bytes,
    save_skipahead, single_coefficient_spec, RateWeighting, TableError,
};
use pegg::search::{
    ladder, table_file_name, RecordLine, SearchConfig, SearchRecord, SearchTables, TablePlan,
};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

const EXIT_OK: u8 = 0;
const EXIT_NOT_FOUND: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;

#[derive(Parser)]
#[command(
    name = "pegg",
    version,
    about = "Search A^x + B^y = C^z for maximal min(A,B,C)/gcd(A,B,C)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an original equation, convert it, and report its Pegg Value
    Convert {
        /// Equation like "23^3 + 9*14^4 = 71^3" (coefficients optional)
        equation: String,
    },
    /// Re-verify an original equation and its conversion exactly
    Verify { equation: String },
    /// Find the first equation at or above a minimum Pegg Value
    Search(SearchArgs),
    /// Emit the smallest equation per strictly increasing Pegg Value
    Ladder(SearchArgs),
    /// Build or inspect skip-ahead table caches
    Tables {
        #[command(subcommand)]
        action: TablesAction,
    },
    /// Measure elimination rates for a table layout
    Rates {
        #[arg(long, value_parser = parse_exps)]
        exps: ExponentTriple,
        #[arg(long, default_value = "cz_minus_ax")]
        perm: Permutation,
        #[arg(long, default_value_t = 100_000)]
        f_limit: u64,
        /// Weight by coefficient residues instead of power-free coefficients
        #[arg(long)]
        all_residues: bool,
    },
    /// Generate the {x, x+1, x+2} equation with an exact Pegg Value
    Identity {
        #[arg(long)]
        pegg: u64,
        #[arg(long, default_value_t = 3)]
        x: u64,
    },
}

#[derive(Subcommand)]
enum TablesAction {
    /// Build the skip-ahead cache files for an exponent ordering
    Build {
        #[arg(long, value_parser = parse_exps)]
        exps: ExponentTriple,
        #[arg(long, value_delimiter = ',', default_values_t = [Permutation::AxMinusCz, Permutation::CzMinusAx])]
        permutations: Vec<Permutation>,
        /// Build the single-coefficient variant for this coefficient
        #[arg(long)]
        single_coeff: Option<u64>,
        #[arg(long, default_value_t = 4.0)]
        budget_gib: f64,
        #[arg(long, env = "PEGG_TABLES_DIR")]
        tables_dir: PathBuf,
    },
    /// Print the header of a cache file
    Info { file: PathBuf },
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, value_parser = parse_exps)]
    exps: ExponentTriple,
    #[arg(long, default_value_t = 0.0)]
    smin_log2: f64,
    #[arg(long)]
    smax_log2: Option<f64>,
    /// Exact decimal bound overriding --smax-log2
    #[arg(long)]
    smax_exact: Option<String>,
    #[arg(long, default_value_t = 2)]
    min_pegg: u64,
    #[arg(long, env = "PEGG_TABLES_DIR")]
    tables_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Restrict the coefficient loop to this list
    #[arg(long, value_delimiter = ',')]
    coeffs: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',', default_values_t = [Permutation::AxMinusCz, Permutation::CzMinusAx])]
    permutations: Vec<Permutation>,
    /// For distinct exponent sets: the exponent whose base carries the coefficient
    #[arg(long)]
    coeff_on: Option<u64>,
    /// Override the skip-ahead factor moduli (comma separated)
    #[arg(long, value_delimiter = ',')]
    skip_factors: Option<Vec<u64>>,
    /// Use the suggested per-coefficient tables where available
    #[arg(long)]
    single_coeff_tables: bool,
}

fn parse_exps(s: &str) -> Result<ExponentTriple, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected x,y,z".into());
    }
    let mut v = [0u64; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.trim().parse::<u64>().map_err(|e| e.to_string())?;
        if *slot < 3 {
            return Err("exponents must be >= 3".into());
        }
    }
    Ok(ExponentTriple::new(v[0], v[1], v[2]))
}

fn convert_report(eq: &OriginalEquation) -> Result<serde_json::Value, (u8, String)> {
    let validation = validate_original(eq);
    if !validation.is_ok() {
        let msgs: Vec<String> = validation
            .violations
            .iter()
            .map(|v| v.to_string())
            .collect();
        return Err((EXIT_DATA, format!("invalid equation: {}", msgs.join("; "))));
    }
    let res = convert_to_resultant(eq).map_err(|e| (EXIT_DATA, e.to_string()))?;
    assert!(res.verify(), "conversion must re-verify exactly");
    let rep = pegg_report(&res);
    Ok(json!({
        "original": eq.to_string(),
        "resultant": res.to_string(),
        "exponents": eq.exps.as_array(),
        "permutation": eq.sign.label(),
        "N": res.multiplier.to_string(),
        "D": res.coeffs[0].to_string(),
        "E": res.coeffs[1].to_string(),
        "F": res.coeffs[2].to_string(),
        "A": res.bases[0].to_string(),
        "B": res.bases[1].to_string(),
        "C": res.bases[2].to_string(),
        "pegg_value": rep.pegg_value.to_string(),
        "pegg_power": rep.pegg_power,
        "log2_size": rep.log2_size,
        "gcd": rep.gcd.to_string(),
        "stolen": rep.stolen,
    }))
}

fn cmd_convert(equation: &str) -> u8 {
    let eq = match OriginalEquation::from_str(equation) {
        Ok(eq) => eq,
        Err(e) => {
            eprintln!("parse error: {e}");
            return EXIT_USAGE;
        }
    };
    match convert_report(&eq) {
        Ok(block) => {
            println!("{block}");
            eprintln!(
                "{} -> {} (Pegg Value {}, log2 size {:.2})",
                block["original"].as_str().unwrap(),
                block["resultant"].as_str().unwrap(),
                block["pegg_value"].as_str().unwrap(),
                block["log2_size"].as_f64().unwrap()
            );
            EXIT_OK
        }
        Err((code, msg)) => {
            eprintln!("{msg}");
            code
        }
    }
}

fn cmd_verify(equation: &str) -> u8 {
    let eq = match OriginalEquation::from_str(equation) {
        Ok(eq) => eq,
        Err(e) => {
            eprintln!("parse error: {e}");
            return EXIT_USAGE;
        }
    };
    let validation = validate_original(&eq);
    let identity = eq.identity_holds();
    let converted = if validation.is_ok() {
        convert_to_resultant(&eq).ok().map(|r| r.verify())
    } else {
        None
    };
    let ok = validation.is_ok() && identity && converted == Some(true);
    println!(
        "{}",
        json!({
            "equation": eq.to_string(),
            "identity_holds": identity,
            "violations": validation.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "conversion_verified": converted,
            "ok": ok,
        })
    );
    if ok {
        eprintln!("ok: {eq}");
        EXIT_OK
    } else {
        eprintln!("verification failed for {eq}");
        EXIT_NOT_FOUND
    }
}

fn bounds_from(args: &SearchArgs) -> Result<(BigUint, BigUint), String> {
    let s_min = if args.smin_log2 <= 0.0 {
        BigUint::one()
    } else {
        BigUint::one() << args.smin_log2.floor() as u64
    };
    let s_max = match (&args.smax_exact, args.smax_log2) {
        (Some(text), _) => BigUint::from_str(text).map_err(|e| e.to_string())?,
        (None, Some(l2)) => BigUint::one() << l2.floor() as u64,
        (None, None) => return Err("one of --smax-log2 or --smax-exact is required".into()),
    };
    if s_min >= s_max {
        return Err("smin must be below smax".into());
    }
    Ok((s_min, s_max))
}

fn run_configs(args: &SearchArgs) -> Result<Vec<SearchConfig>, (u8, String)> {
    let (s_min, s_max) = bounds_from(args).map_err(|m| (EXIT_USAGE, m))?;
    let base = SearchConfig {
        exps: args.exps,
        permutations: args.permutations.clone(),
        s_min,
        s_max,
        min_pegg: args.min_pegg,
        coefficient_overrides: args.coeffs.clone(),
        reassociation_budget: None,
        workers: args.workers,
    };
    if args.exps.all_distinct() {
        let coeff_on = args.coeff_on.ok_or((
            EXIT_USAGE,
            "distinct exponent sets need --coeff-on to place the coefficient".to_string(),
        ))?;
        let rows = pegg::search::reorder_for_distinct_exponents(args.exps, coeff_on)
            .map_err(|e| (EXIT_USAGE, e.to_string()))?;
        Ok(rows
            .into_iter()
            .map(|(exps, perm)| SearchConfig {
                exps,
                permutations: vec![perm],
                ..base.clone()
            })
            .collect())
    } else {
        Ok(vec![base])
    }
}

fn table_plan(args: &SearchArgs) -> TablePlan {
    TablePlan {
        skip_factors: args.skip_factors.clone(),
        elimination_factors: None,
        single_coefficients: Vec::new(),
        memory_budget: None,
        suggested_singles: args.single_coeff_tables,
    }
}

fn emit_record(rec: &SearchRecord) {
    assert!(rec.resultant.verify(), "printed equations must re-verify");
    let line = RecordLine::from(rec);
    println!("{}", serde_json::to_string(&line).unwrap());
}

fn cmd_search(args: &SearchArgs) -> u8 {
    let configs = match run_configs(args) {
        Ok(c) => c,
        Err((code, msg)) => {
            eprintln!("{msg}");
            return code;
        }
    };
    let plan = table_plan(args);
    let mut records: Vec<SearchRecord> = Vec::new();
    for config in &configs {
        let tables = match SearchTables::load_or_build(args.tables_dir.as_deref(), config, &plan) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("table error: {e}");
                return EXIT_DATA;
            }
        };
        match pegg::search::search_collect(config, &tables) {
            Ok(hits) => records.extend(hits.into_iter().map(|h| h.best().clone())),
            Err(e) => {
                eprintln!("search error: {e}");
                return EXIT_DATA;
            }
        }
    }
    records.sort_by_key(|r| (r.resultant.size(), r.original.bases[0], r.original.bases[2]));
    for rec in &records {
        emit_record(rec);
    }
    match records.first() {
        Some(rec) => {
            eprintln!(
                "found {} record(s); smallest: {} with Pegg Value {} at log2 size {:.2}",
                records.len(),
                rec.original,
                rec.report.pegg_value,
                rec.report.log2_size
            );
            EXIT_OK
        }
        None => {
            eprintln!("entire range searched - none exist");
            EXIT_NOT_FOUND
        }
    }
}

fn cmd_ladder(args: &SearchArgs) -> u8 {
    let configs = match run_configs(args) {
        Ok(c) => c,
        Err((code, msg)) => {
            eprintln!("{msg}");
            return code;
        }
    };
    if configs.len() != 1 {
        eprintln!("ladder runs one exponent ordering at a time");
        return EXIT_USAGE;
    }
    let plan = table_plan(args);
    let config = &configs[0];
    let tables = match SearchTables::load_or_build(args.tables_dir.as_deref(), config, &plan) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("table error: {e}");
            return EXIT_DATA;
        }
    };
    match ladder(config, &tables) {
        Ok(rows) => {
            eprintln!("log2(size)  Pegg Value  Pegg Power  original equation");
            for rec in &rows {
                emit_record(rec);
                eprintln!(
                    "{:>10.2}  {:>10}  {:>10.4}  {}",
                    rec.report.log2_size,
                    rec.report.pegg_value,
                    rec.report.pegg_power,
                    rec.original
                );
            }
            if rows.is_empty() {
                eprintln!("no equations with Pegg Value > 1 in range");
                return EXIT_NOT_FOUND;
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("search error: {e}");
            EXIT_DATA
        }
    }
}

fn cmd_tables_build(
    exps: ExponentTriple,
    permutations: &[Permutation],
    single_coeff: Option<u64>,
    budget_gib: f64,
    dir: &PathBuf,
) -> u8 {
    let budget = (budget_gib * (1u64 << 30) as f64) as u64;
    for &perm in permutations {
        let spec = match single_coeff {
            Some(f) => single_coefficient_spec(exps, perm, f),
            None => default_spec(exps, perm),
        };
        let mut spec = match spec {
            Ok(s) => s,
            Err(e) => {
                eprintln!("{e}");
                return EXIT_DATA;
            }
        };
        spec.memory_budget = budget;
        let projected = match projected_skipahead_bytes(&spec) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("{e}");
                return EXIT_DATA;
            }
        };
        eprintln!(
            "building {} {} modulus {} (projected {:.2} GiB)",
            exps,
            perm,
            spec.skipahead_modulus(),
            projected as f64 / (1u64 << 30) as f64
        );
        let table = match build_skipahead_table(&spec) {
            Ok(t) => t,
            Err(e @ TableError::BudgetExceeded { .. }) => {
                eprintln!("{e}");
                return EXIT_DATA;
            }
            Err(e) => {
                eprintln!("{e}");
                return EXIT_DATA;
            }
        };
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("{e}");
            return EXIT_DATA;
        }
        let path = dir.join(table_file_name(&spec));
        if let Err(e) = save_skipahead(&table, &path) {
            eprintln!("{e}");
            return EXIT_DATA;
        }
        println!(
            "{}",
            json!({
                "file": path.to_string_lossy(),
                "modulus": table.modulus,
                "entry_width": table.entry_width(),
                "classes": table.modulus,
                "entries": table.deltas.len(),
                "bytes": table.total_bytes(),
            })
        );
        eprintln!(
            "wrote {} ({:.2} GiB)",
            path.display(),
            table.total_bytes() as f64 / (1u64 << 30) as f64
        );
    }
    EXIT_OK
}

fn cmd_tables_info(file: &PathBuf) -> u8 {
    match load_skipahead(file) {
        Ok(t) => {
            println!(
                "{}",
                json!({
                    "exponents": t.exps.as_array(),
                    "permutation": t.permutation.label(),
                    "modulus": t.modulus,
                    "factors": t.factors,
                    "single_coefficient": t.single_coefficient,
                    "entry_width": t.entry_width(),
                    "entries": t.deltas.len(),
                    "bytes": t.total_bytes(),
                })
            );
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{e}");
            EXIT_DATA
        }
    }
}

fn cmd_rates(exps: ExponentTriple, perm: Permutation, f_limit: u64, all_residues: bool) -> u8 {
    let spec = match default_spec(exps, perm) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_DATA;
        }
    };
    let weighting = if all_residues {
        RateWeighting::AllResidues
    } else {
        RateWeighting::PowerFreeCoefficients
    };
    let r = measure_rates(&spec, f_limit, weighting);
    println!(
        "{}",
        json!({
            "exponents": exps.as_array(),
            "permutation": perm.label(),
            "f_limit": f_limit,
            "elimination_pct": r.elimination_pct,
            "skipahead_pct": r.skipahead_pct,
            "combined_pct": r.combined_pct,
            "coefficients": r.coefficient_count,
        })
    );
    eprintln!(
        "eliminated: {:.3}% by elimination, {:.3}% by skip-ahead, {:.3}% combined",
        r.elimination_pct, r.skipahead_pct, r.combined_pct
    );
    EXIT_OK
}

fn cmd_identity(pegg: u64, x: u64) -> u8 {
    if pegg < 2 || x < 3 {
        eprintln!("identity requires --pegg >= 2 and --x >= 3");
        return EXIT_USAGE;
    }
    let res = generate_identity(pegg, x);
    assert!(res.verify());
    let rep = pegg_report(&res);
    assert_eq!(rep.pegg_value, BigUint::from(pegg));
    let w = BigUint::from(pegg).pow(x as u32 + 2) - 1u32;
    println!(
        "{}",
        json!({
            "W": w.to_string(),
            "exponents": res.exps.as_array(),
            "A": res.bases[0].to_string(),
            "B": res.bases[1].to_string(),
            "C": res.bases[2].to_string(),
            "pegg_value": rep.pegg_value.to_string(),
            "pegg_power": rep.pegg_power,
            "log2_size": rep.log2_size,
            "gcd_log2": log2_big(&rep.gcd),
        })
    );
    eprintln!(
        "(W^{})^{} + (W^{})^{} = (W^{}*{})^{} with W = {}^{}-1; Pegg Value {} at log2 size {:.1}",
        x + 2,
        x,
        x + 1,
        x + 1,
        x,
        pegg,
        x + 2,
        pegg,
        x + 2,
        rep.pegg_value,
        rep.log2_size
    );
    EXIT_OK
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Convert { equation } => cmd_convert(&equation),
        Command::Verify { equation } => cmd_verify(&equation),
        Command::Search(args) => cmd_search(&args),
        Command::Ladder(args) => cmd_ladder(&args),
        Command::Tables { action } => match action {
            TablesAction::Build {
                exps,
                permutations,
                single_coeff,
                budget_gib,
                tables_dir,
            } => cmd_tables_build(exps, &permutations, single_coeff, budget_gib, &tables_dir),
            TablesAction::Info { file } => cmd_tables_info(&file),
        },
        Command::Rates {
            exps,
            perm,
            f_limit,
            all_residues,
        } => cmd_rates(exps, perm, f_limit, all_residues),
        Command::Identity { pegg, x } => cmd_identity(pegg, x),
    };
    ExitCode::from(code)
}
