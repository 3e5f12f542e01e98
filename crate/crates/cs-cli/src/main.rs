//! `cslab`: command-line surface for the Cappell-Shaneson matrix
//! calculus.
//!
//! Exit codes: 0 success/true, 1 verified-false, 2 usage or parse
//! error, 3 unknown/inconclusive. JSON output is deterministic
//! byte-for-byte for fixed inputs and flags.

use clap::{Parser, Subcommand, ValueEnum};
use cs_calculus::cs::{
    cs_diagnostic, normalize_sign, to_standard_form, StdForm, DEFAULT_STANDARDIZE_BOUND,
};
use cs_calculus::mat::IntMat3;
use cs_calculus::moves::{adjust_trace, apply_move, conjugate, verify_derivation, Derivation, Move};
use cs_calculus::poly::CubicPoly;
use cs_calculus::reduce::{
    certify_trivial, enumerate_std_forms, survivor_filter, EnumBounds, TrivialityCertificate,
};
use cs_calculus::straighten::{homotopy_straightenable, loop_winding_mod2, MatLoop};
use serde::Serialize;
use std::fmt::Display;
use std::process::ExitCode;
use std::str::FromStr;

const EXIT_OK: u8 = 0;
const EXIT_FALSE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNKNOWN: u8 = 3;

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Parser)]
#[command(name = "cslab", version, about = "Exact Cappell-Shaneson matrix calculus")]
struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value = "human")]
    format: Format,
    /// Worker threads for enumeration shards; 0 uses all cores.
    /// Output is identical for any value.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Seed for randomized self-checks; fixed default keeps runs
    /// reproducible
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Test whether a matrix is Cappell-Shaneson and report its
    /// invariants
    Check {
        /// Matrix: "0,1,0;0,1,1;1,0,1", JSON [[..]], or @file
        matrix: String,
    },
    /// Conjugate a CS matrix into standard form [[0,a,b],[0,c,d],[1,e,f]]
    Standardize {
        matrix: String,
        /// Max-norm bound for the primitive-vector search
        #[arg(long, default_value_t = DEFAULT_STANDARDIZE_BOUND)]
        bound: i128,
    },
    /// Produce a triviality certificate (derivation ending at some A_m)
    Certify {
        matrix: String,
        /// Write the certificate JSON here instead of stdout
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Replay and verify a certificate or derivation file
    Verify { file: std::path::PathBuf },
    /// Enumerate standard forms over a box, one JSON object per line
    Enumerate {
        /// Range for c: "lo:hi", or a single n meaning -n:n
        #[arg(long, default_value = "2")]
        c: RangeArg,
        /// Range for e
        #[arg(long, default_value = "2")]
        e: RangeArg,
        /// Range for f
        #[arg(long, default_value = "2")]
        f: RangeArg,
        /// Maximum |d|
        #[arg(long, default_value_t = 60)]
        d_bound: i128,
        /// Emit only forms passing the survivor inequalities
        #[arg(long)]
        survivors_only: bool,
    },
    /// Re-run every displayed identity from the source calculus as
    /// golden checks
    VerifyPaper {
        /// Restrict to named checks (repeatable)
        #[arg(long)]
        only: Vec<String>,
        /// Deliberately corrupt one fixture to demonstrate a named
        /// failure (test mode)
        #[arg(long, hide = true)]
        demo_break: bool,
    },
}

#[derive(Clone)]
struct RangeArg(i128, i128);

impl FromStr for RangeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<RangeArg, String> {
        let parse = |x: &str| x.trim().parse::<i128>().map_err(|e| format!("bad range: {e}"));
        if let Some((lo, hi)) = s.split_once(':') {
            Ok(RangeArg(parse(lo)?, parse(hi)?))
        } else {
            let n = parse(s)?;
            Ok(RangeArg(-n.abs(), n.abs()))
        }
    }
}

fn read_matrix(arg: &str) -> Result<IntMat3, String> {
    let text = if let Some(path) = arg.strip_prefix('@') {
        std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?
    } else {
        arg.to_string()
    };
    IntMat3::from_str(text.trim()).map_err(|e| e.to_string())
}

fn emit<T: Serialize>(format: Format, value: &T, human: impl Display) {
    match format {
        Format::Json => println!("{}", serde_json::to_string(value).unwrap()),
        Format::Human => println!("{human}"),
    }
}

fn usage_error(msg: &str) -> u8 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

#[derive(Serialize)]
struct CheckReport {
    cs: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    violation: Option<String>,
    trace: i128,
    det: i128,
    char_poly: String,
    /// true when the CS representative is the inverse of the input
    inverted: bool,
}

fn cmd_check(format: Format, matrix: &str) -> u8 {
    let m = match read_matrix(matrix) {
        Ok(m) => m,
        Err(e) => return usage_error(&e),
    };
    let violation = match cs_diagnostic(&m) {
        Ok(v) => v,
        Err(e) => return usage_error(&e.to_string()),
    };
    let inverted = match normalize_sign(&m) {
        Ok((_, inv)) => inv,
        Err(_) => false,
    };
    let report = CheckReport {
        cs: violation.is_none(),
        violation: violation.map(|v| v.to_string()),
        trace: m.trace().unwrap(),
        det: m.det().unwrap(),
        char_poly: m.char_poly().unwrap().to_string(),
        inverted,
    };
    let human = if report.cs {
        format!(
            "CS matrix: yes{}\ntrace: {}\nchar poly: {}",
            if inverted { " (after inverting)" } else { "" },
            report.trace,
            report.char_poly
        )
    } else {
        format!(
            "CS matrix: no ({})\ntrace: {}\ndet: {}",
            report.violation.as_deref().unwrap(),
            report.trace,
            report.det
        )
    };
    emit(format, &report, human);
    if report.cs {
        EXIT_OK
    } else {
        EXIT_FALSE
    }
}

#[derive(Serialize)]
struct StandardizeReport {
    form: StdForm,
    conjugator: IntMat3,
    inverted: bool,
}

fn standardized(matrix: &str, bound: i128) -> Result<StandardizeReport, (u8, String)> {
    let m = read_matrix(matrix).map_err(|e| (EXIT_USAGE, e))?;
    let (csm, inverted) =
        normalize_sign(&m).map_err(|e| (EXIT_FALSE, format!("not certifiable: {e}")))?;
    let (form, conjugator) = to_standard_form(&csm, bound).map_err(|e| match e {
        cs_calculus::Error::SearchExhausted(_) => (EXIT_UNKNOWN, e.to_string()),
        _ => (EXIT_FALSE, e.to_string()),
    })?;
    Ok(StandardizeReport {
        form,
        conjugator,
        inverted,
    })
}

fn cmd_standardize(format: Format, matrix: &str, bound: i128) -> u8 {
    match standardized(matrix, bound) {
        Ok(report) => {
            let s = report.form;
            let human = format!(
                "standard form: (a,b,c,d,e,f) = ({},{},{},{},{},{})\nconjugator P: {}{}",
                s.a,
                s.b,
                s.c,
                s.d,
                s.e,
                s.f,
                report.conjugator,
                if report.inverted {
                    "\n(input was inverted first)"
                } else {
                    ""
                }
            );
            emit(format, &report, human);
            EXIT_OK
        }
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}

fn cmd_certify(format: Format, matrix: &str, out: Option<&std::path::Path>) -> u8 {
    let std_report = match standardized(matrix, DEFAULT_STANDARDIZE_BOUND) {
        Ok(r) => r,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return code;
        }
    };
    let cert = match certify_trivial(&std_report.form) {
        Ok(c) => c,
        Err(e) => return usage_error(&e.to_string()),
    };
    let Some(cert) = cert else {
        println!("unknown");
        return EXIT_UNKNOWN;
    };
    debug_assert!(cert.verify().is_ok());
    let json = serde_json::to_string_pretty(&cert).unwrap();
    if let Some(path) = out {
        if let Err(e) = std::fs::write(path, json + "\n") {
            return usage_error(&format!("cannot write {}: {e}", path.display()));
        }
        println!(
            "certificate written ({} steps, method {:?})",
            cert.derivation.steps.len(),
            cert.method
        );
    } else {
        match format {
            Format::Json => println!("{}", serde_json::to_string(&cert).unwrap()),
            Format::Human => println!("{json}"),
        }
    }
    EXIT_OK
}

fn cmd_verify(file: &std::path::Path) -> u8 {
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => return usage_error(&format!("cannot read {}: {e}", file.display())),
    };
    let (derivation, nt_flags) =
        if let Ok(cert) = serde_json::from_str::<TrivialityCertificate>(&text) {
            (cert.derivation, cert.nt_flags)
        } else {
            match serde_json::from_str::<Derivation>(&text) {
                Ok(d) => (d, Vec::new()),
                Err(e) => return usage_error(&format!("not a certificate or derivation: {e}")),
            }
        };
    match verify_derivation(&derivation) {
        Ok(()) => {
            for claim in &nt_flags {
                println!("nt-flag [{}]: {}", claim.tag, claim.text);
            }
            println!("ok: {} steps replay exactly", derivation.steps.len());
            EXIT_OK
        }
        Err(fail) => {
            println!("fail: {fail}");
            EXIT_FALSE
        }
    }
}

fn cmd_enumerate(c: RangeArg, e: RangeArg, f: RangeArg, d_bound: i128, survivors_only: bool) -> u8 {
    let bounds = EnumBounds {
        c: (c.0, c.1),
        e: (e.0, e.1),
        f: (f.0, f.1),
        d_bound,
    };
    for form in enumerate_std_forms(&bounds) {
        if survivors_only && !survivor_filter(&form).survivor {
            continue;
        }
        println!("{}", serde_json::to_string(&form).unwrap());
    }
    EXIT_OK
}

// ---------------------------------------------------------------------------
// golden identity suite
// ---------------------------------------------------------------------------

struct Golden {
    name: &'static str,
    run: fn(bool) -> Result<(), String>,
}

fn expect<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, want {want:?}"))
    }
}

fn golden_sig0(broken: bool) -> Result<(), String> {
    let a = IntMat3([[0, -1, -2], [0, -1, -3], [1, 2, 5]]);
    let mut d = Derivation::new(a);
    for mv in [
        Move::LeftDelta { k: 2 },
        Move::RightDelta0 { k: 2 },
        Move::RightDelta { k: 2 },
        Move::LeftDelta { k: if broken { 3 } else { 2 } },
    ] {
        d.push(mv).map_err(|e| e.to_string())?;
    }
    expect(
        "chain end",
        d.end(),
        IntMat3([[0, -1, -2], [0, 1, 1], [1, 2, 3]]),
    )?;
    expect("fourth matrix", d.steps[2].result, StdForm::am(0).assemble())
}

fn golden_conjugation(broken: bool) -> Result<(), String> {
    let a = IntMat3([[0, -1, -2], [0, -1, -3], [1, 2, 5]]);
    let b = IntMat3([[0, -1, -2], [0, 1, 1], [1, 2, 3]]);
    let mut c = IntMat3([[2, 1, 2], [0, -1, -1], [-1, 0, -1]]);
    if broken {
        c.0[0][0] = 3;
    }
    expect("C A C^-1", conjugate(&a, &c).map_err(|e| e.to_string())?, b)?;
    let cinv = c.inverse_unimodular().map_err(|e| e.to_string())?;
    expect("C C^-1", c.mul_mat(&cinv).unwrap(), IntMat3::IDENTITY)
}

fn golden_homotopy(broken: bool) -> Result<(), String> {
    let a = IntMat3([[0, -1, -2], [0, -1, -3], [1, 2, 5]]);
    let b = IntMat3([[0, -1, -2], [0, 1, 1], [1, 2, 3]]);
    let (ok, ev) = homotopy_straightenable(&a, &b).map_err(|e| e.to_string())?;
    if !ok {
        return Err("coefficients not positive on [0,1]".into());
    }
    let want1 = if broken {
        CubicPoly::from_ints(0, -4, 4, 2)
    } else {
        CubicPoly::from_ints(0, -4, 4, 3)
    };
    expect("s^1 coefficient", ev.coeffs[1].clone(), want1)?;
    expect("s^2 coefficient", ev.coeffs[2].clone(), CubicPoly::from_ints(0, 0, 0, 4))
}

fn golden_winding(broken: bool) -> Result<(), String> {
    let a = IntMat3([[0, -1, -2], [0, -1, -3], [1, 2, 5]]);
    let mut d = Derivation::new(a);
    for mv in [
        Move::LeftDelta { k: 2 },
        Move::RightDelta0 { k: 2 },
        Move::RightDelta { k: 2 },
        Move::LeftDelta { k: 2 },
    ] {
        d.push(mv).map_err(|e| e.to_string())?;
    }
    let mut vertices = vec![d.initial];
    vertices.extend(d.steps.iter().map(|s| s.result));
    if broken {
        vertices.truncate(3);
    }
    let l = MatLoop::new(vertices).map_err(|e| e.to_string())?;
    expect(
        "winding parity",
        loop_winding_mod2(&l).map_err(|e| e.to_string())?,
        1,
    )
}

fn golden_am_a(broken: bool) -> Result<(), String> {
    for m in -10..=10i128 {
        let d = adjust_trace(&StdForm::am(m), 2).map_err(|e| e.to_string())?;
        expect(
            "trace-2 shift",
            d.end(),
            IntMat3([[0, m + 1, m], [0, 1, 1], [1, -m, 1]]),
        )?;
        let k = if broken { -m + 1 } else { -m };
        let conj =
            apply_move(&d.end(), &Move::ElemConj { i: 2, j: 1, k }).map_err(|e| e.to_string())?;
        expect("elementary conjugation", conj, StdForm::am(0).assemble())?;
    }
    Ok(())
}

fn golden_am_b(broken: bool) -> Result<(), String> {
    let start = IntMat3([[0, -5, -8], [0, 2, 3], [1, 0, -7]]);
    let shifted =
        apply_move(&start, &Move::LeftDelta { k: 2 }).map_err(|e| e.to_string())?;
    expect(
        "twist step",
        shifted,
        IntMat3([[0, -9, -14], [0, 2, 3], [1, 4, -1]]),
    )?;
    let mut p = IntMat3([[-1, -4, 1], [1, 5, 1], [0, 0, -1]]);
    if broken {
        p.0[2][2] = 1;
    }
    expect(
        "triple product",
        conjugate(&shifted, &p).map_err(|e| e.to_string())?,
        StdForm::am(-1).assemble(),
    )
}

const GOLDEN: &[Golden] = &[
    Golden { name: "sig0", run: golden_sig0 },
    Golden { name: "conjugation", run: golden_conjugation },
    Golden { name: "homotopy", run: golden_homotopy },
    Golden { name: "winding", run: golden_winding },
    Golden { name: "am-a", run: golden_am_a },
    Golden { name: "am-b", run: golden_am_b },
];

#[derive(Serialize)]
struct GoldenReport<'a> {
    name: &'a str,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn cmd_verify_paper(format: Format, only: &[String], demo_break: bool) -> u8 {
    for name in only {
        if !GOLDEN.iter().any(|g| g.name == name) {
            return usage_error(&format!(
                "unknown check '{name}'; available: {}",
                GOLDEN.iter().map(|g| g.name).collect::<Vec<_>>().join(", ")
            ));
        }
    }
    let mut all_ok = true;
    for g in GOLDEN {
        if !only.is_empty() && !only.iter().any(|n| n == g.name) {
            continue;
        }
        let result = (g.run)(demo_break);
        let report = GoldenReport {
            name: g.name,
            pass: result.is_ok(),
            error: result.err(),
        };
        all_ok &= report.pass;
        let human = match &report.error {
            None => format!("check {:<12} pass", report.name),
            Some(e) => format!("check {:<12} FAIL: {e}", report.name),
        };
        emit(format, &report, human);
    }
    if all_ok {
        EXIT_OK
    } else {
        EXIT_FALSE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        // later failures only mean a pool already exists, which is fine
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global();
    }
    let code = match cli.cmd {
        Cmd::Check { matrix } => cmd_check(cli.format, &matrix),
        Cmd::Standardize { matrix, bound } => cmd_standardize(cli.format, &matrix, bound),
        Cmd::Certify { matrix, out } => cmd_certify(cli.format, &matrix, out.as_deref()),
        Cmd::Verify { file } => cmd_verify(&file),
        Cmd::Enumerate {
            c,
            e,
            f,
            d_bound,
            survivors_only,
        } => cmd_enumerate(c, e, f, d_bound, survivors_only),
        Cmd::VerifyPaper { only, demo_break } => cmd_verify_paper(cli.format, &only, demo_break),
    };
    ExitCode::from(code)
}
