use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nhsdp_core::designs::{
    ntap_bound_report, ntap_construct, phf_from_ntap, verify_phf, NtapSet, PhfArray, PhfVerdict,
};
use nhsdp_core::nhsdp::{ds_search, family_from_json};
use nhsdp_core::schemes::{default_sweep, to_f64, write_csv, write_json, DEFAULT_SLACK};
use nhsdp_core::sim::{
    decode, deliver, exhaustive_demand_check, place, DemandCheckReport, FileLibrary, DEFAULT_PACKET_LEN,
};
use nhsdp_core::{
    choose_params_closed_form, construct_nhsdp, solve_problem1_exact, verify_nhsdp, Error, Nhsdp, NhsdpVerdict, Pda,
    Scheme,
};

/// Largest `N^K` accepted by `simulate --demands all`.
const MAX_EXHAUSTIVE_DEMANDS: u128 = 1 << 24;

#[derive(Parser)]
#[command(name = "nhsdp", version, about = "NHSDP designs, placement delivery arrays and coded caching simulation")]
struct Cli {
    /// Seed for file contents and demand sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output format written to --out (defaults: designs json, PDAs text, tables csv).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Print more detail; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Args)]
struct Out {
    /// Where to write the machine-readable result.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the NHSDP over Z_v from block parameters m_1,..,m_n.
    ConstructNhsdp {
        #[arg(long)]
        v: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u64>,
        #[command(flatten)]
        out: Out,
    },
    /// Check both NHSDP conditions on a JSON family.
    VerifyNhsdp { file: PathBuf },
    /// Choose block parameters for v and n.
    SolveParams {
        #[arg(long)]
        v: u64,
        #[arg(long)]
        n: u32,
        /// Exhaustive search instead of the closed form.
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Turn an NHSDP file into a (v, v, v-bg, bv) PDA.
    BuildPda {
        file: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Check the PDA axioms on a text or JSON array.
    VerifyPda { file: PathBuf },
    /// Conjugate PDA: rows become symbols and symbols become rows.
    Conjugate {
        file: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Extend a PDA to K users by grouping.
    Group {
        file: PathBuf,
        #[arg(long = "K")]
        users: usize,
        #[command(flatten)]
        out: Out,
    },
    /// The MN PDA for K users and parameter t.
    MnPda {
        #[arg(long = "K")]
        users: usize,
        #[arg(long)]
        t: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Place, deliver and decode over a random file library.
    Simulate {
        file: PathBuf,
        /// Number of files.
        #[arg(long = "N")]
        files: usize,
        #[arg(long, default_value_t = DEFAULT_PACKET_LEN)]
        packet_len: usize,
        /// `all`, `sample:COUNT` or a comma-separated demand vector.
        #[arg(long, default_value = "all")]
        demands: String,
        /// Transcript of an explicit demand vector.
        #[command(flatten)]
        out: Out,
    },
    /// Progression-free set of size 2^n over Z_{3^n}.
    Ntap {
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        out: Out,
    },
    /// Build a PHF from an NTAP file, or verify a PHF file.
    Phf {
        file: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Search for a (q^2+q+1, q+1, 1) cyclic difference set.
    DsSearch {
        #[arg(long)]
        q: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Sweep schemes around K users into a comparison table.
    Compare {
        #[arg(long, value_delimiter = ',', required = true)]
        schemes: Vec<String>,
        #[arg(long = "K")]
        users: u64,
        #[arg(long, default_value_t = DEFAULT_SLACK)]
        slack: u64,
        #[command(flatten)]
        out: Out,
    },
}

enum Failure {
    /// Bad flags, unreadable input, infeasible parameters.
    Usage(String),
    /// The input was read fine but does not have the claimed property.
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Unrecoverable { .. } => Failure::Verification(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn read_pda(path: &Path) -> Result<Pda, Failure> {
    let text = read(path)?;
    let pda = if text.trim_start().starts_with('{') { Pda::from_json(&text) } else { Pda::from_text(&text) };
    Ok(pda?)
}

struct Ctx {
    format: Option<Format>,
    verbose: u8,
    seed: u64,
}

impl Ctx {
    fn pick(&self, default: Format, allowed: &[Format]) -> Result<Format, Failure> {
        let f = self.format.unwrap_or(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(Failure::Usage("this output does not support the requested --format".into()))
        }
    }

    fn write_pda(&self, pda: &Pda, out: &Out) -> Outcome {
        if let Some(path) = &out.out {
            let text = match self.pick(Format::Text, &[Format::Text, Format::Json])? {
                Format::Json => pda.to_json(),
                _ => pda.to_text(),
            };
            write(path, &text)?;
        }
        Ok(())
    }

    fn write_json(&self, json: &str, out: &Out) -> Outcome {
        if let Some(path) = &out.out {
            self.pick(Format::Json, &[Format::Json])?;
            write(path, &format!("{json}\n"))?;
        }
        Ok(())
    }
}

fn summarize_pda(pda: &Pda) -> String {
    let st = pda.stats();
    let gain = st.gain.map_or_else(|| "-".to_string(), |g| g.to_string());
    let regular = st.regular_g.map_or_else(String::new, |g| format!(", {g}-regular"));
    format!("{pda}: M/N = {}, R = {}, gain = {gain}{regular}", st.memory_ratio, st.load)
}

fn check_pda(pda: &Pda) -> Outcome {
    pda.verify().map_err(|report| Failure::Verification(format!("{pda}: invalid, {report}")))
}

fn parse_demands(spec: &str) -> Result<DemandSpec, Failure> {
    if spec == "all" {
        return Ok(DemandSpec::All);
    }
    if let Some(count) = spec.strip_prefix("sample:") {
        let count = count.parse().map_err(|_| Failure::Usage(format!("bad sample count in {spec:?}")))?;
        return Ok(DemandSpec::Sample(count));
    }
    spec.split(',')
        .map(|d| d.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map(DemandSpec::List)
        .map_err(|_| Failure::Usage(format!("--demands expects all, sample:COUNT or a list, got {spec:?}")))
}

enum DemandSpec {
    All,
    Sample(usize),
    List(Vec<usize>),
}

fn print_check(report: &DemandCheckReport, verbose: u8) -> Outcome {
    let sampled = if report.exhaustive { "" } else { " (sampled)" };
    println!(
        "{}/{} demands decoded{sampled}, load = {}",
        report.demands_decoded, report.demands_checked, report.max_load
    );
    if verbose > 0 {
        println!("expected load S/F = {}, cache sizes ok: {}", report.expected_load, report.cache_size_ok);
    }
    if report.passed() {
        return Ok(());
    }
    let mut msg = String::from("simulation failed");
    if !report.load_constant {
        msg.push_str(&format!("\n  load differs from S/F = {}", report.expected_load));
    }
    if !report.cache_size_ok {
        msg.push_str("\n  a cache does not hold exactly Z N packets");
    }
    for f in &report.failures {
        msg.push_str(&format!("\n  demands {:?}: user {}: {}", f.demands, f.user, f.reason));
    }
    Err(Failure::Verification(msg))
}

fn run(cli: Cli) -> Outcome {
    let ctx = Ctx { format: cli.format, verbose: cli.verbose, seed: cli.seed };
    match cli.command {
        Command::ConstructNhsdp { v, m, out } => {
            let d = construct_nhsdp(v, &m)?;
            println!("{d} constructed from m = {m:?}");
            if ctx.verbose > 0 {
                for block in d.blocks() {
                    println!("  {block:?}");
                }
            }
            ctx.write_json(&d.to_json(), &out)
        }
        Command::VerifyNhsdp { file } => {
            let (v, blocks) = family_from_json(&read(&file)?)?;
            match verify_nhsdp(v, &blocks)? {
                NhsdpVerdict::Valid { g, b } => {
                    println!("({v},{g},{b}) NHSDP: valid");
                    Ok(())
                }
                NhsdpVerdict::Invalid(violation) => {
                    let cond = violation.condition().map_or_else(String::new, |c| format!(" (condition {c})"));
                    Err(Failure::Verification(format!("NHSDP over Z_{v}: invalid{cond}: {violation}")))
                }
            }
        }
        Command::SolveParams { v, n, exact, out } => {
            let m = if exact { solve_problem1_exact(v, n)?.0 } else { choose_params_closed_form(v, n)? };
            let b: u64 = m.iter().product();
            let g = 1u64 << n;
            println!(
                "v = {v}, n = {n}, m = {m:?}: b = {b}, g = {g}, M/N = {:.5}, R = {b}",
                1.0 - (g * b) as f64 / v as f64
            );
            let json = format!(
                "{{\"v\":{v},\"n\":{n},\"solver\":\"{}\",\"m\":{m:?},\"b\":{b}}}",
                if exact { "exact" } else { "closed-form" }
            );
            ctx.write_json(&json.replace(' ', ""), &out)
        }
        Command::BuildPda { file, out } => {
            let d = Nhsdp::from_json(&read(&file)?)?;
            let pda = Pda::from_nhsdp(&d)?;
            check_pda(&pda)?;
            println!("{d} -> {}", summarize_pda(&pda));
            ctx.write_pda(&pda, &out)
        }
        Command::VerifyPda { file } => {
            let pda = read_pda(&file)?;
            check_pda(&pda)?;
            println!("{}: valid", summarize_pda(&pda));
            Ok(())
        }
        Command::Conjugate { file, out } => {
            let pda = read_pda(&file)?;
            check_pda(&pda)?;
            let c = pda.conjugate()?;
            check_pda(&c)?;
            println!("{pda} -> {}", summarize_pda(&c));
            ctx.write_pda(&c, &out)
        }
        Command::Group { file, users, out } => {
            let pda = read_pda(&file)?;
            check_pda(&pda)?;
            let g = pda.group_divisible(users)?;
            check_pda(&g)?;
            println!("{pda} -> {}", summarize_pda(&g));
            ctx.write_pda(&g, &out)
        }
        Command::MnPda { users, t, out } => {
            let pda = Pda::mn(users, t)?;
            println!("{}", summarize_pda(&pda));
            ctx.write_pda(&pda, &out)
        }
        Command::Simulate { file, files, packet_len, demands, out } => {
            let pda = read_pda(&file)?;
            check_pda(&pda)?;
            match parse_demands(&demands)? {
                DemandSpec::All => {
                    let total = u32::try_from(pda.k()).ok().and_then(|k| (files as u128).checked_pow(k));
                    let budget = total
                        .filter(|&t| t <= MAX_EXHAUSTIVE_DEMANDS)
                        .ok_or_else(|| Failure::Usage("N^K is too large for --demands all; use sample:COUNT".into()))?;
                    let report = exhaustive_demand_check(&pda, files, packet_len, budget as usize, ctx.seed)?;
                    print_check(&report, ctx.verbose)
                }
                DemandSpec::Sample(count) => {
                    let report = exhaustive_demand_check(&pda, files, packet_len, count, ctx.seed)?;
                    print_check(&report, ctx.verbose)
                }
                DemandSpec::List(d) => {
                    let library = FileLibrary::random(files, pda.f(), packet_len, ctx.seed)?;
                    let cache = place(&pda, &library)?;
                    let transcript = deliver(&pda, &library, &d)?;
                    let mut decoded = 0;
                    let mut problems = Vec::new();
                    for (k, &want) in d.iter().enumerate() {
                        match decode(&pda, &cache, &transcript, k) {
                            Ok(bytes) if bytes == library.file(want) => decoded += 1,
                            Ok(_) => problems.push(format!("user {k}: recovered bytes differ")),
                            Err(e) => problems.push(e.to_string()),
                        }
                    }
                    println!("{decoded}/{} users decoded, load = {}", d.len(), transcript.load());
                    ctx.write_json(transcript.to_json().trim_end(), &out)?;
                    if problems.is_empty() {
                        Ok(())
                    } else {
                        Err(Failure::Verification(problems.join("\n")))
                    }
                }
            }
        }
        Command::Ntap { n, out } => {
            let s = ntap_construct(n)?;
            println!("{} elements over Z_{}: progression-free", s.len(), s.v());
            if ctx.verbose > 0 {
                let r = ntap_bound_report(n)?;
                println!(
                    "2^n = {:.6e} vs bound {:.6e}: {}",
                    r.rho1,
                    r.rho2,
                    if r.rho1_wins { "2^n is larger" } else { "bound is larger" }
                );
            }
            ctx.write_json(&s.to_json(), &out)
        }
        Command::Phf { file, out } => {
            let text = read(&file)?;
            let has_grid = text.contains("\"grid\"");
            let phf = if has_grid { PhfArray::from_json(&text)? } else { phf_from_ntap(&NtapSet::from_json(&text)?)? };
            match verify_phf(&phf, ctx.seed)? {
                PhfVerdict::Valid { checked, exhaustive } => {
                    let how = if exhaustive { "all" } else { "sampled" };
                    println!("({}; {}, {}, {}) PHF: valid ({how} {checked} column sets)", phf.r, phf.m, phf.q, phf.t);
                    ctx.write_json(phf.to_json().trim_end(), &out)
                }
                PhfVerdict::Unseparated(cols) => Err(Failure::Verification(format!(
                    "({}; {}, {}, {}) PHF: invalid, columns {cols:?} are not separated",
                    phf.r, phf.m, phf.q, phf.t
                ))),
            }
        }
        Command::DsSearch { q, out } => match ds_search(q)? {
            Some(cdp) => {
                println!("q = {q}: difference set {:?} mod {}", cdp.elements(), cdp.v());
                let d = nhsdp_core::cdp_to_nhsdp(&cdp)?;
                ctx.write_json(&d.to_json(), &out)
            }
            None => {
                println!("q = {q}: no difference set");
                Ok(())
            }
        },
        Command::Compare { schemes, users, slack, out } => {
            let schemes = schemes.iter().map(|s| s.parse::<Scheme>()).collect::<Result<Vec<_>, _>>()?;
            let points = default_sweep(users, slack, &schemes);
            println!("{} points for K = {users} (slack {slack})", points.len());
            if ctx.verbose > 0 {
                for p in &points {
                    println!("  {p}");
                }
            } else if let (Some(first), Some(last)) = (points.first(), points.last()) {
                println!("memory ratio from {:.5} to {:.5}", to_f64(&first.memory_ratio), to_f64(&last.memory_ratio));
            }
            if let Some(path) = &out.out {
                let mut buf = Vec::new();
                match ctx.pick(Format::Csv, &[Format::Csv, Format::Json])? {
                    Format::Json => write_json(&points, &mut buf)?,
                    _ => write_csv(&points, &mut buf)?,
                }
                fs::write(path, buf).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            println!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
