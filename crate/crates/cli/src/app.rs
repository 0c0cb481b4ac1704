use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dhss_core::oracle::{analyze, Analysis};
use dhss_core::yang::yang_deal;
use dhss_core::{
    generate_moduli, validate_params, AccessStructure, Bulletin, CoalitionView, EnumerationBudget,
    HashBackend, OracleError, ParamsError, PrimeField, PublicParams, Scheme, SchemeError, Secret,
    Share, ViewMode, YangError, YangPublic,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::files::{
    dhss_index_set, read_json, to_json, write_text, yang_index_set, BulletinFile, FileError,
    ParamFile, ShareFile, FORMAT_VERSION,
};

pub const EXIT_OTHER: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IRREDUCIBLES: u8 = 3;
pub const EXIT_UNAUTHORIZED: u8 = 4;
pub const EXIT_INCONSISTENT: u8 = 5;
pub const EXIT_NOT_APPLICABLE: u8 = 6;
pub const EXIT_BUDGET: u8 = 7;

#[derive(Debug, Parser)]
#[command(name = "dhss", version, about = "Hierarchical secret sharing over F_p[x]")]
struct Cli {
    /// Seed for every random choice
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Parameter file
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    /// Output file, or output directory for `deal`
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Use OS randomness when no --seed is given
    #[arg(long, global = true)]
    allow_os_entropy: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum HashKind {
    Crypto,
    Table,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    #[value(name = "i-iv")]
    OwnEntries,
    #[value(name = "i-v")]
    FullBulletin,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate and validate public parameters
    GenParams {
        #[arg(long)]
        p: u64,
        /// Level sizes, e.g. 3,4
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<usize>,
        /// Thresholds, e.g. 2,3
        #[arg(long, value_delimiter = ',', required = true)]
        thresholds: Vec<usize>,
        /// Modulus degrees, e.g. 1x7 or 1,1,2 or 1x3,2x4
        #[arg(long)]
        degrees: String,
        /// Secret length; defaults to the smallest modulus degree
        #[arg(long)]
        d0: Option<usize>,
        #[arg(long, value_enum, default_value = "crypto")]
        hash: HashKind,
        /// Table seed; defaults to a value drawn from the main seed
        #[arg(long)]
        table_seed: Option<u64>,
    },
    /// Deal a secret into share files and a bulletin
    Deal {
        /// Secret coefficients, constant term first: "3 1" or "3,1"; 0x prefix for hex
        #[arg(long)]
        secret: String,
        /// Use the two-level Yang scheme
        #[arg(long)]
        yang: bool,
    },
    /// Recover the secret from share files
    Reconstruct {
        #[arg(long)]
        bulletin: PathBuf,
        #[arg(long)]
        yang: bool,
        #[arg(required = true)]
        shares: Vec<PathBuf>,
    },
    /// Recover a Yang secret from public masks and level-2 shares
    AttackYang {
        #[arg(long)]
        bulletin: PathBuf,
        #[arg(required = true)]
        shares: Vec<PathBuf>,
    },
    /// Exhaustively analyze what an unauthorized coalition learns
    Analyze {
        #[arg(long)]
        bulletin: PathBuf,
        #[arg(long, value_enum, default_value = "i-iv")]
        mode: ModeArg,
        /// Maximum number of enumerated states
        #[arg(long)]
        budget: Option<u128>,
        /// Share files of the coalition; none means the empty coalition
        shares: Vec<PathBuf>,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_USAGE, message)
    }
}

fn params_code(e: &ParamsError) -> u8 {
    match e {
        ParamsError::InsufficientIrreducibles { .. } => EXIT_IRREDUCIBLES,
        _ => EXIT_USAGE,
    }
}

fn scheme_code(e: &SchemeError) -> u8 {
    match e {
        SchemeError::Params(p) => params_code(p),
        SchemeError::Unauthorized(_) => EXIT_UNAUTHORIZED,
        SchemeError::InconsistentShares { .. } => EXIT_INCONSISTENT,
        SchemeError::Poly(_) | SchemeError::Hash(_) => EXIT_OTHER,
        _ => EXIT_USAGE,
    }
}

impl From<FileError> for CliError {
    fn from(e: FileError) -> Self {
        let code = match &e {
            FileError::Io { .. } => EXIT_OTHER,
            FileError::Params(p) => params_code(p),
            FileError::Json { .. } | FileError::Format(_) => EXIT_USAGE,
        };
        Self::new(code, e.to_string())
    }
}

impl From<ParamsError> for CliError {
    fn from(e: ParamsError) -> Self {
        Self::new(params_code(&e), e.to_string())
    }
}

impl From<SchemeError> for CliError {
    fn from(e: SchemeError) -> Self {
        Self::new(scheme_code(&e), e.to_string())
    }
}

impl From<YangError> for CliError {
    fn from(e: YangError) -> Self {
        let code = match &e {
            YangError::Scheme(s) => scheme_code(s),
            YangError::NotTwoLevels(_) => EXIT_USAGE,
            YangError::AttackNotApplicable(_) => EXIT_NOT_APPLICABLE,
        };
        Self::new(code, e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        let code = match &e {
            OracleError::Scheme(s) => scheme_code(s),
            OracleError::Params(p) => params_code(p),
            OracleError::BudgetExceeded { .. } => EXIT_BUDGET,
            OracleError::AuthorizedCoalition(_)
            | OracleError::FullViewNeedsTable
            | OracleError::ZeroBudget
            | OracleError::MalformedBulletin { .. } => EXIT_USAGE,
            _ => EXIT_OTHER,
        };
        Self::new(code, e.to_string())
    }
}

/// Parses `args` (program name first), runs the command and maps the
/// outcome to an exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::GenParams { p, levels, thresholds, degrees, d0, hash, table_seed } => {
            gen_params(cli, *p, levels, thresholds, degrees, *d0, *hash, *table_seed)
        }
        Command::Deal { secret, yang } => deal(cli, secret, *yang),
        Command::Reconstruct { bulletin, yang, shares } => reconstruct(cli, bulletin, *yang, shares),
        Command::AttackYang { bulletin, shares } => attack_yang(cli, bulletin, shares),
        Command::Analyze { bulletin, mode, budget, shares } => {
            analyze_cmd(cli, bulletin, *mode, *budget, shares)
        }
    }
}

fn rng(cli: &Cli) -> Result<ChaCha20Rng, CliError> {
    match (cli.seed, cli.allow_os_entropy) {
        (Some(seed), _) => Ok(ChaCha20Rng::seed_from_u64(seed)),
        (None, true) => Ok(ChaCha20Rng::from_entropy()),
        (None, false) => Err(CliError::usage("--seed is required (or pass --allow-os-entropy)")),
    }
}

/// Parses `1x7`, `1,1,2` or `1x3,2x4` into a degree list.
pub fn parse_degrees(text: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim) {
        let (degree, count) = match item.split_once('x') {
            Some((d, k)) => (d, k),
            None => (item, "1"),
        };
        let degree: usize = degree.parse().map_err(|_| format!("bad degree in {item:?}"))?;
        let count: usize = count.parse().map_err(|_| format!("bad repeat count in {item:?}"))?;
        out.extend(std::iter::repeat_n(degree, count));
    }
    Ok(out)
}

/// Parses a coefficient list separated by commas or whitespace; `0x` marks hex.
pub fn parse_secret(text: &str) -> Result<Vec<u64>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
                Some(hex) => u64::from_str_radix(hex, 16),
                None => t.parse(),
            };
            parsed.map_err(|_| format!("bad secret coefficient {t:?}"))
        })
        .collect()
}

pub fn format_secret(secret: &Secret) -> String {
    secret.coeffs().iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => Ok(write_text(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn gen_params(
    cli: &Cli,
    p: u64,
    levels: &[usize],
    thresholds: &[usize],
    degrees: &str,
    d0: Option<usize>,
    hash: HashKind,
    table_seed: Option<u64>,
) -> Result<(), CliError> {
    let field = PrimeField::new(p).map_err(|e| CliError::usage(e.to_string()))?;
    let structure = AccessStructure::new(levels.to_vec(), thresholds.to_vec())?;
    let degrees = parse_degrees(degrees).map_err(CliError::usage)?;
    if degrees.len() != structure.participants() {
        return Err(CliError::usage(format!(
            "{} degrees for {} participants",
            degrees.len(),
            structure.participants()
        )));
    }
    let mut rng = rng(cli)?;
    let d0 = d0.unwrap_or_else(|| degrees.iter().copied().min().unwrap_or(0));
    let hash = match hash {
        HashKind::Crypto => HashBackend::Crypto,
        HashKind::Table => HashBackend::Table { seed: table_seed.unwrap_or_else(|| rng.next_u64()) },
    };
    let moduli = generate_moduli(field, &degrees, &mut rng)?;
    let params = PublicParams::new(field, d0, moduli, hash);
    validate_params(&structure, &params).into_result()?;
    emit(cli, &to_json(&ParamFile::from_params(&structure, &params)))
}

fn load_params(cli: &Cli) -> Result<(AccessStructure, PublicParams), CliError> {
    let path = cli.params.as_ref().ok_or_else(|| CliError::usage("--params is required"))?;
    Ok(read_json::<ParamFile>(path)?.to_params()?)
}

fn load_shares(paths: &[PathBuf], params: &PublicParams) -> Result<Vec<Share>, CliError> {
    paths.iter().map(|p| Ok(read_json::<ShareFile>(p)?.to_share(params)?)).collect()
}

fn load_bulletin(
    path: &Path,
    params: &PublicParams,
    expected: &[(usize, usize)],
) -> Result<Bulletin, CliError> {
    Ok(read_json::<BulletinFile>(path)?.to_bulletin(params, expected)?)
}

fn deal(cli: &Cli, secret: &str, yang: bool) -> Result<(), CliError> {
    let (structure, params) = load_params(cli)?;
    let dir = cli.out.as_ref().ok_or_else(|| CliError::usage("--out <dir> is required"))?;
    let secret = Secret::new(parse_secret(secret).map_err(CliError::usage)?);
    let mut rng = rng(cli)?;
    let (shares, bulletin) = if yang {
        let (shares, public) = yang_deal(structure, params.clone(), &secret, &mut rng)?;
        (shares, public.masks().clone())
    } else {
        Scheme::new(structure, params.clone())?.deal(&secret, &mut rng)?
    };
    fs::create_dir_all(dir)
        .map_err(|e| CliError::new(EXIT_OTHER, format!("{}: {e}", dir.display())))?;
    for share in &shares {
        let path = dir.join(format!("share-{}.json", share.participant));
        write_text(&path, &to_json(&ShareFile::from_share(share)))?;
    }
    write_text(&dir.join("bulletin.json"), &to_json(&BulletinFile::from_bulletin(&bulletin, &params)))?;
    eprintln!("wrote {} shares and bulletin.json to {}", shares.len(), dir.display());
    Ok(())
}

fn reconstruct(cli: &Cli, bulletin: &Path, yang: bool, paths: &[PathBuf]) -> Result<(), CliError> {
    let (structure, params) = load_params(cli)?;
    let shares = load_shares(paths, &params)?;
    let secret = if yang {
        let masks = load_bulletin(bulletin, &params, &yang_index_set(&structure))?;
        YangPublic::new(structure, params, masks)?.reconstruct(&shares)?
    } else {
        let bulletin = load_bulletin(bulletin, &params, &dhss_index_set(&structure))?;
        Scheme::new(structure, params)?.reconstruct(&bulletin, &shares)?
    };
    emit(cli, &format!("{}\n", format_secret(&secret)))
}

fn attack_yang(cli: &Cli, bulletin: &Path, paths: &[PathBuf]) -> Result<(), CliError> {
    let (structure, params) = load_params(cli)?;
    if structure.levels() != 2 {
        return Err(CliError::new(
            EXIT_NOT_APPLICABLE,
            format!("attack needs a two-level structure, got {} levels", structure.levels()),
        ));
    }
    let shares = load_shares(paths, &params)?;
    let masks = load_bulletin(bulletin, &params, &yang_index_set(&structure))?;
    let public = YangPublic::new(structure, params, masks)?;
    let transcript = public.attack(&shares)?;
    let members: Vec<String> = shares.iter().map(|s| s.participant.to_string()).collect();
    if transcript.coalition_authorized {
        eprintln!("coalition {{{}}} is authorized; the attack did not need that", members.join(", "));
    } else {
        eprintln!(
            "coalition {{{}}} is NOT authorized, yet recovered the secret from public masks and its own shares",
            members.join(", ")
        );
    }
    emit(cli, &format!("{}\n", format_secret(&transcript.secret)))
}

#[derive(Debug, Serialize)]
struct SecretCount {
    secret: Vec<String>,
    count: String,
}

#[derive(Debug, Serialize)]
struct Report {
    format_version: u32,
    p: String,
    d0: usize,
    coalition: Vec<usize>,
    mode: &'static str,
    states: String,
    theta: u64,
    histogram: Vec<SecretCount>,
    verdict: &'static str,
    loss_entropy_bits: f64,
    expected_preimage: String,
    preimage_counts: Vec<SecretCount>,
    preimages_hold: bool,
    count_f: String,
    expected_count_f: String,
    count_f_holds: bool,
    partition_holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    histogram_matches_preimages: Option<bool>,
    notes: Vec<String>,
}

fn report(a: &Analysis, params: &PublicParams) -> Report {
    let pairs = |counts: &[u128]| {
        counts
            .iter()
            .enumerate()
            .map(|(k, c)| SecretCount {
                secret: a.histogram.secret(k).coeffs().iter().map(u64::to_string).collect(),
                count: c.to_string(),
            })
            .collect()
    };
    Report {
        format_version: FORMAT_VERSION,
        p: params.field.modulus().to_string(),
        d0: params.d0,
        coalition: a.coalition.clone(),
        mode: a.mode.name(),
        states: a.states.to_string(),
        theta: a.theta,
        histogram: pairs(a.histogram.counts()),
        verdict: if a.uniform { "uniform" } else { "non-uniform" },
        loss_entropy_bits: a.loss_entropy,
        expected_preimage: a.expected_preimage.to_string(),
        preimage_counts: pairs(&a.preimage_counts),
        preimages_hold: a.preimages_hold(),
        count_f: a.count_f.to_string(),
        expected_count_f: a.expected_count_f.to_string(),
        count_f_holds: a.count_f_holds(),
        partition_holds: a.partition_holds(),
        histogram_matches_preimages: a.histogram_matches_preimages(),
        notes: a.notes.clone(),
    }
}

fn analyze_cmd(
    cli: &Cli,
    bulletin: &Path,
    mode: ModeArg,
    budget: Option<u128>,
    paths: &[PathBuf],
) -> Result<(), CliError> {
    let (structure, params) = load_params(cli)?;
    let shares = load_shares(paths, &params)?;
    let bulletin = load_bulletin(bulletin, &params, &dhss_index_set(&structure))?;
    let mode = match mode {
        ModeArg::OwnEntries => ViewMode::OwnEntries,
        ModeArg::FullBulletin => ViewMode::FullBulletin,
    };
    let budget = match budget {
        Some(b) => EnumerationBudget::new(b)?,
        None => EnumerationBudget::default(),
    };
    let scheme = Scheme::new(structure, params.clone())?;
    let view = CoalitionView::new(scheme, shares, bulletin, mode)?;
    let analysis = analyze(&view, budget)?;
    let r = report(&analysis, &params);
    let mut summary = String::new();
    let _ = write!(
        summary,
        "coalition {:?}, mode {}: {} over {} states, loss entropy {} bits",
        r.coalition, r.mode, r.verdict, r.states, r.loss_entropy_bits
    );
    eprintln!("{summary}");
    emit(cli, &to_json(&r))
}
