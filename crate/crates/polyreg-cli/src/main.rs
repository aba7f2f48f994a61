//! `polyreg` — edge exponents, vertex certificates, and regularity windows
//! for the mixed Stokes problem on polyhedral domains.
//!
//! Exit codes: 0 success, 2 validation/input error, 3 numerical failure.

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use polyreg::certificates::UserStrip;
use polyreg::exact::Exact;
use polyreg::oracle;
use polyreg::pencil::{self, BcPair, MuKind, MuSource};
use polyreg::report::{self, AnalysisConfig};
use polyreg::windows::{self, AssumptionFlags, BaseWindow, RegularityQuery};
use polyreg::{analyze, BcKind, MuBound, RenderFormat, SearchBox, TheoremId};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "polyreg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

impl From<Format> for RenderFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => RenderFormat::Json,
            Format::Text => RenderFormat::Text,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TheoremArg {
    /// Weak solutions in a bounded polyhedral domain.
    Weak,
    /// Weak solutions in a polyhedral cone.
    WeakCone,
    /// Strong solutions in a polyhedral cone (level 2).
    StrongCone,
    /// Regularity lift in a bounded polyhedral domain.
    Lift,
    /// Regularity lift in a polyhedral cone (needs a base window).
    LiftCone,
}

impl From<TheoremArg> for TheoremId {
    fn from(t: TheoremArg) -> Self {
        match t {
            TheoremArg::Weak => TheoremId::WeakBounded,
            TheoremArg::WeakCone => TheoremId::WeakCone,
            TheoremArg::StrongCone => TheoremId::StrongCone,
            TheoremArg::Lift => TheoremId::LiftBounded,
            TheoremArg::LiftCone => TheoremId::LiftCone,
        }
    }
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file (JSON); POLYREG_CONFIG is used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Imaginary truncation for strip checks and exponent searches.
    #[arg(long)]
    im_cap: Option<f64>,
    /// Newton residual target for the root finder.
    #[arg(long)]
    tol: Option<f64>,
    /// Collocation order for oracle-backed exponents.
    #[arg(long)]
    oracle_order: Option<usize>,
}

impl ConfigArgs {
    fn load(&self) -> anyhow::Result<AnalysisConfig> {
        let path = self
            .config
            .clone()
            .or_else(|| std::env::var_os("POLYREG_CONFIG").map(PathBuf::from));
        let mut cfg: AnalysisConfig = match path {
            Some(p) => {
                let text = std::fs::read_to_string(&p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
            None => AnalysisConfig::default(),
        };
        // Flags win over the file.
        if let Some(v) = self.im_cap {
            cfg.pencil.im_cap = v;
        }
        if let Some(v) = self.tol {
            cfg.pencil.tol = v;
        }
        if let Some(v) = self.oracle_order {
            cfg.pencil.oracle_order = v;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct QueryArgs {
    /// Theorem to check; omit to compute exponents/certificates only.
    #[arg(long)]
    query: Option<TheoremArg>,
    /// Integrability level l.
    #[arg(long, default_value_t = 1)]
    l: u32,
    /// Integrability exponent s (rational: "5/2", "2.5", "3").
    #[arg(long)]
    s: Option<String>,
    /// Vertex weight exponents beta (broadcast if one).
    #[arg(long)]
    beta: Vec<String>,
    /// Edge weight exponents delta (broadcast if one).
    #[arg(long)]
    delta: Vec<String>,
    /// Base window for lift-cone transfers: sigma.
    #[arg(long)]
    sigma: Option<String>,
    /// Base window level (default 1).
    #[arg(long, default_value_t = 1)]
    base_l: u32,
    /// Base window beta'.
    #[arg(long)]
    beta_prime: Option<String>,
    /// Base window delta' (broadcast if one).
    #[arg(long)]
    delta_prime: Vec<String>,
    /// Withdraw the edge-compatibility attestation.
    #[arg(long)]
    no_compat: bool,
    /// Withdraw the weighted-integrability attestation on g.
    #[arg(long)]
    no_condg: bool,
    /// Withdraw the g-vanishes-on-edges attestation.
    #[arg(long)]
    no_g_trace_zero: bool,
    /// Withdraw the solvability-preconditions attestation.
    #[arg(long)]
    no_solvability: bool,
}

impl QueryArgs {
    fn build(&self) -> anyhow::Result<Vec<RegularityQuery>> {
        let Some(theorem) = self.query else {
            return Ok(Vec::new());
        };
        let s = Exact::parse(
            self.s
                .as_deref()
                .ok_or_else(|| anyhow!("--query requires --s"))?,
        )?;
        let parse_list = |items: &[String]| -> anyhow::Result<Vec<Exact>> {
            if items.is_empty() {
                Ok(vec![Exact::zero()])
            } else {
                items.iter().map(|t| Ok(Exact::parse(t)?)).collect()
            }
        };
        let base = match (&self.sigma, &self.beta_prime) {
            (None, None) => None,
            (sigma, beta_prime) => Some(BaseWindow {
                l: self.base_l,
                sigma: Exact::parse(sigma.as_deref().unwrap_or("2"))?,
                beta: Exact::parse(beta_prime.as_deref().unwrap_or("0"))?,
                delta: parse_list(&self.delta_prime)?,
            }),
        };
        Ok(vec![RegularityQuery {
            theorem: theorem.into(),
            l: self.l,
            s,
            beta: parse_list(&self.beta)?,
            delta: parse_list(&self.delta)?,
            flags: AssumptionFlags {
                compat_iii: !self.no_compat,
                condg_0_3: !self.no_condg,
                g_edge_trace_zero: !self.no_g_trace_zero,
                solvability_5_4_5_5: !self.no_solvability,
            },
            base,
        }])
    }
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a domain file end to end: exponents, certificates, verdicts.
    Analyze {
        /// Domain description (JSON).
        domain: PathBuf,
        #[command(flatten)]
        query: QueryArgs,
        /// Vertex-strip override file (JSON object or array).
        #[arg(long = "override")]
        override_file: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Edge exponent for a boundary pair at a given opening angle.
    Mu {
        /// Boundary pair as "d_plus,d_minus", e.g. "0,0".
        #[arg(long)]
        pair: String,
        /// Opening angle in radians.
        #[arg(long)]
        theta: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Complex zeros of a characteristic function inside a box.
    Roots {
        #[arg(long)]
        pair: String,
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
        re_min: f64,
        #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
        re_max: f64,
        #[arg(long, default_value_t = -20.0, allow_negative_numbers = true)]
        im_min: f64,
        #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
        im_max: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Admissible weight windows and s-ranges.
    Windows {
        /// Edge exponent value (window mode).
        #[arg(long, conflicts_with = "domain")]
        mu: Option<f64>,
        /// Exponent kind for --mu.
        #[arg(long, value_enum, default_value_t = MuKindArg::Exact)]
        mu_kind: MuKindArg,
        /// Domain file (s-range mode).
        #[arg(long)]
        domain: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = TheoremArg::Weak)]
        theorem: TheoremArg,
        #[arg(long, default_value_t = 1)]
        l: u32,
        /// Exponent s used for the window annotation (rational).
        #[arg(long, default_value = "2")]
        s: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Slow cross-verification: collocation oracle vs closed forms, plus
    /// quadrature membership sweeps.
    Verify {
        /// Collocation order for the sweep.
        #[arg(long, default_value_t = 48)]
        order: usize,
        /// Restrict to one boundary pair, e.g. "0,3".
        #[arg(long)]
        pair: Option<String>,
        /// Number of randomized membership cases.
        #[arg(long, default_value_t = 100)]
        membership_cases: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Compatibility-condition checklist for a domain.
    Checklist {
        domain: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MuKindArg {
    Exact,
    Lower,
}

fn parse_pair(text: &str) -> anyhow::Result<BcPair> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| anyhow!("pair must be \"a,b\" with codes 0..=3"))?;
    let a: u8 = a.trim().parse().context("pair code")?;
    let b: u8 = b.trim().parse().context("pair code")?;
    Ok(BcPair::new(BcKind::new(a)?, BcKind::new(b)?))
}

fn load_domain(path: &Path) -> anyhow::Result<polyreg::DomainModel> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading domain {}", path.display()))?;
    Ok(polyreg::geometry::parse_domain(&text)?)
}

fn load_overrides(path: Option<&Path>) -> anyhow::Result<Vec<UserStrip>> {
    let Some(path) = path else {
        return Ok(Vec::new());
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading override {}", path.display()))?;
    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(UserStrip),
        Many(Vec<UserStrip>),
    }
    Ok(match serde_json::from_str(&text)? {
        OneOrMany::One(o) => vec![o],
        OneOrMany::Many(v) => v,
    })
}

fn emit(doc: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, doc)
            .with_context(|| format!("writing report {}", path.display()))?,
        None => println!("{doc}"),
    }
    Ok(())
}

/// Distinguishes input/validation problems (exit 2) from numerical failures
/// (exit 3).
fn is_numerical(err: &anyhow::Error) -> bool {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<report::AnalyzeError>() {
            return matches!(e, report::AnalyzeError::Pencil(_));
        }
        if let Some(e) = cause.downcast_ref::<pencil::PencilError>() {
            return !matches!(
                e,
                pencil::PencilError::BadPair(..)
                    | pencil::PencilError::BadTheta(_)
                    | pencil::PencilError::BadBox(_)
            );
        }
        if cause.downcast_ref::<oracle::OracleError>().is_some() {
            return true;
        }
    }
    false
}

fn run() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze {
            domain,
            query,
            override_file,
            format,
            out,
            config,
        } => {
            let cfg = config.load()?;
            let model = load_domain(&domain)?;
            let overrides = load_overrides(override_file.as_deref())?;
            let queries = query.build()?;
            let report = analyze(&model, &cfg, &overrides, &queries)?;
            emit(&report::render(&report, format.into()), out.as_deref())?;
        }
        Command::Mu {
            pair,
            theta,
            format,
            config,
        } => {
            let cfg = config.load()?;
            let pair = parse_pair(&pair)?;
            let mu = pencil::mu(pair, theta, &cfg.pencil)?;
            match format {
                Format::Json => {
                    #[derive(serde::Serialize)]
                    struct MuDoc {
                        pair: BcPair,
                        theta: f64,
                        mu: MuBound,
                    }
                    println!("{}", serde_json::to_string_pretty(&MuDoc { pair, theta, mu })?);
                }
                Format::Text => {
                    println!(
                        "mu({pair}, theta = {theta}) = {:.12}  [{} {}]",
                        mu.value,
                        match mu.kind {
                            MuKind::Exact => "exact",
                            MuKind::StrictLowerBound => "strict lower bound",
                        },
                        match mu.source {
                            MuSource::ClosedForm => "closed form",
                            MuSource::RootFinder => "root finder",
                            MuSource::Oracle => "oracle",
                            MuSource::User => "user",
                        }
                    );
                }
            }
        }
        Command::Roots {
            pair,
            theta,
            re_min,
            re_max,
            im_min,
            im_max,
            format,
            config,
        } => {
            let cfg = config.load()?;
            let pair = parse_pair(&pair)?;
            let search = SearchBox::new(re_min, re_max, im_min, im_max)
                .map_err(|b| anyhow!("degenerate search box {b:?}"))?;
            let spectrum = pencil::find_roots(pair, theta, search, cfg.pencil.tol, &cfg.pencil)?;
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&spectrum)?),
                Format::Text => {
                    println!("zeros of the {pair} characteristic function, theta = {theta}:");
                    for r in &spectrum.roots {
                        println!(
                            "  {:+.12} {:+.12}i  (multiplicity {}, residual {:.2e})",
                            r.re, r.im, r.multiplicity, r.residual
                        );
                    }
                    for r in &spectrum.excluded {
                        println!(
                            "  excluded trivial root {:+.6} {:+.6}i (multiplicity {})",
                            r.re, r.im, r.multiplicity
                        );
                    }
                }
            }
        }
        Command::Windows {
            mu,
            mu_kind,
            domain,
            theorem,
            l,
            s,
            format,
            config,
        } => {
            let cfg = config.load()?;
            let s = Exact::parse(&s)?;
            match (mu, domain) {
                (Some(value), None) => {
                    let bound = match mu_kind {
                        MuKindArg::Exact => MuBound::exact_from_f64(value, MuSource::User),
                        MuKindArg::Lower => MuBound::strict_lower(
                            Exact::from_f64(value).ok_or_else(|| anyhow!("non-finite mu"))?,
                        ),
                    };
                    let window = windows::edge_window(l, &s, &bound);
                    match format {
                        Format::Json => println!("{}", serde_json::to_string_pretty(&window)?),
                        Format::Text => println!(
                            "delta + 2/s window at l = {l}: ({}, {}){}",
                            window.lo,
                            window.hi,
                            if window.lo_closure_admissible {
                                "  [left endpoint attainable]"
                            } else {
                                ""
                            }
                        ),
                    }
                }
                (None, Some(path)) => {
                    let model = load_domain(&path)?;
                    let report = analyze(&model, &cfg, &[], &[])?;
                    let mus: Vec<MuBound> = report.edges.iter().map(|e| e.mu.clone()).collect();
                    let certs: Vec<_> = report
                        .vertices
                        .iter()
                        .filter_map(|v| v.certificate.clone())
                        .collect();
                    let range = windows::max_s_range(theorem.into(), l, &mus, &certs);
                    match format {
                        Format::Json => println!("{}", serde_json::to_string_pretty(&range)?),
                        Format::Text => {
                            let hi = range
                                .hi
                                .as_ref()
                                .map(|h| h.to_string())
                                .unwrap_or_else(|| "inf".into());
                            println!(
                                "admissible s-range: {}{}, {}{}{}",
                                if range.lo_open { "(" } else { "[" },
                                range.lo,
                                hi,
                                if range.hi_open || range.hi.is_none() { ")" } else { "]" },
                                if range.empty { "  (empty)" } else { "" }
                            );
                            for n in &range.notes {
                                println!("  note: {n}");
                            }
                        }
                    }
                }
                _ => return Err(anyhow!("windows needs exactly one of --mu or --domain")),
            }
        }
        Command::Verify {
            order,
            pair,
            membership_cases,
            format,
            config,
        } => {
            let cfg = config.load()?;
            let filter = pair.map(|p| parse_pair(&p)).transpose()?;
            let search = SearchBox::new(0.05, 3.0, -5.0, 5.0)
                .map_err(|b| anyhow!("bad box {b:?}"))?;
            let mut agreements = Vec::new();
            let mut all_pass = true;
            for (p, theta) in polyreg::verify::standard_grid() {
                if filter.is_some_and(|f| f.sorted() != p.sorted()) {
                    continue;
                }
                let a = polyreg::verify::oracle_agreement(p, theta, order, search, 1e-6, &cfg.pencil)?;
                all_pass &= a.pass;
                if format == Format::Text {
                    println!(
                        "{} pair {} theta {:>10.6}: {} roots, {} eigenvalues, worst match {:.2e}",
                        if a.pass { "PASS" } else { "FAIL" },
                        a.pair,
                        a.theta,
                        a.roots.len(),
                        a.eigenvalues.len(),
                        a.worst_distance
                    );
                }
                agreements.push(a);
            }
            let sweep = polyreg::verify::membership_sweep(membership_cases, 20240817);
            all_pass &= sweep.pass;
            if format == Format::Text {
                println!(
                    "{} membership sweep: {} cases, {} misclassified",
                    if sweep.pass { "PASS" } else { "FAIL" },
                    sweep.cases,
                    sweep.misclassified.len()
                );
            } else {
                #[derive(serde::Serialize)]
                struct VerifyDoc {
                    order: usize,
                    agreements: Vec<polyreg::verify::Agreement>,
                    membership: polyreg::verify::MembershipSweep,
                    pass: bool,
                }
                println!(
                    "{}",
                    serde_json::to_string_pretty(&VerifyDoc {
                        order,
                        agreements,
                        membership: sweep,
                        pass: all_pass,
                    })?
                );
            }
            if !all_pass {
                return Err(anyhow!(polyreg::oracle::OracleError::NoStableEigenvalues(
                    vec![]
                )))
                .context("verification sweep found disagreements");
            }
        }
        Command::Checklist {
            domain,
            format,
            config: _,
        } => {
            let model = load_domain(&domain)?;
            let items = windows::compatibility_requirements(&model);
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&items)?),
                Format::Text => {
                    for item in &items {
                        let scope = match &item.scope {
                            windows::CompatScope::Edge(e) => format!("edge {e}"),
                            windows::CompatScope::Global => "global".into(),
                        };
                        println!("[{scope}] {}: {}", item.condition_id, item.statement);
                        println!("    condition: {}", item.citation);
                    }
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_numerical(&err) {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
