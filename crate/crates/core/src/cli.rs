//! Command-line front end.
//!
//! Exit codes: 0 success, 1 property not certified, 2 usage or input
//! error, 3 arithmetic failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::analysis::{check_prop1, classify, AnalysisError};
use crate::catalog::{all_names, catalog_get, CatalogEntry, ExpectedProperty};
use crate::certify::{
    certify_pipeline, BoundShape, Line, Outcome, PipelineError, PipelineOptions, QuotientBounds, Report,
    DEFAULT_MAX_BASE,
};
use crate::engine::{compute_terms, EngineError, Recurrence};
use crate::exactmath::rational::{parse_rational, to_text};
use crate::exactmath::{MathError, Rational};
use crate::recdsl::{format_recurrence, parse_recurrence};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CERTIFIED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ARITHMETIC: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "logbal", version, about = "Exact log-convexity and log-balancedness certificates")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the first terms of a sequence.
    Compute {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 10)]
        terms: usize,
    },
    /// Classify the log-behavior of a window of terms.
    Classify {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 30)]
        window: usize,
        /// Also check both double inequalities implied by log-balancedness.
        #[arg(long)]
        prop1: bool,
        #[arg(long, default_value_t = 20)]
        max_sum: i64,
    },
    /// Certify log-convexity and log-balancedness.
    Certify {
        #[command(flatten)]
        source: Source,
        /// Constant quotient bounds `m,M`.
        #[arg(long, conflicts_with = "bounds_affine")]
        bounds: Option<String>,
        /// Affine quotient bounds `am,bm,aM,bM` for `am*n+bm <= x_n <= aM*n+bM`.
        #[arg(long)]
        bounds_affine: Option<String>,
        /// First index of the bounds (default: offset + 1).
        #[arg(long)]
        from: Option<i64>,
        #[arg(long, default_value_t = DEFAULT_MAX_BASE)]
        max_base: i64,
        #[arg(long, default_value_t = 60)]
        probe_window: usize,
    },
    /// Built-in sequences.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand, Debug)]
enum CatalogAction {
    List,
    Show { name: String },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    /// Recurrence file.
    #[arg(long)]
    rec: Option<PathBuf>,
    /// Recurrence text, e.g. "a[n] = 2*a[n-1]; a[0]=1".
    #[arg(long)]
    inline: Option<String>,
    /// Catalog entry (`all` for every entry, certify only).
    #[arg(long)]
    catalog: Option<String>,
}

/// An error with its exit code and message.
struct Failure(i32, String);

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure(EXIT_USAGE, msg.into())
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Math(m) => m.into(),
            other => Failure::usage(other.to_string()),
        }
    }
}

impl From<MathError> for Failure {
    fn from(e: MathError) -> Self {
        Failure(EXIT_ARITHMETIC, format!("arithmetic error: {e}"))
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Math(m) => m.into(),
            PipelineError::Engine(e) => e.into(),
        }
    }
}

fn load(source: &Source) -> Result<Recurrence, Failure> {
    if let Some(path) = &source.rec {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
        let rec = parse_recurrence(&text).map_err(|e| Failure::usage(format!("{}:{e}", path.display())))?;
        return Ok(rec.with_name(path.display().to_string()));
    }
    if let Some(text) = &source.inline {
        return parse_recurrence(text).map_err(|e| Failure::usage(format!("inline:{e}")));
    }
    let name = source.catalog.as_deref().unwrap_or_default();
    if name == "all" {
        return Err(Failure::usage("`--catalog all` is only accepted by certify"));
    }
    Ok(entry(name)?.recurrence)
}

fn entry(name: &str) -> Result<CatalogEntry, Failure> {
    catalog_get(name).map_err(|e| Failure::usage(e.to_string()))
}

fn to_json(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

fn texts(v: &[Rational]) -> Vec<String> {
    v.iter().map(to_text).collect()
}

fn compute(source: &Source, count: usize, format: Format) -> Result<(i32, String), Failure> {
    let rec = load(source)?;
    let tab = compute_terms(&rec, count)?;
    let terms = &tab.terms[..count.min(tab.terms.len())];
    let out = match format {
        Format::Json => to_json(&texts(terms)),
        Format::Text => texts(terms).join("\n"),
    };
    Ok((EXIT_OK, out))
}

fn classify_cmd(
    source: &Source,
    window: usize,
    prop1: bool,
    max_sum: i64,
    format: Format,
) -> Result<(i32, String), Failure> {
    let rec = load(source)?;
    let tab = compute_terms(&rec, window.max((max_sum + 1).max(0) as usize))?;
    let head = crate::engine::TermTable::new(tab.offset, tab.terms[..window.min(tab.terms.len())].to_vec());
    let c = classify(&head).map_err(|e| match e {
        AnalysisError::WindowTooShort(_) => Failure::usage(e.to_string()),
        AnalysisError::NonPositive(_) => Failure(EXIT_NOT_CERTIFIED, e.to_string()),
    })?;
    let report = prop1.then(|| check_prop1(&tab, max_sum));
    let out = match format {
        Format::Json => to_json(&json!({
            "tool_version": TOOL_VERSION,
            "input": rec.name().unwrap_or("inline"),
            "verdict": c.verdict,
            "window": c.window,
            "witness": c.witness,
            "prop1": report,
        })),
        Format::Text => {
            let mut s = format!("verdict: {}\nwindow: {}..{}", c.verdict.as_str(), c.window.0, c.window.1);
            if let Some(w) = c.witness {
                let _ = write!(s, "\nwitness: n = {w}");
            }
            if let Some(r) = &report {
                let _ = write!(
                    s,
                    "\nprop1 part (a): {} violations\nprop1 part (b): {}",
                    r.part_a_violations.len(),
                    if r.part_b_applicable {
                        format!("{} violations", r.part_b_violations.len())
                    } else {
                        "not applicable (needs offset 0 and a_0 = 1)".to_string()
                    }
                );
                for v in &r.part_a_violations {
                    let _ = write!(s, "\n  (a) n = {}: {} <= {} <= {} fails", v.n, v.lhs, v.mid, v.rhs);
                }
                for v in &r.part_b_violations {
                    let vals = texts(&v.values).join(" <= ");
                    let _ = write!(s, "\n  (b) n = {}, m = {}: {vals} fails", v.n, v.m);
                }
            }
            s
        }
    };
    Ok((EXIT_OK, out))
}

fn parse_list(text: &str, len: usize, flag: &str) -> Result<Vec<Rational>, Failure> {
    let parts: Vec<_> = text.split(',').map(str::trim).collect();
    if parts.len() != len {
        return Err(Failure::usage(format!("{flag} expects {len} comma-separated rationals")));
    }
    parts
        .iter()
        .map(|p| parse_rational(p).map_err(|e| Failure::usage(format!("{flag}: `{p}`: {e}"))))
        .collect()
}

fn override_bounds(
    bounds: Option<&str>,
    affine: Option<&str>,
    from: Option<i64>,
    rec: &Recurrence,
) -> Result<Option<QuotientBounds>, Failure> {
    let n0 = from.unwrap_or(rec.offset() + 1);
    let built = if let Some(b) = bounds {
        let v = parse_list(b, 2, "--bounds")?;
        QuotientBounds::constant(v[0].clone(), v[1].clone(), n0)
    } else if let Some(b) = affine {
        let v = parse_list(b, 4, "--bounds-affine")?;
        let line = |a: &Rational, b: &Rational| Line {
            slope: a.clone(),
            intercept: b.clone(),
        };
        QuotientBounds::affine(line(&v[0], &v[1]), line(&v[2], &v[3]), n0)
    } else {
        if from.is_some() {
            return Err(Failure::usage("--from needs --bounds or --bounds-affine"));
        }
        return Ok(None);
    };
    built.map(Some).map_err(|e| Failure::usage(e.to_string()))
}

#[derive(Serialize)]
struct Envelope<'a> {
    tool_version: &'static str,
    #[serde(flatten)]
    report: &'a Report,
}

fn relation_text(r: crate::certify::BaseRelation) -> &'static str {
    use crate::certify::BaseRelation::*;
    match r {
        Lower => "m(n) <= x_n",
        Upper => "x_n <= M(n)",
        Convex => "x_n <= x_{n+1}",
        Balanced => "x_{n+1} <= (n+1)/n x_n",
    }
}

fn report_text(r: &Report) -> String {
    let mut s = format!("{}: {}", r.input, r.verdict.as_str());
    if let Some(h) = r.holds_from {
        let _ = write!(s, " for n >= {h}");
    }
    if let Some(k) = r.reindexed_from {
        let _ = write!(s, " (the sequence from a_{k} on)");
    }
    if r.homogenized {
        s.push_str("\n  homogenized first");
    }
    if let Some(b) = &r.bounds {
        let _ = write!(s, "\n  bounds: {b}");
    }
    for c in &r.certificates {
        let _ = write!(
            s,
            "\n  {} via {} from n = {}: tails from n = {}, {} tail inequalities, {} base cases",
            c.property.as_str(),
            c.method.as_str(),
            c.holds_from,
            c.n_star,
            c.tail_inequalities.len(),
            c.base_cases.len()
        );
    }
    for f in &r.failures {
        let _ = write!(s, "\n  failure: {f}");
    }
    for v in &r.violations {
        let _ = write!(s, "\n  last violation in window: {} at n = {} ({} > {})", relation_text(v.relation), v.n, v.lhs, v.rhs);
    }
    let prefix = texts(&r.terms_prefix[..r.terms_prefix.len().min(8)]).join(", ");
    let _ = write!(s, "\n  terms from a_{}: {prefix}, ...", r.terms_offset);
    s
}

fn render(reports: &[Report], format: Format, many: bool) -> String {
    match format {
        Format::Json => {
            let env: Vec<_> = reports
                .iter()
                .map(|report| Envelope {
                    tool_version: TOOL_VERSION,
                    report,
                })
                .collect();
            if many {
                to_json(&env)
            } else {
                to_json(&env[0])
            }
        }
        Format::Text => reports.iter().map(report_text).collect::<Vec<_>>().join("\n"),
    }
}

fn certify_cmd(
    source: &Source,
    bounds: Option<&str>,
    affine: Option<&str>,
    from: Option<i64>,
    max_base: i64,
    probe_window: usize,
    format: Format,
) -> Result<(i32, String), Failure> {
    if max_base < 0 {
        return Err(Failure::usage("--max-base must be nonnegative"));
    }
    let base = PipelineOptions {
        probe_window,
        max_base,
        bounds_override: None,
    };
    if source.catalog.as_deref() == Some("all") {
        if bounds.is_some() || affine.is_some() || from.is_some() {
            return Err(Failure::usage("bound overrides cannot be combined with `--catalog all`"));
        }
        let names = all_names();
        let entries = names.iter().map(|n| entry(n)).collect::<Result<Vec<_>, _>>()?;
        let results: Vec<_> = std::thread::scope(|scope| {
            let handles: Vec<_> = entries
                .iter()
                .map(|e| scope.spawn(|| certify_pipeline(&e.recurrence, &base)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("pipeline thread")).collect()
        });
        let reports = results.into_iter().collect::<Result<Vec<_>, _>>()?;
        // every entry must land on its expected side
        let agree = entries.iter().zip(&reports).all(|(e, r)| {
            (r.verdict == Outcome::LogBalanced) == (e.expected_property == ExpectedProperty::LogBalanced)
        });
        let code = if agree { EXIT_OK } else { EXIT_NOT_CERTIFIED };
        return Ok((code, render(&reports, format, true)));
    }
    let rec = load(source)?;
    let opts = PipelineOptions {
        bounds_override: override_bounds(bounds, affine, from, &rec)?,
        ..base
    };
    let report = certify_pipeline(&rec, &opts)?;
    let code = if report.verdict == Outcome::LogBalanced {
        EXIT_OK
    } else {
        EXIT_NOT_CERTIFIED
    };
    Ok((code, render(std::slice::from_ref(&report), format, false)))
}

fn recurrence_line(rec: &Recurrence) -> String {
    let text = format_recurrence(rec);
    text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join(" ")
}

fn bounds_text(b: &Option<QuotientBounds>) -> String {
    match b {
        None => "none stated".into(),
        Some(b) if b.shape == BoundShape::Constant => {
            format!("{} <= x_n <= {} for n >= {}", b.lower.intercept, b.upper.intercept, b.n0)
        }
        Some(b) => b.to_string(),
    }
}

fn catalog_cmd(action: &CatalogAction, format: Format) -> Result<(i32, String), Failure> {
    let names = match action {
        CatalogAction::List => all_names(),
        CatalogAction::Show { name } => vec![name.clone()],
    };
    let entries = names.iter().map(|n| entry(n)).collect::<Result<Vec<_>, _>>()?;
    let show = matches!(action, CatalogAction::Show { .. });
    let out = match format {
        Format::Json => {
            let v: Vec<_> = entries
                .iter()
                .map(|e| {
                    json!({
                        "name": e.name,
                        "recurrence": recurrence_line(&e.recurrence),
                        "expected_bounds": e.expected_bounds,
                        "expected_property": e.expected_property,
                        "has_oracle": e.oracle.is_some(),
                        "notes": e.notes,
                    })
                })
                .collect();
            if show {
                to_json(&v[0])
            } else {
                to_json(&v)
            }
        }
        Format::Text if show => {
            let e = &entries[0];
            format!(
                "name: {}\nrecurrence: {}\nbounds: {}\nexpected: {}\nnotes: {}",
                e.name,
                recurrence_line(&e.recurrence),
                bounds_text(&e.expected_bounds),
                e.expected_property.as_str(),
                e.notes
            )
        }
        Format::Text => entries
            .iter()
            .map(|e| {
                format!(
                    "{:<22} {:<17} {}",
                    e.name,
                    e.expected_property.as_str(),
                    bounds_text(&e.expected_bounds)
                )
            })
            .collect::<Vec<_>>()
            .join("\n"),
    };
    Ok((EXIT_OK, out))
}

/// Runs one invocation, writing results to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let f = cli.format;
    let result = match &cli.command {
        Command::Compute { source, terms } => compute(source, *terms, f),
        Command::Classify {
            source,
            window,
            prop1,
            max_sum,
        } => classify_cmd(source, *window, *prop1, *max_sum, f),
        Command::Certify {
            source,
            bounds,
            bounds_affine,
            from,
            max_base,
            probe_window,
        } => certify_cmd(
            source,
            bounds.as_deref(),
            bounds_affine.as_deref(),
            *from,
            *max_base,
            *probe_window,
            f,
        ),
        Command::Catalog { action } => catalog_cmd(action, f),
    };
    match result {
        Ok((code, text)) => {
            let _ = writeln!(out, "{text}");
            code
        }
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}
