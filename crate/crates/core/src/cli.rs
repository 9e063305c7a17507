//! Command-line front end. Every command prints one JSON document stamped
//! with [`SCHEMA`]; rationals travel as `"p/q"` strings.
//!
//! Exit status: 0 when every requested check passes, 1 on a verification
//! failure, 2 on malformed input, 3 on a singular Gram matrix.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Error;
use crate::exact::Rational;
use crate::forms::{
    bmt_form, bmt_special_form, check_l0_li_on_basic, gaiotto_form, raise_indices,
    verify_whittaker_form, verify_whittaker_state, DualForm, DualFormJson, VerificationReport,
    WhittakerType, WhittakerType1N, WhittakerTypeR,
};
use crate::shapovalov::gram;
use crate::universal::{
    example_n5, family_w_1_l_n, family_w_l_2, family_w_l_2_n, lemma_suite, search_whittaker,
    verify_universal, Ansatz, ExampleN5, UniversalReport, UniversalVector,
};
use crate::verma::{Partition, VermaContext, VermaVector};

pub const SCHEMA: &str = "virwhit/1";

#[derive(Parser, Debug)]
#[command(
    name = "virwhit",
    version,
    about = "Exact Virasoro Verma and Whittaker module computations"
)]
pub struct Cli {
    /// Largest accepted cutoff or level.
    #[arg(long, global = true, default_value_t = 12)]
    pub max_cutoff: usize,

    /// Write the JSON document here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Gram matrices of the Shapovalov form at levels 0..=LEVEL.
    Gram {
        #[command(flatten)]
        context: ContextArgs,
        #[arg(long)]
        level: usize,
    },
    /// Build a Gaiotto form, raise it to a state and verify both.
    Gaiotto {
        #[command(flatten)]
        context: ContextArgs,
        #[command(flatten)]
        ty: OrderArgs,
        #[arg(long)]
        cutoff: usize,
        /// `n_{r-1},...,n_1=coefficient`; repeatable. Defaults to the basic
        /// form with all exponents zero.
        #[arg(long = "term", allow_hyphen_values = true)]
        terms: Vec<String>,
    },
    /// Build a BMT form, raise it to a state and verify both.
    Bmt {
        #[command(flatten)]
        context: ContextArgs,
        #[command(flatten)]
        ty: PairArgs,
        #[arg(long)]
        cutoff: usize,
        /// `m_2,...,m_{n-1}=coefficient`; repeatable.
        #[arg(long = "term", allow_hyphen_values = true, conflicts_with = "lambdas")]
        terms: Vec<String>,
        /// Product coefficients `λ_2^{m_2} ... λ_{n-1}^{m_{n-1}}`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambdas: Option<Vec<Rational>>,
    },
    /// Re-verify a document written by `gaiotto` or `bmt`.
    Verify {
        /// Input document, `-` for standard input.
        input: PathBuf,
    },
    /// Universal Whittaker module computations.
    Universal {
        #[command(subcommand)]
        command: UniversalCommand,
    },
    /// Randomized commutator level and length bounds.
    CheckLemmas {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// `L_0` and `L_i` on the basic Gaiotto form against their differential
    /// operator expressions.
    CheckL0Li {
        #[command(flatten)]
        context: ContextArgs,
        #[command(flatten)]
        ty: OrderArgs,
        #[arg(long)]
        cutoff: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum UniversalCommand {
    /// Construct a Whittaker vector of an explicit family and verify it.
    Family {
        #[arg(long, value_enum)]
        family: Family,
        #[command(flatten)]
        ty: PairArgs,
        #[arg(long, default_value_t = 1)]
        l: usize,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        alpha: Rational,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        c: Rational,
    },
    /// Exact Whittaker-vector nullspace over a level-0 monomial ansatz.
    Search {
        #[command(flatten)]
        ty: PairArgs,
        /// Largest number of letters in an ansatz monomial.
        #[arg(long)]
        length: usize,
        #[arg(long, value_enum, default_value_t = AnsatzKind::Nontrivial)]
        ansatz: AnsatzKind,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        c: Rational,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Family {
    WL2,
    WL2N,
    W1LN,
    W1123,
    W22,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum AnsatzKind {
    /// Every monomial in `L_2, ..., L_{n-1}` with at least one letter.
    Nontrivial,
    /// As `nontrivial`, keeping only even powers of `L_{n-1}`.
    Even,
}

#[derive(Args, Debug, Clone)]
pub struct ContextArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub c: Rational,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Rational,
}

impl ContextArgs {
    fn context(&self) -> VermaContext {
        VermaContext::new(self.c.clone(), self.delta.clone())
    }
}

#[derive(Args, Debug, Clone)]
pub struct OrderArgs {
    #[arg(long)]
    pub r: u32,
    /// `μ_r, ..., μ_{2r}`.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    pub mu: Vec<Rational>,
}

impl OrderArgs {
    fn ty(&self) -> Result<WhittakerTypeR, Error> {
        WhittakerTypeR::new(self.r, self.mu.clone())
    }
}

#[derive(Args, Debug, Clone)]
pub struct PairArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, allow_hyphen_values = true)]
    pub nu1: Rational,
    #[arg(long, allow_hyphen_values = true)]
    pub nun: Rational,
}

impl PairArgs {
    fn ty(&self) -> Result<WhittakerType1N, Error> {
        WhittakerType1N::new(self.n, self.nu1.clone(), self.nun.clone())
    }
}

/// Result of one job: the document and its exit status.
#[derive(Debug)]
pub struct Outcome {
    pub document: Value,
    pub status: i32,
    pub diagnostic: Option<String>,
}

/// One nonzero coefficient of a truncated Verma vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateTermJson {
    pub level: usize,
    pub partition: Partition,
    pub coefficient: Rational,
}

/// Output of `gaiotto` and `bmt`, and input of `verify`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDocument {
    pub schema: String,
    pub command: String,
    #[serde(rename = "type")]
    pub ty: WhittakerType,
    pub form: DualFormJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<StateTermJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<StateVerification>,
    #[serde(default)]
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateVerification {
    pub form: VerificationReport,
    pub state: Option<VerificationReport>,
    /// Whether the stored state equals the state raised from the form.
    pub state_matches_form: Option<bool>,
}

fn state_terms(w: &VermaVector) -> Vec<StateTermJson> {
    let mut terms: Vec<StateTermJson> = w
        .terms()
        .iter()
        .map(|(p, k)| StateTermJson {
            level: p.level(),
            partition: p.clone(),
            coefficient: k.clone(),
        })
        .collect();
    terms.sort_by(|a, b| (a.level, b.partition.parts()).cmp(&(b.level, a.partition.parts())));
    terms
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn parse_term(raw: &str) -> Result<(Vec<u32>, Rational), Error> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| invalid(format!("term {raw:?} is not of the form key=coefficient")))?;
    let exponents = key
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<u32>().map_err(|_| {
                invalid(format!(
                    "exponent {s:?} in {raw:?} is not a nonnegative integer"
                ))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((exponents, value.trim().parse()?))
}

fn parse_terms(raw: &[String], default_len: usize) -> Result<BTreeMap<Vec<u32>, Rational>, Error> {
    if raw.is_empty() {
        return Ok(BTreeMap::from([(vec![0; default_len], Rational::one())]));
    }
    let mut out = BTreeMap::new();
    for t in raw {
        let (k, v) = parse_term(t)?;
        *out.entry(k).or_insert_with(Rational::zero) += v;
    }
    Ok(out)
}

fn check_cutoff(cutoff: usize, limit: usize) -> Result<(), Error> {
    if cutoff > limit {
        return Err(invalid(format!(
            "cutoff {cutoff} exceeds the limit {limit} (raise it with --max-cutoff)"
        )));
    }
    Ok(())
}

fn stamped(command: &str, body: Value) -> Value {
    let mut doc = json!({ "schema": SCHEMA, "command": command });
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    doc
}

fn report_outcome(document: Value, passed: bool, failure: impl FnOnce() -> String) -> Outcome {
    if passed {
        Outcome {
            document,
            status: 0,
            diagnostic: None,
        }
    } else {
        Outcome {
            document,
            status: 1,
            diagnostic: Some(failure()),
        }
    }
}

fn describe_failure(report: &VerificationReport) -> String {
    match report.first_failure() {
        Some(c) => match &c.first_failure {
            Some(t) => format!(
                "{} fails at level {} on {:?}: residual {}",
                c.check, t.level, t.partition, t.residual
            ),
            None => format!("{} fails", c.check),
        },
        None => "verification failed".into(),
    }
}

fn describe_universal_failure(report: &UniversalReport) -> String {
    match report.checks.iter().find(|c| !c.residual_zero) {
        Some(c) => format!("{} fails: {:?}", c.check, c.first_failure),
        None => "verification failed".into(),
    }
}

/// Builds the state document for a form: raise, verify both, and record.
fn state_document(command: &str, ty: WhittakerType, form: &DualForm) -> Result<Outcome, Error> {
    let w = raise_indices(form)?;
    let form_report = verify_whittaker_form(form, &ty);
    let state_report = verify_whittaker_state(&w, form.cutoff(), &ty);
    let passed = form_report.passed && state_report.passed;
    let failure = if !form_report.passed {
        describe_failure(&form_report)
    } else {
        describe_failure(&state_report)
    };
    let doc = StateDocument {
        schema: SCHEMA.into(),
        command: command.into(),
        ty,
        form: form.to_json(),
        state: Some(state_terms(&w)),
        verification: Some(StateVerification {
            form: form_report,
            state: Some(state_report),
            state_matches_form: None,
        }),
        passed,
    };
    let document = serde_json::to_value(&doc).expect("serializable document");
    Ok(report_outcome(document, passed, || failure))
}

fn verify_document(doc: &StateDocument, limit: usize) -> Result<Outcome, Error> {
    if doc.schema != SCHEMA {
        return Err(invalid(format!("unsupported schema {:?}", doc.schema)));
    }
    let form = DualForm::from_json(&doc.form)?;
    check_cutoff(form.cutoff(), limit)?;
    let form_report = verify_whittaker_form(&form, &doc.ty);
    let mut passed = form_report.passed;
    let mut failure = (!form_report.passed).then(|| describe_failure(&form_report));
    let (state_report, matches) = match &doc.state {
        Some(terms) => {
            let w = VermaVector::from_terms(
                form.context().clone(),
                terms
                    .iter()
                    .map(|t| (t.partition.clone(), t.coefficient.clone())),
            );
            let report = verify_whittaker_state(&w, form.cutoff(), &doc.ty);
            let matches = raise_indices(&form)? == w;
            if failure.is_none() && !report.passed {
                failure = Some(describe_failure(&report));
            }
            if failure.is_none() && !matches {
                failure = Some("stored state differs from the state raised from the form".into());
            }
            passed &= report.passed && matches;
            (Some(report), Some(matches))
        }
        None => (None, None),
    };
    let body = json!({
        "source_command": doc.command,
        "verification": StateVerification { form: form_report, state: state_report, state_matches_form: matches },
        "passed": passed,
    });
    Ok(report_outcome(stamped("verify", body), passed, || {
        failure.unwrap_or_default()
    }))
}

fn read_input(path: &PathBuf) -> Result<String, Error> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)
            .map_err(|e| invalid(format!("reading stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("reading {}: {e}", path.display())))
    }
}

fn universal_document(command: &str, v: &UniversalVector) -> Outcome {
    let report = verify_universal(v, v.ty());
    let passed = report.passed;
    let failure = describe_universal_failure(&report);
    let body = json!({ "vector": v.to_json(), "verification": report, "passed": passed });
    report_outcome(stamped(command, body), passed, || failure)
}

/// Runs one job.
pub fn run(cli: &Cli) -> Result<Outcome, Error> {
    let limit = cli.max_cutoff;
    match &cli.command {
        Command::Gram { context, level } => {
            check_cutoff(*level, limit)?;
            let ctx = context.context();
            let levels: Vec<_> = (0..=*level).map(|l| gram(l, &ctx).to_json()).collect();
            let body = json!({ "c": ctx.c, "delta": ctx.delta, "levels": levels });
            Ok(Outcome {
                document: stamped("gram", body),
                status: 0,
                diagnostic: None,
            })
        }
        Command::Gaiotto {
            context,
            ty,
            cutoff,
            terms,
        } => {
            check_cutoff(*cutoff, limit)?;
            let psi = ty.ty()?;
            let a = parse_terms(terms, psi.r() as usize - 1)?;
            let form = gaiotto_form(&psi, &a, *cutoff, &context.context())?;
            state_document("gaiotto", WhittakerType::Order(psi), &form)
        }
        Command::Bmt {
            context,
            ty,
            cutoff,
            terms,
            lambdas,
        } => {
            check_cutoff(*cutoff, limit)?;
            let psi = ty.ty()?;
            let form = match lambdas {
                Some(l) => bmt_special_form(&psi, l, *cutoff, &context.context())?,
                None => bmt_form(
                    &psi,
                    &parse_terms(terms, psi.n() as usize - 2)?,
                    *cutoff,
                    &context.context(),
                )?,
            };
            state_document("bmt", WhittakerType::Pair(psi), &form)
        }
        Command::Verify { input } => {
            let text = read_input(input)?;
            let doc: StateDocument = serde_json::from_str(&text)
                .map_err(|e| invalid(format!("malformed document: {e}")))?;
            verify_document(&doc, limit)
        }
        Command::Universal { command } => match command {
            UniversalCommand::Family {
                family,
                ty,
                l,
                alpha,
                c,
            } => {
                let psi = ty.ty()?;
                let v = match family {
                    Family::WL2 => family_w_l_2(&psi, c, *l, alpha)?,
                    Family::WL2N => family_w_l_2_n(&psi, c, *l, alpha)?,
                    Family::W1LN => family_w_1_l_n(&psi, c, *l, alpha)?,
                    Family::W1123 => example_n5(ExampleN5::W11_23, &psi, c)?.scaled(alpha),
                    Family::W22 => example_n5(ExampleN5::W2_2, &psi, c)?.scaled(alpha),
                };
                Ok(universal_document("universal family", &v))
            }
            UniversalCommand::Search {
                ty,
                length,
                ansatz,
                c,
            } => {
                check_cutoff(*length, limit)?;
                let ty = WhittakerType::Pair(ty.ty()?);
                let n = match &ty {
                    WhittakerType::Pair(t) => t.n() as i32,
                    WhittakerType::Order(_) => unreachable!(),
                };
                let base = Ansatz::nontrivial_level0(&ty, *length);
                let ans = match ansatz {
                    AnsatzKind::Nontrivial => base,
                    AnsatzKind::Even => base
                        .filtered(&format!("even powers of L_{}", n - 1), |w| {
                            w.iter().filter(|&&i| i == n - 1).count() % 2 == 0
                        }),
                };
                let res = search_whittaker(&ty, c, &ans, &ty)?;
                let body = serde_json::to_value(res.to_json()).expect("serializable search");
                Ok(Outcome {
                    document: stamped("universal search", body),
                    status: 0,
                    diagnostic: None,
                })
            }
        },
        Command::CheckLemmas { seed, samples } => {
            let report = lemma_suite(*seed, *samples);
            let passed = report.passed;
            let failure = report
                .clauses
                .iter()
                .find(|c| c.failures > 0)
                .map(|c| {
                    format!(
                        "{}: {}",
                        c.clause,
                        c.first_failure.clone().unwrap_or_default()
                    )
                })
                .unwrap_or_default();
            let body = serde_json::to_value(&report).expect("serializable report");
            Ok(report_outcome(
                stamped("check-lemmas", body),
                passed,
                || failure,
            ))
        }
        Command::CheckL0Li {
            context,
            ty,
            cutoff,
        } => {
            check_cutoff(*cutoff, limit)?;
            let report = check_l0_li_on_basic(&ty.ty()?, *cutoff, &context.context())?;
            let passed = report.passed;
            let failure = describe_failure(&report);
            let body = json!({ "report": report, "passed": passed });
            Ok(report_outcome(stamped("check-l0-li", body), passed, || {
                failure
            }))
        }
    }
}

/// Exit status for an error.
pub fn error_status(e: &Error) -> i32 {
    match e {
        Error::SingularGram { .. } => 3,
        _ => 2,
    }
}

/// Parses arguments, runs the job, writes the document and returns the exit
/// status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            let mut body = json!({ "error": e.to_string() });
            if let Error::SingularGram { level } = e {
                body["singular_level"] = json!(level);
            }
            Outcome {
                document: stamped("error", body),
                status: error_status(&e),
                diagnostic: None,
            }
        }
    };
    if let Some(d) = &outcome.diagnostic {
        eprintln!("verification failed: {d}");
    }
    let mut text = serde_json::to_string_pretty(&outcome.document).expect("serializable document");
    text.push('\n');
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &text).map_err(|e| e.to_string()),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return 2;
    }
    outcome.status
}
