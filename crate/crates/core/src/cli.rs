//! Command-line driver: scenario ingestion, lemma suites, δ and test-point
//! reports, Heinzer witnesses. Every invocation emits one JSON report.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use num_rational::BigRational;
use serde_json::{json, Map, Value as Json};

use crate::cancel::{cancel_iso, Scenario, SummandWitness, SEARCH_CAP};
use crate::delta::{delta_report, test_points, DEFAULT_CAP};
use crate::error::Error;
use crate::finmod::{hom_group, FPModule, HomElem, HomGenSet};
use crate::heinzer::{classify, gamma, parse_frac, refutation_witness, HeinzerError, LaurentFrac};
use crate::linalg::Mat;
use crate::rings::{RingDesc, RingSpec};
use crate::suites::{run_suite, SuiteConfig, LEMMAS};

/// The scenario schema version this build reads.
pub const SCHEMA: u64 = 1;

#[derive(Parser, Debug)]
#[command(name = "cancelkit", version, about = "Exact cancellation of direct summands over finite and integer backends")]
pub struct Cli {
    /// Indent the JSON report.
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Valuations and witnesses in the Heinzer domain.
    Heinzer {
        #[command(subcommand)]
        op: HeinzerOp,
    },
    /// δ of a family of maps, globally and at every point.
    Delta(ScenarioArgs),
    /// The test points of a family with their local δ values.
    TestPoints(ScenarioArgs),
    /// Constructs and verifies `L ≅ M` from `K + L ≅ K + M`.
    Cancel(ScenarioArgs),
    /// Runs a randomized (or exhaustive) verification suite for one lemma.
    VerifyLemma {
        /// One of DF, spl-infty, identity, canc-delta-one, special-section,
        /// replacement, badsc, fedsgz, rows, main-lemma, main-theorem.
        name: String,
        #[arg(long, default_value = "Zmod6")]
        ring: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        exhaustive: bool,
    },
    /// A short battery over every layer.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        trials: usize,
        /// Tampers with a verified result to exercise the verification-failure path.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum HeinzerOp {
    /// The valuation γ of a Laurent fraction.
    Gamma { expr: String },
    /// Membership in R, unit status and the maximal ideals containing it.
    Classify { expr: String },
    /// A unit s with b + a d s c in a maximal ideal, for (a, b, c) = (x1, x2, 1).
    Refute {
        #[arg(long)]
        d: String,
    },
}

#[derive(clap::Args, Debug)]
pub struct ScenarioArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Search budget for exhaustive δ and span computations.
    #[arg(long)]
    pub cap: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    HypothesisFailure,
    VerificationFailure,
    BadInput,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::HypothesisFailure => "hypothesis-failure",
            Status::VerificationFailure => "verification-failure",
            Status::BadInput => "bad-input",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::HypothesisFailure => 1,
            Status::BadInput => 2,
            Status::VerificationFailure => 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub status: Status,
    pub payload: Json,
    pub seed: Option<u64>,
}

impl Report {
    fn ok(payload: Json) -> Self {
        Report {
            status: Status::Ok,
            payload,
            seed: None,
        }
    }

    fn failure(status: Status, message: impl Into<String>) -> Self {
        Report {
            status,
            payload: json!({ "error": message.into() }),
            seed: None,
        }
    }

    pub fn to_json(&self) -> Json {
        json!({
            "status": self.status.name(),
            "payload": self.payload,
            "seed": self.seed,
        })
    }

    pub fn render(&self, pretty: bool) -> String {
        let j = self.to_json();
        if pretty {
            serde_json::to_string_pretty(&j).expect("JSON values serialize")
        } else {
            j.to_string()
        }
    }
}

impl From<Error> for Report {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::HypothesisFailure(_) | Error::PreconditionUnverified(_) | Error::WitnessInvalid(_) => {
                Status::HypothesisFailure
            }
            Error::VerificationFailure(_)
            | Error::OracleFailure(_)
            | Error::InverseNotFound(_)
            | Error::ChooserReturnedNonCentralUnit => Status::VerificationFailure,
            Error::Ring(_)
            | Error::Unsupported(_)
            | Error::Shape(_)
            | Error::IllDefined(_)
            | Error::PointNotInSpectrum(_)
            | Error::CapExceeded { .. } => Status::BadInput,
        };
        Report::failure(status, e.to_string())
    }
}

impl From<HeinzerError> for Report {
    fn from(e: HeinzerError) -> Self {
        match &e {
            HeinzerError::Parse { pos, message } => Report {
                status: Status::BadInput,
                payload: json!({ "error": e.to_string(), "position": pos, "message": message }),
                seed: None,
            },
            HeinzerError::NotInR => Report::failure(Status::HypothesisFailure, e.to_string()),
            HeinzerError::InternalIdentityFailure(_) => {
                Report::failure(Status::VerificationFailure, e.to_string())
            }
            HeinzerError::ZeroElement | HeinzerError::EmptyList | HeinzerError::DivisionByZero => {
                Report::failure(Status::BadInput, e.to_string())
            }
        }
    }
}

/// Outcome of [`dispatch`]: either a report or text that clap wants printed
/// verbatim (help and version).
pub enum Invocation {
    Report { report: Report, pretty: bool },
    Display(String),
}

/// Parses `argv` (including the program name) and runs the command.
pub fn dispatch<I, T>(argv: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Invocation::Display(e.to_string()),
                _ => Invocation::Report {
                    report: Report::failure(Status::BadInput, e.to_string().trim_end()),
                    pretty: false,
                },
            };
        }
    };
    let report = match run(&cli.command) {
        Ok(r) | Err(r) => r,
    };
    Invocation::Report {
        report,
        pretty: cli.pretty,
    }
}

fn run(cmd: &Command) -> Result<Report, Report> {
    match cmd {
        Command::Heinzer { op } => heinzer(op),
        Command::Delta(a) => {
            let sc = load(&a.scenario)?;
            let f = sc.family()?;
            Ok(Report::ok(delta_payload(&f, a.cap.unwrap_or(DEFAULT_CAP))?))
        }
        Command::TestPoints(a) => {
            let sc = load(&a.scenario)?;
            let f = sc.family()?;
            let cap = a.cap.unwrap_or(DEFAULT_CAP);
            let mut payload = delta_payload(&f, cap)?;
            payload["inductionOrdered"] = json!(test_points(&f, cap)?.is_induction_ordered());
            Ok(Report::ok(payload))
        }
        Command::Cancel(a) => {
            let sc = load(&a.scenario)?.scenario()?;
            let out = cancel_iso(&sc, a.cap.unwrap_or(SEARCH_CAP as usize))?;
            let status = if out.verify() {
                Status::Ok
            } else {
                Status::VerificationFailure
            };
            Ok(Report {
                status,
                payload: out.to_json(),
                seed: None,
            })
        }
        Command::VerifyLemma {
            name,
            ring,
            trials,
            seed,
            exhaustive,
        } => {
            if !LEMMAS.contains(&name.as_str()) {
                return Err(Report::failure(
                    Status::BadInput,
                    format!("unknown lemma {name:?}; expected one of {}", LEMMAS.join(", ")),
                ));
            }
            let ring = RingSpec::parse_short(ring).map_err(Error::from)?;
            let cfg = SuiteConfig {
                ring,
                trials: *trials,
                seed: *seed,
                exhaustive: *exhaustive,
            };
            let r = run_suite(name, &cfg)?;
            let status = if r.failures == 0 {
                Status::Ok
            } else {
                Status::VerificationFailure
            };
            Ok(Report {
                status,
                payload: r.to_json(),
                seed: Some(*seed),
            })
        }
        Command::Selftest {
            inject_fault: true, ..
        } => Ok(injected_fault()),
        Command::Selftest { seed, trials, .. } => Ok(selftest(*seed, *trials)),
    }
}

fn delta_payload(f: &HomGenSet, cap: usize) -> Result<Json, Report> {
    let mut payload = delta_report(f, cap)?.to_json();
    payload["lambda"] = test_points(f, cap)?.to_json();
    Ok(payload)
}

fn heinzer(op: &HeinzerOp) -> Result<Report, Report> {
    type Q = LaurentFrac<BigRational>;
    match op {
        HeinzerOp::Gamma { expr } => {
            let f: Q = parse_frac(expr)?;
            Ok(Report::ok(json!({ "expr": expr, "gamma": gamma(&f)?.to_json() })))
        }
        HeinzerOp::Classify { expr } => {
            let f: Q = parse_frac(expr)?;
            let c = classify(&f)?;
            Ok(Report::ok(json!({
                "expr": expr,
                "inR": c.in_r,
                "isUnitOfR": c.is_unit_of_r,
                "maximalIdealIndices": c.maximal_ideal_indices,
            })))
        }
        HeinzerOp::Refute { d } => {
            let f: Q = parse_frac(d)?;
            let w = refutation_witness(&f)?;
            Ok(Report::ok(json!({
                "a": "x1",
                "b": "x2",
                "c": "1",
                "d": f.to_string(),
                "s": w.s.to_string(),
                "m": w.m,
                "u": w.u.to_string(),
                "t": w.t.to_string(),
                "v": w.v.to_string(),
                "idealIndex": w.ideal_index,
                "identity": format!("b + a*d*s*c = x{} * v", w.ideal_index),
                "verified": true,
            })))
        }
    }
}

// ---------------------------------------------------------------------------
// Scenario files

/// A parsed scenario file; module and map names are resolved lazily so that
/// `delta` only needs `M`, `N` and `F`.
#[derive(Debug)]
pub struct ScenarioFile {
    pub ring: RingSpec,
    pub modules: BTreeMap<String, Arc<FPModule>>,
    pub homs: BTreeMap<String, HomElem>,
    roles: BTreeMap<&'static str, String>,
    family: Option<Vec<String>>,
    summand: Option<(String, String, usize)>,
}

fn bad(path: &str, msg: impl std::fmt::Display) -> Report {
    Report {
        status: Status::BadInput,
        payload: json!({ "error": format!("{path}: {msg}"), "path": path }),
        seed: None,
    }
}

fn load(path: &std::path::Path) -> Result<ScenarioFile, Report> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Report::failure(Status::BadInput, format!("{}: {e}", path.display())))?;
    ScenarioFile::parse(&text)
}

fn obj<'a>(v: &'a Json, path: &str) -> Result<&'a Map<String, Json>, Report> {
    v.as_object().ok_or_else(|| bad(path, "expected an object"))
}

fn field<'a>(o: &'a Map<String, Json>, key: &str, path: &str) -> Result<&'a Json, Report> {
    o.get(key)
        .ok_or_else(|| bad(path, format!("missing field {key:?}")))
}

fn string(v: &Json, path: &str) -> Result<String, Report> {
    v.as_str().map(str::to_string).ok_or_else(|| bad(path, "expected a string"))
}

fn matrix(ring: &RingSpec, v: &Json, cols: usize, path: &str) -> Result<Mat, Report> {
    let rows = v.as_array().ok_or_else(|| bad(path, "expected an array of rows"))?;
    let mut out = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let rp = format!("{path}[{i}]");
        let r = r.as_array().ok_or_else(|| bad(&rp, "expected an array"))?;
        if r.len() != cols {
            return Err(bad(&rp, format!("expected {cols} entries, found {}", r.len())));
        }
        let row = r
            .iter()
            .enumerate()
            .map(|(j, x)| ring.value_from_json(x).map_err(|e| bad(&format!("{rp}[{j}]"), e)))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(row);
    }
    Ok(Mat::from_rows(out, cols))
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, Report> {
        let root: Json = serde_json::from_str(text).map_err(|e| Report {
            status: Status::BadInput,
            payload: json!({
                "error": format!("line {}, column {}: {e}", e.line(), e.column()),
                "line": e.line(),
                "column": e.column(),
            }),
            seed: None,
        })?;
        let top = obj(&root, "$")?;
        match top.get("schema").and_then(Json::as_u64) {
            Some(SCHEMA) => {}
            Some(v) => return Err(bad("$.schema", format!("unsupported schema version {v}"))),
            None => return Err(bad("$.schema", "missing or non-integer schema version")),
        }
        let desc: RingDesc = serde_json::from_value(field(top, "ring", "$")?.clone())
            .map_err(|e| bad("$.ring", e))?;
        let ring = RingSpec::from_desc(&desc).map_err(|e| bad("$.ring", e))?;

        let mut modules = BTreeMap::new();
        for (name, spec) in obj(field(top, "modules", "$")?, "$.modules")? {
            let p = format!("$.modules.{name}");
            let o = obj(spec, &p)?;
            let gens = field(o, "gens", &p)?
                .as_u64()
                .ok_or_else(|| bad(&format!("{p}.gens"), "expected a non-negative integer"))?
                as usize;
            let rels = match o.get("rels") {
                Some(r) => matrix(&ring, r, gens, &format!("{p}.rels"))?,
                None => Mat::from_rows(Vec::new(), gens),
            };
            let m = FPModule::new(ring.clone(), gens, rels).map_err(|e| bad(&p, e))?;
            modules.insert(name.clone(), Arc::new(m));
        }

        let mut sf = ScenarioFile {
            ring,
            modules,
            homs: BTreeMap::new(),
            roles: BTreeMap::new(),
            family: None,
            summand: None,
        };
        if let Some(h) = top.get("homs") {
            for (name, spec) in obj(h, "$.homs")? {
                let p = format!("$.homs.{name}");
                let o = obj(spec, &p)?;
                let from = sf.module_ref(field(o, "from", &p)?, &format!("{p}.from"))?;
                let to = sf.module_ref(field(o, "to", &p)?, &format!("{p}.to"))?;
                let mat = matrix(&sf.ring, field(o, "mat", &p)?, from.gens, &format!("{p}.mat"))?;
                if mat.rows != to.gens {
                    return Err(bad(
                        &format!("{p}.mat"),
                        format!("expected {} rows, found {}", to.gens, mat.rows),
                    ));
                }
                let hom = HomElem::new(from, to, mat).map_err(|e| bad(&p, e))?;
                sf.homs.insert(name.clone(), hom);
            }
        }
        for role in ["K", "L", "M", "N", "iso"] {
            if let Some(v) = top.get(role) {
                let name = string(v, &format!("$.{role}"))?;
                let known = if role == "iso" {
                    sf.homs.contains_key(&name)
                } else {
                    sf.modules.contains_key(&name)
                };
                if !known {
                    return Err(bad(&format!("$.{role}"), format!("unknown name {name:?}")));
                }
                sf.roles.insert(role, name);
            }
        }
        if let Some(v) = top.get("F") {
            let arr = v.as_array().ok_or_else(|| bad("$.F", "expected an array of map names"))?;
            let mut names = Vec::with_capacity(arr.len());
            for (i, x) in arr.iter().enumerate() {
                let p = format!("$.F[{i}]");
                let name = string(x, &p)?;
                if !sf.homs.contains_key(&name) {
                    return Err(bad(&p, format!("unknown map {name:?}")));
                }
                names.push(name);
            }
            sf.family = Some(names);
        }
        if let Some(v) = top.get("summand") {
            let o = obj(v, "$.summand")?;
            let inc = string(field(o, "inclusion", "$.summand")?, "$.summand.inclusion")?;
            let proj = string(field(o, "projection", "$.summand")?, "$.summand.projection")?;
            let copies = field(o, "copies", "$.summand")?
                .as_u64()
                .ok_or_else(|| bad("$.summand.copies", "expected a positive integer"))?
                as usize;
            for (n, p) in [(&inc, "$.summand.inclusion"), (&proj, "$.summand.projection")] {
                if !sf.homs.contains_key(n) {
                    return Err(bad(p, format!("unknown map {n:?}")));
                }
            }
            sf.summand = Some((inc, proj, copies));
        }
        Ok(sf)
    }

    /// A module name or a list of names (their direct sum).
    fn module_ref(&self, v: &Json, path: &str) -> Result<Arc<FPModule>, Report> {
        let lookup = |name: &str, p: &str| {
            self.modules
                .get(name)
                .cloned()
                .ok_or_else(|| bad(p, format!("unknown module {name:?}")))
        };
        match v {
            Json::String(s) => lookup(s, path),
            Json::Array(items) => {
                let parts = items
                    .iter()
                    .enumerate()
                    .map(|(i, x)| {
                        let p = format!("{path}[{i}]");
                        lookup(&string(x, &p)?, &p)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let refs: Vec<&FPModule> = parts.iter().map(|m| &**m).collect();
                FPModule::direct_sum(&refs).map(Arc::new).map_err(|e| bad(path, e))
            }
            _ => Err(bad(path, "expected a module name or a list of names")),
        }
    }

    fn role(&self, role: &'static str) -> Result<String, Report> {
        self.roles
            .get(role)
            .cloned()
            .ok_or_else(|| bad("$", format!("missing field {role:?}")))
    }

    fn module(&self, role: &'static str) -> Result<Arc<FPModule>, Report> {
        Ok(Arc::clone(&self.modules[&self.role(role)?]))
    }

    /// `F` inside `Hom(M, N)`; all of `Hom(M, N)` when the file lists none.
    pub fn family(&self) -> Result<HomGenSet, Report> {
        let (m, n) = (self.module("M")?, self.module("N")?);
        match &self.family {
            None => Ok(hom_group(&m, &n)?),
            Some(names) => {
                let mut homs = Vec::with_capacity(names.len());
                for (i, name) in names.iter().enumerate() {
                    let h = &self.homs[name];
                    if h.from.invariants != m.invariants || h.to.invariants != n.invariants {
                        return Err(bad(&format!("$.F[{i}]"), format!("{name:?} is not a map M -> N")));
                    }
                    homs.push(h.retarget(Arc::clone(&m), Arc::clone(&n)));
                }
                Ok(HomGenSet::new(m, n, homs)?)
            }
        }
    }

    pub fn scenario(&self) -> Result<Scenario, Report> {
        let summand = self.summand.as_ref().map(|(inc, proj, copies)| SummandWitness {
            inclusion: self.homs[inc].clone(),
            projection: self.homs[proj].clone(),
            copies: *copies,
        });
        Ok(Scenario::new(
            self.module("K")?,
            self.module("L")?,
            self.module("M")?,
            self.module("N")?,
            self.homs[&self.role("iso")?].clone(),
            self.family()?,
            summand,
        )?)
    }
}

// ---------------------------------------------------------------------------
// Self test

const SELFTEST_SCENARIO: &str = include_str!("../scenarios/z12.scn");

fn builtin_scenario() -> Result<Scenario, String> {
    ScenarioFile::parse(SELFTEST_SCENARIO)
        .and_then(|s| s.scenario())
        .map_err(|rep| rep.payload["error"].to_string())
}

/// Doubles a verified `L -> M` isomorphism over `Z/12`, which can no longer be
/// invertible, and reports what re-verification says.
fn injected_fault() -> Report {
    let out = builtin_scenario()
        .and_then(|sc| cancel_iso(&sc, SEARCH_CAP as usize).map_err(|e| e.to_string()));
    match out {
        Err(e) => Report::failure(Status::VerificationFailure, e),
        Ok(mut out) => {
            out.iso_lm = out.iso_lm.add(&out.iso_lm);
            if out.verify() {
                Report::ok(json!({ "injectedFault": true, "caught": false }))
            } else {
                Report {
                    status: Status::VerificationFailure,
                    payload: json!({
                        "error": "tampered isoLM failed re-verification",
                        "injectedFault": true,
                        "caught": true,
                    }),
                    seed: None,
                }
            }
        }
    }
}

fn selftest(seed: u64, trials: usize) -> Report {
    let mut checks = Vec::new();
    let mut record = |name: &str, outcome: Result<bool, String>| {
        let (passed, detail) = match outcome {
            Ok(p) => (p, Json::Null),
            Err(e) => (false, json!(e)),
        };
        checks.push(json!({ "name": name, "passed": passed, "detail": detail }));
    };

    type Q = LaurentFrac<BigRational>;
    for d in ["0", "x1", "x1*x2"] {
        let r = parse_frac::<BigRational>(d)
            .and_then(|f: Q| refutation_witness(&f))
            .map(|w| w.ideal_index == if d == "0" { 2 } else { 3 })
            .map_err(|e| e.to_string());
        record(&format!("heinzer refute d = {d}"), r);
    }

    let cfg = |ring: &str, exhaustive: bool| SuiteConfig {
        ring: RingSpec::parse_short(ring).expect("built-in ring names parse"),
        trials,
        seed,
        exhaustive,
    };
    for lemma in LEMMAS {
        let r = run_suite(lemma, &cfg("Zmod6", false))
            .map(|r| r.passed())
            .map_err(|e| e.to_string());
        record(&format!("verify-lemma {lemma} on Zmod6"), r);
    }
    let r = run_suite("badsc", &cfg("M2F2", true))
        .map(|r| r.passed())
        .map_err(|e| e.to_string());
    record("verify-lemma badsc on M2F2, exhaustive", r);

    let r = builtin_scenario()
        .and_then(|sc| cancel_iso(&sc, SEARCH_CAP as usize).map_err(|e| e.to_string()))
        .map(|out| out.verify());
    record("cancel built-in Z/12 scenario", r);

    let passed = checks.iter().all(|c| c["passed"] == json!(true));
    Report {
        status: if passed {
            Status::Ok
        } else {
            Status::VerificationFailure
        },
        payload: json!({ "passed": passed, "checks": checks }),
        seed: Some(seed),
    }
}
