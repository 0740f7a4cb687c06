//! Circuit files, engines and reports behind the `grasswig` binary.
//!
//! Circuit grammar, one statement per line, case-insensitive:
//!
//! ```text
//! qubits 2      # header, must come first
//! h 0
//! p 1
//! t 0
//! cnot 0 1      # control, target
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::OrderClass;
use crate::measurement::{
    assignment_search, context_expectations, noncontextual_assignment_search, sequential_measure, single_qubit_analog, Line,
    PMSquare, Scheme,
};
use crate::oracle::{random_pure_state, run_circuit, stabilizer_group, Circuit, Gate};
use crate::phasespace::{gbar_from_state, permutation_for_gate, simulate_circuit, PhaseSpaceError, MAX_QUBITS};
use crate::twogen::{preparation_context_demo, wigner2, EnsembleWeights, Tableau};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_REFUSED: i32 = 3;
pub const EXIT_DISAGREE: i32 = 4;
/// I/O and other failures outside the scripting contract.
pub const EXIT_OTHER: i32 = 1;

/// Largest register for which the dense report includes the Wigner grid.
const WIGNER_REPORT_QUBITS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing `qubits N` header")]
    MissingHeader,
    #[error("header repeated")]
    DuplicateHeader,
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("`{0}` is not a qubit index")]
    BadIndex(String),
    #[error("`{gate}` takes {expected} argument(s), got {got}")]
    Arity { gate: String, expected: usize, got: usize },
    #[error("qubit {qubit} outside a {qubits}-qubit register")]
    OutOfRange { qubit: usize, qubits: usize },
    #[error("control and target are both {0}")]
    SameQubits(usize),
    #[error("register size {0} outside 1..={MAX_QUBITS}")]
    RegisterSize(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let body = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in body.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &body[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &body[s..]));
    }
    out.into_iter().map(|(s, t)| (body[..s].chars().count() + 1, t)).collect()
}

pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut qubits: Option<usize> = None;
    let mut gates = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let toks = tokens(raw);
        let Some(&(col, head)) = toks.first() else { continue };
        let err = |column, kind| ParseError { line, column, kind };
        let head = head.to_ascii_lowercase();
        let index = |k: usize| -> Result<usize, ParseError> {
            let (c, t) = toks[k];
            t.parse::<usize>().map_err(|_| err(c, ParseErrorKind::BadIndex(t.to_string())))
        };
        let arity = |expected: usize| -> Result<(), ParseError> {
            if toks.len() - 1 != expected {
                let c = toks.get(expected + 1).map_or(col, |t| t.0);
                return Err(err(c, ParseErrorKind::Arity { gate: head.clone(), expected, got: toks.len() - 1 }));
            }
            Ok(())
        };
        if head == "qubits" {
            if qubits.is_some() {
                return Err(err(col, ParseErrorKind::DuplicateHeader));
            }
            arity(1)?;
            let n = index(1)?;
            if n == 0 || n > MAX_QUBITS {
                return Err(err(toks[1].0, ParseErrorKind::RegisterSize(n)));
            }
            qubits = Some(n);
            continue;
        }
        let Some(n) = qubits else {
            return Err(err(col, ParseErrorKind::MissingHeader));
        };
        let in_range = |k: usize| -> Result<usize, ParseError> {
            let q = index(k)?;
            if q >= n {
                return Err(err(toks[k].0, ParseErrorKind::OutOfRange { qubit: q, qubits: n }));
            }
            Ok(q)
        };
        let gate = match head.as_str() {
            "h" | "p" | "t" => {
                arity(1)?;
                let q = in_range(1)?;
                match head.as_str() {
                    "h" => Gate::H(q),
                    "p" => Gate::P(q),
                    _ => Gate::T(q),
                }
            }
            "cnot" => {
                arity(2)?;
                let (control, target) = (in_range(1)?, in_range(2)?);
                if control == target {
                    return Err(err(toks[2].0, ParseErrorKind::SameQubits(control)));
                }
                Gate::Cnot { control, target }
            }
            _ => return Err(err(col, ParseErrorKind::UnknownGate(head.clone()))),
        };
        gates.push(gate);
    }
    let n = qubits.ok_or(ParseError { line: last_line.max(1), column: 1, kind: ParseErrorKind::MissingHeader })?;
    Ok(Circuit::new(n, gates).expect("gates validated while parsing"))
}

pub fn serialize_circuit(circuit: &Circuit) -> String {
    let mut out = format!("qubits {}\n", circuit.qubits());
    for g in circuit.gates() {
        out.push_str(&g.to_string());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Threegen,
    Tableau,
    Dense,
    All,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Engine::Threegen => "threegen",
            Engine::Tableau => "tableau",
            Engine::Dense => "dense",
            Engine::All => "all",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub threegen_vs_dense: Verdict,
    pub tableau_vs_dense: Verdict,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refusal {
    pub engine: Engine,
    pub gate: String,
    pub classification: OrderClass,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub engine: Engine,
    pub qubits: usize,
    pub gates: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gbar: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tableau_group: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense_gbar: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense_group: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wigner: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub negativity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement: Option<Agreement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refusal: Option<Refusal>,
    /// Wall time per engine in milliseconds.
    pub timing_ms: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.refusal.is_some() {
            EXIT_REFUSED
        } else if self.agreement.as_ref().is_some_and(|a| a.verdict == Verdict::Fail) {
            EXIT_DISAGREE
        } else {
            EXIT_OK
        }
    }
}

fn first_non_clifford(circuit: &Circuit) -> Option<Gate> {
    circuit.gates().iter().copied().find(|g| !g.is_clifford())
}

fn refusal(engine: Engine, gate: Gate) -> Refusal {
    let classification = match permutation_for_gate(&gate, gate.targets().iter().max().map_or(1, |m| m + 1)) {
        Err(PhaseSpaceError::NotPermutation { class, .. }) => class,
        _ => OrderClass::Hbar0Permutation,
    };
    let label = serde_json::to_value(classification).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
    Refusal {
        engine,
        gate: gate.to_string(),
        classification,
        message: format!("`{gate}` needs the first-order propagator ({label}); it does not permute phase-space points"),
    }
}

fn group_strings<'a>(group: impl IntoIterator<Item = &'a crate::oracle::PauliString>) -> Vec<String> {
    group.into_iter().map(|p| p.to_string()).collect::<BTreeSet<_>>().into_iter().collect()
}

fn timed<T>(timing: &mut BTreeMap<String, f64>, name: &str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    timing.insert(name.to_string(), start.elapsed().as_secs_f64() * 1e3);
    out
}

/// Runs the selected engine(s) from `|0…0⟩`.
pub fn run(circuit: &Circuit, engine: Engine) -> RunReport {
    let mut report = RunReport {
        engine,
        qubits: circuit.qubits(),
        gates: circuit.gates().len(),
        gbar: None,
        tableau_group: None,
        dense_gbar: None,
        dense_group: None,
        wigner: None,
        negativity: None,
        agreement: None,
        refusal: None,
        timing_ms: BTreeMap::new(),
    };
    let wants = |e: Engine| engine == e || engine == Engine::All;
    if engine != Engine::Dense {
        if let Some(g) = first_non_clifford(circuit) {
            let refused = if engine == Engine::All { Engine::Threegen } else { engine };
            report.refusal = Some(refusal(refused, g));
            return report;
        }
    }
    let mut timing = BTreeMap::new();
    if wants(Engine::Threegen) {
        report.gbar = timed(&mut timing, "threegen", || simulate_circuit(circuit)).ok().map(|g| g.to_map());
    }
    if wants(Engine::Tableau) {
        report.tableau_group = timed(&mut timing, "tableau", || Tableau::simulate(circuit.qubits(), circuit.gates()))
            .ok()
            .map(|t| group_strings(&t.stabilizer_group()));
    }
    if wants(Engine::Dense) {
        let rho = timed(&mut timing, "dense", || run_circuit(circuit));
        report.dense_group = stabilizer_group(&rho).ok().map(|g| group_strings(&g));
        if report.dense_group.is_some() {
            report.dense_gbar = gbar_from_state(&rho).ok().map(|g| g.to_map());
        }
        if circuit.qubits() <= WIGNER_REPORT_QUBITS {
            let w = wigner2(&rho);
            report.negativity = Some(w.negativity());
            report.wigner = Some(w.values().chunks(w.side()).map(<[f64]>::to_vec).collect());
        }
    }
    report.timing_ms = timing;
    if engine == Engine::All {
        let three = Verdict::from_bool(report.gbar.is_some() && report.gbar == report.dense_gbar);
        let tab = Verdict::from_bool(report.tableau_group.is_some() && report.tableau_group == report.dense_group);
        let verdict = Verdict::from_bool(three == Verdict::Pass && tab == Verdict::Pass);
        report.agreement = Some(Agreement { threegen_vs_dense: three, tableau_vs_dense: tab, verdict });
    }
    report
}

fn fmt_gbar(f: &mut fmt::Formatter<'_>, name: &str, g: &BTreeMap<String, f64>) -> fmt::Result {
    writeln!(f, "{name}:")?;
    for (k, v) in g.iter().filter(|(_, v)| **v != 0.0) {
        writeln!(f, "  {k:<14} {v:.6}")?;
    }
    Ok(())
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "engine {}  qubits {}  gates {}", self.engine, self.qubits, self.gates)?;
        if let Some(r) = &self.refusal {
            return writeln!(f, "REFUSED by {}: {}", r.engine, r.message);
        }
        if let Some(g) = &self.gbar {
            fmt_gbar(f, "threegen ḡ", g)?;
        }
        if let Some(g) = &self.tableau_group {
            writeln!(f, "tableau stabilizers: {}", g.join(" "))?;
        }
        if let Some(g) = &self.dense_gbar {
            fmt_gbar(f, "dense ḡ", g)?;
        }
        if let Some(g) = &self.dense_group {
            writeln!(f, "dense stabilizers: {}", g.join(" "))?;
        }
        if let Some(n) = self.negativity {
            writeln!(f, "Wigner negativity: {n:.6}")?;
        }
        if let Some(a) = &self.agreement {
            writeln!(f, "threegen vs dense: {:?}", a.threegen_vs_dense)?;
            writeln!(f, "tableau vs dense:  {:?}", a.tableau_vs_dense)?;
            writeln!(f, "agreement: {:?}", a.verdict)?;
        }
        for (k, v) in &self.timing_ms {
            writeln!(f, "time {k}: {v:.3} ms")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparationSummary {
    pub c_y: f64,
    pub density_gap: f64,
    pub rules_differ: bool,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextualityReport {
    pub observables: Vec<Vec<String>>,
    pub row_products: Vec<i8>,
    pub column_products: Vec<i8>,
    pub column_triple_product: i8,
    /// Random states measured rowwise and columnwise.
    pub sampled_states: usize,
    pub sampled_products_hold: bool,
    pub max_context_gap: f64,
    pub assignments_examined: usize,
    pub assignments_found: usize,
    /// Found with each single line constraint dropped.
    pub relaxed_found: Vec<usize>,
    pub single_qubit_analog_found: usize,
    pub preparation: Vec<PreparationSummary>,
}

pub const CONTEXTUALITY_STATES: usize = 20;

pub fn report_contextuality(seed: u64) -> ContextualityReport {
    let sq = PMSquare::standard();
    let observables = (0..3).map(|r| (0..3).map(|c| sq.pauli(r, c).to_string()).collect()).collect();
    let product = |l| sq.line_product(l).expect("valid line");
    let row_products: Vec<i8> = (0..3).map(|r| product(Line::Row(r))).collect();
    let column_products: Vec<i8> = (0..3).map(|c| product(Line::Column(c))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut holds = true;
    let mut gap: f64 = 0.0;
    for _ in 0..CONTEXTUALITY_STATES {
        let rho = random_pure_state(2, &mut rng);
        let s = rng.gen();
        let rows = sequential_measure(&rho, &sq, Scheme::Rowwise, s).expect("two qubits");
        let cols = sequential_measure(&rho, &sq, Scheme::Columnwise, s).expect("two qubits");
        holds &= rows.line_products.to_vec() == row_products && cols.line_products.to_vec() == column_products;
        for l in Line::all() {
            let r = context_expectations(&rho, &sq, l).expect("two qubits");
            gap = gap.max(r.oracle_gap).max(r.marginal_gap);
        }
    }
    let full = noncontextual_assignment_search(&sq);
    let relaxed_found = (0..6)
        .map(|skip| {
            let mut cs = sq.constraints();
            cs.remove(skip);
            assignment_search(9, &cs).found()
        })
        .collect();
    let preparation = [0.0, 0.25]
        .into_iter()
        .map(|y| {
            let w = EnsembleWeights { x_plus: 0.25, x_minus: 0.25, z_plus: 0.25, z_minus: 0.25, y };
            let r = preparation_context_demo(w, Gate::H(0)).expect("valid weights");
            let verdict = if r.rules_differ { "rule sets differ" } else { "rule sets identical" };
            PreparationSummary { c_y: y, density_gap: r.density_gap, rules_differ: r.rules_differ, verdict: verdict.into() }
        })
        .collect();
    ContextualityReport {
        observables,
        column_triple_product: column_products.iter().product(),
        row_products,
        column_products,
        sampled_states: CONTEXTUALITY_STATES,
        sampled_products_hold: holds,
        max_context_gap: gap,
        assignments_examined: full.examined,
        assignments_found: full.found(),
        relaxed_found,
        single_qubit_analog_found: single_qubit_analog().found(),
        preparation,
    }
}

impl fmt::Display for ContextualityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Peres–Mermin square")?;
        for (row, p) in self.observables.iter().zip(&self.row_products) {
            writeln!(f, "  {:<6}{:<6}{:<6}| {p:+}", row[0], row[1], row[2])?;
        }
        let cols: Vec<String> = self.column_products.iter().map(|p| format!("{p:+}")).collect();
        writeln!(f, "  column products {}  (triple product {:+})", cols.join(" "), self.column_triple_product)?;
        writeln!(f, "sampled states: {}  products hold: {}", self.sampled_states, self.sampled_products_hold)?;
        writeln!(f, "symbol vs oracle max gap: {:.3e}", self.max_context_gap)?;
        writeln!(f, "assignments found: {} of {}", self.assignments_found, self.assignments_examined)?;
        writeln!(f, "with one constraint dropped: {:?}", self.relaxed_found)?;
        writeln!(f, "single-qubit analog assignments: {}", self.single_qubit_analog_found)?;
        for p in &self.preparation {
            writeln!(f, "preparation demo c_Y = {}: {} (density gap {:.1e})", p.c_y, p.verdict, p.density_gap)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub circuits: usize,
    pub qubits: usize,
    pub seed: u64,
    pub max_gates: usize,
    pub passed: usize,
    pub failures: Vec<String>,
}

impl SelftestReport {
    pub fn verdict(&self) -> Verdict {
        Verdict::from_bool(self.failures.is_empty())
    }
}

pub const SELFTEST_MAX_GATES: usize = 50;

/// Random Clifford circuits through every engine, compared against the oracle.
/// Circuits are drawn up front from the seed and checked on worker threads.
pub fn selftest(circuits: usize, qubits: usize, seed: u64) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let batch: Vec<Circuit> = (0..circuits)
        .map(|_| {
            let len = rng.gen_range(0..=SELFTEST_MAX_GATES);
            Circuit::random_clifford(qubits, len, &mut rng)
        })
        .collect();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(batch.len().max(1));
    let chunk = batch.len().div_ceil(workers).max(1);
    let mut failures: Vec<(usize, String)> = std::thread::scope(|s| {
        let handles: Vec<_> = batch
            .chunks(chunk)
            .enumerate()
            .map(|(ci, part)| {
                s.spawn(move || {
                    part.iter()
                        .enumerate()
                        .filter_map(|(k, c)| {
                            let r = run(c, Engine::All);
                            (r.exit_code() != EXIT_OK).then(|| (ci * chunk + k, serialize_circuit(c).replace('\n', "; ")))
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });
    failures.sort();
    SelftestReport {
        circuits,
        qubits,
        seed,
        max_gates: SELFTEST_MAX_GATES,
        passed: circuits - failures.len(),
        failures: failures.into_iter().map(|(i, c)| format!("#{i}: {c}")).collect(),
    }
}

#[derive(Debug, Parser)]
#[command(name = "grasswig", version, about = "Grassmann phase-space simulation of qubit Clifford circuits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a circuit file through one engine or all of them.
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Engine::All)]
        engine: Engine,
        /// Write the JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Peres–Mermin suite and the preparation demo.
    Contextuality {
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random Clifford circuits through every engine.
    Selftest {
        #[arg(long, default_value_t = 200)]
        circuits: usize,
        #[arg(long, default_value_t = 3)]
        qubits: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn emit<T: Serialize + fmt::Display>(report: &T, json: Option<&PathBuf>) -> Result<(), String> {
    print!("{report}");
    if let Some(path) = json {
        let text = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
        std::fs::write(path, text + "\n").map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(())
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "selftest: {} circuits on {} qubits (seed {}, ≤ {} gates)",
            self.circuits, self.qubits, self.seed, self.max_gates
        )?;
        for fail in &self.failures {
            writeln!(f, "  mismatch {fail}")?;
        }
        writeln!(f, "passed {}/{}: {:?}", self.passed, self.circuits, self.verdict())
    }
}

/// Entry point; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match cli.command {
        Command::Run { file, engine, json } => {
            let text = match std::fs::read_to_string(&file) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    return EXIT_OTHER;
                }
            };
            let circuit = match parse_circuit(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    return EXIT_PARSE;
                }
            };
            let report = run(&circuit, engine);
            emit(&report, json.as_ref()).map(|_| report.exit_code())
        }
        Command::Contextuality { json, seed } => emit(&report_contextuality(seed), json.as_ref()).map(|_| EXIT_OK),
        Command::Selftest { circuits, qubits, seed, json } => {
            if qubits == 0 || qubits > MAX_QUBITS {
                eprintln!("qubit count {qubits} outside 1..={MAX_QUBITS}");
                return EXIT_PARSE;
            }
            let report = selftest(circuits, qubits, seed);
            let code = if report.verdict() == Verdict::Pass { EXIT_OK } else { EXIT_DISAGREE };
            emit(&report, json.as_ref()).map(|_| code)
        }
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("{e}");
        EXIT_OTHER
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        let bell = parse_circuit("qubits 2\nh 0\ncnot 0 1").unwrap();
        assert_eq!(bell.gates(), &[Gate::H(0), Gate::Cnot { control: 0, target: 1 }]);
        let t = parse_circuit("qubits 1\nt 0").unwrap();
        assert_eq!(t.gates(), &[Gate::T(0)]);
        let e = parse_circuit("qubits 2\ncnot 0 2").unwrap_err();
        assert_eq!((e.line, e.column), (2, 8));
        assert_eq!(e.kind, ParseErrorKind::OutOfRange { qubit: 2, qubits: 2 });
    }

    #[test]
    fn grammar_details() {
        let c = parse_circuit("# Bell\n\n  QUBITS 2  # two\nH 0\n\tCNOT 0 1 # entangle\n").unwrap();
        assert_eq!(c.gates().len(), 2);
        let cases = [
            ("h 0", 1, 1, ParseErrorKind::MissingHeader),
            ("", 1, 1, ParseErrorKind::MissingHeader),
            ("qubits 1\nqubits 1", 2, 1, ParseErrorKind::DuplicateHeader),
            ("qubits 1\n  x 0", 2, 3, ParseErrorKind::UnknownGate("x".into())),
            ("qubits 1\nh a", 2, 3, ParseErrorKind::BadIndex("a".into())),
            ("qubits 1\nh -1", 2, 3, ParseErrorKind::BadIndex("-1".into())),
            ("qubits 2\nh 0 1", 2, 5, ParseErrorKind::Arity { gate: "h".into(), expected: 1, got: 2 }),
            ("qubits 2\ncnot 0", 2, 1, ParseErrorKind::Arity { gate: "cnot".into(), expected: 2, got: 1 }),
            ("qubits 2\ncnot 1 1", 2, 8, ParseErrorKind::SameQubits(1)),
            ("qubits 0", 1, 8, ParseErrorKind::RegisterSize(0)),
            ("qubits 11", 1, 8, ParseErrorKind::RegisterSize(11)),
        ];
        for (text, line, column, kind) in cases {
            assert_eq!(parse_circuit(text).unwrap_err(), ParseError { line, column, kind }, "{text:?}");
        }
    }

    #[test]
    fn round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        for n in 1..=4 {
            let c = Circuit::random_clifford(n, 30, &mut rng);
            assert_eq!(parse_circuit(&serialize_circuit(&c)).unwrap(), c);
        }
        let t = parse_circuit("qubits 2\nt 1\nh 0").unwrap();
        assert_eq!(parse_circuit(&serialize_circuit(&t)).unwrap(), t);
    }

    #[test]
    fn bell_all_engines() {
        let r = run(&parse_circuit("qubits 2\nh 0\ncnot 0 1").unwrap(), Engine::All);
        assert_eq!(r.exit_code(), EXIT_OK);
        let g = r.gbar.unwrap();
        let support: Vec<(&str, f64)> = g.iter().filter(|(_, v)| **v > 0.0).map(|(k, v)| (k.as_str(), *v)).collect();
        assert_eq!(support.iter().map(|s| s.0).collect::<Vec<_>>(), ["+XX", "+ZZ", "-YY"]);
        for (_, v) in support {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(r.tableau_group.unwrap(), ["+XX", "+ZZ", "-YY"]);
    }

    #[test]
    fn t_refused() {
        let c = parse_circuit("qubits 1\nt 0").unwrap();
        for e in [Engine::Threegen, Engine::Tableau, Engine::All] {
            let r = run(&c, e);
            assert_eq!(r.exit_code(), EXIT_REFUSED);
            let refusal = r.refusal.unwrap();
            assert_eq!(refusal.classification, OrderClass::Hbar1General);
            assert!(refusal.message.contains("hbar1_general"));
        }
        let dense = run(&c, Engine::Dense);
        assert_eq!(dense.exit_code(), EXIT_OK);
        assert_eq!(dense.negativity, Some(0.0));
        let magic = run(&parse_circuit("qubits 1\nh 0\nt 0").unwrap(), Engine::Dense);
        assert!((magic.negativity.unwrap() - (2f64.sqrt() - 1.0) / 4.0).abs() < 1e-12);
        assert!(magic.dense_gbar.is_none());
    }

    #[test]
    fn empty_dense() {
        let r = run(&parse_circuit("qubits 2").unwrap(), Engine::Dense);
        assert_eq!(r.dense_group.unwrap(), ["+IZ", "+ZI", "+ZZ"]);
        let w = r.wigner.unwrap();
        assert_eq!(w[0], [0.25, 0.0, 0.0, 0.0]);
        assert_eq!(w.iter().flatten().sum::<f64>(), 1.0);
    }

    #[test]
    fn contextuality_report() {
        let r = report_contextuality(0);
        assert_eq!((r.row_products.clone(), r.column_triple_product), (vec![1, 1, 1], -1));
        assert!(r.sampled_products_hold && r.max_context_gap < 1e-9);
        assert_eq!(r.assignments_found, 0);
        assert!(r.relaxed_found.iter().all(|&k| k > 0));
        assert!(r.single_qubit_analog_found > 0);
        assert_eq!(r.preparation[0].verdict, "rule sets identical");
        assert_eq!(r.preparation[1].verdict, "rule sets differ");
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["assignments_found"], 0);
    }

    #[test]
    fn small_selftest() {
        let r = selftest(12, 3, 7);
        assert_eq!(r.verdict(), Verdict::Pass, "{:?}", r.failures);
        assert_eq!(r.passed, 12);
    }
}
