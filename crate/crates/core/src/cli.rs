//! Command-line front end. [`run`] does all the work and returns the exit
//! code with captured output, so the binary is a thin wrapper.
//!
//! Exit codes: 0 ok, 2 parse, 3 growth violation, 4 algebra or field
//! mismatch, 5 field capability.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::autgroup::{
    self, AutError, AutomorphismDoc, Involution, InvolutionDoc, ToeplitzAutomorphism,
};
use crate::field::{Field, FieldError};
use crate::graph::{Graph, GraphError};
use crate::rewrite::{AlgebraElement, LeavittAlgebra, RewriteError};
use crate::structure::{self, FactorDescriptor, StructureError};
use crate::toeplitz::{self, AlmostToeplitz, JacError, JacobsonElement};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_GROWTH: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;
pub const EXIT_CAPABILITY: i32 = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandResult {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandResult {
    fn ok(stdout: String) -> Self {
        CommandResult {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, message: impl Into<String>) -> Self {
        let mut stderr = message.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        CommandResult {
            code,
            stdout: String::new(),
            stderr,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "leavitt", about = "Leavitt path algebras and the algebraic Toeplitz algebra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sinks, cycles, exits and growth of a graph; --chain adds the ideal chain.
    Analyze {
        graph: String,
        #[arg(long)]
        chain: bool,
        /// Also print graded dimensions up to this degree.
        #[arg(long)]
        maxdeg: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Normal forms of expressions; `name = expr` binds a name for later ones.
    Calc {
        graph: String,
        #[arg(long, default_value = "Q")]
        field: String,
        #[arg(long)]
        star: bool,
        #[arg(long)]
        json: bool,
        #[arg(required = true, allow_hyphen_values = true)]
        exprs: Vec<String>,
    },
    /// The Jacobson algebra <x, y | xy = 1> and its automorphisms.
    Toeplitz {
        #[command(subcommand)]
        command: ToeplitzCommand,
    },
}

#[derive(Subcommand, Debug)]
enum ToeplitzCommand {
    /// The matrix unit e_ij as a word and in normal form.
    Units {
        i: u64,
        j: u64,
        #[arg(long, default_value = "Q")]
        field: String,
        #[arg(long)]
        json: bool,
    },
    /// Normal forms and almost-Toeplitz matrices of expressions in x, y.
    Calc {
        #[arg(long, default_value = "Q")]
        field: String,
        #[arg(long)]
        json: bool,
        #[arg(required = true, allow_hyphen_values = true)]
        exprs: Vec<String>,
    },
    /// Tests candidate lifts of t^-1, t, 1 for a splitting of A -> F[t, t^-1].
    Probe {
        #[arg(long)]
        b1: String,
        #[arg(long)]
        bm1: String,
        #[arg(long, default_value = "1")]
        b0: String,
        #[arg(long, default_value_t = 8)]
        n: u64,
        #[arg(long, default_value = "Q")]
        field: String,
        #[arg(long)]
        json: bool,
    },
    /// Automorphisms (alpha, g) given as JSON text or file paths.
    Aut {
        #[command(subcommand)]
        command: AutCommand,
    },
    /// Congruence decomposition T = Q^t Q and the intertwiner to transposition.
    Involution {
        involution: String,
        #[arg(long, default_value = "gf2")]
        field: String,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand, Debug)]
enum AutCommand {
    /// Applies an automorphism to an expression in x, y.
    Apply {
        aut: String,
        expr: String,
        #[arg(long, default_value = "Q")]
        field: String,
        #[arg(long)]
        json: bool,
    },
    /// The automorphism acting as `second ∘ first`.
    Compose {
        first: String,
        second: String,
        #[arg(long, default_value = "Q")]
        field: String,
    },
    Invert {
        aut: String,
        #[arg(long, default_value = "Q")]
        field: String,
    },
}

struct Failure(i32, String);

type Outcome = Result<String, Failure>;

impl From<FieldError> for Failure {
    fn from(e: FieldError) -> Self {
        Failure(EXIT_PARSE, e.to_string())
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        let code = match e {
            GraphError::NotPolynomialGrowth { .. } => EXIT_GROWTH,
            GraphError::Json(_)
            | GraphError::DuplicateId(_)
            | GraphError::DanglingEndpoint { .. }
            | GraphError::EmptyVertexSet
            | GraphError::UnknownId(_)
            | GraphError::BrokenPath(_) => EXIT_PARSE,
            _ => EXIT_MISMATCH,
        };
        Failure(code, e.to_string())
    }
}

impl From<RewriteError> for Failure {
    fn from(e: RewriteError) -> Self {
        let code = match e {
            RewriteError::Syntax(_) | RewriteError::UnknownId { .. } => EXIT_PARSE,
            RewriteError::Field(_) | RewriteError::Mismatch | RewriteError::RangeMismatch => {
                EXIT_MISMATCH
            }
        };
        Failure(code, e.to_string())
    }
}

impl From<StructureError> for Failure {
    fn from(e: StructureError) -> Self {
        match e {
            StructureError::Graph(g) => g.into(),
            StructureError::Rewrite(r) => r.into(),
            other => Failure(EXIT_MISMATCH, other.to_string()),
        }
    }
}

impl From<JacError> for Failure {
    fn from(e: JacError) -> Self {
        let code = match e {
            JacError::Syntax(_)
            | JacError::UnknownSymbol { .. }
            | JacError::Field(_)
            | JacError::BadMatrix(_) => EXIT_PARSE,
            JacError::Mismatch | JacError::QuotientMismatch { .. } | JacError::NotFinitary => {
                EXIT_MISMATCH
            }
        };
        Failure(code, e.to_string())
    }
}

impl From<AutError> for Failure {
    fn from(e: AutError) -> Self {
        let code = match e {
            AutError::Jac(j) => return j.into(),
            AutError::NoSquareRoot(_) | AutError::StuckAlternatingBlock(_) => EXIT_CAPABILITY,
            _ => EXIT_MISMATCH,
        };
        Failure(code, e.to_string())
    }
}

/// Runs the CLI on `args`, which include the program name.
pub fn run<I, T>(args: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CommandResult::fail(EXIT_PARSE, text)
            } else {
                CommandResult::ok(text)
            };
        }
    };
    let out = match cli.command {
        Command::Analyze {
            graph,
            chain,
            maxdeg,
            json,
        } => cmd_analyze(&graph, chain, maxdeg, json),
        Command::Calc {
            graph,
            field,
            star,
            json,
            exprs,
        } => cmd_calc(&graph, &field, star, json, &exprs),
        Command::Toeplitz { command } => cmd_toeplitz(command),
    };
    match out {
        Ok(mut text) => {
            if !text.ends_with('\n') {
                text.push('\n');
            }
            CommandResult::ok(text)
        }
        Err(Failure(code, msg)) => CommandResult::fail(code, format!("error: {msg}")),
    }
}

fn read_source(arg: &str) -> Result<String, Failure> {
    if arg.trim_start().starts_with('{') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(arg).map_err(|e| Failure(EXIT_PARSE, format!("cannot read {arg}: {e}")))
}

fn load_graph(path: &str) -> Result<Graph, Failure> {
    Ok(Graph::from_json(&read_source(path)?)?)
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn names(g: &Graph, vs: impl IntoIterator<Item = crate::graph::VertexId>) -> Vec<String> {
    vs.into_iter().map(|v| g.vertex_name(v).to_string()).collect()
}

fn show_list(items: &[String]) -> String {
    if items.is_empty() {
        "(none)".into()
    } else {
        items.join(", ")
    }
}

fn describe_factor(f: &FactorDescriptor) -> String {
    match f.size {
        Some(n) => format!("{:?} n={} @{}", f.kind, n, f.anchor),
        None => format!("{:?} @{}", f.kind, f.anchor),
    }
}

fn cmd_analyze(path: &str, chain: bool, maxdeg: Option<usize>, json: bool) -> Outcome {
    let g = load_graph(path)?;
    let a = g.analyze();
    let cycles: Vec<String> = a.cycles.iter().map(|c| c.display(&g)).collect();
    let exits: BTreeMap<String, Vec<String>> = a
        .cycles
        .iter()
        .zip(&a.exits)
        .map(|(c, ex)| {
            (
                c.display(&g),
                ex.iter().map(|e| g.edge(*e).id.clone()).collect(),
            )
        })
        .collect();
    let ne: Vec<String> = a.ne_cycles.iter().map(|i| cycles[*i].clone()).collect();
    let sinks = names(&g, a.sinks.iter().copied());
    if !a.polynomial_growth {
        let (i, j) = a.intersecting.unwrap_or((0, 0));
        return Err(GraphError::NotPolynomialGrowth {
            first: cycles.get(i).cloned().unwrap_or_default(),
            second: cycles.get(j).cloned().unwrap_or_default(),
        }
        .into());
    }
    let v0 = names(&g, g.compute_v0());
    let report = if chain { Some(structure::ideal_chain(&g)?) } else { None };
    let graded: Option<Vec<usize>> = maxdeg.map(|n| {
        let alg = LeavittAlgebra::new(g.clone(), Field::Rationals);
        (0..=n).map(|k| alg.graded_dimension(k)).collect()
    });
    if json {
        let mut doc = json!({
            "sinks": sinks,
            "cycles": cycles,
            "exits": exits,
            "neCycles": ne,
            "polynomialGrowth": a.polynomial_growth,
            "V0": v0,
        });
        if let Some(r) = &report {
            doc["chain"] = serde_json::to_value(r).expect("serializable");
        }
        if let Some(d) = &graded {
            doc["gradedDimensions"] = json!(d);
        }
        return Ok(to_json(&doc));
    }
    let mut out = String::new();
    writeln!(out, "sinks: {}", show_list(&sinks)).unwrap();
    writeln!(out, "cycles: {}", show_list(&cycles)).unwrap();
    for (c, ex) in &exits {
        writeln!(out, "exits of ({c}): {}", show_list(ex)).unwrap();
    }
    writeln!(out, "ne cycles: {}", show_list(&ne)).unwrap();
    writeln!(out, "growth: {}", a.polynomial_growth).unwrap();
    writeln!(out, "V0: {}", show_list(&v0)).unwrap();
    if let Some(r) = &report {
        writeln!(out, "chain: s = {}", r.s).unwrap();
        for (k, layer) in r.layers.iter().enumerate() {
            let parts: Vec<String> = layer.iter().map(describe_factor).collect();
            writeln!(out, "  layer {k}: [{}]", parts.join(", ")).unwrap();
        }
    }
    if let Some(d) = &graded {
        let parts: Vec<String> = d.iter().map(|x| x.to_string()).collect();
        writeln!(out, "graded dimensions: {}", parts.join(" ")).unwrap();
    }
    Ok(out)
}

/// Splits `name = expr`; a bare expression yields `None`.
fn split_binding(text: &str) -> (Option<&str>, &str) {
    if let Some((lhs, rhs)) = text.split_once('=') {
        let name = lhs.trim();
        if !name.is_empty() && name.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return (Some(name), rhs.trim());
        }
    }
    (None, text)
}

fn cmd_calc(path: &str, field: &str, star: bool, json: bool, exprs: &[String]) -> Outcome {
    let g = load_graph(path)?;
    let field = Field::parse(field)?;
    let alg = LeavittAlgebra::new(g, field);
    let mut env: BTreeMap<String, AlgebraElement> = BTreeMap::new();
    let mut rows = Vec::new();
    for text in exprs {
        let (name, body) = split_binding(text);
        let mut v = alg.parse_with(body, &env)?;
        if star {
            v = v.star();
        }
        rows.push((name.map(str::to_string), body.to_string(), v.to_string()));
        if let Some(n) = name {
            env.insert(n.to_string(), v);
        }
    }
    if json {
        let results: Vec<Value> = rows
            .iter()
            .map(|(name, input, nf)| json!({"name": name, "input": input, "normalForm": nf}))
            .collect();
        return Ok(to_json(&json!({ "field": field.to_string(), "results": results })));
    }
    Ok(rows
        .iter()
        .map(|(name, _, nf)| match name {
            Some(n) => format!("{n} = {nf}"),
            None => nf.clone(),
        })
        .collect::<Vec<_>>()
        .join("\n"))
}

fn cmd_toeplitz(cmd: ToeplitzCommand) -> Outcome {
    match cmd {
        ToeplitzCommand::Units { i, j, field, json } => {
            let field = Field::parse(&field)?;
            if i == 0 || j == 0 {
                return Err(Failure(EXIT_PARSE, "matrix unit indices start at 1".into()));
            }
            let word = toeplitz::matrix_unit_word(i, j);
            let nf = JacobsonElement::matrix_unit(field, i, j);
            if json {
                return Ok(to_json(&json!({
                    "i": i,
                    "j": j,
                    "word": word,
                    "normalForm": nf.to_string(),
                    "matrix": nf.to_matrix().to_doc(),
                })));
            }
            Ok(format!("{word}\n= {nf}"))
        }
        ToeplitzCommand::Calc { field, json, exprs } => {
            let field = Field::parse(&field)?;
            let mut rows = Vec::new();
            for text in &exprs {
                let v = JacobsonElement::parse(text, field)?;
                rows.push((v.to_string(), v.to_matrix(), v.quotient_laurent().to_string()));
            }
            if json {
                let results: Vec<Value> = rows
                    .iter()
                    .map(|(nf, m, q)| json!({"normalForm": nf, "matrix": m.to_doc(), "quotient": q}))
                    .collect();
                return Ok(to_json(&json!({ "results": results })));
            }
            Ok(rows
                .iter()
                .map(|(nf, m, q)| format!("{nf}\n  matrix: {m}\n  quotient: {q}"))
                .collect::<Vec<_>>()
                .join("\n"))
        }
        ToeplitzCommand::Probe {
            b1,
            bm1,
            b0,
            n,
            field,
            json,
        } => {
            let field = Field::parse(&field)?;
            let b1 = JacobsonElement::parse(&b1, field)?;
            let bm1 = JacobsonElement::parse(&bm1, field)?;
            let b0 = JacobsonElement::parse(&b0, field)?;
            let cert = toeplitz::splitting_probe(&b1, &bm1, &b0, n)?;
            if json {
                return Ok(to_json(&cert));
            }
            let dims = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
            let mut out = String::new();
            writeln!(out, "b1 = {}, bm1 = {}, b0 = {}", cert.b1, cert.bm1, cert.b0).unwrap();
            writeln!(out, "b1 bm1 - b0 = {}", cert.forward_defect).unwrap();
            for (k, v) in &cert.defects {
                writeln!(out, "{k} = {v}").unwrap();
            }
            writeln!(out, "P(b1) = {:?}, P(bm1) = {:?}, dim = {}", cert.p_b1, cert.p_bm1, cert.rho_sigma_dim)
                .unwrap();
            writeln!(out, "corner dims: {}", dims(&cert.corner_dims)).unwrap();
            writeln!(out, "e11 B dims: {}", dims(&cert.ab_dims)).unwrap();
            writeln!(out, "witness: {}", serde_json::to_string(&cert.witness).expect("serializable"))
                .unwrap();
            Ok(out)
        }
        ToeplitzCommand::Aut { command } => cmd_aut(command),
        ToeplitzCommand::Involution {
            involution,
            field,
            json,
        } => {
            let field = Field::parse(&field)?;
            let doc: InvolutionDoc = parse_doc(&read_source(&involution)?)?;
            let iota = Involution::from_doc(&doc, field)?;
            let q = autgroup::involution_equivalence(&iota)?;
            let one = field.one();
            let checks = [
                ("c", AlmostToeplitz::band_matrix(one.clone(), -1)),
                ("c*", AlmostToeplitz::band_matrix(one.clone(), 1)),
                ("e11", AlmostToeplitz::unit(one, 1, 1)),
            ];
            let mut verified = BTreeMap::new();
            for (name, a) in &checks {
                verified.insert(*name, autgroup::intertwines(&iota, &q, a)?);
            }
            if json {
                return Ok(to_json(&json!({"Q": q.to_doc(), "intertwines": verified})));
            }
            let mut out = format!("Q = {q}\n");
            for (name, ok) in &verified {
                writeln!(out, "intertwines on {name}: {ok}").unwrap();
            }
            Ok(out)
        }
    }
}

fn parse_doc<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure(EXIT_PARSE, format!("malformed JSON: {e}")))
}

fn load_aut(arg: &str, field: Field) -> Result<ToeplitzAutomorphism, Failure> {
    let doc: AutomorphismDoc = parse_doc(&read_source(arg)?)?;
    Ok(ToeplitzAutomorphism::from_doc(&doc, field)?)
}

fn cmd_aut(cmd: AutCommand) -> Outcome {
    match cmd {
        AutCommand::Apply {
            aut,
            expr,
            field,
            json,
        } => {
            let field = Field::parse(&field)?;
            let phi = load_aut(&aut, field)?;
            let a = JacobsonElement::parse(&expr, field)?;
            let image = phi.apply(&a.to_matrix())?;
            let nf = JacobsonElement::from_matrix(&image);
            if json {
                return Ok(to_json(&json!({"matrix": image.to_doc(), "normalForm": nf.to_string()})));
            }
            Ok(format!("{nf}\n  matrix: {image}"))
        }
        AutCommand::Compose { first, second, field } => {
            let field = Field::parse(&field)?;
            let phi = load_aut(&first, field)?;
            let psi = load_aut(&second, field)?;
            Ok(to_json(&phi.compose(&psi)?.to_doc()))
        }
        AutCommand::Invert { aut, field } => {
            let field = Field::parse(&field)?;
            Ok(to_json(&load_aut(&aut, field)?.invert().to_doc()))
        }
    }
}
