//! Line-oriented graph files.
//!
//! ```text
//! # the theory of a printer
//! objects Doc
//! devices p
//! pure doc : -> Doc
//! gen print : Doc -> @ p
//! ```
//!
//! `pure` generators are embedded into the impure graph under their own
//! name, with no devices. The `@` list of a `gen` line may be omitted.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use restrace::{DeviceGraph, DeviceId, EffectfulGraph, GeneratorId, MonoidalGraph, ObjectId, Violation, Word};

use crate::CliError;

/// A parsed graph file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphFile {
    pub graph: EffectfulGraph,
    /// Line on which each generator was declared.
    pub lines: BTreeMap<GeneratorId, usize>,
}

impl GraphFile {
    pub fn impure(&self) -> &DeviceGraph {
        &self.graph.impure
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> CliError {
    CliError::Parse { line, message: message.into() }
}

fn names<T: std::str::FromStr>(line: usize, text: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    text.split_whitespace().map(|s| s.parse::<T>().map_err(|e| parse_err(line, e.to_string()))).collect()
}

struct Declaration {
    name: GeneratorId,
    dom: Word,
    cod: Word,
    devices: Vec<DeviceId>,
}

fn declaration(line: usize, rest: &str, allow_devices: bool) -> Result<Declaration, CliError> {
    let (name, typing) = rest.split_once(':').ok_or_else(|| parse_err(line, "expected `NAME : DOM -> COD`"))?;
    let name: GeneratorId = name.trim().parse().map_err(|e: restrace::graphs::InvalidName| parse_err(line, e.to_string()))?;
    let (typing, devices) = match typing.split_once('@') {
        Some((t, d)) if allow_devices => (t, names(line, d)?),
        Some(_) => return Err(parse_err(line, "pure generators cannot have devices")),
        None => (typing, Vec::new()),
    };
    let mut parts = typing.split("->");
    let (Some(dom), Some(cod), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(parse_err(line, "expected exactly one `->`"));
    };
    Ok(Declaration { name, dom: Word::new(names(line, dom)?), cod: Word::new(names(line, cod)?), devices })
}

pub fn parse_graph_file(text: &str) -> Result<GraphFile, CliError> {
    let mut pure = MonoidalGraph::new();
    let mut impure = DeviceGraph::new();
    let mut embed = BTreeMap::new();
    let mut lines = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (keyword, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        match keyword {
            "objects" => {
                for o in names::<ObjectId>(line, rest)? {
                    pure = pure.with_object(o.clone());
                    impure = impure.with_object(o);
                }
            }
            "devices" => {
                for d in names::<DeviceId>(line, rest)? {
                    impure = impure.with_device(d);
                }
            }
            "pure" | "gen" => {
                let decl = declaration(line, rest, keyword == "gen")?;
                if let Some(first) = lines.insert(decl.name.clone(), line) {
                    return Err(parse_err(line, format!("generator {} already declared on line {first}", decl.name)));
                }
                if keyword == "pure" {
                    pure = pure.with_generator(decl.name.clone(), decl.dom.clone(), decl.cod.clone());
                    embed.insert(decl.name.clone(), decl.name.clone());
                }
                impure = impure.with_generator(decl.name, decl.dom, decl.cod, decl.devices);
            }
            other => return Err(parse_err(line, format!("unknown directive `{other}`"))),
        }
    }
    let graph = EffectfulGraph { pure, impure, embed };
    let violations = graph.violations();
    if !violations.is_empty() {
        return Err(CliError::Invalid(
            violations
                .iter()
                .map(|v| match generator_of(v).and_then(|g| lines.get(g)) {
                    Some(line) => format!("line {line}: {v}"),
                    None => v.to_string(),
                })
                .collect(),
        ));
    }
    Ok(GraphFile { graph, lines })
}

fn generator_of(v: &Violation) -> Option<&GeneratorId> {
    match v {
        Violation::UnknownObject { generator, .. }
        | Violation::UnknownDevice { generator, .. }
        | Violation::MissingDevices { generator }
        | Violation::DevicesForUnknownGenerator { generator } => Some(generator),
        Violation::NotEmbedded { pure }
        | Violation::EmbedUnknownSource { pure }
        | Violation::EmbedUnknownTarget { pure, .. }
        | Violation::EmbedTypeMismatch { pure, .. }
        | Violation::EmbeddedHasDevices { pure, .. }
        | Violation::EmbedNotInjective { first: pure, .. }
        | Violation::SquareFails { pure, .. } => Some(pure),
        _ => None,
    }
}

fn word(w: &Word) -> String {
    w.iter().map(|o| format!(" {o}")).collect()
}

/// Prints a graph in the file format. Pure generators must be embedded under their own name.
pub fn print_graph_file(g: &EffectfulGraph) -> Result<String, CliError> {
    let mut out = String::new();
    if !g.impure.objects().is_empty() {
        out.push_str("objects");
        for o in g.impure.objects() {
            let _ = write!(out, " {o}");
        }
        out.push('\n');
    }
    if !g.impure.devices.is_empty() {
        out.push_str("devices");
        for d in &g.impure.devices {
            let _ = write!(out, " {d}");
        }
        out.push('\n');
    }
    for (name, arity) in &g.pure.generators {
        if g.embedded(name) != Some(name) {
            return Err(CliError::Unprintable(format!("pure generator {name} is not embedded under its own name")));
        }
        let _ = writeln!(out, "pure {name} :{} ->{}", word(&arity.dom), word(&arity.cod));
    }
    for (name, arity) in g.impure.generators() {
        if g.pure_preimage(name).is_some() {
            continue;
        }
        let _ = write!(out, "gen {name} :{} ->{}", word(&arity.dom), word(&arity.cod));
        let devices = &g.impure.dev[name];
        if !devices.is_empty() {
            out.push_str(" @");
            for d in devices {
                let _ = write!(out, " {d}");
            }
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const PRINTER: &str = "objects Doc\ndevices p\npure doc : -> Doc\ngen print : Doc -> @ p\n";

    #[test]
    fn printer_file() {
        let f = parse_graph_file(PRINTER).unwrap();
        let g = &f.graph;
        assert_eq!(g.impure.generators().len(), 2);
        assert_eq!(g.embedded(&"doc".parse().unwrap()).unwrap().as_str(), "doc");
        assert_eq!(g.impure.dev[&"print".parse::<GeneratorId>().unwrap()].len(), 1);
        assert_eq!(f.lines[&"print".parse::<GeneratorId>().unwrap()], 4);
        assert_eq!(print_graph_file(g).unwrap(), PRINTER);
    }

    #[test]
    fn empty_and_comment_only_files() {
        assert_eq!(parse_graph_file("").unwrap().graph, EffectfulGraph::default());
        let f = parse_graph_file("# nothing\n\n   # here\n").unwrap();
        assert!(f.graph.impure.generators().is_empty());
    }

    #[test]
    fn errors_carry_lines() {
        let err = parse_graph_file("objects Doc\ngen f : Doc -> X\n").unwrap_err();
        assert_eq!(err.to_string(), "line 2: generator f: unknown object X");
        let err = parse_graph_file("objects Doc\nfrob x\n").unwrap_err();
        assert_eq!(err.to_string(), "line 2: unknown directive `frob`");
        let err = parse_graph_file("gen f : -> -> \n").unwrap_err();
        assert!(err.to_string().starts_with("line 1:"));
        let err = parse_graph_file("pure f : -> @ p\n").unwrap_err();
        assert!(err.to_string().contains("cannot have devices"));
        let err = parse_graph_file("gen f : ->\ngen f : ->\n").unwrap_err();
        assert!(err.to_string().contains("already declared on line 1"));
        let err = parse_graph_file("gen f : -> @ q\n").unwrap_err();
        assert!(err.to_string().contains("unknown device q"));
    }

    #[test]
    fn trailing_comments_and_spacing() {
        let f = parse_graph_file("objects A B # two objects\ngen  f:A B->A@ # no devices\n").unwrap();
        let arity = f.graph.impure.arity(&"f".parse().unwrap()).unwrap();
        assert_eq!(arity.dom.len(), 2);
        assert!(f.graph.impure.dev[&"f".parse::<GeneratorId>().unwrap()].is_empty());
    }
}
