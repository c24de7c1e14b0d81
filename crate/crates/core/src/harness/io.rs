//! Versioned JSON documents and DOT export.
//!
//! Every document carries `schema` and `version`; rationals are stored as
//! `"num/den"` strings. Derived data (weights, copy counts) is written for
//! readers and checked against a rebuild on import.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::blowup::{blow_up, BlowupGraph};
use crate::error::{Error, Result};
use crate::fracmatch::{Component, FractionalMatching};
use crate::gadget::{Flavor, GadgetGraph};
use crate::graph::{Edge, Graph, Matching};
use crate::rational::{serde_str, Rational};
use crate::ulc::UlcInstance;

pub const SCHEMA_VERSION: u32 = 1;

pub const INSTANCE_SCHEMA: &str = "mmm/ulc-instance";
pub const GADGET_SCHEMA: &str = "mmm/gadget";
pub const BLOWUP_SCHEMA: &str = "mmm/blowup";
pub const GRAPH_SCHEMA: &str = "mmm/graph";
pub const MATCHING_SCHEMA: &str = "mmm/matching";
pub const FRACTIONAL_SCHEMA: &str = "mmm/fractional-matching";

fn schema_error(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        location: location.into(),
        message: message.into(),
    }
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        schema_error(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })
}

fn render<T: Serialize>(doc: &T) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("documents serialize");
    text.push('\n');
    text
}

fn check_header(schema: &str, version: u32, expected: &str) -> Result<()> {
    if schema != expected {
        return Err(schema_error("schema", format!("expected `{expected}`, found `{schema}`")));
    }
    if version != SCHEMA_VERSION {
        return Err(schema_error(
            "version",
            format!("unsupported version {version}, expected {SCHEMA_VERSION}"),
        ));
    }
    Ok(())
}

/// Rewraps a domain error raised while rebuilding an entity.
fn at(location: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Schema { .. } => e,
        other => schema_error(location, other.to_string()),
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintDoc {
    u: usize,
    v: usize,
    /// `π_{u→v}` as the image of each color.
    perm: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlantedDoc {
    labelling: Vec<usize>,
    x0: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    schema: String,
    version: u32,
    num_vars: usize,
    num_colors: usize,
    constraints: Vec<ConstraintDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    planted: Option<PlantedDoc>,
}

fn instance_doc(instance: &UlcInstance) -> InstanceDoc {
    InstanceDoc {
        schema: INSTANCE_SCHEMA.into(),
        version: SCHEMA_VERSION,
        num_vars: instance.num_vars(),
        num_colors: instance.num_colors(),
        constraints: instance
            .constraints()
            .iter()
            .map(|c| ConstraintDoc {
                u: c.u,
                v: c.v,
                perm: c.forward.images().to_vec(),
            })
            .collect(),
        planted: instance.planted().map(|p| PlantedDoc {
            labelling: p.labelling.clone(),
            x0: p.x0.clone(),
        }),
    }
}

fn instance_from_doc(doc: InstanceDoc) -> Result<UlcInstance> {
    check_header(&doc.schema, doc.version, INSTANCE_SCHEMA)?;
    let edges = doc.constraints.into_iter().map(|c| ((c.u, c.v), c.perm));
    let instance = UlcInstance::new(doc.num_vars, doc.num_colors, edges).map_err(at("constraints"))?;
    match doc.planted {
        Some(p) => instance.with_planted(p.labelling, p.x0).map_err(at("planted")),
        None => Ok(instance),
    }
}

pub fn export_instance(instance: &UlcInstance) -> String {
    render(&instance_doc(instance))
}

pub fn import_instance(text: &str) -> Result<UlcInstance> {
    instance_from_doc(parse(text)?)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexDoc {
    id: usize,
    label: String,
    #[serde(with = "serde_str")]
    weight: Rational,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GadgetDoc {
    schema: String,
    version: u32,
    num_vars: usize,
    num_colors: usize,
    #[serde(with = "serde_str")]
    epsilon: Rational,
    flavor: String,
    vertices: Vec<VertexDoc>,
    edges: Vec<Edge>,
}

fn flavor_name(flavor: Flavor) -> &'static str {
    match flavor {
        Flavor::Base => "base",
        Flavor::Extended => "extended",
    }
}

pub fn parse_flavor(name: &str) -> Result<Flavor> {
    match name {
        "base" => Ok(Flavor::Base),
        "extended" => Ok(Flavor::Extended),
        other => Err(schema_error("flavor", format!("unknown flavor `{other}`"))),
    }
}

fn gadget_doc(gadget: &GadgetGraph) -> GadgetDoc {
    GadgetDoc {
        schema: GADGET_SCHEMA.into(),
        version: SCHEMA_VERSION,
        num_vars: gadget.num_vars(),
        num_colors: gadget.num_colors(),
        epsilon: gadget.epsilon().clone(),
        flavor: flavor_name(gadget.flavor()).into(),
        vertices: (0..gadget.num_vertices())
            .map(|v| VertexDoc {
                id: v,
                label: gadget.label(v),
                weight: gadget.weight(v).clone(),
            })
            .collect(),
        edges: gadget.graph().edges().collect(),
    }
}

fn gadget_from_doc(doc: GadgetDoc) -> Result<GadgetGraph> {
    check_header(&doc.schema, doc.version, GADGET_SCHEMA)?;
    let flavor = parse_flavor(&doc.flavor)?;
    let n = doc.vertices.len();
    let graph = Graph::from_edges(n, doc.edges).map_err(at("edges"))?;
    let gadget = GadgetGraph::from_parts(doc.num_vars, doc.num_colors, &doc.epsilon, flavor, graph)
        .map_err(at("vertices"))?;
    for (i, v) in doc.vertices.iter().enumerate() {
        let location = format!("vertices[{i}]");
        if v.id != i {
            return Err(schema_error(location, format!("id {} out of order", v.id)));
        }
        if v.weight != *gadget.weight(i) || v.label != gadget.label(i) {
            return Err(schema_error(location, "weight or label disagrees with (x,S) encoding"));
        }
    }
    Ok(gadget)
}

pub fn export_gadget(gadget: &GadgetGraph) -> String {
    render(&gadget_doc(gadget))
}

pub fn import_gadget(text: &str) -> Result<GadgetGraph> {
    gadget_from_doc(parse(text)?)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlowupDoc {
    schema: String,
    version: u32,
    #[serde(with = "serde_str")]
    rho: Rational,
    n: usize,
    /// `4·n_v` per base vertex.
    copy_counts: Vec<usize>,
    base: GadgetDoc,
}

/// A blowup together with the gadget it borrows from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlowupBundle {
    pub base: GadgetGraph,
    pub rho: Rational,
}

impl BlowupBundle {
    pub fn blowup(&self) -> Result<BlowupGraph<'_>> {
        blow_up(&self.base, &self.rho)
    }
}

pub fn export_blowup(blowup: &BlowupGraph<'_>) -> String {
    render(&BlowupDoc {
        schema: BLOWUP_SCHEMA.into(),
        version: SCHEMA_VERSION,
        rho: blowup.rho().clone(),
        n: blowup.n(),
        copy_counts: (0..blowup.base().num_vertices()).map(|v| blowup.copy_count(v)).collect(),
        base: gadget_doc(blowup.base()),
    })
}

pub fn import_blowup(text: &str) -> Result<BlowupBundle> {
    let doc: BlowupDoc = parse(text)?;
    check_header(&doc.schema, doc.version, BLOWUP_SCHEMA)?;
    let bundle = BlowupBundle {
        base: gadget_from_doc(doc.base)?,
        rho: doc.rho,
    };
    let rebuilt = bundle.blowup().map_err(at("rho"))?;
    if rebuilt.n() != doc.n {
        return Err(schema_error("n", format!("stored {}, rebuilt {}", doc.n, rebuilt.n())));
    }
    let counts: Vec<usize> = (0..bundle.base.num_vertices()).map(|v| rebuilt.copy_count(v)).collect();
    if counts != doc.copy_counts {
        return Err(schema_error("copy_counts", "disagree with round(n·w(v))"));
    }
    Ok(bundle)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    schema: String,
    version: u32,
    num_vertices: usize,
    edges: Vec<Edge>,
}

pub fn export_graph(graph: &Graph) -> String {
    render(&GraphDoc {
        schema: GRAPH_SCHEMA.into(),
        version: SCHEMA_VERSION,
        num_vertices: graph.num_vertices(),
        edges: graph.edges().collect(),
    })
}

pub fn import_graph(text: &str) -> Result<Graph> {
    let doc: GraphDoc = parse(text)?;
    check_header(&doc.schema, doc.version, GRAPH_SCHEMA)?;
    Graph::from_edges(doc.num_vertices, doc.edges).map_err(at("edges"))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatchingDoc {
    schema: String,
    version: u32,
    edges: Vec<Edge>,
}

pub fn export_matching(matching: &Matching) -> String {
    render(&MatchingDoc {
        schema: MATCHING_SCHEMA.into(),
        version: SCHEMA_VERSION,
        edges: matching.edges().to_vec(),
    })
}

pub fn import_matching(text: &str) -> Result<Matching> {
    let doc: MatchingDoc = parse(text)?;
    check_header(&doc.schema, doc.version, MATCHING_SCHEMA)?;
    if let Some((i, _)) = doc.edges.iter().enumerate().find(|(_, (u, v))| u == v) {
        return Err(schema_error(format!("edges[{i}]"), "self loop"));
    }
    Ok(Matching::new(doc.edges))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ValueDoc {
    u: usize,
    v: usize,
    #[serde(with = "serde_str")]
    value: Rational,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ComponentDoc {
    Pair {
        edge: Edge,
    },
    Walk {
        edges: Vec<Edge>,
        incidences: usize,
        #[serde(with = "serde_str")]
        value: Rational,
    },
    Uniform {
        edges: Vec<Edge>,
        #[serde(with = "serde_str")]
        value: Rational,
    },
    Flow {
        vertices: Vec<usize>,
        values: Vec<ValueDoc>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FractionalDoc {
    schema: String,
    version: u32,
    values: Vec<ValueDoc>,
    #[serde(default)]
    components: Vec<ComponentDoc>,
}

fn value_docs<'a>(values: impl Iterator<Item = (Edge, &'a Rational)>) -> Vec<ValueDoc> {
    values
        .map(|((u, v), q)| ValueDoc { u, v, value: q.clone() })
        .collect()
}

pub fn export_fractional(fm: &FractionalMatching) -> String {
    let components = fm
        .components()
        .iter()
        .map(|c| match c {
            Component::Pair(edge) => ComponentDoc::Pair { edge: *edge },
            Component::Walk {
                edges,
                incidences,
                value,
            } => ComponentDoc::Walk {
                edges: edges.clone(),
                incidences: *incidences,
                value: value.clone(),
            },
            Component::Uniform { edges, value } => ComponentDoc::Uniform {
                edges: edges.clone(),
                value: value.clone(),
            },
            Component::Flow { vertices, values } => ComponentDoc::Flow {
                vertices: vertices.clone(),
                values: value_docs(values.iter().map(|(e, q)| (*e, q))),
            },
        })
        .collect();
    render(&FractionalDoc {
        schema: FRACTIONAL_SCHEMA.into(),
        version: SCHEMA_VERSION,
        values: value_docs(fm.support()),
        components,
    })
}

/// Values plus, when stored, the construction record used by discretization.
pub fn import_fractional(text: &str) -> Result<FractionalMatching> {
    let doc: FractionalDoc = parse(text)?;
    check_header(&doc.schema, doc.version, FRACTIONAL_SCHEMA)?;
    let values = doc.values.into_iter().map(|d| ((d.u, d.v), d.value));
    let plain = FractionalMatching::from_values(values);
    if doc.components.is_empty() {
        return Ok(plain);
    }
    let components = doc
        .components
        .into_iter()
        .map(|c| match c {
            ComponentDoc::Pair { edge } => Component::Pair(edge),
            ComponentDoc::Walk {
                edges,
                incidences,
                value,
            } => Component::Walk {
                edges,
                incidences,
                value,
            },
            ComponentDoc::Uniform { edges, value } => Component::Uniform { edges, value },
            ComponentDoc::Flow { vertices, values } => Component::Flow {
                vertices,
                values: values.into_iter().map(|d| ((d.u, d.v), d.value)).collect(),
            },
        })
        .collect();
    Ok(plain.with_components(components))
}

/// Undirected DOT with one labelled node per vertex.
pub fn to_dot(graph: &Graph, name: &str, label: impl Fn(usize) -> String) -> String {
    let mut out = format!("graph \"{}\" {{\n", escape(name));
    for v in 0..graph.num_vertices() {
        out.push_str(&format!("  {v} [label=\"{}\"];\n", escape(&label(v))));
    }
    for (u, v) in graph.edges() {
        out.push_str(&format!("  {u} -- {v};\n"));
    }
    out.push_str("}\n");
    out
}

fn escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Gadget vertices labelled `(x,S)`.
pub fn gadget_dot(gadget: &GadgetGraph) -> String {
    to_dot(gadget.graph(), "gadget", |v| gadget.label(v))
}

/// Blowup vertices labelled `⟨v,i⟩`; refuses graphs beyond the materialization cap.
pub fn blowup_dot(blowup: &BlowupGraph<'_>) -> Result<String> {
    let graph = blowup.to_graph()?;
    Ok(to_dot(&graph, "blowup", |id| {
        let c = blowup.project(id);
        format!("⟨{},{}⟩", c.base, c.index)
    }))
}
