//! JSON input loading. Three structured kinds share a `"kind"` tag:
//!
//! - `poset`: `{"kind":"poset","elements":[...],"covers":[["b","c"],...],
//!   "psi":{"a":"2/1",...}}` — `psi` is an optional element-weight map.
//! - `matroid`: `{"kind":"matroid","format":"graphic","vertices":4,
//!   "edges":[[0,1],...]}` or `{"kind":"matroid","format":"bases",
//!   "ground":6,"bases":[[0,1,2],...]}`.
//! - `complex`: `{"kind":"complex","d":3,"parts":[["F1","G1"],...],
//!   "facets":[{"v":["F1","F2","F3"],"w":"1/4"}]}`.
//! - `graph`: `{"kind":"graph","nx":7,"ny":7,"edges":[[0,1],...]}` —
//!   a bipartite graph with 0-based indices on each side.
//!
//! Rational fields accept `"p/q"` strings (exact) or JSON numbers;
//! non-integer numbers are converted to their exact binary value and
//! the input is tagged inexact.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde_json::Value;

use pathcomplex::complex::PathComplex;
use pathcomplex::error::{Error, Result};
use pathcomplex::matroid::{construct_matroid, flat_lattice, Matroid, MatroidSpec};
use pathcomplex::order::{
    birkhoff_lattice, build_poset, is_order_reversing, lift_flat_weight, Caps, ElementWeights,
    Poset, RankedLattice,
};
use pathcomplex::rat::{int, parse_rat, Rat};

/// A parsed input file.
pub enum LoadedInput {
    Poset { poset: Poset, psi: Option<ElementWeights>, inexact: bool },
    Matroid { matroid: Matroid },
    Complex { cx: PathComplex, inexact: bool },
    Graph { nx: usize, ny: usize, edges: Vec<(usize, usize)> },
}

/// How a complex was obtained, for reporting.
pub struct InputMeta {
    pub kind: &'static str,
    /// Whether the element weights reverse the order (poset inputs with
    /// `psi` only).
    pub order_reversing: Option<bool>,
    /// Some weight was given as a float and converted to its exact
    /// binary value.
    pub inexact: bool,
}

fn obj<'v>(v: &'v Value, what: &str) -> Result<&'v serde_json::Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::Input(format!("{what}: expected a JSON object")))
}

fn field<'v>(m: &'v serde_json::Map<String, Value>, key: &str) -> Result<&'v Value> {
    m.get(key).ok_or_else(|| Error::Input(format!("missing field `{key}`")))
}

fn str_of(v: &Value, what: &str) -> Result<String> {
    v.as_str().map(|s| s.to_owned()).ok_or_else(|| Error::Input(format!("{what}: expected a string")))
}

fn usize_of(v: &Value, what: &str) -> Result<usize> {
    v.as_u64().map(|n| n as usize).ok_or_else(|| {
        Error::Input(format!("{what}: expected a nonnegative integer"))
    })
}

/// A rational from a JSON value: `"p/q"` string, integer, or float.
/// Floats map to their exact binary value and set the inexact flag.
pub fn rat_of(v: &Value, inexact: &mut bool) -> Result<Rat> {
    match v {
        Value::String(s) => parse_rat(s),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(int(i))
            } else {
                let f = n
                    .as_f64()
                    .ok_or_else(|| Error::Input(format!("unrepresentable number `{n}`")))?;
                *inexact = true;
                Rat::from_float(f)
                    .ok_or_else(|| Error::Input(format!("non-finite number `{n}`")))
            }
        }
        other => Err(Error::Input(format!("expected a rational, got `{other}`"))),
    }
}

fn pairs_of(v: &Value, what: &str) -> Result<Vec<(String, String)>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Input(format!("{what}: expected an array")))?;
    let mut out = Vec::with_capacity(arr.len());
    for item in arr {
        let pair = item
            .as_array()
            .filter(|p| p.len() == 2)
            .ok_or_else(|| Error::Input(format!("{what}: expected 2-element arrays")))?;
        out.push((str_of(&pair[0], what)?, str_of(&pair[1], what)?));
    }
    Ok(out)
}

fn index_pairs_of(v: &Value, what: &str) -> Result<Vec<(usize, usize)>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Input(format!("{what}: expected an array")))?;
    let mut out = Vec::with_capacity(arr.len());
    for item in arr {
        let pair = item
            .as_array()
            .filter(|p| p.len() == 2)
            .ok_or_else(|| Error::Input(format!("{what}: expected 2-element arrays")))?;
        out.push((usize_of(&pair[0], what)?, usize_of(&pair[1], what)?));
    }
    Ok(out)
}

/// Parses a JSON value into a structured input.
pub fn parse_input(v: &Value) -> Result<LoadedInput> {
    let m = obj(v, "input")?;
    let kind = str_of(field(m, "kind")?, "kind")?;
    match kind.as_str() {
        "poset" => {
            let elements: Vec<String> = field(m, "elements")?
                .as_array()
                .ok_or_else(|| Error::Input("elements: expected an array".into()))?
                .iter()
                .map(|e| str_of(e, "elements"))
                .collect::<Result<_>>()?;
            let covers = pairs_of(field(m, "covers")?, "covers")?;
            let poset = build_poset(&elements, &covers)?;
            let mut inexact = false;
            let psi = match m.get("psi") {
                None | Some(Value::Null) => None,
                Some(p) => {
                    let pm = obj(p, "psi")?;
                    let mut weights: ElementWeights = HashMap::new();
                    for (k, val) in pm {
                        weights.insert(k.clone(), rat_of(val, &mut inexact)?);
                    }
                    Some(weights)
                }
            };
            Ok(LoadedInput::Poset { poset, psi, inexact })
        }
        "matroid" => {
            let format = str_of(field(m, "format")?, "format")?;
            let spec = match format.as_str() {
                "graphic" => MatroidSpec::Graphic {
                    vertices: usize_of(field(m, "vertices")?, "vertices")?,
                    edges: index_pairs_of(field(m, "edges")?, "edges")?,
                },
                "bases" => {
                    let ground = usize_of(field(m, "ground")?, "ground")?;
                    let arr = field(m, "bases")?
                        .as_array()
                        .ok_or_else(|| Error::Input("bases: expected an array".into()))?;
                    let mut bases = Vec::with_capacity(arr.len());
                    for b in arr {
                        let elems = b
                            .as_array()
                            .ok_or_else(|| Error::Input("bases: expected arrays".into()))?
                            .iter()
                            .map(|e| usize_of(e, "bases"))
                            .collect::<Result<Vec<_>>>()?;
                        bases.push(elems);
                    }
                    MatroidSpec::Bases { ground, bases }
                }
                other => {
                    return Err(Error::Input(format!("unknown matroid format `{other}`")))
                }
            };
            Ok(LoadedInput::Matroid { matroid: construct_matroid(&spec)? })
        }
        "complex" => {
            let d = usize_of(field(m, "d")?, "d")?;
            let parts_arr = field(m, "parts")?
                .as_array()
                .ok_or_else(|| Error::Input("parts: expected an array".into()))?;
            if parts_arr.len() != d {
                return Err(Error::Input(format!(
                    "d = {d} but {} parts were given",
                    parts_arr.len()
                )));
            }
            let mut parts = Vec::with_capacity(d);
            for (k, pv) in parts_arr.iter().enumerate() {
                let labels: Vec<String> = pv
                    .as_array()
                    .ok_or_else(|| Error::Input("parts: expected arrays of labels".into()))?
                    .iter()
                    .map(|e| str_of(e, "parts"))
                    .collect::<Result<_>>()?;
                parts.push((k + 1, labels));
            }
            let facets_arr = field(m, "facets")?
                .as_array()
                .ok_or_else(|| Error::Input("facets: expected an array".into()))?;
            let mut inexact = false;
            let mut facets = Vec::with_capacity(facets_arr.len());
            for fv in facets_arr {
                let fm = obj(fv, "facet")?;
                let verts: Vec<String> = field(fm, "v")?
                    .as_array()
                    .ok_or_else(|| Error::Input("facet v: expected an array".into()))?
                    .iter()
                    .map(|e| str_of(e, "facet v"))
                    .collect::<Result<_>>()?;
                let w = match fm.get("w") {
                    None | Some(Value::Null) => int(1),
                    Some(wv) => rat_of(wv, &mut inexact)?,
                };
                facets.push((verts, w));
            }
            Ok(LoadedInput::Complex { cx: PathComplex::new(parts, facets)?, inexact })
        }
        "graph" => Ok(LoadedInput::Graph {
            nx: usize_of(field(m, "nx")?, "nx")?,
            ny: usize_of(field(m, "ny")?, "ny")?,
            edges: index_pairs_of(field(m, "edges")?, "edges")?,
        }),
        other => Err(Error::Input(format!("unknown input kind `{other}`"))),
    }
}

/// Reads and parses an input file.
pub fn load_input(path: &Path) -> Result<LoadedInput> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Input(format!("{}: invalid JSON: {e}", path.display())))?;
    parse_input(&v)
}

/// Flat weights for a lattice from an element-weight map: the weight of
/// a flat is the product of its elements' weights.
pub fn lattice_weights(lat: &RankedLattice, psi: &ElementWeights) -> Result<Vec<Rat>> {
    (0..lat.len())
        .map(|i| lift_flat_weight(lat.base_labels(), lat.flat(i), psi))
        .collect()
}

impl LoadedInput {
    /// The path complex an input denotes: chain complexes of the
    /// Birkhoff lattice (posets, with `psi` lifted to flat weights) or
    /// of the lattice of flats (matroids), or the explicit complex.
    pub fn to_complex(&self, caps: &Caps) -> Result<(PathComplex, InputMeta)> {
        match self {
            LoadedInput::Poset { poset, psi, inexact } => {
                let lat = birkhoff_lattice(poset, caps)?;
                let (weights, order_reversing) = match psi {
                    Some(p) => (
                        Some(lattice_weights(&lat, p)?),
                        Some(is_order_reversing(poset, p)?),
                    ),
                    None => (None, None),
                };
                let cx = pathcomplex::complex::chain_complex(&lat, weights.as_deref())?;
                Ok((cx, InputMeta { kind: "poset", order_reversing, inexact: *inexact }))
            }
            LoadedInput::Matroid { matroid } => {
                let lat = flat_lattice(matroid, caps)?;
                let cx = pathcomplex::complex::chain_complex(&lat, None)?;
                Ok((cx, InputMeta { kind: "matroid", order_reversing: None, inexact: false }))
            }
            LoadedInput::Complex { cx, inexact } => Ok((
                cx.clone(),
                InputMeta { kind: "complex", order_reversing: None, inexact: *inexact },
            )),
            LoadedInput::Graph { .. } => {
                Err(Error::Input("a graph input has no path complex".into()))
            }
        }
    }

    /// The ranked lattice an input denotes, when there is one.
    pub fn to_lattice(&self, caps: &Caps) -> Result<RankedLattice> {
        match self {
            LoadedInput::Poset { poset, .. } => birkhoff_lattice(poset, caps),
            LoadedInput::Matroid { matroid } => flat_lattice(matroid, caps),
            _ => Err(Error::Input("this input kind has no lattice".into())),
        }
    }
}
