//! Problem instances and the `clt` text format.

use std::fmt;

use thiserror::Error;

/// Per-layer sizing and capacity interval.
///
/// `count` bounds how many vertices the layer may use, and every vertex in
/// the layer must have between `cap_lo` and `cap_hi` leaves below it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LayerSpec {
    pub count: u64,
    pub cap_lo: u64,
    pub cap_hi: u64,
}

impl LayerSpec {
    pub fn new(count: u64, cap_lo: u64, cap_hi: u64) -> Self {
        Self { count, cap_lo, cap_hi }
    }
}

/// A constrained layer tree instance: `n0` sources plus one [`LayerSpec`]
/// per layer `1..=lambda`.
///
/// Layer 0 carries the implicit convention `cap_lo = cap_hi = 1` and is
/// never stored. Instances claiming multiple sinks are expressed by adding
/// a synthetic top layer with `count = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    n0: u64,
    layers: Vec<LayerSpec>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("an instance needs at least one layer")]
    NoLayers,
    #[error("an instance needs at least one source")]
    NoSources,
}

impl Instance {
    pub fn new(n0: u64, layers: Vec<LayerSpec>) -> Result<Self, ModelError> {
        if layers.is_empty() {
            return Err(ModelError::NoLayers);
        }
        if n0 == 0 {
            return Err(ModelError::NoSources);
        }
        Ok(Self { n0, layers })
    }

    pub fn sources(&self) -> u64 {
        self.n0
    }

    pub fn lambda(&self) -> usize {
        self.layers.len()
    }

    /// Layers `1..=lambda`, in order.
    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    /// The spec of layer `i` for `i` in `1..=lambda`.
    pub fn layer(&self, i: usize) -> &LayerSpec {
        &self.layers[i - 1]
    }

    /// Vertex budget of layer `i`, with `count(0) = n0`.
    pub fn count(&self, i: usize) -> u64 {
        if i == 0 { self.n0 } else { self.layers[i - 1].count }
    }

    /// Lower capacity of layer `i`, with the layer-0 convention `1`.
    pub fn cap_lo(&self, i: usize) -> u64 {
        if i == 0 { 1 } else { self.layers[i - 1].cap_lo }
    }

    /// Upper capacity of layer `i`, with the layer-0 convention `1`.
    pub fn cap_hi(&self, i: usize) -> u64 {
        if i == 0 { 1 } else { self.layers[i - 1].cap_hi }
    }

    /// Rewrites the instance so that counts are non-increasing and both
    /// capacities are non-decreasing with the layer index. Feasibility is
    /// preserved in both directions. Runs in O(lambda).
    ///
    /// The result may contain an empty capacity interval; see
    /// [`Instance::capacity_conflict`].
    pub fn normalize(&self) -> Instance {
        let mut layers = self.layers.clone();
        let mut prev_count = self.n0;
        let mut prev_lo = 1u64;
        for spec in layers.iter_mut() {
            spec.count = spec.count.min(prev_count);
            spec.cap_lo = spec.cap_lo.max(prev_lo);
            prev_count = spec.count;
            prev_lo = spec.cap_lo;
        }
        for i in (0..layers.len().saturating_sub(1)).rev() {
            layers[i].cap_hi = layers[i].cap_hi.min(layers[i + 1].cap_hi);
        }
        Instance { n0: self.n0, layers }
    }

    /// First layer (1-based) whose capacity interval is empty, if any.
    /// An instance with such a layer is trivially infeasible.
    pub fn capacity_conflict(&self) -> Option<usize> {
        self.layers
            .iter()
            .position(|s| s.cap_lo > s.cap_hi)
            .map(|i| i + 1)
    }

    pub fn is_normalized(&self) -> bool {
        let mut prev_count = self.n0;
        let mut prev_lo = 1u64;
        let mut prev_hi = 0u64;
        for (i, spec) in self.layers.iter().enumerate() {
            if spec.count > prev_count || spec.cap_lo < prev_lo {
                return false;
            }
            if i > 0 && spec.cap_hi < prev_hi {
                return false;
            }
            prev_count = spec.count;
            prev_lo = spec.cap_lo;
            prev_hi = spec.cap_hi;
        }
        true
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CltParseError {
    #[error("line {line}: expected header `clt 1`")]
    BadHeader { line: usize },
    #[error("line {line}: unsupported format version {version}")]
    BadVersion { line: usize, version: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount { line: usize, expected: usize, found: usize },
    #[error("line {line}: invalid number `{token}`")]
    BadNumber { line: usize, token: String },
    #[error("line {line}: lower capacity {lo} exceeds upper capacity {hi}")]
    CapacityOrder { line: usize, lo: u64, hi: u64 },
    #[error("line {line}: {source}")]
    Model { source: ModelError, line: usize },
    #[error("expected {expected} layer lines, found {found}")]
    MissingLayers { expected: usize, found: usize },
    #[error("line {line}: trailing content after last layer")]
    TrailingContent { line: usize },
}

fn parse_u64(token: &str, line: usize) -> Result<u64, CltParseError> {
    // Explicitly reject signs so `-3` reports as a bad number, not io noise.
    if token.starts_with('+') || token.starts_with('-') {
        return Err(CltParseError::BadNumber { line, token: token.to_string() });
    }
    token
        .parse::<u64>()
        .map_err(|_| CltParseError::BadNumber { line, token: token.to_string() })
}

/// Parses the `clt` text format:
///
/// ```text
/// clt 1
/// <lambda> <n0>
/// <n_i> <l_i> <u_i>     (one line per layer, i = 1..lambda)
/// ```
pub fn read_instance(text: &str) -> Result<Instance, CltParseError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(CltParseError::BadHeader { line: 1 })?;
    let mut head = header.split_ascii_whitespace();
    match (head.next(), head.next(), head.next()) {
        (Some("clt"), Some("1"), None) => {}
        (Some("clt"), Some(v), None) => {
            return Err(CltParseError::BadVersion { line: 1, version: v.to_string() });
        }
        _ => return Err(CltParseError::BadHeader { line: 1 }),
    }

    let (_, size_line) = lines.next().ok_or(CltParseError::FieldCount {
        line: 2,
        expected: 2,
        found: 0,
    })?;
    let fields: Vec<&str> = size_line.split_ascii_whitespace().collect();
    if fields.len() != 2 {
        return Err(CltParseError::FieldCount { line: 2, expected: 2, found: fields.len() });
    }
    let lambda = parse_u64(fields[0], 2)? as usize;
    let n0 = parse_u64(fields[1], 2)?;

    let mut layers = Vec::with_capacity(lambda);
    for _ in 0..lambda {
        let Some((idx, layer_line)) = lines.next() else {
            return Err(CltParseError::MissingLayers { expected: lambda, found: layers.len() });
        };
        let line = idx + 1;
        let fields: Vec<&str> = layer_line.split_ascii_whitespace().collect();
        if fields.len() != 3 {
            return Err(CltParseError::FieldCount { line, expected: 3, found: fields.len() });
        }
        let count = parse_u64(fields[0], line)?;
        let lo = parse_u64(fields[1], line)?;
        let hi = parse_u64(fields[2], line)?;
        if lo > hi {
            return Err(CltParseError::CapacityOrder { line, lo, hi });
        }
        layers.push(LayerSpec::new(count, lo, hi));
    }
    if let Some((idx, rest)) = lines.next() {
        if !rest.trim().is_empty() {
            return Err(CltParseError::TrailingContent { line: idx + 1 });
        }
    }
    Instance::new(n0, layers).map_err(|e| CltParseError::Model { source: e, line: 2 })
}

/// Canonical serialization; `read_instance(write_instance(i))` is the identity
/// and re-writing a parsed file yields these exact bytes.
pub fn write_instance(inst: &Instance) -> String {
    let mut out = String::new();
    out.push_str("clt 1\n");
    out.push_str(&format!("{} {}\n", inst.lambda(), inst.sources()));
    for spec in inst.layers() {
        out.push_str(&format!("{} {} {}\n", spec.count, spec.cap_lo, spec.cap_hi));
    }
    out
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lambda={} n0={}", self.lambda(), self.sources())?;
        for (i, s) in self.layers.iter().enumerate() {
            write!(f, " L{}:(n={},l={},u={})", i + 1, s.count, s.cap_lo, s.cap_hi)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(n0: u64, layers: &[(u64, u64, u64)]) -> Instance {
        Instance::new(
            n0,
            layers.iter().map(|&(n, l, u)| LayerSpec::new(n, l, u)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn normalize_propagates_all_three_passes() {
        // Forward count pass, forward lower pass, backward upper pass,
        // each checked by hand.
        let raw = inst(10, &[(4, 2, 5), (6, 1, 4)]);
        let norm = raw.normalize();
        assert_eq!(norm, inst(10, &[(4, 2, 4), (4, 2, 4)]));
    }

    #[test]
    fn normalize_is_identity_on_normalized_input() {
        let already = inst(10, &[(4, 2, 4), (4, 2, 4)]);
        assert_eq!(already.normalize(), already);
        assert!(already.is_normalized());
    }

    #[test]
    fn normalize_single_layer_is_identity() {
        let one = inst(5, &[(3, 2, 4)]);
        assert_eq!(one.normalize(), one);
    }

    #[test]
    fn normalize_is_idempotent() {
        let raw = inst(9, &[(7, 0, 9), (3, 4, 5), (5, 1, 2)]);
        let once = raw.normalize();
        assert_eq!(once.normalize(), once);
    }

    #[test]
    fn normalize_can_empty_an_interval() {
        // lower bound 5 propagates up, upper bound 3 propagates down
        let raw = inst(8, &[(4, 5, 8), (2, 0, 3)]);
        let norm = raw.normalize();
        assert_eq!(norm.capacity_conflict(), Some(1));
    }

    #[test]
    fn parse_example_round_trips() {
        let text = "clt 1\n2 10\n4 2 5\n4 2 5\n";
        let parsed = read_instance(text).unwrap();
        assert_eq!(parsed, inst(10, &[(4, 2, 5), (4, 2, 5)]));
        assert_eq!(write_instance(&parsed), text);
    }

    #[test]
    fn parse_rejects_unknown_version() {
        let err = read_instance("clt 2\n1 1\n1 1 1\n").unwrap_err();
        assert_eq!(err, CltParseError::BadVersion { line: 1, version: "2".into() });
    }

    #[test]
    fn parse_rejects_negative_numbers_with_line() {
        let err = read_instance("clt 1\n1 4\n3 -1 2\n").unwrap_err();
        assert_eq!(err, CltParseError::BadNumber { line: 3, token: "-1".into() });
    }

    #[test]
    fn parse_rejects_wrong_field_count() {
        let err = read_instance("clt 1\n1 4\n3 1\n").unwrap_err();
        assert_eq!(err, CltParseError::FieldCount { line: 3, expected: 3, found: 2 });
    }

    #[test]
    fn parse_rejects_inverted_capacities() {
        let err = read_instance("clt 1\n1 4\n3 3 2\n").unwrap_err();
        assert_eq!(err, CltParseError::CapacityOrder { line: 3, lo: 3, hi: 2 });
    }

    #[test]
    fn parse_rejects_missing_layers() {
        let err = read_instance("clt 1\n2 4\n3 1 2\n").unwrap_err();
        assert_eq!(err, CltParseError::MissingLayers { expected: 2, found: 1 });
    }
}
