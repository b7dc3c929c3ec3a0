//! Text formats: contour paths as `t,value` CSV and trees as JSON lists of
//! `{word, alpha, omega}` records.

use super::{ChronologicalTree, ChronosError, ContourPath, VertexRecord};

pub fn contour_to_csv(path: &ContourPath) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "value"]).expect("in-memory write");
    for (t, v) in path.points() {
        w.write_record([t.to_string(), v.to_string()]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf8")
}

/// Reads breakpoints from CSV with a `t,value` header.
pub fn contour_from_csv(src: &str) -> Result<ContourPath, ChronosError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(src.as_bytes());
    let mut points = Vec::new();
    for row in r.deserialize::<(f64, f64)>() {
        points.push(row.map_err(|e| ChronosError::Parse(e.to_string()))?);
    }
    ContourPath::new(points)
}

pub fn tree_to_json(tree: &ChronologicalTree) -> String {
    serde_json::to_string_pretty(&tree.records()).expect("records serialise")
}

pub fn tree_from_json(src: &str) -> Result<ChronologicalTree, ChronosError> {
    let records: Vec<VertexRecord> = serde_json::from_str(src).map_err(|e| ChronosError::Parse(e.to_string()))?;
    ChronologicalTree::from_records(&records)
}
