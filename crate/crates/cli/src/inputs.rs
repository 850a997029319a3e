//! File loading and model assembly shared by the subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use betagraph_core::beta_models::{ModelSpec, ModelVariant};
use betagraph_core::graph_data::{
    parse_covariates_csv, parse_dense_csv, parse_edge_counts_json, CovariateDesign,
    GraphObservations, PanelObservations, TimeWindow,
};
use betagraph_core::{Error, Result};

/// The `--model` flag's vocabulary.
pub fn parse_model(s: &str) -> std::result::Result<ModelVariant, String> {
    match s {
        "undirected" => Ok(ModelVariant::Undirected),
        "directed" => Ok(ModelVariant::Directed),
        "generalized" => Ok(ModelVariant::Generalized),
        "generalized-undirected" => Ok(ModelVariant::GeneralizedUndirected),
        other => Err(format!(
            "unknown model `{other}` (expected undirected, directed, generalized, or \
             generalized-undirected)"
        )),
    }
}

pub fn model_name(variant: ModelVariant) -> &'static str {
    match variant {
        ModelVariant::Undirected => "undirected",
        ModelVariant::Directed => "directed",
        ModelVariant::Generalized => "generalized",
        ModelVariant::GeneralizedUndirected => "generalized-undirected",
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

/// Reads one graph file, sniffing the format: sparse JSON when the first
/// non-blank byte is `{`, dense CSV otherwise.
pub fn read_graph(path: &Path) -> Result<GraphObservations> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('{') {
        parse_edge_counts_json(&text)
    } else {
        parse_dense_csv(&text)
    }
}

/// Reads a covariate CSV, treating the first line as a header when any of
/// its cells is not a number.
pub fn read_design(path: &Path) -> Result<CovariateDesign> {
    let text = read_text(path)?;
    let has_header = text
        .lines()
        .find(|line| !line.trim().is_empty())
        .map(|line| line.split(',').any(|cell| cell.trim().parse::<f64>().is_err()))
        .unwrap_or(false);
    parse_covariates_csv(&text, has_header)
}

/// Assembles the observed panel from graph files and an optional covariate
/// design; without one, every graph shares the constant covariate.
pub fn load_panel(data: &[PathBuf], covariates: Option<&PathBuf>) -> Result<PanelObservations> {
    let mut graphs = Vec::with_capacity(data.len());
    for path in data {
        graphs.push(read_graph(path)?);
    }
    let design = match covariates {
        Some(path) => read_design(path)?,
        None => CovariateDesign::constant_one(graphs.len()),
    };
    PanelObservations::new(graphs, design)
}

/// Builds the model spec for a loaded panel and checks they agree.
pub fn resolve_spec(variant: ModelVariant, panel: &PanelObservations) -> Result<ModelSpec> {
    if !variant.is_generalized() && (panel.num_graphs() != 1 || panel.design().dim() != 1) {
        return Err(Error::ShapeMismatch {
            message: format!(
                "the {} model takes exactly one graph and no covariates",
                model_name(variant)
            ),
        });
    }
    let spec = ModelSpec::new(variant, panel.n(), panel.design().dim())?;
    spec.check_panel(panel)?;
    Ok(spec)
}

/// Reads a parameter file: a JSON array of numbers in slot order.
pub fn read_params(path: &Path) -> Result<Vec<f64>> {
    let text = read_text(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Recovers the node count implied by a parameter vector's length and
/// builds the matching spec.
pub fn spec_for_params(
    variant: ModelVariant,
    len: usize,
    covariate_dim: usize,
) -> Result<ModelSpec> {
    let k = covariate_dim.max(1);
    if len == 0 || len % k != 0 {
        return Err(Error::ShapeMismatch {
            message: format!(
                "parameter length {len} is not a positive multiple of the covariate dimension {k}"
            ),
        });
    }
    let per_coordinate = len / k;
    let n = match variant {
        ModelVariant::Undirected | ModelVariant::GeneralizedUndirected => per_coordinate,
        ModelVariant::Directed | ModelVariant::Generalized => {
            if per_coordinate % 2 == 0 {
                return Err(Error::ShapeMismatch {
                    message: format!(
                        "directed layouts hold 2n-1 slots per covariate coordinate; \
                         {per_coordinate} cannot be one"
                    ),
                });
            }
            (per_coordinate + 1) / 2
        }
    };
    ModelSpec::new(variant, n, k)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WindowEntry {
    Span(i64, i64),
    Full {
        start: i64,
        end: i64,
        #[serde(default)]
        graph: Option<usize>,
    },
}

/// Reads a JSON array of time windows. Each entry is either a `[start, end)`
/// pair, binned into its own graph, or a `{start, end, graph}` object whose
/// explicit index lets several windows pool into one graph.
pub fn read_windows(path: &Path) -> Result<Vec<TimeWindow>> {
    let text = read_text(path)?;
    let entries: Vec<WindowEntry> = serde_json::from_str(&text)?;
    Ok(entries
        .into_iter()
        .enumerate()
        .map(|(index, entry)| match entry {
            WindowEntry::Span(start, end) => TimeWindow { start, end, graph: index },
            WindowEntry::Full { start, end, graph } => {
                TimeWindow { start, end, graph: graph.unwrap_or(index) }
            }
        })
        .collect())
}

/// Reads a node whitelist: one id per line, blank lines skipped.
pub fn read_whitelist(path: &Path) -> Result<Vec<String>> {
    let text = read_text(path)?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|line| !line.is_empty())
        .map(String::from)
        .collect())
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;

    fn temp_file(contents: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().expect("temp file");
        file.write_all(contents.as_bytes()).expect("write temp file");
        file
    }

    #[test]
    fn graph_format_is_sniffed_from_the_first_byte() {
        let json = temp_file(
            "\n  {\"n\": 2, \"directed\": false, \
             \"counts\": [{\"i\": 0, \"j\": 1, \"y\": 1, \"trials\": 3}]}",
        );
        let g = read_graph(json.path()).expect("json graph loads");
        assert_eq!(g.trials()[(0, 1)], 3);

        let csv = temp_file("n,directed\n2,false\ny\n0,1\n1,0\ntrials\n0,3\n3,0\n");
        let g = read_graph(csv.path()).expect("csv graph loads");
        assert_eq!(g.y()[(1, 0)], 1);
    }

    #[test]
    fn covariate_headers_are_detected() {
        let with_header = temp_file("intercept,exposure\n1,0\n1,1\n");
        assert_eq!(read_design(with_header.path()).expect("loads").num_graphs(), 2);
        let without = temp_file("1,0\n1,1\n1,2\n");
        assert_eq!(read_design(without.path()).expect("loads").num_graphs(), 3);
    }

    #[test]
    fn window_entries_take_both_shapes() {
        let file = temp_file(
            "[[0, 60], {\"start\": 60, \"end\": 120}, \
             {\"start\": 120, \"end\": 180, \"graph\": 1}]",
        );
        let windows = read_windows(file.path()).expect("windows parse");
        assert_eq!(windows.len(), 3);
        assert_eq!(windows[0], TimeWindow { start: 0, end: 60, graph: 0 });
        assert_eq!(windows[1].graph, 1);
        assert_eq!(windows[2].graph, 1);
    }

    #[test]
    fn parameter_length_fixes_the_node_count() {
        let spec = spec_for_params(ModelVariant::Undirected, 10, 1).expect("undirected");
        assert_eq!(spec.n(), 10);
        let spec = spec_for_params(ModelVariant::Directed, 9, 1).expect("directed");
        assert_eq!(spec.n(), 5);
        let spec = spec_for_params(ModelVariant::Generalized, 10, 2).expect("generalized");
        assert_eq!(spec.n(), 3);
        let spec =
            spec_for_params(ModelVariant::GeneralizedUndirected, 8, 2).expect("tied covariate");
        assert_eq!(spec.n(), 4);
        assert!(spec_for_params(ModelVariant::Directed, 8, 1).is_err());
        assert!(spec_for_params(ModelVariant::Generalized, 7, 2).is_err());
    }

    #[test]
    fn model_names_round_trip() {
        for variant in [
            ModelVariant::Undirected,
            ModelVariant::Directed,
            ModelVariant::Generalized,
            ModelVariant::GeneralizedUndirected,
        ] {
            assert_eq!(parse_model(model_name(variant)), Ok(variant));
        }
        assert!(parse_model("bipartite").is_err());
    }
}
