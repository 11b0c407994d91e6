//! File formats: multiplex CSV ingestion (edgelist and stacked-adjacency),
//! covariate and coordinate CSVs, and chain serialization.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use ndarray::Array2;

use crate::metrics::ParamSummary;
use crate::model::ModelSpec;
use crate::multiplex::Multiplex;
use crate::sampler::{ChainOutput, EffectDraw, StoredState};
use crate::{Error, Result};

/// Supported multiplex file layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    /// Rows (view, from, to, value) with value ∈ {0, 1, NA}; unlisted dyads
    /// default to an observed 0.
    EdgelistCsv,
    /// One n×n block per view, stacked, with a leading view-id column.
    AdjacencyCsv,
}

#[derive(Clone, Copy, PartialEq)]
enum CellValue {
    Zero,
    One,
    Missing,
}

fn parse_cell(raw: &str) -> Result<CellValue> {
    match raw.trim() {
        "0" => Ok(CellValue::Zero),
        "1" => Ok(CellValue::One),
        "NA" => Ok(CellValue::Missing),
        other => Err(Error::data(format!(
            "non-binary value '{other}' (expected 0, 1 or NA)"
        ))),
    }
}

/// Load a multiplex from disk. `directed` declares how the file is to be
/// read; undirected edgelists carry each dyad once and are mirrored, and
/// undirected adjacency blocks must be symmetric. `nodes`, when given,
/// fixes the node set; labels outside it are rejected.
pub fn load_multiplex(
    path: &Path,
    format: FileFormat,
    directed: bool,
    nodes: Option<&[String]>,
) -> Result<Multiplex> {
    match format {
        FileFormat::EdgelistCsv => load_edgelist(path, directed, nodes),
        FileFormat::AdjacencyCsv => load_adjacency(path, directed),
    }
}

fn load_edgelist(path: &Path, directed: bool, nodes: Option<&[String]>) -> Result<Multiplex> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let header = reader.headers()?.clone();
    if header.len() < 4 {
        return Err(Error::data(
            "edgelist needs columns (view, from, to, value)",
        ));
    }
    struct Row {
        view: String,
        from: String,
        to: String,
        value: CellValue,
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != 4 {
            return Err(Error::data(format!(
                "edgelist row has {} fields, expected 4",
                record.len()
            )));
        }
        rows.push(Row {
            view: record[0].trim().to_string(),
            from: record[1].trim().to_string(),
            to: record[2].trim().to_string(),
            value: parse_cell(&record[3])?,
        });
    }
    if rows.is_empty() {
        return Err(Error::data("empty file: no edge rows"));
    }

    let mut node_index: HashMap<String, usize> = HashMap::new();
    let mut node_labels: Vec<String> = Vec::new();
    if let Some(known) = nodes {
        for label in known {
            node_index.insert(label.clone(), node_labels.len());
            node_labels.push(label.clone());
        }
    }
    let mut view_index: HashMap<String, usize> = HashMap::new();
    let mut view_labels: Vec<String> = Vec::new();
    let fixed_nodes = nodes.is_some();
    let resolve_node = |label: &str,
                            node_index: &mut HashMap<String, usize>,
                            node_labels: &mut Vec<String>|
     -> Result<usize> {
        if let Some(&i) = node_index.get(label) {
            return Ok(i);
        }
        if fixed_nodes {
            return Err(Error::data(format!("unknown node label '{label}'")));
        }
        let i = node_labels.len();
        node_index.insert(label.to_string(), i);
        node_labels.push(label.to_string());
        Ok(i)
    };

    struct Entry {
        k: usize,
        i: usize,
        j: usize,
        value: CellValue,
    }
    let mut entries = Vec::with_capacity(rows.len());
    for row in &rows {
        let k = match view_index.get(&row.view) {
            Some(&k) => k,
            None => {
                let k = view_labels.len();
                view_index.insert(row.view.clone(), k);
                view_labels.push(row.view.clone());
                k
            }
        };
        let i = resolve_node(&row.from, &mut node_index, &mut node_labels)?;
        let j = resolve_node(&row.to, &mut node_index, &mut node_labels)?;
        if i == j {
            return Err(Error::data(format!(
                "self-loop on node '{}' in view '{}'",
                row.from, row.view
            )));
        }
        entries.push(Entry {
            k,
            i,
            j,
            value: row.value,
        });
    }

    let n = node_labels.len();
    let k = view_labels.len();
    if n < 2 {
        return Err(Error::data("edgelist mentions fewer than two nodes"));
    }
    let mut y = vec![Array2::<u8>::zeros((n, n)); k];
    let mut h = vec![Array2::<u8>::ones((n, n)); k];
    let mut seen: HashSet<(usize, usize, usize)> = HashSet::new();
    for e in &entries {
        let key = if directed || e.i < e.j {
            (e.k, e.i, e.j)
        } else {
            (e.k, e.j, e.i)
        };
        if !seen.insert(key) {
            return Err(Error::data(format!(
                "duplicate dyad ({}, {}) in view '{}'",
                node_labels[e.i], node_labels[e.j], view_labels[e.k]
            )));
        }
        let apply = |y: &mut Array2<u8>, h: &mut Array2<u8>, i: usize, j: usize| match e.value {
            CellValue::Zero => {
                y[[i, j]] = 0;
            }
            CellValue::One => {
                y[[i, j]] = 1;
            }
            CellValue::Missing => {
                h[[i, j]] = 0;
            }
        };
        apply(&mut y[e.k], &mut h[e.k], e.i, e.j);
        if !directed {
            apply(&mut y[e.k], &mut h[e.k], e.j, e.i);
        }
    }
    Multiplex::new(y, h, vec![], node_labels, view_labels, directed)
}

fn load_adjacency(path: &Path, directed: bool) -> Result<Multiplex> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let header = reader.headers()?.clone();
    if header.len() < 3 || header[0].trim() != "view" {
        return Err(Error::data(
            "adjacency file needs a header 'view,<node labels...>'",
        ));
    }
    let node_labels: Vec<String> = header.iter().skip(1).map(|s| s.trim().to_string()).collect();
    let n = node_labels.len();
    let mut blocks: Vec<(String, Vec<Vec<CellValue>>)> = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != n + 1 {
            return Err(Error::data(format!(
                "ragged matrix: row has {} entries, expected {}",
                record.len().saturating_sub(1),
                n
            )));
        }
        let view = record[0].trim().to_string();
        let cells: Result<Vec<CellValue>> =
            record.iter().skip(1).map(parse_cell).collect();
        let cells = cells?;
        match blocks.last_mut() {
            Some((label, rows)) if *label == view && rows.len() < n => rows.push(cells),
            _ => blocks.push((view, vec![cells])),
        }
    }
    if blocks.is_empty() {
        return Err(Error::data("empty file: no adjacency rows"));
    }
    let mut seen_views = HashSet::new();
    let mut y = Vec::new();
    let mut h = Vec::new();
    let mut view_labels = Vec::new();
    for (label, rows) in &blocks {
        if !seen_views.insert(label.clone()) {
            return Err(Error::data(format!(
                "view '{label}' appears in two separate blocks"
            )));
        }
        if rows.len() != n {
            return Err(Error::data(format!(
                "ragged matrix: view '{label}' has {} rows, expected {n}",
                rows.len()
            )));
        }
        let mut yk = Array2::<u8>::zeros((n, n));
        let mut hk = Array2::<u8>::ones((n, n));
        for (i, row) in rows.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                match cell {
                    CellValue::Zero => {}
                    CellValue::One => {
                        if i == j {
                            return Err(Error::data(format!(
                                "self-loop on node '{}' in view '{label}'",
                                node_labels[i]
                            )));
                        }
                        yk[[i, j]] = 1;
                    }
                    CellValue::Missing => hk[[i, j]] = 0,
                }
            }
        }
        y.push(yk);
        h.push(hk);
        view_labels.push(label.clone());
    }
    Multiplex::new(y, h, vec![], node_labels, view_labels, directed)
}

/// Write a multiplex as an edgelist, one row per dyad (dense, so a reload
/// reconstructs the node set and its order exactly). Sparse files that list
/// only 1/NA rows load fine: unlisted dyads default to an observed 0.
/// Undirected multiplexes carry each dyad once.
pub fn write_edgelist(m: &Multiplex, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["view", "from", "to", "value"])?;
    for k in 0..m.n_views() {
        for (i, j) in m.dyads() {
            let value = if !m.observed(k, i, j) {
                "NA"
            } else if m.edge(k, i, j) == 1 {
                "1"
            } else {
                "0"
            };
            w.write_record([
                m.view_labels()[k].as_str(),
                m.node_labels()[i].as_str(),
                m.node_labels()[j].as_str(),
                value,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Write a multiplex as stacked adjacency blocks.
pub fn write_adjacency(m: &Multiplex, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["view".to_string()];
    header.extend(m.node_labels().iter().cloned());
    w.write_record(&header)?;
    for k in 0..m.n_views() {
        for i in 0..m.n_nodes() {
            let mut row = vec![m.view_labels()[k].clone()];
            for j in 0..m.n_nodes() {
                row.push(if i == j {
                    "0".into()
                } else if !m.observed(k, i, j) {
                    "NA".into()
                } else {
                    m.edge(k, i, j).to_string()
                });
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Load dyadic covariates: header (from, to, name_1, …, name_F), one row per
/// dyad; unlisted dyads default to zero. Returns one n×n matrix per
/// covariate plus the covariate names.
pub fn load_covariates(
    path: &Path,
    node_labels: &[String],
    directed: bool,
) -> Result<(Vec<Array2<f64>>, Vec<String>)> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let header = reader.headers()?.clone();
    if header.len() < 3 || header[0].trim() != "from" || header[1].trim() != "to" {
        return Err(Error::data(
            "covariate file needs a header 'from,to,<covariate names...>'",
        ));
    }
    let names: Vec<String> = header.iter().skip(2).map(|s| s.trim().to_string()).collect();
    let f = names.len();
    let n = node_labels.len();
    let index: HashMap<&str, usize> = node_labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut mats = vec![Array2::<f64>::zeros((n, n)); f];
    let mut seen = HashSet::new();
    let mut any = false;
    for record in reader.records() {
        let record = record?;
        any = true;
        if record.len() != f + 2 {
            return Err(Error::data(format!(
                "covariate row has {} values, expected {}",
                record.len().saturating_sub(2),
                f
            )));
        }
        let from = record[0].trim();
        let to = record[1].trim();
        let &i = index
            .get(from)
            .ok_or_else(|| Error::data(format!("unknown node label '{from}'")))?;
        let &j = index
            .get(to)
            .ok_or_else(|| Error::data(format!("unknown node label '{to}'")))?;
        if i == j {
            return Err(Error::data(format!("self-loop covariate on '{from}'")));
        }
        let key = if directed || i < j { (i, j) } else { (j, i) };
        if !seen.insert(key) {
            return Err(Error::data(format!(
                "duplicate covariate row for ({from}, {to})"
            )));
        }
        for (c, raw) in record.iter().skip(2).enumerate() {
            let v: f64 = raw
                .trim()
                .parse()
                .map_err(|_| Error::data(format!("non-numeric covariate '{raw}'")))?;
            mats[c][[i, j]] = v;
            if !directed {
                mats[c][[j, i]] = v;
            }
        }
    }
    if !any {
        return Err(Error::data("empty file: no covariate rows"));
    }
    Ok((mats, names))
}

/// Load an n×p coordinate table with header (label, c1, …, cp), matched to
/// the multiplex node order by label.
pub fn load_coords(path: &Path, node_labels: &[String]) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let header = reader.headers()?.clone();
    if header.len() < 2 {
        return Err(Error::data("coordinate file needs (label, c1, ...)"));
    }
    let p = header.len() - 1;
    let n = node_labels.len();
    let index: HashMap<&str, usize> = node_labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut coords = Array2::<f64>::zeros((n, p));
    let mut filled = vec![false; n];
    for record in reader.records() {
        let record = record?;
        if record.len() != p + 1 {
            return Err(Error::data("ragged coordinate row"));
        }
        let label = record[0].trim();
        let &i = index
            .get(label)
            .ok_or_else(|| Error::data(format!("unknown node label '{label}'")))?;
        if filled[i] {
            return Err(Error::data(format!("duplicate coordinates for '{label}'")));
        }
        filled[i] = true;
        for c in 0..p {
            coords[[i, c]] = record[c + 1]
                .trim()
                .parse()
                .map_err(|_| Error::data(format!("non-numeric coordinate '{}'", &record[c + 1])))?;
        }
    }
    if let Some(missing) = filled.iter().position(|f| !f) {
        return Err(Error::data(format!(
            "no coordinates for node '{}'",
            node_labels[missing]
        )));
    }
    Ok(coords)
}

/// Column names of the wide chain CSV for a given geometry.
pub fn chain_columns(spec: &ModelSpec, n: usize, k: usize, store_latent: bool) -> Vec<String> {
    let mut cols = vec!["sweep".to_string()];
    for v in 1..=k {
        cols.push(format!("alpha.{v}"));
    }
    for v in 1..=k {
        cols.push(format!("beta.{v}"));
    }
    let theta_base = if spec.directed { "theta" } else { "delta" };
    match spec.sender {
        crate::model::EffectType::Null => {}
        crate::model::EffectType::Constant => {
            for i in 1..=n {
                cols.push(format!("{theta_base}.{i}"));
            }
        }
        crate::model::EffectType::Variable => {
            for i in 1..=n {
                for v in 1..=k {
                    cols.push(format!("{theta_base}.{i}.{v}"));
                }
            }
        }
    }
    if spec.directed {
        match spec.receiver {
            crate::model::EffectType::Null => {}
            crate::model::EffectType::Constant => {
                for i in 1..=n {
                    cols.push(format!("gamma.{i}"));
                }
            }
            crate::model::EffectType::Variable => {
                for i in 1..=n {
                    for v in 1..=k {
                        cols.push(format!("gamma.{i}.{v}"));
                    }
                }
            }
        }
    }
    for f in 1..=spec.f {
        cols.push(format!("lambda.{f}"));
    }
    cols.push("mu_alpha".into());
    cols.push("mu_beta".into());
    cols.push("sigma2_alpha".into());
    cols.push("sigma2_beta".into());
    for f in 1..=spec.f {
        cols.push(format!("mu_lambda.{f}"));
        cols.push(format!("sigma2_lambda.{f}"));
    }
    if store_latent {
        for i in 1..=n {
            for c in 1..=spec.p {
                cols.push(format!("z.{i}.{c}"));
            }
        }
    }
    cols
}

fn effect_values(draw: &EffectDraw, n: usize, k: usize) -> Vec<f64> {
    match draw {
        EffectDraw::Null => vec![],
        EffectDraw::Constant(v) => v.clone(),
        EffectDraw::Variable(mat) => {
            let mut out = Vec::with_capacity(n * k);
            for i in 0..n {
                for v in 0..k {
                    out.push(mat[[i, v]]);
                }
            }
            out
        }
    }
}

/// Write the chain in wide format: one row per stored sweep.
pub fn write_chain_csv(chain: &ChainOutput, path: &Path) -> Result<()> {
    let spec = &chain.spec;
    let (n, k) = (chain.n_nodes, chain.n_views);
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(chain_columns(spec, n, k, chain.config.store_latent))?;
    for s in &chain.samples {
        let mut row: Vec<String> = vec![s.sweep.to_string()];
        let push_all = |row: &mut Vec<String>, values: &[f64]| {
            for v in values {
                row.push(v.to_string());
            }
        };
        push_all(&mut row, &s.alpha);
        push_all(&mut row, &s.beta);
        push_all(&mut row, &effect_values(&s.theta, n, k));
        if spec.directed {
            push_all(&mut row, &effect_values(&s.gamma, n, k));
        }
        push_all(&mut row, &s.lambda);
        push_all(&mut row, &[s.mu_alpha, s.mu_beta, s.sigma2_alpha, s.sigma2_beta]);
        for f in 0..spec.f {
            push_all(&mut row, &[s.mu_lambda[f], s.sigma2_lambda[f]]);
        }
        if let Some(z) = &s.z {
            for i in 0..n {
                for c in 0..spec.p {
                    row.push(z[[i, c]].to_string());
                }
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a wide-format chain CSV back into stored states. The header must
/// match the geometry exactly.
pub fn read_chain_csv(
    path: &Path,
    spec: &ModelSpec,
    n: usize,
    k: usize,
) -> Result<Vec<StoredState>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(|s| s.to_string()).collect();
    let with_z = chain_columns(spec, n, k, true);
    let without_z = chain_columns(spec, n, k, false);
    let store_latent = if header == with_z {
        true
    } else if header == without_z {
        false
    } else {
        return Err(Error::data(
            "chain header does not match the model geometry from the manifest",
        ));
    };
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let mut pos = 0usize;
        let mut next = || -> Result<f64> {
            let v = record[pos]
                .parse()
                .map_err(|_| Error::data(format!("non-numeric chain value '{}'", &record[pos])))?;
            pos += 1;
            Ok(v)
        };
        let sweep = next()? as usize;
        let alpha: Vec<f64> = (0..k).map(|_| next()).collect::<Result<_>>()?;
        let beta: Vec<f64> = (0..k).map(|_| next()).collect::<Result<_>>()?;
        let theta = read_effect(&mut next, spec.sender, n, k)?;
        let gamma = if spec.directed {
            read_effect(&mut next, spec.receiver, n, k)?
        } else {
            EffectDraw::Null
        };
        let lambda: Vec<f64> = (0..spec.f).map(|_| next()).collect::<Result<_>>()?;
        let mu_alpha = next()?;
        let mu_beta = next()?;
        let sigma2_alpha = next()?;
        let sigma2_beta = next()?;
        let mut mu_lambda = Vec::with_capacity(spec.f);
        let mut sigma2_lambda = Vec::with_capacity(spec.f);
        for _ in 0..spec.f {
            mu_lambda.push(next()?);
            sigma2_lambda.push(next()?);
        }
        let z = if store_latent {
            let mut z = Array2::zeros((n, spec.p));
            for i in 0..n {
                for c in 0..spec.p {
                    z[[i, c]] = next()?;
                }
            }
            Some(z)
        } else {
            None
        };
        out.push(StoredState {
            sweep,
            alpha,
            beta,
            theta,
            gamma,
            lambda,
            z,
            mu_alpha,
            mu_beta,
            sigma2_alpha,
            sigma2_beta,
            mu_lambda,
            sigma2_lambda,
        });
    }
    Ok(out)
}

fn read_effect(
    next: &mut dyn FnMut() -> Result<f64>,
    effect: crate::model::EffectType,
    n: usize,
    k: usize,
) -> Result<EffectDraw> {
    match effect {
        crate::model::EffectType::Null => Ok(EffectDraw::Null),
        crate::model::EffectType::Constant => {
            let v: Vec<f64> = (0..n).map(|_| next()).collect::<Result<_>>()?;
            Ok(EffectDraw::Constant(v))
        }
        crate::model::EffectType::Variable => {
            let mut mat = Array2::zeros((n, k));
            for i in 0..n {
                for v in 0..k {
                    mat[[i, v]] = next()?;
                }
            }
            Ok(EffectDraw::Variable(mat))
        }
    }
}

/// Posterior summaries as CSV; pinned parameters print "-" for the sd.
pub fn write_summaries_csv(summaries: &[ParamSummary], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["parameter", "mean", "sd", "q2.5", "q97.5"])?;
    for s in summaries {
        w.write_record([
            s.name.clone(),
            s.mean.to_string(),
            s.sd.map_or_else(|| "-".to_string(), |v| v.to_string()),
            s.q025.to_string(),
            s.q975.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Recovery report as long-format CSV (one row per view).
pub fn write_recovery_csv(report: &crate::metrics::RecoveryReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "view",
        "dcor_probabilities",
        "spearman_sender",
        "spearman_receiver",
        "procrustes_z",
    ])?;
    for v in &report.per_view {
        w.write_record([
            (v.view + 1).to_string(),
            v.dcor_probabilities.to_string(),
            v.spearman_sender.map_or_else(String::new, |x| x.to_string()),
            v.spearman_receiver
                .map_or_else(String::new, |x| x.to_string()),
            report.procrustes_z.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Long-format trace CSV (sweep, parameter, value) for external plotting.
pub fn write_long_traces(chain: &ChainOutput, path: &Path) -> Result<()> {
    let spec = &chain.spec;
    let (n, k) = (chain.n_nodes, chain.n_views);
    let cols = chain_columns(spec, n, k, chain.config.store_latent);
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["sweep", "parameter", "value"])?;
    for s in &chain.samples {
        let mut values: Vec<f64> = Vec::with_capacity(cols.len() - 1);
        values.extend(&s.alpha);
        values.extend(&s.beta);
        values.extend(effect_values(&s.theta, n, k));
        if spec.directed {
            values.extend(effect_values(&s.gamma, n, k));
        }
        values.extend(&s.lambda);
        values.extend([s.mu_alpha, s.mu_beta, s.sigma2_alpha, s.sigma2_beta]);
        for f in 0..spec.f {
            values.extend([s.mu_lambda[f], s.sigma2_lambda[f]]);
        }
        if let Some(z) = &s.z {
            for i in 0..n {
                for c in 0..spec.p {
                    values.push(z[[i, c]]);
                }
            }
        }
        for (name, v) in cols.iter().skip(1).zip(values) {
            w.write_record([s.sweep.to_string(), name.clone(), v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
