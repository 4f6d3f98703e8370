//! svmlight / libsvm ingestion, dedup keys, subsampling and splitting.
//!
//! Classification lines look like `label idx:val idx:val ... # comment`
//! with 1-based ascending indices. Ranking lines add a query id:
//! `grade qid:Q idx:val ...`.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::environments::{ClassificationInstance, Query};
use crate::error::{invalid, Error, Result};
use crate::types::{ActionId, ContextVector};

/// Sparse feature vector with 0-based ascending indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseFeatures {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseFeatures {
    pub fn to_dense(&self, m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            if (i as usize) < m {
                out[i as usize] = v;
            }
        }
        out
    }

    /// One past the largest index, i.e. the dimension this vector needs.
    pub fn width(&self) -> usize {
        self.indices.last().map_or(0, |&i| i as usize + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub n_classes: Option<usize>,
    pub grade_range: Option<(u8, u8)>,
    pub n_features: usize,
    pub n_train: usize,
    pub n_test: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmlightDataset {
    /// `(0-based label, features)` in file order.
    pub rows: Vec<(usize, SparseFeatures)>,
    /// Original label text for each remapped id.
    pub label_names: Vec<String>,
    pub meta: DatasetMeta,
}

impl SvmlightDataset {
    /// Dense instances of dimension `m` with dedup keys assigned.
    pub fn instances(&self, m: usize) -> Result<Vec<ClassificationInstance>> {
        if self.rows.is_empty() {
            return invalid("dataset is empty");
        }
        let mut keys = DedupTable::new();
        self.rows
            .iter()
            .map(|(label, f)| {
                let values = f.to_dense(m);
                let key = keys.key_for(&values);
                Ok(ClassificationInstance {
                    features: ContextVector::with_key(values, key)?,
                    label: ActionId(*label),
                })
            })
            .collect()
    }
}

/// A parsed ranking query before densification.
#[derive(Debug, Clone, PartialEq)]
pub struct LtrQuery {
    pub qid: String,
    pub docs: Vec<(u8, SparseFeatures)>,
}

impl LtrQuery {
    pub fn to_query(&self, m: usize, max_docs: usize) -> Result<Query> {
        let docs = &self.docs[..self.docs.len().min(max_docs)];
        let mut features = Vec::with_capacity(docs.len() * m);
        let mut grades = Vec::with_capacity(docs.len());
        for (g, f) in docs {
            features.extend(f.to_dense(m));
            grades.push(*g);
        }
        Query::new(self.qid.clone(), m, features, grades)
    }
}

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        msg: msg.into(),
    })
}

fn strip_comment(line: &str) -> &str {
    let line = line.trim_end_matches('\r');
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_features<'a>(
    tokens: impl Iterator<Item = &'a str>,
    line: usize,
) -> Result<SparseFeatures> {
    let mut out = SparseFeatures::default();
    for tok in tokens {
        let (idx, val) = match tok.split_once(':') {
            Some(p) => p,
            None => return parse_err(line, format!("expected idx:val, got '{tok}'")),
        };
        let idx: u32 = idx.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("bad feature index '{idx}'"),
        })?;
        if idx == 0 {
            return parse_err(line, "feature indices are 1-based");
        }
        let val: f64 = val.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("bad feature value '{val}'"),
        })?;
        if !val.is_finite() {
            return parse_err(line, format!("feature {idx} is not finite"));
        }
        let i = idx - 1;
        if out.indices.last().is_some_and(|&last| i <= last) {
            return parse_err(line, format!("feature index {idx} is not ascending"));
        }
        out.indices.push(i);
        out.values.push(val);
    }
    Ok(out)
}

/// Parses a classification file; labels are remapped to `0..n_classes`
/// in ascending numeric (else lexical) order.
pub fn parse_svmlight<R: BufRead>(input: R) -> Result<SvmlightDataset> {
    let mut raw = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let body = strip_comment(&line);
        let mut tokens = body.split_whitespace();
        let Some(label) = tokens.next() else { continue };
        if label.contains(':') {
            return parse_err(
                line_no,
                format!("missing label, line starts with '{label}'"),
            );
        }
        let features = parse_features(tokens.filter(|t| !t.starts_with("qid:")), line_no)?;
        raw.push((label.to_string(), features));
    }

    let mut names: Vec<String> = raw.iter().map(|(l, _)| l.clone()).collect();
    names.sort_by(|a, b| match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.total_cmp(&y),
        _ => a.cmp(b),
    });
    names.dedup_by(|a, b| match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    });
    let id_of = |label: &str| {
        names
            .iter()
            .position(|n| {
                n == label
                    || matches!((n.parse::<f64>(), label.parse::<f64>()), (Ok(x), Ok(y)) if x == y)
            })
            .unwrap()
    };
    let rows: Vec<(usize, SparseFeatures)> =
        raw.iter().map(|(l, f)| (id_of(l), f.clone())).collect();
    let n_features = rows.iter().map(|(_, f)| f.width()).max().unwrap_or(0);
    let meta = DatasetMeta {
        n_classes: Some(names.len()),
        grade_range: None,
        n_features,
        n_train: rows.len(),
        n_test: 0,
    };
    Ok(SvmlightDataset {
        rows,
        label_names: names,
        meta,
    })
}

/// Parses a ranking file, grouping documents by qid in order of first appearance.
pub fn parse_ltr_svmlight<R: BufRead>(input: R) -> Result<(Vec<LtrQuery>, DatasetMeta)> {
    let mut queries: Vec<LtrQuery> = Vec::new();
    let mut by_qid: HashMap<String, usize> = HashMap::new();
    let (mut lo, mut hi) = (u8::MAX, 0u8);
    let mut n_features = 0;
    let mut n_docs = 0;
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let body = strip_comment(&line);
        let mut tokens = body.split_whitespace();
        let Some(grade) = tokens.next() else { continue };
        let grade: u8 = match grade.parse::<f64>() {
            Ok(g) if g.fract() == 0.0 && (0.0..=4.0).contains(&g) => g as u8,
            Ok(g) => return parse_err(line_no, format!("grade {g} outside 0..=4")),
            Err(_) => return parse_err(line_no, format!("bad grade '{grade}'")),
        };
        let qid = match tokens.next().and_then(|t| t.strip_prefix("qid:")) {
            Some(q) if !q.is_empty() => q.to_string(),
            _ => return parse_err(line_no, "missing qid"),
        };
        let features = parse_features(tokens, line_no)?;
        n_features = n_features.max(features.width());
        lo = lo.min(grade);
        hi = hi.max(grade);
        n_docs += 1;
        let slot = *by_qid.entry(qid.clone()).or_insert_with(|| {
            queries.push(LtrQuery {
                qid,
                docs: Vec::new(),
            });
            queries.len() - 1
        });
        queries[slot].docs.push((grade, features));
    }
    let meta = DatasetMeta {
        n_classes: None,
        grade_range: (n_docs > 0).then_some((lo, hi)),
        n_features,
        n_train: queries.len(),
        n_test: 0,
    };
    Ok((queries, meta))
}

fn write_features<W: Write>(out: &mut W, values: &[f64]) -> Result<()> {
    for (i, v) in values.iter().enumerate() {
        if *v != 0.0 {
            write!(out, " {}:{}", i + 1, v)?;
        }
    }
    Ok(())
}

/// Writes dense instances in svmlight format using `label_names[label]` as the label text.
pub fn write_svmlight<W: Write>(
    instances: &[ClassificationInstance],
    label_names: &[String],
    mut out: W,
) -> Result<()> {
    for inst in instances {
        let name = label_names
            .get(inst.label.0)
            .ok_or_else(|| Error::Validation(format!("no name for label {}", inst.label)))?;
        write!(out, "{name}")?;
        write_features(&mut out, inst.features.values())?;
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_ltr<W: Write>(queries: &[Query], mut out: W) -> Result<()> {
    for q in queries {
        for d in 0..q.n_docs() {
            write!(out, "{} qid:{}", q.grades()[d], q.qid)?;
            write_features(&mut out, q.doc(d))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Hash-consing table: identical vectors share a key, distinct vectors do not.
#[derive(Debug, Clone, Default)]
pub struct DedupTable {
    keys: HashMap<Vec<u64>, u64>,
}

impl DedupTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn key_for(&mut self, values: &[f64]) -> u64 {
        // +0.0 and -0.0 are the same context
        let bits: Vec<u64> = values.iter().map(|&v| (v + 0.0).to_bits()).collect();
        let next = self.keys.len() as u64;
        *self.keys.entry(bits).or_insert(next)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// Uniform sample without replacement of `ceil(fraction · N)` items, in original order.
pub fn subsample<T: Clone, R: Rng + ?Sized>(
    items: &[T],
    fraction: f64,
    rng: &mut R,
) -> Result<Vec<T>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return invalid(format!(
            "subsample fraction must be in (0, 1], got {fraction}"
        ));
    }
    let n = items.len();
    let k = ((fraction * n as f64) - 1e-9).ceil().clamp(0.0, n as f64) as usize;
    let mut picked = index::sample(rng, n, k).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| items[i].clone()).collect())
}

/// Random split into `(train, test)` with `ceil(test_fraction · N)` test items.
pub fn split_train_test<T: Clone, R: Rng + ?Sized>(
    items: &[T],
    test_fraction: f64,
    rng: &mut R,
) -> Result<(Vec<T>, Vec<T>)> {
    if !(0.0..1.0).contains(&test_fraction) {
        return invalid(format!(
            "test fraction must be in [0, 1), got {test_fraction}"
        ));
    }
    let n = items.len();
    let k = ((test_fraction * n as f64) - 1e-9).ceil().max(0.0) as usize;
    let mut is_test = vec![false; n];
    for i in index::sample(rng, n, k.min(n)) {
        is_test[i] = true;
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (item, t) in items.iter().zip(is_test) {
        if t {
            test.push(item.clone());
        } else {
            train.push(item.clone());
        }
    }
    Ok((train, test))
}

/// Per-feature min-max scaling fitted on one set of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a [f64]>) -> Option<Self> {
        let mut it = rows.into_iter();
        let first = it.next()?;
        let (mut lo, mut hi) = (first.to_vec(), first.to_vec());
        for row in it {
            for ((l, h), &v) in lo.iter_mut().zip(hi.iter_mut()).zip(row) {
                *l = l.min(v);
                *h = h.max(v);
            }
        }
        Some(Self { lo, hi })
    }

    /// Maps each feature to `[0, 1]`; constant features become 0.
    pub fn transform(&self, row: &mut [f64]) {
        for ((v, l), h) in row.iter_mut().zip(&self.lo).zip(&self.hi) {
            let span = h - l;
            *v = if span > 0.0 { (*v - l) / span } else { 0.0 };
        }
    }
}
