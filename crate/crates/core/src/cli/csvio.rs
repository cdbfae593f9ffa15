//! CSV formats read and written by the command line.
//!
//! * data: feature columns, an optional label column and an optional
//!   `split` column (`train`, `validation`, `test`);
//! * predictions: one column per regression model, or `<model>_class<k>`
//!   columns for classifiers;
//! * rewards: a `#sense=max|min` first line, then feature columns and one
//!   `reward:<action>` column per action.

use std::path::Path;

use crate::data::{Dataset, PredictionTensor, Targets};
use crate::error::{Error, Result};
use crate::rewards::{ActionSet, RewardMatrix, Sense};

pub const SPLIT_COL: &str = "split";
pub const REWARD_PREFIX: &str = "reward:";

pub fn read_text(path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_string(),
        source,
    })
}

pub fn write_text(path: &str, text: &str) -> Result<()> {
    if let Some(dir) = Path::new(path).parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_string(),
        source,
    })
}

/// Header and string cells of a CSV file, with an optional leading
/// `#sense=` line split off.
pub struct Table {
    pub path: String,
    pub sense: Option<Sense>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &str) -> Result<Table> {
        let text = read_text(path)?;
        Table::parse(path, &text)
    }

    pub fn parse(path: &str, text: &str) -> Result<Table> {
        let mut sense = None;
        let mut body = text;
        if let Some(rest) = text.strip_prefix('#') {
            let (first, tail) = rest.split_once('\n').unwrap_or((rest, ""));
            let first = first.trim();
            sense = Some(match first.strip_prefix("sense=") {
                Some("max") => Sense::Maximize,
                Some("min") => Sense::Minimize,
                _ => {
                    return Err(Error::parse(
                        format!("{path}: line 1"),
                        format!("expected '#sense=max' or '#sense=min', found '#{first}'"),
                    ))
                }
            });
            body = tail;
        }
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| Error::parse(format!("{path}: header"), e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        if header.is_empty() || header.iter().all(String::is_empty) {
            return Err(Error::parse(format!("{path}: header"), "no columns"));
        }
        let mut rows = Vec::new();
        for (r, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse(format!("{path}: row {}", r + 1), e.to_string()))?;
            rows.push(rec.iter().map(str::to_string).collect());
        }
        Ok(Table {
            path: path.to_string(),
            sense,
            header,
            rows,
        })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.column(name).ok_or_else(|| {
            Error::parse(format!("{}: header", self.path), format!("missing column '{name}'"))
        })
    }

    pub fn number(&self, row: usize, col: usize) -> Result<f64> {
        let cell = &self.rows[row][col];
        let v: f64 = cell.parse().map_err(|_| {
            Error::parse(
                format!("{}: row {}, column '{}'", self.path, row + 1, self.header[col]),
                format!("cannot parse '{cell}' as a number"),
            )
        })?;
        if !v.is_finite() {
            return Err(Error::NonFinite {
                location: format!("{}: row {}, column '{}'", self.path, row + 1, self.header[col]),
            });
        }
        Ok(v)
    }

    pub fn label(&self, row: usize, col: usize) -> Result<usize> {
        let cell = &self.rows[row][col];
        cell.parse().map_err(|_| {
            Error::parse(
                format!("{}: row {}, column '{}'", self.path, row + 1, self.header[col]),
                format!("cannot parse '{cell}' as a class index"),
            )
        })
    }

    /// Row indices whose `split` cell equals `name`; all rows when `name`
    /// is `None`.
    pub fn select(&self, name: Option<&str>) -> Result<Vec<usize>> {
        match name {
            None => Ok((0..self.rows.len()).collect()),
            Some(s) => {
                let col = self.require(SPLIT_COL)?;
                let rows: Vec<usize> = (0..self.rows.len()).filter(|&r| self.rows[r][col] == s).collect();
                if rows.is_empty() {
                    return Err(Error::parse(
                        format!("{}: column '{SPLIT_COL}'", self.path),
                        format!("no rows in split '{s}'"),
                    ));
                }
                Ok(rows)
            }
        }
    }

    pub fn numbers(&self, rows: &[usize], cols: &[usize]) -> Result<Vec<Vec<f64>>> {
        rows.iter()
            .map(|&r| cols.iter().map(|&c| self.number(r, c)).collect())
            .collect()
    }
}

/// Feature columns of a data table: everything except the label column,
/// `split`, and reward columns.
pub fn feature_columns(t: &Table, target: Option<&str>) -> Vec<usize> {
    (0..t.header.len())
        .filter(|&c| {
            let h = &t.header[c];
            Some(h.as_str()) != target && h != SPLIT_COL && !h.starts_with(REWARD_PREFIX)
        })
        .collect()
}

/// Features of `rows` looked up by `names`.
pub fn features_by_name(t: &Table, rows: &[usize], names: &[String]) -> Result<Vec<Vec<f64>>> {
    let cols = names.iter().map(|n| t.require(n)).collect::<Result<Vec<_>>>()?;
    t.numbers(rows, &cols)
}

pub fn read_dataset(t: &Table, rows: &[usize], target: &str, classification: bool, n_classes: Option<usize>) -> Result<Dataset> {
    let tcol = t.require(target)?;
    let fcols = feature_columns(t, Some(target));
    if fcols.is_empty() {
        return Err(Error::parse(format!("{}: header", t.path), "no feature columns"));
    }
    let names = fcols.iter().map(|&c| t.header[c].clone()).collect();
    let features = t.numbers(rows, &fcols)?;
    let targets = if classification {
        let labels = rows.iter().map(|&r| t.label(r, tcol)).collect::<Result<Vec<_>>>()?;
        let k = n_classes.unwrap_or_else(|| labels.iter().max().map_or(1, |m| m + 1));
        Targets::Classes { labels, n_classes: k }
    } else {
        Targets::Real(rows.iter().map(|&r| t.number(r, tcol)).collect::<Result<_>>()?)
    };
    Dataset::new(features, targets, names)
}

/// Parses `<model>_class<k>` into `(model, k)`.
fn class_column(name: &str) -> Option<(&str, usize)> {
    let at = name.rfind("_class")?;
    let k = name[at + 6..].parse().ok()?;
    Some((&name[..at], k))
}

/// Prediction columns of `rows`; classification when every column name
/// has a `_class<k>` suffix.
pub fn read_predictions(t: &Table, rows: &[usize]) -> Result<PredictionTensor> {
    let cols: Vec<usize> = (0..t.header.len())
        .filter(|&c| t.header[c] != SPLIT_COL)
        .collect();
    let parsed: Vec<Option<(&str, usize)>> = cols.iter().map(|&c| class_column(&t.header[c])).collect();
    if parsed.iter().all(Option::is_some) {
        let mut models: Vec<&str> = Vec::new();
        let mut k = 0;
        for p in parsed.iter().flatten() {
            if !models.contains(&p.0) {
                models.push(p.0);
            }
            k = k.max(p.1 + 1);
        }
        let mut layout = vec![vec![None; k]; models.len()];
        for (&c, p) in cols.iter().zip(&parsed) {
            let (m, class) = p.expect("checked");
            let j = models.iter().position(|x| *x == m).expect("collected");
            layout[j][class] = Some(c);
        }
        for (j, per_class) in layout.iter().enumerate() {
            if let Some(class) = per_class.iter().position(Option::is_none) {
                return Err(Error::parse(
                    format!("{}: header", t.path),
                    format!("missing column {}_class{class}", models[j]),
                ));
            }
        }
        let probs = rows
            .iter()
            .map(|&r| {
                layout
                    .iter()
                    .map(|per_class| per_class.iter().map(|c| t.number(r, c.expect("checked"))).collect())
                    .collect()
            })
            .collect::<Result<Vec<Vec<Vec<f64>>>>>()?;
        PredictionTensor::classification(probs, models.iter().map(|s| s.to_string()).collect())
    } else {
        let names = cols.iter().map(|&c| t.header[c].clone()).collect();
        PredictionTensor::regression(t.numbers(rows, &cols)?, names)
    }
}

fn is_reject_name(name: &str) -> bool {
    name == "reject" || name.starts_with("reject@")
}

/// Features, feature names and rewards from a reward table. Actions named
/// `reject` or `reject@…` are rejection actions and must come last.
pub fn read_rewards(t: &Table, rows: &[usize], sense: Option<Sense>) -> Result<(Vec<String>, Vec<Vec<f64>>, RewardMatrix)> {
    let rcols: Vec<usize> = (0..t.header.len())
        .filter(|&c| t.header[c].starts_with(REWARD_PREFIX))
        .collect();
    if rcols.is_empty() {
        return Err(Error::parse(
            format!("{}: header", t.path),
            format!("no '{REWARD_PREFIX}' columns"),
        ));
    }
    let names: Vec<String> = rcols.iter().map(|&c| t.header[c][REWARD_PREFIX.len()..].to_string()).collect();
    let first_reject = names.iter().position(|n| is_reject_name(n)).unwrap_or(names.len());
    if names[first_reject..].iter().any(|n| !is_reject_name(n)) {
        return Err(Error::parse(
            format!("{}: header", t.path),
            "rejection columns must come after all other reward columns",
        ));
    }
    let mut actions = ActionSet::singles(&names[..first_reject]);
    for n in &names[first_reject..] {
        actions = actions.with_named_rejection(n.clone());
    }
    let fcols = feature_columns(t, None);
    let fnames = fcols.iter().map(|&c| t.header[c].clone()).collect();
    let features = t.numbers(rows, &fcols)?;
    let values = t.numbers(rows, &rcols)?;
    let sense = sense.or(t.sense).unwrap_or(Sense::Maximize);
    let rewards = RewardMatrix::new(values, sense, actions)?;
    Ok((fnames, features, rewards))
}

pub fn sense_line(sense: Sense) -> &'static str {
    match sense {
        Sense::Maximize => "#sense=max\n",
        Sense::Minimize => "#sense=min\n",
    }
}

/// Renders a CSV with the given header and rows of already formatted cells.
pub fn render(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

pub fn write_rewards(feature_names: &[String], features: &[Vec<f64>], rewards: &RewardMatrix) -> String {
    let mut header: Vec<String> = feature_names.to_vec();
    header.extend(rewards.action_set().names().iter().map(|n| format!("{REWARD_PREFIX}{n}")));
    let rows = features.iter().enumerate().map(|(i, f)| {
        f.iter()
            .chain(rewards.row(i))
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
    });
    format!("{}{}", sense_line(rewards.sense()), render(&header, rows))
}
