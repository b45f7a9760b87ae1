use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, Axis};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Regression,
    /// Labels in `{−1, +1}`.
    Binary,
}

/// Inputs `X` (N × d) with targets `y` (N).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Array2<f64>,
    y: Array1<f64>,
    feature_names: Option<Vec<String>>,
    task: Task,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::shape("dataset rows", x.nrows(), y.len()));
        }
        Ok(Self {
            x,
            y,
            feature_names: None,
            task: Task::Regression,
        })
    }

    /// A binary dataset; every label must be exactly `−1` or `+1`.
    pub fn binary(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        if let Some((i, v)) = y.iter().enumerate().find(|(_, &v)| v != 1.0 && v != -1.0) {
            return Err(Error::Schema(format!("binary label at row {} is {v}, expected ±1", i + 1)));
        }
        let mut ds = Self::new(x, y)?;
        ds.task = Task::Binary;
        Ok(ds)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.dim() {
            return Err(Error::shape("feature names", self.dim(), names.len()));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// Rows `idx` in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self {
            x: self.x.select(Axis(0), idx),
            y: self.y.select(Axis(0), idx),
            feature_names: self.feature_names.clone(),
            task: self.task,
        }
    }

    pub fn into_parts(self) -> (Array2<f64>, Array1<f64>) {
        (self.x, self.y)
    }
}

/// Which CSV column holds the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetColumn {
    Last,
    /// Zero-based column index.
    Index(usize),
    /// Header name; requires a header row.
    Name(String),
}

/// A numeric CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub data: Array2<f64>,
}

impl Table {
    pub fn parse(text: &str, has_header: bool) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let header = if has_header {
            let (_, line) = lines.next().ok_or(Error::EmptyData("CSV has no header row"))?;
            Some(line.split(',').map(|c| c.trim().to_string()).collect::<Vec<_>>())
        } else {
            None
        };
        let mut width = header.as_ref().map(Vec::len);
        let mut values = Vec::new();
        let mut rows = 0;
        for (row, line) in lines {
            let mut count = 0;
            for (col, cell) in line.split(',').enumerate() {
                let cell = cell.trim();
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    row,
                    column: col + 1,
                    message: if cell.is_empty() {
                        "missing value".to_string()
                    } else {
                        format!("non-numeric value `{cell}`")
                    },
                })?;
                values.push(v);
                count += 1;
            }
            match width {
                None => width = Some(count),
                Some(w) if w != count => {
                    return Err(Error::Parse {
                        row,
                        column: count.min(w) + 1,
                        message: format!("expected {w} columns, found {count}"),
                    })
                }
                _ => {}
            }
            rows += 1;
        }
        let width = width.unwrap_or(0);
        let data = Array2::from_shape_vec((rows, width), values).expect("row widths checked");
        Ok(Self { header, data })
    }

    pub fn read(path: &Path, has_header: bool) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, has_header)
    }

    pub fn column_index(&self, target: &TargetColumn) -> Result<usize> {
        let ncols = self.data.ncols();
        let idx = match target {
            TargetColumn::Last if ncols > 0 => ncols - 1,
            TargetColumn::Last => return Err(Error::Schema("table has no columns".into())),
            TargetColumn::Index(i) => *i,
            TargetColumn::Name(name) => self
                .header
                .as_ref()
                .ok_or_else(|| Error::Schema(format!("target `{name}` given by name but the file has no header")))?
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Schema(format!("target column `{name}` not found")))?,
        };
        if idx >= ncols {
            return Err(Error::Schema(format!("target column {idx} out of range for {ncols} columns")));
        }
        Ok(idx)
    }

    /// Split into `(features, column)` around column `idx`.
    pub fn take_column(&self, idx: usize) -> (Array2<f64>, Array1<f64>) {
        let keep: Vec<usize> = (0..self.data.ncols()).filter(|&c| c != idx).collect();
        (self.data.select(Axis(1), &keep), self.data.column(idx).to_owned())
    }

    pub fn into_dataset(self, target: &TargetColumn) -> Result<Dataset> {
        let idx = self.column_index(target)?;
        let (x, y) = self.take_column(idx);
        if x.ncols() == 0 {
            return Err(Error::Schema("no feature columns besides the target".into()));
        }
        let ds = Dataset::new(x, y)?;
        match self.header {
            Some(mut names) => {
                names.remove(idx);
                ds.with_feature_names(names)
            }
            None => Ok(ds),
        }
    }
}

pub fn read_table(path: impl AsRef<Path>, has_header: bool) -> Result<Table> {
    Table::read(path.as_ref(), has_header)
}

/// Load a comma-separated numeric file; rows keep file order.
pub fn load_csv(path: impl AsRef<Path>, target: &TargetColumn, has_header: bool) -> Result<Dataset> {
    read_table(path, has_header)?.into_dataset(target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::io::Write;

    #[test]
    fn three_rows_two_features() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a,b,target\n1,2,3\n4,5,6\n7,8.5,-9e-1\n").unwrap();
        let ds = load_csv(f.path(), &TargetColumn::Last, true).unwrap();
        assert_eq!((ds.len(), ds.dim()), (3, 2));
        assert_eq!(ds.y(), &array![3.0, 6.0, -0.9]);
        assert_eq!(ds.feature_names().unwrap(), &["a".to_string(), "b".to_string()]);
        let ds = load_csv(f.path(), &TargetColumn::Name("a".into()), true).unwrap();
        assert_eq!(ds.y(), &array![1.0, 4.0, 7.0]);
        assert_eq!(ds.x().row(0), array![2.0, 3.0]);
    }

    #[test]
    fn parse_errors_locate_cell() {
        match Table::parse("1,2\n3,x\n", false) {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (2, 2)),
            other => panic!("{other:?}"),
        }
        match Table::parse("h1,h2\n1,2\n3,\n", true) {
            Err(Error::Parse { row, column, message }) => {
                assert_eq!((row, column), (3, 2));
                assert!(message.contains("missing"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(Table::parse("1,2\n3\n", false), Err(Error::Parse { row: 2, .. })));
    }

    #[test]
    fn schema_errors() {
        let t = Table::parse("a,b\n1,2\n", true).unwrap();
        assert!(matches!(t.clone().into_dataset(&TargetColumn::Name("c".into())), Err(Error::Schema(_))));
        assert!(matches!(t.into_dataset(&TargetColumn::Index(5)), Err(Error::Schema(_))));
        let t = Table::parse("1,2\n", false).unwrap();
        assert!(matches!(t.into_dataset(&TargetColumn::Name("a".into())), Err(Error::Schema(_))));
        assert!(matches!(
            load_csv("/definitely/not/here.csv", &TargetColumn::Last, true),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn binary_labels_validated() {
        let x = Array2::zeros((3, 1));
        assert!(Dataset::binary(x.clone(), array![1.0, -1.0, 1.0]).is_ok());
        assert!(Dataset::binary(x, array![1.0, 0.0, 1.0]).is_err());
    }
}
