use std::collections::HashSet;
use std::fmt;

use crate::embeddings::{Family, MethodTag, Mode};
use crate::error::{Error, Result};

/// Embedding dimensions of the full experiment grid.
pub const DEFAULT_DIMS: [usize; 4] = [50, 100, 300, 600];

/// One embedding method/strategy at one dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridCell {
    pub method: MethodTag,
    pub dim: usize,
}

impl GridCell {
    pub fn new(method: MethodTag, dim: usize) -> Self {
        GridCell { method, dim }
    }

    /// Family name, e.g. `w2v`.
    pub fn family_name(&self) -> &'static str {
        self.method.family().as_str()
    }

    /// Training strategy, e.g. `sg` or `cwindow`.
    pub fn strategy_name(&self) -> &'static str {
        self.method.as_str().split_once('-').map(|(_, s)| s).unwrap_or("")
    }
}

impl fmt::Display for GridCell {
    /// `<method>-<strategy>-d<dim>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-d{}", self.method, self.dim)
    }
}

/// Cells of a cross-validation run plus the fold count and seed.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub cells: Vec<GridCell>,
    pub k: usize,
    pub seed: u64,
}

impl GridSpec {
    pub fn new(cells: Vec<GridCell>, k: usize, seed: u64) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Argument("the grid has no cells".into()));
        }
        if k < 2 {
            return Err(Error::Argument(format!("k must be at least 2, got {k}")));
        }
        let mut seen = HashSet::new();
        for c in &cells {
            if c.dim == 0 {
                return Err(Error::Argument(format!("{}: dimension must be positive", c.method)));
            }
            if !seen.insert(*c) {
                return Err(Error::Argument(format!("grid cell {c} listed twice")));
            }
        }
        Ok(GridSpec { cells, k, seed })
    }

    /// Every method/strategy pair at every dimension of [`DEFAULT_DIMS`].
    pub fn full(k: usize, seed: u64) -> Result<Self> {
        let cells = MethodTag::ALL
            .into_iter()
            .flat_map(|m| DEFAULT_DIMS.into_iter().map(move |d| GridCell::new(m, d)))
            .collect();
        Self::new(cells, k, seed)
    }

    /// Parses `family:strategy[:dim,dim,...]` entries separated by `;`,
    /// or `full` for the full grid. Dimensions default to
    /// [`DEFAULT_DIMS`].
    pub fn parse(spec: &str, k: usize, seed: u64) -> Result<Self> {
        Self::new(parse_cells(spec)?, k, seed)
    }
}

/// Cell list of a grid string; see [`GridSpec::parse`].
pub fn parse_cells(spec: &str) -> Result<Vec<GridCell>> {
    let bad = |m: String| Error::Argument(format!("grid {spec:?}: {m}"));
    let mut cells = Vec::new();
    for entry in spec.split(';').map(str::trim).filter(|e| !e.is_empty()) {
        if entry == "full" {
            for m in MethodTag::ALL {
                cells.extend(DEFAULT_DIMS.iter().map(|&d| GridCell::new(m, d)));
            }
            continue;
        }
        let parts: Vec<&str> = entry.split(':').collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(bad(format!("expected family:strategy[:dims], got {entry:?}")));
        }
        let family: Family = parts[0].parse().map_err(|_| bad(format!("unknown family {:?}", parts[0])))?;
        let mode: Mode = parts[1].parse().map_err(|_| bad(format!("unknown strategy {:?}", parts[1])))?;
        let method = MethodTag::new(family, mode);
        let dims: Vec<usize> = match parts.get(2) {
            None => DEFAULT_DIMS.to_vec(),
            Some(list) => list
                .split(',')
                .map(|d| match d.trim().parse::<usize>() {
                    Ok(v) if v > 0 => Ok(v),
                    _ => Err(bad(format!("invalid dimension {d:?}"))),
                })
                .collect::<Result<_>>()?,
        };
        cells.extend(dims.into_iter().map(|d| GridCell::new(method, d)));
    }
    if cells.is_empty() {
        return Err(bad("no cells".into()));
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_grid_has_24_cells() {
        let g = GridSpec::full(5, 1).unwrap();
        assert_eq!(g.cells.len(), 24);
        assert_eq!(GridSpec::parse("full", 5, 1).unwrap(), g);
    }

    #[test]
    fn parse_entries() {
        let g = GridSpec::parse("w2v:sg:50,300", 5, 7).unwrap();
        assert_eq!(g.cells, vec![GridCell::new(MethodTag::W2vSg, 50), GridCell::new(MethodTag::W2vSg, 300)]);
        let g = GridSpec::parse("order:cwindow:25; subword:sg:10", 2, 1).unwrap();
        assert_eq!(g.cells[0].to_string(), "order-cwindow-d25");
        assert_eq!(g.cells[1].strategy_name(), "sg");
        assert_eq!(g.cells[1].family_name(), "subword");
        assert_eq!(GridSpec::parse("order:ssg", 2, 1).unwrap().cells.len(), 4);
    }

    #[test]
    fn malformed_grids() {
        for s in ["", "w2v", "w2v:xx:50", "nope:sg:50", "w2v:sg:0", "w2v:sg:5,a", "w2v:sg:5:6", "w2v:sg:5;w2v:sg:5"] {
            assert!(GridSpec::parse(s, 5, 1).is_err(), "{s}");
        }
        assert!(GridSpec::parse("w2v:sg:5", 1, 1).is_err());
    }
}
