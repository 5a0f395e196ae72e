//! JSON state file format.
//!
//! `{"dims":[d1,...,dn], "bipartition":[[a1,b1],...]?, "matrix":[[[re,im],...],...]}`
//! row-major. serde_json prints f64 with the shortest representation that
//! round-trips, so write/read is bit-identical for finite doubles.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{C64, CMat, DensityOperator, HermitianOperator, SiteStructure};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bipartition: Option<Vec<(usize, usize)>>,
    pub matrix: Vec<Vec<(f64, f64)>>,
}

impl StateFile {
    pub fn from_operator(op: &HermitianOperator, s: &SiteStructure) -> Result<Self> {
        s.check_dim(op.dim())?;
        let m = op.matrix();
        let matrix = (0..op.dim())
            .map(|i| (0..op.dim()).map(|j| (m[(i, j)].re, m[(i, j)].im)).collect())
            .collect();
        Ok(Self { dims: s.dims.clone(), bipartition: s.bipartition.clone(), matrix })
    }

    pub fn site_structure(&self) -> Result<SiteStructure> {
        match &self.bipartition {
            Some(b) => SiteStructure::with_bipartition(self.dims.clone(), b.clone()),
            None => SiteStructure::new(self.dims.clone()),
        }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let dim: usize = self.dims.iter().product();
        if self.matrix.len() != dim || self.matrix.iter().any(|r| r.len() != dim) {
            return Err(Error::DimMismatch(format!("matrix shape vs dims product {dim}")));
        }
        Ok(CMat::from_fn(dim, dim, |i, j| C64::new(self.matrix[i][j].0, self.matrix[i][j].1)))
    }

    pub fn to_hermitian(&self) -> Result<HermitianOperator> {
        HermitianOperator::new(self.to_matrix()?)
    }

    pub fn to_density(&self) -> Result<DensityOperator> {
        DensityOperator::new(self.to_hermitian()?)
    }
}

pub fn write_state(path: &Path, op: &HermitianOperator, s: &SiteStructure) -> Result<()> {
    let f = StateFile::from_operator(op, s)?;
    std::fs::write(path, serde_json::to_string(&f)?)?;
    Ok(())
}

pub fn read_state(path: &Path) -> Result<(StateFile, HermitianOperator, SiteStructure)> {
    let text = std::fs::read_to_string(path)?;
    let f: StateFile = serde_json::from_str(&text)?;
    let op = f.to_hermitian()?;
    let s = f.site_structure()?;
    s.check_dim(op.dim())?;
    Ok((f, op, s))
}
