//! File formats: field and snapshot CSVs, topology reports and the JSON
//! Hamiltonian schema.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::algebra::{XPPolynomial, XPTerm};
use crate::error::{Error, Result};
use crate::flow::CurrentField;
use crate::grid::PhaseSpaceGrid;
use crate::husimi::{HusimiField, PositionWavefunction};
use crate::params::OscillatorParams;
use crate::topology::TopologyRecord;

pub const FIELD_HEADER: &str = "x,p,Q,Jx,Jp,order,t";
pub const SNAPSHOT_HEADER: &str = "x,re_psi,im_psi,t";
pub const MASK_HEADER: &str = "x,p,exact,classical,t";
pub const TOPOLOGY_HEADER: &str = "t,kind,x,p,index,eig1_re,eig1_im,eig2_re,eig2_im,paired_with";

/// `{terms: [{x_power, p_power, coeff}], mass, omega, hbar}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub terms: Vec<XPTerm>,
    pub mass: f64,
    pub omega: f64,
    pub hbar: f64,
}

impl HamiltonianSpec {
    pub fn new(poly: &XPPolynomial, params: &OscillatorParams) -> Self {
        HamiltonianSpec { terms: poly.terms.clone(), mass: params.mass, omega: params.omega, hbar: params.hbar }
    }

    pub fn params(&self) -> Result<OscillatorParams> {
        OscillatorParams::new(self.mass, self.omega, self.hbar)
    }

    pub fn polynomial(&self) -> Result<XPPolynomial> {
        let poly = XPPolynomial::new(self.terms.clone());
        poly.validate()?;
        Ok(poly)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.params()?;
        spec.polynomial()?;
        Ok(spec)
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per node, x outer and p inner. Without a current the J columns
/// are zero.
pub fn write_field_csv<W: Write>(out: &mut W, field: &HusimiField, current: Option<&CurrentField>, order: &str) -> Result<()> {
    if let Some(c) = current {
        c.grid.same_as(&field.grid)?;
    }
    let g = &field.grid;
    writeln!(out, "{FIELD_HEADER}")?;
    let t = num(current.map_or(field.t, |c| c.t));
    for i in 0..g.nx {
        let x = num(g.x(i));
        for j in 0..g.np {
            let (jx, jp) = current.map_or((0.0, 0.0), |c| (c.jx[[i, j]], c.jp[[i, j]]));
            writeln!(out, "{x},{},{},{},{},{order},{t}", num(g.p(j)), num(field.q[[i, j]]), num(jx), num(jp))?;
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldRow {
    pub x: f64,
    pub p: f64,
    pub q: f64,
    pub jx: f64,
    pub jp: f64,
    pub order: String,
    pub t: f64,
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Validation(format!("line {line}: '{s}' is not a number")))
}

pub fn read_field_csv<R: Read>(input: R) -> Result<Vec<FieldRow>> {
    let mut lines = BufReader::new(input).lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != FIELD_HEADER {
        return Err(Error::Validation(format!("unexpected header '{header}'")));
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(Error::Validation(format!("line {}: expected 7 columns", k + 2)));
        }
        rows.push(FieldRow {
            x: parse_f64(cols[0], k + 2)?,
            p: parse_f64(cols[1], k + 2)?,
            q: parse_f64(cols[2], k + 2)?,
            jx: parse_f64(cols[3], k + 2)?,
            jp: parse_f64(cols[4], k + 2)?,
            order: cols[5].to_string(),
            t: parse_f64(cols[6], k + 2)?,
        });
    }
    Ok(rows)
}

pub fn write_snapshot_csv<W: Write>(out: &mut W, wf: &PositionWavefunction, t: f64) -> Result<()> {
    writeln!(out, "{SNAPSHOT_HEADER}")?;
    let t = num(t);
    for (k, v) in wf.values.iter().enumerate() {
        writeln!(out, "{},{},{},{t}", num(wf.grid.x(k)), num(v.re), num(v.im))?;
    }
    Ok(())
}

pub fn write_topology_csv<W: Write>(out: &mut W, records: &[TopologyRecord]) -> Result<()> {
    writeln!(out, "{TOPOLOGY_HEADER}")?;
    for r in records {
        let eig = |k: usize, c: usize| r.eigenvalues.get(k).map_or(String::new(), |e| num(e[c]));
        let paired = r.paired_with.map_or(String::new(), |p| p.to_string());
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{paired}",
            num(r.t),
            r.kind,
            num(r.x),
            num(r.p),
            r.index,
            eig(0, 0),
            eig(0, 1),
            eig(1, 0),
            eig(1, 1)
        )?;
    }
    Ok(())
}

/// Inversion masks of the exact and classical flows as 0/1 columns.
pub fn write_mask_csv<W: Write>(out: &mut W, grid: &PhaseSpaceGrid, exact: &Array2<bool>, classical: &Array2<bool>, t: f64) -> Result<()> {
    if exact.dim() != grid.shape() || classical.dim() != grid.shape() {
        return Err(Error::GridMismatch("mask shape differs from the grid".into()));
    }
    writeln!(out, "{MASK_HEADER}")?;
    let t = num(t);
    for i in 0..grid.nx {
        let x = num(grid.x(i));
        for j in 0..grid.np {
            writeln!(out, "{x},{},{},{},{t}", num(grid.p(j)), exact[[i, j]] as u8, classical[[i, j]] as u8)?;
        }
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes to `path` through a buffered file created with its parents.
pub fn with_file<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut std::io::BufWriter<fs::File>) -> Result<()>,
{
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}
