//! Run configuration (TOML), legacy ASCII VTK export and CSV reports.
//!
//! Every number written to disk uses 9 significant digits (`{:.8e}`), so
//! files are byte-stable across runs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::brinkmann::ObstacleShape;
use crate::error::{Error, Result};
use crate::experiments::{ExperimentReport, Scenario, VerifyOptions};
use crate::fem::{BrinkmannParams, StiffnessForm, Traction, VelocityField};
use crate::geometry::Point;
use crate::mesh::{BoundaryPartition, Mesh, Side};

fn num(v: f64) -> String {
    format!("{v:.8e}")
}

/// Which artifacts a run writes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExportToggles {
    /// Direct, adjoint and measured velocities plus the pressure.
    pub fields: bool,
    /// The topological gradient.
    pub gradient: bool,
    /// Indicator of the selected region.
    pub regions: bool,
    /// CSV report.
    pub report: bool,
}

impl Default for ExportToggles {
    fn default() -> Self {
        Self {
            fields: true,
            gradient: true,
            regions: true,
            report: true,
        }
    }
}

/// Radii and noise levels of the sweeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub radii: Vec<f64>,
    pub noise: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            radii: vec![0.03, 0.06, 0.12, 0.18],
            noise: vec![0.0, 0.05, 0.1, 0.2, 0.3],
        }
    }
}

/// Complete description of a command-line run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    /// Cells per side of the mesh.
    pub n: usize,
    pub nu: f64,
    pub alpha: f64,
    pub k_penalty: f64,
    /// Traction sides; the others carry the no-slip condition.
    pub sigma: Vec<Side>,
    /// Constant traction vector on the traction sides.
    pub traction: [f64; 2],
    pub stiffness_form: StiffnessForm,
    pub truth: ObstacleShape,
    pub noise: f64,
    pub seed: u64,
    pub ell: usize,
    pub rho: f64,
    /// Cells per side of a separate data mesh; `None` generates data on the
    /// inversion mesh.
    pub data_n: Option<usize>,
    pub output_dir: PathBuf,
    pub export: ExportToggles,
    pub sweep: SweepConfig,
    pub verify: VerifyOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = Scenario::default();
        let p = BrinkmannParams::default();
        let traction = match p.traction {
            Traction::Constant(g) => [g.x, g.y],
            Traction::Custom(_) => unreachable!("default traction is constant"),
        };
        Self {
            name: s.name,
            n: s.n,
            nu: p.nu,
            alpha: p.alpha,
            k_penalty: p.k_penalty,
            sigma: s.partition.sigma_sides().to_vec(),
            traction,
            stiffness_form: p.stiffness_form,
            truth: s.truth,
            noise: s.noise,
            seed: s.seed,
            ell: s.ell,
            rho: s.rho,
            data_n: s.data_n,
            output_dir: PathBuf::from("out"),
            export: ExportToggles::default(),
            sweep: SweepConfig::default(),
            verify: VerifyOptions::default(),
        }
    }
}

fn config_error(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

impl RunConfig {
    /// Checks every value, naming the offending key.
    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(config_error(key, format!("must be finite and positive, got {v}")))
            }
        };
        let nonnegative = |key: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(config_error(key, format!("must be finite and nonnegative, got {v}")))
            }
        };
        if self.n < 2 {
            return Err(config_error("n", format!("mesh needs at least 2 cells per side, got {}", self.n)));
        }
        if let Some(m) = self.data_n {
            if m < 2 {
                return Err(config_error("data_n", format!("mesh needs at least 2 cells per side, got {m}")));
            }
        }
        positive("nu", self.nu)?;
        positive("alpha", self.alpha)?;
        positive("k_penalty", self.k_penalty)?;
        BoundaryPartition::new(&self.sigma).map_err(|e| config_error("sigma", e.to_string()))?;
        if !self.traction.iter().all(|v| v.is_finite()) {
            return Err(config_error("traction", "components must be finite"));
        }
        self.truth.validate().map_err(|e| config_error("truth", e.to_string()))?;
        nonnegative("noise", self.noise)?;
        if self.ell < 2 {
            return Err(config_error("ell", format!("grid needs at least 2 subintervals, got {}", self.ell)));
        }
        nonnegative("rho", self.rho)?;
        for r in &self.sweep.radii {
            positive("sweep.radii", *r)?;
        }
        for d in &self.sweep.noise {
            nonnegative("sweep.noise", *d)?;
        }
        let v = &self.verify;
        positive("verify.k_penalty", v.k_penalty)?;
        for e in v.eps.iter().chain(&v.lemma_eps) {
            positive("verify.eps", *e)?;
        }
        if v.eps.len() < 2 || v.lemma_eps.len() < 2 {
            return Err(config_error("verify.eps", "slope fits need at least two values"));
        }
        for k in &v.penalties {
            positive("verify.penalties", *k)?;
        }
        Ok(())
    }

    pub fn partition(&self) -> Result<BoundaryPartition> {
        BoundaryPartition::new(&self.sigma).map_err(|e| config_error("sigma", e.to_string()))
    }

    pub fn scenario(&self) -> Result<Scenario> {
        self.validate()?;
        Ok(Scenario {
            name: self.name.clone(),
            n: self.n,
            partition: self.partition()?,
            params: BrinkmannParams {
                nu: self.nu,
                alpha: self.alpha,
                k_penalty: self.k_penalty,
                traction: Traction::Constant(Point::new(self.traction[0], self.traction[1])),
                stiffness_form: self.stiffness_form,
            },
            truth: self.truth,
            noise: self.noise,
            seed: self.seed,
            ell: self.ell,
            rho: self.rho,
            data_n: self.data_n,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse {
            format: "TOML",
            message: e.to_string(),
        })
    }
}

/// Parses and validates a configuration; missing keys take their defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig = toml::from_str(text).map_err(|e| Error::Parse {
        format: "TOML",
        message: e.message().to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

/// Data attached to a VTK export.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VtkFields {
    pub point_scalars: Vec<(String, Vec<f64>)>,
    pub point_vectors: Vec<(String, Vec<Point>)>,
    pub cell_scalars: Vec<(String, Vec<f64>)>,
}

impl VtkFields {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn scalar(mut self, name: &str, values: Vec<f64>) -> Self {
        self.point_scalars.push((name.into(), values));
        self
    }

    /// Velocity sampled at the mesh vertices.
    pub fn velocity(mut self, mesh: &Mesh, name: &str, field: &VelocityField) -> Self {
        let values = (0..mesh.num_vertices()).map(|v| field.at_node(v)).collect();
        self.point_vectors.push((name.into(), values));
        self
    }

    pub fn cell_scalar(mut self, name: &str, values: Vec<f64>) -> Self {
        self.cell_scalars.push((name.into(), values));
        self
    }
}

fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || name.chars().any(|c| c.is_whitespace()) {
        return Err(Error::param("name", format!("VTK array names must be nonempty words, got {name:?}")));
    }
    Ok(())
}

/// Legacy ASCII VTK text of the P1 triangulation with the given data.
pub fn vtk_string(mesh: &Mesh, fields: &VtkFields) -> Result<String> {
    use std::fmt::Write;
    let nv = mesh.num_vertices();
    let nt = mesh.num_triangles();
    for (name, values) in &fields.point_scalars {
        check_name(name)?;
        if values.len() != nv {
            return Err(Error::DimensionMismatch(format!("point scalar {name} has {} values", values.len())));
        }
    }
    for (name, values) in &fields.point_vectors {
        check_name(name)?;
        if values.len() != nv {
            return Err(Error::DimensionMismatch(format!("point vector {name} has {} values", values.len())));
        }
    }
    for (name, values) in &fields.cell_scalars {
        check_name(name)?;
        if values.len() != nt {
            return Err(Error::DimensionMismatch(format!("cell scalar {name} has {} values", values.len())));
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "topograd");
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {nv} double");
    for p in mesh.vertices() {
        let _ = writeln!(s, "{} {} {}", num(p.x), num(p.y), num(0.0));
    }
    let _ = writeln!(s, "CELLS {nt} {}", 4 * nt);
    for tri in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", tri[0], tri[1], tri[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        let _ = writeln!(s, "5");
    }
    if !fields.point_scalars.is_empty() || !fields.point_vectors.is_empty() {
        let _ = writeln!(s, "POINT_DATA {nv}");
        for (name, values) in &fields.point_scalars {
            let _ = writeln!(s, "SCALARS {name} double 1");
            let _ = writeln!(s, "LOOKUP_TABLE default");
            for v in values {
                let _ = writeln!(s, "{}", num(*v));
            }
        }
        for (name, values) in &fields.point_vectors {
            let _ = writeln!(s, "VECTORS {name} double");
            for v in values {
                let _ = writeln!(s, "{} {} {}", num(v.x), num(v.y), num(0.0));
            }
        }
    }
    if !fields.cell_scalars.is_empty() {
        let _ = writeln!(s, "CELL_DATA {nt}");
        for (name, values) in &fields.cell_scalars {
            let _ = writeln!(s, "SCALARS {name} double 1");
            let _ = writeln!(s, "LOOKUP_TABLE default");
            for v in values {
                let _ = writeln!(s, "{}", num(*v));
            }
        }
    }
    Ok(s)
}

pub fn export_field_vtk(mesh: &Mesh, fields: &VtkFields, path: &Path) -> Result<()> {
    fs::write(path, vtk_string(mesh, fields)?).map_err(|e| Error::io(path, e))
}

/// Contents of a legacy ASCII VTK file as written by [`export_field_vtk`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VtkFile {
    pub points: Vec<Point>,
    pub cells: Vec<[usize; 3]>,
    pub point_scalars: BTreeMap<String, Vec<f64>>,
    pub point_vectors: BTreeMap<String, Vec<Point>>,
    pub cell_scalars: BTreeMap<String, Vec<f64>>,
}

fn vtk_error(message: impl Into<String>) -> Error {
    Error::Parse {
        format: "VTK",
        message: message.into(),
    }
}

/// Reads the subset of legacy VTK produced by this crate.
pub fn parse_vtk(text: &str) -> Result<VtkFile> {
    let mut tokens = text.lines().skip(2).flat_map(|l| l.split_whitespace());
    let mut next = || tokens.next().ok_or_else(|| vtk_error("unexpected end of file"));
    fn number<T: std::str::FromStr>(t: &str) -> Result<T> {
        t.parse().map_err(|_| vtk_error(format!("expected a number, got {t:?}")))
    }
    let mut out = VtkFile::default();
    if next()? != "ASCII" {
        return Err(vtk_error("only ASCII files are supported"));
    }
    let mut section = "";
    let mut count = 0usize;
    loop {
        let Ok(key) = next() else { break };
        match key {
            "DATASET" => {
                let kind = next()?;
                if kind != "UNSTRUCTURED_GRID" {
                    return Err(vtk_error(format!("unsupported dataset {kind}")));
                }
            }
            "POINTS" => {
                let n: usize = number(next()?)?;
                next()?;
                for _ in 0..n {
                    let x = number(next()?)?;
                    let y = number(next()?)?;
                    let _: f64 = number(next()?)?;
                    out.points.push(Point::new(x, y));
                }
            }
            "CELLS" => {
                let n: usize = number(next()?)?;
                next()?;
                for _ in 0..n {
                    if next()? != "3" {
                        return Err(vtk_error("only triangles are supported"));
                    }
                    out.cells.push([number(next()?)?, number(next()?)?, number(next()?)?]);
                }
            }
            "CELL_TYPES" => {
                let n: usize = number(next()?)?;
                for _ in 0..n {
                    next()?;
                }
            }
            "POINT_DATA" | "CELL_DATA" => {
                section = if key == "POINT_DATA" { "point" } else { "cell" };
                count = number(next()?)?;
            }
            "SCALARS" => {
                let name = next()?.to_string();
                next()?;
                // Optional component count, then the lookup table line.
                let mut t = next()?;
                if t != "LOOKUP_TABLE" {
                    t = next()?;
                }
                if t != "LOOKUP_TABLE" {
                    return Err(vtk_error("missing LOOKUP_TABLE"));
                }
                next()?;
                let values = (0..count).map(|_| number(next()?)).collect::<Result<Vec<f64>>>()?;
                match section {
                    "point" => out.point_scalars.insert(name, values),
                    "cell" => out.cell_scalars.insert(name, values),
                    _ => return Err(vtk_error("SCALARS outside a data section")),
                };
            }
            "VECTORS" => {
                let name = next()?.to_string();
                next()?;
                if section != "point" {
                    return Err(vtk_error("only point vectors are supported"));
                }
                let mut values = Vec::with_capacity(count);
                for _ in 0..count {
                    let x = number(next()?)?;
                    let y = number(next()?)?;
                    let _: f64 = number(next()?)?;
                    values.push(Point::new(x, y));
                }
                out.point_vectors.insert(name, values);
            }
            other => return Err(vtk_error(format!("unexpected keyword {other:?}"))),
        }
    }
    Ok(out)
}

pub fn read_vtk(path: &Path) -> Result<VtkFile> {
    parse_vtk(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

/// Column header of the γ table.
pub const REPORT_COLUMNS: [&str; 5] = ["gamma", "J", "area", "perimeter", "E"];

fn csv_error(e: csv::Error) -> Error {
    Error::Parse {
        format: "CSV",
        message: e.to_string(),
    }
}

/// CSV text of a report: a `key,value` block, then one row per γ.
pub fn report_csv_string(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    w.write_record(["key", "value"]).map_err(csv_error)?;
    for (k, v) in report.header() {
        w.write_record([k, v]).map_err(csv_error)?;
    }
    w.write_record(REPORT_COLUMNS).map_err(csv_error)?;
    for row in &report.reconstruction.rows {
        w.write_record([
            num(row.gamma),
            num(row.j),
            num(row.area),
            num(row.perimeter),
            row.e.map(num).unwrap_or_default(),
        ])
        .map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse {
        format: "CSV",
        message: e.to_string(),
    })?;
    String::from_utf8(bytes).map_err(|e| Error::Parse {
        format: "CSV",
        message: e.to_string(),
    })
}

pub fn export_report_csv(report: &ExperimentReport, path: &Path) -> Result<()> {
    fs::write(path, report_csv_string(report)?).map_err(|e| Error::io(path, e))
}

/// One γ row read back from a report.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub gamma: f64,
    pub j: f64,
    pub area: f64,
    pub perimeter: f64,
    pub e: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReportCsv {
    pub header: Vec<(String, String)>,
    pub rows: Vec<ReportRow>,
}

impl ReportCsv {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn parse_report_csv(text: &str) -> Result<ReportCsv> {
    let mut r = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut out = ReportCsv::default();
    let mut in_table = false;
    let parse = |s: &str| -> Result<f64> {
        s.parse().map_err(|_| Error::Parse {
            format: "CSV",
            message: format!("expected a number, got {s:?}"),
        })
    };
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let fields: Vec<&str> = record.iter().collect();
        if i == 0 {
            if fields != ["key", "value"] {
                return Err(Error::Parse {
                    format: "CSV",
                    message: "missing key,value header".into(),
                });
            }
            continue;
        }
        if !in_table {
            if fields == REPORT_COLUMNS {
                in_table = true;
            } else if let [k, v] = fields[..] {
                out.header.push((k.to_string(), v.to_string()));
            } else {
                return Err(Error::Parse {
                    format: "CSV",
                    message: format!("malformed header record {fields:?}"),
                });
            }
            continue;
        }
        let [g, j, a, p, e] = fields[..] else {
            return Err(Error::Parse {
                format: "CSV",
                message: format!("expected 5 columns, got {}", fields.len()),
            });
        };
        out.rows.push(ReportRow {
            gamma: parse(g)?,
            j: parse(j)?,
            area: parse(a)?,
            perimeter: parse(p)?,
            e: if e.is_empty() { None } else { Some(parse(e)?) },
        });
    }
    if !in_table {
        return Err(Error::Parse {
            format: "CSV",
            message: "missing γ table".into(),
        });
    }
    Ok(out)
}

pub fn read_report_csv(path: &Path) -> Result<ReportCsv> {
    parse_report_csv(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

/// Writes the artifacts of a run into `dir` as `<stem>.csv` and
/// `<stem>.vtk`, according to `export`. Returns the written paths.
pub fn export_run(
    mesh: &Mesh,
    report: &ExperimentReport,
    export: &ExportToggles,
    dir: &Path,
    stem: &str,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    if export.report {
        let path = dir.join(format!("{stem}.csv"));
        export_report_csv(report, &path)?;
        written.push(path);
    }
    if export.fields || export.gradient || export.regions {
        let f = &report.fields;
        let mut data = VtkFields::new();
        if export.gradient {
            data = data.scalar("G", f.gradient.values().to_vec());
        }
        if export.fields {
            data = data
                .scalar("pressure", f.p0.values().to_vec())
                .velocity(mesh, "psi0", &f.psi0)
                .velocity(mesh, "theta0", &f.theta0)
                .velocity(mesh, "psi_d", &f.psi_d);
        }
        if export.regions {
            let mut indicator = vec![0.0; mesh.num_triangles()];
            if let Some(region) = &report.reconstruction.region {
                for &t in &region.triangles {
                    indicator[t] = 1.0;
                }
            }
            data = data.cell_scalar("region", indicator);
        }
        let path = dir.join(format!("{stem}.vtk"));
        export_field_vtk(mesh, &data, &path)?;
        written.push(path);
    }
    Ok(written)
}
