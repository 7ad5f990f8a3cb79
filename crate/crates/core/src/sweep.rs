//! Grid sweeps of the analytic pipeline written as self-describing CSV.

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pair_thermo::{compute_weights, StreamCoeffs};
use crate::params::{Key, ModelParams, Variant};
use crate::steady_state::{bath_occupation, SteadyReport};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
    /// Explicit list of values.
    List,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    #[serde(skip)]
    pub key: Option<Key>,
    pub name: String,
    pub scale: Scale,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn linear(key: Key, min: f64, max: f64, points: usize) -> Result<Self> {
        Self::range(key, min, max, points, Scale::Linear)
    }

    pub fn log(key: Key, min: f64, max: f64, points: usize) -> Result<Self> {
        Self::range(key, min, max, points, Scale::Log)
    }

    pub fn list(key: Key, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Sweep(format!("axis {}: need finite values", key.name())));
        }
        Ok(Axis {
            key: Some(key),
            name: key.name().to_string(),
            scale: Scale::List,
            values,
        })
    }

    fn range(key: Key, min: f64, max: f64, points: usize, scale: Scale) -> Result<Self> {
        let name = key.name();
        if points < 2 {
            return Err(Error::Sweep(format!("axis {name}: need at least 2 points, got {points}")));
        }
        if !(min < max) || !min.is_finite() || !max.is_finite() {
            return Err(Error::Sweep(format!("axis {name}: need finite min < max, got {min}..{max}")));
        }
        if scale == Scale::Log && !(min > 0.0) {
            return Err(Error::Sweep(format!("axis {name}: log scale needs min > 0, got {min}")));
        }
        let last = (points - 1) as f64;
        let values = (0..points)
            .map(|i| {
                let t = i as f64 / last;
                match scale {
                    Scale::Log => (min.ln() + t * (max.ln() - min.ln())).exp(),
                    _ => min + t * (max - min),
                }
            })
            .map(|v| if v.abs() < 1e-12 * (max - min).abs() { 0.0 } else { v })
            .collect::<Vec<_>>();
        let mut values = values;
        values[0] = min;
        values[points - 1] = max;
        Ok(Axis {
            key: Some(key),
            name: name.to_string(),
            scale,
            values,
        })
    }

    pub fn key(&self) -> Key {
        self.key.expect("axis built through a constructor")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl FromStr for Axis {
    type Err = Error;

    /// `key:min:max:points[:log]` or `key=v1,v2,...`.
    fn from_str(s: &str) -> Result<Self> {
        if let Some((key, list)) = s.split_once('=') {
            let key = Key::parse(key.trim()).map_err(Error::Sweep)?;
            let values = list
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Sweep(format!("bad axis value `{v}`"))))
                .collect::<Result<Vec<_>>>()?;
            return Axis::list(key, values);
        }
        let parts: Vec<&str> = s.split(':').collect();
        if !(4..=5).contains(&parts.len()) {
            return Err(Error::Sweep(format!(
                "axis `{s}`: expected key:min:max:points[:log] or key=v1,v2,..."
            )));
        }
        let key = Key::parse(parts[0]).map_err(Error::Sweep)?;
        let num = |t: &str| t.parse::<f64>().map_err(|_| Error::Sweep(format!("axis `{s}`: bad number `{t}`")));
        let min = num(parts[1])?;
        let max = num(parts[2])?;
        let points: usize = parts[3]
            .parse()
            .map_err(|_| Error::Sweep(format!("axis `{s}`: bad point count `{}`", parts[3])))?;
        match parts.get(4) {
            None | Some(&"lin") | Some(&"linear") => Axis::linear(key, min, max, points),
            Some(&"log") => Axis::log(key, min, max, points),
            Some(other) => Err(Error::Sweep(format!("axis `{s}`: unknown scale `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// One or two axes; the first varies slowest.
    pub axes: Vec<Axis>,
    pub base: ModelParams,
    /// Extra `#` lines for the header, e.g. preset provenance.
    pub notes: Vec<String>,
}

impl SweepSpec {
    pub fn new(axes: Vec<Axis>, base: ModelParams) -> Result<Self> {
        let spec = SweepSpec {
            axes,
            base,
            notes: Vec::new(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::Sweep(format!("need one or two axes, got {}", self.axes.len())));
        }
        if self.axes.len() == 2 && self.axes[0].key() == self.axes[1].key() {
            return Err(Error::Sweep("both axes sweep the same key".into()));
        }
        let keys: Vec<Key> = self.axes.iter().map(|a| a.key()).collect();
        if keys.contains(&Key::FAtom) && keys.contains(&Key::Delta) {
            return Err(Error::Sweep("f_atom_GHz and delta_MHz describe the same detuning".into()));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    /// Grid coordinates of row `i`.
    pub fn point(&self, i: usize) -> Vec<f64> {
        match self.axes.as_slice() {
            [a] => vec![a.values[i]],
            [a, b] => vec![a.values[i / b.len()], b.values[i % b.len()]],
            _ => unreachable!("validated axis count"),
        }
    }

    /// Parameters at row `i`. A cavity-frequency axis is applied before an
    /// atom-frequency axis.
    pub fn params_at(&self, i: usize) -> Result<ModelParams> {
        let mut p = self.base;
        let mut assignments: Vec<(Key, f64)> = self.axes.iter().map(|a| a.key()).zip(self.point(i)).collect();
        assignments.sort_by_key(|(k, _)| *k == Key::FAtom);
        for (k, v) in assignments {
            p.set(k, v)?;
        }
        Ok(p)
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub coords: Vec<f64>,
    pub l_delta: f64,
    pub n_bar1: f64,
    pub reports: Vec<SteadyReport>,
    pub t_atom: f64,
}

pub fn evaluate(params: &ModelParams) -> Result<(f64, f64, Vec<SteadyReport>, Vec<String>)> {
    let validity = params.coll().check_validity()?;
    let weights = compute_weights(&params.pair())?;
    let env = params.env();
    let coll = params.coll();
    let reports = params
        .variant
        .couplings()
        .iter()
        .map(|&c| SteadyReport::evaluate(&env, &coll, &StreamCoeffs::for_coupling(&weights, c)))
        .collect::<Result<Vec<_>>>()?;
    let l = reports[0].l_delta;
    Ok((l, bath_occupation(&env), reports, validity.warnings))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
    pub warnings: Vec<String>,
}

/// Evaluates every grid point in parallel; rows stay in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let evaluated = (0..spec.rows())
        .into_par_iter()
        .map(|i| {
            let p = spec.params_at(i)?;
            let (l_delta, n_bar1, reports, warnings) = evaluate(&p)?;
            Ok((
                SweepRow {
                    coords: spec.point(i),
                    l_delta,
                    n_bar1,
                    reports,
                    t_atom: p.t_atom,
                },
                warnings,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut warnings: Vec<String> = Vec::new();
    let mut rows = Vec::with_capacity(evaluated.len());
    for (row, ws) in evaluated {
        for w in ws {
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
        rows.push(row);
    }
    Ok(SweepResult {
        spec: spec.clone(),
        rows,
        warnings,
    })
}

fn num(x: f64) -> String {
    format!("{x:.14e}")
}

impl SweepResult {
    pub fn columns(&self) -> Vec<String> {
        let variant = self.spec.base.variant;
        let suffixes: Vec<String> = match variant {
            Variant::Both => self.spec.base.variant.couplings().iter().map(|c| format!("_{}", c.label())).collect(),
            _ => vec![String::new()],
        };
        let per = |name: &str| suffixes.iter().map(|s| format!("{name}{s}")).collect::<Vec<_>>();
        let mut cols: Vec<String> = self.spec.axes.iter().map(|a| a.name.clone()).collect();
        cols.extend(per("r1"));
        cols.extend(per("r2"));
        cols.push("L_delta".into());
        cols.push("n_bar1".into());
        for name in ["gamma_down", "j_up", "n_star", "t_cav_K", "ratio_t_cav_over_t_atom"] {
            cols.extend(per(name));
        }
        cols
    }

    pub fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|row| {
                let mut rec: Vec<String> = row.coords.iter().map(|&x| num(x)).collect();
                let each = |f: &dyn Fn(&SteadyReport) -> f64| row.reports.iter().map(|r| num(f(r))).collect::<Vec<_>>();
                rec.extend(each(&|r| r.r1));
                rec.extend(each(&|r| r.r2));
                rec.push(num(row.l_delta));
                rec.push(num(row.n_bar1));
                rec.extend(each(&|r| r.gamma_down));
                rec.extend(each(&|r| r.j_up));
                rec.extend(each(&|r| r.n_star));
                rec.extend(each(&|r| r.t_cav));
                rec.extend(each(&|r| r.t_cav / row.t_atom));
                rec
            })
            .collect()
    }

    pub fn header_lines(&self) -> Vec<String> {
        let mut lines = vec![format!("# {TOOL_VERSION}")];
        lines.extend(self.spec.notes.iter().map(|n| format!("# {n}")));
        for a in &self.spec.axes {
            let first = a.values[0];
            let last = a.values[a.len() - 1];
            lines.push(format!(
                "# axis: {} {:?} {} points [{first}, {last}]",
                a.name,
                a.scale,
                a.len()
            ));
        }
        for (k, v) in self.spec.base.describe() {
            lines.push(format!("# param: {k} = {v}"));
        }
        for w in &self.warnings {
            lines.push(format!("# warning: {w}"));
        }
        lines
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for line in self.header_lines() {
            writeln!(out, "{line}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns())?;
        for rec in self.records() {
            w.write_record(rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Column `name` as numbers.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns().iter().position(|c| c == name)?;
        Some(self.records().iter().map(|r| r[idx].parse().unwrap()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing() {
        let a: Axis = "delta_MHz:-50:50:5".parse().unwrap();
        assert_eq!(a.values, vec![-50.0, -25.0, 0.0, 25.0, 50.0]);
        let b: Axis = "kappa_per_s:1:1e4:5:log".parse().unwrap();
        for (x, y) in b.values.iter().zip([1.0, 10.0, 100.0, 1e3, 1e4]) {
            assert!((x / y - 1.0).abs() < 1e-12);
        }
        let c: Axis = "t_bath_K=0.1,0.5,1,4".parse().unwrap();
        assert_eq!(c.values, vec![0.1, 0.5, 1.0, 4.0]);
        for bad in ["delta_MHz:1:0:5", "kappa_per_s:0:1:5:log", "delta_MHz:0:1:1", "delta_MHz:0:1", "nope:0:1:3"] {
            assert!(bad.parse::<Axis>().is_err(), "{bad}");
        }
    }

    #[test]
    fn row_count_and_order() {
        let spec = SweepSpec::new(
            vec![
                "delta_MHz:-10:10:3".parse().unwrap(),
                "kappa_per_s=1,2".parse().unwrap(),
            ],
            ModelParams::default(),
        )
        .unwrap();
        let out = run_sweep(&spec).unwrap();
        assert_eq!(out.rows.len(), 6);
        assert_eq!(out.rows[1].coords, vec![-10.0, 2.0]);
        assert_eq!(out.rows[2].coords, vec![0.0, 1.0]);
        let mut buf = Vec::new();
        out.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 7);
        assert!(data[0].starts_with("delta_MHz,kappa_per_s,r1_one,r1_two,r2_one,r2_two,L_delta,n_bar1,gamma_down_one"));
    }

    #[test]
    fn single_variant_columns() {
        let base = ModelParams {
            variant: Variant::Two,
            ..Default::default()
        };
        let spec = SweepSpec::new(vec!["g_over_2pi_MHz:0.1:0.5:5".parse().unwrap()], base).unwrap();
        let out = run_sweep(&spec).unwrap();
        assert!(out.columns().contains(&"n_star".to_string()));
        assert_eq!(out.column("n_star").unwrap().len(), 5);
    }
}
