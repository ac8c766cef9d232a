use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fmt_f64;

use super::quadrature::Composite;

/// Initial plaque density on `[x0, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec {
    Zero,
    /// `(total / scale) exp(-(x - x0) / scale)`, so that `int f = total`.
    ExpDecay { total: f64, scale: f64 },
    /// Piecewise-linear through `(x, f)` samples, zero outside them.
    Table { x: Vec<f64>, f: Vec<f64> },
}

impl DensitySpec {
    pub fn exp_decay(total: f64, scale: f64) -> Self {
        DensitySpec::ExpDecay { total, scale }
    }

    /// Reads a two-column `x,f` CSV with a header row.
    pub fn from_table_file(path: impl AsRef<Path>) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path.as_ref())?;
        let (mut xs, mut fs) = (Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Argument(format!("bad density table row {:?}", rec)))
            };
            xs.push(parse(0)?);
            fs.push(parse(1)?);
        }
        Self::table(xs, fs)
    }

    pub fn table(x: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if x.len() != f.len() || x.len() < 2 {
            return Err(Error::Argument("density table needs at least two (x, f) rows".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Argument("density table x values must increase".into()));
        }
        if let Some(v) = f.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::Argument(format!("density table has negative value {v}")));
        }
        Ok(DensitySpec::Table { x, f })
    }

    /// Parses `zero`, `exp_decay(scale)`, `exp_decay(scale,total)` or
    /// `table(path)`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t == "zero" {
            return Ok(DensitySpec::Zero);
        }
        let inner = |prefix: &str| t.strip_prefix(prefix).and_then(|r| r.strip_suffix(')'));
        if let Some(args) = inner("exp_decay(") {
            let nums: Vec<f64> = args
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Argument(format!("bad density spec `{t}`")))?;
            return match nums[..] {
                [scale] if scale > 0.0 => Ok(DensitySpec::exp_decay(1.0, scale)),
                [scale, total] if scale > 0.0 && total >= 0.0 => Ok(DensitySpec::exp_decay(total, scale)),
                _ => Err(Error::Argument(format!("bad density spec `{t}`"))),
            };
        }
        if let Some(path) = inner("table(") {
            return Self::from_table_file(path.trim());
        }
        Err(Error::Argument(format!("density spec must be zero | exp_decay(scale) | table(file), got `{t}`")))
    }

    pub fn value(&self, x: f64, x0: f64) -> f64 {
        match self {
            DensitySpec::Zero => 0.0,
            DensitySpec::ExpDecay { total, scale } => {
                if x < x0 {
                    0.0
                } else {
                    total / scale * (-(x - x0) / scale).exp()
                }
            }
            DensitySpec::Table { x: xs, f } => {
                if x < xs[0] || x > xs[xs.len() - 1] {
                    return 0.0;
                }
                let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
                let w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
                f[i - 1] + w * (f[i] - f[i - 1])
            }
        }
    }

    /// The breakpoints inside `[a, b]`, so quadrature panels can respect kinks.
    fn kinks(&self, a: f64, b: f64) -> Vec<f64> {
        match self {
            DensitySpec::Table { x, .. } => x.iter().copied().filter(|&v| v > a && v < b).collect(),
            _ => Vec::new(),
        }
    }

    /// `int_a^b x^r f dx` by Gauss–Legendre between breakpoints.
    pub fn moment(&self, r: f64, a: f64, b: f64, x0: f64) -> f64 {
        let q = Composite::new(8, 64);
        let mut cuts = vec![a];
        cuts.extend(self.kinks(a, b));
        cuts.push(b);
        cuts.windows(2).map(|w| q.integrate(w[0], w[1], |x| x.powf(r) * self.value(x, x0))).sum()
    }
}

/// Cell averages of the plaque density on `[x0, x_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaqueGrid {
    x_edges: Vec<f64>,
    centers: Vec<f64>,
    pub f_avg: Vec<f64>,
    /// Mass `int x f` carried through `x_max` so far.
    pub outflow_mass: f64,
}

impl PlaqueGrid {
    pub fn from_edges(x_edges: Vec<f64>) -> Result<Self> {
        if x_edges.len() < 2 || x_edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Argument("grid edges must be strictly increasing".into()));
        }
        let centers = x_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let cells = x_edges.len() - 1;
        Ok(PlaqueGrid { x_edges, centers, f_avg: vec![0.0; cells], outflow_mass: 0.0 })
    }

    pub fn uniform(x0: f64, x_max: f64, cells: usize) -> Result<Self> {
        if cells == 0 || !(x_max > x0) {
            return Err(Error::Argument(format!("need cells > 0 and x_max > x0, got {cells} cells on [{x0}, {x_max}]")));
        }
        let h = (x_max - x0) / cells as f64;
        let mut edges: Vec<f64> = (0..=cells).map(|i| x0 + h * i as f64).collect();
        edges[cells] = x_max;
        Self::from_edges(edges)
    }

    /// Uniform grid with cell averages of `spec` (three-point Gauss per cell).
    pub fn with_density(x0: f64, x_max: f64, cells: usize, spec: &DensitySpec) -> Result<Self> {
        let mut g = Self::uniform(x0, x_max, cells)?;
        let q = Composite::new(3, 1);
        for i in 0..cells {
            let (a, b) = (g.x_edges[i], g.x_edges[i + 1]);
            g.f_avg[i] = q.integrate(a, b, |x| spec.value(x, x0)) / (b - a);
        }
        Ok(g)
    }

    pub fn cells(&self) -> usize {
        self.f_avg.len()
    }

    pub fn x0(&self) -> f64 {
        self.x_edges[0]
    }

    pub fn x_max(&self) -> f64 {
        self.x_edges[self.x_edges.len() - 1]
    }

    pub fn edges(&self) -> &[f64] {
        &self.x_edges
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn width(&self, i: usize) -> f64 {
        self.x_edges[i + 1] - self.x_edges[i]
    }

    pub fn min_width(&self) -> f64 {
        (0..self.cells()).map(|i| self.width(i)).fold(f64::INFINITY, f64::min)
    }

    /// Midpoint rule for `int x^r f dx`.
    pub fn moments(&self, r: f64) -> f64 {
        self.weighted(|x| x.powf(r))
    }

    /// Midpoint rule for `int g(x) f(x) dx`, summed left to right.
    pub fn weighted(&self, g: impl Fn(f64) -> f64) -> f64 {
        let mut s = 0.0;
        for i in 0..self.cells() {
            s += g(self.centers[i]) * self.f_avg[i] * self.width(i);
        }
        s
    }

    pub fn max_density(&self) -> f64 {
        self.f_avg.iter().fold(0.0f64, |m, &v| m.max(v))
    }

    /// `t,x_center,f_avg` rows.
    pub fn write_csv<W: Write>(&self, t: f64, mut out: W, header: bool) -> Result<()> {
        if header {
            writeln!(out, "t,x_center,f_avg")?;
        }
        for (x, f) in self.centers.iter().zip(&self.f_avg) {
            writeln!(out, "{},{},{}", fmt_f64(t), fmt_f64(*x), fmt_f64(*f))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_moments() {
        let g = PlaqueGrid::with_density(1.0, 41.0, 8000, &DensitySpec::exp_decay(1.0, 1.0)).unwrap();
        assert!((g.moments(0.0) - 1.0).abs() < 1e-8);
        assert!((g.moments(1.0) - 2.0).abs() < 1e-5);
        let z = PlaqueGrid::with_density(1.0, 41.0, 100, &DensitySpec::Zero).unwrap();
        for r in [0.0, 0.5, 1.0] {
            assert_eq!(z.moments(r), 0.0);
        }
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(DensitySpec::parse("zero").unwrap(), DensitySpec::Zero);
        assert_eq!(DensitySpec::parse("exp_decay(2)").unwrap(), DensitySpec::exp_decay(1.0, 2.0));
        assert_eq!(DensitySpec::parse("exp_decay(2, 3)").unwrap(), DensitySpec::exp_decay(3.0, 2.0));
        assert!(DensitySpec::parse("exp_decay(-1)").is_err());
        assert!(DensitySpec::parse("gauss(1)").is_err());
    }

    #[test]
    fn table_interpolates() {
        let t = DensitySpec::table(vec![1.0, 2.0, 3.0], vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(t.value(1.5, 1.0), 1.0);
        assert_eq!(t.value(3.5, 1.0), 0.0);
        assert!((t.moment(0.0, 1.0, 5.0, 1.0) - 2.0).abs() < 1e-13);
        assert!(DensitySpec::table(vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(DensitySpec::table(vec![1.0, 2.0], vec![0.0, -1.0]).is_err());
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(PlaqueGrid::uniform(1.0, 1.0, 10).is_err());
        assert!(PlaqueGrid::uniform(1.0, 2.0, 0).is_err());
        assert!(PlaqueGrid::from_edges(vec![1.0, 0.5]).is_err());
    }
}
