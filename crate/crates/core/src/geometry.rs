//! Sparse linear array layouts and their difference coarrays.
//!
//! Positions are integers in units of the base spacing `d0`. Internally all
//! indices are 0-based: row `m` of the selection matrix corresponds to the
//! coarray lag `m − (Mv − 1)`, and column `p + q·M` to the covariance entry
//! `R[p, q]` of the column-stacked `vec(R)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{CVec, RMat};

/// Restricted minimum-redundancy layouts (hole-free coarray), indexed by M.
const MRA_TABLE: &[(usize, &[i64])] = &[
    (3, &[0, 1, 3]),
    (4, &[0, 1, 4, 6]),
    (5, &[0, 1, 4, 7, 9]),
    (6, &[0, 1, 6, 9, 11, 13]),
    (7, &[0, 1, 4, 10, 12, 15, 17]),
    (8, &[0, 1, 4, 10, 16, 18, 21, 23]),
    (9, &[0, 1, 4, 10, 16, 22, 24, 27, 29]),
    (10, &[0, 1, 4, 10, 16, 22, 28, 30, 33, 35]),
    (11, &[0, 1, 3, 6, 13, 20, 27, 34, 38, 42, 43]),
    (12, &[0, 1, 3, 6, 13, 20, 27, 34, 41, 45, 49, 50]),
];

pub fn mra_sizes() -> Vec<usize> {
    MRA_TABLE.iter().map(|(m, _)| *m).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArrayKind {
    /// `m` sensors at `0..m`.
    Ula { m: usize },
    /// Extended co-prime array `{m·i : i < n} ∪ {n·j : j < 2m}`.
    Coprime { m: usize, n: usize },
    /// Two-level nested array `{1..=n1} ∪ {n1·k : k = 2..=n2+1}` (hole-free up to lag `n1(n2+1) − 1`).
    Nested { n1: usize, n2: usize },
    /// Tabulated minimum-redundancy array.
    Mra { m: usize },
    Custom { positions: Vec<i64> },
}

impl ArrayKind {
    /// Co-prime pair `(q, q + 1)`.
    pub fn coprime_pair(q: usize) -> Self {
        ArrayKind::Coprime { m: q, n: q + 1 }
    }

    pub fn label(&self) -> String {
        match self {
            ArrayKind::Ula { m } => format!("ula{m}"),
            ArrayKind::Coprime { m, n } => format!("coprime{m}x{n}"),
            ArrayKind::Nested { n1, n2 } => format!("nested{n1}x{n2}"),
            ArrayKind::Mra { m } => format!("mra{m}"),
            ArrayKind::Custom { positions } => format!("custom{}", positions.len()),
        }
    }

    /// The three ten-sensor arrays used throughout the reference experiments.
    pub fn reference_arrays() -> [(&'static str, ArrayKind); 3] {
        [
            ("coprime", ArrayKind::Coprime { m: 3, n: 5 }),
            ("nested", ArrayKind::Nested { n1: 5, n2: 5 }),
            ("mra", ArrayKind::Mra { m: 10 }),
        ]
    }
}

/// Parses `ula:M`, `coprime:M,N`, `nested:N1,N2`, `mra:M` or
/// `custom:d1,d2,...`. The bare names `coprime`, `nested` and `mra` select
/// the ten-sensor reference arrays.
impl std::str::FromStr for ArrayKind {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let bad = || Error::Config(format!("bad array spec {spec:?}"));
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        let name = name.trim().to_ascii_lowercase();
        if args.trim().is_empty() {
            return ArrayKind::reference_arrays()
                .into_iter()
                .find(|(n, _)| *n == name)
                .map(|(_, k)| k)
                .ok_or_else(bad);
        }
        let nums: Vec<i64> = args
            .split(',')
            .map(|t| t.trim().parse::<i64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let u = |i: usize| -> Result<usize> {
            nums.get(i)
                .and_then(|&v| usize::try_from(v).ok())
                .ok_or_else(bad)
        };
        let arity = |n: usize| if nums.len() == n { Ok(()) } else { Err(bad()) };
        match name.as_str() {
            "ula" => arity(1).and_then(|_| Ok(ArrayKind::Ula { m: u(0)? })),
            "coprime" => arity(2).and_then(|_| Ok(ArrayKind::Coprime { m: u(0)?, n: u(1)? })),
            "nested" => arity(2).and_then(|_| Ok(ArrayKind::Nested { n1: u(0)?, n2: u(1)? })),
            "mra" => arity(1).and_then(|_| Ok(ArrayKind::Mra { m: u(0)? })),
            "custom" => Ok(ArrayKind::Custom { positions: nums }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    positions: Vec<i64>,
    d0: f64,
    wavelength: f64,
}

impl ArrayGeometry {
    /// Validates and sorts integer positions. `d0` and `wavelength` share units.
    pub fn new(mut positions: Vec<i64>, d0: f64, wavelength: f64) -> Result<Self> {
        if !(d0 > 0.0 && wavelength > 0.0) {
            return Err(Error::Geometry(format!(
                "d0 ({d0}) and wavelength ({wavelength}) must be positive"
            )));
        }
        positions.sort_unstable();
        if let Some(w) = positions.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Geometry(format!("duplicate sensor position {}", w[0])));
        }
        if positions.len() < 2 {
            return Err(Error::Geometry(format!(
                "need at least 2 sensors, got {}",
                positions.len()
            )));
        }
        Ok(Self {
            positions,
            d0,
            wavelength,
        })
    }

    /// Half-wavelength spacing with unit wavelength.
    pub fn half_wavelength(positions: Vec<i64>) -> Result<Self> {
        Self::new(positions, 0.5, 1.0)
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn num_sensors(&self) -> usize {
        self.positions.len()
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Electrical phase per unit position, `2π d0 sin θ / λ`.
    pub fn phase(&self, theta: f64) -> f64 {
        std::f64::consts::TAU * self.d0 * theta.sin() / self.wavelength
    }

    /// Derivative of [`phase`](Self::phase) with respect to θ.
    pub fn phase_rate(&self, theta: f64) -> f64 {
        std::f64::consts::TAU * self.d0 * theta.cos() / self.wavelength
    }
}

pub fn make_array(kind: &ArrayKind, d0: f64, wavelength: f64) -> Result<ArrayGeometry> {
    let positive = |name: &str, v: usize| {
        if v == 0 {
            Err(Error::Geometry(format!("{name} must be positive")))
        } else {
            Ok(())
        }
    };
    let positions: Vec<i64> = match kind {
        ArrayKind::Ula { m } => {
            positive("m", *m)?;
            (0..*m as i64).collect()
        }
        ArrayKind::Coprime { m, n } => {
            positive("m", *m)?;
            positive("n", *n)?;
            let (m, n) = (*m as i64, *n as i64);
            let mut p: Vec<i64> = (0..n).map(|i| m * i).chain((0..2 * m).map(|j| n * j)).collect();
            p.sort_unstable();
            p.dedup();
            p
        }
        ArrayKind::Nested { n1, n2 } => {
            positive("n1", *n1)?;
            positive("n2", *n2)?;
            let (n1, n2) = (*n1 as i64, *n2 as i64);
            (1..=n1).chain((2..=n2 + 1).map(|k| n1 * k)).collect()
        }
        ArrayKind::Mra { m } => MRA_TABLE
            .iter()
            .find(|(size, _)| size == m)
            .map(|(_, p)| p.to_vec())
            .ok_or_else(|| Error::UnsupportedMra {
                requested: *m,
                available: mra_sizes(),
            })?,
        ArrayKind::Custom { positions } => positions.clone(),
    };
    ArrayGeometry::new(positions, d0, wavelength)
}

/// Difference set, weight function and central virtual-ULA size.
#[derive(Debug, Clone)]
pub struct CoarrayStructure {
    /// `diff[(p, q)] = d_p − d_q`.
    pub diff: nalgebra::DMatrix<i64>,
    /// `ω(l)`: number of sensor pairs with difference `l`.
    pub weights: BTreeMap<i64, usize>,
    /// Half-size of the central contiguous segment `{−Mv+1, …, Mv−1}`.
    pub mv: usize,
}

impl CoarrayStructure {
    pub fn weight(&self, lag: i64) -> usize {
        self.weights.get(&lag).copied().unwrap_or(0)
    }

    pub fn num_sensors(&self) -> usize {
        self.diff.nrows()
    }

    /// Length of the virtual ULA observation, `2Mv − 1`.
    pub fn virtual_len(&self) -> usize {
        2 * self.mv - 1
    }
}

pub fn difference_coarray(geom: &ArrayGeometry) -> CoarrayStructure {
    let p = geom.positions();
    let m = p.len();
    let diff = nalgebra::DMatrix::from_fn(m, m, |i, j| p[i] - p[j]);
    let mut weights = BTreeMap::new();
    for &d in diff.iter() {
        *weights.entry(d).or_insert(0usize) += 1;
    }
    let mut mv = 0usize;
    while weights.contains_key(&(mv as i64)) {
        mv += 1;
    }
    CoarrayStructure { diff, weights, mv }
}

/// Dense coarray selection matrix `F` of size `(2Mv − 1) × M²`.
pub fn selection_matrix(co: &CoarrayStructure) -> RMat {
    let m = co.num_sensors();
    let mv = co.mv as i64;
    let mut f = RMat::zeros(co.virtual_len(), m * m);
    for q in 0..m {
        for p in 0..m {
            let lag = co.diff[(p, q)];
            if lag.abs() < mv {
                let row = (lag + mv - 1) as usize;
                f[(row, p + q * m)] = 1.0 / co.weight(lag) as f64;
            }
        }
    }
    f
}

/// Coarray data bundled for repeated use: geometry, coarray and `F`.
#[derive(Debug, Clone)]
pub struct Coarray {
    pub geometry: ArrayGeometry,
    pub structure: CoarrayStructure,
    pub selection: RMat,
}

impl Coarray {
    pub fn new(geometry: ArrayGeometry) -> Self {
        let structure = difference_coarray(&geometry);
        let selection = selection_matrix(&structure);
        Self {
            geometry,
            structure,
            selection,
        }
    }

    pub fn mv(&self) -> usize {
        self.structure.mv
    }

    pub fn num_sensors(&self) -> usize {
        self.geometry.num_sensors()
    }

    /// `z = F r`.
    pub fn select(&self, r: &CVec) -> Result<CVec> {
        crate::model::virtual_observation(&self.selection, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(p: &[i64]) -> ArrayGeometry {
        ArrayGeometry::half_wavelength(p.to_vec()).unwrap()
    }

    #[test]
    fn reference_layouts() {
        let co = make_array(&ArrayKind::Coprime { m: 3, n: 5 }, 0.5, 1.0).unwrap();
        assert_eq!(co.positions(), &[0, 3, 5, 6, 9, 10, 12, 15, 20, 25]);
        let fig = make_array(&ArrayKind::coprime_pair(2), 0.5, 1.0).unwrap();
        assert_eq!(fig.positions(), &[0, 2, 3, 4, 6, 9]);
        let ne = make_array(&ArrayKind::Nested { n1: 5, n2: 5 }, 0.5, 1.0).unwrap();
        assert_eq!(ne.positions(), &[1, 2, 3, 4, 5, 10, 15, 20, 25, 30]);
        let ula = make_array(&ArrayKind::Ula { m: 3 }, 0.5, 1.0).unwrap();
        assert_eq!(ula.positions(), &[0, 1, 2]);
        let mra = make_array(&ArrayKind::Mra { m: 10 }, 0.5, 1.0).unwrap();
        assert_eq!(mra.positions(), &[0, 1, 4, 10, 16, 22, 28, 30, 33, 35]);
    }

    #[test]
    fn parses_array_specs() {
        let p = |s: &str| s.parse::<ArrayKind>();
        assert_eq!(p("coprime:2,3").unwrap(), ArrayKind::Coprime { m: 2, n: 3 });
        assert_eq!(p("ULA:4").unwrap(), ArrayKind::Ula { m: 4 });
        assert_eq!(p("mra").unwrap(), ArrayKind::Mra { m: 10 });
        assert_eq!(p("nested: 5, 5").unwrap(), ArrayKind::Nested { n1: 5, n2: 5 });
        assert_eq!(p("custom:0,2,3").unwrap(), ArrayKind::Custom { positions: vec![0, 2, 3] });
        for bad in ["", "ula", "ula:1,2", "coprime:3", "mra:-1", "hex:3", "ula:x"] {
            assert!(matches!(p(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let dup = make_array(&ArrayKind::Custom { positions: vec![0, 3, 3] }, 0.5, 1.0);
        assert!(matches!(dup, Err(Error::Geometry(_))));
        let single = make_array(&ArrayKind::Custom { positions: vec![4] }, 0.5, 1.0);
        assert!(matches!(single, Err(Error::Geometry(_))));
        match make_array(&ArrayKind::Mra { m: 40 }, 0.5, 1.0) {
            Err(Error::UnsupportedMra { available, .. }) => {
                assert_eq!(available, (3..=12).collect::<Vec<_>>())
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(make_array(&ArrayKind::Nested { n1: 0, n2: 2 }, 0.5, 1.0).is_err());
    }

    #[test]
    fn mra_table_is_hole_free() {
        for m in mra_sizes() {
            let g = make_array(&ArrayKind::Mra { m }, 0.5, 1.0).unwrap();
            let co = difference_coarray(&g);
            assert_eq!(g.num_sensors(), m);
            let aperture = *g.positions().last().unwrap() as usize;
            assert_eq!(co.mv, aperture + 1, "MRA M={m}");
        }
    }

    #[test]
    fn toy_array_weights() {
        let co = difference_coarray(&geom(&[0, 1, 4]));
        assert_eq!(co.weight(0), 3);
        assert_eq!(co.weight(1), 1);
        assert_eq!(co.weight(-1), 1);
        assert_eq!(co.mv, 2);
    }

    #[test]
    fn virtual_ula_sizes() {
        assert_eq!(difference_coarray(&geom(&[0, 2, 3, 4, 6, 9])).mv, 8);
        assert_eq!(difference_coarray(&geom(&[1, 2, 3, 4, 5, 10, 15, 20, 25, 30])).mv, 30);
        assert_eq!(difference_coarray(&geom(&[0, 3, 5, 6, 9, 10, 12, 15, 20, 25])).mv, 18);
    }

    #[test]
    fn toy_selection_matrix() {
        let f = selection_matrix(&difference_coarray(&geom(&[0, 1, 4])));
        let third = 1.0 / 3.0;
        #[rustfmt::skip]
        let expected = RMat::from_row_slice(3, 9, &[
            0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            third, 0.0, 0.0, 0.0, third, 0.0, 0.0, 0.0, third,
            0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        ]);
        assert_eq!(f, expected);
    }

    #[test]
    fn ula_selection_matrix_shape() {
        let co = difference_coarray(&geom(&[0, 1, 2]));
        let weights: Vec<usize> = (-2..=2).map(|l| co.weight(l)).collect();
        assert_eq!(weights, vec![1, 2, 3, 2, 1]);
        let f = selection_matrix(&co);
        assert_eq!(f.shape(), (5, 9));
    }
}
