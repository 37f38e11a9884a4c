//! Benchmark problems: CEC2022 F1–F5, five classic single-objective
//! functions, DTLZ1–7 and ZDT1–3.

mod cec2022;
mod front;
pub mod functions;
mod multi;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

pub use cec2022::Cec2022Transform;
pub(crate) use cec2022::sha256_hex;
pub use front::DEFAULT_REFERENCE_POINTS;

use crate::error::{Error, Result};
use crate::population::Bounds;
use multi::Zdt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ProblemId {
    Cec2022F1,
    Cec2022F2,
    Cec2022F3,
    Cec2022F4,
    Cec2022F5,
    Ackley,
    Griewank,
    Rosenbrock,
    Schwefel,
    Sphere,
    Dtlz1,
    Dtlz2,
    Dtlz3,
    Dtlz4,
    Dtlz5,
    Dtlz6,
    Dtlz7,
    Zdt1,
    Zdt2,
    Zdt3,
}

impl ProblemId {
    pub const ALL: [ProblemId; 20] = [
        ProblemId::Cec2022F1,
        ProblemId::Cec2022F2,
        ProblemId::Cec2022F3,
        ProblemId::Cec2022F4,
        ProblemId::Cec2022F5,
        ProblemId::Ackley,
        ProblemId::Griewank,
        ProblemId::Rosenbrock,
        ProblemId::Schwefel,
        ProblemId::Sphere,
        ProblemId::Dtlz1,
        ProblemId::Dtlz2,
        ProblemId::Dtlz3,
        ProblemId::Dtlz4,
        ProblemId::Dtlz5,
        ProblemId::Dtlz6,
        ProblemId::Dtlz7,
        ProblemId::Zdt1,
        ProblemId::Zdt2,
        ProblemId::Zdt3,
    ];

    pub fn as_str(self) -> &'static str {
        use ProblemId::*;
        match self {
            Cec2022F1 => "cec2022-f1",
            Cec2022F2 => "cec2022-f2",
            Cec2022F3 => "cec2022-f3",
            Cec2022F4 => "cec2022-f4",
            Cec2022F5 => "cec2022-f5",
            Ackley => "ackley",
            Griewank => "griewank",
            Rosenbrock => "rosenbrock",
            Schwefel => "schwefel",
            Sphere => "sphere",
            Dtlz1 => "dtlz1",
            Dtlz2 => "dtlz2",
            Dtlz3 => "dtlz3",
            Dtlz4 => "dtlz4",
            Dtlz5 => "dtlz5",
            Dtlz6 => "dtlz6",
            Dtlz7 => "dtlz7",
            Zdt1 => "zdt1",
            Zdt2 => "zdt2",
            Zdt3 => "zdt3",
        }
    }

    pub fn is_cec2022(self) -> bool {
        use ProblemId::*;
        matches!(self, Cec2022F1 | Cec2022F2 | Cec2022F3 | Cec2022F4 | Cec2022F5)
    }

    fn dtlz_variant(self) -> Option<u8> {
        use ProblemId::*;
        Some(match self {
            Dtlz1 => 1,
            Dtlz2 => 2,
            Dtlz3 => 3,
            Dtlz4 => 4,
            Dtlz5 => 5,
            Dtlz6 => 6,
            Dtlz7 => 7,
            _ => return None,
        })
    }

    fn zdt_variant(self) -> Option<Zdt> {
        match self {
            ProblemId::Zdt1 => Some(Zdt::One),
            ProblemId::Zdt2 => Some(Zdt::Two),
            ProblemId::Zdt3 => Some(Zdt::Three),
            _ => None,
        }
    }

    pub fn is_multi_objective(self) -> bool {
        self.dtlz_variant().is_some() || self.zdt_variant().is_some()
    }

    pub fn default_dim(self) -> usize {
        if self.is_cec2022() {
            20
        } else {
            50
        }
    }

    pub fn default_objectives(self) -> usize {
        if self.dtlz_variant().is_some() {
            3
        } else if self.zdt_variant().is_some() {
            2
        } else {
            1
        }
    }

    /// Search interval shared by every coordinate.
    pub fn search_interval(self) -> (f64, f64) {
        use ProblemId::*;
        match self {
            Cec2022F1 | Cec2022F2 | Cec2022F3 | Cec2022F4 | Cec2022F5 => (-100.0, 100.0),
            Ackley => (-32.0, 32.0),
            Griewank => (-600.0, 600.0),
            Rosenbrock => (-5.0, 10.0),
            Schwefel => (-500.0, 500.0),
            Sphere => (-5.12, 5.12),
            _ => (0.0, 1.0),
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        ProblemId::ALL
            .iter()
            .copied()
            .find(|p| p.as_str() == key || p.as_str().replace('-', "") == key)
            .ok_or_else(|| Error::UnknownId {
                kind: "problem",
                id: s.to_string(),
            })
    }
}

impl From<ProblemId> for String {
    fn from(p: ProblemId) -> String {
        p.as_str().to_string()
    }
}

impl TryFrom<String> for ProblemId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// A benchmark problem at a concrete dimension and objective count.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    id: ProblemId,
    dim: usize,
    objectives: usize,
    bounds: Bounds,
    transform: Option<Arc<Cec2022Transform>>,
}

impl ProblemInstance {
    pub fn new(id: ProblemId, dim: usize, objectives: usize) -> Result<Self> {
        let bad = |msg: String| Err(Error::Config(format!("{id}: {msg}")));
        if dim == 0 {
            return bad("dimension must be positive".into());
        }
        if id.is_multi_objective() {
            if id.zdt_variant().is_some() && (objectives != 2 || dim < 2) {
                return bad(format!("ZDT needs m = 2 and D >= 2, got m = {objectives}, D = {dim}"));
            }
            if id.dtlz_variant().is_some() && (objectives < 2 || dim < objectives) {
                return bad(format!("DTLZ needs 2 <= m <= D, got m = {objectives}, D = {dim}"));
            }
        } else if objectives != 1 {
            return bad(format!("single-objective problem cannot have m = {objectives}"));
        }
        let (lo, hi) = id.search_interval();
        Ok(Self {
            id,
            dim,
            objectives,
            bounds: Bounds::uniform(dim, lo, hi)?,
            transform: None,
        })
    }

    pub fn with_defaults(id: ProblemId) -> Self {
        Self::new(id, id.default_dim(), id.default_objectives()).expect("default configuration is valid")
    }

    /// Attaches CEC2022 shift/rotation data.
    pub fn with_transform(mut self, transform: Cec2022Transform) -> Result<Self> {
        if !self.id.is_cec2022() {
            return Err(Error::Config(format!("{} does not take a transform", self.id)));
        }
        if transform.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "cec2022 transform",
                expected: self.dim,
                found: transform.dim(),
            });
        }
        self.transform = Some(Arc::new(transform));
        Ok(self)
    }

    pub fn id(&self) -> ProblemId {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn objectives(&self) -> usize {
        self.objectives
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    /// Hash of the attached transform; `identity` for CEC problems without one.
    pub fn transform_hash(&self) -> Option<String> {
        if !self.id.is_cec2022() {
            return None;
        }
        Some(
            self.transform
                .as_ref()
                .map_or_else(|| "identity".to_string(), |t| t.hash().to_string()),
        )
    }

    fn cec(&self, x: &[f64], rate: f64) -> Vec<f64> {
        let mut z = vec![0.0; x.len()];
        match &self.transform {
            Some(t) => t.apply(x, rate, &mut z),
            None => z.iter_mut().zip(x).for_each(|(o, v)| *o = v * rate),
        }
        z
    }

    /// Objective values of a single decision vector. `x.len()` must equal
    /// the dimension and `out.len()` the objective count.
    pub fn evaluate_into(&self, x: &[f64], out: &mut [f64]) {
        use functions::*;
        use ProblemId::*;
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.objectives);
        match self.id {
            Sphere => out[0] = sphere(x),
            Ackley => out[0] = ackley(x),
            Griewank => out[0] = griewank(x),
            Rosenbrock => out[0] = rosenbrock(x),
            Schwefel => out[0] = schwefel(x),
            Cec2022F1 => out[0] = zakharov(&self.cec(x, 1.0)),
            Cec2022F2 => {
                let mut z = self.cec(x, 2.048 / 100.0);
                z.iter_mut().for_each(|v| *v += 1.0);
                out[0] = rosenbrock(&z);
            }
            Cec2022F3 => out[0] = schaffer_f7(&self.cec(x, 1.0)),
            Cec2022F4 => out[0] = noncontinuous_rastrigin(&self.cec(x, 5.12 / 100.0)),
            Cec2022F5 => out[0] = levy(&self.cec(x, 5.12 / 100.0)),
            id => {
                if let Some(z) = id.zdt_variant() {
                    multi::zdt(z, x, out);
                } else if let Some(v) = id.dtlz_variant() {
                    multi::dtlz(v, x, out);
                }
            }
        }
    }

    /// Row `i` of the result holds the objectives of row `i` of `x`.
    /// Pure: no evaluation counting happens here.
    pub fn evaluate_batch(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "evaluate_batch",
                expected: self.dim,
                found: x.ncols(),
            });
        }
        let mut f = Array2::zeros((x.nrows(), self.objectives));
        let mut buf = vec![0.0; self.dim];
        for (row, mut out) in x.rows().into_iter().zip(f.rows_mut()) {
            let xs = match row.as_slice() {
                Some(s) => s,
                None => {
                    buf.iter_mut().zip(row.iter()).for_each(|(b, v)| *b = *v);
                    &buf
                }
            };
            self.evaluate_into(xs, out.as_slice_mut().expect("standard layout"));
        }
        Ok(f)
    }

    /// Points sampled from the analytic Pareto front.
    pub fn pareto_front_reference(&self, n_points: usize) -> Result<Array2<f64>> {
        if let Some(z) = self.id.zdt_variant() {
            Ok(front::zdt_front(z, n_points))
        } else if let Some(v) = self.id.dtlz_variant() {
            Ok(front::dtlz_front(v, self.objectives, n_points))
        } else {
            Err(Error::SingleObjective {
                problem: self.id.to_string(),
            })
        }
    }

    /// Known optimum of a single-objective problem.
    pub fn optimum(&self) -> Option<(Vec<f64>, f64)> {
        use ProblemId::*;
        let d = self.dim;
        match self.id {
            Sphere | Ackley | Griewank => Some((vec![0.0; d], 0.0)),
            Rosenbrock => Some((vec![1.0; d], 0.0)),
            Schwefel => Some((vec![420.9687; d], 0.0)),
            Cec2022F1 | Cec2022F2 | Cec2022F3 | Cec2022F4 | Cec2022F5 if self.transform.is_none() => {
                Some((vec![0.0; d], 0.0))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moea::dominates;
    use crate::rng::RngStream;
    use ndarray::{concatenate, Axis};

    fn eval1(p: &ProblemInstance, x: Vec<f64>) -> Vec<f64> {
        let x = Array2::from_shape_vec((1, x.len()), x).unwrap();
        p.evaluate_batch(x.view()).unwrap().row(0).to_vec()
    }

    #[test]
    fn known_optima() {
        let at = |id, v: f64| eval1(&ProblemInstance::with_defaults(id), vec![v; 50])[0];
        assert_eq!(at(ProblemId::Sphere, 0.0), 0.0);
        assert!(at(ProblemId::Rosenbrock, 1.0).abs() <= 1e-9);
        assert!(at(ProblemId::Ackley, 0.0).abs() <= 1e-9);
        assert!(at(ProblemId::Griewank, 0.0).abs() <= 1e-9);
        assert!(at(ProblemId::Schwefel, 420.9687) <= 1e-3);
    }

    #[test]
    fn zdt1_origin() {
        let p = ProblemInstance::with_defaults(ProblemId::Zdt1);
        assert_eq!(eval1(&p, vec![0.0; 50]), vec![0.0, 1.0]);
    }

    #[test]
    fn dtlz1_optimal_manifold() {
        let p = ProblemInstance::with_defaults(ProblemId::Dtlz1);
        let mut x = vec![0.5; 50];
        x[0] = 0.2;
        x[1] = 0.7;
        let f = eval1(&p, x);
        assert!((f.iter().sum::<f64>() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cec_identity_reduces_to_base_functions() {
        let mut rng = RngStream::new(3, 0);
        let x: Vec<f64> = (0..20).map(|_| rng.uniform_in(-100.0, 100.0)).collect();
        let plain = |id| eval1(&ProblemInstance::with_defaults(id), x.clone())[0];
        let with_identity = |id| {
            let p = ProblemInstance::with_defaults(id)
                .with_transform(Cec2022Transform::identity(20))
                .unwrap();
            eval1(&p, x.clone())[0]
        };
        let scaled = |r: f64| x.iter().map(|v| v * r).collect::<Vec<_>>();
        for id in [ProblemId::Cec2022F1, ProblemId::Cec2022F2, ProblemId::Cec2022F3, ProblemId::Cec2022F4, ProblemId::Cec2022F5] {
            assert_eq!(plain(id), with_identity(id));
        }
        assert_eq!(plain(ProblemId::Cec2022F1), functions::zakharov(&x));
        let z2: Vec<f64> = scaled(0.02048).iter().map(|v| v + 1.0).collect();
        assert_eq!(plain(ProblemId::Cec2022F2), functions::rosenbrock(&z2));
        assert_eq!(plain(ProblemId::Cec2022F3), functions::schaffer_f7(&x));
        assert_eq!(plain(ProblemId::Cec2022F4), functions::noncontinuous_rastrigin(&scaled(0.0512)));
        assert_eq!(plain(ProblemId::Cec2022F5), functions::levy(&scaled(0.0512)));
    }

    #[test]
    fn cec_shift_moves_the_optimum() {
        let shift: Vec<f64> = (0..20).map(|i| i as f64 - 10.0).collect();
        let mut rot = vec![0.0; 400];
        for i in 0..20 {
            rot[i * 20 + (i + 1) % 20] = 1.0;
        }
        let t = Cec2022Transform::new(shift.clone(), rot).unwrap();
        let p = ProblemInstance::with_defaults(ProblemId::Cec2022F5).with_transform(t).unwrap();
        assert!(eval1(&p, shift)[0].abs() < 1e-12);
        assert!(p.transform_hash().unwrap().len() == 64);
        assert!(ProblemInstance::with_defaults(ProblemId::Sphere)
            .with_transform(Cec2022Transform::identity(50))
            .is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = ProblemInstance::with_defaults(ProblemId::Sphere);
        assert!(matches!(
            p.evaluate_batch(Array2::zeros((2, 3)).view()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn arity_validation() {
        assert!(ProblemInstance::new(ProblemId::Zdt1, 10, 3).is_err());
        assert!(ProblemInstance::new(ProblemId::Dtlz2, 2, 3).is_err());
        assert!(ProblemInstance::new(ProblemId::Sphere, 10, 2).is_err());
        assert!(ProblemInstance::new(ProblemId::Dtlz2, 10, 4).is_ok());
    }

    #[test]
    fn batch_equals_row_concatenation() {
        for id in ProblemId::ALL {
            let p = ProblemInstance::with_defaults(id);
            let mut rng = RngStream::new(17, id as u64);
            let a = p.bounds().sample(5, &mut rng);
            let b = p.bounds().sample(7, &mut rng);
            let joint = p.evaluate_batch(concatenate![Axis(0), a, b].view()).unwrap();
            let sep = concatenate![
                Axis(0),
                p.evaluate_batch(a.view()).unwrap(),
                p.evaluate_batch(b.view()).unwrap()
            ];
            assert_eq!(joint, sep, "{id}");
        }
    }

    #[test]
    fn single_objective_values_bounded_below_by_optimum() {
        for id in ProblemId::ALL.into_iter().filter(|p| !p.is_multi_objective()) {
            let p = ProblemInstance::with_defaults(id);
            let mut rng = RngStream::new(23, id as u64);
            let x = p.bounds().sample(2000, &mut rng);
            let f = p.evaluate_batch(x.view()).unwrap();
            let (xo, fo) = p.optimum().unwrap();
            let at_opt = eval1(&p, xo)[0];
            assert!(at_opt <= 1e-3, "{id}: {at_opt}");
            for v in f.column(0) {
                assert!(*v >= 0.0 && *v >= fo && *v > at_opt, "{id}: {v}");
            }
        }
    }

    #[test]
    fn zdt1_front_contains_endpoints() {
        let p = ProblemInstance::with_defaults(ProblemId::Zdt1);
        let front = p.pareto_front_reference(3).unwrap();
        let rows: Vec<Vec<f64>> = front.rows().into_iter().map(|r| r.to_vec()).collect();
        assert!(rows.contains(&vec![0.0, 1.0]));
        assert!(rows.contains(&vec![1.0, 0.0]));
    }

    #[test]
    fn dtlz2_front_on_circle() {
        let p = ProblemInstance::new(ProblemId::Dtlz2, 10, 2).unwrap();
        for n in [2, 17, 1000] {
            let front = p.pareto_front_reference(n).unwrap();
            assert_eq!(front.nrows(), n);
            for r in front.rows() {
                assert!((r[0] * r[0] + r[1] * r[1] - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn reference_sizes() {
        let dtlz1 = ProblemInstance::with_defaults(ProblemId::Dtlz1);
        assert_eq!(dtlz1.pareto_front_reference(1000).unwrap().nrows(), 990);
        let zdt2 = ProblemInstance::with_defaults(ProblemId::Zdt2);
        assert_eq!(zdt2.pareto_front_reference(1000).unwrap().nrows(), 1000);
    }

    #[test]
    fn every_front_is_mutually_non_dominated() {
        for id in ProblemId::ALL.into_iter().filter(|p| p.is_multi_objective()) {
            for m in if id.dtlz_variant().is_some() { vec![2, 3] } else { vec![2] } {
                let p = ProblemInstance::new(id, 12, m).unwrap();
                let front = p.pareto_front_reference(300).unwrap();
                assert!(front.nrows() > 10, "{id} m={m}");
                for a in front.rows() {
                    for b in front.rows() {
                        assert!(
                            !dominates(a.as_slice().unwrap(), b.as_slice().unwrap()),
                            "{id} m={m}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn dtlz_fronts_match_objective_geometry() {
        let p = ProblemInstance::new(ProblemId::Dtlz1, 12, 3).unwrap();
        for r in p.pareto_front_reference(200).unwrap().rows() {
            assert!((r.sum() - 0.5).abs() < 1e-12);
        }
        let p = ProblemInstance::new(ProblemId::Dtlz5, 12, 3).unwrap();
        for r in p.pareto_front_reference(200).unwrap().rows() {
            assert!((r.dot(&r) - 1.0).abs() < 1e-12);
            assert!((r[0] - r[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn single_objective_front_is_an_error() {
        let p = ProblemInstance::with_defaults(ProblemId::Ackley);
        assert!(matches!(p.pareto_front_reference(10), Err(Error::SingleObjective { .. })));
    }

    #[test]
    fn parse_ids() {
        assert_eq!("ZDT2".parse::<ProblemId>().unwrap(), ProblemId::Zdt2);
        assert_eq!("cec2022_f3".parse::<ProblemId>().unwrap(), ProblemId::Cec2022F3);
        assert_eq!("cec2022f3".parse::<ProblemId>().unwrap(), ProblemId::Cec2022F3);
        assert!("rastrigin".parse::<ProblemId>().is_err());
    }
}
