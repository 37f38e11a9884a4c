use serde::{Deserialize, Serialize};

use super::{aggregate, run_with_clock, AggregateStats, ExperimentSpec};
use crate::budget::{Budget, Clock, RealClock};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Dimension,
    PopulationSize,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dim" | "dimension" | "d" => Ok(Self::Dimension),
            "pop" | "population" | "population_size" | "n" => Ok(Self::PopulationSize),
            _ => Err(Error::UnknownId {
                kind: "sweep axis",
                id: s.to_string(),
            }),
        }
    }
}

/// 16, 32, ..., 8192.
pub fn default_sweep_values() -> Vec<usize> {
    (4..=13).map(|k| 1usize << k).collect()
}

fn default_timing() -> Budget {
    Budget::Generations(100)
}

fn default_throughput() -> Option<Budget> {
    Some(Budget::WallTime(30.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    #[serde(default = "default_sweep_values")]
    pub values: Vec<usize>,
    pub base: ExperimentSpec,
    /// Budget of the runtime experiment at each value.
    #[serde(default = "default_timing")]
    pub timing: Budget,
    /// Budget of the throughput experiment at each value; `None` skips it.
    #[serde(default = "default_throughput")]
    pub throughput: Option<Budget>,
}

impl SweepSpec {
    pub fn new(axis: SweepAxis, values: Vec<usize>, base: ExperimentSpec) -> Self {
        Self {
            axis,
            values,
            base,
            timing: default_timing(),
            throughput: default_throughput(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep needs at least one value".into()));
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("sweep values must be strictly increasing".into()));
        }
        if self.values[0] == 0 {
            return Err(Error::Config("sweep values must be positive".into()));
        }
        Ok(())
    }

    /// The base experiment with the swept axis set to `value` and the given budget.
    pub fn at(&self, value: usize, budget: Budget) -> ExperimentSpec {
        let mut e = self.base.clone();
        match self.axis {
            SweepAxis::Dimension => e.dim = value,
            SweepAxis::PopulationSize => e.pop = value,
        }
        e.budget = budget;
        e
    }
}

/// Aggregated results at one axis value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: usize,
    pub timing: AggregateStats,
    pub throughput: Option<AggregateStats>,
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    run_sweep_with_clock(spec, &|| Box::new(RealClock::new()))
}

pub fn run_sweep_with_clock(spec: &SweepSpec, clock: &dyn Fn() -> Box<dyn Clock>) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    spec.values
        .iter()
        .map(|&value| {
            let timing = aggregate(&run_with_clock(&spec.at(value, spec.timing), clock)?);
            let throughput = match spec.throughput {
                Some(b) => Some(aggregate(&run_with_clock(&spec.at(value, b), clock)?)),
                None => None,
            };
            Ok(SweepRow {
                value,
                timing,
                throughput,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::AlgorithmId;
    use crate::budget::VirtualClock;
    use crate::problems::ProblemId;

    fn base() -> ExperimentSpec {
        let mut e = ExperimentSpec::new(AlgorithmId::Pso, ProblemId::Sphere, 8, Budget::Generations(5), 2);
        e.reps = 2;
        e
    }

    #[test]
    fn defaults_span_16_to_8192() {
        let v = default_sweep_values();
        assert_eq!((v[0], *v.last().unwrap(), v.len()), (16, 8192, 10));
    }

    #[test]
    fn values_must_increase() {
        assert!(SweepSpec::new(SweepAxis::Dimension, vec![8, 8], base()).validate().is_err());
        assert!(SweepSpec::new(SweepAxis::Dimension, vec![], base()).validate().is_err());
        assert!(run_sweep(&SweepSpec::new(SweepAxis::Dimension, vec![16, 8], base())).is_err());
    }

    #[test]
    fn one_value_sweep_equals_run_aggregate() {
        let clock = || -> Box<dyn Clock> { Box::new(VirtualClock::new(0.01)) };
        let mut s = SweepSpec::new(SweepAxis::PopulationSize, vec![12], base());
        s.timing = Budget::Generations(7);
        s.throughput = Some(Budget::WallTime(0.2));
        let rows = run_sweep_with_clock(&s, &clock).unwrap();
        assert_eq!(rows.len(), 1);
        let mut e = base();
        e.pop = 12;
        e.budget = Budget::Generations(7);
        assert_eq!(rows[0].timing, aggregate(&run_with_clock(&e, &clock).unwrap()));
        e.budget = Budget::WallTime(0.2);
        assert_eq!(rows[0].throughput.as_ref().unwrap(), &aggregate(&run_with_clock(&e, &clock).unwrap()));
    }

    #[test]
    fn axis_sets_dimension() {
        let s = SweepSpec::new(SweepAxis::Dimension, vec![3], base());
        assert_eq!(s.at(3, Budget::Generations(1)).dim, 3);
        assert_eq!("pop".parse::<SweepAxis>().unwrap(), SweepAxis::PopulationSize);
        assert!("x".parse::<SweepAxis>().is_err());
    }
}
