//! MM and SQUAREM loops over the projected data grid.
//!
//! One MM step maps `x` to `proj(-sqrt(E_r) y / ||y||)` where `y` is the
//! majorizer direction at `x` and `E_r` the reference energy. Both loops
//! start at the reference grid, track the peak sidelobe `eta` of each
//! accepted iterate and stop at the first increase, returning the previous
//! iterate, so the trace is non-increasing by construction.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constellation::{ConstellationSpec, SubcarrierMask};
use crate::majorizer::{Majorization, Majorizer};
use crate::projector::project_grid;
use crate::spectrum::{cyclic_correlations, psl_db, LagWeights, SymbolGrid};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Exponent of the p-norm surrogate for the peak sidelobe.
    pub p: u32,
    pub max_iterations: usize,
    /// Step-length halvings per SQUAREM iteration before giving up.
    pub backtrack_cap: usize,
    /// SQUAREM when true, plain MM otherwise.
    pub accelerated: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            p: 50,
            max_iterations: 10,
            backtrack_cap: 20,
            accelerated: true,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::InvalidParameter(format!("p = {} < 2", self.p)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Fixed data of one optimization: reference grid, mask, constellation and
/// lag weights.
#[derive(Clone, Debug)]
pub struct WaveformProblem {
    pub reference: SymbolGrid,
    pub mask: SubcarrierMask,
    pub spec: ConstellationSpec,
    pub weights: LagWeights,
}

impl WaveformProblem {
    pub fn new(
        reference: SymbolGrid,
        mask: SubcarrierMask,
        spec: ConstellationSpec,
        weights: LagWeights,
    ) -> Result<Self> {
        if reference.n() != mask.n() || reference.m() != mask.m() || weights.len() != reference.n() {
            return Err(Error::Dimension(
                "reference, mask and weights disagree on N or M".into(),
            ));
        }
        if weights.is_empty() {
            return Err(Error::EmptyWeights);
        }
        Ok(Self {
            reference,
            mask,
            spec,
            weights,
        })
    }

    pub fn reference_energy(&self) -> f64 {
        self.reference.energy()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ObjectiveIncreased,
    MaxIterations,
    ZeroSidelobe,
    /// The majorizer direction vanished.
    Stationary,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::ObjectiveIncreased => "objective_increased",
            StopReason::MaxIterations => "max_iterations",
            StopReason::ZeroSidelobe => "zero_sidelobe",
            StopReason::Stationary => "stationary",
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptimizationReport {
    pub x_opt: SymbolGrid,
    /// `eta` of the reference followed by every accepted iterate.
    pub eta_trace: Vec<f64>,
    /// `eta` of the iterate that triggered the stop, if one was rejected.
    pub rejected_eta: Option<f64>,
    /// Outer iterations taken, the rejected one included.
    pub iterations_used: usize,
    pub stop_reason: StopReason,
    pub psl_db_before: f64,
    pub psl_db_after: f64,
}

pub enum StepOutcome {
    Moved(SymbolGrid),
    /// Zero sidelobe or zero direction: nothing left to do.
    Stationary,
}

pub struct Optimizer {
    problem: WaveformProblem,
    config: OptimizerConfig,
    majorizer: Majorizer,
    energy_sqrt: f64,
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl Optimizer {
    pub fn new(problem: WaveformProblem, config: OptimizerConfig) -> Result<Self> {
        config.validate()?;
        let majorizer = Majorizer::new(problem.reference.n(), problem.weights.clone(), config.p)?;
        let energy_sqrt = problem.reference_energy().sqrt();
        Ok(Self {
            problem,
            config,
            majorizer,
            energy_sqrt,
        })
    }

    pub fn problem(&self) -> &WaveformProblem {
        &self.problem
    }

    fn majorize(&self, x: &SymbolGrid) -> Result<Option<Majorization>> {
        match self.majorizer.majorize(x) {
            Ok(m) => Ok(Some(m)),
            Err(Error::ZeroSidelobe) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn step_from(&self, maj: &Majorization) -> Result<StepOutcome> {
        let y = maj.y.stacked();
        let ny = norm(y);
        if ny == 0.0 || !ny.is_finite() {
            return Ok(StepOutcome::Stationary);
        }
        let s = -self.energy_sqrt / ny;
        let cand = SymbolGrid::from_stacked(maj.y.n(), maj.y.m(), y.iter().map(|z| z * s).collect())?;
        Ok(StepOutcome::Moved(project_grid(
            &cand,
            &self.problem.reference,
            &self.problem.mask,
            &self.problem.spec,
        )?))
    }

    /// One projected MM step from `x`.
    pub fn mm_step(&self, x: &SymbolGrid) -> Result<StepOutcome> {
        match self.majorize(x)? {
            Some(maj) => self.step_from(&maj),
            None => Ok(StepOutcome::Stationary),
        }
    }

    pub fn run(&self) -> Result<OptimizationReport> {
        if self.config.accelerated {
            self.run_squarem()
        } else {
            self.run_mm()
        }
    }

    fn finish(
        &self,
        x: SymbolGrid,
        trace: Vec<f64>,
        rejected: Option<f64>,
        iterations: usize,
        stop: StopReason,
    ) -> Result<OptimizationReport> {
        let w = &self.problem.weights;
        let before = psl_db(&cyclic_correlations(&self.problem.reference), w)?;
        let after = psl_db(&cyclic_correlations(&x), w)?;
        Ok(OptimizationReport {
            x_opt: x,
            eta_trace: trace,
            rejected_eta: rejected,
            iterations_used: iterations,
            stop_reason: stop,
            psl_db_before: before,
            psl_db_after: after,
        })
    }

    pub fn run_mm(&self) -> Result<OptimizationReport> {
        let mut x = self.problem.reference.clone();
        let mut prev: Option<SymbolGrid> = None;
        let mut trace = Vec::new();
        let mut l = 0;
        loop {
            let Some(maj) = self.majorize(&x)? else {
                trace.push(self.majorizer.eta(&x)?);
                return self.finish(x, trace, None, l, StopReason::ZeroSidelobe);
            };
            if let (Some(&last), Some(p)) = (trace.last(), prev.as_ref()) {
                if maj.eta > last {
                    return self.finish(p.clone(), trace, Some(maj.eta), l, StopReason::ObjectiveIncreased);
                }
            }
            trace.push(maj.eta);
            if l == self.config.max_iterations {
                return self.finish(x, trace, None, l, StopReason::MaxIterations);
            }
            match self.step_from(&maj)? {
                StepOutcome::Moved(next) => {
                    prev = Some(std::mem::replace(&mut x, next));
                    l += 1;
                }
                StepOutcome::Stationary => return self.finish(x, trace, None, l, StopReason::Stationary),
            }
        }
    }

    /// Squared extrapolation from `x` through two MM steps, with step-length
    /// backtracking toward the plain double step until `eta` does not exceed
    /// `eta_l` or the cap is hit.
    fn extrapolate(
        &self,
        x: &SymbolGrid,
        x1: &SymbolGrid,
        x2: &SymbolGrid,
        eta_l: f64,
    ) -> Result<(SymbolGrid, Option<Majorization>)> {
        let r: Vec<Complex64> = x1.stacked().iter().zip(x.stacked()).map(|(a, b)| a - b).collect();
        let v: Vec<Complex64> = x2
            .stacked()
            .iter()
            .zip(x1.stacked())
            .zip(&r)
            .map(|((c, b), d)| c - b - d)
            .collect();
        let nv = norm(&v);
        if nv == 0.0 {
            let maj = self.majorize(x2)?;
            return Ok((x2.clone(), maj));
        }
        let mut alpha = -norm(&r) / nv;
        let mut h = 0;
        loop {
            let raw: Vec<Complex64> = x
                .stacked()
                .iter()
                .zip(&r)
                .zip(&v)
                .map(|((a, rr), vv)| a - rr * (2.0 * alpha) + vv * (alpha * alpha))
                .collect();
            let raw = SymbolGrid::from_stacked(x.n(), x.m(), raw)?;
            let cand = project_grid(&raw, &self.problem.reference, &self.problem.mask, &self.problem.spec)?;
            let maj = self.majorize(&cand)?;
            let eta = match &maj {
                Some(m) => m.eta,
                None => return Ok((cand, None)),
            };
            if eta <= eta_l || h == self.config.backtrack_cap {
                return Ok((cand, maj));
            }
            alpha = (alpha - 1.0) / 2.0;
            h += 1;
        }
    }

    pub fn run_squarem(&self) -> Result<OptimizationReport> {
        let mut x = self.problem.reference.clone();
        let Some(mut maj) = self.majorize(&x)? else {
            let eta = self.majorizer.eta(&x)?;
            return self.finish(x, vec![eta], None, 0, StopReason::ZeroSidelobe);
        };
        let mut trace = vec![maj.eta];
        let mut l = 0;
        while l < self.config.max_iterations {
            let x1 = match self.step_from(&maj)? {
                StepOutcome::Moved(g) => g,
                StepOutcome::Stationary => return self.finish(x, trace, None, l, StopReason::Stationary),
            };
            let (cand, cand_maj) = match self.majorize(&x1)? {
                None => (x1, None),
                Some(m1) => {
                    let x2 = match self.step_from(&m1)? {
                        StepOutcome::Moved(g) => g,
                        StepOutcome::Stationary => x1.clone(),
                    };
                    self.extrapolate(&x, &x1, &x2, maj.eta)?
                }
            };
            l += 1;
            let last = *trace.last().expect("non-empty");
            match cand_maj {
                None => {
                    let eta = self.majorizer.eta(&cand)?;
                    if eta > last {
                        return self.finish(x, trace, Some(eta), l, StopReason::ObjectiveIncreased);
                    }
                    trace.push(eta);
                    return self.finish(cand, trace, None, l, StopReason::ZeroSidelobe);
                }
                Some(m) => {
                    if m.eta > last {
                        return self.finish(x, trace, Some(m.eta), l, StopReason::ObjectiveIncreased);
                    }
                    trace.push(m.eta);
                    x = cand;
                    maj = m;
                }
            }
        }
        self.finish(x, trace, None, l, StopReason::MaxIterations)
    }
}

/// Convenience wrapper: build the optimizer and run it.
pub fn optimize(problem: WaveformProblem, config: OptimizerConfig) -> Result<OptimizationReport> {
    Optimizer::new(problem, config)?.run()
}
