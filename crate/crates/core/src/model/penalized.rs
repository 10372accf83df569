use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::penalty::PenaltySpec;
use crate::solver::{fit_sncd, FitResult, SolveOptions};

/// Iteratively reweighted l1 schedule: `steps` weighted-l1 fits with weights
/// `p'_lambda(|beta^{(t-1)}|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrwSpec {
    pub penalty: PenaltySpec,
    pub steps: usize,
    pub solve: SolveOptions,
}

impl IrwSpec {
    pub const DEFAULT_STEPS: usize = 3;

    pub fn new(penalty: PenaltySpec, steps: usize, solve: SolveOptions) -> Result<Self> {
        if steps == 0 {
            return Err(Error::invalid("IRW needs at least one step"));
        }
        Ok(Self { penalty, steps, solve })
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Ok(Self { penalty: self.penalty.with_lambda(lambda)?, ..*self })
    }
}

/// Returns the `T` IRW iterates. Step 1 uses uniform weights `lambda` and
/// starts from `init` (or zero); each later step reweights from the previous
/// iterate and warm-starts from it.
pub fn fit_retire_penalized(
    data: &Dataset,
    loss: &LossSpec,
    irw: &IrwSpec,
    init: Option<&FitResult>,
) -> Result<Vec<FitResult>> {
    if data.d() == 0 {
        return Err(Error::invalid("penalized retire needs at least one predictor"));
    }
    if irw.steps == 0 {
        return Err(Error::invalid("IRW needs at least one step"));
    }
    let annotate = |step: usize| move |e: Error| Error::Step { step, source: Box::new(e) };

    let mut weights = vec![irw.penalty.weight_derivative(0.0)?; data.d()];
    let first = fit_sncd(data, loss, &weights, &irw.solve, init).map_err(annotate(1))?;
    let mut path = vec![first];
    for step in 2..=irw.steps {
        let prev = path.last().expect("at least one iterate");
        let next_weights = irw.penalty.weight_vector(&prev.slopes).map_err(annotate(step))?;
        let fit = if next_weights == weights {
            prev.clone()
        } else {
            fit_sncd(data, loss, &next_weights, &irw.solve, Some(prev)).map_err(annotate(step))?
        };
        weights = next_weights;
        path.push(fit);
    }
    Ok(path)
}
