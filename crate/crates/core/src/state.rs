use crate::grid::GridSpec;
use crate::scheme::HyperbolicState;

/// Every field of the model at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub hyp: HyperbolicState,
    pub phi: Vec<Vec<f64>>,
}

impl State {
    pub fn new(hyp: HyperbolicState, phi: Vec<Vec<f64>>) -> Self {
        State { hyp, phi }
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        State::new(HyperbolicState::zeros(grid), grid.zeros())
    }

    pub fn time(&self) -> f64 {
        self.hyp.time
    }

    pub fn is_finite(&self) -> bool {
        self.hyp.is_finite() && self.phi.iter().flatten().all(|x| x.is_finite())
    }
}
