/// One logged optimizer step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub step: u64,
    pub lr: f64,
    pub loss: f64,
    pub param_norm: f64,
    pub update_norm: f64,
}
