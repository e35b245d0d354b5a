use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::measure_prepare::{choi, LinearMap, MeasurePrepareChannel};
use crate::config::Tolerances;
use crate::qops::linalg::{self, CMatrix};
use crate::qops::random::random_state;
use crate::qops::{partial_trace, DensityOperator, HermitianOperator, Operator};

/// One measured condition. `value` is a violation measure: the check passes
/// when it does not exceed `threshold` (or stays strictly below it for
/// strict inequalities).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold, passed: value <= threshold }
    }

    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold, passed: value < threshold }
    }

    /// A boolean condition recorded as value 0 (holds) or 1 (fails).
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check { name: name.into(), value: if ok { 0.0 } else { 1.0 }, threshold: 0.0, passed: ok }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Default for VerificationReport {
    fn default() -> Self {
        VerificationReport { checks: Vec::new(), passed: true }
    }
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        for c in other.checks {
            self.push(c);
        }
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// One line per check, for terminal output.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            out.push_str(&format!("{mark} {:<32} {:>12.4e}  (limit {:.1e})\n", c.name, c.value, c.threshold));
        }
        out
    }
}

fn negativity(m: &CMatrix) -> f64 {
    (-linalg::min_eigenvalue(m)).max(0.0)
}

/// Trace-preservation samples are drawn only up to this input dimension;
/// beyond it completeness already certifies the property.
const TP_SAMPLE_DIM: usize = 256;

/// Completeness, effect bounds, preparation validity, trace preservation on
/// seeded random inputs and, for small channels, Choi positivity.
pub fn verify_cptp(channel: &MeasurePrepareChannel, tol: &Tolerances) -> VerificationReport {
    let mut r = VerificationReport::new();
    let din = channel.input_dim();
    let id = CMatrix::identity(din, din);

    let mut sum = CMatrix::zeros(din, din);
    for b in channel.branches() {
        sum += b.effect.matrix();
    }
    r.push(Check::at_most("completeness", linalg::max_abs(&(&sum - &id)), tol.channel));

    let (lo, hi) = channel.branches().iter().fold((0.0f64, 0.0f64), |(lo, hi), b| {
        (lo.max(negativity(b.effect.matrix())), hi.max(negativity(&(&id - b.effect.matrix()))))
    });
    r.push(Check::at_most("effects_nonnegative", lo, tol.channel));
    r.push(Check::at_most("effects_below_identity", hi, tol.channel));

    let prep = channel.branches().iter().fold(0.0f64, |acc, b| {
        let m = b.prep.matrix();
        acc.max(linalg::hermiticity_defect(m)).max(negativity(m)).max((linalg::trace_re(m) - 1.0).abs())
    });
    r.push(Check::at_most("preparations_valid", prep, tol.channel));

    if din <= TP_SAMPLE_DIM {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let worst = (0..3)
            .map(|_| {
                let s = random_state(&mut rng, din);
                (linalg::trace_re(&channel.apply_matrix(s.matrix())) - 1.0).abs()
            })
            .fold(0.0f64, f64::max);
        r.push(Check::at_most("trace_preserving", worst, tol.channel));
    }

    if din <= tol.max_choi_input && din * channel.output_dim() <= tol.max_dim {
        if let Ok(j) = choi(channel, tol) {
            r.push(Check::at_most("choi_positive", negativity(&j), tol.channel));
            let dims = vec![din, channel.output_dim()];
            let reduced = partial_trace(&HermitianOperator::from_raw(dims, j), &[0]).map(|h| h.into_matrix());
            let defect = reduced.map_or(f64::INFINITY, |m| linalg::max_abs(&(m - &id)));
            r.push(Check::at_most("choi_input_marginal", defect, tol.channel));
        }
    }
    r
}

/// [`verify_cptp`] plus `½‖Λ(γ_in) - γ_out‖₁ ≤ tol.channel`.
pub fn verify_gibbs_preserving(
    channel: &MeasurePrepareChannel,
    gibbs_in: &DensityOperator,
    gibbs_out: &DensityOperator,
    tol: &Tolerances,
) -> VerificationReport {
    let mut r = verify_cptp(channel, tol);
    let err = channel
        .apply(gibbs_in)
        .and_then(|out| crate::qops::trace_distance(&out, gibbs_out))
        .unwrap_or(f64::INFINITY);
    r.push(Check::at_most("gibbs_fixed_point", err, tol.channel));
    r
}
