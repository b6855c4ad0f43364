use serde::{Deserialize, Serialize};

use super::filter::PreparedFilter;
use super::{canonical_lig, euler_maruyama, lambda_hat, OuError, OuModel, ZERO_TOL};
use crate::separation::{mu_separated, SeparationQuery};

/// Relative discrepancy allowed in positive mode.
pub const POSITIVE_TOL: f64 = 1e-8;
/// Positive-mode levels below this count as this value when forming ratios.
pub const POSITIVE_FLOOR: f64 = 1e-15;
const SCALE_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// The query is μ-separated; the filters must agree.
    Positive,
    /// The query is not separated; a visible discrepancy is expected.
    Negative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub t_end: f64,
    pub dt: f64,
    pub seed: u64,
    pub n_paths: usize,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams { t_end: 5.0, dt: 1e-3, seed: 7, n_paths: 10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BetaReport {
    pub beta: String,
    /// Per path: `max_t |λ̂(path) - λ̂(path with X^A replaced)| / scale`, both
    /// with observations `C ∪ A`. Zero up to rounding when the estimate only
    /// depends on the `C` coordinates.
    pub measurability: Vec<f64>,
    /// Per path: `max_t |λ̂ given C - λ̂ given C ∪ A| / scale`.
    pub version_gap: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub mode: Mode,
    pub separated: bool,
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub c: Vec<String>,
    pub sim: SimParams,
    pub per_beta: Vec<BetaReport>,
    /// Largest measurability discrepancy over all `β` and paths; this alone
    /// decides a negative-mode pass.
    pub level: f64,
    /// Largest version gap over all `β` and paths.
    pub version_level: f64,
    pub pass: bool,
}

fn max_rel(x: &[f64], y: &[f64], scale: f64) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
}

/// Compares conditional drift estimates for each `β ∈ B` on seeded paths.
///
/// The mode follows from μ-separation in the canonical graph; `expect`
/// turns a mismatch into an error. `A` is replaced by `A ∖ C`.
pub fn verify_global_markov(
    model: &OuModel,
    q: &SeparationQuery,
    sim: &SimParams,
    expect: Option<Mode>,
) -> Result<VerificationReport, OuError> {
    let g = canonical_lig(model, ZERO_TOL);
    let a = q.a.difference(&q.c);
    let q = SeparationQuery::new(&g, a.clone(), q.b.clone(), q.c.clone())?;
    let separated = mu_separated(&g, &q);
    let mode = if separated { Mode::Positive } else { Mode::Negative };
    if let Some(e) = expect {
        if e != mode {
            return Err(OuError::ModeMismatch { expected: e, separated });
        }
    }
    let steps = (sim.t_end / sim.dt).round() as usize;
    let w_c = q.c.clone();
    let w_ca = q.c.union(&a);
    let f_c = PreparedFilter::new(model, &w_c, sim.dt, steps)?;
    let f_ca = PreparedFilter::new(model, &w_ca, sim.dt, steps)?;
    let betas: Vec<_> = q.b.iter().collect();
    let mut per_beta: Vec<BetaReport> = betas
        .iter()
        .map(|&b| BetaReport { beta: g.label(b).to_string(), measurability: vec![], version_gap: vec![] })
        .collect();
    // Drift size for a one-standard-deviation move of every parent.
    let floors: Vec<f64> = betas
        .iter()
        .map(|b| {
            let row = model.m().row(b.index());
            let s: f64 = row.iter().enumerate().map(|(d, v)| v.abs() * model.sigma()[(d, d)].sqrt()).sum();
            s.max(SCALE_FLOOR)
        })
        .collect();
    for i in 0..sim.n_paths as u64 {
        let seed = sim.seed.wrapping_add(i);
        let path = euler_maruyama(model, sim.t_end, sim.dt, seed)?;
        let other = euler_maruyama(model, sim.t_end, sim.dt, seed ^ 0x9e37_79b9_7f4a_7c15)?;
        let spliced = path.splice(&other, &a)?;
        let run_c = f_c.run(&path)?;
        let run_ca = f_ca.run(&path)?;
        let run_sp = f_ca.run(&spliced)?;
        for (k, (rep, &b)) in per_beta.iter_mut().zip(&betas).enumerate() {
            let l_ca = lambda_hat(model, &run_ca, &path, b);
            let l_sp = lambda_hat(model, &run_sp, &spliced, b);
            let l_c = lambda_hat(model, &run_c, &path, b);
            let scale = l_ca.iter().chain(&l_c).fold(floors[k], |m: f64, v| m.max(v.abs()));
            rep.measurability.push(max_rel(&l_ca, &l_sp, scale));
            rep.version_gap.push(max_rel(&l_c, &l_ca, scale));
        }
    }
    let level = per_beta.iter().flat_map(|r| r.measurability.iter().copied()).fold(0.0, f64::max);
    let version_level = per_beta.iter().flat_map(|r| r.version_gap.iter().copied()).fold(0.0, f64::max);
    let pass = match mode {
        Mode::Positive => level.max(version_level) <= POSITIVE_TOL,
        Mode::Negative => level > POSITIVE_TOL,
    };
    Ok(VerificationReport {
        mode,
        separated,
        a: g.set_labels(&a),
        b: g.set_labels(&q.b),
        c: g.set_labels(&q.c),
        sim: sim.clone(),
        per_beta,
        level,
        version_level,
        pass,
    })
}
