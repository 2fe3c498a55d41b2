//! Obstacle-avoiding horizontal paths built by perturbing the four segments of
//! the bang-bang path and reconnecting them with short bang-bang connectors.
//!
//! Every segment of the output is checked with the exact segment predicate,
//! so avoidance is certified rather than sampled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{inv, mul, HPoint};
use crate::metrics::{cc_dist, DEFAULT_TOL};
use crate::obstacles::ObstacleSet;
use crate::paths::{bang_bang, bang_bang_with_params, cc_length, Axis, AxisSegment, BangBangPath};

/// Ratio between a bang-bang connector and the cc-distance it bridges.
const CONNECTOR_FACTOR: f64 = 5.0 * std::f64::consts::SQRT_2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanConfig {
    /// `ε` as a fraction of `d_cc(p,q)`.
    pub epsilon_fraction: f64,
    /// Multipliers applied to `ε` in turn when planning fails; values whose
    /// product with `epsilon_fraction` exceeds `1/(5√2)` are skipped, which
    /// keeps the total length within `ℓ_bb + 5·d_cc(p,q)`.
    pub epsilon_escalation: Vec<f64>,
    pub max_tries: u64,
    pub seed: u64,
    /// Required Korányi clearance of every segment.
    pub margin: f64,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            epsilon_fraction: 1.0 / (25.0 * std::f64::consts::SQRT_2),
            epsilon_escalation: vec![1.0, 2.0, 4.0, 5.0],
            max_tries: 1_000_000,
            seed: 0,
            margin: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub path: BangBangPath,
    pub length: f64,
    /// Positions in `path.segments` of the four displaced bang-bang segments.
    pub main_segments: [usize; 4],
    pub connector_length: f64,
    /// Largest connector; each is shorter than `5√2·epsilon`.
    pub max_connector: f64,
    pub epsilon: f64,
    /// Smallest Korányi clearance over all segments; `None` without obstacles.
    pub clearance: Option<f64>,
    pub tries: u64,
}

/// Plans a horizontal path from `p` to `q` avoiding `a`.
pub fn plan(p: HPoint, q: HPoint, a: &ObstacleSet, cfg: &PlanConfig) -> Result<PlanResult> {
    if !p.is_finite() || !q.is_finite() {
        return Err(Error::InvalidInput("endpoints must be finite".into()));
    }
    if p == q {
        return Err(Error::InvalidInput("endpoints coincide".into()));
    }
    if !(cfg.margin >= 0.0 && cfg.margin.is_finite()) {
        return Err(Error::InvalidParameter(format!("margin {} must be non-negative", cfg.margin)));
    }
    if !(cfg.epsilon_fraction > 0.0 && cfg.epsilon_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon fraction {} must lie in (0, 1)", cfg.epsilon_fraction)));
    }
    a.validate()?;
    if a.contains(p) || a.contains(q) {
        return Err(Error::InvalidInput("an endpoint lies in the obstacle set".into()));
    }
    let d = cc_dist(p, q, DEFAULT_TOL)?;
    let (bb, _) = bang_bang_with_params(p, q);
    if a.is_empty() {
        let length = cc_length(&bb);
        return Ok(PlanResult {
            path: bb,
            length,
            main_segments: [0, 1, 2, 3],
            connector_length: 0.0,
            max_connector: 0.0,
            epsilon: cfg.epsilon_fraction * d,
            clearance: None,
            tries: 0,
        });
    }

    let cap = 1.0 / (5.0 * std::f64::consts::SQRT_2);
    let mut total_tries = 0;
    let mut last_err = Error::Internal("no epsilon multiplier applicable".into());
    let mut first = true;
    for &mult in &cfg.epsilon_escalation {
        let frac = cfg.epsilon_fraction * mult;
        if !first && frac > cap * (1.0 + 1e-12) {
            continue;
        }
        first = false;
        match plan_with_epsilon(p, q, a, cfg, &bb, d, frac * d) {
            Ok(mut res) => {
                res.tries += total_tries;
                return Ok(res);
            }
            Err(Error::PlanningFailure { segment, tries }) => {
                total_tries += tries;
                last_err = Error::PlanningFailure { segment, tries: total_tries };
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}

struct Search<'a> {
    a: &'a ObstacleSet,
    margin: f64,
    budget: f64,
}

impl Search<'_> {
    /// Connector from `from` to `to` if it is shorter than the budget and clear.
    fn connector(&self, from: HPoint, to: HPoint) -> Option<BangBangPath> {
        let c = bang_bang(from, to);
        if cc_length(&c) >= self.budget {
            return None;
        }
        c.segments.iter().all(|s| self.a.segment_clear(s, self.margin)).then_some(c)
    }

    fn clear(&self, seg: &AxisSegment) -> bool {
        self.a.segment_clear(seg, self.margin)
    }
}

/// Uniform sample of the box `|x|,|y| <= s`, `|t| <= s²`.
fn sample(rng: &mut ChaCha8Rng, s: f64) -> HPoint {
    HPoint::new(rng.gen_range(-s..=s), rng.gen_range(-s..=s), rng.gen_range(-s * s..=s * s))
}

fn plan_with_epsilon(
    p: HPoint,
    q: HPoint,
    a: &ObstacleSet,
    cfg: &PlanConfig,
    bb: &BangBangPath,
    d: f64,
    epsilon: f64,
) -> Result<PlanResult> {
    let budget = CONNECTOR_FACTOR * epsilon;
    // a tiny floor keeps the certificate strictly positive
    let margin = cfg.margin.max(1e-9 * d);
    let search = Search { a, margin, budget };
    let delta = (0.5 * a.clear_radius(q, d)).min(d);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut pieces: Vec<AxisSegment> = Vec::new();
    let mut main_segments = [0usize; 4];
    let mut connector_length = 0.0f64;
    let mut max_connector = 0.0f64;
    let mut cur = p;
    let mut tries = 0u64;

    for (i, nominal) in bb.segments.iter().enumerate() {
        let step = AxisSegment::step(nominal.axis, nominal.displacement);
        let anchor = if i == 3 { mul(q, inv(step)) } else { nominal.start };
        let mut accepted = None;
        let mut k = 0u64;
        while k < cfg.max_tries {
            let v = match k {
                0 => anchor,
                1 => cur,
                _ if i == 3 && k.is_multiple_of(3) => {
                    // choose the end q*g inside the δ-ball; the segment tilts about q
                    let s = 0.5 * delta * 0.5f64.powi(((k / 3) % 6) as i32);
                    mul(mul(q, sample(&mut rng, s)), inv(step))
                }
                _ => {
                    // scales grow from 2⁻¹⁴ of the budget, so small perturbations win
                    let base = if k.is_multiple_of(2) { anchor } else { cur };
                    let level = ((k - 2) / 32).min(14) as i32;
                    mul(base, sample(&mut rng, budget * 0.5f64.powi(14 - level)))
                }
            };
            k += 1;
            let seg = AxisSegment { start: v, ..*nominal };
            if !search.clear(&seg) {
                continue;
            }
            let Some(before) = search.connector(cur, v) else { continue };
            let after = if i == 3 {
                let e = seg.end();
                if cc_dist(e, q, DEFAULT_TOL)? >= delta {
                    continue;
                }
                match search.connector(e, q) {
                    Some(c) => Some(c),
                    None => continue,
                }
            } else {
                None
            };
            accepted = Some((before, seg, after));
            break;
        }
        tries += k;
        let Some((before, seg, after)) = accepted else {
            return Err(Error::PlanningFailure { segment: i, tries });
        };
        let mut push_connector = |c: BangBangPath, pieces: &mut Vec<AxisSegment>| {
            let l = cc_length(&c);
            connector_length += l;
            max_connector = max_connector.max(l);
            pieces.extend(c.segments.into_iter().filter(|s| s.displacement != 0.0));
        };
        push_connector(before, &mut pieces);
        main_segments[i] = pieces.len();
        pieces.push(seg);
        cur = seg.end();
        if let Some(c) = after {
            push_connector(c, &mut pieces);
        }
    }

    let path = BangBangPath::new(pieces);
    let clearance = path
        .segments
        .iter()
        .filter_map(|s| a.segment_clearance(s, d))
        .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |m| m.min(c))));
    if clearance.is_some_and(|c| c <= 0.0) {
        return Err(Error::Internal("accepted path touches an obstacle".into()));
    }
    Ok(PlanResult {
        length: cc_length(&path),
        path,
        main_segments,
        connector_length,
        max_connector,
        epsilon,
        clearance,
        tries,
    })
}

/// Axis of each of the four bang-bang segments.
pub const SEGMENT_AXES: [Axis; 4] = [Axis::X, Axis::Y, Axis::X, Axis::Y];
