//! Randomized property campaigns. Each campaign is deterministic in its
//! seed, counts failures instead of panicking, and reports the worst value
//! it saw per tracked quantity.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use nsbox::decompose::{canonical2, canonical3, sample_ns_box, vertex_weights, SampleMode};
use nsbox::measures::{
    bell_discord, bell_monogamy_residuals, gq_monogamy_residual, mermin_discord,
};
use nsbox::quantum::{born_box, cq_state, me_mixture, preset_settings, qc_state, Settings};
use nsbox::{mix, pr_box, NsBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    BellMonogamy,
    GqMonogamy,
    CqQcNull,
    Rbmd,
    DecompRoundtrip,
}

impl Property {
    pub fn name(&self) -> &'static str {
        match self {
            Property::BellMonogamy => "bell-monogamy",
            Property::GqMonogamy => "gq-monogamy",
            Property::CqQcNull => "cqqc-null",
            Property::Rbmd => "rbmd",
            Property::DecompRoundtrip => "decomp-roundtrip",
        }
    }

    pub const ALL: [Property; 5] = [
        Property::BellMonogamy,
        Property::GqMonogamy,
        Property::CqQcNull,
        Property::Rbmd,
        Property::DecompRoundtrip,
    ];
}

impl FromStr for Property {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Property::ALL
            .iter()
            .find(|p| p.name() == s.to_ascii_lowercase())
            .copied()
            .ok_or_else(|| format!("unknown property `{s}`"))
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Campaign outcome. Wall time is kept out of the serialized form so that
/// equal command lines produce byte-identical reports.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub property: String,
    pub run: u64,
    pub passed: u64,
    pub failed: u64,
    pub seed: u64,
    pub tolerance: f64,
    pub worst: BTreeMap<String, f64>,
    #[serde(skip)]
    pub wall: Duration,
}

impl RunReport {
    fn new(property: Property, seed: u64, tolerance: f64) -> Self {
        RunReport {
            property: property.name().to_string(),
            run: 0,
            passed: 0,
            failed: 0,
            seed,
            tolerance,
            worst: BTreeMap::new(),
            wall: Duration::ZERO,
        }
    }

    fn record(&mut self, ok: bool) {
        self.run += 1;
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
    }

    fn track_max(&mut self, key: &str, value: f64) {
        let e = self.worst.entry(key.to_string()).or_insert(f64::NEG_INFINITY);
        *e = e.max(value);
    }

    fn track_min(&mut self, key: &str, value: f64) {
        let e = self.worst.entry(key.to_string()).or_insert(f64::INFINITY);
        *e = e.min(value);
    }
}

pub(crate) fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub(crate) fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = [gauss(rng), gauss(rng), gauss(rng)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-6 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

fn random_ball(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let u = random_unit(rng);
    let r = rng.random::<f64>().cbrt();
    [u[0] * r, u[1] * r, u[2] * r]
}

pub(crate) fn random_settings(rng: &mut ChaCha8Rng) -> Settings {
    Settings::new(
        random_unit(rng),
        random_unit(rng),
        random_unit(rng),
        random_unit(rng),
    )
    .expect("normalized vectors")
}

fn random_weights8(rng: &mut ChaCha8Rng) -> [f64; 8] {
    let mut w = [0.0; 8];
    for v in &mut w {
        *v = -(1.0 - rng.random::<f64>()).ln();
    }
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    w
}

/// Runs `n` cases of the named property. Failures are counted, not thrown.
pub fn run_check(property: Property, n: u64, seed: u64, tol: f64) -> RunReport {
    let start = Instant::now();
    let mut report = RunReport::new(property, seed, tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..n {
        match property {
            Property::BellMonogamy => {
                let bx = sample_ns_box(rng.random(), SampleMode::VertexDirichlet);
                let min = bell_monogamy_residuals(&bx)
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min);
                report.track_min("min_bell_monogamy_residual", min);
                report.record(min >= -tol);
            }
            Property::GqMonogamy => {
                let bx = sample_ns_box(rng.random(), SampleMode::VertexDirichlet);
                let r = gq_monogamy_residual(&bx);
                report.track_min("min_gq_residual", r);
                report.record(r >= -tol);
            }
            Property::CqQcNull => {
                let st = random_cq_or_qc(&mut rng, case % 2 == 1);
                let settings = random_settings(&mut rng);
                let bx = born_box(&st, &settings);
                let worst = bell_discord(&bx).value.max(mermin_discord(&bx).value);
                report.track_max("max_discord", worst);
                report.record(worst <= tol);
            }
            Property::Rbmd => {
                let w = random_weights8(&mut rng);
                let state = me_mixture(&w).expect("normalized weights");
                let mt = preset_settings("mt", None).expect("fixed preset");
                let mm = preset_settings("mm", None).expect("fixed preset");
                let g = bell_discord(&born_box(&state, &mt)).value;
                let q = mermin_discord(&born_box(&state, &mm)).value;
                let dev = (g - std::f64::consts::SQRT_2 * q).abs();
                report.track_max("max_identity_deviation", dev);
                report.track_max("max_bell_measure", g);
                let bound = 2.0 * std::f64::consts::SQRT_2 + tol;
                report.record(dev <= tol && g <= bound);
            }
            Property::DecompRoundtrip => {
                let bx = sample_ns_box(rng.random(), SampleMode::VertexDirichlet);
                let ok = roundtrip_case(&bx, tol, &mut report);
                report.record(ok);
            }
        }
    }
    report.wall = start.elapsed();
    report
}

fn roundtrip_case(bx: &NsBox, tol: f64, report: &mut RunReport) -> bool {
    let mut ok = true;
    match vertex_weights(bx) {
        Ok(w) => {
            let d = w.remix().distance(bx);
            report.track_max("max_vertex_remix_distance", d);
            ok &= d <= tol;
        }
        Err(_) => {
            report.track_max("vertex_failures", 1.0);
            ok = false;
        }
    }
    match canonical2(bx) {
        Ok(d2) => {
            let remix = match d2.pr {
                Some(k) => mix(&[pr_box(k), d2.residual.clone()], &[d2.mu, 1.0 - d2.mu])
                    .expect("weights in range"),
                None => d2.residual.clone(),
            };
            let dist = remix.distance(bx);
            let resg = bell_discord(&d2.residual).value;
            report.track_max("max_2term_remix_distance", dist);
            report.track_max("max_2term_residual_g", resg);
            ok &= dist <= nsbox::EPS_MEAS && resg <= nsbox::EPS_MEAS;
        }
        Err(_) => {
            report.track_max("no_valid_residual_2term", 1.0);
            ok = false;
        }
    }
    match canonical3(bx) {
        Ok(d3) => {
            let mut boxes = vec![d3.q2box.clone(), d3.residual.clone()];
            let mut weights = vec![d3.nu, 1.0 - d3.mu - d3.nu];
            if let Some(k) = d3.pr {
                boxes.push(pr_box(k));
                weights.push(d3.mu);
            }
            let remix = mix(&boxes, &weights).expect("weights in range");
            let dist = remix.distance(bx);
            let resg = bell_discord(&d3.residual).value;
            let resq = mermin_discord(&d3.residual).value;
            report.track_max("max_3term_remix_distance", dist);
            report.track_max("max_3term_residual_g", resg);
            report.track_max("max_3term_residual_q", resq);
            ok &= dist <= nsbox::EPS_MEAS && resg <= nsbox::EPS_MEAS && resq <= nsbox::EPS_MEAS;
        }
        Err(_) => {
            report.track_max("no_valid_residual_3term", 1.0);
            ok = false;
        }
    }
    ok
}

fn random_cq_or_qc(rng: &mut ChaCha8Rng, mirror: bool) -> nsbox::TwoQubitState {
    let p0: f64 = rng.random();
    let r = random_unit(rng);
    let s0 = random_ball(rng);
    let s1 = random_ball(rng);
    if mirror {
        qc_state(p0, r, s0, s1).expect("arguments in range")
    } else {
        cq_state(p0, r, s0, s1).expect("arguments in range")
    }
}

/// The paired-state campaign: `n_states` random classical-quantum states and
/// as many quantum-classical ones, each probed with `n_settings` fresh
/// settings draws.
pub fn cqqc_campaign(n_states: u64, n_settings: u64, seed: u64, tol: f64) -> RunReport {
    let start = Instant::now();
    let mut report = RunReport::new(Property::CqQcNull, seed, tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for mirror in [false, true] {
        for _ in 0..n_states {
            let st = random_cq_or_qc(&mut rng, mirror);
            for _ in 0..n_settings {
                let settings = random_settings(&mut rng);
                let bx = born_box(&st, &settings);
                let worst = bell_discord(&bx).value.max(mermin_discord(&bx).value);
                report.track_max("max_discord", worst);
                report.record(worst <= tol);
            }
        }
    }
    report.wall = start.elapsed();
    report
}
