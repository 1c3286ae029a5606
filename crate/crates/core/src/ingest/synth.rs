//! Seeded synthetic corpora standing in for licensed signature and keystroke
//! datasets.
//!
//! Each synthetic user owns a smooth pen trajectory built from a few
//! random-phase sinusoids per axis plus a left-to-right drift. Every sample
//! of that user perturbs amplitudes, phases, timing and point positions in
//! proportion to `1 - consistency`; each session after the first adds a
//! user-specific drift of the same scale. With `consistency = 1` every sample
//! of a user is identical.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{
    render_svc, Dataset, DatasetManifest, IngestError, KeystrokeSample, Modality, PenPoint,
    SampleLabel, SessionRefs, SignatureSample, UserData, UserEntry, DEFAULT_PRESSURE_MAX,
    KEYSTROKE_FEATURE_COUNT, KEYSTROKE_FEATURE_NAMES, MANIFEST_FILE, MANIFEST_SCHEMA_VERSION,
};

/// Per-user consistency: one value for everybody, or drawn uniformly from a
/// set of levels.
#[derive(Debug, Clone, PartialEq)]
pub enum Consistency {
    Fixed(f64),
    Choice(Vec<f64>),
}

impl Consistency {
    fn validate(&self) -> Result<(), IngestError> {
        let values: &[f64] = match self {
            Consistency::Fixed(c) => std::slice::from_ref(c),
            Consistency::Choice(v) if v.is_empty() => {
                return Err(IngestError::InvalidParam("empty consistency choice".into()))
            }
            Consistency::Choice(v) => v,
        };
        match values.iter().find(|c| !(**c > 0.0 && **c <= 1.0)) {
            Some(c) => Err(IngestError::InvalidParam(format!(
                "consistency {c} outside (0, 1]"
            ))),
            None => Ok(()),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Consistency::Fixed(c) => *c,
            Consistency::Choice(v) => v[rng.random_range(0..v.len())],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub seed: u64,
    pub n_users: usize,
    pub samples_per_user: usize,
    pub sessions: u32,
    pub consistency: Consistency,
    pub complexity_knob: f64,
}

impl SynthParams {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.n_users < 2 {
            return Err(IngestError::InvalidParam(format!(
                "n_users must be >= 2, got {}",
                self.n_users
            )));
        }
        if self.samples_per_user < 6 {
            return Err(IngestError::InvalidParam(format!(
                "samples_per_user must be >= 6, got {}",
                self.samples_per_user
            )));
        }
        if self.sessions == 0 || self.sessions as usize > self.samples_per_user {
            return Err(IngestError::InvalidParam(format!(
                "sessions must be in 1..={}, got {}",
                self.samples_per_user, self.sessions
            )));
        }
        if !(self.complexity_knob >= 0.0 && self.complexity_knob.is_finite()) {
            return Err(IngestError::InvalidParam(format!(
                "complexity_knob must be finite and >= 0, got {}",
                self.complexity_knob
            )));
        }
        self.consistency.validate()
    }
}

/// Generated corpus: the manifest plus every sample keyed by its relative path.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub manifest: DatasetManifest,
    pub files: Vec<(String, SignatureSample)>,
    /// Consistency level drawn for each user, in manifest order.
    pub user_consistency: Vec<f64>,
}

impl SynthCorpus {
    /// The in-memory dataset, identical to what [`super::load_dataset`]
    /// returns after [`write_corpus`].
    pub fn dataset(&self) -> Dataset {
        let mut users: Vec<UserData> = Vec::new();
        for (_, sample) in &self.files {
            if users
                .last()
                .map(|u| u.user_id != sample.user_id)
                .unwrap_or(true)
            {
                users.push(UserData {
                    user_id: sample.user_id.clone(),
                    genuine: Vec::new(),
                    forgeries: Vec::new(),
                });
            }
            users.last_mut().unwrap().genuine.push(sample.clone());
        }
        Dataset {
            pressure_max: self.manifest.pressure_max(),
            users,
        }
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

struct Harmonic {
    amplitude: f64,
    frequency: f64,
    phase: f64,
}

struct UserModel {
    consistency: f64,
    n_points: usize,
    x: Vec<Harmonic>,
    y: Vec<Harmonic>,
    width: f64,
    pen_lifts: Vec<f64>,
    pressure_base: f64,
    pressure_amp: f64,
    pressure_freq: f64,
    pressure_phase: f64,
    drift_scale: f64,
}

fn harmonics(rng: &mut ChaCha8Rng, knob: f64) -> Vec<Harmonic> {
    let extra = (3.0 * knob.min(1.0) * rng.random::<f64>()).round() as usize;
    let count = 3 + extra;
    (1..=count)
        .map(|k| {
            let base = if k == 1 { 1.0 } else { knob };
            Harmonic {
                amplitude: 900.0 * base * rng.random_range(0.3..1.0) / (k as f64).sqrt(),
                frequency: k as f64 * rng.random_range(0.8..1.3),
                phase: rng.random_range(0.0..TAU),
            }
        })
        .collect()
}

fn user_model(rng: &mut ChaCha8Rng, params: &SynthParams) -> UserModel {
    let consistency = params.consistency.draw(rng);
    let n_points = rng.random_range(120..=180);
    let x = harmonics(rng, params.complexity_knob);
    let y = harmonics(rng, params.complexity_knob);
    let width = rng.random_range(1000.0..4000.0);
    let n_lifts = rng.random_range(0..=2);
    let mut pen_lifts: Vec<f64> = (0..n_lifts).map(|_| rng.random_range(0.2..0.8)).collect();
    pen_lifts.sort_by(f64::total_cmp);
    UserModel {
        consistency,
        n_points,
        x,
        y,
        width,
        pen_lifts,
        pressure_base: rng.random_range(300.0..700.0),
        pressure_amp: rng.random_range(100.0..300.0),
        pressure_freq: rng.random_range(1.0..4.0),
        pressure_phase: rng.random_range(0.0..TAU),
        drift_scale: rng.random::<f64>(),
    }
}

/// Perturbation shared by all samples of one session.
struct SessionDrift {
    phase: Vec<f64>,
    amplitude: Vec<f64>,
}

fn session_drift(rng: &mut ChaCha8Rng, model: &UserModel, session: u32) -> SessionDrift {
    let n = model.x.len() + model.y.len();
    let mut phase = Vec::with_capacity(n);
    let mut amplitude = Vec::with_capacity(n);
    let scale = if session <= 1 {
        0.0
    } else {
        (1.0 - model.consistency) * model.drift_scale
    };
    for _ in 0..n {
        phase.push(scale * 3.0 * normal(rng));
        amplitude.push(scale * 1.0 * normal(rng));
    }
    SessionDrift { phase, amplitude }
}

fn eval_axis(hs: &[Harmonic], s: f64, phase: &[f64], amp: &[f64]) -> f64 {
    hs.iter()
        .enumerate()
        .map(|(k, h)| {
            h.amplitude * (1.0 + amp[k]) * (TAU * h.frequency * s + h.phase + phase[k]).sin()
        })
        .sum()
}

fn render_sample(
    rng: &mut ChaCha8Rng,
    model: &UserModel,
    drift: &SessionDrift,
    user_id: &str,
    session: u32,
) -> SignatureSample {
    let jitter = 1.0 - model.consistency;
    let nh = model.x.len() + model.y.len();
    let mut phase = Vec::with_capacity(nh);
    let mut amp = Vec::with_capacity(nh);
    for k in 0..nh {
        phase.push(drift.phase[k] + jitter * 0.8 * normal(rng));
        amp.push(drift.amplitude[k] + jitter * 0.3 * normal(rng));
    }
    let length_noise = (jitter * 15.0 * normal(rng)).round() as i64;
    let n = (model.n_points as i64 + length_noise).max(24) as usize;
    let warp = jitter * 0.04 * normal(rng);
    let pressure_shift = jitter * 80.0 * normal(rng);
    let (px, py) = phase.split_at(model.x.len());
    let (ax, ay) = amp.split_at(model.x.len());

    let lift_at: Vec<usize> = model
        .pen_lifts
        .iter()
        .map(|f| (f * n as f64) as usize)
        .collect();

    let points = (0..n)
        .map(|i| {
            let u = i as f64 / (n - 1) as f64;
            let s = u + warp * (std::f64::consts::PI * u).sin();
            let noise_x = jitter * 6.0 * normal(rng);
            let noise_y = jitter * 6.0 * normal(rng);
            let noise_p = jitter * 25.0 * normal(rng);
            let x = model.width * s + eval_axis(&model.x, s, px, ax) + noise_x;
            let y = eval_axis(&model.y, s, py, ay) + noise_y;
            let pen_down = !lift_at.iter().any(|&l| i >= l && i < l + 3);
            let pressure = if pen_down {
                model.pressure_base
                    + pressure_shift
                    + model.pressure_amp
                        * (TAU * model.pressure_freq * s + model.pressure_phase).sin()
                    + noise_p
            } else {
                0.0
            };
            PenPoint {
                x: x.round() as i64,
                y: y.round() as i64,
                t: i as i64 * 10,
                pressure: Some(pressure.round().clamp(0.0, DEFAULT_PRESSURE_MAX as f64) as i64),
                pen_down,
            }
        })
        .collect();
    SignatureSample::new(points, user_id, session, SampleLabel::Genuine)
        .expect("generated samples satisfy the sample invariants")
}

/// Generates a signature corpus. Pure function of `params`.
pub fn synth_corpus(params: &SynthParams) -> Result<SynthCorpus, IngestError> {
    params.validate()?;
    let mut master = ChaCha8Rng::seed_from_u64(params.seed);
    let per_session = params.samples_per_user / params.sessions as usize;
    let remainder = params.samples_per_user % params.sessions as usize;

    let mut files = Vec::with_capacity(params.n_users * params.samples_per_user);
    let mut users = Vec::with_capacity(params.n_users);
    let mut user_consistency = Vec::with_capacity(params.n_users);
    for u in 0..params.n_users {
        let mut rng = ChaCha8Rng::seed_from_u64(master.random());
        let user_id = format!("u{u:03}");
        let model = user_model(&mut rng, params);
        user_consistency.push(model.consistency);
        let mut sessions = Vec::with_capacity(params.sessions as usize);
        for session in 1..=params.sessions {
            let count = per_session + usize::from((session as usize) <= remainder);
            let drift = session_drift(&mut rng, &model, session);
            let mut refs = Vec::with_capacity(count);
            for k in 0..count {
                let path = format!("{user_id}/s{session}_{k:02}.svc");
                let sample = render_sample(&mut rng, &model, &drift, &user_id, session);
                refs.push(path.clone());
                files.push((path, sample));
            }
            sessions.push(SessionRefs {
                session,
                files: refs,
            });
        }
        users.push(UserEntry {
            user_id,
            genuine: sessions,
            forgeries: Vec::new(),
        });
    }
    Ok(SynthCorpus {
        manifest: DatasetManifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            modality: Modality::Signature,
            pressure_max: Some(DEFAULT_PRESSURE_MAX),
            keystroke_file: None,
            users,
        },
        files,
        user_consistency,
    })
}

/// Writes every sample plus `manifest.json` under `root`.
pub fn write_corpus(corpus: &SynthCorpus, root: &Path) -> Result<(), IngestError> {
    let io = |path: &Path, e: std::io::Error| IngestError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    for (rel, sample) in &corpus.files {
        let path = root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        }
        fs::write(&path, render_svc(sample)).map_err(|e| io(&path, e))?;
    }
    fs::create_dir_all(root).map_err(|e| io(root, e))?;
    let path = root.join(MANIFEST_FILE);
    fs::write(&path, corpus.manifest.to_json()).map_err(|e| io(&path, e))
}

/// Generates keystroke timing samples: `sessions × reps_per_session` per
/// user, with per-user Gaussian spread and session drift scaled by
/// `1 - consistency`. Timings are rounded to 0.1 ms.
pub fn synth_keystroke(
    seed: u64,
    n_users: usize,
    sessions: u32,
    reps_per_session: u32,
    consistency: &Consistency,
) -> Result<Vec<KeystrokeSample>, IngestError> {
    if n_users < 2 || sessions == 0 || reps_per_session == 0 {
        return Err(IngestError::InvalidParam(
            "need n_users >= 2 and at least one session and repetition".into(),
        ));
    }
    consistency.validate()?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_users * (sessions * reps_per_session) as usize);
    for u in 0..n_users {
        let mut rng = ChaCha8Rng::seed_from_u64(master.random());
        let c = consistency.draw(&mut rng);
        let jitter = 1.0 - c;
        let drift_scale = rng.random::<f64>();
        let means: Vec<f64> = KEYSTROKE_FEATURE_NAMES
            .iter()
            .map(|name| {
                if name.starts_with("UD") {
                    rng.random_range(-0.05..0.3)
                } else if name.starts_with("DD") {
                    rng.random_range(0.08..0.4)
                } else {
                    rng.random_range(0.04..0.15)
                }
            })
            .collect();
        for session in 1..=sessions {
            let drift: Vec<f64> = (0..KEYSTROKE_FEATURE_COUNT)
                .map(|_| {
                    let d = normal(&mut rng);
                    if session == 1 {
                        0.0
                    } else {
                        jitter * drift_scale * 0.08 * d
                    }
                })
                .collect();
            for rep in 1..=reps_per_session {
                let features = KEYSTROKE_FEATURE_NAMES
                    .iter()
                    .enumerate()
                    .map(|(i, name)| {
                        let v = means[i] + drift[i] + jitter * 0.05 * normal(&mut rng);
                        let v = if name.starts_with("UD") {
                            v
                        } else {
                            v.max(0.0)
                        };
                        (v * 1e4).round() / 1e4
                    })
                    .collect();
                out.push(KeystrokeSample {
                    user_id: format!("s{u:03}"),
                    session_id: session,
                    rep,
                    features,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(seed: u64, consistency: f64) -> SynthParams {
        SynthParams {
            seed,
            n_users: 3,
            samples_per_user: 8,
            sessions: 2,
            consistency: Consistency::Fixed(consistency),
            complexity_knob: 1.0,
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = synth_corpus(&params(7, 0.8)).unwrap();
        let b = synth_corpus(&params(7, 0.8)).unwrap();
        let render = |c: &SynthCorpus| {
            c.files
                .iter()
                .map(|(p, s)| format!("{p}\n{}", render_svc(s)))
                .collect::<String>()
        };
        assert_eq!(render(&a), render(&b));
        assert_eq!(a.manifest.to_json(), b.manifest.to_json());
        let c = synth_corpus(&params(8, 0.8)).unwrap();
        assert_ne!(render(&a), render(&c));
    }

    #[test]
    fn full_consistency_gives_identical_samples() {
        let corpus = synth_corpus(&params(3, 1.0)).unwrap();
        let ds = corpus.dataset();
        for user in &ds.users {
            let first = user.genuine[0].points();
            assert!(user.genuine.iter().all(|s| s.points() == first));
        }
    }

    #[test]
    fn sessions_split_samples() {
        let mut p = params(1, 0.7);
        p.samples_per_user = 9;
        p.sessions = 2;
        let corpus = synth_corpus(&p).unwrap();
        let counts: Vec<usize> = corpus.manifest.users[0]
            .genuine
            .iter()
            .map(|s| s.files.len())
            .collect();
        assert_eq!(counts, vec![5, 4]);
    }

    #[test]
    fn pressure_within_device_range() {
        let corpus = synth_corpus(&params(11, 0.5)).unwrap();
        for (_, s) in &corpus.files {
            for p in s.points() {
                let pr = p.pressure.unwrap();
                assert!((0..=1023).contains(&pr));
            }
        }
    }

    #[test]
    fn invalid_params() {
        let mut p = params(1, 0.8);
        p.n_users = 1;
        assert!(matches!(
            synth_corpus(&p),
            Err(IngestError::InvalidParam(_))
        ));
        let mut p = params(1, 0.8);
        p.samples_per_user = 5;
        assert!(synth_corpus(&p).is_err());
        assert!(synth_corpus(&params(1, 0.0)).is_err());
        assert!(synth_corpus(&params(1, 1.5)).is_err());
        let mut p = params(1, 0.8);
        p.consistency = Consistency::Choice(vec![]);
        assert!(synth_corpus(&p).is_err());
    }

    #[test]
    fn choice_draws_from_levels() {
        let mut p = params(5, 0.8);
        p.n_users = 30;
        p.consistency = Consistency::Choice(vec![0.6, 0.95]);
        let corpus = synth_corpus(&p).unwrap();
        assert!(corpus
            .user_consistency
            .iter()
            .all(|c| *c == 0.6 || *c == 0.95));
        assert!(corpus.user_consistency.contains(&0.6));
        assert!(corpus.user_consistency.contains(&0.95));
    }

    #[test]
    fn keystroke_is_deterministic() {
        let a = synth_keystroke(3, 4, 2, 5, &Consistency::Fixed(0.8)).unwrap();
        let b = synth_keystroke(3, 4, 2, 5, &Consistency::Fixed(0.8)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 40);
        assert!(a
            .iter()
            .all(|s| s.features.len() == KEYSTROKE_FEATURE_COUNT));
    }
}
