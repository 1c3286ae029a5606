//! Enrolment protocols and the score matrix they produce.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::verify::Verifier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EnrollSelection {
    /// `times` independent random draws of the enrolment set per user.
    RandomRepeated { times: usize, seed: u64 },
    /// Enrol every sample of the user's earliest session.
    FirstSession,
    /// Enrol the first `enroll_count` samples in dataset order; the next
    /// `validation_count` validate and the rest are tests.
    FirstSamples,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImposterSource {
    /// Other users' genuine samples.
    RandomForgery,
    /// The target user's skilled forgeries.
    SkilledForgery,
    Both,
    /// Genuine and validation scores only.
    None,
}

impl ImposterSource {
    fn random(self) -> bool {
        matches!(self, ImposterSource::RandomForgery | ImposterSource::Both)
    }
    fn skilled(self) -> bool {
        matches!(self, ImposterSource::SkilledForgery | ImposterSource::Both)
    }
}

/// Enrolment, validation and test indices.
pub type Split = (Vec<usize>, Vec<usize>, Vec<usize>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    /// Enrolled samples per template. With `FirstSession` this is a minimum;
    /// the whole first session is enrolled.
    pub enroll_count: usize,
    pub enroll_selection: EnrollSelection,
    /// Genuine samples held out (after enrolment) to score repeatability.
    pub validation_count: usize,
    pub imposter_source: ImposterSource,
    /// Use only the first `k` genuine samples of each other user as random
    /// forgeries; `None` uses all of them.
    pub random_forgeries_per_user: Option<usize>,
}

impl Protocol {
    pub fn repeat_times(&self) -> usize {
        match self.enroll_selection {
            EnrollSelection::RandomRepeated { times, .. } => times,
            EnrollSelection::FirstSession | EnrollSelection::FirstSamples => 1,
        }
    }

    /// Splits a user's genuine samples (given by their session ids, in
    /// dataset order) into enrolment, validation and test index lists.
    pub fn split(
        &self,
        user_id: &str,
        user_index: usize,
        sessions: &[u32],
        repetition: usize,
    ) -> Result<Split, EvalError> {
        let n = sessions.len();
        let insufficient = |needed: usize| EvalError::InsufficientSamples {
            user: user_id.to_string(),
            needed,
            available: n,
        };
        match self.enroll_selection {
            EnrollSelection::RandomRepeated { seed, .. } => {
                let needed = self.enroll_count.max(2) + self.validation_count;
                if n < needed {
                    return Err(insufficient(needed));
                }
                let mut order: Vec<usize> = (0..n).collect();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((repetition as u64) << 32) | user_index as u64);
                order.shuffle(&mut rng);
                let enroll = order[..self.enroll_count].to_vec();
                let validation =
                    order[self.enroll_count..self.enroll_count + self.validation_count].to_vec();
                let test = order[self.enroll_count + self.validation_count..].to_vec();
                Ok((enroll, validation, test))
            }
            EnrollSelection::FirstSamples => {
                let needed = self.enroll_count.max(2) + self.validation_count;
                if n < needed {
                    return Err(insufficient(needed));
                }
                let (e, v) = (self.enroll_count, self.validation_count);
                Ok(((0..e).collect(), (e..e + v).collect(), (e + v..n).collect()))
            }
            EnrollSelection::FirstSession => {
                let first = sessions.iter().copied().min().unwrap_or(0);
                let enroll: Vec<usize> = (0..n).filter(|&i| sessions[i] == first).collect();
                let later: Vec<usize> = (0..n).filter(|&i| sessions[i] != first).collect();
                if enroll.len() < self.enroll_count.max(2) {
                    return Err(insufficient(
                        self.enroll_count.max(2) + self.validation_count,
                    ));
                }
                if later.len() < self.validation_count {
                    return Err(insufficient(enroll.len() + self.validation_count));
                }
                let validation = later[..self.validation_count].to_vec();
                let test = later[self.validation_count..].to_vec();
                Ok((enroll, validation, test))
            }
        }
    }
}

/// One user's samples in the representation a verifier consumes.
#[derive(Debug, Clone)]
pub struct UserSamples<'a, S> {
    pub user_id: &'a str,
    pub genuine: Vec<&'a S>,
    /// Session of each genuine sample.
    pub sessions: Vec<u32>,
    pub skilled: Vec<&'a S>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    Genuine,
    Validation,
    RandomForgery,
    SkilledForgery,
}

impl ScoreKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoreKind::Genuine => "genuine",
            ScoreKind::Validation => "validation",
            ScoreKind::RandomForgery => "random_forgery",
            ScoreKind::SkilledForgery => "skilled_forgery",
        }
    }

    pub fn parse(s: &str) -> Option<ScoreKind> {
        match s {
            "genuine" => Some(ScoreKind::Genuine),
            "validation" => Some(ScoreKind::Validation),
            "random_forgery" | "random_forgery_pool" => Some(ScoreKind::RandomForgery),
            "skilled_forgery" => Some(ScoreKind::SkilledForgery),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreCell {
    /// Index into [`ScoreMatrix::users`].
    pub test_user: u32,
    pub test_session: u32,
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TemplateScores {
    pub genuine: Vec<ScoreCell>,
    pub validation: Vec<ScoreCell>,
    pub random_forgery: Vec<ScoreCell>,
    pub skilled_forgery: Vec<ScoreCell>,
}

impl TemplateScores {
    pub fn cells(&self, kind: ScoreKind) -> &[ScoreCell] {
        match kind {
            ScoreKind::Genuine => &self.genuine,
            ScoreKind::Validation => &self.validation,
            ScoreKind::RandomForgery => &self.random_forgery,
            ScoreKind::SkilledForgery => &self.skilled_forgery,
        }
    }

    fn cells_mut(&mut self, kind: ScoreKind) -> &mut Vec<ScoreCell> {
        match kind {
            ScoreKind::Genuine => &mut self.genuine,
            ScoreKind::Validation => &mut self.validation,
            ScoreKind::RandomForgery => &mut self.random_forgery,
            ScoreKind::SkilledForgery => &mut self.skilled_forgery,
        }
    }

    pub fn scores(&self, kind: ScoreKind) -> Vec<f64> {
        self.cells(kind).iter().map(|c| c.score).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateInfo {
    pub user_index: u32,
    pub user_id: String,
    pub repetition: u32,
    /// Indices into the user's genuine list.
    pub enrolled: Vec<usize>,
    pub validation: Vec<usize>,
}

impl TemplateInfo {
    /// Stable template key: the user id, suffixed with `#rep` when the
    /// matrix holds more than one repetition.
    pub fn key(&self, repeated: bool) -> String {
        if repeated {
            format!("{}#{}", self.user_id, self.repetition)
        } else {
            self.user_id.clone()
        }
    }
}

/// Scores of every template against its genuine, validation and imposter
/// test samples.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub users: Vec<String>,
    pub templates: Vec<TemplateInfo>,
    pub scores: Vec<TemplateScores>,
}

impl ScoreMatrix {
    pub fn is_repeated(&self) -> bool {
        self.templates.iter().any(|t| t.repetition > 0)
    }

    pub fn template_keys(&self) -> Vec<String> {
        let repeated = self.is_repeated();
        self.templates.iter().map(|t| t.key(repeated)).collect()
    }

    pub fn pooled(&self, kind: ScoreKind) -> Vec<f64> {
        self.scores
            .iter()
            .flat_map(|s| s.cells(kind).iter().map(|c| c.score))
            .collect()
    }

    pub const CSV_HEADER: &'static str = "test_user,test_session,test_label,target_user,score";

    /// External score-matrix CSV.
    pub fn to_csv(&self) -> String {
        let keys = self.template_keys();
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for (key, scores) in keys.iter().zip(&self.scores) {
            for kind in [
                ScoreKind::Genuine,
                ScoreKind::Validation,
                ScoreKind::RandomForgery,
                ScoreKind::SkilledForgery,
            ] {
                for c in scores.cells(kind) {
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        self.users[c.test_user as usize],
                        c.test_session,
                        kind.as_str(),
                        key,
                        c.score
                    ));
                }
            }
        }
        out
    }

    /// Reads the external score-matrix CSV. Templates are keyed by
    /// `target_user`; a `user#rep` key maps to repetition `rep` of `user`.
    pub fn from_csv(text: &str) -> Result<ScoreMatrix, EvalError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| EvalError::ScoreCsv(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        if header.join(",") != Self::CSV_HEADER {
            return Err(EvalError::ScoreCsv(format!(
                "expected header {:?}, found {:?}",
                Self::CSV_HEADER,
                header.join(",")
            )));
        }
        let mut matrix = ScoreMatrix::default();
        let mut user_index: BTreeMap<String, u32> = BTreeMap::new();
        let mut template_index: BTreeMap<String, usize> = BTreeMap::new();
        let mut intern = |matrix: &mut ScoreMatrix, id: &str| -> u32 {
            *user_index.entry(id.to_string()).or_insert_with(|| {
                matrix.users.push(id.to_string());
                (matrix.users.len() - 1) as u32
            })
        };
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| EvalError::ScoreCsv(e.to_string()))?;
            let bad = |what: &str| EvalError::ScoreCsv(format!("row {}: invalid {what}", row + 1));
            let session: u32 = record[1].parse().map_err(|_| bad("test_session"))?;
            let kind = ScoreKind::parse(&record[2]).ok_or_else(|| bad("test_label"))?;
            let score: f64 = record[4].parse().map_err(|_| bad("score"))?;
            if !(score.is_finite() && score >= 0.0) {
                return Err(bad("score"));
            }
            let test_user = intern(&mut matrix, &record[0]);
            let key = &record[3];
            let (target, repetition) = match key.rsplit_once('#') {
                Some((u, r)) => (u, r.parse().map_err(|_| bad("target_user"))?),
                None => (key, 0),
            };
            let target_index = intern(&mut matrix, target);
            let t = *template_index.entry(key.to_string()).or_insert_with(|| {
                matrix.templates.push(TemplateInfo {
                    user_index: target_index,
                    user_id: target.to_string(),
                    repetition,
                    enrolled: Vec::new(),
                    validation: Vec::new(),
                });
                matrix.scores.push(TemplateScores::default());
                matrix.templates.len() - 1
            });
            matrix.scores[t].cells_mut(kind).push(ScoreCell {
                test_user,
                test_session: session,
                score,
            });
        }
        Ok(matrix)
    }
}

/// Enrols and scores every (repetition, user) template. Work is spread over
/// the current rayon pool; results are assembled in (repetition, user) order
/// so the matrix does not depend on scheduling.
pub fn run_protocol<V: Verifier>(
    users: &[UserSamples<'_, V::Sample>],
    protocol: &Protocol,
    verifier: &V,
) -> Result<ScoreMatrix, EvalError> {
    for (u, user) in users.iter().enumerate() {
        protocol.split(user.user_id, u, &user.sessions, 0)?;
    }
    let jobs: Vec<(usize, usize)> = (0..protocol.repeat_times())
        .flat_map(|r| (0..users.len()).map(move |u| (r, u)))
        .collect();

    let results: Vec<(TemplateInfo, TemplateScores)> = jobs
        .par_iter()
        .map(|&(rep, u)| -> Result<_, EvalError> {
            let user = &users[u];
            let (enroll, validation, test) =
                protocol.split(user.user_id, u, &user.sessions, rep)?;
            let enrolled: Vec<&V::Sample> = enroll.iter().map(|&i| user.genuine[i]).collect();
            let template = verifier.enroll(user.user_id, &enrolled)?;
            let cell =
                |test_user: usize, session: u32, s: &V::Sample| -> Result<ScoreCell, EvalError> {
                    Ok(ScoreCell {
                        test_user: test_user as u32,
                        test_session: session,
                        score: verifier.score(&template, s)?,
                    })
                };
            let mut scores = TemplateScores::default();
            for &i in &validation {
                scores
                    .validation
                    .push(cell(u, user.sessions[i], user.genuine[i])?);
            }
            for &i in &test {
                scores
                    .genuine
                    .push(cell(u, user.sessions[i], user.genuine[i])?);
            }
            if protocol.imposter_source.random() {
                for (o, other) in users.iter().enumerate().filter(|(o, _)| *o != u) {
                    let take = protocol
                        .random_forgeries_per_user
                        .unwrap_or(other.genuine.len())
                        .min(other.genuine.len());
                    for i in 0..take {
                        scores
                            .random_forgery
                            .push(cell(o, other.sessions[i], other.genuine[i])?);
                    }
                }
            }
            if protocol.imposter_source.skilled() {
                for s in &user.skilled {
                    scores.skilled_forgery.push(cell(u, 0, s)?);
                }
            }
            let info = TemplateInfo {
                user_index: u as u32,
                user_id: user.user_id.to_string(),
                repetition: rep as u32,
                enrolled: enroll,
                validation,
            };
            Ok((info, scores))
        })
        .collect::<Result<_, _>>()?;

    let (templates, scores) = results.into_iter().unzip();
    Ok(ScoreMatrix {
        users: users.iter().map(|u| u.user_id.to_string()).collect(),
        templates,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::KeystrokeSample;
    use crate::verify::{KeystrokeVerifier, VerifyError};

    fn ks(user: &str, session: u32, v: f64) -> KeystrokeSample {
        KeystrokeSample {
            user_id: user.into(),
            session_id: session,
            rep: 1,
            features: vec![v; 3],
        }
    }

    fn corpus() -> Vec<(String, Vec<KeystrokeSample>)> {
        (0..3)
            .map(|u| {
                let id = format!("s{u}");
                let samples = (0..8)
                    .map(|i| ks(&id, 1 + (i >= 4) as u32, u as f64 + i as f64 * 0.01))
                    .collect();
                (id, samples)
            })
            .collect()
    }

    fn users(c: &[(String, Vec<KeystrokeSample>)]) -> Vec<UserSamples<'_, KeystrokeSample>> {
        c.iter()
            .map(|(id, s)| UserSamples {
                user_id: id,
                genuine: s.iter().collect(),
                sessions: s.iter().map(|x| x.session_id).collect(),
                skilled: vec![],
            })
            .collect()
    }

    fn random_protocol(times: usize) -> Protocol {
        Protocol {
            enroll_count: 3,
            enroll_selection: EnrollSelection::RandomRepeated { times, seed: 11 },
            validation_count: 1,
            imposter_source: ImposterSource::RandomForgery,
            random_forgeries_per_user: None,
        }
    }

    #[test]
    fn repeated_runs_are_identical() {
        let c = corpus();
        let a = run_protocol(&users(&c), &random_protocol(2), &KeystrokeVerifier).unwrap();
        let b = run_protocol(&users(&c), &random_protocol(2), &KeystrokeVerifier).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.templates.len(), 6);
        for s in &a.scores {
            assert_eq!(s.genuine.len(), 4);
            assert_eq!(s.validation.len(), 1);
            assert_eq!(s.random_forgery.len(), 16);
        }
        // the two repetitions draw different enrolment sets for some user
        assert!((0..3).any(|u| a.templates[u].enrolled != a.templates[3 + u].enrolled));
    }

    #[test]
    fn splits_are_disjoint() {
        let p = random_protocol(5);
        let sessions = vec![1; 10];
        for rep in 0..5 {
            let (e, v, t) = p.split("u", 0, &sessions, rep).unwrap();
            let mut all: Vec<usize> = e.iter().chain(&v).chain(&t).copied().collect();
            all.sort();
            assert_eq!(all, (0..10).collect::<Vec<_>>());
        }
    }

    #[test]
    fn first_session_split() {
        let p = Protocol {
            enroll_count: 2,
            enroll_selection: EnrollSelection::FirstSession,
            validation_count: 2,
            imposter_source: ImposterSource::None,
            random_forgeries_per_user: None,
        };
        let (e, v, t) = p.split("u", 0, &[1, 1, 1, 2, 2, 2, 2], 0).unwrap();
        assert_eq!((e, v, t), (vec![0, 1, 2], vec![3, 4], vec![5, 6]));
        assert!(p.split("u", 0, &[1, 1, 2], 0).is_err());
    }

    #[test]
    fn first_samples_split() {
        let p = Protocol {
            enroll_count: 3,
            enroll_selection: EnrollSelection::FirstSamples,
            validation_count: 2,
            imposter_source: ImposterSource::None,
            random_forgeries_per_user: None,
        };
        let (e, v, t) = p.split("u", 0, &[1; 7], 0).unwrap();
        assert_eq!((e, v, t), (vec![0, 1, 2], vec![3, 4], vec![5, 6]));
        assert!(p.split("u", 0, &[1; 4], 0).is_err());
    }

    #[test]
    fn too_few_genuines() {
        let c = corpus();
        let mut p = random_protocol(1);
        p.enroll_count = 9;
        assert!(matches!(
            run_protocol(&users(&c), &p, &KeystrokeVerifier),
            Err(EvalError::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let c = corpus();
        let m = run_protocol(&users(&c), &random_protocol(1), &KeystrokeVerifier).unwrap();
        let back = ScoreMatrix::from_csv(&m.to_csv()).unwrap();
        assert_eq!(back.templates.len(), m.templates.len());
        for (a, b) in m.scores.iter().zip(&back.scores) {
            assert_eq!(a.scores(ScoreKind::Genuine), b.scores(ScoreKind::Genuine));
            assert_eq!(
                a.scores(ScoreKind::RandomForgery),
                b.scores(ScoreKind::RandomForgery)
            );
        }
        assert!(ScoreMatrix::from_csv("a,b\n").is_err());
        let bad = format!("{}\nu,1,nonsense,v,1.0\n", ScoreMatrix::CSV_HEADER);
        assert!(ScoreMatrix::from_csv(&bad).is_err());
    }

    #[test]
    fn verifier_errors_propagate() {
        let c = vec![
            (
                "a".to_string(),
                vec![ks("a", 1, 0.0), ks("a", 1, 0.1), ks("a", 1, 0.2)],
            ),
            (
                "b".to_string(),
                vec![
                    KeystrokeSample {
                        features: vec![0.0; 2],
                        ..ks("b", 1, 0.0)
                    },
                    ks("b", 1, 0.1),
                    ks("b", 1, 0.2),
                ],
            ),
        ];
        let mut p = random_protocol(1);
        p.enroll_count = 2;
        p.validation_count = 0;
        let err = run_protocol(&users(&c), &p, &KeystrokeVerifier).unwrap_err();
        assert!(matches!(
            err,
            EvalError::Verify(VerifyError::FeatureCountMismatch { .. })
        ));
    }
}
