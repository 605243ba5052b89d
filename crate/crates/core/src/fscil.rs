//! Prototypical few-shot class-incremental learning.
//!
//! Each class is represented by the mean embedding `c` of its training
//! samples. The linear readout `w = 2c`, `b = -|c|^2` ranks classes exactly
//! like nearest-prototype under squared Euclidean distance. For sequence
//! embeddings the per-sample embedding is the sum over timesteps and the bias
//! is divided by the timestep count, so that summing `w.e_t + b` over the
//! sequence gives the same ranking.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

pub type ClassId = usize;

/// One labelled sample: a sequence of per-timestep vectors (length 1 for
/// non-temporal data).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub class_id: ClassId,
    pub steps: Vec<Vec<f64>>,
}

/// Maps a sample to its embedding sequence.
pub trait FeatureExtractor: Sync {
    fn embedding_dim(&self) -> usize;
    fn embed(&self, sample: &Sample) -> Result<Vec<Vec<f64>>>;
}

/// Passes precomputed embeddings through unchanged.
#[derive(Debug, Clone, Copy)]
pub struct IdentityExtractor {
    pub dim: usize,
}

impl FeatureExtractor for IdentityExtractor {
    fn embedding_dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, sample: &Sample) -> Result<Vec<Vec<f64>>> {
        if let Some(bad) = sample.steps.iter().find(|s| s.len() != self.dim) {
            return Err(Error::Dimension(format!(
                "embedding of length {}, expected {}",
                bad.len(),
                self.dim
            )));
        }
        Ok(sample.steps.clone())
    }
}

fn sum_steps(steps: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = steps
        .first()
        .ok_or_else(|| Error::InvalidInput("sample has no timesteps".into()))?;
    let mut acc = vec![0.0; first.len()];
    for s in steps {
        if s.len() != acc.len() {
            return Err(Error::Dimension(format!(
                "timestep embedding of length {}, expected {}",
                s.len(),
                acc.len()
            )));
        }
        acc.iter_mut().zip(s).for_each(|(a, v)| *a += v);
    }
    Ok(acc)
}

/// Elementwise mean of the embeddings.
pub fn compute_prototype(embeddings: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = embeddings
        .first()
        .ok_or_else(|| Error::InvalidInput("cannot compute a prototype from no samples".into()))?;
    let mut c = sum_steps(embeddings).map_err(|_| {
        Error::Dimension(format!(
            "embeddings differ in length (first has {})",
            first.len()
        ))
    })?;
    let n = embeddings.len() as f64;
    c.iter_mut().for_each(|v| *v /= n);
    Ok(c)
}

/// Temporal variant: each sample's embedding is first summed over time.
pub fn compute_temporal_prototype(samples: &[Vec<Vec<f64>>]) -> Result<Vec<f64>> {
    let summed = samples
        .iter()
        .map(|s| sum_steps(s))
        .collect::<Result<Vec<_>>>()?;
    compute_prototype(&summed)
}

/// `w = 2c`, `b = -|c|^2`, with `b` divided by `T` for the temporal variant.
pub fn prototype_weights(c: &[f64], timesteps: Option<usize>) -> Result<(Vec<f64>, f64)> {
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("prototype is not finite".into()));
    }
    let mut b = -c.iter().map(|v| v * v).sum::<f64>();
    if let Some(t) = timesteps {
        if t == 0 {
            return Err(Error::InvalidParameter("timestep count must be positive".into()));
        }
        b /= t as f64;
    }
    Ok((c.iter().map(|v| 2.0 * v).collect(), b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeClassifier {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub class_ids: Vec<ClassId>,
    /// Timestep count for the temporal variant.
    pub timesteps: Option<usize>,
}

impl PrototypeClassifier {
    pub fn len(&self) -> usize {
        self.class_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    fn rows_from(
        prototypes: &[(ClassId, Vec<f64>)],
        timesteps: Option<usize>,
    ) -> Result<Vec<(ClassId, Vec<f64>, f64)>> {
        let mut rows = prototypes
            .iter()
            .map(|(id, c)| prototype_weights(c, timesteps).map(|(w, b)| (*id, w, b)))
            .collect::<Result<Vec<_>>>()?;
        rows.sort_by_key(|r| r.0);
        if rows.windows(2).any(|p| p[0].0 == p[1].0) {
            return Err(Error::InvalidInput("duplicate class id among prototypes".into()));
        }
        Ok(rows)
    }

    /// Scores `w_k . e + b_k` for every class, in class order.
    pub fn scores(&self, e: &[f64]) -> Result<Vec<f64>> {
        if e.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "embedding of length {}, classifier expects {}",
                e.len(),
                self.dim()
            )));
        }
        Ok(self
            .weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.iter().zip(e).map(|(a, x)| a * x).sum::<f64>() + b)
            .collect())
    }

    fn argmax(&self, scores: &[f64]) -> Result<ClassId> {
        // class_ids are sorted, so the first maximum is the lowest id
        let mut best: Option<(usize, f64)> = None;
        for (k, &s) in scores.iter().enumerate() {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((k, s));
            }
        }
        best.map(|(k, _)| self.class_ids[k])
            .ok_or_else(|| Error::InvalidInput("classifier has no classes".into()))
    }

    pub fn classify(&self, e: &[f64]) -> Result<ClassId> {
        self.argmax(&self.scores(e)?)
    }

    /// Temporal variant: scores accumulated over timesteps.
    pub fn classify_sequence(&self, steps: &[Vec<f64>]) -> Result<ClassId> {
        let mut total = vec![0.0; self.len()];
        for e in steps {
            total
                .iter_mut()
                .zip(self.scores(e)?)
                .for_each(|(t, s)| *t += s);
        }
        self.argmax(&total)
    }
}

/// Readout holding exactly the given prototypes, ordered by class id.
pub fn replace_readout(
    prototypes: &[(ClassId, Vec<f64>)],
    timesteps: Option<usize>,
) -> Result<PrototypeClassifier> {
    if prototypes.is_empty() {
        return Err(Error::InvalidInput("no base-class prototypes".into()));
    }
    let rows = PrototypeClassifier::rows_from(prototypes, timesteps)?;
    let dim = rows[0].1.len();
    if rows.iter().any(|r| r.1.len() != dim) {
        return Err(Error::Dimension("prototypes differ in length".into()));
    }
    let mut out = PrototypeClassifier {
        weights: Vec::new(),
        biases: Vec::new(),
        class_ids: Vec::new(),
        timesteps,
    };
    for (id, w, b) in rows {
        out.class_ids.push(id);
        out.weights.push(w);
        out.biases.push(b);
    }
    Ok(out)
}

/// Appends rows for new classes; existing rows are left untouched.
pub fn extend_classifier(
    classifier: &PrototypeClassifier,
    new_prototypes: &[(ClassId, Vec<f64>)],
) -> Result<PrototypeClassifier> {
    let rows = PrototypeClassifier::rows_from(new_prototypes, classifier.timesteps)?;
    let existing: BTreeSet<ClassId> = classifier.class_ids.iter().copied().collect();
    if let Some((id, _, _)) = rows.iter().find(|r| existing.contains(&r.0)) {
        return Err(Error::InvalidInput(format!(
            "class id {id} already present in the classifier"
        )));
    }
    let mut out = classifier.clone();
    for (id, w, b) in rows {
        if !out.is_empty() && w.len() != out.dim() {
            return Err(Error::Dimension(format!(
                "prototype of length {}, classifier expects {}",
                w.len(),
                out.dim()
            )));
        }
        // keep rows sorted by class id so ties resolve to the lowest id
        let pos = out.class_ids.partition_point(|&c| c < id);
        out.class_ids.insert(pos, id);
        out.weights.insert(pos, w);
        out.biases.insert(pos, b);
    }
    Ok(out)
}

/// Base classes followed by incremental sessions of disjoint classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionPlan {
    pub base_classes: Vec<ClassId>,
    pub sessions: Vec<Vec<ClassId>>,
    /// Training samples used per incremental class.
    pub shots: usize,
}

impl SessionPlan {
    /// `base` classes `0..base`, then `sessions` blocks of `ways` classes.
    pub fn contiguous(base: usize, sessions: usize, ways: usize, shots: usize) -> Self {
        Self {
            base_classes: (0..base).collect(),
            sessions: (0..sessions)
                .map(|s| (base + s * ways..base + (s + 1) * ways).collect())
                .collect(),
            shots,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.base_classes.is_empty() {
            return Err(Error::InvalidInput("session plan has no base classes".into()));
        }
        if self.shots == 0 && !self.sessions.is_empty() {
            return Err(Error::InvalidParameter("shots must be positive".into()));
        }
        let mut seen = BTreeSet::new();
        for id in self.base_classes.iter().chain(self.sessions.iter().flatten()) {
            if !seen.insert(*id) {
                return Err(Error::InvalidInput(format!(
                    "class {id} appears in more than one session"
                )));
            }
        }
        Ok(())
    }

    pub fn all_classes(&self) -> BTreeSet<ClassId> {
        self.base_classes
            .iter()
            .chain(self.sessions.iter().flatten())
            .copied()
            .collect()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&path, e))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de)
            .map_err(|e| Error::parse(e.path().to_string(), e.inner()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FscilMode {
    /// Base-class readout, never extended.
    Frozen,
    Prototypical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionAccuracy {
    pub session: usize,
    pub classes: usize,
    pub all: f64,
    pub base: f64,
    /// `None` for the base session.
    pub novel: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FscilReport {
    pub mode: FscilMode,
    pub sessions: Vec<SessionAccuracy>,
}

impl FscilReport {
    pub fn mean_all(&self) -> f64 {
        self.sessions.iter().map(|s| s.all).sum::<f64>() / self.sessions.len().max(1) as f64
    }
}

fn class_prototypes(
    extractor: &dyn FeatureExtractor,
    train: &[Sample],
    classes: &[ClassId],
    limit: Option<usize>,
    temporal: bool,
) -> Result<Vec<(ClassId, Vec<f64>)>> {
    classes
        .par_iter()
        .map(|&id| {
            let mut picked: Vec<&Sample> = train.iter().filter(|s| s.class_id == id).collect();
            if let Some(k) = limit {
                if picked.len() < k {
                    return Err(Error::InvalidInput(format!(
                        "class {id} has {} training samples, {k} shots required",
                        picked.len()
                    )));
                }
                picked.truncate(k);
            }
            if picked.is_empty() {
                return Err(Error::InvalidInput(format!("class {id} has no training samples")));
            }
            let embedded = picked
                .iter()
                .map(|s| extractor.embed(s))
                .collect::<Result<Vec<_>>>()?;
            let c = if temporal {
                compute_temporal_prototype(&embedded)?
            } else {
                let flat = embedded
                    .into_iter()
                    .map(|mut e| {
                        if e.len() != 1 {
                            return Err(Error::InvalidInput(
                                "sequence embeddings need the temporal variant".into(),
                            ));
                        }
                        Ok(e.pop().expect("one step"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                compute_prototype(&flat)?
            };
            Ok((id, c))
        })
        .collect()
}

/// Runs the session loop and reports accuracy on all classes seen so far
/// after the base session and after each incremental session.
///
/// Base prototypes use every base training sample; incremental classes use
/// their first `shots` training samples in input order. `timesteps` selects
/// the temporal variant.
pub fn run_fscil(
    extractor: &dyn FeatureExtractor,
    plan: &SessionPlan,
    train: &[Sample],
    test: &[Sample],
    mode: FscilMode,
    timesteps: Option<usize>,
) -> Result<FscilReport> {
    plan.validate()?;
    let known = plan.all_classes();
    if let Some(s) = test.iter().find(|s| !known.contains(&s.class_id)) {
        return Err(Error::InvalidInput(format!(
            "evaluation class {} is not in the session plan",
            s.class_id
        )));
    }
    let temporal = timesteps.is_some();
    let base_protos = class_prototypes(extractor, train, &plan.base_classes, None, temporal)?;
    let mut classifier = replace_readout(&base_protos, timesteps)?;
    let base_set: BTreeSet<ClassId> = plan.base_classes.iter().copied().collect();
    let mut seen = base_set.clone();

    let mut sessions = Vec::with_capacity(plan.sessions.len() + 1);
    for session in 0..=plan.sessions.len() {
        if session > 0 {
            let classes = &plan.sessions[session - 1];
            seen.extend(classes.iter().copied());
            if mode == FscilMode::Prototypical {
                let protos =
                    class_prototypes(extractor, train, classes, Some(plan.shots), temporal)?;
                classifier = extend_classifier(&classifier, &protos)?;
            }
        }
        let eval: Vec<&Sample> = test.iter().filter(|s| seen.contains(&s.class_id)).collect();
        let hits = eval
            .par_iter()
            .map(|s| {
                let e = extractor.embed(s)?;
                let predicted = if temporal {
                    classifier.classify_sequence(&e)?
                } else {
                    if e.len() != 1 {
                        return Err(Error::InvalidInput(
                            "sequence embeddings need the temporal variant".into(),
                        ));
                    }
                    classifier.classify(&e[0])?
                };
                Ok((base_set.contains(&s.class_id), predicted == s.class_id))
            })
            .collect::<Result<Vec<_>>>()?;
        let frac = |sel: &dyn Fn(bool) -> bool| {
            let (n, ok) = hits
                .iter()
                .filter(|(b, _)| sel(*b))
                .fold((0usize, 0usize), |(n, ok), (_, hit)| (n + 1, ok + *hit as usize));
            (n > 0).then(|| ok as f64 / n as f64)
        };
        sessions.push(SessionAccuracy {
            session,
            classes: seen.len(),
            all: frac(&|_| true).unwrap_or(0.0),
            base: frac(&|b| b).unwrap_or(0.0),
            novel: if session == 0 { None } else { Some(frac(&|b| !b).unwrap_or(0.0)) },
        });
    }
    Ok(FscilReport { mode, sessions })
}

/// Seeded Gaussian clusters around random class centroids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticConfig {
    pub classes: usize,
    pub dim: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    /// Standard deviation of centroid coordinates.
    pub separation: f64,
    /// Standard deviation of per-sample noise.
    pub noise: f64,
    /// Timesteps per sample; each step is centroid plus fresh noise.
    pub timesteps: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            classes: 70,
            dim: 16,
            train_per_class: 20,
            test_per_class: 10,
            separation: 10.0,
            noise: 1.0,
            timesteps: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub centroids: Vec<Vec<f64>>,
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
}

pub fn synthetic_clusters(cfg: &SyntheticConfig) -> Result<SyntheticData> {
    if cfg.dim == 0 || cfg.timesteps == 0 {
        return Err(Error::InvalidParameter("dim and timesteps must be positive".into()));
    }
    let mut rng = Rng::new(cfg.seed);
    let centroids: Vec<Vec<f64>> = (0..cfg.classes)
        .map(|_| (0..cfg.dim).map(|_| cfg.separation * rng.normal()).collect())
        .collect();
    let draw = |count: usize, rng: &mut Rng| -> Vec<Sample> {
        let mut out = Vec::with_capacity(count * cfg.classes);
        for (id, c) in centroids.iter().enumerate() {
            for _ in 0..count {
                let steps = (0..cfg.timesteps)
                    .map(|_| c.iter().map(|v| v + cfg.noise * rng.normal()).collect())
                    .collect();
                out.push(Sample { class_id: id, steps });
            }
        }
        out
    };
    let train = draw(cfg.train_per_class, &mut rng);
    let test = draw(cfg.test_per_class, &mut rng);
    Ok(SyntheticData {
        centroids,
        train,
        test,
    })
}

/// Reads `class_id,t,e_0,...` rows; a row with `t == 0` starts a new sample.
pub fn read_embeddings_csv<R: Read>(reader: R) -> Result<Vec<Sample>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::parse("header", e))?.clone();
    if headers.len() < 3 || &headers[0] != "class_id" || &headers[1] != "t" {
        return Err(Error::parse(
            "header",
            "expected `class_id,t,e_0,...`",
        ));
    }
    let dim = headers.len() - 2;
    let mut samples: Vec<Sample> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::parse(format!("line {row}"), e))?;
        let field = |j: usize| -> Result<&str> {
            rec.get(j)
                .ok_or_else(|| Error::parse(format!("line {row}"), "missing column"))
        };
        let class_id: ClassId = field(0)?
            .parse()
            .map_err(|e| Error::parse(format!("line {row} class_id"), e))?;
        let t: usize = field(1)?
            .parse()
            .map_err(|e| Error::parse(format!("line {row} t"), e))?;
        if rec.len() != dim + 2 {
            return Err(Error::parse(
                format!("line {row}"),
                format!("{} columns, header has {}", rec.len(), dim + 2),
            ));
        }
        let e = (0..dim)
            .map(|j| {
                let v: f64 = field(j + 2)?
                    .parse()
                    .map_err(|err| Error::parse(format!("line {row} e_{j}"), err))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::parse(format!("line {row} e_{j}"), "not finite"))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if t == 0 {
            samples.push(Sample {
                class_id,
                steps: vec![e],
            });
        } else {
            let last = samples
                .last_mut()
                .filter(|s| s.class_id == class_id && s.steps.len() == t)
                .ok_or_else(|| {
                    Error::parse(format!("line {row}"), "timestep does not continue a sample")
                })?;
            last.steps.push(e);
        }
    }
    Ok(samples)
}

pub fn write_embeddings_csv<W: Write>(writer: W, samples: &[Sample]) -> Result<()> {
    let dim = samples
        .first()
        .and_then(|s| s.steps.first())
        .map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["class_id".to_string(), "t".to_string()];
    header.extend((0..dim).map(|j| format!("e_{j}")));
    let io = |e: csv::Error| Error::parse("embedding csv", e);
    w.write_record(&header).map_err(io)?;
    for s in samples {
        for (t, e) in s.steps.iter().enumerate() {
            let mut rec = vec![s.class_id.to_string(), t.to_string()];
            rec.extend(e.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::parse("embedding csv", e))
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<Vec<Sample>> {
    let file = std::fs::File::open(path.as_ref()).map_err(|e| Error::io(&path, e))?;
    read_embeddings_csv(file)
}

/// Groups samples by class, preserving input order inside each class.
pub fn by_class(samples: &[Sample]) -> BTreeMap<ClassId, Vec<&Sample>> {
    let mut map: BTreeMap<ClassId, Vec<&Sample>> = BTreeMap::new();
    for s in samples {
        map.entry(s.class_id).or_default().push(s);
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one(class_id: ClassId, e: Vec<f64>) -> Sample {
        Sample {
            class_id,
            steps: vec![e],
        }
    }

    #[test]
    fn prototype_examples() {
        assert_eq!(compute_prototype(&[vec![1.0, 3.0]]).unwrap(), vec![1.0, 3.0]);
        assert_eq!(
            compute_prototype(&[vec![0.0, 0.0], vec![2.0, 4.0]]).unwrap(),
            vec![1.0, 2.0]
        );
        assert_eq!(
            compute_temporal_prototype(&[vec![vec![1.0], vec![2.0], vec![3.0]]]).unwrap(),
            vec![6.0]
        );
        assert!(compute_prototype(&[]).is_err());
        assert!(compute_prototype(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn weight_examples() {
        assert_eq!(
            prototype_weights(&[1.0, 3.0], None).unwrap(),
            (vec![2.0, 6.0], -10.0)
        );
        assert_eq!(prototype_weights(&[0.0], None).unwrap(), (vec![0.0], -0.0));
        assert_eq!(prototype_weights(&[2.0], Some(4)).unwrap(), (vec![4.0], -1.0));
        assert!(prototype_weights(&[2.0], Some(0)).is_err());
    }

    #[test]
    fn readout_replacement_and_extension() {
        let c = replace_readout(&[(2, vec![2.0]), (1, vec![0.0])], None).unwrap();
        assert_eq!(c.class_ids, vec![1, 2]);
        assert_eq!(c.weights, vec![vec![0.0], vec![4.0]]);
        assert_eq!(c.biases, vec![-0.0, -4.0]);
        assert!(replace_readout(&[], None).is_err());
        assert!(replace_readout(&[(1, vec![0.0]), (1, vec![1.0])], None).is_err());

        assert_eq!(extend_classifier(&c, &[]).unwrap(), c);
        assert!(extend_classifier(&c, &[(2, vec![5.0])]).is_err());
        let ext = extend_classifier(&c, &[(7, vec![5.0])]).unwrap();
        assert_eq!(ext.len(), 3);
        let e = [1.3];
        assert_eq!(&ext.scores(&e).unwrap()[..2], &c.scores(&e).unwrap()[..]);
    }

    #[test]
    fn classify_examples() {
        let c = replace_readout(&[(1, vec![0.0]), (2, vec![2.0])], None).unwrap();
        assert_eq!(c.scores(&[0.5]).unwrap(), vec![0.0, -2.0]);
        assert_eq!(c.classify(&[0.5]).unwrap(), 1);
        assert_eq!(c.classify(&[2.0]).unwrap(), 2);
        assert_eq!(c.classify(&[1.0]).unwrap(), 1); // equidistant
        assert!(c.classify(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn temporal_classification_matches_summed_nearest() {
        let c = replace_readout(&[(0, vec![3.0]), (1, vec![6.0])], Some(3)).unwrap();
        // summed embedding 5.0 is closer to 6.0
        let seq = vec![vec![1.0], vec![2.0], vec![2.0]];
        assert_eq!(c.classify_sequence(&seq).unwrap(), 1);
        let seq = vec![vec![1.0], vec![1.0], vec![1.0]];
        assert_eq!(c.classify_sequence(&seq).unwrap(), 0);
    }

    #[test]
    fn single_base_class_run() {
        let plan = SessionPlan::contiguous(1, 0, 0, 5);
        let train = vec![one(0, vec![1.0]), one(0, vec![2.0])];
        let test = vec![one(0, vec![5.0]), one(0, vec![-3.0])];
        let ext = IdentityExtractor { dim: 1 };
        let r = run_fscil(&ext, &plan, &train, &test, FscilMode::Prototypical, None).unwrap();
        assert_eq!(r.sessions.len(), 1);
        assert_eq!(r.sessions[0].all, 1.0);
        assert_eq!(r.sessions[0].novel, None);
    }

    #[test]
    fn plan_validation() {
        let mut plan = SessionPlan::contiguous(2, 2, 2, 1);
        assert!(plan.validate().is_ok());
        plan.sessions[1][0] = 0;
        assert!(plan.validate().is_err());
        let plan = SessionPlan::contiguous(1, 0, 0, 1);
        let ext = IdentityExtractor { dim: 1 };
        let err = run_fscil(
            &ext,
            &plan,
            &[one(0, vec![0.0])],
            &[one(5, vec![0.0])],
            FscilMode::Frozen,
            None,
        )
        .unwrap_err();
        assert!(err.to_string().contains("not in the session plan"));
    }

    #[test]
    fn frozen_and_prototypical_on_clusters() {
        let data = synthetic_clusters(&SyntheticConfig {
            classes: 12,
            ..SyntheticConfig::default()
        })
        .unwrap();
        let plan = SessionPlan::contiguous(6, 3, 2, 5);
        let ext = IdentityExtractor { dim: 16 };
        let p = run_fscil(&ext, &plan, &data.train, &data.test, FscilMode::Prototypical, None)
            .unwrap();
        assert_eq!(p.sessions.iter().map(|s| s.classes).collect::<Vec<_>>(), vec![6, 8, 10, 12]);
        assert!(p.sessions.iter().all(|s| s.all >= 0.99));
        let f = run_fscil(&ext, &plan, &data.train, &data.test, FscilMode::Frozen, None).unwrap();
        assert!(f.sessions[1..].iter().all(|s| s.novel == Some(0.0)));
        assert_eq!(f.sessions[0].all, p.sessions[0].all);
    }

    #[test]
    fn shots_shortfall_is_an_error() {
        let plan = SessionPlan::contiguous(1, 1, 1, 3);
        let train = vec![one(0, vec![0.0]), one(1, vec![1.0])];
        let ext = IdentityExtractor { dim: 1 };
        assert!(run_fscil(&ext, &plan, &train, &[], FscilMode::Prototypical, None).is_err());
    }

    #[test]
    fn csv_round_trip_with_sequences() {
        let samples = vec![
            Sample {
                class_id: 3,
                steps: vec![vec![0.5, -1.25], vec![1e-3, 2.0]],
            },
            one(1, vec![0.1, 0.2]),
            one(1, vec![0.3, 0.4]),
        ];
        let mut buf = Vec::new();
        write_embeddings_csv(&mut buf, &samples).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("class_id,t,e_0,e_1\n"));
        assert_eq!(read_embeddings_csv(&buf[..]).unwrap(), samples);
        assert!(read_embeddings_csv("class_id,t,e_0\n0,1,0.5\n".as_bytes()).is_err());
        assert!(read_embeddings_csv("class_id,t,e_0\n0,0,x\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn prototype_is_nearest_centroid(
            protos in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 1..6),
            e in prop::collection::vec(-5.0f64..5.0, 3),
        ) {
            let labelled: Vec<(ClassId, Vec<f64>)> = protos.iter().cloned().enumerate().collect();
            let c = replace_readout(&labelled, None).unwrap();
            let dist: Vec<f64> = protos
                .iter()
                .map(|p| p.iter().zip(&e).map(|(a, b)| (a - b) * (a - b)).sum())
                .collect();
            let min = dist.iter().cloned().fold(f64::INFINITY, f64::min);
            let nearest: Vec<usize> = (0..dist.len()).filter(|&k| dist[k] - min < 1e-9).collect();
            if nearest.len() == 1 {
                prop_assert_eq!(c.classify(&e).unwrap(), nearest[0]);
            }
        }

        #[test]
        fn prototypes_ignore_sample_order(
            mut xs in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 1..8),
            seed in any::<u64>(),
        ) {
            let a = compute_prototype(&xs).unwrap();
            let mut rng = crate::rng::Rng::new(seed);
            for i in (1..xs.len()).rev() {
                xs.swap(i, rng.below(i + 1));
            }
            let b = compute_prototype(&xs).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
