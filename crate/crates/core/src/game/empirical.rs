use super::{Coalition, CoalitionGame, Convention, GameInfo, Nature, Scope, TargetKind, ValueCache};
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::measures::{Measure, MeasureKind};
use crate::model::{Dataset, LossKind, ModelHandle};

/// Model-specific game estimated on a background dataset: coordinates
/// outside the coalition are taken jointly from each background row, the
/// coalition keeps the explained point's values. The law of the target is
/// the empirical law over background rows.
#[derive(Debug)]
pub struct EmpiricalGame {
    model: ModelHandle,
    background: Vec<Vec<f64>>,
    background_y: Option<Vec<f64>>,
    point: Vec<f64>,
    y: Option<f64>,
    loss: Option<LossKind>,
    measure: Measure,
    names: Vec<String>,
    baseline: f64,
    cache: ValueCache,
}

impl EmpiricalGame {
    /// Game on the model output at `point` (model input order).
    pub fn model_output(model: &ModelHandle, background: &Dataset, point: &[f64], measure: Measure) -> Result<Self> {
        Self::build(model, background, point, None, measure)
    }

    /// Game on the loss at `(point, y)`; the label is the last player.
    pub fn loss_game(
        model: &ModelHandle,
        background: &Dataset,
        point: &[f64],
        y: f64,
        loss: LossKind,
        measure: Measure,
    ) -> Result<Self> {
        Self::build(model, background, point, Some((y, loss)), measure)
    }

    fn build(
        model: &ModelHandle,
        background: &Dataset,
        point: &[f64],
        label: Option<(f64, LossKind)>,
        measure: Measure,
    ) -> Result<Self> {
        measure.validate()?;
        if background.n_rows() == 0 {
            return Err(Error::EmptyBackground);
        }
        if point.len() != model.inputs().len() {
            return Err(Error::InvalidArgument(format!(
                "point has {} values for {} model inputs",
                point.len(),
                model.inputs().len()
            )));
        }
        let rows = background.select(model.inputs())?;
        let mut names = model.inputs().to_vec();
        let background_y = match label {
            Some(_) => {
                let t = background
                    .target()
                    .ok_or_else(|| Error::InvalidArgument("background dataset has no target column".into()))?;
                names.push(background.columns()[t].name.clone());
                background.target_values()
            }
            None => None,
        };
        let mut game = EmpiricalGame {
            model: model.clone(),
            background: rows,
            background_y,
            point: point.to_vec(),
            y: label.map(|l| l.0),
            loss: label.map(|l| l.1),
            measure,
            names,
            baseline: 0.0,
            cache: ValueCache::default(),
        };
        game.baseline = measure.apply(&game.law(Coalition::EMPTY)?)?;
        Ok(game)
    }

    pub fn baseline(&self) -> f64 {
        self.baseline
    }

    fn law(&self, s: Coalition) -> Result<Distribution> {
        let p = self.point.len();
        let points: Vec<Vec<f64>> = self
            .background
            .iter()
            .map(|row| (0..p).map(|j| if s.contains(j) { self.point[j] } else { row[j] }).collect())
            .collect();
        let samples = match (self.loss, &self.background_y) {
            (None, _) => self.model.evaluate_batch(&points)?,
            (Some(loss), Some(ys)) => {
                let labels: Vec<f64> = ys
                    .iter()
                    .map(|b| if s.contains(p) { self.y.expect("loss games carry a label") } else { *b })
                    .collect();
                if loss == LossKind::CrossEntropy {
                    let crate::model::OutputType::Probabilities(classes) = self.model.output_type() else {
                        return Err(Error::IncompatibleLossKind(
                            "cross-entropy needs a model that outputs class probabilities".into(),
                        ));
                    };
                    points
                        .iter()
                        .zip(&labels)
                        .map(|(x, y)| loss.of_probabilities(*y, &self.model.probabilities(x)?, classes))
                        .collect::<Result<Vec<_>>>()?
                } else {
                    let outputs = self.model.evaluate_batch(&points)?;
                    outputs
                        .iter()
                        .zip(&labels)
                        .map(|(g, y)| loss.of_prediction(*y, *g))
                        .collect::<Result<Vec<_>>>()?
                }
            }
            (Some(_), None) => unreachable!("loss games load background labels"),
        };
        Distribution::from_samples(samples, None)
    }
}

impl CoalitionGame for EmpiricalGame {
    fn n_players(&self) -> usize {
        self.names.len()
    }

    fn value(&self, s: Coalition) -> Result<f64> {
        if s.is_empty() {
            return Ok(0.0);
        }
        self.cache.get_or_compute(s, || {
            let xi = self.measure.apply(&self.law(s)?)?;
            Ok(match self.measure.kind {
                MeasureKind::ExpectedValue => xi - self.baseline,
                _ => self.baseline - xi,
            })
        })
    }

    fn player_names(&self) -> Vec<String> {
        self.names.clone()
    }

    fn info(&self) -> GameInfo {
        let entropy = matches!(
            self.measure.kind,
            MeasureKind::ShannonEntropy | MeasureKind::CumulativePairedEntropy
        );
        let mut instance: std::collections::BTreeMap<String, String> = self
            .names
            .iter()
            .zip(&self.point)
            .map(|(n, v)| (n.clone(), format!("{v}")))
            .collect();
        if let (Some(y), Some(name)) = (self.y, self.names.get(self.point.len())) {
            instance.insert(name.clone(), format!("{y}"));
        }
        GameInfo {
            scope: Scope::Local,
            nature: Some(Nature::ModelSpecific),
            measure: Some(self.measure.kind),
            target: Some(if self.loss.is_some() { TargetKind::Loss } else { TargetKind::ModelOutput }),
            entropy_base: entropy.then_some(self.measure.entropy_base),
            convention: Convention::for_measure(self.measure.kind),
            baseline: self.baseline,
            instance: Some(instance),
        }
    }
}
