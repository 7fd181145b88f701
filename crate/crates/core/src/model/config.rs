use crate::error::{Error, Result};

/// How the loss weighs the two classes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClassWeightMode {
    /// `N / (2 · N_class)`, counted on the training split.
    InverseFrequency,
    Manual { boundary: f64, no_boundary: f64 },
}

impl ClassWeightMode {
    fn encode(&self) -> String {
        match self {
            ClassWeightMode::InverseFrequency => "inverse-frequency".into(),
            ClassWeightMode::Manual { boundary, no_boundary } => format!("manual:{boundary}:{no_boundary}"),
        }
    }

    fn decode(s: &str) -> Result<Self> {
        if s == "inverse-frequency" {
            return Ok(ClassWeightMode::InverseFrequency);
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["manual", b, nb] => match (b.parse(), nb.parse()) {
                (Ok(boundary), Ok(no_boundary)) => Ok(ClassWeightMode::Manual { boundary, no_boundary }),
                _ => Err(Error::Config(format!("invalid class weights {s:?}"))),
            },
            _ => Err(Error::Config(format!("invalid class weight mode {s:?}"))),
        }
    }
}

impl std::str::FromStr for ClassWeightMode {
    type Err = Error;

    /// `inverse-frequency` or `manual:<boundary>:<no_boundary>`.
    fn from_str(s: &str) -> Result<Self> {
        Self::decode(s)
    }
}

impl std::fmt::Display for ClassWeightMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.encode())
    }
}

/// Hyperparameters of the boundary labeler.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    /// Tokens per window.
    pub window: usize,
    /// Embedding dimension.
    pub dim: usize,
    pub n_filters: usize,
    /// Convolution width, odd.
    pub conv_width: usize,
    /// Max-pooling width, odd.
    pub pool_width: usize,
    /// Hidden units per LSTM direction.
    pub hidden: usize,
    pub dropout: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub class_weights: ClassWeightMode,
    pub fine_tune: bool,
    pub learning_rate: f64,
    pub rms_decay: f64,
    pub rms_epsilon: f64,
    /// Stride between training windows; `None` uses ⌈window / 2⌉.
    pub train_stride: Option<usize>,
    /// Fraction of training transcripts held out to monitor F1.
    pub validation_fraction: f64,
    pub seed: u64,
}

impl ModelConfig {
    pub fn new(dim: usize) -> Self {
        ModelConfig {
            window: 50,
            dim,
            n_filters: 100,
            conv_width: 7,
            pool_width: 3,
            hidden: 100,
            dropout: 0.5,
            epochs: 30,
            batch_size: 32,
            class_weights: ClassWeightMode::InverseFrequency,
            fine_tune: true,
            learning_rate: 1e-3,
            rms_decay: 0.9,
            rms_epsilon: 1e-8,
            train_stride: None,
            validation_fraction: 0.1,
            seed: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        for (name, v) in [
            ("window", self.window),
            ("dim", self.dim),
            ("n_filters", self.n_filters),
            ("hidden", self.hidden),
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
        ] {
            if v == 0 {
                return fail(format!("{name} must be positive"));
            }
        }
        if self.conv_width % 2 == 0 {
            return fail(format!("conv_width must be odd, got {}", self.conv_width));
        }
        if self.pool_width % 2 == 0 {
            return fail(format!("pool_width must be odd, got {}", self.pool_width));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout must be in [0, 1), got {}", self.dropout));
        }
        if let Some(s) = self.train_stride {
            if s == 0 || s > self.window {
                return fail(format!("train_stride must be in 1..={}, got {s}", self.window));
            }
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return fail(format!("validation_fraction must be in [0, 1), got {}", self.validation_fraction));
        }
        if let ClassWeightMode::Manual { boundary, no_boundary } = self.class_weights {
            if !(boundary > 0.0 && no_boundary > 0.0) {
                return fail("class weights must be positive".into());
            }
        }
        if !(self.learning_rate > 0.0) || !(self.rms_decay > 0.0 && self.rms_decay < 1.0) || !(self.rms_epsilon > 0.0) {
            return fail("invalid optimizer settings".into());
        }
        Ok(())
    }

    pub fn train_stride(&self) -> usize {
        self.train_stride.unwrap_or(self.window.div_ceil(2))
    }

    /// Inference stride, ⌈window / 2⌉.
    pub fn predict_stride(&self) -> usize {
        self.window.div_ceil(2)
    }

    /// Flat `key=value` form, stable key order.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut v = vec![
            ("window", self.window.to_string()),
            ("dim", self.dim.to_string()),
            ("n_filters", self.n_filters.to_string()),
            ("conv_width", self.conv_width.to_string()),
            ("pool_width", self.pool_width.to_string()),
            ("hidden", self.hidden.to_string()),
            ("dropout", self.dropout.to_string()),
            ("epochs", self.epochs.to_string()),
            ("batch_size", self.batch_size.to_string()),
            ("class_weights", self.class_weights.encode()),
            ("fine_tune", self.fine_tune.to_string()),
            ("learning_rate", self.learning_rate.to_string()),
            ("rms_decay", self.rms_decay.to_string()),
            ("rms_epsilon", self.rms_epsilon.to_string()),
            ("validation_fraction", self.validation_fraction.to_string()),
            ("seed", self.seed.to_string()),
        ];
        if let Some(s) = self.train_stride {
            v.push(("train_stride", s.to_string()));
        }
        v.into_iter().map(|(k, v)| (k.to_owned(), v)).collect()
    }

    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut cfg = ModelConfig::new(1);
        let mut dim_seen = false;
        for (k, v) in pairs {
            let bad = || Error::Config(format!("invalid value {v:?} for {k}"));
            fn num<T: std::str::FromStr>(v: &str, bad: impl Fn() -> Error) -> Result<T> {
                v.parse().map_err(|_| bad())
            }
            match k {
                "window" => cfg.window = num(v, bad)?,
                "dim" => {
                    cfg.dim = num(v, bad)?;
                    dim_seen = true;
                }
                "n_filters" => cfg.n_filters = num(v, bad)?,
                "conv_width" => cfg.conv_width = num(v, bad)?,
                "pool_width" => cfg.pool_width = num(v, bad)?,
                "hidden" => cfg.hidden = num(v, bad)?,
                "dropout" => cfg.dropout = num(v, bad)?,
                "epochs" => cfg.epochs = num(v, bad)?,
                "batch_size" => cfg.batch_size = num(v, bad)?,
                "class_weights" => cfg.class_weights = ClassWeightMode::decode(v)?,
                "fine_tune" => cfg.fine_tune = num(v, bad)?,
                "learning_rate" => cfg.learning_rate = num(v, bad)?,
                "rms_decay" => cfg.rms_decay = num(v, bad)?,
                "rms_epsilon" => cfg.rms_epsilon = num(v, bad)?,
                "validation_fraction" => cfg.validation_fraction = num(v, bad)?,
                "seed" => cfg.seed = num(v, bad)?,
                "train_stride" => cfg.train_stride = Some(num(v, bad)?),
                _ => return Err(Error::Config(format!("unknown model setting {k:?}"))),
            }
        }
        if !dim_seen {
            return Err(Error::Config("model settings lack dim".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_round_trip() {
        let mut cfg = ModelConfig::new(25);
        cfg.class_weights = ClassWeightMode::Manual { boundary: 3.5, no_boundary: 0.25 };
        cfg.train_stride = Some(7);
        cfg.dropout = 0.1 + 0.2;
        let pairs = cfg.to_pairs();
        let back = ModelConfig::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str()))).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn strides() {
        let mut cfg = ModelConfig::new(4);
        cfg.window = 7;
        assert_eq!(cfg.predict_stride(), 4);
        assert_eq!(cfg.train_stride(), 4);
    }

    #[test]
    fn validation() {
        let mut cfg = ModelConfig::new(4);
        cfg.conv_width = 4;
        assert!(cfg.validate().is_err());
        let mut cfg = ModelConfig::new(4);
        cfg.dropout = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = ModelConfig::new(0);
        cfg.window = 3;
        assert!(cfg.validate().is_err());
        assert!(ModelConfig::from_pairs([("window", "5")]).is_err());
        assert!(ModelConfig::from_pairs([("dim", "5"), ("bogus", "1")]).is_err());
    }
}
