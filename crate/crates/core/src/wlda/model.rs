//! # Model file format
//!
//! Little-endian binary:
//!
//! | bytes            | content                                           |
//! |------------------|---------------------------------------------------|
//! | 8                | magic `WLDAMODL`                                  |
//! | 4 (u32)          | format version (currently 1)                      |
//! | 8 (u64)          | vocabulary size `V`                               |
//! | 8 (u64)          | number of topics `K`                              |
//! | 1 (u8)           | hidden activation: 0 softplus, 1 leaky-relu       |
//! | 4 (u32)          | number of encoder layers `n`                      |
//! | 8·(n+1) (u64)    | encoder widths: input (= V), hidden..., output (= K) |
//! | 8·… (f64)        | per encoder layer: weight `(out, in)` row-major, then bias |
//! | 8·V·K (f64)      | topic matrix `β`, `(V, K)` row-major              |
//! | 8·V (f64)        | offset `b`                                        |
//!
//! Doubles are stored as raw IEEE-754 bits, so a round trip is exact.

use std::fs;
use std::path::Path;

use rand::Rng;

use crate::corpus::{top_indices, BowDocument};
use crate::metrics::TopicSet;
use crate::nn::{softmax, softmax_unchecked, Activation, DenseLayer, Matrix, MlpGrads, MlpParams, Parameters};
use crate::simplex::SimplexVector;
use crate::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MODEL_MAGIC: &[u8; 8] = b"WLDAMODL";

#[derive(Debug, Clone, PartialEq)]
pub struct WldaModel {
    pub encoder: MlpParams,
    /// `V × K`; column `k` holds the (unnormalized) word scores of topic `k`.
    pub topic_matrix: Matrix,
    pub offset: Vec<f64>,
}

/// Gradients of a [`WldaModel`], in the same tensor order.
#[derive(Debug, Clone, PartialEq)]
pub struct WldaGrads {
    pub encoder: MlpGrads,
    pub topic_matrix: Matrix,
    pub offset: Vec<f64>,
}

impl WldaModel {
    /// Glorot-uniform encoder and topic matrix, zero biases and offset.
    pub fn new<R: Rng + ?Sized>(
        vocab_size: usize,
        num_topics: usize,
        hidden: &[usize],
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if num_topics < 2 {
            return Err(Error::invalid("W-LDA needs at least two topics"));
        }
        if vocab_size < 2 {
            return Err(Error::invalid("W-LDA needs a vocabulary of at least two words"));
        }
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(vocab_size);
        sizes.extend_from_slice(hidden);
        sizes.push(num_topics);
        let encoder = MlpParams::new(&sizes, activation, rng)?;
        let limit = (6.0 / (vocab_size + num_topics) as f64).sqrt();
        let topic_matrix = Matrix::from_fn(vocab_size, num_topics, |_, _| rng.random_range(-limit..limit));
        Ok(Self {
            encoder,
            topic_matrix,
            offset: vec![0.0; vocab_size],
        })
    }

    /// Assembles a model from parts, checking that the shapes agree.
    pub fn from_parts(encoder: MlpParams, topic_matrix: Matrix, offset: Vec<f64>) -> Result<Self> {
        let v = topic_matrix.rows();
        let k = topic_matrix.cols();
        if encoder.input_dim() != v || encoder.output_dim() != k || offset.len() != v {
            return Err(Error::dim(format!(
                "encoder {:?}, topic matrix {v}x{k}, offset {}",
                encoder.sizes(),
                offset.len()
            )));
        }
        Ok(Self {
            encoder,
            topic_matrix,
            offset,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.topic_matrix.rows()
    }

    pub fn num_topics(&self) -> usize {
        self.topic_matrix.cols()
    }

    pub fn zero_grads(&self) -> WldaGrads {
        WldaGrads {
            encoder: self.encoder.zero_grads(),
            topic_matrix: Matrix::zeros(self.vocab_size(), self.num_topics()),
            offset: vec![0.0; self.vocab_size()],
        }
    }

    /// Topic proportions of `doc`. No noise is ever mixed in here.
    pub fn encode(&self, doc: &BowDocument) -> Result<SimplexVector> {
        let x = doc.dense(self.vocab_size())?;
        let (logits, _) = self.encoder.forward(&x)?;
        softmax(&logits)
    }

    pub fn encode_all<'a>(&self, docs: impl IntoIterator<Item = &'a BowDocument>) -> Result<Vec<SimplexVector>> {
        docs.into_iter().map(|d| self.encode(d)).collect()
    }

    /// Decoder logits `βθ + b`.
    pub(crate) fn decoder_logits(&self, theta: &[f64]) -> Vec<f64> {
        let mut h = vec![0.0; self.vocab_size()];
        self.topic_matrix.matvec_into(theta, &mut h);
        for (hi, bi) in h.iter_mut().zip(&self.offset) {
            *hi += bi;
        }
        h
    }

    /// Word distribution `ŵ = softmax(βθ + b)`.
    pub fn decode(&self, theta: &[f64]) -> Result<SimplexVector> {
        if theta.len() != self.num_topics() {
            return Err(Error::dim(format!(
                "theta of length {} for {} topics",
                theta.len(),
                self.num_topics()
            )));
        }
        let h = self.decoder_logits(theta);
        if h.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("decoder logits are not finite".into()));
        }
        Ok(SimplexVector::from_normalized(softmax_unchecked(&h)))
    }

    /// The `l` highest-scoring words of each column of `β`, descending, ties
    /// to the lower word id.
    pub fn extract_topics(&self, l: usize) -> Result<TopicSet> {
        if l == 0 || l > self.vocab_size() {
            return Err(Error::invalid(format!(
                "top-{l} words from a vocabulary of {}",
                self.vocab_size()
            )));
        }
        TopicSet::new(
            (0..self.num_topics())
                .map(|k| top_indices(&self.topic_matrix.column(k), l))
                .collect::<Result<_>>()?,
        )
    }
}

impl Parameters for WldaModel {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.encoder.tensors();
        t.push(self.topic_matrix.as_slice());
        t.push(&self.offset);
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = self.encoder.tensors_mut();
        t.push(self.topic_matrix.as_mut_slice());
        t.push(&mut self.offset);
        t
    }
}

impl Parameters for WldaGrads {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.encoder.tensors();
        t.push(self.topic_matrix.as_slice());
        t.push(&self.offset);
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = self.encoder.tensors_mut();
        t.push(self.topic_matrix.as_mut_slice());
        t.push(&mut self.offset);
        t
    }
}

pub fn model_to_bytes(model: &WldaModel) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + 8 * model.num_params());
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&MODEL_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(model.vocab_size() as u64).to_le_bytes());
    out.extend_from_slice(&(model.num_topics() as u64).to_le_bytes());
    out.push(match model.encoder.activation() {
        Activation::Softplus => 0,
        Activation::LeakyRelu => 1,
    });
    let sizes = model.encoder.sizes();
    out.extend_from_slice(&((sizes.len() - 1) as u32).to_le_bytes());
    for s in sizes {
        out.extend_from_slice(&(s as u64).to_le_bytes());
    }
    for tensor in model.tensors() {
        for x in tensor {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize, what: &str) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::parse(0, format!("model file truncated while reading {what} at byte {}", self.pos))
        })?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<usize> {
        let v = u64::from_le_bytes(self.take(8, what)?.try_into().unwrap());
        usize::try_from(v).map_err(|_| Error::parse(0, format!("{what} {v} does not fit in memory")))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| Error::parse(0, "size overflow"))?, what)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<WldaModel> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8, "magic")? != MODEL_MAGIC {
        return Err(Error::parse(0, "not a W-LDA model file"));
    }
    let version = r.u32("version")?;
    if version != MODEL_FORMAT_VERSION {
        return Err(Error::Version {
            what: "model format",
            found: version,
            expected: MODEL_FORMAT_VERSION,
        });
    }
    let v = r.u64("vocabulary size")?;
    let k = r.u64("topic count")?;
    let activation = match r.u8("activation")? {
        0 => Activation::Softplus,
        1 => Activation::LeakyRelu,
        other => return Err(Error::parse(0, format!("unknown activation tag {other}"))),
    };
    let n_layers = r.u32("layer count")? as usize;
    if n_layers == 0 {
        return Err(Error::parse(0, "encoder has no layers"));
    }
    let sizes = (0..=n_layers)
        .map(|_| r.u64("layer width"))
        .collect::<Result<Vec<_>>>()?;
    if sizes[0] != v || sizes[n_layers] != k {
        return Err(Error::dim(format!(
            "header says V={v}, K={k} but encoder widths are {sizes:?}"
        )));
    }
    let mut layers = Vec::with_capacity(n_layers);
    for w in sizes.windows(2) {
        let weight = Matrix::from_vec(w[1], w[0], r.f64s(w[0] * w[1], "encoder weight")?)?;
        let bias = r.f64s(w[1], "encoder bias")?;
        layers.push(DenseLayer { weight, bias });
    }
    let encoder = MlpParams::from_layers(layers, activation)?;
    let topic_matrix = Matrix::from_vec(v, k, r.f64s(v * k, "topic matrix")?)?;
    let offset = r.f64s(v, "offset")?;
    if r.pos != bytes.len() {
        return Err(Error::parse(0, format!("{} trailing bytes after model", bytes.len() - r.pos)));
    }
    WldaModel::from_parts(encoder, topic_matrix, offset)
}

pub fn save_model(model: &WldaModel, path: &Path) -> Result<()> {
    fs::write(path, model_to_bytes(model))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<WldaModel> {
    model_from_bytes(&fs::read(path)?)
}
