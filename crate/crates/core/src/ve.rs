//! Numeric reference for the vertical encoding stage: collapsing the
//! elevation axis of a dense polar feature volume into a bird's-eye-view
//! map with per-column single-query attention.
//!
//! For every (y, x) column the encoder forms one query vector from a
//! learned embedding, projects each of the Z vertical slices to per-head
//! keys and values, softmax-normalises the scaled dot-product scores
//! down the vertical axis, and mixes the concatenated head outputs with
//! an output matrix. The scores are max-subtracted before
//! exponentiation, so the largest term contributes exp(0) = 1 and the
//! normaliser can never vanish. A pixel-shuffle reshape then trades
//! channel blocks for spatial resolution, and `sve_baseline` provides
//! the plain columnwise-max compressor the attention variant is
//! measured against.
//!
//! Everything here is straight-line scalar code with explicit layouts,
//! meant to be checked rather than fast: `ve_loss_and_grads` carries the
//! hand-derived backward pass for the scalar loss `sum(outputs)`, and
//! `grad_check` confirms it against central differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense C x Z x Y x X feature volume. Layout law:
/// `offset(c, z, y, x) = ((c * Z + z) * Y + y) * X + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseFeatureMap<T> {
    pub channels: usize,
    pub depth: usize,
    pub height: usize,
    pub width: usize,
    values: Vec<T>,
}

impl<T: Real> DenseFeatureMap<T> {
    pub fn new(
        channels: usize,
        depth: usize,
        height: usize,
        width: usize,
        values: Vec<T>,
    ) -> Result<Self> {
        if channels == 0 || depth == 0 || height == 0 || width == 0 {
            return Err(Error::domain("feature map dimensions must all be positive"));
        }
        let expect = channels * depth * height * width;
        if values.len() != expect {
            return Err(Error::ShapeMismatch(format!(
                "feature map needs {expect} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("feature map value"));
        }
        Ok(DenseFeatureMap {
            channels,
            depth,
            height,
            width,
            values,
        })
    }

    pub fn zeros(channels: usize, depth: usize, height: usize, width: usize) -> Result<Self> {
        let len = channels * depth * height * width;
        DenseFeatureMap::new(channels, depth, height, width, vec![T::zero(); len])
    }

    /// Deterministic uniform(-1, 1) fill, for tests and demos.
    pub fn seeded(
        channels: usize,
        depth: usize,
        height: usize,
        width: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = channels * depth * height * width;
        let values = (0..len)
            .map(|_| T::of(rng.random_range(-1.0..1.0)))
            .collect();
        DenseFeatureMap::new(channels, depth, height, width, values)
    }

    #[inline]
    pub fn offset(&self, c: usize, z: usize, y: usize, x: usize) -> usize {
        debug_assert!(c < self.channels && z < self.depth && y < self.height && x < self.width);
        ((c * self.depth + z) * self.height + y) * self.width + x
    }

    #[inline]
    pub fn get(&self, c: usize, z: usize, y: usize, x: usize) -> T {
        self.values[self.offset(c, z, y, x)]
    }

    pub fn set(&mut self, c: usize, z: usize, y: usize, x: usize, v: T) {
        assert!(v.is_finite(), "feature values must stay finite");
        let at = self.offset(c, z, y, x);
        self.values[at] = v;
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// Dense C x Y x X map, the vertical axis already collapsed. Layout:
/// `offset(c, y, x) = (c * Y + y) * X + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct BevFeatureMap<T> {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    values: Vec<T>,
}

impl<T: Real> BevFeatureMap<T> {
    pub fn new(channels: usize, height: usize, width: usize, values: Vec<T>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::domain("map dimensions must all be positive"));
        }
        let expect = channels * height * width;
        if values.len() != expect {
            return Err(Error::ShapeMismatch(format!(
                "map needs {expect} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("map value"));
        }
        Ok(BevFeatureMap {
            channels,
            height,
            width,
            values,
        })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Result<Self> {
        BevFeatureMap::new(channels, height, width, vec![T::zero(); channels * height * width])
    }

    #[inline]
    pub fn offset(&self, c: usize, y: usize, x: usize) -> usize {
        debug_assert!(c < self.channels && y < self.height && x < self.width);
        (c * self.height + y) * self.width + x
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> T {
        self.values[self.offset(c, y, x)]
    }

    fn set_raw(&mut self, c: usize, y: usize, x: usize, v: T) {
        let at = self.offset(c, y, x);
        self.values[at] = v;
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// Post-softmax attention weights, one simplex per (head, y, x) down the
/// vertical axis. Layout: `offset(h, z, y, x) = ((h * Z + z) * Y + y) * X + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionWeights<T> {
    pub n_heads: usize,
    pub depth: usize,
    pub height: usize,
    pub width: usize,
    values: Vec<T>,
}

impl<T: Real> AttentionWeights<T> {
    fn zeros(n_heads: usize, depth: usize, height: usize, width: usize) -> Self {
        AttentionWeights {
            n_heads,
            depth,
            height,
            width,
            values: vec![T::zero(); n_heads * depth * height * width],
        }
    }

    #[inline]
    pub fn offset(&self, h: usize, z: usize, y: usize, x: usize) -> usize {
        debug_assert!(h < self.n_heads && z < self.depth && y < self.height && x < self.width);
        ((h * self.depth + z) * self.height + y) * self.width + x
    }

    #[inline]
    pub fn get(&self, h: usize, z: usize, y: usize, x: usize) -> T {
        self.values[self.offset(h, z, y, x)]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// Learned state of the encoder. The three projection stacks hold one
/// `d_h x C` matrix per head, flattened as
/// `w[(h * d_h + r) * C + c]`; the output matrix is `C x C` flattened
/// row-major as `w_o[r * C + c]`; `query` is the length-C embedding the
/// per-head queries are projected from.
#[derive(Debug, Clone, PartialEq)]
pub struct VerticalEncoderParams<T> {
    pub n_heads: usize,
    pub channels: usize,
    pub query: Vec<T>,
    pub w_q: Vec<T>,
    pub w_k: Vec<T>,
    pub w_v: Vec<T>,
    pub w_o: Vec<T>,
}

impl<T: Real> VerticalEncoderParams<T> {
    pub fn new(
        n_heads: usize,
        channels: usize,
        query: Vec<T>,
        w_q: Vec<T>,
        w_k: Vec<T>,
        w_v: Vec<T>,
        w_o: Vec<T>,
    ) -> Result<Self> {
        if n_heads == 0 || channels == 0 {
            return Err(Error::domain("need at least one head and one channel"));
        }
        if channels % n_heads != 0 {
            return Err(Error::DivisibilityError {
                what: "channels",
                value: channels,
                divisor: n_heads,
            });
        }
        let square = channels * channels;
        for (name, vec, expect) in [
            ("query", &query, channels),
            ("w_q", &w_q, square),
            ("w_k", &w_k, square),
            ("w_v", &w_v, square),
            ("w_o", &w_o, square),
        ] {
            if vec.len() != expect {
                return Err(Error::ShapeMismatch(format!(
                    "{name} needs {expect} values, got {}",
                    vec.len()
                )));
            }
            if vec.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteInput("encoder parameter"));
            }
        }
        Ok(VerticalEncoderParams {
            n_heads,
            channels,
            query,
            w_q,
            w_k,
            w_v,
            w_o,
        })
    }

    /// Deterministic initialisation: query entries uniform in (-1, 1),
    /// matrix entries uniform in (-1/sqrt(C), 1/sqrt(C)), drawn in the
    /// order query, w_q, w_k, w_v, w_o from one seeded stream.
    pub fn seeded(channels: usize, n_heads: usize, seed: u64) -> Result<Self> {
        if n_heads == 0 || channels == 0 {
            return Err(Error::domain("need at least one head and one channel"));
        }
        if channels % n_heads != 0 {
            return Err(Error::DivisibilityError {
                what: "channels",
                value: channels,
                divisor: n_heads,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (channels as f64).sqrt();
        let square = channels * channels;
        let query = (0..channels)
            .map(|_| T::of(rng.random_range(-1.0..1.0)))
            .collect();
        let mut matrix = |n: usize| -> Vec<T> {
            (0..n)
                .map(|_| T::of(rng.random_range(-scale..scale)))
                .collect()
        };
        let w_q = matrix(square);
        let w_k = matrix(square);
        let w_v = matrix(square);
        let w_o = matrix(square);
        VerticalEncoderParams::new(n_heads, channels, query, w_q, w_k, w_v, w_o)
    }

    pub fn head_dim(&self) -> usize {
        self.channels / self.n_heads
    }
}

fn check_shapes<T: Real>(
    fm: &DenseFeatureMap<T>,
    params: &VerticalEncoderParams<T>,
) -> Result<()> {
    if fm.channels != params.channels {
        return Err(Error::ShapeMismatch(format!(
            "feature map has {} channels, encoder expects {}",
            fm.channels, params.channels
        )));
    }
    Ok(())
}

/// Per-head query vectors, shared by every column: `q_h = W_q[h] * query`.
fn head_queries<T: Real>(params: &VerticalEncoderParams<T>) -> Vec<T> {
    let c_n = params.channels;
    let d = params.head_dim();
    let mut q = vec![T::zero(); params.n_heads * d];
    for h in 0..params.n_heads {
        for r in 0..d {
            let mut acc = T::zero();
            for c in 0..c_n {
                acc = acc + params.w_q[(h * d + r) * c_n + c] * params.query[c];
            }
            q[h * d + r] = acc;
        }
    }
    q
}

/// One column's forward pass. `col[c * Z + z]` feeds the per-slice
/// projections; outputs land in `out_col` (length C) and `weights_col`
/// (length H * Z).
#[allow(clippy::too_many_arguments)]
fn attend_column<T: Real>(
    params: &VerticalEncoderParams<T>,
    queries: &[T],
    col: &[T],
    depth: usize,
    keys: &mut [T],
    vals: &mut [T],
    out_col: &mut [T],
    weights_col: &mut [T],
) {
    let c_n = params.channels;
    let d = params.head_dim();
    let inv_sqrt_d = T::one() / T::of_usize(d).sqrt();
    let mut mixed = vec![T::zero(); c_n];
    for h in 0..params.n_heads {
        // Keys and values for every vertical slice of this column.
        for z in 0..depth {
            for r in 0..d {
                let mut k_acc = T::zero();
                let mut v_acc = T::zero();
                for c in 0..c_n {
                    let x = col[c * depth + z];
                    k_acc = k_acc + params.w_k[(h * d + r) * c_n + c] * x;
                    v_acc = v_acc + params.w_v[(h * d + r) * c_n + c] * x;
                }
                keys[z * d + r] = k_acc;
                vals[z * d + r] = v_acc;
            }
        }
        // Scaled dot-product scores and the stabilised softmax.
        let mut scores = vec![T::zero(); depth];
        let mut top = T::neg_infinity();
        for z in 0..depth {
            let mut acc = T::zero();
            for r in 0..d {
                acc = acc + queries[h * d + r] * keys[z * d + r];
            }
            let s = acc * inv_sqrt_d;
            scores[z] = s;
            if s > top {
                top = s;
            }
        }
        let mut norm = T::zero();
        for z in 0..depth {
            let e = (scores[z] - top).exp();
            scores[z] = e;
            norm = norm + e;
        }
        for z in 0..depth {
            let a = scores[z] / norm;
            weights_col[h * depth + z] = a;
            for r in 0..d {
                mixed[h * d + r] = mixed[h * d + r] + a * vals[z * d + r];
            }
        }
    }
    // Output mixing across the concatenated heads.
    for (r, out) in out_col.iter_mut().enumerate() {
        let mut acc = T::zero();
        for (c, m) in mixed.iter().enumerate() {
            acc = acc + params.w_o[r * c_n + c] * *m;
        }
        *out = acc;
    }
}

/// Attention stage: collapses the vertical axis of `fm` into a C x Y x X
/// map, returning the post-softmax weights alongside it.
pub fn ve_step1_attend<T: Real>(
    fm: &DenseFeatureMap<T>,
    params: &VerticalEncoderParams<T>,
) -> Result<(BevFeatureMap<T>, AttentionWeights<T>)> {
    check_shapes(fm, params)?;
    let (c_n, depth) = (fm.channels, fm.depth);
    let d = params.head_dim();
    let queries = head_queries(params);
    let mut bev = BevFeatureMap::zeros(c_n, fm.height, fm.width)?;
    let mut weights = AttentionWeights::zeros(params.n_heads, depth, fm.height, fm.width);

    let mut col = vec![T::zero(); c_n * depth];
    let mut keys = vec![T::zero(); depth * d];
    let mut vals = vec![T::zero(); depth * d];
    let mut out_col = vec![T::zero(); c_n];
    let mut weights_col = vec![T::zero(); params.n_heads * depth];
    for y in 0..fm.height {
        for x in 0..fm.width {
            for c in 0..c_n {
                for z in 0..depth {
                    col[c * depth + z] = fm.get(c, z, y, x);
                }
            }
            attend_column(
                params,
                &queries,
                &col,
                depth,
                &mut keys,
                &mut vals,
                &mut out_col,
                &mut weights_col,
            );
            for (c, v) in out_col.iter().enumerate() {
                bev.set_raw(c, y, x, *v);
            }
            for h in 0..params.n_heads {
                for z in 0..depth {
                    let at = weights.offset(h, z, y, x);
                    weights.values[at] = weights_col[h * depth + z];
                }
            }
        }
    }
    Ok((bev, weights))
}

/// Pixel-shuffle reshape: trades `block^2` channel groups for a
/// `block`-times finer spatial grid,
/// `out[c, y*s + by, x*s + bx] = in[c*s^2 + by*s + bx, y, x]`.
pub fn ve_step2_reshape<T: Real>(bev: &BevFeatureMap<T>, block: usize) -> Result<BevFeatureMap<T>> {
    if block == 0 {
        return Err(Error::domain("block size must be positive"));
    }
    let s2 = block * block;
    if bev.channels % s2 != 0 {
        return Err(Error::DivisibilityError {
            what: "channels",
            value: bev.channels,
            divisor: s2,
        });
    }
    let mut out = BevFeatureMap::zeros(bev.channels / s2, bev.height * block, bev.width * block)?;
    for c in 0..out.channels {
        for y in 0..bev.height {
            for x in 0..bev.width {
                for by in 0..block {
                    for bx in 0..block {
                        let v = bev.get(c * s2 + by * block + bx, y, x);
                        out.set_raw(c, y * block + by, x * block + bx, v);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Inverse of [`ve_step2_reshape`]: folds a `block`-times finer spatial
/// grid back into `block^2` channel groups.
pub fn ve_step2_inverse<T: Real>(bev: &BevFeatureMap<T>, block: usize) -> Result<BevFeatureMap<T>> {
    if block == 0 {
        return Err(Error::domain("block size must be positive"));
    }
    if bev.height % block != 0 {
        return Err(Error::DivisibilityError {
            what: "height",
            value: bev.height,
            divisor: block,
        });
    }
    if bev.width % block != 0 {
        return Err(Error::DivisibilityError {
            what: "width",
            value: bev.width,
            divisor: block,
        });
    }
    let s2 = block * block;
    let mut out = BevFeatureMap::zeros(bev.channels * s2, bev.height / block, bev.width / block)?;
    for c in 0..bev.channels {
        for y in 0..out.height {
            for x in 0..out.width {
                for by in 0..block {
                    for bx in 0..block {
                        let v = bev.get(c, y * block + by, x * block + bx);
                        out.set_raw(c * s2 + by * block + bx, y, x, v);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Both encoder stages chained: attend, then reshape by `block`.
pub fn vertical_encode<T: Real>(
    fm: &DenseFeatureMap<T>,
    params: &VerticalEncoderParams<T>,
    block: usize,
) -> Result<(BevFeatureMap<T>, AttentionWeights<T>)> {
    let (bev, weights) = ve_step1_attend(fm, params)?;
    Ok((ve_step2_reshape(&bev, block)?, weights))
}

/// The attention-free reference compressor: columnwise max over the
/// vertical axis.
pub fn sve_baseline<T: Real>(fm: &DenseFeatureMap<T>) -> BevFeatureMap<T> {
    let mut out =
        BevFeatureMap::zeros(fm.channels, fm.height, fm.width).expect("dims already validated");
    for c in 0..fm.channels {
        for y in 0..fm.height {
            for x in 0..fm.width {
                let mut top = fm.get(c, 0, y, x);
                for z in 1..fm.depth {
                    let v = fm.get(c, z, y, x);
                    if v > top {
                        top = v;
                    }
                }
                out.set_raw(c, y, x, top);
            }
        }
    }
    out
}

/// Gradients of `sum(attended outputs)` with respect to every parameter
/// group and the input volume. Layouts match the corresponding forward
/// vectors.
#[derive(Debug, Clone)]
pub struct VeGrads<T> {
    pub d_query: Vec<T>,
    pub d_wq: Vec<T>,
    pub d_wk: Vec<T>,
    pub d_wv: Vec<T>,
    pub d_wo: Vec<T>,
    pub d_input: Vec<T>,
}

/// Scalar probe loss: the plain sum of every attended output entry.
pub fn ve_loss<T: Real>(fm: &DenseFeatureMap<T>, params: &VerticalEncoderParams<T>) -> Result<T> {
    let (bev, _) = ve_step1_attend(fm, params)?;
    let mut acc = T::zero();
    for v in bev.values() {
        acc = acc + *v;
    }
    Ok(acc)
}

/// Forward plus hand-derived backward pass for [`ve_loss`].
pub fn ve_loss_and_grads<T: Real>(
    fm: &DenseFeatureMap<T>,
    params: &VerticalEncoderParams<T>,
) -> Result<(T, VeGrads<T>)> {
    check_shapes(fm, params)?;
    let c_n = params.channels;
    let d = params.head_dim();
    let depth = fm.depth;
    let n_heads = params.n_heads;
    let inv_sqrt_d = T::one() / T::of_usize(d).sqrt();
    let queries = head_queries(params);

    // The output gradient is all-ones, so the gradient flowing into the
    // mixed head outputs is the column sums of w_o, fixed per channel.
    let mut g_mixed = vec![T::zero(); c_n];
    for (c, g) in g_mixed.iter_mut().enumerate() {
        let mut acc = T::zero();
        for r in 0..c_n {
            acc = acc + params.w_o[r * c_n + c];
        }
        *g = acc;
    }

    let mut loss = T::zero();
    let mut grads = VeGrads {
        d_query: vec![T::zero(); c_n],
        d_wq: vec![T::zero(); c_n * c_n],
        d_wk: vec![T::zero(); c_n * c_n],
        d_wv: vec![T::zero(); c_n * c_n],
        d_wo: vec![T::zero(); c_n * c_n],
        d_input: vec![T::zero(); fm.values.len()],
    };
    // d(q_h) summed over every column; expanded to w_q / query at the end.
    let mut dq_total = vec![T::zero(); n_heads * d];

    let mut col = vec![T::zero(); c_n * depth];
    let mut keys = vec![T::zero(); depth * d];
    let mut vals = vec![T::zero(); depth * d];
    let mut weights = vec![T::zero(); depth];
    let mut mixed = vec![T::zero(); c_n];
    for y in 0..fm.height {
        for x in 0..fm.width {
            for c in 0..c_n {
                for z in 0..depth {
                    col[c * depth + z] = fm.get(c, z, y, x);
                }
            }
            for m in mixed.iter_mut() {
                *m = T::zero();
            }
            for h in 0..n_heads {
                for z in 0..depth {
                    for r in 0..d {
                        let mut k_acc = T::zero();
                        let mut v_acc = T::zero();
                        for c in 0..c_n {
                            let xv = col[c * depth + z];
                            k_acc = k_acc + params.w_k[(h * d + r) * c_n + c] * xv;
                            v_acc = v_acc + params.w_v[(h * d + r) * c_n + c] * xv;
                        }
                        keys[z * d + r] = k_acc;
                        vals[z * d + r] = v_acc;
                    }
                }
                let mut top = T::neg_infinity();
                for z in 0..depth {
                    let mut acc = T::zero();
                    for r in 0..d {
                        acc = acc + queries[h * d + r] * keys[z * d + r];
                    }
                    let s = acc * inv_sqrt_d;
                    weights[z] = s;
                    if s > top {
                        top = s;
                    }
                }
                let mut norm = T::zero();
                for z in 0..depth {
                    let e = (weights[z] - top).exp();
                    weights[z] = e;
                    norm = norm + e;
                }
                for w in weights.iter_mut() {
                    *w = *w / norm;
                }
                for z in 0..depth {
                    for r in 0..d {
                        mixed[h * d + r] = mixed[h * d + r] + weights[z] * vals[z * d + r];
                    }
                }

                // Backward through this head's softmax attention. The
                // value-path gradient d(v_{z}) = a_z * g_mixed_h needs no
                // storage; the score path needs the weighted-sum trick.
                let g_h = &g_mixed[h * d..(h + 1) * d];
                let mut da = vec![T::zero(); depth];
                let mut inner = T::zero();
                for z in 0..depth {
                    let mut acc = T::zero();
                    for r in 0..d {
                        acc = acc + g_h[r] * vals[z * d + r];
                    }
                    da[z] = acc;
                    inner = inner + weights[z] * acc;
                }
                for z in 0..depth {
                    let ds = weights[z] * (da[z] - inner);
                    let ds_scaled = ds * inv_sqrt_d;
                    for r in 0..d {
                        // Score path: s_z = q . k_z / sqrt(d).
                        dq_total[h * d + r] = dq_total[h * d + r] + ds_scaled * keys[z * d + r];
                        let dk = ds_scaled * queries[h * d + r];
                        let dv = weights[z] * g_h[r];
                        for c in 0..c_n {
                            let xv = col[c * depth + z];
                            let at = (h * d + r) * c_n + c;
                            grads.d_wk[at] = grads.d_wk[at] + dk * xv;
                            grads.d_wv[at] = grads.d_wv[at] + dv * xv;
                            let din = grads.d_input[fm.offset(c, z, y, x)]
                                + dk * params.w_k[at]
                                + dv * params.w_v[at];
                            grads.d_input[fm.offset(c, z, y, x)] = din;
                        }
                    }
                }
            }

            // Output stage: loss contribution and the w_o gradient, whose
            // every row accumulates this column's mixed vector.
            for r in 0..c_n {
                let mut acc = T::zero();
                for (c, m) in mixed.iter().enumerate() {
                    acc = acc + params.w_o[r * c_n + c] * *m;
                }
                loss = loss + acc;
                for (c, m) in mixed.iter().enumerate() {
                    let at = r * c_n + c;
                    grads.d_wo[at] = grads.d_wo[at] + *m;
                }
            }
        }
    }

    // Expand the accumulated per-head query gradients.
    for h in 0..n_heads {
        for r in 0..d {
            let g = dq_total[h * d + r];
            for c in 0..c_n {
                let at = (h * d + r) * c_n + c;
                grads.d_wq[at] = grads.d_wq[at] + g * params.query[c];
                grads.d_query[c] = grads.d_query[c] + g * params.w_q[at];
            }
        }
    }

    if !loss.is_finite() {
        return Err(Error::NonFiniteGradient("loss is not finite".into()));
    }
    Ok((loss, grads))
}

/// Worst observed analytic-vs-numeric deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub worst_group: &'static str,
    pub worst_index: usize,
    pub checked: usize,
}

#[derive(Clone, Copy)]
enum Group {
    Query,
    Wq,
    Wk,
    Wv,
    Wo,
    Input,
}

fn loss_with_shift(
    fm: &DenseFeatureMap<f64>,
    params: &VerticalEncoderParams<f64>,
    group: Group,
    idx: usize,
    delta: f64,
) -> Result<f64> {
    match group {
        Group::Input => {
            let mut fm2 = fm.clone();
            fm2.values[idx] += delta;
            ve_loss(&fm2, params)
        }
        _ => {
            let mut p2 = params.clone();
            match group {
                Group::Query => p2.query[idx] += delta,
                Group::Wq => p2.w_q[idx] += delta,
                Group::Wk => p2.w_k[idx] += delta,
                Group::Wv => p2.w_v[idx] += delta,
                Group::Wo => p2.w_o[idx] += delta,
                Group::Input => unreachable!(),
            }
            ve_loss(fm, &p2)
        }
    }
}

/// Central-difference verification of [`ve_loss_and_grads`] over every
/// coordinate of every group. Relative error uses
/// `|a - n| / max(1, |a|, |n|)`.
pub fn grad_check(
    fm: &DenseFeatureMap<f64>,
    params: &VerticalEncoderParams<f64>,
    eps: f64,
) -> Result<GradCheckReport> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::domain(format!("step size must be positive, got {eps}")));
    }
    let (_, grads) = ve_loss_and_grads(fm, params)?;
    let groups: [(&'static str, Group, &[f64]); 6] = [
        ("query", Group::Query, &grads.d_query),
        ("w_q", Group::Wq, &grads.d_wq),
        ("w_k", Group::Wk, &grads.d_wk),
        ("w_v", Group::Wv, &grads.d_wv),
        ("w_o", Group::Wo, &grads.d_wo),
        ("input", Group::Input, &grads.d_input),
    ];
    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        worst_group: "none",
        worst_index: 0,
        checked: 0,
    };
    for (name, group, analytic) in groups {
        for (idx, a) in analytic.iter().enumerate() {
            let plus = loss_with_shift(fm, params, group, idx, eps)?;
            let minus = loss_with_shift(fm, params, group, idx, -eps)?;
            let numeric = (plus - minus) / (2.0 * eps);
            if !a.is_finite() || !numeric.is_finite() {
                return Err(Error::NonFiniteGradient(format!("{name}[{idx}]")));
            }
            let rel = (a - numeric).abs() / 1.0f64.max(a.abs()).max(numeric.abs());
            if rel > report.max_rel_err {
                report.max_rel_err = rel;
                report.worst_group = name;
                report.worst_index = idx;
            }
            report.checked += 1;
        }
    }
    Ok(report)
}
