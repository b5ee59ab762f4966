//! Message-passing network over the user graph.
//!
//! Nodes are the `2N` real-equivalent users on a fully connected graph. Edge
//! features come from channel correlations, incoming messages are aggregated
//! through a GRU, and a readout emits a categorical over the real alphabet
//! levels. All forward functions record onto a [`Tape`] so the whole network
//! is differentiable end to end.

use crate::container::Container;
use crate::error::{Error, Result};
use crate::numkit::{init_gru, init_mlp, GruParams, MlpParams, Tape, Tensor, Var};
use rand::Rng;

/// Architecture hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnnConfig {
    /// Node feature size `N_u`.
    pub feature: usize,
    /// First hidden size `N_h1` (also the GRU state size).
    pub hidden1: usize,
    /// Second hidden size `N_h2`.
    pub hidden2: usize,
    /// Message-passing rounds `L` per detector layer.
    pub rounds: usize,
    /// Real alphabet size `sqrt(Q)`.
    pub levels: usize,
}

impl GnnConfig {
    pub fn new(levels: usize) -> Self {
        GnnConfig {
            feature: 8,
            hidden1: 16,
            hidden2: 8,
            rounds: 2,
            levels,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature == 0 || self.hidden1 == 0 || self.hidden2 == 0 || self.levels == 0 {
            return Err(Error::Config(format!(
                "gnn config has a zero size: {self:?}"
            )));
        }
        Ok(())
    }
}

/// All learnable tensors of one GNN.
///
/// Weight matrices are out-by-in. The propagation MLP maps the concatenated
/// `[u_j, u_n, f_jn]` (size `2 N_u + 2`) through `N_h1 -> N_h2` to `N_u`; the
/// GRU consumes the summed messages concatenated with the node attribute
/// (size `N_u + 2`); the readout maps `N_u` through `N_h1 -> N_h2` to the
/// level count.
#[derive(Debug, Clone, PartialEq)]
pub struct GnnWeights {
    pub enc_w1: Tensor,
    pub enc_b1: Tensor,
    pub prop: MlpParams,
    pub gru: GruParams,
    pub agg_w2: Tensor,
    pub agg_b2: Tensor,
    pub readout: MlpParams,
}

impl GnnWeights {
    pub fn init(cfg: &GnnConfig, rng: &mut impl Rng) -> Self {
        let (nu, h1, h2) = (cfg.feature, cfg.hidden1, cfg.hidden2);
        GnnWeights {
            enc_w1: uniform(rng, nu, 3),
            enc_b1: uniform_vec(rng, nu, 3),
            prop: init_mlp(&[2 * nu + 2, h1, h2, nu], rng),
            gru: init_gru(nu + 2, h1, rng),
            agg_w2: uniform(rng, nu, h1),
            agg_b2: uniform_vec(rng, nu, h1),
            readout: init_mlp(&[nu, h1, h2, cfg.levels], rng),
        }
    }

    /// Canonical (name, tensor) order used for serialization and optimizer
    /// state.
    pub fn tensors(&self) -> Vec<(&'static str, &Tensor)> {
        let mut out = vec![("enc.W1", &self.enc_w1), ("enc.b1", &self.enc_b1)];
        let mlp_names: [[&'static str; 2]; 3] = [
            ["prop.l1.W", "prop.l1.b"],
            ["prop.l2.W", "prop.l2.b"],
            ["prop.l3.W", "prop.l3.b"],
        ];
        for (i, (w, b)) in self.prop.layers.iter().enumerate() {
            out.push((mlp_names[i][0], w));
            out.push((mlp_names[i][1], b));
        }
        out.extend([
            ("gru.Wz", &self.gru.wz),
            ("gru.Uz", &self.gru.uz),
            ("gru.bz", &self.gru.bz),
            ("gru.Wr", &self.gru.wr),
            ("gru.Ur", &self.gru.ur),
            ("gru.br", &self.gru.br),
            ("gru.Wh", &self.gru.wh),
            ("gru.Uh", &self.gru.uh),
            ("gru.bh", &self.gru.bh),
            ("agg.W2", &self.agg_w2),
            ("agg.b2", &self.agg_b2),
        ]);
        let ro_names: [[&'static str; 2]; 3] = [
            ["readout.l1.W", "readout.l1.b"],
            ["readout.l2.W", "readout.l2.b"],
            ["readout.l3.W", "readout.l3.b"],
        ];
        for (i, (w, b)) in self.readout.layers.iter().enumerate() {
            out.push((ro_names[i][0], w));
            out.push((ro_names[i][1], b));
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out: Vec<&mut Tensor> = vec![&mut self.enc_w1, &mut self.enc_b1];
        for (w, b) in self.prop.layers.iter_mut() {
            out.push(w);
            out.push(b);
        }
        out.extend([
            &mut self.gru.wz,
            &mut self.gru.uz,
            &mut self.gru.bz,
            &mut self.gru.wr,
            &mut self.gru.ur,
            &mut self.gru.br,
            &mut self.gru.wh,
            &mut self.gru.uh,
            &mut self.gru.bh,
            &mut self.agg_w2,
            &mut self.agg_b2,
        ]);
        for (w, b) in self.readout.layers.iter_mut() {
            out.push(w);
            out.push(b);
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn validate(&self, cfg: &GnnConfig) -> Result<()> {
        cfg.validate()?;
        let (nu, h1, h2) = (cfg.feature, cfg.hidden1, cfg.hidden2);
        let checks: [(&str, &[usize], Vec<usize>); 4] = [
            ("enc.W1", self.enc_w1.shape(), vec![nu, 3]),
            ("enc.b1", self.enc_b1.shape(), vec![nu]),
            ("agg.W2", self.agg_w2.shape(), vec![nu, h1]),
            ("agg.b2", self.agg_b2.shape(), vec![nu]),
        ];
        for (name, got, want) in checks {
            if got != want.as_slice() {
                return Err(Error::Config(format!(
                    "{name}: shape {got:?}, expected {want:?}"
                )));
            }
        }
        self.prop.validate()?;
        if self.prop.dims() != vec![2 * nu + 2, h1, h2, nu] {
            return Err(Error::Config(format!(
                "propagation mlp dims {:?}",
                self.prop.dims()
            )));
        }
        self.gru.validate()?;
        if self.gru.input_dim() != nu + 2 || self.gru.hidden_dim() != h1 {
            return Err(Error::Config(format!(
                "gru dims {}x{}",
                self.gru.input_dim(),
                self.gru.hidden_dim()
            )));
        }
        self.readout.validate()?;
        if self.readout.dims() != vec![nu, h1, h2, cfg.levels] {
            return Err(Error::Config(format!(
                "readout mlp dims {:?}",
                self.readout.dims()
            )));
        }
        for (name, t) in self.tensors() {
            if !t.all_finite() {
                return Err(Error::Config(format!("{name} contains non-finite values")));
            }
        }
        Ok(())
    }

    /// Store under `prefix` into a container ("enc.W1", "gru.Wz", ...).
    pub fn store(&self, c: &mut Container, prefix: &str) {
        for (name, t) in self.tensors() {
            c.push(&format!("{prefix}{name}"), t.clone());
        }
    }

    /// Load tensors stored by [`GnnWeights::store`].
    pub fn load(c: &Container, prefix: &str, cfg: &GnnConfig) -> Result<Self> {
        let mut rng = crate::seeds::rng(0, &[]);
        let mut w = GnnWeights::init(cfg, &mut rng);
        for t in w.tensors_mut() {
            *t = Tensor::zeros(t.shape());
        }
        let names: Vec<&'static str> = w.tensors().iter().map(|(n, _)| *n).collect();
        for (name, slot) in names.iter().zip(w.tensors_mut()) {
            let stored = c.require(&format!("{prefix}{name}"))?;
            if stored.shape() != slot.shape() {
                return Err(Error::Io(format!(
                    "{prefix}{name}: stored shape {:?}, expected {:?}",
                    stored.shape(),
                    slot.shape()
                )));
            }
            *slot = stored.clone();
        }
        w.validate(cfg)?;
        Ok(w)
    }
}

fn uniform(rng: &mut impl Rng, rows: usize, cols: usize) -> Tensor {
    let bound = 1.0 / (cols as f64).sqrt();
    Tensor::new(
        vec![rows, cols],
        (0..rows * cols)
            .map(|_| rng.gen_range(-bound..bound))
            .collect(),
    )
    .unwrap()
}

fn uniform_vec(rng: &mut impl Rng, len: usize, fan_in: usize) -> Tensor {
    let bound = 1.0 / (fan_in as f64).sqrt();
    Tensor::vector(
        &(0..len)
            .map(|_| rng.gen_range(-bound..bound))
            .collect::<Vec<_>>(),
    )
}

/// Node hidden vectors and GRU states, carried across detector layers.
#[derive(Debug, Clone, PartialEq)]
pub struct GnnState {
    /// `[nodes, N_u]`
    pub u: Tensor,
    /// `[nodes, N_h1]`
    pub g: Tensor,
}

/// Directed edge list of the fully connected node graph, destination-major so
/// each node's incoming messages accumulate in ascending source order.
#[derive(Debug, Clone)]
pub struct EdgeList {
    pub src: Vec<usize>,
    pub dst: Vec<usize>,
}

impl EdgeList {
    pub fn full_graph(nodes: usize) -> Self {
        let mut src = Vec::with_capacity(nodes.saturating_sub(1) * nodes);
        let mut dst = Vec::with_capacity(src.capacity());
        for n in 0..nodes {
            for j in 0..nodes {
                if j != n {
                    src.push(j);
                    dst.push(n);
                }
            }
        }
        EdgeList { src, dst }
    }

    pub fn len(&self) -> usize {
        self.src.len()
    }

    pub fn is_empty(&self) -> bool {
        self.src.is_empty()
    }
}

/// Per-pair channel correlations `h_a^T h_b` of the real channel columns.
pub fn gram_matrix(h: &Tensor) -> Tensor {
    let (rows, cols) = (h.rows(), h.cols());
    let mut g = Tensor::zeros(&[cols, cols]);
    for a in 0..cols {
        for b in a..cols {
            let mut acc = 0.0;
            for m in 0..rows {
                acc += h.get2(m, a) * h.get2(m, b);
            }
            g.set2(a, b, acc);
            g.set2(b, a, acc);
        }
    }
    g
}

/// Edge attribute rows `[h_dst^T h_src, sigma2]`, one per directed edge.
pub fn edge_features(gram: &Tensor, edges: &EdgeList, sigma2: f64) -> Tensor {
    let mut data = Vec::with_capacity(edges.len() * 2);
    for e in 0..edges.len() {
        data.push(gram.get2(edges.dst[e], edges.src[e]));
        data.push(sigma2);
    }
    Tensor::new(vec![edges.len(), 2], data).unwrap()
}

/// Per-node encoder inputs `[y^T h_n, h_n^T h_n, sigma2]`.
pub fn init_features(h: &Tensor, y: &[f64], gram: &Tensor, sigma2: f64) -> Tensor {
    let (rows, cols) = (h.rows(), h.cols());
    let mut data = Vec::with_capacity(cols * 3);
    for n in 0..cols {
        let mut yh = 0.0;
        for m in 0..rows {
            yh += y[m] * h.get2(m, n);
        }
        data.push(yh);
        data.push(gram.get2(n, n));
        data.push(sigma2);
    }
    Tensor::new(vec![cols, 3], data).unwrap()
}

/// Tape handles for one bound weight set.
#[derive(Debug, Clone)]
pub struct GnnVars {
    pub enc_w1: Var,
    pub enc_b1: Var,
    pub prop: Vec<(Var, Var)>,
    pub gru_wz: Var,
    pub gru_uz: Var,
    pub gru_bz: Var,
    pub gru_wr: Var,
    pub gru_ur: Var,
    pub gru_br: Var,
    pub gru_wh: Var,
    pub gru_uh: Var,
    pub gru_bh: Var,
    pub agg_w2: Var,
    pub agg_b2: Var,
    pub readout: Vec<(Var, Var)>,
}

/// Put a weight set on the tape, trainable or frozen.
pub fn bind_weights(tape: &mut Tape, w: &GnnWeights, trainable: bool) -> GnnVars {
    let mut put = |t: &Tensor| {
        if trainable {
            tape.param(t.clone())
        } else {
            tape.constant(t.clone())
        }
    };
    GnnVars {
        enc_w1: put(&w.enc_w1),
        enc_b1: put(&w.enc_b1),
        prop: w
            .prop
            .layers
            .iter()
            .map(|(wt, bt)| (put(wt), put(bt)))
            .collect(),
        gru_wz: put(&w.gru.wz),
        gru_uz: put(&w.gru.uz),
        gru_bz: put(&w.gru.bz),
        gru_wr: put(&w.gru.wr),
        gru_ur: put(&w.gru.ur),
        gru_br: put(&w.gru.br),
        gru_wh: put(&w.gru.wh),
        gru_uh: put(&w.gru.uh),
        gru_bh: put(&w.gru.bh),
        agg_w2: put(&w.agg_w2),
        agg_b2: put(&w.agg_b2),
        readout: w
            .readout
            .layers
            .iter()
            .map(|(wt, bt)| (put(wt), put(bt)))
            .collect(),
    }
}

impl GnnVars {
    /// Tape handles in the canonical [`GnnWeights::tensors`] order.
    pub fn ordered(&self) -> Vec<Var> {
        let mut out = vec![self.enc_w1, self.enc_b1];
        for (w, b) in &self.prop {
            out.push(*w);
            out.push(*b);
        }
        out.extend([
            self.gru_wz,
            self.gru_uz,
            self.gru_bz,
            self.gru_wr,
            self.gru_ur,
            self.gru_br,
            self.gru_wh,
            self.gru_uh,
            self.gru_bh,
            self.agg_w2,
            self.agg_b2,
        ]);
        for (w, b) in &self.readout {
            out.push(*w);
            out.push(*b);
        }
        out
    }
}

fn mlp_apply(tape: &mut Tape, layers: &[(Var, Var)], x: Var) -> Var {
    let mut cur = x;
    let last = layers.len() - 1;
    for (i, (w, b)) in layers.iter().enumerate() {
        cur = tape.affine_nt(cur, *w, Some(*b));
        if i < last {
            cur = tape.relu(cur);
        }
    }
    cur
}

/// Encoder: `u_n = W1 [y^T h_n, h_n^T h_n, sigma2]^T + b1`, zero GRU state.
pub fn init_state(tape: &mut Tape, features: Tensor, vars: &GnnVars, hidden1: usize) -> (Var, Var) {
    let nodes = features.rows();
    let phi = tape.constant(features);
    let u = tape.affine_nt(phi, vars.enc_w1, Some(vars.enc_b1));
    let g = tape.constant(Tensor::zeros(&[nodes, hidden1]));
    (u, g)
}

/// Propagation: one message per directed edge from the shared MLP.
pub fn propagate(tape: &mut Tape, u: Var, feat: Var, edges: &EdgeList, vars: &GnnVars) -> Var {
    let c = tape.edge_concat(u, feat, edges.src.clone(), edges.dst.clone());
    mlp_apply(tape, &vars.prop, c)
}

/// Aggregation: sum incoming messages, concatenate the node attribute, run
/// the GRU, project to the new hidden vector.
pub fn aggregate(
    tape: &mut Tape,
    messages: Var,
    attrs: Var,
    g: Var,
    edges: &EdgeList,
    nodes: usize,
    vars: &GnnVars,
) -> (Var, Var) {
    let summed = tape.index_sum(messages, edges.dst.clone(), nodes);
    let m = tape.concat_cols(&[summed, attrs]);
    let g_next = gru_apply(tape, vars, g, m);
    let u_next = tape.affine_nt(g_next, vars.agg_w2, Some(vars.agg_b2));
    (u_next, g_next)
}

fn gru_apply(tape: &mut Tape, vars: &GnnVars, g: Var, x: Var) -> Var {
    let zx = tape.affine_nt(x, vars.gru_wz, Some(vars.gru_bz));
    let zg = tape.affine_nt(g, vars.gru_uz, None);
    let z_pre = tape.add(zx, zg);
    let z = tape.sigmoid(z_pre);

    let rx = tape.affine_nt(x, vars.gru_wr, Some(vars.gru_br));
    let rg = tape.affine_nt(g, vars.gru_ur, None);
    let r_pre = tape.add(rx, rg);
    let r = tape.sigmoid(r_pre);

    let gated = tape.mul(r, g);
    let hx = tape.affine_nt(x, vars.gru_wh, Some(vars.gru_bh));
    let hg = tape.affine_nt(gated, vars.gru_uh, None);
    let h_pre = tape.add(hx, hg);
    let cand = tape.tanh(h_pre);

    let keep = tape.mul(z, g);
    let neg_z = tape.scale(z, -1.0);
    let one_minus_z = tape.add_scalar(neg_z, 1.0);
    let take = tape.mul(one_minus_z, cand);
    tape.add(keep, take)
}

/// Readout: per-node categorical over the levels.
pub fn readout(tape: &mut Tape, u: Var, vars: &GnnVars) -> Var {
    let logits = mlp_apply(tape, &vars.readout, u);
    tape.softmax_rows(logits)
}

/// `L` rounds of propagate/aggregate followed by the readout. Returns the
/// categorical and the carried `(u, g)` state.
#[allow(clippy::too_many_arguments)]
pub fn gnn_layer(
    tape: &mut Tape,
    attrs: Var,
    state: (Var, Var),
    feat: Var,
    edges: &EdgeList,
    nodes: usize,
    rounds: usize,
    vars: &GnnVars,
) -> (Var, (Var, Var)) {
    let (mut u, mut g) = state;
    for _ in 0..rounds {
        let messages = propagate(tape, u, feat, edges, vars);
        let (u_next, g_next) = aggregate(tape, messages, attrs, g, edges, nodes, vars);
        u = u_next;
        g = g_next;
    }
    let probs = readout(tape, u, vars);
    (probs, (u, g))
}

/// Value-level convenience wrapper: run one GNN layer outside any enclosing
/// recording. Used by tests and diagnostics.
pub struct GnnLayerOutput {
    pub probs: Tensor,
    pub state: GnnState,
}

#[allow(clippy::too_many_arguments)]
pub fn gnn_layer_values(
    weights: &GnnWeights,
    cfg: &GnnConfig,
    h: &Tensor,
    y: &[f64],
    sigma2: f64,
    attrs: &Tensor,
    state: Option<&GnnState>,
    rounds: usize,
) -> Result<GnnLayerOutput> {
    weights.validate(cfg)?;
    let nodes = h.cols();
    let mut tape = Tape::new();
    let vars = bind_weights(&mut tape, weights, false);
    let gram = gram_matrix(h);
    let edges = EdgeList::full_graph(nodes);
    let feat = tape.constant(edge_features(&gram, &edges, sigma2));
    let state_vars = match state {
        Some(s) => (tape.constant(s.u.clone()), tape.constant(s.g.clone())),
        None => init_state(
            &mut tape,
            init_features(h, y, &gram, sigma2),
            &vars,
            cfg.hidden1,
        ),
    };
    let attrs_var = tape.constant(attrs.clone());
    let (probs, (u, g)) = gnn_layer(
        &mut tape, attrs_var, state_vars, feat, &edges, nodes, rounds, &vars,
    );
    Ok(GnnLayerOutput {
        probs: tape.value(probs).clone(),
        state: GnnState {
            u: tape.value(u).clone(),
            g: tape.value(g).clone(),
        },
    })
}
