use serde::{Deserialize, Serialize};

use super::bounds::{big_m, ia_bounds, prune, LayerBounds, PruneCase};
use super::{LinExpr, MilpModel, Relation, VarId, VarKind, WdpLayout, BIG_M_MARGIN};
use crate::bundle::Bundle;
use crate::error::{Error, Result};
use crate::market::Allocation;
use crate::mvnn::{Activation, Layer, MvnnParams};

/// How aggressively interval bounds are used to drop rows and variables.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pruning {
    /// Every neuron gets the full encoding.
    Off,
    /// Only dead and purely linear neurons are simplified.
    Basic,
    /// All four simplification cases.
    #[default]
    Full,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodeOptions {
    pub pruning: Pruning,
}

impl EncodeOptions {
    pub fn unpruned() -> Self {
        EncodeOptions {
            pruning: Pruning::Off,
        }
    }
}

/// Variables created for one hidden neuron. `z = None` means the output is the constant 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeuronVars {
    pub case: PruneCase,
    pub z: Option<VarId>,
    pub eta: Option<VarId>,
    pub y: Option<VarId>,
    pub mu: Option<VarId>,
}

fn pre_activation(layer: &Layer, n: usize, inputs: &[Option<VarId>]) -> LinExpr {
    let mut o = LinExpr::constant(layer.bias[n]);
    for (w, input) in layer.row(n).iter().zip(inputs) {
        if let Some(v) = input {
            o.add(*v, *w);
        }
    }
    o
}

/// Constants `(L1, L2, L3, L4)` for every neuron of one layer.
pub type LayerBigM<'a> = (&'a [f64], &'a [f64], &'a [f64], &'a [f64]);

/// Adds the bounded-ReLU rows for hidden layer `k` (1-based) of `bidder`.
///
/// `inputs[l]` is the variable carrying the `l`-th input of the layer, or `None` for a
/// constant zero input.
#[allow(clippy::too_many_arguments)]
pub fn encode_layer(
    model: &mut MilpModel,
    bidder: usize,
    k: usize,
    layer: &Layer,
    cutoff: f64,
    bounds: &LayerBounds,
    big_m: LayerBigM<'_>,
    inputs: &[Option<VarId>],
    pruning: Pruning,
) -> Vec<NeuronVars> {
    let (l1, l2, l3, l4) = big_m;
    let t = cutoff;
    let scale = 1.0 + BIG_M_MARGIN;
    let mut out = Vec::with_capacity(layer.rows);
    for n in 0..layer.rows {
        let (lo, up) = (bounds.lower_pre[n], bounds.upper_pre[n]);
        let case = match (pruning, prune(lo, up, t)) {
            (Pruning::Off, _) => PruneCase::Full,
            (Pruning::Basic, c @ (PruneCase::FixZero | PruneCase::LinearPassthrough)) => c,
            (Pruning::Basic, _) => PruneCase::Full,
            (Pruning::Full, c) => c,
        };
        let tag = format!("{bidder}_{k}_{n}");
        let o = pre_activation(layer, n, inputs);
        let z_upper = bounds.upper[n] * scale;
        let eta_upper = up.max(0.0) * scale;
        let mut vars = NeuronVars {
            case,
            z: None,
            eta: None,
            y: None,
            mu: None,
        };
        match case {
            PruneCase::FixZero => {}
            PruneCase::LinearPassthrough => {
                let z = model.add_var(format!("z_{tag}"), VarKind::Continuous, 0.0, z_upper);
                model.add_row(format!("pass_{tag}"), LinExpr::var(z).plus(&o, -1.0), Relation::Eq, 0.0);
                vars.z = Some(z);
            }
            PruneCase::DropEtaRows => {
                let z = model.add_var(format!("z_{tag}"), VarKind::Continuous, 0.0, z_upper);
                let mu = model.add_binary(format!("mu_{tag}"));
                // o − μ·L3 ≤ z ≤ o
                let mut e = o.clone().plus(&LinExpr::var(z), -1.0);
                e.add(mu, -l3[n]);
                model.add_row(format!("act_lo_{tag}"), e, Relation::Le, 0.0);
                model.add_row(format!("act_hi_{tag}"), LinExpr::var(z).plus(&o, -1.0), Relation::Le, 0.0);
                // t − (1 − μ)·L4 ≤ z
                let mut e = LinExpr::default();
                e.add(mu, l4[n]);
                e.add(z, -1.0);
                model.add_row(format!("cut_lo_{tag}"), e, Relation::Le, l4[n] - t);
                vars.z = Some(z);
                vars.mu = Some(mu);
            }
            PruneCase::DropZRows | PruneCase::Full => {
                let z = model.add_var(format!("z_{tag}"), VarKind::Continuous, 0.0, z_upper);
                let eta = if case == PruneCase::Full {
                    model.add_var(format!("eta_{tag}"), VarKind::Continuous, 0.0, eta_upper)
                } else {
                    z
                };
                let y = model.add_binary(format!("y_{tag}"));
                let mu = (case == PruneCase::Full).then(|| model.add_binary(format!("mu_{tag}")));
                // o ≤ η
                model.add_row(format!("pre_lo_{tag}"), o.clone().plus(&LinExpr::var(eta), -1.0), Relation::Le, 0.0);
                // η ≤ o + y·L1
                let mut e = LinExpr::var(eta).plus(&o, -1.0);
                e.add(y, -l1[n]);
                model.add_row(format!("pre_hi_{tag}"), e, Relation::Le, 0.0);
                // η ≤ (1 − y)·L2
                let mut e = LinExpr::var(eta);
                e.add(y, l2[n]);
                model.add_row(format!("eta_cap_{tag}"), e, Relation::Le, l2[n]);
                if let Some(mu) = mu {
                    // η − μ·L3 ≤ z ≤ η
                    let mut e = LinExpr::var(eta);
                    e.add(z, -1.0);
                    e.add(mu, -l3[n]);
                    model.add_row(format!("act_lo_{tag}"), e, Relation::Le, 0.0);
                    let mut e = LinExpr::var(z);
                    e.add(eta, -1.0);
                    model.add_row(format!("act_hi_{tag}"), e, Relation::Le, 0.0);
                    // t − (1 − μ)·L4 ≤ z
                    let mut e = LinExpr::default();
                    e.add(mu, l4[n]);
                    e.add(z, -1.0);
                    model.add_row(format!("cut_lo_{tag}"), e, Relation::Le, l4[n] - t);
                    vars.eta = Some(eta);
                    vars.mu = Some(mu);
                }
                vars.z = Some(z);
                vars.y = Some(y);
            }
        }
        out.push(vars);
    }
    out
}

fn allocation_block(model: &mut MilpModel, bidders: usize, items: usize) -> Vec<Vec<VarId>> {
    let alloc: Vec<Vec<VarId>> = (0..bidders)
        .map(|i| (0..items).map(|j| model.add_binary(format!("a_{i}_{j}"))).collect())
        .collect();
    for j in 0..items {
        let mut e = LinExpr::default();
        for row in &alloc {
            e.add(row[j], 1.0);
        }
        model.add_row(format!("item_{j}"), e, Relation::Le, 1.0);
    }
    alloc
}

fn check_widths(networks: &[MvnnParams], items: usize) -> Result<()> {
    for (i, p) in networks.iter().enumerate() {
        if p.items() != items {
            return Err(Error::Dimension {
                expected: items,
                found: p.items(),
            }
            .for_bidder(i));
        }
    }
    Ok(())
}

/// The winner-determination MILP: allocation binaries, one item row per item and the
/// stacked layer encodings of every bidder, maximizing the sum of network outputs.
pub fn encode_wdp(networks: &[MvnnParams], items: usize, opts: EncodeOptions) -> Result<MilpModel> {
    check_widths(networks, items)?;
    let mut model = MilpModel::new();
    let alloc = allocation_block(&mut model, networks.len(), items);
    let mut neurons = Vec::with_capacity(networks.len());
    for (i, p) in networks.iter().enumerate() {
        if p.activation != Activation::BoundedRelu {
            return Err(Error::Parameter("MVNN encoding needs bounded-ReLU activations".into())
                .for_bidder(i));
        }
        let bounds = ia_bounds(p).map_err(|e| e.for_bidder(i))?;
        let m = big_m(p, &bounds);
        let mut inputs: Vec<Option<VarId>> = alloc[i].iter().copied().map(Some).collect();
        let mut per_layer = Vec::with_capacity(p.hidden().len());
        for (k, layer) in p.hidden().iter().enumerate() {
            let vars = encode_layer(
                &mut model,
                i,
                k + 1,
                layer,
                p.cutoff,
                &bounds.layers[k],
                (&m.l1[k], &m.l2[k], &m.l3[k], &m.l4[k]),
                &inputs,
                opts.pruning,
            );
            inputs = vars.iter().map(|v| v.z).collect();
            per_layer.push(vars);
        }
        for (w, input) in p.readout().row(0).iter().zip(&inputs) {
            if let Some(v) = input {
                if *w != 0.0 {
                    model.objective.push((*v, *w));
                }
            }
        }
        neurons.push(per_layer);
    }
    model.layout = Some(WdpLayout {
        items,
        alloc,
        neurons,
        networks: networks.to_vec(),
    });
    Ok(model)
}

/// A textbook ReLU big-M encoding with constants from naive magnitude propagation and no
/// interval pruning. Bounded ReLUs are written as `relu(o) − relu(o − t)`.
pub fn encode_relu_wdp(networks: &[MvnnParams], items: usize) -> Result<MilpModel> {
    check_widths(networks, items)?;
    let mut model = MilpModel::new();
    let alloc = allocation_block(&mut model, networks.len(), items);
    for (i, p) in networks.iter().enumerate() {
        let bounded = p.activation == Activation::BoundedRelu;
        let mut inputs: Vec<LinExpr> = alloc[i].iter().map(|&v| LinExpr::var(v)).collect();
        let mut mags: Vec<f64> = vec![1.0; items];
        for (k, layer) in p.hidden().iter().enumerate() {
            let mut next = Vec::with_capacity(layer.rows);
            let mut next_mags = Vec::with_capacity(layer.rows);
            for n in 0..layer.rows {
                let mut o = LinExpr::constant(layer.bias[n]);
                let mut big = layer.bias[n].abs();
                for (l, &w) in layer.row(n).iter().enumerate() {
                    o = o.plus(&inputs[l], w);
                    big += w.abs() * mags[l];
                }
                let big = big * (1.0 + BIG_M_MARGIN) + BIG_M_MARGIN;
                let tag = format!("{i}_{}_{n}", k + 1);
                let h = relu_unit(&mut model, &tag, "", &o, big);
                let out = if bounded {
                    let shifted = o.clone().plus(&LinExpr::constant(p.cutoff), -1.0);
                    let h2 = relu_unit(&mut model, &tag, "2", &shifted, big + p.cutoff);
                    let mut e = LinExpr::var(h);
                    e.add(h2, -1.0);
                    e
                } else {
                    LinExpr::var(h)
                };
                next.push(out);
                next_mags.push(big);
            }
            inputs = next;
            mags = next_mags;
        }
        let mut obj = LinExpr::default();
        for (w, e) in p.readout().row(0).iter().zip(&inputs) {
            obj = obj.plus(e, *w);
        }
        for (v, c) in obj.terms {
            match model.objective.iter_mut().find(|(u, _)| *u == v) {
                Some(t) => t.1 += c,
                None => model.objective.push((v, c)),
            }
        }
    }
    model.objective.retain(|t| t.1 != 0.0);
    model.layout = Some(WdpLayout {
        items,
        alloc,
        neurons: Vec::new(),
        networks: networks.to_vec(),
    });
    Ok(model)
}

/// `h = max(0, o)` via `h ≥ o`, `h ≤ o + M(1 − d)`, `h ≤ M d`, `h ∈ [0, M]`.
fn relu_unit(model: &mut MilpModel, tag: &str, suffix: &str, o: &LinExpr, big: f64) -> VarId {
    let h = model.add_var(format!("r{suffix}_{tag}"), VarKind::Continuous, 0.0, big);
    let d = model.add_binary(format!("d{suffix}_{tag}"));
    model.add_row(format!("relu{suffix}_lo_{tag}"), o.clone().plus(&LinExpr::var(h), -1.0), Relation::Le, 0.0);
    let mut e = LinExpr::var(h).plus(o, -1.0);
    e.add(d, big);
    model.add_row(format!("relu{suffix}_hi_{tag}"), e, Relation::Le, big);
    let mut e = LinExpr::var(h);
    e.add(d, -big);
    model.add_row(format!("relu{suffix}_on_{tag}"), e, Relation::Le, 0.0);
    h
}

/// The assignment induced by an allocation: forward-pass values for `z` and `η`, and
/// the indicator choices `y = [o ≤ 0]`, `μ = [o > t]`.
pub fn wdp_assignment(model: &MilpModel, allocation: &Allocation) -> Result<Vec<f64>> {
    let layout = model
        .layout
        .as_ref()
        .ok_or_else(|| Error::Parameter("model has no WDP layout".into()))?;
    if layout.neurons.len() != layout.networks.len() {
        return Err(Error::Parameter("layout carries no neuron map".into()));
    }
    if allocation.bidders() != layout.alloc.len() {
        return Err(Error::Dimension {
            expected: layout.alloc.len(),
            found: allocation.bidders(),
        });
    }
    let mut x = vec![0.0; model.num_vars()];
    for (i, vars) in layout.alloc.iter().enumerate() {
        let bundle: &Bundle = allocation.bundle(i);
        for (j, v) in vars.iter().enumerate() {
            x[v.0] = if bundle.contains(j) { 1.0 } else { 0.0 };
        }
        let p = &layout.networks[i];
        let trace = p.trace(bundle)?;
        for (k, layer_vars) in layout.neurons[i].iter().enumerate() {
            for (n, nv) in layer_vars.iter().enumerate() {
                let o = trace.pre[k][n];
                let post = trace.post[k][n];
                if let Some(z) = nv.z {
                    x[z.0] = post;
                }
                if let Some(eta) = nv.eta {
                    x[eta.0] = o.max(0.0);
                }
                if let Some(y) = nv.y {
                    x[y.0] = if o <= 0.0 { 1.0 } else { 0.0 };
                }
                if let Some(mu) = nv.mu {
                    x[mu.0] = if o > p.cutoff { 1.0 } else { 0.0 };
                }
            }
        }
    }
    Ok(x)
}

/// Verifies bounds, integrality and every row at `x`; names the first violated row.
pub fn check_assignment(model: &MilpModel, x: &[f64], tol: f64) -> Result<()> {
    if x.len() != model.num_vars() {
        return Err(Error::Dimension {
            expected: model.num_vars(),
            found: x.len(),
        });
    }
    for (v, &xv) in model.variables.iter().zip(x) {
        if xv < v.lower - tol || xv > v.upper + tol {
            return Err(Error::Data(format!(
                "{} = {xv} outside [{}, {}]",
                v.name, v.lower, v.upper
            )));
        }
        if v.kind == VarKind::Binary && (xv - xv.round()).abs() > tol {
            return Err(Error::Data(format!("{} = {xv} is not integral", v.name)));
        }
    }
    for c in &model.constraints {
        let a = c.activity(x);
        if !c.relation.holds(a, c.rhs, tol * (1.0 + c.rhs.abs())) {
            return Err(Error::Data(format!(
                "row {} violated: {a} {} {}",
                c.name,
                c.relation.symbol(),
                c.rhs
            )));
        }
    }
    Ok(())
}
