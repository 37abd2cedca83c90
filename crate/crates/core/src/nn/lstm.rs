use rand::Rng;

use super::model::{Param, ParamGroup};
use crate::autodiff::{Tensor, Var};
use crate::error::{Error, Result};

/// Input weights `[input, 4h]`, recurrent weights `[h, 4h]` and bias `[1, 4h]`,
/// gate blocks ordered input, forget, candidate, output. Each matrix is drawn
/// from uniform(±1/√fan_in); the bias uses the recurrent fan-in and its forget
/// block is set to 1.
pub(crate) fn init_params(input: usize, hidden: usize, rng: &mut impl Rng) -> Vec<Param> {
    let mut draw = |rows: usize, fan_in: usize| -> Tensor {
        let bound = 1.0 / (fan_in as f64).sqrt();
        let data = (0..rows * 4 * hidden)
            .map(|_| rng.random_range(-bound..=bound))
            .collect();
        Tensor::from_parts(vec![rows, 4 * hidden], data)
    };
    let w_x = draw(input, input);
    let w_h = draw(hidden, hidden);
    let mut b = draw(1, hidden);
    for v in &mut b.data_mut()[hidden..2 * hidden] {
        *v = 1.0;
    }
    [("embed.lstm.w_x", w_x), ("embed.lstm.w_h", w_h), ("embed.lstm.bias", b)]
        .into_iter()
        .map(|(name, value)| Param {
            name: name.to_string(),
            group: ParamGroup::Embed,
            value,
        })
        .collect()
}

/// Runs the recurrence over every step of each row of `x` (`[batch, steps * input]`)
/// from a zero state and returns the final `(hidden, cell)` states, each `[batch, hidden]`.
pub(crate) fn forward_state<'t>(
    x: Var<'t>,
    params: &[Var<'t>],
    input: usize,
    hidden: usize,
) -> Result<(Var<'t>, Var<'t>)> {
    let shape = x.shape();
    let width = shape.get(1).copied().unwrap_or(0);
    if shape.len() != 2 || width == 0 || input == 0 || width % input != 0 {
        return Err(Error::shape(
            "lstm",
            format!("input {shape:?} is not [batch, steps * {input}]"),
        ));
    }
    let steps = width / input;
    if steps == 0 {
        return Err(Error::Empty("lstm sequence".into()));
    }
    let (w_x, w_h, bias) = (params[0], params[1], params[2]);
    let mut state: Option<(Var<'t>, Var<'t>)> = None;
    for t in 0..steps {
        let x_t = x.slice_cols(t * input, (t + 1) * input)?;
        let mut gates = x_t.matmul(w_x)?.add(bias)?;
        // zero initial state: the recurrent and forget terms vanish at t = 0
        if let Some((h, _)) = state {
            gates = gates.add(h.matmul(w_h)?)?;
        }
        let i = gates.slice_cols(0, hidden)?.sigmoid();
        let f = gates.slice_cols(hidden, 2 * hidden)?.sigmoid();
        let g = gates.slice_cols(2 * hidden, 3 * hidden)?.tanh();
        let o = gates.slice_cols(3 * hidden, 4 * hidden)?.sigmoid();
        let c = match state {
            Some((_, c_prev)) => f.mul(c_prev)?.add(i.mul(g)?)?,
            None => i.mul(g)?,
        };
        let h = o.mul(c.tanh())?;
        state = Some((h, c));
    }
    Ok(state.expect("at least one step"))
}

pub(crate) fn forward<'t>(x: Var<'t>, params: &[Var<'t>], input: usize, hidden: usize) -> Result<Var<'t>> {
    Ok(forward_state(x, params, input, hidden)?.0)
}

/// Final `(h_T, c_T)` for a batch of flattened sequences, outside of training.
pub fn lstm_state(x: &Tensor, params: &[Tensor], input: usize, hidden: usize) -> Result<(Tensor, Tensor)> {
    if params.len() != 3 {
        return Err(Error::InvalidParameter(format!("LSTM takes 3 parameter tensors, got {}", params.len())));
    }
    let tape = crate::autodiff::Tape::new();
    let vars: Vec<Var<'_>> = params.iter().map(|p| tape.constant(p.clone())).collect();
    let (h, c) = forward_state(tape.constant(x.clone()), &vars, input, hidden)?;
    Ok((h.to_tensor(), c.to_tensor()))
}
