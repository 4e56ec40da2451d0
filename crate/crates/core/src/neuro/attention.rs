// SPDX-License-Identifier: Apache-2.0

//! Unnormalised attention scores for a single `(source u, target v)` pair.
//!
//! | variant   | score                                         |
//! |-----------|-----------------------------------------------|
//! | GAT       | `LeakyReLU(aᵀ [W h_u ‖ W h_v])`                 |
//! | GATv2     | `aᵀ LeakyReLU(W [h_u ‖ h_v])`                   |
//! | EtaGAT    | GAT with `(W_τ, a_τ)` chosen by the edge type   |
//! | EtaGATv2  | GATv2 with `(W_τ, a_τ)` chosen by the edge type |
//!
//! GAT accepts either a `d_head × d_in` matrix shared by both endpoints or a
//! `d_head × 2·d_in` matrix `[L | R]` whose halves transform `h_u` and `h_v`
//! respectively; the latter is what the network layers use.

use super::tensor::{dot, leaky_relu, Matrix};
use super::NeuroError;

fn check(cond: bool, what: &str) -> Result<(), NeuroError> {
    if cond {
        Ok(())
    } else {
        Err(NeuroError::DimMismatch(what.to_string()))
    }
}

pub fn attn_gat(h_u: &[f64], h_v: &[f64], w: &Matrix, a: &[f64], slope: f64) -> Result<f64, NeuroError> {
    let d = h_u.len();
    check(h_v.len() == d, "h_u and h_v lengths differ")?;
    check(a.len() == 2 * w.rows, "a must have length 2·d_head")?;
    let (wu, wv): (Vec<f64>, Vec<f64>) = if w.cols == d {
        (w.matvec(h_u), w.matvec(h_v))
    } else if w.cols == 2 * d {
        (w.columns(0, d).matvec(h_u), w.columns(d, 2 * d).matvec(h_v))
    } else {
        return Err(NeuroError::DimMismatch("W must have d_in or 2·d_in columns".into()));
    };
    let dh = w.rows;
    Ok(leaky_relu(dot(&a[..dh], &wu) + dot(&a[dh..], &wv), slope))
}

pub fn attn_gatv2(h_u: &[f64], h_v: &[f64], w: &Matrix, a: &[f64], slope: f64) -> Result<f64, NeuroError> {
    let d = h_u.len();
    check(h_v.len() == d, "h_u and h_v lengths differ")?;
    check(w.cols == 2 * d, "W must have 2·d_in columns")?;
    check(a.len() == w.rows, "a must have length d_head")?;
    let cat: Vec<f64> = h_u.iter().chain(h_v).copied().collect();
    Ok(w.matvec(&cat).iter().zip(a).map(|(&z, &ai)| ai * leaky_relu(z, slope)).sum())
}

/// Per-edge-type attention parameters `(W_τ, a_τ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TypedAttention {
    pub w: Vec<Matrix>,
    pub a: Vec<Vec<f64>>,
}

impl TypedAttention {
    /// Every type aliased to one `(W, a)` pair.
    pub fn aliased(w: &Matrix, a: &[f64], n_types: usize) -> Self {
        Self { w: vec![w.clone(); n_types], a: vec![a.to_vec(); n_types] }
    }

    fn pick(&self, tau: usize) -> Result<(&Matrix, &[f64]), NeuroError> {
        match (self.w.get(tau), self.a.get(tau)) {
            (Some(w), Some(a)) => Ok((w, a)),
            _ => Err(NeuroError::UnknownType(tau)),
        }
    }
}

pub fn attn_etagat(h_u: &[f64], h_v: &[f64], tau: usize, params: &TypedAttention, slope: f64) -> Result<f64, NeuroError> {
    let (w, a) = params.pick(tau)?;
    attn_gat(h_u, h_v, w, a, slope)
}

pub fn attn_etagatv2(h_u: &[f64], h_v: &[f64], tau: usize, params: &TypedAttention, slope: f64) -> Result<f64, NeuroError> {
    let (w, a) = params.pick(tau)?;
    attn_gatv2(h_u, h_v, w, a, slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_attention_vector_gives_zero() {
        let w = Matrix::identity(3);
        assert_eq!(attn_gat(&[1.0, 2.0, 3.0], &[0.5, 0.0, 1.0], &w, &[0.0; 6], 0.2).unwrap(), 0.0);
    }

    #[test]
    fn gat_closed_form() {
        let h = [0.5, -1.0, 2.0];
        let got = attn_gat(&h, &h, &Matrix::identity(3), &[1.0; 6], 0.2).unwrap();
        assert_eq!(got, leaky_relu(2.0 * h.iter().sum::<f64>(), 0.2));
    }

    #[test]
    fn gatv2_identity_region_and_unit_slope() {
        let w = Matrix::from_vec(2, 4, vec![1.0, 0.5, 0.2, 0.1, 0.3, 0.3, 0.3, 0.3]);
        let (hu, hv) = ([1.0, 2.0], [0.5, 1.5]);
        let a = [0.7, -0.4];
        let lin: f64 = w.matvec(&[1.0, 2.0, 0.5, 1.5]).iter().zip(&a).map(|(z, ai)| z * ai).sum();
        assert!((attn_gatv2(&hu, &hv, &w, &a, 0.2).unwrap() - lin).abs() < 1e-15);
        let (nu, nv) = ([-1.0, -2.0], [0.5, -1.5]);
        let lin: f64 = w.matvec(&[-1.0, -2.0, 0.5, -1.5]).iter().zip(&a).map(|(z, ai)| z * ai).sum();
        assert!((attn_gatv2(&nu, &nv, &w, &a, 1.0).unwrap() - lin).abs() < 1e-15);
    }

    #[test]
    fn typed_variants_reduce_and_isolate() {
        let w = Matrix::from_vec(2, 4, (0..8).map(|i| (i as f64 - 3.0) * 0.1).collect());
        let a = [0.3, -0.2];
        let (hu, hv) = ([0.2, -0.7], [1.1, 0.4]);
        let typed = TypedAttention::aliased(&w, &a, 3);
        for tau in 0..3 {
            assert_eq!(
                attn_etagatv2(&hu, &hv, tau, &typed, 0.2).unwrap().to_bits(),
                attn_gatv2(&hu, &hv, &w, &a, 0.2).unwrap().to_bits()
            );
        }
        let mut other = typed.clone();
        other.w[2] = Matrix::zeros(2, 4);
        other.a[2] = vec![9.0, 9.0];
        assert_eq!(attn_etagatv2(&hu, &hv, 0, &other, 0.2).unwrap(), attn_etagatv2(&hu, &hv, 0, &typed, 0.2).unwrap());
        assert_eq!(attn_etagatv2(&hu, &hv, 3, &typed, 0.2).unwrap_err(), NeuroError::UnknownType(3));

        let a1 = [0.3, -0.2, 0.1, 0.5];
        let t1 = TypedAttention::aliased(&w, &a1, 2);
        assert_eq!(attn_etagat(&hu, &hv, 1, &t1, 0.2).unwrap(), attn_gat(&hu, &hv, &w, &a1, 0.2).unwrap());
    }

    #[test]
    fn dimension_errors() {
        let w = Matrix::identity(2);
        assert!(matches!(attn_gat(&[1.0, 2.0], &[1.0], &w, &[0.0; 4], 0.2), Err(NeuroError::DimMismatch(_))));
        assert!(matches!(attn_gatv2(&[1.0, 2.0], &[1.0, 2.0], &w, &[0.0; 2], 0.2), Err(NeuroError::DimMismatch(_))));
        assert!(matches!(attn_gat(&[1.0, 2.0], &[1.0, 2.0], &w, &[0.0; 3], 0.2), Err(NeuroError::DimMismatch(_))));
    }
}
