//! Dice losses on kernel and text maps, online hard example mining and the
//! weighted total, with analytic gradients.
//!
//! Prediction maps are expected to already be squashed to `[0, 1]`.
//! Reductions use a fixed pairwise tree so results do not depend on how the
//! work is scheduled.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ensure_same_dims, BitMask, ScalarMap};
use crate::morphology::{soft_dilate_vjp, DilationSize};
use crate::postprocess::training_forward;

/// Default ratio of hard negatives to positives kept by [`ohem_select`].
pub const DEFAULT_OHEM_RATIO: f64 = 3.0;

/// Weight of the text-region term in the total loss.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub alpha: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { alpha: 0.5 }
    }
}

impl LossWeights {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "alpha must be finite and ≥ 0, got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    /// `kernel + alpha * text`.
    pub fn combine(&self, kernel: f64, text: f64) -> f64 {
        kernel + self.alpha * text
    }
}

/// Pixels that take part in a loss.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectionMask(BitMask);

impl SelectionMask {
    pub fn full(width: usize, height: usize) -> Self {
        Self(BitMask::filled(width, height))
    }

    pub fn from_mask(mask: BitMask) -> Self {
        Self(mask)
    }

    pub fn mask(&self) -> &BitMask {
        &self.0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    pub fn count(&self) -> usize {
        self.0.count_ones()
    }

    #[inline]
    fn contains(&self, i: usize) -> bool {
        self.0.as_slice()[i] != 0
    }
}

pub(crate) fn pairwise_sum(v: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if v.len() <= LEAF {
        v.iter().sum()
    } else {
        let mid = v.len() / 2;
        pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
    }
}

struct DiceSums {
    overlap: f64,
    denom: f64,
}

fn dice_sums(p: &ScalarMap, g: &BitMask, sel: &SelectionMask) -> Result<DiceSums> {
    ensure_same_dims(p.dims(), g.dims())?;
    ensure_same_dims(p.dims(), sel.dims())?;
    let mut overlap = Vec::new();
    let mut denom = Vec::new();
    for (i, (&pv, &gv)) in p.as_slice().iter().zip(g.as_slice()).enumerate() {
        if sel.contains(i) {
            let gv = f64::from(gv);
            overlap.push(pv * gv);
            denom.push(pv * pv + gv * gv);
        }
    }
    Ok(DiceSums {
        overlap: pairwise_sum(&overlap),
        denom: pairwise_sum(&denom),
    })
}

/// `1 − 2ΣPG / (ΣP² + ΣG²)` over the selected pixels; 0 when both sums vanish.
pub fn dice_loss(p: &ScalarMap, g: &BitMask, sel: &SelectionMask) -> Result<f64> {
    let sums = dice_sums(p, g, sel)?;
    if sums.denom == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 - 2.0 * sums.overlap / sums.denom)
}

/// Gradient of [`dice_loss`] with respect to `p`:
/// `−2 (G·D − 2P·N) / D²` on selected pixels and 0 elsewhere, where `N` is
/// the overlap sum and `D` the denominator.
pub fn dice_loss_grad(p: &ScalarMap, g: &BitMask, sel: &SelectionMask) -> Result<ScalarMap> {
    let DiceSums { overlap, denom } = dice_sums(p, g, sel)?;
    if denom == 0.0 {
        return Err(Error::InvalidArgument(
            "Dice gradient undefined: zero denominator".into(),
        ));
    }
    let (w, h) = p.dims();
    let d2 = denom * denom;
    let grad = p
        .as_slice()
        .iter()
        .zip(g.as_slice())
        .enumerate()
        .map(|(i, (&pv, &gv))| {
            if sel.contains(i) {
                -2.0 * (f64::from(gv) * denom - 2.0 * pv * overlap) / d2
            } else {
                0.0
            }
        })
        .collect();
    Ok(ScalarMap::from_vec_unchecked(w, h, grad))
}

/// Keeps every positive pixel plus the `⌊ratio × positives⌋` negatives with
/// the highest predictions (ties to the lowest row-major index). With no
/// positives every pixel is selected.
pub fn ohem_select(p_tex: &ScalarMap, g_tex: &BitMask, ratio: f64) -> Result<SelectionMask> {
    ensure_same_dims(p_tex.dims(), g_tex.dims())?;
    if !ratio.is_finite() || ratio < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "OHEM ratio must be finite and ≥ 0, got {ratio}"
        )));
    }
    let (w, h) = g_tex.dims();
    let positives = g_tex.count_ones();
    if positives == 0 {
        return Ok(SelectionMask::full(w, h));
    }
    let mut selected = g_tex.clone();
    let pv = p_tex.as_slice();
    let mut negatives: Vec<usize> = (0..w * h).filter(|&i| g_tex.as_slice()[i] == 0).collect();
    let budget = ((ratio * positives as f64).floor() as usize).min(negatives.len());
    if budget > 0 {
        let harder = |a: &usize, b: &usize| pv[*b].total_cmp(&pv[*a]).then(a.cmp(b));
        if budget < negatives.len() {
            negatives.select_nth_unstable_by(budget - 1, harder);
        }
        for &i in &negatives[..budget] {
            selected.as_mut_slice()[i] = 1;
        }
    }
    Ok(SelectionMask(selected))
}

/// Value of each loss term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossTerms {
    pub kernel: f64,
    pub text: f64,
    pub total: f64,
}

/// Kernel Dice over all pixels plus `alpha` times the OHEM-restricted text
/// Dice. `p_tex` is the training-branch dilation of `p_ker`.
pub fn loss_terms(
    p_ker: &ScalarMap,
    g_ker: &BitMask,
    p_tex: &ScalarMap,
    g_tex: &BitMask,
    weights: LossWeights,
    ratio: f64,
) -> Result<LossTerms> {
    let (w, h) = p_ker.dims();
    let kernel = dice_loss(p_ker, g_ker, &SelectionMask::full(w, h))?;
    let sel = ohem_select(p_tex, g_tex, ratio)?;
    let text = dice_loss(p_tex, g_tex, &sel)?;
    Ok(LossTerms {
        kernel,
        text,
        total: weights.combine(kernel, text),
    })
}

pub fn total_loss(
    p_ker: &ScalarMap,
    g_ker: &BitMask,
    p_tex: &ScalarMap,
    g_tex: &BitMask,
    weights: LossWeights,
    ratio: f64,
) -> Result<f64> {
    Ok(loss_terms(p_ker, g_ker, p_tex, g_tex, weights, ratio)?.total)
}

/// Total loss of a kernel prediction and its gradient with respect to that
/// prediction, chaining the text term through the dilation. The OHEM
/// selection is treated as constant.
pub fn training_loss_and_grad(
    p_ker: &ScalarMap,
    g_ker: &BitMask,
    g_tex: &BitMask,
    s: DilationSize,
    weights: LossWeights,
    ratio: f64,
) -> Result<(LossTerms, ScalarMap)> {
    let (w, h) = p_ker.dims();
    let p_tex = training_forward(p_ker, s);
    let full = SelectionMask::full(w, h);
    let sel = ohem_select(&p_tex, g_tex, ratio)?;
    let kernel = dice_loss(p_ker, g_ker, &full)?;
    let text = dice_loss(&p_tex, g_tex, &sel)?;

    let mut grad = dice_loss_grad(p_ker, g_ker, &full)?;
    let upstream = dice_loss_grad(&p_tex, g_tex, &sel)?;
    let through = soft_dilate_vjp(p_ker, s, &upstream)?;
    for (g, &t) in grad.as_mut_slice().iter_mut().zip(through.as_slice()) {
        *g += weights.alpha * t;
    }
    let terms = LossTerms {
        kernel,
        text,
        total: weights.combine(kernel, text),
    };
    Ok((terms, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(w: usize, h: usize, v: &[f64]) -> ScalarMap {
        ScalarMap::from_values(w, h, v.to_vec()).unwrap()
    }

    fn bits(w: usize, h: usize, v: &[u8]) -> BitMask {
        BitMask::from_bits(w, h, v.to_vec()).unwrap()
    }

    #[test]
    fn dice_worked_example() {
        let p = map(2, 2, &[1.0, 0.5, 0.0, 0.0]);
        let g = bits(2, 2, &[1, 1, 0, 0]);
        let l = dice_loss(&p, &g, &SelectionMask::full(2, 2)).unwrap();
        assert!((l - (1.0 - 3.0 / 3.25)).abs() < 1e-12);
    }

    #[test]
    fn dice_extremes() {
        let g = bits(3, 1, &[1, 0, 1]);
        let full = SelectionMask::full(3, 1);
        assert_eq!(dice_loss(&g.to_scalar(), &g, &full).unwrap(), 0.0);
        assert_eq!(dice_loss(&ScalarMap::zeros(3, 1), &g, &full).unwrap(), 1.0);
        assert_eq!(
            dice_loss(&ScalarMap::zeros(3, 1), &BitMask::new(3, 1), &full).unwrap(),
            0.0
        );
        assert!(dice_loss(&ScalarMap::zeros(2, 1), &g, &full).is_err());
    }

    #[test]
    fn unselected_pixels_get_no_gradient() {
        let p = map(3, 1, &[0.2, 0.7, 0.4]);
        let g = bits(3, 1, &[1, 0, 1]);
        let sel = SelectionMask::from_mask(bits(3, 1, &[1, 0, 1]));
        let grad = dice_loss_grad(&p, &g, &sel).unwrap();
        assert_eq!(grad.get(1, 0), 0.0);
        assert!(dice_loss_grad(&ScalarMap::zeros(3, 1), &BitMask::new(3, 1), &sel).is_err());
    }

    #[test]
    fn ohem_budget_and_fallback() {
        // 10 positives and 100 negatives with distinct scores.
        let g = BitMask::from_fn(11, 10, |x, _| x == 0);
        let p = ScalarMap::from_fn(11, 10, |x, y| (y * 11 + x) as f64 / 110.0);
        let sel = ohem_select(&p, &g, 3.0).unwrap();
        assert_eq!(sel.count(), 40);
        assert!(g.is_subset_of(sel.mask()));
        // The hardest negatives are the 30 highest-scoring ones.
        let chosen: Vec<usize> = (0..110)
            .filter(|&i| sel.mask().as_slice()[i] == 1 && i % 11 != 0)
            .collect();
        assert_eq!(chosen.len(), 30);
        assert!(chosen.iter().all(|&i| i >= 110 - 34));

        let none = ohem_select(&p, &BitMask::new(11, 10), 3.0).unwrap();
        assert_eq!(none.count(), 110);
    }

    #[test]
    fn ohem_ties_prefer_low_index() {
        let g = bits(5, 1, &[1, 0, 0, 0, 0]);
        let p = ScalarMap::constant(5, 1, 0.5);
        let sel = ohem_select(&p, &g, 2.0).unwrap();
        assert_eq!(sel.mask().as_slice(), &[1, 1, 1, 0, 0]);
    }

    #[test]
    fn weights_combine() {
        let w = LossWeights::default();
        assert!((w.combine(0.2, 0.4) - 0.4).abs() < 1e-15);
        assert_eq!(LossWeights::new(0.0).unwrap().combine(0.3, 0.9), 0.3);
        assert!(LossWeights::new(-1.0).is_err());
    }

    #[test]
    fn perfect_predictions_cost_nothing() {
        let g = BitMask::from_fn(8, 8, |x, y| (2..6).contains(&x) && (2..6).contains(&y));
        let t = total_loss(
            &g.to_scalar(),
            &g,
            &g.to_scalar(),
            &g,
            LossWeights::default(),
            3.0,
        )
        .unwrap();
        assert_eq!(t, 0.0);
    }

    #[test]
    fn pairwise_sum_is_exact_on_integers() {
        let v: Vec<f64> = (0..1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
    }
}
