//! Mixed spin-(1/2, S) square lattice.
//!
//! Each spin-S site sits inside a plaquette of four spin-1/2 sites with
//! Hamiltonian `K·S·Σσ + D·S²` (σ = ±1/2). Tracing out S gives an
//! eight-vertex model with `w2 = w3 = w4` and `w5 = … = w8`. The critical
//! curve is the locus `w1 = w̄2 + w3 + w4` with `w̄2 = w2 - Δ/w1` and
//! `Δ = w1 w2 + w3 w4 - w5 w6 - w7 w8`.
//!
//! Weights are kept as logarithms so large `|K|` and `|D|` stay representable;
//! the critical residual is reported divided by `w2`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::{ln_cosh, log_sum_exp};
use crate::spin::{CouplingVector, Legs, NodeConvention, SpinValue};
use crate::transform::{boltzmann_weights, DecoratedCell};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedModelParams {
    pub spin: SpinValue,
    pub k: f64,
    pub d: f64,
}

impl MixedModelParams {
    pub fn new(spin: SpinValue, k: f64, d: f64) -> Result<Self> {
        if !(k.is_finite() && d.is_finite()) {
            return Err(Error::NonFinite("mixed model parameters"));
        }
        Ok(Self { spin, k, d })
    }
}

/// The three distinct vertex weights, stored as natural logarithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexWeights {
    pub ln_w1: f64,
    pub ln_w2: f64,
    pub ln_w5: f64,
}

impl VertexWeights {
    pub fn from_weights(w1: f64, w2: f64, w5: f64) -> Result<Self> {
        for (position, value) in [(1, w1), (2, w2), (5, w5)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveWeight { position, value });
            }
        }
        Ok(Self {
            ln_w1: w1.ln(),
            ln_w2: w2.ln(),
            ln_w5: w5.ln(),
        })
    }

    pub fn w1(&self) -> f64 {
        self.ln_w1.exp()
    }

    pub fn w2(&self) -> f64 {
        self.ln_w2.exp()
    }

    pub fn w5(&self) -> f64 {
        self.ln_w5.exp()
    }

    /// `w1 > w5 > w2`.
    pub fn is_ordered(&self) -> bool {
        self.ln_w1 > self.ln_w5 && self.ln_w5 > self.ln_w2
    }

    /// `(w1/w2, w5/w2)`.
    fn ratios(&self) -> (f64, f64) {
        ((self.ln_w1 - self.ln_w2).exp(), (self.ln_w5 - self.ln_w2).exp())
    }

    /// `Δ / w2²`.
    fn scaled_delta(&self) -> f64 {
        let (r1, r5) = self.ratios();
        r1 + 1.0 - 2.0 * r5 * r5
    }

    /// `w1 - 3 w2 + Δ/w1`, unscaled.
    pub fn critical_function(&self) -> f64 {
        self.w2() * self.scaled_residual()
    }

    /// `(w1 - 3 w2 + Δ/w1) / w2`.
    pub fn scaled_residual(&self) -> f64 {
        let (r1, _) = self.ratios();
        r1 - 3.0 + self.scaled_delta() / r1
    }

    /// `|Δ| / w1²`.
    pub fn delta_ratio(&self) -> f64 {
        let (r1, _) = self.ratios();
        self.scaled_delta().abs() / (r1 * r1)
    }
}

/// `Δ = w1 w2 + w2² - 2 w5²` in the symmetric parametrization.
pub fn delta(w: &VertexWeights) -> f64 {
    let (w1, w2, w5) = (w.w1(), w.w2(), w.w5());
    w1 * w2 + w2 * w2 - 2.0 * w5 * w5
}

/// Closed-form vertex weights.
///
/// Integral S sums over `n = 1..=S`:
/// `w1 = 1 + 2Σ cosh(2nK) e^{n²D}`, `w2 = 1 + 2Σ e^{n²D}`, `w5 = 1 + 2Σ cosh(nK) e^{n²D}`.
///
/// Half-odd-integral S sums over the positive moments `μ = 1/2, 3/2, …, S`:
/// `w1 = 2Σ cosh(2μK) e^{μ²D}`, `w2 = 2Σ e^{μ²D}`, `w5 = 2Σ cosh(μK) e^{μ²D}`.
pub fn vertex_weights(p: &MixedModelParams) -> Result<VertexWeights> {
    let positive: Vec<f64> = if p.spin.is_integral() {
        (1..=p.spin.twice() / 2).map(f64::from).collect()
    } else {
        (1..=p.spin.twice().div_ceil(2)).map(|n| f64::from(n) - 0.5).collect()
    };
    let ln2 = std::f64::consts::LN_2;
    let base = if p.spin.is_integral() { vec![0.0] } else { Vec::new() };
    let sum = |field: f64| {
        let mut terms = base.clone();
        terms.extend(positive.iter().map(|&mu| ln2 + ln_cosh(field * mu) + mu * mu * p.d));
        log_sum_exp(&terms)
    };
    let w = VertexWeights {
        ln_w1: sum(2.0 * p.k),
        ln_w2: sum(0.0),
        ln_w5: sum(p.k),
    };
    if [w.ln_w1, w.ln_w2, w.ln_w5].iter().all(|x| x.is_finite()) {
        Ok(w)
    } else {
        Err(Error::NonFinite("vertex weights"))
    }
}

/// The four-leg plaquette cell: physical nodes, `J_{e_i} = K`, self energy `D·S²`.
pub fn plaquette_cell(p: &MixedModelParams) -> Result<DecoratedCell> {
    let legs = Legs::uniform(SpinValue::HALF, 4)?;
    let mut j = CouplingVector::zeros(legs, NodeConvention::Physical);
    for leg in 0..4 {
        let mut idx = [0; 4];
        idx[leg] = 1;
        j.set(&idx, p.k)?;
    }
    DecoratedCell::new(p.spin, j).with_single_ion(p.d)
}

/// Vertex weights read off the generic trace of the plaquette cell.
pub fn trace_vertex_weights(p: &MixedModelParams) -> Result<VertexWeights> {
    let w = boltzmann_weights(&plaquette_cell(p)?)?;
    // node 1 is σ = +1/2, node 0 is σ = -1/2
    VertexWeights::from_weights(w.get(&[1, 1, 1, 1])?, w.get(&[1, 0, 1, 0])?, w.get(&[1, 0, 1, 1])?)
}

/// Constant, pair and plaquette couplings of the effective spin-1/2 model
/// (σ = ±1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareParams {
    pub j0: f64,
    pub j2: f64,
    pub j4: f64,
}

impl SquareParams {
    /// Sign expectations `J0 > 0` and `J2 > 0` that do not hold.
    pub fn warnings(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.j0 <= 0.0 {
            out.push("J0 is not positive");
        }
        if self.j2 <= 0.0 {
            out.push("J2 is not positive");
        }
        out
    }
}

/// `J0 = ⅛ ln(w2³ w5⁴ w1)`, `J2 = ⅛ ln(w1/w2)`, `J4 = ⅛ ln(w1 w2³ / w5⁴)`.
pub fn effective_square_params(w: &VertexWeights) -> SquareParams {
    SquareParams {
        j0: (3.0 * w.ln_w2 + 4.0 * w.ln_w5 + w.ln_w1) / 8.0,
        j2: (w.ln_w1 - w.ln_w2) / 8.0,
        j4: (w.ln_w1 + 3.0 * w.ln_w2 - 4.0 * w.ln_w5) / 8.0,
    }
}

/// The effective four-leg Hamiltonian `J0 + J2 Σ_{i<j} σiσj + J4 σ1σ2σ3σ4` on ±1 nodes.
pub fn square_couplings(params: &SquareParams) -> Result<CouplingVector> {
    let legs = Legs::uniform(SpinValue::HALF, 4)?;
    let mut j = CouplingVector::zeros(legs, NodeConvention::Normalized);
    j.set(&[0, 0, 0, 0], params.j0)?;
    for a in 0..4 {
        for b in a + 1..4 {
            let mut idx = [0; 4];
            idx[a] = 1;
            idx[b] = 1;
            j.set(&idx, params.j2)?;
        }
    }
    j.set(&[1, 1, 1, 1], params.j4)?;
    Ok(j)
}

/// `(w1 - 3 w2 + Δ/w1) / w2`: zero on the critical curve.
pub fn critical_residual(p: &MixedModelParams) -> Result<f64> {
    let r = vertex_weights(p)?.scaled_residual();
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::NonFinite("critical residual"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub k_c: f64,
    pub d_c: f64,
    pub delta: f64,
    pub ratio: f64,
    pub residual: f64,
    pub weights: VertexWeights,
}

impl CriticalPoint {
    fn at(p: MixedModelParams) -> Result<Self> {
        let weights = vertex_weights(&p)?;
        Ok(Self {
            k_c: p.k,
            d_c: p.d,
            delta: delta(&weights),
            ratio: weights.delta_ratio(),
            residual: weights.scaled_residual(),
            weights,
        })
    }
}

/// Outcome for one scan line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurvePoint {
    Found(CriticalPoint),
    /// No sign change of the residual inside the bracket.
    NoRoot {
        k: f64,
    },
}

impl CurvePoint {
    pub fn found(&self) -> Option<&CriticalPoint> {
        match self {
            CurvePoint::Found(p) => Some(p),
            CurvePoint::NoRoot { .. } => None,
        }
    }
}

/// Scan step and stopping rules for the root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    /// Stop once `|residual| <= tol`.
    pub tol: f64,
    /// Stop once the bracket is narrower than this.
    pub width: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            lo: -60.0,
            hi: 60.0,
            step: 0.05,
            tol: 1e-10,
            width: 1e-12,
        }
    }
}

impl ScanOptions {
    pub fn with_bracket(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.hi > self.lo) {
            return Err(Error::InvalidBracket {
                lo: self.lo,
                hi: self.hi,
            });
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidStep(self.step));
        }
        if !(self.tol > 0.0 && self.width > 0.0) {
            return Err(Error::InvalidStep(self.tol.min(self.width)));
        }
        Ok(())
    }
}

/// First sign change of `f` on the scan grid, refined by bisection.
fn find_root(f: impl Fn(f64) -> Result<f64>, opts: &ScanOptions) -> Result<Option<f64>> {
    opts.validate()?;
    let steps = ((opts.hi - opts.lo) / opts.step).ceil() as usize;
    let grid = |k: usize| (opts.lo + k as f64 * opts.step).min(opts.hi);

    let mut a = grid(0);
    let mut fa = f(a)?;
    if fa == 0.0 {
        return Ok(Some(a));
    }
    for k in 1..=steps {
        let b = grid(k);
        let fb = f(b)?;
        if fb == 0.0 {
            return Ok(Some(b));
        }
        if fa.signum() != fb.signum() {
            return bisect(&f, a, fa, b, opts).map(Some);
        }
        a = b;
        fa = fb;
    }
    Ok(None)
}

fn bisect(f: &impl Fn(f64) -> Result<f64>, mut a: f64, mut fa: f64, mut b: f64, opts: &ScanOptions) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = f(mid)?;
        if fm.abs() <= opts.tol || (b - a) <= opts.width {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Critical anisotropy at fixed `k`, searching `D` over the bracket in `opts`.
pub fn solve_critical_d(spin: SpinValue, k: f64, opts: &ScanOptions) -> Result<CurvePoint> {
    let root = find_root(|d| critical_residual(&MixedModelParams::new(spin, k, d)?), opts)?;
    match root {
        Some(d) => Ok(CurvePoint::Found(CriticalPoint::at(MixedModelParams::new(
            spin, k, d,
        )?)?)),
        None => Ok(CurvePoint::NoRoot { k }),
    }
}

/// Critical coupling at fixed `d`, searching `K` over the bracket in `opts`.
pub fn solve_critical_k(spin: SpinValue, d: f64, opts: &ScanOptions) -> Result<Option<CriticalPoint>> {
    let root = find_root(|k| critical_residual(&MixedModelParams::new(spin, k, d)?), opts)?;
    root.map(|k| CriticalPoint::at(MixedModelParams::new(spin, k, d)?))
        .transpose()
}

/// `D_c(K)` for every `K` in `k_values`, in input order.
pub fn solve_critical_curve(spin: SpinValue, k_values: &[f64], opts: &ScanOptions) -> Result<Vec<CurvePoint>> {
    opts.validate()?;
    if k_values.iter().any(|k| !k.is_finite()) {
        return Err(Error::NonFinite("K values"));
    }
    k_values.par_iter().map(|&k| solve_critical_d(spin, k, opts)).collect()
}

/// `lo, lo+step, …` up to and including `hi` (within half a step).
pub fn k_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidStep(step));
    }
    if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
        return Err(Error::InvalidBracket { lo, hi });
    }
    let n = ((hi - lo) / step + 0.5).floor() as usize;
    Ok((0..=n).map(|k| lo + k as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spin(twice: u32) -> SpinValue {
        SpinValue::from_twice(twice).unwrap()
    }

    fn params(twice: u32, k: f64, d: f64) -> MixedModelParams {
        MixedModelParams::new(spin(twice), k, d).unwrap()
    }

    #[test]
    fn uniform_weights_at_zero_coupling() {
        let w = vertex_weights(&params(2, 0.0, 0.0)).unwrap();
        assert_relative_eq!(w.w1(), 3.0, max_relative = 1e-15);
        assert_relative_eq!(w.w2(), 3.0, max_relative = 1e-15);
        assert_relative_eq!(w.w5(), 3.0, max_relative = 1e-15);
        assert!(delta(&w).abs() < 1e-13);
        let sq = effective_square_params(&w);
        assert_relative_eq!(sq.j0, 3f64.ln(), max_relative = 1e-15);
        assert!(sq.j2.abs() < 1e-15 && sq.j4.abs() < 1e-15);
    }

    #[test]
    fn spin_one_closed_forms() {
        let (k, d) = (0.9, -0.4);
        let w = vertex_weights(&params(2, k, d)).unwrap();
        assert_relative_eq!(w.w1(), 1.0 + 2.0 * (2.0 * k).cosh() * d.exp(), max_relative = 1e-14);
        assert_relative_eq!(w.w2(), 1.0 + 2.0 * d.exp(), max_relative = 1e-14);
        assert_relative_eq!(w.w5(), 1.0 + 2.0 * k.cosh() * d.exp(), max_relative = 1e-14);
    }

    #[test]
    fn spin_one_unit_coupling() {
        let w = vertex_weights(&params(2, 1.0, 0.0)).unwrap();
        let (w1, w2, w5) = (1.0 + 2.0 * 2f64.cosh(), 3.0, 1.0 + 2.0 * 1f64.cosh());
        let sq = effective_square_params(&w);
        assert_relative_eq!(sq.j2, (w1 / w2).ln() / 8.0, max_relative = 1e-14);
        assert_relative_eq!(delta(&w), w1 * w2 + w2 * w2 - 2.0 * w5 * w5, max_relative = 1e-13);
        assert!(sq.warnings().is_empty());
    }

    #[test]
    fn closed_forms_match_generic_trace() {
        for (twice, k, d) in [
            (4, 0.3, -0.5),
            (2, -1.1, 0.7),
            (3, 0.45, 0.2),
            (5, 1.3, -0.9),
            (6, -0.2, 0.1),
        ] {
            let p = params(twice, k, d);
            let a = vertex_weights(&p).unwrap();
            let b = trace_vertex_weights(&p).unwrap();
            assert_relative_eq!(a.w1(), b.w1(), max_relative = 1e-12);
            assert_relative_eq!(a.w2(), b.w2(), max_relative = 1e-12);
            assert_relative_eq!(a.w5(), b.w5(), max_relative = 1e-12);
        }
    }

    #[test]
    fn anisotropy_to_minus_infinity_is_free_fermion() {
        let w = vertex_weights(&params(2, 0.8, -60.0)).unwrap();
        assert!(delta(&w).abs() < 1e-20);
        assert_relative_eq!(w.w1(), 1.0, max_relative = 1e-20);
    }

    #[test]
    fn residual_at_zero_coupling() {
        for d in [-2.0, 0.0, 1.5] {
            assert_relative_eq!(critical_residual(&params(2, 0.0, d)).unwrap(), -2.0, epsilon = 1e-14);
            let w = vertex_weights(&params(2, 0.0, d)).unwrap();
            assert_relative_eq!(w.critical_function(), -2.0 * w.w2(), max_relative = 1e-13);
        }
    }

    #[test]
    fn large_anisotropy_limit_of_residual() {
        let (k, d) = (0.6, 30.0);
        let w = vertex_weights(&params(2, k, d)).unwrap();
        let scaled = w.critical_function() / (2.0 * d.exp());
        assert_relative_eq!(scaled, (2.0 * k).cosh() - 3.0, epsilon = 1e-9);
    }

    #[test]
    fn residual_is_even_in_k() {
        for (twice, k, d) in [(2, 0.7, 0.3), (3, 1.9, -1.0), (4, 0.2, 2.0)] {
            let a = critical_residual(&params(twice, k, d)).unwrap();
            let b = critical_residual(&params(twice, -k, d)).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-14);
        }
    }

    #[test]
    fn solved_points_have_small_residual() {
        let opts = ScanOptions::default();
        for k in [1.0, 2.5, 8.0] {
            let p = *solve_critical_d(spin(2), k, &opts).unwrap().found().unwrap();
            assert!(p.residual.abs() <= 1e-10, "{p:?}");
            assert!(critical_residual(&params(2, k, p.d_c)).unwrap().abs() <= 1e-10);
        }
    }

    #[test]
    fn no_root_below_asymptote() {
        let p = solve_critical_d(spin(2), 0.5, &ScanOptions::default()).unwrap();
        assert_eq!(p, CurvePoint::NoRoot { k: 0.5 });
    }

    #[test]
    fn curve_preserves_order_and_symmetry() {
        let ks = [3.0, -3.0, 1.5, -1.5];
        let pts = solve_critical_curve(spin(2), &ks, &ScanOptions::default()).unwrap();
        let d: Vec<f64> = pts.iter().map(|p| p.found().unwrap().d_c).collect();
        for (p, k) in pts.iter().zip(ks) {
            assert_eq!(p.found().unwrap().k_c, k);
        }
        assert!((d[0] - d[1]).abs() < 1e-9);
        assert!((d[2] - d[3]).abs() < 1e-9);
    }

    #[test]
    fn invalid_bracket_and_step() {
        let bad = ScanOptions::with_bracket(1.0, -1.0);
        assert!(matches!(
            solve_critical_d(spin(2), 1.0, &bad),
            Err(Error::InvalidBracket { .. })
        ));
        let bad_step = ScanOptions {
            step: 0.0,
            ..ScanOptions::default()
        };
        assert!(matches!(
            solve_critical_d(spin(2), 1.0, &bad_step),
            Err(Error::InvalidStep(_))
        ));
        assert!(k_grid(0.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = k_grid(0.0, 3.0, 0.1).unwrap();
        assert_eq!(g.len(), 31);
        assert!((g[30] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn square_couplings_reproduce_vertex_weights() {
        let w = vertex_weights(&params(4, 0.7, -0.3)).unwrap();
        let sq = effective_square_params(&w);
        let h = square_couplings(&sq).unwrap().evaluate_all();
        let legs = Legs::uniform(SpinValue::HALF, 4).unwrap();
        let at = |c: [usize; 4]| h[legs.position(&c).unwrap()].exp();
        assert_relative_eq!(at([1, 1, 1, 1]), w.w1(), max_relative = 1e-13);
        assert_relative_eq!(at([1, 0, 1, 0]), w.w2(), max_relative = 1e-13);
        assert_relative_eq!(at([1, 1, 0, 0]), w.w2(), max_relative = 1e-13);
        assert_relative_eq!(at([1, 0, 1, 1]), w.w5(), max_relative = 1e-13);
        assert_relative_eq!(at([0, 1, 1, 1]), w.w5(), max_relative = 1e-13);
    }
}
