//! Sample-set management: validation, conjugate closure, serialization.
//!
//! A [`SampleSet`] is the only non-intrusive input to the pipeline: full
//! transfer samples H(jω_i) (static gain included), optional derivatives
//! H′(jω_i), and the static gain D itself. The left grid defaults to the
//! right grid, which makes every Loewner diagonal a Hermite entry; a
//! distinct left grid stays supported through [`SampleSet::with_left`].

use crate::error::{Error, Result};
use crate::grid::coincident;
use crate::la;
use crate::weights::{Variant, VariantConfig};
use ndarray::prelude::*;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

/// Samples on a (possibly signed) frequency grid.
#[derive(Debug, Clone)]
pub struct SampleSet {
    /// Right-grid frequencies ω_i in rad/s.
    pub freqs: Vec<f64>,
    /// Full samples H(jω_i), p×m each.
    pub samples: Vec<Array2<c64>>,
    /// Derivatives H′(jω_i), present when the sampler was asked for them.
    pub derivatives: Option<Vec<Array2<c64>>>,
    /// D = lim_{s→∞} H(s).
    pub static_gain: Array2<f64>,
    /// Whether the grid contains ±ω pairs with conjugate-mirrored values.
    pub conjugate_closed: bool,
    /// Distinct left grid (ν_i, H(jν_i), H′(jν_i)); `None` means matched.
    pub left: Option<LeftGrid>,
}

#[derive(Debug, Clone)]
pub struct LeftGrid {
    pub freqs: Vec<f64>,
    pub samples: Vec<Array2<c64>>,
    pub derivatives: Option<Vec<Array2<c64>>>,
}

impl SampleSet {
    pub fn new(
        freqs: Vec<f64>,
        samples: Vec<Array2<c64>>,
        derivatives: Option<Vec<Array2<c64>>>,
        static_gain: Array2<f64>,
        conjugate_closed: bool,
    ) -> Result<Self> {
        let set = Self {
            freqs,
            samples,
            derivatives,
            static_gain,
            conjugate_closed,
            left: None,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn with_left(mut self, left: LeftGrid) -> Result<Self> {
        if left.freqs.len() != left.samples.len() {
            return Err(Error::Dimension(
                "left grid frequencies/samples length mismatch".into(),
            ));
        }
        self.left = Some(left);
        self.validate()?;
        Ok(self)
    }

    pub fn num_outputs(&self) -> usize {
        self.static_gain.nrows()
    }

    pub fn num_inputs(&self) -> usize {
        self.static_gain.ncols()
    }

    /// Right-grid strictly proper sample G(jω_i) = H(jω_i) − D.
    pub fn proper(&self, i: usize) -> Array2<c64> {
        &self.samples[i] - &la::to_complex(&self.static_gain)
    }

    /// Left-grid frequencies (the right grid when matched).
    pub fn left_freqs(&self) -> &[f64] {
        self.left.as_ref().map(|l| l.freqs.as_slice()).unwrap_or(&self.freqs)
    }

    pub fn left_sample(&self, i: usize) -> &Array2<c64> {
        self.left
            .as_ref()
            .map(|l| &l.samples[i])
            .unwrap_or(&self.samples[i])
    }

    pub fn left_proper(&self, i: usize) -> Array2<c64> {
        self.left_sample(i) - &la::to_complex(&self.static_gain)
    }

    pub fn left_derivative(&self, i: usize) -> Option<&Array2<c64>> {
        match &self.left {
            Some(l) => l.derivatives.as_ref().map(|d| &d[i]),
            None => self.derivatives.as_ref().map(|d| &d[i]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (p, m) = (self.num_outputs(), self.num_inputs());
        if self.freqs.len() != self.samples.len() {
            return Err(Error::Dimension(
                "frequencies/samples length mismatch".into(),
            ));
        }
        if self.freqs.is_empty() {
            return Err(Error::Config("sample set is empty".into()));
        }
        if let Some(d) = &self.derivatives {
            if d.len() != self.freqs.len() {
                return Err(Error::Dimension(
                    "frequencies/derivatives length mismatch".into(),
                ));
            }
        }
        for &w in &self.freqs {
            if !w.is_finite() {
                return Err(Error::Config(format!("non-finite frequency {w}")));
            }
        }
        let mut sorted = self.freqs.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for pair in sorted.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::Config(format!(
                    "duplicate frequency {} rad/s",
                    pair[0]
                )));
            }
        }
        for h in self.samples.iter().chain(self.derivatives.iter().flatten()) {
            if h.nrows() != p || h.ncols() != m {
                return Err(Error::Dimension(format!(
                    "sample block {}x{} does not match static gain {p}x{m}",
                    h.nrows(),
                    h.ncols()
                )));
            }
            if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Config("non-finite sample entry".into()));
            }
        }
        if self.conjugate_closed {
            for (i, &w) in self.freqs.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                let j = self
                    .freqs
                    .iter()
                    .position(|&v| v == -w)
                    .ok_or_else(|| Error::Config(format!("missing mirror of {w} rad/s")))?;
                let mirrored = self.samples[j].mapv(|z| z.conj());
                let dev = la::frob(&(&mirrored - &self.samples[i]));
                if dev > 1e-12 * la::frob(&self.samples[i]).max(1.0) {
                    return Err(Error::Config(format!(
                        "conjugate symmetry violated at ±{w} rad/s (dev {dev:.3e})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Mirror positive-frequency data onto ±ω with conjugated values. A zero
/// frequency (if present) is kept once; the output interleaves (+ω, −ω).
pub fn conjugate_close(set: &SampleSet) -> Result<SampleSet> {
    if set.freqs.iter().any(|&w| w < 0.0) {
        return Err(Error::Config(
            "conjugate_close expects only nonnegative frequencies".into(),
        ));
    }
    if set.left.is_some() {
        return Err(Error::Config(
            "conjugate_close operates on matched-grid sample sets".into(),
        ));
    }
    let mut freqs = Vec::with_capacity(2 * set.freqs.len());
    let mut samples = Vec::with_capacity(2 * set.freqs.len());
    let mut derivs = set.derivatives.as_ref().map(|_| Vec::new());
    for (i, &w) in set.freqs.iter().enumerate() {
        freqs.push(w);
        samples.push(set.samples[i].clone());
        if let (Some(out), Some(src)) = (derivs.as_mut(), set.derivatives.as_ref()) {
            out.push(src[i].clone());
        }
        if w > 0.0 {
            freqs.push(-w);
            samples.push(set.samples[i].mapv(|z| z.conj()));
            if let (Some(out), Some(src)) = (derivs.as_mut(), set.derivatives.as_ref()) {
                // H(s) real-symmetric: H'(conj(s)) = conj(H'(s))
                out.push(src[i].mapv(|z| z.conj()));
            }
        }
    }
    SampleSet::new(freqs, samples, derivs, set.static_gain.clone(), true)
}

/// Per-variant feasibility report; diagnostic only, never an error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub pass: bool,
    pub reasons: Vec<String>,
    /// Set when derivative data is absent and would be approximated by
    /// divided differences over neighboring samples.
    pub approximate_derivatives: bool,
}

/// Collects the variant preconditions: squareness/invertibility of D for
/// SWBT/BST, D+Dᵀ ≻ 0 for PRBT, I − DDᵀ ≻ 0 for BRBT, per-sample
/// I + (1−γ²)G*G ≻ 0 for H∞BT with γ > 1, derivative availability for BST.
pub fn validate_for_variant(set: &SampleSet, cfg: &VariantConfig) -> Diagnostics {
    let mut reasons = Vec::new();
    let d = la::to_complex(&set.static_gain);
    let (p, m) = (set.num_outputs(), set.num_inputs());
    let square = p == m;
    let d_min_sv = min_singular_value(&set.static_gain);

    match cfg.variant {
        Variant::Swbt | Variant::Bst => {
            if !square {
                reasons.push(format!("{}: system must be square, got {p}x{m}", cfg.variant));
            } else if d_min_sv < 1e-12 {
                reasons.push(format!(
                    "{}: D singular (smallest singular value {d_min_sv:.3e})",
                    cfg.variant
                ));
            }
        }
        Variant::Prbt => {
            let s = &d + &la::adj(&d);
            if !square {
                reasons.push(format!("PRBT: system must be square, got {p}x{m}"));
            } else if min_herm_eig(&s) <= 0.0 {
                reasons.push("PRBT: D+Dᵀ singular".into());
            }
        }
        Variant::Brbt => {
            let ddt = d.dot(&la::adj(&d));
            let gap = 1.0 - max_herm_eig(&ddt);
            if gap <= 0.0 {
                reasons.push(format!("BRBT: I − DDᵀ not positive definite (gap {gap:.3e})"));
            }
        }
        Variant::HinfBt { gamma } if gamma > 1.0 => {
            let theta = 1.0 - gamma * gamma;
            for (i, &w) in set.freqs.iter().enumerate() {
                let g = set.proper(i);
                let gsg = la::adj(&g).dot(&g);
                let probe = la::eye(m) + gsg.mapv(|z| z * theta);
                if min_herm_eig(&probe) <= 0.0 {
                    reasons.push(format!(
                        "H∞BT(γ={gamma}): I + (1−γ²)G*G loses definiteness at ω={w} rad/s"
                    ));
                    break;
                }
            }
        }
        _ => {}
    }

    let mut approximate_derivatives = false;
    if matches!(cfg.variant, Variant::Bst) {
        let coincident_grids = set.left.is_none()
            || set
                .freqs
                .iter()
                .zip(set.left_freqs())
                .all(|(&w, &v)| coincident(w, v));
        if coincident_grids && set.derivatives.is_none() {
            approximate_derivatives = true;
            reasons.push(
                "BST: coincident grids without derivative data; divided differences over \
                 neighboring samples would be used (approximate)"
                    .into(),
            );
        }
    }

    Diagnostics {
        pass: reasons.is_empty(),
        reasons,
        approximate_derivatives,
    }
}

fn min_singular_value(a: &Array2<f64>) -> f64 {
    use ndarray_linalg::SVD;
    la::ensure_serial_blas();
    match a.svd(false, false) {
        Ok((_, s, _)) => s.iter().cloned().fold(f64::INFINITY, f64::min),
        Err(_) => 0.0,
    }
}

fn min_herm_eig(a: &Array2<c64>) -> f64 {
    match la::eigh_herm(&la::hermitianize(a)) {
        Ok((ev, _)) => ev.iter().cloned().fold(f64::INFINITY, f64::min),
        Err(_) => f64::NEG_INFINITY,
    }
}

fn max_herm_eig(a: &Array2<c64>) -> f64 {
    match la::eigh_herm(&la::hermitianize(a)) {
        Ok((ev, _)) => ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        Err(_) => f64::INFINITY,
    }
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SampleFile {
    frequencies_rad_s: Vec<f64>,
    /// per frequency: p rows of m entries of [re, im]
    samples: Vec<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    derivatives: Option<Vec<Vec<Vec<[f64; 2]>>>>,
    static_gain: Vec<Vec<f64>>,
    conjugate_closed: bool,
}

fn block_to_nested(h: &Array2<c64>) -> Vec<Vec<[f64; 2]>> {
    h.rows()
        .into_iter()
        .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn block_from_nested(v: &[Vec<[f64; 2]>], p: usize, m: usize) -> Result<Array2<c64>> {
    if v.len() != p || v.iter().any(|r| r.len() != m) {
        return Err(Error::Dimension(format!("sample block must be {p}x{m}")));
    }
    let flat: Vec<c64> = v
        .iter()
        .flatten()
        .map(|&[re, im]| c64::new(re, im))
        .collect();
    Array2::from_shape_vec((p, m), flat).map_err(|e| Error::Dimension(e.to_string()))
}

impl SampleSet {
    pub fn to_json(&self) -> Result<String> {
        if self.left.is_some() {
            return Err(Error::Config(
                "sample files store matched-grid data; distinct left grids are API-only".into(),
            ));
        }
        let file = SampleFile {
            frequencies_rad_s: self.freqs.clone(),
            samples: self.samples.iter().map(block_to_nested).collect(),
            derivatives: self
                .derivatives
                .as_ref()
                .map(|d| d.iter().map(block_to_nested).collect()),
            static_gain: self
                .static_gain
                .rows()
                .into_iter()
                .map(|r| r.to_vec())
                .collect(),
            conjugate_closed: self.conjugate_closed,
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SampleFile = serde_json::from_str(text)?;
        let p = file.static_gain.len();
        let m = file.static_gain.first().map(|r| r.len()).unwrap_or(0);
        if p == 0 || m == 0 || file.static_gain.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension("static_gain must be a p x m matrix".into()));
        }
        let flat: Vec<f64> = file.static_gain.iter().flatten().copied().collect();
        let static_gain =
            Array2::from_shape_vec((p, m), flat).map_err(|e| Error::Dimension(e.to_string()))?;
        let samples = file
            .samples
            .iter()
            .map(|b| block_from_nested(b, p, m))
            .collect::<Result<Vec<_>>>()?;
        let derivatives = match &file.derivatives {
            Some(d) => Some(
                d.iter()
                    .map(|b| block_from_nested(b, p, m))
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };
        SampleSet::new(
            file.frequencies_rad_s,
            samples,
            derivatives,
            static_gain,
            file.conjugate_closed,
        )
    }

    /// CSV with one row per frequency: ω, then Re/Im for every (output,input).
    pub fn to_csv(&self) -> String {
        let (p, m) = (self.num_outputs(), self.num_inputs());
        let mut out = String::from("omega_rad_s");
        for i in 0..p {
            for j in 0..m {
                out.push_str(&format!(",h{}{}_re,h{}{}_im", i, j, i, j));
            }
        }
        out.push('\n');
        for (k, &w) in self.freqs.iter().enumerate() {
            out.push_str(&format!("{w:.17e}"));
            for i in 0..p {
                for j in 0..m {
                    let z = self.samples[k][[i, j]];
                    out.push_str(&format!(",{:.17e},{:.17e}", z.re, z.im));
                }
            }
            out.push('\n');
        }
        out
    }
}
