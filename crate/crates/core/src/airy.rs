//! Model operators and their resolvent norms: the rotated Airy operator
//! `A_{r,θ} = -d²/dx² + r e^{iθ} x` and the generalized Airy operator
//! `A_β = -d/dx + |x|^β`, both on the line.
//!
//! Norms are computed numerically (memoized in [`AiryNormTable`]) or from
//! their large-shift asymptotics.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator_lab::{resolvent_norm_with, Discretization, NormOptions, NormResult, Operator, Stencil};
use crate::potential::PotentialModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AiryKind {
    Rotated { r: f64, theta: f64 },
    Generalized { beta: f64 },
}

impl AiryKind {
    /// `A_{1,π/2} = -d²/dx² + i x`.
    pub fn imaginary() -> Self {
        AiryKind::Rotated { r: 1.0, theta: FRAC_PI_2 }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            AiryKind::Rotated { r, theta } => {
                if !(r > 0.0) {
                    return Err(Error::InvalidInput(format!("r must be positive, got {r}")));
                }
                if !(theta.abs() <= PI) || theta.sin().abs() < 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "theta must lie in (-pi, pi) away from 0, got {theta}"
                    )));
                }
            }
            AiryKind::Generalized { beta } => {
                if !(beta > 0.0) {
                    return Err(Error::InvalidInput(format!("beta must be positive, got {beta}")));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for AiryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AiryKind::Rotated { r, theta } => write!(f, "rotated(r={r}, theta={theta})"),
            AiryKind::Generalized { beta } => write!(f, "generalized(beta={beta})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryQuery {
    pub kind: AiryKind,
    /// Real shift μ in `‖(A - μ)⁻¹‖`.
    pub mu: f64,
    pub tol: f64,
}

impl AiryQuery {
    pub fn new(kind: AiryKind, mu: f64) -> Self {
        Self { kind, mu, tol: 1e-6 }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

fn rotated_start(mu: f64, scale: f64) -> Discretization {
    let m = mu.max(0.0);
    let length = 30f64.max(10.0 * (1.0 + m).powf(1.5)) * scale;
    let h = 0.25 / 1f64.max(mu.abs().sqrt()) * scale;
    Discretization {
        length,
        n: ((2.0 * length / h) as usize).max(64),
        stencil: Stencil::Fd4,
    }
}

fn generalized_start(beta: f64, mu: f64) -> Discretization {
    let m = mu.max(0.0);
    let length = 30f64.max(10.0 * (1.0 + m).powf(1.0 / beta + 1.0));
    let h = 0.25 / 1f64.max(mu.abs());
    Discretization {
        length,
        n: ((2.0 * length / h) as usize).max(64),
        stencil: Stencil::Fd4,
    }
}

/// Numeric `‖(A - μ)⁻¹‖`. The rotated operator is reduced to `r = 1` by
/// the dilation identity `‖(A_{r,θ} - μ)⁻¹‖ = r^{-2/3}‖(A_{1,θ} - r^{-2/3}μ)⁻¹‖`.
pub fn airy_norm(q: &AiryQuery) -> Result<NormResult> {
    q.kind.validate()?;
    match q.kind {
        AiryKind::Rotated { r, theta } => {
            let s = r.powf(-2.0 / 3.0);
            let v = PotentialModel::rotated_airy(1.0, theta);
            let mu = s * q.mu;
            let opts = NormOptions {
                tol: q.tol,
                stencil: Stencil::Fd4,
                initial: Some(rotated_start(mu, 1.0)),
                ..Default::default()
            };
            let mut res = resolvent_norm_with((&v).into(), Complex64::new(mu, 0.0), &opts)?.require_converged()?;
            res.value *= s;
            res.lambda = Complex64::new(q.mu, 0.0);
            res.history.iter_mut().for_each(|h| h.value *= s);
            Ok(res)
        }
        AiryKind::Generalized { beta } => {
            let opts = NormOptions {
                tol: q.tol,
                stencil: Stencil::Fd4,
                initial: Some(generalized_start(beta, q.mu)),
                ..Default::default()
            };
            resolvent_norm_with(Operator::GeneralizedAiry { beta }, Complex64::new(q.mu, 0.0), &opts)?.require_converged()
        }
    }
}

/// Numeric `‖(A_{r,θ} - μ)⁻¹‖` discretizing `-d²/dx² + r e^{iθ} x` directly,
/// without the dilation reduction.
pub fn rotated_norm_unreduced(r: f64, theta: f64, mu: f64, tol: f64) -> Result<NormResult> {
    AiryKind::Rotated { r, theta }.validate()?;
    let v = PotentialModel::rotated_airy(r, theta);
    let scale = r.powf(-1.0 / 3.0);
    let opts = NormOptions {
        tol,
        stencil: Stencil::Fd4,
        initial: Some(rotated_start(mu * scale * scale, scale)),
        ..Default::default()
    };
    resolvent_norm_with((&v).into(), Complex64::new(mu, 0.0), &opts)?.require_converged()
}

/// Logarithm of the large-shift asymptotic norm.
pub fn log_airy_norm_asym(kind: AiryKind, mu: f64) -> Result<f64> {
    kind.validate()?;
    if !(mu > 0.0) {
        return Err(Error::MuNonpositive(mu));
    }
    match kind {
        AiryKind::Rotated { r, theta } => {
            if (theta.abs() - FRAC_PI_2).abs() > 1e-12 {
                return Err(Error::Unsupported(
                    "asymptotics of the rotated Airy norm are implemented for theta = ±pi/2".into(),
                ));
            }
            let s = r.powf(-2.0 / 3.0);
            let m = s * mu;
            Ok(s.ln() + 0.5 * FRAC_PI_2.ln() - 0.25 * m.ln() + 4.0 / 3.0 * m.powf(1.5))
        }
        AiryKind::Generalized { beta } => Ok(0.5 * (PI / beta).ln()
            + (1.0 - beta) / (2.0 * beta) * mu.ln()
            + 2.0 * beta / (beta + 1.0) * mu.powf((1.0 + beta) / beta)),
    }
}

/// Large-shift asymptotics:
/// rotated `√(π/2) μ^{-1/4} e^{4μ^{3/2}/3}`,
/// generalized `√(π/β) μ^{(1-β)/(2β)} e^{2β μ^{(1+β)/β}/(β+1)}`.
pub fn airy_norm_asym(kind: AiryKind, mu: f64) -> Result<f64> {
    log_airy_norm_asym(kind, mu).map(f64::exp)
}

const CACHE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub version: u32,
    #[serde(flatten)]
    pub kind: AiryKind,
    pub mu: f64,
    pub tol: f64,
    pub value: f64,
    pub length: f64,
    pub n: usize,
}

type CacheKey = (u8, u64, u64, u64);

fn key(kind: &AiryKind, mu: f64) -> CacheKey {
    match *kind {
        AiryKind::Rotated { r, theta } => (0, r.to_bits(), theta.to_bits(), mu.to_bits()),
        AiryKind::Generalized { beta } => (1, beta.to_bits(), 0, mu.to_bits()),
    }
}

/// Memo table of numeric Airy norms, optionally persisted as JSON.
///
/// A cached entry serves any query whose tolerance is no tighter than the
/// one it was computed with; tighter queries recompute and replace it.
#[derive(Debug, Default)]
pub struct AiryNormTable {
    entries: RwLock<HashMap<CacheKey, CacheEntry>>,
    path: Option<PathBuf>,
}

impl AiryNormTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Table backed by `path`; existing entries are loaded, entries written
    /// by another format version are skipped.
    pub fn with_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut map = HashMap::new();
        if path.exists() {
            let text = std::fs::read_to_string(&path)?;
            if !text.trim().is_empty() {
                let raw: Vec<serde_json::Value> = serde_json::from_str(&text)
                    .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
                for v in raw {
                    if let Ok(e) = serde_json::from_value::<CacheEntry>(v) {
                        if e.version == CACHE_VERSION {
                            map.insert(key(&e.kind, e.mu), e);
                        }
                    }
                }
            }
        }
        Ok(Self { entries: RwLock::new(map), path: Some(path) })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entries(&self) -> Vec<CacheEntry> {
        let mut v: Vec<CacheEntry> = self.entries.read().expect("cache lock poisoned").values().cloned().collect();
        v.sort_by(|a, b| a.mu.total_cmp(&b.mu));
        v
    }

    pub fn lookup(&self, q: &AiryQuery) -> Option<f64> {
        let map = self.entries.read().expect("cache lock poisoned");
        map.get(&key(&q.kind, q.mu)).filter(|e| e.tol <= q.tol).map(|e| e.value)
    }

    /// Cached value, computing and storing it when needed.
    pub fn norm(&self, q: &AiryQuery) -> Result<f64> {
        if let Some(v) = self.lookup(q) {
            return Ok(v);
        }
        let res = airy_norm(q)?;
        let entry = CacheEntry {
            version: CACHE_VERSION,
            kind: q.kind,
            mu: q.mu,
            tol: q.tol,
            value: res.value,
            length: res.discretization.length,
            n: res.discretization.n,
        };
        let mut map = self.entries.write().expect("cache lock poisoned");
        let k = key(&q.kind, q.mu);
        match map.get(&k) {
            Some(old) if old.tol <= entry.tol => Ok(old.value),
            _ => {
                map.insert(k, entry);
                Ok(res.value)
            }
        }
    }

    /// Writes the table to its file, if it has one.
    pub fn save(&self) -> Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let text = serde_json::to_string_pretty(&self.entries()).map_err(|e| Error::Io(e.to_string()))?;
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, text)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn asymptotic_values() {
        let v = airy_norm_asym(AiryKind::imaginary(), 1.0).unwrap();
        assert!((v - (FRAC_PI_2).sqrt() * (4.0f64 / 3.0).exp()).abs() < 1e-12);
        let g = airy_norm_asym(AiryKind::Generalized { beta: 1.0 }, 1.0).unwrap();
        assert!((g - PI.sqrt() * 1f64.exp()).abs() < 1e-12);
        assert_eq!(airy_norm_asym(AiryKind::imaginary(), 0.0), Err(Error::MuNonpositive(0.0)));
    }

    #[test]
    fn invalid_parameters() {
        let q = AiryQuery::new(AiryKind::Rotated { r: -1.0, theta: 1.0 }, 0.0);
        assert!(airy_norm(&q).is_err());
        let q = AiryQuery::new(AiryKind::Generalized { beta: 0.0 }, 0.0);
        assert!(airy_norm(&q).is_err());
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("airy.json");
        let q = AiryQuery::new(AiryKind::Generalized { beta: 2.0 }, 0.0).with_tol(1e-5);
        let t = AiryNormTable::with_file(&path).unwrap();
        let v = t.norm(&q).unwrap();
        assert!((v - 1.333_765_4).abs() < 1e-4);
        t.save().unwrap();
        let t2 = AiryNormTable::with_file(&path).unwrap();
        assert_eq!(t2.len(), 1);
        assert_eq!(t2.lookup(&q), Some(v));
        // a tighter request is not served from the looser entry
        assert_eq!(t2.lookup(&q.with_tol(1e-8)), None);
    }
}
