use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lamb-Dicke parameters above this value make the first-order field
/// expansion questionable; they are accepted with a warning.
pub const ETA_WARN: f64 = 0.3;

/// Internal level structure of one ion.
///
/// Levels `0..d` are computational, `d + j` is the auxiliary partner of `j`
/// and `2d` is a shelf level used only by the phase pulse. Frequencies are
/// angular and signed: a positive ladder entry means `|j+1>` lies above `|j>`.
/// Partner and shelf levels always lie above their computational partner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelScheme {
    ladder: Vec<f64>,
    partner: Vec<f64>,
    shelf: f64,
}

impl LevelScheme {
    pub fn new(ladder: Vec<f64>, partner: Vec<f64>, shelf: f64) -> Result<Self> {
        let scheme = Self {
            ladder,
            partner,
            shelf,
        };
        scheme.validate()?;
        Ok(scheme)
    }

    /// Alternating ladder: even transitions point up, odd ones down, so
    /// `0, 1, 2` form a Lambda system with `|1>` on top.
    pub fn zigzag(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("d={d} must be >= 2")));
        }
        let ladder = (0..d - 1)
            .map(|j| {
                let w = 10.0 + j as f64;
                if j % 2 == 0 {
                    w
                } else {
                    -w
                }
            })
            .collect();
        let partner = (0..d).map(|j| 100.0 + j as f64).collect();
        Self::new(ladder, partner, 1000.0)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.ladder.len() + 1;
        if self.ladder.is_empty() {
            return Err(Error::Domain("level scheme needs at least one transition".into()));
        }
        if self.partner.len() != d {
            return Err(Error::ShapeMismatch {
                expected: format!("{d} partner frequencies"),
                found: format!("{}", self.partner.len()),
            });
        }
        if self.partner.iter().chain([&self.shelf]).any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::Domain(
                "partner and shelf frequencies must be positive".into(),
            ));
        }
        let mut all: Vec<f64> = self
            .ladder
            .iter()
            .chain(&self.partner)
            .chain([&self.shelf])
            .map(|w| w.abs())
            .collect();
        if all.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::Domain("transition frequencies must be nonzero".into()));
        }
        all.sort_by(f64::total_cmp);
        if all.windows(2).any(|w| w[1] - w[0] <= 1e-12 * w[1]) {
            return Err(Error::Domain("transition frequencies must be distinct".into()));
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.ladder.len() + 1
    }

    pub fn ladder(&self) -> &[f64] {
        &self.ladder
    }

    pub fn partner(&self) -> &[f64] {
        &self.partner
    }

    pub fn shelf(&self) -> f64 {
        self.shelf
    }

    /// Levels per ion including partners and shelf.
    pub fn levels(&self) -> usize {
        2 * self.d() + 1
    }

    pub fn aux(&self, j: usize) -> usize {
        self.d() + j
    }

    pub fn shelf_level(&self) -> usize {
        2 * self.d()
    }

    /// `(lower, upper)` ends of ladder transition `j`.
    pub fn ladder_ends(&self, j: usize) -> (usize, usize) {
        if self.ladder[j] > 0.0 {
            (j, j + 1)
        } else {
            (j + 1, j)
        }
    }

    /// True when the ladder alternates up, down, up, ... starting upward.
    pub fn is_zigzag(&self) -> bool {
        self.ladder
            .iter()
            .enumerate()
            .all(|(j, &w)| (w > 0.0) == (j % 2 == 0))
    }
}

/// Trap and phonon-bus parameters.
///
/// `eta` holds one Lamb-Dicke parameter per ladder transition and
/// `eta_partner` one per computational-to-partner transition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapConfig {
    pub nu_x: f64,
    pub ions: usize,
    pub eta: Vec<f64>,
    pub eta_partner: Vec<f64>,
    pub n_max: usize,
}

impl TrapConfig {
    /// Two ions, all Lamb-Dicke parameters 0.1, phonon cutoff 3.
    pub fn standard(d: usize) -> Self {
        Self {
            nu_x: 1.0,
            ions: 2,
            eta: vec![0.1; d.saturating_sub(1)],
            eta_partner: vec![0.1; d],
            n_max: 3,
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if !(self.nu_x > 0.0 && self.nu_x.is_finite()) {
            return Err(Error::Domain("trap frequency must be positive".into()));
        }
        if self.ions == 0 {
            return Err(Error::Domain("trap needs at least one ion".into()));
        }
        if self.n_max < 1 {
            return Err(Error::Domain("phonon cutoff n_max must be >= 1".into()));
        }
        if self.eta.len() != d - 1 || self.eta_partner.len() != d {
            return Err(Error::ShapeMismatch {
                expected: format!("{} ladder and {d} partner Lamb-Dicke parameters", d - 1),
                found: format!("{} and {}", self.eta.len(), self.eta_partner.len()),
            });
        }
        if let Some(e) = self
            .eta
            .iter()
            .chain(&self.eta_partner)
            .find(|&&e| !(e > 0.0 && e < 1.0))
        {
            return Err(Error::Domain(format!(
                "Lamb-Dicke parameter {e} outside (0, 1)"
            )));
        }
        Ok(())
    }

    /// Human-readable warnings for parameters past [`ETA_WARN`].
    pub fn warnings(&self) -> Vec<String> {
        self.eta
            .iter()
            .chain(&self.eta_partner)
            .filter(|&&e| e > ETA_WARN)
            .map(|e| format!("Lamb-Dicke parameter {e} > {ETA_WARN}: first-order expansion is rough"))
            .collect()
    }

    /// Effective sideband coupling per unit Rabi frequency.
    pub fn coupling(&self, eta: f64) -> f64 {
        eta / (self.ions as f64).sqrt()
    }
}
