use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use tautrec::graphs::check_stable_pair;
use tautrec::gwcalc::DeltaReading;
use tautrec::pixton::PixtonInput;
use tautrec::strata::KappaVariant;

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Graphs,
    Basis,
    Pixton,
    Derive,
    Translate,
    Verify,
    Rank,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Graphs => "graphs",
            Command::Basis => "basis",
            Command::Pixton => "pixton",
            Command::Derive => "derive",
            Command::Translate => "translate",
            Command::Verify => "verify",
            Command::Rank => "rank",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum KappaSwitch {
    #[default]
    Printed,
    PerVertex,
}

impl fmt::Display for KappaSwitch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        KappaVariant::from(*self).fmt(f)
    }
}

impl From<KappaSwitch> for KappaVariant {
    fn from(k: KappaSwitch) -> Self {
        match k {
            KappaSwitch::Printed => KappaVariant::Printed,
            KappaSwitch::PerVertex => KappaVariant::PerVertex,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DeltaSwitch {
    Contraction,
    #[default]
    Alt,
}

impl fmt::Display for DeltaSwitch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        DeltaReading::from(*self).fmt(f)
    }
}

impl From<DeltaSwitch> for DeltaReading {
    fn from(d: DeltaSwitch) -> Self {
        match d {
            DeltaSwitch::Contraction => DeltaReading::Contraction,
            DeltaSwitch::Alt => DeltaReading::Alt,
        }
    }
}

/// Everything a job depends on. Embedded verbatim in every output document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobConfig {
    pub command: Command,
    pub g: Option<u32>,
    pub n: Option<usize>,
    pub r: Option<u32>,
    #[serde(default)]
    pub sigma: Vec<u32>,
    #[serde(default)]
    pub a: Vec<u32>,
    /// Input file of `translate` and `verify`.
    pub input: Option<PathBuf>,
    /// Correlator text whose support restricts the `derive` solve.
    pub within: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub checkpoint_every: usize,
    pub threads: Option<usize>,
    pub kappa_variant: KappaSwitch,
    pub delta_reading: DeltaSwitch,
    /// Test hook: stop `derive` after this many checkpoints.
    #[serde(skip)]
    pub halt_after_checkpoints: Option<usize>,
}

impl JobConfig {
    pub fn new(command: Command) -> Self {
        JobConfig {
            command,
            g: None,
            n: None,
            r: None,
            sigma: Vec::new(),
            a: Vec::new(),
            input: None,
            within: None,
            cache_dir: None,
            checkpoint_every: 2000,
            threads: None,
            kappa_variant: KappaSwitch::default(),
            delta_reading: DeltaSwitch::default(),
            halt_after_checkpoints: None,
        }
    }

    pub fn with_gnr(mut self, g: u32, n: usize, r: Option<u32>) -> Self {
        self.g = Some(g);
        self.n = Some(n);
        self.r = r;
        self
    }

    fn need_gn(&self) -> Result<(u32, usize)> {
        let g = self.g.ok_or_else(|| CliError::invalid(format!("{} needs --g", self.command.name())))?;
        let n = self.n.ok_or_else(|| CliError::invalid(format!("{} needs --n", self.command.name())))?;
        check_stable_pair(g, n)?;
        Ok((g, n))
    }

    pub fn gn(&self) -> (u32, usize) {
        (self.g.unwrap_or(0), self.n.unwrap_or(0))
    }

    /// Codimension used by `derive`: `--r`, or the genus (1 in genus 0).
    pub fn derive_r(&self) -> u32 {
        self.r.unwrap_or(self.g.unwrap_or(0).max(1))
    }

    pub fn need_r(&self) -> Result<u32> {
        self.r.ok_or_else(|| CliError::invalid(format!("{} needs --r", self.command.name())))
    }

    /// Insertion indices for `pixton`, defaulting to all zeros.
    pub fn pixton_a(&self) -> Vec<u32> {
        if self.a.is_empty() {
            vec![0; self.n.unwrap_or(0)]
        } else {
            self.a.clone()
        }
    }

    /// Checks every parameter the command uses before any computation runs.
    pub fn validate(&self) -> Result<()> {
        if self.checkpoint_every == 0 {
            return Err(CliError::invalid("--checkpoint-every must be positive"));
        }
        if self.threads == Some(0) {
            return Err(CliError::invalid("--threads must be positive"));
        }
        let check_r = |g: u32, n: usize, r: u32| {
            let dim = 3 * g as i64 - 3 + n as i64;
            if r as i64 > dim {
                return Err(CliError::invalid(format!("r = {r} exceeds dim = {dim} of M({g},{n})")));
            }
            Ok(())
        };
        match self.command {
            Command::Graphs => {
                self.need_gn()?;
            }
            Command::Basis | Command::Rank => {
                let (g, n) = self.need_gn()?;
                check_r(g, n, self.need_r()?)?;
            }
            Command::Pixton => {
                let (g, n) = self.need_gn()?;
                PixtonInput::new(g, n, self.need_r()?, self.sigma.clone(), self.pixton_a())?;
            }
            Command::Derive => {
                let (g, n) = self.need_gn()?;
                check_r(g, n, self.derive_r())?;
                if let Some(p) = &self.within {
                    if !p.is_file() {
                        return Err(CliError::invalid(format!("--within file {} does not exist", p.display())));
                    }
                }
            }
            Command::Translate | Command::Verify => match &self.input {
                Some(p) if p.is_file() => {}
                Some(p) => return Err(CliError::invalid(format!("input file {} does not exist", p.display()))),
                None => return Err(CliError::invalid(format!("{} needs an input file", self.command.name()))),
            },
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(JobConfig::new(Command::Graphs).with_gnr(1, 1, None).validate().is_ok());
        assert!(JobConfig::new(Command::Graphs).with_gnr(0, 2, None).validate().is_err());
        assert!(JobConfig::new(Command::Basis).with_gnr(1, 1, None).validate().is_err());
        assert!(JobConfig::new(Command::Rank).with_gnr(1, 1, Some(2)).validate().is_err());
        let mut p = JobConfig::new(Command::Pixton).with_gnr(1, 1, Some(1));
        p.sigma = vec![2];
        assert!(p.validate().is_err());
        assert!(JobConfig::new(Command::Translate).validate().is_err());
        assert_eq!(JobConfig::new(Command::Derive).with_gnr(0, 4, None).derive_r(), 1);
    }

    #[test]
    fn serialized_switch_names() {
        let mut c = JobConfig::new(Command::Derive);
        c.kappa_variant = KappaSwitch::PerVertex;
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["kappa_variant"], "per-vertex");
        assert_eq!(v["delta_reading"], "alt");
        assert_eq!(serde_json::from_value::<JobConfig>(v).unwrap(), c);
    }
}
