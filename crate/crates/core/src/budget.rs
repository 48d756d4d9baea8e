use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Materialization limits shared by constructors, enumerators and solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Largest atom set a constructor will build.
    pub atoms: usize,
    /// Largest number of basic matrices or networks enumerated.
    pub matrices: usize,
    /// Largest number of memoized game states.
    pub states: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            atoms: 1 << 16,
            matrices: 1 << 20,
            states: 1 << 22,
        }
    }
}

impl Budget {
    pub fn check_atoms(&self, needed: u128) -> Result<()> {
        if needed > self.atoms as u128 {
            return Err(Error::budget("atoms", needed, self.atoms));
        }
        Ok(())
    }

    pub fn check_matrices(&self, needed: usize) -> Result<()> {
        if needed > self.matrices {
            return Err(Error::budget("basic matrices / networks", needed, self.matrices));
        }
        Ok(())
    }

    pub fn check_states(&self, needed: usize) -> Result<()> {
        if needed > self.states {
            return Err(Error::budget("game states", needed, self.states));
        }
        Ok(())
    }
}
