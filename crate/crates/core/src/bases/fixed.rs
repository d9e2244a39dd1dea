use crate::contract::{BaseAlgorithm, Context};
use crate::error::Result;

/// Plays the same arm every round and ignores feedback.
#[derive(Debug, Clone)]
pub struct FixedArm {
    arm: usize,
}

pub fn make_fixed_arm(arm: usize) -> FixedArm {
    FixedArm { arm }
}

impl FixedArm {
    pub fn arm(&self) -> usize {
        self.arm
    }
}

impl BaseAlgorithm for FixedArm {
    fn propose(&mut self, context: &Context) -> Result<usize> {
        context.check_arm(self.arm)?;
        Ok(self.arm)
    }

    fn feedback(&mut self, _context: &Context, _action: usize, _reward: f64) -> Result<()> {
        Ok(())
    }

    fn reset(&mut self) {}

    fn name(&self) -> String {
        format!("fixed[{}]", self.arm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn always_proposes_its_arm() {
        let ctx = Context::token(3);
        let mut b = make_fixed_arm(0);
        for r in [0.0, 1.0, -5.0, 0.3] {
            assert_eq!(b.propose(&ctx).unwrap(), 0);
            b.feedback(&ctx, 2, r).unwrap();
        }
        assert_eq!(b.arm(), 0);
    }

    #[test]
    fn out_of_range_arm_errors() {
        let mut b = make_fixed_arm(5);
        assert!(b.propose(&Context::token(3)).is_err());
    }
}
