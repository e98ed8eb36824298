//! Dense factor tables over categorical variables, the workhorse of
//! variable elimination.
//!
//! A factor maps every joint assignment of its variables to a
//! non-negative number. Values are stored flat in mixed-radix order with
//! the first variable as the most significant digit, so iteration order
//! is fully determined by the variable list.

use crate::graph::NodeId;

#[derive(Debug, Clone, PartialEq)]
pub(super) struct Factor {
    /// Variable ids, most significant first. No duplicates.
    pub vars: Vec<NodeId>,
    /// Domain size of each variable, aligned with `vars`.
    pub card: Vec<usize>,
    /// One value per joint assignment; `values.len() == card product`.
    pub values: Vec<f64>,
}

impl Factor {
    /// The multiplicative identity: no variables, single value 1.
    pub fn unit() -> Factor {
        Factor { vars: Vec::new(), card: Vec::new(), values: vec![1.0] }
    }

    pub fn new(vars: Vec<NodeId>, card: Vec<usize>, values: Vec<f64>) -> Factor {
        debug_assert_eq!(vars.len(), card.len());
        debug_assert_eq!(values.len(), card.iter().product::<usize>());
        Factor { vars, card, values }
    }

    pub fn has_var(&self, var: &NodeId) -> bool {
        self.vars.contains(var)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Strides for flat indexing: `flat = Σ digit[i] * stride[i]`.
    fn strides(card: &[usize]) -> Vec<usize> {
        let mut strides = vec![1; card.len()];
        for i in (0..card.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * card[i + 1];
        }
        strides
    }

    /// Pointwise product. The result's variables are this factor's
    /// variables followed by the other's new ones, keeping both operand
    /// orders — deterministic for deterministic inputs.
    pub fn product(&self, other: &Factor) -> Factor {
        let mut vars = self.vars.clone();
        let mut card = self.card.clone();
        for (var, &size) in other.vars.iter().zip(&other.card) {
            if !vars.contains(var) {
                vars.push(var.clone());
                card.push(size);
            }
        }
        // Positions of each result variable in the operands.
        let in_self: Vec<Option<usize>> =
            vars.iter().map(|v| self.vars.iter().position(|s| s == v)).collect();
        let in_other: Vec<Option<usize>> =
            vars.iter().map(|v| other.vars.iter().position(|o| o == v)).collect();
        let self_strides = Self::strides(&self.card);
        let other_strides = Self::strides(&other.card);
        let total: usize = card.iter().product();
        let result_strides = Self::strides(&card);

        let mut values = vec![0.0; total];
        for (flat, slot) in values.iter_mut().enumerate() {
            let mut self_idx = 0;
            let mut other_idx = 0;
            for (pos, stride) in result_strides.iter().enumerate() {
                let digit = (flat / stride) % card[pos];
                if let Some(p) = in_self[pos] {
                    self_idx += digit * self_strides[p];
                }
                if let Some(p) = in_other[pos] {
                    other_idx += digit * other_strides[p];
                }
            }
            *slot = self.values[self_idx] * other.values[other_idx];
        }
        Factor { vars, card, values }
    }

    /// Marginalizes `var` away by summing over its values.
    pub fn sum_out(&self, var: &NodeId) -> Factor {
        let Some(pos) = self.vars.iter().position(|v| v == var) else {
            return self.clone();
        };
        let mut vars = self.vars.clone();
        let mut card = self.card.clone();
        vars.remove(pos);
        let removed = card.remove(pos);

        let old_strides = Self::strides(&self.card);
        let new_strides = Self::strides(&card);
        let total: usize = card.iter().product();
        let mut values = vec![0.0; total];
        for (flat, slot) in values.iter_mut().enumerate() {
            // Rebuild the old index from the reduced assignment, then
            // sweep the removed digit.
            let mut base = 0;
            for (new_pos, stride) in new_strides.iter().enumerate() {
                let digit = (flat / stride) % card[new_pos];
                let old_pos = if new_pos < pos { new_pos } else { new_pos + 1 };
                base += digit * old_strides[old_pos];
            }
            let mut acc = 0.0;
            for value in 0..removed {
                acc += self.values[base + value * old_strides[pos]];
            }
            *slot = acc;
        }
        Factor { vars, card, values }
    }

    /// Fixes `var` to one value, dropping the variable.
    pub fn restrict(&self, var: &NodeId, value: usize) -> Factor {
        let Some(pos) = self.vars.iter().position(|v| v == var) else {
            return self.clone();
        };
        let mut vars = self.vars.clone();
        let mut card = self.card.clone();
        vars.remove(pos);
        card.remove(pos);

        let old_strides = Self::strides(&self.card);
        let new_strides = Self::strides(&card);
        let total: usize = card.iter().product();
        let mut values = vec![0.0; total];
        for (flat, slot) in values.iter_mut().enumerate() {
            let mut old_idx = value * old_strides[pos];
            for (new_pos, stride) in new_strides.iter().enumerate() {
                let digit = (flat / stride) % card[new_pos];
                let old_pos = if new_pos < pos { new_pos } else { new_pos + 1 };
                old_idx += digit * old_strides[old_pos];
            }
            *slot = self.values[old_idx];
        }
        Factor { vars, card, values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> NodeId {
        NodeId::from(s)
    }

    #[test]
    fn product_joins_on_shared_variables() {
        // f(a) = [0.3, 0.7], g(a, b) = [[0.9, 0.1], [0.2, 0.8]]
        let f = Factor::new(vec![id("a")], vec![2], vec![0.3, 0.7]);
        let g = Factor::new(vec![id("a"), id("b")], vec![2, 2], vec![0.9, 0.1, 0.2, 0.8]);
        let joint = f.product(&g);
        assert_eq!(joint.vars, vec![id("a"), id("b")]);
        let expected = [0.3 * 0.9, 0.3 * 0.1, 0.7 * 0.2, 0.7 * 0.8];
        for (got, want) in joint.values.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn summing_out_marginalizes() {
        let joint =
            Factor::new(vec![id("a"), id("b")], vec![2, 2], vec![0.27, 0.03, 0.14, 0.56]);
        let marginal = joint.sum_out(&id("a"));
        assert_eq!(marginal.vars, vec![id("b")]);
        assert!((marginal.values[0] - 0.41).abs() < 1e-12);
        assert!((marginal.values[1] - 0.59).abs() < 1e-12);
    }

    #[test]
    fn restrict_slices_one_value() {
        let joint =
            Factor::new(vec![id("a"), id("b")], vec![2, 2], vec![0.27, 0.03, 0.14, 0.56]);
        let sliced = joint.restrict(&id("a"), 1);
        assert_eq!(sliced.vars, vec![id("b")]);
        assert_eq!(sliced.values, vec![0.14, 0.56]);
    }

    #[test]
    fn unit_is_the_product_identity() {
        let f = Factor::new(vec![id("x")], vec![3], vec![0.2, 0.3, 0.5]);
        let via_unit = Factor::unit().product(&f);
        assert_eq!(via_unit.vars, f.vars);
        assert_eq!(via_unit.values, f.values);
    }

    #[test]
    fn product_with_three_valued_domains() {
        let f = Factor::new(vec![id("x")], vec![3], vec![1.0, 2.0, 3.0]);
        let g = Factor::new(vec![id("y")], vec![2], vec![10.0, 20.0]);
        let joint = f.product(&g);
        assert_eq!(joint.vars, vec![id("x"), id("y")]);
        assert_eq!(joint.values, vec![10.0, 20.0, 20.0, 40.0, 30.0, 60.0]);
        // Summing both out in either order gives the same total,
        // (1+2+3)·(10+20).
        assert!((joint.sum_out(&id("x")).sum_out(&id("y")).values[0] - 180.0).abs() < 1e-12);
        assert!((joint.sum_out(&id("y")).sum_out(&id("x")).values[0] - 180.0).abs() < 1e-12);
    }
}
