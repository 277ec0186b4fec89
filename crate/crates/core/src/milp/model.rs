//! Solver-independent mixed-integer model with integer coefficients.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lo: i64,
    pub hi: i64,
    pub obj: i64,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub terms: Vec<(VarId, i64)>,
    pub cmp: Cmp,
    pub rhs: i64,
}

/// Lower-bounding row `coef * aux >= rhs + sum(terms)` used to complete
/// partial warm starts.
#[derive(Debug, Clone)]
struct AuxRow {
    aux: VarId,
    coef: i64,
    terms: Vec<(VarId, i64)>,
    rhs: i64,
}

/// Minimization model. All coefficients, bounds and right-hand sides are
/// integers; continuous variables only relax integrality.
#[derive(Debug, Clone, Default)]
pub struct MilpModel {
    vars: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective_constant: i64,
    warm_start: Option<Vec<f64>>,
    aux_rows: Vec<AuxRow>,
}

const FEAS_TOL: f64 = 1e-6;

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lo: i64, hi: i64, obj: i64) -> VarId {
        let (lo, hi) = match kind {
            VarKind::Binary => (lo.max(0), hi.min(1)),
            _ => (lo, hi),
        };
        self.vars.push(Variable {
            name: name.into(),
            kind,
            lo,
            hi,
            obj,
        });
        VarId(self.vars.len() - 1)
    }

    pub fn add_binary(&mut self, name: impl Into<String>, obj: i64) -> VarId {
        self.add_var(name, VarKind::Binary, 0, 1, obj)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lo: i64, hi: i64, obj: i64) -> VarId {
        self.add_var(name, VarKind::Continuous, lo, hi, obj)
    }

    pub fn add_constraint(&mut self, terms: Vec<(VarId, i64)>, cmp: Cmp, rhs: i64) {
        self.constraints.push(Constraint { terms, cmp, rhs });
    }

    /// Adds `coef * aux - sum(terms) >= rhs` and remembers it so that
    /// [`MilpModel::complete`] can derive the smallest feasible `aux`.
    pub fn add_aux_lower_bound(&mut self, aux: VarId, coef: i64, terms: Vec<(VarId, i64)>, rhs: i64) {
        assert!(coef > 0);
        let mut row: Vec<(VarId, i64)> = Vec::with_capacity(terms.len() + 1);
        row.push((aux, coef));
        row.extend(terms.iter().map(|&(v, a)| (v, -a)));
        self.constraints.push(Constraint {
            terms: row,
            cmp: Cmp::Ge,
            rhs,
        });
        self.aux_rows.push(AuxRow { aux, coef, terms, rhs });
    }

    pub fn add_objective_constant(&mut self, c: i64) {
        self.objective_constant += c;
    }

    pub fn objective_constant(&self) -> i64 {
        self.objective_constant
    }

    pub fn fix(&mut self, v: VarId, value: i64) {
        let var = &mut self.vars[v.0];
        var.lo = value;
        var.hi = value;
    }

    pub fn set_warm_start(&mut self, values: Vec<f64>) {
        self.warm_start = Some(values);
    }

    pub fn warm_start(&self) -> Option<&[f64]> {
        self.warm_start.as_deref()
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, v: VarId) -> &Variable {
        &self.vars[v.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Structural sanity check: bounds ordered, ids in range, warm start
    /// length matching.
    pub fn validate(&self) -> Result<()> {
        for (i, v) in self.vars.iter().enumerate() {
            if v.lo > v.hi {
                return Err(Error::MalformedModel(format!(
                    "variable {} ({i}) has empty domain [{}, {}]",
                    v.name, v.lo, v.hi
                )));
            }
            if v.kind == VarKind::Integer && (v.lo < i32::MIN as i64 || v.hi > i32::MAX as i64) {
                return Err(Error::MalformedModel(format!("integer variable {} out of range", v.name)));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if let Some(&(v, _)) = c.terms.iter().find(|(v, _)| v.0 >= self.vars.len()) {
                return Err(Error::MalformedModel(format!(
                    "constraint {i} references unknown variable {}",
                    v.0
                )));
            }
        }
        if let Some(w) = &self.warm_start {
            if w.len() != self.vars.len() {
                return Err(Error::MalformedModel(format!(
                    "warm start has {} values for {} variables",
                    w.len(),
                    self.vars.len()
                )));
            }
        }
        Ok(())
    }

    /// Rounds integral variables to the nearest integer.
    pub fn round_integral(&self, values: &mut [f64]) {
        for (x, v) in values.iter_mut().zip(&self.vars) {
            if v.kind != VarKind::Continuous {
                *x = x.round();
            }
        }
    }

    /// Checks bounds, integrality and every constraint. Returns a description
    /// of the first violation.
    pub fn check(&self, values: &[f64]) -> std::result::Result<(), String> {
        if values.len() != self.vars.len() {
            return Err(format!("{} values for {} variables", values.len(), self.vars.len()));
        }
        for (x, v) in values.iter().zip(&self.vars) {
            if !x.is_finite() {
                return Err(format!("{} is not finite", v.name));
            }
            if *x < v.lo as f64 - FEAS_TOL || *x > v.hi as f64 + FEAS_TOL {
                return Err(format!("{} = {x} outside [{}, {}]", v.name, v.lo, v.hi));
            }
            if v.kind != VarKind::Continuous && (x - x.round()).abs() > FEAS_TOL {
                return Err(format!("{} = {x} is not integral", v.name));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            let lhs: f64 = c.terms.iter().map(|&(v, a)| a as f64 * values[v.0]).sum();
            let tol = FEAS_TOL * (1.0 + (c.rhs as f64).abs());
            let ok = match c.cmp {
                Cmp::Le => lhs <= c.rhs as f64 + tol,
                Cmp::Ge => lhs >= c.rhs as f64 - tol,
                Cmp::Eq => (lhs - c.rhs as f64).abs() <= tol,
            };
            if !ok {
                return Err(format!("constraint {i} violated: lhs {lhs} vs rhs {}", c.rhs));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective_constant as f64
            + self
                .vars
                .iter()
                .zip(values)
                .map(|(v, x)| v.obj as f64 * x)
                .sum::<f64>()
    }

    /// Fills every auxiliary variable registered through
    /// [`MilpModel::add_aux_lower_bound`] with its smallest feasible value
    /// given the other entries. Unset non-auxiliary entries default to their
    /// lower bound. Auxiliaries are resolved in order of their first row, so
    /// an auxiliary may depend on auxiliaries created before it.
    pub fn complete(&self, partial: &[Option<f64>]) -> Vec<f64> {
        let mut values: Vec<f64> = partial
            .iter()
            .zip(&self.vars)
            .map(|(x, v)| x.unwrap_or(v.lo as f64))
            .collect();
        values.resize(self.vars.len(), 0.0);
        let mut is_aux = vec![false; self.vars.len()];
        for r in &self.aux_rows {
            if partial.get(r.aux.0).copied().flatten().is_none() {
                is_aux[r.aux.0] = true;
            }
        }
        for (i, v) in self.vars.iter().enumerate() {
            if is_aux[i] {
                values[i] = v.lo as f64;
            }
        }
        for r in &self.aux_rows {
            if !is_aux[r.aux.0] {
                continue;
            }
            let sum: f64 = r.rhs as f64 + r.terms.iter().map(|&(v, a)| a as f64 * values[v.0]).sum::<f64>();
            let mut need = sum / r.coef as f64;
            if self.vars[r.aux.0].kind != VarKind::Continuous {
                need = (need - FEAS_TOL).ceil();
            }
            if need > values[r.aux.0] {
                values[r.aux.0] = need;
            }
        }
        values
    }

    /// CPLEX LP text format, for debugging with external tools.
    pub fn to_lp(&self) -> String {
        let mut out = String::new();
        let name = |v: VarId| -> String { lp_name(&self.vars[v.0].name, v.0) };
        if self.objective_constant != 0 {
            let _ = writeln!(out, "\\ objective constant {}", self.objective_constant);
        }
        out.push_str("Minimize\n obj:");
        let obj: Vec<(VarId, i64)> = self
            .vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.obj != 0)
            .map(|(i, v)| (VarId(i), v.obj))
            .collect();
        write_terms(&mut out, &obj, &name);
        out.push_str("\nSubject To\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let _ = write!(out, " c{i}:");
            write_terms(&mut out, &c.terms, &name);
            let op = match c.cmp {
                Cmp::Le => "<=",
                Cmp::Ge => ">=",
                Cmp::Eq => "=",
            };
            let _ = writeln!(out, " {op} {}", c.rhs);
        }
        out.push_str("Bounds\n");
        for (i, v) in self.vars.iter().enumerate() {
            if v.kind != VarKind::Binary || v.lo == v.hi {
                let _ = writeln!(out, " {} <= {} <= {}", v.lo, name(VarId(i)), v.hi);
            }
        }
        let generals: Vec<String> = (0..self.vars.len())
            .filter(|&i| self.vars[i].kind == VarKind::Integer)
            .map(|i| name(VarId(i)))
            .collect();
        if !generals.is_empty() {
            let _ = writeln!(out, "Generals\n {}", generals.join(" "));
        }
        let binaries: Vec<String> = (0..self.vars.len())
            .filter(|&i| self.vars[i].kind == VarKind::Binary)
            .map(|i| name(VarId(i)))
            .collect();
        if !binaries.is_empty() {
            let _ = writeln!(out, "Binaries\n {}", binaries.join(" "));
        }
        out.push_str("End\n");
        out
    }
}

fn lp_name(name: &str, i: usize) -> String {
    let clean: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if clean.is_empty() || clean.starts_with(|c: char| c.is_ascii_digit()) {
        format!("x{i}_{clean}")
    } else {
        format!("{clean}_{i}")
    }
}

fn write_terms(out: &mut String, terms: &[(VarId, i64)], name: &impl Fn(VarId) -> String) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for &(v, a) in terms {
        let sign = if a < 0 { '-' } else { '+' };
        if a.abs() == 1 {
            let _ = write!(out, " {sign} {}", name(v));
        } else {
            let _ = write!(out, " {sign} {} {}", a.abs(), name(v));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_and_complete() {
        let mut m = MilpModel::new();
        let x = m.add_binary("x", 3);
        let y = m.add_binary("y", 2);
        let w = m.add_continuous("w", 0, 100, 1);
        m.add_constraint(vec![(x, 1), (y, 1)], Cmp::Ge, 1);
        m.add_aux_lower_bound(w, 1, vec![(x, 5)], 0);
        m.add_aux_lower_bound(w, 1, vec![(y, 7)], 0);
        let v = m.complete(&[Some(1.0), Some(0.0), None]);
        assert_eq!(v, vec![1.0, 0.0, 5.0]);
        assert!(m.check(&v).is_ok());
        assert_eq!(m.objective_value(&v), 8.0);
        assert!(m.check(&[0.0, 0.0, 0.0]).is_err());
        assert!(m.check(&[1.0, 0.0, 4.0]).is_err());
    }

    #[test]
    fn lp_export_mentions_everything() {
        let mut m = MilpModel::new();
        let x = m.add_binary("comp[0,1,2]", 3);
        let h = m.add_var("h", VarKind::Integer, 0, 9, 1);
        m.add_constraint(vec![(x, 2), (h, -1)], Cmp::Le, 0);
        let lp = m.to_lp();
        assert!(lp.starts_with("Minimize"));
        assert!(lp.contains("c0: + 2 comp_0_1_2__0 - h_1 <= 0"));
        assert!(lp.contains("Generals\n h_1"));
        assert!(lp.contains("Binaries\n comp_0_1_2__0"));
        assert!(lp.trim_end().ends_with("End"));
    }

    #[test]
    fn malformed_is_reported() {
        let mut m = MilpModel::new();
        m.add_var("x", VarKind::Integer, 2, 1, 0);
        assert!(matches!(m.validate(), Err(Error::MalformedModel(_))));
    }
}
