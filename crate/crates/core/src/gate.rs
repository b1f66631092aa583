//! Hypothesis validation for the three solvability theorems (semilinear
//! Wiener, spatially homogeneous colored, super-linear). Every clause is an
//! exact floating-point comparison recorded with its operands so that a
//! verdict can be re-evaluated from the table alone.

use crate::noise::{dalang_check, CovarianceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
}

impl CmpOp {
    pub fn eval(&self, lhs: f64, rhs: f64) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub id: String,
    pub pass: bool,
    pub op: CmpOp,
    pub lhs: f64,
    pub rhs: f64,
}

impl Check {
    fn new(id: &str, op: CmpOp, lhs: f64, rhs: f64) -> Check {
        Check {
            id: id.to_string(),
            pass: op.eval(lhs, rhs),
            op,
            lhs,
            rhs,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GateVerdict {
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl GateVerdict {
    fn from_checks(checks: Vec<Check>) -> GateVerdict {
        GateVerdict {
            pass: checks.iter().all(|c| c.pass),
            checks,
        }
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }
}

/// Parameters proposed for a run. `s` may be `f64::INFINITY`; all formulas
/// take the limits d/2s -> 0 and 2s/(s-1) -> 2 in that case.
#[derive(Debug, Clone, Copy)]
pub struct ParameterSet {
    pub d: usize,
    pub alpha: f64,
    pub p: f64,
    pub theta: f64,
    pub gamma: f64,
    /// Super-linear growth exponent; 0 outside the super-linear setting.
    pub lambda: f64,
    pub s: f64,
    pub theta0: f64,
    pub domain_convex: bool,
    /// Isotropic operators lift the gamma restriction of the semilinear gate.
    pub isotropic_operator: bool,
    pub kernel: CovarianceSpec,
}

impl ParameterSet {
    pub fn theta_bar(&self) -> f64 {
        let inv2s = if self.s.is_infinite() {
            0.0
        } else {
            1.0 / (2.0 * self.s)
        };
        (-self.alpha / 2.0 + self.gamma + self.d as f64 * inv2s).max(-(self.d as f64) / 2.0)
    }
}

fn theta_window_checks(ps: &ParameterSet, checks: &mut Vec<Check>) {
    let d = ps.d as f64;
    if ps.domain_convex {
        checks.push(Check::new("theta > d-1 (convex)", CmpOp::Lt, d - 1.0, ps.theta));
        checks.push(Check::new(
            "theta < d-1+p (convex)",
            CmpOp::Lt,
            ps.theta,
            d - 1.0 + ps.p,
        ));
    } else {
        checks.push(Check::new(
            "theta > d-alpha/2 (general)",
            CmpOp::Lt,
            d - ps.alpha / 2.0,
            ps.theta,
        ));
        checks.push(Check::new(
            "theta < d-alpha/2+alpha*p/2 (general)",
            CmpOp::Lt,
            ps.theta,
            d - ps.alpha / 2.0 + ps.alpha * ps.p / 2.0,
        ));
    }
}

fn alpha_checks(ps: &ParameterSet, checks: &mut Vec<Check>) {
    checks.push(Check::new("alpha > 0", CmpOp::Lt, 0.0, ps.alpha));
    checks.push(Check::new("alpha < 2", CmpOp::Lt, ps.alpha, 2.0));
}

fn gamma_open_checks(ps: &ParameterSet, checks: &mut Vec<Check>) {
    checks.push(Check::new("gamma > 0", CmpOp::Lt, 0.0, ps.gamma));
    checks.push(Check::new(
        "gamma < alpha/2",
        CmpOp::Lt,
        ps.gamma,
        ps.alpha / 2.0,
    ));
}

// Dalang clause encoded so its pass bit is reproduced by lhs < rhs: the
// branch integral must be finite.
fn dalang_clause(id: &str, ps: &ParameterSet, s: f64, checks: &mut Vec<Check>) {
    match dalang_check(&ps.kernel, s, ps.gamma, ps.alpha, ps.d) {
        Ok(v) => checks.push(Check {
            id: id.to_string(),
            pass: v.pass,
            op: CmpOp::Lt,
            lhs: v.integral_estimate,
            rhs: f64::INFINITY,
        }),
        Err(_) => checks.push(Check {
            id: format!("{id} (parameters out of range)"),
            pass: false,
            op: CmpOp::Lt,
            lhs: f64::INFINITY,
            rhs: f64::INFINITY,
        }),
    }
}

/// Hypotheses of the semilinear Wiener-noise theorem.
pub fn validate_semilinear(ps: &ParameterSet) -> GateVerdict {
    let mut checks = Vec::new();
    alpha_checks(ps, &mut checks);
    checks.push(Check::new("p >= 2", CmpOp::Le, 2.0, ps.p));
    if ps.isotropic_operator {
        // Isotropic operator admits every gamma.
        checks.push(Check::new("gamma unrestricted (isotropic)", CmpOp::Le, 0.0, 0.0));
    } else {
        checks.push(Check::new("gamma >= 0", CmpOp::Le, 0.0, ps.gamma));
        checks.push(Check::new("gamma <= alpha", CmpOp::Le, ps.gamma, ps.alpha));
    }
    theta_window_checks(ps, &mut checks);
    GateVerdict::from_checks(checks)
}

/// Hypotheses of the spatially-homogeneous-noise theorem.
pub fn validate_colored(ps: &ParameterSet) -> GateVerdict {
    let mut checks = Vec::new();
    alpha_checks(ps, &mut checks);
    gamma_open_checks(ps, &mut checks);
    checks.push(Check::new("s > 1", CmpOp::Lt, 1.0, ps.s));
    let p_floor = if ps.s.is_infinite() {
        2.0
    } else {
        2.0 * ps.s / (ps.s - 1.0)
    };
    checks.push(Check::new("p >= 2s/(s-1)", CmpOp::Le, p_floor, ps.p));
    theta_window_checks(ps, &mut checks);
    let d = ps.d as f64;
    let theta0_bound = if ps.s.is_infinite() {
        f64::INFINITY
    } else {
        (2.0 * ps.s * ps.gamma + d).max(ps.s * (ps.alpha - d))
    };
    checks.push(Check::new(
        "theta0 < (2s*gamma+d) v s(alpha-d)",
        CmpOp::Lt,
        ps.theta0,
        theta0_bound,
    ));
    if ps.gamma > 0.0 && ps.gamma < ps.alpha / 2.0 && ps.s > 1.0 {
        dalang_clause("dalang(s,gamma)", ps, ps.s, &mut checks);
    }
    GateVerdict::from_checks(checks)
}

/// Hypotheses of the super-linear theorem. lambda = 0 removes the
/// lambda-divided bracket (the window only widens), mirroring the
/// compatibility remark.
pub fn validate_superlinear(ps: &ParameterSet) -> GateVerdict {
    let mut checks = Vec::new();
    alpha_checks(ps, &mut checks);
    gamma_open_checks(ps, &mut checks);
    checks.push(Check::new("lambda >= 0", CmpOp::Le, 0.0, ps.lambda));
    checks.push(Check::new("lambda < 1/2", CmpOp::Lt, ps.lambda, 0.5));
    let d = ps.d as f64;
    let p_floor = ((d + ps.alpha) / ps.gamma).min(2.0 / (1.0 - 2.0 * ps.lambda));
    checks.push(Check::new(
        "p > (d+alpha)/gamma ^ 2/(1-2lambda)",
        CmpOp::Lt,
        p_floor,
        ps.p,
    ));
    // Upper bound on theta: both sides of the minimum are reported.
    let bracket_bound = if ps.lambda == 0.0 {
        f64::INFINITY
    } else {
        let bracket = (ps.gamma * ps.p / ps.lambda)
            .max((ps.alpha - d) * ps.p / (2.0 * ps.lambda) - d * ps.p);
        d + ps.p - 1.0 - ps.alpha * ps.p / 2.0 + bracket
    };
    checks.push(Check::new(
        "theta < d+p-1-alpha*p/2+[gamma*p/lambda v ((alpha-d)p/2lambda-dp)]",
        CmpOp::Lt,
        ps.theta,
        bracket_bound,
    ));
    checks.push(Check::new(
        "theta < d+alpha*p/2-gamma*p",
        CmpOp::Lt,
        ps.theta,
        d + ps.alpha * ps.p / 2.0 - ps.gamma * ps.p,
    ));
    theta_window_checks(ps, &mut checks);
    // Noise admissibility: the Dalang-type condition with 2 lambda = 1/s.
    if ps.gamma > 0.0 && ps.gamma < ps.alpha / 2.0 && ps.lambda >= 0.0 && ps.lambda < 0.5 {
        let s_eff = if ps.lambda == 0.0 {
            f64::INFINITY
        } else {
            1.0 / (2.0 * ps.lambda)
        };
        dalang_clause("dalang(lambda,gamma)", ps, s_eff, &mut checks);
    }
    GateVerdict::from_checks(checks)
}

/// Supremum of the admissible super-linear exponent lambda for a kernel at
/// vanishing regularity gamma, located by bisection on the noise clause.
pub fn lambda_window_sup(kernel: &CovarianceSpec, alpha: f64, d: usize) -> f64 {
    let gamma_probe = 1e-9;
    let passes = |lambda: f64| {
        let s_eff = if lambda <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / (2.0 * lambda)
        };
        dalang_check(kernel, s_eff, gamma_probe, alpha, d)
            .map(|v| v.pass)
            .unwrap_or(false)
    };
    if !passes(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 0.5);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if passes(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Supremum of admissible gamma for a kernel at given s, by bisection.
pub fn gamma_window_sup(kernel: &CovarianceSpec, s: f64, alpha: f64, d: usize) -> f64 {
    let passes = |gamma: f64| {
        dalang_check(kernel, s, gamma, alpha, d)
            .map(|v| v.pass)
            .unwrap_or(false)
    };
    if !passes(1e-12) {
        return 0.0;
    }
    let (mut lo, mut hi) = (1e-12, alpha / 2.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if passes(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
