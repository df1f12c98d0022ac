//! The hierarchy of geodesically equivalent metrics built from `L = B − x ⊗ x`,
//! the tensors `S_l`, the quadratic integrals `J_i^k` and Maupertuis rescaling.

mod integrals;
mod metric;
mod report;
mod tensors;

pub use integrals::{independence_measure, poisson_bracket, poisson_bracket_fd, IntegralJ, PhaseFunction, PhasePoint};
pub use metric::{maupertuis_scale, Branch, HierarchyMetric, Maupertuis, Metric};
pub use report::{hierarchy_check, random_interior_point, render_rows, CheckSizes, HierarchyRow};
pub(crate) use tensors::leverrier as leverrier_generic;
pub use tensors::{
    char_tensors, char_tensors_exact, closed_form_adjugate, closed_form_deviation, s_tensor_gradients, STensorSet,
};

use nalgebra::{DMatrix, DVector};

use crate::confocal::ConfocalFamily;
use crate::error::{Error, Result};

/// Family together with the hierarchy index `k` (any sign).
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyContext {
    family: ConfocalFamily,
    k: i32,
}

impl HierarchyContext {
    pub fn new(family: ConfocalFamily, k: i32) -> Self {
        HierarchyContext { family, k }
    }

    pub fn family(&self) -> &ConfocalFamily {
        &self.family
    }

    pub fn k(&self) -> i32 {
        self.k
    }
}

/// `g_k = L^k` or `ḡ_k = Π L^k` at `x`, checked positive definite.
pub fn metric_at(ctx: &HierarchyContext, x: &DVector<f64>, branch: Branch) -> Result<DMatrix<f64>> {
    let g = HierarchyMetric::new(ctx.clone(), branch).matrix(x)?;
    if g.clone().cholesky().is_none() {
        let f = crate::confocal::model_defect(&ctx.family, x);
        return Err(Error::OutsideModel { f });
    }
    Ok(g)
}
