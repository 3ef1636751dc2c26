//! Built-in example: `P = ℝ₊ × SO(3)` with a radially warped bi-invariant
//! metric, `V = ℝ³` carrying the adjoint representation.
//!
//! `Q = (r, q¹, q², q³)`, `ds² = dr² + h(r)|u(q) dq|²` with `h = 1 + r²`,
//! `F(Q, a) = (r, q·a)`, `V = ½r² + ½|f|²`, gauge `χ^α = q^α`.

use crate::error::Result;
use crate::lie_group::LieGroup;
use crate::linalg::Mat;
use crate::sampling::SampleBox;
use crate::scalar::Scalar;

use super::MechanicalSystem;

#[derive(Clone, Debug)]
pub struct So3Warped {
    group: LieGroup,
    metric_v: Mat<f64>,
    generators: Vec<Mat<f64>>,
    sample_box: SampleBox,
}

impl So3Warped {
    pub fn new() -> Self {
        let group = LieGroup::so3();
        let generators = group.realization().iter().map(|e| -e).collect();
        So3Warped {
            group,
            metric_v: Mat::identity(3),
            generators,
            sample_box: SampleBox {
                q: vec![(0.5, 1.5), (-0.6, 0.6), (-0.6, 0.6), (-0.6, 0.6)],
                f: vec![(-1.0, 1.0); 3],
                group_radius: 0.8,
            },
        }
    }

    /// Warp factor `h(r)`.
    pub fn warp<T: Scalar>(r: T) -> T {
        T::one() + r * r
    }
}

impl Default for So3Warped {
    fn default() -> Self {
        Self::new()
    }
}

impl MechanicalSystem for So3Warped {
    fn name(&self) -> &str {
        "so3-warped"
    }

    fn group(&self) -> &LieGroup {
        &self.group
    }

    fn dim_p(&self) -> usize {
        4
    }

    fn dim_v(&self) -> usize {
        3
    }

    fn metric_v(&self) -> &Mat<f64> {
        &self.metric_v
    }

    fn rep_generators(&self) -> &[Mat<f64>] {
        &self.generators
    }

    fn sample_box(&self) -> &SampleBox {
        &self.sample_box
    }

    fn metric_p<T: Scalar>(&self, q: &[T]) -> Mat<T> {
        let u = self.group.u(&q[1..4]);
        let block = u.transpose().matmul(&u).scale(Self::warp(q[0]));
        Mat::block_diag(&Mat::identity(1), &block)
    }

    fn action<T: Scalar>(&self, q: &[T], a: &[T]) -> Result<Vec<T>> {
        let mut out = vec![q[0]];
        out.extend(self.group.multiply(&q[1..4], a)?);
        Ok(out)
    }

    fn potential<T: Scalar>(&self, q: &[T], f: &[T]) -> T {
        let half = T::from_f64(0.5);
        half * q[0] * q[0] + half * f.iter().map(|&x| x * x).sum::<T>()
    }

    fn gauge<T: Scalar>(&self, q: &[T]) -> Vec<T> {
        q[1..4].to_vec()
    }

    /// Closed form `K = [0; v(q)]`.
    fn killing_p<T: Scalar>(&self, q: &[T]) -> Result<Mat<T>> {
        let v = self.group.v(&q[1..4])?;
        Ok(Mat::vstack(&Mat::zeros(1, 3), &v))
    }
}
