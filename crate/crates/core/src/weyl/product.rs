use super::series::FormalSeries;

/// A bilinear associative product on series of one model.
///
/// Implementations panic on model mismatch; callers validate models up front.
pub trait SeriesProduct: Sync {
    fn product(&self, a: &FormalSeries, b: &FormalSeries) -> FormalSeries;

    /// Graded commutator `ab − (−1)^{|a||b|} ba` on form-homogeneous pieces.
    fn bracket(&self, a: &FormalSeries, b: &FormalSeries) -> FormalSeries {
        let mut out = FormalSeries::zero(*a.model());
        for (p, ap) in a.form_components() {
            for (q, bq) in b.form_components() {
                let ab = self.product(&ap, &bq);
                let ba = self.product(&bq, &ap);
                out = if p * q % 2 == 1 { &(&out + &ab) + &ba } else { &(&out + &ab) - &ba };
            }
        }
        out
    }
}

/// The graded-commutative product of forms with series coefficients.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pointwise;

impl SeriesProduct for Pointwise {
    fn product(&self, a: &FormalSeries, b: &FormalSeries) -> FormalSeries {
        a * b
    }
}
