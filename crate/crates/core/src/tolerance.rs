/// Numerical cutoffs used to turn exact-arithmetic statements (rank equal to,
/// positive definite, residual equal to zero) into reproducible verdicts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Singular values `<= rank_rel * sigma_max` count as zero.
    pub rank_rel: f64,
    /// Edge vectors shorter than `coincident_rel * diameter` have no bearing.
    pub coincident_rel: f64,
    /// `lambda_min > pd_rel * lambda_max` declares a block positive definite.
    pub pd_rel: f64,
    /// Leader residual must stay below `feasibility_rel * ||L|| * ||p_l||`.
    pub feasibility_rel: f64,
    /// Allowed deviation of a bearing constraint from unit norm, and of a
    /// reverse bearing from the negated forward one.
    pub bearing_abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_rel: 1e-8,
            coincident_rel: 1e-12,
            pd_rel: 1e-10,
            feasibility_rel: 1e-8,
            bearing_abs: 1e-9,
        }
    }
}
