#pragma once

namespace polecraft::tol {

// Floor for eigenvalues that must support a unit-norm renormalization.
inline constexpr double degeneracy_floor = 1e-12;

// Reject a rotated candidate whose shorter column is pathologically small
// relative to the source direction.
inline constexpr double small_column_ratio = 1e-6;

// Singular-value ratio below which the real and imaginary parts of a
// complex direction count as linearly dependent.
inline constexpr double dependence_ratio = 1e-8;

// Allowed ||X^T X - I||_F per assigned column before the solve aborts.
inline constexpr double ortho_loss_factor = 1e-8;

// Smallest usable singular value in the balanced pair strategy.
inline constexpr double sigma_floor = 1e-12;

// Relative tolerance when pairing a pole with its conjugate.
inline constexpr double conjugate_match = 1e-10;

// Additive slack when auditing the per-step objective bounds.
inline constexpr double bound_slack = 1e-8;

// Validation thresholds (relative where the residual is relative).
inline constexpr double validate_schur = 1e-8;
inline constexpr double validate_orth_factor = 1e-10;  // scaled by n
inline constexpr double validate_constraint = 1e-8;
inline constexpr double validate_identity = 1e-8;

}  // namespace polecraft::tol
