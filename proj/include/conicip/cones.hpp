#pragma once

// Structure-of-arrays cone engine. Cones are grouped by family in the order
// Zero, Nonneg, SOC, Exp, Pow, PSD; Zero and Nonneg each form one aggregated
// block. Per-family batch operations treat the cones of a family
// independently, so they may run concurrently; every batch call returns
// only after all its cones are done.

#include "conicip/barriers.hpp"
#include "conicip/problem.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace conicip {

struct ConeBlock {
  int offset = 0;
  int dim = 0;
};

class ConeSet {
 public:
  ConeSet() = default;
  /// `cones` must already be in family order (see reorder_cones); a Zero or
  /// Nonneg family may hold several cones, they are aggregated here.
  explicit ConeSet(const std::vector<ConeSpec>& cones, int threads = 0);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] int threads() const { return threads_; }
  void set_threads(int threads) { threads_ = threads < 1 ? 1 : threads; }

  ConeBlock zero;
  ConeBlock nonneg;
  std::vector<ConeBlock> soc;
  std::vector<ConeBlock> exp;
  std::vector<ConeBlock> pow;
  std::vector<double> pow_alpha;
  std::vector<ConeBlock> psd;
  std::vector<int> psd_side;

  /// Blocks whose scaling matrix is dense (SOC, Exp, Pow, PSD), in order.
  [[nodiscard]] std::vector<ConeBlock> dense_blocks() const;
  /// Number of stored H values: one per Zero/Nonneg row plus the upper
  /// triangle of every dense block (row-major within the block).
  [[nodiscard]] int h_value_count() const;

 private:
  int dim_ = 0;
  int degree_ = 0;
  int threads_ = 1;
};

/// Sum of barrier degrees: Nonneg n, SOC 1, PSD side, Exp 3, Pow 3, Zero 0.
int degree(const ConeSet& cones);

struct InitialPoint {
  Vector s;
  Vector z;
};

/// Unit interior points: ones, e₁, identity, fixed Exp/Pow constants; Zero rows 0.
InitialPoint unit_init(const ConeSet& cones);

bool is_in_cone(const ConeSet& cones, const Vector& v, bool strict);
bool is_in_dual_cone(const ConeSet& cones, const Vector& v, bool strict);

/// Dual-side barrier f(z) summed over blocks (Zero contributes nothing).
/// Throws DomainError outside the strict interior of K*.
double barrier_value(const ConeSet& cones, const Vector& z);
Vector barrier_gradient(const ConeSet& cones, const Vector& z);

/// Scaling data for one iterate. Quantities indexed by row live in full
/// length-m vectors; per-cone matrices are stored family by family.
struct ScalingState {
  double mu = 1.0;
  /// Nonneg rows: W = diag(w), λ = w∘z. SOC rows: normalized scaling point w̄.
  Vector w;
  /// λ = Wz on Nonneg and SOC rows, svec(Λ) on PSD rows.
  Vector lambda;
  std::vector<double> soc_eta;
  std::vector<Eigen::MatrixXd> psd_R;
  std::vector<Eigen::MatrixXd> psd_Rinv;
  std::vector<Eigen::MatrixXd> psd_H;
  std::vector<barrier::Mat3> exp_H;
  std::vector<barrier::Mat3> exp_hess;  // ∇²f(z)
  std::vector<barrier::Vec3> exp_grad;  // ∇f(z)
  std::vector<char> exp_bfgs;           // false when the dual-scaling fallback was used
  std::vector<barrier::Mat3> pow_H;
  std::vector<barrier::Mat3> pow_hess;
  std::vector<barrier::Vec3> pow_grad;
  std::vector<char> pow_bfgs;
};

/// Nesterov-Todd scaling on Nonneg/SOC/PSD blocks, rank-4 BFGS scaling on
/// Exp/Pow blocks. The resulting H satisfies Hz = s blockwise.
/// Throws ScalingFailure when a block cannot be formed.
ScalingState update_scaling(const ConeSet& cones, const Vector& s, const Vector& z, double mu);

/// Blockwise H·v (Zero rows map to 0).
Vector apply_H(const ConeSet& cones, const ScalingState& state, const Vector& v);

/// Writes the H values in the layout described by ConeSet::h_value_count.
void fill_H_values(const ConeSet& cones, const ScalingState& state, std::span<double> out);

/// Dense H for one dense block (index into dense_blocks()).
Eigen::MatrixXd dense_H_block(const ConeSet& cones, const ScalingState& state, int dense_index);

struct StepLengthRequest {
  const Vector* z = nullptr;
  const Vector* s = nullptr;
  double tau = 1.0;
  double kappa = 1.0;
  const Vector* dz = nullptr;
  const Vector* ds = nullptr;
  double dtau = 0.0;
  double dkappa = 0.0;
  double alpha_max = 1.0;
  double backtrack = 0.8;
};

inline constexpr double kMinStepLength = 1e-11;

/// Largest α in (0, α_max] keeping (z,s,τ,κ) + α·Δ interior: closed form for
/// Nonneg/SOC/PSD/τ/κ, then backtracking for Exp/Pow. Throws StepTooSmall.
double step_length(const ConeSet& cones, const StepLengthRequest& req);

/// Right-hand side d_s of the combined step.
Vector combined_ds(const ConeSet& cones, const ScalingState& state, const Vector& s, const Vector& z,
                   const Vector& dz_aff, const Vector& ds_aff, double sigma, double mu);

/// ν_i / ⟨∇f*(s_i), ∇f(z_i)⟩ ≥ βμ on every non-Zero cone (every Nonneg
/// coordinate counts as a cone of degree 1). Throws DomainError outside the interior.
bool neighborhood_ok(const ConeSet& cones, const Vector& s, const Vector& z, double mu, double beta);

/// t_i² - ‖u_i‖² for every SOC block, with ‖u‖² summed in a fixed order:
/// left-to-right within chunks of 8 entries, then pairwise up a binary tree.
Vector soc_residuals_batch(const ConeSet& cones, const Vector& x);
/// The same fixed-order ‖u‖² on one vector.
double tree_norm2(std::span<const double> u);

struct ShadowIterates {
  Vector s_shadow;  // -∇f(z) on nonsymmetric blocks
  Vector z_shadow;  // -∇f*(s) on nonsymmetric blocks
  double mu_shadow = 0.0;
};

/// Shadow iterates on Exp/Pow blocks (other rows are left 0), μ̃ = ⟨s̃,z̃⟩/ν_nonsym.
ShadowIterates shadow_iterates(const ConeSet& cones, const Vector& s, const Vector& z);

// Small helpers shared with the tests.
namespace svec {
int dim(int side);
Eigen::MatrixXd to_matrix(std::span<const double> v, int side);
void from_matrix(const Eigen::MatrixXd& m, std::span<double> out);
}  // namespace svec

}  // namespace conicip
