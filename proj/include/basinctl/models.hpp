#pragma once

#include "basinctl/model.hpp"
#include "basinctl/types.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace basinctl {

/// Bistable scalar model  x' = x - x^3 - alpha*(x - x_ref)  with linear
/// stabilizing feedback centred at the stable root x_ref (+1 or -1).
/// Single controllable parameter alpha.
ParamModel make_model_1d(double x_ref = 1.0);

/// Two-dimensional gradient system
///   x' = -x^nx + alpha_x tanh(x) - y + u_x
///   y' = -y^ny + alpha_y tanh(y) - x + u_y
/// with fixed odd exponents (defaults 3 and 5) and controllable parameters
/// pi = (alpha_x, alpha_y, u_x, u_y).
ParamModel make_model_2d(int nx = 3, int ny = 5);

/// Nominal parameters of the 2D model.
Vec model_2d_default_parameters();

/// The potential V with F = -grad V for the 2D model.
double potential_2d(double x, double y, const Vec& pi, int nx = 3, int ny = 5);

// ---------------------------------------------------------------------------
// EMT regulatory network (4 states S, E, N, P)
// ---------------------------------------------------------------------------

/// Named parameter set for the EMT network: 11 interaction strengths,
/// 16 Hill half-activations, 4 source terms, and the shared Hill exponent p.
/// p is structural (not controllable) unless include_p is set on the model.
struct EmtParams {
  std::array<double, 11> alpha{};
  std::array<double, 16> k{};
  double beta_S = 0.0, beta_E = 0.0, beta_N = 0.0, beta_P = 0.0;
  double p = 4.0;

  Vec to_vector(bool include_p = false) const;
  static EmtParams from_vector(const Vec& pi, double p_fixed = 4.0, bool include_p = false);

  /// Upper bound of the trapping box: x_i' < 0 whenever x_i exceeds this.
  Vec trapping_bounds() const;

  /// Phenotype thresholds: per-variable mean of the half-activations through
  /// which that variable acts as a Hill input.
  Vec phenotype_thresholds() const;
};

/// Shipped calibrated defaults: census of 3 stable + 3 saddle + 1 unstable
/// with Table-consistent epithelial / senescent / mesenchymal signatures.
EmtParams emt_default_params();
Vec emt_default_parameters(bool include_p = false);

ParamModel make_model_emt(const EmtParams& base = emt_default_params(), bool include_p = false);

/// Phenotype names matched by thresholding a state against an EmtParams'
/// phenotype thresholds; "other" when no Table pattern matches.
std::string emt_phenotype_label(const Vec& x, const EmtParams& params);

// ---------------------------------------------------------------------------
// 4-variable boolean reduction
// ---------------------------------------------------------------------------

/// State (S, E, N, P) packed little-endian: bit 0 = S ... bit 3 = P.
using BoolState = std::uint8_t;

constexpr BoolState kBooleanEpithelial = 0b0110;  // (S,E,N,P) = (0,1,1,0)
constexpr BoolState kBooleanSenescent = 0b1110;   // (0,1,1,1)
constexpr BoolState kBooleanMesenchymal = 0b0101; // (1,0,1,0)

BoolState boolean_pack(bool S, bool E, bool N, bool P);
std::array<bool, 4> boolean_unpack(BoolState s);
std::string boolean_to_string(BoolState s);

/// Synchronous application of the four update rules.
BoolState boolean_step(BoolState s);

struct BooleanAttractor {
  std::vector<BoolState> cycle; // length 1 = fixed point; canonical rotation
  int basin_size = 0;           // states (incl. the cycle) that reach it
  bool is_fixed_point() const { return cycle.size() == 1; }
};

/// Exhaustive enumeration of attractors of the synchronous dynamics over all
/// 16 states.
std::vector<BooleanAttractor> boolean_attractors();

/// Fixed-point check of the three named phenotype states against the update
/// rules; `image` records where each state actually maps.
struct BooleanReferenceCheck {
  std::string name;
  BoolState state;
  BoolState image;
  bool is_fixed_point;
};
std::vector<BooleanReferenceCheck> boolean_reference_checks();

}  // namespace basinctl
