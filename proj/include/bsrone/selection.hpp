#pragma once

// TOPSIS-style ranking of candidates for super-node promotion.
//
// Candidates are scored on four benefit criteria, in this order: bandwidth,
// time on the network, exchange headroom (K+ minus the node's ID-exchange
// count) and willingness to cooperate. The closeness value
//
//   C_i = E_i- / (E_i- + E_i+)
//
// lies in [0, 1]; E_i+ and E_i- are Euclidean distances of the weighted,
// column-normalized row to the weighted upper and lower bounds, where the
// bounds are normalized by dividing through by the upper bound.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "bsrone/geometry.hpp"

namespace bsrone {

inline constexpr std::size_t kCriteria = 4;
using CriteriaVector = std::array<double, kCriteria>;

enum class Criterion : std::size_t { bandwidth = 0, time_on_network = 1, id_exchanges = 2, willingness = 3 };

std::string_view criterion_name(std::size_t index);

class CriteriaWeights {
 public:
  /// Each weight in [0, 1], summing to 1 within 1e-9.
  explicit CriteriaWeights(const CriteriaVector& w);

  const CriteriaVector& values() const noexcept { return w_; }
  double operator[](std::size_t i) const { return w_[i]; }

 private:
  CriteriaVector w_;
};

struct CriteriaBounds {
  CriteriaVector upper;  ///< B+, T+, K+, W+
  CriteriaVector lower;  ///< B-, T-, K-, W-

  /// lower <= upper, upper > 0, willingness bounds integral in [0, 10].
  void validate() const;
};

/// Bounds as seen after the exchange count is turned into a benefit:
/// the ideal becomes K+ - K- and the anti-ideal 0.
CriteriaBounds benefit_bounds(const CriteriaBounds& raw);

struct AttributeVector {
  double bandwidth = 0.0;
  double time_on_network = 0.0;  ///< seconds / simulation ticks
  std::uint32_t id_exchanges = 0;
  std::uint32_t willingness = 0;  ///< 0..10

  void validate() const;

  friend bool operator==(const AttributeVector&, const AttributeVector&) = default;
};

/// N candidates by 4 benefit criteria.
struct DecisionMatrix {
  std::vector<CriteriaVector> rows;
};

/// Exchange count k enters as max(K+ - k, 0) so that larger is better.
DecisionMatrix build_decision_matrix(std::span<const AttributeVector> candidates, const CriteriaBounds& raw_bounds);

enum class ZeroColumnPolicy {
  reject,   ///< throw normalization_error
  neutral,  ///< the column normalizes to zeros and cannot discriminate
};

enum class TopsisVariant {
  weighted,  ///< distances over w_j * a_ij against weighted bounds
  literal,   ///< distances over a_ij against unweighted bounds
};

struct TopsisOptions {
  TopsisVariant variant = TopsisVariant::weighted;
  ZeroColumnPolicy zero_columns = ZeroColumnPolicy::reject;
};

/// a_ij = d_ij / sqrt(sum_i d_ij^2).
std::vector<CriteriaVector> normalize(const DecisionMatrix& d, ZeroColumnPolicy policy = ZeroColumnPolicy::reject);

struct Closeness {
  std::vector<double> values;
  /// Rows with E+ + E- == 0 (only possible when upper == lower); reported as C = 1.
  std::vector<std::size_t> degenerate_rows;
};

Closeness score(const DecisionMatrix& d, const CriteriaWeights& w, const CriteriaBounds& bounds,
                const TopsisOptions& options = {});

/// Indices by descending closeness; ties go to the lower index.
std::vector<std::size_t> rank(std::span<const double> closeness);

/// Indices by descending closeness; ties go to the lower node ID.
std::vector<std::size_t> rank(std::span<const double> closeness, std::span<const NodeId> ids);

}  // namespace bsrone
