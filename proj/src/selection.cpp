#include "bsrone/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bsrone/errors.hpp"

namespace bsrone {

namespace {

constexpr std::array<std::string_view, kCriteria> kNames = {"bandwidth", "time_on_network", "id_exchanges",
                                                             "willingness"};

bool integral_in(double v, double lo, double hi) { return v >= lo && v <= hi && std::floor(v) == v; }

}  // namespace

std::string_view criterion_name(std::size_t index) { return kNames.at(index); }

CriteriaWeights::CriteriaWeights(const CriteriaVector& w) : w_(w) {
  double sum = 0.0;
  for (std::size_t j = 0; j < kCriteria; ++j) {
    if (!(w[j] >= 0.0 && w[j] <= 1.0)) {
      throw domain_error("weight for " + std::string(criterion_name(j)) + " outside [0, 1]");
    }
    sum += w[j];
  }
  if (std::abs(sum - 1.0) > 1e-9) throw domain_error("criteria weights must sum to 1");
}

void CriteriaBounds::validate() const {
  for (std::size_t j = 0; j < kCriteria; ++j) {
    const std::string name(criterion_name(j));
    if (!(upper[j] > 0.0)) throw domain_error("upper bound for " + name + " must be positive");
    if (!(lower[j] <= upper[j])) throw domain_error("lower bound for " + name + " exceeds upper bound");
  }
  const auto w = static_cast<std::size_t>(Criterion::willingness);
  if (!integral_in(upper[w], 0, 10) || !integral_in(lower[w], 0, 10)) {
    throw domain_error("willingness bounds must be integers in [0, 10]");
  }
}

CriteriaBounds benefit_bounds(const CriteriaBounds& raw) {
  CriteriaBounds out = raw;
  const auto k = static_cast<std::size_t>(Criterion::id_exchanges);
  out.upper[k] = raw.upper[k] - raw.lower[k];
  out.lower[k] = 0.0;
  return out;
}

void AttributeVector::validate() const {
  if (!(bandwidth >= 0.0)) throw domain_error("bandwidth must be non-negative");
  if (!(time_on_network >= 0.0)) throw domain_error("time on network must be non-negative");
  if (willingness > 10) throw domain_error("willingness must be in [0, 10]");
}

DecisionMatrix build_decision_matrix(std::span<const AttributeVector> candidates, const CriteriaBounds& raw_bounds) {
  const double k_max = raw_bounds.upper[static_cast<std::size_t>(Criterion::id_exchanges)];
  DecisionMatrix d;
  d.rows.reserve(candidates.size());
  for (const auto& a : candidates) {
    a.validate();
    d.rows.push_back({a.bandwidth, a.time_on_network, std::max(k_max - static_cast<double>(a.id_exchanges), 0.0),
                      static_cast<double>(a.willingness)});
  }
  return d;
}

std::vector<CriteriaVector> normalize(const DecisionMatrix& d, ZeroColumnPolicy policy) {
  if (d.rows.empty()) throw domain_error("decision matrix needs at least one candidate");
  CriteriaVector norm{};
  for (const auto& row : d.rows) {
    for (std::size_t j = 0; j < kCriteria; ++j) {
      if (!(row[j] >= 0.0) || !std::isfinite(row[j])) throw domain_error("decision matrix entries must be finite and >= 0");
      norm[j] += row[j] * row[j];
    }
  }
  for (std::size_t j = 0; j < kCriteria; ++j) {
    norm[j] = std::sqrt(norm[j]);
    if (norm[j] == 0.0 && policy == ZeroColumnPolicy::reject) {
      throw normalization_error("criterion " + std::string(criterion_name(j)) + " is zero for every candidate", j);
    }
  }
  std::vector<CriteriaVector> a(d.rows.size());
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    for (std::size_t j = 0; j < kCriteria; ++j) a[i][j] = norm[j] == 0.0 ? 0.0 : d.rows[i][j] / norm[j];
  }
  return a;
}

Closeness score(const DecisionMatrix& d, const CriteriaWeights& w, const CriteriaBounds& bounds,
                const TopsisOptions& options) {
  bounds.validate();
  const auto a = normalize(d, options.zero_columns);
  const bool weighted = options.variant == TopsisVariant::weighted;

  CriteriaVector ideal{};
  CriteriaVector anti{};
  for (std::size_t j = 0; j < kCriteria; ++j) {
    const double scale = weighted ? w[j] : 1.0;
    ideal[j] = scale;  // q+/q+ = 1
    anti[j] = scale * (bounds.lower[j] / bounds.upper[j]);
  }

  Closeness out;
  out.values.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    double to_ideal = 0.0;
    double to_anti = 0.0;
    for (std::size_t j = 0; j < kCriteria; ++j) {
      const double v = weighted ? w[j] * a[i][j] : a[i][j];
      to_ideal += (v - ideal[j]) * (v - ideal[j]);
      to_anti += (v - anti[j]) * (v - anti[j]);
    }
    const double e_plus = std::sqrt(to_ideal);
    const double e_minus = std::sqrt(to_anti);
    if (e_plus + e_minus == 0.0) {
      out.degenerate_rows.push_back(i);
      out.values.push_back(1.0);
    } else {
      out.values.push_back(e_minus / (e_minus + e_plus));
    }
  }
  return out;
}

std::vector<std::size_t> rank(std::span<const double> closeness) {
  std::vector<std::size_t> order(closeness.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return closeness[l] > closeness[r]; });
  return order;
}

std::vector<std::size_t> rank(std::span<const double> closeness, std::span<const NodeId> ids) {
  if (ids.size() != closeness.size()) throw domain_error("rank needs one id per closeness value");
  std::vector<std::size_t> order(closeness.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    if (closeness[l] != closeness[r]) return closeness[l] > closeness[r];
    return ids[l] < ids[r];
  });
  return order;
}

}  // namespace bsrone
