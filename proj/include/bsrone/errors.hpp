#pragma once

#include <stdexcept>
#include <string>

namespace bsrone {

/// Identifier or index outside the ring.
class range_error : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Operation requires scalable mode (sections) but the geometry has none.
class mode_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Argument violates a structural precondition (e.g. member outside cluster).
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A TOPSIS column has no nonzero entry.
class normalization_error : public std::domain_error {
 public:
  normalization_error(const std::string& what, std::size_t criterion)
      : std::domain_error(what), criterion_(criterion) {}
  std::size_t criterion() const noexcept { return criterion_; }

 private:
  std::size_t criterion_;
};

/// No table entry reduces the distance to the target.
class routing_failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Protocol precondition violated (e.g. id exchange between two heads).
class protocol_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed trace or candidate input.
class format_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bsrone
