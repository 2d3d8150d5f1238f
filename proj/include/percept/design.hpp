#pragma once

#include <string>
#include <vector>

#include "percept/stats.hpp"

namespace percept {

// Column-wise builder for a DesignMatrix. Categorical predictors expand into
// reference-coded indicators "name[level]"; the reference level is the most
// frequent one (ties: lexicographically smallest).
class DesignBuilder {
 public:
  explicit DesignBuilder(std::size_t rows, bool intercept = true);

  DesignBuilder& numeric(const std::string& name, const std::vector<double>& values);
  DesignBuilder& categorical(const std::string& name, const std::vector<std::string>& levels);

  // Reference level chosen for a categorical column added earlier.
  const std::string& reference_level(const std::string& name) const;

  DesignMatrix build() const;

 private:
  std::size_t rows_;
  bool intercept_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  std::vector<std::pair<std::string, std::string>> references_;
};

}  // namespace percept
