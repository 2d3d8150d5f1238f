#include "percept/design.hpp"

#include <map>

#include "percept/error.hpp"

namespace percept {

DesignBuilder::DesignBuilder(std::size_t rows, bool intercept)
    : rows_(rows), intercept_(intercept) {}

DesignBuilder& DesignBuilder::numeric(const std::string& name, const std::vector<double>& values) {
  if (values.size() != rows_) {
    throw Error(ErrorCode::kInvalidParameter, "column '" + name + "' has wrong length");
  }
  names_.push_back(name);
  columns_.push_back(values);
  return *this;
}

DesignBuilder& DesignBuilder::categorical(const std::string& name,
                                          const std::vector<std::string>& levels) {
  if (levels.size() != rows_) {
    throw Error(ErrorCode::kInvalidParameter, "column '" + name + "' has wrong length");
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& level : levels) ++counts[level];
  std::string reference;
  std::size_t best = 0;
  for (const auto& [level, count] : counts) {
    if (count > best) {
      best = count;
      reference = level;
    }
  }
  references_.emplace_back(name, reference);
  for (const auto& [level, count] : counts) {
    if (level == reference) continue;
    std::vector<double> indicator(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) indicator[i] = levels[i] == level ? 1.0 : 0.0;
    names_.push_back(name + "[" + level + "]");
    columns_.push_back(std::move(indicator));
  }
  return *this;
}

const std::string& DesignBuilder::reference_level(const std::string& name) const {
  for (const auto& [column, level] : references_) {
    if (column == name) return level;
  }
  throw Error(ErrorCode::kInvalidParameter, "no categorical column '" + name + "'");
}

DesignMatrix DesignBuilder::build() const {
  DesignMatrix design;
  design.has_intercept = intercept_;
  const auto p = static_cast<Eigen::Index>(columns_.size() + (intercept_ ? 1 : 0));
  design.values.resize(static_cast<Eigen::Index>(rows_), p);
  Eigen::Index col = 0;
  if (intercept_) {
    design.names.push_back(kInterceptName);
    design.values.col(col++).setOnes();
  }
  for (std::size_t c = 0; c < columns_.size(); ++c, ++col) {
    design.names.push_back(names_[c]);
    for (std::size_t i = 0; i < rows_; ++i) {
      design.values(static_cast<Eigen::Index>(i), col) = columns_[c][i];
    }
  }
  return design;
}

}  // namespace percept
