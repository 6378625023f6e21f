#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace woodnet {

// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> class_names);

  void accumulate(std::size_t truth, std::size_t predicted);
  // Entrywise sum; class names must agree.
  void merge(const ConfusionMatrix& other);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& class_names() const { return names_; }
  std::uint64_t count(std::size_t truth, std::size_t predicted) const;
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t column_sum(std::size_t predicted) const;
  std::uint64_t trace() const;
  std::uint64_t total() const;
  // trace / total; 0 when empty.
  double accuracy() const;

  nlohmann::json to_json() const;

 private:
  std::vector<std::string> names_;
  std::vector<std::uint64_t> counts_;
};

struct PrecisionRecall {
  double precision = 1.0;
  double recall = 1.0;
};

// Index of the "Other" class, else the last class.
std::size_t other_class_index(const std::vector<std::string>& class_names);

// Binary collapse for access control: predicting any known person is a
// positive, predicting `other_class` a negative. A zero denominator yields 1.
PrecisionRecall access_control_precision_recall(const ConfusionMatrix& cm, std::size_t other_class);

// One-vs-rest rates per class, same zero-denominator rule.
std::vector<PrecisionRecall> per_class_rates(const ConfusionMatrix& cm);

// {loss, accuracy, precision, recall, confusion, class_names, per_class}
nlohmann::json metrics_report(double loss, const ConfusionMatrix& cm);

}  // namespace woodnet
