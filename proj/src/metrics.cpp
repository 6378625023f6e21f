#include "woodnet/metrics.hpp"

#include <algorithm>

#include "woodnet/error.hpp"

namespace woodnet {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> class_names)
    : names_(std::move(class_names)), counts_(names_.size() * names_.size(), 0) {
  if (names_.empty()) throw ConfigError("confusion matrix needs at least one class");
}

void ConfusionMatrix::accumulate(std::size_t truth, std::size_t predicted) {
  if (truth >= size() || predicted >= size())
    throw InputError("confusion matrix label out of range: true " + std::to_string(truth) +
                     ", predicted " + std::to_string(predicted) + ", classes " +
                     std::to_string(size()));
  ++counts_[truth * size() + predicted];
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.names_ != names_) throw ConfigError("cannot merge confusion matrices over different classes");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::uint64_t ConfusionMatrix::count(std::size_t truth, std::size_t predicted) const {
  return counts_.at(truth * size() + predicted);
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < size(); ++p) s += count(truth, p);
  return s;
}

std::uint64_t ConfusionMatrix::column_sum(std::size_t predicted) const {
  std::uint64_t s = 0;
  for (std::size_t t = 0; t < size(); ++t) s += count(t, predicted);
  return s;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < size(); ++i) s += count(i, i);
  return s;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t s = 0;
  for (auto c : counts_) s += c;
  return s;
}

double ConfusionMatrix::accuracy() const {
  const auto n = total();
  return n == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(n);
}

nlohmann::json ConfusionMatrix::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t t = 0; t < size(); ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t p = 0; p < size(); ++p) row.push_back(count(t, p));
    rows.push_back(row);
  }
  return rows;
}

namespace {

double ratio_or_one(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::size_t other_class_index(const std::vector<std::string>& class_names) {
  const auto it = std::find(class_names.begin(), class_names.end(), "Other");
  return it != class_names.end() ? static_cast<std::size_t>(it - class_names.begin())
                                 : class_names.size() - 1;
}

PrecisionRecall access_control_precision_recall(const ConfusionMatrix& cm, std::size_t other_class) {
  if (cm.size() < 2) throw ConfigError("access-control metrics need at least two classes");
  if (other_class >= cm.size()) throw ConfigError("other-class index out of range");
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t t = 0; t < cm.size(); ++t)
    for (std::size_t p = 0; p < cm.size(); ++p) {
      const bool known = t != other_class, accepted = p != other_class;
      if (known && accepted) tp += cm.count(t, p);
      if (!known && accepted) fp += cm.count(t, p);
      if (known && !accepted) fn += cm.count(t, p);
    }
  return {ratio_or_one(tp, tp + fp), ratio_or_one(tp, tp + fn)};
}

std::vector<PrecisionRecall> per_class_rates(const ConfusionMatrix& cm) {
  std::vector<PrecisionRecall> rates;
  for (std::size_t c = 0; c < cm.size(); ++c)
    rates.push_back({ratio_or_one(cm.count(c, c), cm.column_sum(c)),
                     ratio_or_one(cm.count(c, c), cm.row_sum(c))});
  return rates;
}

nlohmann::json metrics_report(double loss, const ConfusionMatrix& cm) {
  const auto pr = access_control_precision_recall(cm, other_class_index(cm.class_names()));
  nlohmann::json per_class = nlohmann::json::array();
  const auto rates = per_class_rates(cm);
  for (std::size_t c = 0; c < cm.size(); ++c)
    per_class.push_back({{"class", cm.class_names()[c]},
                         {"precision", rates[c].precision},
                         {"recall", rates[c].recall}});
  return {{"loss", loss},
          {"accuracy", cm.accuracy()},
          {"precision", pr.precision},
          {"recall", pr.recall},
          {"confusion", cm.to_json()},
          {"class_names", cm.class_names()},
          {"per_class", per_class}};
}

}  // namespace woodnet
