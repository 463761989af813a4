#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/data.hpp"
#include "core/model.hpp"

namespace adast {

// Rows are true classes, columns predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int k);

  void add(int truth, int predicted);
  int64_t count(int truth, int predicted) const {
    return counts_[static_cast<size_t>(truth) * static_cast<size_t>(k_) + static_cast<size_t>(predicted)];
  }
  int64_t total() const { return total_; }
  int k() const { return k_; }

 private:
  int k_;
  int64_t total_ = 0;
  std::vector<int64_t> counts_;
};

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// trace / M
double accuracy(const ConfusionMatrix& cm);

// Mean per-class F1. A class with no true and no predicted samples scores 0
// and still counts in K.
double macro_f1(const ConfusionMatrix& cm);

std::vector<ClassScores> per_class_scores(const ConfusionMatrix& cm);

struct EvalResult {
  double acc = 0.0;
  double mf1 = 0.0;
  ConfusionMatrix cm{2};
};

// Eval-mode forward over the split in record order; predictions are the
// argmax of the averaged classifier pair, routed through the given domain
// path. The split must be fully labeled.
EvalResult evaluate(AdastModel& model, const DomainDataset& ds, SplitId split, DomainRole route,
                    int batch_size = 64);

// Per-class P/R/F1 table plus totals, human-readable.
std::string format_report(const EvalResult& result);
// Machine-readable counterpart: class,precision,recall,f1 rows + summary.
std::string report_csv(const EvalResult& result);

}  // namespace adast
