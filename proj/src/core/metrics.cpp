#include "core/metrics.hpp"

#include <iomanip>
#include <sstream>

namespace adast {

ConfusionMatrix::ConfusionMatrix(int k) : k_(k) {
  require(k >= 2, ErrorKind::InvalidArgument, "confusion matrix needs k >= 2");
  counts_.assign(static_cast<size_t>(k) * static_cast<size_t>(k), 0);
}

void ConfusionMatrix::add(int truth, int predicted) {
  require(truth >= 0 && truth < k_, ErrorKind::Label, "true label ", truth, " out of range [0, ",
          k_, ")");
  require(predicted >= 0 && predicted < k_, ErrorKind::Label, "prediction ", predicted,
          " out of range [0, ", k_, ")");
  ++counts_[static_cast<size_t>(truth) * static_cast<size_t>(k_) + static_cast<size_t>(predicted)];
  ++total_;
}

double accuracy(const ConfusionMatrix& cm) {
  require(cm.total() > 0, ErrorKind::InvalidArgument, "accuracy over an empty evaluation");
  int64_t trace = 0;
  for (int i = 0; i < cm.k(); ++i) trace += cm.count(i, i);
  return static_cast<double>(trace) / static_cast<double>(cm.total());
}

std::vector<ClassScores> per_class_scores(const ConfusionMatrix& cm) {
  std::vector<ClassScores> out(static_cast<size_t>(cm.k()));
  for (int i = 0; i < cm.k(); ++i) {
    int64_t tp = cm.count(i, i);
    int64_t row = 0, col = 0;
    for (int j = 0; j < cm.k(); ++j) {
      row += cm.count(i, j);
      col += cm.count(j, i);
    }
    const int64_t fp = col - tp;
    const int64_t fn = row - tp;
    ClassScores s;
    s.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    s.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    s.f1 = (s.precision + s.recall) > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    out[static_cast<size_t>(i)] = s;
  }
  return out;
}

double macro_f1(const ConfusionMatrix& cm) {
  require(cm.total() > 0, ErrorKind::InvalidArgument, "macro F1 over an empty evaluation");
  auto scores = per_class_scores(cm);
  double sum = 0.0;
  for (const auto& s : scores) sum += s.f1;
  return sum / static_cast<double>(cm.k());
}

EvalResult evaluate(AdastModel& model, const DomainDataset& ds, SplitId split, DomainRole route,
                    int batch_size) {
  auto indices = ds.split_indices(split);
  require(!indices.empty(), ErrorKind::InvalidArgument, "evaluate over empty ",
          split_name(split), " split");
  EvalResult result{0.0, 0.0, ConfusionMatrix(ds.k)};
  NoGradGuard ng;
  for (size_t start = 0; start < indices.size(); start += static_cast<size_t>(batch_size)) {
    const size_t end = std::min(indices.size(), start + static_cast<size_t>(batch_size));
    std::vector<size_t> chunk(indices.begin() + static_cast<ptrdiff_t>(start),
                              indices.begin() + static_cast<ptrdiff_t>(end));
    auto batch = assemble_batch(ds, chunk);
    auto out = model.forward(batch.signals, route, Phase::Eval);
    auto preds = argmax(out.probs, 1);
    for (size_t i = 0; i < chunk.size(); ++i) {
      const int truth = batch.labels[i];
      require(truth != kUnlabeled, ErrorKind::Label, "evaluate: unlabeled record in ",
              split_name(split), " split");
      result.cm.add(truth, static_cast<int>(preds[i]));
    }
  }
  result.acc = accuracy(result.cm);
  result.mf1 = macro_f1(result.cm);
  return result;
}

std::string format_report(const EvalResult& result) {
  std::ostringstream os;
  auto scores = per_class_scores(result.cm);
  os << "class  precision  recall     f1\n";
  os << std::fixed << std::setprecision(4);
  for (size_t c = 0; c < scores.size(); ++c) {
    os << std::setw(5) << c << "  " << std::setw(9) << scores[c].precision << "  " << std::setw(6)
       << scores[c].recall << "  " << std::setw(6) << scores[c].f1 << "\n";
  }
  os << "acc " << result.acc << "  mf1 " << result.mf1 << "  n " << result.cm.total() << "\n";
  return os.str();
}

std::string report_csv(const EvalResult& result) {
  std::ostringstream os;
  os.precision(17);
  os << "class,precision,recall,f1\n";
  auto scores = per_class_scores(result.cm);
  for (size_t c = 0; c < scores.size(); ++c) {
    os << c << ',' << scores[c].precision << ',' << scores[c].recall << ',' << scores[c].f1
       << "\n";
  }
  os << "acc," << result.acc << ",,\n";
  os << "mf1," << result.mf1 << ",,\n";
  return os.str();
}

}  // namespace adast
