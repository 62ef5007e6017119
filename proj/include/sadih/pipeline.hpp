#ifndef SADIH_PIPELINE_HPP_
#define SADIH_PIPELINE_HPP_

// Raw features -> optional anchor lift -> normalization -> training.

#include <fstream>

#include "sadih/dataset.hpp"
#include "sadih/eval.hpp"
#include "sadih/model.hpp"
#include "sadih/optimizer.hpp"

namespace sadih {

struct FitResult {
  Model model;
  HashCodeMatrix codes;
  TrainTrace trace;
};

// anchors == 0 trains on the normalized raw features.
inline FitResult fit_model(const FeatureMatrix& raw, const LabelSet& labels, const Hyperparams& h,
                           Index anchors = 0, double sigma = 0.0,
                           const IterationCallback& on_iteration = {}) {
  if (raw.cols() != labels.size()) {
    throw DataError(std::to_string(raw.cols()) + " feature columns but " +
                    std::to_string(labels.size()) + " labels");
  }
  if (!labels.all_classes_present()) {
    throw DataError("some class ids in [0, " + std::to_string(labels.num_classes()) +
                    ") have no samples; relabel classes to a contiguous range");
  }
  FitResult out;
  FeatureMatrix features = raw;
  if (anchors > 0) {
    out.model.anchors = sample_anchors(raw, anchors, h.seed, sigma);
    features = anchor_embed(raw, *out.model.anchors);
  }
  auto [normalized, stats] = normalize_features(features);
  out.model.stats = std::move(stats);
  out.model.hyper = h;
  TrainResult trained = train(normalized, labels, h, on_iteration);
  out.model.params = std::move(trained.params);
  out.codes = std::move(trained.codes);
  out.trace = std::move(trained.trace);
  return out;
}

inline void write_trace_csv(const std::string& path, const TrainTrace& trace) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "iteration,objective,similarity,reconstruction,embedding,regularization,seconds,"
         "guard_rejections,rejected_steps,dcc_sweeps,bit_flips\n";
  for (const auto& it : trace.iterations) {
    out << it.iteration << ',' << format_value(it.objective) << ','
        << format_value(it.terms.similarity) << ',' << format_value(it.terms.reconstruction) << ','
        << format_value(it.terms.embedding) << ',' << format_value(it.terms.regularization) << ','
        << format_value(it.seconds) << ',' << it.guard_rejections << ','
        << describe_steps(it.rejected_steps) << ',' << it.dcc_sweeps << ','
        << it.bit_flips << '\n';
  }
}

}  // namespace sadih

#endif  // SADIH_PIPELINE_HPP_
