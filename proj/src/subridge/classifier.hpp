#pragma once

#include <string>
#include <vector>

#include "subridge/covariance.hpp"

namespace subridge {

enum class FeatureFormat { automatic, csv, binary };

FeatureFormat feature_format_from_string(const std::string& name);

struct FeatureDataset {
  Matrix features;  // n x M
  std::vector<int> labels;
  int classes = 0;
  std::string split = "train";

  Index size() const { return features.rows(); }
  Index dimension() const { return features.cols(); }
};

struct LoadOptions {
  FeatureFormat format = FeatureFormat::automatic;  // by extension: .csv or binary
  std::string label_column = "label";
  int classes = 0;  // 0: infer as max label + 1 (binary files carry C)
  bool center = false;
  std::string split = "train";
};

FeatureDataset make_feature_dataset(Matrix features, std::vector<int> labels, int classes,
                                    std::string split = "train");
FeatureDataset load_feature_dataset(const std::string& path, const LoadOptions& options = {});
void save_feature_dataset(const FeatureDataset& data, const std::string& path,
                          FeatureFormat format = FeatureFormat::automatic);
FeatureDataset select_rows(const FeatureDataset& data, const std::vector<Index>& rows);

struct ClassifierEnsemble {
  std::vector<Matrix> weights;  // N_r x C
  SubsamplingPlan plan;
  Vector lambda;
  Vector eta;
  std::uint64_t seed = 0;
  int classes = 0;
};

ClassifierEnsemble train_classifier_ensemble(const FeatureDataset& train,
                                             const SubsamplingPlan& plan, const Vector& lambda,
                                             const Vector& eta, std::uint64_t seed);

// Score matrix (n x C) of readout r, without readout noise.
Matrix readout_scores(const ClassifierEnsemble& ensemble, Index r, const Matrix& features);

// Plurality vote; ties go to the larger summed score, then the lower class.
int vote(const std::vector<Vector>& member_scores);

std::vector<int> majority_vote_predict(const ClassifierEnsemble& ensemble,
                                       const Matrix& features, std::uint64_t eval_seed);

double classification_error(const ClassifierEnsemble& ensemble, const FeatureDataset& test,
                            std::uint64_t eval_seed);

}  // namespace subridge
