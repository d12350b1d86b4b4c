#include "subridge/classifier.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "subridge/linalg.hpp"
#include "subridge/rng.hpp"

namespace subridge {

namespace {

constexpr char kMagic[5] = {'S', 'R', 'D', 'G', '1'};

static_assert(std::endian::native == std::endian::little,
              "packed feature files assume a little-endian host");

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

FeatureFormat resolve_format(FeatureFormat format, const std::string& path) {
  if (format != FeatureFormat::automatic) return format;
  return ends_with(path, ".csv") ? FeatureFormat::csv : FeatureFormat::binary;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& text, std::size_t line, const std::string& path) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ParseError(path + ":" + std::to_string(line) + ": bad feature value '" + text + "'");
  return v;
}

FeatureDataset load_csv(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  const auto header = split_csv(line);
  std::ptrdiff_t label_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == options.label_column) label_col = static_cast<std::ptrdiff_t>(i);
  if (label_col < 0) throw ParseError(path + ": no '" + options.label_column + "' column in header");
  const std::size_t width = header.size();
  const Index m = static_cast<Index>(width - 1);
  if (m < 1) throw ParseError(path + ": no feature columns");

  std::vector<double> values;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != width)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) +
                       " columns, found " + std::to_string(cells.size()));
    for (std::size_t i = 0; i < width; ++i) {
      if (static_cast<std::ptrdiff_t>(i) == label_col) {
        int label = 0;
        const auto& t = cells[i];
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), label);
        if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
          throw ParseError(path + ":" + std::to_string(line_no) + ": bad label '" + t + "'");
        labels.push_back(label);
      } else {
        values.push_back(parse_double(cells[i], line_no, path));
      }
    }
  }
  const Index n = static_cast<Index>(labels.size());
  if (n == 0) throw ParseError(path + ": no data rows");
  Matrix features(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) features(i, j) = values[static_cast<std::size_t>(i * m + j)];
  int classes = options.classes;
  if (classes == 0) classes = *std::max_element(labels.begin(), labels.end()) + 1;
  return make_feature_dataset(std::move(features), std::move(labels), classes, options.split);
}

template <class T>
void read_raw(std::istream& in, T* dst, std::size_t count, const std::string& path) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(count * sizeof(T)));
  if (!in) throw ParseError(path + ": truncated packed file");
}

FeatureDataset load_binary(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  char magic[5];
  read_raw(in, magic, 5, path);
  if (std::memcmp(magic, kMagic, 5) != 0) throw ParseError(path + ": bad magic bytes");
  std::uint64_t dims[3];
  read_raw(in, dims, 3, path);
  const auto n = dims[0], m = dims[1], c = dims[2];
  if (n == 0 || m == 0 || c == 0 || c > static_cast<std::uint64_t>(std::numeric_limits<int>::max()))
    throw ParseError(path + ": invalid header dimensions");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(
      static_cast<Index>(n), static_cast<Index>(m));
  read_raw(in, rows.data(), static_cast<std::size_t>(n * m), path);
  std::vector<std::uint32_t> raw(static_cast<std::size_t>(n));
  read_raw(in, raw.data(), raw.size(), path);
  std::vector<int> labels(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] >= c)
      throw ParseError(path + ": row " + std::to_string(i) + " has label " + std::to_string(raw[i]) +
                       " outside [0, " + std::to_string(c) + ")");
    labels[i] = static_cast<int>(raw[i]);
  }
  int classes = static_cast<int>(c);
  if (options.classes != 0 && options.classes != classes)
    throw ParseError(path + ": file declares " + std::to_string(classes) + " classes");
  return make_feature_dataset(Matrix(rows), std::move(labels), classes, options.split);
}

}  // namespace

FeatureFormat feature_format_from_string(const std::string& name) {
  if (name == "auto") return FeatureFormat::automatic;
  if (name == "csv") return FeatureFormat::csv;
  if (name == "binary") return FeatureFormat::binary;
  throw InvalidArgument("unknown feature format '" + name + "'");
}

FeatureDataset make_feature_dataset(Matrix features, std::vector<int> labels, int classes,
                                    std::string split) {
  if (features.rows() < 1) throw InvalidArgument("feature dataset needs at least one row");
  if (static_cast<Index>(labels.size()) != features.rows())
    throw DimensionMismatch("one label per feature row required");
  require(classes >= 1, "class count must be >= 1");
  if (!features.allFinite()) throw InvalidArgument("feature matrix contains missing values");
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] < 0 || labels[i] >= classes)
      throw InvalidArgument("row " + std::to_string(i) + " has label " + std::to_string(labels[i]) +
                            " outside [0, " + std::to_string(classes) + ")");
  FeatureDataset out;
  out.features = std::move(features);
  out.labels = std::move(labels);
  out.classes = classes;
  out.split = std::move(split);
  return out;
}

FeatureDataset load_feature_dataset(const std::string& path, const LoadOptions& options) {
  FeatureDataset data = resolve_format(options.format, path) == FeatureFormat::csv
                            ? load_csv(path, options)
                            : load_binary(path, options);
  if (options.center) data.features.rowwise() -= data.features.colwise().mean();
  return data;
}

void save_feature_dataset(const FeatureDataset& data, const std::string& path, FeatureFormat format) {
  if (resolve_format(format, path) == FeatureFormat::csv) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    for (Index j = 0; j < data.dimension(); ++j) out << 'f' << j << ',';
    out << "label\n";
    char buf[32];
    for (Index i = 0; i < data.size(); ++i) {
      for (Index j = 0; j < data.dimension(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", data.features(i, j));
        out << buf << ',';
      }
      out << data.labels[static_cast<std::size_t>(i)] << '\n';
    }
    if (!out) throw IoError("write to '" + path + "' failed");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(kMagic, 5);
  const std::uint64_t dims[3] = {static_cast<std::uint64_t>(data.size()),
                                 static_cast<std::uint64_t>(data.dimension()),
                                 static_cast<std::uint64_t>(data.classes)};
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = data.features;
  out.write(reinterpret_cast<const char*>(rows.data()),
            static_cast<std::streamsize>(rows.size() * sizeof(double)));
  std::vector<std::uint32_t> labels(data.labels.begin(), data.labels.end());
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size() * sizeof(std::uint32_t)));
  if (!out) throw IoError("write to '" + path + "' failed");
}

FeatureDataset select_rows(const FeatureDataset& data, const std::vector<Index>& rows) {
  Matrix features(static_cast<Index>(rows.size()), data.dimension());
  std::vector<int> labels(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] >= 0 && rows[i] < data.size(), "row index out of range");
    features.row(static_cast<Index>(i)) = data.features.row(rows[i]);
    labels[i] = data.labels[static_cast<std::size_t>(rows[i])];
  }
  return make_feature_dataset(std::move(features), std::move(labels), data.classes, data.split);
}

ClassifierEnsemble train_classifier_ensemble(const FeatureDataset& train, const SubsamplingPlan& plan,
                                             const Vector& lambda, const Vector& eta,
                                             std::uint64_t seed) {
  const Index k = plan.size();
  if (plan.dimension != train.dimension())
    throw DimensionMismatch("plan dimension differs from feature dimension");
  if (lambda.size() != k || eta.size() != k)
    throw DimensionMismatch("lambda and eta need one entry per readout");
  const Index n = train.size();
  const Index c = train.classes;
  Matrix Y = Matrix::Zero(n, c);
  for (Index i = 0; i < n; ++i) Y(i, train.labels[static_cast<std::size_t>(i)]) = 1.0;

  ClassifierEnsemble out;
  out.plan = plan;
  out.lambda = lambda;
  out.eta = eta;
  out.seed = seed;
  out.classes = train.classes;
  for (Index r = 0; r < k; ++r) {
    require(lambda[r] >= 0.0 && eta[r] >= 0.0, "lambda and eta must be >= 0");
    const Mask& mask = plan.masks[static_cast<std::size_t>(r)];
    const double scale = 1.0 / std::sqrt(static_cast<double>(mask.size()));
    Matrix X(n, static_cast<Index>(mask.size()));
    for (Index j = 0; j < X.cols(); ++j) X.col(j) = scale * train.features.col(mask[static_cast<std::size_t>(j)]);
    Matrix xi(n, c);
    Stream stream(derive_seed(seed, StreamTag::training_noise, static_cast<std::uint64_t>(r)));
    stream.fill_normal(xi);
    out.weights.push_back(ridge_solve(X, Y - eta[r] * xi, lambda[r]));
  }
  return out;
}

Matrix readout_scores(const ClassifierEnsemble& ensemble, Index r, const Matrix& features) {
  const Mask& mask = ensemble.plan.masks[static_cast<std::size_t>(r)];
  if (features.cols() != ensemble.plan.dimension)
    throw DimensionMismatch("feature dimension differs from the plan");
  const Matrix& W = ensemble.weights[static_cast<std::size_t>(r)];
  Matrix scores = Matrix::Zero(features.rows(), W.cols());
  for (std::size_t j = 0; j < mask.size(); ++j)
    scores.noalias() += features.col(mask[j]) * W.row(static_cast<Index>(j));
  return scores / std::sqrt(static_cast<double>(mask.size()));
}

int vote(const std::vector<Vector>& member_scores) {
  require(!member_scores.empty(), "vote needs at least one member");
  const Index c = member_scores.front().size();
  Vector counts = Vector::Zero(c), totals = Vector::Zero(c);
  for (const auto& s : member_scores) {
    if (s.size() != c) throw DimensionMismatch("members disagree on class count");
    Index best = 0;
    s.maxCoeff(&best);
    counts[best] += 1.0;
    totals += s;
  }
  int winner = 0;
  for (Index j = 1; j < c; ++j)
    if (counts[j] > counts[winner] || (counts[j] == counts[winner] && totals[j] > totals[winner]))
      winner = static_cast<int>(j);
  return winner;
}

std::vector<int> majority_vote_predict(const ClassifierEnsemble& ensemble, const Matrix& features,
                                       std::uint64_t eval_seed) {
  const Index k = ensemble.plan.size();
  const Index n = features.rows();
  const Index c = ensemble.classes;
  std::vector<Matrix> scores;
  for (Index r = 0; r < k; ++r) scores.push_back(readout_scores(ensemble, r, features));

  std::vector<int> out(static_cast<std::size_t>(n));
  std::vector<Vector> members(static_cast<std::size_t>(k), Vector(c));
  for (Index i = 0; i < n; ++i) {
    for (Index r = 0; r < k; ++r) {
      Vector& f = members[static_cast<std::size_t>(r)];
      f = scores[static_cast<std::size_t>(r)].row(i).transpose();
      const double eta = ensemble.eta[r];
      if (eta > 0.0) {
        SplitMix64 engine(derive_seed(eval_seed, StreamTag::eval_noise, static_cast<std::uint64_t>(r),
                                      static_cast<std::uint64_t>(i)));
        std::normal_distribution<double> normal(0.0, eta);
        for (Index j = 0; j < c; ++j) f[j] += normal(engine);
      }
    }
    out[static_cast<std::size_t>(i)] = vote(members);
  }
  return out;
}

double classification_error(const ClassifierEnsemble& ensemble, const FeatureDataset& test,
                            std::uint64_t eval_seed) {
  const auto predicted = majority_vote_predict(ensemble, test.features, eval_seed);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) wrong += predicted[i] != test.labels[i];
  return static_cast<double>(wrong) / static_cast<double>(predicted.size());
}

}  // namespace subridge
