#pragma once

#include "instimpact/featureset.hpp"

namespace instimpact {

struct BoostParams {
  enum class Learner { second_order, gbdt };

  int rounds = 100;
  int max_depth = 4;
  double learning_rate = 0.1;
  double lambda = 1.0;
  double gamma = 0.0;
  double min_child_weight = 1.0;
  Learner learner = Learner::second_order;

  void validate() const {
    if (rounds < 0) throw ConfigError("boost.rounds: must be >= 0");
    if (max_depth < 1) throw ConfigError("boost.max_depth: must be >= 1");
    if (!(learning_rate > 0.0) || learning_rate > 1.0)
      throw ConfigError("boost.learning_rate: must be in (0, 1]");
    if (lambda < 0.0) throw ConfigError("boost.lambda: must be >= 0");
    if (gamma < 0.0) throw ConfigError("boost.gamma: must be >= 0");
    if (min_child_weight < 0.0)
      throw ConfigError("boost.min_child_weight: must be >= 0");
  }
};

inline std::string_view learner_key(BoostParams::Learner l) {
  return l == BoostParams::Learner::second_order ? "second_order" : "gbdt";
}

inline BoostParams::Learner parse_learner(std::string_view key) {
  if (key == "second_order") return BoostParams::Learner::second_order;
  if (key == "gbdt") return BoostParams::Learner::gbdt;
  throw ConfigError("unknown learner '" + std::string(key) + "'");
}

/// Gradient statistics of the squared loss l = (y - yhat)^2 / 2.
inline std::pair<double, double> grad_hess_squared_loss(double y_true, double y_pred) {
  return {y_pred - y_true, 1.0};
}

/// Optimal leaf weight for accumulated (g, h) statistics.
inline double leaf_weight(double sum_g, double sum_h, double lambda) {
  const double denom = sum_h + lambda;
  if (!(denom > 0.0))
    throw std::invalid_argument("leaf_weight: sum_h + lambda must be > 0");
  return -sum_g / denom;
}

/// Objective reduction of turning one leaf into two, minus the per-leaf
/// penalty gamma.
inline double split_gain(double g_left, double h_left, double g_right, double h_right,
                         double lambda, double gamma) {
  const double g_total = g_left + g_right;
  const double h_total = h_left + h_right;
  return 0.5 * (g_left * g_left / (h_left + lambda) +
                g_right * g_right / (h_right + lambda) -
                g_total * g_total / (h_total + lambda)) -
         gamma;
}

/// Regression tree stored in preorder. Internal nodes route value < threshold
/// to the left child and value >= threshold to the right.
struct Tree {
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double weight = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;

    bool is_leaf() const noexcept { return feature < 0; }
  };

  std::vector<Node> nodes;

  double eval(std::span<const double> x) const {
    std::int32_t at = 0;
    while (true) {
      const Node& n = nodes[static_cast<std::size_t>(at)];
      if (n.is_leaf()) return n.weight;
      at = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
  }
};

namespace detail {

// Sums over a node are accumulated in a sorted order so that the grown tree is
// a pure function of the row multiset, not of the row order.

inline std::pair<double, double> node_sums(std::span<const std::uint32_t> rows,
                                           std::span<const double> g,
                                           std::span<const double> h) {
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(rows.size());
  for (std::uint32_t r : rows) pairs.emplace_back(g[r], h[r]);
  std::sort(pairs.begin(), pairs.end());
  double sg = 0.0, sh = 0.0;
  for (const auto& [pg, ph] : pairs) {
    sg += pg;
    sh += ph;
  }
  return {sg, sh};
}

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

/// Exact greedy split search on (g, h) statistics. Candidates are midpoints of
/// consecutive distinct sorted values; ties resolve to the lowest feature
/// index, then the lowest threshold.
inline SplitChoice best_split_gh(const Dataset& data,
                                 std::span<const std::uint32_t> rows,
                                 std::span<const double> g, std::span<const double> h,
                                 double g_total, double h_total,
                                 const BoostParams& params) {
  SplitChoice best;
  const std::size_t n_features = data.schema.size();
  std::vector<std::tuple<double, double, double>> scratch;
  for (std::size_t f = 0; f < n_features; ++f) {
    scratch.clear();
    scratch.reserve(rows.size());
    for (std::uint32_t r : rows)
      scratch.emplace_back(data.rows[r].values[f], g[r], h[r]);
    std::sort(scratch.begin(), scratch.end());
    double gl = 0.0, hl = 0.0;
    for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
      gl += std::get<1>(scratch[i]);
      hl += std::get<2>(scratch[i]);
      const double v = std::get<0>(scratch[i]);
      const double v_next = std::get<0>(scratch[i + 1]);
      if (!(v_next > v)) continue;
      // Adjacent representable values can round the midpoint onto v, which
      // would route the whole prefix to the right child.
      const double threshold = std::midpoint(v, v_next);
      if (!(threshold > v)) continue;
      const double hr = h_total - hl;
      const double gr = g_total - gl;
      if (hl < params.min_child_weight || hr < params.min_child_weight) continue;
      const double gain = split_gain(gl, hl, gr, hr, params.lambda, params.gamma);
      if (!best.found || gain > best.gain) {
        best = {true, static_cast<int>(f), threshold, gain};
      }
    }
  }
  return best;
}

class SecondOrderGrower {
 public:
  SecondOrderGrower(const Dataset& data, std::span<const double> g,
                    std::span<const double> h, const BoostParams& params)
      : data_(data), g_(g), h_(h), params_(params) {}

  Tree grow() {
    std::vector<std::uint32_t> rows(data_.rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<std::uint32_t>(i);
    if (rows.empty()) throw InternalError("grow_tree: empty node");
    Tree tree;
    build(tree, std::move(rows), 0);
    return tree;
  }

 private:
  std::int32_t build(Tree& tree, std::vector<std::uint32_t> rows, int depth) {
    const auto [g_total, h_total] = node_sums(rows, g_, h_);
    const std::int32_t self = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();

    if (depth < params_.max_depth && rows.size() >= 2) {
      SplitChoice best = best_split_gh(data_, rows, g_, h_, g_total, h_total, params_);
      if (best.found && best.gain > 0.0) {
        std::vector<std::uint32_t> left, right;
        for (std::uint32_t r : rows) {
          if (data_.rows[r].values[static_cast<std::size_t>(best.feature)] <
              best.threshold)
            left.push_back(r);
          else
            right.push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        tree.nodes[self].feature = best.feature;
        tree.nodes[self].threshold = best.threshold;
        tree.nodes[self].left = build(tree, std::move(left), depth + 1);
        tree.nodes[self].right = build(tree, std::move(right), depth + 1);
        return self;
      }
    }
    tree.nodes[self].weight = leaf_weight(g_total, h_total, params_.lambda);
    return self;
  }

  const Dataset& data_;
  std::span<const double> g_;
  std::span<const double> h_;
  const BoostParams& params_;
};

/// First-order baseline grower: variance-reduction splits over the current
/// residuals and mean-valued leaves. Regularization terms play no part in the
/// tree construction.
class ResidualGrower {
 public:
  ResidualGrower(const Dataset& data, std::span<const double> residual,
                 const BoostParams& params)
      : data_(data), residual_(residual), params_(params) {}

  Tree grow() {
    std::vector<std::uint32_t> rows(data_.rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<std::uint32_t>(i);
    if (rows.empty()) throw InternalError("grow_residual_tree: empty node");
    Tree tree;
    build(tree, std::move(rows), 0);
    return tree;
  }

 private:
  double node_sum(std::span<const std::uint32_t> rows) const {
    std::vector<double> values;
    values.reserve(rows.size());
    for (std::uint32_t r : rows) values.push_back(residual_[r]);
    return ordered_sum(std::move(values));
  }

  std::int32_t build(Tree& tree, std::vector<std::uint32_t> rows, int depth) {
    const double sum = node_sum(rows);
    const double n = static_cast<double>(rows.size());
    const std::int32_t self = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();

    if (depth < params_.max_depth && rows.size() >= 2) {
      bool found = false;
      int best_feature = -1;
      double best_threshold = 0.0;
      double best_score = 0.0;
      std::vector<std::pair<double, double>> scratch;
      for (std::size_t f = 0; f < data_.schema.size(); ++f) {
        scratch.clear();
        for (std::uint32_t r : rows) scratch.emplace_back(data_.rows[r].values[f], residual_[r]);
        std::sort(scratch.begin(), scratch.end());
        double sl = 0.0;
        for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
          sl += scratch[i].second;
          const double v = scratch[i].first;
          const double v_next = scratch[i + 1].first;
          if (!(v_next > v)) continue;
          const double threshold = std::midpoint(v, v_next);
          if (!(threshold > v)) continue;  // adjacent representable values
          const double nl = static_cast<double>(i + 1);
          const double nr = n - nl;
          if (nl < params_.min_child_weight || nr < params_.min_child_weight) continue;
          const double sr = sum - sl;
          // Reduction in squared error of fitting per-child means.
          const double score = sl * sl / nl + sr * sr / nr - sum * sum / n;
          if (!found || score > best_score) {
            found = true;
            best_feature = static_cast<int>(f);
            best_threshold = threshold;
            best_score = score;
          }
        }
      }
      if (found && best_score > 0.0) {
        std::vector<std::uint32_t> left, right;
        for (std::uint32_t r : rows) {
          if (data_.rows[r].values[static_cast<std::size_t>(best_feature)] <
              best_threshold)
            left.push_back(r);
          else
            right.push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        tree.nodes[self].feature = best_feature;
        tree.nodes[self].threshold = best_threshold;
        tree.nodes[self].left = build(tree, std::move(left), depth + 1);
        tree.nodes[self].right = build(tree, std::move(right), depth + 1);
        return self;
      }
    }
    tree.nodes[self].weight = sum / n;
    return self;
  }

  const Dataset& data_;
  std::span<const double> residual_;
  const BoostParams& params_;
};

}  // namespace detail

/// One round of the second-order learner: exact greedy tree on (g, h).
inline Tree grow_tree(const Dataset& data, std::span<const double> grad,
                      std::span<const double> hess, const BoostParams& params) {
  if (data.rows.empty()) throw InternalError("grow_tree: empty dataset");
  return detail::SecondOrderGrower(data, grad, hess, params).grow();
}

/// One round of the baseline learner: variance-reduction tree on residuals.
inline Tree grow_residual_tree(const Dataset& data, std::span<const double> residual,
                               const BoostParams& params) {
  if (data.rows.empty()) throw InternalError("grow_residual_tree: empty dataset");
  return detail::ResidualGrower(data, residual, params).grow();
}

struct BoostedModel {
  BoostParams params;
  double base_score = 0.0;
  std::vector<std::string> feature_names;
  std::uint64_t schema_fingerprint = 0;
  std::vector<Tree> trees;
  std::vector<long long> split_counts;

  double predict(std::span<const double> x) const {
    if (x.size() != feature_names.size())
      throw DataError("predict: row has " + std::to_string(x.size()) +
                      " features, model expects " +
                      std::to_string(feature_names.size()));
    double acc = 0.0;
    for (const Tree& t : trees) acc += t.eval(x);
    return base_score + params.learning_rate * acc;
  }
};

namespace detail {

inline void count_splits(const Tree& tree, std::vector<long long>& counts) {
  for (const auto& n : tree.nodes)
    if (!n.is_leaf()) ++counts[static_cast<std::size_t>(n.feature)];
}

}  // namespace detail

inline BoostedModel train(const Dataset& data, const BoostParams& params) {
  params.validate();
  if (data.rows.empty()) throw DataError("train: empty dataset");
  const std::size_t n = data.rows.size();
  const std::size_t n_features = data.schema.size();
  for (const auto& row : data.rows) {
    if (row.values.size() != n_features)
      throw DataError("train: row width does not match schema");
    for (double v : row.values)
      if (std::isnan(v)) throw DataError("train: NaN feature value");
    if (std::isnan(row.label)) throw DataError("train: NaN label");
  }

  BoostedModel model;
  model.params = params;
  model.feature_names = data.schema.names();
  model.schema_fingerprint = data.schema.fingerprint();
  model.split_counts.assign(n_features, 0);

  {
    std::vector<double> labels;
    labels.reserve(n);
    for (const auto& row : data.rows) labels.push_back(row.label);
    model.base_score = ordered_sum(std::move(labels)) / static_cast<double>(n);
  }

  std::vector<double> preds(n, model.base_score);
  std::vector<double> g(n), h(n), residual(n);
  for (int round = 0; round < params.rounds; ++round) {
    Tree tree;
    if (params.learner == BoostParams::Learner::second_order) {
      for (std::size_t i = 0; i < n; ++i)
        std::tie(g[i], h[i]) = grad_hess_squared_loss(data.rows[i].label, preds[i]);
      tree = grow_tree(data, g, h, params);
    } else {
      for (std::size_t i = 0; i < n; ++i) residual[i] = data.rows[i].label - preds[i];
      tree = grow_residual_tree(data, residual, params);
    }
    for (std::size_t i = 0; i < n; ++i)
      preds[i] += params.learning_rate * tree.eval(data.rows[i].values);
    detail::count_splits(tree, model.split_counts);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

struct FeatureImportance {
  std::vector<long long> counts;
  std::vector<double> normalized;
  bool has_splits = false;
};

/// Raw split counts per feature plus the normalized variant. A model with no
/// splits reports all-zero scores with has_splits = false.
inline FeatureImportance feature_importance(const BoostedModel& model) {
  FeatureImportance imp;
  imp.counts = model.split_counts;
  long long total = 0;
  for (long long c : imp.counts) total += c;
  imp.has_splits = total > 0;
  imp.normalized.assign(imp.counts.size(), 0.0);
  if (imp.has_splits)
    for (std::size_t i = 0; i < imp.counts.size(); ++i)
      imp.normalized[i] =
          static_cast<double>(imp.counts[i]) / static_cast<double>(total);
  return imp;
}

// ---------------------------------------------------------------------------
// Model file: tab-separated text with the params, base score, schema, and a
// preorder node listing per tree. Doubles use exact round-trip formatting, so
// save -> load -> save reproduces the file byte for byte.
// ---------------------------------------------------------------------------

inline void save_model(const BoostedModel& model, std::ostream& out) {
  out << "instimpact-model\t1\n";
  out << "learner\t" << learner_key(model.params.learner) << "\n";
  out << "rounds\t" << model.params.rounds << "\n";
  out << "max_depth\t" << model.params.max_depth << "\n";
  out << "learning_rate\t" << format_exact(model.params.learning_rate) << "\n";
  out << "lambda\t" << format_exact(model.params.lambda) << "\n";
  out << "gamma\t" << format_exact(model.params.gamma) << "\n";
  out << "min_child_weight\t" << format_exact(model.params.min_child_weight) << "\n";
  out << "base_score\t" << format_exact(model.base_score) << "\n";
  out << "schema_fingerprint\t" << to_hex(model.schema_fingerprint) << "\n";
  out << "num_features\t" << model.feature_names.size() << "\n";
  for (const auto& name : model.feature_names) out << "feature\t" << name << "\n";
  out << "num_trees\t" << model.trees.size() << "\n";
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const Tree& tree = model.trees[t];
    out << "tree\t" << t << '\t' << tree.nodes.size() << "\n";
    for (const auto& n : tree.nodes) {
      if (n.is_leaf())
        out << "leaf\t" << format_exact(n.weight) << "\n";
      else
        out << "split\t" << model.feature_names[static_cast<std::size_t>(n.feature)]
            << '\t' << format_exact(n.threshold) << "\n";
    }
  }
  out << "end\n";
}

namespace detail {

struct ModelReader {
  std::istream& in;
  std::size_t line_no = 0;

  std::vector<std::string> next(const std::string& expect_tag) {
    std::string line;
    if (!std::getline(in, line))
      throw DataError("model file: unexpected end of file (wanted '" + expect_tag +
                      "')");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = split(line, '\t');
    if (fields.empty() || fields[0] != expect_tag)
      throw DataError("model file:" + std::to_string(line_no) + ": expected '" +
                      expect_tag + "'");
    return fields;
  }

  std::string value(const std::string& tag) {
    auto fields = next(tag);
    if (fields.size() != 2)
      throw DataError("model file:" + std::to_string(line_no) + ": bad '" + tag +
                      "' line");
    return fields[1];
  }

  double number(const std::string& tag) {
    bool ok = false;
    double v = parse_double_exact(value(tag), ok);
    if (!ok)
      throw DataError("model file:" + std::to_string(line_no) + ": bad number in '" +
                      tag + "'");
    return v;
  }
};

// Preorder reconstruction: a split line is followed by its whole left subtree,
// then its right subtree.
inline std::int32_t read_subtree(ModelReader& reader, Tree& tree,
                                 const std::map<std::string, std::int32_t>& name_index) {
  std::string line;
  if (!std::getline(reader.in, line))
    throw DataError("model file: unexpected end of tree");
  ++reader.line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto fields = split(line, '\t');
  const std::int32_t self = static_cast<std::int32_t>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (fields.size() == 2 && fields[0] == "leaf") {
    bool ok = false;
    tree.nodes[static_cast<std::size_t>(self)].weight =
        parse_double_exact(fields[1], ok);
    if (!ok)
      throw DataError("model file:" + std::to_string(reader.line_no) +
                      ": bad leaf weight");
    return self;
  }
  if (fields.size() == 3 && fields[0] == "split") {
    auto it = name_index.find(fields[1]);
    if (it == name_index.end())
      throw DataError("model file:" + std::to_string(reader.line_no) +
                      ": unknown feature '" + fields[1] + "'");
    bool ok = false;
    const double threshold = parse_double_exact(fields[2], ok);
    if (!ok)
      throw DataError("model file:" + std::to_string(reader.line_no) +
                      ": bad threshold");
    tree.nodes[static_cast<std::size_t>(self)].feature = it->second;
    tree.nodes[static_cast<std::size_t>(self)].threshold = threshold;
    const std::int32_t left = read_subtree(reader, tree, name_index);
    const std::int32_t right = read_subtree(reader, tree, name_index);
    tree.nodes[static_cast<std::size_t>(self)].left = left;
    tree.nodes[static_cast<std::size_t>(self)].right = right;
    return self;
  }
  throw DataError("model file:" + std::to_string(reader.line_no) + ": bad node line");
}

}  // namespace detail

inline BoostedModel load_model(std::istream& in) {
  detail::ModelReader reader{in};
  auto head = reader.next("instimpact-model");
  if (head.size() != 2 || head[1] != "1")
    throw DataError("model file: unsupported version");

  BoostedModel model;
  model.params.learner = parse_learner(reader.value("learner"));
  model.params.rounds = static_cast<int>(reader.number("rounds"));
  model.params.max_depth = static_cast<int>(reader.number("max_depth"));
  model.params.learning_rate = reader.number("learning_rate");
  model.params.lambda = reader.number("lambda");
  model.params.gamma = reader.number("gamma");
  model.params.min_child_weight = reader.number("min_child_weight");
  model.base_score = reader.number("base_score");
  const std::string fingerprint_hex = reader.value("schema_fingerprint");
  const int n_features = static_cast<int>(reader.number("num_features"));
  std::map<std::string, std::int32_t> name_index;
  for (int i = 0; i < n_features; ++i) {
    model.feature_names.push_back(reader.value("feature"));
    name_index[model.feature_names.back()] = i;
  }
  model.schema_fingerprint = schema_fingerprint_of(model.feature_names);
  if (to_hex(model.schema_fingerprint) != fingerprint_hex)
    throw DataError("model file: schema fingerprint mismatch");

  const int n_trees = static_cast<int>(reader.number("num_trees"));
  model.split_counts.assign(static_cast<std::size_t>(n_features), 0);
  for (int t = 0; t < n_trees; ++t) {
    auto fields = reader.next("tree");
    if (fields.size() != 3)
      throw DataError("model file:" + std::to_string(reader.line_no) +
                      ": bad tree header");
    Tree tree;
    detail::read_subtree(reader, tree, name_index);
    bool ok = false;
    const double declared = parse_double_exact(fields[2], ok);
    if (!ok || static_cast<std::size_t>(declared) != tree.nodes.size())
      throw DataError("model file:" + std::to_string(reader.line_no) +
                      ": tree node count mismatch");
    detail::count_splits(tree, model.split_counts);
    model.trees.push_back(std::move(tree));
  }
  reader.next("end");
  return model;
}

}  // namespace instimpact
