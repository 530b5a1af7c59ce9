#include "factorforge/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "factorforge/error.hpp"
#include "factorforge/parallel.hpp"

namespace factorforge {

namespace {

/// One entry of the decision path tracked by TreeSHAP. `pweight` is the permutation weight of
/// subsets containing `index` ones, stored alongside the feature data for convenience.
struct PathElement {
  int feature = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double pweight = 0.0;
};

void extend_path(PathElement* path, std::size_t depth, double zero_fraction, double one_fraction,
                 int feature) {
  path[depth] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  const auto d1 = static_cast<double>(depth + 1);
  for (std::size_t k = depth; k-- > 0;) {
    path[k + 1].pweight += one_fraction * path[k].pweight * static_cast<double>(k + 1) / d1;
    path[k].pweight = zero_fraction * path[k].pweight * static_cast<double>(depth - k) / d1;
  }
}

void unwind_path(PathElement* path, std::size_t depth, std::size_t index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  const auto d1 = static_cast<double>(depth + 1);
  double next_one_portion = path[depth].pweight;
  for (std::size_t k = depth; k-- > 0;) {
    if (one != 0.0) {
      const double tmp = path[k].pweight;
      path[k].pweight = next_one_portion * d1 / (static_cast<double>(k + 1) * one);
      next_one_portion = tmp - path[k].pweight * zero * static_cast<double>(depth - k) / d1;
    } else {
      path[k].pweight = path[k].pweight * d1 / (zero * static_cast<double>(depth - k));
    }
  }
  for (std::size_t k = index; k < depth; ++k) {
    path[k].feature = path[k + 1].feature;
    path[k].zero_fraction = path[k + 1].zero_fraction;
    path[k].one_fraction = path[k + 1].one_fraction;
  }
}

/// Total permutation weight if the element at `index` were unwound.
double unwound_path_sum(const PathElement* path, std::size_t depth, std::size_t index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  const auto d1 = static_cast<double>(depth + 1);
  double next_one_portion = path[depth].pweight;
  double total = 0.0;
  for (std::size_t k = depth; k-- > 0;) {
    if (one != 0.0) {
      const double tmp = next_one_portion * d1 / (static_cast<double>(k + 1) * one);
      total += tmp;
      next_one_portion = path[k].pweight - tmp * zero * (static_cast<double>(depth - k) / d1);
    } else if (zero != 0.0) {
      total += path[k].pweight / zero / (static_cast<double>(depth - k) / d1);
    }
  }
  return total;
}

class TreeShapWalker {
 public:
  TreeShapWalker(const RegressionTree& tree, std::span<const double> x, std::vector<double>& phi)
      : tree_(tree), x_(x), phi_(phi) {
    const std::size_t max_depth = static_cast<std::size_t>(tree.depth()) + 2;
    storage_.resize(max_depth * (max_depth + 1) / 2 + 1);
  }

  void run() { recurse(0, 0, storage_.data(), 1.0, 1.0, -1); }

 private:
  void recurse(int node_id, std::size_t depth, PathElement* parent_path, double parent_zero,
               double parent_one, int parent_feature) {
    const auto& node = tree_.nodes[static_cast<std::size_t>(node_id)];
    PathElement* path = parent_path + depth + 1;
    std::copy(parent_path, parent_path + depth + 1, path);
    extend_path(path, depth, parent_zero, parent_one, parent_feature);

    if (node.is_leaf()) {
      for (std::size_t i = 1; i <= depth; ++i) {
        const double w = unwound_path_sum(path, depth, i);
        const auto& el = path[i];
        phi_[static_cast<std::size_t>(el.feature)] +=
            w * (el.one_fraction - el.zero_fraction) * node.value;
      }
      return;
    }

    const bool go_left = x_[static_cast<std::size_t>(node.feature)] <= node.threshold;
    const int hot = go_left ? node.left : node.right;
    const int cold = go_left ? node.right : node.left;
    const double cover = node.n_samples;
    const double hot_zero = tree_.nodes[static_cast<std::size_t>(hot)].n_samples / cover;
    const double cold_zero = tree_.nodes[static_cast<std::size_t>(cold)].n_samples / cover;
    double incoming_zero = 1.0;
    double incoming_one = 1.0;

    // A feature seen earlier on the path is unwound and re-entered with combined fractions.
    std::size_t k = 0;
    for (; k <= depth; ++k)
      if (path[k].feature == node.feature) break;
    if (k != depth + 1) {
      incoming_zero = path[k].zero_fraction;
      incoming_one = path[k].one_fraction;
      unwind_path(path, depth, k);
      depth -= 1;
    }

    recurse(hot, depth + 1, path, hot_zero * incoming_zero, incoming_one, node.feature);
    recurse(cold, depth + 1, path, cold_zero * incoming_zero, 0.0, node.feature);
  }

  const RegressionTree& tree_;
  std::span<const double> x_;
  std::vector<double>& phi_;
  std::vector<PathElement> storage_;
};

double subset_value(const RegressionTree& tree, int node_id, std::span<const double> x,
                    std::uint32_t present_mask) {
  const auto& node = tree.nodes[static_cast<std::size_t>(node_id)];
  if (node.is_leaf()) return node.value;
  if (present_mask & (1u << node.feature)) {
    const int next = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                 : node.right;
    return subset_value(tree, next, x, present_mask);
  }
  const auto& l = tree.nodes[static_cast<std::size_t>(node.left)];
  const auto& r = tree.nodes[static_cast<std::size_t>(node.right)];
  return (l.n_samples * subset_value(tree, node.left, x, present_mask) +
          r.n_samples * subset_value(tree, node.right, x, present_mask)) /
         (l.n_samples + r.n_samples);
}

void check_tree_features(const RegressionTree& tree, std::size_t n_features) {
  for (const auto& n : tree.nodes)
    if (!n.is_leaf() && static_cast<std::size_t>(n.feature) >= n_features)
      throw Error("tree splits on feature " + std::to_string(n.feature) + " but only " +
                  std::to_string(n_features) + " features were given");
}

template <typename Ensemble>
void sum_gains(const Ensemble& e, std::vector<double>& out, bool& any_split) {
  for (const auto& t : e.trees) {
    const double root = t.nodes.front().n_samples;
    for (const auto& n : t.nodes) {
      if (n.is_leaf()) continue;
      any_split = true;
      out[static_cast<std::size_t>(n.feature)] += n.gain / root;
    }
  }
}

}  // namespace

ImportanceReport impurity_importance(const Model& model) {
  ImportanceReport report;
  report.method = "impurity";
  report.importance.assign(feature_count(model), 0.0);
  bool any_split = false;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          throw Error("impurity importance needs a tree ensemble");
        } else {
          sum_gains(m, report.importance, any_split);
        }
      },
      model);
  const double total = std::accumulate(report.importance.begin(), report.importance.end(), 0.0);
  if (!any_split || total <= 0.0) {
    std::fill(report.importance.begin(), report.importance.end(), 0.0);
    report.degenerate = true;
    return report;
  }
  for (double& v : report.importance) v /= total;
  return report;
}

double expected_value(const RegressionTree& tree) { return subset_value(tree, 0, {}, 0u); }

ShapExplanation tree_shap(const RegressionTree& tree, std::span<const double> x,
                          std::size_t n_features) {
  if (x.size() != n_features) throw Error("tree_shap: row width does not match feature count");
  check_tree_features(tree, n_features);
  ShapExplanation out;
  out.base_value = expected_value(tree);
  out.phi.assign(n_features, 0.0);
  TreeShapWalker(tree, x, out.phi).run();
  return out;
}

ShapExplanation tree_shap(const Model& model, std::span<const double> x) {
  return std::visit(
      [&](const auto& m) -> ShapExplanation {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          throw Error("tree_shap needs a tree ensemble; use linear_shap for linear models");
        } else {
          if (x.size() != m.n_features)
            throw Error("tree_shap: row has " + std::to_string(x.size()) +
                        " features; model expects " + std::to_string(m.n_features));
          ShapExplanation total;
          total.phi.assign(m.n_features, 0.0);
          for (const auto& t : m.trees) {
            auto e = tree_shap(t, x, m.n_features);
            total.base_value += e.base_value;
            for (std::size_t i = 0; i < total.phi.size(); ++i) total.phi[i] += e.phi[i];
          }
          double scale = 0.0;
          if constexpr (std::is_same_v<T, ForestModel>) {
            scale = 1.0 / static_cast<double>(m.trees.size());
            total.base_value *= scale;
          } else {
            scale = m.config.learning_rate;
            total.base_value = m.init_value + scale * total.base_value;
          }
          for (double& v : total.phi) v *= scale;
          return total;
        }
      },
      model);
}

std::vector<double> brute_force_shapley(const RegressionTree& tree, std::span<const double> x,
                                        std::size_t n_features) {
  if (n_features > 15) throw Error("brute_force_shapley: at most 15 features supported");
  if (x.size() != n_features) throw Error("brute_force_shapley: row width mismatch");
  check_tree_features(tree, n_features);
  const std::uint32_t subsets = 1u << n_features;
  std::vector<double> value(subsets);
  for (std::uint32_t s = 0; s < subsets; ++s) value[s] = subset_value(tree, 0, x, s);

  std::vector<double> factorial(n_features + 1, 1.0);
  for (std::size_t k = 1; k <= n_features; ++k) factorial[k] = factorial[k - 1] * static_cast<double>(k);

  std::vector<double> phi(n_features, 0.0);
  for (std::size_t i = 0; i < n_features; ++i) {
    const std::uint32_t bit = 1u << i;
    for (std::uint32_t s = 0; s < subsets; ++s) {
      if (s & bit) continue;
      const auto size = static_cast<std::size_t>(__builtin_popcount(s));
      const double weight =
          factorial[size] * factorial[n_features - size - 1] / factorial[n_features];
      phi[i] += weight * (value[s | bit] - value[s]);
    }
  }
  return phi;
}

ShapExplanation linear_shap(const LinearModel& model, std::span<const double> x,
                            std::span<const double> feature_means) {
  const std::size_t p = model.coefficients.size();
  if (x.size() != p || feature_means.size() != p)
    throw Error("linear_shap: row or mean width does not match coefficients");
  ShapExplanation out;
  out.base_value = model.predict_row(feature_means);
  out.phi.resize(p);
  for (std::size_t i = 0; i < p; ++i) out.phi[i] = model.coefficients[i] * (x[i] - feature_means[i]);
  return out;
}

namespace {

ShapExplanation explain_row(const Model& model, std::span<const double> x,
                            std::span<const double> feature_means) {
  if (const auto* lin = std::get_if<LinearModel>(&model)) return linear_shap(*lin, x, feature_means);
  return tree_shap(model, x);
}

}  // namespace

std::vector<FeatureRank> rank_features(std::span<const double> values) {
  std::vector<FeatureRank> ranks;
  for (std::size_t i = 0; i < values.size(); ++i) ranks.push_back({i, values[i]});
  std::stable_sort(ranks.begin(), ranks.end(),
                   [](const FeatureRank& a, const FeatureRank& b) { return a.value > b.value; });
  return ranks;
}

std::vector<FeatureRank> shap_summary(const Model& model, const FeatureMatrix& X,
                                      std::span<const double> feature_means) {
  const std::size_t p = feature_count(model);
  if (X.cols() != p) throw Error("shap_summary: matrix width does not match model");
  std::vector<std::vector<double>> per_row(X.rows());
  parallel_for(X.rows(), [&](std::size_t r) { per_row[r] = explain_row(model, X.row(r), feature_means).phi; });
  std::vector<double> mean_abs(p, 0.0);
  for (const auto& phi : per_row)
    for (std::size_t i = 0; i < p; ++i) mean_abs[i] += std::fabs(phi[i]);
  if (X.rows() > 0)
    for (double& v : mean_abs) v /= static_cast<double>(X.rows());
  return rank_features(mean_abs);
}

double max_local_accuracy_error(const Model& model, const FeatureMatrix& X,
                                std::span<const double> feature_means) {
  std::vector<double> err(X.rows(), 0.0);
  parallel_for(X.rows(), [&](std::size_t r) {
    auto e = explain_row(model, X.row(r), feature_means);
    double total = e.base_value;
    for (double v : e.phi) total += v;
    err[r] = std::fabs(total - predict_row(model, X.row(r)));
  });
  return err.empty() ? 0.0 : *std::max_element(err.begin(), err.end());
}

}  // namespace factorforge
