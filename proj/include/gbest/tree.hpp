#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "gbest/bootstrap.hpp"
#include "gbest/data.hpp"
#include "gbest/error.hpp"
#include "gbest/estimators.hpp"
#include "gbest/rng.hpp"

namespace gbest {

struct TreeParams {
    double min_node_weight = 6.0;   // effective observations per child
    int min_events_per_child = 1;   // event rows with positive weight per child
    int max_depth = 20;
    std::optional<int> mtry;        // features sampled per split; absent = all

    void validate(std::size_t p) const {
        if (!(min_node_weight > 0.0)) throw Error("TreeParams: min_node_weight must be positive");
        if (min_events_per_child < 1) throw Error("TreeParams: min_events_per_child must be positive");
        if (max_depth < 1) throw Error("TreeParams: max_depth must be positive");
        if (mtry && (*mtry < 1 || static_cast<std::size_t>(*mtry) > p))
            throw Error("TreeParams: mtry must be in [1, p]");
    }
};

// Squared weighted log-rank statistic between two groups: (O - E)^2 / V over
// the pooled distinct event times. Weights are rescaled internally so the
// total equals the row count, making the statistic invariant to a global
// weight scale. Returns 0 when the variance is 0.
inline double logrank_statistic(std::span<const TimeToEventRecord> left,
                                std::span<const TimeToEventRecord> right) {
    if (left.empty() || right.empty()) throw Error("logrank_statistic: both groups must be nonempty");
    struct Obs {
        double time;
        bool event;
        double weight;
        bool is_left;
    };
    std::vector<Obs> obs;
    obs.reserve(left.size() + right.size());
    double total_weight = 0.0;
    for (const auto& r : left) {
        obs.push_back({r.time, r.event, r.weight, true});
        total_weight += r.weight;
    }
    for (const auto& r : right) {
        obs.push_back({r.time, r.event, r.weight, false});
        total_weight += r.weight;
    }
    if (!(total_weight > 0.0)) throw Error("logrank_statistic: all weights are zero");
    const double scale = static_cast<double>(obs.size()) / total_weight;
    std::sort(obs.begin(), obs.end(), [](const Obs& a, const Obs& b) { return a.time < b.time; });

    double numerator = 0.0;
    double variance = 0.0;
    double at_risk = 0.0;
    double at_risk_left = 0.0;
    for (const auto& o : obs) at_risk += o.weight * scale;
    for (const auto& o : obs)
        if (o.is_left) at_risk_left += o.weight * scale;

    std::size_t i = 0;
    while (i < obs.size()) {
        const double t = obs[i].time;
        double d_total = 0.0, d_left = 0.0, removed = 0.0, removed_left = 0.0;
        while (i < obs.size() && obs[i].time == t) {
            const double w = obs[i].weight * scale;
            if (obs[i].event) {
                d_total += w;
                if (obs[i].is_left) d_left += w;
            }
            removed += w;
            if (obs[i].is_left) removed_left += w;
            ++i;
        }
        if (d_total > 0.0 && at_risk > 0.0) {
            const double frac_left = at_risk_left / at_risk;
            numerator += d_left - d_total * frac_left;
            if (at_risk > 1.0 && at_risk > d_total)
                variance += d_total * frac_left * (1.0 - frac_left) * (at_risk - d_total) / (at_risk - 1.0);
        }
        at_risk -= removed;
        at_risk_left -= removed_left;
    }
    if (!(variance > 0.0)) return 0.0;
    return numerator * numerator / variance;
}

// Weighted survival decision tree: recursive partitioning by the split that
// maximizes the log-rank statistic, no pruning, leaves keep their member rows
// for Kaplan-Meier / Nelson-Aalen estimates at prediction time.
class SurvivalTree {
public:
    struct Node {
        int feature = -1;                // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        std::vector<std::size_t> members;  // leaf rows, indices into records()

        bool is_leaf() const { return feature < 0; }
    };

    SurvivalTree(std::vector<TimeToEventRecord> records, TreeParams params, RngStream& rng)
        : records_(std::move(records)), params_(params) {
        if (records_.empty()) throw Error("SurvivalTree: empty replica");
        p_ = records_.front().covariates.size();
        params_.validate(p_);
        bool any_event = false;
        for (const auto& r : records_)
            if (r.event && r.weight > 0.0) any_event = true;
        if (!any_event) throw Error("SurvivalTree: replica has no events with positive weight");
        std::vector<std::size_t> all(records_.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        build(std::move(all), 1, rng);
    }

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<TimeToEventRecord>& records() const { return records_; }
    std::size_t feature_count() const { return p_; }

    // Deterministic routing: go left iff x[feature] <= threshold.
    int find_leaf(std::span<const double> x) const {
        if (x.size() != p_) throw Error("SurvivalTree: covariate vector has wrong length");
        int id = 0;
        while (!nodes_[static_cast<std::size_t>(id)].is_leaf()) {
            const Node& nd = nodes_[static_cast<std::size_t>(id)];
            id = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
        }
        return id;
    }

    // The training rows (with their replica weights) stored at a leaf.
    std::vector<TimeToEventRecord> leaf_members(int leaf_id) const {
        if (leaf_id < 0 || static_cast<std::size_t>(leaf_id) >= nodes_.size())
            throw Error("SurvivalTree: unknown leaf id");
        const Node& nd = nodes_[static_cast<std::size_t>(leaf_id)];
        if (!nd.is_leaf()) throw Error("SurvivalTree: node is not a leaf");
        std::vector<TimeToEventRecord> out;
        out.reserve(nd.members.size());
        for (std::size_t i : nd.members) out.push_back(records_[i]);
        return out;
    }

    void append_leaf_members(int leaf_id, std::vector<TimeToEventRecord>& out) const {
        const Node& nd = nodes_[static_cast<std::size_t>(leaf_id)];
        for (std::size_t i : nd.members) out.push_back(records_[i]);
    }

    std::vector<int> leaf_ids() const {
        std::vector<int> ids;
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (nodes_[i].is_leaf()) ids.push_back(static_cast<int>(i));
        return ids;
    }

    // Indented plain-text rendering for inspection.
    void dump(std::ostream& os, const std::vector<std::string>& feature_names) const {
        dump_node(os, 0, 0, feature_names);
    }

    // Used by model deserialization.
    SurvivalTree(std::vector<TimeToEventRecord> records, TreeParams params, std::vector<Node> nodes)
        : records_(std::move(records)), params_(params), nodes_(std::move(nodes)) {
        p_ = records_.empty() ? 0 : records_.front().covariates.size();
    }

    const TreeParams& params() const { return params_; }

private:
    struct SplitChoice {
        int feature = -1;
        double threshold = 0.0;
        double statistic = 0.0;
    };

    void build(std::vector<std::size_t> members, int depth, RngStream& rng) {
        nodes_.emplace_back();
        const auto node_id = static_cast<int>(nodes_.size() - 1);
        SplitChoice best;
        if (depth <= params_.max_depth) best = find_best_split(members, rng);
        if (best.feature < 0) {
            nodes_[static_cast<std::size_t>(node_id)].members = std::move(members);
            return;
        }
        std::vector<std::size_t> left_members, right_members;
        for (std::size_t i : members) {
            if (records_[i].covariates[static_cast<std::size_t>(best.feature)] <= best.threshold)
                left_members.push_back(i);
            else
                right_members.push_back(i);
        }
        nodes_[static_cast<std::size_t>(node_id)].feature = best.feature;
        nodes_[static_cast<std::size_t>(node_id)].threshold = best.threshold;
        const auto left_id = static_cast<int>(nodes_.size());
        nodes_[static_cast<std::size_t>(node_id)].left = left_id;
        build(std::move(left_members), depth + 1, rng);
        const auto right_id = static_cast<int>(nodes_.size());
        nodes_[static_cast<std::size_t>(node_id)].right = right_id;
        build(std::move(right_members), depth + 1, rng);
    }

    // Candidate thresholds are midpoints between consecutive distinct values
    // of each (sampled) feature. Ties in the statistic resolve to the lower
    // feature index, then the lower threshold (strict improvement required).
    SplitChoice find_best_split(const std::vector<std::size_t>& members, RngStream& rng) {
        SplitChoice best;
        std::vector<int> features(p_);
        std::iota(features.begin(), features.end(), 0);
        if (params_.mtry && static_cast<std::size_t>(*params_.mtry) < p_) {
            // Partial Fisher-Yates; sorted so candidate order stays canonical.
            for (std::size_t i = 0; i < static_cast<std::size_t>(*params_.mtry); ++i) {
                const std::size_t j = i + rng.uniform_int(p_ - i);
                std::swap(features[i], features[j]);
            }
            features.resize(static_cast<std::size_t>(*params_.mtry));
            std::sort(features.begin(), features.end());
        }

        std::vector<TimeToEventRecord> left_buf, right_buf;
        for (int f : features) {
            std::vector<double> values;
            values.reserve(members.size());
            for (std::size_t i : members) values.push_back(records_[i].covariates[static_cast<std::size_t>(f)]);
            std::sort(values.begin(), values.end());
            values.erase(std::unique(values.begin(), values.end()), values.end());
            for (std::size_t v = 0; v + 1 < values.size(); ++v) {
                const double threshold = values[v] + 0.5 * (values[v + 1] - values[v]);
                left_buf.clear();
                right_buf.clear();
                double left_weight = 0.0, right_weight = 0.0;
                int left_events = 0, right_events = 0;
                for (std::size_t i : members) {
                    const auto& r = records_[i];
                    if (r.covariates[static_cast<std::size_t>(f)] <= threshold) {
                        left_buf.push_back(r);
                        left_weight += r.weight;
                        if (r.event && r.weight > 0.0) ++left_events;
                    } else {
                        right_buf.push_back(r);
                        right_weight += r.weight;
                        if (r.event && r.weight > 0.0) ++right_events;
                    }
                }
                if (left_weight < params_.min_node_weight || right_weight < params_.min_node_weight) continue;
                if (left_events < params_.min_events_per_child || right_events < params_.min_events_per_child)
                    continue;
                const double stat = logrank_statistic(left_buf, right_buf);
                if (stat > best.statistic) best = {f, threshold, stat};
            }
        }
        return best;
    }

    void dump_node(std::ostream& os, int id, int indent, const std::vector<std::string>& feature_names) const {
        const Node& nd = nodes_[static_cast<std::size_t>(id)];
        for (int i = 0; i < indent; ++i) os << "  ";
        if (nd.is_leaf()) {
            double w = 0.0;
            for (std::size_t i : nd.members) w += records_[i].weight;
            os << "leaf n=" << nd.members.size() << " weight=" << w << '\n';
            return;
        }
        const auto f = static_cast<std::size_t>(nd.feature);
        os << (f < feature_names.size() ? feature_names[f] : "x" + std::to_string(f)) << " <= " << nd.threshold
           << '\n';
        dump_node(os, nd.left, indent + 1, feature_names);
        dump_node(os, nd.right, indent + 1, feature_names);
    }

    std::vector<TimeToEventRecord> records_;
    TreeParams params_;
    std::vector<Node> nodes_;
    std::size_t p_ = 0;
};

// Fit a weighted survival tree on a bootstrap replica. Replica weights are
// rescaled to effective observations (weight * m) so min_node_weight applies
// in observation units for weighted and unweighted replicas alike.
inline SurvivalTree fit_survival_tree(const BootstrapReplica& replica, const TreeParams& params, RngStream& rng) {
    if (replica.rows.empty()) throw Error("fit_survival_tree: empty replica");
    return SurvivalTree(replica.effective_rows(), params, rng);
}

inline int find_leaf(const SurvivalTree& tree, std::span<const double> x) { return tree.find_leaf(x); }

inline std::vector<TimeToEventRecord> leaf_members(const SurvivalTree& tree, int leaf_id) {
    return tree.leaf_members(leaf_id);
}

}  // namespace gbest
