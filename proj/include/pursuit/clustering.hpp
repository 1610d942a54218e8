#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pursuit/membership.hpp"

namespace pursuit {

enum class ClusterMethod : std::uint8_t { Sofm, KMeans, Dbscan, Singleton };

std::string to_string(ClusterMethod m);
ClusterMethod parse_cluster_method(const std::string& s);

/// Row-to-group labelling. Labels are contiguous from 0.
struct ClusterAssignment {
    std::vector<AgentId> evader_ids;
    std::vector<int> labels;
    ClusterMethod method = ClusterMethod::Singleton;

    int group_count() const
    {
        return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    }
    int label_of(AgentId evader) const;
    std::vector<std::vector<AgentId>> groups() const;
};

/// Evader id, group index, method tag.
void write_csv(std::ostream& os, const ClusterAssignment& a);

/// Relabels so that groups are numbered in order of first appearance.
std::vector<int> compact_labels(const std::vector<int>& raw);

struct SofmConfig {
    int output_nodes = 9;
    int epochs = 200;
    double lr_initial = 0.5;
    double lr_final = 0.01;
    double radius_initial = 4.5;
    double radius_final = 0.5;
    std::uint64_t seed = 0;

    /// Defaults tied to the number of output units.
    static SofmConfig for_nodes(int k, std::uint64_t seed = 0)
    {
        SofmConfig c;
        c.output_nodes = k;
        c.radius_initial = std::max(0.5, k / 2.0);
        c.seed = seed;
        return c;
    }

    void validate() const
    {
        if (output_nodes < 1) throw std::invalid_argument("SOFM needs at least one output node");
        if (epochs < 0) throw std::invalid_argument("SOFM epochs must be >= 0");
        if (!(lr_final > 0.0) || lr_initial < lr_final)
            throw std::invalid_argument("SOFM learning rates must satisfy lr_initial >= lr_final > 0");
        if (radius_final < 0.0 || radius_initial < radius_final)
            throw std::invalid_argument("SOFM radii must satisfy radius_initial >= radius_final >= 0");
    }
};

/// Self-organizing feature map over a 1-D line of output units.
template <typename Scalar>
struct SofmNetwork {
    using Weights = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    Weights weights;  ///< one row per output unit
    SofmConfig config;

    Eigen::Index units() const { return weights.rows(); }
    Eigen::Index dim() const { return weights.cols(); }
};

namespace detail {

template <typename Derived>
void require_samples(const Eigen::MatrixBase<Derived>& samples)
{
    if (samples.rows() == 0 || samples.cols() == 0)
        throw std::invalid_argument("clustering needs a non-empty sample matrix");
}

template <typename Scalar>
Scalar schedule(Scalar from, Scalar to, int epoch, int epochs)
{
    if (epochs <= 1) return from;
    const Scalar t = static_cast<Scalar>(epoch) / static_cast<Scalar>(epochs - 1);
    return from + (to - from) * t;
}

}  // namespace detail

/// Index of the unit nearest to `x`; ties go to the lowest index.
template <typename Scalar, typename Derived>
Eigen::Index best_matching_unit(const SofmNetwork<Scalar>& net, const Eigen::MatrixBase<Derived>& x)
{
    Eigen::Index best = 0;
    Scalar best_d = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index k = 0; k < net.units(); ++k) {
        const Scalar d = (net.weights.row(k) - x).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

/// Mean Euclidean distance from each sample to its best-matching unit.
template <typename Scalar, typename Derived>
Scalar quantization_error(const SofmNetwork<Scalar>& net, const Eigen::MatrixBase<Derived>& samples)
{
    Scalar total = 0;
    for (Eigen::Index i = 0; i < samples.rows(); ++i)
        total += (net.weights.row(best_matching_unit(net, samples.row(i))) - samples.row(i)).norm();
    return samples.rows() > 0 ? total / static_cast<Scalar>(samples.rows()) : Scalar(0);
}

/// Uniform [0, 1) weights drawn from the config seed.
template <typename Scalar>
SofmNetwork<Scalar> init_sofm(Eigen::Index dim, const SofmConfig& cfg)
{
    cfg.validate();
    SofmNetwork<Scalar> net;
    net.config = cfg;
    net.weights.resize(cfg.output_nodes, dim);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Eigen::Index k = 0; k < net.weights.rows(); ++k)
        for (Eigen::Index j = 0; j < net.weights.cols(); ++j)
            net.weights(k, j) = static_cast<Scalar>(u(rng));
    return net;
}

/// Online competitive learning. Each epoch visits the samples in a seeded
/// random order; learning rate and Gaussian neighbourhood radius decay
/// linearly from their initial to final values.
template <typename Scalar, typename Derived>
void train_sofm(SofmNetwork<Scalar>& net, const Eigen::MatrixBase<Derived>& samples)
{
    detail::require_samples(samples);
    const SofmConfig& cfg = net.config;
    cfg.validate();
    if (samples.cols() != net.dim()) throw std::invalid_argument("SOFM dimension mismatch");

    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(samples.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const Scalar lr = detail::schedule<Scalar>(cfg.lr_initial, cfg.lr_final, epoch, cfg.epochs);
        const Scalar radius =
            detail::schedule<Scalar>(cfg.radius_initial, cfg.radius_final, epoch, cfg.epochs);
        std::shuffle(order.begin(), order.end(), rng);
        for (Eigen::Index i : order) {
            const auto x = samples.row(i);
            const Eigen::Index bmu = best_matching_unit(net, x);
            for (Eigen::Index k = 0; k < net.units(); ++k) {
                const Scalar lattice = static_cast<Scalar>(k - bmu);
                Scalar h;
                if (radius > Scalar(0))
                    h = std::exp(-lattice * lattice / (Scalar(2) * radius * radius));
                else
                    h = k == bmu ? Scalar(1) : Scalar(0);
                if (h == Scalar(0)) continue;
                net.weights.row(k) += lr * h * (x.template cast<Scalar>() - net.weights.row(k));
            }
        }
    }
}

template <typename Scalar = double, typename Derived>
SofmNetwork<Scalar> train_sofm(const Eigen::MatrixBase<Derived>& samples, const SofmConfig& cfg)
{
    detail::require_samples(samples);
    auto net = init_sofm<Scalar>(samples.cols(), cfg);
    train_sofm(net, samples);
    return net;
}

/// BMU index per row, compacted to contiguous group indices in ascending
/// unit order.
template <typename Scalar, typename Derived>
std::vector<int> sofm_labels(const SofmNetwork<Scalar>& net, const Eigen::MatrixBase<Derived>& samples)
{
    if (samples.cols() != net.dim()) throw std::invalid_argument("SOFM dimension mismatch");
    std::vector<Eigen::Index> bmu(static_cast<std::size_t>(samples.rows()));
    for (Eigen::Index i = 0; i < samples.rows(); ++i) bmu[i] = best_matching_unit(net, samples.row(i));
    std::vector<Eigen::Index> used = bmu;
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    std::vector<int> labels(bmu.size());
    for (std::size_t i = 0; i < bmu.size(); ++i)
        labels[i] = static_cast<int>(std::lower_bound(used.begin(), used.end(), bmu[i]) - used.begin());
    return labels;
}

/// Lloyd iterations from farthest-point seeding: the first centre is a
/// seeded random row, each further centre the row farthest from those
/// already chosen. Stops at an assignment fixpoint or after `max_iter`.
template <typename Derived>
std::vector<int> kmeans_labels(const Eigen::MatrixBase<Derived>& samples, int k, std::uint64_t seed,
                               int max_iter = 100)
{
    using Scalar = typename Derived::Scalar;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    detail::require_samples(samples);
    const Eigen::Index n = samples.rows();
    if (k < 1 || k > n) throw std::invalid_argument("k must lie in [1, rows]");

    Mat centers(k, samples.cols());
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    centers.row(0) = samples.row(pick(rng));
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nearest(n);
    for (Eigen::Index i = 0; i < n; ++i) nearest(i) = (samples.row(i) - centers.row(0)).squaredNorm();
    for (int c = 1; c < k; ++c) {
        Eigen::Index far = 0;
        nearest.maxCoeff(&far);
        centers.row(c) = samples.row(far);
        for (Eigen::Index i = 0; i < n; ++i)
            nearest(i) = std::min(nearest(i), (samples.row(i) - centers.row(c)).squaredNorm());
    }

    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::Index best = 0;
            (centers.rowwise() - samples.row(i)).rowwise().squaredNorm().minCoeff(&best);
            if (labels[i] != static_cast<int>(best)) {
                labels[i] = static_cast<int>(best);
                changed = true;
            }
        }
        if (!changed) break;
        Mat sums = Mat::Zero(k, samples.cols());
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(labels[i]) += samples.row(i);
            ++counts[labels[i]];
        }
        // Empty clusters keep their previous centre.
        for (int c = 0; c < k; ++c)
            if (counts[c] > 0) centers.row(c) = sums.row(c) / static_cast<Scalar>(counts[c]);
    }
    return compact_labels(labels);
}

/// Density clustering on Euclidean row distance. Noise rows become their
/// own singleton groups so every row is labelled.
template <typename Derived>
std::vector<int> dbscan_labels(const Eigen::MatrixBase<Derived>& samples, double eps, int min_pts)
{
    if (!(eps > 0.0)) throw std::invalid_argument("DBSCAN eps must be > 0");
    if (min_pts < 1) throw std::invalid_argument("DBSCAN min_pts must be >= 1");
    const Eigen::Index n = samples.rows();
    constexpr int kUnvisited = -2;
    constexpr int kNoise = -1;
    std::vector<int> labels(static_cast<std::size_t>(n), kUnvisited);
    const double eps2 = eps * eps;

    auto region = [&](Eigen::Index i) {
        std::vector<Eigen::Index> out;
        for (Eigen::Index j = 0; j < n; ++j)
            if (static_cast<double>((samples.row(i) - samples.row(j)).squaredNorm()) <= eps2)
                out.push_back(j);
        return out;
    };

    int cluster = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (labels[i] != kUnvisited) continue;
        auto seeds = region(i);
        if (static_cast<int>(seeds.size()) < min_pts) {
            labels[i] = kNoise;
            continue;
        }
        labels[i] = cluster;
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            const Eigen::Index j = seeds[s];
            if (labels[j] == kNoise) labels[j] = cluster;  // border point
            if (labels[j] != kUnvisited) continue;
            labels[j] = cluster;
            auto more = region(j);
            if (static_cast<int>(more.size()) >= min_pts)
                seeds.insert(seeds.end(), more.begin(), more.end());
        }
        ++cluster;
    }
    for (auto& l : labels)
        if (l == kNoise) l = cluster++;
    return compact_labels(labels);
}

struct ClusterParams {
    SofmConfig sofm;
    /// Pre-trained network used by SOFM instead of training a fresh one.
    const SofmNetwork<double>* network = nullptr;
    int k = 3;
    std::uint64_t seed = 0;
    double eps = 0.1;
    int min_pts = 2;
};

SofmNetwork<double> train_sofm(const MembershipMatrix& m, const SofmConfig& cfg);
ClusterAssignment assign(const SofmNetwork<double>& net, const MembershipMatrix& m);
ClusterAssignment kmeans(const MembershipMatrix& m, int k, std::uint64_t seed);
ClusterAssignment dbscan(const MembershipMatrix& m, double eps, int min_pts);
ClusterAssignment singleton(const MembershipMatrix& m);
ClusterAssignment cluster(const MembershipMatrix& m, ClusterMethod method, const ClusterParams& params);

/// True when both labelings induce the same partition of rows.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace pursuit
