#include "pursuit/clustering.hpp"

#include <ostream>

namespace pursuit {

std::string to_string(ClusterMethod m)
{
    switch (m) {
    case ClusterMethod::Sofm: return "SOFM";
    case ClusterMethod::KMeans: return "KMEANS";
    case ClusterMethod::Dbscan: return "DBSCAN";
    case ClusterMethod::Singleton: return "SINGLETON";
    }
    return "?";
}

ClusterMethod parse_cluster_method(const std::string& s)
{
    if (s == "SOFM") return ClusterMethod::Sofm;
    if (s == "KMEANS") return ClusterMethod::KMeans;
    if (s == "DBSCAN") return ClusterMethod::Dbscan;
    if (s == "SINGLETON") return ClusterMethod::Singleton;
    throw std::invalid_argument("unknown clustering method '" + s + "'");
}

int ClusterAssignment::label_of(AgentId evader) const
{
    for (std::size_t i = 0; i < evader_ids.size(); ++i)
        if (evader_ids[i] == evader) return labels[i];
    throw std::out_of_range("evader " + std::to_string(evader) + " has no label");
}

std::vector<std::vector<AgentId>> ClusterAssignment::groups() const
{
    std::vector<std::vector<AgentId>> out(static_cast<std::size_t>(group_count()));
    for (std::size_t i = 0; i < labels.size(); ++i) out[labels[i]].push_back(evader_ids[i]);
    return out;
}

void write_csv(std::ostream& os, const ClusterAssignment& a)
{
    os << "evader_id,group_index,method\n";
    for (std::size_t i = 0; i < a.labels.size(); ++i)
        os << a.evader_ids[i] << ',' << a.labels[i] << ',' << to_string(a.method) << '\n';
}

std::vector<int> compact_labels(const std::vector<int>& raw)
{
    std::map<int, int> remap;
    std::vector<int> out;
    out.reserve(raw.size());
    for (int l : raw) {
        auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()));
        out.push_back(it->second);
    }
    return out;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b)
{
    return a.size() == b.size() && compact_labels(a) == compact_labels(b);
}

namespace {

ClusterAssignment make_assignment(const MembershipMatrix& m, std::vector<int> labels,
                                  ClusterMethod method)
{
    ClusterAssignment a;
    a.evader_ids = m.evader_ids;
    a.labels = std::move(labels);
    a.method = method;
    return a;
}

}  // namespace

SofmNetwork<double> train_sofm(const MembershipMatrix& m, const SofmConfig& cfg)
{
    return train_sofm<double>(m.values, cfg);
}

ClusterAssignment assign(const SofmNetwork<double>& net, const MembershipMatrix& m)
{
    return make_assignment(m, sofm_labels(net, m.values), ClusterMethod::Sofm);
}

ClusterAssignment kmeans(const MembershipMatrix& m, int k, std::uint64_t seed)
{
    return make_assignment(m, kmeans_labels(m.values, k, seed), ClusterMethod::KMeans);
}

ClusterAssignment dbscan(const MembershipMatrix& m, double eps, int min_pts)
{
    return make_assignment(m, dbscan_labels(m.values, eps, min_pts), ClusterMethod::Dbscan);
}

ClusterAssignment singleton(const MembershipMatrix& m)
{
    std::vector<int> labels(m.evader_ids.size());
    std::iota(labels.begin(), labels.end(), 0);
    return make_assignment(m, std::move(labels), ClusterMethod::Singleton);
}

ClusterAssignment cluster(const MembershipMatrix& m, ClusterMethod method, const ClusterParams& params)
{
    switch (method) {
    case ClusterMethod::Sofm:
        if (params.network) return assign(*params.network, m);
        return assign(train_sofm(m, params.sofm), m);
    case ClusterMethod::KMeans: return kmeans(m, params.k, params.seed);
    case ClusterMethod::Dbscan: return dbscan(m, params.eps, params.min_pts);
    case ClusterMethod::Singleton: return singleton(m);
    }
    throw std::invalid_argument("unknown clustering method");
}

}  // namespace pursuit
